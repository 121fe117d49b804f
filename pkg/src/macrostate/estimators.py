"""Macrocomplexity estimates from a canonicalizer composed with a compressor.

The estimator is the computer-observer system: the relation maps X to its
canonical representative, and the compressor's code length for that
representative stands in for the class minimum.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from .compressors import Lz78Compressor
from .core import (ComplexityReport, Compressor, ConfigurationError,
                   EquivalenceRelation, MacrostateError, SymbolString,
                   concat_bits, join_for_conditional)
from .quantizers import make_relation

JOINS = {"sentinel": join_for_conditional, "concat": concat_bits}
DISTANCES = ("max", "ncd", "sum")


class UndefinedDistance(MacrostateError, ZeroDivisionError):
    pass


@dataclass(frozen=True)
class EstimatorConfig:
    relation: EquivalenceRelation
    compressor: Compressor
    clamp_negative_conditionals: bool = True
    join: str = "sentinel"

    def __post_init__(self):
        if isinstance(self.relation, str):
            object.__setattr__(self, "relation", make_relation(self.relation))
        if self.join not in JOINS:
            raise ConfigurationError(f"join must be one of {sorted(JOINS)}")

    @classmethod
    def default(cls, relation="identity", **kw) -> "EstimatorConfig":
        return cls(make_relation(relation) if isinstance(relation, str) else relation,
                   kw.pop("compressor", Lz78Compressor()), **kw)

    @property
    def relation_text(self) -> str:
        return self.relation.spec_text or self.relation.name


@dataclass(frozen=True)
class Conditional:
    value: float
    raw: float


def k_hat(x: SymbolString, cfg: EstimatorConfig) -> float:
    return cfg.compressor.length_of(x)


def s_hat(x: SymbolString, cfg: EstimatorConfig) -> float:
    return cfg.compressor.macro_length(x, cfg.relation)


def joint_length(a: SymbolString, b: SymbolString, cfg: EstimatorConfig) -> float:
    """Estimate of S(AB/P): the relation acts on each part before joining."""
    rel = cfg.relation
    joined = JOINS[cfg.join](rel(a), rel(b))
    if cfg.join == "concat":
        return cfg.compressor.macro_length(joined, rel)
    return cfg.compressor.length_of(joined)


def conditional_from(joint: float, s_b: float, clamp: bool = True) -> Conditional:
    raw = joint - s_b
    return Conditional(max(0.0, raw) if clamp else raw, raw)


def conditional_macrocomplexity(a: SymbolString, b: SymbolString,
                                cfg: EstimatorConfig) -> Conditional:
    """S((A|B)/P) = S(AB/P) - S(B/P), clamped at zero unless configured off."""
    return conditional_from(joint_length(a, b, cfg), s_hat(b, cfg),
                            cfg.clamp_negative_conditionals)


def max_distance(a: SymbolString, b: SymbolString, cfg: EstimatorConfig) -> float:
    return max(conditional_macrocomplexity(a, b, cfg).value,
               conditional_macrocomplexity(b, a, cfg).value)


def sum_distance(a: SymbolString, b: SymbolString, cfg: EstimatorConfig) -> float:
    return (conditional_macrocomplexity(a, b, cfg).value
            + conditional_macrocomplexity(b, a, cfg).value)


def normalized_macro_distance(a: SymbolString, b: SymbolString, cfg: EstimatorConfig,
                              symmetrize: str = "max") -> float:
    scale = max(s_hat(a, cfg), s_hat(b, cfg))
    if scale <= 0:
        raise UndefinedDistance("normalized distance undefined: both macrocomplexities are zero")
    if symmetrize == "max":
        num = max_distance(a, b, cfg)
    elif symmetrize == "sum":
        num = sum_distance(a, b, cfg)
    else:
        raise ConfigurationError("symmetrize must be 'max' or 'sum'")
    return num / scale


def boltzmann_estimate(x: SymbolString, cfg: EstimatorConfig) -> ComplexityReport:
    """K - S(X/P) as a log-cardinality estimate of the macrostate."""
    return ComplexityReport.from_lengths(k_hat(x, cfg), s_hat(x, cfg),
                                         cfg.relation.name, cfg.compressor.name)


class PairwiseDistances:
    """Caches s_hat per item and evaluates the chosen distance between ids.

    ``kind``: ``max`` (bits), ``ncd`` (max normalized by the larger s_hat),
    or ``sum`` (sum of the two conditionals, bits).
    """

    def __init__(self, items: dict[str, SymbolString], cfg: EstimatorConfig,
                 kind: str = "ncd"):
        if kind not in DISTANCES:
            raise ConfigurationError(f"distance must be one of {DISTANCES}")
        self.items = items
        self.cfg = cfg
        self.kind = kind
        self._canon: dict[str, SymbolString] = {}
        self._s: dict[str, float] = {}

    def canonical(self, key: str) -> SymbolString:
        hit = self._canon.get(key)
        if hit is None:
            hit = self._canon[key] = self.cfg.relation(self.items[key])
        return hit

    def s(self, key: str) -> float:
        hit = self._s.get(key)
        if hit is None:
            hit = self._s[key] = self.cfg.compressor.macro_length(self.items[key], self.cfg.relation)
        return hit

    def _cond(self, a: str, b: str) -> float:
        cfg = self.cfg
        joined = JOINS[cfg.join](self.canonical(a), self.canonical(b))
        if cfg.join == "concat":
            joint = cfg.compressor.macro_length(joined, cfg.relation)
        else:
            joint = cfg.compressor.length_of(joined)
        return conditional_from(joint, self.s(b), cfg.clamp_negative_conditionals).value

    def distance(self, a: str, b: str) -> float:
        ab, ba = self._cond(a, b), self._cond(b, a)
        if self.kind == "sum":
            return ab + ba
        d = max(ab, ba)
        if self.kind == "max":
            return d
        scale = max(self.s(a), self.s(b))
        if scale <= 0:
            raise UndefinedDistance(f"normalized distance undefined for {a!r}, {b!r}")
        return d / scale


def _pair_job(args):
    items, cfg, kind, a, b = args
    return PairwiseDistances(items, cfg, kind).distance(a, b)


def distance_matrix(items: dict[str, SymbolString], cfg: EstimatorConfig,
                    kind: str = "ncd", workers: int = 1) -> dict[tuple[str, str], float]:
    """All unordered pairs, keyed by sorted id pair. Output order is by id."""
    keys = sorted(items)
    pairs = list(combinations(keys, 2))
    if workers > 1 and pairs:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = [({a: items[a], b: items[b]}, cfg, kind, a, b) for a, b in pairs]
            values = list(pool.map(_pair_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        pd = PairwiseDistances(items, cfg, kind)
        values = [pd.distance(a, b) for a, b in pairs]
    return dict(zip(pairs, values))


def pair_distance(matrix: dict[tuple[str, str], float], a: str, b: str) -> float:
    return matrix[(a, b) if a <= b else (b, a)]

