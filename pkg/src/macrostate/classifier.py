"""Nearest-macrostate classification: Class(X) = argmin_i min_{Y in P_i} D(X, Y)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import ConfigurationError, MacrostateError, SymbolString
from .estimators import (EstimatorConfig, PairwiseDistances, distance_matrix,
                         pair_distance)


class ClassificationError(MacrostateError):
    pass


@dataclass
class Corpus:
    classes: dict[str, list[tuple[str, SymbolString]]]
    manifest: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if not self.classes:
            raise ConfigurationError("corpus has no classes")
        seen = set()
        for label, exemplars in self.classes.items():
            if not exemplars:
                raise ConfigurationError(f"class {label!r} has no exemplars")
            for ex_id, _ in exemplars:
                if ex_id in seen:
                    raise ConfigurationError(f"duplicate exemplar id {ex_id!r}")
                seen.add(ex_id)

    @property
    def labels(self) -> list[str]:
        return sorted(self.classes)

    def items(self) -> dict[str, SymbolString]:
        return {ex_id: x for exs in self.classes.values() for ex_id, x in exs}

    def label_of(self) -> dict[str, str]:
        return {ex_id: label for label, exs in self.classes.items() for ex_id, _ in exs}


@dataclass(frozen=True)
class ClassificationResult:
    input_id: str
    winner: str
    distances: dict
    witness: str
    tie: bool

    def to_dict(self) -> dict:
        return {"input_id": self.input_id, "winner": self.winner,
                "distances": dict(sorted(self.distances.items())),
                "witness": self.witness, "tie": self.tie}


def _argmin_exemplar(scored: list[tuple[float, str]], label: str):
    if not scored:
        raise ClassificationError(f"every exemplar of class {label!r} failed to evaluate")
    return min(scored)


def _pick_winner(per_class: dict[str, tuple[float, str]], input_id: str) -> ClassificationResult:
    if not per_class:
        raise ClassificationError(f"no class could be evaluated for {input_id!r}")
    best = min(d for d, _ in per_class.values())
    tied = sorted(label for label, (d, _) in per_class.items() if d == best)
    winner = tied[0]
    return ClassificationResult(input_id, winner,
                                {label: d for label, (d, _) in per_class.items()},
                                per_class[winner][1], len(tied) > 1)


def class_distance(x: SymbolString, label: str, corpus: Corpus, cfg: EstimatorConfig,
                   kind: str = "ncd", input_id: str = "<input>") -> tuple[float, str]:
    """Minimum distance from ``x`` to the exemplars of ``label`` and the witness.

    Ties go to the lexicographically smallest exemplar id.
    """
    if label not in corpus.classes:
        raise ConfigurationError(f"unknown class {label!r}")
    exemplars = dict(corpus.classes[label])
    key = input_id
    while key in exemplars:
        key = "<" + key + ">"
    pd = PairwiseDistances({key: x, **exemplars}, cfg, kind)
    scored = []
    for ex_id in sorted(exemplars):
        try:
            scored.append((pd.distance(key, ex_id), ex_id))
        except MacrostateError:
            continue
    return _argmin_exemplar(scored, label)


def classify(x: SymbolString, corpus: Corpus, cfg: EstimatorConfig, kind: str = "ncd",
             input_id: str = "<input>") -> ClassificationResult:
    per_class = {}
    for label in corpus.labels:
        try:
            per_class[label] = class_distance(x, label, corpus, cfg, kind, input_id)
        except ClassificationError:
            continue
    return _pick_winner(per_class, input_id)


def evaluate_loocv(corpus: Corpus, cfg: EstimatorConfig, kind: str = "ncd",
                   workers: int = 1) -> dict:
    """Leave-one-out: classify each exemplar against the rest of the corpus."""
    for label in corpus.labels:
        if len(corpus.classes[label]) < 2:
            raise ConfigurationError(f"class {label!r} needs at least 2 exemplars for LOOCV")
    items = corpus.items()
    truth = corpus.label_of()
    matrix = distance_matrix(items, cfg, kind, workers)
    labels = corpus.labels
    confusion = {t: {p: 0 for p in labels} for t in labels}
    per_item = []
    correct = 0
    for held in sorted(items):
        per_class = {}
        for label in labels:
            scored = [(pair_distance(matrix, held, ex_id), ex_id)
                      for ex_id, _ in corpus.classes[label] if ex_id != held]
            per_class[label] = min(scored)
        result = _pick_winner(per_class, held)
        confusion[truth[held]][result.winner] += 1
        hit = result.winner == truth[held]
        correct += hit
        per_item.append({"id": held, "label": truth[held], "predicted": result.winner,
                         "correct": hit, "tie": result.tie, "witness": result.witness,
                         "distances": dict(sorted(result.distances.items()))})
    return {"accuracy": correct / len(items), "n": len(items), "distance": kind,
            "confusion": confusion, "items": per_item}
