"""Bundled equivalence relations, each realized as an idempotent canonicalizer.

Textual syntax (CLI/config)::

    identity | multiset | parity | cyl:n=4 | bitdepth:k=8 | down:m=4
    band:rate=48000,cutoff=3000 | speech-band
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial
from math import comb

import numpy as np

from .core import (ConfigurationError, EncodingError, EquivalenceRelation,
                   MacrostateError, SymbolString)

KINDS = ("identity", "multiset", "parity", "prefix_cylinder", "bitdepth",
         "downsample", "bandlimit")
ENUMERABLE = ("identity", "multiset", "parity", "prefix_cylinder")
SIGNAL_KINDS = ("bitdepth", "downsample", "bandlimit")
MAX_UNIVERSE_BITS = 20
MAX_FIXED_POINT_CYCLES = 64

_SHORT_NAMES = {"cyl": "prefix_cylinder", "down": "downsample", "band": "bandlimit"}
_PARAM_NAMES = {
    "prefix_cylinder": ("n",),
    "bitdepth": ("k",),
    "downsample": ("m",),
    "bandlimit": ("rate", "cutoff"),
}


class NotEnumerable(MacrostateError):
    pass


class FixedPointError(MacrostateError):
    pass


@dataclass(frozen=True)
class RelationSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown relation kind {self.kind!r}")
        want = _PARAM_NAMES.get(self.kind, ())
        if set(self.params) != set(want):
            raise ConfigurationError(
                f"{self.kind} takes parameters {list(want)}, got {sorted(self.params)}")
        p = self.params
        if self.kind == "prefix_cylinder" and p["n"] < 0:
            raise ConfigurationError("cyl: n must be >= 0")
        if self.kind == "bitdepth" and not 1 <= p["k"] <= 16:
            raise ConfigurationError("bitdepth: k must be in 1..16")
        if self.kind == "downsample" and p["m"] < 1:
            raise ConfigurationError("down: m must be >= 1")
        if self.kind == "bandlimit" and not 0 < p["cutoff"] < p["rate"] / 2:
            raise ConfigurationError("band: need 0 < cutoff < rate/2")

    @classmethod
    def parse(cls, text: str) -> "RelationSpec":
        text = text.strip()
        if text == "speech-band":
            return cls("bandlimit", {"rate": 48000, "cutoff": 3000})
        head, _, rest = text.partition(":")
        kind = _SHORT_NAMES.get(head, head)
        params = {}
        if rest:
            for item in rest.split(","):
                key, eq, value = item.partition("=")
                if not eq:
                    raise ConfigurationError(f"malformed relation parameter {item!r}")
                try:
                    params[key.strip()] = int(value)
                except ValueError:
                    raise ConfigurationError(f"relation parameter {key} must be an integer") from None
        return cls(kind, params)

    def text(self) -> str:
        p = self.params
        if self.kind == "prefix_cylinder":
            return f"cyl:n={p['n']}"
        if self.kind == "bitdepth":
            return f"bitdepth:k={p['k']}"
        if self.kind == "downsample":
            return f"down:m={p['m']}"
        if self.kind == "bandlimit":
            if p == {"rate": 48000, "cutoff": 3000}:
                return "speech-band"
            return f"band:rate={p['rate']},cutoff={p['cutoff']}"
        return self.kind


def _check_encoding(x: SymbolString, spec: RelationSpec):
    if spec.kind == "identity":
        return
    if spec.kind in SIGNAL_KINDS:
        if x.encoding != "pcm16-mono":
            raise EncodingError(f"{spec.kind} requires pcm16-mono input, got {x.encoding}")
    elif x.encoding == "pcm16-mono":
        raise EncodingError(f"{spec.kind} requires bits or bytes input, got pcm16-mono")


def _bandlimit_once(samples: np.ndarray, rate: int, cutoff: int) -> np.ndarray:
    n = samples.size
    spectrum = np.fft.rfft(samples.astype(np.float64))
    spectrum[np.fft.rfftfreq(n, d=1.0 / rate) > cutoff] = 0.0
    out = np.fft.irfft(spectrum, n)
    return np.clip(np.rint(out), -32768, 32767).astype(np.int16)


def bandlimit_samples(samples: np.ndarray, rate: int, cutoff: int) -> np.ndarray:
    """Zero every DFT bin above ``cutoff`` and re-quantize, to a fixed point.

    Rounding makes a single pass only approximately a projection, so the
    cycle repeats until the output reproduces itself.
    """
    current = np.asarray(samples, dtype=np.int16)
    if current.size == 0:
        return current
    for _ in range(MAX_FIXED_POINT_CYCLES):
        nxt = _bandlimit_once(current, rate, cutoff)
        if np.array_equal(nxt, current):
            return current
        current = nxt
    raise FixedPointError(
        f"bandlimit did not reach a fixed point within {MAX_FIXED_POINT_CYCLES} cycles")


def _cylinder_bits(bits: str, n: int) -> str:
    n = min(n, len(bits))
    return bits[:n] + "0" * (len(bits) - n)


def canonicalize(x: SymbolString, spec: RelationSpec) -> SymbolString:
    _check_encoding(x, spec)
    kind = spec.kind
    if kind == "identity":
        return x
    if kind == "multiset":
        if x.encoding == "bits":
            ones = x.bits().count("1")
            return SymbolString.from_bits("0" * (x.bit_length - ones) + "1" * ones)
        return SymbolString.from_bytes(bytes(sorted(x.payload)))
    if kind == "parity":
        return SymbolString.from_bits(str(x.bits().count("1") & 1))
    if kind == "prefix_cylinder":
        cut = _cylinder_bits(x.bits(), spec.params["n"])
        if x.encoding == "bits":
            return SymbolString.from_bits(cut)
        return SymbolString.from_bytes(SymbolString.from_bits(cut).payload)

    samples = x.samples()
    if kind == "bitdepth":
        mask = np.int16(~((1 << (16 - spec.params["k"])) - 1))
        return SymbolString.from_samples(samples & mask)
    if kind == "downsample":
        m = spec.params["m"]
        held = np.repeat(samples[::m], m)[: samples.size]
        return SymbolString.from_samples(held)
    return SymbolString.from_samples(
        bandlimit_samples(samples, spec.params["rate"], spec.params["cutoff"]))


def same_class(x: SymbolString, y: SymbolString, spec: RelationSpec) -> bool:
    return canonicalize(x, spec) == canonicalize(y, spec)


def class_size(x: SymbolString, universe_bits: int, spec: RelationSpec) -> int:
    """Closed-form |X/P| within the universe of ``universe_bits``-bit strings."""
    kind = spec.kind
    if kind not in ENUMERABLE:
        raise NotEnumerable(f"{kind} classes are not enumerable")
    if kind == "identity":
        return 1
    if kind == "multiset":
        return comb(universe_bits, x.bits().count("1"))
    if kind == "parity":
        return 2 ** (universe_bits - 1) if universe_bits else 1
    return 2 ** max(0, universe_bits - spec.params["n"])


def enumerate_class(x: SymbolString, universe_bits: int, spec: RelationSpec) -> list[SymbolString]:
    """Every ``universe_bits``-bit string in the class of ``x``, sorted."""
    if spec.kind not in ENUMERABLE:
        raise NotEnumerable(f"{spec.kind} classes are not enumerable")
    if x.encoding != "bits":
        raise EncodingError(f"class enumeration needs a bits string, got {x.encoding}")
    if not 0 <= universe_bits <= MAX_UNIVERSE_BITS:
        raise ConfigurationError(f"universe_bits must be in 0..{MAX_UNIVERSE_BITS}")
    bits = x.bits()
    if len(bits) != universe_bits:
        raise ConfigurationError("x must have exactly universe_bits bits")
    u = universe_bits
    if spec.kind == "identity":
        members = [bits]
    elif spec.kind == "multiset":
        ones = bits.count("1")
        members = []
        for pos in itertools.combinations(range(u), ones):
            row = ["0"] * u
            for i in pos:
                row[i] = "1"
            members.append("".join(row))
    elif spec.kind == "parity":
        want = bits.count("1") & 1
        members = [s for s in ("".join(t) for t in itertools.product("01", repeat=u))
                   if s.count("1") & 1 == want]
    else:
        n = min(spec.params["n"], u)
        members = [bits[:n] + "".join(t) for t in itertools.product("01", repeat=u - n)]
    return [SymbolString.from_bits(s) for s in sorted(members)]


def make_relation(spec: RelationSpec | str) -> EquivalenceRelation:
    if isinstance(spec, str):
        spec = RelationSpec.parse(spec)
    enumerator = None
    if spec.kind in ENUMERABLE:
        enumerator = partial(enumerate_class, spec=spec)
    return EquivalenceRelation(
        name=spec.kind,
        canonical_form=partial(canonicalize, spec=spec),
        params=dict(spec.params),
        class_enumerator=enumerator,
        spec_text=spec.text(),
    )


def relation_spec_of(relation: EquivalenceRelation) -> RelationSpec:
    return RelationSpec.parse(relation.spec_text)
