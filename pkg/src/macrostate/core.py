"""Shared value types: microstate strings, equivalence relations, compressors.

Everything here is immutable once constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

ENCODINGS = ("bits", "bytes", "pcm16-mono")
SEPARATOR = b"\x00\xff"


class MacrostateError(Exception):
    """Base class for all errors raised by this package."""


class EncodingError(MacrostateError, ValueError):
    pass


class ConfigurationError(MacrostateError, ValueError):
    pass


class FormatError(MacrostateError, ValueError):
    pass


@dataclass(frozen=True)
class SymbolString:
    """A microstate: packed payload plus its length in bits.

    For ``bits`` strings the payload is packed high bit first and the pad
    bits of the last byte are zero.
    """

    payload: bytes
    bit_length: int
    encoding: str = "bytes"

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise EncodingError(f"unknown encoding {self.encoding!r}")
        if not isinstance(self.payload, bytes):
            object.__setattr__(self, "payload", bytes(self.payload))
        nbytes = len(self.payload)
        if self.bit_length < 0 or self.bit_length > 8 * nbytes:
            raise EncodingError("bit_length exceeds payload size")
        if self.encoding == "bits":
            if nbytes != (self.bit_length + 7) // 8:
                raise EncodingError("bits payload has spare bytes")
            pad = 8 * nbytes - self.bit_length
            if pad and self.payload[-1] & ((1 << pad) - 1):
                raise EncodingError("trailing pad bits must be zero")
        else:
            if self.bit_length != 8 * nbytes:
                raise EncodingError("byte-granular strings must use whole bytes")
            if self.encoding == "pcm16-mono" and nbytes % 2:
                raise EncodingError("pcm16-mono payload must have even byte count")

    @classmethod
    def from_bits(cls, bits: str) -> "SymbolString":
        if any(c not in "01" for c in bits):
            raise EncodingError("bit strings may only contain '0' and '1'")
        n = len(bits)
        if n == 0:
            return cls(b"", 0, "bits")
        padded = bits + "0" * (-n % 8)
        payload = int(padded, 2).to_bytes(len(padded) // 8, "big")
        return cls(payload, n, "bits")

    @classmethod
    def from_bytes(cls, data: bytes) -> "SymbolString":
        return cls(bytes(data), 8 * len(data), "bytes")

    @classmethod
    def from_samples(cls, samples) -> "SymbolString":
        arr = np.asarray(samples)
        if arr.ndim != 1:
            raise EncodingError("pcm16-mono samples must be one-dimensional")
        if arr.size and (arr.min() < -32768 or arr.max() > 32767):
            raise EncodingError("sample outside 16-bit range")
        data = arr.astype("<i2").tobytes()
        return cls(data, 8 * len(data), "pcm16-mono")

    def bits(self) -> str:
        """The string as '0'/'1' characters, exactly ``bit_length`` long."""
        if not self.payload:
            return ""
        full = bin(int.from_bytes(self.payload, "big"))[2:].zfill(8 * len(self.payload))
        return full[: self.bit_length]

    def samples(self) -> np.ndarray:
        if self.encoding != "pcm16-mono":
            raise EncodingError(f"{self.encoding} string has no samples")
        return np.frombuffer(self.payload, dtype="<i2").astype(np.int16)

    def __len__(self):
        return len(self.payload)


@dataclass(frozen=True)
class EquivalenceRelation:
    """A partition P given by a canonicalizer: X ~ Y iff q(X) == q(Y)."""

    name: str
    canonical_form: Callable[[SymbolString], SymbolString]
    params: Mapping[str, object] = field(default_factory=dict)
    class_enumerator: Optional[Callable[[SymbolString, int], Iterable[SymbolString]]] = None
    spec_text: str = ""

    def __call__(self, x: SymbolString) -> SymbolString:
        return self.canonical_form(x)

    def same_class(self, x: SymbolString, y: SymbolString) -> bool:
        return self.canonical_form(x) == self.canonical_form(y)

    @property
    def enumerable(self) -> bool:
        return self.class_enumerator is not None


class Compressor:
    """Deterministic code-length estimator for K.

    Subclasses implement :meth:`code_length` on raw bytes. ``length_of`` and
    ``macro_length`` are the hooks the estimators call; an exact oracle can
    override ``macro_length`` to search the whole class instead of measuring
    the canonical representative.
    """

    name = "compressor"
    spec_text = ""

    def code_length(self, data: bytes) -> int:
        raise NotImplementedError

    def length_of(self, x: SymbolString) -> float:
        return self.code_length(x.payload)

    def macro_length(self, x: SymbolString, relation: EquivalenceRelation) -> float:
        return self.length_of(relation.canonical_form(x))


@dataclass(frozen=True)
class ComplexityReport:
    k_hat_bits: float
    s_hat_bits: float
    entropy_estimate_bits: float
    cardinality_estimate: float
    relation_name: str
    compressor_name: str

    @classmethod
    def from_lengths(cls, k_hat: float, s_hat: float, relation_name: str,
                     compressor_name: str) -> "ComplexityReport":
        entropy = k_hat - s_hat
        try:
            cardinality = math.pow(2.0, entropy)
        except OverflowError:
            cardinality = math.inf
        return cls(float(k_hat), float(s_hat), float(entropy), cardinality,
                   relation_name, compressor_name)

    def to_dict(self, relation: str = "", compressor: str = "", input_id: str = "") -> dict:
        return {
            "k_hat_bits": self.k_hat_bits,
            "s_hat_bits": self.s_hat_bits,
            "entropy_estimate_bits": self.entropy_estimate_bits,
            # JSON has no infinity; overflowed cardinalities serialize as null
            "cardinality_estimate": (self.cardinality_estimate
                                     if math.isfinite(self.cardinality_estimate) else None),
            "relation_name": self.relation_name,
            "compressor_name": self.compressor_name,
            "relation": relation,
            "compressor": compressor,
            "input_id": input_id,
        }


def join_for_conditional(a: SymbolString, b: SymbolString) -> SymbolString:
    """A || 0x00 0xFF || B, byte-wise. Used to build AB for conditionals."""
    if a.encoding != b.encoding:
        raise EncodingError(f"incompatible encodings: {a.encoding} vs {b.encoding}")
    data = a.payload + SEPARATOR + b.payload
    return SymbolString(data, 8 * len(data), "bytes" if a.encoding == "bits" else a.encoding)


def split_joined(joined: SymbolString, len_a: int) -> tuple[bytes, bytes]:
    """Inverse of :func:`join_for_conditional` given the byte length of A."""
    data = joined.payload
    if data[len_a:len_a + 2] != SEPARATOR:
        raise EncodingError("separator not found at recorded offset")
    return data[:len_a], data[len_a + 2:]


def concat_bits(a: SymbolString, b: SymbolString) -> SymbolString:
    """Plain bit-level concatenation, for bit strings on the exact oracle."""
    if a.encoding != "bits" or b.encoding != "bits":
        raise EncodingError(f"incompatible encodings: {a.encoding} vs {b.encoding}")
    return SymbolString.from_bits(a.bits() + b.bits())
