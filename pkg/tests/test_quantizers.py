import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macrostate import ConfigurationError, EncodingError, RelationSpec, SymbolString
from macrostate.quantizers import (FixedPointError, NotEnumerable, bandlimit_samples,
                                   canonicalize, class_size, enumerate_class, make_relation)

BIT_SPECS = ["identity", "multiset", "parity", "cyl:n=0", "cyl:n=3", "cyl:n=8"]
SIGNAL_SPECS = ["bitdepth:k=4", "down:m=3", "speech-band"]


def rand_bits(r, hi=40):
    return SymbolString.from_bits("".join(r.choice("01") for _ in range(r.randint(0, hi))))


def rand_signal(r, n=None):
    n = r.randint(0, 300) if n is None else n
    return SymbolString.from_samples(np.array([r.randint(-32768, 32767) for _ in range(n)]))


def test_parse_and_text():
    assert RelationSpec.parse("cyl:n=4") == RelationSpec("prefix_cylinder", {"n": 4})
    assert RelationSpec.parse("speech-band").params == {"rate": 48000, "cutoff": 3000}
    assert RelationSpec.parse(RelationSpec.parse("band:rate=8000,cutoff=1000").text()) == \
        RelationSpec("bandlimit", {"rate": 8000, "cutoff": 1000})
    for bad in ["nope", "cyl", "cyl:n=-1", "bitdepth:k=0", "down:m=0",
                "band:rate=8000,cutoff=5000"]:
        with pytest.raises(ConfigurationError):
            RelationSpec.parse(bad)


def test_examples():
    assert canonicalize(SymbolString.from_bits("0110"), RelationSpec.parse("multiset")).bits() == "0011"
    assert canonicalize(SymbolString.from_bits("0111"), RelationSpec.parse("parity")).bits() == "1"
    assert canonicalize(SymbolString.from_bits("101101"), RelationSpec.parse("cyl:n=3")).bits() == "101000"
    assert canonicalize(SymbolString.from_bytes(b"cab"), RelationSpec.parse("multiset")).payload == b"abc"
    x = SymbolString.from_samples([7, -7, 0x1234])
    assert list(canonicalize(x, RelationSpec.parse("bitdepth:k=4")).samples()) == [0, -4096, 0x1000]
    x = SymbolString.from_samples([1, 2, 3, 4, 5])
    assert list(canonicalize(x, RelationSpec.parse("down:m=2")).samples()) == [1, 1, 3, 3, 5]


def test_cylinder_longer_than_string_is_identity():
    x = SymbolString.from_bits("101")
    assert canonicalize(x, RelationSpec.parse("cyl:n=8")) == x


@pytest.mark.parametrize("text", BIT_SPECS)
def test_idempotent_bits(text):
    r = random.Random(text)
    q = make_relation(text)
    for _ in range(1000):
        x = rand_bits(r)
        assert q(q(x)) == q(x)


@pytest.mark.parametrize("text", ["identity", "multiset"])
def test_idempotent_bytes(text):
    r = random.Random(text)
    q = make_relation(text)
    for _ in range(1000):
        x = SymbolString.from_bytes(bytes(r.randrange(256) for _ in range(r.randint(0, 40))))
        assert q(q(x)) == q(x)


@pytest.mark.parametrize("text", ["bitdepth:k=4", "down:m=3"])
def test_idempotent_signal(text):
    r = random.Random(text)
    q = make_relation(text)
    for _ in range(1000):
        x = rand_signal(r, r.randint(0, 40))
        assert q(q(x)) == q(x)


def test_idempotent_bandlimit():
    r = random.Random(7)
    q = make_relation("band:rate=8000,cutoff=1000")
    for _ in range(200):
        x = rand_signal(r)
        assert q(q(x)) == q(x)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-32768, 32767), max_size=120), st.integers(100, 3900))
def test_bandlimit_is_fixed_point(samples, cutoff):
    y = bandlimit_samples(np.array(samples, dtype=np.int16), 8000, cutoff)
    np.testing.assert_array_equal(bandlimit_samples(y, 8000, cutoff), y)


def test_bandlimit_removes_high_tone():
    t = np.arange(1000) / 8000
    tone = np.rint(10000 * np.sin(2 * np.pi * 3200 * t)).astype(np.int16)
    y = make_relation("band:rate=8000,cutoff=800")(SymbolString.from_samples(tone)).samples()
    assert np.abs(y.astype(int)).max() <= 1


def test_bandlimit_keeps_dc_and_bounds_leakage():
    x = SymbolString.from_samples([1000, 1000, 1000, 1000])
    assert make_relation("speech-band")(x) == x
    r = np.random.default_rng(3)
    n = 4800
    y = make_relation("speech-band")(SymbolString.from_samples(r.integers(-20000, 20000, n))).samples()
    spec = np.fft.rfft(y.astype(float))
    freqs = np.fft.rfftfreq(n, 1 / 48000)
    # residue above cutoff is only the rounding error, at most 0.5 per sample
    assert np.abs(spec[freqs > 3000]).max() <= 0.5 * n


def test_encoding_errors():
    with pytest.raises(EncodingError):
        make_relation("speech-band")(SymbolString.from_bits("0101"))
    with pytest.raises(EncodingError):
        make_relation("parity")(SymbolString.from_samples([1, 2]))
    # identity accepts anything
    x = SymbolString.from_samples([1, 2])
    assert make_relation("identity")(x) == x


def test_fixed_point_error_is_a_library_error():
    assert issubclass(FixedPointError, Exception)


def _all(u):
    return [SymbolString.from_bits("".join(t)) for t in itertools.product("01", repeat=u)]


@pytest.mark.parametrize("text", ["identity", "multiset", "parity", "cyl:n=0", "cyl:n=2", "cyl:n=5"])
@pytest.mark.parametrize("u", [0, 1, 5, 8, 12])
def test_classes_partition_universe(text, u):
    spec = RelationSpec.parse(text)
    q = make_relation(spec)
    universe = _all(u)
    groups = {}
    for x in universe:
        groups.setdefault(q(x), []).append(x)
    for canon, members in groups.items():
        x = members[0]
        enumerated = enumerate_class(x, u, spec)
        assert enumerated == sorted(members, key=lambda s: s.bits())
        assert class_size(x, u, spec) == len(members)
    assert sum(len(m) for m in groups.values()) == 2 ** u


def test_class_size_closed_forms():
    x = SymbolString.from_bits("01101001")
    assert class_size(x, 8, RelationSpec.parse("multiset")) == math.comb(8, 4)
    assert class_size(x, 8, RelationSpec.parse("parity")) == 128
    assert class_size(x, 8, RelationSpec.parse("cyl:n=3")) == 32
    assert class_size(x, 8, RelationSpec.parse("identity")) == 1


def test_enumerate_class_limits():
    with pytest.raises(NotEnumerable):
        enumerate_class(SymbolString.from_samples([1]), 16, RelationSpec.parse("speech-band"))
    with pytest.raises(ConfigurationError):
        enumerate_class(SymbolString.from_bits("0" * 21), 21, RelationSpec.parse("multiset"))


def test_relation_pickles():
    import pickle
    q = make_relation("cyl:n=3")
    q2 = pickle.loads(pickle.dumps(q))
    x = SymbolString.from_bits("110011")
    assert q2(x) == q(x)
