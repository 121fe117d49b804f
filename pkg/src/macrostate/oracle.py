"""Exact ground truth on a tiny self-delimiting machine.

Instruction set (2-bit opcodes)::

    00          emit 0
    01          emit 1
    10 nnn b    emit bit b, (nnn + 2) times
    11          halt

A halting program is a run of instructions ending in exactly one HALT, so the
set of halting programs is prefix-free and C = K on this machine. Enumerating
every program up to L bits gives truncated but exact complexities and
universal probabilities, all labelled with their L.
"""

from __future__ import annotations

import itertools
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .core import (Compressor, ConfigurationError, EquivalenceRelation,
                   FormatError, MacrostateError, SymbolString)
from .quantizers import make_relation

MACHINE_VERSION = "toy-prefix-machine v1"
MIN_L, MAX_L = 2, 30
DEFAULT_MAX_OUTPUT = 64
EXHAUSTIVE_SCAN_MAX_L = 18


class ProgramError(MacrostateError):
    def __init__(self, status: str, message: str):
        super().__init__(f"{status}: {message}")
        self.status = status


class NotReached(MacrostateError, LookupError):
    """The string has no halting program within the enumerated length."""


class OracleInconsistency(MacrostateError, AssertionError):
    pass


def run_program(bits: str, max_output: int = DEFAULT_MAX_OUTPUT) -> str:
    if max_output < 0:
        raise ConfigurationError("max_output must be >= 0")
    out = []
    produced = 0
    i, n = 0, len(bits)
    while True:
        if i + 2 > n:
            raise ProgramError("truncated", "bits exhausted before HALT")
        op = bits[i:i + 2]
        i += 2
        if op == "11":
            if i != n:
                raise ProgramError("truncated", "overlong: bits remain after HALT")
            return "".join(out)
        if op == "10":
            if i + 4 > n:
                raise ProgramError("truncated", "incomplete run instruction")
            count = int(bits[i:i + 3], 2) + 2
            out.append(bits[i + 3] * count)
            produced += count
            i += 4
        elif op in ("00", "01"):
            out.append(op[1])
            produced += 1
        else:
            raise ProgramError("truncated", f"invalid symbol in program {op!r}")
        if produced > max_output:
            raise ProgramError("overrun", f"output exceeds {max_output} bits")


@dataclass(frozen=True)
class ToyProgram:
    bits: str
    parse_status: str
    output: Optional[str] = None

    @classmethod
    def parse(cls, bits: str, max_output: int = DEFAULT_MAX_OUTPUT) -> "ToyProgram":
        try:
            return cls(bits, "halting", run_program(bits, max_output))
        except ProgramError as exc:
            return cls(bits, exc.status)


# One entry per possible first instruction; the enumeration is partitioned on
# these so partitions can run in separate processes.
_FIRST_INSTRUCTIONS = ["11", "00", "01"] + [
    "10" + format(n, "03b") + b for n in range(8) for b in "01"]


def _instruction_output(instr: str) -> str:
    if instr in ("00", "01"):
        return instr[1]
    return instr[5] * (int(instr[2:5], 2) + 2)


def _extend(prefix: str, output: str, L: int, max_output: int) -> Iterator[tuple[str, str]]:
    # prefix is a complete instruction sequence without HALT
    if len(prefix) + 2 <= L:
        yield prefix + "11", output
    room = L - len(prefix) - 2
    if room >= 2 and len(output) + 1 <= max_output:
        for b in "01":
            yield from _extend(prefix + "0" + b, output + b, L, max_output)
    if room >= 6:
        for n in range(8):
            count = n + 2
            if len(output) + count > max_output:
                break
            head = "10" + format(n, "03b")
            for b in "01":
                yield from _extend(prefix + head + b, output + b * count, L, max_output)


def iter_programs(L: int, max_output: int = DEFAULT_MAX_OUTPUT,
                  first: Optional[str] = None) -> Iterator[tuple[str, str]]:
    """Yield ``(program_bits, output)`` for every halting program of <= L bits.

    With ``first`` given, only programs starting with that instruction.
    """
    firsts = _FIRST_INSTRUCTIONS if first is None else [first]
    for instr in firsts:
        if instr == "11":
            if L >= 2:
                yield "11", ""
            continue
        out = _instruction_output(instr)
        if len(instr) + 2 > L or len(out) > max_output:
            continue
        yield from _extend(instr, out, L, max_output)


def scan_programs(L: int, max_output: int = DEFAULT_MAX_OUTPUT) -> list[tuple[str, str]]:
    """Brute force: run every bit string of length <= L, keep the halting ones."""
    found = []
    for length in range(L + 1):
        for tup in itertools.product("01", repeat=length):
            bits = "".join(tup)
            try:
                found.append((bits, run_program(bits, max_output)))
            except ProgramError:
                pass
    return found


@dataclass(frozen=True)
class TableEntry:
    min_bits: int
    mass: Fraction


@dataclass
class EnumerationTable:
    L: int
    max_output: int
    entries: dict[str, TableEntry] = field(default_factory=dict)

    @property
    def total_mass(self) -> Fraction:
        return sum((e.mass for e in self.entries.values()), Fraction(0))

    def __contains__(self, x: str) -> bool:
        return x in self.entries

    def get(self, x: str) -> Optional[TableEntry]:
        return self.entries.get(x)

    def merge(self, other: "EnumerationTable") -> "EnumerationTable":
        if (self.L, self.max_output) != (other.L, other.max_output):
            raise ConfigurationError("can only merge tables with equal L and max_output")
        merged = dict(self.entries)
        for out, e in other.entries.items():
            old = merged.get(out)
            merged[out] = e if old is None else TableEntry(
                min(old.min_bits, e.min_bits), old.mass + e.mass)
        return EnumerationTable(self.L, self.max_output, merged)


def _check_L(L: int):
    if not isinstance(L, int) or not MIN_L <= L <= MAX_L:
        raise ConfigurationError(f"L must be an integer in {MIN_L}..{MAX_L}, got {L!r}")


def _enumerate_partition(args) -> dict[str, tuple[int, int]]:
    L, max_output, first = args
    acc: dict[str, list[int]] = {}
    for prog, out in iter_programs(L, max_output, first):
        n = len(prog)
        slot = acc.get(out)
        if slot is None:
            acc[out] = [n, 1 << (L - n)]
        else:
            if n < slot[0]:
                slot[0] = n
            slot[1] += 1 << (L - n)
    return {k: (v[0], v[1]) for k, v in acc.items()}


def enumerate_programs(L: int, max_output: int = DEFAULT_MAX_OUTPUT,
                       workers: int = 1) -> EnumerationTable:
    """Exact table of every halting program of at most L bits."""
    _check_L(L)
    if max_output < 0:
        raise ConfigurationError("max_output must be >= 0")
    jobs = [(L, max_output, f) for f in _FIRST_INSTRUCTIONS]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_enumerate_partition, jobs))
    else:
        parts = [_enumerate_partition(j) for j in jobs]
    scale = 1 << L
    table = EnumerationTable(L, max_output)
    for part in parts:
        table = table.merge(EnumerationTable(L, max_output, {
            out: TableEntry(n, Fraction(num, scale)) for out, (n, num) in part.items()}))
    table.entries = dict(sorted(table.entries.items()))
    return table


# -- table text format -------------------------------------------------------

def _dyadic_parts(mass: Fraction) -> tuple[int, int]:
    den = mass.denominator
    exp = den.bit_length() - 1
    if den != 1 << exp:
        raise FormatError(f"mass {mass} is not dyadic")
    return mass.numerator, exp


def _bits_to_hex(bits: str) -> str:
    if not bits:
        return "-"
    return SymbolString.from_bits(bits).payload.hex()


def _hex_to_bits(text: str, bitlen: int) -> str:
    if text == "-":
        if bitlen:
            raise FormatError("empty output with nonzero bit length")
        return ""
    payload = bytes.fromhex(text)
    return SymbolString(payload, bitlen, "bits").bits()


def dumps_table(table: EnumerationTable) -> str:
    lines = [f"# {MACHINE_VERSION} L={table.L} max_output={table.max_output}"]
    for out in sorted(table.entries):
        e = table.entries[out]
        num, exp = _dyadic_parts(e.mass)
        lines.append(f"{_bits_to_hex(out)} {len(out)} {e.min_bits} {num} {exp}")
    return "\n".join(lines) + "\n"


def loads_table(text: str) -> EnumerationTable:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise FormatError("missing table header line")
    header = lines[0][2:]
    if not header.startswith(MACHINE_VERSION):
        raise FormatError(f"table written for a different machine: {header!r}")
    fields = dict(tok.split("=", 1) for tok in header[len(MACHINE_VERSION):].split())
    try:
        table = EnumerationTable(int(fields["L"]), int(fields["max_output"]))
    except (KeyError, ValueError):
        raise FormatError(f"malformed table header {header!r}") from None
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"line {lineno}: expected 5 fields")
        hexed, bitlen, min_bits, num, exp = parts
        out = _hex_to_bits(hexed, int(bitlen))
        table.entries[out] = TableEntry(int(min_bits), Fraction(int(num), 1 << int(exp)))
    return table


# -- exact quantities ---------------------------------------------------------

def _as_bits(x) -> str:
    if isinstance(x, SymbolString):
        if x.encoding != "bits":
            raise ConfigurationError("oracle quantities are defined on bits strings")
        return x.bits()
    return x


def _as_relation(relation) -> EquivalenceRelation:
    if isinstance(relation, EquivalenceRelation):
        return relation
    return make_relation(relation)


def exact_complexity(x, table: EnumerationTable) -> int:
    x = _as_bits(x)
    entry = table.entries.get(x)
    if entry is None:
        raise NotReached(f"{x!r} not reached at L={table.L}")
    return entry.min_bits


@dataclass(frozen=True)
class UniversalProbability:
    mass: Fraction
    first_order: Fraction
    ratio: Fraction
    L: int


def universal_probability(x, table: EnumerationTable) -> UniversalProbability:
    x = _as_bits(x)
    entry = table.entries.get(x)
    if entry is None:
        raise NotReached(f"{x!r} not reached at L={table.L}")
    approx = Fraction(1, 1 << entry.min_bits)
    return UniversalProbability(entry.mass, approx, entry.mass / approx, table.L)


@dataclass(frozen=True)
class MacroComplexity:
    bits: int
    witness: Optional[str]
    exact: bool
    unreached: int
    L: int


def _class_members(x: str, relation: EquivalenceRelation, universe_bits: int) -> list[str]:
    if relation.class_enumerator is None:
        raise ConfigurationError(f"relation {relation.name} has no class enumerator")
    return [m.bits() for m in relation.class_enumerator(SymbolString.from_bits(x), universe_bits)]


def exact_macrocomplexity(x, relation, universe_bits: Optional[int],
                          table: EnumerationTable) -> MacroComplexity:
    """min C(Y) over the class of X; the arg-min witness is the smallest such Y.

    Unreached members all cost more than L, so the minimum over reached
    members is exact whenever at least one member is reached.
    """
    x = _as_bits(x)
    relation = _as_relation(relation)
    u = len(x) if universe_bits is None else universe_bits
    best, witness, unreached = None, None, 0
    for y in _class_members(x, relation, u):
        entry = table.entries.get(y)
        if entry is None:
            unreached += 1
        elif best is None or entry.min_bits < best:
            best, witness = entry.min_bits, y
    if best is None:
        return MacroComplexity(table.L + 1, None, False, unreached, table.L)
    return MacroComplexity(best, witness, True, unreached, table.L)


@dataclass(frozen=True)
class ClassMass:
    mass: Fraction
    direct_mass: Fraction
    members: int
    unreached: int


def class_universal_probability(x, relation, universe_bits: Optional[int],
                                table: EnumerationTable) -> ClassMass:
    """U(X,P) as the sum of member probabilities, cross-checked against the
    direct sum over every table output that falls in the class."""
    x = _as_bits(x)
    relation = _as_relation(relation)
    u = len(x) if universe_bits is None else universe_bits
    members = _class_members(x, relation, u)
    total, unreached = Fraction(0), 0
    for y in members:
        entry = table.entries.get(y)
        if entry is None:
            unreached += 1
        else:
            total += entry.mass
    canon = relation(SymbolString.from_bits(x))
    direct = sum((e.mass for out, e in table.entries.items()
                  if len(out) == u and relation(SymbolString.from_bits(out)) == canon),
                 Fraction(0))
    if direct != total:
        raise OracleInconsistency(
            f"class mass {total} != direct program sum {direct} for {x!r}")
    return ClassMass(total, direct, len(members), unreached)


def _spread(values) -> dict:
    values = sorted(values)
    if not values:
        return {"count": 0, "min": None, "median": None, "max": None}
    return {"count": len(values), "min": values[0],
            "median": statistics.median(values), "max": values[-1]}


def _fraction_text(f: Fraction) -> str:
    num, exp = _dyadic_parts(f)
    return f"{num}/2^{exp}"


def entropy_relation_report(relation, universe_bits: int, table: EnumerationTable,
                            tau: float = 4.0) -> dict:
    """Compare log2|X/P| with C(X) - S(X/P) over every class of the universe.

    Residual ``delta = log2|X/P| - (C(X) - S(X/P))``. A member is typical when
    its conditional universal probability U(X)/U(X,P) lies within a factor
    ``tau`` of 1/|X/P|. Both the plain and the length-shifted forms are
    reported, along with the total-information comparison.
    """
    relation = _as_relation(relation)
    if tau < 1:
        raise ConfigurationError("tau must be >= 1")
    u = universe_bits
    classes: dict[str, list[str]] = {}
    for tup in itertools.product("01", repeat=u):
        x = "".join(tup)
        key = relation(SymbolString.from_bits(x)).bits()
        classes.setdefault(key, []).append(x)

    rows = []
    all_deltas, typical_deltas, outliers = [], [], []
    for key in sorted(classes):
        members = sorted(classes[key])
        enumerated = _class_members(members[0], relation, u)
        if enumerated != members:
            raise OracleInconsistency(f"class enumerator disagrees with canonical grouping for {key!r}")
        size = len(members)
        log_size = math.log2(size)
        macro = exact_macrocomplexity(members[0], relation, u, table)
        reached = [m for m in members if m in table.entries]
        class_mass = sum((table.entries[m].mass for m in reached), Fraction(0))
        member_rows = []
        for m in members:
            entry = table.entries.get(m)
            if entry is None:
                member_rows.append({"x": m, "reached": False})
                continue
            c = entry.min_bits
            delta = log_size - (c - macro.bits)
            cond = entry.mass / class_mass
            typical = 1 / tau <= float(cond * size) <= tau
            ratio = entry.mass * (1 << c)
            row = {
                "x": m,
                "reached": True,
                "C": c,
                "delta": delta,
                "conditional_probability": float(cond),
                "typical": typical,
                "u_ratio": float(ratio),
                "shifted_entropy": log_size - u,
                "shifted_prediction": c - macro.bits - u,
                "total_information_shifted": log_size - u + macro.bits,
                "total_information_unshifted": log_size + macro.bits,
                "randomness_test": c - u,
            }
            if ratio >= tau:
                outliers.append(m)
            all_deltas.append(delta)
            if typical:
                typical_deltas.append(delta)
            member_rows.append(row)
        rows.append({
            "canonical": key,
            "cardinality": size,
            "log2_cardinality": log_size,
            "S": macro.bits if macro.exact else None,
            "S_lower_bound": None if macro.exact else macro.bits,
            "witness": macro.witness,
            "partial": len(reached) < size,
            "class_mass": _fraction_text(class_mass) if reached else "0/2^0",
            "members": member_rows,
        })
    return {
        "machine": MACHINE_VERSION,
        "L": table.L,
        "relation": relation.spec_text or relation.name,
        "universe_bits": u,
        "tau": tau,
        "classes": rows,
        "residuals": {"all": _spread(all_deltas), "typical": _spread(typical_deltas)},
        "deep_outliers": outliers,
    }


# -- independent brute-force path ---------------------------------------------

class ProgramScan:
    """Macrocomplexity by direct scan of programs, filtered by class membership.

    Shares nothing with the table or the class enumerators: every program is
    re-executed and its output compared through the canonicalizer.
    """

    def __init__(self, programs: Iterable[tuple[str, str]], L: int):
        self.L = L
        self.outputs: list[tuple[int, str]] = []
        for bits, _ in programs:
            self.outputs.append((len(bits), run_program(bits, DEFAULT_MAX_OUTPUT)))
        self._index: dict[str, dict] = {}

    @classmethod
    def exhaustive(cls, L: int) -> "ProgramScan":
        if L > EXHAUSTIVE_SCAN_MAX_L:
            raise ConfigurationError(f"exhaustive scan limited to L <= {EXHAUSTIVE_SCAN_MAX_L}")
        return cls(scan_programs(L), L)

    def _relation_index(self, relation: EquivalenceRelation) -> dict:
        key = relation.spec_text or relation.name
        index = self._index.get(key)
        if index is None:
            index = {}
            for length, out in self.outputs:
                canon = relation(SymbolString.from_bits(out))
                slot = (len(out), canon)
                best = index.get(slot)
                if best is None or (length, out) < best:
                    index[slot] = (length, out)
            self._index[key] = index
        return index

    def macrocomplexity(self, x, relation) -> tuple[int, str]:
        x = _as_bits(x)
        relation = _as_relation(relation)
        hit = self._relation_index(relation).get((len(x), relation(SymbolString.from_bits(x))))
        if hit is None:
            raise NotReached(f"no program of <= {self.L} bits reaches the class of {x!r}")
        return hit

    def conditional(self, a, b, relation) -> int:
        a, b = _as_bits(a), _as_bits(b)
        return self.macrocomplexity(a + b, relation)[0] - self.macrocomplexity(b, relation)[0]

    def max_distance(self, a, b, relation) -> int:
        return max(max(0, self.conditional(a, b, relation)),
                   max(0, self.conditional(b, a, relation)))


class OracleCompressor(Compressor):
    """Exact complexities from an enumeration table, usable as an estimator back-end."""

    name = "oracle"

    def __init__(self, table: EnumerationTable):
        self.table = table
        self.spec_text = f"oracle:L={table.L}"
        self._macro: dict[tuple[str, str], int] = {}

    def code_length(self, data: bytes) -> int:
        return self.length_of(SymbolString(data, 8 * len(data), "bits"))

    def length_of(self, x: SymbolString) -> int:
        return exact_complexity(x.bits(), self.table)

    def macro_length(self, x: SymbolString, relation: EquivalenceRelation) -> int:
        key = (relation.spec_text or relation.name, x.bits())
        hit = self._macro.get(key)
        if hit is None:
            result = exact_macrocomplexity(x.bits(), relation, x.bit_length, self.table)
            if not result.exact:
                raise NotReached(f"class of {x.bits()!r} not reached at L={self.table.L}")
            hit = self._macro[key] = result.bits
        return hit


# -- verification suite -------------------------------------------------------

REFINEMENTS = (("identity", "multiset"), ("identity", "parity"), ("multiset", "parity"))


@dataclass
class Check:
    name: str
    passed: bool
    violations: int = 0
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "violations": self.violations, "detail": self.detail}


def _refines(fine: EquivalenceRelation, coarse: EquivalenceRelation, u: int) -> bool:
    groups: dict = {}
    for tup in itertools.product("01", repeat=u):
        x = SymbolString.from_bits("".join(tup))
        c = coarse(x)
        if groups.setdefault(fine(x), c) != c:
            return False
    return True


def check_prefix_free(programs: list[str]) -> int:
    ordered = sorted(programs)
    return sum(1 for a, b in zip(ordered, ordered[1:]) if b.startswith(a))


def check_monotone(coarse: EnumerationTable, fine: EnumerationTable) -> int:
    bad = 0
    for out, e in coarse.entries.items():
        f = fine.entries.get(out)
        if f is None or f.min_bits > e.min_bits or f.mass < e.mass:
            bad += 1
    return bad


def verify_invariants(L: int, relations: list[str], universe_bits: int,
                      max_output: int = DEFAULT_MAX_OUTPUT, workers: int = 1) -> list[Check]:
    """Run every exact invariant; a passing suite has zero violations everywhere."""
    _check_L(L)
    u = universe_bits
    if not 0 <= u <= 12:
        raise ConfigurationError("verify supports universe_bits in 0..12")
    rels = [_as_relation(r) for r in relations]
    table = enumerate_programs(L, max_output, workers)
    programs = list(iter_programs(L, max_output))
    checks = []

    bad = check_prefix_free([p for p, _ in programs])
    checks.append(Check("prefix_free", bad == 0, bad, f"{len(programs)} halting programs"))
    if L <= 16:
        scanned = sorted(scan_programs(L, max_output))
        same = scanned == sorted(programs)
        checks.append(Check("scan_matches_grammar", same, 0 if same else 1,
                            f"{len(scanned)} programs found by exhaustive scan"))

    total = table.total_mass
    checks.append(Check("kraft", total <= 1, int(total > 1), f"total_mass={_fraction_text(total)}"))

    if L - 2 >= MIN_L:
        smaller = enumerate_programs(L - 2, max_output, workers)
        bad = check_monotone(smaller, table)
        checks.append(Check("monotone_refinement", bad == 0, bad, f"L={L - 2} vs L={L}"))

    universe = ["".join(t) for t in itertools.product("01", repeat=u)]
    macro: dict[str, dict[str, MacroComplexity]] = {}
    for rel in rels:
        name = rel.spec_text or rel.name
        macro[name] = {x: exact_macrocomplexity(x, rel, u, table) for x in universe}

        bad = vacuous = 0
        for x in universe:
            m = macro[name][x]
            if x in table.entries:
                if not m.exact or m.bits > table.entries[x].min_bits:
                    bad += 1
            else:
                vacuous += 1
        checks.append(Check(f"s_le_c[{name}]", bad == 0, bad,
                            f"{len(universe)} strings, {vacuous} with C beyond L"))

        # sum identity: member-wise table sum vs program-level sum by class
        by_class: dict = {}
        for prog, out in programs:
            if len(out) == u:
                key = rel(SymbolString.from_bits(out))
                by_class[key] = by_class.get(key, Fraction(0)) + Fraction(1, 1 << len(prog))
        bad, seen = 0, set()
        for x in universe:
            key = rel(SymbolString.from_bits(x))
            if key in seen:
                continue
            seen.add(key)
            mass = class_universal_probability(x, rel, u, table).mass
            if mass != by_class.get(key, Fraction(0)):
                bad += 1
        checks.append(Check(f"sum_identity[{name}]", bad == 0, bad, f"{len(seen)} classes"))

        if L <= 16:
            scan = ProgramScan(programs, L)
            bad = 0
            for x in universe:
                m = macro[name][x]
                try:
                    s = scan.macrocomplexity(x, rel)[0]
                except NotReached:
                    s = None
                if (m.bits if m.exact else None) != s:
                    bad += 1
            checks.append(Check(f"brute_force[{name}]", bad == 0, bad, "table+enumerator vs program scan"))

    by_name = {r.spec_text or r.name: r for r in rels}
    pairs = [(f, c) for f, c in REFINEMENTS if f in by_name or c in by_name]
    cyl = sorted((r.params["n"], n) for n, r in by_name.items() if r.name == "prefix_cylinder")
    for (_, finer), (_, coarser) in zip(cyl[1:], cyl):
        pairs.append((finer, coarser))
    for rel in list(by_name):
        if rel != "identity":
            pairs.append(("identity", rel))
    for fine_name, coarse_name in dict.fromkeys(pairs):
        if fine_name == coarse_name:
            continue
        fine, coarse = _as_relation(fine_name), _as_relation(coarse_name)
        if not _refines(fine, coarse, u):
            checks.append(Check(f"refinement[{fine_name}->{coarse_name}]", False, 1,
                                "classes of the finer relation are not nested"))
            continue
        bad = 0
        for x in universe:
            mf = macro.get(fine_name, {}).get(x) or exact_macrocomplexity(x, fine, u, table)
            mc = macro.get(coarse_name, {}).get(x) or exact_macrocomplexity(x, coarse, u, table)
            if mf.exact and (not mc.exact or mc.bits > mf.bits):
                bad += 1
        checks.append(Check(f"refinement[{fine_name}->{coarse_name}]", bad == 0, bad,
                            "S(X/coarse) <= S(X/fine)"))
    return checks
