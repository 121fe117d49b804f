"""Acceptance suite: seven end-to-end criteria, each reported as PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v`` (the PASS/FAIL block is
printed in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from macrostate import EstimatorConfig, SymbolString, boltzmann_estimate, conditional_macrocomplexity, max_distance
from macrostate.cli import run_cli
from macrostate.fixtures import SINE_FIXTURE
from macrostate.oracle import NotReached, ProgramScan, enumerate_programs, exact_macrocomplexity

RESULTS: dict[int, str] = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


class Runner:
    """Runs CLI commands in-process and keeps every raw JSON output."""

    def __init__(self):
        self.outputs: dict[tuple, list[str]] = {}

    def __call__(self, *argv):
        out = io.StringIO()
        t0 = time.perf_counter()
        code = run_cli([str(a) for a in argv] + ["--json"], stdout=out)
        elapsed = time.perf_counter() - t0
        text = out.getvalue()
        self.outputs.setdefault(tuple(map(str, argv)), []).append(text)
        return code, (json.loads(text) if text else None), elapsed


@pytest.fixture(scope="module")
def cli():
    return Runner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, cli):
    d = tmp_path_factory.mktemp("acceptance")
    assert cli("fixture", "sine", "-o", d / SINE_FIXTURE, "--seed", 0)[0] == 0
    assert cli("fixture", "corpus", "-o", d / "corpus", "--seed", 0)[0] == 0
    return d


def test_criterion_1_oracle_verify(cli):
    code, doc, elapsed = cli("oracle", "verify", "-L", 14, "--universe", 8,
                             "--relation", "identity,multiset,parity,cyl:n=4")
    checks = {c["name"]: c for c in doc["checks"]}
    needed = ["prefix_free", "kraft", "refinement[multiset->parity]"]
    for rel in ("identity", "multiset", "parity", "cyl:n=4"):
        needed += [f"s_le_c[{rel}]", f"sum_identity[{rel}]"]
    violations = sum(c["violations"] for c in doc["checks"])
    ok = (code == 0 and doc["passed"] and all(n in checks for n in needed)
          and violations == 0 and elapsed < 60)
    record(1, ok, f"{len(checks)} checks, {violations} violations, {elapsed:.1f}s")


def test_criterion_2_brute_force():
    table = enumerate_programs(16)
    scan = ProgramScan.exhaustive(16)
    compared = mismatches = 0
    for rel in ("multiset", "cyl:n=4"):
        for u in range(0, 11):
            for i in range(2 ** u):
                x = format(i, f"0{u}b") if u else ""
                m = exact_macrocomplexity(x, rel, u, table)
                try:
                    s = scan.macrocomplexity(x, rel)[0]
                except NotReached:
                    s = None
                compared += 1
                mismatches += (m.bits if m.exact else None) != s
    record(2, mismatches == 0, f"{compared} (string, relation) pairs, {mismatches} mismatches at L=16")


# Regression baselines for the toy machine at L=18, universe 8, multiset.
# Every length-8 string is reached at this L; the values come from the
# exhaustive enumeration and are cross-checked against the program-scan
# path in test_oracle.
ENTROPY_BASELINE = {
    "all": {"count": 256, "min": -3.0, "max": math.log2(70)},
    "typical": {"count": 146, "min": 0.0, "median": math.log2(70) - 4, "max": math.log2(70) - 2},
}


def test_criterion_3_entropy_report(cli):
    code, doc, _ = cli("oracle", "entropy", "-L", 18, "--universe", 8, "--relation", "multiset")
    rows = {r["x"]: r for c in doc["classes"] for r in c["members"] if r["reached"]}
    finite = all(math.isfinite(r["delta"]) for r in rows.values())
    delta = rows["01101001"]["delta"]
    res = doc["residuals"]
    baseline = all(res[group][k] == pytest.approx(v, abs=1e-9)
                   for group, vals in ENTROPY_BASELINE.items() for k, v in vals.items())
    ok = code == 0 and finite and delta == pytest.approx(math.log2(70) - 4, abs=1e-9) and baseline
    record(3, ok, f"{len(rows)} reached members, all finite={finite}, "
                  f"delta(01101001)={delta:.4f}, baselines match={baseline}")


def test_criterion_4_estimator_identities():
    rng = np.random.default_rng(2024)
    cfg = EstimatorConfig.default("identity")
    collapse = sym = clamp = True
    inputs = [SymbolString.from_bytes(rng.integers(0, 256, rng.integers(0, 512), dtype=np.uint8).tobytes())
              for _ in range(1000)]
    for x in inputs:
        rep = boltzmann_estimate(x, cfg)
        collapse &= rep.s_hat_bits == rep.k_hat_bits and rep.entropy_estimate_bits == 0
    for a, b in zip(inputs[:200], inputs[200:400]):
        sym &= max_distance(a, b, cfg) == max_distance(b, a, cfg)
        clamp &= conditional_macrocomplexity(a, b, cfg).value >= 0
        clamp &= conditional_macrocomplexity(b, a, cfg).value >= 0
    record(4, collapse and sym and clamp,
           f"identity collapse={collapse} (1000 inputs), symmetry={sym}, clamp>=0={clamp}")


def test_criterion_5_speech_band(cli, workdir):
    wav = workdir / SINE_FIXTURE
    code, doc, _ = cli("estimate", wav, "--relation", "speech-band")
    ratio = doc["s_hat_bits"] / doc["k_hat_bits"]
    out = workdir / "sine_band.wav"
    qcode, _, _ = cli("quantize", wav, "--relation", "speech-band", "-o", out)
    from macrostate.inputs import load_input
    y = load_input(out).decoded.samples().astype(float)
    n = len(y)
    spec = np.abs(np.fft.rfft(y))
    above = spec[np.fft.rfftfreq(n, 1 / 48000) > 3000]
    bound = 0.5 * n  # rounding moves each sample by at most 1/2
    leak = float(above.max())
    ok = code == 0 and qcode == 0 and ratio <= 0.5 and leak <= bound
    record(5, ok, f"s_hat/k_hat={ratio:.4f} (<=0.5), max above-cutoff |bin|={leak:.1f} (<= {bound:.0f})")


def test_criterion_6_classification(cli, workdir):
    t0 = time.perf_counter()
    corpus = workdir / "corpus"
    _, band, _ = cli("loocv", "--corpus", corpus, "--relation", "speech-band")
    _, ident, _ = cli("loocv", "--corpus", corpus, "--relation", "identity")
    elapsed = time.perf_counter() - t0
    ok = band["accuracy"] >= 0.95 and band["accuracy"] > ident["accuracy"] and elapsed < 300
    record(6, ok, f"speech-band {band['accuracy']:.3f} vs identity {ident['accuracy']:.3f} "
                  f"over {band['n']} exemplars, {elapsed:.1f}s")


def _strip(text):
    doc = json.loads(text)
    doc["manifest"].pop("timestamp", None)
    return json.dumps(doc, sort_keys=True, indent=2)


def test_criterion_7_determinism(cli, workdir):
    # re-run every command issued above; compare against the first run
    for argv in list(cli.outputs):
        cli(*argv)
    different = [" ".join(argv[:2]) for argv, texts in cli.outputs.items()
                 if len({_strip(t) for t in texts}) != 1]
    record(7, not different, f"{len(cli.outputs)} commands re-run, {len(different)} differ"
                             + (f": {different}" if different else ""))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
