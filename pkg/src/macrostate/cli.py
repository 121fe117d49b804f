"""Command-line entry point. Machine output is one JSON document on stdout;
human-readable summaries and errors go to stderr.

Exit status: 0 success, 1 data/tool error (or failed verification), 2 usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .classifier import classify, evaluate_loocv
from .compressors import parse_compressor
from .core import MacrostateError
from .estimators import (DISTANCES, EstimatorConfig, boltzmann_estimate,
                         conditional_macrocomplexity, max_distance,
                         normalized_macro_distance, s_hat, sum_distance)
from .fixtures import (random_bytes, write_sine_fixture,
                       write_two_band_corpus)
from .inputs import encode_for_file, load_corpus, load_input
from .oracle import (dumps_table, enumerate_programs, entropy_relation_report,
                     verify_invariants)
from .quantizers import ENUMERABLE, RelationSpec, class_size, make_relation

ORACLE_RELATIONS = ["identity", "multiset", "parity", "cyl:n=4"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--relation", default=None, help="equivalence relation spec (default identity)")
    p.add_argument("--compressor", default="lz78", help="lz78 or ext:<command line>")
    p.add_argument("--format", choices=["raw", "bits", "wav"], default=None,
                   help="input format (default: by file extension)")
    p.add_argument("--distance", choices=DISTANCES, default="ncd")
    p.add_argument("--json", action="store_true", help="suppress the stderr summary")
    p.add_argument("--seed", type=int, default=0, help="fixture generator seed")
    p.add_argument("--workers", type=int, default=1)
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared()
    parser = _Parser(prog="macrostate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", parents=[shared], help="K, S(X/P) and entropy estimate")
    p.add_argument("input")
    p = sub.add_parser("entropy", parents=[shared], help="Boltzmann entropy / cardinality estimate")
    p.add_argument("input")
    p = sub.add_parser("distance", parents=[shared], help="macrostate distance between two inputs")
    p.add_argument("a")
    p.add_argument("b")
    p = sub.add_parser("classify", parents=[shared], help="nearest macrostate in a corpus")
    p.add_argument("input")
    p.add_argument("--corpus", required=True)
    p = sub.add_parser("loocv", parents=[shared], help="leave-one-out evaluation of a corpus")
    p.add_argument("--corpus", required=True)
    p = sub.add_parser("quantize", parents=[shared], help="write the canonical form of an input")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    oracle = sub.add_parser("oracle", help="exact toy-machine computations")
    osub = oracle.add_subparsers(dest="oracle_command", required=True, parser_class=_Parser)
    for name, text in (("table", "enumerate programs and export the table"),
                       ("verify", "run the exact invariant suite"),
                       ("entropy", "entropy-relation report over a universe")):
        p = osub.add_parser(name, parents=[shared], help=text)
        p.add_argument("-L", type=int, required=True, dest="L")
        p.add_argument("--max-output", type=int, default=64)
        if name == "table":
            p.add_argument("-o", "--output", default=None)
        else:
            p.add_argument("--universe", type=int, required=True)
        if name == "entropy":
            p.add_argument("--tau", type=float, default=4.0)

    fixture = sub.add_parser("fixture", help="write deterministic synthetic inputs")
    fsub = fixture.add_subparsers(dest="fixture_command", required=True, parser_class=_Parser)
    for name in ("sine", "corpus", "random"):
        p = fsub.add_parser(name, parents=[shared])
        p.add_argument("-o", "--output", required=True)
        if name == "corpus":
            p.add_argument("--per-class", type=int, default=20)
            p.add_argument("--snr-db", type=float, default=-10.0)
            p.add_argument("--seconds", type=float, default=0.1)
        if name == "random":
            p.add_argument("--bytes", type=int, default=4096)
    return parser


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(make_relation(args.relation), parse_compressor(args.compressor))


def _default_relation(args) -> str:
    if args.command == "oracle":
        if args.oracle_command == "entropy":
            return "multiset"
        return ",".join(ORACLE_RELATIONS) if args.oracle_command == "verify" else "identity"
    return "identity"


def _manifest(args, inputs) -> dict:
    return {
        "command": " ".join(_command_words(args)),
        "relation": args.relation,
        "compressor": args.compressor,
        "inputs": [{"id": ident, "sha256": digest} for ident, digest in inputs],
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _command_words(args):
    words = [args.command]
    for attr in ("oracle_command", "fixture_command"):
        if getattr(args, attr, None):
            words.append(getattr(args, attr))
    return words


def _summary(args, text):
    if not args.json:
        print(text, file=sys.stderr)


def _cmd_estimate(args):
    cfg = _config(args)
    src = load_input(args.input, args.format)
    report = boltzmann_estimate(src.decoded, cfg)
    doc = report.to_dict(cfg.relation_text, cfg.compressor.spec_text, src.path)
    if args.command == "entropy":
        doc["log2_cardinality_estimate"] = report.entropy_estimate_bits
        spec = RelationSpec.parse(cfg.relation_text)
        if src.decoded.encoding == "bits" and spec.kind in ENUMERABLE:
            exact = class_size(src.decoded, src.decoded.bit_length, spec)
            doc["exact_cardinality"] = exact
            doc["exact_log2_cardinality"] = math.log2(exact)
    _summary(args, f"{src.path}: K~{report.k_hat_bits:g} S~{report.s_hat_bits:g} "
                   f"entropy~{report.entropy_estimate_bits:g} bits")
    return doc, [_ident(src)]


def _ident(src):
    return src.path, src.digest


def _cmd_distance(args):
    cfg = _config(args)
    a, b = load_input(args.a, args.format), load_input(args.b, args.format)
    ab = conditional_macrocomplexity(a.decoded, b.decoded, cfg)
    ba = conditional_macrocomplexity(b.decoded, a.decoded, cfg)
    if args.distance == "ncd":
        value = normalized_macro_distance(a.decoded, b.decoded, cfg)
    elif args.distance == "sum":
        value = sum_distance(a.decoded, b.decoded, cfg)
    else:
        value = max_distance(a.decoded, b.decoded, cfg)
    doc = {"distance": value, "kind": args.distance,
           "conditional_ab": ab.value, "conditional_ab_raw": ab.raw,
           "conditional_ba": ba.value, "conditional_ba_raw": ba.raw,
           "s_hat_a": s_hat(a.decoded, cfg), "s_hat_b": s_hat(b.decoded, cfg),
           "relation": cfg.relation_text, "compressor": cfg.compressor.spec_text}
    _summary(args, f"D_{args.distance}({a.path}, {b.path}) = {value:g}")
    return doc, [_ident(a), _ident(b)]


def _corpus_inputs(corpus):
    return [(m["id"], m["sha256"]) for m in corpus.manifest]


def _cmd_classify(args):
    cfg = _config(args)
    src = load_input(args.input, args.format)
    corpus = load_corpus(args.corpus, args.format)
    result = classify(src.decoded, corpus, cfg, args.distance, input_id=src.path)
    _summary(args, f"{src.path}: {result.winner}{' (tie)' if result.tie else ''}")
    doc = result.to_dict()
    doc.update(relation=cfg.relation_text, compressor=cfg.compressor.spec_text)
    return doc, [_ident(src)] + _corpus_inputs(corpus)


def _cmd_loocv(args):
    cfg = _config(args)
    corpus = load_corpus(args.corpus, args.format)
    doc = evaluate_loocv(corpus, cfg, args.distance, args.workers)
    doc.update(relation=cfg.relation_text, compressor=cfg.compressor.spec_text)
    _summary(args, f"LOOCV accuracy {doc['accuracy']:.3f} over {doc['n']} exemplars")
    return doc, _corpus_inputs(corpus)


def _cmd_quantize(args):
    cfg = _config(args)
    src = load_input(args.input, args.format)
    canon = cfg.relation(src.decoded)
    if canon.encoding == "pcm16-mono":
        fmt = "wav"
    elif canon.encoding == "bits":
        fmt = "bits"
    else:
        fmt = "raw"
    data = encode_for_file(canon, fmt, src.sample_rate or 48000)
    Path(args.output).write_bytes(data)
    _summary(args, f"wrote {args.output} ({fmt}, {canon.bit_length} bits)")
    return {"output": args.output, "output_format": fmt, "bit_length": canon.bit_length,
            "sha256": hashlib.sha256(data).hexdigest(), "relation": cfg.relation_text}, [_ident(src)]


def _cmd_oracle(args):
    if args.oracle_command == "table":
        table = enumerate_programs(args.L, args.max_output, args.workers)
        text = dumps_table(table)
        if args.output:
            Path(args.output).write_text(text)
        total = table.total_mass
        _summary(args, f"L={args.L}: {len(table.entries)} outputs, total mass {float(total):.6f}")
        return {"L": table.L, "max_output": table.max_output, "outputs": len(table.entries),
                "total_mass": f"{total.numerator}/{total.denominator}",
                "table_sha256": hashlib.sha256(text.encode()).hexdigest(),
                "output": args.output}, []
    if args.oracle_command == "verify":
        relations = args.relation.split(",")
        checks = verify_invariants(args.L, relations, args.universe, args.max_output, args.workers)
        ok = all(c.passed for c in checks)
        for c in checks:
            _summary(args, f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.detail})")
        return {"L": args.L, "universe_bits": args.universe, "relations": relations,
                "passed": ok, "checks": [c.to_dict() for c in checks]}, [], (0 if ok else 1)
    table = enumerate_programs(args.L, args.max_output, args.workers)
    report = entropy_relation_report(args.relation, args.universe, table, args.tau)
    res = report["residuals"]
    _summary(args, f"residuals: all {res['all']}, typical {res['typical']}")
    return report, []


def _cmd_fixture(args):
    out = Path(args.output)
    if args.fixture_command == "sine":
        write_sine_fixture(out, args.seed)
    elif args.fixture_command == "random":
        out.write_bytes(random_bytes(args.bytes, args.seed))
    else:
        write_two_band_corpus(out, args.seed, per_class=args.per_class,
                              snr_db=args.snr_db, seconds=args.seconds)
    _summary(args, f"wrote {out}")
    return {"output": str(out), "fixture": args.fixture_command, "seed": args.seed}, []


COMMANDS = {
    "estimate": _cmd_estimate, "entropy": _cmd_estimate, "distance": _cmd_distance,
    "classify": _cmd_classify, "loocv": _cmd_loocv, "quantize": _cmd_quantize,
    "oracle": _cmd_oracle, "fixture": _cmd_fixture,
}


def run_cli(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"macrostate: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if getattr(args, "relation", None) is None:
        args.relation = _default_relation(args)
    try:
        result = COMMANDS[args.command](args)
    except (MacrostateError, OSError) as exc:
        print(f"macrostate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    doc, inputs, *rest = result
    doc = dict(doc)
    doc["manifest"] = _manifest(args, inputs)
    stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return rest[0] if rest else 0


def main():
    sys.exit(run_cli())
