"""Command-line entry point: ``weakcomp <verb> ...``.

Exit codes: 0 success, 1 usage or input error, 2 audit counterexample.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import diagonalizer as diag
from .core import IndexedSequence, as_rational, constant_name, format_rational, perturbed_name, pow2, rational_to_json
from .functions import (
    CoverNotFound,
    Mode,
    PolygonSequence,
    classify_constant,
    lsc_to_machine,
    machine_to_lsc,
    machine_to_uwc_polyseq,
    max_of_lsc,
    uwc_polyseq_to_machine,
)
from .polygons import DomainError, Polygon, sup_distance
from .sequences import CertifiedSequence, certificate_from_json

EXIT_OK, EXIT_USAGE, EXIT_COUNTEREXAMPLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# input decoding -----------------------------------------------------------------


def _load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise UsageError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _rational_arg(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


SEQUENCE_CATALOG = {
    "constant": lambda desc: IndexedSequence.constant(as_rational(desc.get("value", 0))),
    "geometric": lambda desc: IndexedSequence(lambda s: pow2(-s), label="geometric"),
    "alternating": lambda desc: IndexedSequence(lambda s: 1 if s % 2 == 0 else -1, label="alternating"),
    "dyadic-increasing": lambda desc: IndexedSequence(lambda s: 1 - pow2(-s), label="1 - 2^-s"),
}


def sequence_from_json(desc) -> IndexedSequence:
    if not isinstance(desc, dict):
        raise UsageError("sequence description must be a JSON object")
    if "values" in desc:
        return IndexedSequence.from_values(as_rational(v) for v in desc["values"])
    kind = desc.get("generator")
    if kind not in SEQUENCE_CATALOG:
        raise UsageError(f"unknown sequence generator {kind!r}; known: {sorted(SEQUENCE_CATALOG)}")
    return SEQUENCE_CATALOG[kind](desc)


POLYSEQ_CATALOG = {
    "zero": lambda desc: PolygonSequence.zero(),
    "scaled-identity": lambda desc: PolygonSequence.scaled_identity(as_rational(desc.get("factor", 1))),
    "tent-growth": lambda desc: PolygonSequence.tent_growth(),
    "uniform-ramp": lambda desc: PolygonSequence.uniform_ramp(),
    "damped-oscillation": lambda desc: PolygonSequence.damped_oscillation(),
    "constant": lambda desc: PolygonSequence.constant(
        Polygon.from_json(desc["polygon"]), Mode(desc.get("mode", "increasing"))
    ),
}


def polyseq_from_json(desc) -> PolygonSequence:
    if not isinstance(desc, dict):
        raise UsageError("polygon-sequence file must be a JSON object")
    if "polygons" in desc:
        return PolygonSequence.from_json(desc)
    kind = desc.get("generator")
    if kind not in POLYSEQ_CATALOG:
        raise UsageError(f"unknown polygon-sequence generator {kind!r}; known: {sorted(POLYSEQ_CATALOG)}")
    return POLYSEQ_CATALOG[kind](desc)


def adversaries_from_json(desc) -> list[diag.Adversary]:
    if not isinstance(desc, list):
        raise UsageError("adversary file must be a JSON list")
    out = []
    for pos, item in enumerate(desc):
        kind = item.get("kind")
        e = int(item.get("id", pos))
        if kind == "constant":
            out.append(diag.constant_adversary(e, as_rational(item.get("value", 0))))
        elif kind == "follower":
            out.append(diag.follower(e, int(item.get("delay", 1))))
        elif kind == "oscillator":
            out.append(diag.oscillator(e, as_rational(item.get("amplitude", 1))))
        elif kind == "budget-burner":
            out.append(diag.budget_burner(e, as_rational(item.get("step", "1/4")), as_rational(item.get("total", "5/4"))))
        elif kind == "literal":
            pgs = [Polygon.from_json(p) for p in item["polygons"]]
            out.append(diag.literal_adversary(e, pgs, int(item.get("per_stage", 1))))
        else:
            raise UsageError(f"unknown adversary kind {kind!r}")
    return out


def _certificate_arg(text: str):
    text = text.strip()
    if text.startswith("{"):
        obj = json.loads(text)
    elif Path(text).is_file():
        obj = _load_json(text)
    else:
        obj = {"variant": text}
    return obj


def _name(x: Fraction, wobble: bool):
    return perturbed_name(x) if wobble else constant_name(x)


def _emit_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


# commands -----------------------------------------------------------------------


def cmd_eval(args) -> int:
    pg = Polygon.from_json(_load_json(args.polygon))
    print(format_rational(pg(args.x)))
    return EXIT_OK


def cmd_dist(args) -> int:
    a = Polygon.from_json(_load_json(args.a))
    b = Polygon.from_json(_load_json(args.b))
    print(format_rational(sup_distance(a, b)))
    return EXIT_OK


def cmd_audit_seq(args) -> int:
    desc = _load_json(args.sequence)
    seq = sequence_from_json(desc)
    cert_obj = _certificate_arg(args.cert) if args.cert else desc.get("certificate")
    if cert_obj is None:
        raise UsageError("no certificate given (use --cert or a 'certificate' key)")
    if args.budget is not None:
        cert_obj = {**cert_obj, "budget": rational_to_json(args.budget)}
    cert = certificate_from_json(cert_obj)
    report = CertifiedSequence(seq, cert).audit(args.depth)
    _emit_json(report.to_json())
    return EXIT_OK if report.passed else EXIT_COUNTEREXAMPLE


def cmd_convert(args) -> int:
    ps = polyseq_from_json(_load_json(args.polyseq))
    if args.conversion == "lsc-to-machine":
        m = lsc_to_machine(ps)
        outs = m.run(_name(args.x, args.wobble), args.outputs)
        _emit_json({"outputs": [rational_to_json(v) for v in outs], "usage": m.usage(args.outputs)})
    elif args.conversion == "machine-to-lsc":
        pg = machine_to_lsc(lsc_to_machine(ps), args.stage, args.grid_limit, args.lookahead)
        _emit_json(pg.to_json())
    else:
        m = uwc_polyseq_to_machine(ps)
        if args.direction == "to-machine":
            outs = m.run(_name(args.x, args.wobble), args.outputs)
            _emit_json({"outputs": [rational_to_json(v) for v in outs], "usage": m.usage(args.outputs)})
        else:
            recovered = machine_to_uwc_polyseq(m, args.grid_limit)
            _emit_json(recovered.to_json(args.stages))
    return EXIT_OK


def cmd_maxof(args) -> int:
    ps = polyseq_from_json(_load_json(args.polyseq))
    cs = max_of_lsc(ps)
    report = cs.audit(args.depth)
    _emit_json({"maxima": [rational_to_json(v) for v in cs.seq.prefix(args.depth)], "audit": report.to_json()})
    return EXIT_OK if report.passed else EXIT_COUNTEREXAMPLE


def cmd_classify_const(args) -> int:
    cert = certificate_from_json(_certificate_arg(args.cert))
    tag = classify_constant(CertifiedSequence(IndexedSequence.constant(0), cert))
    print(tag.value)
    return EXIT_OK


def cmd_diagonalize(args) -> int:
    adversaries = adversaries_from_json(_load_json(args.adversaries))
    _, report = diag.run(adversaries, args.stages)
    payload = report.to_json(include_trace=not args.no_trace)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        summary = {o["id"]: o["verdict"] for o in payload["adversaries"]}
        _emit_json(summary)
    else:
        _emit_json(payload)
    return EXIT_OK


def cmd_emit(args) -> int:
    ps = polyseq_from_json(_load_json(args.polyseq))
    rows = []
    for s in range(args.stages):
        for x, y in ps[s].grid_rows(args.depth):
            rows.append((s, format_rational(x), format_rational(y)))
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["s", "x", "y"])
        writer.writerows(rows)
    else:
        _emit_json([{"s": s, "x": x, "y": y} for s, x, y in rows])
    return EXIT_OK


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weakcomp", description="Exact weakly computable functions on [0, 1].")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    q = sub.add_parser("eval", help="evaluate a polygon at a rational point")
    q.add_argument("polygon")
    q.add_argument("x", type=_rational_arg)
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("dist", help="sup distance between two polygons")
    q.add_argument("a")
    q.add_argument("b")
    q.set_defaults(func=cmd_dist)

    q = sub.add_parser("audit-seq", help="audit a convergence certificate on a sequence prefix")
    q.add_argument("sequence", help="sequence description (JSON)")
    q.add_argument("--cert", help="variant name, JSON object, or JSON file")
    q.add_argument("--budget", type=_rational_arg)
    q.add_argument("--depth", type=int, default=20)
    q.set_defaults(func=cmd_audit_seq)

    q = sub.add_parser("convert", help="convert between polygon sequences and machines")
    conv = q.add_subparsers(dest="conversion", required=True, parser_class=_Parser)
    c = conv.add_parser("lsc-to-machine")
    c.add_argument("--polyseq", required=True)
    c.add_argument("--x", type=_rational_arg, required=True)
    c.add_argument("--wobble", action="store_true", help="use a non-constant name of x")
    c.add_argument("--outputs", type=int, default=10)
    c = conv.add_parser("machine-to-lsc")
    c.add_argument("--polyseq", required=True)
    c.add_argument("--stage", type=int, required=True)
    c.add_argument("--grid-limit", type=int, default=12)
    c.add_argument("--lookahead", type=int, default=2)
    c = conv.add_parser("uwc")
    c.add_argument("--polyseq", required=True)
    c.add_argument("--direction", choices=["to-machine", "to-polygons"], required=True)
    c.add_argument("--x", type=_rational_arg, default=Fraction(1, 2))
    c.add_argument("--wobble", action="store_true")
    c.add_argument("--outputs", type=int, default=10)
    c.add_argument("--stages", type=int, default=4)
    c.add_argument("--grid-limit", type=int, default=12)
    q.set_defaults(func=cmd_convert)

    q = sub.add_parser("maxof", help="maxima of an increasing polygon sequence")
    q.add_argument("--polyseq", required=True)
    q.add_argument("--depth", type=int, default=10)
    q.set_defaults(func=cmd_maxof)

    q = sub.add_parser("classify-const", help="class of a constant function from its certificate")
    q.add_argument("--cert", required=True)
    q.set_defaults(func=cmd_classify_const)

    q = sub.add_parser("diagonalize", help="run the diagonal construction against adversaries")
    q.add_argument("--adversaries", required=True)
    q.add_argument("--stages", type=int, default=50)
    q.add_argument("--out")
    q.add_argument("--no-trace", action="store_true")
    q.set_defaults(func=cmd_diagonalize)

    q = sub.add_parser("emit", help="tabulate a polygon sequence on a dyadic grid")
    q.add_argument("--polyseq", required=True)
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--stages", type=int, default=3)
    q.add_argument("--format", default="csv")
    q.set_defaults(func=cmd_emit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "format", "csv") not in ("csv", "json"):
        print(f"weakcomp: unsupported format {args.format!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, TypeError, KeyError, DomainError, CoverNotFound) as exc:
        print(f"weakcomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
