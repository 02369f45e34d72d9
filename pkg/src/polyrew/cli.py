"""
Command-line interface.

Commands read a polygraph or datum document from a file (``-`` = stdin) and
write text documents or DOT graphs to stdout.  Exit codes: 0 on success, 1 on
a validation failure, 2 on a parse error.

    polyrew catalog klein_bottle | polyrew hc - --order deglex:a,b
    polyrew catalog atilde2_datum | polyrew reduce-gar3 -
"""

from __future__ import annotations

import argparse
import sys

from . import catalog as cat
from . import formats
from .core import PolygraphError, ThreeOnePolygraph, TwoPolygraph, ValidationError
from .engine import (
    critical_branchings,
    deglex,
    greedy_collapse_rules,
    homotopical_completion,
    homotopical_reduce,
    knuth_bendix,
    normalize,
    squier,
    triple_branchings,
)
from .garside import (
    gar2,
    gar3,
    reduce_to_gar3,
    underline_gar2,
    underline_gar3,
    validate_datum,
)

DEFAULT_BUDGET = 10 ** 6


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_order(spec: str, p: TwoPolygraph):
    if spec.startswith("deglex:"):
        names = [n for n in spec[len("deglex:"):].split(",") if n]
        return deglex(p, names)
    if spec == "divlex":
        raise ValidationError(
            "divlex needs a divisibility relation; it is only available for "
            "datum-backed commands (gar2, ugar2, ...)")
    raise ValidationError(f"unknown order {spec!r}; use deglex:<gen,gen,...>")


def _require_polygraph(text: str) -> TwoPolygraph:
    x = formats.parse_polygraph(text)
    return x.base if isinstance(x, ThreeOnePolygraph) else x


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _cmd_check(args) -> int:
    text = _read(args.file)
    kind = formats.sniff_kind(text)
    if kind == "polygraph":
        x = formats.parse_polygraph(text)
        base = x.base if isinstance(x, ThreeOnePolygraph) else x
        cells = len(x.cells) if isinstance(x, ThreeOnePolygraph) else 0
        _emit(f"ok: polygraph with {len(base.generators)} generators, "
              f"{len(base.rules)} rules, {cells} cells\n")
        return 0
    d = formats.parse_datum(text)
    report = validate_datum(d)
    if report.ok:
        _emit(f"ok: datum with {d.size} elements passes all checks "
              "(associativity, left-cancellativity, no invertibles, "
              "noetherianity, mcm closure)\n")
        return 0
    for v in report.violations():
        _emit(f"violation: {v}\n")
    return 1


def _cmd_normalize(args) -> int:
    p = _require_polygraph(_read(args.file))
    w = p.word(*args.letters)
    nf, path = normalize(p, w, args.strategy, args.budget)
    _emit(f"{p.word_str(nf, ' ')}\n")
    if args.trace:
        for s in path.steps:
            _emit(f"# {s.rule}@{s.position}\n")
    return 0


def _cmd_branchings(args) -> int:
    p = _require_polygraph(_read(args.file))
    branchings = critical_branchings(p)
    if args.format == "dot":
        for b in branchings:
            _emit(formats.render_dot_branching(p, b))
        return 0
    for b in branchings:
        _emit(f"{b.shape} at {p.word_str(b.source)}: "
              f"{b.left.rule}@{b.left.position} / {b.right.rule}@{b.right.position}\n")
    triples = triple_branchings(p)
    _emit(f"# {len(branchings)} critical branchings, "
          f"{len(triples)} critical triple branchings\n")
    return 0


def _cmd_complete(args) -> int:
    p = _require_polygraph(_read(args.file))
    order = _parse_order(args.order, p)
    completed, _ = knuth_bendix(p, order, args.budget)
    _emit(formats.serialize_polygraph(completed))
    return 0


def _cmd_squier(args) -> int:
    p = _require_polygraph(_read(args.file))
    _emit(formats.serialize_polygraph(squier(p, args.budget)))
    return 0


def _cmd_hc(args) -> int:
    p = _require_polygraph(_read(args.file))
    order = _parse_order(args.order, p)
    _emit(formats.serialize_polygraph(homotopical_completion(p, order, args.budget)))
    return 0


def _cmd_reduce(args) -> int:
    x = formats.parse_polygraph(_read(args.file))
    if not isinstance(x, ThreeOnePolygraph):
        x = ThreeOnePolygraph(x, ())
    part = greedy_collapse_rules(x)
    reduced = homotopical_reduce(x, part)
    for entry in part.gamma3:
        _emit(f"# collapsed rule {entry.rule} against cell {entry.cell}\n")
    _emit(formats.serialize_polygraph(reduced))
    return 0


def _datum_command(builder):
    def run(args) -> int:
        d = formats.parse_datum(_read(args.file))
        report = validate_datum(d)
        if not report.ok:
            for v in report.violations():
                _emit(f"violation: {v}\n")
            return 1
        _emit(formats.serialize_polygraph(builder(d)))
        return 0
    return run


def _cmd_reduce_gar3(args) -> int:
    d = formats.parse_datum(_read(args.file))
    report = validate_datum(d)
    if not report.ok:
        for v in report.violations():
            _emit(f"violation: {v}\n")
        return 1
    reduced, summary = reduce_to_gar3(d)
    _emit(f"# collapsed {summary.collapsed_cells} cells and "
          f"{summary.collapsed_rules} rules; verified {summary.verified_spheres} "
          "collapse spheres\n")
    for w in summary.warnings:
        _emit(f"# warning: {w}\n")
    _emit(formats.serialize_polygraph(reduced))
    return 0


def _cmd_catalog(args) -> int:
    obj = cat.build(args.name, *args.parameters)
    if isinstance(obj, (TwoPolygraph, ThreeOnePolygraph)):
        _emit(formats.serialize_polygraph(obj))
    else:
        _emit(formats.serialize_datum(obj))
    return 0


def _cmd_render(args) -> int:
    text = _read(args.file)
    if formats.sniff_kind(text) == "datum":
        d = formats.parse_datum(text)
        _emit(formats.render_dot_polygraph(gar2(d)))
        return 0
    x = formats.parse_polygraph(text)
    if args.cell is not None:
        if not isinstance(x, ThreeOnePolygraph):
            raise ValidationError("--cell needs a document with cells")
        _emit(formats.render_dot_cell(x, args.cell))
        return 0
    base = x.base if isinstance(x, ThreeOnePolygraph) else x
    if args.branching is not None:
        branchings = critical_branchings(base)
        if not 0 <= args.branching < len(branchings):
            raise ValidationError(
                f"branching index out of range (have {len(branchings)})")
        _emit(formats.render_dot_branching(base, branchings[args.branching]))
        return 0
    _emit(formats.render_dot_polygraph(x))
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="polyrew",
        description="String rewriting over monoid presentations: completions, "
                    "coherent presentations, and Garside-family presentations.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, order=False):
        p.add_argument("file", help="input document, or - for stdin")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="normalization step budget")
        p.add_argument("--format", choices=("text", "dot"), default="text")
        if order:
            p.add_argument("--order", required=True,
                           help="termination order, e.g. deglex:a,b")

    p = sub.add_parser("check", help="validate a polygraph or datum document")
    common(p)
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("normalize", help="rewrite a word to normal form")
    common(p)
    p.add_argument("letters", nargs="+", help="the word, one generator per token")
    p.add_argument("--strategy", choices=("leftmost", "rightmost"), default="leftmost")
    p.add_argument("--trace", action="store_true", help="also print the path")
    p.set_defaults(run=_cmd_normalize)

    p = sub.add_parser("branchings", help="list critical (and triple) branchings")
    common(p)
    p.set_defaults(run=_cmd_branchings)

    p = sub.add_parser("complete", help="Knuth-Bendix completion")
    common(p, order=True)
    p.set_defaults(run=_cmd_complete)

    p = sub.add_parser("squier", help="Squier completion of a convergent polygraph")
    common(p)
    p.set_defaults(run=_cmd_squier)

    p = sub.add_parser("hc", help="homotopical completion (Knuth-Bendix then Squier)")
    common(p, order=True)
    p.set_defaults(run=_cmd_hc)

    p = sub.add_parser("reduce", help="greedy rule-level homotopical reduction")
    common(p)
    p.set_defaults(run=_cmd_reduce)

    for name, builder, help_text in (
            ("gar2", gar2, "triangular presentation of a Garside datum"),
            ("ugar2", underline_gar2, "its convergent completion"),
            ("ugar3", underline_gar3, "the twelve-family coherent completion"),
            ("gar3", gar3, "the associativity coherent presentation")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.set_defaults(run=_datum_command(builder))

    p = sub.add_parser("reduce-gar3",
                       help="collapse the twelve-family completion down to gar3")
    common(p)
    p.set_defaults(run=_cmd_reduce_gar3)

    p = sub.add_parser("catalog", help="emit a built-in presentation or datum")
    p.add_argument("name", choices=sorted({e.name for e in cat.CATALOG}))
    p.add_argument("parameters", nargs="*", type=int)
    p.set_defaults(run=_cmd_catalog)

    p = sub.add_parser("render", help="emit a DOT diagram")
    common(p)
    p.add_argument("--cell", help="render one 3-cell's confluence diagram")
    p.add_argument("--branching", type=int,
                   help="render one critical branching with its joins")
    p.set_defaults(run=_cmd_render)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except formats.ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except PolygraphError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
