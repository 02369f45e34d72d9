"""
Line-oriented text formats for polygraphs and Garside data, plus DOT output.

Polygraph documents::

    gens: a b
    rule alpha: b a b -> a
    cell A: b a b a b [ alpha@0 ] == b a b a b [ alpha@2 ; beta@0 ]

Words are whitespace-separated generator names; a path is its start word
followed by a bracketed step list, ``~`` marking a backward step.  Datum
documents list the elements (unit first) and one product line per ordered
nonunit pair, ``_`` standing for a product outside the family::

    elems: 1 a b c
    a * a = _
    a * b = c
    ...

``#`` starts a comment.  Serialization is canonical, so identical inputs
produce identical bytes, and parse(serialize(x)) == x on every document that
serializes (rules with empty sources are data-only and not representable).
"""

from __future__ import annotations

import itertools

from .core import (
    Generator,
    PolygraphError,
    RewritePath,
    RewriteStep,
    Rule,
    ThreeCell,
    ThreeOnePolygraph,
    TwoPolygraph,
    ValidationError,
    Word,
    apply_step,
    path_words,
    replay_path,
)
from .engine import CriticalBranching, join_branching
from .garside import GarsideDatum


class ParseError(PolygraphError):
    """Malformed document text; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _content_lines(text: str):
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield num, line


# ---------------------------------------------------------------------------
# Polygraph documents
# ---------------------------------------------------------------------------

def _split_label(body: str, num: int) -> tuple[str, str]:
    """The label is the first token, written with a trailing colon.

    Labels carry no whitespace but may contain colons themselves (kb:1,
    alpha:a,b), so the delimiter is the colon glued to the first token.
    """
    head, _, rest = body.lstrip().partition(" ")
    if not head.endswith(":") or len(head) < 2:
        raise ParseError("expected '<label>:' before the body", num)
    return head[:-1], rest


def _parse_path(p: TwoPolygraph, text: str, num: int) -> RewritePath:
    if "[" not in text or not text.rstrip().endswith("]"):
        raise ParseError("path must be '<word> [ steps ]'", num)
    word_part, steps_part = text.split("[", 1)
    steps_part = steps_part.rstrip()[:-1]
    start = tuple(p.gen_index(tok) for tok in word_part.split())
    steps = []
    for item in steps_part.split(";"):
        item = item.strip()
        if not item:
            continue
        forward = True
        if item.endswith("~"):
            forward = False
            item = item[:-1]
        if "@" not in item:
            raise ParseError(f"step {item!r} must be '<label>@<pos>'", num)
        label, _, pos = item.rpartition("@")
        if not pos.isdigit():
            raise ParseError(f"step position {pos!r} is not a number", num)
        steps.append(RewriteStep(label, int(pos), forward))
    return RewritePath(start, tuple(steps))


def parse_polygraph(text: str) -> TwoPolygraph | ThreeOnePolygraph:
    """Parse a polygraph document; returns a (3,1)-polygraph when it has cells."""
    gens: tuple[Generator, ...] | None = None
    rules: list[Rule] = []
    cell_specs: list[tuple[int, str, str]] = []
    for num, line in _content_lines(text):
        if line.startswith("gens:"):
            if gens is not None:
                raise ParseError("duplicate gens line", num)
            names = line[len("gens:"):].split()
            if not names:
                raise ParseError("gens line lists no generators", num)
            gens = tuple(Generator(n, i) for i, n in enumerate(names))
        elif line.startswith("rule "):
            if gens is None:
                raise ParseError("rule before gens line", num)
            label, rest = _split_label(line[len("rule "):], num)
            if "->" not in rest:
                raise ParseError("rule line needs '->'", num)
            src_text, tgt_text = rest.split("->", 1)
            if not src_text.split():
                raise ParseError("rule source must be nonempty", num)
            p = TwoPolygraph(gens, ())
            rules.append(Rule(label,
                              tuple(p.gen_index(t) for t in src_text.split()),
                              tuple(p.gen_index(t) for t in tgt_text.split())))
        elif line.startswith("cell "):
            label, rest = _split_label(line[len("cell "):], num)
            if "==" not in rest:
                raise ParseError("cell line needs '<label>: <path> == <path>'", num)
            cell_specs.append((num, label, rest))
        else:
            raise ParseError(f"unrecognized line {line!r}", num)
    if gens is None:
        raise ParseError("document has no gens line", 1)
    base = TwoPolygraph(gens, tuple(rules))
    if not cell_specs:
        return base
    cells = []
    for num, label, rest in cell_specs:
        lhs_text, rhs_text = rest.split("==", 1)
        cells.append(ThreeCell(label, _parse_path(base, lhs_text, num),
                               _parse_path(base, rhs_text, num)))
    return ThreeOnePolygraph(base, tuple(cells))


def _word_tokens(p: TwoPolygraph, w: Word) -> str:
    return " ".join(p.generators[i].name for i in w)


def _path_text(p: TwoPolygraph, path: RewritePath) -> str:
    steps = " ; ".join(
        f"{s.rule}@{s.position}{'' if s.forward else '~'}" for s in path.steps)
    return f"{_word_tokens(p, path.start)} [ {steps} ]".replace("[  ]", "[ ]")


def serialize_polygraph(x: TwoPolygraph | ThreeOnePolygraph) -> str:
    base = x.base if isinstance(x, ThreeOnePolygraph) else x
    for r in base.rules:
        if not r.source:
            raise ValidationError(
                f"rule {r.label!r} has an empty source and is not representable")
    lines = ["gens: " + " ".join(g.name for g in base.generators)]
    for r in base.rules:
        lines.append(f"rule {r.label}: {_word_tokens(base, r.source)} -> "
                     f"{_word_tokens(base, r.target)}")
    if isinstance(x, ThreeOnePolygraph):
        for c in x.cells:
            lines.append(f"cell {c.label}: {_path_text(base, c.lhs)} == "
                         f"{_path_text(base, c.rhs)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Datum documents
# ---------------------------------------------------------------------------

def parse_datum(text: str) -> GarsideDatum:
    """Parse a datum document; the table must cover every ordered nonunit pair."""
    elements: tuple[str, ...] | None = None
    entries: dict[tuple[int, int], int | None] = {}
    for num, line in _content_lines(text):
        if line.startswith("elems:"):
            if elements is not None:
                raise ParseError("duplicate elems line", num)
            names = tuple(line[len("elems:"):].split())
            if not names or names[0] != "1":
                raise ParseError('elems line must start with the unit "1"', num)
            elements = names
        else:
            if elements is None:
                raise ParseError("product line before elems line", num)
            if "*" not in line or "=" not in line:
                raise ParseError("product line needs '<u> * <v> = <w|_>'", num)
            left, value = line.split("=", 1)
            u_text, v_text = left.split("*", 1)
            u_name, v_name, w_name = u_text.strip(), v_text.strip(), value.strip()
            for n in (u_name, v_name):
                if n not in elements:
                    raise ParseError(f"unknown element {n!r}", num)
                if n == "1":
                    raise ParseError("product lines cover nonunit pairs only", num)
            key = (elements.index(u_name), elements.index(v_name))
            if key in entries:
                raise ParseError(f"duplicate product line for {u_name} * {v_name}", num)
            if w_name == "_":
                entries[key] = None
            elif w_name in elements:
                entries[key] = elements.index(w_name)
            else:
                raise ParseError(f"unknown element {w_name!r}", num)
    if elements is None:
        raise ParseError("document has no elems line", 1)
    n = len(elements)
    missing = [(i, j) for i in range(1, n) for j in range(1, n)
               if (i, j) not in entries]
    if missing:
        i, j = missing[0]
        raise ParseError(
            f"table must be total over nonunit pairs; missing "
            f"{elements[i]} * {elements[j]} (and {len(missing) - 1} more)",
            len(text.splitlines()) or 1)
    products = tuple(tuple(entries[(i, j)] for j in range(1, n)) for i in range(1, n))
    return GarsideDatum(elements, products)


def serialize_datum(d: GarsideDatum) -> str:
    lines = ["elems: " + " ".join(d.elements)]
    for i, j in itertools.product(d.nonunit(), repeat=2):
        w = d.mul(i, j)
        lines.append(f"{d.name(i)} * {d.name(j)} = {'_' if w is None else d.name(w)}")
    return "\n".join(lines) + "\n"


def sniff_kind(text: str) -> str:
    """'polygraph' or 'datum', by the first content line."""
    for _, line in _content_lines(text):
        if line.startswith("elems:"):
            return "datum"
        return "polygraph"
    raise ParseError("empty document", 1)


# ---------------------------------------------------------------------------
# DOT emission
# ---------------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def _dot(nodes: list[str], edges: list[tuple[str, str, str]]) -> str:
    lines = ["digraph rewriting {"]
    for nm in sorted(set(nodes)):
        lines.append(f"  {_quote(nm)};")
    for src, dst, label in sorted(set(edges)):
        lines.append(f"  {_quote(src)} -> {_quote(dst)} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _path_edges(p: TwoPolygraph, path: RewritePath):
    nodes, edges = [], []
    words = path_words(path, p)
    for w, s, w2 in zip(words, path.steps, words[1:]):
        arrow = (p.word_str(w), p.word_str(w2),
                 f"{s.rule}@{s.position}{'' if s.forward else '~'}")
        edges.append(arrow)
    nodes.extend(p.word_str(w) for w in words)
    return nodes, edges


def render_dot_path(p: TwoPolygraph, path: RewritePath) -> str:
    nodes, edges = _path_edges(p, path)
    return _dot(nodes, edges)


def render_dot_cell(x: ThreeOnePolygraph, label: str) -> str:
    """The confluence diagram of one 3-cell: both sides as word graphs."""
    cell = x.cell(label)
    nodes, edges = [], []
    for side in (cell.lhs, cell.rhs):
        n, e = _path_edges(x.base, side)
        nodes.extend(n)
        edges.extend(e)
    return _dot(nodes, edges)


def render_dot_branching(p: TwoPolygraph, b: CriticalBranching) -> str:
    """A critical branching with its joining paths (when it joins)."""
    nodes = [p.word_str(b.source)]
    edges = []
    joined = join_branching(p, b)
    if joined is None:
        for s in (b.left, b.right):
            w = apply_step(b.source, s, p)
            nodes.append(p.word_str(w))
            edges.append((p.word_str(b.source), p.word_str(w), f"{s.rule}@{s.position}"))
    else:
        for side in joined:
            n, e = _path_edges(p, side)
            nodes.extend(n)
            edges.extend(e)
    return _dot(nodes, edges)


def render_dot_polygraph(x: TwoPolygraph | ThreeOnePolygraph) -> str:
    """The rule graph: every rule's source and target words, one edge per rule."""
    p = x.base if isinstance(x, ThreeOnePolygraph) else x
    nodes, edges = [], []
    for r in p.rules:
        if not r.source:
            continue
        nodes.extend([p.word_str(r.source), p.word_str(r.target)])
        edges.append((p.word_str(r.source), p.word_str(r.target), r.label))
    return _dot(nodes, edges)
