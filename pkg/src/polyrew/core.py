"""
Core combinatorial structures for string rewriting over a free monoid.

A word is a tuple of generator indices into a fixed alphabet.  A 2-polygraph
is an alphabet together with labelled rewriting rules (source word, target
word).  A rewriting step applies one rule, forwards or backwards, at an
offset; a rewriting path is a start word plus a composable sequence of steps.
A 3-cell is a labelled pair of parallel paths (same start word, same end
word); a (3,1)-polygraph is a 2-polygraph plus a family of 3-cells.

Everything is immutable after construction and all operations are pure, so
values can be shared freely across threads.  Equality is structural
throughout; labels are the identity of rules and cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

Word = tuple[int, ...]


class PolygraphError(Exception):
    """Base class for all structural and rewriting errors."""


class ValidationError(PolygraphError):
    """A structure violates one of its invariants."""


class RedexMismatch(PolygraphError):
    """A step does not match the word it is applied to.

    Attributes carry enough context to locate the failure: the word, the
    offending step and, when replaying a path, the index of that step.
    """

    def __init__(self, message: str, word: Word = (), step: "RewriteStep | None" = None,
                 step_index: int | None = None):
        super().__init__(message)
        self.word = word
        self.step = step
        self.step_index = step_index


class TableNotAssociative(PolygraphError):
    """A finite multiplication table fails associativity."""


class NoUnit(PolygraphError):
    """A finite multiplication table has no unit at the declared index."""


@dataclass(frozen=True)
class Generator:
    name: str   # nonempty symbol, unique within its alphabet
    index: int  # dense position in the alphabet


@dataclass(frozen=True)
class Rule:
    """A generating 2-cell, oriented source -> target.

    ``completion_excluded`` marks rules that are data of a presentation but
    not part of the rewriting system proper (empty-source rules of the
    standard presentation): they are skipped by redex search and completion,
    though paths may still replay them.
    """
    label: str
    source: Word
    target: Word
    completion_excluded: bool = False

    def __post_init__(self):
        if not self.label:
            raise ValidationError("rule label must be nonempty")
        if self.source == self.target:
            raise ValidationError(f"rule {self.label!r}: source equals target")

    def side(self, forward: bool) -> Word:
        return self.source if forward else self.target

    def other(self, forward: bool) -> Word:
        return self.target if forward else self.source


@dataclass(frozen=True)
class RewriteStep:
    """One rule application: ``rule`` at ``position``, forward or backward."""
    rule: str
    position: int
    forward: bool = True

    def inverse(self) -> "RewriteStep":
        return RewriteStep(self.rule, self.position, not self.forward)


@dataclass(frozen=True)
class RewritePath:
    """A composable sequence of steps from ``start``.

    Validity (every step matches when replayed) is not enforced by the
    constructor; use :func:`replay_path` to certify a path.
    """
    start: Word
    steps: tuple[RewriteStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TwoPolygraph:
    generators: tuple[Generator, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValidationError("generator names must be unique")
        for i, g in enumerate(self.generators):
            if g.index != i:
                raise ValidationError(f"generator {g.name!r} has index {g.index}, expected {i}")
            if not g.name:
                raise ValidationError("generator names must be nonempty")
        labels = [r.label for r in self.rules]
        if len(set(labels)) != len(labels):
            raise ValidationError("rule labels must be unique")
        n = len(self.generators)
        for r in self.rules:
            for w in (r.source, r.target):
                if any(not (0 <= i < n) for i in w):
                    raise ValidationError(f"rule {r.label!r} uses letters outside the alphabet")
        object.__setattr__(self, "_by_label", {r.label: r for r in self.rules})
        object.__setattr__(self, "_index_of", {g.name: g.index for g in self.generators})

    # -- lookups -----------------------------------------------------------

    def rule(self, label: str) -> Rule:
        try:
            return self._by_label[label]
        except KeyError:
            raise ValidationError(f"unknown rule label {label!r}") from None

    def has_rule(self, label: str) -> bool:
        return label in self._by_label

    def gen_index(self, name: str) -> int:
        try:
            return self._index_of[name]
        except KeyError:
            raise ValidationError(f"unknown generator {name!r}") from None

    def word(self, *names: str) -> Word:
        return tuple(self.gen_index(n) for n in names)

    def word_str(self, w: Word, sep: str | None = None) -> str:
        names = [self.generators[i].name for i in w]
        if sep is None:
            sep = "" if all(len(n) == 1 for n in names) else "|"
        return sep.join(names) if names else "()"

    def rewriting_rules(self) -> tuple[Rule, ...]:
        """The rules that participate in redex search and completion."""
        return tuple(r for r in self.rules if not r.completion_excluded and r.source)


@dataclass(frozen=True)
class ThreeCell:
    """A generating 3-cell: a labelled pair of parallel rewriting paths.

    ``family`` optionally records which of the Garside cell families
    (A, B, C, D, E, E', F, F', G, G', H, I) the cell instantiates.
    """
    label: str
    lhs: RewritePath
    rhs: RewritePath
    family: str | None = None


@dataclass(frozen=True)
class ThreeOnePolygraph:
    base: TwoPolygraph
    cells: tuple[ThreeCell, ...] = ()

    def __post_init__(self):
        labels = [c.label for c in self.cells]
        if len(set(labels)) != len(labels):
            raise ValidationError("3-cell labels must be unique")
        for c in self.cells:
            if c.lhs.start != c.rhs.start:
                raise ValidationError(f"3-cell {c.label!r}: sides start at different words")
            end_l = replay_path(c.lhs, self.base)
            end_r = replay_path(c.rhs, self.base)
            if end_l != end_r:
                raise ValidationError(
                    f"3-cell {c.label!r}: sides are not parallel "
                    f"({self.base.word_str(end_l)} vs {self.base.word_str(end_r)})")
        object.__setattr__(self, "_cell_by_label", {c.label: c for c in self.cells})

    def cell(self, label: str) -> ThreeCell:
        try:
            return self._cell_by_label[label]
        except KeyError:
            raise ValidationError(f"unknown 3-cell label {label!r}") from None

    def has_cell(self, label: str) -> bool:
        return label in self._cell_by_label


# ---------------------------------------------------------------------------
# Steps and paths
# ---------------------------------------------------------------------------

def apply_step(word: Word, step: RewriteStep, p: TwoPolygraph) -> Word:
    """Apply one rewriting step to ``word``.

    Forward steps replace an occurrence of the rule's source by its target at
    ``step.position``; backward steps do the reverse.  Raises
    :class:`RedexMismatch` if the expected side does not occur there.
    """
    rule = p.rule(step.rule)
    redex = rule.side(step.forward)
    other = rule.other(step.forward)
    i = step.position
    if i < 0 or i + len(redex) > len(word):
        raise RedexMismatch(
            f"step {step.rule}@{i}: position out of range in {p.word_str(word)}",
            word, step)
    if word[i:i + len(redex)] != redex:
        raise RedexMismatch(
            f"step {step.rule}@{i}{'' if step.forward else '~'}: "
            f"{p.word_str(redex)} does not occur at offset {i} of {p.word_str(word)}",
            word, step)
    return word[:i] + other + word[i + len(redex):]


def replay_path(path: RewritePath, p: TwoPolygraph) -> Word:
    """Replay every step of ``path`` and return the end word.

    A successful replay certifies that the path is composable.  On failure
    the raised :class:`RedexMismatch` carries the index of the bad step.
    """
    w = path.start
    for k, s in enumerate(path.steps):
        try:
            w = apply_step(w, s, p)
        except RedexMismatch as e:
            raise RedexMismatch(f"path invalid at step {k + 1}: {e}", w, s, step_index=k) from None
    return w


def path_words(path: RewritePath, p: TwoPolygraph) -> list[Word]:
    """All words visited by the path, start included (length = len+1)."""
    words = [path.start]
    for s in path.steps:
        words.append(apply_step(words[-1], s, p))
    return words


def invert_path(path: RewritePath, p: TwoPolygraph) -> RewritePath:
    """The formal inverse: from the end word, the steps reversed and flipped."""
    end = replay_path(path, p)
    return RewritePath(end, tuple(s.inverse() for s in reversed(path.steps)))


def concat_paths(first: RewritePath, second: RewritePath, p: TwoPolygraph) -> RewritePath:
    end = replay_path(first, p)
    if end != second.start:
        raise RedexMismatch(
            f"paths do not compose: {p.word_str(end)} != {p.word_str(second.start)}", end)
    return RewritePath(first.start, first.steps + second.steps)


def cancel_inverse_pairs(path: RewritePath) -> RewritePath:
    """Erase adjacent mutually-inverse steps until none remain.

    This is the normal form used for path equality in the free (2,1)-category:
    two paths are identified when they agree after cancellation.
    """
    out: list[RewriteStep] = []
    for s in path.steps:
        if out and out[-1].rule == s.rule and out[-1].position == s.position \
                and out[-1].forward != s.forward:
            out.pop()
        else:
            out.append(s)
    return RewritePath(path.start, tuple(out))


def paths_equal(a: RewritePath, b: RewritePath) -> bool:
    """Syntactic path equality after cancellation of adjacent inverse pairs."""
    return cancel_inverse_pairs(a) == cancel_inverse_pairs(b)


# ---------------------------------------------------------------------------
# Finite monoid tables and the standard presentation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonoidTable:
    """A total multiplication table on a finite element set.

    ``table[i][j]`` is the index of the product of elements i and j; ``unit``
    indexes the neutral element.
    """
    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    unit: int = 0

    def __post_init__(self):
        n = len(self.elements)
        if len(set(self.elements)) != n or n == 0:
            raise ValidationError("element names must be nonempty and unique")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValidationError("multiplication table must be total")
        if any(not (0 <= v < n) for row in self.table for v in row):
            raise ValidationError("table entries must index elements")

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def check(self) -> None:
        """Raise unless the table is an associative monoid with the declared unit."""
        n = len(self.elements)
        u = self.unit
        for i in range(n):
            if self.mul(u, i) != i or self.mul(i, u) != i:
                raise NoUnit(f"element {self.elements[u]!r} is not a two-sided unit")
        for i, j, k in itertools.product(range(n), repeat=3):
            if self.mul(self.mul(i, j), k) != self.mul(i, self.mul(j, k)):
                raise TableNotAssociative(
                    f"({self.elements[i]}*{self.elements[j]})*{self.elements[k]} != "
                    f"{self.elements[i]}*({self.elements[j]}*{self.elements[k]})")


def std2(table: MonoidTable) -> TwoPolygraph:
    """The standard presentation of a finite monoid.

    One generator per element; a rule gamma:u,v collapsing every length-two
    product, plus the empty-source rule iota introducing the unit generator.
    The result is a presentation datum, not a terminating rewriting system:
    iota is flagged out of redex search and completion.
    """
    table.check()
    names = table.elements
    gens = tuple(Generator(name, i) for i, name in enumerate(names))
    rules = [
        Rule(f"gamma:{names[i]},{names[j]}", (i, j), (table.mul(i, j),))
        for i in range(len(names)) for j in range(len(names))
    ]
    rules.append(Rule("iota", (), (table.unit,), completion_excluded=True))
    return TwoPolygraph(gens, tuple(rules))


def std3(table: MonoidTable) -> ThreeOnePolygraph:
    """The standard coherent presentation: std2 plus cells A:u,v,w, L:u, R:u."""
    base = std2(table)
    names = table.elements
    n = len(names)
    u1 = table.unit
    cells = []
    for i, j, k in itertools.product(range(n), repeat=3):
        ij, jk = table.mul(i, j), table.mul(j, k)
        lhs = RewritePath((i, j, k), (
            RewriteStep(f"gamma:{names[i]},{names[j]}", 0),
            RewriteStep(f"gamma:{names[ij]},{names[k]}", 0),
        ))
        rhs = RewritePath((i, j, k), (
            RewriteStep(f"gamma:{names[j]},{names[k]}", 1),
            RewriteStep(f"gamma:{names[i]},{names[jk]}", 0),
        ))
        cells.append(ThreeCell(f"A:{names[i]},{names[j]},{names[k]}", lhs, rhs))
    for i in range(n):
        cells.append(ThreeCell(
            f"L:{names[i]}",
            RewritePath((i,), (RewriteStep("iota", 0),
                               RewriteStep(f"gamma:{names[u1]},{names[i]}", 0))),
            RewritePath((i,)),
        ))
        cells.append(ThreeCell(
            f"R:{names[i]}",
            RewritePath((i,), (RewriteStep("iota", 1),
                               RewriteStep(f"gamma:{names[i]},{names[u1]}", 0))),
            RewritePath((i,)),
        ))
    return ThreeOnePolygraph(base, tuple(cells))


def alphabet(*names: str) -> tuple[Generator, ...]:
    """Convenience constructor for an interned alphabet."""
    return tuple(Generator(n, i) for i, n in enumerate(names))
