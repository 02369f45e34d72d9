"""
Rewriting machinery over 2-polygraphs.

Contains the termination orders (deglex, divlex), normalization with a step
budget, enumeration of critical branchings and of critical triple branchings,
Knuth-Bendix completion, Squier completion, homotopical completion, 3-spheres
built from whiskered 3-cells and exchange squares, and homotopical reduction
with respect to a collapsible part.

Branching and cell enumeration is canonical (sorted by rule labels and
positions), so repeated runs produce byte-identical output.  All functions
are pure; completion and reduction are sequential deterministic procedures.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import (
    Generator,
    PolygraphError,
    RedexMismatch,
    RewritePath,
    RewriteStep,
    Rule,
    ThreeCell,
    ThreeOnePolygraph,
    TwoPolygraph,
    ValidationError,
    Word,
    apply_step,
    cancel_inverse_pairs,
    concat_paths,
    invert_path,
    paths_equal,
    replay_path,
)

DEFAULT_BUDGET = 10 ** 6


class StepBudgetExceeded(PolygraphError):
    """Normalization exceeded its step budget; suspected non-termination."""


class BudgetExceeded(PolygraphError):
    """Completion did not terminate within its budget."""


class InvalidOrderSpec(PolygraphError):
    """An order specification violates its invariants (e.g. non-transitive divlex)."""


class OrientationFailure(PolygraphError):
    """Two normal forms are incomparable under the given order."""

    def __init__(self, message: str, left: Word = (), right: Word = ()):
        super().__init__(message)
        self.left = left
        self.right = right


class NotLocallyConfluent(PolygraphError):
    """A critical branching failed to join.  Carries the branching."""

    def __init__(self, message: str, branching: "CriticalBranching | None" = None):
        super().__init__(message)
        self.branching = branching


class NotParallel(PolygraphError):
    """The two sides of a sphere do not bound parallel 2-cells."""


class NotCollapsible(PolygraphError):
    """A collapsible part fails one of its conditions; the message names it."""


class SubstitutionOutOfScope(PolygraphError):
    """A reduction needs 3-dimensional rewriting beyond rule-for-path substitution."""


# ---------------------------------------------------------------------------
# Termination orders
# ---------------------------------------------------------------------------

class Comparison(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    INCOMPARABLE = 2


@dataclass(frozen=True)
class OrderSpec:
    """A termination order: deglex over a total generator order, or divlex
    over a strict partial order "properly-left-divides" on generators.

    For deglex, ``ranks[i]`` is the rank of generator i (lower = smaller).
    For divlex, ``divides`` holds pairs (i, j) meaning generator i properly
    left-divides generator j; the relation must be irreflexive and transitive.
    """
    kind: str  # "deglex" | "divlex"
    ranks: tuple[int, ...] = ()
    divides: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.kind not in ("deglex", "divlex"):
            raise InvalidOrderSpec(f"unknown order kind {self.kind!r}")
        if self.kind == "divlex":
            for (i, j) in self.divides:
                if i == j:
                    raise InvalidOrderSpec(f"divlex relation is not irreflexive at {i}")
            for (i, j), (k, l) in itertools.product(self.divides, repeat=2):
                if j == k and (i, l) not in self.divides:
                    raise InvalidOrderSpec(
                        f"divlex relation is not transitive: ({i},{j}) and ({k},{l})")


def deglex(p: TwoPolygraph, names: Iterable[str]) -> OrderSpec:
    """Degree-then-lexicographic order induced by listing generators smallest first."""
    order = [p.gen_index(n) for n in names]
    if sorted(order) != list(range(len(p.generators))):
        raise InvalidOrderSpec("deglex generator order must list every generator once")
    ranks = [0] * len(order)
    for rank, idx in enumerate(order):
        ranks[idx] = rank
    return OrderSpec("deglex", ranks=tuple(ranks))


def divlex(relation: Iterable[tuple[int, int]]) -> OrderSpec:
    """Length-then-first-difference order from a proper-left-divisibility relation.

    The relation is closed transitively here; irreflexivity of the closure is
    required (a cycle would break well-foundedness).
    """
    pairs = set(relation)
    changed = True
    while changed:
        changed = False
        for (i, j), (k, l) in itertools.product(tuple(pairs), repeat=2):
            if j == k and (i, l) not in pairs:
                pairs.add((i, l))
                changed = True
    return OrderSpec("divlex", divides=frozenset(pairs))


def compare_words(order: OrderSpec, a: Word, b: Word) -> Comparison:
    """Compare two words under ``order``.

    deglex: by length, then lexicographically by generator rank; total.
    divlex: longer words are greater; at equal length, a > b iff at the first
    differing position the letter of a properly left-divides the letter of b.
    Both orders are compatible with prefix and suffix contexts.
    """
    if a == b:
        return Comparison.EQUAL
    if len(a) != len(b):
        return Comparison.GREATER if len(a) > len(b) else Comparison.LESS
    if order.kind == "deglex":
        ra = tuple(order.ranks[i] for i in a)
        rb = tuple(order.ranks[i] for i in b)
        return Comparison.GREATER if ra > rb else Comparison.LESS
    for x, y in zip(a, b):
        if x == y:
            continue
        if (x, y) in order.divides:
            return Comparison.GREATER
        if (y, x) in order.divides:
            return Comparison.LESS
        return Comparison.INCOMPARABLE
    return Comparison.EQUAL


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _redex_index(rules: tuple[Rule, ...]) -> dict[Word, list[str]]:
    by_source: dict[Word, list[str]] = {}
    for r in rules:
        by_source.setdefault(r.source, []).append(r.label)
    for labels in by_source.values():
        labels.sort()
    return by_source


def _find_redex(w: Word, index: dict[Word, list[str]], lengths: tuple[int, ...],
                strategy: str):
    positions = range(len(w)) if strategy == "leftmost" else range(len(w) - 1, -1, -1)
    for i in positions:
        best: str | None = None
        for k in lengths:
            if i + k > len(w):
                continue
            labels = index.get(w[i:i + k])
            if labels and (best is None or labels[0] < best):
                best = labels[0]
        if best is not None:
            return i, best
    return None


def normalize(p: TwoPolygraph, w: Word, strategy: str = "leftmost",
              budget: int = DEFAULT_BUDGET) -> tuple[Word, RewritePath]:
    """Rewrite ``w`` to a reduced word, returning it with the path taken.

    The polygraph must contain no empty-source rules among its rewriting
    rules.  Termination is the caller's responsibility; the step budget
    converts suspected non-termination into :class:`StepBudgetExceeded`.
    """
    rules = p.rewriting_rules()
    if any(not r.source for r in p.rules if not r.completion_excluded):
        raise ValidationError("normalize: polygraph has empty-source rewriting rules")
    if strategy not in ("leftmost", "rightmost"):
        raise ValidationError(f"unknown strategy {strategy!r}")
    index = _redex_index(rules)
    lengths = tuple(sorted({len(src) for src in index}))
    steps: list[RewriteStep] = []
    current = w
    for _ in range(budget):
        hit = _find_redex(current, index, lengths, strategy)
        if hit is None:
            return current, RewritePath(w, tuple(steps))
        i, label = hit
        step = RewriteStep(label, i)
        current = apply_step(current, step, p)
        steps.append(step)
    raise StepBudgetExceeded(f"no normal form within {budget} steps from {p.word_str(w)}")


# ---------------------------------------------------------------------------
# Critical branchings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalBranching:
    """A minimal nontrivial pair of forward steps from a common source.

    Minimality is concrete for string rewriting: the left redex sits at
    offset 0, the source is exactly the union of the two redexes, and trivial
    pairs (same rule at the same position; disjoint redexes) are excluded.
    Shapes: "overlap" (proper overlap), "inclusion" (one redex inside the
    other), "equal_source" (distinct rules with the same source word).
    """
    source: Word
    left: RewriteStep
    right: RewriteStep
    shape: str


def _branching_key(p: TwoPolygraph, b: CriticalBranching):
    return (b.left.rule, b.right.rule, b.left.position, b.right.position, b.source)


def critical_branchings(p: TwoPolygraph) -> list[CriticalBranching]:
    """All critical branchings, duplicate-free, in canonical order."""
    rules = p.rewriting_rules()
    found: dict[tuple, CriticalBranching] = {}

    def record(b: CriticalBranching):
        found.setdefault((b.source, frozenset([b.left, b.right])), b)

    for r1, r2 in itertools.product(rules, repeat=2):
        s1, s2 = r1.source, r2.source
        # proper overlaps: a suffix of s1 is a prefix of s2
        for k in range(1, min(len(s1), len(s2))):
            if s1[len(s1) - k:] == s2[:k]:
                src = s1 + s2[k:]
                record(CriticalBranching(
                    src, RewriteStep(r1.label, 0), RewriteStep(r2.label, len(s1) - k),
                    "overlap"))
        # inclusion: s2 properly inside s1
        if len(s2) < len(s1):
            for i in range(len(s1) - len(s2) + 1):
                if s1[i:i + len(s2)] == s2:
                    record(CriticalBranching(
                        s1, RewriteStep(r1.label, 0), RewriteStep(r2.label, i),
                        "inclusion"))
        # equal sources, distinct rules
        if s1 == s2 and r1.label < r2.label:
            record(CriticalBranching(
                s1, RewriteStep(r1.label, 0), RewriteStep(r2.label, 0), "equal_source"))

    return sorted(found.values(), key=lambda b: _branching_key(p, b))


def join_branching(p: TwoPolygraph, b: CriticalBranching,
                   budget: int = DEFAULT_BUDGET) -> tuple[RewritePath, RewritePath] | None:
    """Complete both legs of a branching by leftmost normalization.

    Returns the two completing paths when the normal forms coincide, or
    ``None`` when they do not (the branching is not confluent as is).
    """
    t1 = apply_step(b.source, b.left, p)
    t2 = apply_step(b.source, b.right, p)
    n1, p1 = normalize(p, t1, "leftmost", budget)
    n2, p2 = normalize(p, t2, "leftmost", budget)
    if n1 != n2:
        return None
    left = RewritePath(b.source, (b.left,) + p1.steps)
    right = RewritePath(b.source, (b.right,) + p2.steps)
    return left, right


# ---------------------------------------------------------------------------
# Knuth-Bendix completion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KBEvent:
    branching: CriticalBranching
    joined: bool
    added: Rule | None = None  # the oriented rule adjoined when not joined


def knuth_bendix(p: TwoPolygraph, order: OrderSpec, budget: int = DEFAULT_BUDGET,
                 max_rules: int = 10_000) -> tuple[TwoPolygraph, list[KBEvent]]:
    """Complete ``p`` into a critically-confluent polygraph under ``order``.

    Proceeds in rounds: every critical branching of the current system is
    examined, and every branching that fails to join contributes one oriented
    rule (normal form to normal form, larger side first); the round's new
    rules are adjoined together and the system is re-examined until a round
    adds nothing.  The trace records each examined branching and each
    adjoined rule.  Raises :class:`OrientationFailure` when a pair of normal
    forms is incomparable (the divlex order is partial), and
    :class:`BudgetExceeded` when completion does not settle within budget.
    """
    for r in p.rewriting_rules():
        if compare_words(order, r.source, r.target) is not Comparison.GREATER:
            raise OrientationFailure(
                f"rule {r.label!r} is not oriented source > target under the order",
                r.source, r.target)

    current = p
    trace: list[KBEvent] = []
    fresh = itertools.count(1)
    existing = {(r.source, r.target) for r in current.rules}
    while True:
        new_rules: list[Rule] = []
        for b in critical_branchings(current):
            joined = join_branching(current, b, budget)
            if joined is not None:
                trace.append(KBEvent(b, True))
                continue
            t1 = apply_step(b.source, b.left, current)
            t2 = apply_step(b.source, b.right, current)
            n1, _ = normalize(current, t1, "leftmost", budget)
            n2, _ = normalize(current, t2, "leftmost", budget)
            cmp = compare_words(order, n1, n2)
            if cmp is Comparison.GREATER:
                src, tgt = n1, n2
            elif cmp is Comparison.LESS:
                src, tgt = n2, n1
            else:
                raise OrientationFailure(
                    f"normal forms {current.word_str(n1)} and {current.word_str(n2)} "
                    "are incomparable under the order", n1, n2)
            if (src, tgt) in existing:
                continue  # another branching of this round already supplies it
            existing.add((src, tgt))
            rule = Rule(f"kb:{next(fresh)}", src, tgt)
            trace.append(KBEvent(b, False, rule))
            new_rules.append(rule)
        if not new_rules:
            return current, trace
        current = TwoPolygraph(current.generators, current.rules + tuple(new_rules))
        if len(current.rules) > max_rules:
            raise BudgetExceeded(f"completion exceeded {max_rules} rules")


# ---------------------------------------------------------------------------
# Squier completion and homotopical completion
# ---------------------------------------------------------------------------

def squier(p: TwoPolygraph, budget: int = DEFAULT_BUDGET) -> ThreeOnePolygraph:
    """Adjoin one generating confluence per critical branching of a convergent p.

    Cell sides are the two joining paths obtained by leftmost normalization,
    so output is deterministic.  Raises :class:`NotLocallyConfluent` if any
    branching fails to join.
    """
    cells = []
    for i, b in enumerate(critical_branchings(p)):
        joined = join_branching(p, b, budget)
        if joined is None:
            raise NotLocallyConfluent(
                f"branching at {p.word_str(b.source)} does not join", b)
        left, right = joined
        cells.append(ThreeCell(f"cell:{i}", left, right))
    return ThreeOnePolygraph(p, tuple(cells))


def homotopical_completion(p: TwoPolygraph, order: OrderSpec,
                           budget: int = DEFAULT_BUDGET) -> ThreeOnePolygraph:
    """Squier completion of the Knuth-Bendix completion of ``p``."""
    completed, _ = knuth_bendix(p, order, budget)
    return squier(completed, budget)


# ---------------------------------------------------------------------------
# Triple branchings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleBranching:
    """A critical local triple branching: three pairwise-distinct forward
    steps with a common source.

    Criticality is concretized for string rewriting as: the union of the
    three redexes is the whole source with the leftmost redex at offset 0
    (minimality: no whisker can be stripped, no position is outside every
    redex), and no step's redex is disjoint from both other redexes
    (triviality exclusion; pairwise-disjoint components factor through
    lower branchings).
    """
    source: Word
    steps: tuple[RewriteStep, RewriteStep, RewriteStep]


def _redex_interval(p: TwoPolygraph, s: RewriteStep) -> tuple[int, int]:
    r = p.rule(s.rule)
    return (s.position, s.position + len(r.source))


def triple_branchings(p: TwoPolygraph) -> list[TripleBranching]:
    """All critical triple branchings, in canonical order."""
    rules = p.rewriting_rules()
    sources = {}

    def compatible(w: dict[int, int], src: Word, pos: int) -> bool:
        return all(w.get(pos + k, src[k]) == src[k] for k in range(len(src)))

    def overlay(w: dict[int, int], src: Word, pos: int) -> dict[int, int]:
        out = dict(w)
        for k, letter in enumerate(src):
            out[pos + k] = letter
        return out

    for r1 in rules:
        base = overlay({}, r1.source, 0)
        end1 = len(r1.source)
        for r2 in rules:
            # second redex at q2 in [0, end1]: no gap before it
            for q2 in range(0, end1 + 1):
                if (r2.label, q2) == (r1.label, 0):
                    continue
                if not compatible(base, r2.source, q2):
                    continue
                w2 = overlay(base, r2.source, q2)
                reach2 = max(end1, q2 + len(r2.source))
                for r3 in rules:
                    for q3 in range(q2, reach2 + 1):
                        s3 = (r3.label, q3)
                        if s3 == (r1.label, 0) or s3 == (r2.label, q2):
                            continue
                        if not compatible(w2, r3.source, q3):
                            continue
                        w3 = overlay(w2, r3.source, q3)
                        length = max(reach2, q3 + len(r3.source))
                        if sorted(w3) != list(range(length)):
                            continue  # a gap: source exceeds the redex union
                        word = tuple(w3[i] for i in range(length))
                        steps = (RewriteStep(r1.label, 0),
                                 RewriteStep(r2.label, q2),
                                 RewriteStep(r3.label, q3))
                        ivs = [( _redex_interval(p, s)) for s in steps]
                        trivial = False
                        for a in range(3):
                            others = [ivs[b] for b in range(3) if b != a]
                            if all(ivs[a][1] <= lo or hi <= ivs[a][0]
                                   for lo, hi in others):
                                trivial = True
                                break
                        if trivial:
                            continue
                        key = (word, frozenset(steps))
                        canon = tuple(sorted(steps, key=lambda s: (s.position, s.rule)))
                        sources.setdefault(key, TripleBranching(word, canon))
    return sorted(sources.values(),
                  key=lambda t: (t.source, tuple((s.rule, s.position) for s in t.steps)))


# ---------------------------------------------------------------------------
# 3-spheres: composites of whiskered 3-cells and exchange squares
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellMove:
    """Rewrite a path segment by a whiskered generating 3-cell.

    At step offset ``index`` of the current path, the segment matching the
    cell's lhs (rhs when ``forward`` is False), whiskered by the words
    ``left`` and ``right``, is replaced by the whiskered other side.
    """
    index: int
    cell: str
    forward: bool = True
    left: Word = ()
    right: Word = ()


@dataclass(frozen=True)
class ExchangeMove:
    """Swap two adjacent steps acting on disjoint regions of the word."""
    index: int


Move = CellMove | ExchangeMove


@dataclass(frozen=True)
class ThreeSphere:
    """A pair of parallel composite 3-cells presented as move sequences.

    Both sides start from the same 2-path and must transform it into the same
    end path; each move is a whiskered generating 3-cell or an exchange
    square (the identities of the free 2-category on disjoint redexes).
    """
    start: RewritePath
    lhs: tuple[Move, ...]
    rhs: tuple[Move, ...]

    def cell_labels(self) -> list[str]:
        return [m.cell for m in self.lhs + self.rhs if isinstance(m, CellMove)]


def _whisker_path(path: RewritePath, left: Word, right: Word) -> RewritePath:
    steps = tuple(RewriteStep(s.rule, s.position + len(left), s.forward)
                  for s in path.steps)
    return RewritePath(left + path.start + right, steps)


def _apply_cell_move(path: RewritePath, move: CellMove, x: ThreeOnePolygraph) -> RewritePath:
    cell = x.cell(move.cell)
    pattern = _whisker_path(cell.lhs if move.forward else cell.rhs, move.left, move.right)
    replacement = _whisker_path(cell.rhs if move.forward else cell.lhs, move.left, move.right)
    k, n = move.index, len(pattern.steps)
    if k < 0 or k + n > len(path.steps):
        raise RedexMismatch(f"cell move {move.cell}@{k}: segment out of range", path.start)
    words = [path.start]
    for s in path.steps:
        words.append(apply_step(words[-1], s, x.base))
    if words[k] != pattern.start or path.steps[k:k + n] != pattern.steps:
        raise RedexMismatch(
            f"cell move {move.cell}@{k}: segment does not match the whiskered side",
            words[k])
    return RewritePath(path.start, path.steps[:k] + replacement.steps + path.steps[k + n:])


def _apply_exchange(path: RewritePath, move: ExchangeMove, p: TwoPolygraph) -> RewritePath:
    k = move.index
    if k < 0 or k + 2 > len(path.steps):
        raise RedexMismatch(f"exchange at {k}: out of range", path.start)
    w = path.start
    for s in path.steps[:k]:
        w = apply_step(w, s, p)
    a, b = path.steps[k], path.steps[k + 1]
    ra, rb = p.rule(a.rule), p.rule(b.rule)
    la = len(ra.side(a.forward))
    ta = len(ra.other(a.forward))
    lb = len(rb.side(b.forward))
    if b.position >= a.position + ta:
        # b acts right of a: shift b back to w-coordinates, keep a
        qb = b.position - ta + la
        new = (RewriteStep(b.rule, qb, b.forward),
               RewriteStep(a.rule, a.position, a.forward))
        disjoint = qb >= a.position + la
    elif b.position + lb <= a.position:
        # b acts left of a: a shifts by b's length change
        tb = len(rb.other(b.forward))
        new = (RewriteStep(b.rule, b.position, b.forward),
               RewriteStep(a.rule, a.position + (tb - lb), a.forward))
        disjoint = True
    else:
        raise RedexMismatch(f"exchange at {k}: steps are not disjoint", w)
    if not disjoint:
        raise RedexMismatch(f"exchange at {k}: steps are not disjoint", w)
    # replay-check the swapped pair
    probe = w
    for s in new:
        probe = apply_step(probe, s, p)
    end = apply_step(apply_step(w, a, p), b, p)
    if probe != end:
        raise RedexMismatch(f"exchange at {k}: swap does not commute", w)
    return RewritePath(path.start, path.steps[:k] + new + path.steps[k + 2:])


def flatten_side(sphere: ThreeSphere, side: str, x: ThreeOnePolygraph) -> RewritePath:
    """Apply one side's moves to the start path and return the end path."""
    path = sphere.start
    for move in (sphere.lhs if side == "lhs" else sphere.rhs):
        if isinstance(move, CellMove):
            path = _apply_cell_move(path, move, x)
        else:
            path = _apply_exchange(path, move, x.base)
    replay_path(path, x.base)
    return path


@dataclass(frozen=True)
class SphereReport:
    parallel: bool
    end_lhs: RewritePath
    end_rhs: RewritePath
    target: str | None  # the designated target 3-cell, when one exists


def check_sphere(sphere: ThreeSphere, x: ThreeOnePolygraph,
                 ranks: Mapping[str, int] | None = None) -> SphereReport:
    """Flatten both sides, check parallelism, and identify the target cell.

    The designated target is the cell occurring exactly once across the whole
    sphere and, when ``ranks`` are supplied, ranking strictly above every
    other occurring cell; without ranks it is the unique once-occurring cell,
    if any.  Raises :class:`NotParallel` when the sides disagree.
    """
    replay_path(sphere.start, x.base)
    end_l = flatten_side(sphere, "lhs", x)
    end_r = flatten_side(sphere, "rhs", x)
    if not paths_equal(end_l, end_r):
        wl = replay_path(end_l, x.base)
        wr = replay_path(end_r, x.base)
        raise NotParallel(
            "sphere sides are not parallel: end paths differ "
            f"(ends {x.base.word_str(wl)} vs {x.base.word_str(wr)})")
    labels = sphere.cell_labels()
    counts: dict[str, int] = {}
    for l in labels:
        counts[l] = counts.get(l, 0) + 1
    once = [l for l, c in counts.items() if c == 1]
    target = None
    if ranks is not None and counts:
        top = max(counts, key=lambda l: ranks.get(l, 0))
        rest = [ranks.get(l, 0) for l in counts if l != top]
        if counts[top] == 1 and all(ranks.get(top, 0) > r for r in rest):
            target = top
    elif len(once) == 1:
        target = once[0]
    return SphereReport(True, end_l, end_r, target)


# ---------------------------------------------------------------------------
# Homotopical reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapsibleRule:
    """Gamma-2 entry: ``rule`` witnesses the collapse of ``generator``.

    One side of the rule must be the single letter ``generator`` and the
    other side must avoid it.
    """
    rule: str
    generator: str


@dataclass(frozen=True)
class CollapsibleCell:
    """Gamma-3 entry: 3-cell ``cell`` witnesses the collapse of rule ``rule``."""
    cell: str
    rule: str


@dataclass(frozen=True)
class CollapsibleSphere:
    """Gamma-4 entry: ``sphere`` witnesses the collapse of 3-cell ``cell``.

    ``sphere`` may be None for an unverified collapse accepted on the
    caller's authority; reductions record such entries as warnings.
    """
    sphere: ThreeSphere | None
    cell: str


@dataclass(frozen=True)
class CollapsiblePart:
    gamma2: tuple[CollapsibleRule, ...] = ()
    gamma3: tuple[CollapsibleCell, ...] = ()
    gamma4: tuple[CollapsibleSphere, ...] = ()
    ranks: Mapping[str, int] = field(default_factory=dict)  # label -> rank; missing = 0


def greedy_collapse_rules(x: ThreeOnePolygraph) -> CollapsiblePart:
    """A maximal rule-level collapsible part found greedily.

    Selects, in canonical order, 3-cells whose boundary contains some rule
    exactly once and unwhiskered, skipping cells that mention an
    already-selected rule (which keeps the rank conditions satisfiable).
    Earlier selections receive higher ranks.  Gamma-2 and gamma-4 are left
    empty; this is the reduction the ``reduce`` command applies.
    """
    selected: list[tuple[str, str]] = []
    taken_rules: set[str] = set()
    used_cells: set[str] = set()
    changed = True
    while changed:
        changed = False
        for cell in x.cells:
            if cell.label in used_cells:
                continue
            boundary = [s.rule for s in cell.lhs.steps + cell.rhs.steps]
            if any(r in taken_rules for r in boundary):
                continue
            candidates = sorted(r for r in set(boundary) if boundary.count(r) == 1)
            for label in candidates:
                try:
                    _replacement_path(cell, x.base.rule(label), x)
                except NotCollapsible:
                    continue
                selected.append((cell.label, label))
                taken_rules.add(label)
                used_cells.add(cell.label)
                changed = True
                break
    ranks = {rule: len(selected) - i for i, (_, rule) in enumerate(selected)}
    gamma3 = tuple(CollapsibleCell(cell, rule) for cell, rule in selected)
    return CollapsiblePart(gamma3=gamma3, ranks=ranks)


def _rule_occurrences(cell: ThreeCell, rule_label: str):
    """(side, index) positions of a rule in a cell's boundary."""
    hits = []
    for side_name, side in (("lhs", cell.lhs), ("rhs", cell.rhs)):
        for i, s in enumerate(side.steps):
            if s.rule == rule_label:
                hits.append((side_name, i))
    return hits


def _replacement_path(cell: ThreeCell, rule: Rule, x: ThreeOnePolygraph) -> RewritePath:
    """Solve a witness cell for its collapsed rule.

    If the rule occurs (forward, unwhiskered) once on one side, the inverse
    of that side's prefix, the other side, and the inverse of the suffix
    compose into a path from the rule's source to its target.
    """
    hits = _rule_occurrences(cell, rule.label)
    if len(hits) != 1:
        raise NotCollapsible(
            f"rule {rule.label!r} occurs {len(hits)} times in cell {cell.label!r}; need exactly 1")
    side_name, i = hits[0]
    host = cell.lhs if side_name == "lhs" else cell.rhs
    other = cell.rhs if side_name == "lhs" else cell.lhs
    occ = host.steps[i]
    w = host.start
    for s in host.steps[:i]:
        w = apply_step(w, s, x.base)
    expected = rule.side(occ.forward)
    if occ.position != 0 or w != expected:
        raise NotCollapsible(
            f"occurrence of {rule.label!r} in {cell.label!r} is whiskered; "
            "cannot isolate it as the cell's target")
    prefix = RewritePath(host.start, host.steps[:i])
    suffix_start = apply_step(w, occ, x.base)
    suffix = RewritePath(suffix_start, host.steps[i + 1:])
    path = concat_paths(invert_path(prefix, x.base), other, x.base)
    path = concat_paths(path, invert_path(suffix, x.base), x.base)
    if not occ.forward:
        path = invert_path(path, x.base)
    assert path.start == rule.source and replay_path(path, x.base) == rule.target
    return cancel_inverse_pairs(path)


def _substitute_rule(path: RewritePath, rule: Rule, replacement: RewritePath,
                     p: TwoPolygraph) -> RewritePath:
    """Replace every step using ``rule`` by the whiskered replacement path."""
    out: list[RewriteStep] = []
    w = path.start
    for s in path.steps:
        if s.rule != rule.label:
            out.append(s)
        else:
            spliced = _whisker_path(replacement, w[:s.position],
                                    w[s.position + len(rule.side(s.forward)):])
            if not s.forward:
                spliced = invert_path(spliced, p)
            out.extend(spliced.steps)
        w = apply_step(w, s, p)
    return cancel_inverse_pairs(RewritePath(path.start, tuple(out)))


def _substitute_generator(word: Word, gen: int, image: Word) -> Word:
    out: list[int] = []
    for letter in word:
        out.extend(image if letter == gen else (letter,))
    return tuple(out)


def homotopical_reduce(x: ThreeOnePolygraph, part: CollapsiblePart,
                       warnings: list[str] | None = None) -> ThreeOnePolygraph:
    """Collapse ``part`` out of ``x``.

    Removes the collapsed generators, rules and 3-cells together with their
    witnesses, and rewrites the boundaries of surviving 3-cells by replacing
    each occurrence of a collapsed rule with the image of its collapse
    witness.  All collapsibility conditions (single unwhiskered occurrence,
    strictly decreasing ranks, no witness being a higher-level target) are
    checked first and reported via :class:`NotCollapsible`.
    """
    ranks = part.ranks
    base = x.base

    def rank(label: str) -> int:
        return ranks.get(label, 0)

    collapsed_rules = [e.rule for e in part.gamma3]
    collapsed_cells = [e.cell for e in part.gamma4]
    collapsed_gens = [e.generator for e in part.gamma2]
    for seq, what in ((collapsed_rules, "rule"), (collapsed_cells, "3-cell"),
                      (collapsed_gens, "generator")):
        if len(set(seq)) != len(seq):
            raise NotCollapsible(f"a {what} is collapsed more than once")

    witness_cells = {e.cell for e in part.gamma3}
    if witness_cells & set(collapsed_cells):
        raise NotCollapsible("a gamma3 witness cell is the target of a gamma4 sphere")
    witness_rules = {e.rule for e in part.gamma2}
    if witness_rules & set(collapsed_rules):
        raise NotCollapsible("a gamma2 witness rule is the target of a gamma3 cell")

    # gamma3: validate witnesses and solve for replacements
    replacements: dict[str, tuple[Rule, RewritePath, int]] = {}
    for entry in part.gamma3:
        cell = x.cell(entry.cell)
        rule = base.rule(entry.rule)
        repl = _replacement_path(cell, rule, x)
        for s in repl.steps:
            if rank(s.rule) >= rank(entry.rule):
                raise NotCollapsible(
                    f"rank of {entry.rule!r} does not exceed rank of {s.rule!r} "
                    f"occurring in witness {entry.cell!r}")
        replacements[entry.rule] = (rule, repl, rank(entry.rule))

    # gamma4: validate spheres
    for entry in part.gamma4:
        if entry.sphere is None:
            if warnings is not None:
                warnings.append(f"collapse of {entry.cell!r} accepted without a verified sphere")
            continue
        if not x.has_cell(entry.cell):
            raise NotCollapsible(f"collapsed 3-cell {entry.cell!r} does not exist")
        moves = [m for m in entry.sphere.lhs + entry.sphere.rhs
                 if isinstance(m, CellMove)]
        occs = [m for m in moves if m.cell == entry.cell]
        if len(occs) != 1:
            raise NotCollapsible(
                f"3-cell {entry.cell!r} occurs {len(occs)} times in its sphere; need exactly 1")
        if occs[0].left or occs[0].right:
            raise NotCollapsible(f"occurrence of {entry.cell!r} in its sphere is whiskered")
        for m in moves:
            if m.cell != entry.cell and rank(m.cell) >= rank(entry.cell):
                raise NotCollapsible(
                    f"rank of {entry.cell!r} does not exceed rank of {m.cell!r} in its sphere")
        report = check_sphere(entry.sphere, x)  # raises NotParallel on bad spheres
        assert report.parallel

    # gamma2: validate witnesses
    gen_images: dict[int, Word] = {}
    gamma2_rules = set()
    for entry in part.gamma2:
        rule = base.rule(entry.rule)
        g = base.gen_index(entry.generator)
        if rule.target == (g,):
            image = rule.source
        elif rule.source == (g,):
            image = rule.target
        else:
            raise NotCollapsible(
                f"rule {entry.rule!r} does not have generator {entry.generator!r} "
                "alone on one side")
        if g in image:
            raise NotCollapsible(
                f"generator {entry.generator!r} occurs in the other side of {entry.rule!r}")
        for letter in image:
            if rank(base.generators[letter].name) >= rank(entry.generator):
                raise NotCollapsible(
                    f"rank of generator {entry.generator!r} does not exceed rank of "
                    f"{base.generators[letter].name!r} in its witness")
        gen_images[g] = image
        gamma2_rules.add(entry.rule)

    # survivors
    dead_cells = set(collapsed_cells) | witness_cells
    dead_rules = set(collapsed_rules) | gamma2_rules
    surviving_cells = [c for c in x.cells if c.label not in dead_cells]

    # substitute collapsed rules into surviving boundaries, highest rank first
    order = sorted(replacements.values(), key=lambda t: -t[2])
    for _ in range(len(order) + 1):
        dirty = False
        for rule, repl, _r in order:
            for i, c in enumerate(surviving_cells):
                lhs = _substitute_rule(c.lhs, rule, repl, base)
                rhs = _substitute_rule(c.rhs, rule, repl, base)
                if lhs != c.lhs or rhs != c.rhs:
                    surviving_cells[i] = ThreeCell(c.label, lhs, rhs, c.family)
                    dirty = True
        if not dirty:
            break
    leftover = {s.rule for c in surviving_cells for s in c.lhs.steps + c.rhs.steps}
    if leftover & set(collapsed_rules):
        raise SubstitutionOutOfScope(
            "collapsed rules survive substitution; the reduction needs rewriting "
            "beyond rule-for-path substitution")

    new_rules = [r for r in base.rules if r.label not in dead_rules]

    if not gen_images:
        new_base = TwoPolygraph(base.generators, tuple(new_rules))
        return ThreeOnePolygraph(new_base, tuple(surviving_cells))

    # collapse generators last: fold letter-for-word images into every word,
    # re-anchoring path step positions, then reindex the alphabet
    def subst_all(word: Word) -> Word:
        for _ in range(len(gen_images) + 1):
            if not any(l in gen_images for l in word):
                return word
            for g, image in gen_images.items():
                word = _substitute_generator(word, g, image)
        raise SubstitutionOutOfScope("cyclic generator images")

    def subst_path(path: RewritePath) -> RewritePath:
        w = path.start
        steps = []
        for s in path.steps:
            if s.rule not in gamma2_rules:
                # witness-rule steps turn into identities once the generator
                # is folded away, so they are dropped
                steps.append(RewriteStep(s.rule, len(subst_all(w[:s.position])), s.forward))
            w = apply_step(w, s, base)
        return RewritePath(subst_all(path.start), tuple(steps))

    new_cells = [ThreeCell(c.label, subst_path(c.lhs), subst_path(c.rhs), c.family)
                 for c in surviving_cells]
    new_rules = [Rule(r.label, subst_all(r.source), subst_all(r.target),
                      r.completion_excluded)
                 for r in new_rules]
    kept = [g for g in base.generators if g.name not in collapsed_gens]
    remap = {g.index: i for i, g in enumerate(kept)}

    def reindex(word: Word) -> Word:
        return tuple(remap[i] for i in word)

    def reindex_path(path: RewritePath) -> RewritePath:
        return RewritePath(reindex(path.start), path.steps)

    new_gens = tuple(Generator(g.name, i) for i, g in enumerate(kept))
    new_rules = [Rule(r.label, reindex(r.source), reindex(r.target), r.completion_excluded)
                 for r in new_rules]
    new_cells = [ThreeCell(c.label, reindex_path(c.lhs), reindex_path(c.rhs), c.family)
                 for c in new_cells]
    new_base = TwoPolygraph(new_gens, tuple(new_rules))
    return ThreeOnePolygraph(new_base, tuple(new_cells))
