"""
Finite Garside-family data and the presentations it generates.

A Garside family is given here as a finite element set S with unit, plus a
partial multiplication table into the set: ``mul(u, v)`` is the product when
it lies in S and None when it leaves S.  The ambient monoid is never
materialized; every membership condition is a table query, and equality of
monoid elements, where needed, is decided by normal forms of the convergent
presentation built from the table.

From a validated datum we construct:

* ``gar2``            the triangular presentation: rules u|v => uv whenever uv in S;
* ``underline_gar2``  gar2 plus the rules u|vw => uv|w for uv, vw in S, uvw not in S
                      (a convergent completion of gar2);
* ``underline_gar3``  one generating 3-cell per critical branching of
                      underline_gar2, built directly from the twelve cell
                      families A, B, C, D, E, E', F, F', G, G', H, I;
* ``gar3``            gar2 plus the associativity cells A:u,v,w for uv, vw, uvw in S;
* ``reduce_to_gar3``  the homotopical reduction collapsing everything except
                      the A cells, with per-cell collapse spheres checked.

Greedy normalization (``s_normalize``, ``head2``) and divisibility utilities
(``complement``, ``right_mcms``) operate on the same table.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

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
)
from .engine import (
    CellMove,
    CollapsibleCell,
    CollapsiblePart,
    CollapsibleSphere,
    CriticalBranching,
    ExchangeMove,
    NotParallel,
    OrderSpec,
    StepBudgetExceeded,
    ThreeSphere,
    check_sphere,
    critical_branchings,
    divlex,
    homotopical_reduce,
    join_branching,
    normalize,
)

DEFAULT_BUDGET = 10 ** 6

FAMILIES = ("A", "B", "C", "D", "E", "E'", "F", "F'", "G", "G'", "H", "I")

# Collapse ranks: each sphere's target must outrank every other cell in it.
FAMILY_RANK = {"A": 0, "B": 1, "C": 2, "D": 2, "E": 2, "E'": 2,
               "G": 3, "G'": 3, "H": 3, "F": 4, "F'": 4, "I": 4}


class NotADivisor(PolygraphError):
    """complement(f, g): f does not left-divide g within the table."""


class NormalizationFailure(PolygraphError):
    """Greedy normalization failed; the datum is corrupt or not Garside."""


class UnclassifiedBranching(PolygraphError):
    """A critical branching matches no cell family: the datum is inconsistent."""


class AmbiguousClassification(PolygraphError):
    """A critical branching matches two cell families; must not occur."""


class SphereCheckFailed(PolygraphError):
    """A collapse-sphere instance is not parallel or has the wrong target."""


class MismatchWithGar3(PolygraphError):
    """The homotopical reduction did not reproduce the associativity presentation."""


_NAME_FORBIDDEN = set(" \t,:;@~*=#()[]|")


@dataclass(frozen=True)
class GarsideDatum:
    """Finite element set with unit and a partial multiplication table.

    ``elements[0]`` must be named "1" and is the unit; ``products[i-1][j-1]``
    holds the index of the product of nonunit elements i and j, or None when
    the product leaves the family.  Unit laws are implicit: the unit is
    excluded from the table domain.  An optional ``head_table`` may supply,
    for pairs with product outside the family, the expected maximal left
    divisor; it is cross-checked by :func:`validate_datum`.
    """
    elements: tuple[str, ...]
    products: tuple[tuple[int | None, ...], ...]
    head_table: tuple[tuple[int | None, ...], ...] | None = None

    def __post_init__(self):
        n = len(self.elements)
        if n == 0 or self.elements[0] != "1":
            raise ValidationError('element 0 must be the unit, named "1"')
        if len(set(self.elements)) != n:
            raise ValidationError("element names must be unique")
        for name in self.elements:
            if not name or set(name) & _NAME_FORBIDDEN:
                raise ValidationError(f"bad element name {name!r}")
        for table, what in ((self.products, "products"), (self.head_table, "head_table")):
            if table is None:
                continue
            if len(table) != n - 1 or any(len(row) != n - 1 for row in table):
                raise ValidationError(f"{what} table must cover all nonunit pairs")
            for row in table:
                for v in row:
                    if v is not None and not (0 <= v < n):
                        raise ValidationError(f"{what} entry {v} out of range")

    @property
    def size(self) -> int:
        return len(self.elements)

    def nonunit(self) -> range:
        return range(1, len(self.elements))

    def mul(self, i: int, j: int) -> int | None:
        """Product of elements i and j within the family, None outside it."""
        if i == 0:
            return j
        if j == 0:
            return i
        return self.products[i - 1][j - 1]

    def name(self, i: int) -> str:
        return self.elements[i]

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise ValidationError(f"unknown element {name!r}") from None


# ---------------------------------------------------------------------------
# Divisibility within the table
# ---------------------------------------------------------------------------

def _one_step_divides(d: GarsideDatum, f: int, g: int) -> bool:
    """f properly left-divides g by a single table entry."""
    return any(d.mul(f, x) == g for x in d.nonunit())


@functools.lru_cache(maxsize=None)
def _proper_divisibility(d: GarsideDatum) -> frozenset[tuple[int, int]]:
    """Transitive closure of one-step proper left divisibility on S\\{1}."""
    pairs = {(f, g) for f in d.nonunit() for g in d.nonunit()
             if _one_step_divides(d, f, g)}
    changed = True
    while changed:
        changed = False
        for (a, b), (c, e) in itertools.product(tuple(pairs), repeat=2):
            if b == c and (a, e) not in pairs:
                pairs.add((a, e))
                changed = True
    return frozenset(pairs)


def left_divides(d: GarsideDatum, f: int, g: int) -> bool:
    """f left-divides g within the table (reflexively, via any chain)."""
    return f == g or (f, g) in _proper_divisibility(d)


def complement(d: GarsideDatum, f: int, g: int) -> int:
    """The unique x with f*x = g in the table; the unit when f = g."""
    if f == g:
        return 0
    for x in d.nonunit():
        if d.mul(f, x) == g:
            return x
    raise NotADivisor(f"{d.name(f)} does not left-divide {d.name(g)} in one table step")


def right_mcms(d: GarsideDatum, f: int, g: int) -> tuple[int, ...]:
    """All minimal common right multiples of f and g within the family.

    Returns the ascending tuple of minimal elements of the set of common
    right multiples; empty when f and g have no common right multiple in S.
    Every common right multiple is checked to be a one-step right multiple of
    some returned element (the covering property of a closed family).
    """
    crm = [h for h in d.nonunit() if left_divides(d, f, h) and left_divides(d, g, h)]
    div = _proper_divisibility(d)
    mcms = tuple(h for h in crm
                 if not any(k != h and (k, h) in div for k in crm))
    for h in crm:
        if h not in mcms and not any(_one_step_divides(d, m, h) for m in mcms):
            raise ValidationError(
                f"mcm covering fails at {d.name(h)} for pair "
                f"({d.name(f)}, {d.name(g)}): no mcm divides it in one step")
    return mcms


# ---------------------------------------------------------------------------
# Datum validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatumReport:
    """Outcome of every table-level check; empty tuples mean no violations."""
    invertibility: tuple[str, ...]
    cancellativity: tuple[str, ...]
    associativity: tuple[str, ...]
    noetherianity: tuple[str, ...]
    mcm_closure: tuple[str, ...]
    head_table: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not (self.invertibility or self.cancellativity or self.associativity
                    or self.noetherianity or self.mcm_closure or self.head_table)

    def violations(self) -> list[str]:
        return [*self.invertibility, *self.cancellativity, *self.associativity,
                *self.noetherianity, *self.mcm_closure, *self.head_table]


def validate_datum(d: GarsideDatum) -> DatumReport:
    """Check the table against the axioms the constructions rely on.

    Checks: no nontrivial invertible elements; left-cancellativity;
    associativity coherence (whenever uv and vw are both defined, (uv)w and
    u(vw) are both undefined or both defined and equal); acyclicity of proper
    left divisibility (right-noetherianity is then automatic for a finite
    family); and mcm closure with covering.  A supplied head table is
    cross-checked against greedy normalization.
    """
    inv, canc, assoc, noeth, mcm, head = [], [], [], [], [], []
    for u, v in itertools.product(d.nonunit(), repeat=2):
        if d.mul(u, v) == 0:
            inv.append(f"{d.name(u)}*{d.name(v)} = 1: nontrivial invertible")
    for u in d.nonunit():
        seen: dict[int, int] = {}
        for v in d.nonunit():
            w = d.mul(u, v)
            if w is None:
                continue
            if w in seen:
                canc.append(
                    f"{d.name(u)}*{d.name(seen[w])} = {d.name(u)}*{d.name(v)}"
                    f" = {d.name(w)}: not left-cancellative")
            else:
                seen[w] = v
    for u, v, w in itertools.product(d.nonunit(), repeat=3):
        uv, vw = d.mul(u, v), d.mul(v, w)
        if uv is None or vw is None:
            continue
        left, right = d.mul(uv, w), d.mul(u, vw)
        if left != right:
            assoc.append(
                f"({d.name(u)}*{d.name(v)})*{d.name(w)} = "
                f"{'_' if left is None else d.name(left)} but "
                f"{d.name(u)}*({d.name(v)}*{d.name(w)}) = "
                f"{'_' if right is None else d.name(right)}")
    if not inv and not canc and not assoc:
        div = _proper_divisibility(d)
        for f in d.nonunit():
            if (f, f) in div:
                noeth.append(f"proper left divisibility has a cycle at {d.name(f)}")
        if not noeth:
            for f, g in itertools.combinations(d.nonunit(), 2):
                try:
                    right_mcms(d, f, g)
                except ValidationError as e:
                    mcm.append(str(e))
    if d.head_table is not None and not inv and not canc and not assoc and not noeth:
        for u, v in itertools.product(d.nonunit(), repeat=2):
            expected = d.head_table[u - 1][v - 1]
            if d.mul(u, v) is not None or expected is None:
                continue
            got = head2(d, u, v)
            if got != expected:
                head.append(
                    f"head table names {d.name(expected)} for "
                    f"({d.name(u)}, {d.name(v)}) but normalization gives {d.name(got)}")
    return DatumReport(tuple(inv), tuple(canc), tuple(assoc), tuple(noeth),
                       tuple(mcm), tuple(head))


# ---------------------------------------------------------------------------
# The presentations
# ---------------------------------------------------------------------------

def _alpha(d: GarsideDatum, i: int, j: int) -> str:
    return f"alpha:{d.name(i)},{d.name(j)}"


def _beta(d: GarsideDatum, i: int, j: int, k: int) -> str:
    return f"beta:{d.name(i)},{d.name(j)},{d.name(k)}"


@dataclass(frozen=True)
class _Underline2:
    polygraph: TwoPolygraph
    alphas: tuple[tuple[int, int], ...]          # (u, v) per alpha rule
    betas: tuple[tuple[int, int, int], ...]      # (u, v, w) per beta rule


def _generators(d: GarsideDatum) -> tuple[Generator, ...]:
    return tuple(Generator(d.name(i), i - 1) for i in d.nonunit())


@functools.lru_cache(maxsize=None)
def gar2(d: GarsideDatum) -> TwoPolygraph:
    """The triangular presentation: rules alpha:u,v : u|v => uv for uv in S."""
    rules = []
    for u, v in itertools.product(d.nonunit(), repeat=2):
        uv = d.mul(u, v)
        if uv is not None:
            rules.append(Rule(_alpha(d, u, v), (u - 1, v - 1), (uv - 1,)))
    return TwoPolygraph(_generators(d), tuple(rules))


@functools.lru_cache(maxsize=None)
def _underline_gar2(d: GarsideDatum) -> _Underline2:
    rules = []
    alphas = []
    betas = []
    for u, v in itertools.product(d.nonunit(), repeat=2):
        uv = d.mul(u, v)
        if uv is not None:
            rules.append(Rule(_alpha(d, u, v), (u - 1, v - 1), (uv - 1,)))
            alphas.append((u, v))
    for u, v, w in itertools.product(d.nonunit(), repeat=3):
        uv, vw = d.mul(u, v), d.mul(v, w)
        if uv is None or vw is None or d.mul(uv, w) is not None:
            continue
        rules.append(Rule(_beta(d, u, v, w), (u - 1, vw - 1), (uv - 1, w - 1)))
        betas.append((u, v, w))
    p = TwoPolygraph(_generators(d), tuple(rules))
    return _Underline2(p, tuple(alphas), tuple(betas))


def divlex_order(d: GarsideDatum) -> OrderSpec:
    """The divlex termination order induced by the table's left divisibility."""
    rel = [(f - 1, g - 1) for (f, g) in _proper_divisibility(d)]
    return divlex(rel)


@functools.lru_cache(maxsize=None)
def _verify_underline_gar2(d: GarsideDatum) -> None:
    from .engine import Comparison, compare_words
    u2 = _underline_gar2(d)
    order = divlex_order(d)
    for r in u2.polygraph.rules:
        if compare_words(order, r.source, r.target) is not Comparison.GREATER:
            raise ValidationError(
                f"rule {r.label!r} does not decrease the divlex order")
    for b in critical_branchings(u2.polygraph):
        if join_branching(u2.polygraph, b) is None:
            raise ValidationError(
                "not a Garside family: branching at "
                f"{u2.polygraph.word_str(b.source)} "
                f"({b.left.rule}@{b.left.position} / {b.right.rule}@{b.right.position})"
                " does not join")


def underline_gar2(d: GarsideDatum, verify: bool = True) -> TwoPolygraph:
    """gar2 plus the rules beta:u,v,w : u|vw => uv|w for uvw outside S.

    Every rule strictly decreases the divlex order; with ``verify`` (the
    default) all critical branchings are checked to join, so the result is
    certified convergent.
    """
    if verify:
        _verify_underline_gar2(d)
    return _underline_gar2(d).polygraph


@functools.lru_cache(maxsize=None)
def gar3(d: GarsideDatum) -> ThreeOnePolygraph:
    """gar2 plus the associativity 3-cells A:u,v,w for uv, vw, uvw in S."""
    base = gar2(d)
    cells = []
    for u, v, w in itertools.product(d.nonunit(), repeat=3):
        uv, vw = d.mul(u, v), d.mul(v, w)
        if uv is None or vw is None:
            continue
        uvw = d.mul(uv, w)
        if uvw is None:
            continue
        cells.append(ThreeCell(
            f"A:{d.name(u)},{d.name(v)},{d.name(w)}",
            RewritePath((u - 1, v - 1, w - 1),
                        (RewriteStep(_alpha(d, u, v), 0), RewriteStep(_alpha(d, uv, w), 0))),
            RewritePath((u - 1, v - 1, w - 1),
                        (RewriteStep(_alpha(d, v, w), 1), RewriteStep(_alpha(d, u, vw), 0))),
            family="A"))
    return ThreeOnePolygraph(base, tuple(cells))


# ---------------------------------------------------------------------------
# Classification of critical branchings into the twelve families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyCell:
    """A generating 3-cell recognized as an instance of one of the twelve
    families, with its element parameters and (for H and I) the derived
    complement data."""
    family: str
    params: tuple[int, ...]
    derived: tuple[int, ...] = ()  # H: (v',); I: (x1, x2, y, v')

    def label(self, d: GarsideDatum) -> str:
        return f"{self.family}:" + ",".join(d.name(i) for i in self.params)


def _steps(*items: tuple[str, int]) -> tuple[RewriteStep, ...]:
    return tuple(RewriteStep(label, pos) for label, pos in items)


def _mul_or_fail(d: GarsideDatum, i: int, j: int) -> int:
    r = d.mul(i, j)
    if r is None:
        raise ValidationError(
            f"product {d.name(i)}*{d.name(j)} leaves the family")
    return r


def _cell_from_family(d: GarsideDatum, fc: FamilyCell) -> ThreeCell:
    """Instantiate the boundary template of a family cell."""
    a, b = _alpha, _beta
    m = functools.partial(_mul_or_fail, d)
    f = fc.family
    if f == "A":
        u, v, w = fc.params
        uv, vw = m(u, v), m(v, w)
        lhs = RewritePath((u - 1, v - 1, w - 1),
                          _steps((a(d, u, v), 0), (a(d, uv, w), 0)))
        rhs = RewritePath((u - 1, v - 1, w - 1),
                          _steps((a(d, v, w), 1), (a(d, u, vw), 0)))
    elif f == "B":
        u, v, w = fc.params
        lhs = RewritePath((u - 1, v - 1, w - 1), _steps((a(d, u, v), 0)))
        rhs = RewritePath((u - 1, v - 1, w - 1),
                          _steps((a(d, v, w), 1), (b(d, u, v, w), 0)))
    elif f == "C":
        u, v, w, x = fc.params
        wx, uv, vw = m(w, x), m(u, v), m(v, w)
        start = (u - 1, v - 1, wx - 1)
        lhs = RewritePath(start, _steps((a(d, u, v), 0), (b(d, uv, w, x), 0)))
        rhs = RewritePath(start, _steps((b(d, v, w, x), 1), (a(d, u, vw), 0)))
    elif f == "D":
        u, v, w, x = fc.params
        wx = m(w, x)
        start = (u - 1, v - 1, wx - 1)
        lhs = RewritePath(start, _steps((a(d, u, v), 0)))
        rhs = RewritePath(start, _steps((b(d, v, w, x), 1), (b(d, u, v, w), 0),
                                        (a(d, w, x), 1)))
    elif f == "E":
        u, v, w, x = fc.params
        vw = m(v, w)
        start = (u - 1, vw - 1, x - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (a(d, w, x), 1)))
        rhs = RewritePath(start, _steps((a(d, vw, x), 1), (b(d, u, v, m(w, x)), 0)))
    elif f == "E'":
        u, v, w, x = fc.params
        vw, wx, uv = m(v, w), m(w, x), m(u, v)
        start = (u - 1, vw - 1, x - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (a(d, w, x), 1),
                                        (a(d, uv, wx), 0)))
        rhs = RewritePath(start, _steps((a(d, vw, x), 1), (a(d, u, m(vw, x)), 0)))
    elif f == "F":
        u, v, w, x, y = fc.params
        vw, xy, wx = m(v, w), m(x, y), m(w, x)
        start = (u - 1, vw - 1, xy - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (a(d, w, xy), 1)))
        rhs = RewritePath(start, _steps((b(d, vw, x, y), 1), (b(d, u, v, wx), 0),
                                        (a(d, wx, y), 1)))
    elif f == "F'":
        u, v, w, x, y = fc.params
        vw, xy, wx, uv = m(v, w), m(x, y), m(w, x), m(u, v)
        start = (u - 1, vw - 1, xy - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (a(d, w, xy), 1),
                                        (b(d, uv, wx, y), 0)))
        rhs = RewritePath(start, _steps((b(d, vw, x, y), 1),
                                        (a(d, u, m(v, wx)), 0)))
    elif f == "G":
        u, v, w, x, y = fc.params
        vw, xy, wx = m(v, w), m(x, y), m(w, x)
        start = (u - 1, vw - 1, xy - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (b(d, w, x, y), 1)))
        rhs = RewritePath(start, _steps((b(d, vw, x, y), 1), (b(d, u, v, wx), 0)))
    elif f == "G'":
        u, v, w, x, y = fc.params
        vw, xy, wx, uv = m(v, w), m(x, y), m(w, x), m(u, v)
        start = (u - 1, vw - 1, xy - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, w), 0), (b(d, w, x, y), 1),
                                        (a(d, uv, wx), 0)))
        rhs = RewritePath(start, _steps((b(d, vw, x, y), 1),
                                        (a(d, u, m(v, wx)), 0)))
    elif f == "H":
        u, v, x, y = fc.params
        xy = m(x, y)
        vx = m(v, x)
        s = m(v, xy)
        start = (u - 1, s - 1)
        lhs = RewritePath(start, _steps((b(d, u, v, xy), 0), (b(d, m(u, v), x, y), 0)))
        rhs = RewritePath(start, _steps((b(d, u, vx, y), 0)))
    elif f == "I":
        u, v1, w1, v2, w2 = fc.params
        x1, x2, y, _vp = fc.derived
        s = m(v1, w1)
        start = (u - 1, s - 1)
        lhs = RewritePath(start, _steps((b(d, u, v1, w1), 0), (b(d, m(u, v1), x1, y), 0)))
        rhs = RewritePath(start, _steps((b(d, u, v2, w2), 0), (b(d, m(u, v2), x2, y), 0)))
    else:
        raise ValidationError(f"unknown family {f!r}")
    return ThreeCell(fc.label(d), lhs, rhs, family=f)


def _classify_equal_source(d: GarsideDatum, u: int, s: int,
                           d1: tuple[int, int], d2: tuple[int, int]) -> FamilyCell:
    """Classify the equal-source pair beta:u,(v1,w1) / beta:u,(v2,w2)."""
    (v1, w1), (v2, w2) = sorted((d1, d2))
    src = f"{d.name(u)}|{d.name(s)}"
    mcms = right_mcms(d, v1, v2)
    candidates = [m for m in mcms if _one_step_divides(d, m, s)]
    if not candidates:
        raise UnclassifiedBranching(
            f"equal-source branching at {src}: no right-mcm of "
            f"{d.name(v1)}, {d.name(v2)} properly divides {d.name(s)}")
    vp = candidates[0]  # smallest index: the deterministic tie-break
    try:
        x1, x2, y = complement(d, v1, vp), complement(d, v2, vp), complement(d, vp, s)
    except NotADivisor as e:
        raise UnclassifiedBranching(f"equal-source branching at {src}: {e}") from None
    if x1 == 0 and x2 == 0:
        raise AmbiguousClassification(
            f"equal-source branching at {src} is trivial: both complements are the unit")
    if y == 0:
        raise UnclassifiedBranching(
            f"equal-source branching at {src}: the mcm complement is the unit")
    if d.mul(x1, y) != w1 or d.mul(x2, y) != w2:
        raise UnclassifiedBranching(f"branching at {src}: complements do not recompose")
    uvp = d.mul(d.mul(u, v1), x1) if x1 else d.mul(u, vp)
    if uvp is None or uvp != (d.mul(d.mul(u, v2), x2) if x2 else d.mul(u, vp)) \
            or d.mul(uvp, y) is not None:
        raise UnclassifiedBranching(
            f"equal-source branching at {src}: the lifted mcm {d.name(vp)} does not "
            "stay in the family or does not recompose")
    if x2 == 0:
        return FamilyCell("H", (u, v1, x1, y), (vp,))
    if x1 == 0:
        return FamilyCell("H", (u, v2, x2, y), (vp,))
    return FamilyCell("I", (u, v1, w1, v2, w2), (x1, x2, y, vp))


@functools.lru_cache(maxsize=None)
def _classified(d: GarsideDatum) -> tuple[tuple[CriticalBranching, FamilyCell], ...]:
    """One family cell per critical branching of underline_gar2, in order."""
    u2 = _underline_gar2(d)
    alpha_of = {_alpha(d, i, j): (i, j) for (i, j) in u2.alphas}
    beta_of = {_beta(d, i, j, k): (i, j, k) for (i, j, k) in u2.betas}
    out = []
    for br in critical_branchings(u2.polygraph):
        l, r = br.left.rule, br.right.rule
        if br.shape == "overlap":
            if l in alpha_of and r in alpha_of:
                u, v = alpha_of[l]
                _, w = alpha_of[r]
                uvw = d.mul(d.mul(u, v), w)
                fc = FamilyCell("A" if uvw is not None else "B", (u, v, w))
            elif l in alpha_of and r in beta_of:
                u, v = alpha_of[l]
                _, w, x = beta_of[r]
                uvw = d.mul(d.mul(u, v), w)
                fc = FamilyCell("C" if uvw is not None else "D", (u, v, w, x))
            elif l in beta_of and r in alpha_of:
                u, v, w = beta_of[l]
                _, x = alpha_of[r]
                wx = d.mul(w, x)
                if wx is None:
                    raise UnclassifiedBranching(
                        f"branching at {u2.polygraph.word_str(br.source)}: "
                        f"{d.name(w)}*{d.name(x)} leaves the family")
                uvwx = d.mul(d.mul(u, v), wx)
                fc = FamilyCell("E'" if uvwx is not None else "E", (u, v, w, x))
            else:
                u, v, w = beta_of[l]
                _, x, y = beta_of[r]
                wx = d.mul(w, x)
                if wx is None:
                    raise UnclassifiedBranching(
                        f"branching at {u2.polygraph.word_str(br.source)}: "
                        f"{d.name(w)}*{d.name(x)} leaves the family")
                wxy = d.mul(wx, y)
                uvwx = d.mul(d.mul(u, v), wx)
                if wxy is not None:
                    fc = FamilyCell("F'" if uvwx is not None else "F", (u, v, w, x, y))
                else:
                    fc = FamilyCell("G'" if uvwx is not None else "G", (u, v, w, x, y))
        elif br.shape == "equal_source":
            if l not in beta_of or r not in beta_of:
                raise UnclassifiedBranching(
                    f"equal-source branching at {u2.polygraph.word_str(br.source)} "
                    "involves a non-beta rule")
            u, v1, w1 = beta_of[l]
            _, v2, w2 = beta_of[r]
            s = d.mul(v1, w1)
            fc = _classify_equal_source(d, u, s, (v1, w1), (v2, w2))
        else:
            raise UnclassifiedBranching(
                f"unexpected branching shape {br.shape!r} at "
                f"{u2.polygraph.word_str(br.source)}")
        out.append((br, fc))
    return tuple(out)


def family_cells(d: GarsideDatum) -> tuple[FamilyCell, ...]:
    """The family classification of the critical branchings, in canonical order."""
    return tuple(fc for _, fc in _classified(d))


@functools.lru_cache(maxsize=None)
def underline_gar3(d: GarsideDatum) -> ThreeOnePolygraph:
    """The coherent convergent presentation: one cell per critical branching,
    built from the twelve family templates.  The classification is verified
    to be a bijection onto the critical branchings."""
    base = underline_gar2(d)
    records = _classified(d)
    cells = tuple(_cell_from_family(d, fc) for _, fc in records)
    x = ThreeOnePolygraph(base, cells)
    if len(x.cells) != len(critical_branchings(base)):
        raise ValidationError("cell count does not match branching count")
    return x


# ---------------------------------------------------------------------------
# Collapse spheres and the reduction to gar3
# ---------------------------------------------------------------------------

def _label_of(d: GarsideDatum, family: str, *params: int) -> str:
    return f"{family}:" + ",".join(d.name(i) for i in params)


def _sphere_for(d: GarsideDatum, x3: ThreeOnePolygraph, fc: FamilyCell) -> ThreeSphere:
    """Build the collapse sphere whose designated target is the given cell.

    The spheres pair the cell with the lower-family confluences of a critical
    triple branching over the same data; every referenced cell must exist in
    the (3,1)-polygraph, otherwise a ValidationError surfaces and the caller
    falls back to an unverified collapse.
    """
    a, b = _alpha, _beta
    m = functools.partial(_mul_or_fail, d)
    lab = functools.partial(_label_of, d)

    def need(label: str) -> str:
        if not x3.has_cell(label):
            raise ValidationError(f"sphere for {fc.label(d)}: missing cell {label}")
        return label

    def gen(i: int) -> int:
        return i - 1

    f = fc.family
    if f == "C":
        u, v, w, x = fc.params
        uv, vw = m(u, v), m(v, w)
        start = RewritePath((gen(u), gen(v), gen(w), gen(x)),
                            _steps((a(d, u, v), 0), (a(d, uv, w), 0)))
        lhs = (CellMove(0, need(lab("A", u, v, w)), right=(gen(x),)),
               CellMove(0, need(lab("B", v, w, x)), left=(gen(u),)))
        rhs = (CellMove(1, need(lab("B", uv, w, x))),
               ExchangeMove(0),
               CellMove(1, need(lab("C", u, v, w, x))))
    elif f == "D":
        u, v, w, x = fc.params
        start = RewritePath((gen(u), gen(v), gen(w), gen(x)),
                            _steps((a(d, u, v), 0), (a(d, w, x), 1)))
        lhs = (ExchangeMove(0),
               CellMove(1, need(lab("D", u, v, w, x))))
        rhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(x),)),
               CellMove(0, need(lab("B", v, w, x)), left=(gen(u),)))
    elif f == "E":
        u, v, w, x = fc.params
        start = RewritePath((gen(u), gen(v), gen(w), gen(x)),
                            _steps((a(d, u, v), 0), (a(d, w, x), 1)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(x),)),
               CellMove(1, need(lab("E", u, v, w, x))),
               CellMove(0, need(lab("A", v, w, x)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("B", u, v, m(w, x)))))
    elif f == "E'":
        u, v, w, x = fc.params
        uv, wx = m(u, v), m(w, x)
        start = RewritePath((gen(u), gen(v), gen(w), gen(x)),
                            _steps((a(d, u, v), 0), (a(d, w, x), 1), (a(d, uv, wx), 0)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(x),)),
               CellMove(1, need(lab("E'", u, v, w, x))),
               CellMove(0, need(lab("A", v, w, x)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("A", u, v, wx))))
    elif f == "F":
        u, v, w, x, y = fc.params
        xy, wx = m(x, y), m(w, x)
        start = RewritePath((gen(u), gen(v), gen(w), gen(xy)),
                            _steps((a(d, u, v), 0), (a(d, w, xy), 1)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(xy),)),
               CellMove(1, need(lab("F", u, v, w, x, y))),
               CellMove(0, need(lab("B", v, w, xy)), left=(gen(u),)),
               CellMove(1, need(lab("H", v, w, x, y)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("D", u, v, wx, y))))
    elif f == "F'":
        u, v, w, x, y = fc.params
        xy, wx, uv = m(x, y), m(w, x), m(u, v)
        start = RewritePath((gen(u), gen(v), gen(w), gen(xy)),
                            _steps((a(d, u, v), 0), (a(d, w, xy), 1),
                                   (b(d, uv, wx, y), 0)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(xy),)),
               CellMove(1, need(lab("F'", u, v, w, x, y))),
               CellMove(0, need(lab("B", v, w, xy)), left=(gen(u),)),
               CellMove(1, need(lab("H", v, w, x, y)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("C", u, v, wx, y))))
    elif f == "G":
        u, v, w, x, y = fc.params
        xy, wx = m(x, y), m(w, x)
        start = RewritePath((gen(u), gen(v), gen(w), gen(xy)),
                            _steps((a(d, u, v), 0), (b(d, w, x, y), 1)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(xy),)),
               CellMove(1, need(lab("G", u, v, w, x, y))),
               CellMove(0, need(lab("C", v, w, x, y)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("B", u, v, wx)), right=(gen(y),)))
    elif f == "G'":
        u, v, w, x, y = fc.params
        xy, wx, uv = m(x, y), m(w, x), m(u, v)
        start = RewritePath((gen(u), gen(v), gen(w), gen(xy)),
                            _steps((a(d, u, v), 0), (b(d, w, x, y), 1), (a(d, uv, wx), 0)))
        lhs = (CellMove(0, need(lab("B", u, v, w)), right=(gen(xy),)),
               CellMove(1, need(lab("G'", u, v, w, x, y))),
               CellMove(0, need(lab("C", v, w, x, y)), left=(gen(u),)))
        rhs = (ExchangeMove(0),
               CellMove(1, need(lab("A", u, v, wx)), right=(gen(y),)))
    elif f == "H":
        u, v, x, y = fc.params
        uv, vx, xy = m(u, v), m(v, x), m(x, y)
        start = RewritePath((gen(u), gen(v), gen(x), gen(y)),
                            _steps((a(d, u, v), 0), (a(d, uv, x), 0)))
        lhs = (CellMove(0, need(lab("A", u, v, x)), right=(gen(y),)),
               CellMove(1, need(lab("B", u, vx, y))),
               CellMove(0, need(lab("A", v, x, y)), left=(gen(u),)))
        rhs = (CellMove(1, need(lab("B", uv, x, y))),
               ExchangeMove(0),
               CellMove(1, need(lab("B", u, v, xy))),
               CellMove(2, need(lab("H", u, v, x, y))))
    elif f == "I":
        u, v1, w1, v2, w2 = fc.params
        x1, x2, y, vp = fc.derived
        s = m(v1, w1)
        start = RewritePath((gen(u), gen(s)),
                            _steps((b(d, u, v1, w1), 0), (b(d, m(u, v1), x1, y), 0)))
        lhs = (CellMove(0, need(lab("H", u, v1, x1, y))),
               CellMove(0, need(lab("H", u, v2, x2, y)), forward=False))
        rhs = (CellMove(0, need(fc.label(d))),)
    else:
        raise ValidationError(f"no collapse sphere for family {f!r}")
    return ThreeSphere(start, lhs, rhs)


@dataclass(frozen=True)
class ReductionReport:
    """What the reduction to the associativity presentation did."""
    collapsed_rules: int
    collapsed_cells: int
    cells_by_family: tuple[tuple[str, int], ...]
    verified_spheres: int
    warnings: tuple[str, ...]
    matches_gar3: bool


def reduce_to_gar3(d: GarsideDatum) -> tuple[ThreeOnePolygraph, ReductionReport]:
    """Collapse underline_gar3 down to gar3 and verify the result.

    Gamma-3 collapses every beta rule against its B cell; gamma-4 collapses
    every C..I, E', F', G' cell against its instantiated sphere, each checked
    for parallelism and for having the cell as designated target.  When a
    sphere cannot be instantiated for a datum, the collapse falls back to the
    construction's justification and the report carries a warning.
    """
    x3 = underline_gar3(d)
    records = _classified(d)
    ranks: dict[str, int] = {}
    for _, fc in records:
        ranks[fc.label(d)] = FAMILY_RANK[fc.family]
        if fc.family == "B":
            u, v, w = fc.params
            ranks[_beta(d, u, v, w)] = 1
    gamma3 = tuple(
        CollapsibleCell(fc.label(d), _beta(d, *fc.params))
        for _, fc in records if fc.family == "B")
    warnings: list[str] = []
    gamma4 = []
    verified = 0
    for _, fc in records:
        if fc.family in ("A", "B"):
            continue
        label = fc.label(d)
        try:
            sphere = _sphere_for(d, x3, fc)
        except (ValidationError, NotADivisor) as e:
            warnings.append(f"sphere construction failed for {label}: {e}")
            gamma4.append(CollapsibleSphere(None, label))
            continue
        try:
            report = check_sphere(sphere, x3, ranks)
        except NotParallel as e:
            raise SphereCheckFailed(f"sphere for {label}: {e}") from None
        if report.target != label:
            raise SphereCheckFailed(
                f"sphere for {label} designates {report.target!r} as target")
        verified += 1
        gamma4.append(CollapsibleSphere(sphere, label))
    part = CollapsiblePart(gamma3=gamma3, gamma4=tuple(gamma4), ranks=ranks)
    reduced = homotopical_reduce(x3, part, warnings)

    expected = gar3(d)
    same = (reduced.base.generators == expected.base.generators
            and set(reduced.base.rules) == set(expected.base.rules)
            and {c.label: (c.lhs, c.rhs) for c in reduced.cells}
            == {c.label: (c.lhs, c.rhs) for c in expected.cells})
    if not same:
        raise MismatchWithGar3(
            f"reduction produced {len(reduced.base.rules)} rules and "
            f"{len(reduced.cells)} cells; expected the associativity presentation "
            f"({len(expected.base.rules)} rules, {len(expected.cells)} cells)")
    census: dict[str, int] = {}
    for _, fc in records:
        census[fc.family] = census.get(fc.family, 0) + 1
    report = ReductionReport(
        collapsed_rules=len(gamma3),
        collapsed_cells=len(gamma3) + len(gamma4),
        cells_by_family=tuple(sorted(census.items())),
        verified_spheres=verified,
        warnings=tuple(warnings),
        matches_gar3=True)
    return reduced, report


# ---------------------------------------------------------------------------
# Greedy normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SNormalWord:
    """A strict normal word over S\\{1}: no unit letters, every adjacent pair
    left-weighted (the head of the pair is its first letter)."""
    word: tuple[int, ...]  # element indices
    certified: bool

    @property
    def s_length(self) -> int:
        return len(self.word)


def head2(d: GarsideDatum, u: int, v: int, budget: int = DEFAULT_BUDGET) -> int:
    """The maximal left divisor, within the family, of the product u*v.

    When the product stays in the family that is the product itself;
    otherwise it is the first letter of the normal form of u|v under the
    convergent completion, and u is checked to left-divide it.
    """
    if not (u in d.nonunit() and v in d.nonunit()):
        raise ValidationError("head2 arguments must be nonunit elements")
    uv = d.mul(u, v)
    if uv is not None:
        return uv
    p = _underline_gar2(d).polygraph
    try:
        nf, _ = normalize(p, (u - 1, v - 1), "leftmost", budget)
    except StepBudgetExceeded as e:
        raise NormalizationFailure(str(e)) from None
    head = nf[0] + 1
    if not left_divides(d, u, head):
        raise NormalizationFailure(
            f"{d.name(u)} does not left-divide the head {d.name(head)}: corrupt table")
    return head


def s_normalize(d: GarsideDatum, word: tuple[int, ...], strategy: str = "leftmost",
                budget: int = DEFAULT_BUDGET) -> SNormalWord:
    """The strict normal decomposition of the element spelled by ``word``.

    ``word`` is a sequence of nonunit element indices.  Normalization runs
    over the convergent completion; the result is certified strict normal by
    checking every adjacent pair against :func:`head2`.
    """
    if any(i not in d.nonunit() for i in word):
        raise ValidationError("words must be spelled in nonunit elements")
    p = _underline_gar2(d).polygraph
    try:
        nf, _ = normalize(p, tuple(i - 1 for i in word), strategy, budget)
    except StepBudgetExceeded as e:
        raise NormalizationFailure(str(e)) from None
    out = tuple(i + 1 for i in nf)
    for a, b2 in zip(out, out[1:]):
        if head2(d, a, b2) != a:
            raise NormalizationFailure(
                f"normal form has a non-greedy pair ({d.name(a)}, {d.name(b2)})")
    return SNormalWord(out, certified=True)
