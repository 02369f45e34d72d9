"""
Built-in presentations and Garside data used by the tests and the CLI.

Presentations:

* ``klein_bottle``              <a, b | bab => a>
* ``free_abelian_presentation`` commutation rules x_j x_i => x_i x_j, i < j

Garside data (finite families with partial product tables):

* ``free_abelian_datum(n)``  subsets of {1..n}; product = union when disjoint
* ``braid_simple_datum(n)``  permutations of n letters; product defined when
  inversion counts add (the simple elements of the positive braid monoid)
* ``atilde2_datum()``        the sixteen-element family of the affine braid
  monoid on three generators, transcribed as data; its twenty-seven products
  drive nontrivial validation of the transcription

The affine table is transcribed, not computed from the (infinite) monoid;
the associativity and cancellativity checks of ``validate_datum`` are the
transcription's correctness gate.  Parameter caps keep exhaustive validation
sub-second.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import Generator, PolygraphError, Rule, TwoPolygraph
from .garside import GarsideDatum


class BadParameter(PolygraphError):
    """A catalog constructor was called outside its supported range."""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "presentation" | "datum"
    parameters: tuple[int, ...] = ()


def klein_bottle() -> TwoPolygraph:
    """The one-rule presentation <a, b | bab => a> of the Klein bottle monoid."""
    gens = (Generator("a", 0), Generator("b", 1))
    return TwoPolygraph(gens, (Rule("alpha", (1, 0, 1), (0,)),))


_LETTERS = "abcde"


def free_abelian_presentation(n: int = 3) -> TwoPolygraph:
    """The commutation presentation of the free abelian monoid on n generators."""
    if not 2 <= n <= len(_LETTERS):
        raise BadParameter(f"free_abelian_presentation: n must be in [2, {len(_LETTERS)}]")
    gens = tuple(Generator(_LETTERS[i], i) for i in range(n))
    rules = tuple(
        Rule(f"swap:{_LETTERS[j]}{_LETTERS[i]}", (j, i), (i, j))
        for j in range(n) for i in range(n) if i < j)
    return TwoPolygraph(gens, rules)


def free_abelian_datum(n: int) -> GarsideDatum:
    """Subsets of {1..n} with union-of-disjoint products.

    Elements are ordered by (size, lexicographic support) with the unit (the
    empty subset) first; the name of a subset concatenates its letters.
    """
    if not 1 <= n <= 5:
        raise BadParameter("free_abelian_datum: n must be in [1, 5]")
    subsets = sorted(
        (frozenset(s) for r in range(n + 1)
         for s in itertools.combinations(range(n), r)),
        key=lambda s: (len(s), tuple(sorted(s))))
    names = tuple("1" if not s else "".join(_LETTERS[i] for i in sorted(s))
                  for s in subsets)
    index = {s: i for i, s in enumerate(subsets)}
    products = tuple(
        tuple(index[a | b] if not (a & b) else None
              for b in subsets[1:])
        for a in subsets[1:])
    return GarsideDatum(names, products)


def _inversions(p: tuple[int, ...]) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j])


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Diagram order: apply p, then q."""
    return tuple(q[p[i]] for i in range(len(p)))


def braid_simple_datum(n: int) -> GarsideDatum:
    """Permutations of n letters as the simple elements of the braid monoid.

    The product of two permutations is kept exactly when their inversion
    counts add, i.e. when the concatenation of reduced words stays reduced.
    Elements are ordered by (inversion count, one-line form); a permutation
    is named by its one-line images, the identity by "1".
    """
    if not 2 <= n <= 5:
        raise BadParameter("braid_simple_datum: n must be in [2, 5]")
    perms = sorted(itertools.permutations(range(n)),
                   key=lambda p: (_inversions(p), p))
    names = tuple("1" if p == tuple(range(n)) else "".join(str(v + 1) for v in p)
                  for p in perms)
    index = {p: i for i, p in enumerate(perms)}
    products = []
    for p in perms[1:]:
        row = []
        for q in perms[1:]:
            pq = _compose(p, q)
            row.append(index[pq]
                       if _inversions(pq) == _inversions(p) + _inversions(q) else None)
        products.append(tuple(row))
    return GarsideDatum(names, tuple(products))


def atilde2_datum() -> GarsideDatum:
    """The sixteen-element Garside family of the affine braid monoid
    <s1, s2, s3 | s1s2s1 = s2s1s2, s2s3s2 = s3s2s3, s3s1s3 = s1s3s1>.

    The family consists of the right divisors of s3s1s2s1, s1s2s3s2 and
    s2s3s1s3.  Its twenty-seven in-family products come in five shapes over
    the index cycles (i,j,k) in {(1,2,3), (2,3,1), (3,1,2)}:

        si * sj       = sisj          sj * si       = sjsi
        si * sjsi     = sisjsi        sj * sisj     = sisjsi
        sisj * si     = sisjsi        sjsi * sj     = sisjsi
        sk * sisjsi   = sksisjsi
        sksi * sjsi   = sksisjsi      sksj * sisj   = sksisjsi

    (sisjsi names the common value of the braid-related three-letter words;
    sksisjsi the corresponding four-letter tops.)  All other nonunit products
    leave the family.
    """
    names = ["1", "s1", "s2", "s3",
             "s1s2", "s2s1", "s2s3", "s3s2", "s3s1", "s1s3",
             "s1s2s1", "s2s3s2", "s3s1s3",
             "s3s1s2s1", "s1s2s3s2", "s2s3s1s3"]
    idx = {name: i for i, name in enumerate(names)}
    prods: dict[tuple[int, int], int] = {}

    def put(a: str, b: str, c: str):
        key = (idx[a], idx[b])
        assert key not in prods
        prods[key] = idx[c]

    for i, j, k in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        si, sj, sk = f"s{i}", f"s{j}", f"s{k}"
        sij, sji = f"s{i}s{j}", f"s{j}s{i}"
        ski, skj = f"s{k}s{i}", f"s{k}s{j}"
        braid = f"s{i}s{j}s{i}"
        top = f"s{k}s{i}s{j}s{i}"
        put(si, sj, sij)
        put(sj, si, sji)
        put(si, sji, braid)
        put(sj, sij, braid)
        put(sij, si, braid)
        put(sji, sj, braid)
        put(sk, braid, top)
        put(ski, sji, top)
        put(skj, sij, top)

    n = len(names)
    products = tuple(
        tuple(prods.get((i, j)) for j in range(1, n))
        for i in range(1, n))
    return GarsideDatum(tuple(names), products)


# The instances exercised by the verification suite: desk scale throughout.
CATALOG: tuple[CatalogEntry, ...] = (
    CatalogEntry("klein_bottle", "presentation"),
    CatalogEntry("free_abelian_presentation", "presentation", (3,)),
    CatalogEntry("free_abelian_datum", "datum", (1,)),
    CatalogEntry("free_abelian_datum", "datum", (2,)),
    CatalogEntry("free_abelian_datum", "datum", (3,)),
    CatalogEntry("braid_simple_datum", "datum", (2,)),
    CatalogEntry("braid_simple_datum", "datum", (3,)),
    CatalogEntry("atilde2_datum", "datum"),
)


def catalog_data() -> list[tuple[str, GarsideDatum]]:
    """Name -> datum for every datum entry of the catalog."""
    out = []
    for e in CATALOG:
        if e.kind == "datum":
            label = e.name if not e.parameters else f"{e.name}({e.parameters[0]})"
            out.append((label, build(e.name, *e.parameters)))
    return out


def build(name: str, *parameters: int):
    """Construct a catalog object by name; raises BadParameter on bad input."""
    constructors = {
        "klein_bottle": klein_bottle,
        "free_abelian_presentation": free_abelian_presentation,
        "free_abelian_datum": free_abelian_datum,
        "braid_simple_datum": braid_simple_datum,
        "atilde2_datum": atilde2_datum,
    }
    if name not in constructors:
        raise BadParameter(f"unknown catalog entry {name!r}")
    try:
        return constructors[name](*parameters)
    except TypeError:
        raise BadParameter(f"{name} does not accept parameters {parameters}") from None
