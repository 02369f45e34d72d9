"""
Independent brute-force oracles the tests check the library against.

Everything here recomputes results from first principles: branching and
triple enumeration scan all words up to a length bound; divisibility, mcms
and greedy heads are derived from a bounded word-model of the monoid rather
than from the rewriting engine; family censuses re-evaluate the membership
conditions over raw parameter tuples.
"""

from __future__ import annotations

import itertools

from polyrew.core import TwoPolygraph, Word
from polyrew.garside import GarsideDatum


# ---------------------------------------------------------------------------
# Branchings by exhaustive word scan
# ---------------------------------------------------------------------------

def _applicable_steps(p: TwoPolygraph, w: Word):
    for r in p.rewriting_rules():
        k = len(r.source)
        for i in range(len(w) - k + 1):
            if w[i:i + k] == r.source:
                yield (r.label, i, i + k)


def _all_words(p: TwoPolygraph, max_len: int):
    n = len(p.generators)
    for length in range(max_len + 1):
        yield from itertools.product(range(n), repeat=length)


def bruteforce_branchings(p: TwoPolygraph, max_len: int) -> set:
    """Critical branchings as (source, {(rule, pos), (rule, pos)}) pairs."""
    out = set()
    for w in _all_words(p, max_len):
        steps = list(_applicable_steps(p, w))
        for (r1, i1, e1), (r2, i2, e2) in itertools.combinations(steps, 2):
            covered = set(range(i1, e1)) | set(range(i2, e2))
            if covered != set(range(len(w))):
                continue
            if e1 <= i2 or e2 <= i1:
                continue  # disjoint redexes: trivial
            out.add((w, frozenset(((r1, i1), (r2, i2)))))
    return out


def bruteforce_triples(p: TwoPolygraph, max_len: int) -> set:
    """Critical triple branchings as (source, frozenset of (rule, pos))."""
    out = set()
    for w in _all_words(p, max_len):
        steps = list(_applicable_steps(p, w))
        for combo in itertools.combinations(steps, 3):
            spans = [set(range(i, e)) for _, i, e in combo]
            if spans[0] | spans[1] | spans[2] != set(range(len(w))):
                continue
            trivial = any(
                not (spans[a] & spans[b]) and not (spans[a] & spans[c])
                for a, b, c in ((0, 1, 2), (1, 0, 2), (2, 0, 1)))
            if trivial:
                continue
            out.add((w, frozenset((r, i) for r, i, _ in combo)))
    return out


# ---------------------------------------------------------------------------
# Word model of the monoid presented by a datum
# ---------------------------------------------------------------------------

def _decompositions(d: GarsideDatum) -> dict[int, list[tuple[int, int]]]:
    dec: dict[int, list[tuple[int, int]]] = {}
    for i, j in itertools.product(d.nonunit(), repeat=2):
        k = d.mul(i, j)
        if k is not None:
            dec.setdefault(k, []).append((i, j))
    return dec


def word_closure(d: GarsideDatum, word: tuple[int, ...], cap: int = 4) -> set:
    """All words of length <= cap reachable from ``word`` by table moves.

    Moves contract an adjacent pair into its product or expand a letter into
    one of its two-letter decompositions; every reachable word spells the
    same monoid element.
    """
    dec = _decompositions(d)
    seen = {word}
    frontier = [word]
    while frontier:
        w = frontier.pop()
        for i in range(len(w) - 1):
            k = d.mul(w[i], w[i + 1])
            if k is not None:
                nxt = w[:i] + (k,) + w[i + 2:]
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if len(w) < cap:
            for i, letter in enumerate(w):
                for a, b in dec.get(letter, ()):
                    nxt = w[:i] + (a, b) + w[i + 1:]
                    if nxt not in seen:
                        seen.add(nxt)
                        frontier.append(nxt)
    return seen


def oracle_divides(d: GarsideDatum, f: int, g: int) -> bool:
    """f left-divides g within the family, by right-multiplication search."""
    if f == g:
        return True
    seen = {f}
    frontier = [f]
    while frontier:
        h = frontier.pop()
        for x in d.nonunit():
            k = d.mul(h, x)
            if k == g:
                return True
            if k is not None and k not in seen:
                seen.add(k)
                frontier.append(k)
    return False


def oracle_mcms(d: GarsideDatum, f: int, g: int) -> tuple[int, ...]:
    crm = [h for h in d.nonunit()
           if oracle_divides(d, f, h) and oracle_divides(d, g, h)]
    return tuple(h for h in crm
                 if not any(k != h and oracle_divides(d, k, h) for k in crm))


class GreedyOracle:
    """Greedy normalization by repeated head absorption, built on the word
    model rather than on the rewriting engine."""

    def __init__(self, d: GarsideDatum, cap: int = 4):
        self.d = d
        self.cap = cap
        self._pair: dict[tuple[int, int], tuple[int, ...]] = {}

    def head2(self, a: int, b: int) -> int:
        return self.normal_pair(a, b)[0]

    def normal_pair(self, a: int, b: int) -> tuple[int, ...]:
        """The strict normal form (one or two letters) of the product a*b."""
        key = (a, b)
        if key in self._pair:
            return self._pair[key]
        d = self.d
        k = d.mul(a, b)
        if k is not None:
            self._pair[key] = (k,)
            return (k,)
        closure = word_closure(d, (a, b), self.cap)
        heads = {w[0] for w in closure}
        maximal = [h for h in heads
                   if all(oracle_divides(d, g, h) for g in heads)]
        assert len(maximal) == 1, f"no unique maximal head for {d.name(a)},{d.name(b)}"
        h = maximal[0]
        rests = {w[1] for w in closure if len(w) == 2 and w[0] == h}
        assert len(rests) == 1, "left cancellation should force the complement"
        result = (h, rests.pop())
        self._pair[key] = result
        return result

    def normalize(self, word: tuple[int, ...]) -> tuple[int, ...]:
        w = list(word)
        for _ in range(10_000):
            for i in range(len(w) - 1):
                pair = self.normal_pair(w[i], w[i + 1])
                if pair != (w[i], w[i + 1]):
                    w[i:i + 2] = pair
                    break
            else:
                return tuple(w)
        raise AssertionError("greedy absorption did not settle")


# ---------------------------------------------------------------------------
# Family censuses straight from the membership conditions
# ---------------------------------------------------------------------------

def census_families(d: GarsideDatum) -> dict[str, int]:
    """Counts of parameter tuples satisfying each family's conditions.

    Conditions are evaluated directly on the table, independently of the
    branching classifier: A/B over triples, C/D and E/E' over quadruples,
    F/F'/G/G' over quintuples, H/I over equal-source decomposition pairs.
    """
    m = d.mul
    S = d.nonunit()
    census = {f: 0 for f in
              ("A", "B", "C", "D", "E", "E'", "F", "F'", "G", "G'", "H", "I")}

    beta_triples = []
    for u, v, w in itertools.product(S, repeat=3):
        uv, vw = m(u, v), m(v, w)
        if uv is None or vw is None:
            continue
        if m(uv, w) is not None:
            census["A"] += 1
        else:
            census["B"] += 1
            beta_triples.append((u, v, w))

    for (v, w, x) in beta_triples:
        for u in S:
            uv = m(u, v)
            if uv is None:
                continue
            census["C" if m(uv, w) is not None else "D"] += 1

    for (u, v, w) in beta_triples:
        vw = m(v, w)
        for x in S:
            vwx = m(vw, x)
            if vwx is None:
                continue
            census["E'" if m(u, vwx) is not None else "E"] += 1

    for (u, v, w) in beta_triples:
        vw = m(v, w)
        for x, y in itertools.product(S, repeat=2):
            vwx, xy = m(vw, x), m(x, y)
            if vwx is None or xy is None or m(vwx, y) is not None:
                continue
            primed = m(u, vwx) is not None
            wxy = m(w, xy)
            if wxy is not None:
                census["F'" if primed else "F"] += 1
            else:
                census["G'" if primed else "G"] += 1

    for u, s in itertools.product(S, repeat=2):
        decs = [(v, w) for v in S for w in S
                if m(v, w) == s and m(u, v) is not None
                and m(m(u, v), w) is None]
        for (v1, w1), (v2, w2) in itertools.combinations(decs, 2):
            mcms = oracle_mcms(d, v1, v2)
            vps = [vp for vp in mcms
                   if any(m(vp, z) == s for z in S)]
            assert vps, "equal-source pair without a usable mcm"
            vp = vps[0]
            x1 = next(x for x in range(d.size) if m(v1, x) == vp)
            x2 = next(x for x in range(d.size) if m(v2, x) == vp)
            census["I" if x1 != 0 and x2 != 0 else "H"] += 1

    return {f: c for f, c in census.items() if c}
