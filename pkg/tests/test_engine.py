import itertools

import pytest

from oracles import bruteforce_branchings, bruteforce_triples
from polyrew.catalog import free_abelian_presentation, klein_bottle
from polyrew.core import (
    Generator,
    RewriteStep,
    Rule,
    TwoPolygraph,
    alphabet,
    path_words,
    replay_path,
)
from polyrew.engine import (
    NotLocallyConfluent,
    OrientationFailure,
    StepBudgetExceeded,
    critical_branchings,
    deglex,
    divlex,
    homotopical_completion,
    join_branching,
    knuth_bendix,
    normalize,
    squier,
    triple_branchings,
)


def klein_hc():
    p = klein_bottle()
    return knuth_bendix(p, deglex(p, ["a", "b"]))[0]


def single_rule() -> TwoPolygraph:
    return TwoPolygraph(alphabet("a", "b", "c"), (Rule("r", (0, 1), (2,)),))


# -- normalization -----------------------------------------------------------

def test_normalize_klein_examples():
    p = klein_hc()
    nf, path = normalize(p, p.word("b", "a", "b", "a", "b"))
    assert nf == p.word("a", "a", "b")
    assert replay_path(path, p) == nf
    nf, path = normalize(p, p.word("b", "a", "b", "a", "a"))
    assert nf == p.word("a", "a", "a")
    assert path.steps[0] == RewriteStep("alpha", 0)


def test_normalize_empty_word():
    p = klein_hc()
    nf, path = normalize(p, ())
    assert nf == () and path.steps == ()


def test_normalize_budget():
    grow = TwoPolygraph(alphabet("a"), (Rule("g", (0,), (0, 0)),))
    with pytest.raises(StepBudgetExceeded):
        normalize(grow, (0,), budget=50)


def test_strategy_independence_bounded_exhaustive():
    """Newman at desk scale: words up to length 5 have strategy-independent
    normal forms in each convergent catalog system."""
    systems = [klein_hc(), free_abelian_presentation(3)]
    for p in systems:
        n = len(p.generators)
        for length in range(6):
            for w in itertools.product(range(n), repeat=length):
                left, _ = normalize(p, w, "leftmost")
                right, _ = normalize(p, w, "rightmost")
                assert left == right, p.word_str(w)


# -- critical branchings -----------------------------------------------------

def as_pairs(p, branchings):
    return {(b.source, frozenset(((b.left.rule, b.left.position),
                                  (b.right.rule, b.right.position))))
            for b in branchings}


def test_klein_branchings_match_paper_and_oracle():
    p = klein_hc()
    bs = critical_branchings(p)
    assert len(bs) == 2
    assert as_pairs(p, bs) == bruteforce_branchings(p, 7)
    sources = {p.word_str(b.source) for b in bs}
    assert sources == {"babab", "babaa"}


def test_n3_unique_branching():
    p = free_abelian_presentation(3)
    bs = critical_branchings(p)
    assert len(bs) == 1
    assert p.word_str(bs[0].source) == "cba"
    assert as_pairs(p, bs) == bruteforce_branchings(p, 4)


def test_single_rule_has_no_branchings():
    assert critical_branchings(single_rule()) == []


def test_equal_source_branching_shape():
    p = TwoPolygraph(alphabet("a", "b"),
                     (Rule("r1", (0, 1), (0,)), Rule("r2", (0, 1), (1,))))
    bs = critical_branchings(p)
    assert len(bs) == 1 and bs[0].shape == "equal_source"


def test_inclusion_branching_shape():
    p = TwoPolygraph(alphabet("a", "b"),
                     (Rule("big", (0, 1, 0), (0,)), Rule("small", (1,), (0,))))
    shapes = {b.shape for b in critical_branchings(p)}
    assert "inclusion" in shapes


# -- joins -------------------------------------------------------------------

def test_hexagon_join():
    p = free_abelian_presentation(3)
    b = critical_branchings(p)[0]
    left, right = join_branching(p, b)
    assert len(left.steps) == 3 and len(right.steps) == 3
    words = {p.word_str(w) for side in (left, right) for w in path_words(side, p)}
    assert words == {"cba", "bca", "bac", "abc", "cab", "acb"}


def test_klein_branching_joins_at_aab():
    p = klein_hc()
    b = [x for x in critical_branchings(p) if p.word_str(x.source) == "babab"][0]
    left, right = join_branching(p, b)
    assert replay_path(left, p) == p.word("a", "a", "b")
    assert replay_path(right, p) == p.word("a", "a", "b")


def test_unjoinable_branching_returns_none():
    p = TwoPolygraph(alphabet("a", "b"),
                     (Rule("r1", (0, 1), (0,)), Rule("r2", (0, 1), (1,))))
    assert join_branching(p, critical_branchings(p)[0]) is None


# -- Knuth-Bendix ------------------------------------------------------------

def test_kb_klein_adds_exactly_beta():
    p = klein_bottle()
    completed, trace = knuth_bendix(p, deglex(p, ["a", "b"]))
    added = [e.added for e in trace if e.added is not None]
    assert [(completed.word_str(r.source), completed.word_str(r.target))
            for r in added] == [("baa", "aab")]
    assert all(join_branching(completed, b) is not None
               for b in critical_branchings(completed))


def test_kb_n3_already_convergent():
    p = free_abelian_presentation(3)
    completed, trace = knuth_bendix(p, deglex(p, ["a", "b", "c"]))
    assert completed.rules == p.rules
    assert all(e.joined for e in trace)


def test_kb_orientation_failure():
    p = TwoPolygraph(alphabet("a", "b"),
                     (Rule("r1", (0, 1), (0,)), Rule("r2", (0, 1), (1,))))
    with pytest.raises(OrientationFailure):
        knuth_bendix(p, divlex([]))


def test_kb_rejects_misoriented_input():
    p = TwoPolygraph(alphabet("a", "b"), (Rule("g", (0,), (0, 1)),))
    with pytest.raises(OrientationFailure):
        knuth_bendix(p, deglex(p, ["a", "b"]))


# -- Squier and homotopical completion ---------------------------------------

def test_squier_klein_matches_paper_boundaries():
    p = klein_hc()
    x = squier(p)
    assert len(x.cells) == 2
    a_cell, b_cell = x.cells
    assert [s.rule for s in a_cell.lhs.steps] == ["alpha"]
    assert [(s.rule, s.position) for s in a_cell.rhs.steps] == \
        [("alpha", 2), ("kb:1", 0)]
    assert [s.rule for s in b_cell.lhs.steps] == ["alpha"]
    assert [(s.rule, s.position) for s in b_cell.rhs.steps] == \
        [("kb:1", 2), ("kb:1", 0), ("alpha", 2)]


def test_squier_n3_single_cell():
    x = squier(free_abelian_presentation(3))
    assert len(x.cells) == 1


def test_squier_not_locally_confluent():
    p = TwoPolygraph(alphabet("a", "b"),
                     (Rule("r1", (0, 1), (0,)), Rule("r2", (0, 1), (1,))))
    with pytest.raises(NotLocallyConfluent):
        squier(p)


@pytest.mark.parametrize("builder,order,counts", [
    (klein_bottle, ["a", "b"], (2, 2, 2)),
    (lambda: free_abelian_presentation(3), ["a", "b", "c"], (3, 3, 1)),
    (lambda: TwoPolygraph(alphabet("a", "b"), (Rule("r", (0, 1), (0,)),)),
     ["a", "b"], (2, 1, 0)),
])
def test_homotopical_completion_counts(builder, order, counts):
    p = builder()
    x = homotopical_completion(p, deglex(p, order))
    assert (len(x.base.generators), len(x.base.rules), len(x.cells)) == counts


# -- triple branchings -------------------------------------------------------

def test_triple_branchings_klein_match_oracle():
    p = klein_hc()
    triples = triple_branchings(p)
    expected = bruteforce_triples(p, 8)
    assert {(t.source, frozenset((s.rule, s.position) for s in t.steps))
            for t in triples} == expected
    # the overlap of the single starting rule with itself, as in the source
    assert (p.word("b", "a", "b", "a", "b", "a", "b"),
            frozenset((("alpha", 0), ("alpha", 2), ("alpha", 4)))) in expected


def test_triple_branchings_n3_match_oracle():
    p = free_abelian_presentation(3)
    triples = triple_branchings(p)
    assert {(t.source, frozenset((s.rule, s.position) for s in t.steps))
            for t in triples} == bruteforce_triples(p, 6)


def test_triple_branchings_single_rule_empty():
    assert triple_branchings(single_rule()) == []
