import pytest
from hypothesis import given, strategies as st

from polyrew.core import (
    MonoidTable,
    NoUnit,
    RedexMismatch,
    RewritePath,
    RewriteStep,
    Rule,
    TableNotAssociative,
    ThreeOnePolygraph,
    TwoPolygraph,
    ValidationError,
    alphabet,
    apply_step,
    cancel_inverse_pairs,
    invert_path,
    paths_equal,
    replay_path,
    std2,
    std3,
)
from polyrew.catalog import klein_bottle


def klein_completed() -> TwoPolygraph:
    p = klein_bottle()
    return TwoPolygraph(p.generators, p.rules + (Rule("beta", p.word("b", "a", "a"),
                                                      p.word("a", "a", "b")),))


def test_apply_forward_klein():
    p = klein_bottle()
    w = p.word("b", "a", "b", "a", "b")
    assert apply_step(w, RewriteStep("alpha", 0), p) == p.word("a", "a", "b")


def test_apply_backward_inverse():
    p = klein_bottle()
    assert apply_step(p.word("a"), RewriteStep("alpha", 0, forward=False), p) \
        == p.word("b", "a", "b")


def test_apply_interior_offset():
    p = klein_bottle()
    assert apply_step(p.word("a", "b", "a", "b"), RewriteStep("alpha", 1), p) \
        == p.word("a", "a")


def test_apply_mismatch():
    p = klein_bottle()
    with pytest.raises(RedexMismatch):
        apply_step(p.word("a", "b", "a", "b"), RewriteStep("alpha", 0), p)


def test_replay_reports_failing_step():
    p = klein_completed()
    path = RewritePath(p.word("b", "a", "b", "a", "b"),
                       (RewriteStep("alpha", 0), RewriteStep("beta", 0)))
    with pytest.raises(RedexMismatch) as exc:
        replay_path(path, p)
    assert exc.value.step_index == 1  # the second step is the bad one


def test_replay_paper_path():
    p = klein_completed()
    path = RewritePath(p.word("b", "a", "b", "a", "b"),
                       (RewriteStep("alpha", 2), RewriteStep("beta", 0)))
    assert replay_path(path, p) == p.word("a", "a", "b")


def test_replay_empty_path():
    p = TwoPolygraph(alphabet("a", "b", "c"), ())
    w = p.word("a", "b", "c")
    assert replay_path(RewritePath(w), p) == w


def test_invert_single_step():
    p = klein_bottle()
    path = RewritePath(p.word("b", "a", "b"), (RewriteStep("alpha", 0),))
    inv = invert_path(path, p)
    assert inv.start == p.word("a")
    assert inv.steps == (RewriteStep("alpha", 0, forward=False),)
    assert replay_path(inv, p) == path.start


def test_invert_is_involutive():
    p = klein_completed()
    path = RewritePath(p.word("b", "a", "b", "a", "b"),
                       (RewriteStep("alpha", 2), RewriteStep("beta", 0)))
    assert invert_path(invert_path(path, p), p) == path


def test_invert_empty_path():
    p = klein_bottle()
    w = p.word("a", "b")
    assert invert_path(RewritePath(w), p) == RewritePath(w)


@given(word=st.lists(st.integers(0, 1), min_size=0, max_size=8),
       data=st.data())
def test_roundtrip_and_cancellation_properties(word, data):
    """apply-then-unapply is the identity, and inversion round-trips paths."""
    p = klein_completed()
    w = tuple(word)
    steps = []
    for _ in range(data.draw(st.integers(0, 4))):
        hits = [RewriteStep(r.label, i, fwd)
                for r in p.rewriting_rules() for fwd in (True, False)
                for i in range(len(w) - len(r.side(fwd)) + 1)
                if w[i:i + len(r.side(fwd))] == r.side(fwd)]
        if not hits:
            break
        step = data.draw(st.sampled_from(sorted(hits, key=repr)))
        after = apply_step(w, step, p)
        assert apply_step(after, step.inverse(), p) == w
        steps.append(step)
        w = after
    path = RewritePath(tuple(word), tuple(steps))
    assert replay_path(path, p) == w
    assert replay_path(invert_path(path, p), p) == path.start
    doubled = RewritePath(path.start, path.steps + tuple(
        s.inverse() for s in reversed(path.steps)))
    assert paths_equal(doubled, RewritePath(path.start))
    assert cancel_inverse_pairs(doubled).steps == ()


def test_rule_rejects_equal_sides():
    with pytest.raises(ValidationError):
        Rule("r", (0,), (0,))


def test_duplicate_labels_rejected():
    gens = alphabet("a", "b")
    with pytest.raises(ValidationError):
        TwoPolygraph(gens, (Rule("r", (0,), (1,)), Rule("r", (1,), (0,))))


def test_cells_must_be_parallel():
    from polyrew.core import ThreeCell
    p = klein_completed()
    bad = RewritePath(p.word("b", "a", "b"), (RewriteStep("alpha", 0),))
    good = RewritePath(p.word("b", "a", "b"))
    with pytest.raises(ValidationError):
        ThreeOnePolygraph(p, (ThreeCell("x", bad, good),))


# -- finite monoid tables and the standard presentation ----------------------

def cyclic_table(n: int) -> MonoidTable:
    names = tuple("1" if i == 0 else f"g{i}" for i in range(n))
    return MonoidTable(names, tuple(tuple((i + j) % n for j in range(n))
                                    for i in range(n)))


def test_table_check_rejects_nonassociative():
    # x*x = 1 with x*1 = x and 1 anything = identity row forced; break closure
    table = MonoidTable(("1", "x"), ((0, 1), (1, 1)))
    with pytest.raises(TableNotAssociative):
        table.check()


def test_table_check_rejects_missing_unit():
    table = MonoidTable(("1", "x"), ((1, 1), (1, 1)))
    with pytest.raises(NoUnit):
        table.check()


@pytest.mark.parametrize("n,rules,cells", [(1, 2, 3), (2, 5, 12), (3, 10, 33)])
def test_std_counts(n, rules, cells):
    table = cyclic_table(n)
    assert len(std2(table).rules) == rules  # |M|^2 + 1
    assert len(std3(table).cells) == cells  # |M|^3 + 2|M|


def test_std3_cells_are_parallel_by_construction():
    # ThreeOnePolygraph replays every boundary; reaching here is the check
    x = std3(cyclic_table(2))
    assert {c.label for c in x.cells} >= {"L:1", "R:1", "A:g1,g1,g1"}


def test_std2_iota_excluded_from_rewriting():
    p = std2(cyclic_table(2))
    assert all(r.source for r in p.rewriting_rules())
    iota = p.rule("iota")
    assert iota.completion_excluded and iota.source == ()
