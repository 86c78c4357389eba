import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqac.ac_core import (
    EQ,
    GE,
    GT,
    LE,
    LT,
    NEQ,
    ACSet,
    InconsistentACs,
    classify_ac,
    closure,
    compare,
    implication_holds,
    implies,
    is_consistent,
    minimal_form,
    negate,
    satisfying_assignment,
    witness_chain,
)
from cqac.selftest import random_acset


def acs(*items, universe=(), constants=()):
    return ACSet.of([compare(*it) for it in items], universe=universe, constants=constants)


def test_transitivity_of_le():
    cl = closure(acs(("X", LE, "Y"), ("Y", LE, "Z")))
    assert compare("X", LE, "Z") in cl.derived


def test_antisymmetry_gives_equality():
    cl = closure(acs(("X", LE, "Y"), ("Y", LE, "X")))
    assert cl.contains(compare("X", EQ, "Y"))


def test_disequality_propagates_through_two_paths():
    cl = closure(acs(("X", LE, "Z"), ("Z", LE, "Y"), ("X", LE, "W"), ("W", LE, "Y"), ("W", NEQ, "Z")))
    assert compare("X", NEQ, "Y") in cl.derived


def test_empty_set_with_universe():
    cl = closure(ACSet.of([], universe=["X"]))
    assert cl.consistent
    assert set(cl.derived) == {compare("X", LE, "X")}


def test_constants_are_ordered():
    cl = closure(acs(("X", LE, 3), ("X", GE, 5)))
    assert not cl.consistent


@pytest.mark.parametrize("items,want", [
    ([("X", LE, Fraction(5))], True),
    ([("X", LT, "Y"), ("Y", LT, "X")], False),
    ([("X", LE, Fraction(5)), ("X", GE, Fraction(5)), ("X", NEQ, Fraction(5))], False),
])
def test_is_consistent(items, want):
    assert is_consistent(acs(*items)) is want


def test_point_exclusion_confirmed_by_sampling():
    values = [Fraction(k, 4) for k in range(12, 29)]
    assert not any(v <= 5 and v >= 5 and v != 5 for v in values)


def test_implies_examples():
    assert implies(acs(("X", EQ, 5)), compare("X", LE, 5))
    assert not implies(acs(("X", NEQ, "Y"), (5, LE, "Y"), (5, LE, "X")), compare("X", GT, 5))
    assert implies(acs(("X", LE, "Y"), ("Y", LT, 5)), compare("X", LT, 5))


def test_implies_rejects_inconsistent_premises():
    with pytest.raises(InconsistentACs):
        implies(acs(("X", LT, "Y"), ("Y", LT, "X")), compare("X", LE, 1))


def test_two_disjunct_implication():
    lhs = acs(("X", NEQ, "Y"), (5, LE, "Y"), (5, LE, "X"))
    assert implication_holds(lhs, [compare("X", GT, 5), compare("Y", GT, 5)])
    assert not implication_holds(lhs, [compare("X", GT, 5)])
    model = satisfying_assignment([*lhs.comparisons, negate(compare("X", GT, 5))])
    assert model["X"] == 5 and model["Y"] > 5
    assert implication_holds(acs(("X", LE, 5)), [compare("X", LE, 5)])


def test_empty_rhs():
    assert not implication_holds(acs(("X", LE, 5)), [])
    assert implication_holds(acs(("X", LT, "Y"), ("Y", LT, "X")), [])


def test_minimal_form_keeps_both_disjuncts():
    lhs = acs(("X", NEQ, "Y"), (5, LE, "Y"), (5, LE, "X"))
    got = minimal_form(lhs, [compare("X", GT, 5), compare("Y", GT, 5), compare("X", LE, 9)])
    assert got == [compare("X", GT, 5), compare("Y", GT, 5)]


def test_minimal_form_keeps_first():
    assert minimal_form(acs(("X", EQ, 5)), [compare("X", LE, 5), compare("X", GE, 5)]) == [compare("X", LE, 5)]


def test_minimal_form_rejects_false_implication():
    with pytest.raises(ValueError):
        minimal_form(acs(("X", LE, 5)), [compare("X", LE, 4)])


@pytest.mark.parametrize("c,tag,label", [
    (compare("X", LE, 5), "var<=const", "CLSI"),
    (compare(5, LT, "X"), "const<var", "ORSI"),
    (compare("X", NEQ, "Y"), "var!=var", None),
])
def test_classify_ac(c, tag, label):
    t = classify_ac(c)
    assert t.tag == tag
    assert t.si_label == label


def test_greater_than_is_stored_canonically_but_printed_as_written():
    c = compare("X", GE, 5)
    assert c.op == LE and c.lhs == 5
    assert str(c) == "X >= 5"


def test_substitute_keeps_written_direction():
    # regression: substitution used the written operator with the stored sides
    c = compare("X", GT, "Y")
    assert c.substitute({"X": "A", "Y": "B"}) == compare("A", GT, "B")
    assert c.substitute({"X": Fraction(3)}) == compare(3, GT, "Y")


def test_witness_chain_is_minimal():
    s = acs(("X", LT, "Y"), ("Y", LT, "X"), ("Z", LE, 4))
    chain = witness_chain(s)
    assert set(chain) == {compare("X", LT, "Y"), compare("Y", LT, "X")}
    assert witness_chain(acs(("X", LE, 1))) == []


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10_000))
def test_single_disjunct_implication_matches_implies(seed):
    rng = random.Random(seed)
    s = random_acset(rng)
    if not is_consistent(s):
        return
    names = sorted(s.universe)
    target = compare(rng.choice(names), rng.choice((LT, LE, EQ, NEQ, GE, GT)),
                     rng.choice([Fraction(c) for c in (3, 5, 7)] + names))
    if isinstance(target, bool):
        return
    assert implication_holds(s, [target]) == implies(s, target)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10_000))
def test_depth_one_disequality_rule_is_enough(seed):
    s = random_acset(random.Random(seed), n_vars=4, n_comps=6)
    a, b = closure(s, depth_one=True), closure(s, depth_one=False)
    assert a.consistent == b.consistent
    if a.consistent:
        assert {c for c in a.derived if c.op == NEQ} == {c for c in b.derived if c.op == NEQ}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_consistency_agrees_with_satisfying_assignment(seed):
    s = random_acset(random.Random(seed), n_vars=3, n_comps=5)
    if is_consistent(s):
        model = satisfying_assignment(s.comparisons, s.universe)
        assert all(c.holds(model) for c in s.comparisons)
    else:
        with pytest.raises(InconsistentACs):
            satisfying_assignment(s.comparisons, s.universe)
