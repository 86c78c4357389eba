import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqac.ac_core import InconsistentACs
from cqac.corpus import PREDICATES, random_query, random_view
from cqac.query_model import (
    Atom,
    Database,
    ParseError,
    SafetyError,
    evaluate,
    expand,
    is_normalized,
    normalize,
    parse,
    parse_database,
    parse_query,
    parse_views,
    rectify,
    views_of,
)


def test_parse_rule_with_rationals_and_all_operators():
    q = parse_query("q(X) :- a(X,Y), X < 1/2, Y <= 0.75, X = Y, X != 3, Y >= -2, Y > -3.")
    assert q.head == Atom("q", ("X",))
    assert len(q.comparisons) == 6
    assert Fraction(1, 2) in q.constants and Fraction(3, 4) in q.constants


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as e:
        parse_query("q() :- a(X,\n  ).")
    assert e.value.line == 2


def test_lowercase_variable_is_rejected():
    with pytest.raises(ParseError):
        parse_query("q() :- a(x).")


def test_unsafe_head():
    with pytest.raises(SafetyError):
        parse_query("q(Z) :- a(X,Y).")


def test_inconsistent_query_rejected_at_parse():
    with pytest.raises(InconsistentACs):
        parse_query("q() :- a(X,Y), X < 3, X > 5.")


def test_arity_clash():
    with pytest.raises(ParseError):
        parse("q() :- a(X,Y), a(X).")


def test_workspace_keeps_facts_and_rules_apart():
    ws = parse("v(X) :- a(X,Y). a(1,2). a(2,3).")
    assert len(ws.queries) == 1 and len(ws.facts) == 2
    with pytest.raises(ParseError):
        parse_database("v(X) :- a(X,Y).")


def test_normalize_lifts_constants():
    q = parse_query("q() :- a(X,5), X < 5.")
    n = normalize(q)
    assert str(n) == "q() :- a(X,Z_1), X < 5, Z_1 = 5."
    assert is_normalized(n)


def test_normalize_repeated_variable():
    n = normalize(parse_query("q() :- a(X,Y), a(Y,X)."))
    assert str(n) == "q() :- a(X,Y), a(Y_1,X_1), Y_1 = Y, X_1 = X."


def test_normalized_query_is_unchanged():
    q = parse_query("q() :- a(X,Y), X < Y.")
    assert normalize(q) is q


def test_evaluate_repeated_variable():
    # regression: a repeated variable must bind to equal values only
    q = parse_query("q(X) :- a(X,X).")
    db = parse_database("a(1,1). a(1,2). a(3,3).")
    assert evaluate(q, db) == {(Fraction(1),), (Fraction(3),)}


def test_evaluate_comparisons_and_constants():
    q = parse_query("q(X) :- a(X,Y), b(Y), X < Y, Y != 4.")
    db = parse_database("a(1,2). a(3,2). a(1,4). b(2). b(4).")
    assert evaluate(q, db) == {(Fraction(1),)}


def test_evaluate_boolean():
    q = parse_query("q() :- a(X,5), X < 5.")
    assert evaluate(q, parse_database("a(4,5).")) == {()}
    assert evaluate(q, parse_database("a(6,5).")) == set()


def test_expand_renames_nondistinguished_variables_per_use():
    views = parse_views("v(X) :- a(X,Y), Y <= 3.")
    r = parse_query("r() :- v(A), v(B).")
    e = expand(r, views)
    assert str(e) == "r() :- a(A,Y_1), a(B,Y_2), Y_1 <= 3, Y_2 <= 3."


def test_expand_binds_head_constants():
    views = parse_views("v(X,5) :- a(X,Y).")
    e = expand(parse_query("r(A) :- v(A,B)."), views)
    assert any(str(c) == "B = 5" or str(c) == "5 = B" for c in e.comparisons)


def test_rectify_adds_expansion_comparisons():
    views = parse_views("V2(Y,Z) :- p(X), s(Y,Z), Y <= X, X <= Z.")
    r = parse_query("R(Y1) :- V2(Y1,Z1), V2(Y2,Z2), Z1 <= Y2, Y1 >= Z2, Y1 < 4.")
    got = {str(c) for c in rectify(r, views).comparisons}
    assert {"Y1 <= Z1", "Y2 <= Z2"} <= got


def test_rectify_without_view_comparisons_is_identity():
    views = parse_views("v(X,Y) :- a(X,Y).")
    r = parse_query("r() :- v(A,B), A < 3.")
    assert rectify(r, views).comparisons == r.comparisons


def test_rectify_gains_chain():
    views = parse_views("V1(X,Y) :- a(X,Y), X <= Y.")
    got = {str(c) for c in rectify(parse_query("R() :- V1(A,B), V1(B,C)."), views).comparisons}
    assert {"A <= B", "B <= C", "A <= C"} <= got


def _random_db(rng, values=(2, 3, 4, 5, 6, 7, 8), size=6):
    facts = set()
    for _ in range(size):
        pred, arity = rng.choice(PREDICATES)
        facts.add(Atom(pred, tuple(Fraction(rng.choice(values)) for _ in range(arity))))
    return Database(frozenset(facts))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000))
def test_normalize_preserves_semantics(seed):
    rng = random.Random(seed)
    q = random_query(rng, head_arity=rng.randint(0, 1))
    db = _random_db(rng)
    assert evaluate(q, db) == evaluate(normalize(q), db)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_expansion_matches_view_evaluation(seed):
    rng = random.Random(seed)
    views = [v for v in (random_view(rng, "V1"), random_view(rng, "V2")) if not v.inconsistent]
    if not views:
        return
    body = [Atom(v.name, tuple(rng.choice(["A", "B", "C"]) for _ in range(v.head.arity))) for v in views]
    used = sorted({t for a in body for t in a.terms})
    r = parse_query(f"r({','.join(used[:1])}) :- {', '.join(map(str, body))}.")
    db = _random_db(rng, size=8)
    inst = views_of(db, views)
    assert evaluate(r, inst) == evaluate(expand(r, views), db)
    assert evaluate(rectify(r, views), inst) == evaluate(r, inst)
