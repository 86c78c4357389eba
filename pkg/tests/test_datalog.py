import random
from fractions import Fraction

import pytest

from cqac.ac_core import EQ, LE, LT, NEQ, compare
from cqac.datalog import (
    DatalogProgram,
    NestingError,
    active_domain,
    contains_cq,
    derive,
    evaluate_program,
    expansions_up_to_depth,
    format_program,
    parse_program,
    parse_si_predicate,
    rule,
    si_predicate,
)
from cqac.query_model import Atom, Database, ParseError, SafetyError, evaluate, parse_database, parse_query
from cqac.terms import Func

TC = "@query T. T(X,Y) :- E(X,Y). T(X,Z) :- T(X,Y), E(Y,Z)."


def test_transitive_closure():
    p = parse_program(TC)
    got = evaluate_program(p, parse_database("E(1,2). E(2,3). E(3,4)."))
    assert len(got) == 6 and (Fraction(1), Fraction(4)) in got


def test_format_round_trip():
    p = parse_program(TC)
    assert str(parse_program(format_program(p))) == str(p)


def test_si_predicate_names():
    assert si_predicate("I", LE, Fraction(8)) == "I_le_8"
    assert parse_si_predicate("U_gt_m1o2") == ("U", ">", Fraction(-1, 2))
    assert parse_si_predicate(si_predicate("J", ">=", Fraction(-3, 4)))[2] == Fraction(-3, 4)
    assert parse_si_predicate("e") is None


def test_unsafe_rule_rejected():
    with pytest.raises(SafetyError):
        parse_program("@query T. T(X,Y) :- E(X,X).")


def test_unknown_declaration():
    with pytest.raises(ParseError):
        parse_program("@magic T. T(X) :- E(X).")


def test_builtins_cover_the_active_domain():
    p = parse_program("@builtin U, U_le_5. @query Q. Q(X) :- E(X,Y), U(X,Y), U_le_5(Y).")
    got = evaluate_program(p, parse_database("E(1,2). E(3,1). E(4,6)."))
    assert got == {(Fraction(1),)}


def test_program_constants_include_si_predicates():
    # regression: constants named only by a predicate such as U_le_5 were missed
    p = parse_program("@builtin U_le_5. @query R. R() :- V(X), U_le_5(X).")
    assert Fraction(5) in p.constants
    assert Fraction(5) in active_domain(p, Database())


def test_functional_terms_are_not_answers():
    p = DatalogProgram([rule(Atom("e", ("X", Func("f", ("X",)))), [Atom("v", ("X",))]),
                        rule(Atom("q", ("X", "Y")), [Atom("e", ("X", "Y"))]),
                        rule(Atom("r", ("X",)), [Atom("e", ("X", "Y"))])], "q")
    db = parse_database("v(1).")
    assert evaluate_program(p, db) == set()
    assert derive(p, db)["r"] == {(Fraction(1),)}


def test_nested_constructors_rejected():
    p = DatalogProgram([rule(Atom("e", ("X", Func("f", ("X",)))), [Atom("e", ("Y", "X"))]),
                        rule(Atom("q", ()), [Atom("e", ("X", "Y"))])], "q")
    with pytest.raises(NestingError):
        derive(p, parse_database("e(1,2)."))


def test_contains_cq_examples():
    assert contains_cq(parse_program("@query q. q() :- e(X)."), parse_query("q() :- e(A)."))
    without_links = parse_program("""@query q.
q() :- e(X,Y), e(Y,Z), I_ge_5(X), I_le_8(Z).
J_ge_5(X) :- e(X,Y), e(Y,Z), I_le_8(Z).
J_le_8(Z) :- e(X,Y), e(Y,Z), I_ge_5(X).
I_le_8(X) :- J_ge_5(X).
I_ge_5(X) :- J_le_8(X).""")
    q2cq = parse_query("q() :- e(A,B), e(B,C), e(C,D), e(D,E), U_ge_6(A), U_le_7(E).")
    assert not contains_cq(without_links, q2cq)


def test_expansions_of_transitive_closure():
    p = parse_program(TC)
    exps = expansions_up_to_depth(p, 3)
    assert [len(e.body) for e in exps] == [1, 2, 3]


def test_expansions_turn_builtins_into_comparisons():
    p = parse_program("@builtin U. @query Q. Q() :- E(X,Y), U(X,Y).")
    (e,) = expansions_up_to_depth(p, 1)
    assert str(e) == "Q() :- E(X,Y), X <= Y."


# ---------------------------------------------------------------------------
# random programs

EDB = (("e", 2), ("f", 1))
IDB = (("p", 2), ("r", 1), ("s", 2))


def random_program(rng: random.Random, with_acs: bool = False) -> DatalogProgram:
    preds = EDB + IDB
    rules = []
    for head_pred, arity in IDB:
        for _ in range(rng.randint(1, 2)):
            names = ["X", "Y", "Z", "W"]
            body = [Atom(pr, tuple(rng.choice(names) for _ in range(ar)))
                    for pr, ar in (rng.choice(preds) for _ in range(rng.randint(1, 3)))]
            if not any(a.predicate in ("e", "f") for a in body):
                body.append(Atom("e", ("X", "Y")))
            bvars = sorted({v for a in body for v in a.variables})
            head = Atom(head_pred, tuple(rng.choice(bvars) for _ in range(arity)))
            comps = []
            if with_acs and rng.random() < 0.6:
                c = compare(rng.choice(bvars), rng.choice((LT, LE, EQ, NEQ)),
                            rng.choice(bvars + [Fraction(2), Fraction(3)]))
                if not isinstance(c, bool):
                    comps.append(c)
            rules.append(rule(head, body, comps))
    rules.append(rule(Atom("q", ("X",)), [Atom("p", ("X", "Y")), Atom("r", ("Y",))]))
    return DatalogProgram(rules, "q")


def random_db(rng: random.Random) -> Database:
    vals = [Fraction(v) for v in range(1, 6)]
    facts = {Atom("e", (rng.choice(vals), rng.choice(vals))) for _ in range(rng.randint(2, 8))}
    facts |= {Atom("f", (rng.choice(vals),)) for _ in range(rng.randint(0, 3))}
    return Database(frozenset(facts))


def test_semi_naive_equals_naive():
    rng = random.Random(0)
    for _ in range(100):
        p, db = random_program(rng, with_acs=rng.random() < 0.5), random_db(rng)
        assert derive(p, db) == derive(p, db, naive=True)


_AC_PREDS = {LT: "lt", LE: "le", EQ: "eq", NEQ: "ne"}


def _materialize(p: DatalogProgram, db: Database):
    """The AC-free image of p plus stored extensions of its comparisons."""
    rules = []
    for r in p.rules:
        extra = []
        for c in r.comparisons:
            extra.append(Atom(_AC_PREDS[c.op], (c.lhs, c.rhs)))
        rules.append(rule(r.head, list(r.body) + extra))
    dom = active_domain(p, db)
    facts = set(db.facts)
    for x in dom:
        for y in dom:
            for op, name in _AC_PREDS.items():
                if compare(x, op, y) is True:
                    facts.add(Atom(name, (x, y)))
    return DatalogProgram(rules, p.query_predicate), Database(frozenset(facts))


def test_comparisons_equal_materialized_builtins():
    rng = random.Random(1)
    for _ in range(60):
        p, db = random_program(rng, with_acs=True), random_db(rng)
        p2, db2 = _materialize(p, db)
        assert evaluate_program(p, db) == evaluate_program(p2, db2)


def test_expansions_are_sound():
    rng = random.Random(2)
    for _ in range(30):
        p = random_program(rng, with_acs=True)
        exps = expansions_up_to_depth(p, 3)
        for _ in range(5):
            db = random_db(rng)
            want = evaluate_program(p, db)
            for e in exps:
                assert evaluate(e, db) <= want
