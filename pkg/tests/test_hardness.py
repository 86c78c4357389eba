import random

import pytest

from cqac.ac_core import classify_ac
from cqac.containment import canonical_oracle_check
from cqac.hardness_gen import (
    INVENTORY,
    NEQ_ONLY,
    VARIANTS,
    FormulaError,
    eval_pi2sat,
    parse_formula,
    random_formula,
    reduce_pi2sat,
)


def test_parse_round_trip():
    f = parse_formula("(forall (p1 p2) (exists (q1) (or p1 (and p2 (not q1)))))")
    assert f.universal_vars == ("p1", "p2") and f.existential_vars == ("q1",)
    assert parse_formula(str(f)) == f


def test_quantifiers_may_be_omitted():
    f = parse_formula("(exists (q1) q1)")
    assert f.universal_vars == () and eval_pi2sat(f)


@pytest.mark.parametrize("text", [
    "(forall (p) (exists (q) (and p r)))",
    "(forall (p p) p)",
    "(forall (p) (exists (q) (and p q)",
])
def test_malformed_formulas(text):
    with pytest.raises(FormulaError):
        parse_formula(text)


@pytest.mark.parametrize("text,want", [
    ("(forall (p) (exists (q) (and p q)))", False),
    ("(forall (p) (or p (not p)))", True),
    ("(forall (p) (exists (q) (or (and p q) (and (not p) (not q)))))", True),
])
def test_eval(text, want):
    assert eval_pi2sat(parse_formula(text)) is want


def _ac_tags(q):
    return {classify_ac(c).tag for c in q.comparisons}


@pytest.mark.parametrize("variant", VARIANTS)
def test_inventory_matches_variant(variant):
    f = parse_formula("(forall (p1 p2) (exists (q1) (or p1 (and p2 q1))))")
    q1, q2 = reduce_pi2sat(f, variant)
    contained, containing = INVENTORY[variant]
    assert _ac_tags(q2) == contained
    assert _ac_tags(q1) == containing


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("text", [
    "(forall (p) (exists (q) (and p q)))",
    "(forall (p) (exists (q) (or p q)))",
])
def test_small_reductions(variant, text):
    f = parse_formula(text)
    q1, q2 = reduce_pi2sat(f, variant)
    assert canonical_oracle_check(q1, q2, bound=12).holds == eval_pi2sat(f)


def test_unknown_variant():
    with pytest.raises(ValueError):
        reduce_pi2sat(parse_formula("(forall (p) p)"), "nope")


def test_random_formula_shape():
    rng = random.Random(0)
    for _ in range(20):
        f = random_formula(rng, 2, 1, 5)
        assert len(f.universal_vars) == 2 and len(f.existential_vars) == 1
        q1, q2 = reduce_pi2sat(f, NEQ_ONLY)
        assert q1.is_boolean and q2.is_boolean
