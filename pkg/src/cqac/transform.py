"""Containment through a Datalog program built from the containing query.

The containing query Q1 (semi-interval comparisons, at most one right SI)
becomes a recursive program over its relations plus a binary ``U`` and unary
``U_op_c`` predicates; the contained query Q2 becomes a comparison-free query
whose ``U`` atoms spell out the order facts of its closure.  Q2 is contained
in Q1 exactly when the program contains that query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .ac_core import EQ, GE, GT, LE, LT, ACSet, closure, compare, si_parts
from .containment import (
    CLSI_HP,
    CQ,
    ONE_AC,
    RSI1_CLOSED,
    RSI1_MIXED_COND,
    FragmentRefusal,
    classify_fragment,
    merge_equalities,
)
from .datalog import DatalogProgram, contains_cq, rule, si_predicate
from .query_model import Atom, CQACQuery, make_query
from .terms import is_const, is_var, term_key

_RIGHT = (GE, GT)
_LEFT = (LE, LT)
_STRICT = (LT, GT)


@dataclass
class TransformContext:
    q1_sis: list  # (variable, op, constant) in query order
    relevant_sis: list  # (op, constant)
    registry: dict = field(default_factory=dict)  # predicate -> (kind, op, constant)

    @property
    def q1_constants(self) -> set:
        return {(op, c) for _, op, c in self.q1_sis}


def _si_implies(op, c, op1, c1) -> bool:
    """Does X op c imply X op1 c1?"""
    if (op in _LEFT) != (op1 in _LEFT):
        return False
    return compare(c, "<=" if op in _LEFT else ">=", c1) is True and (
        c != c1 or op in _STRICT or op1 not in _STRICT)


def _pair_ok(right, left) -> bool:
    """Is X rθ c1 or X lθ c2 valid (with X <= Y, is Y rθ c1 or X lθ c2 implied)?"""
    (rop, c1), (lop, c2) = right, left
    if rop in _STRICT and lop in _STRICT:
        return c1 < c2
    return c1 <= c2


def _merged_sis(q1: CQACQuery, allow_open: bool):
    m = merge_equalities(q1)
    sis = []
    for c in m.comparisons:
        p = si_parts(c)
        if p is None:
            raise FragmentRefusal(f"comparison {c} is not a semi-interval")
        if p[1] in _STRICT and not allow_open:
            raise FragmentRefusal(f"comparison {c} is open; only closed semi-intervals are handled")
        sis.append(p)
    rights = {(op, c) for _, op, c in sis if op in _RIGHT}
    if len(rights) > 1:
        raise FragmentRefusal("more than one right semi-interval: " + ", ".join(
            f"{v}{op}{c}" for v, op, c in sis if op in _RIGHT))
    return m, sis


def transform_context(q1: CQACQuery, relevant_sis=(), allow_open: bool = False) -> TransformContext:
    _, sis = _merged_sis(q1, allow_open)
    ctx = TransformContext(sis, sorted(set(relevant_sis), key=lambda s: (s[0], s[1])))
    for _, op, c in sis:
        ctx.registry[si_predicate("I", op, c)] = ("I", op, c)
        ctx.registry[si_predicate("J", op, c)] = ("J", op, c)
    return ctx


def to_datalog(q1: CQACQuery, relevant_sis=(), allow_open: bool = False) -> DatalogProgram:
    """The program whose query predicate captures Q1 under the coupling semantics.

    ``relevant_sis`` holds (op, constant) pairs; each yields link rules into the
    I predicates of Q1's semi-intervals that it implies.
    """
    m, sis = _merged_sis(q1, allow_open)
    if m.inconsistent:
        raise FragmentRefusal("the containing query has inconsistent comparisons")
    head = m.head
    atoms = list(m.body)
    iatoms = [Atom(si_predicate("I", op, c), (v,)) for v, op, c in sis]
    rules = [rule(head, atoms + iatoms)]
    for k, (v, op, c) in enumerate(sis):
        rules.append(rule(Atom(si_predicate("J", op, c), (v,)), atoms + iatoms[:k] + iatoms[k + 1:]))
    kinds = []
    for _, op, c in sis:
        if (op, c) not in kinds:
            kinds.append((op, c))
    rights = [s for s in kinds if s[0] in _RIGHT]
    lefts = sorted((s for s in kinds if s[0] in _LEFT), key=lambda s: (s[1], s[0]))
    for r in rights:
        for l in lefts:
            if not _pair_ok(r, l):
                continue
            i_l, j_l = si_predicate("I", *l), si_predicate("J", *l)
            i_r, j_r = si_predicate("I", *r), si_predicate("J", *r)
            rules += [
                rule(Atom(i_l, ("X",)), [Atom(j_r, ("X",))]),
                rule(Atom(i_r, ("X",)), [Atom(j_l, ("X",))]),
                rule(Atom(i_l, ("X",)), [Atom(j_r, ("Y",)), Atom("U", ("X", "Y"))]),
                rule(Atom(i_r, ("X",)), [Atom(j_l, ("Y",)), Atom("U", ("Y", "X"))]),
            ]
    rules += link_rules(kinds, relevant_sis)
    return DatalogProgram(rules, head.predicate)


def link_rules(q1_kinds, relevant_sis) -> list:
    out = []
    for op, c in sorted(set(relevant_sis), key=lambda s: (s[1], s[0])):
        for op1, c1 in q1_kinds:
            if _si_implies(op, c, op1, c1):
                r = rule(Atom(si_predicate("I", op1, c1), ("X",)), [Atom(si_predicate("U", op, c), ("X",))])
                if r not in out:
                    out.append(r)
    return out


def to_cq(q2: CQACQuery, constants=(), strict: bool = False) -> CQACQuery:
    """Q2 with its comparisons replaced by U atoms.

    Equalities are merged first.  The closure of Q2's comparisons is taken over
    Q2's constants plus ``constants``; each closed semi-interval X op c becomes
    U_op_c(X) (with ``strict`` the open ones too), and each X <= Y between
    distinct terms of the relational atoms becomes U(X,Y).
    """
    consts = set(q2.constants) | set(constants)
    m = merge_equalities(q2, consts)
    if m.inconsistent:
        return m
    cl = closure(ACSet.of(m.comparisons, universe=m.variables, constants=consts))
    terms = []
    for a in m.body:
        for t in a.terms:
            if t not in terms:
                terms.append(t)
    sis = []
    for c in cl.sorted():
        p = si_parts(c)
        if p is not None and (strict or p[1] not in _STRICT):
            sis.append(p)
    pos = {t: i for i, t in enumerate(terms)}
    sis.sort(key=lambda p: (pos.get(p[0], len(pos)), p[2], p[1]))
    extra = [Atom(si_predicate("U", op, k), (v,)) for v, op, k in sis]
    # constants in atoms satisfy semi-intervals outright
    for k in terms:
        if not is_const(k):
            continue
        for c in sorted(consts):
            for op in (LE, GE, LT, GT):
                if (strict or op not in _STRICT) and compare(k, op, c) is True:
                    extra.append(Atom(si_predicate("U", op, c), (k,)))
    tset = set(terms)
    ordered = sorted(terms, key=term_key)
    for s in ordered:
        for t in ordered:
            if s == t or s not in tset or t not in tset:
                continue
            if is_const(s) and is_const(t):
                if s < t:
                    extra.append(Atom("U", (s, t)))
            elif cl.contains(compare(s, LE, t)) or cl.contains(compare(s, LT, t)):
                extra.append(Atom("U", (s, t)))
    out = []
    for a in extra:
        if a not in out:
            out.append(a)
    return make_query(m.head, list(m.body) + out, [], check=False)


def relevant_from(q2cq: CQACQuery) -> list:
    """(op, constant) pairs of the U_op_c atoms in a transformed query."""
    from .datalog import parse_si_predicate

    out = []
    for a in q2cq.body:
        p = parse_si_predicate(a.predicate)
        if p is not None and p[0] == "U" and (p[1], p[2]) not in out:
            out.append((p[1], p[2]))
    return out


def booleanize(q: CQACQuery, name: str = "hd") -> CQACQuery:
    """Move the head into a body atom so containment mappings must preserve it."""
    return make_query(Atom(q.head.predicate, ()), list(q.body) + [Atom(name, q.head.terms)],
                      list(q.comparisons) + ([False] if q.inconsistent else []), check=False)


def containment_via_transform(q1: CQACQuery, q2: CQACQuery, use_closure: bool = True) -> bool:
    """Decide q2 ⊑ q1 by evaluating the program of q1 on the frozen transformed q2."""
    frag = classify_fragment(q1, q2, use_closure)
    strict = frag.tag == RSI1_MIXED_COND
    if frag.tag not in (CQ, ONE_AC, CLSI_HP, RSI1_CLOSED, RSI1_MIXED_COND):
        raise FragmentRefusal(f"fragment {frag.tag} is outside the transformation's scope")
    if frag.tag == ONE_AC and any(si_parts(c) is None or c.op in _STRICT for c in q1.comparisons if c.op != EQ):
        strict = True
        if any(si_parts(c) is None for c in q1.comparisons if c.op != EQ):
            raise FragmentRefusal("the single comparison is not a semi-interval")
    consts = set(q1.constants) | set(q2.constants)
    m2 = merge_equalities(q2, consts)
    if m2.inconsistent:
        return True
    m1 = merge_equalities(q1, consts)
    if m1.inconsistent:
        return False
    if m1.head.arity != m2.head.arity:
        return False
    b1, b2 = booleanize(m1), booleanize(m2)
    q2cq = to_cq(b2, consts, strict)
    prog = to_datalog(b1, relevant_from(q2cq), allow_open=strict)
    return contains_cq(prog, q2cq)
