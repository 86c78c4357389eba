"""Containment of CQAC queries.

``entailment_check`` decides Q2 ⊑ Q1 symbolically over containment mappings of
the normalized queries; ``canonical_oracle_check`` decides it semantically by
evaluating both queries on every canonical database of Q2.  ``fast_contains``
holds the specialised procedures for the fragments where a single mapping or a
short chain of mappings is a certificate.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .ac_core import (
    EQ,
    LE,
    LT,
    NEQ,
    ACSet,
    Comparison,
    _interpolate,
    classify_ac,
    closure,
    compare,
    implication_holds,
    is_consistent,
    negate,
    satisfying_assignment,
    si_parts,
)
from .query_model import (
    Atom,
    CQACQuery,
    Database,
    evaluate,
    is_normalized,
    make_query,
    normalize,
    subst_comparison,
    subst_term,
)
from .terms import interned, is_const, is_func, is_var

DEFAULT_SCALE_BOUND = 8


class ScaleRefusal(RuntimeError):
    """The instance is larger than the configured canonical-enumeration bound."""


class FragmentRefusal(ValueError):
    """A specialised procedure was asked to run outside its fragment."""


class NoMapping(ValueError):
    """No containment mapping exists, so containment fails outright."""


def scale_bound() -> int:
    return int(os.environ.get("CQAC_SCALE_BOUND", DEFAULT_SCALE_BOUND))


@dataclass(frozen=True)
class ContainmentMapping:
    assignment: tuple  # sorted (variable, term) pairs

    @staticmethod
    def of(d: dict) -> "ContainmentMapping":
        return ContainmentMapping(tuple(sorted(d.items(), key=lambda kv: kv[0])))

    def as_dict(self) -> dict:
        return dict(self.assignment)

    def __getitem__(self, v):
        return self.as_dict()[v]

    def __str__(self) -> str:
        from .terms import term_str

        return "{" + ", ".join(f"{k}->{term_str(v)}" for k, v in self.assignment) + "}"


@dataclass
class ContainmentResult:
    holds: bool
    witness: object = None  # list of mappings, or a counterexample Database
    method: str = ""
    info: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds


# ---------------------------------------------------------------------------
# mappings


def homomorphisms(q1: CQACQuery, q2: CQACQuery, match_head: bool = True) -> list:
    """Body homomorphisms from q1 into q2 in lexicographic target-index order.

    With ``match_head`` the head of q1 must map literally onto the head of q2.
    """
    if match_head and q1.head.arity != q2.head.arity:
        return []
    start = {}
    if match_head:
        for a, b in zip(q1.head.terms, q2.head.terms):
            if is_var(a):
                if start.setdefault(a, b) != b:
                    return []
            elif a != b:
                return []
    by_pred = {}
    for j, a in enumerate(q2.body):
        by_pred.setdefault(a.predicate, []).append((j, a))
    out = []
    atoms = q1.body

    def rec(k, assign):
        if k == len(atoms):
            out.append(dict(assign))
            return
        a = atoms[k]
        for _, b in by_pred.get(a.predicate, ()):
            if b.arity != a.arity:
                continue
            new = dict(assign)
            ok = True
            for s, t in zip(a.terms, b.terms):
                if is_var(s):
                    if new.setdefault(s, t) != t:
                        ok = False
                        break
                elif s != t:
                    ok = False
                    break
            if ok:
                rec(k + 1, new)

    rec(0, start)
    return out


def _head_links(q1n: CQACQuery, q2n: CQACQuery, mu: dict):
    """Equalities tying the image of q1's head to q2's head, plus the head substitution."""
    eqs, sub = [], {}
    for a, b in zip(q1n.head.terms, q2n.head.terms):
        if is_var(a):
            eqs.append(compare(mu[a], EQ, b))
            sub.setdefault(a, b)
        else:
            eqs.append(compare(a, EQ, b) if is_var(b) else a == b)
    return eqs, sub


def enumerate_mappings(q1: CQACQuery, q2: CQACQuery) -> list:
    """Containment mappings between the normalized queries.

    Normalized heads are matched through equalities (the image of each q1 head
    variable must equal the matching q2 head term), so a body homomorphism is
    kept unless a head position pairs two different constants.
    """
    q1n = q1 if is_normalized(q1) else normalize(q1)
    q2n = q2 if is_normalized(q2) else normalize(q2)
    if q1n.head.arity != q2n.head.arity:
        return []
    out = []
    for mu in homomorphisms(q1n, q2n, match_head=False):
        eqs, _ = _head_links(q1n, q2n, mu)
        if any(e is False for e in eqs):
            continue
        out.append(ContainmentMapping.of(mu))
    return out


def _disjunct(q1n, q2n, mu: dict) -> list:
    """mu(beta1) together with the head equalities, as a list (False if unsatisfiable)."""
    eqs, sub = _head_links(q1n, q2n, mu)
    image = dict(mu)
    image.update(sub)
    items = [e for e in eqs]
    items += [subst_comparison(c, image) for c in q1n.comparisons]
    if q1n.inconsistent:
        items.append(False)
    if any(x is False for x in items):
        return None
    out = []
    for x in items:
        if x is True or x in out:
            continue
        if x.lhs == x.rhs:
            if x.op in (LE, EQ):
                continue
            return None
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# entailment


def entails(lhs, disjuncts: list):
    """Decide lhs ⇒ OR_i AND(disjuncts[i]).

    The entailment is distributed into containment implications (one AC per
    disjunct); each branch conjoins the negations of the chosen ACs and is
    cut as soon as it turns inconsistent.  Returns None when the entailment
    holds, otherwise a consistent set of comparisons falsifying every disjunct.
    """
    base = frozenset(lhs.comparisons if isinstance(lhs, ACSet) else lhs)
    if isinstance(lhs, ACSet) and lhs.has_false:
        return None
    ds = [tuple(d) for d in disjuncts if d is not None]
    if any(len(d) == 0 for d in ds):
        return None
    memo = {}

    def search(cur: frozenset, remaining: frozenset):
        key = (cur, remaining)
        if key in memo:
            return memo[key]
        res = _search(cur, remaining)
        memo[key] = res
        return res

    def _search(cur, remaining):
        if not is_consistent(cur):
            return None
        if not remaining:
            return cur
        best, best_live = None, None
        for i in remaining:
            live = []
            for a in ds[i]:
                na = negate(a)
                if na in cur:
                    live = None  # already falsified, no branching needed
                    break
                if is_consistent(cur | {na}):
                    live.append(na)
            if live is None:
                continue
            if not live:
                return None
            if best_live is None or len(live) < len(best_live):
                best, best_live = i, live
        if best is None:
            return cur
        rest = remaining - {best}
        drop = frozenset(i for i in rest if any(negate(a) in cur for a in ds[i]))
        for na in best_live:
            res = search(cur | {na}, rest - drop)
            if res is not None:
                return res
        return None

    return search(base, frozenset(range(len(ds))))


def entailment_check(q1: CQACQuery, q2: CQACQuery) -> ContainmentResult:
    """Is q2 contained in q1?  Decided on the containment entailment."""
    q1n, q2n = normalize(q1), normalize(q2)
    if q2n.inconsistent or not is_consistent(q2n.acs):
        return ContainmentResult(True, [], "entailment", {"reason": "contained query is empty"})
    maps = enumerate_mappings(q1n, q2n)
    disjuncts = [_disjunct(q1n, q2n, m.as_dict()) for m in maps]
    counter = entails(q2n.acs, disjuncts)
    if counter is None:
        return ContainmentResult(True, maps, "entailment", {"mappings": len(maps)})
    db = _database_from_model(q2, q2n, counter)
    return ContainmentResult(False, db, "entailment", {"mappings": len(maps)})


def _database_from_model(q2: CQACQuery, q2n: CQACQuery, comps) -> Database:
    model = satisfying_assignment(comps, q2n.variables)
    return Database(frozenset(a.substitute(model) for a in q2.body))


# ---------------------------------------------------------------------------
# canonical databases


def iter_canonical_databases(q2: CQACQuery, q1: CQACQuery = None, extra_constants=()) -> Iterator:
    """Yield (assignment, Database) for every canonical database of q2.

    The relevant constants are those of q1 and q2 (plus ``extra_constants``).
    Assignments violating q2's comparisons are skipped.
    """
    if q2.inconsistent:
        return
    variables = list(q2.variables)
    consts = set(q2.constants) | set(extra_constants)
    if q1 is not None:
        consts |= set(q1.constants)
    consts = sorted(consts)
    templates = [(a.predicate, a.terms, any(is_func(t) for t in a.terms)) for a in q2.body]
    for assign in order_assignments(variables, consts, q2.comparisons):
        facts = frozenset(
            Atom(p, tuple(subst_term(t, assign) for t in ts)) if nested
            else Atom(p, tuple(assign.get(t, t) if is_var(t) else t for t in ts))
            for p, ts, nested in templates)
        yield assign, Database(facts)


def order_assignments(variables: list, consts: list, comparisons) -> Iterator:
    """Representative assignments for all orderings of variables among constants."""
    n, k = len(variables), len(consts)
    m = n + k
    idx = {v: i for i, v in enumerate(variables)}
    idx.update({c: n + j for j, c in enumerate(consts)})
    req_lt = np.zeros((m, m), dtype=np.bool_)
    req_le = np.zeros((m, m), dtype=np.bool_)
    req_ne = np.zeros((m, m), dtype=np.bool_)
    for c in comparisons:
        if c is True:
            continue
        if c is False:
            return
        a, b = idx[c.lhs], idx[c.rhs]
        if c.op == LT:
            req_lt[a, b] = True
        elif c.op == LE:
            req_le[a, b] = True
        elif c.op == EQ:
            req_le[a, b] = req_le[b, a] = True
        else:
            req_ne[a, b] = req_ne[b, a] = True
    rows = kernels.ordered_partitions(n, k, req_lt, req_le, req_ne).tolist()
    values = {}  # block values depend only on where the constants sit
    for row in rows:
        key = tuple(row[n:])
        vals = values.get(key)
        if vals is None:
            seq = [None] * row[m]
            for j, c in enumerate(consts):
                seq[row[n + j]] = c
            vals = values[key] = [interned(x) for x in _interpolate(seq)]
        yield {v: vals[row[i]] for i, v in enumerate(variables)}


def canonical_databases(q2: CQACQuery, q1: CQACQuery = None) -> list:
    return [db for _, db in iter_canonical_databases(q2, q1)]


def canonical_oracle_check(q1: CQACQuery, q2: CQACQuery, bound: int = None) -> ContainmentResult:
    """Is q2 contained in q1?  Decided by evaluation on canonical databases of q2."""
    bound = scale_bound() if bound is None else bound
    size = len(q2.variables) + len(q1.constants | q2.constants)
    if size > bound:
        raise ScaleRefusal(f"{size} variables and constants exceed the bound {bound}")
    count = 0
    for _, db in iter_canonical_databases(q2, q1):
        count += 1
        got2 = evaluate(q2, db)
        got1 = evaluate(q1, db)
        if not got2 <= got1:
            return ContainmentResult(False, db, "oracle", {"databases": count})
    return ContainmentResult(True, None, "oracle", {"databases": count})


# ---------------------------------------------------------------------------
# equality merging (used where normalization is unnecessary)


def merge_equalities(q: CQACQuery, constants=()) -> CQACQuery:
    """Replace variables that the comparisons force equal by one representative.

    A class containing a constant is replaced by that constant; otherwise by
    its first variable in query order.  Trivial comparisons are dropped.
    """
    if q.inconsistent:
        return q
    cl = closure(ACSet.of(q.comparisons, universe=q.variables, constants=set(q.constants) | set(constants)))
    if not cl.consistent:
        return make_query(q.head, q.body, list(q.comparisons) + [False], check=False)
    order = {v: i for i, v in enumerate(q.variables)}
    rep = {}
    for c in cl.derived:
        if c.op != EQ:
            continue
        a, b = c.lhs, c.rhs
        for x, y in ((a, b), (b, a)):
            if is_var(x):
                cur = rep.get(x, x)
                cand = y
                if _better(cand, cur, order):
                    rep[x] = cand
    sub = {v: r for v, r in rep.items() if r != v}
    if not sub:
        return q
    comps = []
    for c in q.comparisons:
        s = subst_comparison(c, sub)
        if s is True:
            continue
        if s is not False and s.lhs == s.rhs and s.op in (LE, EQ):
            continue
        comps.append(s)
    return make_query(q.head.substitute(sub), [a.substitute(sub) for a in q.body], comps, check=False)


def _better(a, b, order) -> bool:
    if is_const(b):
        return False
    if is_const(a):
        return True
    return order.get(a, 1 << 30) < order.get(b, 1 << 30)


def _clean(items):
    out = []
    for x in items:
        if x is True or x in out:
            continue
        if x is False:
            return None
        if x.lhs == x.rhs:
            if x.op in (LE, EQ):
                continue
            return None
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# fragments


CQ = "CQ"
ONE_AC = "ONE_AC"
CLSI_HP = "CLSI_HP"
LSI_HP_COND = "LSI_HP_COND"
RSI1_CLOSED = "RSI1_CLOSED"
RSI1_MIXED_COND = "RSI1_MIXED_COND"
GENERAL = "GENERAL"

FRAGMENTS = (CQ, ONE_AC, CLSI_HP, LSI_HP_COND, RSI1_CLOSED, RSI1_MIXED_COND, GENERAL)


@dataclass(frozen=True)
class FragmentClass:
    tag: str
    reasons: tuple = ()

    def __str__(self):
        return self.tag


def _si_inventory(comparisons):
    """Split comparisons into (equations, SIs as (var, op, const), others)."""
    eqs, sis, other = [], [], []
    for c in comparisons:
        if c.op == EQ:
            eqs.append(c)
            continue
        p = si_parts(c)
        if p is None:
            other.append(c)
        else:
            sis.append(p)
    return eqs, sis, other


def _neq_condition(q1: CQACQuery, q2: CQACQuery, use_closure: bool, consts) -> bool:
    """For X != Y in q2 and a constant c0 related to both, either c0 is not
    related to both by closed ACs in q2, or c0 is not in an open AC of q1."""
    if use_closure:
        c2 = closure(ACSet.of(q2.comparisons, universe=q2.variables, constants=consts)).derived
        c1 = closure(ACSet.of(q1.comparisons, universe=q1.variables, constants=consts)).derived
    else:
        c2, c1 = set(q2.comparisons), set(q1.comparisons)
    open1 = set()
    for c in c1:
        if c.op in (LT, NEQ):
            open1 |= c.constants
    rel, closed_rel = {}, {}
    for c in c2:
        if c.lhs == c.rhs:
            continue
        if is_var(c.lhs) != is_var(c.rhs):
            v = c.lhs if is_var(c.lhs) else c.rhs
            k = c.rhs if is_var(c.lhs) else c.lhs
            rel.setdefault(k, set()).add(v)
            if c.op in (LE, EQ):
                closed_rel.setdefault(k, set()).add(v)
    for c in c2:
        if c.op != NEQ or not (is_var(c.lhs) and is_var(c.rhs)):
            continue
        x, y = c.lhs, c.rhs
        for k, vs in rel.items():
            if x in vs and y in vs:
                cl = closed_rel.get(k, set())
                if x in cl and y in cl and k in open1:
                    return False
    return True


def classify_fragment(q1: CQACQuery, q2: CQACQuery, use_closure: bool = True) -> FragmentClass:
    """Which row of the complexity table applies to deciding q2 ⊑ q1."""
    return _classify(q1, q2, use_closure, True)


def _classify(q1, q2, use_closure, one_ac_row) -> FragmentClass:
    consts = set(q1.constants) | set(q2.constants)
    if not q1.comparisons:
        return FragmentClass(CQ)
    q1n = normalize(q1)
    eqs, sis, other = _si_inventory(q1.comparisons)
    if one_ac_row and len(q1.comparisons) - len(eqs) <= 1:
        return FragmentClass(ONE_AC)
    neq_ok = _neq_condition(q1, q2, use_closure, consts)
    if other:
        return FragmentClass(GENERAL, ("var-var comparison in the containing query",))
    lsis = [s for s in sis if s[1] in (LT, LE)]
    rsis = [s for s in sis if s[1] in (">", ">=")]
    if not rsis:
        if all(s[1] == LE for s in lsis):
            return FragmentClass(CLSI_HP)
        if not neq_ok:
            return FragmentClass(GENERAL, ("!= condition fails",))
        eq_consts = set()
        for c in q1n.comparisons:
            if c.op == EQ:
                eq_consts |= c.constants
        open_lsi = {s[2] for s in lsis if s[1] == LT}
        c2 = _closed_si_constants(q2, use_closure, consts, LE)
        shared = eq_consts & open_lsi & c2
        if shared:
            return FragmentClass(GENERAL, ("constant shared by an equation, an open LSI and a closed LSI",))
        return FragmentClass(LSI_HP_COND)
    rsi_set = {s for s in rsis}
    if len(rsi_set) > 1:
        return FragmentClass(GENERAL, ("more than one RSI",))
    closed = all(s[1] in (LE, ">=") for s in sis)
    if closed:
        return FragmentClass(RSI1_CLOSED)
    if not neq_ok:
        return FragmentClass(GENERAL, ("!= condition fails",))
    rc = {s[2] for s in rsis}
    lc = {s[2] for s in lsis}
    if rc & lc:
        return FragmentClass(GENERAL, ("RSI constant shared with an LSI",))
    open_consts = {s[2] for s in sis if s[1] in (LT, ">")}
    closed2 = _closed_si_constants(q2, use_closure, consts, None)
    if open_consts & closed2:
        return FragmentClass(GENERAL, ("open SI constant appears in a closed SI of the contained query",))
    return FragmentClass(RSI1_MIXED_COND)


def _closed_si_constants(q2, use_closure, consts, which):
    comps = (closure(ACSet.of(q2.comparisons, universe=q2.variables, constants=consts)).derived
             if use_closure else q2.comparisons)
    out = set()
    for c in comps:
        p = si_parts(c)
        if p is None:
            if c.op == EQ and is_var(c.lhs) != is_var(c.rhs):
                out |= c.constants
            continue
        if which == LE and p[1] != LE:
            continue
        if p[1] in (LE, ">="):
            out.add(p[2])
    return out


# ---------------------------------------------------------------------------
# specialised procedures

HP, STRAT_ONE_AC, RSI1, AUTO = "HP", "ONE_AC", "RSI1", "AUTO"

_STRATEGY_FRAGMENTS = {
    HP: {CQ, CLSI_HP, LSI_HP_COND},
    STRAT_ONE_AC: {CQ, ONE_AC},
    RSI1: {CQ, CLSI_HP, RSI1_CLOSED, RSI1_MIXED_COND},
}


def fast_contains(q1: CQACQuery, q2: CQACQuery, strategy: str = AUTO, use_closure: bool = True) -> ContainmentResult:
    """Decide q2 ⊑ q1 with a fragment-specific procedure."""
    strategy = strategy.upper().replace("-", "_")
    frag = classify_fragment(q1, q2, use_closure)
    if strategy == AUTO:
        if frag.tag == CQ:
            return _cq_contains(q1, q2)
        if frag.tag == ONE_AC:
            strategy = STRAT_ONE_AC
        elif frag.tag in (CLSI_HP, LSI_HP_COND):
            strategy = HP
        elif frag.tag in (RSI1_CLOSED, RSI1_MIXED_COND):
            strategy = RSI1
        else:
            res = entailment_check(q1, q2)
            res.info["fragment"] = frag.tag
            return res
    allowed = _STRATEGY_FRAGMENTS.get(strategy)
    if allowed is None:
        raise ValueError(f"unknown strategy {strategy}")
    ok = frag.tag in allowed
    if not ok and strategy == STRAT_ONE_AC:
        ok = _one_ac_shape(q1)
    if not ok and frag.tag == ONE_AC:
        # a single AC also sits in one of the wider rows
        ok = _classify(q1, q2, use_closure, False).tag in allowed
    if not ok:
        reason = "; ".join(frag.reasons) or frag.tag
        raise FragmentRefusal(f"strategy {strategy} does not apply: fragment {frag.tag} ({reason})")
    if strategy == HP:
        res = _hp(q1, q2)
    elif strategy == STRAT_ONE_AC:
        res = _one_ac(q1, q2)
    else:
        res = _rsi1(q1, q2)
    res.info["fragment"] = frag.tag
    return res


def _one_ac_shape(q1) -> bool:
    return sum(1 for c in q1.comparisons if c.op != EQ) <= 1


def _cq_contains(q1, q2) -> ContainmentResult:
    m2 = merge_equalities(q2)
    if m2.inconsistent:
        return ContainmentResult(True, [], "cq")
    m1 = merge_equalities(q1)
    homs = homomorphisms(m1, m2)
    if homs:
        return ContainmentResult(True, [ContainmentMapping.of(homs[0])], "cq")
    return ContainmentResult(False, None, "cq")


def _merged_pair(q1, q2):
    consts = set(q1.constants) | set(q2.constants)
    return merge_equalities(q1, consts), merge_equalities(q2, consts)


def _hp(q1, q2) -> ContainmentResult:
    m1, m2 = _merged_pair(q1, q2)
    if m2.inconsistent:
        return ContainmentResult(True, [], "hp")
    lhs = m2.acs
    for mu in homomorphisms(m1, m2):
        d = _clean([subst_comparison(c, mu) for c in m1.comparisons])
        if d is None:
            continue
        if all(implication_holds(lhs, [e]) for e in d):
            return ContainmentResult(True, [ContainmentMapping.of(mu)], "hp")
    return ContainmentResult(False, None, "hp")


def _rsi1(q1, q2) -> ContainmentResult:
    """Iterate: a mapping with all conjuncts implied but one e lets us conjoin not-e."""
    m1, m2 = _merged_pair(q1, q2)
    if m2.inconsistent:
        return ContainmentResult(True, [], "rsi1")
    pending = []
    for mu in homomorphisms(m1, m2):
        d = _clean([subst_comparison(c, mu) for c in m1.comparisons])
        if d is not None:
            pending.append((mu, d))
    return _iterate(m2.comparisons, pending, "rsi1", lambda d, lhs: [e for e in d if not implication_holds(lhs, [e])])


def _iterate(lhs0, pending, method, unimplied):
    lhs = set(lhs0)
    used = []
    while True:
        if not is_consistent(frozenset(lhs)):
            return ContainmentResult(True, [ContainmentMapping.of(m) for m in used], method)
        progress = False
        for k, (mu, d) in enumerate(pending):
            miss = unimplied(d, frozenset(lhs))
            if miss is None:
                continue
            if not miss:
                used.append(mu)
                return ContainmentResult(True, [ContainmentMapping.of(m) for m in used], method)
            if len(miss) == 1:
                lhs.add(negate(miss[0]))
                used.append(mu)
                pending = pending[:k] + pending[k + 1:]
                progress = True
                break
        if not progress:
            return ContainmentResult(False, None, method, {"steps": len(used)})


def _one_ac(q1, q2) -> ContainmentResult:
    """One non-equation AC: conjoin its negated image for every mapping whose
    equations are implied."""
    q1n, q2n = normalize(q1), normalize(q2)
    if q2n.inconsistent or not is_consistent(q2n.acs):
        return ContainmentResult(True, [], "one_ac")
    pending = []
    for m in enumerate_mappings(q1n, q2n):
        d = _disjunct(q1n, q2n, m.as_dict())
        if d is not None:
            pending.append((m.as_dict(), d))

    def unimplied(d, lhs):
        miss = [e for e in d if not implication_holds(lhs, [e])]
        if any(e.op == EQ for e in miss):
            return None  # equations must already follow before this mapping is used
        return miss

    return _iterate(q2n.comparisons, pending, "one_ac", unimplied)


# ---------------------------------------------------------------------------
# single-mapping variables


def _images(q1n, q2n, maps):
    out = []
    for m in maps:
        mu = m.as_dict()
        _, sub = _head_links(q1n, q2n, mu)
        img = dict(mu)
        img.update(sub)
        out.append(img)
    return out


def single_mapping_vars(q1: CQACQuery, q2: CQACQuery) -> set:
    """Variables of q1 whose image is the same under every containment mapping.

    Head variables count through the head equalities, so they always qualify.
    """
    q1n, q2n = normalize(q1), normalize(q2)
    maps = enumerate_mappings(q1n, q2n)
    if not maps:
        raise NoMapping("no containment mapping exists")
    imgs = _images(q1n, q2n, maps)
    out = set()
    for v in q1n.variables:
        vals = {im.get(v) for im in imgs}
        if len(vals) == 1:
            out.add(v)
    return out


def reduce_by_single_mapping(q1: CQACQuery, q2: CQACQuery):
    """Split q1's ACs on single-mapping variables.

    Returns (head_check, reduced_q1): containment holds iff head_check and
    q2 ⊑ reduced_q1.
    """
    q1n, q2n = normalize(q1), normalize(q2)
    maps = enumerate_mappings(q1n, q2n)
    if not maps:
        raise NoMapping("no containment mapping exists")
    imgs = _images(q1n, q2n, maps)
    single = {v for v in q1n.variables if len({im.get(v) for im in imgs}) == 1}
    b11 = [c for c in q1n.comparisons if c.variables <= single]
    b12 = [c for c in q1n.comparisons if not c.variables <= single]
    img = imgs[0]
    lhs = q2n.acs
    if q2n.inconsistent or not is_consistent(lhs):
        head_check = True
    else:
        head_check = True
        for c in b11:
            e = subst_comparison(c, img)
            if e is True:
                continue
            if e is False or not implication_holds(lhs, [e]):
                head_check = False
                break
    reduced = make_query(q1n.head, q1n.body, b12, check=False)
    return head_check, reduced
