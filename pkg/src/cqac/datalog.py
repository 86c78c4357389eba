"""Datalog with comparisons and Skolem terms: bottom-up evaluation and unfolding.

Builtin predicates stand for order facts over the rationals: ``U(X,Y)`` means
X <= Y and ``U_le_5(X)`` means X <= 5 (likewise ``lt``, ``ge``, ``gt``).  A
builtin is materialized over the active rational domain of the program and
database, and any facts derived for it by rules or stored in the database are
added to that extension.  Functional terms never satisfy a comparison or a
computed builtin fact; they are equal only to themselves.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .ac_core import EQ, GE, GT, LE, LT, ACSet, closure, compare, implication_holds
from .query_model import (
    Atom,
    CQACQuery,
    Database,
    ParseError,
    SafetyError,
    format_rule,
    make_query,
    parse_statements,
    subst_comparison,
    subst_term,
)
from .terms import Func, const_tag, fresh_name, is_const, is_func, is_var, term_key

_OP_TAGS = {LE: "le", LT: "lt", GE: "ge", GT: "gt"}
_TAG_OPS = {v: k for k, v in _OP_TAGS.items()}
_SI_NAME = re.compile(r"^([A-Za-z]+)_(le|lt|ge|gt)_(m?\d+(?:o\d+)?)$")


class NestingError(ValueError):
    """The program could build unboundedly nested functional terms."""


def si_predicate(prefix: str, op: str, c: Fraction) -> str:
    """Name of the unary predicate standing for ``X op c``, e.g. ``I_le_8``."""
    return f"{prefix}_{_OP_TAGS[op]}_{const_tag(c)}"


def parse_si_predicate(name: str):
    """Inverse of ``si_predicate``: (prefix, op, constant) or None."""
    m = _SI_NAME.match(name)
    if not m:
        return None
    text = m.group(3).replace("m", "-").replace("o", "/")
    return m.group(1), _TAG_OPS[m.group(2)], Fraction(text)


def builtin_meaning(name: str):
    """("le2",) for ``U``, (op, c) for ``U_op_c``; None for other names."""
    if name == "U":
        return ("le2",)
    p = parse_si_predicate(name)
    if p is not None and p[0] == "U":
        return (p[1], p[2])
    return None


@dataclass(frozen=True)
class DatalogRule:
    head: Atom
    body: tuple = ()
    comparisons: tuple = ()

    def __str__(self) -> str:
        return format_rule(self.head, self.body, self.comparisons)

    __repr__ = __str__

    @property
    def variables(self) -> list:
        out = []
        for a in (self.head,) + self.body:
            for v in a.variables:
                if v not in out:
                    out.append(v)
        return out

    def rename(self, mapping) -> "DatalogRule":
        return DatalogRule(self.head.substitute(mapping), tuple(a.substitute(mapping) for a in self.body),
                           tuple(subst_comparison(c, mapping) for c in self.comparisons))


def rule(head: Atom, body: Iterable[Atom] = (), comparisons: Iterable = ()) -> DatalogRule:
    """Build a rule, folding constant comparisons; a false one makes the rule useless."""
    comps = []
    for c in comparisons:
        if c is True or c in comps:
            continue
        comps.append(c)
    return DatalogRule(head, tuple(body), tuple(comps))


@dataclass
class DatalogProgram:
    rules: list
    query_predicate: str
    builtin_predicates: frozenset = frozenset()
    edb_predicates: frozenset = None
    idb_predicates: frozenset = None

    def __post_init__(self):
        self.rules = list(self.rules)
        heads = {r.head.predicate for r in self.rules}
        if self.idb_predicates is None:
            self.idb_predicates = frozenset(heads - set(self.builtin_predicates))
        if self.edb_predicates is None:
            used = {a.predicate for r in self.rules for a in r.body}
            self.edb_predicates = frozenset(used - heads - set(self.builtin_predicates))
        self.builtin_predicates = frozenset(self.builtin_predicates)
        if self.edb_predicates & self.idb_predicates:
            raise ValueError("EDB and IDB predicates overlap: " + ", ".join(sorted(self.edb_predicates & self.idb_predicates)))
        if self.query_predicate not in self.idb_predicates:
            raise ValueError(f"query predicate {self.query_predicate} has no rules")
        for b in self.builtin_predicates:
            if builtin_meaning(b) is None:
                raise ValueError(f"{b} is not a recognised builtin (U or U_op_c)")
        for r in self.rules:
            check_rule(r)

    def __str__(self) -> str:
        return format_program(self)

    @property
    def constants(self) -> set:
        """Constants in rule terms and comparisons, and those named by
        semi-interval predicates such as ``I_le_8``."""
        out = set()
        for r in self.rules:
            for a in (r.head,) + r.body:
                out |= {t for t in a.terms if is_const(t)}
                si = parse_si_predicate(a.predicate)
                if si is not None:
                    out.add(si[2])
            for c in r.comparisons:
                if c is not False:
                    out |= c.constants
        return out


def check_rule(r: DatalogRule) -> None:
    """Safety: head and comparison variables must occur in a body atom."""
    body_vars = set()
    for a in r.body:
        body_vars |= set(a.variables)
    for v in r.head.variables:
        if v not in body_vars:
            raise SafetyError(f"unsafe head variable {v} in rule {r}")
    for c in r.comparisons:
        if c is False:
            continue
        for v in c.variables:
            if v not in body_vars:
                raise SafetyError(f"unsafe comparison variable {v} in rule {r}")


def check_nesting(p: DatalogProgram) -> None:
    """Refuse programs that could nest functional terms.

    A rule building a functional term must read only stored predicates, so
    every constructed term has rational arguments.
    """
    for r in p.rules:
        if any(is_func(t) for t in r.head.terms):
            for a in r.body:
                if a.predicate in p.idb_predicates or any(is_func(t) for t in a.terms):
                    raise NestingError(f"rule {r} builds functional terms from derived facts")


# ---------------------------------------------------------------------------
# text format


def format_program(p: DatalogProgram) -> str:
    lines = []
    if p.edb_predicates:
        lines.append("@edb " + ", ".join(sorted(p.edb_predicates)) + ".")
    lines.append("@idb " + ", ".join(sorted(p.idb_predicates)) + ".")
    if p.builtin_predicates:
        lines.append("@builtin " + ", ".join(sorted(p.builtin_predicates)) + ".")
    lines.append(f"@query {p.query_predicate}.")
    lines += [str(r) for r in p.rules]
    return "\n".join(lines) + "\n"


def parse_program(text: str) -> DatalogProgram:
    """Parse the declaration-plus-rules text format.  Ground facts become body-less rules."""
    rules, decls = [], {}
    for st in parse_statements(text):
        if st.kind == "decl":
            decls.setdefault(st.decl, []).extend(st.names)
        elif st.kind == "fact":
            rules.append(DatalogRule(st.head))
        else:
            if any(c is False for c in st.comparisons):
                rules.append(DatalogRule(st.head, st.body, tuple(st.comparisons)))
            else:
                rules.append(rule(st.head, st.body, st.comparisons))
    unknown = set(decls) - {"edb", "idb", "query", "builtin"}
    if unknown:
        raise ParseError("unknown declaration @" + ", @".join(sorted(unknown)))
    query = decls.get("query")
    if not query:
        if not rules:
            raise ParseError("empty program")
        query = [rules[0].head.predicate]
    if len(query) != 1:
        raise ParseError("exactly one @query predicate is required")
    try:
        return DatalogProgram(rules, query[0], frozenset(decls.get("builtin", ())),
                              frozenset(decls["edb"]) if "edb" in decls else None,
                              frozenset(decls["idb"]) if "idb" in decls else None)
    except SafetyError:
        raise
    except ValueError as e:
        raise ParseError(str(e)) from e


# ---------------------------------------------------------------------------
# evaluation


def _match(pattern, value, assign, added) -> bool:
    if is_var(pattern):
        cur = assign.get(pattern)
        if cur is None:
            assign[pattern] = value
            added.append(pattern)
            return True
        return cur is value or cur == value
    if is_func(pattern):
        if not is_func(value) or value.name != pattern.name or len(value.args) != len(pattern.args):
            return False
        return all(_match(p, v, assign, added) for p, v in zip(pattern.args, value.args))
    return pattern is value or (is_const(value) and pattern == value)


def _ground(t, assign):
    if is_var(t):
        return assign[t]
    if is_func(t):
        return Func(t.name, tuple(_ground(a, assign) for a in t.args))
    return t


def _comparison_holds(c, assign) -> bool:
    if c is False:
        return False
    x = _ground(c.lhs, assign)
    y = _ground(c.rhs, assign)
    if is_const(x) and is_const(y):
        return c.holds(x, y)
    # functional terms: only syntactic equality is known
    return c.op == EQ and x == y


class _Relations:
    """Fact sets with lazily built single-position indexes."""

    def __init__(self, facts=None):
        self.sets = {} if facts is None else facts
        self._index = {}

    def get(self, pred):
        return self.sets.get(pred, ())

    def lookup(self, pred, pos, val):
        key = (pred, pos)
        idx = self._index.get(key)
        if idx is None:
            idx = {}
            for tup in self.sets.get(pred, ()):
                idx.setdefault(tup[pos], []).append(tup)
            self._index[key] = idx
        return idx.get(val, ())


def _fire(r: DatalogRule, sources: list, out: set):
    """Add the head tuples of every body match; sources[i] feeds body atom i."""
    atoms = r.body
    n = len(atoms)
    order = []
    bound = set()
    rest = list(range(n))
    # small sources first, then atoms that share bound variables
    while rest:
        best = max(rest, key=lambda i: (len(set(atoms[i].variables) & bound), -len(sources[i].get(atoms[i].predicate)), -i))
        order.append(best)
        bound |= set(atoms[best].variables)
        rest.remove(best)
    checks = [[] for _ in range(n)]
    bound = set()
    pending = list(r.comparisons)
    for k, i in enumerate(order):
        bound |= set(atoms[i].variables)
        checks[k] = [c for c in pending if c is False or c.variables <= bound]
        pending = [c for c in pending if not (c is False or c.variables <= bound)]
    if pending:
        return
    assign = {}

    def rec(k):
        if k == n:
            out.add(tuple(_ground(t, assign) for t in r.head.terms))
            return
        i = order[k]
        a = atoms[i]
        src = sources[i]
        cands = None
        for pos, t in enumerate(a.terms):
            if is_const(t):
                cands = src.lookup(a.predicate, pos, t)
                break
            if is_var(t) and t in assign:
                cands = src.lookup(a.predicate, pos, assign[t])
                break
        if cands is None:
            cands = src.get(a.predicate)
        for tup in cands:
            if len(tup) != a.arity:
                continue
            added = []
            ok = all(_match(p, v, assign, added) for p, v in zip(a.terms, tup))
            if ok:
                ok = all(_comparison_holds(c, assign) for c in checks[k])
            if ok:
                rec(k + 1)
            for v in added:
                del assign[v]

    rec(0)


def active_domain(p: DatalogProgram, db: Database) -> list:
    dom = {t for t in db.constants if is_const(t)} | p.constants
    return sorted(dom)


def _builtin_facts(p: DatalogProgram, db: Database) -> dict:
    dom = active_domain(p, db)
    out = {}
    for b in p.builtin_predicates:
        m = builtin_meaning(b)
        if m[0] == "le2":
            out[b] = {(x, y) for i, x in enumerate(dom) for y in dom[i:]}
        else:
            op, c = m
            out[b] = {(x,) for x in dom if compare(x, op, c) is True}
    return out


def _initial(p: DatalogProgram, db: Database) -> dict:
    facts = {pred: set(rows) for pred, rows in db.relations.items()}
    for b, rows in _builtin_facts(p, db).items():
        facts.setdefault(b, set()).update(rows)
    return facts


def derive(p: DatalogProgram, db: Database, naive: bool = False) -> dict:
    """Least fixpoint of the program over db: predicate -> set of tuples."""
    check_nesting(p)
    facts = _initial(p, db)
    full = _Relations(facts)
    derived_preds = {r.head.predicate for r in p.rules}
    if naive:
        while True:
            new = {}
            for r in p.rules:
                got = set()
                _fire(r, [full] * len(r.body), got)
                fresh = got - facts.get(r.head.predicate, set())
                if fresh:
                    new.setdefault(r.head.predicate, set()).update(fresh)
            if not new:
                return facts
            for pred, rows in new.items():
                facts.setdefault(pred, set()).update(rows)
            full = _Relations(facts)
    # semi-naive: after a first full round, each rule is re-fired with one
    # derived body atom restricted to the facts that are new since last round
    delta = {}
    for r in p.rules:
        got = set()
        _fire(r, [full] * len(r.body), got)
        fresh = got - facts.get(r.head.predicate, set())
        if fresh:
            delta.setdefault(r.head.predicate, set()).update(fresh)
    while delta:
        for pred, rows in delta.items():
            facts.setdefault(pred, set()).update(rows)
        full = _Relations(facts)
        drel = _Relations(delta)
        new = {}
        for r in p.rules:
            got = set()
            for i, a in enumerate(r.body):
                if a.predicate in derived_preds and a.predicate in delta:
                    sources = [full] * len(r.body)
                    sources[i] = drel
                    _fire(r, sources, got)
            fresh = got - facts.get(r.head.predicate, set())
            if fresh:
                new.setdefault(r.head.predicate, set()).update(fresh)
        delta = new
    return facts


def evaluate_program(p: DatalogProgram, db: Database, naive: bool = False) -> set:
    """Answers of the query predicate; tuples holding functional terms are dropped."""
    facts = derive(p, db, naive)
    return {t for t in facts.get(p.query_predicate, set()) if not any(is_func(x) for x in t)}


# ---------------------------------------------------------------------------
# unfolding


def _walk(t, s):
    while is_var(t) and t in s:
        t = s[t]
    return t


def _occurs(v, t, s) -> bool:
    t = _walk(t, s)
    if t == v:
        return True
    return is_func(t) and any(_occurs(v, a, s) for a in t.args)


def unify(a: Atom, b: Atom, s: dict):
    """Most general unifier extending s, or None."""
    if a.predicate != b.predicate or a.arity != b.arity:
        return None
    s = dict(s)
    stack = list(zip(a.terms, b.terms))
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, s), _walk(y, s)
        if x == y:
            continue
        if is_var(x):
            if _occurs(x, y, s):
                return None
            s[x] = y
        elif is_var(y):
            if _occurs(y, x, s):
                return None
            s[y] = x
        elif is_func(x) and is_func(y):
            if x.name != y.name or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        else:
            return None
    return s


def _resolve(t, s):
    t = _walk(t, s)
    if is_func(t):
        return Func(t.name, tuple(_resolve(a, s) for a in t.args))
    return t


def _builtin_ac(a: Atom):
    m = builtin_meaning(a.predicate)
    if m[0] == "le2":
        return compare(a.terms[0], LE, a.terms[1])
    return compare(a.terms[0], m[0], m[1])


def expansions_up_to_depth(p: DatalogProgram, depth: int) -> list:
    """EDB-only unfoldings of the query predicate using at most ``depth`` rules.

    The leftmost derived atom is unfolded first.  Builtin atoms become
    comparisons, except that a builtin atom over a functional term is unfolded
    through the rules that derive it.  Results are deduplicated up to variable renaming and come
    out in the order they are found, breadth first.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    by_head = {}
    for r in p.rules:
        by_head.setdefault(r.head.predicate, []).append(r)
    idb = p.idb_predicates
    out, seen = [], set()
    qrules = by_head.get(p.query_predicate, [])
    frontier = []
    for r in qrules:
        frontier.append((r.head, list(r.body), list(r.comparisons), 1))
    while frontier:
        nxt = []
        for head, goals, comps, used in frontier:
            k = next((i for i, g in enumerate(goals) if g.predicate in idb
                      or (g.predicate in by_head and any(is_func(t) for t in g.terms))), None)
            if k is None:
                q = _finish(head, goals, comps, p.builtin_predicates)
                if q is not None:
                    key = _canonical_key(q)
                    if key not in seen:
                        seen.add(key)
                        out.append(q)
                continue
            if used >= depth:
                continue
            g = goals[k]
            names = set()
            for a in [head] + goals:
                names |= set(a.variables)
            for c in comps:
                if c is not False:
                    names |= c.variables
            for r in by_head.get(g.predicate, []):
                ren = {v: fresh_name(v, names) for v in r.variables}
                rr = r.rename(ren)
                s = unify(rr.head, g, {})
                if s is None:
                    continue
                sub = {v: _resolve(v, s) for v in s}
                new_goals = [x.substitute(sub) for x in goals[:k] + list(rr.body) + goals[k + 1:]]
                new_comps = [subst_comparison(c, sub) if c is not False else False for c in comps + list(rr.comparisons)]
                nxt.append((head.substitute(sub), new_goals, new_comps, used + 1))
        frontier = nxt
    return out


def _has_func(a: Atom) -> bool:
    return any(is_func(t) for t in a.terms)


def _finish(head, goals, comps, builtins):
    # a functional term can never be matched by a stored fact
    if _has_func(head) or any(_has_func(g) for g in goals):
        return None
    atoms = []
    for g in goals:
        if g.predicate in builtins:
            comps = comps + [_builtin_ac(g)]
        else:
            atoms.append(g)
    if any(c is False for c in comps):
        return None
    comps = _project(comps, {v for a in atoms for v in a.variables})
    if comps is None:
        return None
    q = make_query(head, list(dict.fromkeys(atoms)), list(dict.fromkeys(comps)), check=False)
    return None if q.inconsistent else q


def _project(comps, keep: set):
    """Comparisons over ``keep`` equivalent to the projection of ``comps``.

    Variables that occur only in comparisons (order facts read back from the
    builtins) are eliminated through the closure; None if inconsistent.
    """
    comps = [c for c in comps if c is not True]
    extra = set().union(*(c.variables for c in comps)) - keep if comps else set()
    if not extra:
        return comps
    cl = closure(ACSet.of(comps))
    if not cl.consistent:
        return None
    base = [c for c in comps if c.variables <= keep]
    for c in cl.sorted():
        if c.lhs == c.rhs or not c.variables or not c.variables <= keep:
            continue
        if not implication_holds(base, [c]):
            base.append(c)
    return base


def _canonical_key(q: CQACQuery) -> str:
    ren = {}
    for i, v in enumerate(q.variables):
        ren[v] = f"V{i}"
    return str(q.substitute(ren))


# ---------------------------------------------------------------------------
# Datalog containing a CQ


def frozen_database(q: CQACQuery, avoid=()):
    """Canonical database of an AC-free query: one fresh rational per variable.

    Fresh values lie above every constant of q and of ``avoid``.
    Returns (database, frozen head tuple).
    """
    top = max(list(q.constants) + list(avoid), default=Fraction(0))
    freeze = {v: top + 1 + i for i, v in enumerate(q.variables)}
    facts = {a.substitute(freeze) for a in q.body}
    head = tuple(freeze[t] if is_var(t) else t for t in q.head.terms)
    return Database.of(facts), head


def contains_cq(p: DatalogProgram, q: CQACQuery) -> bool:
    """Does the program contain the AC-free query q?"""
    if q.comparisons:
        raise ValueError("contains_cq needs a query without comparisons")
    db, head = frozen_database(q, p.constants)
    facts = derive(p, db)
    return head in facts.get(p.query_predicate, set())
