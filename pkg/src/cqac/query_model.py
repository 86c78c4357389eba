"""CQAC queries, views, databases: parsing, printing, normalization, evaluation,
view expansion and AC-rectification."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable

from .ac_core import (
    ACSet,
    Comparison,
    InconsistentACs,
    closure,
    compare,
    is_consistent,
    witness_chain,
)
from .terms import Func, fresh_name, interned, is_const, is_func, is_var, term_key, term_str


class ParseError(ValueError):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line, self.col = line, col


class SafetyError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(term_str(t) for t in self.terms)})"

    __repr__ = __str__

    @property
    def arity(self) -> int:
        return len(self.terms)

    @cached_property
    def variables(self) -> tuple:
        out = []
        for t in self.terms:
            _collect_vars(t, out)
        return tuple(out)

    def substitute(self, mapping) -> "Atom":
        return Atom(self.predicate, tuple(subst_term(t, mapping) for t in self.terms))

    def is_ground(self) -> bool:
        return not self.variables


def _collect_vars(t, out):
    if is_var(t):
        if t not in out:
            out.append(t)
    elif is_func(t):
        for a in t.args:
            _collect_vars(a, out)


def subst_term(t, mapping):
    if is_var(t):
        return mapping.get(t, t)
    if is_func(t):
        return Func(t.name, tuple(subst_term(a, mapping) for a in t.args))
    return t


def subst_comparison(c, mapping):
    a, op, b = c.shown()
    return compare(subst_term(a, mapping), op, subst_term(b, mapping))


@dataclass(frozen=True)
class CQACQuery:
    """``head :- body, comparisons`` with the comparisons kept in written order."""

    head: Atom
    body: tuple
    comparisons: tuple = ()
    inconsistent: bool = False

    @cached_property
    def acs(self) -> ACSet:
        return ACSet.of(list(self.comparisons) + ([False] if self.inconsistent else []),
                        universe=self.variables)

    @property
    def name(self) -> str:
        return self.head.predicate

    @cached_property
    def variables(self) -> tuple:
        out = []
        for a in self.body:
            for v in a.variables:
                if v not in out:
                    out.append(v)
        for v in self.head.variables:
            if v not in out:
                out.append(v)
        return tuple(out)

    @property
    def head_variables(self) -> list:
        return list(self.head.variables)

    @cached_property
    def constants(self) -> frozenset:
        cs = set()
        for a in (self.head,) + self.body:
            cs |= {t for t in a.terms if is_const(t)}
        for c in self.comparisons:
            cs |= c.constants
        return frozenset(cs)

    @property
    def is_boolean(self) -> bool:
        return self.head.arity == 0

    def __str__(self) -> str:
        return format_rule(self.head, self.body, self.comparisons, self.inconsistent)

    __repr__ = __str__

    def with_comparisons(self, comps) -> "CQACQuery":
        return make_query(self.head, self.body, comps, check=False)

    def substitute(self, mapping) -> "CQACQuery":
        comps = [subst_comparison(c, mapping) for c in self.comparisons]
        return make_query(self.head.substitute(mapping), [a.substitute(mapping) for a in self.body],
                          comps + ([False] if self.inconsistent else []), check=False)

    def rename_head(self, name: str) -> "CQACQuery":
        return CQACQuery(Atom(name, self.head.terms), self.body, self.comparisons, self.inconsistent)


def make_query(head: Atom, body: Iterable[Atom], comparisons: Iterable = (), check: bool = True) -> CQACQuery:
    """Build a query; folds constant comparisons and drops duplicates.

    With ``check`` the safety and consistency invariants are enforced.
    """
    comps, seen, false = [], set(), False
    for c in comparisons:
        if c is True:
            continue
        if c is False:
            false = True
            continue
        if c not in seen:
            seen.add(c)
            comps.append(c)
    q = CQACQuery(_intern_atom(head), tuple(_intern_atom(a) for a in body), tuple(comps), false)
    if check:
        validate(q)
    return q


def _intern_atom(a: Atom) -> Atom:
    if any(is_const(t) and type(t) is Fraction for t in a.terms):
        return Atom(a.predicate, tuple(interned(t) if is_const(t) else t for t in a.terms))
    return a


def validate(q: CQACQuery) -> None:
    body_vars = set()
    for a in q.body:
        body_vars |= set(a.variables)
    for v in q.head.variables:
        if v not in body_vars:
            raise SafetyError(f"unsafe head variable {v} in {q.head}")
    for c in q.comparisons:
        for v in c.variables:
            if v not in body_vars:
                raise SafetyError(f"unsafe comparison variable {v} in {c}")
    if q.inconsistent:
        raise InconsistentACs("a constant comparison is false", [])
    if not is_consistent(q.acs):
        chain = witness_chain(q.acs)
        raise InconsistentACs("inconsistent comparisons: " + ", ".join(map(str, chain)), chain)


def format_rule(head, body, comparisons=(), inconsistent=False) -> str:
    parts = [str(a) for a in body] + [str(c) for c in comparisons]
    if inconsistent:
        parts.append("1 < 0")
    if not parts:
        return f"{head} :- ."
    return f"{head} :- {', '.join(parts)}."


# ---------------------------------------------------------------------------
# databases


@dataclass(frozen=True)
class Database:
    facts: frozenset = frozenset()

    @staticmethod
    def of(atoms: Iterable[Atom]) -> "Database":
        atoms = frozenset(atoms)
        for a in atoms:
            if a.variables:
                raise ValueError(f"fact {a} is not ground")
        return Database(atoms)

    @cached_property
    def relations(self) -> dict:
        rel = {}
        for a in self.facts:
            rel.setdefault(a.predicate, set()).add(a.terms)
        return rel

    def relation(self, pred: str) -> set:
        return self.relations.get(pred, set())

    @cached_property
    def constants(self) -> frozenset:
        return frozenset(t for a in self.facts for t in a.terms)

    def __len__(self):
        return len(self.facts)

    def __str__(self) -> str:
        return "\n".join(f"{a}." for a in sorted(self.facts, key=_atom_key))


ViewInstance = Database


def _atom_key(a: Atom):
    return (a.predicate, tuple(term_key(t) for t in a.terms))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>[%\#][^\n]*)
  | (?P<decl>@[A-Za-z_]+)
  | (?P<num>-?\d+(?:\.\d+|/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|>=|!=|<>|=<|:-|[<>=(),.])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


def parse_number(s: str) -> Fraction:
    return Fraction(s)


@dataclass
class Statement:
    """A parsed rule, fact or declaration before validation."""

    kind: str  # "rule", "fact" or "decl"
    head: Atom = None
    body: tuple = ()
    comparisons: tuple = ()
    decl: str = ""
    names: tuple = ()
    line: int = 0


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[self.i + k]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def statements(self):
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
        return out

    def statement(self):
        t = self.peek()
        if t.kind == "decl":
            self.next()
            names = []
            while self.peek().text != ".":
                n = self.next()
                if n.kind != "ident":
                    raise ParseError(f"expected a predicate name, found {n.text!r}", n.line, n.col)
                names.append(n.text)
                if self.peek().text == ",":
                    self.next()
            self.expect(".")
            return Statement("decl", decl=t.text[1:], names=tuple(names), line=t.line)
        head = self.atom()
        if self.peek().text == ".":
            self.next()
            return Statement("fact", head=head, line=t.line)
        self.expect(":-")
        atoms, comps = [], []
        if self.peek().text != ".":
            while True:
                item = self.body_item()
                (comps if isinstance(item, (Comparison, bool)) else atoms).append(item)
                if self.peek().text == ",":
                    self.next()
                    continue
                break
        self.expect(".")
        return Statement("rule", head=head, body=tuple(atoms), comparisons=tuple(comps), line=t.line)

    def atom(self):
        t = self.next()
        if t.kind != "ident":
            raise ParseError(f"expected a predicate name, found {t.text or 'end of input'!r}", t.line, t.col)
        self.expect("(")
        return Atom(t.text, self.args())

    def args(self):
        terms = []
        if self.peek().text != ")":
            while True:
                terms.append(self.term())
                if self.peek().text == ",":
                    self.next()
                    continue
                break
        self.expect(")")
        return tuple(terms)

    def term(self):
        t = self.next()
        if t.kind == "num":
            return parse_number(t.text)
        if t.kind == "ident":
            if self.peek().text == "(":
                self.next()
                return Func(t.text, self.args())
            if t.text[0].isupper() or t.text[0] == "_":
                return t.text
            raise ParseError(f"variables must start uppercase: {t.text!r}", t.line, t.col)
        raise ParseError(f"expected a term, found {t.text or 'end of input'!r}", t.line, t.col)

    def body_item(self):
        t = self.peek()
        nxt = self.peek(1)
        if t.kind == "ident" and nxt.text == "(":
            save = self.i
            term = self.term()
            if self.peek().kind == "op" and self.peek().text in _CMP_OPS:
                return self._comparison(term)
            self.i = save
            return self.atom()
        return self._comparison(self.term())

    def _comparison(self, lhs):
        t = self.next()
        if t.text not in _CMP_OPS:
            raise ParseError(f"expected a comparison operator, found {t.text!r}", t.line, t.col)
        rhs = self.term()
        return compare(lhs, _CMP_OPS[t.text], rhs)


_CMP_OPS = {"<": "<", "<=": "<=", "=<": "<=", "=": "=", "!=": "!=", "<>": "!=", ">=": ">=", ">": ">"}


def parse_statements(text: str) -> list:
    return _Parser(text).statements()


@dataclass
class Workspace:
    queries: list = field(default_factory=list)
    facts: Database = field(default_factory=Database)
    declarations: dict = field(default_factory=dict)

    def query(self, name: str = None) -> CQACQuery:
        for q in self.queries:
            if name is None or q.name == name:
                return q
        raise KeyError(name)


def parse(text: str) -> Workspace:
    """Parse queries, views and facts; every rule is validated as a CQAC query."""
    ws = Workspace()
    facts = []
    for st in parse_statements(text):
        if st.kind == "fact":
            if st.head.variables:
                raise ParseError(f"fact {st.head} is not ground", st.line, 1)
            facts.append(st.head)
        elif st.kind == "decl":
            ws.declarations.setdefault(st.decl, []).extend(st.names)
        else:
            ws.queries.append(make_query(st.head, st.body, st.comparisons))
    _check_arities([a for q in ws.queries for a in (q.head,) + q.body] + facts)
    ws.facts = Database.of(facts)
    return ws


def _check_arities(atoms):
    seen = {}
    for a in atoms:
        if seen.setdefault(a.predicate, a.arity) != a.arity:
            raise ParseError(f"predicate {a.predicate} used with arities {seen[a.predicate]} and {a.arity}")


def parse_query(text: str) -> CQACQuery:
    ws = parse(text)
    if not ws.queries:
        raise ParseError("no query found")
    return ws.queries[0]


def parse_views(text: str) -> list:
    return parse(text).queries


def parse_database(text: str) -> Database:
    ws = parse(text)
    if ws.queries:
        raise ParseError("fact file contains rules")
    return ws.facts


# ---------------------------------------------------------------------------
# normalization


def normalize(q: CQACQuery) -> CQACQuery:
    """Every variable occurs once in the body and no body atom holds a constant.

    Repeated occurrences become ``X_k`` with ``X_k = X``; constants become fresh
    ``Z_k`` variables with ``Z_k = c``.
    """
    used = set(q.variables)
    seen = set()
    body, extra = [], []
    for a in q.body:
        terms = []
        for t in a.terms:
            if is_var(t):
                if t in seen:
                    v = fresh_name(t, used)
                    extra.append(compare(v, "=", t))
                    terms.append(v)
                else:
                    seen.add(t)
                    terms.append(t)
            else:
                v = fresh_name("Z", used)
                extra.append(compare(v, "=", t))
                terms.append(v)
        body.append(Atom(a.predicate, tuple(terms)))
    if not extra:
        return q
    return make_query(q.head, body, list(q.comparisons) + extra + ([False] if q.inconsistent else []), check=False)


def is_normalized(q: CQACQuery) -> bool:
    seen = set()
    for a in q.body:
        for t in a.terms:
            if not is_var(t) or t in seen:
                return False
            seen.add(t)
    return True


# ---------------------------------------------------------------------------
# evaluation


@lru_cache(maxsize=4096)
def _plan(q: CQACQuery):
    """Join order and per-step work for evaluating q; independent of the database."""
    atoms = list(q.body)
    order, bound = [], set()
    rest = list(range(len(atoms)))
    while rest:
        best = max(rest, key=lambda i: (len(set(atoms[i].variables) & bound), -i))
        order.append(atoms[best])
        bound |= set(atoms[best].variables)
        rest.remove(best)
    steps = []
    bound = set()
    pending = list(q.comparisons)
    for a in order:
        ops, key = [], None
        before = set(bound)
        for pos, t in enumerate(a.terms):
            if is_var(t):
                if t in bound:
                    ops.append((pos, 1, t))
                    if key is None and t in before:
                        key = (pos, t, True)
                else:
                    ops.append((pos, 0, t))
                    bound.add(t)
            else:
                ops.append((pos, 2, t))
                if key is None:
                    key = (pos, t, False)
        ready = [c for c in pending if c.variables <= bound]
        pending = [c for c in pending if not c.variables <= bound]
        steps.append((a.predicate, a.arity, tuple(ops), key, tuple(ready)))
    return tuple(steps)


def evaluate(q: CQACQuery, db: Database) -> set:
    """All head tuples produced by assignments that embed the body and satisfy the ACs."""
    if q.inconsistent:
        return set()
    rels = db.relations
    if any(a.predicate not in rels for a in q.body):
        return set()
    steps = _plan(q)
    index = {}
    out = set()
    assign = {}
    head = q.head.terms
    stop_early = not head
    n = len(steps)

    def candidates(pred, key):
        if key is None:
            return rels[pred]
        pos, t, is_v = key
        val = assign[t] if is_v else t
        ik = (pred, pos)
        idx = index.get(ik)
        if idx is None:
            idx = {}
            for tup in rels[pred]:
                if len(tup) > pos:
                    idx.setdefault(tup[pos], []).append(tup)
            index[ik] = idx
        return idx.get(val, ())

    def rec(k):
        # returns True once a Boolean query has its answer
        if k == n:
            out.add(tuple(assign[t] if is_var(t) else t for t in head))
            return stop_early
        pred, arity, ops, key, ready = steps[k]
        for tup in candidates(pred, key):
            if len(tup) != arity:
                continue
            added = []
            ok = True
            for pos, kind, t in ops:
                val = tup[pos]
                # identity first: canonical values are interned
                if kind == 0:
                    if t in assign:  # repeated within this atom
                        cur = assign[t]
                        if cur is not val and cur != val:
                            ok = False
                            break
                    else:
                        assign[t] = val
                        added.append(t)
                elif kind == 1:
                    cur = assign[t]
                    if cur is not val and cur != val:
                        ok = False
                        break
                elif t is not val and t != val:
                    ok = False
                    break
            if ok:
                for c in ready:
                    x = assign[c.lhs] if is_var(c.lhs) else c.lhs
                    y = assign[c.rhs] if is_var(c.rhs) else c.rhs
                    if not (is_const(x) and is_const(y)) or not c.holds(x, y):
                        ok = False
                        break
            if ok and rec(k + 1):
                return True
            for t in added:
                del assign[t]
        return False

    rec(0)
    return out


# ---------------------------------------------------------------------------
# views, expansion, rectification


def view_map(views: Iterable[CQACQuery]) -> dict:
    out = {}
    for v in views:
        if v.name in out:
            raise ValueError(f"duplicate view {v.name}")
        out[v.name] = v
    return out


def expand(r: CQACQuery, views) -> CQACQuery:
    """Replace each view subgoal of ``r`` by the view body after head unification.

    Nondistinguished view variables get fresh ``V_k`` names per occurrence.
    """
    vm = views if isinstance(views, dict) else view_map(views)
    used = set(r.variables)
    body, comps = [], list(r.comparisons)
    for g in r.body:
        v = vm.get(g.predicate)
        if v is None:
            body.append(g)
            continue
        if v.head.arity != g.arity:
            raise ValueError(f"arity mismatch for view {g.predicate}")
        mapping = {}
        for ht, gt in zip(v.head.terms, g.terms):
            if is_var(ht):
                if ht in mapping:
                    comps.append(compare(mapping[ht], "=", gt))
                else:
                    mapping[ht] = gt
            else:
                comps.append(compare(ht, "=", gt) if is_var(gt) else ht == gt)
        for x in v.variables:
            if x not in mapping:
                mapping[x] = fresh_name(x, used)
        body.extend(a.substitute(mapping) for a in v.body)
        comps.extend(subst_comparison(c, mapping) for c in v.comparisons)
        if v.inconsistent:
            comps.append(False)
    if r.inconsistent:
        comps.append(False)
    return make_query(r.head, body, comps, check=False)


def rectify(r: CQACQuery, views) -> CQACQuery:
    """Add every closure AC of the expansion whose variables all occur in ``r``."""
    vm = views if isinstance(views, dict) else view_map(views)
    exp = expand(r, vm)
    consts = set(r.constants)
    for v in vm.values():
        consts |= v.constants
    cl = closure(ACSet.of(exp.comparisons, universe=exp.variables, constants=consts))
    if not cl.consistent:
        return make_query(r.head, r.body, list(r.comparisons) + [False], check=False)
    rv = set(r.variables)
    own = closure(ACSet.of(r.comparisons, universe=rv, constants=consts)).derived
    extra = []
    for c in cl.sorted():
        if c.lhs == c.rhs or not c.variables or not c.variables <= rv or c in own:
            continue
        extra.append(c)
    return make_query(r.head, r.body, list(r.comparisons) + extra, check=False)


def views_of(db: Database, views) -> Database:
    """Materialize every view on ``db``."""
    vm = views if isinstance(views, dict) else view_map(views)
    facts = set()
    for name, v in vm.items():
        for tup in evaluate(v, db):
            facts.add(Atom(name, tup))
    return Database(frozenset(facts))
