"""Arithmetic comparisons over a dense order: closure, consistency and implication."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import kernels
from .terms import is_const, is_var, term_key, term_str

LT, LE, EQ, NEQ, GE, GT = "<", "<=", "=", "!=", ">=", ">"
OPS = (LT, LE, EQ, NEQ, GE, GT)
_SWAP = {GE: LE, GT: LT}
_MIRROR = {LT: GT, LE: GE, GT: LT, GE: LE, EQ: EQ, NEQ: NEQ}


class InconsistentACs(ValueError):
    """Raised when an operation needs a consistent AC set and gets a contradictory one."""

    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


@dataclass(frozen=True)
class Comparison:
    """``lhs op rhs`` stored in canonical orientation (only <, <=, =, != are stored).

    ``flipped`` remembers that the comparison was written with > or >= (or with
    the sides of =/!= swapped) and only affects printing.
    """

    lhs: object
    op: str
    rhs: object
    flipped: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        if self.flipped:
            return f"{term_str(self.rhs)} {_MIRROR[self.op]} {term_str(self.lhs)}"
        return f"{term_str(self.lhs)} {self.op} {term_str(self.rhs)}"

    __repr__ = __str__

    @property
    def terms(self) -> tuple:
        return (self.lhs, self.rhs)

    @property
    def variables(self) -> set:
        return {t for t in (self.lhs, self.rhs) if is_var(t)}

    @property
    def constants(self) -> set:
        return {t for t in (self.lhs, self.rhs) if is_const(t)}

    def substitute(self, mapping):
        a, op, b = self.shown()
        return compare(mapping.get(a, a) if is_var(a) else a, op, mapping.get(b, b) if is_var(b) else b)

    @property
    def shown_op(self) -> str:
        return _MIRROR[self.op] if self.flipped else self.op

    def shown(self) -> tuple:
        """(lhs, op, rhs) as originally written."""
        if self.flipped:
            return self.rhs, _MIRROR[self.op], self.lhs
        return self.lhs, self.op, self.rhs

    def holds(self, a, b=None) -> bool:
        """Evaluate on values: ``a`` is a dict or the lhs value (then b is the rhs value)."""
        if b is None:
            x = a[self.lhs] if is_var(self.lhs) else self.lhs
            y = a[self.rhs] if is_var(self.rhs) else self.rhs
        else:
            x, y = a, b
        return _apply(self.op, x, y)


def _apply(op, x, y) -> bool:
    if op == LT:
        return x < y
    if op == LE:
        return x <= y
    if op == EQ:
        return x == y
    if op == NEQ:
        return x != y
    if op == GE:
        return x >= y
    return x > y


def _as_term(t):
    return Fraction(t) if isinstance(t, int) and not isinstance(t, bool) else t


def compare(lhs, op, rhs):
    """Build a canonical Comparison, or fold a constant-constant comparison to a bool."""
    if op not in OPS:
        raise ValueError(f"unknown operator {op!r}")
    lhs, rhs = _as_term(lhs), _as_term(rhs)
    if is_const(lhs) and is_const(rhs):
        return _apply(op, lhs, rhs)
    if op in _SWAP:
        return Comparison(rhs, _SWAP[op], lhs, True)
    if op in (EQ, NEQ) and term_key(rhs) < term_key(lhs):
        return Comparison(rhs, op, lhs, True)
    return Comparison(lhs, op, rhs)


def negate(c: Comparison) -> Comparison:
    """The complementary comparison over a total order."""
    if c.op == LE:
        return Comparison(c.rhs, LT, c.lhs)
    if c.op == LT:
        return Comparison(c.rhs, LE, c.lhs)
    if c.op == EQ:
        return Comparison(c.lhs, NEQ, c.rhs)
    return Comparison(c.lhs, EQ, c.rhs)


# ---------------------------------------------------------------------------
# AC types

VAR_LE_VAR = "var<=var"
VAR_LT_VAR = "var<var"
VAR_LE_CONST = "var<=const"
VAR_LT_CONST = "var<const"
CONST_LE_VAR = "const<=var"
CONST_LT_VAR = "const<var"
VAR_EQ_VAR = "var=var"
VAR_EQ_CONST = "var=const"
VAR_NE_VAR = "var!=var"
VAR_NE_CONST = "var!=const"

SI_LABELS = {
    VAR_LE_CONST: "CLSI",
    VAR_LT_CONST: "OLSI",
    CONST_LE_VAR: "CRSI",
    CONST_LT_VAR: "ORSI",
}


@dataclass(frozen=True)
class ACType:
    tag: str

    @property
    def si_label(self):
        return SI_LABELS.get(self.tag)

    @property
    def is_si(self) -> bool:
        return self.tag in SI_LABELS


def classify_ac(c: Comparison) -> ACType:
    lv, rv = is_var(c.lhs), is_var(c.rhs)
    if c.op in (EQ, NEQ):
        both = lv and rv
        if c.op == EQ:
            return ACType(VAR_EQ_VAR if both else VAR_EQ_CONST)
        return ACType(VAR_NE_VAR if both else VAR_NE_CONST)
    if lv and rv:
        return ACType(VAR_LE_VAR if c.op == LE else VAR_LT_VAR)
    if lv:
        return ACType(VAR_LE_CONST if c.op == LE else VAR_LT_CONST)
    return ACType(CONST_LE_VAR if c.op == LE else CONST_LT_VAR)


def si_parts(c: Comparison):
    """For a semi-interval return (variable, op, constant) with op in <, <=, >, >=."""
    t = classify_ac(c).tag
    if t in (VAR_LE_CONST, VAR_LT_CONST):
        return c.lhs, c.op, c.rhs
    if t in (CONST_LE_VAR, CONST_LT_VAR):
        return c.rhs, _MIRROR[c.op], c.lhs
    return None


# ---------------------------------------------------------------------------
# AC sets


@dataclass(frozen=True)
class ACSet:
    comparisons: frozenset
    universe: frozenset = frozenset()
    relevant_constants: frozenset = frozenset()
    has_false: bool = False

    @staticmethod
    def of(items: Iterable = (), universe=(), constants=()) -> "ACSet":
        comps, false = set(), False
        for it in items:
            if it is True:
                continue
            if it is False:
                false = True
                continue
            comps.add(it)
        uni, cs = set(universe), {Fraction(c) for c in constants}
        for c in comps:
            uni |= c.variables
            cs |= c.constants
        return ACSet(frozenset(comps), frozenset(uni), frozenset(cs), false)

    def with_items(self, items: Iterable) -> "ACSet":
        return ACSet.of(list(self.comparisons) + list(items) + ([False] if self.has_false else []),
                        self.universe, self.relevant_constants)

    def sorted(self) -> list:
        return sorted(self.comparisons, key=_cmp_key)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self):
        return len(self.comparisons)

    def __str__(self) -> str:
        parts = [str(c) for c in self.sorted()]
        if self.has_false:
            parts.append("false")
        return "{" + ", ".join(parts) + "}"


def _cmp_key(c: Comparison):
    return (term_key(c.lhs), c.op, term_key(c.rhs))


@dataclass(frozen=True)
class ACClosure:
    base: ACSet
    derived: frozenset
    consistent: bool

    def contains(self, c) -> bool:
        if isinstance(c, bool):
            return c
        return c in self.derived

    def sorted(self) -> list:
        return sorted(self.derived, key=_cmp_key)


class _Matrices:
    """Index terms and build the le/lt/ne matrices for a set of comparisons."""

    def __init__(self, comparisons, universe, constants):
        variables = set(universe)
        consts = set(constants)
        for c in comparisons:
            variables |= c.variables
            consts |= c.constants
        self.vars = sorted(variables)
        self.consts = sorted(consts)
        self.terms = self.vars + self.consts
        self.index = {t: i for i, t in enumerate(self.terms)}
        n = len(self.terms)
        self.le = np.zeros((n, n), dtype=np.bool_)
        self.lt = np.zeros((n, n), dtype=np.bool_)
        self.ne = np.zeros((n, n), dtype=np.bool_)
        np.fill_diagonal(self.le, True)
        nv = len(self.vars)
        for i in range(nv, n):
            for j in range(i + 1, n):
                self.lt[i, j] = True
        ix = self.index
        for c in comparisons:
            a, b = ix[c.lhs], ix[c.rhs]
            if c.op == LE:
                self.le[a, b] = True
            elif c.op == LT:
                self.lt[a, b] = True
            elif c.op == EQ:
                self.le[a, b] = self.le[b, a] = True
            else:
                self.ne[a, b] = self.ne[b, a] = True
        self.nbase = self.ne.copy()

    def run(self, depth_one=True) -> bool:
        return kernels.saturate(self.le, self.lt, self.ne, self.nbase, depth_one)

    def derived(self) -> set:
        out = set()
        terms, nv = self.terms, len(self.vars)
        n = len(terms)
        le, lt, ne = self.le, self.lt, self.ne
        for i in range(n):
            for j in range(n):
                if i >= nv and j >= nv:
                    continue
                a, b = terms[i], terms[j]
                if le[i, j]:
                    out.add(Comparison(a, LE, b))
                if lt[i, j]:
                    out.add(Comparison(a, LT, b))
                if term_key(a) < term_key(b):
                    if le[i, j] and le[j, i]:
                        out.add(Comparison(a, EQ, b))
                    if ne[i, j]:
                        out.add(Comparison(a, NEQ, b))
        return out


def closure(acs: ACSet, depth_one: bool = True) -> ACClosure:
    """Saturate ``acs`` under the nine elemental implications.

    ``depth_one`` restricts the disequality propagation rule to premises that it
    did not produce itself; ``depth_one=False`` is the unrestricted fixpoint.
    """
    return _closure_cached(acs, depth_one)


@lru_cache(maxsize=20000)
def _closure_cached(acs: ACSet, depth_one: bool) -> ACClosure:
    m = _Matrices(acs.comparisons, acs.universe, acs.relevant_constants)
    ok = (not acs.has_false) and m.run(depth_one)
    return ACClosure(acs, frozenset(m.derived()), ok)


@lru_cache(maxsize=200000)
def _consistent_set(comparisons: frozenset) -> bool:
    m = _Matrices(comparisons, (), ())
    return m.run(True)


def is_consistent(acs) -> bool:
    """True iff some rational assignment satisfies every comparison."""
    if isinstance(acs, ACSet):
        if acs.has_false:
            return False
        return _consistent_set(acs.comparisons)
    items = list(acs)
    if any(x is False for x in items):
        return False
    return _consistent_set(frozenset(x for x in items if x is not True))


def implies(acs: ACSet, target) -> bool:
    """Does ``acs`` entail the single comparison ``target``?"""
    if not is_consistent(acs):
        raise InconsistentACs("implication from an inconsistent AC set", witness_chain(acs))
    if isinstance(target, bool):
        return target
    uni = acs.universe | target.variables
    ext = ACSet(acs.comparisons, frozenset(uni), acs.relevant_constants | frozenset(target.constants))
    cl = closure(ext)
    if target.op == EQ:
        return (Comparison(target.lhs, LE, target.rhs) in cl.derived
                and Comparison(target.rhs, LE, target.lhs) in cl.derived)
    return target in cl.derived


def implication_holds(lhs, rhs_disjuncts: Iterable) -> bool:
    """Does lhs entail the disjunction of ``rhs_disjuncts``?

    Decided as inconsistency of lhs together with the negation of every disjunct.
    """
    comps = set(lhs.comparisons if isinstance(lhs, ACSet) else lhs)
    if isinstance(lhs, ACSet) and lhs.has_false:
        return True
    for b in rhs_disjuncts:
        if b is True:
            return True
        if b is False:
            continue
        comps.add(negate(b))
    return not _consistent_set(frozenset(comps))


def minimal_form(lhs, rhs_disjuncts: list) -> list:
    """Drop disjuncts greedily (latest first) while the implication still holds."""
    current = list(rhs_disjuncts)
    if not implication_holds(lhs, current):
        raise ValueError("implication does not hold")
    for i in range(len(current) - 1, -1, -1):
        trial = current[:i] + current[i + 1:]
        if implication_holds(lhs, trial):
            current = trial
    return current


def witness_chain(acs) -> list:
    """A minimal inconsistent subset of ``acs`` (empty if it is consistent)."""
    items = sorted(acs.comparisons if isinstance(acs, ACSet) else acs, key=_cmp_key)
    if isinstance(acs, ACSet) and acs.has_false:
        return []
    if _consistent_set(frozenset(items)):
        return []
    for c in list(items):
        trial = [x for x in items if x != c]
        if not _consistent_set(frozenset(trial)):
            items = trial
    return items


def satisfying_assignment(comparisons: Iterable, variables: Iterable = ()) -> dict:
    """A rational model of a consistent set of comparisons.

    Equal classes share a value, distinct classes get distinct values, and
    constants keep their own values.
    """
    comps = frozenset(comparisons)
    m = _Matrices(comps, variables, ())
    if not m.run(True):
        raise InconsistentACs("no model exists", witness_chain(comps))
    return _model_from(m)


def _model_from(m: _Matrices) -> dict:
    n = len(m.terms)
    le = m.le
    # classes of mutually <= terms
    cls = [-1] * n
    reps = []
    for i in range(n):
        if cls[i] >= 0:
            continue
        k = len(reps)
        reps.append(i)
        for j in range(n):
            if le[i, j] and le[j, i]:
                cls[j] = k
    nk = len(reps)
    members = [[i for i in range(n) if cls[i] == k] for k in range(nk)]
    # topological order by the number of strict predecessors
    below = [sum(1 for h in range(nk) if h != k and le[reps[h], reps[k]]) for k in range(nk)]
    order = sorted(range(nk), key=lambda k: (below[k], k))
    nv = len(m.vars)
    value_of = {}
    for k in order:
        cs = [m.terms[i] for i in members[k] if i >= nv]
        if cs:
            value_of[k] = cs[0]
    seq_vals = _interpolate([value_of.get(k) for k in order])
    out = {}
    for pos, k in enumerate(order):
        for i in members[k]:
            if i < nv:
                out[m.terms[i]] = seq_vals[pos]
    return out


def _interpolate(seq: list) -> list:
    """Fill None entries of an increasing sequence with distinct rationals.

    Gaps between two known values use evenly spaced points; leading entries
    step down by 1 from the first known value and trailing ones step up by 1.
    """
    known = [i for i, v in enumerate(seq) if v is not None]
    out = list(seq)
    if not known:
        return [Fraction(i) for i in range(len(seq))]
    first, last = known[0], known[-1]
    for i in range(first):
        out[i] = seq[first] - (first - i)
    for i in range(last + 1, len(seq)):
        out[i] = seq[last] + (i - last)
    for a, b in zip(known, known[1:]):
        span = b - a
        for i in range(a + 1, b):
            out[i] = seq[a] + (seq[b] - seq[a]) * Fraction(i - a, span)
    return out


def mirror(c: Comparison) -> Comparison:
    """Negate every constant and reverse the order (x -> -x)."""
    def f(t):
        return -t if is_const(t) else t

    return compare(f(c.rhs), c.op, f(c.lhs))
