"""Hard containment instances from quantified Boolean formulas.

A formula  forall p1..pn exists q1..qm [psi]  is turned into a pair (Q1, Q2)
such that the formula is true iff Q2 is contained in Q1.  Q2 carries ground
truth tables over two constants e and f; per universal variable a small gadget
forces each canonical database of Q2 to fix that variable's truth value.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from fractions import Fraction

from .ac_core import GT, LE, LT, NEQ, compare
from .query_model import Atom, CQACQuery, make_query

E = Fraction(1)
F = Fraction(0)

OSI_NEQ = "OSI_NEQ"
OLSI_CONST = "OLSI_CONST"
OLSI_CLSI_NEQ = "OLSI_CLSI_NEQ"
NEQ_ONLY = "NEQ_ONLY"
VARIANTS = (OSI_NEQ, OLSI_CONST, OLSI_CLSI_NEQ, NEQ_ONLY)

# AC types each variant is expected to use: (contained query, containing query)
INVENTORY = {
    OSI_NEQ: ({"var<const", "const<var", "var!=const"}, {"var<const", "const<var"}),
    OLSI_CONST: ({"var<=const", "var<const"}, {"var<const"}),
    OLSI_CLSI_NEQ: ({"var<=const", "var!=var"}, {"var<const"}),
    NEQ_ONLY: ({"var!=var"}, {"var!=var"}),
}

MAX_EVAL_VARS = 20


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Pi2Formula:
    universal_vars: tuple
    existential_vars: tuple
    body: object  # a variable name, or (op, child, ...) with op in and/or/not

    def __post_init__(self):
        names = set(self.universal_vars) | set(self.existential_vars)
        if len(names) != len(self.universal_vars) + len(self.existential_vars):
            raise FormulaError("quantified variables must be distinct")
        for leaf in _leaves(self.body):
            if leaf not in names:
                raise FormulaError(f"undeclared variable {leaf}")

    def __str__(self) -> str:
        inner = f"(exists ({' '.join(self.existential_vars)}) {_show(self.body)})"
        return f"(forall ({' '.join(self.universal_vars)}) {inner})"


def _leaves(node):
    if isinstance(node, str):
        yield node
    else:
        for child in node[1:]:
            yield from _leaves(child)


def _show(node) -> str:
    if isinstance(node, str):
        return node
    return "(" + " ".join([node[0]] + [_show(c) for c in node[1:]]) + ")"


# ---------------------------------------------------------------------------
# text format


def _sexp(text: str):
    tokens = re.findall(r"[()]|[^\s()]+", text)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaError("unexpected end of formula")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise FormulaError("unexpected ')'")
        if tok != "(":
            return tok
        items = []
        while True:
            if pos >= len(tokens):
                raise FormulaError("missing ')'")
            if tokens[pos] == ")":
                pos += 1
                return items
            items.append(read())

    out = read()
    if pos != len(tokens):
        raise FormulaError("trailing input after formula")
    return out


def _tree(x):
    if isinstance(x, str):
        if x in ("and", "or", "not", "forall", "exists"):
            raise FormulaError(f"keyword {x} used as a variable")
        return x
    if not x:
        raise FormulaError("empty expression")
    op = x[0]
    if op == "not":
        if len(x) != 2:
            raise FormulaError("not takes one argument")
        return ("not", _tree(x[1]))
    if op in ("and", "or"):
        if len(x) < 3:
            raise FormulaError(f"{op} takes at least two arguments")
        node = _tree(x[1])
        for child in x[2:]:
            node = (op, node, _tree(child))  # binary, left-associated
        return node
    raise FormulaError(f"unknown connective {op!r}")


def parse_formula(text: str) -> Pi2Formula:
    """Parse ``(forall (p..) (exists (q..) psi))``; either quantifier may be left out."""
    x = _sexp(text)
    universal, existential = [], []
    if isinstance(x, list) and x and x[0] == "forall":
        if len(x) != 3 or not isinstance(x[1], list):
            raise FormulaError("expected (forall (vars) body)")
        universal, x = x[1], x[2]
    if isinstance(x, list) and x and x[0] == "exists":
        if len(x) != 3 or not isinstance(x[1], list):
            raise FormulaError("expected (exists (vars) body)")
        existential, x = x[1], x[2]
    return Pi2Formula(tuple(universal), tuple(existential), _tree(x))


# ---------------------------------------------------------------------------
# evaluation


def _truth(node, val) -> bool:
    if isinstance(node, str):
        return val[node]
    op = node[0]
    if op == "not":
        return not _truth(node[1], val)
    if op == "and":
        return _truth(node[1], val) and _truth(node[2], val)
    return _truth(node[1], val) or _truth(node[2], val)


def eval_pi2sat(f: Pi2Formula) -> bool:
    """Exhaustive check that every universal assignment has an existential witness."""
    n, m = len(f.universal_vars), len(f.existential_vars)
    if n + m > MAX_EVAL_VARS:
        raise FormulaError(f"{n + m} variables exceed the exhaustive bound {MAX_EVAL_VARS}")
    for ps in itertools.product((False, True), repeat=n):
        val = dict(zip(f.universal_vars, ps))
        found = False
        for qs in itertools.product((False, True), repeat=m):
            val.update(zip(f.existential_vars, qs))
            if _truth(f.body, val):
                found = True
                break
        if not found:
            return False
    return True


# ---------------------------------------------------------------------------
# reduction


def truth_tables() -> list:
    """Ground atoms encoding and, or, not and true over e and f."""
    facts = []
    for x, y in itertools.product((E, F), repeat=2):
        facts.append(Atom("a", (x, y, E if x == E and y == E else F)))
    for x, y in itertools.product((E, F), repeat=2):
        facts.append(Atom("o", (x, y, E if E in (x, y) else F)))
    facts += [Atom("n", (E, F)), Atom("n", (F, E)), Atom("t", (E,))]
    return facts


def _gadget(variant: str, i: int, truth_var: str):
    """(Q1 atoms, Q1 ACs, Q2 atoms, Q2 ACs) for universal variable number i."""
    p = f"a{i}"
    seven, five = Fraction(7), Fraction(5)
    if variant == OSI_NEQ:
        t1, t2 = f"Ta{i}", f"Tb{i}"
        u, v, w = f"U{i}", f"V{i}", f"W{i}"
        return ([Atom(p, (t1, truth_var)), Atom(p, (t2, truth_var))],
                [compare(t1, LT, seven), compare(seven, LT, t2)],
                [Atom(p, (u, E)), Atom(p, (v, F)), Atom(p, (w, E)), Atom(p, (w, F))],
                [compare(u, LT, seven), compare(seven, LT, v), compare(w, NEQ, seven)])
    if variant == OLSI_CONST:
        x, y = f"X{i}", f"Y{i}"
        return ([Atom(p, (x, five, truth_var))],
                [compare(x, LT, five)],
                [Atom(p, (x, five, E)), Atom(p, (y, x, F))],
                [compare(x, LE, five), compare(y, LT, five)])
    if variant == OLSI_CLSI_NEQ:
        x, y = f"X{i}", f"Y{i}"
        return ([Atom(p, (x, truth_var))],
                [compare(x, LT, five)],
                [Atom(p, (x, E)), Atom(p, (y, F))],
                [compare(x, LE, five), compare(y, LE, five), compare(x, NEQ, y)])
    if variant == NEQ_ONLY:
        x, y, z = f"X{i}", f"Y{i}", f"Z{i}"
        return ([Atom(p, (x, y, truth_var))],
                [compare(x, NEQ, y)],
                [Atom(p, (x, y, E)), Atom(p, (y, z, F))],
                [compare(x, NEQ, z)])
    raise ValueError(f"unknown gadget variant {variant!r}")


def reduce_pi2sat(f: Pi2Formula, variant: str = OSI_NEQ):
    """Build (q1, q2) with: f is true iff q2 is contained in q1."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown gadget variant {variant!r}")
    n = len(f.universal_vars)
    leaf = {p: f"T{i + 1}" for i, p in enumerate(f.universal_vars)}
    leaf.update({q: f"T{n + j + 1}" for j, q in enumerate(f.existential_vars)})
    b1, c1, b2, c2 = [], [], list(truth_tables()), []
    for i in range(1, n + 1):
        g1, a1, g2, a2 = _gadget(variant, i, f"T{i}")
        b1 += g1
        c1 += a1
        b2 += g2
        c2 += a2
    counter = itertools.count(1)

    def encode(node) -> str:
        if isinstance(node, str):
            return leaf[node]
        out = f"N{next(counter)}"
        if node[0] == "not":
            b1.append(Atom("n", (encode(node[1]), out)))
        else:
            x, y = encode(node[1]), encode(node[2])
            b1.append(Atom("a" if node[0] == "and" else "o", (x, y, out)))
        return out

    b1.append(Atom("t", (encode(f.body),)))
    q1 = make_query(Atom("q", ()), b1, c1)
    q2 = make_query(Atom("q", ()), b2, c2)
    return q1, q2


def random_formula(rng: random.Random, n: int, m: int, size: int) -> Pi2Formula:
    """A random formula over n universal and m existential variables with at most
    ``size`` internal nodes."""
    ps = [f"p{i + 1}" for i in range(n)]
    qs = [f"q{j + 1}" for j in range(m)]
    names = ps + qs
    if not names:
        raise FormulaError("a formula needs at least one variable")

    def build(budget):
        if budget <= 0 or rng.random() < 0.25:
            return rng.choice(names), 0
        op = rng.choice(("and", "or", "not"))
        if op == "not":
            child, used = build(budget - 1)
            return ("not", child), used + 1
        left, ul = build((budget - 1) // 2)
        right, ur = build(budget - 1 - ul)
        return (op, left, right), ul + ur + 1

    body, _ = build(size)
    return Pi2Formula(tuple(ps), tuple(qs), body)
