"""Random CQAC pairs for agreement testing."""

from __future__ import annotations

import random
from fractions import Fraction

from .ac_core import EQ, GE, GT, LE, LT, NEQ, compare, si_parts
from .query_model import Atom, make_query

PREDICATES = (("a", 2), ("b", 1))
OPS = (LT, LE, EQ, NEQ, GE, GT)


def random_query(rng: random.Random, constants=(3, 5, 7), max_atoms=3, max_vars=4,
                 max_acs=3, ops=OPS, var_var=True, head_arity=0):
    names = [f"X{i}" for i in range(rng.randint(1, max_vars))]
    consts = [Fraction(c) for c in constants]
    body = []
    for _ in range(rng.randint(1, max_atoms)):
        pred, arity = rng.choice(PREDICATES)
        body.append(Atom(pred, tuple(rng.choice(names) for _ in range(arity))))
    used = sorted({v for a in body for v in a.terms}, key=names.index)
    head = Atom("q", tuple(rng.choice(used) for _ in range(head_arity)))
    comps = []
    for _ in range(rng.randint(0, max_acs)):
        op = rng.choice(ops)
        x = rng.choice(used)
        if var_var and rng.random() < 0.4 and len(used) > 1:
            y = rng.choice([v for v in used if v != x])
        else:
            y = rng.choice(consts)
        c = compare(x, op, y)
        if c is not True and c is not False:
            comps.append(c)
    return make_query(head, body, comps, check=False)


def extend(rng: random.Random, q, constants=(3, 5, 7), max_vars=4, max_acs=3, **_):
    """A query built from q's body plus extra atoms and comparisons.

    Such queries are often contained in q, which balances the corpus.
    """
    names = list(q.variables) + [f"Y{i}" for i in range(max_vars - len(q.variables))]
    body = list(q.body)
    for _ in range(rng.randint(0, 2)):
        pred, arity = rng.choice(PREDICATES)
        body.append(Atom(pred, tuple(rng.choice(names) for _ in range(arity))))
    used = sorted({v for a in body for v in a.terms})
    comps = []
    for _ in range(rng.randint(0, max_acs + 1)):
        x = rng.choice(used)
        y = rng.choice(used) if rng.random() < 0.3 else Fraction(rng.choice(constants))
        c = compare(x, rng.choice(OPS), y)
        if c is not True and c is not False:
            comps.append(c)
    return make_query(q.head, body, comps, check=False)


def _tighter(rng, c, constants):
    """A comparison on the same variable that implies, or nearly implies, c."""
    p = si_parts(c)
    if p is None:
        return c
    v, op, k = p
    ks = sorted(Fraction(x) for x in constants)
    if op in (LT, LE):
        cands = [x for x in ks if x <= k] or [k]
        return compare(v, rng.choice((LT, LE)), rng.choice(cands))
    cands = [x for x in ks if x >= k] or [k]
    return compare(v, rng.choice((GT, GE)), rng.choice(cands))


def image(rng: random.Random, q, constants=(3, 5, 7), **kw):
    """A homomorphic image of q with its comparisons mostly tightened.

    Variables may be merged, atoms are added, and each comparison is kept,
    tightened or replaced, so the result is often but not always contained in q.
    """
    vs = list(q.variables)
    target = {v: rng.choice(vs[: i + 1]) if rng.random() < 0.2 else v for i, v in enumerate(vs)}
    base = q.substitute(target)
    body = list(base.body) + list(random_query(rng, constants=constants, **kw).body[: rng.randint(0, 2)])
    comps = []
    for c in base.comparisons:
        r = rng.random()
        if r < 0.5:
            comps.append(_tighter(rng, c, constants))
        elif r < 0.8:
            comps.append(c)
    extra = extend(rng, make_query(base.head, body, []), constants=constants).comparisons
    comps += list(extra[: rng.randint(0, 1)])
    used = {v for a in body for v in a.variables}
    comps = [c for c in comps if c is not True and c is not False and c.variables <= used]
    return make_query(base.head, body, comps, check=False)


def random_pair(rng: random.Random, consistent=True, q1_ops=OPS, q1_var_var=True, **kw):
    """A pair (q1, q2) with q2 consistent when ``consistent`` is set.

    ``q1_ops`` and ``q1_var_var`` restrict the containing query's comparisons,
    which steers pairs into a chosen fragment.
    """
    while True:
        q1 = random_query(rng, ops=q1_ops, var_var=q1_var_var, **kw)
        r = rng.random()
        if r < 0.35:
            q2 = extend(rng, q1, **kw)
        elif r < 0.7:
            q2 = image(rng, q1, **kw)
        else:
            q2 = random_query(rng, **kw)
        if q1.head.arity != q2.head.arity:
            continue
        if consistent and (q2.inconsistent or not _ok(q2)):
            continue
        return q1, q2


def _ok(q):
    from .ac_core import is_consistent

    return is_consistent(q.acs)


def corpus(n: int, seed: int = 0, **kw) -> list:
    rng = random.Random(seed)
    return [random_pair(rng, **kw) for _ in range(n)]


def rsi1_query(rng: random.Random, constants=(3, 5, 7), closed=True, max_atoms=3, max_vars=4, head_arity=0):
    """A query with left semi-intervals and one right semi-interval."""
    q = random_query(rng, constants=constants, max_atoms=max_atoms, max_vars=max_vars,
                     max_acs=0, head_arity=head_arity)
    vs = list(q.variables)
    ks = [Fraction(c) for c in constants]
    comps = [compare(rng.choice(vs), GE if closed or rng.random() < 0.5 else GT, rng.choice(ks))]
    for _ in range(rng.randint(1, 2)):
        comps.append(compare(rng.choice(vs), LE if closed or rng.random() < 0.5 else LT, rng.choice(ks)))
    return make_query(q.head, q.body, comps, check=False)


def rsi1_corpus(n: int, seed: int = 0, closed=True, **kw) -> list:
    """Pairs whose containing query has one right semi-interval; the contained
    query is an image of it or a random query."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        q1 = rsi1_query(rng, closed=closed, **kw)
        q2 = image(rng, q1) if rng.random() < 0.7 else random_query(rng, head_arity=q1.head.arity)
        if q2.inconsistent or not _ok(q2):
            continue
        out.append((q1, q2))
    return out


def random_view(rng: random.Random, name: str, source=None, constants=(3, 5, 7), max_atoms=2, max_vars=3):
    """A view with semi-interval comparisons and, sometimes, one X <= Y.

    With ``source`` the body is taken from a piece of that query.
    """
    if source is not None and rng.random() < 0.6:
        k = rng.randint(1, len(source.body))
        start = rng.randrange(len(source.body) - k + 1)
        body = list(source.body[start:start + k])
    else:
        body = list(random_query(rng, constants=constants, max_atoms=max_atoms, max_vars=max_vars, max_acs=0).body)
    vs = sorted({v for a in body for v in a.variables})
    head = [v for v in vs if rng.random() < 0.6] or [rng.choice(vs)]
    comps = []
    for _ in range(rng.randint(0, 2)):
        x = rng.choice(vs)
        if len(vs) > 1 and rng.random() < 0.25:
            y = rng.choice([v for v in vs if v != x])
            c = compare(x, rng.choice((LE, LT)), y)
        else:
            c = compare(x, rng.choice((LE, LT, GE, GT)), Fraction(rng.choice(constants)))
        if c is not True and c is not False:
            comps.append(c)
    return make_query(Atom(name, tuple(head)), body, comps, check=False)


def chain_query(rng: random.Random, constants=(3, 5, 7), head_arity=0):
    """a(X,Y), a(Y,Z) with a right semi-interval on X and left ones on Z or Y."""
    ks = [Fraction(c) for c in constants]
    comps = [compare("X", GE, rng.choice(ks)), compare("Z", LE, rng.choice(ks))]
    if rng.random() < 0.3:
        comps.append(compare("Y", LE, rng.choice(ks)))
    head = Atom("q", tuple(rng.choice(("X", "Y", "Z")) for _ in range(head_arity)))
    return make_query(head, [Atom("a", ("X", "Y")), Atom("a", ("Y", "Z"))], comps, check=False)


def split_chain_case(rng: random.Random, constants=(3, 5, 7), values=(2, 4, 5, 6, 8), max_facts=4, head_arity=0):
    """Two views each keep one end of a chain query and constrain the other end.

    Whether an answer is certain then hinges on comparing values across view
    facts, the situation where couplings between mappings are needed.
    """
    ks = [Fraction(c) for c in constants]
    q = chain_query(rng, constants, head_arity)
    hv = list(dict.fromkeys(q.head.terms))
    body = list(q.body)

    def view(name, keep, guard):
        head = tuple(dict.fromkeys(list(keep) + hv))
        return make_query(Atom(name, head), body, [guard], check=False)

    v1 = view("V1", ["Z"], compare("X", rng.choice((GE, GT)), rng.choice(ks)))
    v2 = view("V2", ["X"], compare("Z", rng.choice((LE, LT)), rng.choice(ks)))
    views = [v1, v2]
    if rng.random() < 0.4:
        views.append(random_view(rng, "V3", q, constants))
    vals = [Fraction(x) for x in values]
    facts = set()
    for _ in range(rng.randint(1, max_facts)):
        v = rng.choice(views[:2])
        facts.add(Atom(v.name, tuple(rng.choice(vals) for _ in v.head.terms)))
    from .query_model import Database

    return q, views, Database(frozenset(facts))


def coupled_view_case(rng: random.Random, constants=(3, 5, 7), values=(2, 4, 5, 6, 8), head_arity=0):
    """One view holding two copies of a chain query, linked by an order
    comparison between hidden variables.

    Each copy satisfies some of the query's semi-intervals; the hidden
    comparison may let the copies cover each other's missing ones.
    """
    q = chain_query(rng, constants, head_arity)
    copies = [{v: f"{v}{k}" for v in ("X", "Y", "Z")} for k in (1, 2)]
    body, comps = [], []
    for ren in copies:
        body += [a.substitute(ren) for a in q.body]
        for c in q.comparisons:
            right = si_parts(c)[1] in (GE, GT)
            # the first copy tends to keep right semi-intervals, the second left ones
            if rng.random() < (0.85 if right == (ren is copies[0]) else 0.3):
                comps.append(c.substitute(ren))
    if rng.random() < 0.6:
        x, y = "Z1", "X2"
    else:
        x = rng.choice([f"{v}1" for v in "XYZ"])
        y = rng.choice([f"{v}2" for v in "XYZ"])
        if rng.random() < 0.5:
            x, y = y, x
    comps.append(compare(x, rng.choice((LE, LT)), y))
    vs = sorted({v for a in body for v in a.variables})
    head = [v for v in vs if rng.random() < 0.15]
    views = [make_query(Atom("V1", tuple(head)), body, comps, check=False)]
    vals = [Fraction(v) for v in values]
    from .query_model import Database

    facts = {Atom("V1", tuple(rng.choice(vals) for _ in head))}
    return q, views, Database(frozenset(facts))


def mcr_case(rng: random.Random, constants=(3, 5, 7), values=(2, 4, 5, 6, 8), max_facts=4, head_arity=0):
    """(query, views, view instance) for certain-answer testing.

    The instance is a sample of the views over a database that holds a
    frozen copy of the query body, so that answers are often certain.
    """
    from .ac_core import is_consistent
    from .query_model import Database, views_of

    r = rng.random()
    if r < 0.2:
        return coupled_view_case(rng, constants, values, head_arity)
    if r < 0.4:
        return split_chain_case(rng, constants, values, max_facts, head_arity)
    if r < 0.65:
        q = chain_query(rng, constants, head_arity)
    else:
        q = rsi1_query(rng, constants=constants, max_atoms=2, max_vars=3, head_arity=head_arity)
    views = []
    for i in range(rng.randint(1, 3)):
        v = random_view(rng, f"V{i + 1}", q, constants)
        if not v.inconsistent and is_consistent(v.acs):
            views.append(v)
    vals = [Fraction(x) for x in values]
    facts = set()
    for _ in range(rng.randint(1, 2)):
        assign = {v: rng.choice(vals) for v in q.variables}
        facts |= {a.substitute(assign) for a in q.body}
    for _ in range(rng.randint(0, 2)):
        pred, arity = rng.choice(PREDICATES)
        facts.add(Atom(pred, tuple(rng.choice(vals) for _ in range(arity))))
    vfacts = sorted(views_of(Database(frozenset(facts)), views).facts, key=str)
    rng.shuffle(vfacts)
    return q, views, Database(frozenset(vfacts[: rng.randint(0, max_facts)]))
