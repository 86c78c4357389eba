"""Maximally contained rewritings for semi-interval queries, and certain answers.

The query becomes a Datalog program (see ``transform``); every view becomes a
comparison-free view whose order facts are spelled out by ``U`` atoms; inverse
rules with Skolem terms then recover base facts from view facts.  Reading the
``U`` predicates back as comparisons gives a Datalog program with comparisons
over the original views.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .ac_core import GE, GT, LE, LT, si_parts
from .containment import (
    FragmentRefusal,
    ScaleRefusal,
    entailment_check,
    iter_canonical_databases,
    merge_equalities,
    scale_bound,
)
from .datalog import (
    DatalogProgram,
    builtin_meaning,
    derive,
    evaluate_program,
    frozen_database,
    parse_si_predicate,
    rule,
    si_predicate,
)
from .query_model import Atom, CQACQuery, Database, expand, evaluate, make_query, rectify, view_map
from .terms import Func, fresh_name, is_const, is_var
from .transform import _merged_sis, _si_implies, link_rules, to_cq, to_datalog

SI_OPS = (LE, LT, GE, GT)
UTR = "Utr"


class UndefinedCertainAnswers(ValueError):
    """No database produces the view instance, so certain answers are not defined."""


@dataclass
class MCRProgram:
    program: DatalogProgram
    provenance: list  # one origin tag per rule
    query: CQACQuery = None
    views: list = field(default_factory=list)

    @property
    def rules(self) -> list:
        return self.program.rules

    def __str__(self) -> str:
        p = self.program
        lines = []
        if p.edb_predicates:
            lines.append("@edb " + ", ".join(sorted(p.edb_predicates)) + ".")
        lines.append("@idb " + ", ".join(sorted(p.idb_predicates)) + ".")
        if p.builtin_predicates:
            lines.append("@builtin " + ", ".join(sorted(p.builtin_predicates)) + ".")
        lines.append(f"@query {p.query_predicate}.")
        last = None
        for r, tag in zip(p.rules, self.provenance):
            if tag != last:
                lines.append(f"% {tag}")
                last = tag
            lines.append(str(r))
        return "\n".join(lines) + "\n"


def _constants(q: CQACQuery, views) -> list:
    out = set(q.constants) if q is not None else set()
    for v in views:
        out |= set(v.constants)
    return sorted(out)


def cq_view_name(name: str) -> str:
    return name + "'"


def build_cq_views(views, constants=()) -> list:
    """Comparison-free counterparts of the views followed by the auxiliary views.

    Each view's comparisons are replaced by ``U`` atoms over the closure taken
    with ``constants`` (plus the views' own).  The auxiliary views are
    ``u(X,Y) :- U(X,Y)`` and ``u_op_c(X) :- U_op_c(X)`` for every constant.
    """
    views = list(views)
    consts = sorted(set(constants) | set(_constants(None, views)))
    out = []
    for v in views:
        cq = to_cq(v, consts, strict=True)
        if cq.inconsistent:
            continue  # a view that never holds contributes nothing
        out.append(cq.rename_head(cq_view_name(v.name)))
    out.append(make_query(Atom("u", ("X", "Y")), [Atom("U", ("X", "Y"))]))
    for c in consts:
        for op in SI_OPS:
            out.append(make_query(Atom(si_predicate("u", op, c), ("X",)), [Atom(si_predicate("U", op, c), ("X",))]))
    return out


def is_auxiliary(view: CQACQuery) -> bool:
    return len(view.body) == 1 and builtin_meaning(view.body[0].predicate) is not None and (
        view.name == "u" or view.name.startswith("u_"))


def skolem_name(view_name: str, var: str) -> str:
    return f"f_{view_name.rstrip(chr(39))}_{var}"


def inverse_rules(views_cq, rename=None) -> list:
    """One rule per view subgoal, recovering it from a view fact.

    Nondistinguished view variables become Skolem terms over the distinguished
    ones.  ``rename`` maps view names to the predicate used in the rule bodies.
    """
    out = []
    for v in views_cq:
        args = tuple(dict.fromkeys(t for t in v.head.terms if is_var(t)))
        skolem = {x: Func(skolem_name(v.name, x), args) for x in v.variables if x not in args}
        name = (rename or {}).get(v.name, v.name)
        body = Atom(name, v.head.terms)
        for a in v.body:
            r = rule(a.substitute(skolem), [body])
            if r not in out:
                out.append(r)
    return out


CLOSED = "closed"
OPEN_RSI = "closed LSIs, open RSI"
OPEN_LSI = "open LSIs, closed RSI"
OPEN_ALL = "open LSIs, open RSI"


def _view_closed_sis(views) -> set:
    out = set()
    for v in views:
        for c in v.comparisons:
            p = si_parts(c)
            if p is not None and p[1] in (LE, GE):
                out.add((p[1], p[2]))
    return out


def mcr_fragment(q: CQACQuery, views) -> str:
    """Which MCR fragment q falls in; FragmentRefusal when none.

    Closed semi-intervals with at most one right one always qualify.  Open ones
    qualify in three shapes, each keeping the query's open constants away from
    closed semi-intervals of the views.
    """
    try:
        _, sis = _merged_sis(q, allow_open=True)
    except FragmentRefusal as e:
        raise FragmentRefusal(f"the query is not a single-right-semi-interval query: {e}") from None
    lefts = [(op, c) for _, op, c in sis if op in (LE, LT)]
    rights = [(op, c) for _, op, c in sis if op in (GE, GT)]
    open_l = {op for op, _ in lefts} == {LT}
    open_r = bool(rights) and rights[0][0] == GT
    if all(op in (LE, GE) for _, op, _c in sis):
        return CLOSED
    if any(op == LT for op, _ in lefts) and not open_l:
        raise FragmentRefusal("open and closed left semi-intervals are mixed")
    closed_views = _view_closed_sis(views)
    if not open_l:
        c = rights[0][1]
        if (GE, c) in closed_views:
            raise FragmentRefusal(f"the open right semi-interval's constant {c} is shared with a closed one in a view")
        return OPEN_RSI
    lconsts = [c for _, c in lefts]
    if len(set(lconsts)) != len(lconsts):
        raise FragmentRefusal("the open left semi-intervals must use distinct constants")
    if not open_r:
        bad = [c for c in lconsts if (LE, c) in closed_views]
        if bad:
            raise FragmentRefusal(f"constant {bad[0]} of an open left semi-interval is shared with a closed one in a view")
        return OPEN_LSI
    allc = lconsts + [c for _, c in rights]
    if len(set(allc)) != len(allc):
        raise FragmentRefusal("the semi-intervals must use distinct constants")
    bad = [c for c in allc if (LE, c) in closed_views or (GE, c) in closed_views]
    if bad:
        raise FragmentRefusal(f"constant {bad[0]} is shared with a closed semi-interval in a view")
    return OPEN_ALL


def mcr_rsi1(q: CQACQuery, views) -> MCRProgram:
    """MCR in Datalog with comparisons for a query whose comparisons are
    semi-intervals with at most one right semi-interval (see ``mcr_fragment``
    for the open ones allowed)."""
    views = list(views)
    frag = mcr_fragment(q, views)
    allow_open = frag != CLOSED
    if q.inconsistent or merge_equalities(q).inconsistent:
        # nothing is ever an answer
        return _assemble([rule(q.head, q.body, [False])], ["query"], q.name, q, views)
    consts = _constants(q, views)
    relevant = [(op, c) for c in consts for op in SI_OPS]
    rules, tags = [], []

    def add(rs, tag):
        for r in rs:
            if r not in rules:
                rules.append(r)
                tags.append(tag)

    # the query program; its comparisons with U go through the closure Utr
    qp = to_datalog(q, (), allow_open=allow_open)
    for r in qp.rules:
        body = [Atom(UTR, a.terms) if a.predicate == "U" else a for a in r.body]
        tag = "query" if r.head.predicate == qp.query_predicate else (
            "mapping" if r.head.predicate.startswith("J_") else "coupling")
        add([rule(r.head, body, r.comparisons)], tag)
    kinds = list(dict.fromkeys((op, c) for _, op, c in _merged_sis(q, allow_open)[1]))
    add(link_rules(kinds, relevant), "link")
    add([rule(Atom(UTR, ("X", "Y")), [Atom("U", ("X", "Y"))]),
         rule(Atom(UTR, ("X", "Y")), [Atom("U", ("X", "Z")), Atom(UTR, ("Z", "Y"))])], "transitive closure")
    # order facts reached through Utr imply the query's semi-intervals
    trans = []
    for op, c in sorted(set(relevant), key=lambda s: (s[1], s[0])):
        for op1, c1 in kinds:
            if not _si_implies(op, c, op1, c1):
                continue
            edge = ("X", "Y") if op in (LE, LT) else ("Y", "X")
            trans.append(rule(Atom(si_predicate("I", op1, c1), ("X",)),
                              [Atom(si_predicate("U", op, c), ("Y",)), Atom(UTR, edge)]))
    add(trans, "transitive link")
    hv = merge_equalities(q).head_variables
    if hv:
        rules, tags = _with_head(rules, tags, merge_equalities(q), hv, views)
    cq_views = build_cq_views(views, consts)
    back = {cq_view_name(v.name): v.name for v in views}
    add(inverse_rules([v for v in cq_views if not is_auxiliary(v)], back), "inverse")
    return _assemble(rules, tags, qp.query_predicate, q, views)


def _is_ij(a: Atom) -> bool:
    p = parse_si_predicate(a.predicate)
    return p is not None and p[0] in ("I", "J")


def _with_head(rules, tags, m: CQACQuery, hv, views):
    """Give every I and J atom the query's head variables as extra arguments.

    Two mappings may then only be combined when they agree on the answer
    tuple.  Rules that introduce I facts from order facts draw the head tuple
    from ``Hd``, the head projections of the query body.
    """
    taken = {v.name for v in views} | {a.predicate for r in rules for a in (r.head,) + r.body}
    hd = "Hd" if "Hd" not in taken else fresh_name("Hd", taken)
    params = tuple(f"H{i + 1}" for i in range(len(hv)))
    out, out_tags = [], []
    for r, tag in zip(rules, tags):
        ps = tuple(hv) if tag in ("query", "mapping") else params

        def ext(a):
            return Atom(a.predicate, a.terms + ps) if _is_ij(a) else a

        if not (_is_ij(r.head) or any(_is_ij(a) for a in r.body)):
            out.append(r)
        else:
            body = [ext(a) for a in r.body]
            if tag in ("link", "transitive link"):
                body.append(Atom(hd, params))
            out.append(rule(ext(r.head), body, r.comparisons))
        out_tags.append(tag)
    out.append(rule(Atom(hd, tuple(hv)), list(m.body)))
    out_tags.append("answer domain")
    return out, out_tags


def _assemble(rules, tags, query_predicate, q, views) -> MCRProgram:
    # the auxiliary views read back as comparisons: U and U_op_c are builtins
    builtins = set()
    for r in rules:
        for a in (r.head,) + r.body:
            if builtin_meaning(a.predicate) is not None:
                builtins.add(a.predicate)
    edb = frozenset(v.name for v in views)
    heads = {r.head.predicate for r in rules}
    idb = frozenset(heads - builtins)
    used = {a.predicate for r in rules for a in r.body}
    edb = edb | frozenset(used - heads - builtins)
    prog = DatalogProgram(rules, query_predicate, frozenset(builtins), edb, idb)
    return MCRProgram(prog, list(tags), q, list(views))


def split_head_comparisons(q: CQACQuery):
    """(comparisons over head variables only, the rest)."""
    hv = set(q.head_variables)
    head, rest = [], []
    for c in q.comparisons:
        (head if c.variables and c.variables <= hv else rest).append(c)
    return head, rest


def mcr_rsi1_plus(q: CQACQuery, views) -> MCRProgram:
    """MCR for a query whose comparisons among head variables are arbitrary.

    Those comparisons are stripped, the core gets an MCR, and one last rule
    puts them back.
    """
    views = list(views)
    head_acs, rest = split_head_comparisons(q)
    names = {v.name for v in views} | {a.predicate for a in q.body}
    core_name = fresh_name(q.name, names)
    core = make_query(Atom(core_name, q.head.terms), q.body, rest, check=False)
    if q.inconsistent:
        raise FragmentRefusal("the query has inconsistent comparisons")
    m = mcr_rsi1(core, views)
    last = rule(q.head, [Atom(core_name, q.head.terms)], head_acs)
    rules = m.program.rules + [last]
    tags = m.provenance + ["head comparisons"]
    return _assemble(rules, tags, q.name, q, views)


# ---------------------------------------------------------------------------
# rewritings and certain answers


def check_contained_rewriting(r: CQACQuery, q: CQACQuery, views, method: str = "entailment") -> bool:
    """Is the rewriting, expanded through the views, contained in q?

    ``transform`` decides the same question through the Datalog
    transformation, for queries inside its fragment.
    """
    e = expand(rectify(r, views), views)
    if method == "transform":
        from .transform import containment_via_transform

        return containment_via_transform(q, e)
    return entailment_check(q, e).holds


def rewriting_in_expansions(r: CQACQuery, expansions, bound: int = None) -> bool:
    """Is r contained in the union of the given rewritings (all over the same views)?"""
    bound = scale_bound() if bound is None else bound
    consts = set(r.constants)
    for e in expansions:
        consts |= set(e.constants)
    size = len(r.variables) + len(consts)
    if size > bound:
        raise ScaleRefusal(f"{size} variables and constants exceed the bound {bound}")
    for assign, db in iter_canonical_databases(r, extra_constants=consts):
        head = tuple(assign.get(t, t) if is_var(t) else t for t in r.head.terms)
        if not any(head in evaluate(e, db) for e in expansions):
            return False
    return True


def instance_constants(instance: Database) -> set:
    return {t for a in instance.facts for t in a.terms if is_const(t)}


def certain_answers(mcr: MCRProgram, instance: Database) -> set:
    """Answers the MCR derives on the view instance, over the instance's constants."""
    consts = instance_constants(instance)
    return {t for t in evaluate_program(mcr.program, instance) if all(x in consts for x in t)}


def instance_expansion(instance: Database, views) -> CQACQuery:
    """The view facts replaced by view bodies: a query whose constants are the
    instance values and whose variables stand for the unknown values."""
    vm = view_map(views)
    facts = sorted(instance.facts, key=lambda a: (a.predicate, tuple(map(str, a.terms))))
    for a in facts:
        if a.predicate not in vm:
            raise ValueError(f"{a.predicate} is not a view")
    return expand(make_query(Atom("R_I", ()), facts, check=False), vm)


def certain_answers_oracle(q: CQACQuery, views, instance: Database, bound: int = None,
                           method: str = "canonical") -> set:
    """Certain answers by brute force.

    ``canonical`` intersects q's answers over every canonical database of the
    instance expansion; ``entailment`` (or ``transform``, for queries the
    transformation handles) tests, for each candidate tuple of instance
    constants, containment of the expansion in q.  Tuples with
    constants outside the instance are dropped.
    """
    views = list(views)
    consts = instance_constants(instance)
    if not instance.facts:
        return set()
    e = instance_expansion(instance, views)
    if e.inconsistent:
        raise UndefinedCertainAnswers("no database yields this view instance")
    if method in ("entailment", "transform"):
        return _certain_by_containment(q, e, consts, method)
    if method != "canonical":
        raise ValueError(f"unknown method {method!r}")
    bound = scale_bound() if bound is None else bound
    size = len(e.variables) + len(set(e.constants) | set(q.constants))
    if size > bound:
        raise ScaleRefusal(f"{size} variables and constants exceed the bound {bound}")
    result = None
    for _, db in iter_canonical_databases(e, q):
        got = {t for t in evaluate(q, db) if all(x in consts for x in t)}
        result = got if result is None else result & got
        if not result:
            return set()
    if result is None:
        raise UndefinedCertainAnswers("no database yields this view instance")
    return result


def _certain_by_containment(q: CQACQuery, e: CQACQuery, consts, method) -> set:
    from .transform import containment_via_transform

    out = set()
    for t in product(sorted(consts), repeat=q.head.arity):
        et = make_query(Atom(q.name, t), e.body, e.comparisons, check=False)
        if (entailment_check(q, et).holds if method == "entailment" else containment_via_transform(q, et)):
            out.add(t)
    return out


def rewriting_in_mcr(r: CQACQuery, mcr: MCRProgram, bound: int = None, method: str = "canonical") -> bool:
    """Is the rewriting (over view predicates) contained in the MCR program?

    ``canonical`` runs the program on every canonical instance of r; each must
    yield r's frozen head.  This is exact because the program, like r, only
    looks at the order of values relative to its constants.

    ``frozen`` runs it once on r with its comparisons rectified through the
    views and turned into order facts (the form r takes in the containment
    transformation).  Only order facts implied by r are available, so a
    positive answer is always right; it needs a program without comparisons.
    """
    consts = set(r.constants) | mcr.program.constants
    if method == "frozen":
        return _in_mcr_frozen(r, mcr, consts)
    if method != "canonical":
        raise ValueError(f"unknown method {method!r}")
    bound = scale_bound() if bound is None else bound
    size = len(r.variables) + len(consts)
    if size > bound:
        raise ScaleRefusal(f"{size} variables and constants exceed the bound {bound}")
    for assign, db in iter_canonical_databases(r, extra_constants=consts):
        head = tuple(assign.get(t, t) if is_var(t) else t for t in r.head.terms)
        if head not in evaluate_program(mcr.program, db):
            return False
    return True


def _in_mcr_frozen(r: CQACQuery, mcr: MCRProgram, consts) -> bool:
    p = mcr.program
    if any(r_.comparisons for r_ in p.rules):
        raise ValueError("the frozen test needs a program without comparisons")
    rr = rectify(r, mcr.views) if mcr.views else r
    rcq = to_cq(rr, consts, strict=True)
    if rcq.inconsistent:
        return True
    db, head = frozen_database(rcq, consts)
    plain = DatalogProgram(p.rules, p.query_predicate)  # order facts come from the frozen query only
    return head in derive(plain, db).get(p.query_predicate, set())


def mcr_expansions(mcr: MCRProgram, depth: int) -> list:
    """Datalog expansions of the MCR: rewritings over the views with comparisons."""
    from .datalog import expansions_up_to_depth

    return expansions_up_to_depth(mcr.program, depth)
