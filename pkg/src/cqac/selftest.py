"""Seeded oracle-agreement suites.

Each suite draws a corpus from a fixed seed, runs the fast deciders next to
their brute-force oracles and returns a :class:`SuiteReport`.  Reports carry
no timings so that two runs with the same seed print the same text.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .ac_core import EQ, GE, LE, LT, NEQ, GT, ACSet, closure, compare, implication_holds, minimal_form, is_consistent
from .containment import (
    FragmentRefusal,
    ScaleRefusal,
    canonical_oracle_check,
    entailment_check,
    fast_contains,
)
from .corpus import corpus, mcr_case, rsi1_corpus
from .hardness_gen import VARIANTS, eval_pi2sat, random_formula, reduce_pi2sat
from .rewriting import UndefinedCertainAnswers, certain_answers, certain_answers_oracle, mcr_rsi1
from .transform import containment_via_transform

CONSTANTS = (3, 5, 7)


@dataclass
class SuiteReport:
    name: str
    seed: int
    checked: int = 0
    skipped: int = 0
    discrepancies: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def bump(self, key: str, n: int = 1):
        self.stats[key] = self.stats.get(key, 0) + n

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "checked": self.checked, "skipped": self.skipped,
                "discrepancies": list(self.discrepancies), "stats": dict(sorted(self.stats.items())),
                "ok": self.ok}

    def __str__(self) -> str:
        head = (f"{self.name}: {'ok' if self.ok else 'FAIL'} seed={self.seed} checked={self.checked} "
                f"skipped={self.skipped} discrepancies={len(self.discrepancies)}")
        extra = " ".join(f"{k}={v}" for k, v in sorted(self.stats.items()))
        lines = [head + (f" [{extra}]" if extra else "")]
        lines += [f"  {d}" for d in self.discrepancies]
        return "\n".join(lines)


def containment_suite(n: int = 200, seed: int = 0, bound: int = 20) -> SuiteReport:
    """Entailment, canonical oracle, fast deciders and the transformation agree.

    Half the corpus is unrestricted pairs, half has a semi-interval containing
    query so that the transformation applies often enough to matter.
    """
    rep = SuiteReport("containment", seed)
    rng_seed = seed * 7919 + 1
    pairs = corpus(n - n // 2, seed=seed, constants=CONSTANTS, max_atoms=3, max_vars=4)
    pairs += rsi1_corpus(n // 2, seed=rng_seed, constants=CONSTANTS, max_atoms=3, max_vars=4)
    for i, (q1, q2) in enumerate(pairs):
        tag = f"pair {i} (seed {seed}): {q1} | {q2}"
        e = entailment_check(q1, q2).holds
        o = canonical_oracle_check(q1, q2, bound=bound).holds
        rep.checked += 1
        rep.bump("contained" if e else "not_contained")
        if e != o:
            rep.discrepancies.append(f"{tag}: entailment={e} oracle={o}")
        for uc in (True, False):
            f = fast_contains(q1, q2, "AUTO", uc).holds
            if f != e:
                rep.discrepancies.append(f"{tag}: fast(use_closure={uc})={f} entailment={e}")
        try:
            t = containment_via_transform(q1, q2)
        except FragmentRefusal:
            continue
        rep.bump("transform_applicable")
        if t != e:
            rep.discrepancies.append(f"{tag}: transform={t} entailment={e}")
    return rep


def transform_suite(n: int = 100, seed: int = 0) -> SuiteReport:
    """The Datalog transformation agrees with entailment on closed RSI1 containing queries."""
    rep = SuiteReport("transform", seed)
    for i, (q1, q2) in enumerate(rsi1_corpus(n, seed=seed, closed=True, constants=CONSTANTS)):
        e = entailment_check(q1, q2).holds
        try:
            t = containment_via_transform(q1, q2)
        except FragmentRefusal as exc:
            rep.discrepancies.append(f"pair {i} (seed {seed}): refused: {exc}")
            continue
        rep.checked += 1
        rep.bump("contained" if e else "not_contained")
        if t != e:
            rep.discrepancies.append(f"pair {i} (seed {seed}): {q1} | {q2}: transform={t} entailment={e}")
    return rep


def hardness_suite(n: int = 20, seed: int = 0, bound: int = 12, max_universal: int = 2) -> SuiteReport:
    """Every gadget variant's reduction agrees with direct formula evaluation."""
    rep = SuiteReport("hardness", seed)
    rng = random.Random(seed)
    for k in range(n):
        nu = rng.randint(1, max_universal)
        m = rng.randint(0, 4 - nu)
        f = random_formula(rng, nu, m, rng.randint(1, 6))
        want = eval_pi2sat(f)
        rep.bump("true" if want else "false")
        for v in VARIANTS:
            q1, q2 = reduce_pi2sat(f, v)
            try:
                got = canonical_oracle_check(q1, q2, bound=bound).holds
            except ScaleRefusal:
                rep.skipped += 1
                continue
            rep.checked += 1
            if got != want:
                rep.discrepancies.append(f"formula {k} (seed {seed}) {f} variant {v}: oracle={got} formula={want}")
    return rep


def certain_suite(n: int = 30, seed: int = 0, bound: int = 10, head_arity: int = 0) -> SuiteReport:
    """The MCR's answers equal the canonical-database certain answers."""
    rep = SuiteReport("certain", seed)
    rng = random.Random(seed)
    attempts = 0
    while rep.checked < n and attempts < 20 * n:
        attempts += 1
        q, views, inst = mcr_case(rng, head_arity=head_arity)
        try:
            want = certain_answers_oracle(q, views, inst, bound=bound)
        except (ScaleRefusal, UndefinedCertainAnswers):
            rep.skipped += 1
            continue
        got = certain_answers(mcr_rsi1(q, views), inst)
        rep.checked += 1
        rep.bump("nonempty" if want else "empty")
        if got != want:
            views_txt = " ".join(str(v) for v in views)
            rep.discrepancies.append(f"case {attempts - 1} (seed {seed}): {q} | {views_txt} | {inst}: "
                                     f"mcr={sorted(got)} oracle={sorted(want)}")
    return rep


_LAW_OPS = (LT, LE, EQ, NEQ, GE, GT)


def random_acset(rng: random.Random, n_vars: int = 3, n_comps: int = 4, constants=CONSTANTS) -> ACSet:
    names = [f"X{i}" for i in range(n_vars)]
    items = []
    for _ in range(rng.randint(1, n_comps)):
        x = rng.choice(names)
        y = rng.choice([v for v in names if v != x]) if rng.random() < 0.5 else Fraction(rng.choice(constants))
        c = compare(x, rng.choice(_LAW_OPS), y)
        if not isinstance(c, bool):
            items.append(c)
    return ACSet.of(items, universe=names, constants=constants)


def _satisfies(c, assign) -> bool:
    a, op, b = c.shown()
    x = assign.get(a, a)
    y = assign.get(b, b)
    return {LT: x < y, LE: x <= y, EQ: x == y, NEQ: x != y, GE: x >= y, GT: x > y}[op]


def closure_suite(n: int = 1000, seed: int = 0, trials: int = 100) -> SuiteReport:
    """Idempotence, soundness under sampled assignments and the disjunct-count laws."""
    rep = SuiteReport("closure", seed)
    rng = random.Random(seed)
    grid = [Fraction(k, 2) for k in range(2, 17)]  # halves between 1 and 8 straddle every constant
    done = 0
    while done < n:
        acs = random_acset(rng)
        if not is_consistent(acs):
            continue
        done += 1
        rep.checked += 1
        cl = closure(acs)
        again = closure(ACSet.of(cl.derived, acs.universe, acs.relevant_constants))
        if set(again.derived) != set(cl.derived):
            rep.discrepancies.append(f"idempotence (seed {seed}) {acs}")
        names = sorted(acs.universe)
        for _ in range(trials):
            assign = {v: rng.choice(grid) for v in names}
            if all(_satisfies(c, assign) for c in acs.comparisons):
                rep.bump("satisfying_samples")
                bad = [c for c in cl.derived if not _satisfies(c, assign)]
                if bad:
                    rep.discrepancies.append(f"soundness (seed {seed}) {acs} under {assign}: {bad[0]}")
                    break
        ks = [Fraction(c) for c in CONSTANTS]
        clsi = [compare(rng.choice(names), LE, rng.choice(ks)) for _ in range(rng.randint(1, 3))]
        if implication_holds(acs, clsi):
            rep.bump("clsi_implications")
            if len(minimal_form(acs, clsi)) != 1:
                rep.discrepancies.append(f"single disjunct (seed {seed}) {acs} => {clsi}")
        closed = [compare(rng.choice(names), rng.choice((LE, GE)), rng.choice(ks)) for _ in range(rng.randint(1, 4))]
        if implication_holds(acs, closed):
            rep.bump("closed_si_implications")
            if len(minimal_form(acs, closed)) > 2:
                rep.discrepancies.append(f"two disjuncts (seed {seed}) {acs} => {closed}")
    return rep


SUITES = {
    "containment": containment_suite,
    "transform": transform_suite,
    "hardness": hardness_suite,
    "certain": certain_suite,
    "closure": closure_suite,
}


def run_all(corpus_size: int = 200, seed: int = 0) -> list:
    """Run every suite; sizes scale from ``corpus_size`` with the documented minimums as ratios."""
    scale = corpus_size / 200
    return [
        containment_suite(max(1, corpus_size), seed),
        transform_suite(max(1, round(100 * scale)), seed),
        hardness_suite(max(1, round(20 * scale)), seed),
        certain_suite(max(1, round(30 * scale)), seed),
        closure_suite(max(1, round(1000 * scale)), seed),
    ]
