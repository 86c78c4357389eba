"""Command-line front end: ``cqac <command> ...``.

Exit codes: 0 ok or contained, 1 not contained or a failed self-test,
2 usage, parse, inconsistency or fragment error, 3 scale-bound refusal.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .ac_core import ACSet, InconsistentACs, closure
from .containment import (
    FragmentRefusal,
    ScaleRefusal,
    canonical_oracle_check,
    entailment_check,
    enumerate_mappings,
    fast_contains,
)
from .datalog import format_program
from .hardness_gen import VARIANTS, FormulaError, eval_pi2sat, parse_formula, reduce_pi2sat
from .query_model import Database, ParseError, SafetyError, normalize, parse, parse_database, parse_statements
from .rewriting import (
    UndefinedCertainAnswers,
    certain_answers,
    certain_answers_oracle,
    mcr_rsi1,
    mcr_rsi1_plus,
)
from .selftest import run_all
from .terms import term_str
from .transform import containment_via_transform, relevant_from, to_cq, to_datalog

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_SCALE = 0, 1, 2, 3
STRATEGIES = ("auto", "hp", "one-ac", "rsi1", "transform", "entailment", "oracle")


class CommandError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def dump_json(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, so a load/dump cycle is byte-identical."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CommandError("usage", f"cannot read {path}: {e.strerror}", EXIT_USAGE) from e


def _query(path: str):
    ws = parse(_read(path))
    if not ws.queries:
        raise ParseError(f"{path}: no query found")
    return ws.queries[0]


def _facts_json(db: Database) -> list:
    return str(db).splitlines() if len(db) else []


def _answers_json(answers) -> list:
    return sorted("(" + ", ".join(term_str(t) for t in row) + ")" for row in answers)


def _emit(ctx, payload: dict, text: str, code: int = EXIT_OK):
    click.echo(dump_json(payload) if ctx.obj["json"] else text.rstrip("\n"))
    ctx.exit(code)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def cli(ctx, as_json):
    """Containment, transformation and rewriting tools for CQAC queries."""
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json


def verdict(q1, q2, strategy: str) -> dict:
    """The verdict object for ``q2 contained in q1`` under a strategy."""
    strategy = strategy.lower()
    out = {"q1": str(q1), "q2": str(q2), "strategy": strategy}
    if strategy == "transform":
        holds = containment_via_transform(q1, q2)
        res_method, witness, info = "transform", None, {}
    else:
        if strategy == "entailment":
            res = entailment_check(q1, q2)
        elif strategy == "oracle":
            res = canonical_oracle_check(q1, q2)
        else:
            res = fast_contains(q1, q2, strategy)
        holds, res_method, witness, info = res.holds, res.method, res.witness, res.info
    out["method"] = res_method
    out["verdict"] = "CONTAINED" if holds else "NOT CONTAINED"
    out["mappings"] = [str(m) for m in enumerate_mappings(q1, q2)]
    if isinstance(witness, Database):
        out["counterexample"] = _facts_json(witness)
    elif witness:
        out["witness"] = [str(m) for m in witness]
    out["info"] = {k: (v if isinstance(v, (int, str, bool)) else str(v)) for k, v in sorted(info.items())}
    return out


def _verdict_text(v: dict) -> str:
    lines = [v["verdict"], f"method: {v['method']}", f"containment mappings: {len(v['mappings'])}"]
    lines += [f"  {m}" for m in v["mappings"]]
    if "witness" in v:
        lines.append("witness mappings:")
        lines += [f"  {m}" for m in v["witness"]]
    if "counterexample" in v:
        lines.append("counterexample database:")
        lines += [f"  {f}" for f in v["counterexample"]]
    return "\n".join(lines)


@cli.command()
@click.argument("q1")
@click.argument("q2")
@click.option("--strategy", type=click.Choice(STRATEGIES, case_sensitive=False), default="auto", show_default=True)
@click.pass_context
def contains(ctx, q1, q2, strategy):
    """Is the query in Q2 contained in the query in Q1?"""
    v = verdict(_query(q1), _query(q2), strategy)
    _emit(ctx, v, _verdict_text(v), EXIT_OK if v["verdict"] == "CONTAINED" else EXIT_VIOLATED)


@cli.command("closure")
@click.argument("acfile")
@click.pass_context
def closure_cmd(ctx, acfile):
    """Closure of a comma-separated list of comparisons."""
    text = _read(acfile).strip().rstrip(".")
    st = parse_statements("acs() :- " + text + ".")[0]
    if st.body:
        raise ParseError(f"{acfile}: only comparisons are allowed")
    acs = ACSet.of(st.comparisons)
    cl = closure(acs)
    derived = [str(c) for c in cl.sorted()]
    payload = {"input": [str(c) for c in acs.sorted()], "consistent": cl.consistent, "derived": derived}
    text = "\n".join([f"consistent: {str(cl.consistent).lower()}"] + derived)
    _emit(ctx, payload, text)


@cli.command("normalize")
@click.argument("q")
@click.pass_context
def normalize_cmd(ctx, q):
    """Print the normalized form of a query."""
    n = normalize(_query(q))
    _emit(ctx, {"normalized": str(n)}, str(n))


def _emit_golden(path, text: str):
    if path:
        Path(path).write_text(text)


@cli.command()
@click.argument("q1")
@click.option("--relevant", "q2", help="Contained query supplying the relevant semi-intervals.")
@click.option("--emit-golden", type=click.Path(dir_okay=False), help="Also write the program to this file.")
@click.pass_context
def transform(ctx, q1, q2, emit_golden):
    """Emit the Datalog program of a containing query."""
    query = _query(q1)
    relevant = ()
    if q2:
        relevant = relevant_from(to_cq(_query(q2)))
    prog = to_datalog(query, relevant)
    text = format_program(prog)
    _emit_golden(emit_golden, text)
    _emit(ctx, {"program": text.splitlines()}, text)


@cli.command()
@click.argument("q")
@click.option("--views", "views_file", required=True, help="File with the view definitions.")
@click.option("--plus", is_flag=True, help="Allow comparisons among head variables.")
@click.option("--emit-golden", type=click.Path(dir_okay=False), help="Also write the program to this file.")
@click.pass_context
def mcr(ctx, q, views_file, plus, emit_golden):
    """Emit the maximally contained rewriting of Q using the views."""
    query = _query(q)
    views = parse(_read(views_file)).queries
    m = (mcr_rsi1_plus if plus else mcr_rsi1)(query, views)
    text = str(m)
    _emit_golden(emit_golden, text)
    _emit(ctx, {"program": text.splitlines(), "rules": len(m.rules)}, text)


@cli.command()
@click.argument("q")
@click.option("--views", "views_file", required=True)
@click.option("--instance", "instance_file", required=True, help="Ground view facts.")
@click.option("--oracle", is_flag=True, help="Use canonical databases instead of the MCR.")
@click.option("--bound", type=int, default=None, help="Canonical-enumeration bound for --oracle.")
@click.pass_context
def certain(ctx, q, views_file, instance_file, oracle, bound):
    """Certain answers of Q over a view instance."""
    query = _query(q)
    views = parse(_read(views_file)).queries
    inst = parse_database(_read(instance_file))
    method = "oracle" if oracle else "mcr"
    try:
        ans = certain_answers_oracle(query, views, inst, bound=bound) if oracle \
            else certain_answers(mcr_rsi1(query, views), inst)
    except UndefinedCertainAnswers as e:
        _emit(ctx, {"method": method, "defined": False, "answers": None, "reason": str(e)},
              f"undefined: {e}")
        return
    rows = _answers_json(ans)
    _emit(ctx, {"method": method, "defined": True, "answers": rows},
          "\n".join(rows) if rows else "(no certain answers)")


@cli.command("gen-hard")
@click.argument("formula_file")
@click.option("--variant", type=click.Choice([v.lower() for v in VARIANTS] + list(VARIANTS)),
              default=VARIANTS[0].lower(), show_default=True)
@click.pass_context
def gen_hard(ctx, formula_file, variant):
    """Reduce a forall-exists formula to a containment pair (true iff Q2 is in Q1)."""
    f = parse_formula(_read(formula_file))
    q1, q2 = reduce_pi2sat(f, variant.upper())
    truth = eval_pi2sat(f)
    payload = {"formula": str(f), "variant": variant.upper(), "q1": str(q1), "q2": str(q2), "formula_true": truth}
    text = (f"% {f}\n% variant {variant.upper()}, formula {'true' if truth else 'false'}\n"
            f"% containing query\n{q1}\n% contained query\n{q2}\n")
    _emit(ctx, payload, text)


@cli.command()
@click.option("--corpus-size", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def selftest(ctx, corpus_size, seed):
    """Run every oracle-agreement suite on a seeded corpus."""
    reports = run_all(corpus_size, seed)
    ok = all(r.ok for r in reports)
    payload = {"seed": seed, "corpus_size": corpus_size, "ok": ok, "suites": [r.to_dict() for r in reports]}
    text = "\n".join(str(r) for r in reports) + f"\nselftest {'passed' if ok else 'FAILED'} (seed {seed})"
    _emit(ctx, payload, text, EXIT_OK if ok else EXIT_VIOLATED)


def _error(as_json: bool, kind: str, message: str, code: int) -> int:
    if as_json:
        click.echo(dump_json({"error": {"kind": kind, "message": message}, "exit": code}))
    else:
        click.echo(f"error ({kind}): {message}", err=True)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json" in argv
    try:
        code = cli.main(args=argv, prog_name="cqac", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        return _error(as_json, "usage", e.format_message(), EXIT_USAGE)
    except click.Abort:
        return _error(as_json, "usage", "aborted", EXIT_USAGE)
    except CommandError as e:
        return _error(as_json, e.kind, str(e), e.code)
    except (ParseError, SafetyError, FormulaError) as e:
        return _error(as_json, "parse", str(e), EXIT_USAGE)
    except InconsistentACs as e:
        return _error(as_json, "inconsistent", str(e), EXIT_USAGE)
    except FragmentRefusal as e:
        return _error(as_json, "fragment", str(e), EXIT_USAGE)
    except ScaleRefusal as e:
        return _error(as_json, "scale-bound", str(e), EXIT_SCALE)
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
