import json

import pytest

from cqac.cli import dump_json, main
from conftest import DATA, GOLDEN


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_contains_two_mapping_pair(capsys):
    code, out, _ = run(capsys, "contains", DATA / "twomap_q1.cq", DATA / "twomap_q2.cq")
    assert code == 0
    assert out.splitlines()[0] == "CONTAINED"
    assert "containment mappings: 2" in out


def test_contains_oracle_strategy(capsys):
    code, out, _ = run(capsys, "contains", DATA / "twomap_q1.cq", DATA / "twomap_q2.cq", "--strategy", "oracle")
    assert code == 0 and out.startswith("CONTAINED")


def test_sixmap_through_every_decider_that_fits(capsys):
    for strategy in ("auto", "rsi1", "entailment", "transform"):
        code, out, _ = run(capsys, "contains", DATA / "sixmap_q1.cq", DATA / "sixmap_q2.cq", "--strategy", strategy)
        assert code == 0 and out.startswith("CONTAINED"), strategy


def test_sixmap_oracle_exceeds_scale_bound(capsys):
    code, out, _ = run(capsys, "--json", "contains", DATA / "sixmap_q1.cq", DATA / "sixmap_q2.cq", "--strategy", "oracle")
    assert code == 3
    assert json.loads(out)["error"]["kind"] == "scale-bound"


def test_not_contained_exit_code(capsys):
    code, out, _ = run(capsys, "contains", DATA / "twomap_q2.cq", DATA / "twomap_q1.cq")
    assert code == 1
    assert out.startswith("NOT CONTAINED")
    assert "counterexample database:" in out


def test_parse_error(capsys):
    code, _, err = run(capsys, "contains", DATA / "broken.cq", DATA / "twomap_q1.cq")
    assert code == 2
    assert "error (parse)" in err


def test_parse_error_json(capsys):
    code, out, _ = run(capsys, "--json", "contains", DATA / "broken.cq", DATA / "twomap_q1.cq")
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "parse"


def test_missing_file_and_bad_flag(capsys):
    assert run(capsys, "contains", DATA / "nope.cq", DATA / "twomap_q1.cq")[0] == 2
    assert run(capsys, "contains", DATA / "twomap_q1.cq", DATA / "twomap_q2.cq", "--strategy", "magic")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_fragment_refusal(capsys):
    code, out, _ = run(capsys, "--json", "contains", DATA / "nonhp_q1.cq", DATA / "nonhp_q2.cq", "--strategy", "hp")
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "fragment"


def test_json_round_trip(capsys):
    code, out, _ = run(capsys, "--json", "contains", DATA / "sixmap_q1.cq", DATA / "sixmap_q2.cq")
    assert code == 0
    obj = json.loads(out)
    assert obj["verdict"] == "CONTAINED" and len(obj["mappings"]) == 6
    assert dump_json(json.loads(dump_json(obj))) == out.rstrip("\n")


def test_closure(capsys):
    code, out, _ = run(capsys, "--json", "closure", DATA / "neq_floor.ac")
    obj = json.loads(out)
    assert code == 0 and obj["consistent"]
    assert "X != Y" in obj["derived"]


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", DATA / "nonhp_q1.cq")
    assert code == 0 and out.strip() == "q() :- a(X,Z_1), X < 5, Z_1 = 5."


def test_transform_matches_golden(capsys, tmp_path):
    target = tmp_path / "out.dl"
    code, out, _ = run(capsys, "transform", DATA / "path_q1.cq", "--relevant", DATA / "path_q2.cq", "--emit-golden", target)
    golden = (GOLDEN / "path_transform.dl").read_text()
    assert code == 0
    assert target.read_text() == golden
    assert out == golden


def test_mcr_matches_golden(capsys):
    code, out, _ = run(capsys, "mcr", DATA / "split_q.cq", "--views", DATA / "split_views.cq")
    assert code == 0 and out == (GOLDEN / "split_mcr.dl").read_text()


def test_mcr_plus(capsys):
    code, out, _ = run(capsys, "mcr", DATA / "split_q.cq", "--views", DATA / "split_views.cq", "--plus")
    assert code == 0 and "% head comparisons" in out


def test_certain(capsys):
    args = ["certain", DATA / "chain_q.cq", "--views", DATA / "chain_views.cq", "--instance", DATA / "chain_instance.facts"]
    code, out, _ = run(capsys, "--json", *args)
    assert code == 0 and json.loads(out)["answers"] == ["()"]


def test_certain_oracle(capsys):
    args = ["certain", DATA / "split_q.cq", "--views", DATA / "split_views.cq", "--instance",
            DATA / "split_instance.facts", "--oracle", "--bound", "20"]
    code, out, _ = run(capsys, *args)
    assert code == 0 and out.strip() == "()"


def test_gen_hard(capsys):
    code, out, _ = run(capsys, "--json", "gen-hard", DATA / "formula.qbf", "--variant", "neq_only")
    obj = json.loads(out)
    assert code == 0 and obj["formula_true"] and obj["variant"] == "NEQ_ONLY"


def test_selftest_is_deterministic(capsys):
    first = run(capsys, "selftest", "--corpus-size", "20", "--seed", "3")
    second = run(capsys, "selftest", "--corpus-size", "20", "--seed", "3")
    assert first == second
    assert first[0] == 0 and "seed 3" in first[1]
