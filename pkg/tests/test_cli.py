import io
import json
import subprocess
import sys

import pytest

from skewrack.cli import parse_cocycle, parse_group, parse_rack, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv)
    return code, json.loads(text)


def test_table1_cell():
    code, out = call_json("table1", "--p", "3", "--n", "3", "--sign", "+")
    assert code == 0 and out["count"] == 24


def test_color_kink():
    code, out = call_json("color", "--rack", "product:K=cyclic:3,f=id", "--braid", "2: 1")
    assert code == 0 and out["count"] == 3 and out["normalized"] == "1"


def test_fr_test_normal_pair():
    code, out = call_json("fr-test", "--rack", "normal_pair:K=cyclic:3,N=cyclic:3,f=id",
                          "--trials", "25", "--max-strands", "3")
    assert code == 0 and out["passed"] and out["reports"]["count"]["passed"]


def test_fr_test_failing_cocycle_exit_1():
    code, out = call_json("fr-test", "--cocycle", "const:1,2", "--rack", "product:K=cyclic:2,f=id",
                          "--trials", "3")
    assert code == 1 and out["reports"]["weight"]["axiom"] == "FR-weight"


def test_verify_and_property_fr():
    code, out = call_json("verify", "--rack", "normal_pair:K=sym:3,N=alt:3,f=id")
    assert code == 0 and out["passed"] and out["size"] == 18
    code, out = call_json("property-fr", "--rack", "product:K=cyclic:3,f=id", "--depth", "2")
    assert code == 0 and out["ann"] == 3


def test_verify_failure_exit_1(tmp_path):
    code, _ = call("verify", "--rack", "conj:K=sym:3,kappa=inv")
    assert code == 2
    path = tmp_path / "additive.json"
    path.write_text(json.dumps({"op": [[(a + b) % 3 for b in range(3)] for a in range(3)], "kappa": [0, 1, 2]}))
    code, out = call_json("verify", "--rack", f"file:{path}")
    assert code == 1 and out["reports"]["skew_rack"]["axiom"] == "SR3"
    assert out["reports"]["skew_rack"]["counterexample"] == [0, 0, 1]


def test_invariant_json():
    code, out = call_json("invariant", "--cocycle", "prop28:p=3,eps=1", "--braid", "2: 1")
    assert code == 0 and out["coeffs"] == {"(0)": "1"} and out["mass"] == "1"


def test_lens():
    code, out = call_json("lens", "--p", "11", "--q", "3")
    assert code == 0 and out["count"] == 1331 and out["divisors"] == [1, 11]
    assert out["framings"] == [4, 3]


def test_criterion_modes():
    code, out = call_json("criterion", "--mode", "count", "--braid", "1:")
    assert code == 0 and out["ratio"] == "3" and out["verdict"] == "INCONCLUSIVE"
    code, out = call_json("criterion", "--mode", "count", "--braid", "2: 1")
    assert code == 1 and out["verdict"] == "OBSTRUCTED"
    code, out = call_json("criterion", "--mode", "weight", "--braid", "1:")
    assert code == 0 and len(out["results"]) == 8
    code, out = call_json("criterion", "--mode", "weight", "--braid", "1:", "--k1", "1")
    assert [r["k"] for r in out["results"]] == [[1, 0, 0]]


@pytest.mark.parametrize("argv", [
    ["color", "--rack", "bogus:1", "--braid", "1:"],
    ["color", "--rack", "product:K=cyclic:3,f=id", "--braid", "2: 5"],
    ["table1", "--p", "7", "--n", "3", "--sign", "+"],
    ["table1", "--p", "3", "--n", "3", "--sign", "x"],
    ["invariant", "--cocycle", "prop28:p=4,eps=1", "--braid", "1:"],
    ["nonsense"],
    ["color", "--braid", "1:"],
])
def test_parse_errors_exit_2(argv, capsys):
    code, text = call(*argv)
    assert code == 2 and text == ""


def test_budget_exit_1():
    code, _ = call("table1", "--p", "3", "--n", "3", "--sign", "+", "--budget", "5")
    assert code == 1


def test_byte_identical_output():
    argv = ["invariant", "--cocycle", "prop28:p=5,eps=1", "--braid", "2: 1 1 1 1"]
    assert call(*argv)[1] == call(*argv)[1]
    assert call(*argv)[1] == call(*argv, "--threads", "3")[1]


def test_csv_format():
    code, text = call("color", "--rack", "product:K=cyclic:3,f=id", "--braid", "2: 1", "--format", "csv")
    header, row = text.strip().split("\n")
    assert header == "ann,components,count,normalized" and row == "3,1,3,1"


def test_file_specs(tmp_path):
    rack = parse_rack("product:K=cyclic:3,f=id")
    path = tmp_path / "rack.json"
    path.write_text(rack.dumps())
    code, out = call_json("color", "--rack", f"file:{path}", "--braid", "2: 1")
    assert code == 0 and out["count"] == 3


def test_grammar_helpers():
    assert parse_group("sl2p:3").size == 24
    assert parse_rack("normal_pair:K=cyclic:5,N=cyclic:5,f=id").size == 25
    assert parse_cocycle("z2:1,0,1").rack.size == 4
    assert parse_cocycle("prop28:p=3,eps=-1").rack.size == 9


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "skewrack.cli", "color", "--rack", "product:K=cyclic:3,f=id",
                          "--braid", "1:"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["count"] == 9
    res = subprocess.run([sys.executable, "-m", "skewrack.cli", "color", "--rack", "x", "--braid", "1:"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and res.stdout == "" and res.stderr.startswith("error")
