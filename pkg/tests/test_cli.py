import json
import subprocess
import sys

import pytest

from hfforcing.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err.strip()


def test_formula_commands(capsys):
    assert run(capsys, "formula", "arity", "(Forall (Member 0 1))") == (0, "1", "")
    assert run(capsys, "formula", "parse", "(Member 0 1)")[1] == "Member(0,1)"
    assert run(capsys, "formula", "print", "(Neg (Member 0 1))")[1] == \
        "(Nand (Member 0 1) (Member 0 1))"
    assert run(capsys, "formula", "rename", "(Forall (Member 0 1))", "0:2")[1] == \
        "(Forall (Member 0 3))"


def test_forces_transform(capsys):
    assert run(capsys, "forces", "transform", "(Member 0 1)")[1] == "(ForcesMem 0 4 5)"


def test_malformed_input_exits_2(capsys):
    code, _, err = run(capsys, "formula", "parse", "(Member -1 0)")
    assert code == 2 and err.startswith("error:")
    assert run(capsys, "formula", "rename", "(Member 0 1)", "0:1")[0] == 2
    assert run(capsys, "sats", "vset:2", "[0", "(Member 0 1)")[0] == 2
    assert run(capsys, "forces", "eval", "nope", "0", "(Equal 0 0)", "[0]")[0] == 2
    assert run(capsys, "forces", "eval", "vposet", "2", "(Equal 0 0)", "[0]")[0] == 2
    assert run(capsys, "verify", "nope", "trivial")[0] == 2


def test_sats(capsys):
    assert run(capsys, "sats", "vset:2", "[0, {0}]", "(Member 0 1)")[1] == "true"
    assert run(capsys, "sats", "{0, 1}", "[]", "(Forall (Member 0 0))")[1] == "false"
    assert run(capsys, "sats", "vset:2", "[]", "(Forall (Forall (Exists (And (Member 2 0)"
               " (Member 1 0)))))")[1] == "false"


def test_forces_eval(capsys):
    assert run(capsys, "forces", "eval", "vposet", "1", "(Member 0 1)", "[0, {<0,1>}]")[1] == "true"
    assert run(capsys, "forces", "eval", "vposet", "0", "(Member 0 1)", "[0, {<0,1>}]")[1] == "false"
    assert run(capsys, "forces", "eval", "vposet", "0", "(Member 0 1)", "[0, {0,<1,1>}]",
               "--mutant", "drop_q_leq_r")[1] == "true"


def test_generic_and_extend(capsys):
    code, out, _ = run(capsys, "generic", "all", "vposet")
    assert code == 0 and out.splitlines() == ["{0,1}", "{0,<0,0>}"]
    code, out, _ = run(capsys, "extend", "vposet", "{0,1}")
    lines = out.splitlines()
    assert code == 0 and "0" in lines
    assert "2" in lines  # G = {0,1} is the ordinal 2, and G is in M[G]
    assert run(capsys, "extend", "vposet", "{1}")[0] == 2


def test_generic_rsl(capsys):
    code, out, _ = run(capsys, "generic", "rsl", "cohen", "--denses", "len:3,avoid:(0)")
    data = json.loads(out)
    assert code == 0 and data["decided_prefix"] >= 3 and "1" in data["generic_prefix"]
    assert run(capsys, "generic", "rsl", "cohen", "--denses", "avoid:(0)", "--bound", "1")[0] == 3
    assert run(capsys, "generic", "rsl", "cohen", "--denses", "bogus:1")[0] == 2


def test_model_build(capsys, tmp_path):
    code, out, _ = run(capsys, "model", "build", "vposet")
    d = json.loads(out)
    assert code == 0 and d["gdot_in_M"] is True and d["check_closed"] is False
    spec = tmp_path / "ctx.json"
    spec.write_text(json.dumps({"seed": "vset:2", "poset": "chain:2", "rank_cap": 6, "name": "c2"}))
    code, out, _ = run(capsys, "model", "build", str(spec))
    assert code == 0 and json.loads(out)["context"] == "c2"
    assert run(capsys, "model", "build", '{"poset": "cohen"}')[0] == 2


def test_verify_small_battery_json(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    argv = ["verify", "all", "trivial", "--battery", "depth=2", "arity=2", "exhaustive=2/2",
            "variants=1", "--json", str(out_file), "--quiet"]
    assert run(capsys, *argv)[0] == 0
    first = json.loads(out_file.read_text())
    assert first["passed"] and all(r["failure_count"] == 0 for r in first["reports"])
    assert run(capsys, *argv)[0] == 0
    assert json.loads(out_file.read_text())["reports"] == first["reports"]


def test_verify_bad_battery_option(capsys):
    assert run(capsys, "verify", "truth", "trivial", "--battery", "colour=3")[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hfforcing.cli", "formula", "arity",
                           "(Member 0 2)"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "3"
