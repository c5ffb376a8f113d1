import io
import json
import subprocess
import sys

import pytest

from atlkf import fixtures
from atlkf.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def model(name):
    return str(fixtures.path(name))


def test_fair_repeated_game_holds():
    code, out, _ = run("check", "--model", model("cg_repeat_fair"), "--spec", "<<player>> F win")
    assert code == 0
    assert "holds in all initial states: yes" in out


def test_one_round_game_fails():
    code, out, _ = run("check", "--model", model("cg_oneround"), "--spec", "<<player>> F win")
    assert code == 1
    assert "failing initial states:" in out


def test_m1_json():
    code, out, _ = run("check", "--model", model("m1"), "--spec", "EG p", "--semantics", "fo", "--json")
    assert code == 1
    doc = json.loads(out)
    assert doc["satStates"] == ["(y)"]
    assert doc["holdsInAllInit"] is False
    assert doc["initStates"] == ["(x)"]
    assert set(doc) == {
        "formula", "semantics", "algorithm", "holdsInAllInit", "initStates",
        "satStates", "diagnostics", "witness", "oracle",
    }
    assert set(doc["diagnostics"]) == {"strategiesEnumerated", "branchesPruned", "fixpointIterations"}


def test_json_is_byte_identical_across_runs():
    argv = ["check", "--model", model("cg_repeat_fair"), "--spec", "<<player>> F win",
            "--json", "--witness", "--oracle"]
    first = run(*argv)[1]
    assert all(run(*argv)[1] == first for _ in range(2))
    threaded = run(*argv, "--threads", "3")[1]
    assert threaded == first


@pytest.mark.parametrize("spec", ["<<player>> F win", "[[dealer]] G !win", "<<player>> [!win W win]"])
def test_algorithms_agree(spec):
    outs = []
    for algorithm in ("basic", "improved"):
        code, out, _ = run("check", "--model", model("cg_repeat"), "--spec", spec, "--json",
                           "--algorithm", algorithm)
        outs.append((code, json.loads(out)["satStates"]))
    assert outs[0] == outs[1]


def test_verbose_adds_timing():
    _, out, _ = run("check", "--model", model("m1"), "--spec", "<<g>> F p", "--json", "--verbose")
    diag = json.loads(out)["diagnostics"]
    assert diag["backend"] in ("numba", "numpy")
    assert diag["elapsedSeconds"] >= 0


def test_reachable_only_restricts_display():
    full = json.loads(run("check", "--model", model("cg_oneround"), "--spec", "true", "--json")[1])
    shown = json.loads(
        run("check", "--model", model("cg_oneround"), "--spec", "true", "--json", "--reachable-only")[1]
    )
    assert len(shown["satStates"]) < len(full["satStates"]) == 24
    assert set(shown["satStates"]) <= set(full["satStates"])
    assert shown["holdsInAllInit"] is full["holdsInAllInit"] is True


def test_spec_file(tmp_path):
    spec = tmp_path / "f.atlk"
    spec.write_text("<<g>> G p\n", encoding="utf-8")
    code, out, _ = run("check", "--model", model("m1"), "--spec-file", str(spec), "--json")
    assert code == 1 and json.loads(out)["satStates"] == ["(y)"]


def test_oracle_match():
    code, out, _ = run("check", "--model", model("m2"), "--spec", "<<g>> X q", "--oracle")
    assert code == 0
    assert "oracle: MATCH" in out


def test_oracle_cap_skips(monkeypatch):
    monkeypatch.setenv("ATLK_STRATEGY_CAP", "2")
    code, out, err = run("check", "--model", model("cg_repeat"), "--spec", "<<player>> F win",
                         "--oracle", "--json")
    assert json.loads(out)["oracle"] == "SKIPPED"
    assert "oracle skipped" in err
    assert code == 1


def test_witness_text():
    code, out, _ = run("check", "--model", model("cg_repeat_fair"), "--spec", "<<player>> F win",
                       "--witness")
    assert code == 0
    assert "  class(A) -> keep" in out


@pytest.mark.parametrize(
    "argv, message",
    [
        (["check", "--model", "missing.amf", "--spec", "p"], "cannot read"),
        (["check", "--spec", "p"], "usage error"),
        (["check", "--model", "M", "--spec", "p", "--spec-file", "f"], "usage error"),
        (["check", "--model", "M", "--spec", "<<g>> F"], "syntax error"),
        (["check", "--model", "M", "--spec", "<<nobody>> F p"], "error"),
        (["check", "--model", "M", "--spec", "F zzz"], "error"),
        (["check", "--model", "M", "--spec", "p", "--threads", "0"], "usage error"),
    ],
)
def test_errors_exit_2(argv, message):
    argv = [model("m1") if a == "M" else a for a in argv]
    code, _, err = run(*argv)
    assert code == 2
    assert message in err


def test_model_error_exit_2(tmp_path):
    bad = tmp_path / "bad.amf"
    bad.write_text(fixtures.source("m1").replace("(y) -[b]-> (y);", ""), encoding="utf-8")
    code, _, err = run("check", "--model", str(bad), "--spec", "p")
    assert code == 2
    assert "model error" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "atlkf", "check", "--model", model("m1"), "--spec", "EF p"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "holds in all initial states: yes" in proc.stdout
