import csv
import io
import json
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from mlpicard.cli import RunConfig, UsageError, main, parse_point
from mlpicard.cost import rn_model

SCHEMA_DOC = pathlib.Path(__file__).resolve().parents[1] / "docs" / "output-schema.md"
RUN_FIELDS = {"problem", "dim", "mode", "params", "point", "mean", "std", "reps", "rn_used",
              "fe_used", "rn_bound", "fe_bound", "wall_ms", "seed", "schema_version"}


def run_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_record(capsys):
    record = run_json(capsys, "run", "--problem", "manufactured", "-N", "2", "--reps", "4")
    assert set(record) == RUN_FIELDS
    assert record["schema_version"] == 1
    assert record["params"] == {"N": 2, "M": 2, "Q": 2}
    assert record["rn_used"] <= record["rn_bound"] == rn_model(2, 2, 2, 1)


def test_constant_problem(capsys):
    record = run_json(capsys, "run", "--problem", "constant", "--dim", "3", "-N", "2", "--reps", "5")
    assert record["mean"] == 1.0 and record["std"] == 0.0


def test_quadratic_baseline(capsys):
    record = run_json(capsys, "run", "--problem", "quadratic", "-N", "1", "-M", "10000", "--reps", "50")
    assert abs(record["mean"] - 1.0) <= 4 * record["std"] / math.sqrt(50)


def test_rerun_is_identical_except_timing(capsys):
    argv = ("run", "--problem", "manufactured", "-N", "3", "--reps", "6", "--seed", "11",
            "--deterministic", "--threads", "2")
    first = run_json(capsys, *argv)
    second = run_json(capsys, *argv)
    first.pop("wall_ms")
    second.pop("wall_ms")
    assert first == second


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("MLPICARD_SEED", "11")
    from_env = run_json(capsys, "run", "-N", "2", "--reps", "3")
    explicit = run_json(capsys, "run", "-N", "2", "--reps", "3", "--seed", "11")
    assert from_env["seed"] == 11 and from_env["mean"] == explicit["mean"]


def test_general_mode(capsys):
    record = run_json(capsys, "run", "--mode", "general", "-k", "2", "--rho", "3", "--reps", "5",
                      "--x", "radial:1")
    assert record["params"] == {"k": 2, "rho": 3.0}
    assert len(record["gradient_mean"]) == 1
    assert record["point"]["x"] == [1.0]


@pytest.mark.parametrize("argv,code", [
    (["run", "--problem", "burgers"], 2),
    (["run", "-N", "11"], 3),
    (["run", "-N", "5", "-M", "100"], 3),
    (["run", "--bogus"], 64),
    (["run", "--mode", "sideways"], 64),
    (["run", "--reps", "0"], 64),
    (["run", "--dim", "2", "--x", "1,2,3"], 64),
    (["run", "--time", "2"], 64),
    (["validate", "nosuch"], 2),
    ([], 64),
])
def test_exit_codes(argv, code, capsys):
    try:
        result = main(argv)
    except SystemExit as exc:
        result = exc.code
    assert result == code


def test_exit_codes_from_console_script():
    out = subprocess.run([sys.executable, "-m", "mlpicard.cli", "run", "--problem", "burgers"],
                         capture_output=True, text=True)
    assert out.returncode == 2
    out = subprocess.run([sys.executable, "-m", "mlpicard.cli", "frobnicate"], capture_output=True,
                         text=True)
    assert out.returncode == 64


def test_cost_table(capsys):
    assert main(["cost-table", "--n-max", "3", "--dim", "100"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "N,rn,fe,bound_rn,bound_fe,model_error,schema_version"
    rows = read_csv(text)
    assert rows[0]["rn"] == "200" and rows[2]["bound_rn"] == str(8 * 100 * 3**6)


def test_convergence_csv(tmp_path):
    out = tmp_path / "conv.csv"
    assert main(["convergence", "--n-list", "1,2", "--reps", "5", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = read_csv(raw.decode("utf-8"))
    assert [r["N"] for r in rows] == ["1", "2"]
    assert [int(r["rn_model"]) for r in rows] == [rn_model(1, 1, 1, 1), rn_model(2, 2, 2, 1)]
    assert set(rows[0]) == {"N", "mean_abs_error", "std_error", "rn_model", "fe_model", "wall_ms",
                            "schema_version"}


def test_seminorm_csv(capsys):
    assert main(["seminorm", "-N", "2", "--inner", "10", "--probe-times", "0.5"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [r["probe"] for r in rows] == ["0", "all"]
    assert float(rows[0]["estimate"]) > 0


def test_verify(capsys):
    assert main(["verify", "-N", "2", "--reps", "200"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["passed"] and record["reference_source"] == "oracle"


def test_validate_writes_results(tmp_path, capsys):
    out = tmp_path / "cost.csv"
    assert main(["validate", "cost", "--out", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out
    rows = read_csv(out.read_text(encoding="utf-8"))
    assert rows and all(r["passed"] == "1" for r in rows)


def test_problems_list(capsys):
    assert main(["problems", "list"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["allen-cahn", "constant", "exp-ode", "manufactured", "quadratic"]


def test_run_config_round_trip():
    config = RunConfig(problem="allen-cahn", d=100, N=3, M=4, Q=None, x="radial:2", reps=7, seed=9,
                       deterministic=True, params={"clip": 2.0})
    assert RunConfig.from_json(config.to_json()) == config


def test_parse_point():
    np.testing.assert_allclose(parse_point("radial:2", 4), np.full(4, 1.0))
    assert np.linalg.norm(parse_point("radial:3", 7)) == pytest.approx(3.0)
    assert parse_point("zero", 2).tolist() == [0.0, 0.0]
    assert parse_point("1,-2.5", 2).tolist() == [1.0, -2.5]
    for bad in ("radial:x", "1,2", "a,b"):
        with pytest.raises(UsageError):
            parse_point(bad, 3)


def test_schema_document_covers_fields():
    text = SCHEMA_DOC.read_text(encoding="utf-8")
    fields = RUN_FIELDS | {"gradient_mean", "reference", "reference_source", "abs_error", "passed",
                           "mean_abs_error", "std_error", "rn_model", "fe_model", "bound_rn",
                           "bound_fe", "model_error", "probe", "depth", "estimate", "band", "suite",
                           "check", "detail"}
    missing = [f for f in sorted(fields) if f"`{f}`" not in text]
    assert not missing
