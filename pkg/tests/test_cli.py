import json

import numpy as np
import pytest

from cmekit.cli import ExperimentConfig, UsageError, compare_runs, main, report_from_run, run_experiment
from cmekit.model import builtin_isomer, format_model
from cmekit.operators import assemble_generator
from cmekit.statespace import StateSpace


def test_run_exact_isomer(tmp_path, capsys):
    out = tmp_path / "exact"
    assert main(["run", "--model", "isomer", "--method", "exact", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert abs(summary["means"]["x1"] - 40) < 1e-6
    for name in ("model.txt", "density.txt", "marginal_x1.csv", "marginal_x2.csv", "report.json", "timing.json"):
        assert (out / name).exists()
    rows = (out / "marginal_x1.csv").read_text().splitlines()
    assert rows[0] == "value,probability" and len(rows) == 82


def test_report_round_trip(tmp_path):
    out = tmp_path / "run"
    report, _ = run_experiment(
        ExperimentConfig("isomer", "tau-leap", tau=0.1, T=1.0, n_samples=300, seed=4, out=str(out))
    )
    again = report_from_run(out)
    assert again.to_dict() == report.to_dict()


def test_report_json_reproducible(tmp_path):
    for name in ("a", "b"):
        run_experiment(ExperimentConfig("isomer", "ssa", T=0.5, n_samples=200, seed=8, out=str(tmp_path / name)))
    assert (tmp_path / "a" / "report.json").read_text().replace("/a", "") == (
        tmp_path / "b" / "report.json"
    ).read_text().replace("/b", "")


def test_compare_runs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "--model", "isomer", "--method", "exact", "--T", "1", "--out", str(a)])
    main(["run", "--model", "isomer", "--method", "ssa", "--T", "1", "--samples", "500", "--out", str(b)])
    capsys.readouterr()
    assert main(["compare", str(a), str(a)]) == 0
    assert json.loads(capsys.readouterr().out)["tv"]["joint"] == 0.0
    rep = compare_runs(a, b)
    assert 0 < rep.tv["x1"] < 0.5


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--model", "isomer", "--method", "tau-leap", "--samples", "10"],
        ["run", "--model", "isomer", "--method", "ssa"],
        ["run", "--model", "isomer", "--method", "strang"],
        ["run", "--model", "isomer", "--method", "exact", "--T", "-1"],
        ["run", "--model", "nosuchmodel", "--method", "exact"],
        ["run", "--model", "isomer", "--method", "tau-leap", "--tau", "0.3", "--T", "1", "--samples", "5"],
        ["dump-generator", "--model", "isomer"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_method_exits():
    with pytest.raises(SystemExit):
        main(["run", "--model", "isomer", "--method", "magic"])


def test_config_validate():
    with pytest.raises(UsageError):
        ExperimentConfig("isomer", "magic").validate()
    ExperimentConfig("isomer", "exact").validate()


def test_dump_generator(capsys):
    assert main(["dump-generator", "--model", "isomer", "--caps", "2,2"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.strip().splitlines()]
    assert len(rows) == 9 and all(len(r) == 9 for r in rows)
    dense = np.array(rows, dtype=float)
    model = builtin_isomer()[0].with_caps((2, 2))
    np.testing.assert_array_equal(dense, assemble_generator(model, StateSpace.for_model(model)).toarray())


def test_model_file_run(tmp_path):
    model, init, T = builtin_isomer()
    path = tmp_path / "iso.txt"
    path.write_text(format_model(model.with_caps((12, 12)), type(init)((6, 6)), 0.5))
    report, _ = run_experiment(ExperimentConfig(str(path), "column-split", tau=0.0025))
    assert abs(report.means["x1"] - 6) < 0.15
