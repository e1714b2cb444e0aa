import json
import math
from pathlib import Path

import numpy as np
import pytest

from socgrad.cli import main
from socgrad.config import ConfigError, load_config, parse_value
from socgrad.csvio import SchemaError, read_csv, write_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL_INTEGRATOR = ["--sample_size", "120", "--eval_grid", "3x3", "--max_iters", "10"]
SMALL_VEHICLE = ["--sample_size", "150", "--horizon", "4", "--admissible", "3,5", "--max_iters", "10"]
SMALL_SWEEP = ["--sweep_sizes", "40,80", "--repeats", "2", "--eval_grid", "2x2", "--max_iters", "5"]


# ---- config ----------------------------------------------------------------


def test_defaults_follow_experiment():
    integ = load_config(experiment="integrator")
    assert (integ.sample_size, integ.step_size) == (1600, 0.01)
    # absent regularization is resolved to 1/M^2 at fit time
    assert integ.regularization is None
    assert integ.eval_grid == [11, 11] and integ.max_iters == 100
    veh = load_config(experiment="vehicle")
    assert (veh.sample_size, veh.step_size, veh.horizon) == (3000, 0.1, 20)
    assert veh.admissible == [10, 21]


def test_config_files_parse():
    for name in ("integrator", "sweep", "vehicle"):
        cfg = load_config(CONFIGS / f"{name}.toml", experiment=name)
        assert cfg.state_sigma == 3.0 and cfg.control_sigma == 3.0


def test_override_beats_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("seed = 3\nsample_size = 50\n")
    cfg = load_config(p, {"seed": 9}, experiment="integrator")
    assert cfg.seed == 9 and cfg.sample_size == 50


@pytest.mark.parametrize(
    "text,field",
    [
        ("sample_size = 0\n", "sample_size"),
        ("state_sigma = -1.0\n", "state_sigma"),
        ("step_size = 0.0\n", "step_size"),
        ("regularization = -1e-3\n", "regularization"),
        ("grad_tol = -1.0\n", "grad_tol"),
        ("eval_grid = [0, 3]\n", "eval_grid"),
        ("bogus = 1\n", "bogus"),
        ("noise_std = -0.1\n", "noise_std"),
    ],
)
def test_config_errors_name_field(tmp_path, text, field):
    p = tmp_path / "c.toml"
    p.write_text(text)
    with pytest.raises(ConfigError, match=field):
        load_config(p, experiment="integrator")


def test_config_unreadable(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml", experiment="integrator")
    bad = tmp_path / "bad.toml"
    bad.write_text("seed = = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad, experiment="integrator")


def test_parse_value():
    assert parse_value("eval_grid", "11x11") == [11, 11]
    assert parse_value("admissible", "10,21") == [10, 21]
    assert parse_value("grad_tol", "inf") == math.inf
    assert parse_value("regularization", "none") is None
    assert parse_value("wrap_heading", "false") is False
    with pytest.raises(ConfigError, match="seed"):
        parse_value("seed", "abc")


# ---- csv -------------------------------------------------------------------


def test_csv_roundtrip(tmp_path):
    rows = [[0, 0.1, None], [1, -2.5e-17, 3.0]]
    write_csv(tmp_path / "a.csv", ["t", "x", "u"], rows, schema=["t", "x", "u"])
    header, back = read_csv(tmp_path / "a.csv")
    assert header == ["t", "x", "u"] and back == rows


@pytest.mark.parametrize(
    "header,rows,schema",
    [
        (["a", "b"], [[1, 2]], ["a", "c"]),
        (["a", "a"], [[1, 2]], None),
        (["a", "b"], [[1]], None),
        (["a"], [[math.nan]], None),
        (["a"], [[True]], None),
    ],
)
def test_csv_schema_errors(tmp_path, header, rows, schema):
    with pytest.raises(SchemaError):
        write_csv(tmp_path / "x.csv", header, rows, schema=schema)


# ---- cli -------------------------------------------------------------------


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_bad_config_exit_1(tmp_path, capsys):
    code, out, err = run(["integrator", "--sample_size", "-4", "--out", str(tmp_path)], capsys)
    assert code == 1
    assert err.startswith("socgrad: error: sample_size") and err.count("\n") == 1


def test_cli_unknown_flag_exit_1(capsys):
    code, _, err = run(["integrator", "--nonsense", "1"], capsys)
    assert code == 1 and err.count("\n") == 1


def test_cli_unknown_experiment_exit_1(capsys):
    code, _, err = run(["rocket"], capsys)
    assert code == 1 and err.startswith("socgrad: error:")


def test_cli_runtime_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "target.csv"
    bad.write_text("t,px,py\n0,0,0\n1,x,0\n")
    code, _, err = run(["vehicle", *SMALL_VEHICLE, "--target", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    assert "target.csv:3" in err and err.count("\n") == 1


def test_cli_integrator_small(tmp_path, capsys):
    code, out, _ = run(["integrator", *SMALL_INTEGRATOR, "--out", str(tmp_path), "--json"], capsys)
    assert code == 0
    summary = json.loads(out)
    header, rows = read_csv(tmp_path / "controls.csv")
    assert header == ["x0", "x1", "u_grad", "u_oracle", "abs_err", "J_init", "J_final"]
    assert len(rows) == 9
    for r in rows:
        assert -1.0 <= r[2] <= 1.0 and r[6] <= r[5]
        assert r[4] == abs(r[2] - r[3])
    assert summary["mean_abs_err"] == pytest.approx(np.mean([r[4] for r in rows]), rel=1e-12)
    assert (tmp_path / "vector_field.svg").read_text().startswith("<svg")


def test_cli_integrator_single_point_grid(tmp_path, capsys):
    code, _, _ = run(["integrator", "--sample_size", "60", "--eval_grid", "1x1", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, rows = read_csv(tmp_path / "controls.csv")
    assert len(rows) == 1 and rows[0][:2] == [0.0, 0.0]


def test_cli_integrator_noise_free_is_more_accurate(tmp_path, capsys):
    common = ["integrator", "--sample_size", "400", "--eval_grid", "5x5", "--admissible", "41", "--json"]
    _, noisy, _ = run(common + ["--out", str(tmp_path / "a")], capsys)
    _, clean, _ = run(common + ["--noise_std", "0", "--out", str(tmp_path / "b")], capsys)
    assert json.loads(clean)["mean_abs_err"] < json.loads(noisy)["mean_abs_err"]


def test_cli_sweep_small_and_deterministic(tmp_path, capsys):
    assert run(["sweep", *SMALL_SWEEP, "--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(["sweep", *SMALL_SWEEP, "--out", str(tmp_path / "b")], capsys)[0] == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    header, rows = read_csv(tmp_path / "a" / "sweep.csv")
    assert header == ["M", "repeat", "mean_err", "max_err"]
    assert [(r[0], r[1]) for r in rows] == [(40, 0), (40, 1), (80, 0), (80, 1)]


def test_cli_sweep_single_cell(tmp_path, capsys):
    code, _, _ = run(["sweep", "--sweep_sizes", "30", "--repeats", "1", "--eval_grid", "2x2", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert len(read_csv(tmp_path / "sweep.csv")[1]) == 1


def test_cli_vehicle_small(tmp_path, capsys):
    code, out, _ = run(["vehicle", *SMALL_VEHICLE, "--out", str(tmp_path), "--json"], capsys)
    assert code == 0
    summary = json.loads(out)
    for name, key in (("trajectory_lp.csv", "total_cost_lp"), ("trajectory_grad.csv", "total_cost_grad")):
        header, rows = read_csv(tmp_path / name)
        assert header == ["t", "x0", "x1", "x2", "u0", "u1", "stage_cost"]
        assert len(rows) == 5
        assert abs(sum(r[-1] for r in rows) - summary[key]) <= 1e-9
        for r in rows[:-1]:
            assert 0.5 <= r[4] <= 1.2 and -10.1 <= r[5] <= 10.1


def test_cli_vehicle_infinite_grad_tol_matches_lp(tmp_path, capsys):
    code, _, _ = run(["vehicle", *SMALL_VEHICLE, "--grad_tol", "inf", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "trajectory_lp.csv").read_bytes() == (tmp_path / "trajectory_grad.csv").read_bytes()


def test_cli_text_summary(tmp_path, capsys):
    code, out, _ = run(["integrator", *SMALL_INTEGRATOR, "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("integrator M=120") and out.count("\n") == 1
