import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from lucas_uzawa import InitialEndowment, assemble_solution
from lucas_uzawa.cli import (
    COMPARE_COLUMNS,
    EXIT_CALIBRATION,
    EXIT_CHECK_FAILED,
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    TRAJECTORY_COLUMNS,
    ConfigError,
    fmt,
    main,
    parse_config,
)

from conftest import CONFIG_DIR, P1, load_doc

BASE = load_doc(CONFIG_DIR / "p1_bgp.json")


def write_config(tmp_path, name="cfg.json", **overrides):
    doc = dict(BASE, output_dir=str(tmp_path / "out"))
    doc.update(overrides)
    doc = {k: v for k, v in doc.items() if v is not None}
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_solve_bgp_first_row(tmp_path):
    cfg = write_config(tmp_path, horizon=10.0)
    assert main(["solve", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert tuple(header) == TRAJECTORY_COLUMNS
    assert len(rows) == 101
    row = dict(zip(header, map(float, rows[0])))
    expected = {"t": 0, "k": 1, "h": 10 / 9, "c": 0.095, "u_form1": 0.9, "u_form2": 0.9, "z": 1,
                "lambda": 110.80332, "mu": 110.80332, "F": 0, "B": 0}
    for key, value in expected.items():
        assert row[key] == pytest.approx(value, rel=1e-7, abs=1e-12), key
    for key in ("res_k", "res_h", "res_c", "res_u"):
        assert abs(row[key]) <= 1e-8
    cal = json.loads((tmp_path / "out" / "calibration.json").read_text())
    assert cal["calibration"]["u0"] == pytest.approx(0.9, abs=1e-8)


def test_solve_round_trip(tmp_path):
    cfg = write_config(tmp_path, h0=1.0, horizon=20.0, output_step=0.5)
    assert main(["solve", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "trajectory.csv")
    data = np.array(rows, dtype=float)
    sol = assemble_solution(P1, InitialEndowment(1.0, 1.0))
    tr = sol.evaluate(data[:, 0])
    for name, attr in (("k", "k"), ("h", "h"), ("c", "c"), ("u_form1", "u_form1"),
                       ("u_form2", "u_form2"), ("z", "z"), ("lambda", "lam"), ("mu", "mu"),
                       ("F", "F"), ("B", "B")):
        col = data[:, header.index(name)]
        assert [fmt(v) for v in getattr(tr, attr)] == [fmt(v) for v in col], name


def test_outputs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, h0=1.0, horizon=20.0)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    for name in ("trajectory.csv", "calibration.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert b"\r\n" not in (a / "trajectory.csv").read_bytes()


def test_sigma_equal_beta_is_invalid(tmp_path, capsys):
    cfg = write_config(tmp_path, sigma=0.5)
    assert main(["solve", "--config", str(cfg)]) == EXIT_INVALID
    assert "sigma equals beta" in capsys.readouterr().err


def test_infeasible_verify_is_invalid(tmp_path):
    cfg = write_config(tmp_path, sigma=0.8, rho=0.001)
    assert main(["verify", "--config", str(cfg)]) == EXIT_INVALID


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path, horizon=1.0)
    assert main(["solve", "--config", str(cfg), "--out", str(blocker / "sub")]) == EXIT_IO


def test_missing_config_is_io_error(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == EXIT_IO


def test_calibration_failure_exit(tmp_path):
    cfg = write_config(tmp_path, h0=3.0)
    assert main(["solve", "--config", str(cfg)]) == EXIT_CALIBRATION


def test_verify_bgp_passes(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["verify", "--config", str(cfg)]) == EXIT_OK
    report = json.loads((tmp_path / "out" / "verification.json").read_text())
    assert all(c["verdict"] == "pass" for c in report["checks"])


def test_verify_forced_control_fails(tmp_path):
    cfg = write_config(tmp_path, horizon=20.0, compare_horizon=5.0)
    assert main(["verify", "--config", str(cfg), "--force-u0", "1.5"]) == EXIT_CHECK_FAILED
    report = json.loads((tmp_path / "out" / "verification.json").read_text())
    adm = next(c for c in report["checks"] if c["name"] == "admissibility")
    assert adm["verdict"] == "fail"


def test_compare_bgp_constant(tmp_path):
    cfg = write_config(tmp_path, compare_horizon=10.0)
    assert main(["compare", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "compare.csv")
    assert tuple(header) == COMPARE_COLUMNS
    data = np.array(rows, dtype=float)
    for name in ("u_form1", "u_form2", "u_simulated", "u_scalar_ode"):
        assert np.allclose(data[:, header.index(name)], 0.9, atol=1e-8)


def test_compare_off_bgp_gaps(tmp_path):
    cfg = write_config(tmp_path, h0=1.0, compare_horizon=50.0)
    assert main(["compare", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "compare.csv")
    data = np.array(rows, dtype=float)
    allowed = 1e-6 * (1 + data[:, 0] / 10)
    for name in ("gap_form2", "gap_simulated", "gap_scalar_ode"):
        assert np.all(data[:, header.index(name)] <= allowed), name


def test_compare_zero_horizon(tmp_path):
    cfg = write_config(tmp_path, compare_horizon=0.0)
    assert main(["compare", "--config", str(cfg)]) == EXIT_OK
    text = (tmp_path / "out" / "compare.csv").read_text()
    assert text == ",".join(COMPARE_COLUMNS) + "\n"


def test_sweep_theta(tmp_path):
    cfg = write_config(tmp_path, horizon=50.0, compare_horizon=20.0, sweep={"theta": [0.0, 0.05, 0.1]})
    assert main(["sweep", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert header[0] == "theta" and len(rows) == 3
    first = dict(zip(header, rows[0]))
    assert first["status"] == "ok"
    assert float(first["u0"]) == pytest.approx(0.9, abs=1e-8)


def test_sweep_records_infeasible_point(tmp_path):
    cfg = write_config(tmp_path, horizon=20.0, compare_horizon=5.0, sigma=0.8,
                       sweep={"rho": [0.001, 0.04]})
    assert main(["sweep", "--config", str(cfg)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "sweep.csv")
    status = [dict(zip(header, r))["status"] for r in rows]
    assert status[0].startswith("infeasible: xi<=varphi")
    assert status[1] == "ok"


def test_sweep_empty_range(tmp_path):
    cfg = write_config(tmp_path, sweep={"theta": []})
    assert main(["sweep", "--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "out" / "sweep.csv").read_text().count("\n") == 1


@pytest.mark.parametrize("doc,match", [
    ({"bogus": 1}, "unknown config keys"),
    ({"horizon": 0}, "horizon"),
    ({"output_step": -1}, "output_step"),
    ({"k0": 0}, "k0"),
    ({"tolerances": {"nope": 1}}, "unknown tolerance"),
    ({"beta": "0.5"}, "finite number"),
    ({"sweep": {"horizon": [1]}}, "cannot sweep"),
])
def test_parse_config_errors(doc, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(dict(BASE, **doc))


def test_parse_config_defaults():
    doc = {k: v for k, v in BASE.items() if k not in ("pi", "theta", "output_dir")}
    cfg = parse_config(doc)
    assert cfg.params.pi == 0 and cfg.params.theta == 0
    assert (cfg.horizon, cfg.output_step, cfg.compare_horizon) == (200.0, 0.1, 50.0)


def test_tolerance_overrides():
    cfg = parse_config(dict(BASE, tolerances={"ode_rel_tol": 1e-9, "equiv_tol": 1e-6}))
    assert cfg.tolerances.ode_rel_tol == 1e-9
    assert cfg.verification_settings().equiv_tol == 1e-6


def test_fmt():
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(None) == ""


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, horizon=1.0)
    proc = subprocess.run([sys.executable, "-m", "lucas_uzawa", "solve", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OK, proc.stderr
