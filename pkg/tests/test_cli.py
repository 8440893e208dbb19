import numpy as np
import pytest

from bnslrm.cli import EXIT_ASSUMPTION, EXIT_GRID, EXIT_OK, EXIT_VALIDATION, main, parse_strikes
from bnslrm.report import CSV_COLUMNS, read_csv, write_csv

SMALL = ["--paths", "6", "--batch-size", "4", "--grid", "nv-reduced", "--seed", "5"]


def test_parse_strikes():
    k = parse_strikes("0.5S:1.5S:0.01S", 468.40)
    assert len(k) == 101 and k[0] == pytest.approx(234.2) and k[-1] == pytest.approx(702.6)
    assert parse_strikes("100", 468.4).tolist() == [100.0]
    assert parse_strikes("S", 10.0).tolist() == [10.0]
    for bad in ("1:2", "2:1:0.1", "1:2:-1"):
        with pytest.raises(ValueError):
            parse_strikes(bad, 1.0)


def test_validate_nv(capsys):
    assert main(["--preset", "nv", "--validate"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("[PASS] NV") and "c1_error=6.496e-08" in out


def test_validate_original_scho_fails(capsys):
    assert main(["--preset", "scho", "--set", "b=0.7995", "--validate"]) == EXIT_VALIDATION
    assert "assumption: FAIL" in capsys.readouterr().out


def test_validate_zero_leverage_notes(capsys):
    assert main(["--preset", "nv", "--set", "rho=0", "--validate"]) == EXIT_OK
    assert "vanish" in capsys.readouterr().out


def test_validate_rejects_bad_step(capsys):
    assert main(["--preset", "nv", "--validate", "--step", "0.07"]) == EXIT_VALIDATION


def test_run_aborts_on_assumption(tmp_path):
    rc = main(["--preset", "scho", "--set", "b=0.7995", "--out", str(tmp_path)] + SMALL)
    assert rc == EXIT_ASSUMPTION
    assert not list(tmp_path.iterdir())


def test_run_rejects_coarse_grid(tmp_path):
    grid = tmp_path / "coarse.grid"
    grid.write_text("geometric 1e-2 0.1 5\n")
    rc = main(["--preset", "nv", "--grid", str(grid), "--out", str(tmp_path / "o"), "--paths", "4"])
    assert rc == EXIT_GRID


def test_bad_config():
    assert main(["--preset", "nv", "--set", "gamma=1", "--validate"]) == EXIT_VALIDATION


def test_full_sweep_layout_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--preset", "nv", "--out", str(a)] + SMALL) == EXIT_OK
    rows = read_csv(a / "lrm_NV.csv")
    assert len(rows) == 303
    assert sorted({r["t"] for r in rows}) == [0.1, 0.5, 0.9]
    assert (a / "xi_call_NV.svg").exists() and (a / "manifest_NV.json").exists()
    assert main(["--preset", "nv", "--out", str(b), "--plot", "off", "--workers", "2"] + SMALL) == EXIT_OK
    assert (a / "lrm_NV.csv").read_bytes() == (b / "lrm_NV.csv").read_bytes()
    assert not (b / "xi_call_NV.svg").exists()
    # plots regenerate byte-identically from the CSV alone
    assert main(["--plot-from", str(b / "lrm_NV.csv")]) == EXIT_OK
    assert (a / "xi_call_NV.svg").read_bytes() == (b / "xi_call_NV.svg").read_bytes()


def test_params_file_run(tmp_path):
    params = tmp_path / "desk.params"
    params.write_text("preset = NV\nalpha = 0.05\n")
    rc = main(["--params", str(params), "--t", "0.5", "--strikes", "0.9S:1.1S:0.1S", "--out", str(tmp_path)] + SMALL)
    assert rc == EXIT_OK
    rows = read_csv(tmp_path / "lrm_desk.csv")
    assert len(rows) == 3 and all(r["preset"] == "desk" for r in rows)


def test_csv_round_trip(tmp_path):
    row = {c: 0.1 + 1e-17 * i for i, c in enumerate(CSV_COLUMNS)}
    row.update(preset="NV", L=10, seed=3, K=1 / 3, xi_put=-np.nextafter(0.5, 1))
    write_csv(tmp_path / "x.csv", [row])
    back = read_csv(tmp_path / "x.csv")[0]
    for c in CSV_COLUMNS:
        assert back[c] == row[c]
