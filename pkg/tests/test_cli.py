import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from wavesplit.cli import format_value, main


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_csv(path):
    text = path.read_text(encoding="utf-8")
    comments = [line for line in text.splitlines() if line.startswith("#")]
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    rows = list(csv.reader(io.StringIO(body)))
    return comments, rows[0], rows[1:]


def test_format_value_is_fixed_precision():
    assert format_value(0.15) == "1.50000000000e-01"
    assert format_value(-3.0, 4) == "-3.000e+00"
    assert format_value(7) == "7"
    assert format_value(float("nan")) == "nan"
    assert format_value("0e") == "0e"


def test_config_errors_exit_2(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["phase", "--config", write_cfg(tmp_path, "protocol.v = -1"), "--out", str(out)]) == 2
    assert main(["phase", "--config", write_cfg(tmp_path, "bogus.key = 1"), "--out", str(out)]) == 2
    assert main(["phase", "--config", str(tmp_path / "missing.cfg"), "--out", str(out)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert not out.exists()


def test_runtime_error_exit_3_leaves_no_files(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, "grid.z_max = 10\ngrid.n = 400\nspectrum.d_list = -24, 24\n")
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 3
    assert list(out.iterdir()) == []


def test_spectrum_rows(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, "spectrum.d_list = -24, 0, 24\n")
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    comments, header, rows = read_csv(out / "spectrum.csv")
    assert comments[0] == "# schema: wavesplit/spectrum/v1"
    assert comments[1].startswith("# config-sha256: ")
    assert header == ["d", "E0_e", "E0_o", "E1_e", "E1_o"]
    vals = np.array(rows, dtype=float)
    for row in (vals[0], vals[2]):
        assert 0 <= row[2] - row[1] < 1e-10
    mid = vals[1]
    assert mid[1] < mid[2] < mid[3] < mid[4]
    assert (out / "spectrum.resolved.cfg").exists()


def test_outputs_are_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, "sweep.v_list = 0.1, 0.15\nspectrum.count = 9\n")
    for sub in ("a", "b"):
        for cmd in ("phase", "spectrum"):
            assert main([cmd, "--config", cfg, "--out", str(tmp_path / sub)]) == 0
    for name in ("phase.csv", "spectrum.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # the sidecars differ only in output.directory
    a = (tmp_path / "a" / "phase.resolved.cfg").read_text().splitlines()
    b = (tmp_path / "b" / "phase.resolved.cfg").read_text().splitlines()
    assert [x for x, y in zip(a, b) if x != y] == [f"output.directory = {tmp_path / 'a'}"]


def test_phase_table(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, "sweep.v_list = 0.05, 0.15, 0.3\n")
    assert main(["phase", "--config", cfg, "--out", str(out)]) == 0
    _, header, rows = read_csv(out / "phase.csv")
    assert header == ["v", "inv_v", "theta_c", "area", "p_transfer_pred", "p_stay_pred"]
    vals = np.array(rows, dtype=float)
    assert np.ptp(vals[:, 0] * vals[:, 2]) < 1e-10
    assert np.allclose(vals[:, 4] + vals[:, 5], 1.0)


def test_diagnose_footer(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, "diagnose.count = 49\n")
    assert main(["diagnose", "--config", cfg, "--out", str(out), "--v", "0.05"]) == 0
    comments, header, rows = read_csv(out / "diagnose.csv")
    assert header == ["d", "worst_ratio", "worst_pair_i", "worst_pair_j"]
    assert len(rows) == 49
    footer = comments[-1]
    assert footer.startswith("# global_worst: d=")
    worst = max(float(r[1]) for r in rows)
    assert f"worst_ratio={format_value(worst)}" in footer


def test_entry_point_runs_as_module(tmp_path):
    cfg = write_cfg(tmp_path, "protocol.v = 0")
    proc = subprocess.run([sys.executable, "-m", "wavesplit.cli", "phase", "--config", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "v must be > 0" in proc.stderr


@pytest.mark.slow
def test_split_and_single_velocity_sweep_agree(tmp_path):
    text = "grid.n = 500\npropagation.observe_every = 400\npropagation.snapshot_every = 40000\n"
    cfg = write_cfg(tmp_path, text)
    assert main(["split", "--config", cfg, "--out", str(tmp_path / "s"), "--v", "0.3"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "w"), "--v", "0.3"]) == 0
    _, sh, srows = read_csv(tmp_path / "s" / "split_summary.csv")
    _, wh, wrows = read_csv(tmp_path / "w" / "sweep.csv")
    s = dict(zip(sh, srows[0]))
    w = dict(zip(wh, wrows[0]))
    assert s["p_stay"] == w["p_stay_tdse"]
    assert s["theta_tdse"] == w["theta_tdse"]
    assert s["theta_predicted"] == w["theta_pred"]
    assert s["max_adiabaticity_ratio"] == w["max_ratio"]
    _, th, trows = read_csv(tmp_path / "s" / "split_trajectory.csv")
    assert th[:3] == ["t", "d", "mean_z"]
    assert float(trows[-1][1]) == pytest.approx(12.0)
    _, dh, drows = read_csv(tmp_path / "s" / "split_density.csv")
    assert dh == ["t", "z", "density"]
    assert len(drows) % 500 == 0 and len(drows) >= 1000


@pytest.mark.slow
def test_sweep_two_resolutions(tmp_path):
    cfg = write_cfg(tmp_path, "sweep.v_list = 0.3\nsweep.grid_n = 500, 600\npropagation.observe_every = 1000\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "w")]) == 0
    _, header, rows = read_csv(tmp_path / "w" / "sweep.csv")
    assert [r[header.index("grid_n")] for r in rows] == ["500", "600"]
    p = [float(r[header.index("p_stay_tdse")]) for r in rows]
    assert abs(p[0] - p[1]) < 1e-3
