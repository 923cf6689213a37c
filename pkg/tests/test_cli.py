import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from relmass import cli, spectrum
from relmass.model import CP1

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "cp1.cfg"


def run_cli(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    status = cli.main([*args, "--config", str(CONFIG), "--out", str(out)])
    return status, out


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=object)


def test_spectrum_csv(tmp_path):
    status, out = run_cli(tmp_path, "spectrum")
    assert status == 0
    header, rows = read(out)
    assert header == ["N", "n", "e_ip", "e_int", "e1", "e_total"]
    assert len(rows) == 4
    totals = rows[:, 5].astype(float)
    np.testing.assert_allclose(totals, [4.813040, 5.288366, 17.791027, 18.192331], atol=1.5e-6)
    # full precision round trip
    assert float(rows[0, 5]) == spectrum.total_energy(CP1, 0, 0)


def test_spectrum_n_max(tmp_path):
    status, out = run_cli(tmp_path, "spectrum", "--n-max", "5")
    assert status == 0
    assert len(read(out)[1]) == 12


def test_evolve_csv(tmp_path):
    w = spectrum.omega_ent(CP1)
    status, out = run_cli(tmp_path, "evolve", "--t-end", repr(2 * math.pi / w), "--samples", "9")
    assert status == 0
    header, rows = read(out)
    assert header == ["t", "re_coherence", "im_coherence", "visibility", "purity"]
    t = rows[:, 0].astype(float)
    vis = rows[:, 3].astype(float)
    np.testing.assert_allclose(vis, np.abs(np.cos(w * t)), atol=1e-12)
    phases = np.linspace(0, 2 * math.pi, 9)
    np.testing.assert_allclose(vis, np.abs(np.cos(phases)), atol=1e-12)
    assert vis[0] == 1.0 and vis[-1] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rows[:, 4].astype(float), 0.5 + 0.5 * np.cos(phases) ** 2, atol=1e-12)


def test_figure1_csv(tmp_path):
    status, out = run_cli(tmp_path, "figure1")
    assert status == 0
    header, rows = read(out)
    assert header == ["x", "density_t0", "density_tstar"]
    assert len(rows) == 1001
    mid = rows[500].astype(float)
    assert mid[0] == 0.5
    assert mid[1] == pytest.approx(1.0, abs=1e-12)
    assert mid[2] == pytest.approx(1.0, abs=1e-12)


def test_classical_csv(tmp_path):
    err = io.StringIO()
    cfg = cli.RunConfig(CP1, "classical", out=tmp_path / "c.csv", momentum=0.6, internal_ratio=1e-4)
    assert cli.run(cfg, stderr=err) == 0
    header, rows = read(tmp_path / "c.csv")
    assert header == ["t", "x", "p", "q", "p_int", "H"]
    summary = [line for line in err.getvalue().splitlines() if line.startswith("dilation_factor=")]
    assert len(summary) == 1
    fields = dict(item.split("=") for item in summary[0].split())
    assert float(fields["dilation_factor"]) == pytest.approx(math.sqrt(1.36), rel=1e-5)
    assert float(fields["energy_drift"]) < 1e-9


def test_oracle_exit_zero(tmp_path):
    status, out = run_cli(tmp_path, "oracle")
    assert status == 0
    header, rows = read(out)
    assert header == ["quantity", "closed_form", "oracle_value", "abs_err", "rel_err"]
    assert len(rows) > 5


def test_oracle_exit_one_on_failure(tmp_path, monkeypatch):
    from relmass import oracle

    bad = oracle.OracleReport("broken", 1.0, 2.0, 1.0, 1.0, 1e-6)
    monkeypatch.setattr(oracle, "run_all", lambda params, grid: [bad])
    err = io.StringIO()
    status = cli.run(cli.RunConfig(CP1, "oracle", out=tmp_path / "o.csv"), stderr=err)
    assert status == 1
    assert "FAIL broken" in err.getvalue()


def test_numeric_failure_exit_one(tmp_path, monkeypatch):
    from relmass import classical

    def boom(*args, **kwargs):
        raise classical.IntegrationError("step size underflow")

    monkeypatch.setattr(classical, "integrate", boom)
    assert cli.run(cli.RunConfig(CP1, "classical", out=tmp_path / "c.csv"), stderr=io.StringIO()) == 1


def test_config_errors_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("hbar = 1\nc = 10\nspin = 2\n")
    assert cli.main(["spectrum", "--config", str(cfg)]) == 2
    assert "line 3" in capsys.readouterr().err
    assert cli.main(["spectrum", "--config", str(tmp_path / "missing.cfg")]) == 2


@pytest.mark.parametrize(
    "args",
    [
        ["evolve", "--samples", "1"],
        ["evolve", "--t-end", "-1"],
        ["oracle", "--grid", "32"],
        ["oracle", "--grid", "128"],
        ["classical", "--rel-tol", "0.1"],
    ],
)
def test_option_validation_exit_two(tmp_path, args):
    status, _ = run_cli(tmp_path, *args)
    assert status == 2


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as info:
        cli.main(["plot", "--config", str(CONFIG)])
    assert info.value.code == 2


def test_evolve_needs_t_end_without_splitting(tmp_path):
    cfg = tmp_path / "flat.cfg"
    cfg.write_text(CONFIG.read_text().replace("e1_int = 0.5", "e1_int = 0"))
    assert cli.main(["evolve", "--config", str(cfg)]) == 2
    assert cli.main(["evolve", "--config", str(cfg), "--t-end", "5", "--out", str(tmp_path / "e.csv")]) == 0


def test_stdout_output(capsys):
    assert cli.main(["spectrum", "--config", str(CONFIG)]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("N,n,e_ip,e_int,e1,e_total\n")
    assert "warning" in captured.err


def test_formatting():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(3) == "3"
    assert cli.fmt(np.int64(2)) == "2"


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "relmass", "spectrum", "--config", str(CONFIG), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().count("\n") == 5
