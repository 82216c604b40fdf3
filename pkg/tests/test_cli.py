import json
import subprocess
import sys

import pytest

from tclsqueeze import cli, runs


def run(argv):
    return cli.main([str(a) for a in argv])


def test_timeseries_writes_csv(tmp_path):
    out = tmp_path / "ts.csv"
    assert run(["timeseries", "--t-max", "1", "--out", out]) == 0
    header = out.read_text().splitlines()[0]
    assert header == ",".join(runs.CSV_COLUMNS)


def test_timeseries_to_stdout(capsys):
    assert run(["timeseries", "--t-max", "0.2", "--out", "-"]) == 0
    assert capsys.readouterr().out.startswith("t,F1,F2,Pe")


def test_flags_override_config(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("lambda = 0.3\ntheta = 3.141592653589793\nt_max = 1\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["timeseries", "--config", conf, "--out", a]) == 0
    assert run(["timeseries", "--config", conf, "--theta", "2.0944", "--out", b]) == 0
    f1_a = [float(r.split(",")[1]) for r in a.read_text().splitlines()[1:]]
    f1_b = [float(r.split(",")[1]) for r in b.read_text().splitlines()[1:]]
    assert all(v == 0 for v in f1_a) and min(f1_b) < 0


def test_byte_identical_reruns(tmp_path):
    paths = [tmp_path / "1.csv", tmp_path / "2.csv"]
    for p in paths:
        assert run(["timeseries", "--lambda", "0.03", "--t-max", "3", "--out", p]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_range_and_values_agree(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["sweep", "--axis", "coupling", "--t-max", "4"]
    assert run(common + ["--range", "1", "2", "3", "--out", a]) == 0
    assert run(common + ["--values", "1,1.5,2", "--workers", "3", "--out", b]) == 0
    assert a.read_text() == b.read_text()
    assert len(a.read_text().splitlines()) == 4


def test_sweep_full_trajectory(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sweep", "--axis", "phi", "--values", "0,1", "--reduction", "full_trajectory",
                "--t-max", "0.5", "--out", out]) == 0
    assert out.read_text().splitlines()[0].startswith("phi,t,F1")


def test_verify_report(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "--t-max", "5", "--out", out]) == 0
    report = json.loads(out.read_text())
    for key in ("max_ode_dev", "max_rate_dev", "trace_drift", "min_eig"):
        assert isinstance(report[key], float)
    assert report["passed"]


def test_verify_gate_failure_exit_code(tmp_path, monkeypatch):
    real = runs.run_verify

    def failing(cfg):
        report = real(cfg, n_grid=101)
        report["gates"]["max_ode_dev"] = False
        report["passed"] = False
        return report

    monkeypatch.setattr(runs, "run_verify", failing)
    assert run(["verify", "--t-max", "1", "--out", tmp_path / "v.json"]) == 2


def test_figures(tmp_path):
    assert run(["figures", "fig4a", "--out-dir", tmp_path, "--samples-per-fast-period", "40"]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fig4a.csv", "fig4a.gp"]


@pytest.mark.parametrize("argv, message", [
    (["timeseries", "--lambda", "-1"], "lambda"),
    (["timeseries", "--theta", "4"], "theta"),
    (["sweep", "--axis", "theta", "--values", "1,x"], "sweep grid"),
    (["sweep", "--axis", "theta", "--range", "0", "1", "0"], "count"),
    (["figures", "fig9"], "fig1a"),
    (["figures", "fig2a", "--samples-per-fast-period", "8"], "40"),
])
def test_invalid_input_exit_code(argv, message, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1
    assert message in capsys.readouterr().err


def test_bad_config_file_contents(tmp_path, capsys):
    conf = tmp_path / "bad.cfg"
    conf.write_text("omega = 3\n")
    assert run(["timeseries", "--config", conf]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_io_failure_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["timeseries", "--t-max", "0.1", "--out", blocker / "x.csv"]) == 3
    assert run(["timeseries", "--config", tmp_path / "missing.cfg"]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tclsqueeze.cli", "timeseries", "--t-max", "0.1",
                           "--out", str(tmp_path / "x.csv")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "x.csv").exists()
