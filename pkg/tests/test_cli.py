import json
import subprocess
import sys

import numpy as np
import pytest

from tempered_hermite import cli, harness
from tempered_hermite.harness import CheckResult


def run(*args):
    return cli.main([str(a) for a in args])


def test_simulate_writes_grid_and_sidecar(tmp_path):
    out = tmp_path / "z.bin"
    assert run("simulate", "--grid", "4x3", "--tmax", "2,1.5", "--seed", 5, "-o", out,
               "--csv", tmp_path / "z.csv", "--pgm", tmp_path / "z.pgm") == 0
    vals, meta = cli.read_grid_file(out)
    assert vals.shape == (4, 3)
    assert meta["seed"] == {"seed": 5, "stream": 0, "replicate": 0}
    assert meta["grid"]["dx"] == 0.5 and meta["method"] == "cholesky"
    assert (tmp_path / "z.csv").read_text().splitlines()[0] == "t,s,value"
    assert (tmp_path / "z.pgm").read_bytes().startswith(b"P5\n4 3\n255\n")


@pytest.mark.parametrize("method", ["cholesky", "spectral", "moving_average"])
def test_reproduce_is_bit_identical(tmp_path, method, capsys):
    out = tmp_path / "z.bin"
    assert run("simulate", "--grid", "3x3", "--tmax", "1,1", "--method", method, "--freq-modes", 33,
               "--replicates", 2, "-o", out) == 0
    assert run("reproduce", tmp_path / "z.json") == 0
    assert "identical" in capsys.readouterr().out


def test_reproduce_detects_changes(tmp_path, capsys):
    out = tmp_path / "z.bin"
    run("simulate", "--grid", "2x2", "-o", out)
    data = bytearray(out.read_bytes())
    data[0] ^= 1
    out.write_bytes(bytes(data))
    assert run("reproduce", tmp_path / "z.json") == 1
    assert "DIFFERENT" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    out = tmp_path / "z.bin"
    assert run("simulate", "--h", "0.4,0.7", "-o", out) == 2
    assert run("simulate", "--grid", "3", "-o", out) == 2
    assert run("simulate", "--method", "semimartingale", "--grid", "2x2", "-o", out) == 2
    assert "unsupported parameter range" in capsys.readouterr().err
    assert run("simulate", "--bogus", "-o", out) == 2
    assert run("simulate", "--grid", "2x2", "-o", tmp_path / "missing" / "z.bin") == 3
    assert run("reproduce", tmp_path / "nothing.json") == 3


def test_covariance_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert run("covariance", "--ts", "0.5,1", "--ss", "1", "-o", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,s,u,v,cov" and len(lines) == 5
    row = [float(v) for v in lines[1].split(",")]
    assert row[:4] == [0.5, 1.0, 0.5, 1.0] and row[4] > 0
    assert json.loads((tmp_path / "c.json").read_text())["ts"] == [0.5, 1.0]


def _write_bump(tmp_path):
    n, h = 96, 0.25
    x = -12.0 + h * np.arange(n)
    vals = np.exp(-((x[:, None] + 4) ** 2 + (x[None, :] + 4) ** 2) / 2.0)
    f = tmp_path / "f.bin"
    f.write_bytes(vals.astype("<f8").tobytes())
    grid = {"x0": -12.0, "y0": -12.0, "dx": h, "dy": h, "nx": n, "ny": n}
    (tmp_path / "f.json").write_text(json.dumps({"grid": grid}))
    return f, vals


def test_operator_round_trip(tmp_path):
    f, vals = _write_bump(tmp_path)
    i_out, d_out = tmp_path / "i.bin", tmp_path / "d.bin"
    assert run("operator", "--input", f, "--op", "integral", "--route", "fourier", "--alpha", "0.4,0.7",
               "--lambda", "1.5,1.5", "-o", i_out) == 0
    assert run("operator", "--input", i_out, "--op", "derivative", "--route", "fourier", "--alpha", "0.4,0.7",
               "--lambda", "1.5,1.5", "-o", d_out) == 0
    back, meta = cli.read_grid_file(d_out)
    assert np.linalg.norm(back - vals) / np.linalg.norm(vals) < 1e-6
    assert meta["operator"] == "derivative"
    assert run("operator", "--input", f, "--alpha", "0,1", "-o", i_out) == 2


def test_verify_with_stub_suite(tmp_path, monkeypatch, capsys):
    def stub(cfg):
        return [CheckResult("stub.a", "pass", 0.0, 1.0), CheckResult("stub.b", "warn", 0.0, 0.0, "gate")]

    def bad(cfg):
        return [CheckResult("bad.a", "fail", 2.0, 1.0)]

    class Cfg:
        def __init__(self, threads=1):
            self.threads = threads

    monkeypatch.setattr(harness, "SUITES", {"stub": (Cfg, stub), "bad": (Cfg, bad)})
    report = tmp_path / "r.json"
    assert run("verify", "--suite", "stub", "--json", report, "--text", tmp_path / "r.txt") == 0
    out = capsys.readouterr().out
    assert "PASS  stub.a" in out and "WARN  stub.b" in out
    assert [r["name"] for r in json.loads(report.read_text())["results"]] == ["stub.a", "stub.b"]
    assert run("verify", "--suite", "bad") == 1
    assert run("verify", "--suite", "nope") == 2


def test_config_file(tmp_path, capsys):
    cfgf = tmp_path / "c.json"
    cfgf.write_text('{"grid": "2x2", "seed": 3, "output": "%s"}' % (tmp_path / "z.bin"))
    assert run("--config", cfgf, "simulate") == 0
    assert cli.read_grid_file(tmp_path / "z.bin")[1]["seed"]["seed"] == 3
    cfgf.write_text('{"grid": "2x2",\n "colour": 1}')
    assert run("--config", cfgf, "simulate", "-o", tmp_path / "y.bin") == 2
    assert "unknown field 'colour'" in capsys.readouterr().err
    cfgf.write_text('{"grid": "2x2",\n "seed": }')
    assert run("--config", cfgf, "simulate", "-o", tmp_path / "y.bin") == 2
    assert "line 2, column" in capsys.readouterr().err


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads(type("A", (), {"threads": None})()) == 3
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    with pytest.raises(cli.UsageError):
        cli._threads(type("A", (), {"threads": None})())


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "tempered_hermite", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "tempered-hermite" in res.stdout
