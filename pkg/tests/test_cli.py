import subprocess
import sys

import pytest

from hybrid_secrecy.cli import main, parse_grid, read_config
from hybrid_secrecy.experiments import UsageError, read_csv

FAST = ["--nt", "8", "--k", "2", "--l", "4", "--trials", "2", "--mc-samples", "100"]


def test_parse_grid():
    assert parse_grid("-5:5:20") == (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    assert parse_grid("1:1:8", int) == tuple(range(1, 9))
    assert parse_grid("0,7.5") == (0.0, 7.5)
    assert parse_grid("0:0.1:0.3") == (0.0, 0.1, 0.2, 0.3)
    for bad in ("1:2", "5:1:0", "1:0:3", ""):
        with pytest.raises(UsageError):
            parse_grid(bad)
    with pytest.raises(UsageError):
        parse_grid("1.5", int)


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["sweep", "--method", "mrt-an", "--snr", "-5:5:0", "--bdac", "8", "--bps", "4",
                 "--seed", "3", "--out", str(out), *FAST]) == 0
    rows = read_csv(out)
    assert [r.snr_db for r in rows] == [-5.0, -5.0, 0.0, 0.0]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("method = mrt\nsnr = 0,10\ntrials = 1\nmc-samples = 50\nnt = 8\nk = 2\nl = 4\n")
    assert read_config(cfg)["mc_samples"] == "50"
    out = tmp_path / "r.csv"
    assert main(["sweep", "--config", str(cfg), "--snr", "5", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [(r.method, r.snr_db) for r in rows] == [("mrt", 5.0)]


def test_exit_codes(tmp_path, capsys):
    assert main(["sweep", "--method", "nonsense"]) == 2
    assert main(["sweep", "--snr", "abc", *FAST]) == 2
    assert main(["sweep", "--method", "mrt", "--trials", "0"]) == 2
    assert main(["sweep", "--method", "mrt", "--out", str(tmp_path / "no" / "x.csv"), *FAST]) == 3
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["sweep", "--config", str(bad)]) == 2
    assert main(["paper-figures"]) == 2
    assert main([]) == 2
    err = capsys.readouterr().err
    assert "usage error" in err and "I/O error" in err


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run([sys.executable, "-m", "hybrid_secrecy", "sweep", "--method", "mrt",
                           "--snr", "0", "--out", str(out), *FAST], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("method,snr_db,")
