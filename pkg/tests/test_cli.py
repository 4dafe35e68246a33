"""Tests for the command-line frontend: exit codes and output contracts."""

import subprocess
import sys

import pytest

from stpolar.cli import main
from stpolar.harness import CSV_HEADER


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------------------
# latency


def test_latency_exact_output(capsys):
    rc, out, err = run_cli(capsys, "latency", "--n", "128", "--s", "4")
    assert rc == 0
    assert out == "1D: 10 slots (10 ms); 2D: 3 slots (3 ms)\n"


def test_latency_bad_split(capsys):
    rc, out, err = run_cli(capsys, "latency", "--n", "12", "--s", "5")
    assert rc == 1
    assert "error:" in err


# ---------------------------------------------------------------------------
# construct


def test_construct_stdout_and_file_agree(tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "construct", "--n", "8",
                         "--design-mean", "2.0")
    assert rc == 0
    assert out.startswith("index, mean, ber_estimate\n")
    assert len(out.strip().split("\n")) == 9
    path = str(tmp_path / "table.txt")
    rc2, out2, _ = run_cli(capsys, "construct", "--n", "8",
                           "--design-mean", "2.0", "--out", path)
    assert rc2 == 0 and out2 == ""
    assert open(path).read() == out


def test_construct_rejects_bad_n(capsys):
    rc, _, err = run_cli(capsys, "construct", "--n", "12",
                         "--design-mean", "2.0")
    assert rc == 1
    assert "power of two" in err


# ---------------------------------------------------------------------------
# encode


def test_encode_worked_example(capsys):
    rc, out, _ = run_cli(capsys, "encode", "--bits", "1010", "--s", "2")
    assert rc == 0
    assert out == "1d: 0010\n2d: 00\n2d: 10\n"


def test_encode_explicit_t_and_mode(capsys):
    rc1, out1, _ = run_cli(capsys, "encode", "--bits", "10100100",
                           "--s", "2", "--t", "4")
    rc2, out2, _ = run_cli(capsys, "encode", "--bits", "10100100",
                           "--s", "2", "--t", "4", "--mode", "space-time")
    assert rc1 == rc2 == 0
    assert out1 == out2            # both orders give the same codeword
    assert out1.count("2d:") == 2


def test_encode_bad_length(capsys):
    rc, _, err = run_cli(capsys, "encode", "--bits", "101", "--s", "2")
    assert rc == 1
    assert "error:" in err


def test_encode_bad_bits(capsys):
    rc, _, err = run_cli(capsys, "encode", "--bits", "10x0", "--s", "2")
    assert rc == 1


# ---------------------------------------------------------------------------
# equiv-check


def test_equiv_check_exhaustive(capsys):
    rc, out, _ = run_cli(capsys, "equiv-check", "--n", "8", "--exhaustive")
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "S=1 T=8 time-space: ok (256 messages)"
    # 4 splits x 2 modes plus the summary line
    assert len(lines) == 9
    assert lines[-1] == "all splits and modes equal the 1-D code"


def test_equiv_check_random(capsys):
    rc, out, _ = run_cli(capsys, "equiv-check", "--n", "64",
                         "--trials", "200", "--seed", "5")
    assert rc == 0
    assert "ok (200 messages)" in out


def test_equiv_check_guards(capsys):
    rc, _, err = run_cli(capsys, "equiv-check", "--n", "32", "--exhaustive")
    assert rc == 1
    assert "n <= 16" in err
    rc, _, _ = run_cli(capsys, "equiv-check", "--n", "8", "--trials", "0")
    assert rc == 1


# ---------------------------------------------------------------------------
# simulate


def write_config(tmp_path, text):
    p = tmp_path / "sim.cfg"
    p.write_text(text)
    return str(p)


def test_simulate_from_config_file(tmp_path, capsys):
    cfg = write_config(tmp_path, """
channel = awgn
n = 8
k = 4
snr_db = 40, 30
max_frames = 50
target_frame_errors = 10
seed = 1
""")
    rc, out, err = run_cli(capsys, "simulate", "--config", cfg)
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("30.0,")    # sorted ascending
    assert "snr 40 dB:" in err             # per-point progress on stderr


def test_simulate_flag_overrides_file(tmp_path, capsys):
    cfg = write_config(tmp_path, """
channel = awgn
n = 8
k = 4
snr_db = 35
max_frames = 20
target_frame_errors = 5
seed = 1
""")
    rc, out, _ = run_cli(capsys, "simulate", "--config", cfg, "--seed", "2")
    assert rc == 0
    row = out.strip().split("\n")[1].split(",")
    assert row[-1] == "2"


def test_simulate_flag_evicts_exclusive_pair(tmp_path, capsys):
    # file pins l; a gamma flag must replace it rather than conflict
    cfg = write_config(tmp_path, """
channel = mimo
s = 4
t = 4
k = 8
l = 8
snr_db = 10
max_frames = 20
target_frame_errors = 5
""")
    rc, out, _ = run_cli(capsys, "simulate", "--config", cfg,
                         "--gamma", "1.0")
    assert rc == 0
    row = out.strip().split("\n")[1].split(",")
    assert row[5] == "4"       # L column now from gamma = 1 (l = s = 4)


def test_simulate_out_file_and_worker_invariance(tmp_path, capsys):
    cfg = write_config(tmp_path, """
channel = mimo
s = 2
t = 4
k = 4
gamma = 0.5
snr_db = 0
max_frames = 200
target_frame_errors = 20
seed = 9
""")
    p1 = str(tmp_path / "a.csv")
    p2 = str(tmp_path / "b.csv")
    rc1, out1, err1 = run_cli(capsys, "simulate", "--config", cfg,
                              "--out", p1, "--workers", "1")
    rc2, out2, _ = run_cli(capsys, "simulate", "--config", cfg,
                           "--out", p2, "--workers", "2")
    assert rc1 == rc2 == 0
    assert out1 == out2 == ""
    assert f"wrote {p1}" in err1
    assert open(p1).read() == open(p2).read()


def test_simulate_missing_config(capsys):
    rc, _, err = run_cli(capsys, "simulate", "--config", "missing.cfg")
    assert rc == 1
    assert "missing.cfg" in err


def test_simulate_invalid_combination(capsys):
    rc, _, err = run_cli(capsys, "simulate", "--channel", "awgn", "--n", "8",
                         "--k", "4", "--snr-db", "1", "--l", "4")
    assert rc == 1
    assert "mimo" in err


def test_simulate_unwritable_out_is_runtime_error(capsys):
    rc, _, err = run_cli(capsys, "simulate", "--channel", "awgn", "--n", "8",
                         "--k", "4", "--snr-db", "40", "--max-frames", "10",
                         "--out", "/nonexistent/dir/x.csv")
    assert rc == 2
    assert "runtime error:" in err


# ---------------------------------------------------------------------------
# sinr-stats


def test_sinr_stats_reproducible(capsys):
    args = ("sinr-stats", "--l", "8", "--s", "4", "--snr-db", "10",
            "--trials", "50", "--seed", "3")
    rc1, out1, _ = run_cli(capsys, *args)
    rc2, out2, _ = run_cli(capsys, *args)
    assert rc1 == rc2 == 0
    assert out1 == out2
    lines = out1.strip().split("\n")
    assert lines[0] == "L, S, sigma2, stream, mean, variance, trials"
    assert len(lines) == 6
    assert lines[-1].split(", ")[3] == "pooled"


def test_sinr_stats_needs_trials(capsys):
    rc, _, err = run_cli(capsys, "sinr-stats", "--l", "4", "--s", "2",
                         "--snr-db", "0", "--trials", "1")
    assert rc == 1


# ---------------------------------------------------------------------------
# parser contract


def test_unknown_subcommand_exits_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1


def test_missing_required_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["latency", "--n", "8"])
    assert err.value.code == 1


def test_help_exits_0(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--help"])
    assert err.value.code == 0
    assert "simulate" in capsys.readouterr().out


def test_installed_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "stpolar.cli", "latency", "--n", "256",
         "--s", "16"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "1D: 19 slots (19 ms); 2D: 2 slots (2 ms)\n"
