import json
import time
import subprocess
import sys

import pytest

from usdqpsk.cli import main
from usdqpsk.experiments import FIELD_NAMES, PRESETS, SCHEMA_LINE, read_csv


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_lut_export(capsys):
    code, out, _ = run(["lut", "--stages", "5"], capsys)
    assert code == 0
    lines = out.splitlines()
    # one row per reachable (stage, previous, eliminated) state
    assert len(lines) == 30
    assert lines[0] == "stage 1 previous 3 eliminated 0 hypothesis 0"
    assert "stage 5 previous 3 eliminated 1 hypothesis 2" in lines


def test_lut_rejects_short_receivers(capsys):
    code, _, err = run(["lut", "--stages", "3"], capsys)
    assert code == 1 and "error" in err


def test_bound_table(capsys):
    code, out, _ = run(["bound", "--alpha-sq-range", "0:2:1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha_sq,p_conclusive"
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values[0] == 0.0
    assert values[1] == pytest.approx(0.2455449, abs=1e-7)
    assert values[2] == pytest.approx(0.7355643, abs=1e-7)


def test_numerical_failure_exits_with_two(capsys):
    code, _, err = run(["bound", "--alpha-sq-range", "2000:2000:1"], capsys)
    assert code == 2 and "not converged" in err


def test_invalid_config_exits_with_one(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("stages = 3\nvisibility = 2\n")
    code, _, err = run(["sweep", str(path)], capsys)
    assert code == 1
    assert err.count("error: line") == 2


def test_missing_config_exits_with_one(tmp_path, capsys):
    code, _, _ = run(["sweep", str(tmp_path / "absent.cfg")], capsys)
    assert code == 1


def test_unwritable_output_exits_with_one(tmp_path, capsys):
    code, _, _ = run(["lut", "--stages", "4", "--out", str(tmp_path / "no" / "such.txt")], capsys)
    assert code == 1


def test_sweep_writes_csv_and_summary(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "start = 1.0\nstop = 2.0\nstep = 0.5\nstages = 6\nvisibility = 0.994\n"
        "dark_rate = 1.5e-3\nmethods = bound, static_exact, adaptive_exact, adaptive_mc\n"
        f"output = {tmp_path / 'out.csv'}\n")
    code, _, _ = run(["sweep", str(cfg), "--trials", "2000", "--seed", "4",
                      "--summary", str(tmp_path / "s.json")], capsys)
    assert code == 0
    raw = (tmp_path / "out.csv").read_bytes()
    assert b"\r" not in raw
    text = raw.decode("utf-8")
    assert text.splitlines()[0] == SCHEMA_LINE
    assert text.splitlines()[1] == ",".join(FIELD_NAMES)
    rows = read_csv(text)
    assert len(rows) == 12
    assert {r["seed"] for r in rows} == {"4"}
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary["rows"] == 12 and summary["schema"] == "1"


def test_fig2a_static_column(tmp_path, capsys):
    out = tmp_path / "fig2a.csv"
    code, _, _ = run(["preset", "fig2a", "--seed", "1", "--trials", "200", "--out", str(out)],
                     capsys)
    assert code == 0
    rows = read_csv(out.read_text())
    static = [r for r in rows if r["method"] == "static_exact" and r["xi"] == "1.0"
              and r["alpha_sq"] == "1.0"]
    assert len(static) == 1
    assert float(static[0]["p_conclusive"]) == pytest.approx(0.0978637, abs=1e-7)
    assert {r["M"] for r in rows if r["method"] == "adaptive_mc"} == {"10", "100"}


def test_presets_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path, workers in zip(paths, ("1", "4")):
        assert main(["preset", "fig6", "--seed", "9", "--trials", "3000",
                     "--workers", workers, "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_fig7a_ratio_rows(tmp_path, capsys):
    out = tmp_path / "fig7a.csv"
    assert main(["preset", "fig7a", "--trials", "500", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    ratios = [r for r in rows if r["method"] == "error_ratio_exact"]
    assert len(ratios) == 51 * 4
    assert all(r["eta_path"] == "0.91" for r in ratios)
    # the ratio improves with detector efficiency
    sel = [float(r["p_error"]) for r in ratios if r["alpha_sq"] == "3.0" and r["M"] == "4"]
    assert sel[-1] < sel[0]


def test_unknown_preset_is_rejected():
    with pytest.raises(SystemExit) as info:
        main(["preset", "fig9"])
    assert info.value.code == 2  # argparse usage error


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "usdqpsk", "lut", "--stages", "4"],
                            capture_output=True, text=True, check=True)
    assert result.stdout.count("\n") == 15


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_runs_within_five_minutes_at_default_counts(name, tmp_path):
    start = time.perf_counter()
    assert main(["preset", name, "--out", str(tmp_path / f"{name}.csv")]) == 0
    assert time.perf_counter() - start < 300
