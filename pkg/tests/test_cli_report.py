import csv
import json
import subprocess
import sys

import pytest

from polygon_steklov import interval_core as ic
from polygon_steklov.certification import sigma_enclosure
from polygon_steklov.cli_report import (
    PLOT_COLUMNS,
    ReportRecord,
    RunConfig,
    emit_plot_data,
    main,
    parse_config,
    parse_interval,
    render,
    run,
    sigma_record,
)
from polygon_steklov.errors import ConfigError


def run_json(tmp_path, *argv):
    out = tmp_path / "out.json"
    status = main([*argv, "--format", "json", "--out", str(out)])
    return status, json.loads(out.read_text())


# ---- configuration ------------------------------------------------------------

@pytest.mark.parametrize("argv,flag", [
    (["enclose", "--n", "2"], "--n"),
    (["enclose", "--n", "5", "--m", "0"], "--m"),
    (["enclose", "--n", "5", "--dps", "10"], "--dps"),
    (["table", "--from", "9", "--to", "5"], "--from"),
    (["enclose", "--n", "5", "--from", "4"], "--n"),
])
def test_config_errors_name_the_flag(argv, flag):
    with pytest.raises(ConfigError) as info:
        parse_config(argv)
    assert flag in str(info.value)


def test_config_error_exit_status(capsys):
    assert main(["enclose", "--n", "2"]) == 3
    assert main(["bogus"]) == 3
    assert "configuration error" in capsys.readouterr().err


def test_env_precision_override(monkeypatch):
    monkeypatch.setenv("POLYGON_STEKLOV_DPS", "60")
    assert parse_config(["enclose", "--n", "4"]).dps == 60
    monkeypatch.setenv("POLYGON_STEKLOV_DPS", "sixty")
    with pytest.raises(ConfigError):
        parse_config(["enclose", "--n", "4"])


def test_default_ranges():
    assert parse_config(["table"]).n_values == list(range(3, 21))
    assert parse_config(["expand"]).n_values == list(range(20, 101, 10))


def test_record_kind_validation():
    with pytest.raises(ValueError):
        ReportRecord("nonsense", {})
    with pytest.raises(ConfigError):
        RunConfig("enclose", 3, 3, fmt="xml")


# ---- commands ----------------------------------------------------------------------

def test_enclose_json_round_trip(tmp_path):
    status, rows = run_json(tmp_path, "enclose", "--n", "5", "--m", "30", "--dps", "40")
    assert status == 0 and len(rows) == 1 and rows[0]["kind"] == "sigma_row"
    enc = sigma_enclosure(5, 30, 40)
    parsed = parse_interval(rows[0], "sigma")
    assert ic.lower(parsed) <= enc.sigma_lo and enc.sigma_hi <= ic.upper(parsed)
    assert ic.to_interval(rows[0]["sigma_lo"]) <= enc.sigma_lo
    assert ic.to_interval(rows[0]["sigma_hi"]) >= enc.sigma_hi
    assert len(rows[0]["sigma_lo"].split(".")[1]) == 18


def test_output_is_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        assert main(["table", "--from", "4", "--to", "5", "--m", "20", "--dps", "40", "--format", "json",
                     "--out", str(path), "--per-block"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = json.loads(a.read_text())
    assert [r["kind"] for r in rows].count("block_row") == 4 + 5


def test_dump_section(tmp_path):
    dump = tmp_path / "sec.csv"
    assert main(["enclose", "--n", "4", "--m", "5", "--dps", "40", "--dump-section", str(dump),
                 "--out", str(tmp_path / "o.txt")]) == 0
    assert len(dump.read_text().splitlines()) == 1 + 11 * 11


def test_gaps_small_range(tmp_path):
    status, rows = run_json(tmp_path, "gaps", "--from", "5", "--to", "7", "--m", "40", "--dps", "40")
    assert status == 0
    assert [r["N"] for r in rows] == [5, 6] and all(r["positive"] for r in rows)


def test_gap_failure_exit_code(tmp_path):
    # a section of half-width 1 is too coarse to separate N = 19 and N = 20
    status, rows = run_json(tmp_path, "gaps", "--from", "19", "--to", "20", "--m", "1", "--dps", "40")
    assert status == 2 and rows[0]["positive"] is False


def test_constants_ledger_rows(tmp_path):
    status, rows = run_json(tmp_path, "constants")
    names = {r["name"]: r for r in rows}
    for key in ("E0", "E1", "E2", "B0", "K0", "C6", "E_sigma", "margin", "margin_positive_part"):
        assert key in names
    assert names["E0"]["passed"] is True
    assert status == (0 if all(r.get("passed", True) for r in rows) else 2)


def test_expand_rows_and_plot(tmp_path):
    plot = tmp_path / "plot.csv"
    status, rows = run_json(tmp_path, "expand", "--certify-upto", "0", "--plot", str(plot))
    assert status == 0 and [r["N"] for r in rows] == list(range(20, 101, 10))
    lines = list(csv.reader(plot.open()))
    assert lines[0] == PLOT_COLUMNS and len(lines) == 1 + 9


def test_schur_check_command(tmp_path):
    status, rows = run_json(tmp_path, "schur-check", "--n", "6", "--m", "40", "--dps", "40")
    assert status == 0 and rows[0]["agree"] is True


def test_text_and_csv_rendering():
    enc = sigma_enclosure(4, 10, 40)
    rec = sigma_record(enc)
    text = render([rec], "text")
    assert text.startswith("sigma_row: N=4") and "_full" not in text
    table = list(csv.DictReader(render([rec], "csv").splitlines()))
    assert table[0]["N"] == "4" and table[0]["kind"] == "sigma_row"
    assert render([], "text") == ""


# ---- plot data ----------------------------------------------------------------------

def test_plot_sigma_rows(tmp_path):
    recs = [ReportRecord("sigma_row", {"N": n, "sigma_lo": "0.1", "sigma_hi": "0.2"}) for n in range(3, 21)]
    lines = emit_plot_data(recs, tmp_path / "p.csv").read_text().splitlines()
    assert len(lines) == 19


def test_plot_empty_and_mixed(tmp_path):
    assert emit_plot_data([], tmp_path / "e.csv").read_text().splitlines() == [",".join(PLOT_COLUMNS)]
    mixed = [ReportRecord("sigma_row", {"N": 3}), ReportRecord("expansion_row", {"N": 20})]
    with pytest.raises(ValueError):
        emit_plot_data(mixed, tmp_path / "m.csv")
    with pytest.raises(OSError) as info:
        emit_plot_data([], tmp_path / "missing" / "x.csv")
    assert "missing" in str(info.value)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "polygon_steklov", "enclose", "--n", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 3


def test_run_returns_records(capsys):
    status, records = run(RunConfig("enclose", 4, 4, M=10, dps=40))
    assert status == 0 and records[0].payload["N"] == 4
    assert "sigma_row" in capsys.readouterr().out
