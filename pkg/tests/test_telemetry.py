"""Run-log and comparison CSV files."""
import csv
from dataclasses import replace
import math

import pytest

from alos3d.analysis import fit_exponential_rate, formulation_comparison
from alos3d.scenario import load_scenario, with_overrides
from alos3d.simulate import LOG_COLUMNS, SimLog, run_scenario
from alos3d.telemetry import (
    COMPARISON_COLUMNS,
    format_value,
    read_log,
    write_comparison,
    write_log,
)


@pytest.fixture(scope="module")
def level_log():
    return run_scenario(with_overrides(load_scenario("straight_level"), dt=0.1, duration=300.0))


def _read(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_written_log_reads_back_identically(tmp_path, level_log):
    path = write_log(level_log, tmp_path / "runs" / "level.csv")
    rows = _read(path)
    assert tuple(rows[0]) == LOG_COLUMNS
    assert len(rows) == len(level_log) + 1
    back = read_log(path, delta_h=level_log.delta_h, delta_v=level_log.delta_v)
    assert back.rows == level_log.rows
    assert back.dt == pytest.approx(0.1)
    assert fit_exponential_rate(back) == fit_exponential_rate(level_log)


def test_undefined_values_are_written_as_nan(tmp_path, level_log):
    rows = [replace(level_log.rows[0], alpha_c_star=math.nan)] + level_log.rows[1:3]
    path = write_log(SimLog(dt=level_log.dt, rows=rows), tmp_path / "nan.csv")
    assert _read(path)[1][LOG_COLUMNS.index("alpha_c_star")] == "nan"
    assert math.isnan(read_log(path).rows[0].alpha_c_star)


def test_decimation_keeps_every_nth_row(tmp_path, level_log):
    path = write_log(level_log, tmp_path / "level.csv", decimation=10)
    rows = _read(path)[1:]
    assert len(rows) == len(level_log.rows[::10])
    assert float(rows[1][0]) == level_log.rows[10].t
    with pytest.raises(ValueError, match="decimation"):
        write_log(level_log, tmp_path / "bad.csv", decimation=0)


def test_read_log_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(ValueError, match="not an alos3d run log"):
        read_log(path)


def test_comparison_file(tmp_path, level_log):
    comparison = formulation_comparison(level_log)
    rows = _read(write_comparison(comparison, tmp_path / "compare.csv", decimation=100))
    assert tuple(rows[0]) == COMPARISON_COLUMNS
    assert len(rows) == 1 + len(range(0, len(level_log), 100))
    assert float(rows[2][0]) == level_log.rows[100].t


@pytest.mark.parametrize("value, expected", [
    (None, "n/a"),
    (math.nan, "n/a"),
    (0.123456, "0.1235"),
    (3, "3"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected
