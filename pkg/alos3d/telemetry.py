"""CSV in and out.

Run logs are written with one header row and the columns of `LogRow` in
declaration order. Floats use `repr`, the shortest string that round-trips,
so a re-read log fits to the same rate bit for bit; undefined values are
written as `nan`.

Reads: simulate (LogRow, SimLog)
"""

import csv
import math
from pathlib import Path
import typing as tp

from .simulate import LOG_COLUMNS, LogRow, SimLog


def _cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_rows(path, header: tp.Sequence[str], rows: tp.Iterable[tp.Sequence[tp.Any]]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def write_log(log: SimLog, path, decimation: int = 1):
    if decimation < 1:
        raise ValueError(f"decimation must be >= 1 (got {decimation})")
    rows = ([getattr(row, name) for name in LOG_COLUMNS] for row in log.rows[::decimation])
    return write_rows(path, LOG_COLUMNS, rows)


def read_log(path, delta_h: float = 20.0, delta_v: float = 20.0) -> SimLog:
    """Rebuild a `SimLog` from a CSV written by `write_log`."""
    with Path(path).open(newline="") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != LOG_COLUMNS:
            raise ValueError(f"{path} is not an alos3d run log (columns {reader.fieldnames})")
        records = list(reader)
    if len(records) < 2:
        raise ValueError(f"{path} holds fewer than two rows")
    rows = []
    for record in records:
        values = {name: float(record[name]) for name in LOG_COLUMNS if name != "flags"}
        values["flags"] = int(record["flags"])
        rows.append(LogRow(**values))
    log = SimLog(dt=rows[1].t - rows[0].t, delta_h=delta_h, delta_v=delta_v)
    for row in rows:
        log.append(row)
    return log


COMPARISON_COLUMNS = ("t", "segment_index_or_varpi", "gamma", "beta_c", "alpha_c", "alpha_c_star",
                      "difference", "predicted", "residual")


def write_comparison(comparison, path, decimation: int = 1):
    columns = (comparison.time, comparison.segment, comparison.gamma, comparison.beta_c,
               comparison.alpha_c, comparison.alpha_c_star,
               comparison.difference, comparison.predicted, comparison.residual)
    rows = ([float(column[index]) for column in columns]
            for index in range(0, len(comparison.time), decimation))
    return write_rows(path, COMPARISON_COLUMNS, rows)


def format_value(value) -> str:
    """Short human-readable rendering for summaries."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)
