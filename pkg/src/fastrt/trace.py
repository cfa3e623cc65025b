"""Execution traces: one record per iteration with the applied knob
bindings and all declared measure values.

The CSV form has the header ``iteration,<knob columns...>,<measure
columns...>`` with knobs and measures in intent declaration order.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import SchemaMismatch


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    bindings: Mapping
    measures: Mapping
    config_id: Optional[int] = None


@dataclass
class Trace:
    records: list = field(default_factory=list)
    intent_name: str = ""
    events: tuple = ()
    config_id: Optional[int] = None  # set for fixed-configuration traces

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record: TraceRecord):
        self.records.append(record)

    def measure_series(self, name):
        return [r.measures[name] for r in self.records]


def _format_scalar(value):
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def save_trace(trace: Trace, path, knob_names: Sequence[str],
               measure_names: Sequence[str]):
    """Write the trace as CSV, atomically."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", *knob_names, *measure_names])
            for record in trace.records:
                writer.writerow([
                    record.iteration,
                    *(_format_scalar(record.bindings[k]) for k in knob_names),
                    *(_format_scalar(record.measures[m]) for m in measure_names),
                ])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_scalar(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_trace(path, knob_names: Sequence[str], measure_names: Sequence[str],
               intent_name: str = "", config_id: Optional[int] = None) -> Trace:
    """Read a trace CSV written by save_trace; columns must cover the
    given knob and measure names."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if not header or header[0] != "iteration":
            raise SchemaMismatch(f"{path}: first column must be 'iteration'")
        columns = {name: i for i, name in enumerate(header)}
        missing = [n for n in (*knob_names, *measure_names) if n not in columns]
        if missing:
            raise SchemaMismatch(f"{path}: missing columns {missing}")
        trace = Trace(intent_name=intent_name, config_id=config_id)
        for line in reader:
            if not line:
                continue
            trace.append(TraceRecord(
                iteration=int(line[0]),
                bindings={k: _parse_scalar(line[columns[k]]) for k in knob_names},
                measures={m: float(line[columns[m]]) for m in measure_names},
                config_id=config_id,
            ))
    return trace
