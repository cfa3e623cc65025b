"""Measure statistics and controller models.

Two statistics horizons exist: total statistics over an unbounded stream
(constant-time updates, used to build controller models) and windowed
statistics over the last N observations (controller feedback). A
controller model pairs every configuration in the intent's space with its
profiled per-iteration measure averages.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .config_space import expand_configuration_space
from .errors import EmptyConfigurationSpace, MissingMeasure, SchemaMismatch
from .intent import IntentSpec
from .intent_compiler import CompiledIntent


@dataclass
class StreamingStats:
    """Single-pass mean and sum of squared deviations (Welford update)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, value: float) -> "StreamingStats":
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)
        return self

    @property
    def variance(self) -> Optional[float]:
        """Sample variance; undefined (None) for fewer than two values."""
        if self.count < 2:
            return None
        return self.m2 / (self.count - 1)


class WindowStats:
    """Statistics over the most recent `window_size` observations."""

    def __init__(self, window_size: int):
        if window_size < 1:
            raise ValueError("window_size must be >= 1")
        self.window_size = window_size
        self._buffer = deque(maxlen=window_size)

    def push(self, value: float):
        self._buffer.append(value)

    def __len__(self):
        return len(self._buffer)

    def values(self):
        return tuple(self._buffer)

    @property
    def mean(self) -> float:
        if not self._buffer:
            raise ValueError("empty window")
        return math.fsum(self._buffer) / len(self._buffer)

    @property
    def variance(self) -> Optional[float]:
        n = len(self._buffer)
        if n < 2:
            return None
        mu = self.mean
        return math.fsum((x - mu) ** 2 for x in self._buffer) / (n - 1)

    def clear(self):
        self._buffer.clear()


@dataclass(frozen=True)
class ModelRow:
    config_id: int
    bindings: Mapping
    measures: tuple  # ordered like ControllerModel.measure_names


@dataclass(frozen=True)
class ControllerModel:
    """Knob table plus measure table, joined on config_id."""

    knob_names: tuple
    measure_names: tuple
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.config_id: r for r in self.rows})

    def __len__(self):
        return len(self.rows)

    @property
    def config_ids(self):
        return tuple(r.config_id for r in self.rows)

    def row(self, config_id) -> ModelRow:
        return self._by_id[config_id]

    def bindings_for(self, config_id) -> Mapping:
        return self._by_id[config_id].bindings

    def measure_index(self, name) -> int:
        return self.measure_names.index(name)

    def measure_value(self, config_id, name) -> float:
        return self._by_id[config_id].measures[self.measure_index(name)]

    def column(self, name):
        i = self.measure_index(name)
        return tuple(r.measures[i] for r in self.rows)


def restrict_model(model: ControllerModel, restrictions: Mapping) -> ControllerModel:
    """Sub-model whose rows satisfy every active restriction.

    `restrictions` maps knob names to collections of admissible values.
    Config ids are preserved from the parent model. Raises
    EmptyConfigurationSpace when nothing survives.
    """
    if not restrictions:
        return model
    allowed = {name: set(values) for name, values in restrictions.items()}
    rows = tuple(
        r for r in model.rows
        if all(r.bindings.get(name) in values for name, values in allowed.items())
    )
    if not rows:
        raise EmptyConfigurationSpace(
            f"restrictions {sorted(allowed)} remove every model row"
        )
    return ControllerModel(model.knob_names, model.measure_names, rows)


def profile(compiled: CompiledIntent,
            run_config: Callable[[Mapping, int], Iterable[Mapping]],
            iterations_per_config: int,
            warmup: int = 0) -> ControllerModel:
    """Build a controller model by exhaustive profiling.

    `run_config(bindings, iterations)` must execute the instrumented
    application for the requested number of iterations in the given
    configuration and yield one measure mapping per iteration. The full
    intent space is profiled (restrictions never apply at profile time);
    rows appear in configuration-space order and hold total means of the
    per-iteration values, after discarding `warmup` iterations.
    """
    if iterations_per_config < 1:
        raise ValueError("iterations_per_config must be >= 1")
    spec = compiled.spec
    measure_names = spec.measure_names
    space = expand_configuration_space(spec, compiled)
    rows = []
    for config_id, bindings in enumerate(space):
        stats = {name: StreamingStats() for name in measure_names}
        for i, measures in enumerate(run_config(bindings, warmup + iterations_per_config)):
            if i < warmup:
                continue
            for name in measure_names:
                if name not in measures:
                    raise MissingMeasure(
                        f"measure {name!r} missing while profiling configuration {config_id}"
                    )
                stats[name].push(measures[name])
        if any(s.count == 0 for s in stats.values()):
            raise MissingMeasure(
                f"configuration {config_id} produced no samples (warmup too large?)"
            )
        rows.append(ModelRow(config_id, dict(bindings),
                             tuple(stats[name].mean for name in measure_names)))
    return ControllerModel(tuple(spec.knob_names), tuple(measure_names), tuple(rows))


# -- persistence ---------------------------------------------------------

def _format_scalar(value):
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _parse_scalar(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _atomic_write(path, write_rows):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            write_rows(csv.writer(fh))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def model_paths(prefix):
    return f"{prefix}.knobtable.csv", f"{prefix}.measuretable.csv"


def save_model(model: ControllerModel, prefix) -> tuple:
    """Write `<prefix>.knobtable.csv` and `<prefix>.measuretable.csv`.

    Floats are serialized in round-trip-exact form, so save/load is
    bit-exact. Writes are atomic (temp file + rename).
    """
    knob_path, measure_path = model_paths(prefix)

    def write_knobs(writer):
        writer.writerow(["id", *model.knob_names])
        for row in model.rows:
            writer.writerow(
                [row.config_id, *(_format_scalar(row.bindings[k]) for k in model.knob_names)]
            )

    def write_measures(writer):
        writer.writerow(["id", *model.measure_names])
        for row in model.rows:
            writer.writerow([row.config_id, *(_format_scalar(v) for v in row.measures)])

    _atomic_write(knob_path, write_knobs)
    _atomic_write(measure_path, write_measures)
    return knob_path, measure_path


def _read_table(path):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if not header or header[0] != "id":
            raise SchemaMismatch(f"{path}: first column must be 'id'")
        names = tuple(header[1:])
        entries = {}
        for line in reader:
            if not line:
                continue
            if len(line) != len(header):
                raise SchemaMismatch(f"{path}: ragged row {line!r}")
            entries[int(line[0])] = line[1:]
        return names, entries


def load_model(prefix, spec: IntentSpec = None) -> ControllerModel:
    """Load a model pair written by save_model, checking schema agreement.

    When `spec` is given, the knob and measure column sets must match the
    intent's declarations; id sets of both tables must agree either way.
    """
    knob_path, measure_path = model_paths(prefix)
    knob_names, knob_entries = _read_table(knob_path)
    measure_names, measure_entries = _read_table(measure_path)
    if set(knob_entries) != set(measure_entries):
        raise SchemaMismatch(
            f"{knob_path} and {measure_path} disagree on configuration ids"
        )
    if spec is not None:
        if set(knob_names) != set(spec.knob_names):
            raise SchemaMismatch(
                f"knob columns {sorted(knob_names)} do not match intent knobs "
                f"{sorted(spec.knob_names)}"
            )
        if set(measure_names) != set(spec.measure_names):
            raise SchemaMismatch(
                f"measure columns {sorted(measure_names)} do not match intent measures "
                f"{sorted(spec.measure_names)}"
            )
        # Normalize column order to the intent's declaration order.
        knob_order = [knob_names.index(k) for k in spec.knob_names]
        measure_order = [measure_names.index(m) for m in spec.measure_names]
        knob_names = tuple(spec.knob_names)
        measure_names = tuple(spec.measure_names)
    else:
        knob_order = list(range(len(knob_names)))
        measure_order = list(range(len(measure_names)))
    rows = []
    for config_id in sorted(knob_entries):
        knob_cells = knob_entries[config_id]
        measure_cells = measure_entries[config_id]
        bindings = {
            name: _parse_scalar(knob_cells[i]) for name, i in zip(knob_names, knob_order)
        }
        measures = tuple(float(measure_cells[i]) for i in measure_order)
        rows.append(ModelRow(config_id, bindings, measures))
    return ControllerModel(knob_names, measure_names, tuple(rows))
