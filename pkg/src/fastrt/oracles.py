"""Trace metrics, reference oracles, and verdict expressions.

A controlled execution is judged against oracles assembled from
fixed-configuration executions of the same application:

* Oracle A is the single fixed trace that adheres best to the intent
  (lowest constraint error; among constraint-meeting traces, best
  cumulative objective).
* Oracle B is assembled iteration-wise from whichever admissible fixed
  trace is closest to the goal at that iteration, an idealized adaptive
  execution.

Two metrics summarize a trace: the mean absolute percentage error of the
window-averaged constraint measure against the goal, and the cumulative
objective (sum of the objective over window averages). The verdict
expressions map the two metric pairs to PASS / FAIL / INVALID.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from .errors import EmptyAvailability, FastError, ZeroGoal
from .events import IntentTimeline
from .intent import OptimizationType
from .intent_compiler import CompiledIntent
from .trace import Trace, TraceRecord


@dataclass(frozen=True)
class TraceMetrics:
    mape: float
    cumulative_objective: float
    windows: int


@dataclass(frozen=True)
class VerdictConfig:
    t: float = 0.05  # constraint error threshold (oracle A verdict)
    t_e: float = 0.05  # constraint error threshold (oracle B verdict)
    t_f: float = 0.05  # objective advantage threshold (oracle B verdict)


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INVALID = "INVALID"


def compute_metrics(trace: Trace, compiled: CompiledIntent, window_size: int,
                    skip_windows: int = 0, events=None) -> TraceMetrics:
    """Windowed constraint error and cumulative objective of a trace.

    Only complete windows count. Each window is judged against the intent
    in force at its last iteration, so goal perturbations are respected.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    timeline = IntentTimeline(compiled, trace.events if events is None else events)
    measure_names = compiled.spec.measure_names
    n_windows = len(trace.records) // window_size
    if n_windows - skip_windows < 1:
        raise FastError(
            f"trace has {n_windows} full window(s); nothing left after skipping {skip_windows}"
        )
    errors = []
    cumulative = 0.0
    for w in range(skip_windows, n_windows):
        start = w * window_size
        records = trace.records[start:start + window_size]
        view = timeline.at(start + window_size - 1)
        spec = view.spec
        if not spec.is_constrained:
            raise FastError("metrics need a constrained intent")
        goal = spec.constraint_goal
        if goal == 0:
            raise ZeroGoal("constraint error is undefined for goal == 0")
        averages = [
            math.fsum(r.measures[m] for r in records) / window_size
            for m in measure_names
        ]
        observed = averages[spec.measure_index(spec.constraint_measure)]
        errors.append(abs(observed - goal) / abs(goal))
        cumulative += view.objective_eval(averages)
    return TraceMetrics(
        mape=math.fsum(errors) / len(errors),
        cumulative_objective=cumulative,
        windows=len(errors),
    )


def objective_advantage(f1: float, f2: float) -> float:
    """How much worse f1 is than f2, relative; 0 when f1 <= f2."""
    if f1 <= f2:
        return 0.0
    return (f1 - f2) / max(abs(f1), abs(f2))


def build_oracle_a(fixed_traces: Sequence[Trace], compiled: CompiledIntent,
                   config: VerdictConfig, window_size: int,
                   events=()) -> Trace:
    """The fixed-configuration trace adhering best to the intent.

    Among traces whose constraint error is within the threshold, the one
    with the best cumulative objective wins; if none meets the threshold,
    the globally lowest-error trace is the oracle (which the verdict
    expression then treats as a constraint-missing oracle). Ties break on
    config id.
    """
    if not fixed_traces:
        raise ValueError("need at least one fixed-configuration trace")
    timeline = IntentTimeline(compiled, events)
    minimize = timeline.final.spec.optimization_type is OptimizationType.MIN
    scored = []
    for trace in fixed_traces:
        metrics = compute_metrics(trace, compiled, window_size, events=events)
        scored.append((metrics, trace))
    meeting = [(m, t) for m, t in scored if m.mape <= config.t]
    if meeting:
        def key(entry):
            metrics, trace = entry
            f = metrics.cumulative_objective
            return ((f if minimize else -f), _trace_id(trace))
        return min(meeting, key=key)[1]
    return min(scored, key=lambda entry: (entry[0].mape, _trace_id(entry[1])))[1]


def _trace_id(trace: Trace):
    return trace.config_id if trace.config_id is not None else 0


def build_oracle_b(fixed_traces: Sequence[Trace], compiled: CompiledIntent,
                   events=(), availability: Optional[Callable] = None) -> Trace:
    """Iteration-wise ideal trace assembled from admissible fixed traces.

    At each iteration the record whose constraint measure is closest to
    the active goal is chosen among the traces whose config id the
    availability function admits; ties break on better objective value at
    that iteration, then lower config id.
    """
    if not fixed_traces:
        raise ValueError("need at least one fixed-configuration trace")
    lengths = {len(t.records) for t in fixed_traces}
    if len(lengths) != 1:
        raise FastError(f"fixed traces disagree on length: {sorted(lengths)}")
    n = lengths.pop()
    for trace in fixed_traces:
        if trace.config_id is None:
            raise FastError("oracle B needs config ids on every fixed trace")
    timeline = IntentTimeline(compiled, events)
    measure_names = compiled.spec.measure_names
    oracle = Trace(intent_name=compiled.spec.name, events=tuple(events))
    for i in range(n):
        view = timeline.at(i)
        spec = view.spec
        goal = spec.constraint_goal
        ci = spec.measure_index(spec.constraint_measure)
        minimize = spec.optimization_type is OptimizationType.MIN
        if availability is not None:
            admissible = availability(i)
            candidates = [t for t in fixed_traces if t.config_id in admissible]
        else:
            candidates = list(fixed_traces)
        if not candidates:
            raise EmptyAvailability(f"no admissible configuration at iteration {i}")

        def key(trace):
            record = trace.records[i]
            vector = [record.measures[m] for m in measure_names]
            objective = view.objective_eval(vector)
            return (
                abs(vector[ci] - goal),
                (objective if minimize else -objective),
                trace.config_id,
            )

        chosen = min(candidates, key=key)
        record = chosen.records[i]
        oracle.append(TraceRecord(
            iteration=i,
            bindings=record.bindings,
            measures=record.measures,
            config_id=chosen.config_id,
        ))
    return oracle


def verdict_a(controlled: TraceMetrics, oracle: TraceMetrics,
              compiled: CompiledIntent, config: VerdictConfig) -> Verdict:
    """Verdict against oracle A.

    "More optimal" is the non-strict comparison in the intent's
    optimization direction, so equal cumulative objectives pass.
    """
    minimize = compiled.spec.optimization_type is OptimizationType.MIN
    if oracle.mape > config.t:
        # Oracle does not meet the constraint.
        if controlled.mape <= config.t:
            return Verdict.PASS
        return Verdict.INVALID
    if controlled.mape <= config.t:
        f_controlled = controlled.cumulative_objective
        f_oracle = oracle.cumulative_objective
        more_optimal = f_controlled <= f_oracle if minimize else f_controlled >= f_oracle
        return Verdict.PASS if more_optimal else Verdict.FAIL
    return Verdict.FAIL


def verdict_b(controlled: TraceMetrics, oracle: TraceMetrics,
              config: VerdictConfig) -> Verdict:
    """Verdict against oracle B."""
    if controlled.mape > config.t_e:
        return Verdict.FAIL
    if oracle.mape > config.t_e:
        return Verdict.PASS
    close_error = abs(oracle.mape - controlled.mape) < config.t_e
    advantage = objective_advantage(oracle.cumulative_objective,
                                    controlled.cumulative_objective)
    if close_error and advantage < config.t_f:
        return Verdict.PASS
    return Verdict.FAIL
