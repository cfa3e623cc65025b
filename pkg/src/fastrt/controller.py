"""Schedule computation.

A schedule maps each iteration index inside a window to a configuration
id, with at most one switch point: the primary configuration runs for the
first round(alpha * window) iterations, the secondary for the rest.

The unconstrained controller grid-searches the model for the best
objective. The constrained controller searches all ordered pairs of model
rows whose constraint-measure averages bracket the (feedback-corrected)
goal, weights them so the window average meets the goal exactly in model
space, and picks the pair whose interpolated objective is best. When no
pair brackets the goal it falls back to the constant schedule nearest the
goal, so unachievable goals degrade gracefully.

Ties are always broken by better objective first, then lower config id,
so runs are deterministic and trace-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import Infeasible
from .intent import OptimizationType
from .intent_compiler import CompiledIntent
from .profiler import ControllerModel


@dataclass(frozen=True)
class Schedule:
    window_size: int
    primary: int
    secondary: int
    alpha: float  # weight of the primary configuration, in [0, 1]
    objective_estimate: float
    predicted_constraint: Optional[float] = None

    @property
    def switch_index(self) -> int:
        return math.floor(self.alpha * self.window_size + 0.5)

    def config_at(self, index: int) -> int:
        return self.primary if index < self.switch_index else self.secondary

    @property
    def is_constant(self) -> bool:
        return self.primary == self.secondary


def realize_schedule(schedule: Schedule):
    """Per-index configuration ids for one window."""
    return [schedule.config_at(i) for i in range(schedule.window_size)]


@dataclass
class FeedbackState:
    """Multiplicative model-error estimate for the constraint measure.

    `lam` tracks predicted/observed through an exponentially weighted
    moving average; the effective goal handed to the controller is
    goal * lam, which cancels a constant multiplicative mismatch between
    the model and reality.
    """

    lam: float = 1.0
    eta: float = 0.3

    def update(self, predicted: float, observed: float) -> "FeedbackState":
        # Non-positive measures carry no usable ratio; skip the update.
        if predicted is None or predicted <= 0 or observed <= 0:
            return self
        self.lam = (1.0 - self.eta) * self.lam + self.eta * (predicted / observed)
        return self

    def reset(self):
        self.lam = 1.0


def feedback_update(state: FeedbackState, predicted: float, observed: float) -> FeedbackState:
    return state.update(predicted, observed)


def _objective_values(compiled: CompiledIntent, model: ControllerModel):
    evaluate = compiled.objective_eval
    return [evaluate(row.measures) for row in model.rows]


def compute_schedule_unconstrained(compiled: CompiledIntent, model: ControllerModel,
                                   window_size: int = 20) -> Schedule:
    """Constant schedule on the configuration with the best profiled objective."""
    if not model.rows:
        raise ValueError("empty controller model")
    minimize = compiled.spec.optimization_type is OptimizationType.MIN
    values = _objective_values(compiled, model)
    best = min(
        range(len(model.rows)),
        key=lambda i: ((values[i] if minimize else -values[i]), model.rows[i].config_id),
    )
    return Schedule(
        window_size=window_size,
        primary=model.rows[best].config_id,
        secondary=model.rows[best].config_id,
        alpha=1.0,
        objective_estimate=values[best],
        predicted_constraint=None,
    )


def compute_schedule_constrained(compiled: CompiledIntent, model: ControllerModel,
                                 feedback: FeedbackState,
                                 window_size: int = 20) -> Schedule:
    """Best two-configuration mix meeting the corrected goal on window average."""
    if not model.rows:
        raise ValueError("empty controller model")
    spec = compiled.spec
    if not spec.is_constrained:
        raise ValueError("intent has no constraint; use the unconstrained controller")
    minimize = spec.optimization_type is OptimizationType.MIN
    goal = spec.constraint_goal * (feedback.lam if feedback is not None else 1.0)
    ci = model.measure_index(spec.constraint_measure)
    rows = model.rows
    constraint = [row.measures[ci] for row in rows]
    values = _objective_values(compiled, model)

    candidates = []  # (sort_value, primary, secondary, alpha, value)

    def add(primary_i, secondary_i, alpha, value):
        # Degenerate weights collapse to a constant schedule.
        if alpha >= 1.0:
            primary_i, secondary_i, alpha, value = primary_i, primary_i, 1.0, values[primary_i]
        elif alpha <= 0.0:
            primary_i, secondary_i, alpha, value = secondary_i, secondary_i, 1.0, values[secondary_i]
        candidates.append((
            (value if minimize else -value),
            rows[primary_i].config_id,
            rows[secondary_i].config_id,
            alpha,
            value,
        ))

    for i in range(len(rows)):
        if constraint[i] == goal:
            add(i, i, 1.0, values[i])
        for j in range(len(rows)):
            if i == j:
                continue
            hi, lo = constraint[i], constraint[j]
            if not (hi > goal > lo):
                continue
            alpha = (goal - lo) / (hi - lo)
            add(i, j, alpha, alpha * values[i] + (1.0 - alpha) * values[j])

    if candidates:
        sort_value, primary, secondary, alpha, value = min(candidates)
        return Schedule(
            window_size=window_size,
            primary=primary,
            secondary=secondary,
            alpha=alpha,
            objective_estimate=value,
            predicted_constraint=goal,
        )

    # No bracketing pair: constant schedule on the row nearest the goal.
    best = min(
        range(len(rows)),
        key=lambda i: (
            abs(constraint[i] - goal),
            (values[i] if minimize else -values[i]),
            rows[i].config_id,
        ),
    )
    return Schedule(
        window_size=window_size,
        primary=rows[best].config_id,
        secondary=rows[best].config_id,
        alpha=1.0,
        objective_estimate=values[best],
        predicted_constraint=constraint[best],
    )


def schedule_cost(compiled: CompiledIntent, model: ControllerModel,
                  effective_goal: float) -> float:
    """Independent optimum of the two-weight scheduling program.

    For every configuration pair, solves the 2x2 linear system
    ``w_i * m_i + w_j * m_j = g, w_i + w_j = 1`` directly and keeps
    solutions with non-negative weights; singletons count when they hit
    the goal exactly. Returns the best weighted objective. Intended as a
    cross-check oracle for compute_schedule_constrained; raises Infeasible
    when no feasible mix exists.
    """
    spec = compiled.spec
    minimize = spec.optimization_type is OptimizationType.MIN
    ci = model.measure_index(spec.constraint_measure)
    mcs = [row.measures[ci] for row in model.rows]
    objs = [compiled.objective_eval(row.measures) for row in model.rows]
    best = None
    for i in range(len(model.rows)):
        if mcs[i] == effective_goal:
            value = objs[i]
            if best is None or (value < best if minimize else value > best):
                best = value
        for j in range(i + 1, len(model.rows)):
            det = mcs[i] - mcs[j]
            if det == 0:
                continue
            w_i = (effective_goal - mcs[j]) / det
            w_j = (mcs[i] - effective_goal) / det
            if w_i < 0 or w_j < 0:
                continue
            value = w_i * objs[i] + w_j * objs[j]
            if best is None or (value < best if minimize else value > best):
                best = value
    if best is None:
        raise Infeasible(f"no configuration mix meets goal {effective_goal}")
    return best
