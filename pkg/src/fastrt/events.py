"""Perturbation scripts and the resulting intent timeline.

A script line reads ``iteration,kind,payload`` where kind is one of
goal, constraintMeasure, optimizationType, objective, restrict, control.
Intent-level events change the active optimization problem; restrict and
control manipulate the admissible configuration set. The runtime observes
events at the first window boundary at or after their iteration; metrics
judge each window against the intent in force at the window's end.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FastError, IntentValidationError
from .intent import validate_spec, OptimizationType
from .intent_compiler import CompiledIntent, compile_intent
from .intent_parser import parse_expression

INTENT_EVENT_KINDS = ("goal", "constraintMeasure", "optimizationType", "objective")
KNOB_EVENT_KINDS = ("restrict", "control")
EVENT_KINDS = INTENT_EVENT_KINDS + KNOB_EVENT_KINDS


@dataclass(frozen=True)
class PerturbEvent:
    iteration: int
    kind: str
    payload: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")


def parse_script(text: str) -> tuple:
    """Parse a perturbation script body into events sorted by iteration."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//") or line.startswith("#"):
            continue
        parts = line.split(",", 2)
        if len(parts) != 3:
            raise FastError(f"perturbation line {lineno}: expected 'iteration,kind,payload'")
        try:
            iteration = int(parts[0])
        except ValueError:
            raise FastError(f"perturbation line {lineno}: bad iteration {parts[0]!r}") from None
        events.append(PerturbEvent(iteration, parts[1].strip(), parts[2].strip()))
    events.sort(key=lambda e: e.iteration)
    return tuple(events)


def load_script(path) -> tuple:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_script(fh.read())


def _parse_scalar(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_restriction_payload(payload: str):
    """Split ``knob`` or ``knob=v1|v2|...`` into (name, values-or-None)."""
    if "=" in payload:
        name, _, raw = payload.partition("=")
        values = tuple(_parse_scalar(v) for v in raw.split("|") if v != "")
        return name.strip(), values
    return payload.strip(), None


def _apply_intent_event(spec, event: PerturbEvent):
    if event.kind == "goal":
        return dataclasses.replace(spec, constraint_goal=float(event.payload))
    if event.kind == "constraintMeasure":
        name = event.payload.strip()
        if name not in spec.measure_names:
            raise IntentValidationError(
                f"perturbation switches constraint to undeclared measure {name!r}"
            )
        return dataclasses.replace(spec, constraint_measure=name)
    if event.kind == "optimizationType":
        return dataclasses.replace(
            spec, optimization_type=OptimizationType(event.payload.strip())
        )
    if event.kind == "objective":
        objective = parse_expression(event.payload)
        return dataclasses.replace(spec, objective=objective)
    raise ValueError(event.kind)


class IntentTimeline:
    """The compiled intent in force at each iteration, under perturbations."""

    def __init__(self, base: CompiledIntent, events: Iterable[PerturbEvent] = ()):
        self.base = base
        relevant = sorted(
            (e for e in events if e.kind in INTENT_EVENT_KINDS),
            key=lambda e: e.iteration,
        )
        self._breaks = [(0, base)]
        spec = base.spec
        for event in relevant:
            spec = validate_spec(_apply_intent_event(spec, event))
            compiled = compile_intent(spec)
            if self._breaks[-1][0] == event.iteration:
                self._breaks[-1] = (event.iteration, compiled)
            else:
                self._breaks.append((event.iteration, compiled))

    def at(self, iteration: int) -> CompiledIntent:
        active = self._breaks[0][1]
        for start, compiled in self._breaks:
            if start <= iteration:
                active = compiled
            else:
                break
        return active

    @property
    def final(self) -> CompiledIntent:
        return self._breaks[-1][1]

    @property
    def change_iterations(self):
        return tuple(start for start, _ in self._breaks[1:])


def availability_timeline(model, events: Sequence[PerturbEvent], window_size: int):
    """Admissible config ids per iteration, honoring restrict/control.

    Events act at the first window boundary at or after their iteration,
    matching the runtime's restriction timing. Returns a callable
    ``iteration -> frozenset of config ids``.
    """
    knob_events = [e for e in events if e.kind in KNOB_EVENT_KINDS]
    knob_events.sort(key=lambda e: e.iteration)
    all_ids = frozenset(r.config_id for r in model.rows)

    # Build (effective_iteration, admissible id set) breakpoints.
    breakpoints = [(0, all_ids)]
    restrictions = {}
    for event in knob_events:
        boundary = ((event.iteration + window_size - 1) // window_size) * window_size
        name, values = parse_restriction_payload(event.payload)
        if event.kind == "restrict":
            if values is None:
                raise FastError(
                    "availability timelines need explicit values in restrict events"
                )
            restrictions[name] = set(values)
        else:
            restrictions.pop(name, None)
        admissible = frozenset(
            r.config_id
            for r in model.rows
            if all(r.bindings.get(k) in vs for k, vs in restrictions.items())
        )
        if breakpoints[-1][0] == boundary:
            breakpoints[-1] = (boundary, admissible)
        else:
            breakpoints.append((boundary, admissible))

    def admissible_at(iteration: int) -> frozenset:
        active = breakpoints[0][1]
        for start, ids in breakpoints:
            if start <= iteration:
                active = ids
            else:
                break
        return active

    return admissible_at
