"""Instrumentation runtime: knob cells, measure recording, and the
optimize loop that alternates application iterations with control.

The loop structure per iteration i (window size w):

* at every window boundary (i % w == 0): finalize the previous window's
  statistics, feed the constraint-measure average back into the model
  error filter, apply any pending perturbations and knob restrictions,
  and ask the controller for the next window's schedule;
* apply the schedule's configuration for index i % w to the application
  knobs and the platform;
* run the application routine (which records its measures and returns
  the iteration's work units);
* simulate the platform to obtain the platform measures and append one
  trace record.

Without a model (or with control disabled) the run stays pinned to the
reference configuration, preserving the uninstrumented program's
behavior.

Everything here runs on a single thread of control; knob reads from the
routine are only safe on that thread. The registry holds knobs through
weak references only, so instrumentation never extends a knob's lifetime
beyond the scope the application gave it.
"""

from __future__ import annotations

import warnings
import weakref
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .controller import (
    FeedbackState,
    Schedule,
    compute_schedule_constrained,
    compute_schedule_unconstrained,
)
from .errors import (
    DuplicateKnob,
    EmptyRestriction,
    FastError,
    IntentNotFound,
    InvalidRestriction,
    MissingMeasure,
)
from .events import (
    KNOB_EVENT_KINDS,
    IntentTimeline,
    PerturbEvent,
    parse_restriction_payload,
)
from .intent import IntentSpec
from .intent_compiler import CompiledIntent, compile_intent
from .intent_parser import parse_intent
from .profiler import ControllerModel, WindowStats, restrict_model
from .simplatform import PLATFORM_KNOBS, PlatformState
from .trace import Trace, TraceRecord

_UNSET = object()
_CLEAR = object()


class Knob:
    """A named cell the runtime may rebind between iterations.

    The reference value is what the cell holds when the program runs
    without control, so the instrumented program keeps the original
    semantics. restrict()/control() narrow or restore the admissible set;
    both take effect at the next window boundary.
    """

    def __init__(self, name, reference, registry):
        self.name = name
        self.reference = reference
        self._current = reference
        self._registry = registry

    def get(self):
        return self._current

    def restrict(self, values=None):
        if values is None:
            self._registry.restrict(self.name, (self._current,), argless=True)
        else:
            self._registry.restrict(self.name, tuple(values))

    def control(self):
        self._registry.control(self.name)

    def _apply(self, value):
        self._current = value

    def __repr__(self):
        return f"Knob({self.name!r}, current={self._current!r})"


class KnobRegistry:
    """Name-keyed weak references to live knobs plus restriction state."""

    def __init__(self):
        self._refs = {}
        self.captured = frozenset()
        self._declared_ranges = None  # intent knob name -> set of values
        self._active = {}  # name -> tuple of admissible values
        self._pending = {}  # name -> tuple | _CLEAR
        self._control_requested = False

    def create(self, name, reference) -> Knob:
        if self.get(name) is not None:
            raise DuplicateKnob(f"knob {name!r} is already registered")
        knob = Knob(name, reference, self)
        self._refs[name] = weakref.ref(knob, lambda _ref, n=name: self._refs.pop(n, None))
        return knob

    def get(self, name) -> Optional[Knob]:
        ref = self._refs.get(name)
        return ref() if ref is not None else None

    def names(self):
        return tuple(name for name in self._refs if self.get(name) is not None)

    def attach_intent(self, spec: IntentSpec):
        self._declared_ranges = {decl.name: set(decl.range) for decl in spec.knobs}

    def set_captured(self, knobs: Sequence[Knob]):
        self.captured = frozenset(k.name for k in knobs)

    # -- restrictions ----------------------------------------------------

    def restrict(self, name, values, argless=False):
        if not values:
            raise EmptyRestriction(f"restrict({name!r}) needs at least one value")
        if not argless and self._declared_ranges is not None:
            declared = self._declared_ranges.get(name)
            if declared is not None:
                outside = [v for v in values if v not in declared]
                if outside:
                    raise InvalidRestriction(
                        f"restrict({name!r}): {outside} outside the declared range"
                    )
        self._pending[name] = tuple(values)

    def control(self, name):
        self._pending[name] = _CLEAR
        self._control_requested = True

    def commit_pending(self) -> bool:
        """Apply pending restrict/control calls; True if controller state
        must be reset (a control() happened)."""
        for name, values in self._pending.items():
            if values is _CLEAR:
                self._active.pop(name, None)
            else:
                self._active[name] = values
        self._pending.clear()
        reset = self._control_requested
        self._control_requested = False
        return reset

    def active_restrictions(self) -> dict:
        return dict(self._active)

    # -- configuration application ----------------------------------------

    def apply_binding(self, name, value) -> bool:
        knob = self.get(name)
        if knob is None:
            return False
        if name in self.captured:
            knob._apply(value)
        return True


class MeasureBoard:
    """Latest measure values for the current iteration.

    Application measures arrive through record(); platform measures are
    filled in by the runtime after each iteration. Unknown names warn once
    and are kept aside so traces can carry them without widening the
    declared schema.
    """

    def __init__(self, declared: Sequence[str]):
        self.declared = tuple(declared)
        self._values = {}
        self._window_counts = {name: 0 for name in self.declared}
        self._warned = set()
        self.extras = {}

    def record(self, name, value):
        if name not in self._window_counts:
            if name not in self._warned:
                warnings.warn(f"measure {name!r} is not declared by the intent")
                self._warned.add(name)
            self.extras[name] = float(value)
            return
        self._values[name] = float(value)
        self._window_counts[name] += 1

    def fill_platform(self, measures: Mapping):
        for name, value in measures.items():
            if name in self._window_counts:
                self._values[name] = float(value)
                self._window_counts[name] += 1

    def snapshot(self) -> dict:
        return {name: self._values.get(name, float("nan")) for name in self.declared}

    def missing_in_window(self):
        return tuple(name for name, count in self._window_counts.items() if count == 0)

    def start_window(self):
        self._window_counts = {name: 0 for name in self.declared}


@dataclass
class RuntimeConfig:
    window_size: int = 20
    perturbations: tuple = ()
    feedback_gain: float = 0.3

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")


@dataclass(frozen=True)
class DecisionRecord:
    window: int
    primary: int
    secondary: int
    alpha: float
    lam: float
    predicted_constraint: Optional[float]
    objective_estimate: float


@dataclass
class RunResult:
    trace: Trace
    decisions: list = field(default_factory=list)


class Runtime:
    """Owns the platform, the knob registry, and the loaded intents."""

    def __init__(self, platform: PlatformState = None,
                 registry: KnobRegistry = None,
                 config: RuntimeConfig = None):
        self.platform = platform or PlatformState()
        self.registry = registry or KnobRegistry()
        self.config = config or RuntimeConfig()
        self._intents = {}
        self._models = {}
        self._board = None
        self._warned_unknown = set()

    # -- wiring -----------------------------------------------------------

    def load_intent(self, source) -> CompiledIntent:
        if isinstance(source, CompiledIntent):
            compiled = source
        elif isinstance(source, IntentSpec):
            compiled = compile_intent(source)
        else:
            compiled = compile_intent(parse_intent(source))
        self._intents[compiled.spec.name] = compiled
        return compiled

    def set_model(self, name, model: ControllerModel):
        self._models[name] = model

    def measure(self, name, value):
        if self._board is None:
            warnings.warn(f"measure({name!r}) outside an optimize loop is ignored")
            return
        self._board.record(name, value)

    # -- reference configuration -------------------------------------------

    def reference_bindings(self, spec: IntentSpec) -> dict:
        """Configuration used without control: intent references where
        declared, otherwise the code-side (or platform) initializers."""
        platform_refs = self.platform.reference_bindings()
        bindings = {}
        for decl in spec.knobs:
            if decl.reference is not None:
                bindings[decl.name] = decl.reference
            else:
                knob = self.registry.get(decl.name)
                if knob is not None:
                    bindings[decl.name] = knob.reference
                elif decl.name in platform_refs:
                    bindings[decl.name] = platform_refs[decl.name]
                else:
                    bindings[decl.name] = decl.range[0]
        return bindings

    # -- main loop ----------------------------------------------------------

    def optimize(self, name, knobs: Sequence[Knob], routine: Callable,
                 iterations: int, parallel_fraction: float = 0.0,
                 controlled: bool = True,
                 fixed_bindings: Mapping = None,
                 fixed_config_id: int = None) -> RunResult:
        """Run `routine` for `iterations` iterations under runtime control.

        `controlled=False` (or the absence of a model) runs the reference
        configuration throughout; `fixed_bindings` pins an explicit
        configuration instead (used for profiling and oracle traces).
        """
        compiled = self._intents.get(name)
        if compiled is None:
            raise IntentNotFound(f"no intent named {name!r} is loaded")
        spec = compiled.spec
        model = self._models.get(name)
        self.registry.attach_intent(spec)
        self.registry.set_captured(knobs)

        window = self.config.window_size
        events = tuple(self.config.perturbations)
        timeline = IntentTimeline(compiled, events)
        knob_events = sorted(
            (e for e in events if e.kind in KNOB_EVENT_KINDS),
            key=lambda e: e.iteration,
        )

        board = MeasureBoard(spec.measure_names)
        stats = {m: WindowStats(window) for m in spec.measure_names}
        feedback = FeedbackState(eta=self.config.feedback_gain)
        decisions = []
        trace = Trace(intent_name=name, events=events, config_id=fixed_config_id)

        run_controlled = controlled and fixed_bindings is None and model is not None
        if fixed_bindings is not None:
            static_bindings = dict(fixed_bindings)
        else:
            static_bindings = self.reference_bindings(spec)

        active = timeline.at(0)
        schedule: Optional[Schedule] = None
        pending_knob_events = list(knob_events)

        self._board = board
        try:
            for i in range(iterations):
                if i % window == 0:
                    if i > 0:
                        self._finalize_window(board, stats, active, schedule, feedback)
                    new_active = timeline.at(i)
                    if new_active is not active:
                        active = new_active
                        feedback.reset()
                    while pending_knob_events and pending_knob_events[0].iteration <= i:
                        self._apply_knob_event(pending_knob_events.pop(0))
                    if self.registry.commit_pending():
                        feedback.reset()
                    if run_controlled:
                        submodel = restrict_model(model, self.registry.active_restrictions())
                        if active.is_constrained:
                            schedule = compute_schedule_constrained(
                                active, submodel, feedback, window)
                        else:
                            schedule = compute_schedule_unconstrained(
                                active, submodel, window)
                        decisions.append(DecisionRecord(
                            window=i // window,
                            primary=schedule.primary,
                            secondary=schedule.secondary,
                            alpha=schedule.alpha,
                            lam=feedback.lam,
                            predicted_constraint=schedule.predicted_constraint,
                            objective_estimate=schedule.objective_estimate,
                        ))
                    board.start_window()

                if run_controlled:
                    config_id = schedule.config_at(i % window)
                    bindings = model.bindings_for(config_id)
                else:
                    config_id = fixed_config_id
                    bindings = static_bindings
                self._apply_configuration(bindings)

                work = routine()
                work = 1.0 if work is None else float(work)
                platform_measures = self.platform.simulate_iteration(
                    work, parallel_fraction)
                board.fill_platform(platform_measures)

                snapshot = board.snapshot()
                trace.append(TraceRecord(
                    iteration=i,
                    bindings=dict(bindings),
                    measures=snapshot,
                    config_id=config_id,
                ))
                for m in spec.measure_names:
                    stats[m].push(snapshot[m])
            if iterations and iterations % window == 0:
                self._finalize_window(board, stats, active, schedule, feedback)
        finally:
            self._board = None
        return RunResult(trace=trace, decisions=decisions)

    def run_fixed(self, name, knobs, routine, bindings, iterations,
                  parallel_fraction: float = 0.0,
                  config_id: int = None) -> RunResult:
        """Uncontrolled run pinned to an explicit configuration."""
        return self.optimize(
            name, knobs, routine, iterations,
            parallel_fraction=parallel_fraction,
            controlled=False,
            fixed_bindings=bindings,
            fixed_config_id=config_id,
        )

    # -- helpers -----------------------------------------------------------

    def _finalize_window(self, board, stats, active, schedule, feedback):
        missing = board.missing_in_window()
        if missing:
            raise MissingMeasure(
                f"measure(s) {list(missing)} were never recorded during a full window"
            )
        if schedule is not None and active.is_constrained:
            spec = active.spec
            observed = stats[spec.constraint_measure].mean
            feedback.update(schedule.predicted_constraint, observed)

    def _apply_knob_event(self, event: PerturbEvent):
        name, values = parse_restriction_payload(event.payload)
        if event.kind == "restrict":
            if values is None:
                knob = self.registry.get(name)
                if knob is not None:
                    knob.restrict()
                elif name == "coreFrequency":
                    self.registry.restrict(name, (self.platform.core_frequency,),
                                           argless=True)
                elif name == "utilizedCores":
                    self.registry.restrict(name, (self.platform.utilized_cores,),
                                           argless=True)
                else:
                    raise FastError(f"restrict event names unknown knob {name!r}")
            else:
                self.registry.restrict(name, values)
        elif event.kind == "control":
            self.registry.control(name)
        else:
            raise ValueError(event.kind)

    def _apply_configuration(self, bindings: Mapping):
        for name, value in bindings.items():
            if self.registry.apply_binding(name, value):
                continue
            if name in PLATFORM_KNOBS:
                self.platform.set_knob(name, value)
            elif name not in self._warned_unknown:
                warnings.warn(f"intent knob {name!r} has no runtime binding; ignored")
                self._warned_unknown.add(name)


def make_runtime(platform=None, window_size: int = 20, perturbations=(),
                 feedback_gain: float = 0.3) -> Runtime:
    config = RuntimeConfig(window_size=window_size,
                           perturbations=tuple(perturbations),
                           feedback_gain=feedback_gain)
    return Runtime(platform=platform, config=config)
