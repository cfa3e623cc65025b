"""Application-agnostic runtime test scenarios.

Six end-to-end cases exercise the controller against mid-run intent
changes: four where adaptation should succeed (PASS), one where the
change arrives too late to react (FAIL), and one whose goal no
configuration can reach (INVALID). Each scenario profiles the demo app,
runs it controlled under a perturbation script, replays every fixed
configuration, builds the reference oracle, and evaluates the verdict
expression.

Scenario 6 must use the oracle-A verdict (only its decision tree can
return INVALID); scenario 5 uses oracle B, whose iteration-wise goal
tracking makes a too-late reaction visible as constraint error.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..events import PerturbEvent
from ..intent_compiler import compile_intent
from ..intent_parser import parse_intent
from ..oracles import (
    TraceMetrics,
    Verdict,
    VerdictConfig,
    build_oracle_a,
    build_oracle_b,
    compute_metrics,
    verdict_a,
    verdict_b,
)
from .harness import profile_app, run_app

_SCENARIO_INTENT = """\
intent incrementer
  min(energy)
  such that latency == {goal}
measures
  latency: Double
  operations: Double
  energy: Double
  performance: Double
knobs
  step = [1, 2, 3, 4]
  threshold = [2000000, 5000000, 8000000]
  coreFrequency = [300, 1200]
  such that threshold / step > 700000
"""


@dataclass(frozen=True)
class Scenario:
    scenario_id: int
    description: str
    intent_text: str
    events: tuple
    iterations: int
    window_size: int
    oracle: str  # "A" | "B"
    expected: Verdict


SCENARIOS = {
    1: Scenario(
        1,
        "constraint goal raised mid-run with enough time to re-converge",
        _SCENARIO_INTENT.format(goal="0.03"),
        (PerturbEvent(300, "goal", "0.12"),),
        iterations=600,
        window_size=20,
        oracle="A",
        expected=Verdict.PASS,
    ),
    2: Scenario(
        2,
        "constraint measure switched from latency to performance",
        _SCENARIO_INTENT.format(goal="0.03"),
        (
            PerturbEvent(300, "constraintMeasure", "performance"),
            PerturbEvent(300, "goal", "25.0"),
        ),
        iterations=600,
        window_size=20,
        oracle="A",
        expected=Verdict.PASS,
    ),
    3: Scenario(
        3,
        "optimization type flipped to max with the objective negated "
        "(behavior must be unchanged)",
        _SCENARIO_INTENT.format(goal="0.07"),
        (
            PerturbEvent(300, "optimizationType", "max"),
            PerturbEvent(300, "objective", "-energy"),
        ),
        iterations=600,
        window_size=20,
        oracle="A",
        expected=Verdict.PASS,
    ),
    4: Scenario(
        4,
        "objective negated mid-run (measure values must change)",
        _SCENARIO_INTENT.format(goal="0.07"),
        (PerturbEvent(300, "objective", "-energy"),),
        iterations=600,
        window_size=20,
        oracle="A",
        expected=Verdict.PASS,
    ),
    5: Scenario(
        5,
        "constraint goal raised too late to re-converge",
        _SCENARIO_INTENT.format(goal="0.03"),
        (PerturbEvent(195, "goal", "0.12"),),
        iterations=200,
        window_size=20,
        oracle="B",
        expected=Verdict.FAIL,
    ),
    6: Scenario(
        6,
        "unachievable constraint goal (above every configuration)",
        _SCENARIO_INTENT.format(goal="0.5"),
        (),
        iterations=400,
        window_size=20,
        oracle="A",
        expected=Verdict.INVALID,
    ),
}


@dataclass
class ScenarioOutcome:
    scenario: Scenario
    actual: Verdict
    controlled_metrics: TraceMetrics
    oracle_metrics: TraceMetrics
    controlled: object  # RunResult
    fixed_traces: list
    oracle_trace: object
    model: object

    @property
    def matched(self) -> bool:
        return self.actual is self.scenario.expected


def run_scenario(scenario, *, profile_iterations: int = 5,
                 verdict_config: VerdictConfig = None) -> ScenarioOutcome:
    if isinstance(scenario, int):
        scenario = SCENARIOS[scenario]
    config = verdict_config or VerdictConfig()
    compiled = compile_intent(parse_intent(scenario.intent_text))
    model = profile_app("incrementer", compiled, profile_iterations)

    controlled = run_app(
        "incrementer", compiled, scenario.iterations,
        model=model, window_size=scenario.window_size,
        perturbations=scenario.events,
    )
    fixed_traces = []
    for row in model.rows:
        result = run_app(
            "incrementer", compiled, scenario.iterations,
            window_size=scenario.window_size,
            fixed_bindings=row.bindings, fixed_config_id=row.config_id,
        )
        fixed_traces.append(result.trace)

    if scenario.oracle == "A":
        oracle_trace = build_oracle_a(
            fixed_traces, compiled, config, scenario.window_size,
            events=scenario.events,
        )
    else:
        oracle_trace = build_oracle_b(fixed_traces, compiled, events=scenario.events)

    controlled_metrics = compute_metrics(
        controlled.trace, compiled, scenario.window_size, events=scenario.events)
    oracle_metrics = compute_metrics(
        oracle_trace, compiled, scenario.window_size, events=scenario.events)

    if scenario.oracle == "A":
        actual = verdict_a(controlled_metrics, oracle_metrics, compiled, config)
    else:
        actual = verdict_b(controlled_metrics, oracle_metrics, config)

    return ScenarioOutcome(
        scenario=scenario,
        actual=actual,
        controlled_metrics=controlled_metrics,
        oracle_metrics=oracle_metrics,
        controlled=controlled,
        fixed_traces=fixed_traces,
        oracle_trace=oracle_trace,
        model=model,
    )
