"""Perturbation scripts, the intent timeline, and availability windows."""

import pytest

from fastrt import (
    FastError,
    IntentTimeline,
    IntentValidationError,
    OptimizationType,
    PerturbEvent,
    availability_timeline,
    compile_intent,
    parse_intent,
    parse_script,
)
from conftest import make_eight_config_model


@pytest.fixture(scope="module")
def base():
    return compile_intent(parse_intent(
        "intent t min(obj) such that m == 0.1 "
        "measures m: Double obj: Double knobs k = [1, 2]"
    ))


class TestScriptParsing:
    def test_basic_lines_sorted(self):
        events = parse_script(
            """
            // comment
            400,control,detail
            200,restrict,detail=4

            100,goal,0.25
            """
        )
        assert [e.iteration for e in events] == [100, 200, 400]
        assert events[1] == PerturbEvent(200, "restrict", "detail=4")

    def test_bad_lines_rejected(self):
        with pytest.raises(FastError):
            parse_script("100,goal")
        with pytest.raises(FastError):
            parse_script("abc,goal,0.5")
        with pytest.raises(ValueError):
            parse_script("100,teleport,0.5")


class TestIntentTimeline:
    def test_goal_change(self, base):
        timeline = IntentTimeline(base, (PerturbEvent(50, "goal", "0.2"),))
        assert timeline.at(0).spec.constraint_goal == 0.1
        assert timeline.at(49).spec.constraint_goal == 0.1
        assert timeline.at(50).spec.constraint_goal == 0.2
        assert timeline.at(999).spec.constraint_goal == 0.2
        assert timeline.change_iterations == (50,)

    def test_constraint_measure_switch(self, base):
        timeline = IntentTimeline(base, (
            PerturbEvent(10, "constraintMeasure", "obj"),
            PerturbEvent(10, "goal", "5.0"),
        ))
        view = timeline.at(10)
        assert view.spec.constraint_measure == "obj"
        assert view.spec.constraint_goal == 5.0
        assert timeline.at(9).spec.constraint_measure == "m"

    def test_objective_and_type_change(self, base):
        timeline = IntentTimeline(base, (
            PerturbEvent(30, "optimizationType", "max"),
            PerturbEvent(30, "objective", "-obj"),
        ))
        view = timeline.at(30)
        assert view.spec.optimization_type is OptimizationType.MAX
        assert view.objective_eval([0.0, 4.0]) == -4.0
        assert timeline.final is view

    def test_bad_measure_rejected(self, base):
        with pytest.raises(IntentValidationError):
            IntentTimeline(base, (PerturbEvent(10, "constraintMeasure", "nope"),))

    def test_knob_events_do_not_change_the_intent(self, base):
        timeline = IntentTimeline(base, (PerturbEvent(10, "restrict", "k=2"),))
        assert timeline.at(100) is timeline.at(0)


class TestAvailability:
    def test_restrict_acts_at_next_boundary(self):
        model = make_eight_config_model()
        events = (PerturbEvent(25, "restrict", "step=4"),)
        admissible = availability_timeline(model, events, 20)
        assert admissible(0) == frozenset(range(8))
        assert admissible(39) == frozenset(range(8))
        assert admissible(40) == frozenset({1, 3, 5, 7})

    def test_control_restores(self):
        model = make_eight_config_model()
        events = (
            PerturbEvent(20, "restrict", "step=4"),
            PerturbEvent(60, "control", "step"),
        )
        admissible = availability_timeline(model, events, 20)
        assert admissible(20) == frozenset({1, 3, 5, 7})
        assert admissible(59) == frozenset({1, 3, 5, 7})
        assert admissible(60) == frozenset(range(8))

    def test_boundary_aligned_event(self):
        model = make_eight_config_model()
        events = (PerturbEvent(40, "restrict", "coreFrequency=300"),)
        admissible = availability_timeline(model, events, 20)
        assert admissible(39) == frozenset(range(8))
        assert admissible(40) == frozenset({0, 1, 2, 3})

    def test_stacked_restrictions(self):
        model = make_eight_config_model()
        events = (
            PerturbEvent(0, "restrict", "step=4"),
            PerturbEvent(20, "restrict", "coreFrequency=1200"),
        )
        admissible = availability_timeline(model, events, 20)
        assert admissible(0) == frozenset({1, 3, 5, 7})
        assert admissible(20) == frozenset({5, 7})

    def test_argless_restrict_needs_values(self):
        model = make_eight_config_model()
        with pytest.raises(FastError):
            availability_timeline(model, (PerturbEvent(0, "restrict", "step"),), 20)
