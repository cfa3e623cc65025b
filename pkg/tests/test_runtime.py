"""Knob registry semantics and the optimize loop."""

import gc
import math

import pytest

from fastrt import (
    DuplicateKnob,
    EmptyRestriction,
    IntentNotFound,
    InvalidRestriction,
    KnobRegistry,
    MissingMeasure,
    PerturbEvent,
    PlatformConfig,
    PlatformState,
    Runtime,
    RuntimeConfig,
    compile_intent,
    load_trace,
    parse_intent,
    save_trace,
)
from fastrt.demos import profile_app, run_app, spec_path
from fastrt.demos.incrementer import IncrementerApp, operations_count


@pytest.fixture(scope="module")
def incrementer_model(incrementer_compiled):
    return profile_app("incrementer", incrementer_compiled, 3)


class TestKnobRegistry:
    def test_create_and_get(self):
        reg = KnobRegistry()
        knob = reg.create("step", 1)
        assert knob.get() == 1
        assert knob.reference == 1
        assert reg.get("step") is knob

    def test_duplicate_rejected(self):
        reg = KnobRegistry()
        reg_knob = reg.create("step", 1)
        with pytest.raises(DuplicateKnob):
            reg.create("step", 2)
        assert reg_knob.get() == 1

    def test_weak_references_allow_recreation(self):
        reg = KnobRegistry()
        knob = reg.create("step", 1)
        del knob
        gc.collect()
        assert reg.get("step") is None
        knob2 = reg.create("step", 4)  # no DuplicateKnob: the old cell died
        assert knob2.get() == 4

    def test_restriction_validation(self, incrementer_spec):
        reg = KnobRegistry()
        step = reg.create("step", 1)
        reg.attach_intent(incrementer_spec)
        with pytest.raises(InvalidRestriction):
            step.restrict([9])
        with pytest.raises(EmptyRestriction):
            step.restrict([])
        step.restrict([1, 2])
        assert reg.active_restrictions() == {}  # pending until a boundary
        reg.commit_pending()
        assert reg.active_restrictions() == {"step": (1, 2)}

    def test_argless_restrict_fixes_current_value(self, incrementer_spec):
        reg = KnobRegistry()
        step = reg.create("step", 4)
        reg.attach_intent(incrementer_spec)
        step.restrict()
        reg.commit_pending()
        assert reg.active_restrictions() == {"step": (4,)}

    def test_control_clears_and_requests_reset(self, incrementer_spec):
        reg = KnobRegistry()
        step = reg.create("step", 1)
        reg.attach_intent(incrementer_spec)
        step.restrict([2])
        assert reg.commit_pending() is False
        step.control()
        assert reg.commit_pending() is True
        assert reg.active_restrictions() == {}

    def test_control_on_unrestricted_knob_is_noop(self):
        reg = KnobRegistry()
        step = reg.create("step", 1)
        step.control()
        reg.commit_pending()
        assert reg.active_restrictions() == {}


class TestOptimizeLoop:
    def test_trace_shape_two_windows(self, incrementer_compiled, incrementer_model):
        result = run_app("incrementer", incrementer_compiled, 40,
                         model=incrementer_model, window_size=20)
        trace = result.trace
        assert len(trace) == 40
        for i, record in enumerate(trace.records):
            assert record.iteration == i
            assert set(record.bindings) == {"step", "threshold", "coreFrequency"}
            assert set(record.measures) == {"latency", "operations", "energy"}
        assert len(result.decisions) == 2

    def test_window_size_one_consults_controller_every_iteration(
            self, incrementer_compiled, incrementer_model):
        result = run_app("incrementer", incrementer_compiled, 15,
                         model=incrementer_model, window_size=1)
        assert len(result.decisions) == 15

    def test_goal_perturbation_retargets_from_boundary(
            self, incrementer_compiled, incrementer_model):
        events = (PerturbEvent(200, "goal", "0.05"),)
        result = run_app("incrementer", incrementer_compiled, 400,
                         model=incrementer_model, window_size=20,
                         perturbations=events)
        before = [d for d in result.decisions if d.window < 10]
        after = [d for d in result.decisions if d.window >= 10]
        assert all(d.predicted_constraint == pytest.approx(0.1) for d in before)
        # post-perturbation windows target the new goal scaled by the
        # feedback gain (which absorbs schedule quantization)
        for d in after:
            assert d.predicted_constraint == pytest.approx(0.05 * d.lam, rel=1e-12)
            assert d.predicted_constraint == pytest.approx(0.05, rel=0.1)

    def test_configuration_changes_at_most_once_per_window(
            self, incrementer_compiled, incrementer_model):
        result = run_app("incrementer", incrementer_compiled, 200,
                         model=incrementer_model, window_size=20)
        for w in range(10):
            window = result.trace.records[w * 20:(w + 1) * 20]
            ids = [r.config_id for r in window]
            switches = sum(1 for a, b in zip(ids, ids[1:]) if a != b)
            assert switches <= 1

    def test_every_applied_configuration_satisfies_the_knob_constraint(
            self, incrementer_compiled, incrementer_model):
        result = run_app("incrementer", incrementer_compiled, 100,
                         model=incrementer_model, window_size=20)
        check = incrementer_compiled.knob_constraint_eval
        for record in result.trace.records:
            assert check(record.bindings)

    def test_restrict_event_takes_effect_at_next_boundary(
            self, incrementer_compiled, incrementer_model):
        events = (PerturbEvent(25, "restrict", "step=2"),)
        result = run_app("incrementer", incrementer_compiled, 100,
                         model=incrementer_model, window_size=20,
                         perturbations=events)
        for record in result.trace.records:
            if record.iteration >= 40:
                assert record.bindings["step"] == 2
        # the restriction was not active inside the window where it was requested
        window_one = {r.bindings["step"] for r in result.trace.records[20:40]}
        assert window_one == {
            r.bindings["step"] for r in result.trace.records[0:20]
        }

    def test_control_event_resets_feedback_and_restores_space(
            self, incrementer_compiled, incrementer_model):
        events = (
            PerturbEvent(20, "restrict", "step=2"),
            PerturbEvent(60, "control", "step"),
        )
        result = run_app("incrementer", incrementer_compiled, 120,
                         model=incrementer_model, window_size=20,
                         perturbations=events)
        post = [d for d in result.decisions if d.window == 3][0]
        assert post.lam == 1.0
        steps_after = {r.bindings["step"] for r in result.trace.records[60:]}
        assert steps_after != {2}

    def test_intent_not_found(self):
        runtime = Runtime()
        with pytest.raises(IntentNotFound):
            runtime.optimize("nope", [], lambda: 1.0, 10)

    def test_missing_measure_raises_at_window_end(self, incrementer_compiled):
        runtime = Runtime(config=RuntimeConfig(window_size=5))
        runtime.load_intent(incrementer_compiled)
        app = IncrementerApp(runtime)

        def lazy_routine():
            return 100.0  # never records "operations"

        with pytest.raises(MissingMeasure):
            runtime.optimize("incrementer", app.knobs, lazy_routine, 10)

    def test_unknown_measure_warns_but_continues(self, incrementer_compiled):
        runtime = Runtime(config=RuntimeConfig(window_size=5))
        runtime.load_intent(incrementer_compiled)
        app = IncrementerApp(runtime)

        def chatty_routine():
            work = app.routine()
            runtime.measure("framesDropped", 0.0)
            return work

        with pytest.warns(UserWarning, match="framesDropped"):
            result = runtime.optimize("incrementer", app.knobs, chatty_routine, 5)
        assert len(result.trace) == 5
        assert "framesDropped" not in result.trace.records[0].measures


class TestReferenceSemantics:
    def test_uncontrolled_run_uses_reference_values(self, incrementer_compiled):
        result = run_app("incrementer", incrementer_compiled, 30, uncontrolled=True)
        expected_ops = float(operations_count(1, 8000000))
        for record in result.trace.records:
            assert record.bindings == {"step": 1, "threshold": 8000000,
                                       "coreFrequency": 300.0}
            assert record.measures["operations"] == expected_ops

    def test_intent_reference_overrides_code_initializer(self):
        compiled = compile_intent(parse_intent(
            """
            intent incrementer min(energy) such that latency == 0.1
            measures latency: Double operations: Double energy: Double
            knobs
              step = [1, 2, 3, 4] reference 2
              threshold = [10000, 20000] reference 10000
              coreFrequency = [300, 1200]
            """
        ))
        result = run_app("incrementer", compiled, 10, uncontrolled=True)
        record = result.trace.records[0]
        assert record.bindings["step"] == 2
        assert record.bindings["threshold"] == 10000
        assert record.measures["operations"] == float(operations_count(2, 10000))

    def test_knob_reads_match_applied_schedule(self, incrementer_compiled, incrementer_model):
        seen = []
        platform = PlatformState(PlatformConfig())
        runtime = Runtime(platform=platform, config=RuntimeConfig(window_size=10))
        runtime.load_intent(incrementer_compiled)
        app = IncrementerApp(runtime)
        runtime.set_model("incrementer", incrementer_model)

        def spying_routine():
            seen.append((app.step.get(), app.threshold.get()))
            return app.routine()

        result = runtime.optimize("incrementer", app.knobs, spying_routine, 40,
                                  parallel_fraction=0.0)
        for record, (step, threshold) in zip(result.trace.records, seen):
            assert record.bindings["step"] == step
            assert record.bindings["threshold"] == threshold


class TestTraceCsv:
    def test_roundtrip(self, tmp_path, incrementer_compiled, incrementer_model):
        result = run_app("incrementer", incrementer_compiled, 20,
                         model=incrementer_model)
        spec = incrementer_compiled.spec
        path = tmp_path / "trace.csv"
        save_trace(result.trace, path, spec.knob_names, spec.measure_names)
        header = path.read_text().splitlines()[0]
        assert header == "iteration,step,threshold,coreFrequency,latency,operations,energy"
        loaded = load_trace(path, spec.knob_names, spec.measure_names)
        assert len(loaded) == 20
        for a, b in zip(loaded.records, result.trace.records):
            assert a.iteration == b.iteration
            for name in spec.measure_names:
                assert a.measures[name] == b.measures[name]
            for name in spec.knob_names:
                assert float(a.bindings[name]) == float(b.bindings[name])

    def test_no_partial_file_on_error(self, tmp_path, incrementer_compiled):
        trace_path = tmp_path / "out.csv"
        result = run_app("incrementer", incrementer_compiled, 5, uncontrolled=True)
        # bindings lack a column the writer needs -> error before replace
        with pytest.raises(KeyError):
            save_trace(result.trace, trace_path, ("missingKnob",), ("latency",))
        assert not trace_path.exists()
        assert list(tmp_path.iterdir()) == []
