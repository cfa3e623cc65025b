"""Demo application behavior, pinned against direct simulation."""

import random

import pytest

from fastrt import PlatformConfig, compile_intent, parse_intent
from fastrt.demos import loop_operations, operations_count, run_app, spec_path
from fastrt.demos.camlike import (
    BASE_WORK,
    DETAIL_WORK_STEP,
    QUALITY_PER_DETAIL,
    CamlikeApp,
)
from fastrt.runtime import Runtime


class TestOperationsCount:
    @pytest.mark.parametrize("step,threshold", [
        (1, 10000), (4, 10000), (1, 20000), (4, 20000),
        (2, 10001), (3, 10000), (7, 12345), (1, 1), (5, 5), (6, 5),
    ])
    def test_closed_form_matches_loop(self, step, threshold):
        assert operations_count(step, threshold) == loop_operations(step, threshold)

    def test_large_values_match_loop(self):
        # one representative heavyweight check against the real loop
        assert operations_count(3, 2000000) == loop_operations(3, 2000000)

    def test_random_integer_knobs(self):
        rng = random.Random(12)
        for _ in range(200):
            step = rng.randint(1, 50)
            threshold = rng.randint(1, 100000)
            assert operations_count(step, threshold) == loop_operations(step, threshold)

    def test_pinned_table_values(self):
        # the counts the model tables are built from
        assert operations_count(1, 10000) == 10000
        assert operations_count(4, 10000) == 2500
        assert operations_count(1, 20000) == 20000
        assert operations_count(4, 20000) == 5000
        assert operations_count(1, 2000000) == 2000000
        assert operations_count(3, 8000000) == 2666667

    def test_fractional_step_falls_back_to_loop(self):
        assert operations_count(0.3, 10.0) == loop_operations(0.3, 10.0)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            operations_count(0, 10)


class TestCamlike:
    def detail_series(self, detail, frames=40):
        runtime = Runtime()
        runtime.load_intent(compile_intent(parse_intent(
            open(spec_path("camlike.intent")).read())))
        app = CamlikeApp(runtime)
        app.detail._apply(detail)
        qualities, works = [], []
        board = []

        def capture(name, value):
            board.append((name, value))

        runtime.measure = capture  # capture without a full optimize loop
        for _ in range(frames):
            works.append(app.routine())
        qualities = [v for n, v in board if n == "quality"]
        return qualities, works

    def test_quality_and_work_scale_with_detail(self):
        means_q, means_w = [], []
        for detail in (1, 2, 3, 4):
            q, w = self.detail_series(detail)
            means_q.append(sum(q) / len(q))
            means_w.append(sum(w) / len(w))
        assert means_q == sorted(means_q)
        assert means_w == sorted(means_w)
        assert means_q[3] > means_q[0] + 2 * QUALITY_PER_DETAIL
        assert means_w[0] == pytest.approx(BASE_WORK, rel=0.05)
        assert means_w[3] == pytest.approx(BASE_WORK * (1 + 3 * DETAIL_WORK_STEP), rel=0.05)

    def test_deterministic_given_seed(self):
        a = self.detail_series(2)
        b = self.detail_series(2)
        assert a == b


def test_run_app_rejects_unknown_application(incrementer_compiled):
    from fastrt import FastError

    with pytest.raises(FastError):
        run_app("nonexistent", incrementer_compiled, 5, uncontrolled=True)


def test_fixed_config_id_requires_model(incrementer_compiled):
    from fastrt import FastError

    with pytest.raises(FastError):
        run_app("incrementer", incrementer_compiled, 5, fixed_config_id=3)


def test_noise_amplitude_reaches_the_platform(incrementer_compiled):
    quiet = run_app("incrementer", incrementer_compiled, 10, uncontrolled=True)
    noisy = run_app("incrementer", incrementer_compiled, 10, uncontrolled=True,
                    platform_config=PlatformConfig(noise_amplitude=0.05, seed=3))
    quiet_lat = [r.measures["latency"] for r in quiet.trace.records]
    noisy_lat = [r.measures["latency"] for r in noisy.trace.records]
    assert len(set(quiet_lat)) == 1
    assert len(set(noisy_lat)) > 1
