"""A synthetic streaming application with a quality/cost trade-off.

Each iteration processes one frame. The detail knob scales both the work
per frame (so higher detail costs latency and energy) and the quality
measure; a slow deterministic input phase modulates the per-frame work
and quality, standing in for input-dependent content. The app is fully
deterministic, which keeps profiled models and acceptance runs
reproducible.
"""

from __future__ import annotations

import math

from ..lint import ManifestBuilder

BASE_WORK = 2_000_000.0
DETAIL_WORK_STEP = 0.35  # extra work per detail level above 1
QUALITY_PER_DETAIL = 20.0
PHASE_PERIOD = 97
WORK_PHASE_AMPLITUDE = 0.03
QUALITY_PHASE_AMPLITUDE = 2.0


class CamlikeApp:
    name = "camlike"
    parallel_fraction = 0.7

    def __init__(self, runtime, seed: int = 0):
        self._runtime = runtime
        self.detail = runtime.registry.create("detail", 1)
        self._frame = seed  # seed offsets the input phase

    @property
    def knobs(self):
        return [self.detail]

    def routine(self):
        detail = self.detail.get()
        phase = math.sin(2.0 * math.pi * self._frame / PHASE_PERIOD)
        work = BASE_WORK * (1.0 + DETAIL_WORK_STEP * (detail - 1)) \
            * (1.0 + WORK_PHASE_AMPLITUDE * phase)
        quality = QUALITY_PER_DETAIL * detail + QUALITY_PHASE_AMPLITUDE * phase
        self._runtime.measure("quality", quality)
        self._frame += 1
        return work

    def manifest(self, intent):
        builder = ManifestBuilder()
        builder.declare("detail").capture("detail")
        builder.edge("detail", "frame_work")
        builder.edge("detail", "quality_value")
        builder.edge("frame_work", "optimize")
        builder.edge("quality_value", "optimize")
        for name in intent.knob_names:
            if name in ("coreFrequency", "utilizedCores"):
                builder.declare(name).capture(name)
                builder.edge(name, "platform_timing")
        builder.edge("platform_timing", "optimize")
        return builder.build()
