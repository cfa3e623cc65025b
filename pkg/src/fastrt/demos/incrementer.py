"""The incrementer demo: a loop that counts increments of a float up to a
threshold, instrumented with step and threshold knobs and an operations
measure. The iteration body is the loop's exact closed form (verified
against a direct loop simulation in the test suite), so large thresholds
cost nothing per iteration; the step count doubles as the iteration's
work units for the simulated platform.
"""

from __future__ import annotations

import math

from ..lint import ManifestBuilder


def loop_operations(step, threshold) -> int:
    """Direct simulation of the increment loop (slow; ground truth)."""
    x = 0.0
    operations = 0
    while x < threshold:
        x += step
        operations += 1
    return operations


def operations_count(step, threshold) -> int:
    """Number of loop iterations until the accumulator reaches threshold.

    For integer knob values the float accumulation is exact, so the count
    is the ceiling of threshold/step; other values fall back to the loop.
    """
    if isinstance(step, int) and isinstance(threshold, int) and step > 0:
        return -(-threshold // step)
    if step <= 0:
        raise ValueError("step must be positive")
    if float(step).is_integer() and float(threshold).is_integer():
        return math.ceil(threshold / step)
    return loop_operations(step, threshold)


class IncrementerApp:
    name = "incrementer"
    parallel_fraction = 0.0

    def __init__(self, runtime, seed: int = 0):
        self._runtime = runtime
        self.step = runtime.registry.create("step", 1)
        self.threshold = runtime.registry.create("threshold", 8000000)

    @property
    def knobs(self):
        return [self.step, self.threshold]

    def routine(self):
        operations = operations_count(self.step.get(), self.threshold.get())
        self._runtime.measure("operations", float(operations))
        return float(operations)

    def manifest(self, intent):
        """Clean manifest: every knob the intent declares feeds the body.

        Platform knobs named by the intent count as declared and captured
        (the platform always honors them) and reach the body through the
        platform timing node.
        """
        builder = ManifestBuilder()
        builder.declare("step", "threshold").capture("step", "threshold")
        builder.edge("step", "loop_exit_test", inert=False)
        builder.edge("threshold", "loop_exit_test")
        builder.edge("loop_exit_test", "optimize")
        for name in intent.knob_names:
            if name in ("coreFrequency", "utilizedCores"):
                builder.declare(name).capture(name)
                builder.edge(name, "platform_timing")
        builder.edge("platform_timing", "optimize")
        return builder.build()
