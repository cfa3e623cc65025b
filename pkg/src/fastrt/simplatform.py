"""Deterministic simulated execution platform.

Provides the two platform knobs (coreFrequency in MHz, utilizedCores) and
the four platform measures (latency, energy, powerConsumption,
performance). An iteration costs ``work * cycles_per_work_unit`` cycles;
latency follows the serial/parallel split of the work, power follows a
static-plus-cubic-dynamic law. With the default constants, energy for a
fixed amount of work decreases as frequency rises over the supported
range, so racing to idle is the energy-efficient direction.

With noise_amplitude == 0 every measure is a pure function of the
configuration and the work sequence; otherwise latency is scaled by a
seeded multiplicative uniform factor in [1-a, 1+a].
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict

PLATFORM_KNOBS = ("coreFrequency", "utilizedCores")
PLATFORM_MEASURES = ("latency", "energy", "powerConsumption", "performance")


@dataclass
class PlatformConfig:
    p_static: float = 10.0  # W
    kappa: float = 1e-9  # W / MHz^3 per core
    cycles_per_work_unit: float = 6.0
    noise_amplitude: float = 0.0
    seed: int = 0

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown platform config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


class PlatformState:
    """Mutable platform: knob settings, virtual clock and energy meter."""

    def __init__(self, config: PlatformConfig = None, core_frequency: float = 300.0,
                 utilized_cores: int = 1):
        self.config = config or PlatformConfig()
        self.core_frequency = float(core_frequency)
        self.utilized_cores = int(utilized_cores)
        self._reference = {
            "coreFrequency": self.core_frequency,
            "utilizedCores": self.utilized_cores,
        }
        self.virtual_clock = 0.0
        self.energy_accumulator = 0.0
        self._rng = random.Random(self.config.seed)

    def reference_bindings(self):
        """Initial knob settings; these act as the platform knobs'
        code-side reference values."""
        return dict(self._reference)

    def set_knob(self, name, value):
        if name == "coreFrequency":
            if value <= 0:
                raise ValueError("coreFrequency must be positive")
            self.core_frequency = float(value)
        elif name == "utilizedCores":
            cores = int(value)
            if cores < 1:
                raise ValueError("utilizedCores must be >= 1")
            self.utilized_cores = cores
        else:
            raise KeyError(name)

    def power(self) -> float:
        cfg = self.config
        return cfg.p_static + self.utilized_cores * cfg.kappa * self.core_frequency ** 3

    def simulate_iteration(self, work: float, parallel_fraction: float = 0.0):
        """Advance the clock by one iteration of `work` units.

        Returns the four platform measures for the iteration.
        """
        if work <= 0:
            raise ValueError("work must be positive")
        if not 0.0 <= parallel_fraction <= 1.0:
            raise ValueError("parallel_fraction must be in [0, 1]")
        cfg = self.config
        cycles = work * cfg.cycles_per_work_unit
        serial_split = (1.0 - parallel_fraction) + parallel_fraction / self.utilized_cores
        latency = cycles / (self.core_frequency * 1e6) * serial_split
        if cfg.noise_amplitude:
            latency *= self._rng.uniform(1.0 - cfg.noise_amplitude,
                                         1.0 + cfg.noise_amplitude)
        energy = latency * self.power()
        self.virtual_clock += latency
        self.energy_accumulator += energy
        return {
            "latency": latency,
            "energy": energy,
            "powerConsumption": energy / latency,
            "performance": 1.0 / latency,
        }
