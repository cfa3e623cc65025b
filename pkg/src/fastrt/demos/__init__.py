"""Demo applications and the wiring that runs them on the simulated
platform."""

from .harness import (
    APPS,
    build_app,
    fixed_config_runner,
    profile_app,
    run_app,
    spec_path,
)
from .incrementer import IncrementerApp, loop_operations, operations_count
from .camlike import CamlikeApp

__all__ = [
    "APPS",
    "CamlikeApp",
    "IncrementerApp",
    "build_app",
    "fixed_config_runner",
    "loop_operations",
    "operations_count",
    "profile_app",
    "run_app",
    "spec_path",
]
