"""Wiring between demo applications, the simulated platform, and the
runtime. Every entry point here builds a fresh platform and registry, so
runs are independent and reproducible given the same seeds."""

from __future__ import annotations

from importlib import resources

from ..errors import FastError
from ..intent_compiler import CompiledIntent, compile_intent
from ..intent_parser import parse_intent
from ..profiler import ControllerModel, profile
from ..runtime import Runtime, RuntimeConfig, RunResult
from ..simplatform import PlatformConfig, PlatformState
from .camlike import CamlikeApp
from .incrementer import IncrementerApp

APPS = {
    "incrementer": IncrementerApp,
    "camlike": CamlikeApp,
}


def spec_path(filename) -> str:
    """Path of a packaged demo spec file (intent, manifest, perturb)."""
    return str(resources.files(__package__).joinpath("specs", filename))


def default_intent_text(app_name) -> str:
    path = resources.files(__package__).joinpath("specs", f"{app_name}.intent")
    return path.read_text(encoding="utf-8")


def build_app(app_name, runtime: Runtime, seed: int = 0):
    try:
        factory = APPS[app_name]
    except KeyError:
        raise FastError(
            f"unknown application {app_name!r}; available: {sorted(APPS)}"
        ) from None
    return factory(runtime, seed=seed)


def _as_compiled(intent) -> CompiledIntent:
    if isinstance(intent, CompiledIntent):
        return intent
    if isinstance(intent, str):
        return compile_intent(parse_intent(intent))
    return compile_intent(intent)


def run_app(app_name, intent, iterations, *, model: ControllerModel = None,
            window_size: int = 20, perturbations=(), platform_config=None,
            fixed_bindings=None, fixed_config_id=None, uncontrolled=False,
            app_seed: int = 0, feedback_gain: float = 0.3) -> RunResult:
    """One end-to-end execution of a demo app.

    With a model (and neither `uncontrolled` nor a fixed configuration),
    the run is controlled; otherwise it is pinned to the reference or the
    given configuration.
    """
    compiled = _as_compiled(intent)
    platform = PlatformState(platform_config or PlatformConfig())
    runtime = Runtime(
        platform=platform,
        config=RuntimeConfig(window_size=window_size,
                             perturbations=tuple(perturbations),
                             feedback_gain=feedback_gain),
    )
    runtime.load_intent(compiled)
    app = build_app(app_name, runtime, seed=app_seed)
    bindings = fixed_bindings
    if fixed_config_id is not None and bindings is None:
        if model is None:
            raise FastError("--fixed-config needs a model to resolve the id")
        bindings = model.bindings_for(fixed_config_id)
    if model is not None:
        runtime.set_model(app.name, model)
    return runtime.optimize(
        app.name,
        app.knobs,
        app.routine,
        iterations,
        parallel_fraction=app.parallel_fraction,
        controlled=not uncontrolled and bindings is None,
        fixed_bindings=bindings,
        fixed_config_id=fixed_config_id,
    )


def fixed_config_runner(app_name, intent, *, platform_config=None, app_seed: int = 0,
                        window_size: int = 20):
    """Profiling adapter: returns run(bindings, iterations) -> measure dicts."""
    compiled = _as_compiled(intent)

    def run(bindings, iterations):
        result = run_app(
            app_name, compiled, iterations,
            window_size=window_size,
            platform_config=platform_config,
            fixed_bindings=bindings,
            app_seed=app_seed,
        )
        return [record.measures for record in result.trace.records]

    return run


def profile_app(app_name, intent, iterations_per_config, *, warmup: int = 0,
                platform_config=None, app_seed: int = 0) -> ControllerModel:
    """Exhaustively profile a demo app over its intent's configuration space."""
    compiled = _as_compiled(intent)
    runner = fixed_config_runner(
        app_name, compiled, platform_config=platform_config, app_seed=app_seed,
        window_size=max(1, iterations_per_config + warmup),
    )
    return profile(compiled, runner, iterations_per_config, warmup=warmup)
