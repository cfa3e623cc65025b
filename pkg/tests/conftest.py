"""Shared fixtures: the incrementer intent, a hand-pinned eight-row
controller model, random intent/expression generators, and lazily
computed scenario outcomes shared between the scenario tests and the
acceptance suite."""

import random

import pytest

from fastrt import (
    Apply,
    Constant,
    IntentSpec,
    KnobDecl,
    KnobRef,
    MeasureRef,
    OptimizationType,
    compile_intent,
    parse_intent,
)
from fastrt.profiler import ControllerModel, ModelRow
from fastrt.demos import spec_path


@pytest.fixture(scope="session")
def incrementer_text():
    with open(spec_path("incrementer.intent"), "r", encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def incrementer_spec(incrementer_text):
    return parse_intent(incrementer_text)


@pytest.fixture(scope="session")
def incrementer_compiled(incrementer_spec):
    return compile_intent(incrementer_spec)


# Eight-configuration model pinned by hand: two values per knob, averages
# as profiled on the original hardware. Measure order: energy, latency,
# operations.
EIGHT_CONFIG_ROWS = (
    (0, {"step": 1, "threshold": 10000, "coreFrequency": 300}, (6048055.0, 0.017, 10000.0)),
    (1, {"step": 4, "threshold": 10000, "coreFrequency": 300}, (5367987.0, 0.011, 2537.0)),
    (2, {"step": 1, "threshold": 20000, "coreFrequency": 300}, (10362040.0, 0.031, 19949.0)),
    (3, {"step": 4, "threshold": 20000, "coreFrequency": 300}, (4311562.0, 0.011, 5025.0)),
    (4, {"step": 1, "threshold": 10000, "coreFrequency": 1200}, (3495722.0, 0.008, 10000.0)),
    (5, {"step": 4, "threshold": 10000, "coreFrequency": 1200}, (2587574.0, 0.004, 2537.0)),
    (6, {"step": 1, "threshold": 20000, "coreFrequency": 1200}, (4904005.0, 0.012, 19949.0)),
    (7, {"step": 4, "threshold": 20000, "coreFrequency": 1200}, (2729713.0, 0.006, 5025.0)),
)


def make_eight_config_model():
    return ControllerModel(
        knob_names=("step", "threshold", "coreFrequency"),
        measure_names=("energy", "latency", "operations"),
        rows=tuple(ModelRow(cid, dict(bindings), measures)
                   for cid, bindings, measures in EIGHT_CONFIG_ROWS),
    )


@pytest.fixture(scope="session")
def eight_config_model():
    return make_eight_config_model()


def eight_config_intent(objective="energy", opt="min", goal=0.008):
    text = f"""
    intent incrementer
      {opt}({objective})
      such that latency == {goal}
    measures
      energy: Double
      latency: Double
      operations: Double
    knobs
      step = [1, 4]
      threshold = [10000, 20000]
      coreFrequency = [300, 1200]
    """
    return compile_intent(parse_intent(text))


# -- random generators ------------------------------------------------------

NAME_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def random_name(rng, taken, length=6):
    while True:
        name = "".join(rng.choice(NAME_ALPHABET) for _ in range(length))
        if name not in taken:
            taken.add(name)
            return name


def random_number(rng, integers_only=False):
    if integers_only or rng.random() < 0.5:
        return rng.randint(-999, 999)
    return round(rng.uniform(-100.0, 100.0), 4)


def random_arith_expr(rng, names, ref, depth=3, divisions=True):
    """Random numeric expression over the given reference names."""
    if depth == 0 or rng.random() < 0.3:
        if names and rng.random() < 0.7:
            return ref(rng.choice(names))
        value = random_number(rng)
        return Constant(value)
    roll = rng.random()
    if roll < 0.12:
        inner = random_arith_expr(rng, names, ref, depth - 1, divisions)
        if isinstance(inner, Constant):
            return Constant(-inner.value)
        return Apply("neg", (inner,))
    ops = "+-*/" if divisions else "+-*"
    op = rng.choice(ops)
    return Apply(op, (
        random_arith_expr(rng, names, ref, depth - 1, divisions),
        random_arith_expr(rng, names, ref, depth - 1, divisions),
    ))


def random_bool_expr(rng, knob_names, depth=2):
    if depth == 0 or rng.random() < 0.4:
        op = rng.choice(("<", "<=", ">", ">=", "==", "!="))
        return Apply(op, (
            random_arith_expr(rng, knob_names, KnobRef, 1),
            random_arith_expr(rng, knob_names, KnobRef, 1),
        ))
    roll = rng.random()
    if roll < 0.2:
        return Apply("not", (random_bool_expr(rng, knob_names, depth - 1),))
    op = rng.choice(("and", "or"))
    return Apply(op, (
        random_bool_expr(rng, knob_names, depth - 1),
        random_bool_expr(rng, knob_names, depth - 1),
    ))


def random_intent(rng, max_knobs=5, max_range=6, constrained=None):
    taken = set()
    n_measures = rng.randint(1, 4)
    measures = tuple((random_name(rng, taken), "Double") for _ in range(n_measures))
    measure_names = [m for m, _ in measures]
    n_knobs = rng.randint(1, max_knobs)
    knobs = []
    for _ in range(n_knobs):
        name = random_name(rng, taken)
        integers = rng.random() < 0.6
        values = []
        while len(values) < rng.randint(1, max_range):
            v = random_number(rng, integers_only=integers)
            if not integers:
                v = float(v)
            if v not in values:
                values.append(v)
        reference = rng.choice(values) if rng.random() < 0.5 else None
        knobs.append(KnobDecl(name, tuple(values), reference))
    if constrained is None:
        constrained = rng.random() < 0.7
    if constrained:
        constraint_measure = rng.choice(measure_names)
        constraint_goal = random_number(rng)
        while constraint_goal == 0:
            constraint_goal = random_number(rng)
    else:
        constraint_measure = constraint_goal = None
    knob_constraint = None
    if rng.random() < 0.6:
        knob_constraint = random_bool_expr(rng, [k.name for k in knobs])
    return IntentSpec(
        name=random_name(rng, taken),
        optimization_type=rng.choice((OptimizationType.MIN, OptimizationType.MAX)),
        objective=random_arith_expr(rng, measure_names, MeasureRef),
        constraint_measure=constraint_measure,
        constraint_goal=constraint_goal,
        measures=measures,
        knobs=tuple(knobs),
        knob_constraint=knob_constraint,
    )


# -- scenario outcomes (computed once, shared) -------------------------------

@pytest.fixture(scope="session")
def scenario_outcomes():
    from fastrt.demos.scenarios import SCENARIOS, run_scenario

    return {sid: run_scenario(sid) for sid in sorted(SCENARIOS)}
