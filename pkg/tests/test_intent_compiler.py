"""Compiled evaluators against the reference interpreter and hand-derived
values."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_arith_expr, random_bool_expr
from fastrt import MeasureRef, compile_intent, eval_expr, parse_intent
from fastrt.intent_compiler import compile_knob_constraint, compile_objective


def test_incrementer_objective_value(incrementer_compiled):
    # measures ordered (latency, operations, energy)
    assert incrementer_compiled.objective_eval([0.1, 4.0, 2.0]) == 1.0


def test_identity_objective():
    compiled = compile_intent(parse_intent("intent t min(m) measures m: Double knobs k = [1]"))
    assert compiled.objective_eval([7.5]) == 7.5


def test_incrementer_knob_constraint(incrementer_compiled):
    check = incrementer_compiled.knob_constraint_eval
    assert check({"step": 3, "threshold": 2000000, "coreFrequency": 300}) is False
    assert check({"step": 2, "threshold": 2000000, "coreFrequency": 300}) is True
    assert check({"step": 4, "threshold": 8000000, "coreFrequency": 1200}) is True


def test_constraint_index(incrementer_compiled):
    assert incrementer_compiled.constraint_index == 0  # latency is first


def test_compiled_objective_matches_interpreter_on_random_exprs():
    rng = random.Random(7)
    names = ["a", "b", "c"]
    for _ in range(300):
        expr = random_arith_expr(rng, names, MeasureRef, depth=4)
        env = {n: rng.uniform(-50, 50) for n in names}
        vector = [env[n] for n in names]
        compiled = compile_objective(expr, names)
        try:
            expected = eval_expr(expr, measures=env)
        except ZeroDivisionError:
            with pytest.raises(ZeroDivisionError):
                compiled(vector)
            continue
        # bit-identical: same operations in the same order
        assert compiled(vector) == expected


def test_compiled_constraint_matches_interpreter_on_random_exprs():
    rng = random.Random(11)
    names = ["k1", "k2"]
    for _ in range(300):
        expr = random_bool_expr(rng, names, depth=3)
        env = {n: rng.randint(-5, 5) for n in names}
        compiled = compile_knob_constraint(expr)
        try:
            expected = eval_expr(expr, knobs=env)
        except ZeroDivisionError:
            continue
        assert compiled(env) == expected


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3))
@settings(max_examples=100)
def test_incrementer_objective_agreement_property(incrementer_compiled, values):
    spec = incrementer_compiled.spec
    env = dict(zip(spec.measure_names, values))
    if values[1] == 0:  # operations divides the objective
        return
    assert incrementer_compiled.objective_eval(values) == eval_expr(
        spec.objective, measures=env)


def test_missing_constraint_compiles_to_true():
    compiled = compile_intent(parse_intent("intent t min(m) measures m: Double knobs k = [1]"))
    assert compiled.knob_constraint_eval({"k": 1}) is True
    assert compiled.constraint_index is None
