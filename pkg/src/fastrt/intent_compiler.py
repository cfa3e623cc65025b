"""Compilation of intent expressions into directly callable evaluators.

Expression trees are translated once into nested closures so that
per-iteration evaluation involves no tree walking or dispatch on node
kinds. ``eval_expr`` is the plain recursive interpreter; the compiled
form applies the same operations in the same order, so results are
bit-identical.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .intent import Apply, Constant, IntentSpec, KnobRef, MeasureRef

_BINARY = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}


def eval_expr(expr, measures: Mapping = None, knobs: Mapping = None):
    """Reference tree-walking interpreter (the oracle for the compiler)."""
    if isinstance(expr, Constant):
        return expr.value
    if isinstance(expr, MeasureRef):
        return measures[expr.name]
    if isinstance(expr, KnobRef):
        return knobs[expr.name]
    f = expr.func
    if f == "neg":
        return -eval_expr(expr.args[0], measures, knobs)
    if f == "not":
        return not eval_expr(expr.args[0], measures, knobs)
    if f == "and":
        return bool(
            eval_expr(expr.args[0], measures, knobs)
            and eval_expr(expr.args[1], measures, knobs)
        )
    if f == "or":
        return bool(
            eval_expr(expr.args[0], measures, knobs)
            or eval_expr(expr.args[1], measures, knobs)
        )
    op = _BINARY[f]
    return op(
        eval_expr(expr.args[0], measures, knobs),
        eval_expr(expr.args[1], measures, knobs),
    )


def _compile(expr, lookup):
    """Build a closure evaluating `expr` against an environment.

    `lookup(node)` returns a closure for leaf references; the environment
    shape (vector vs mapping) is the lookup's business.
    """
    if isinstance(expr, Constant):
        value = expr.value
        return lambda env: value
    if isinstance(expr, (MeasureRef, KnobRef)):
        return lookup(expr)
    f = expr.func
    if f == "neg":
        inner = _compile(expr.args[0], lookup)
        return lambda env: -inner(env)
    if f == "not":
        inner = _compile(expr.args[0], lookup)
        return lambda env: not inner(env)
    if f == "and":
        left = _compile(expr.args[0], lookup)
        right = _compile(expr.args[1], lookup)
        return lambda env: bool(left(env) and right(env))
    if f == "or":
        left = _compile(expr.args[0], lookup)
        right = _compile(expr.args[1], lookup)
        return lambda env: bool(left(env) or right(env))
    op = _BINARY[f]
    left = _compile(expr.args[0], lookup)
    right = _compile(expr.args[1], lookup)
    return lambda env: op(left(env), right(env))


def compile_objective(expr, measure_names: Sequence[str]) -> Callable:
    """Evaluator over a measure-value vector ordered like `measure_names`."""
    index = {name: i for i, name in enumerate(measure_names)}

    def lookup(node):
        i = index[node.name]
        return lambda env: env[i]

    return _compile(expr, lookup)


def compile_knob_constraint(expr) -> Callable:
    """Evaluator over a knob-binding mapping; None compiles to always-true."""
    if expr is None:
        return lambda env: True

    def lookup(node):
        name = node.name
        return lambda env: env[name]

    return _compile(expr, lookup)


@dataclass(frozen=True)
class CompiledIntent:
    spec: IntentSpec
    objective_eval: Callable  # measure vector -> number
    knob_constraint_eval: Callable  # knob binding map -> bool

    @property
    def constraint_index(self) -> Optional[int]:
        if self.spec.constraint_measure is None:
            return None
        return self.spec.measure_index(self.spec.constraint_measure)

    @property
    def is_constrained(self):
        return self.spec.is_constrained


def compile_intent(spec: IntentSpec) -> CompiledIntent:
    return CompiledIntent(
        spec=spec,
        objective_eval=compile_objective(spec.objective, spec.measure_names),
        knob_constraint_eval=compile_knob_constraint(spec.knob_constraint),
    )
