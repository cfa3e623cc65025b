"""Core intent types: expression trees, knob declarations, and the parsed
intent specification together with its static validation rules.

An intent encodes a constrained optimization problem over named measures
(optimize an objective expression subject to ``constraint_measure ==
constraint_goal``) plus the knob ranges, and an optional Boolean knob
constraint, that span the configuration space.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .errors import IntentValidationError


class OptimizationType(Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class Constant:
    value: Union[int, float]


@dataclass(frozen=True)
class MeasureRef:
    name: str


@dataclass(frozen=True)
class KnobRef:
    name: str


@dataclass(frozen=True)
class Apply:
    func: str
    args: tuple


Expr = Union[Constant, MeasureRef, KnobRef, Apply]

# Function vocabulary. Comparisons and Boolean connectives are only legal
# inside knob constraints; objectives are purely arithmetic.
ARITH_BINARY = ("+", "-", "*", "/")
UNARY_NEG = "neg"
COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")
BOOL_BINARY = ("and", "or")
BOOL_NOT = "not"

MEASURE_TYPE = "Double"


@dataclass(frozen=True)
class KnobDecl:
    """One knob: its name, admissible values, and optional reference value.

    When ``reference`` is None the code-side initializer value of the
    matching runtime knob acts as the reference.
    """

    name: str
    range: tuple
    reference: Optional[Union[int, float]] = None


@dataclass(frozen=True)
class IntentSpec:
    name: str
    optimization_type: OptimizationType
    objective: Expr
    constraint_measure: Optional[str]
    constraint_goal: Optional[Union[int, float]]
    measures: tuple  # of (name, type_name)
    knobs: tuple  # of KnobDecl
    knob_constraint: Optional[Expr] = None

    @property
    def measure_names(self):
        return tuple(name for name, _ in self.measures)

    @property
    def knob_names(self):
        return tuple(k.name for k in self.knobs)

    @property
    def is_constrained(self):
        return self.constraint_measure is not None

    def measure_index(self, name):
        return self.measure_names.index(name)

    def knob(self, name):
        for decl in self.knobs:
            if decl.name == name:
                return decl
        raise KeyError(name)


def expr_refs(expr):
    """All MeasureRef and KnobRef names appearing in an expression tree."""
    measures, knobs = set(), set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, MeasureRef):
            measures.add(node.name)
        elif isinstance(node, KnobRef):
            knobs.add(node.name)
        elif isinstance(node, Apply):
            stack.extend(node.args)
    return measures, knobs


def infer_expr_type(expr):
    """Type-check an expression tree, returning "num" or "bool".

    Raises IntentValidationError on arity or type mismatches.
    """
    if isinstance(expr, (Constant, MeasureRef, KnobRef)):
        return "num"
    if not isinstance(expr, Apply):
        raise IntentValidationError(f"unknown expression node {expr!r}")
    f = expr.func
    if f in ARITH_BINARY:
        _expect_args(expr, 2, "num")
        return "num"
    if f == UNARY_NEG:
        _expect_args(expr, 1, "num")
        return "num"
    if f in COMPARISONS:
        _expect_args(expr, 2, "num")
        return "bool"
    if f in BOOL_BINARY:
        _expect_args(expr, 2, "bool")
        return "bool"
    if f == BOOL_NOT:
        _expect_args(expr, 1, "bool")
        return "bool"
    raise IntentValidationError(f"unsupported function {f!r}")


def _expect_args(expr, arity, wanted):
    if len(expr.args) != arity:
        raise IntentValidationError(
            f"function {expr.func!r} expects {arity} argument(s), got {len(expr.args)}"
        )
    for arg in expr.args:
        got = infer_expr_type(arg)
        if got != wanted:
            raise IntentValidationError(
                f"argument of {expr.func!r} has type {got}, expected {wanted}"
            )


def validate_spec(spec: IntentSpec) -> IntentSpec:
    """Check every static invariant of an IntentSpec; returns it unchanged."""
    names = spec.measure_names
    if len(set(names)) != len(names):
        raise IntentValidationError(f"duplicate measure name in {sorted(names)}")
    for mname, tname in spec.measures:
        if tname != MEASURE_TYPE:
            raise IntentValidationError(
                f"measure {mname!r} has type {tname!r}; only {MEASURE_TYPE} is supported"
            )

    knob_names = spec.knob_names
    if len(set(knob_names)) != len(knob_names):
        raise IntentValidationError(f"duplicate knob name in {sorted(knob_names)}")
    for decl in spec.knobs:
        if not decl.range:
            raise IntentValidationError(f"knob {decl.name!r} has an empty range")
        seen = []
        for v in decl.range:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise IntentValidationError(
                    f"knob {decl.name!r} range must contain numeric constants"
                )
            if v in seen:
                raise IntentValidationError(f"knob {decl.name!r} range repeats value {v}")
            seen.append(v)
        kinds = {type(v) for v in decl.range}
        if len(kinds) != 1:
            raise IntentValidationError(
                f"knob {decl.name!r} range mixes integers and floats"
            )
        if decl.reference is not None and decl.reference not in decl.range:
            raise IntentValidationError(
                f"knob {decl.name!r} reference {decl.reference} is outside its range"
            )

    # Constraint: measure and goal are present together, and the measure is declared.
    if (spec.constraint_measure is None) != (spec.constraint_goal is None):
        raise IntentValidationError("constraint measure and goal must appear together")
    if spec.constraint_measure is not None and spec.constraint_measure not in names:
        raise IntentValidationError(
            f"constraint measure {spec.constraint_measure!r} is not declared"
        )

    obj_measures, obj_knobs = expr_refs(spec.objective)
    if obj_knobs:
        raise IntentValidationError(
            f"objective refers to knob(s) {sorted(obj_knobs)}"
        )
    undeclared = obj_measures - set(names)
    if undeclared:
        raise IntentValidationError(
            f"objective refers to undeclared measure(s) {sorted(undeclared)}"
        )
    if infer_expr_type(spec.objective) != "num":
        raise IntentValidationError("objective must be a numeric expression")

    if spec.knob_constraint is not None:
        kc_measures, kc_knobs = expr_refs(spec.knob_constraint)
        if kc_measures:
            raise IntentValidationError(
                f"knob constraint refers to measure(s) {sorted(kc_measures)}"
            )
        undeclared = kc_knobs - set(knob_names)
        if undeclared:
            raise IntentValidationError(
                f"knob constraint refers to undeclared knob(s) {sorted(undeclared)}"
            )
        if infer_expr_type(spec.knob_constraint) != "bool":
            raise IntentValidationError("knob constraint must be a Boolean expression")
    return spec
