"""Canonical pretty-printer for intent specifications.

``parse_intent(print_intent(spec)) == spec`` for every valid spec; the
layout mirrors the conventional intent/measures/knobs section order.
"""

from __future__ import annotations

from .intent import Apply, Constant, IntentSpec, KnobRef, MeasureRef

# Binding strength, loosest to tightest. Binary operators are
# left-associative; comparisons do not chain.
_PREC = {
    "or": 1,
    "and": 2,
    "not": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4, "==": 4, "!=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
    "neg": 7,
}
_ATOM_PREC = 8


def format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    text = repr(float(value))
    if "e" in text or "E" in text:
        raise ValueError(
            f"{value!r} has no literal form (scientific notation is not in the language)"
        )
    return text


def format_expr(expr) -> str:
    text, _ = _fmt(expr)
    return text


def _fmt(expr):
    if isinstance(expr, Constant):
        return format_number(expr.value), _ATOM_PREC
    if isinstance(expr, (MeasureRef, KnobRef)):
        return expr.name, _ATOM_PREC
    assert isinstance(expr, Apply)
    op = expr.func
    prec = _PREC[op]
    if op == "neg":
        inner = _child(expr.args[0], prec)
        return f"-{inner}", prec
    if op == "not":
        inner = _child(expr.args[0], prec)
        return f"not {inner}", prec
    left = _child(expr.args[0], prec)
    right = _child(expr.args[1], prec + 1)  # parenthesize equal-precedence right children
    return f"{left} {op} {right}", prec


def _child(expr, min_prec):
    text, prec = _fmt(expr)
    if prec < min_prec:
        return f"({text})"
    return text


def print_intent(spec: IntentSpec) -> str:
    lines = [f"intent {spec.name}"]
    lines.append(f"  {spec.optimization_type.value}({format_expr(spec.objective)})")
    if spec.constraint_measure is not None:
        lines.append(
            f"  such that {spec.constraint_measure} == {format_number(spec.constraint_goal)}"
        )
    lines.append("measures")
    for name, type_name in spec.measures:
        lines.append(f"  {name}: {type_name}")
    lines.append("knobs")
    for decl in spec.knobs:
        values = ", ".join(format_number(v) for v in decl.range)
        entry = f"  {decl.name} = [{values}]"
        if decl.reference is not None:
            entry += f" reference {format_number(decl.reference)}"
        lines.append(entry)
    if spec.knob_constraint is not None:
        lines.append(f"  such that {format_expr(spec.knob_constraint)}")
    return "\n".join(lines) + "\n"
