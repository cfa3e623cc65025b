"""Configuration-space expansion: knob-range cross product filtered by the
knob constraint."""

from __future__ import annotations

import itertools

from .errors import EmptyConfigurationSpace
from .intent import IntentSpec
from .intent_compiler import CompiledIntent, compile_knob_constraint


def expand_configuration_space(spec: IntentSpec, compiled: CompiledIntent = None):
    """All complete knob bindings that satisfy the knob constraint.

    Order is deterministic and matches knob-table layout: the
    first-declared knob varies fastest, each range in declaration order.
    Raises EmptyConfigurationSpace when the constraint filters out every
    combination.
    """
    if compiled is not None:
        constraint = compiled.knob_constraint_eval
    else:
        constraint = compile_knob_constraint(spec.knob_constraint)
    names = spec.knob_names
    ranges = [decl.range for decl in spec.knobs]
    configs = []
    for combo in itertools.product(*reversed(ranges)):
        binding = dict(zip(names, reversed(combo)))
        if constraint(binding):
            configs.append(binding)
    if not configs:
        raise EmptyConfigurationSpace(
            f"knob constraint of intent {spec.name!r} rejects every configuration"
        )
    return configs
