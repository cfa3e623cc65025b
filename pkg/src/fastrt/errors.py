"""Exception types shared across the toolchain."""


class FastError(Exception):
    """Base class for all toolchain errors."""


class IntentSyntaxError(FastError):
    """Raised when an intent file cannot be tokenized or parsed.

    Carries the source position and the set of token descriptions that
    would have been accepted at that point.
    """

    def __init__(self, message, line, column, expected=()):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.expected = frozenset(expected)


class IntentValidationError(FastError):
    """A syntactically valid intent violates a static constraint."""


class EmptyConfigurationSpace(FastError):
    """The knob constraint (or a restriction) removed every configuration."""


class DuplicateKnob(FastError):
    """A knob name was registered twice."""


class InvalidRestriction(FastError):
    """A restriction value lies outside the intent-declared range."""


class EmptyRestriction(FastError):
    """restrict() was called with an empty value list."""


class IntentNotFound(FastError):
    """optimize() was called with a name for which no intent is loaded."""


class MissingMeasure(FastError):
    """A declared measure was never recorded during a full window."""


class SchemaMismatch(FastError):
    """Persisted model or trace columns disagree with the intent."""


class ZeroGoal(FastError):
    """Constraint error is undefined for a zero goal."""


class EmptyAvailability(FastError):
    """No admissible configuration exists at some iteration."""


class MissingDataflow(FastError):
    """The manifest has no dataflow section, so the reachability analysis
    cannot run."""


class Infeasible(FastError):
    """No two-configuration mix can meet the constraint goal."""
