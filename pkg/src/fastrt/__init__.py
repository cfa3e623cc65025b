"""Intent-driven adaptation toolkit.

Applications declare knobs and record measures; an intent file states a
constrained optimization goal; the runtime profiles the configuration
space and re-schedules configurations window by window so the goal is
met while the objective stays optimal. The package also ships the
oracle-based testing harness and the knob lint analyses.
"""

from .config_space import expand_configuration_space
from .controller import (
    FeedbackState,
    Schedule,
    compute_schedule_constrained,
    compute_schedule_unconstrained,
    feedback_update,
    realize_schedule,
    schedule_cost,
)
from .errors import (
    DuplicateKnob,
    EmptyAvailability,
    EmptyConfigurationSpace,
    EmptyRestriction,
    FastError,
    Infeasible,
    IntentNotFound,
    IntentSyntaxError,
    IntentValidationError,
    InvalidRestriction,
    MissingDataflow,
    MissingMeasure,
    SchemaMismatch,
    ZeroGoal,
)
from .events import IntentTimeline, PerturbEvent, availability_timeline, load_script, parse_script
from .intent import (
    Apply,
    Constant,
    IntentSpec,
    KnobDecl,
    KnobRef,
    MeasureRef,
    OptimizationType,
    validate_spec,
)
from .intent_compiler import CompiledIntent, compile_intent, eval_expr
from .intent_parser import parse_expression, parse_intent
from .intent_printer import format_expr, print_intent
from .lint import (
    DataflowEdge,
    KnobManifest,
    LintReport,
    ManifestBuilder,
    find_unaffected,
    find_uncaptured,
    find_unused,
    load_manifest,
    parse_manifest,
    run_lint,
    save_manifest,
)
from .oracles import (
    TraceMetrics,
    Verdict,
    VerdictConfig,
    build_oracle_a,
    build_oracle_b,
    compute_metrics,
    objective_advantage,
    verdict_a,
    verdict_b,
)
from .profiler import (
    ControllerModel,
    ModelRow,
    StreamingStats,
    WindowStats,
    load_model,
    profile,
    restrict_model,
    save_model,
)
from .runtime import (
    DecisionRecord,
    Knob,
    KnobRegistry,
    MeasureBoard,
    RunResult,
    Runtime,
    RuntimeConfig,
    make_runtime,
)
from .simplatform import PLATFORM_KNOBS, PLATFORM_MEASURES, PlatformConfig, PlatformState
from .trace import Trace, TraceRecord, load_trace, save_trace

__version__ = "0.1.0"
