"""Command line interface.

Subcommands: profile, run, oracle, verdict, lint, scenario, plotdata.
Exit codes: 0 on success (or PASS), 1 on findings / FAIL / INVALID,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile

from . import __version__
from .config_space import expand_configuration_space
from .errors import FastError
from .events import availability_timeline, load_script
from .intent_compiler import compile_intent
from .intent_parser import parse_intent
from .lint import load_manifest, run_lint
from .oracles import (
    VerdictConfig,
    build_oracle_a,
    build_oracle_b,
    compute_metrics,
    verdict_a,
    verdict_b,
    Verdict,
)
from .profiler import load_model, save_model
from .simplatform import PlatformConfig
from .trace import load_trace, save_trace
from .demos import APPS, profile_app, run_app
from .demos.scenarios import SCENARIOS, run_scenario

USAGE_ERROR = 2


def _load_intent(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_intent(fh.read())


def _platform_config(args) -> PlatformConfig:
    if getattr(args, "platform_config", None):
        config = PlatformConfig.from_json(args.platform_config)
    else:
        config = PlatformConfig()
    if getattr(args, "noise", None) is not None:
        config.noise_amplitude = args.noise
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


def _events(args):
    if getattr(args, "perturb", None):
        return load_script(args.perturb)
    return ()


def _atomic_csv(path, header, rows):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands -----------------------------------------------------------

def cmd_profile(args):
    spec = _load_intent(args.intent)
    compiled = compile_intent(spec)
    space = expand_configuration_space(spec, compiled)
    print(f"profiling {args.app!r}: {len(space)} configuration(s), "
          f"{args.iters} iteration(s) each")
    model = profile_app(
        args.app, compiled, args.iters,
        warmup=args.warmup, platform_config=_platform_config(args),
    )
    os.makedirs(args.out, exist_ok=True)
    prefix = os.path.join(args.out, spec.name)
    knob_path, measure_path = save_model(model, prefix)
    for row in model.rows:
        settings = ", ".join(f"{k}={row.bindings[k]}" for k in model.knob_names)
        values = ", ".join(
            f"{m}={row.measures[i]:.6g}" for i, m in enumerate(model.measure_names))
        print(f"  id {row.config_id}: {settings} -> {values}")
    print(f"wrote {knob_path} and {measure_path}")
    return 0


def cmd_run(args):
    spec = _load_intent(args.intent)
    compiled = compile_intent(spec)
    model = None
    if args.model:
        model = load_model(args.model, spec)
    elif not args.uncontrolled and args.fixed_config is None:
        print("run: need --model unless --uncontrolled or --fixed-config is given",
              file=sys.stderr)
        return USAGE_ERROR
    result = run_app(
        args.app, compiled, args.iterations,
        model=model,
        window_size=args.window,
        perturbations=_events(args),
        platform_config=_platform_config(args),
        fixed_config_id=args.fixed_config,
        uncontrolled=args.uncontrolled,
    )
    save_trace(result.trace, args.trace_out, spec.knob_names, spec.measure_names)
    print(f"wrote {args.trace_out} ({len(result.trace)} iterations)")
    if args.decisions_out:
        _atomic_csv(
            args.decisions_out,
            ["window", "primaryId", "secondaryId", "alpha", "lambda",
             "predictedConstraint", "objectiveEstimate"],
            [
                [d.window, d.primary, d.secondary, repr(d.alpha), repr(d.lam),
                 "" if d.predicted_constraint is None else repr(d.predicted_constraint),
                 repr(d.objective_estimate)]
                for d in result.decisions
            ],
        )
        print(f"wrote {args.decisions_out} ({len(result.decisions)} windows)")
    if spec.is_constrained and len(result.trace) >= args.window:
        metrics = compute_metrics(result.trace, compiled, args.window)
        print(f"constraint MAPE: {metrics.mape:.6g}  "
              f"cumulative objective: {metrics.cumulative_objective:.6g}")
    return 0


def _load_fixed_traces(directory, spec):
    traces = []
    for entry in sorted(os.listdir(directory)):
        if not entry.endswith(".csv"):
            continue
        stem = entry[:-4]
        digits = stem.rsplit("_", 1)[-1]
        if not digits.isdigit():
            continue
        trace = load_trace(
            os.path.join(directory, entry),
            spec.knob_names, spec.measure_names,
            intent_name=spec.name, config_id=int(digits),
        )
        traces.append(trace)
    if not traces:
        raise FastError(
            f"no fixed traces found in {directory!r} (expected fixed_<id>.csv files)")
    return traces


def cmd_oracle(args):
    spec = _load_intent(args.intent)
    compiled = compile_intent(spec)
    events = _events(args)
    traces = _load_fixed_traces(args.traces, spec)
    config = VerdictConfig(t=args.T, t_e=args.T, t_f=args.TF)
    if args.type == "A":
        oracle = build_oracle_a(traces, compiled, config, args.window, events=events)
        print(f"oracle A: fixed configuration {oracle.config_id}")
    else:
        availability = None
        if args.model:
            model = load_model(args.model, spec)
            availability = availability_timeline(model, events, args.window)
        oracle = build_oracle_b(traces, compiled, events=events,
                                availability=availability)
        distinct = sorted({r.config_id for r in oracle.records})
        print(f"oracle B: drawn from configurations {distinct}")
    save_trace(oracle, args.out, spec.knob_names, spec.measure_names)
    print(f"wrote {args.out}")
    return 0


def cmd_verdict(args):
    spec = _load_intent(args.intent)
    compiled = compile_intent(spec)
    events = _events(args)
    controlled = load_trace(args.fast, spec.knob_names, spec.measure_names,
                            intent_name=spec.name)
    oracle = load_trace(args.oracle, spec.knob_names, spec.measure_names,
                        intent_name=spec.name)
    config = VerdictConfig(t=args.T, t_e=args.T, t_f=args.TF)
    controlled_metrics = compute_metrics(controlled, compiled, args.window,
                                         events=events)
    oracle_metrics = compute_metrics(oracle, compiled, args.window, events=events)
    if args.alg == "A":
        verdict = verdict_a(controlled_metrics, oracle_metrics, compiled, config)
    else:
        verdict = verdict_b(controlled_metrics, oracle_metrics, config)
    print(f"E(controlled) = {controlled_metrics.mape:.6g}  "
          f"F(controlled) = {controlled_metrics.cumulative_objective:.6g}")
    print(f"E(oracle)     = {oracle_metrics.mape:.6g}  "
          f"F(oracle)     = {oracle_metrics.cumulative_objective:.6g}")
    print(verdict.value)
    return 0 if verdict is Verdict.PASS else 1


def cmd_lint(args):
    spec = _load_intent(args.intent)
    manifest = load_manifest(args.manifest)
    report = run_lint(spec, manifest)
    if report.dataflow_skipped:
        print("warning: manifest has no dataflow section; "
              "unaffected-knob analysis skipped")
    for finding in report.findings:
        print(f"{finding.severity}: [{finding.kind}] {finding.message}")
    if report.clean:
        print("no findings")
        return 0
    return 1


def cmd_scenario(args):
    scenario = SCENARIOS.get(args.id)
    if scenario is None:
        print(f"scenario: id must be one of {sorted(SCENARIOS)}", file=sys.stderr)
        return USAGE_ERROR
    outcome = run_scenario(scenario)
    print(f"scenario {scenario.scenario_id}: {scenario.description}")
    print(f"  oracle {scenario.oracle}, {scenario.iterations} iterations, "
          f"window {scenario.window_size}")
    print(f"  E(controlled) = {outcome.controlled_metrics.mape:.6g}  "
          f"E(oracle) = {outcome.oracle_metrics.mape:.6g}")
    print(f"  expected verdict: {scenario.expected.value}")
    print(f"  actual verdict:   {outcome.actual.value}")
    print("  MATCH" if outcome.matched else "  MISMATCH")
    return 0 if outcome.matched else 1


def cmd_plotdata(args):
    spec = _load_intent(args.intent)
    compiled = compile_intent(spec)
    events = _events(args)
    trace = load_trace(args.trace, spec.knob_names, spec.measure_names,
                       intent_name=spec.name)
    model = load_model(args.model, spec) if args.model else None
    from .events import IntentTimeline

    timeline = IntentTimeline(compiled, events)
    w = args.window
    n_windows = len(trace.records) // w
    if n_windows < 1:
        print("plotdata: trace shorter than one window", file=sys.stderr)
        return USAGE_ERROR
    rows = []
    for wi in range(n_windows):
        records = trace.records[wi * w:(wi + 1) * w]
        view = timeline.at(wi * w + w - 1)
        vspec = view.spec
        averages = [
            math.fsum(r.measures[m] for r in records) / w
            for m in vspec.measure_names
        ]
        constraint_avg = (
            averages[vspec.measure_index(vspec.constraint_measure)]
            if vspec.is_constrained else ""
        )
        goal = vspec.constraint_goal if vspec.is_constrained else ""
        objective_avg = view.objective_eval(averages)
        if model is not None:
            ids = sorted({
                _config_id_for(model, r.bindings) for r in records
            })
            id_text = "|".join(str(i) for i in ids)
        else:
            id_text = ""
        rows.append([wi, constraint_avg, goal, objective_avg, id_text])
    _atomic_csv(args.out, ["window", "constraintAvg", "goal", "objectiveAvg",
                           "configIds"], rows)
    print(f"wrote {args.out} ({len(rows)} windows)")
    return 0


def _config_id_for(model, bindings):
    for row in model.rows:
        if all(row.bindings.get(k) == v for k, v in bindings.items()):
            return row.config_id
    return -1


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fast",
        description="Intent-driven adaptation toolchain: profile an "
                    "instrumented app, run it under runtime control, and "
                    "test the result against oracles.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_platform_flags(p):
        p.add_argument("--platform-config", help="JSON file with platform constants")
        p.add_argument("--noise", type=float, default=None,
                       help="multiplicative latency noise amplitude (default 0)")
        p.add_argument("--seed", type=int, default=None, help="platform noise seed")

    p = sub.add_parser("profile", help="profile an app over its configuration space")
    p.add_argument("--app", required=True, choices=sorted(APPS))
    p.add_argument("--intent", required=True)
    p.add_argument("--iters", type=int, default=50,
                   help="iterations per configuration (default 50)")
    p.add_argument("--warmup", type=int, default=0,
                   help="iterations to discard per configuration (default 0)")
    p.add_argument("--out", required=True, help="output directory for model tables")
    add_platform_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("run", help="run an app under runtime control")
    p.add_argument("--app", required=True, choices=sorted(APPS))
    p.add_argument("--intent", required=True)
    p.add_argument("--model", help="model file prefix (as written by profile)")
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--perturb", help="perturbation script file")
    p.add_argument("--trace-out", default="trace.csv")
    p.add_argument("--decisions-out", help="controller decision log CSV")
    p.add_argument("--uncontrolled", action="store_true",
                   help="run the reference configuration throughout")
    p.add_argument("--fixed-config", type=int, default=None,
                   help="pin one model configuration id (for oracle traces)")
    add_platform_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="build an oracle trace from fixed runs")
    p.add_argument("--type", required=True, choices=["A", "B"])
    p.add_argument("--intent", required=True)
    p.add_argument("--traces", required=True,
                   help="directory of fixed_<id>.csv traces")
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--T", type=float, default=0.05)
    p.add_argument("--TF", type=float, default=0.05)
    p.add_argument("--perturb", help="perturbation script used for the controlled run")
    p.add_argument("--model", help="model prefix (oracle B availability under restricts)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verdict", help="compare a controlled trace to an oracle")
    p.add_argument("--alg", required=True, choices=["A", "B"])
    p.add_argument("--fast", required=True, help="controlled trace CSV")
    p.add_argument("--oracle", required=True, help="oracle trace CSV")
    p.add_argument("--intent", required=True)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--T", type=float, default=0.05)
    p.add_argument("--TF", type=float, default=0.05)
    p.add_argument("--perturb", help="perturbation script used for the controlled run")
    p.set_defaults(func=cmd_verdict)

    p = sub.add_parser("lint", help="static knob analyses over intent + manifest")
    p.add_argument("--intent", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("scenario", help="run one runtime test scenario end to end")
    p.add_argument("--id", type=int, required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("plotdata", help="emit per-window CSV for plotting")
    p.add_argument("--trace", required=True)
    p.add_argument("--intent", required=True)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--model", help="model prefix, to annotate config ids")
    p.add_argument("--perturb")
    p.add_argument("--out", default="plotdata.csv")
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help.
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except FastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
