"""Static knob analyses over an intent plus an application knob manifest.

Three defect classes are reported:

* unused     - the symmetric difference between the intent's knobs and
               the knobs declared in application code (either side alone
               is a defect);
* uncaptured - declared knobs that were not passed to the optimize call,
               so the runtime cannot control them;
* unaffected - captured knobs from which no effect-bearing dataflow path
               reaches the optimize body, so tuning them changes nothing.

The manifest is a declarative sidecar: the declared/captured sets come
straight from the runtime registry, and dataflow edges are written by the
application author (or a builder API). Edges marked ``inert`` reach code
whose behavior the runtime never observes (e.g. a sleep duration in an
untaken branch) and do not propagate effect.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import FastError, MissingDataflow
from .intent import IntentSpec

ROOT_NODE = "optimize"


@dataclass(frozen=True)
class DataflowEdge:
    src: str
    dst: str
    inert: bool = False


@dataclass(frozen=True)
class KnobManifest:
    declared: frozenset
    captured: frozenset
    edges: Optional[tuple] = None  # None when no dataflow section exists

    def __post_init__(self):
        stray = self.captured - self.declared
        if stray:
            raise FastError(f"captured knobs {sorted(stray)} are not declared")


class ManifestBuilder:
    """Convenience builder used by the demo applications."""

    def __init__(self):
        self._declared = set()
        self._captured = set()
        self._edges = []

    def declare(self, *names):
        self._declared.update(names)
        return self

    def capture(self, *names):
        self._captured.update(names)
        return self

    def edge(self, src, dst, inert=False):
        self._edges.append(DataflowEdge(src, dst, inert))
        return self

    def build(self) -> KnobManifest:
        return KnobManifest(
            declared=frozenset(self._declared),
            captured=frozenset(self._captured),
            edges=tuple(self._edges),
        )


def find_unused(intent: IntentSpec, manifest: KnobManifest) -> frozenset:
    """Knobs present in exactly one of intent file and application code."""
    intent_knobs = frozenset(intent.knob_names)
    return (manifest.declared - intent_knobs) | (intent_knobs - manifest.declared)


def find_uncaptured(manifest: KnobManifest) -> frozenset:
    """Declared knobs never handed to the optimize call."""
    return manifest.declared - manifest.captured


def find_unaffected(manifest: KnobManifest) -> frozenset:
    """Captured knobs with no effect-bearing path to the optimize body."""
    if manifest.edges is None:
        raise MissingDataflow("manifest has no dataflow section")
    adjacency = defaultdict(list)
    for edge in manifest.edges:
        if not edge.inert:
            adjacency[edge.src].append(edge.dst)

    def reaches_root(start):
        seen = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            if node == ROOT_NODE:
                return True
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    affected = {name for name in manifest.captured if reaches_root(name)}
    return frozenset(manifest.captured - affected)


@dataclass(frozen=True)
class LintFinding:
    kind: str
    knob: str
    severity: str
    message: str


@dataclass
class LintReport:
    unused: frozenset
    uncaptured: frozenset
    unaffected: frozenset
    dataflow_skipped: bool = False
    findings: list = field(default_factory=list)

    @property
    def clean(self):
        return not (self.unused or self.uncaptured or self.unaffected)


def run_lint(intent: IntentSpec, manifest: KnobManifest) -> LintReport:
    unused = find_unused(intent, manifest)
    uncaptured = find_uncaptured(manifest)
    skipped = False
    try:
        unaffected = find_unaffected(manifest)
    except MissingDataflow:
        unaffected = frozenset()
        skipped = True
    findings = []
    for knob in sorted(unused):
        side = "application code" if knob in frozenset(intent.knob_names) else "intent file"
        findings.append(LintFinding(
            "unused", knob, "warning",
            f"knob {knob!r} is missing from the {side}",
        ))
    for knob in sorted(uncaptured):
        findings.append(LintFinding(
            "uncaptured", knob, "warning",
            f"knob {knob!r} is declared but never passed to optimize",
        ))
    for knob in sorted(unaffected):
        findings.append(LintFinding(
            "unaffected", knob, "warning",
            f"knob {knob!r} is captured but does not affect the optimize body",
        ))
    return LintReport(unused, uncaptured, unaffected, skipped, findings)


# -- manifest files --------------------------------------------------------

_EDGE_RE = re.compile(
    r"^(?P<src>\S+)\s*->\s*(?P<dst>\S+)\s*(?:\[(?P<mark>sink|inert)\])?$"
)


def parse_manifest(text: str) -> KnobManifest:
    """Parse the manifest format: ``declared:``, ``captured:`` and
    ``edges:`` sections; edge lines are ``src -> dst [sink|inert]``
    (unmarked edges count as sink)."""
    declared, captured = set(), set()
    edges = None
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//") or line.startswith("#"):
            continue
        if line in ("declared:", "captured:", "edges:"):
            section = line[:-1]
            if section == "edges" and edges is None:
                edges = []
            continue
        if section is None:
            raise FastError(f"manifest line {lineno}: content before any section")
        if section == "declared":
            declared.add(line)
        elif section == "captured":
            captured.add(line)
        else:
            match = _EDGE_RE.match(line)
            if not match:
                raise FastError(f"manifest line {lineno}: bad edge {line!r}")
            edges.append(DataflowEdge(
                src=match.group("src"),
                dst=match.group("dst"),
                inert=match.group("mark") == "inert",
            ))
    return KnobManifest(
        declared=frozenset(declared),
        captured=frozenset(captured),
        edges=tuple(edges) if edges is not None else None,
    )


def load_manifest(path) -> KnobManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read())


def format_manifest(manifest: KnobManifest) -> str:
    lines = ["declared:"]
    lines.extend(f"  {name}" for name in sorted(manifest.declared))
    lines.append("captured:")
    lines.extend(f"  {name}" for name in sorted(manifest.captured))
    if manifest.edges is not None:
        lines.append("edges:")
        for edge in manifest.edges:
            mark = "inert" if edge.inert else "sink"
            lines.append(f"  {edge.src} -> {edge.dst} [{mark}]")
    return "\n".join(lines) + "\n"


def save_manifest(manifest: KnobManifest, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_manifest(manifest))
