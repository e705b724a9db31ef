"""Measurement scenarios as hypergraphs (measurements, maximal contexts, outcomes).

Labels are opaque strings. Canonical order is declaration order everywhere:
measurements, outcomes, contexts, and the measurements inside each context.
All downstream vectors (LP columns, tables, serialized keys) inherit it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

BOT = "⊥"
TOP = "⊤"
DICHOTOMIC = (BOT, TOP)

SCHEMA_VERSION = 1
_SEP = ","

ContextRef = Union[int, str, Sequence[str]]


@dataclass(frozen=True)
class Issue:
    code: str
    detail: str

    def to_json(self) -> dict:
        return {"code": self.code, "detail": self.detail}


class ScenarioValidationError(ValueError):
    """Raised with every violated structural condition, not just the first."""

    def __init__(self, issues: Sequence[Issue]):
        self.issues = list(issues)
        super().__init__("; ".join(f"{i.code}: {i.detail}" for i in self.issues))


class UnknownContext(KeyError):
    pass


class UnknownMeasurement(KeyError):
    pass


@dataclass(frozen=True)
class JointOutcome:
    """An element of O^C: one outcome per measurement of ``measurements``."""

    measurements: tuple[str, ...]
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.measurements) != len(self.values):
            raise ValueError("assignment domain must equal the context exactly")

    @property
    def assignment(self) -> dict[str, str]:
        return dict(zip(self.measurements, self.values))

    def __getitem__(self, measurement: str) -> str:
        return self.values[self.measurements.index(measurement)]

    def restrict(self, subset: Sequence[str]) -> tuple[str, ...]:
        return tuple(self[m] for m in subset)


# A global assignment is a joint outcome over the whole measurement set.
GlobalAssignment = JointOutcome


def _structural_issues(measurements, contexts, outcomes) -> list[Issue]:
    issues: list[Issue] = []
    if not measurements:
        issues.append(Issue("EmptyStructure", "measurement set is empty"))
    if not outcomes:
        issues.append(Issue("EmptyStructure", "outcome set is empty"))
    if not contexts:
        issues.append(Issue("EmptyStructure", "context collection is empty"))
    for kind, labels in (("measurement", measurements), ("outcome", outcomes)):
        seen = set()
        for label in labels:
            if not isinstance(label, str) or not label or _SEP in label:
                issues.append(Issue("BadLabel", f"{kind} label {label!r} must be a non-empty string without {_SEP!r}"))
            if label in seen:
                issues.append(Issue("DuplicateLabel", f"{kind} {label!r} declared twice"))
            seen.add(label)

    known = set(measurements)
    sets = []
    for k, ctx in enumerate(contexts):
        if not ctx:
            issues.append(Issue("EmptyStructure", f"context #{k} is empty"))
        if len(set(ctx)) != len(ctx):
            issues.append(Issue("DuplicateLabel", f"context #{k} {list(ctx)} repeats a measurement"))
        unknown = [m for m in ctx if m not in known]
        if unknown:
            issues.append(Issue("UnknownMeasurement", f"context #{k} {list(ctx)} uses undeclared {unknown}"))
        sets.append(frozenset(ctx))

    covered = set().union(*sets) if sets else set()
    for m in measurements:
        if m not in covered:
            issues.append(Issue("CoverViolation", f"measurement {m!r} belongs to no context"))

    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if i < j and a == b and a:
                issues.append(Issue("DuplicateContext", f"contexts #{i} and #{j} are both {sorted(a)}"))
            elif i != j and a and a < b:
                issues.append(Issue(
                    "MaximalityViolation",
                    f"context #{i} {list(contexts[i])} is a strict subset of context #{j} {list(contexts[j])}",
                ))
    return issues


@dataclass(frozen=True)
class Scenario:
    """A triple (measurements, maximal contexts, outcomes); validated on construction."""

    measurements: tuple[str, ...]
    contexts: tuple[tuple[str, ...], ...]
    outcomes: tuple[str, ...] = DICHOTOMIC
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))
        object.__setattr__(self, "contexts", tuple(tuple(c) for c in self.contexts))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        issues = _structural_issues(self.measurements, self.contexts, self.outcomes)
        if issues:
            raise ScenarioValidationError(issues)

    @cached_property
    def measurement_index(self) -> dict[str, int]:
        return {m: i for i, m in enumerate(self.measurements)}

    @cached_property
    def _context_lookup(self) -> dict[frozenset, int]:
        return {frozenset(c): k for k, c in enumerate(self.contexts)}

    def context_id(self, k: int) -> str:
        return _SEP.join(self.contexts[k])

    def context_index(self, ref: ContextRef) -> int:
        """Resolve an index, a ``"A0,A1"`` id, or a label collection to a context index."""
        if isinstance(ref, bool):
            raise UnknownContext(ref)
        if isinstance(ref, int):
            if 0 <= ref < len(self.contexts):
                return ref
            raise UnknownContext(ref)
        labels = ref.split(_SEP) if isinstance(ref, str) else list(ref)
        try:
            return self._context_lookup[frozenset(labels)]
        except KeyError:
            raise UnknownContext(ref) from None

    def canonical_subset(self, labels: Iterable[str]) -> tuple[str, ...]:
        labels = set(labels)
        for m in labels:
            if m not in self.measurement_index:
                raise UnknownMeasurement(m)
        return tuple(m for m in self.measurements if m in labels)

    @property
    def n_global(self) -> int:
        return len(self.outcomes) ** len(self.measurements)

    def global_assignments(self) -> Iterable[tuple[str, ...]]:
        return itertools.product(self.outcomes, repeat=len(self.measurements))

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "measurements": list(self.measurements),
            "outcomes": list(self.outcomes),
            "contexts": [list(c) for c in self.contexts],
        }


_SCENARIO_KEYS = {"version", "measurements", "outcomes", "contexts"}


def validate_scenario(candidate: Mapping) -> Scenario:
    """Build a Scenario from a raw JSON-like description.

    Raises ScenarioValidationError listing every problem found, including
    schema problems (missing/unknown keys, wrong types).
    """
    if not isinstance(candidate, Mapping):
        raise ScenarioValidationError([Issue("Schema", "scenario document must be an object")])
    issues = []
    unknown = set(candidate) - _SCENARIO_KEYS
    if unknown:
        issues.append(Issue("Schema", f"unknown fields {sorted(unknown)}"))
    if candidate.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        issues.append(Issue("Schema", f"unsupported version {candidate.get('version')!r}"))
    raw = {}
    for key in ("measurements", "outcomes", "contexts"):
        value = candidate.get(key)
        if not isinstance(value, list):
            issues.append(Issue("Schema", f"{key!r} must be a list"))
            value = []
        raw[key] = value
    contexts = []
    for c in raw["contexts"]:
        if not isinstance(c, list):
            issues.append(Issue("Schema", f"context {c!r} must be a list"))
            continue
        contexts.append(tuple(c))
    if issues:
        raise ScenarioValidationError(issues)
    return Scenario(tuple(raw["measurements"]), tuple(contexts), tuple(raw["outcomes"]))


def build_n_cycle(n: int) -> Scenario:
    """n dichotomic measurements A0..A{n-1}; contexts Ci = (Ai, A{i+1 mod n})."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 3:
        raise ScenarioValidationError([Issue(
            "MaximalityViolation" if isinstance(n, int) and n == 2 else "EmptyStructure",
            f"an n-cycle needs n >= 3, got {n!r}",
        )])
    labels = tuple(f"A{i}" for i in range(n))
    contexts = tuple((labels[i], labels[(i + 1) % n]) for i in range(n))
    return Scenario(labels, contexts, DICHOTOMIC, name=f"{n}-cycle")


def cycle_length(scenario: Scenario) -> int | None:
    """Return n if ``scenario`` is exactly ``build_n_cycle(n)``, else None."""
    n = len(scenario.measurements)
    if n >= 3 and scenario == build_n_cycle(n):
        return n
    return None


def _resolve_labels(scenario: Scenario, context: ContextRef) -> tuple[str, ...]:
    if not isinstance(context, (int, str)) and frozenset(context) == frozenset(scenario.measurements) \
            and len(tuple(context)) == len(scenario.measurements):
        return scenario.measurements
    return scenario.contexts[scenario.context_index(context)]


def enumerate_joint_outcomes(scenario: Scenario, context: ContextRef) -> list[JointOutcome]:
    """All |O|^|C| joint outcomes of a context, first measurement varying slowest.

    Passing the full measurement collection enumerates global assignments.
    """
    labels = _resolve_labels(scenario, context)
    return [JointOutcome(labels, values)
            for values in itertools.product(scenario.outcomes, repeat=len(labels))]
