"""Behaviors (one distribution per maximal context), marginals, non-disturbance."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ._rational import as_fraction, format_fraction
from .scenario import (
    BOT, SCHEMA_VERSION, TOP, ContextRef, Scenario,
    build_n_cycle, validate_scenario,
)

_SEP = ","
Table = Mapping[tuple[str, ...], Fraction]


class BehaviorError(ValueError):
    pass


class SubsetNotInContext(BehaviorError):
    pass


@dataclass(frozen=True)
class MarginalDistribution:
    """Marginal of one context table on ``subset`` (canonical measurement order)."""

    subset: tuple[str, ...]
    table: dict[tuple[str, ...], Fraction]

    def __post_init__(self):
        if sum(self.table.values(), Fraction(0)) != 1:
            raise BehaviorError(f"marginal on {self.subset} does not sum to 1")


@dataclass(frozen=True, eq=False)
class Behavior:
    """Exact probabilities p(s|C) for every maximal context C.

    ``tables[k]`` is keyed by outcome tuples ordered like ``scenario.contexts[k]``
    and holds an entry for every joint outcome (zeros included).
    """

    scenario: Scenario
    tables: tuple[dict[tuple[str, ...], Fraction], ...]

    def __post_init__(self):
        s = self.scenario
        if len(self.tables) != len(s.contexts):
            raise BehaviorError(f"expected {len(s.contexts)} context tables, got {len(self.tables)}")
        full = []
        for k, (ctx, table) in enumerate(zip(s.contexts, self.tables)):
            keys = list(itertools.product(s.outcomes, repeat=len(ctx)))
            extra = set(table) - set(keys)
            if extra:
                raise BehaviorError(f"context {s.context_id(k)}: unknown joint outcomes {sorted(extra)}")
            row = {}
            for key in keys:
                p = as_fraction(table.get(key, 0))
                if not 0 <= p <= 1:
                    raise BehaviorError(f"context {s.context_id(k)}: p{key} = {p} outside [0, 1]")
                row[key] = p
            total = sum(row.values(), Fraction(0))
            if total != 1:
                raise BehaviorError(f"context {s.context_id(k)}: probabilities sum to {total}, not 1")
            full.append(row)
        object.__setattr__(self, "tables", tuple(full))

    @classmethod
    def from_tables(cls, scenario: Scenario, tables: Mapping[ContextRef, Table]) -> "Behavior":
        by_index: dict[int, Table] = {}
        for ref, table in tables.items():
            k = scenario.context_index(ref)
            if k in by_index:
                raise BehaviorError(f"context {scenario.context_id(k)} given twice")
            by_index[k] = {tuple(key): p for key, p in table.items()}
        missing = [scenario.context_id(k) for k in range(len(scenario.contexts)) if k not in by_index]
        if missing:
            raise BehaviorError(f"no table for contexts {missing}")
        return cls(scenario, tuple(by_index[k] for k in range(len(scenario.contexts))))

    def table(self, context: ContextRef) -> dict[tuple[str, ...], Fraction]:
        return self.tables[self.scenario.context_index(context)]

    def prob(self, context: ContextRef, outcome: Sequence[str]) -> Fraction:
        return self.table(context)[tuple(outcome)]

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return self.scenario == other.scenario and self.tables == other.tables

    def __hash__(self):
        return hash((self.scenario, tuple(tuple(sorted(t.items())) for t in self.tables)))

    def to_json(self) -> dict:
        s = self.scenario
        return {
            "version": SCHEMA_VERSION,
            "scenario": s.to_json(),
            "tables": {
                s.context_id(k): {_SEP.join(key): format_fraction(p) for key, p in table.items()}
                for k, table in enumerate(self.tables)
            },
        }


_BEHAVIOR_KEYS = {"version", "scenario", "tables", "counts", "manifest"}


def scenario_from_reference(ref) -> Scenario:
    """An embedded scenario document, or a ``"cycle:N"`` shorthand."""
    if isinstance(ref, str) and ref.startswith("cycle:"):
        try:
            n = int(ref.split(":", 1)[1])
        except ValueError:
            raise BehaviorError(f"bad scenario reference {ref!r}") from None
        return build_n_cycle(n)
    return validate_scenario(ref)


def behavior_from_json(doc: Mapping) -> Behavior:
    """Strict parser: unknown fields, unknown contexts and float probabilities are errors.

    The simulator's ``counts`` annex and ``manifest`` reference are accepted and not interpreted.
    """
    if not isinstance(doc, Mapping):
        raise BehaviorError("behavior document must be an object")
    unknown = set(doc) - _BEHAVIOR_KEYS
    if unknown:
        raise BehaviorError(f"unknown fields {sorted(unknown)}")
    if doc.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise BehaviorError(f"unsupported version {doc.get('version')!r}")
    if "scenario" not in doc or "tables" not in doc:
        raise BehaviorError("behavior document needs 'scenario' and 'tables'")
    scenario = scenario_from_reference(doc["scenario"])
    raw = doc["tables"]
    if not isinstance(raw, Mapping):
        raise BehaviorError("'tables' must be an object")
    tables = {}
    for ctx_id, entries in raw.items():
        if not isinstance(entries, Mapping):
            raise BehaviorError(f"table {ctx_id!r} must be an object")
        try:
            tables[ctx_id] = {tuple(key.split(_SEP)): as_fraction(p) for key, p in entries.items()}
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise BehaviorError(f"table {ctx_id!r}: {exc}") from None
    try:
        return Behavior.from_tables(scenario, tables)
    except KeyError as exc:
        raise BehaviorError(f"unknown context {exc}") from None


def marginalize(behavior: Behavior, context: ContextRef, subset: Sequence[str]) -> MarginalDistribution:
    """Sum p(s|E) over all s restricting to each t in O^subset. Exact."""
    s = behavior.scenario
    k = s.context_index(context)
    ctx = s.contexts[k]
    if not set(subset) <= set(ctx):
        raise SubsetNotInContext(f"{sorted(subset)} is not inside context {s.context_id(k)}")
    sub = s.canonical_subset(subset)
    positions = [ctx.index(m) for m in sub]
    table = {t: Fraction(0) for t in itertools.product(s.outcomes, repeat=len(sub))}
    for key, p in behavior.tables[k].items():
        table[tuple(key[i] for i in positions)] += p
    return MarginalDistribution(sub, table)


@dataclass(frozen=True)
class Disturbance:
    context_a: str
    context_b: str
    intersection: tuple[str, ...]
    marginal_a: dict[tuple[str, ...], Fraction]
    marginal_b: dict[tuple[str, ...], Fraction]


@dataclass(frozen=True)
class NonDisturbanceReport:
    nondisturbing: bool
    violations: tuple[Disturbance, ...]

    def __bool__(self):
        return self.nondisturbing


def check_nondisturbance(behavior: Behavior) -> NonDisturbanceReport:
    s = behavior.scenario
    violations = []
    for i, j in itertools.combinations(range(len(s.contexts)), 2):
        common = set(s.contexts[i]) & set(s.contexts[j])
        if not common:
            continue
        a = marginalize(behavior, i, common)
        b = marginalize(behavior, j, common)
        if a.table != b.table:
            violations.append(Disturbance(s.context_id(i), s.context_id(j), a.subset, a.table, b.table))
    return NonDisturbanceReport(not violations, tuple(violations))


def _cycle_behavior(correlated: Sequence[bool]) -> Behavior:
    scenario = build_n_cycle(len(correlated))
    half = Fraction(1, 2)
    tables = []
    for same in correlated:
        if same:
            tables.append({(TOP, TOP): half, (BOT, BOT): half})
        else:
            tables.append({(TOP, BOT): half, (BOT, TOP): half})
    return Behavior(scenario, tuple(tables))


def generalized_coin_toss() -> Behavior:
    """5-cycle: every context perfectly anti-correlated, each outcome pair at 1/2."""
    return _cycle_behavior([False] * 5)


def rearranged_device_behavior() -> Behavior:
    """5-cycle: anti-correlated on C0..C3, perfectly correlated on C4 = (A4, A0)."""
    return _cycle_behavior([False, False, False, False, True])
