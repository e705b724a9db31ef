"""Noncontextuality as exact LP feasibility over global distributions.

Columns of the LP are the global assignments t in O^A (canonical order);
rows are the pairs (context C, joint outcome s) plus one global
normalisation row. A behavior is noncontextual iff some p_bar >= 0 has
marginal p(.|C) on every context. An infeasible LP yields a Farkas vector,
which is repackaged as a linear inequality valid on every deterministic
vertex and strictly violated by the input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping, Sequence

from ._rational import as_fraction, format_fraction
from .behaviors import Behavior
from .scenario import GlobalAssignment, Scenario, build_n_cycle

DEFAULT_ENUMERATION_LIMIT = 2 ** 20

GE, LE = ">=", "<="


class ScenarioTooLarge(ValueError):
    pass


class ScenarioMismatch(ValueError):
    pass


def _check_size(scenario: Scenario, limit: int):
    if scenario.n_global > limit:
        raise ScenarioTooLarge(
            f"{scenario.n_global} global assignments exceed the enumeration limit {limit}")


def _restrictions(scenario: Scenario):
    """positions[k] = indices into a global assignment for context k."""
    idx = scenario.measurement_index
    return [[idx[m] for m in ctx] for ctx in scenario.contexts]


@dataclass(frozen=True, eq=False)
class GlobalDistribution:
    """A distribution on O^A; ``table`` lists only its support."""

    scenario: Scenario
    table: dict[tuple[str, ...], Fraction]

    def __post_init__(self):
        s = self.scenario
        clean = {}
        for key, p in self.table.items():
            key = tuple(key)
            if len(key) != len(s.measurements) or any(o not in s.outcomes for o in key):
                raise ValueError(f"{key} is not a global assignment of the scenario")
            p = as_fraction(p)
            if p < 0:
                raise ValueError(f"negative mass {p} on {key}")
            if p:
                clean[key] = clean.get(key, Fraction(0)) + p
        if sum(clean.values(), Fraction(0)) != 1:
            raise ValueError("global distribution does not sum to 1")
        object.__setattr__(self, "table", clean)

    def __getitem__(self, assignment) -> Fraction:
        return self.table.get(tuple(assignment), Fraction(0))

    def support(self) -> list[GlobalAssignment]:
        return [GlobalAssignment(self.scenario.measurements, t) for t in self.table]

    def marginal(self, context) -> dict[tuple[str, ...], Fraction]:
        s = self.scenario
        k = s.context_index(context)
        pos = _restrictions(s)[k]
        out = {key: Fraction(0) for key in itertools.product(s.outcomes, repeat=len(pos))}
        for t, p in self.table.items():
            out[tuple(t[i] for i in pos)] += p
        return out

    def induced_behavior(self) -> Behavior:
        return Behavior(self.scenario, tuple(self.marginal(k) for k in range(len(self.scenario.contexts))))

    def to_json(self) -> dict:
        return {",".join(t): format_fraction(p) for t, p in self.table.items()}


def point_mass(scenario: Scenario, assignment: Sequence[str]) -> GlobalDistribution:
    return GlobalDistribution(scenario, {tuple(assignment): Fraction(1)})


@dataclass(frozen=True, eq=False)
class NCInequality:
    """sum_{C,s} coefficients[C, s] * p(s|C)  (direction)  bound.

    Keys are (context index, outcome tuple); absent keys mean 0.
    """

    scenario: Scenario
    coefficients: dict[tuple[int, tuple[str, ...]], Fraction]
    bound: Fraction
    direction: str = GE

    def __post_init__(self):
        if self.direction not in (GE, LE):
            raise ValueError(f"direction must be {GE!r} or {LE!r}")
        coeffs = {}
        for (k, s), c in self.coefficients.items():
            k = self.scenario.context_index(k)
            c = as_fraction(c)
            if c:
                coeffs[(k, tuple(s))] = c
        if not coeffs:
            raise ValueError("an inequality needs at least one nonzero coefficient")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bound", as_fraction(self.bound))

    def value(self, behavior: Behavior) -> Fraction:
        if behavior.scenario != self.scenario:
            raise ScenarioMismatch("inequality and behavior live on different scenarios")
        return sum((c * behavior.tables[k][s] for (k, s), c in self.coefficients.items()), Fraction(0))

    def holds(self, value: Fraction) -> bool:
        return value >= self.bound if self.direction == GE else value <= self.bound

    def to_json(self) -> dict:
        s = self.scenario
        return {
            "direction": self.direction,
            "bound": format_fraction(self.bound),
            "coefficients": [
                {"context": s.context_id(k), "outcome": ",".join(o), "coefficient": format_fraction(c)}
                for (k, o), c in sorted(self.coefficients.items())
            ],
        }


@dataclass(frozen=True)
class InequalityEvaluation:
    value: Fraction
    bound: Fraction
    direction: str
    satisfied: bool


def evaluate_inequality(behavior: Behavior, inequality: NCInequality) -> InequalityEvaluation:
    v = inequality.value(behavior)
    return InequalityEvaluation(v, inequality.bound, inequality.direction, inequality.holds(v))


@dataclass(frozen=True)
class NCDecision:
    verdict: str  # "noncontextual" | "contextual"
    witness: GlobalDistribution | None = None
    certificate: NCInequality | None = None
    value: Fraction | None = None
    bound: Fraction | None = None
    pivots: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.verdict == "noncontextual":
            ok = self.witness is not None and self.certificate is None
        elif self.verdict == "contextual":
            ok = self.witness is None and self.certificate is not None
        else:
            ok = False
        if not ok:
            raise ValueError("a decision carries a witness iff noncontextual, a certificate iff contextual")

    @property
    def noncontextual(self) -> bool:
        return self.verdict == "noncontextual"

    def to_json(self) -> dict:
        doc = {"verdict": self.verdict}
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_json()
            doc["value"] = format_fraction(self.value)
            doc["bound"] = format_fraction(self.bound)
        return doc


def _lp(behavior: Behavior):
    s = behavior.scenario
    columns = list(s.global_assignments())
    positions = _restrictions(s)
    rows, rhs, labels = [], [], []
    rows.append([Fraction(1)] * len(columns))
    rhs.append(Fraction(1))
    labels.append(None)
    for k, pos in enumerate(positions):
        index = {key: r for r, key in enumerate(behavior.tables[k])}
        block = [[Fraction(0)] * len(columns) for _ in index]
        for j, t in enumerate(columns):
            block[index[tuple(t[i] for i in pos)]][j] = Fraction(1)
        for key, r in index.items():
            rows.append(block[r])
            rhs.append(behavior.tables[k][key])
            labels.append((k, key))
    return columns, rows, rhs, labels


def _integer_normalise(coeffs: dict, bound: Fraction):
    values = list(coeffs.values()) + [bound]
    den = lcm(*(v.denominator for v in values))
    ints = [int(v * den) for v in values]
    g = 0
    for v in ints:
        g = gcd(g, v)
    g = g or 1
    scale = Fraction(den, g)
    return {key: c * scale for key, c in coeffs.items()}, bound * scale


def decide_noncontextual(behavior: Behavior, limit: int = DEFAULT_ENUMERATION_LIMIT) -> NCDecision:
    """Exact decision with a global-section witness or a violated inequality.

    Disturbing behaviors are legal input and come out contextual.
    """
    from .simplex import solve_feasibility

    s = behavior.scenario
    _check_size(s, limit)
    columns, rows, rhs, labels = _lp(behavior)
    result = solve_feasibility(rows, rhs)
    if result.feasible:
        witness = GlobalDistribution(s, {t: p for t, p in zip(columns, result.x) if p})
        return NCDecision("noncontextual", witness=witness, pivots=result.pivots)

    # Farkas z: A^T z >= 0, b^T z < 0. For any NC behavior q = A x: z.q >= 0,
    # i.e. sum z[C,s] q(s|C) >= -z[norm].
    coeffs, norm = {}, Fraction(0)
    for label, zi in zip(labels, result.farkas):
        if not zi:
            continue
        if label is None:
            norm += zi
        else:
            coeffs[label] = coeffs.get(label, Fraction(0)) + zi
    coeffs, bound = _integer_normalise(coeffs, -norm)
    certificate = NCInequality(s, coeffs, bound, GE)
    value = certificate.value(behavior)
    if certificate.holds(value):
        raise AssertionError("certificate is not violated by the input behavior")
    return NCDecision("contextual", certificate=certificate, value=value, bound=bound, pivots=result.pivots)


@dataclass(frozen=True)
class GlobalSectionReport:
    ok: bool
    discrepancies: dict[str, dict[tuple[str, ...], tuple[Fraction, Fraction]]]

    def __bool__(self):
        return self.ok


def verify_global_section(behavior: Behavior, candidate: GlobalDistribution) -> GlobalSectionReport:
    """Per context: {outcome: (behavior value, candidate marginal)} wherever they differ."""
    s = behavior.scenario
    if candidate.scenario != s:
        raise ScenarioMismatch("candidate distribution is over a different scenario")
    discrepancies = {}
    for k in range(len(s.contexts)):
        marg = candidate.marginal(k)
        diff = {key: (p, marg[key]) for key, p in behavior.tables[k].items() if marg[key] != p}
        if diff:
            discrepancies[s.context_id(k)] = diff
    return GlobalSectionReport(not discrepancies, discrepancies)


def deterministic_vertices(scenario: Scenario, limit: int = DEFAULT_ENUMERATION_LIMIT) -> list[Behavior]:
    """Behaviors of the point-mass global distributions, in canonical order."""
    _check_size(scenario, limit)
    return [point_mass(scenario, t).induced_behavior() for t in scenario.global_assignments()]


def classical_extremum(scenario: Scenario, coefficients: Mapping, direction: str = GE,
                       limit: int = DEFAULT_ENUMERATION_LIMIT) -> Fraction:
    """Min (for >=) or max (for <=) of a linear functional over all deterministic vertices.

    Evaluated straight from the global assignments, without building Behaviors.
    """
    _check_size(scenario, limit)
    positions = _restrictions(scenario)
    terms = [(scenario.context_index(k), tuple(o), Fraction(c)) for (k, o), c in coefficients.items()]
    values = []
    for t in scenario.global_assignments():
        values.append(sum((c for k, o, c in terms
                           if tuple(t[i] for i in positions[k]) == o), Fraction(0)))
    return min(values) if direction == GE else max(values)


def correlation_coefficients(scenario: Scenario) -> dict:
    """Coefficients of sum_C <prod of A in C> with the encoding top -> +1, bottom -> -1.

    Only meaningful for dichotomic scenarios; for pairs this is +1 on equal
    outcomes, -1 on unequal ones.
    """
    top = scenario.outcomes[-1]
    coeffs = {}
    for k, ctx in enumerate(scenario.contexts):
        for o in itertools.product(scenario.outcomes, repeat=len(ctx)):
            flips = sum(1 for v in o if v != top)
            coeffs[(k, o)] = Fraction(-1 if flips % 2 else 1)
    return coeffs


def cycle_inequality(n: int) -> NCInequality:
    """sum_i <A_i A_{i+1}> >= bound on the n-cycle; bound by vertex enumeration."""
    scenario = build_n_cycle(n)
    coeffs = correlation_coefficients(scenario)
    return NCInequality(scenario, coeffs, classical_extremum(scenario, coeffs, GE), GE)


def kcbs_inequality() -> NCInequality:
    return cycle_inequality(5)
