"""Classical (finite hidden-state) and quantum (density matrix + PVM) realizations.

Classical verification is exact. Quantum verification works on complex
floating-point matrices with one uniform tolerance; realizations built by
``classical_to_quantum`` also carry their exact diagonals so their Born
tables can be recomputed without floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from ._rational import as_fraction, format_fraction
from .behaviors import Behavior
from .polytope import GlobalDistribution, ScenarioMismatch
from .scenario import Scenario

DEFAULT_TOLERANCE = 1e-9


class DimensionMismatch(ValueError):
    pass


class RealizationError(ValueError):
    pass


def outcome_encoding(scenario: Scenario) -> dict[str, float]:
    """Real eigenvalue attached to each outcome.

    Dichotomic scenarios use bottom -> -1, top -> +1 (first, second declared
    outcome); larger outcome sets use their declaration index 0, 1, 2, ...
    """
    if len(scenario.outcomes) == 2:
        return {scenario.outcomes[0]: -1.0, scenario.outcomes[1]: 1.0}
    return {o: float(i) for i, o in enumerate(scenario.outcomes)}


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    failed_condition: str | None = None
    discrepancies: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "realization reproduces the behavior"
        first = self.discrepancies[0] if self.discrepancies else ""
        return f"failed condition ({self.failed_condition}): {first}"


# -- classical ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassicalRealization:
    """Finite probability space (states, measure) and one response function per measurement."""

    scenario: Scenario
    states: tuple[str, ...]
    measure: dict[str, Fraction]
    responses: dict[str, dict[str, str]]

    def __post_init__(self):
        s = self.scenario
        states = tuple(self.states)
        if len(set(states)) != len(states) or not states:
            raise RealizationError("hidden states must be a non-empty duplicate-free collection")
        measure = {}
        for lam in states:
            mu = as_fraction(self.measure.get(lam, 0))
            if mu < 0:
                raise RealizationError(f"negative measure on state {lam!r}")
            measure[lam] = mu
        if set(self.measure) - set(states):
            raise RealizationError("measure mentions undeclared states")
        if sum(measure.values(), Fraction(0)) != 1:
            raise RealizationError("measure does not sum to 1")
        if set(self.responses) != set(s.measurements):
            raise ScenarioMismatch("response functions must cover exactly the scenario's measurements")
        for a, f in self.responses.items():
            if set(f) != set(states):
                raise RealizationError(f"response function of {a} is not total on the states")
            bad = [o for o in f.values() if o not in s.outcomes]
            if bad:
                raise RealizationError(f"response function of {a} returns unknown outcomes {bad}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "responses", {a: dict(f) for a, f in self.responses.items()})

    def joint_distribution(self, k: int) -> dict[tuple[str, ...], Fraction]:
        ctx = self.scenario.contexts[k]
        out = {o: Fraction(0) for o in itertools.product(self.scenario.outcomes, repeat=len(ctx))}
        for lam, mu in self.measure.items():
            if mu:
                out[tuple(self.responses[a][lam] for a in ctx)] += mu
        return out

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "measure": {lam: format_fraction(mu) for lam, mu in self.measure.items()},
            "responses": {a: dict(f) for a, f in self.responses.items()},
        }


def classical_from_json(doc: Mapping, scenario: Scenario) -> ClassicalRealization:
    if not isinstance(doc, Mapping) or set(doc) != {"states", "measure", "responses"}:
        raise RealizationError("classical realization needs exactly 'states', 'measure', 'responses'")
    try:
        measure = {lam: as_fraction(mu) for lam, mu in doc["measure"].items()}
    except (TypeError, ValueError, AttributeError) as exc:
        raise RealizationError(f"bad measure: {exc}") from None
    return ClassicalRealization(scenario, tuple(doc["states"]), measure, dict(doc["responses"]))


def verify_classical(realization: ClassicalRealization, behavior: Behavior) -> VerificationReport:
    """mu(intersection of f_A^{-1}(s_A)) == p(s|C) exactly, for every C and s."""
    s = behavior.scenario
    if realization.scenario != s:
        raise ScenarioMismatch("realization and behavior live on different scenarios")
    discrepancies = []
    for k in range(len(s.contexts)):
        joint = realization.joint_distribution(k)
        for key, p in behavior.tables[k].items():
            if joint[key] != p:
                discrepancies.append({"context": s.context_id(k), "outcome": key,
                                      "behavior": p, "realization": joint[key]})
    if discrepancies:
        return VerificationReport(False, "classical", discrepancies)
    return VerificationReport(True)


def _state_label(t: tuple[str, ...]) -> str:
    return ",".join(t)


def nc_to_classical(witness: GlobalDistribution) -> ClassicalRealization:
    """States = all global assignments, measure = the witness, f_A = evaluation at A."""
    s = witness.scenario
    assignments = list(s.global_assignments())
    states = tuple(_state_label(t) for t in assignments)
    measure = {lab: witness[t] for lab, t in zip(states, assignments)}
    responses = {a: {lab: t[i] for lab, t in zip(states, assignments)}
                 for i, a in enumerate(s.measurements)}
    return ClassicalRealization(s, states, measure, responses)


# -- quantum -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumRealization:
    """Density matrix and, per measurement, one projector per outcome.

    Observables are derived as T_A = sum_o enc(o) P_o with ``outcome_encoding``.
    ``exact_rho`` / ``exact_projectors`` hold rational diagonals when the
    realization is diagonal and was built exactly.
    """

    scenario: Scenario
    dimension: int
    rho: np.ndarray
    projectors: dict[str, dict[str, np.ndarray]]
    exact_rho: tuple[Fraction, ...] | None = None
    exact_projectors: dict[str, dict[str, tuple[int, ...]]] | None = None

    def __post_init__(self):
        d = self.dimension
        if not isinstance(d, int) or d < 1:
            raise DimensionMismatch(f"dimension must be a positive integer, got {d!r}")
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (d, d):
            raise DimensionMismatch(f"rho has shape {rho.shape}, expected {(d, d)}")
        if set(self.projectors) != set(self.scenario.measurements):
            raise ScenarioMismatch("projectors must cover exactly the scenario's measurements")
        projectors = {}
        for a, family in self.projectors.items():
            if set(family) != set(self.scenario.outcomes):
                raise ScenarioMismatch(f"{a}: projectors must be keyed by every outcome")
            projectors[a] = {}
            for o, p in family.items():
                p = np.asarray(p, dtype=complex)
                if p.shape != (d, d):
                    raise DimensionMismatch(f"projector {a}={o} has shape {p.shape}, expected {(d, d)}")
                projectors[a][o] = p
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "projectors", projectors)

    def observable(self, measurement: str) -> np.ndarray:
        enc = outcome_encoding(self.scenario)
        return sum(enc[o] * p for o, p in self.projectors[measurement].items())

    def born_table(self, k: int) -> dict[tuple[str, ...], float]:
        ctx = self.scenario.contexts[k]
        out = {}
        for key in itertools.product(self.scenario.outcomes, repeat=len(ctx)):
            prod = np.eye(self.dimension, dtype=complex)
            for a, o in zip(ctx, key):
                prod = prod @ self.projectors[a][o]
            out[key] = complex(np.trace(self.rho @ prod))
        return out

    def exact_born_behavior(self) -> Behavior:
        """Born tables in rational arithmetic; only for exact diagonal realizations."""
        if self.exact_rho is None or self.exact_projectors is None:
            raise RealizationError("realization carries no exact diagonal data")
        s = self.scenario
        tables = []
        for ctx in s.contexts:
            table = {}
            for key in itertools.product(s.outcomes, repeat=len(ctx)):
                table[key] = sum((r for i, r in enumerate(self.exact_rho)
                                  if all(self.exact_projectors[a][o][i] for a, o in zip(ctx, key))),
                                 Fraction(0))
            tables.append(table)
        return Behavior(s, tuple(tables))

    def to_json(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]
        return {
            "dimension": self.dimension,
            "rho": mat(self.rho),
            "projectors": {a: {o: mat(p) for o, p in fam.items()} for a, fam in self.projectors.items()},
        }


def _matrix_from_json(raw, d: int) -> np.ndarray:
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in raw], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise RealizationError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if m.shape != (d, d):
        raise DimensionMismatch(f"matrix has shape {m.shape}, expected {(d, d)}")
    return m


def quantum_from_json(doc: Mapping[str, Any], scenario: Scenario) -> QuantumRealization:
    if not isinstance(doc, Mapping) or set(doc) != {"dimension", "rho", "projectors"}:
        raise RealizationError("quantum realization needs exactly 'dimension', 'rho', 'projectors'")
    d = doc["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise DimensionMismatch(f"bad dimension {d!r}")
    projectors = {a: {o: _matrix_from_json(m, d) for o, m in fam.items()}
                  for a, fam in doc["projectors"].items()}
    return QuantumRealization(scenario, d, _matrix_from_json(doc["rho"], d), projectors)


def classical_to_quantum(realization: ClassicalRealization) -> QuantumRealization:
    """Diagonal lift: one basis vector per hidden state, rho = diag(mu)."""
    s = realization.scenario
    states = realization.states
    exact_rho = tuple(realization.measure[lam] for lam in states)
    exact_projectors = {
        a: {o: tuple(int(realization.responses[a][lam] == o) for lam in states) for o in s.outcomes}
        for a in s.measurements
    }
    rho = np.diag([float(mu) for mu in exact_rho]).astype(complex)
    projectors = {a: {o: np.diag(np.array(diag, dtype=float)).astype(complex) for o, diag in fam.items()}
                  for a, fam in exact_projectors.items()}
    return QuantumRealization(s, len(states), rho, projectors, exact_rho, exact_projectors)


def verify_quantum(realization: QuantumRealization, behavior: Behavior,
                   tolerance: float = DEFAULT_TOLERANCE) -> VerificationReport:
    """Check state validity, then (a) spectrum, (b) commutation, (c) Born rule.

    Stops at the first failing condition and reports its witness values.
    """
    s = behavior.scenario
    if realization.scenario != s:
        raise ScenarioMismatch("realization and behavior live on different scenarios")
    tol = tolerance
    d = realization.dimension
    eye = np.eye(d)
    rho = realization.rho

    problems = []
    if np.abs(rho - rho.conj().T).max() > tol:
        problems.append({"check": "rho self-adjoint", "deviation": float(np.abs(rho - rho.conj().T).max())})
    else:
        low = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
        if low < -tol:
            problems.append({"check": "rho positive semidefinite", "min_eigenvalue": low})
    tr = complex(np.trace(rho))
    if abs(tr - 1) > tol:
        problems.append({"check": "unit trace", "trace": tr})
    if problems:
        return VerificationReport(False, "state", problems)

    # (a) outcomes <-> nonzero spectral projectors of T_A
    for a in s.measurements:
        family = realization.projectors[a]
        total = np.zeros((d, d), dtype=complex)
        for o, p in family.items():
            for check, dev in (("self-adjoint", p - p.conj().T), ("idempotent", p @ p - p)):
                if np.abs(dev).max() > tol:
                    problems.append({"measurement": a, "outcome": o, "check": check,
                                     "deviation": float(np.abs(dev).max())})
            if np.linalg.norm(p) <= tol:
                problems.append({"measurement": a, "outcome": o, "check": "nonzero projector"})
            total = total + p
        for o1, o2 in itertools.combinations(family, 2):
            dev = np.abs(family[o1] @ family[o2]).max()
            if dev > tol:
                problems.append({"measurement": a, "outcomes": (o1, o2), "check": "orthogonal",
                                 "deviation": float(dev)})
        dev = np.abs(total - eye).max()
        if dev > tol:
            problems.append({"measurement": a, "check": "resolution of identity", "deviation": float(dev)})
    if problems:
        return VerificationReport(False, "a", problems)

    # (b) observables of a context commute
    for k, ctx in enumerate(s.contexts):
        for a, b in itertools.combinations(ctx, 2):
            ta, tb = realization.observable(a), realization.observable(b)
            norm = float(np.linalg.norm(ta @ tb - tb @ ta, 2))
            if norm > tol:
                problems.append({"context": s.context_id(k), "pair": (a, b), "commutator_norm": norm})
    if problems:
        return VerificationReport(False, "b", problems)

    # (c) Born rule
    for k in range(len(s.contexts)):
        born = realization.born_table(k)
        for key, p in behavior.tables[k].items():
            q = born[key]
            if abs(q - float(p)) > tol:
                problems.append({"context": s.context_id(k), "outcome": key,
                                 "behavior": p, "born": q.real if abs(q.imag) <= tol else q})
    if problems:
        return VerificationReport(False, "c", problems)
    return VerificationReport(True)
