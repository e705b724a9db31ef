import json
import random
from fractions import Fraction

import numpy as np
import pytest

from hypercontext.behaviors import Behavior, check_nondisturbance
from hypercontext.polytope import GlobalDistribution, ScenarioMismatch, decide_noncontextual, point_mass
from hypercontext.realizations import (
    ClassicalRealization, DimensionMismatch, QuantumRealization, RealizationError, classical_from_json,
    classical_to_quantum, nc_to_classical, quantum_from_json, verify_classical, verify_quantum,
)
from hypercontext.scenario import BOT, TOP, build_n_cycle

from conftest import brute_force_marginals, random_mixture

TAU = 1e-9


def single_state(scenario):
    return ClassicalRealization(scenario, ("λ",), {"λ": 1}, {a: {"λ": TOP} for a in scenario.measurements})


def test_paper_section_realization(rearranged, paper_section):
    cr = nc_to_classical(GlobalDistribution(rearranged.scenario, paper_section))
    assert len(cr.states) == 32 and sum(1 for mu in cr.measure.values() if mu) == 2
    assert verify_classical(cr, rearranged).ok


def test_single_state_all_top():
    s = build_n_cycle(5)
    assert verify_classical(single_state(s), point_mass(s, (TOP,) * 5).induced_behavior()).ok


def test_single_state_fails_coin_toss(coin_toss):
    report = verify_classical(single_state(coin_toss.scenario), coin_toss)
    assert not report.ok and report.failed_condition == "classical"
    assert {d["context"] for d in report.discrepancies} == {coin_toss.scenario.context_id(k) for k in range(5)}


def test_point_mass_lift_is_deterministic():
    s = build_n_cycle(5)
    t = (TOP, BOT, BOT, TOP, BOT)
    cr = nc_to_classical(point_mass(s, t))
    assert [cr.measure[lam] for lam in cr.states].count(1) == 1
    q = classical_to_quantum(cr)
    assert np.linalg.matrix_rank(q.rho) == 1
    assert q.exact_born_behavior() == point_mass(s, t).induced_behavior()


def test_quantum_lift_of_rearranged(rearranged, paper_section):
    cr = nc_to_classical(GlobalDistribution(rearranged.scenario, paper_section))
    q = classical_to_quantum(cr)
    assert q.dimension == 32
    # oracle: diagonal traces recomputed directly from the classical data
    for k, ctx in enumerate(rearranged.scenario.contexts):
        for key, p in rearranged.tables[k].items():
            direct = sum(float(cr.measure[lam]) for lam in cr.states
                         if all(cr.responses[a][lam] == o for a, o in zip(ctx, key)))
            assert abs(q.born_table(k)[key] - direct) <= TAU
            assert direct == float(p)
    assert verify_quantum(q, rearranged, TAU).ok
    assert q.exact_born_behavior() == rearranged


def test_lift_commutes(rearranged, paper_section):
    q = classical_to_quantum(nc_to_classical(GlobalDistribution(rearranged.scenario, paper_section)))
    for ctx in rearranged.scenario.contexts:
        a, b = (q.observable(m) for m in ctx)
        assert np.abs(a @ b - b @ a).max() == 0


def _generic(seed=5):
    rng = random.Random(seed)
    s = build_n_cycle(5)
    while True:
        w = random_mixture(rng, s, max_points=4, max_den=50)
        if len(set(w.values())) == len(w) >= 3:
            return s, w


def test_swapped_projector_entries_fail_born_rule():
    s, w = _generic()
    b = Behavior(s, tuple(brute_force_marginals(s, w)))
    cr = nc_to_classical(GlobalDistribution(s, w))
    q = classical_to_quantum(cr)
    assert verify_quantum(q, b, TAU).ok
    # swap the A0 response on two support states with different A0 values and masses
    support = [i for i, lam in enumerate(cr.states) if cr.measure[lam]]
    i, j = next((i, j) for i in support for j in support
                if cr.responses["A0"][cr.states[i]] != cr.responses["A0"][cr.states[j]])
    projectors = {a: {o: p.copy() for o, p in fam.items()} for a, fam in q.projectors.items()}
    for p in projectors["A0"].values():
        p[i, i], p[j, j] = p[j, j], p[i, i]
    bad = QuantumRealization(s, q.dimension, q.rho, projectors)
    # oracle: the same swap applied to the classical response function, tabulated exactly
    responses = {a: dict(f) for a, f in cr.responses.items()}
    li, lj = cr.states[i], cr.states[j]
    responses["A0"][li], responses["A0"][lj] = responses["A0"][lj], responses["A0"][li]
    swapped = ClassicalRealization(s, cr.states, cr.measure, responses)
    expected = [swapped.joint_distribution(k) for k in range(len(s.contexts))]
    assert expected != list(b.tables)
    report = verify_quantum(bad, b, TAU)
    assert not report.ok and report.failed_condition == "c"
    for d in report.discrepancies:
        k = s.context_index(d["context"])
        assert abs(d["born"] - float(expected[k][d["outcome"]])) <= TAU
    assert all(bad.born_table(k)[key] == pytest.approx(float(p), abs=TAU)
               for k in range(len(s.contexts)) for key, p in expected[k].items())


def test_noncommuting_pair_fails_condition_b():
    s = build_n_cycle(3)
    half = 0.5
    plus = np.array([[half, half], [half, half]], dtype=complex)  # |+><+|
    z0 = np.diag([1.0, 0.0]).astype(complex)
    eye = np.eye(2)
    projectors = {
        "A0": {TOP: z0, BOT: eye - z0},
        "A1": {TOP: plus, BOT: eye - plus},
        "A2": {TOP: z0, BOT: eye - z0},
    }
    rho = z0.copy()
    b = Behavior.from_tables(s, {k: {(TOP, TOP): 1} for k in range(3)})
    report = verify_quantum(QuantumRealization(s, 2, rho, projectors), b, TAU)
    assert not report.ok and report.failed_condition == "b"
    assert report.discrepancies[0]["commutator_norm"] > 0.1


def test_spectrum_condition_a():
    s = build_n_cycle(3)
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    projectors = {a: {TOP: eye, BOT: zero} for a in s.measurements}
    b = Behavior.from_tables(s, {k: {(TOP, TOP): 1} for k in range(3)})
    report = verify_quantum(QuantumRealization(s, 2, np.diag([1, 0]), projectors), b, TAU)
    assert report.failed_condition == "a"
    assert any(d["check"] == "nonzero projector" for d in report.discrepancies)


def test_bad_state_rejected():
    s = build_n_cycle(3)
    q = classical_to_quantum(single_state(s))
    bad = QuantumRealization(s, 1, np.array([[2.0]]), q.projectors)
    b = Behavior.from_tables(s, {k: {(TOP, TOP): 1} for k in range(3)})
    assert verify_quantum(bad, b).failed_condition == "state"


def test_dimension_mismatch():
    s = build_n_cycle(3)
    q = classical_to_quantum(single_state(s))
    with pytest.raises(DimensionMismatch):
        QuantumRealization(s, 2, np.eye(2) / 2, q.projectors)


def test_realization_validation():
    s = build_n_cycle(3)
    with pytest.raises(RealizationError):
        ClassicalRealization(s, ("a",), {"a": Fraction(1, 2)}, {m: {"a": TOP} for m in s.measurements})
    with pytest.raises(ScenarioMismatch):
        ClassicalRealization(s, ("a",), {"a": 1}, {"A0": {"a": TOP}})
    with pytest.raises(RealizationError):
        ClassicalRealization(s, ("a", "b"), {"a": 1}, {m: {"a": TOP} for m in s.measurements})


def test_scenario_mismatch(coin_toss):
    with pytest.raises(ScenarioMismatch):
        verify_classical(single_state(build_n_cycle(3)), coin_toss)


def test_json_round_trips(rearranged, paper_section):
    cr = nc_to_classical(GlobalDistribution(rearranged.scenario, paper_section))
    doc = json.loads(json.dumps(cr.to_json()))
    assert verify_classical(classical_from_json(doc, rearranged.scenario), rearranged).ok
    q = classical_to_quantum(cr)
    doc = json.loads(json.dumps(q.to_json()))
    assert doc["rho"][0][0] == [0.0, 0.0]
    assert verify_quantum(quantum_from_json(doc, rearranged.scenario), rearranged).ok


def test_chain_on_fixture_library(coin_toss, rearranged):
    """NC -> classical -> quantum, and every verified quantum behavior is non-disturbing."""
    rng = random.Random(1)
    fixtures = [rearranged, coin_toss]
    for n in (3, 4, 5):
        s = build_n_cycle(n)
        fixtures += [Behavior(s, tuple(brute_force_marginals(s, random_mixture(rng, s)))) for _ in range(5)]
    for b in fixtures:
        d = decide_noncontextual(b)
        if not d.noncontextual:
            continue
        cr = nc_to_classical(d.witness)
        assert verify_classical(cr, b).ok
        q = classical_to_quantum(cr)
        assert verify_quantum(q, b, TAU).ok
        assert q.exact_born_behavior() == b
        assert check_nondisturbance(b).nondisturbing
