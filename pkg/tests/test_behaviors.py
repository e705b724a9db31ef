import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hypercontext.behaviors import (
    Behavior, BehaviorError, SubsetNotInContext, behavior_from_json, check_nondisturbance,
    marginalize,
)
from hypercontext.scenario import BOT, TOP, build_n_cycle

from conftest import brute_force_marginals, random_behavior, random_mixture

HALF = Fraction(1, 2)


def test_coin_toss_tables(coin_toss):
    for k in range(5):
        assert coin_toss.table(k) == {(BOT, TOP): HALF, (TOP, BOT): HALF, (BOT, BOT): 0, (TOP, TOP): 0}


def test_coin_toss_single_marginals(coin_toss):
    for k, ctx in enumerate(coin_toss.scenario.contexts):
        for m in ctx:
            assert marginalize(coin_toss, k, [m]).table == {(BOT,): HALF, (TOP,): HALF}


def test_coin_toss_is_nondisturbing(coin_toss):
    report = check_nondisturbance(coin_toss)
    assert report.nondisturbing and report.violations == ()


def test_rearranged_tables(rearranged):
    for k in range(4):
        assert rearranged.table(k) == {(TOP, BOT): HALF, (BOT, TOP): HALF, (BOT, BOT): 0, (TOP, TOP): 0}
    assert rearranged.table("A4,A0") == {(TOP, TOP): HALF, (BOT, BOT): HALF, (BOT, TOP): 0, (TOP, BOT): 0}


def test_identity_marginalization(coin_toss):
    m = marginalize(coin_toss, 2, ["A2", "A3"])
    assert m.table == coin_toss.table(2)


def test_deterministic_marginal():
    s = build_n_cycle(5)
    tables = {k: {(TOP, TOP): 1} for k in range(5)}
    b = Behavior.from_tables(s, tables)
    assert marginalize(b, 0, ["A1"]).table == {(BOT,): 0, (TOP,): 1}


def test_subset_outside_context(coin_toss):
    with pytest.raises(SubsetNotInContext):
        marginalize(coin_toss, 0, ["A2"])


def test_disturbance_detected():
    s = build_n_cycle(5)
    tables = {0: {(BOT, TOP): 1}, 1: {(BOT, TOP): 1}, 2: {(TOP, BOT): 1}, 3: {(BOT, TOP): 1}, 4: {(TOP, BOT): 1}}
    report = check_nondisturbance(Behavior.from_tables(s, tables))
    assert not report.nondisturbing
    pairs = {(v.context_a, v.context_b) for v in report.violations}
    assert ("A0,A1", "A1,A2") in pairs
    v = next(v for v in report.violations if (v.context_a, v.context_b) == ("A0,A1", "A1,A2"))
    assert v.intersection == ("A1",)
    assert v.marginal_a == {(BOT,): 0, (TOP,): 1} and v.marginal_b == {(BOT,): 1, (TOP,): 0}


@pytest.mark.parametrize("tables, match", [
    ({k: {(TOP, TOP): HALF} for k in range(5)}, "sum"),
    ({k: {(TOP, TOP): 2, (BOT, BOT): -1} for k in range(5)}, "outside"),
    ({k: {(TOP, "?"): 1} for k in range(5)}, "unknown"),
])
def test_invalid_tables(tables, match):
    with pytest.raises(BehaviorError, match=match):
        Behavior.from_tables(build_n_cycle(5), tables)


def test_missing_table():
    with pytest.raises(BehaviorError, match="no table"):
        Behavior.from_tables(build_n_cycle(3), {0: {(TOP, TOP): 1}})


def test_float_probabilities_refused():
    with pytest.raises(TypeError):
        Behavior.from_tables(build_n_cycle(3), {k: {(TOP, TOP): 1.0} for k in range(3)})


def test_json_round_trip(coin_toss):
    doc = json.loads(json.dumps(coin_toss.to_json()))
    assert doc["tables"]["A4,A0"]["⊥,⊤"] == "1/2"
    assert behavior_from_json(doc) == coin_toss


def test_json_scenario_reference(rearranged):
    doc = rearranged.to_json()
    doc["scenario"] = "cycle:5"
    assert behavior_from_json(doc) == rearranged


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(bogus=1),
    lambda d: d["tables"]["A0,A1"].update({"⊤,⊤": "0.5"}),
    lambda d: d["tables"].update({"A0,A2": {}}),
    lambda d: d["tables"]["A0,A1"].update({"⊤,⊤": "1/2"}),
])
def test_json_strictness(coin_toss, mutate):
    doc = coin_toss.to_json()
    mutate(doc)
    with pytest.raises(BehaviorError):
        behavior_from_json(doc)


def test_global_mixture_marginals_are_nondisturbing():
    rng = random.Random(7)
    for n in (3, 4, 5):
        s = build_n_cycle(n)
        for _ in range(20):
            b = Behavior(s, tuple(brute_force_marginals(s, random_mixture(rng, s))))
            assert check_nondisturbance(b).nondisturbing


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_marginalization_chains(seed, width):
    """E -> E' -> E'' equals E -> E'' on a random behavior with wide contexts."""
    rng = random.Random(seed)
    labels = tuple(f"M{i}" for i in range(width + 1))
    from hypercontext.scenario import Scenario
    s = Scenario(labels, (labels,), ("x", "y", "z"))
    b = random_behavior(rng, s)
    for r in range(len(labels) + 1):
        for sub in itertools.combinations(labels, r):
            direct_full = marginalize(b, 0, sub)
            for r2 in range(len(sub) + 1):
                for subsub in itertools.combinations(sub, r2):
                    direct = marginalize(b, 0, subsub)
                    # second step: marginalise the intermediate table by hand
                    pos = [direct_full.subset.index(m) for m in direct.subset]
                    chained = {k: Fraction(0) for k in direct.table}
                    for key, p in direct_full.table.items():
                        chained[tuple(key[i] for i in pos)] += p
                    assert chained == direct.table
                    assert sum(direct.table.values()) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 6))
def test_normalization_exact(seed, n):
    b = random_behavior(random.Random(seed), build_n_cycle(n))
    for table in b.tables:
        assert sum(table.values()) == 1 and all(0 <= p <= 1 for p in table.values())
