import itertools
import random
from fractions import Fraction

import pytest

from hypercontext.behaviors import Behavior, generalized_coin_toss, rearranged_device_behavior
from hypercontext.scenario import build_n_cycle


def brute_force_marginals(scenario, weights):
    """Oracle: marginal tables of a global distribution, by direct enumeration.

    ``weights`` maps global assignments (tuples in measurement order) to mass.
    Shares no code with the package's marginalisation.
    """
    tables = []
    for ctx in scenario.contexts:
        pos = [scenario.measurements.index(m) for m in ctx]
        table = {o: Fraction(0) for o in itertools.product(scenario.outcomes, repeat=len(ctx))}
        for t, w in weights.items():
            table[tuple(t[i] for i in pos)] += w
        tables.append(table)
    return tables


def random_mixture(rng: random.Random, scenario, max_points=4, max_den=12):
    """A random global distribution supported on <= max_points assignments."""
    assignments = list(itertools.product(scenario.outcomes, repeat=len(scenario.measurements)))
    support = rng.sample(assignments, rng.randint(1, max_points))
    raw = [rng.randint(1, max_den) for _ in support]
    total = sum(raw)
    weights = {}
    for t, r in zip(support, raw):
        weights[t] = weights.get(t, Fraction(0)) + Fraction(r, total)
    return weights


def random_behavior(rng: random.Random, scenario, max_den=6):
    """Arbitrary (usually disturbing) behavior with small rational entries."""
    tables = []
    for ctx in scenario.contexts:
        keys = list(itertools.product(scenario.outcomes, repeat=len(ctx)))
        raw = [rng.randint(0, max_den) for _ in keys]
        if not any(raw):
            raw[0] = 1
        tables.append({k: Fraction(r, sum(raw)) for k, r in zip(keys, raw)})
    return Behavior(scenario, tuple(tables))


def random_nondisturbing_cycle(rng: random.Random, n, max_den=8):
    """Non-disturbing n-cycle behavior: fixed single marginals, random consistent joints.

    Each pair table is parametrised by p(top,top) within the Frechet bounds of
    its two marginals, so it often lands outside the NC polytope.
    """
    scenario = build_n_cycle(n)
    # balanced marginals and near-extremal correlations are where contextual points live
    marg = [Fraction(1, 2) if rng.random() < 0.6 else Fraction(rng.randint(1, max_den - 1), max_den)
            for _ in range(n)]  # p(top|A_i)
    tables = []
    for i in range(n):
        a, b = marg[i], marg[(i + 1) % n]
        lo, hi = max(Fraction(0), a + b - 1), min(a, b)
        steps = 8
        r = rng.choice([0, 0, 0, 1, 2, steps // 2, steps - 1, steps])
        tt = lo + (hi - lo) * Fraction(r, steps)
        tables.append({("⊤", "⊤"): tt, ("⊤", "⊥"): a - tt, ("⊥", "⊤"): b - tt, ("⊥", "⊥"): 1 - a - b + tt})
    return Behavior(scenario, tuple(tables))


@pytest.fixture
def coin_toss():
    return generalized_coin_toss()


@pytest.fixture
def rearranged():
    return rearranged_device_behavior()


@pytest.fixture
def paper_section():
    """The two-point global section for the rearranged device."""
    return {("⊤", "⊥", "⊤", "⊥", "⊤"): Fraction(1, 2), ("⊥", "⊤", "⊥", "⊤", "⊥"): Fraction(1, 2)}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
