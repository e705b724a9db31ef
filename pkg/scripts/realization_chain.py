"""Push random noncontextual n-cycle behaviors through witness -> classical -> quantum and time it."""

import argparse
import itertools
import random
import time
from fractions import Fraction

from hypercontext.polytope import GlobalDistribution, decide_noncontextual
from hypercontext.realizations import classical_to_quantum, nc_to_classical, verify_classical, verify_quantum
from hypercontext.scenario import build_n_cycle


def random_nc(rng, scenario, points):
    assignments = list(itertools.product(scenario.outcomes, repeat=len(scenario.measurements)))
    support = rng.sample(assignments, points)
    raw = [rng.randint(1, 20) for _ in support]
    return GlobalDistribution(scenario, {t: Fraction(r, sum(raw)) for t, r in zip(support, raw)}).induced_behavior()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tolerance", type=float, default=1e-9)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    ok = 0
    t0 = time.perf_counter()
    for i in range(args.count):
        s = build_n_cycle(3 + i % 3)
        b = random_nc(rng, s, rng.randint(1, 4))
        d = decide_noncontextual(b)
        cr = nc_to_classical(d.witness)
        q = classical_to_quantum(cr)
        ok += bool(verify_classical(cr, b)) and bool(verify_quantum(q, b, args.tolerance))
    print(f"{ok}/{args.count} passed in {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
