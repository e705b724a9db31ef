"""Exact feasibility of {x >= 0 : A x = b} over the rationals.

Two stages:

1. Incremental Gaussian elimination on [A | b] drops rows that are linear
   combinations of earlier rows. If some combination y has y^T A = 0 but
   y^T b != 0 the system is inconsistent and y is already a certificate.
2. Phase-one simplex (artificial variables, Bland's rule) on the remaining
   full-rank rows. A positive optimum is turned into a Farkas vector from
   the optimal dual.

Every infeasible answer carries z with A^T z >= 0 and b^T z < 0, which is
checked before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    x: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None
    kept_rows: tuple[int, ...] = ()
    pivots: int = 0


class SimplexError(RuntimeError):
    pass


def _independent_rows(A, b):
    """Return (kept row indices, None) or (None, inconsistency combination)."""
    m = len(A)
    echelon = []  # (pivot col, reduced row, reduced rhs, combination over original rows)
    kept = []
    for r in range(m):
        row = list(A[r])
        rhs = b[r]
        comb = {r: Fraction(1)}
        for col, prow, prhs, pcomb in echelon:
            f = row[col]
            if f:
                for j, v in enumerate(prow):
                    if v:
                        row[j] -= f * v
                rhs -= f * prhs
                for i, v in pcomb.items():
                    comb[i] = comb.get(i, ZERO) - f * v
        col = next((j for j, v in enumerate(row) if v), None)
        if col is None:
            if rhs:
                return None, {i: v for i, v in comb.items() if v}
            continue
        piv = row[col]
        row = [v / piv for v in row]
        rhs /= piv
        comb = {i: v / piv for i, v in comb.items()}
        # keep the echelon fully reduced so later rows see a clean basis
        new = []
        for pcol, prow, prhs, pcomb in echelon:
            f = prow[col]
            if f:
                prow = [pv - f * v for pv, v in zip(prow, row)]
                prhs -= f * rhs
                pcomb = dict(pcomb)
                for i, v in comb.items():
                    pcomb[i] = pcomb.get(i, ZERO) - f * v
            new.append((pcol, prow, prhs, pcomb))
        new.append((col, row, rhs, comb))
        echelon = new
        kept.append(r)
    return kept, None


def _phase_one(A, b):
    """Minimise the sum of artificials. Returns (objective, x, dual y, pivots)."""
    m, n = len(A), len(A[0]) if A else 0
    sign = [1 if v >= 0 else -1 for v in b]
    width = n + m
    # tableau rows: coefficients over x then artificials, last entry rhs
    T = []
    for i in range(m):
        row = [sign[i] * v for v in A[i]] + [ZERO] * m + [sign[i] * b[i]]
        row[n + i] = Fraction(1)
        T.append(row)
    basis = [n + i for i in range(m)]
    cost = [ZERO] * n + [Fraction(1)] * m
    # reduced costs: c_j - sum_i c_B(i) T[i][j]; last entry is -objective
    z = [cost[j] - sum(T[i][j] for i in range(m)) for j in range(width)]
    z.append(-sum(T[i][-1] for i in range(m)))

    pivots = 0
    while True:
        enter = next((j for j in range(width) if z[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # cannot happen: phase one is bounded below by 0
            raise SimplexError("unbounded phase-one problem")
        prow = T[leave]
        p = prow[enter]
        if p != 1:
            prow = [v / p for v in prow]
            T[leave] = prow
        nz = [(j, v) for j, v in enumerate(prow) if v]
        for i in range(m):
            if i != leave:
                f = T[i][enter]
                if f:
                    row = T[i]
                    for j, v in nz:
                        row[j] -= f * v
        f = z[enter]
        for j, v in nz:
            z[j] -= f * v
        basis[leave] = enter
        pivots += 1

    objective = -z[-1]
    x = [ZERO] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i][-1]
    # artificial columns hold B^{-1}; y_i = c_B B^{-1} e_i = 1 - reduced cost of artificial i
    y = [sign[i] * (Fraction(1) - z[n + i]) for i in range(m)]
    return objective, x, y, pivots


def check_farkas(A, b, z) -> bool:
    """True iff A^T z >= 0 and b^T z < 0 (so A x = b, x >= 0 has no solution)."""
    n = len(A[0]) if A else 0
    for j in range(n):
        if sum((A[i][j] * z[i] for i in range(len(A)) if z[i]), ZERO) < 0:
            return False
    return sum((bi * zi for bi, zi in zip(b, z)), ZERO) < 0


def solve_feasibility(A: Sequence[Sequence], b: Sequence) -> FeasibilityResult:
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    if len(A) != len(b):
        raise ValueError("A and b disagree on the number of rows")
    m = len(A)
    n = len(A[0]) if A else 0
    if any(len(row) != n for row in A):
        raise ValueError("ragged constraint matrix")

    kept, comb = _independent_rows(A, b)
    if comb is not None:
        beta = sum((b[i] * v for i, v in comb.items()), ZERO)
        scale = -1 if beta > 0 else 1
        z = [ZERO] * m
        for i, v in comb.items():
            z[i] = scale * v
        if not check_farkas(A, b, z):
            raise SimplexError("elimination certificate failed verification")
        return FeasibilityResult(False, farkas=tuple(z))

    if not kept:
        return FeasibilityResult(True, x=tuple([ZERO] * n))
    objective, x, y, pivots = _phase_one([A[i] for i in kept], [b[i] for i in kept])
    if objective == 0:
        for i in range(m):
            if sum((A[i][j] * x[j] for j in range(n) if x[j]), ZERO) != b[i]:
                raise SimplexError(f"basic solution violates row {i}")
        return FeasibilityResult(True, x=tuple(x), kept_rows=tuple(kept), pivots=pivots)
    z = [ZERO] * m
    for i, yi in zip(kept, y):
        z[i] = -yi
    if not check_farkas(A, b, z):
        raise SimplexError("phase-one dual failed Farkas verification")
    return FeasibilityResult(False, farkas=tuple(z), kept_rows=tuple(kept), pivots=pivots)
