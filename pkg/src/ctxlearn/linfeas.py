"""Linear feasibility of ``A x = b, x >= 0`` via a Phase-I simplex.

The systems solved in this package are tiny (at most 36 variables and 36
equality rows), so a dense tableau with Bland's anti-cycling rule is both
simple and robust.  Two arithmetic modes are supported:

* float64 with an absolute tolerance (default 1e-9), and
* exact rational arithmetic over ``fractions.Fraction``, used for vertex
  cases where the feasibility boundary must be decided exactly.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class SolverError(RuntimeError):
    """Raised when the simplex fails to terminate within its pivot budget."""


def _as_tableau(A, b, exact):
    m = len(A)
    n = len(A[0])
    if exact:
        rows = [[Fraction(v) for v in row] for row in A]
        rhs = [Fraction(v) for v in b]
        zero, one = Fraction(0), Fraction(1)
    else:
        rows = [[float(v) for v in row] for row in A]
        rhs = [float(v) for v in b]
        zero, one = 0.0, 1.0
    # Flip rows so the right-hand side is non-negative.
    for i in range(m):
        if rhs[i] < zero:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    # Columns: n structural, m artificial, then the right-hand side.
    tableau = []
    for i in range(m):
        art = [zero] * m
        art[i] = one
        tableau.append(rows[i] + art + [rhs[i]])
    return tableau, m, n, zero


def solve_equality_feasibility(A, b, *, exact=False, tol=1e-9, max_pivots=20000):
    """Find ``x >= 0`` with ``A x = b``, or report infeasibility.

    Args:
        A: coefficient rows (m x n), floats or exact rationals.
        b: right-hand side (length m).
        exact: run in Fraction arithmetic with zero tolerance.
        tol: absolute pivot/feasibility tolerance in float mode.
        max_pivots: safety cap; Bland's rule guarantees termination, the
            cap only guards against degenerate numerical behaviour.

    Returns:
        The structural solution vector, or ``None`` if infeasible.
    """
    tableau, m, n, zero = _as_tableau(A, b, exact)
    if exact:
        tol = zero
    total = n + m

    # Phase-I objective: minimise the sum of the artificial variables.
    # Reduced-cost row for the initial all-artificial basis.
    cost = [zero] * (total + 1)
    for j in range(n):
        cost[j] = -sum(tableau[i][j] for i in range(m))
    cost[total] = -sum(tableau[i][total] for i in range(m))
    basis = [n + i for i in range(m)]

    for _ in range(max_pivots):
        # Bland: entering column is the lowest index with negative reduced cost.
        enter = -1
        for j in range(total):
            if cost[j] < -tol:
                enter = j
                break
        if enter < 0:
            break
        # Ratio test; ties resolved by the smallest basis variable (Bland).
        leave = -1
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a > tol:
                ratio = tableau[i][total] / a
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            # Phase-I objective is bounded below by 0, so an unbounded
            # direction means the arithmetic has broken down.
            raise SolverError("phase-I simplex found an unbounded direction")
        piv = tableau[leave][enter]
        tableau[leave] = [v / piv for v in tableau[leave]]
        for i in range(m):
            if i != leave:
                f = tableau[i][enter]
                if f != zero:
                    row = tableau[i]
                    prow = tableau[leave]
                    tableau[i] = [row[j] - f * prow[j] for j in range(total + 1)]
        f = cost[enter]
        if f != zero:
            prow = tableau[leave]
            cost = [cost[j] - f * prow[j] for j in range(total + 1)]
        basis[leave] = enter
    else:
        raise SolverError("phase-I simplex exceeded its pivot budget")

    # Objective value = sum of artificials = -cost[rhs] after pivoting.
    objective = -cost[total]
    if objective > (tol if not exact else zero):
        return None

    x = [zero] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tableau[i][total]
    if exact:
        return x
    return np.array([float(v) for v in x], dtype=np.float64)
