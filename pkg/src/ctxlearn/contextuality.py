"""Behaviour geometry, the noncontextuality inequality, and the linear
feasibility test for noncontextual ontological models.

A *behaviour* is the vector of the three tasks' +1-label probabilities for
one input.  Models that encode the zero-sum bias only produce behaviours on
the plane p1 + p2 + p3 = 3/2, whose intersection with the unit cube is a
hexagon.  Noncontextual models are further confined: the set of behaviours
they can realise for six preparations with the standard mixing equivalences
is characterised by a 36-variable linear feasibility system, and membership
of the shrunken hexagon vertices flips from feasible to infeasible at noise
parameter 2/3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import joint_marginals, validate_joint
from .linfeas import solve_equality_feasibility

#: Bias plane level: behaviours must satisfy p1 + p2 + p3 = 3/2.
BIAS_SUM = 1.5

CENTER = np.array([0.5, 0.5, 0.5])

# The six extremal behaviours of the bias hexagon, in canonical order.
_HEXAGON_FRAC = (
    (1, 0, Fraction(1, 2)),
    (0, 1, Fraction(1, 2)),
    (Fraction(1, 2), 1, 0),
    (Fraction(1, 2), 0, 1),
    (0, Fraction(1, 2), 1),
    (1, Fraction(1, 2), 0),
)

#: Column order of a response vertex: (E1+, E2+, E3+, E1-, E2-, E3-, trivial, null).
RESPONSE_COLUMNS = ("E1+", "E2+", "E3+", "E1-", "E2-", "E3-", "omega", "null")


def bias_hexagon():
    """The six extremal behaviours of the bias plane, as a (6, 3) array."""
    return np.array(_HEXAGON_FRAC, dtype=np.float64)


def check_bias(behaviour, tol):
    """Whether a behaviour lies on the bias plane within ``tol``."""
    b = np.asarray(behaviour, dtype=np.float64)
    if b.shape != (3,):
        raise ValueError("behaviour must be a vector of three probabilities")
    return abs(float(b.sum()) - BIAS_SUM) <= tol


def shrunken_vertices(eta):
    """Hexagon vertices mixed towards the centre: ``eta*v_i + (1-eta)*centre``.

    Accepts a float or an exact ``Fraction``; with a Fraction the result is
    a list of exact rational vertices suitable for the exact feasibility
    mode.
    """
    if isinstance(eta, Fraction):
        if not 0 <= eta <= 1:
            raise ValueError("eta must lie in [0, 1]")
        half = Fraction(1, 2)
        return [
            tuple(eta * v + (1 - eta) * half for v in vertex)
            for vertex in _HEXAGON_FRAC
        ]
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    return eta * bias_hexagon() + (1.0 - eta) * CENTER


def response_vertices():
    """The six extremal response vectors of the noncontextual polytope.

    These are the vertices of the polygon 0 <= a, b <= 1,
    1/2 <= a + b <= 3/2 lifted to eight effect coordinates via
    c = 3/2 - a - b and the normalisation/trivial-effect constraints.
    Ordered so the (E1+, E2+, E3+) part of row i equals vertex i of
    :func:`bias_hexagon`.
    """
    return np.array(_response_vertices_frac(), dtype=np.float64)


def _response_vertices_frac():
    out = []
    for plus in _HEXAGON_FRAC:
        row = list(plus) + [1 - v for v in plus] + [1, 0]
        out.append(tuple(row))
    return out


def hull_contains(points, target, tol=1e-9):
    """Whether ``target`` is a convex combination of the given behaviours.

    All points (and the target) must lie on the bias plane within 1e-9.
    Decided by linear feasibility over the convex weights.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 1:
        raise ValueError("points must be a non-empty (m, 3) array")
    for p in points:
        if not check_bias(p, 1e-9):
            raise ValueError(f"point {p} violates the bias plane")
    target = np.asarray(target, dtype=np.float64)
    A = np.vstack([points.T, np.ones((1, points.shape[0]))])
    b = np.concatenate([target, [1.0]])
    return solve_equality_feasibility(A, b, tol=tol) is not None


def nc_feasible(targets, *, exact=None):
    """Solve the noncontextual-model feasibility system for six behaviours.

    The unknowns are the 6x6 mixing weights nu[j, i] expressing the
    statistics of preparation j as a mixture of the six extremal response
    vectors.  Constraints: the mixtures reproduce the target behaviours,
    each row of nu is a probability distribution, and the three pairwise
    preparation mixtures (1,2), (3,4), (5,6) coincide componentwise.

    Args:
        targets: six behaviours (floats, or exact rationals for the exact
            mode).  Each must satisfy the bias within 1e-9.
        exact: force exact rational arithmetic; by default enabled when
            every target entry is a Fraction or int.

    Returns:
        The witness ``nu`` as a (6, 6) array (rows = preparations) when
        feasible, else ``None``.
    """
    rows = [list(t) for t in targets]
    if len(rows) != 6 or any(len(r) != 3 for r in rows):
        raise ValueError("expected six behaviours of three probabilities")
    if exact is None:
        exact = all(
            isinstance(v, (Fraction, int)) and not isinstance(v, bool)
            for r in rows
            for v in r
        )
    for r in rows:
        if not check_bias([float(v) for v in r], 1e-9):
            raise ValueError(f"behaviour {r} violates the bias plane")

    xi = _response_vertices_frac() if exact else response_vertices()
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)

    def var(j, i):
        return 6 * j + i

    A = []
    b = []
    # Reproduce the targets: sum_i nu[j,i] * xi[i][k] = targets[j][k].
    for j in range(6):
        for k in range(3):
            row = [zero] * 36
            for i in range(6):
                row[var(j, i)] = xi[i][k]
            A.append(row)
            b.append(rows[j][k])
    # Each nu[j] is a probability distribution over the six vertices.
    for j in range(6):
        row = [zero] * 36
        for i in range(6):
            row[var(j, i)] = one
        A.append(row)
        b.append(one)
    # Equal pairwise mixtures: nu1+nu2 = nu3+nu4 = nu5+nu6 componentwise.
    for ja, jb in ((0, 2), (2, 4)):
        for i in range(6):
            row = [zero] * 36
            row[var(ja, i)] = one
            row[var(ja + 1, i)] = one
            row[var(jb, i)] = -one
            row[var(jb + 1, i)] = -one
            A.append(row)
            b.append(zero)

    x = solve_equality_feasibility(A, b, exact=exact)
    if x is None:
        return None
    if exact:
        return np.array([[float(x[var(j, i)]) for i in range(6)] for j in range(6)])
    return x.reshape(6, 6)


def inequality_value(s1, s3, s5):
    """Left-hand side of the noncontextuality inequality (bound 5/2).

    Sums task 1's +1 probability under the first behaviour, task 2's under
    the second and task 3's under the third.
    """
    vals = []
    for k, s in enumerate((s1, s3, s5)):
        s = np.asarray(s, dtype=np.float64)
        if not check_bias(s, 1e-9):
            raise ValueError(f"behaviour {s} violates the bias plane")
        vals.append(float(s[k]))
    return float(sum(vals))


@dataclass(frozen=True)
class ContextualityCertificate:
    """Outcome of certifying a set of model behaviours.

    ``eta_star`` is the largest noise parameter such that every shrunken
    hexagon vertex is a convex combination of the given behaviours;
    ``inequality_value`` is the best achievable left-hand side of the
    noncontextuality inequality over the set (bound 5/2); the verdict is
    ``"contextual"`` only when eta_star clears 2/3 beyond the bisection
    tolerance.
    """

    eta_star: float
    inequality_value: float
    verdict: str


def certify(behaviours, *, tol=1e-6, max_iter=60):
    """Certify contextuality from a finite set of attainable behaviours.

    Bisects for the largest eta whose six shrunken vertices all lie in the
    convex hull of ``behaviours``.  A model whose behaviour set passes
    eta > 2/3 cannot be realised noncontextually.
    """
    pts = np.asarray(behaviours, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
        raise ValueError("behaviours must be a non-empty (m, 3) array")

    def contains_all(eta):
        u = shrunken_vertices(eta)
        return all(hull_contains(pts, target) for target in u)

    if not contains_all(0.0):
        eta_star = 0.0
    elif contains_all(1.0):
        eta_star = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(max_iter):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if contains_all(mid):
                lo = mid
            else:
                hi = mid
        eta_star = lo

    best = float(pts[:, 0].max() + pts[:, 1].max() + pts[:, 2].max())
    verdict = "contextual" if eta_star > 2.0 / 3.0 + tol else "not-certified"
    return ContextualityCertificate(
        eta_star=eta_star, inequality_value=best, verdict=verdict
    )


def product_joint_behaviours(behaviours):
    """Product joints for a list of behaviours (independent task labels)."""
    from .game import product_joint

    return [product_joint(b) for b in behaviours]


def joint_equivalence_check(joints, tol=1e-9):
    """Compare the three pairwise preparation mixtures of six joints.

    Mixes the six joint label distributions pairwise, (1,2), (3,4), (5,6),
    with weight 1/2 and reports whether the mixtures agree on per-task
    marginals and on the full eight-entry joints.  Behaviour sets built
    from independent task labels typically agree on marginals but not on
    joints, which is what blocks lifting the preparation equivalence to
    the joint model.

    Returns:
        ``(marginals_equal, joints_equal)`` booleans.
    """
    joints = [validate_joint(j) for j in joints]
    if len(joints) != 6:
        raise ValueError("expected six joint label distributions")
    mixtures = [0.5 * (joints[j] + joints[j + 1]) for j in (0, 2, 4)]
    marg = [joint_marginals(m) for m in mixtures]
    marginals_equal = bool(
        np.abs(marg[0] - marg[1]).max() <= tol
        and np.abs(marg[0] - marg[2]).max() <= tol
    )
    joints_equal = bool(
        np.abs(mixtures[0] - mixtures[1]).max() <= tol
        and np.abs(mixtures[0] - mixtures[2]).max() <= tol
    )
    return marginals_equal, joints_equal


def generalized_bias_residual(marginals, C, tol=1e-9):
    """Residual of the shifted conserved-sum condition for shifted labels.

    ``marginals`` holds one row per task, each a distribution over the
    shifted label values {0, ..., 2C}.  After shifting by C, a conserved
    zero sum over N tasks forces sum_k E[Y'_k] = N*C; the returned value
    is ``sum_k sum_y P_k(y) * y - N * C`` and vanishes exactly when the
    generalized bias holds.
    """
    m = np.asarray(marginals, dtype=np.float64)
    if int(C) != C or C < 1:
        raise ValueError("C must be an integer >= 1")
    C = int(C)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] != 2 * C + 1:
        raise ValueError("marginals must be (N, 2C+1) with N >= 2")
    if (m < -tol).any() or (np.abs(m.sum(axis=1) - 1.0) > tol).any():
        raise ValueError("each row must be a probability distribution")
    y = np.arange(2 * C + 1, dtype=np.float64)
    return float((m @ y).sum() - m.shape[0] * C)
