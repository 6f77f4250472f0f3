"""Classical surrogate: truncated Fourier-series models over the quantum
feature map, squashed into payoff probabilities by a HardTanh.

Each task has an independent linear model over the full frequency lattice
{-L..L}^6 (cosine and sine coefficients, 2*(2L+1)^6 parameters per task).
The class contains the quantum model class but carries none of its
structure, in particular not the zero-sum bias.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class FrequencyLattice:
    """All integer frequency vectors omega in {-L..L}^6.

    Row order is the mixed-radix encoding of omega + L with the first
    component most significant, so index 0 is (-L,...,-L) and the last
    index is (L,...,L).
    """

    L: int
    vectors: np.ndarray

    @classmethod
    def build(cls, L):
        if L < 0:
            raise ValueError("lattice degree must be non-negative")
        vectors = np.array(
            list(itertools.product(range(-L, L + 1), repeat=6)), dtype=np.int64
        )
        return cls(L=L, vectors=vectors)

    @property
    def size(self):
        return self.vectors.shape[0]

    def index_of(self, omega):
        """Mixed-radix index of a frequency vector."""
        base = 2 * self.L + 1
        idx = 0
        for w in omega:
            if abs(w) > self.L:
                raise ValueError("frequency outside the lattice")
            idx = idx * base + (w + self.L)
        return idx


@dataclass
class SurrogateParams:
    """Per-task cosine/sine coefficients over the frequency lattice."""

    L: int
    alpha: np.ndarray  # (3, (2L+1)^6)
    beta: np.ndarray  # (3, (2L+1)^6)

    def __post_init__(self):
        m = (2 * self.L + 1) ** 6
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        if self.alpha.shape != (3, m) or self.beta.shape != (3, m):
            raise ValueError(f"coefficient arrays must have shape (3, {m})")

    @property
    def n_params_per_task(self):
        return 2 * self.alpha.shape[1]


def feature_map(features):
    """The six model features: (x1, x2, x3, x4*x5, x4*x6, x5*x6)."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape == (3, 2):
        f = f.reshape(6, order="F")
    if f.shape != (6,):
        raise ValueError("features must be a 3x2 matrix or length-6 vector")
    return np.array([f[0], f[1], f[2], f[3] * f[4], f[3] * f[5], f[4] * f[5]])


def feature_map_batch(features):
    """Vectorised :func:`feature_map` for an (n, 6) array."""
    f = np.asarray(features, dtype=np.float64)
    out = np.empty_like(f)
    out[:, :3] = f[:, :3]
    out[:, 3] = f[:, 3] * f[:, 4]
    out[:, 4] = f[:, 3] * f[:, 5]
    out[:, 5] = f[:, 4] * f[:, 5]
    return out


def design_matrices(features, lattice):
    """Cosine and sine design matrices for a batch of feature rows.

    Returns (C, S), each (n, (2L+1)^6), with C[i, w] = cos(omega_w . z_i).
    These are what make full-batch training linear algebra.
    """
    z = feature_map_batch(np.atleast_2d(np.asarray(features, dtype=np.float64)))
    angles = z @ lattice.vectors.T
    return np.cos(angles), np.sin(angles)


def evaluate(params, task, features):
    """The truncated Fourier sum g_task at one input."""
    if task not in (1, 2, 3):
        raise ValueError("task must be 1, 2 or 3")
    lattice = FrequencyLattice.build(params.L)
    z = feature_map(features)
    angles = lattice.vectors @ z
    return float(
        np.cos(angles) @ params.alpha[task - 1]
        + np.sin(angles) @ params.beta[task - 1]
    )


def hard_tanh(v):
    """Clamp to [-1, 1]; linear in between."""
    return np.clip(v, -1.0, 1.0)


def task_probabilities(params, features):
    """The behaviour (P1(+1), P2(+1), P3(+1)) for a single input."""
    g = np.array([evaluate(params, k, features) for k in (1, 2, 3)])
    return (1.0 + hard_tanh(g)) / 2.0


def batch_task_probabilities(params, features, design=None):
    """P(+1) per task for a batch of feature rows: (n, 3).

    ``design`` may carry precomputed (C, S) matrices to amortise the
    lattice trigonometry across repeated evaluations.
    """
    if design is None:
        design = design_matrices(features, FrequencyLattice.build(params.L))
    c, s = design
    g = c @ params.alpha.T + s @ params.beta.T
    return (1.0 + hard_tanh(g)) / 2.0


def gradient(params, task, features, label, clamp_eps=1e-12):
    """Gradient of log P(label) w.r.t. the task's (alpha, beta) coefficients.

    The HardTanh derivative is taken as 1 on [-1, 1] (kinks included) and
    0 outside, so saturated outputs contribute no gradient.  Returns the
    concatenated (d/d alpha, d/d beta) vector.
    """
    if label not in (-1, 1):
        raise ValueError("label must be +1 or -1")
    lattice = FrequencyLattice.build(params.L)
    z = feature_map(features)
    angles = lattice.vectors @ z
    cos_row, sin_row = np.cos(angles), np.sin(angles)
    g = float(cos_row @ params.alpha[task - 1] + sin_row @ params.beta[task - 1])
    p = (1.0 + label * hard_tanh(g)) / 2.0
    if abs(g) > 1.0 or p <= clamp_eps:
        return np.zeros(2 * lattice.size)
    scale = label / (2.0 * p)
    return np.concatenate([scale * cos_row, scale * sin_row])


def init_params(rng, L):
    """Random initial coefficients, Uniform[-1, 1] / (2 (2L+1)^6) per entry.

    Draw order: alpha then beta for task 1, then task 2, then task 3.
    """
    m = (2 * L + 1) ** 6
    scale = 1.0 / (2.0 * m)
    alpha = np.empty((3, m))
    beta = np.empty((3, m))
    for k in range(3):
        alpha[k] = (2.0 * rng.random(m) - 1.0) * scale
        beta[k] = (2.0 * rng.random(m) - 1.0) * scale
    return SurrogateParams(L=L, alpha=alpha, beta=beta)


def save_params(path, params):
    """Write surrogate coefficients with full float64 precision."""
    doc = {
        "kind": "surrogate",
        "L": int(params.L),
        "alpha": [[float(v) for v in row] for row in params.alpha],
        "beta": [[float(v) for v in row] for row in params.beta],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_params(path):
    """Read surrogate coefficients written by :func:`save_params`."""
    doc = json.loads(Path(path).read_text())
    if doc.get("kind") != "surrogate":
        raise ValueError("not a surrogate parameter file")
    return SurrogateParams(
        L=int(doc["L"]),
        alpha=np.asarray(doc["alpha"], dtype=np.float64),
        beta=np.asarray(doc["beta"], dtype=np.float64),
    )
