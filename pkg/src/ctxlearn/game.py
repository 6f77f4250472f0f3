"""Three-player rock-paper-scissors variant.

Implements the game rules, the exact conditional payoff law, strategy and
dataset sampling, and the angle encoding that feeds strategies to the models.

Conventions used throughout the package:

* Players are numbered 1..3 in the public API (0-indexed internally).
* Actions are ``R < P < S`` with integer values 0, 1, 2.
* Payoff labels are vectors in ``{-1, +1}^3``.  Joint label distributions
  are length-8 vectors indexed by ``4*b1 + 2*b2 + b3`` where ``b_k = 1``
  iff player k's label is +1 (player 1 is the most significant bit).
* All randomness flows through ``numpy.random.Generator`` seeded with
  PCG64, which produces identical streams on every platform.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

# Tolerance on strategy row sums.  Inputs outside it are rejected, never
# silently renormalised.
ROW_SUM_TOL = 1e-12


class Action(IntEnum):
    R = 0
    P = 1
    S = 2


#: Player k's special action (index k-1): player 1 -> R, 2 -> P, 3 -> S.
SPECIAL_ACTIONS = (Action.R, Action.P, Action.S)

#: Pairs (a, b) such that action a beats action b when the actions differ.
_CYCLE = {(Action.R, Action.S), (Action.P, Action.R), (Action.S, Action.P)}

#: The eight payoff label vectors in index order.
LABELS = tuple(
    (2 * ((i >> 2) & 1) - 1, 2 * ((i >> 1) & 1) - 1, 2 * (i & 1) - 1)
    for i in range(8)
)

#: Deterministic action triples whose payoff behaviours are the six
#: extremal vertices of the bias hexagon (as a set; see tests for the
#: triple-to-vertex correspondence).
VERTEX_STRATEGIES = ("RSS", "SPP", "RPR", "SRS", "PPS", "RRP")


def _check_player(k):
    if k not in (1, 2, 3):
        raise ValueError(f"player index must be 1, 2 or 3, got {k!r}")


def beats(a_k, a_l, k, l):
    """Whether player ``k`` playing ``a_k`` beats player ``l`` playing ``a_l``.

    Distinct actions follow the usual cycle (R beats S, P beats R,
    S beats P).  On a common action the player whose special action it is
    wins; if neither player's special action matches, it is a draw.
    """
    _check_player(k)
    _check_player(l)
    if k == l:
        raise ValueError("a player cannot play against themselves")
    a_k = Action(a_k)
    a_l = Action(a_l)
    if a_k != a_l:
        return (a_k, a_l) in _CYCLE
    return SPECIAL_ACTIONS[k - 1] == a_k


def net_wins(a):
    """Net win count for each player in the action triple ``a``.

    Returns the integer vector whose k-th entry is the number of players
    that player k beat minus the number that beat player k.  The entries
    always sum to zero.
    """
    a = tuple(Action(x) for x in a)
    if len(a) != 3:
        raise ValueError("action triple must have exactly three entries")
    ell = np.zeros(3, dtype=np.int64)
    for k, l in itertools.permutations((1, 2, 3), 2):
        if beats(a[k - 1], a[l - 1], k, l):
            ell[k - 1] += 1
            ell[l - 1] -= 1
    return ell


def product_joint(marginals):
    """Joint distribution of three independent +/-1 labels.

    ``marginals`` holds the three probabilities of the +1 label.  The
    result is the length-8 product distribution in the label order of
    :data:`LABELS`.
    """
    m = np.asarray(marginals, dtype=np.float64)
    if m.shape != (3,):
        raise ValueError("marginals must be a vector of three probabilities")
    probs = np.empty(8, dtype=np.float64)
    for i, y in enumerate(LABELS):
        p = 1.0
        for k in range(3):
            p = p * (m[k] if y[k] == 1 else (1.0 - m[k]))
        probs[i] = p
    return probs


def joint_marginals(probs):
    """Per-task probabilities of the +1 label for an 8-entry joint."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (8,):
        raise ValueError("joint distribution must have eight entries")
    out = np.zeros(3, dtype=np.float64)
    for i, y in enumerate(LABELS):
        for k in range(3):
            if y[k] == 1:
                out[k] += probs[i]
    return out


def validate_joint(probs, tol=1e-12):
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (8,):
        raise ValueError("joint distribution must have eight entries")
    if (probs < -tol).any():
        raise ValueError("joint distribution has negative entries")
    if abs(probs.sum() - 1.0) > tol:
        raise ValueError("joint distribution does not sum to 1")
    return probs


def payoff_distribution(a):
    """Exact joint payoff distribution for a fixed action triple.

    Player k receives +1 with probability ``(1 + net_wins(a)[k]/2) / 2``
    and the three payoffs are drawn independently, so the joint is the
    product of the three per-player Bernoullis.
    """
    marginals = (1.0 + net_wins(a) / 2.0) / 2.0
    return product_joint(marginals)


# Static lookup tables over the 27 action triples.  TRIPLES[t] has index
# t = 9*a1 + 3*a2 + a3.
TRIPLES = tuple(itertools.product(Action, repeat=3))
_NET_WINS_TABLE = np.array([net_wins(t) for t in TRIPLES], dtype=np.int64)
_MARGINALS_TABLE = (1.0 + _NET_WINS_TABLE / 2.0) / 2.0
_JOINTS_TABLE = np.array([product_joint(m) for m in _MARGINALS_TABLE])
_TRIPLE_COLUMNS = np.array(TRIPLES, dtype=np.int64)  # (27, 3) action indices


def validate_strategy(x):
    """Validate and return a strategy matrix as a float64 array.

    A strategy is a 3x3 row-stochastic matrix: entry (k, a) is the
    probability that player k+1 plays action a.  Entries must lie in
    [0, 1] and each row must sum to 1 within ``ROW_SUM_TOL``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3, 3):
        raise ValueError(f"strategy must be a 3x3 matrix, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("strategy contains non-finite entries")
    if (x < 0.0).any() or (x > 1.0).any():
        raise ValueError("strategy entries must lie in [0, 1]")
    row_sums = x.sum(axis=1)
    if (np.abs(row_sums - 1.0) > ROW_SUM_TOL).any():
        raise ValueError(
            f"strategy rows must sum to 1 within {ROW_SUM_TOL}, got {row_sums}"
        )
    return x


def deterministic_strategy(actions):
    """Strategy matrix for a deterministic action triple, e.g. ``\"RSS\"``."""
    if isinstance(actions, str):
        actions = [Action[c] for c in actions]
    actions = [Action(a) for a in actions]
    if len(actions) != 3:
        raise ValueError("need exactly three actions")
    x = np.zeros((3, 3), dtype=np.float64)
    for k, a in enumerate(actions):
        x[k, a] = 1.0
    return x


def uniform_strategy():
    """The maximally mixed strategy (every action with probability 1/3)."""
    return np.full((3, 3), 1.0 / 3.0)


def strategy_weights(x):
    """Probability of each of the 27 action triples under strategy ``x``."""
    x = validate_strategy(x)
    return (
        x[0, _TRIPLE_COLUMNS[:, 0]]
        * x[1, _TRIPLE_COLUMNS[:, 1]]
        * x[2, _TRIPLE_COLUMNS[:, 2]]
    )


def oracle_distribution(x):
    """Exact joint payoff distribution for a strategy.

    Mixes the 27 fixed-action payoff distributions with the product
    probabilities of the action triples.
    """
    return strategy_weights(x) @ _JOINTS_TABLE


def oracle_marginals(x):
    """Exact per-task probabilities of the +1 payoff for a strategy."""
    return strategy_weights(x) @ _MARGINALS_TABLE


def oracle_marginals_batch(strategies):
    """Vectorised :func:`oracle_marginals` for an (n, 3, 3) array."""
    s = np.asarray(strategies, dtype=np.float64)
    weights = (
        s[:, 0, _TRIPLE_COLUMNS[:, 0]]
        * s[:, 1, _TRIPLE_COLUMNS[:, 1]]
        * s[:, 2, _TRIPLE_COLUMNS[:, 2]]
    )
    return weights @ _MARGINALS_TABLE


def sample_strategy(rng):
    """Draw a random strategy.

    Each row is a vector of three Uniform[0, 1] draws normalised to sum
    to 1; the rows are independent.  Consumes nine uniforms from ``rng``
    in row-major order.
    """
    r = rng.random((3, 3))
    return r / r.sum(axis=1, keepdims=True)


def _sample_actions(strategies, rng):
    """One action per player per record; consumes an (n, 3) uniform block."""
    cum = np.cumsum(strategies, axis=2)
    u = rng.random(strategies.shape[:2])
    actions = (u[..., None] >= cum).sum(axis=2)
    return np.minimum(actions, 2)


def sample_payoffs(x, n, rng):
    """Sample ``n`` payoff vectors for a fixed strategy ``x``.

    Each record draws an action triple from the strategy and then three
    independent payoff labels from the per-action marginals.  Consumes an
    (n, 3) uniform block for the actions followed by an (n, 3) block for
    the labels.
    """
    x = validate_strategy(x)
    if n < 1:
        raise ValueError("need at least one sample")
    strategies = np.broadcast_to(x, (n, 3, 3))
    actions = _sample_actions(strategies, rng)
    return _sample_labels(actions, rng)


def _sample_labels(actions, rng):
    triple_idx = 9 * actions[:, 0] + 3 * actions[:, 1] + actions[:, 2]
    marginals = _MARGINALS_TABLE[triple_idx]
    u = rng.random(actions.shape)
    return np.where(u < marginals, 1, -1).astype(np.int64)


@dataclass
class Dataset:
    """A sampled training set: strategies with their observed payoffs."""

    strategies: np.ndarray  # (n, 3, 3) float64
    payoffs: np.ndarray  # (n, 3) int64 with entries in {-1, +1}
    seed: int

    def __post_init__(self):
        self.strategies = np.asarray(self.strategies, dtype=np.float64)
        self.payoffs = np.asarray(self.payoffs, dtype=np.int64)
        n = self.strategies.shape[0]
        if n < 1:
            raise ValueError("dataset must contain at least one record")
        if self.strategies.shape != (n, 3, 3) or self.payoffs.shape != (n, 3):
            raise ValueError("inconsistent dataset shapes")
        if not np.isin(self.payoffs, (-1, 1)).all():
            raise ValueError("payoffs must be +1 or -1")

    def __len__(self):
        return self.strategies.shape[0]


def sample_dataset(seed, n):
    """Sample a dataset of ``n`` (strategy, payoff) records.

    Uses a fresh PCG64 generator seeded with ``seed``.  Draw order: the
    (n, 3, 3) strategy block, then the (n, 3) action block, then the
    (n, 3) label block, so the whole dataset is reproducible from the
    header alone.
    """
    if n < 1:
        raise ValueError("dataset size must be at least 1")
    rng = np.random.default_rng(np.random.PCG64(seed))
    strategies = rng.random((n, 3, 3))
    strategies /= strategies.sum(axis=2, keepdims=True)
    actions = _sample_actions(strategies, rng)
    payoffs = _sample_labels(actions, rng)
    return Dataset(strategies=strategies, payoffs=payoffs, seed=seed)


def _fmt(v):
    """Decimal form with 17 significant digits (exact float64 round trip)."""
    return format(float(v), ".17g")


def save_dataset(dataset, path):
    """Write a dataset as line-delimited records with a header line."""
    path = Path(path)
    lines = [json.dumps({"seed": int(dataset.seed), "n": len(dataset)})]
    for x, y in zip(dataset.strategies, dataset.payoffs):
        rows = ",".join(
            "[" + ",".join(_fmt(v) for v in row) + "]" for row in x
        )
        labels = ",".join(str(int(v)) for v in y)
        lines.append('{"strategy": [%s], "payoffs": [%s]}' % (rows, labels))
    path.write_text("\n".join(lines) + "\n")


def load_dataset(path):
    """Read a dataset written by :func:`save_dataset`."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError("empty dataset file")
    header = json.loads(lines[0])
    records = [json.loads(line) for line in lines[1:] if line.strip()]
    if len(records) != header["n"]:
        raise ValueError(
            f"header says {header['n']} records, file has {len(records)}"
        )
    strategies = np.array([r["strategy"] for r in records], dtype=np.float64)
    payoffs = np.array([r["payoffs"] for r in records], dtype=np.int64)
    return Dataset(strategies=strategies, payoffs=payoffs, seed=header["seed"])


def encode_features(x):
    """Angle encoding of a strategy as a 3x2 feature matrix.

    Row k keeps player k+1's probability of their distinguished action and
    the difference of the other two, scaled by pi/2:

        ((P(R), P(P)-P(S)), (P(P), P(S)-P(R)), (P(S), P(R)-P(P))) * pi/2

    The dropped third probability of each row is recoverable from
    normalisation, so the encoding loses no information.
    """
    x = validate_strategy(x)
    f = np.empty((3, 2), dtype=np.float64)
    for k in range(3):
        # leading action: player 1 -> R, player 2 -> P, player 3 -> S
        f[k, 0] = x[k, k]
        f[k, 1] = x[k, (k + 1) % 3] - x[k, (k + 2) % 3]
    return f * (np.pi / 2.0)


def features_to_vector(f):
    """Flatten a 3x2 feature matrix column-major into (x1, ..., x6)."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (3, 2):
        raise ValueError("feature matrix must be 3x2")
    return f.reshape(6, order="F").copy()


def encode_features_batch(strategies):
    """Vectorised feature encoding: (n, 3, 3) strategies -> (n, 6) vectors."""
    s = np.asarray(strategies, dtype=np.float64)
    out = np.empty((s.shape[0], 6), dtype=np.float64)
    for k in range(3):
        out[:, k] = s[:, k, k]
        out[:, 3 + k] = s[:, k, (k + 1) % 3] - s[:, k, (k + 2) % 3]
    return out * (np.pi / 2.0)
