"""Dense statevector simulation of parameterised circuits.

Provides the bias-encoding three-qubit ansatz (all trainable generators
commute with the bias operator H = Z1 + Z2 + Z3), a generic ansatz with the
same data encoding but no bias guarantee, measurement triples that sum to
zero (trine and even-dimensional), and exact adjoint-mode gradients of the
task label probabilities.

Rotation convention: every rotation gate is ``exp(-i * angle * G / 2)``
where G is the generator with unit-Pauli normalisation (Y for RY, Z@Z for
RZZ, (XX+YY)/2 for XY, ...).  Qubit 0 is the most significant bit of the
statevector index.

Batched evaluation over many feature vectors is supported throughout;
per-sample angles are only permitted for diagonal (RZ/RZZ) gates, which is
all the data encoding needs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GATE_KINDS = ("ry", "rz", "rzz", "xy", "swap", "rx", "unitary")

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
    dtype=np.complex128,
)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=np.complex128,
)
# (XX + YY)/2: exchange generator on the odd-parity subspace.
_XY_GEN = np.array(
    [[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]],
    dtype=np.complex128,
)


# --------------------------------------------------------------------------
# Parameter bindings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    """Fixed rotation angle."""

    value: float


@dataclass(frozen=True)
class Param:
    """Angle read from a trainable parameter slot."""

    slot: int


@dataclass(frozen=True)
class ParamOffset:
    """Angle read from a slot plus a fixed offset (shares the slot's grad)."""

    slot: int
    offset: float


@dataclass(frozen=True)
class DataProduct:
    """Angle equal to the product of the given flat-feature entries."""

    indices: tuple


def _binding_slot(binding):
    if isinstance(binding, (Param, ParamOffset)):
        return binding.slot
    return None


def _resolve_angle(binding, features, params):
    """Angle for one gate: scalar, or a length-N vector for data bindings."""
    if isinstance(binding, Const):
        return binding.value
    if isinstance(binding, Param):
        return float(params[binding.slot])
    if isinstance(binding, ParamOffset):
        return float(params[binding.slot]) + binding.offset
    if isinstance(binding, DataProduct):
        if features is None:
            raise ValueError("circuit has data-bound gates but no features given")
        angle = features[:, binding.indices[0]].copy()
        for i in binding.indices[1:]:
            angle *= features[:, i]
        return angle
    raise TypeError(f"unknown binding {binding!r}")


# --------------------------------------------------------------------------
# Gates and circuits
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    wires: tuple
    binding: object = Const(0.0)
    matrix: np.ndarray | None = None  # only for kind="unitary"

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "wires", tuple(self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise ValueError("gate wires must be distinct")
        arity = {"ry": 1, "rz": 1, "rx": 1, "rzz": 2, "xy": 2, "swap": 2}
        if self.kind in arity and len(self.wires) != arity[self.kind]:
            raise ValueError(f"{self.kind} gate acts on {arity[self.kind]} wire(s)")
        if self.kind == "unitary":
            if self.matrix is None:
                raise ValueError("unitary gate needs an explicit matrix")
            dim = 2 ** len(self.wires)
            m = np.asarray(self.matrix, dtype=np.complex128)
            if m.shape != (dim, dim):
                raise ValueError("unitary matrix shape does not match wires")
            object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class Circuit:
    gates: tuple
    n_qubits: int
    n_params: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        slots = set()
        for g in self.gates:
            if any(w < 0 or w >= self.n_qubits for w in g.wires):
                raise ValueError("gate wire out of range")
            s = _binding_slot(g.binding)
            if s is not None:
                slots.add(s)
        if slots != set(range(self.n_params)):
            raise ValueError("parameter slots must cover 0..n_params-1 exactly")


def _bit(index, wire, n):
    return (index >> (n - 1 - wire)) & 1


def _z_signs(wires, n):
    """Diagonal of the Z (or Z@Z) generator on the given wires."""
    idx = np.arange(2 ** n)
    s = np.ones(2 ** n)
    for w in wires:
        s = s * (1.0 - 2.0 * ((idx >> (n - 1 - w)) & 1))
    return s


def _embed(small, wires, n):
    """Lift an operator on ``wires`` to the full 2^n-dimensional space."""
    dim = 2 ** n
    k = len(wires)
    small = np.asarray(small, dtype=np.complex128)
    full = np.zeros((dim, dim), dtype=np.complex128)
    shifts = [n - 1 - w for w in wires]
    mask = sum(1 << s for s in shifts)
    rest = (dim - 1) ^ mask
    for i in range(dim):
        sub_i = 0
        for t, s in enumerate(shifts):
            sub_i |= ((i >> s) & 1) << (k - 1 - t)
        base = i & rest
        for sub_j in range(2 ** k):
            j = base
            for t, s in enumerate(shifts):
                j |= ((sub_j >> (k - 1 - t)) & 1) << s
            full[i, j] = small[sub_i, sub_j]
    return full


def _rot_1q(kind, theta):
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    raise ValueError(kind)


def _xy_matrix(theta):
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    m = np.eye(4, dtype=np.complex128)
    m[1, 1] = m[2, 2] = c
    m[1, 2] = m[2, 1] = -1j * s
    return m


def _compile_ops(circuit, features, params):
    """Resolve every gate into an applicable operator plus gradient info.

    Returns a list of ``(op, gen, slot)`` where ``op`` is ``("diag", d)``
    with d of shape (dim,) or (N, dim), or ``("dense", U)``; ``gen`` is the
    generator as ``("diag", signs)`` or ``("dense", G)`` for parameterised
    gates, else None.
    """
    n = circuit.n_qubits
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.n_params,):
        raise ValueError(
            f"expected {circuit.n_params} parameters, got {params.shape}"
        )
    ops = []
    for g in circuit.gates:
        slot = _binding_slot(g.binding)
        if g.kind in ("rz", "rzz"):
            signs = _z_signs(g.wires, n)
            theta = _resolve_angle(g.binding, features, params)
            if np.ndim(theta) == 0:
                d = np.exp(-0.5j * theta * signs)
            else:
                d = np.exp(-0.5j * np.asarray(theta)[:, None] * signs)
            ops.append((("diag", d), ("diag", signs), slot))
        elif g.kind in ("ry", "rx"):
            theta = _resolve_angle(g.binding, features, params)
            if np.ndim(theta) != 0:
                raise ValueError(f"{g.kind} gates require a shared scalar angle")
            u = _embed(_rot_1q(g.kind, theta), g.wires, n)
            gen = _embed(_PAULI_Y if g.kind == "ry" else _PAULI_X, g.wires, n)
            ops.append((("dense", u), ("dense", gen), slot))
        elif g.kind == "xy":
            theta = _resolve_angle(g.binding, features, params)
            if np.ndim(theta) != 0:
                raise ValueError("xy gates require a shared scalar angle")
            u = _embed(_xy_matrix(theta), g.wires, n)
            gen = _embed(_XY_GEN, g.wires, n)
            ops.append((("dense", u), ("dense", gen), slot))
        elif g.kind == "swap":
            ops.append((("dense", _embed(_SWAP, g.wires, n)), None, None))
        elif g.kind == "unitary":
            ops.append((("dense", _embed(g.matrix, g.wires, n)), None, None))
    return ops


def _apply(psi, op):
    tag, payload = op
    if tag == "diag":
        return psi * payload
    return psi @ payload.T


def _unapply(psi, op):
    tag, payload = op
    if tag == "diag":
        return psi * np.conj(payload)
    return psi @ np.conj(payload)


def _gen_apply(psi, gen):
    tag, payload = gen
    if tag == "diag":
        return psi * payload
    return psi @ payload.T


def _as_feature_rows(features, n_rows=None):
    """Normalise feature input to an (N, 6) array (or None)."""
    if features is None:
        return None
    f = np.asarray(features, dtype=np.float64)
    if f.shape == (3, 2):
        f = f.reshape(6, order="F")
    if f.ndim == 1:
        f = f[None, :]
    if f.ndim != 2 or f.shape[1] != 6:
        raise ValueError("features must be a 3x2 matrix or length-6 vector(s)")
    if n_rows is not None and f.shape[0] == 1 and n_rows > 1:
        f = np.broadcast_to(f, (n_rows, 6))
    return f


def _forward(circuit, features, params):
    feats = _as_feature_rows(features)
    n_rows = 1 if feats is None else feats.shape[0]
    ops = _compile_ops(circuit, feats, params)
    psi = np.zeros((n_rows, 2 ** circuit.n_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    for op, _, _ in ops:
        psi = _apply(psi, op)
    return psi


def evolve(circuit, features, params):
    """Run the circuit on |0...0> and return the final statevector."""
    return _forward(circuit, features, params)[0]


def expectation(state, observable):
    """Real expectation value of a Hermitian observable in a state."""
    state = np.asarray(state, dtype=np.complex128)
    obs = np.asarray(observable, dtype=np.complex128)
    if obs.shape != (state.shape[0], state.shape[0]):
        raise ValueError("state and observable dimensions do not match")
    return float(np.real(np.conj(state) @ obs @ state))


# --------------------------------------------------------------------------
# Multi-task models
# --------------------------------------------------------------------------


@dataclass(eq=False)
class QuantumMultiTaskModel:
    """A circuit with one +/-1-valued observable per task.

    The bias operator is the sum of the task observables; its expectation
    is the conserved quantity the biased ansatz maintains at zero.
    """

    circuit: Circuit
    observables: tuple
    bias_operator: np.ndarray
    _obs_diags: tuple = field(init=False, repr=False)

    def __post_init__(self):
        obs = tuple(np.asarray(o, dtype=np.complex128) for o in self.observables)
        dim = 2 ** self.circuit.n_qubits
        diags = []
        for o in obs:
            if o.shape != (dim, dim):
                raise ValueError("observable dimension does not match circuit")
            if np.abs(o - o.conj().T).max() > 1e-12:
                raise ValueError("observables must be Hermitian")
            if np.abs(o @ o - np.eye(dim)).max() > 1e-10:
                raise ValueError("observables must square to the identity")
            d = np.diagonal(o)
            diags.append(d.real.copy() if np.abs(o - np.diag(d)).max() < 1e-14 else None)
        self.observables = obs
        self.bias_operator = np.asarray(self.bias_operator, dtype=np.complex128)
        self._obs_diags = tuple(diags)

    @property
    def n_params(self):
        return self.circuit.n_params


def _batch_expectations(model, psi):
    """Per-task observable expectations for a batch of states: (N, 3)."""
    cols = []
    for o, d in zip(model.observables, model._obs_diags):
        if d is not None:
            cols.append((np.abs(psi) ** 2) @ d)
        else:
            cols.append(np.real(np.einsum("nb,bc,nc->n", np.conj(psi), o, psi)))
    return np.stack(cols, axis=1)


def batch_task_probabilities(model, features, params):
    """P(+1) per task for a batch of feature rows: (N, 3)."""
    psi = _forward(model.circuit, features, params)
    return (1.0 + _batch_expectations(model, psi)) / 2.0


def task_probabilities(model, features, params):
    """The behaviour (P1(+1), P2(+1), P3(+1)) for a single input."""
    return batch_task_probabilities(model, features, params)[0]


def batch_nll_and_grad(model, features, labels, params, clamp_eps=1e-12):
    """Full-batch negative log likelihood and its parameter gradient.

    One forward pass plus a single reverse (adjoint) sweep shared by the
    three task observables.  Label probabilities are clamped to
    [clamp_eps, 1 - clamp_eps] before the log; clamped samples contribute
    zero gradient.

    Returns:
        (nll, grad, n_clamped)
    """
    feats = _as_feature_rows(features)
    labels = np.asarray(labels, dtype=np.float64)
    ops = _compile_ops(model.circuit, feats, params)
    n_rows = labels.shape[0] if feats is None else feats.shape[0]
    psi = np.zeros((n_rows, 2 ** model.circuit.n_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    for op, _, _ in ops:
        psi = _apply(psi, op)

    e = _batch_expectations(model, psi)
    p = (1.0 + labels * e) / 2.0
    p_clamped = np.clip(p, clamp_eps, 1.0 - clamp_eps)
    nll = float(-np.log(p_clamped).sum())
    inside = (p > clamp_eps) & (p < 1.0 - clamp_eps)
    weights = np.where(inside, -labels / (2.0 * p_clamped), 0.0)

    # Adjoint states, one per task, with the loss weights folded in.
    phi = np.empty((3, n_rows, psi.shape[1]), dtype=np.complex128)
    for k, (o, d) in enumerate(zip(model.observables, model._obs_diags)):
        obs_psi = psi * d if d is not None else psi @ o.T
        phi[k] = weights[:, k, None] * obs_psi

    grad = np.zeros(model.circuit.n_params, dtype=np.float64)
    for op, gen, slot in reversed(ops):
        if slot is not None:
            gpsi = _gen_apply(psi, gen)
            grad[slot] += float(np.imag(np.sum(np.conj(phi) * gpsi[None, :, :])))
        psi = _unapply(psi, op)
        phi = _unapply(phi, op)
    return nll, grad, int((~inside).sum())


def log_prob_gradient(model, features, params, task, label, clamp_eps=1e-12):
    """Exact gradient of log P(label | features) for one task.

    Computed by one forward pass and one adjoint sweep; matches central
    finite differences to high accuracy because no shift rule is involved
    (the XY generator's {-1, 0, +1} spectrum rules out the two-point
    shift).

    Returns:
        (grad, clamped) where ``clamped`` signals that the probability was
        at or below the clamp floor, in which case the gradient is zero.
    """
    if task not in (1, 2, 3):
        raise ValueError("task must be 1, 2 or 3")
    if label not in (-1, 1):
        raise ValueError("label must be +1 or -1")
    feats = _as_feature_rows(features)
    ops = _compile_ops(model.circuit, feats, params)
    psi = np.zeros((1, 2 ** model.circuit.n_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    for op, _, _ in ops:
        psi = _apply(psi, op)

    o = model.observables[task - 1]
    d = model._obs_diags[task - 1]
    e = _batch_expectations(model, psi)[0, task - 1]
    p = (1.0 + label * e) / 2.0
    if p <= clamp_eps:
        return np.zeros(model.circuit.n_params), True
    if p >= 1.0 - clamp_eps:
        return np.zeros(model.circuit.n_params), False

    weight = label / (2.0 * p)
    phi = weight * (psi * d if d is not None else psi @ o.T)
    grad = np.zeros(model.circuit.n_params, dtype=np.float64)
    for op, gen, slot in reversed(ops):
        if slot is not None:
            gpsi = _gen_apply(psi, gen)
            grad[slot] += float(np.imag(np.sum(np.conj(phi) * gpsi)))
        psi = _unapply(psi, op)
        phi = _unapply(phi, op)
    return grad, False


# --------------------------------------------------------------------------
# Ansatz constructors
# --------------------------------------------------------------------------


def _encoding_gates():
    """One data-encoding layer: per-qubit angles then pairwise products."""
    gates = [Gate("rz", (q,), DataProduct((q,))) for q in range(3)]
    gates += [
        Gate("rzz", (0, 1), DataProduct((3, 4))),
        Gate("rzz", (0, 2), DataProduct((3, 5))),
        Gate("rzz", (1, 2), DataProduct((4, 5))),
    ]
    return gates


def _z_observables():
    obs = [_embed(_PAULI_Z, (k,), 3) for k in range(3)]
    return obs, obs[0] + obs[1] + obs[2]


def build_biased_ansatz(L, B):
    """Three-qubit model whose trainable layers conserve <Z1 + Z2 + Z3>.

    The input preparation applies RY(theta0) on qubit 1, RY(theta0 + pi)
    on qubit 2 (the two rotations share one parameter and differ by pi)
    and a fixed RY(pi/2) on qubit 3, which zeroes the bias expectation for
    every theta0.  Each of the L layers is one encoding block followed by
    B trainable blocks of three RZ, three RZZ and three XY gates (nine
    fresh parameters per block); all those generators commute with the
    bias operator, so the zero-sum bias holds for every parameter value.
    Total parameter count: 1 + 9*B*L.
    """
    if L < 1 or B < 1:
        raise ValueError("layer and block counts must be at least 1")
    gates = [
        Gate("ry", (0,), Param(0)),
        Gate("ry", (1,), ParamOffset(0, math.pi)),
        Gate("ry", (2,), Const(math.pi / 2.0)),
    ]
    slot = 1
    for _ in range(L):
        gates += _encoding_gates()
        for _ in range(B):
            for q in range(3):
                gates.append(Gate("rz", (q,), Param(slot)))
                slot += 1
            for pair in ((0, 1), (0, 2), (1, 2)):
                gates.append(Gate("rzz", pair, Param(slot)))
                slot += 1
            for pair in ((0, 1), (0, 2), (1, 2)):
                gates.append(Gate("xy", pair, Param(slot)))
                slot += 1
    circuit = Circuit(tuple(gates), n_qubits=3, n_params=slot)
    obs, h = _z_observables()
    return QuantumMultiTaskModel(circuit, tuple(obs), h)


def build_generic_ansatz(L, B):
    """Unbiased reference model with the same data encoding and spectrum.

    Trainable blocks are per-qubit Euler rotations RZ-RY-RZ (nine fresh
    parameters per block) followed by a fixed CNOT ring; nothing ties the
    three tasks together, so the zero-sum bias is not encoded.  Total
    parameter count: 9*B*L.
    """
    if L < 1 or B < 1:
        raise ValueError("layer and block counts must be at least 1")
    gates = []
    slot = 0
    for _ in range(L):
        gates += _encoding_gates()
        for _ in range(B):
            for q in range(3):
                for kind in ("rz", "ry", "rz"):
                    gates.append(Gate(kind, (q,), Param(slot)))
                    slot += 1
            for pair in ((0, 1), (1, 2), (2, 0)):
                gates.append(Gate("unitary", pair, matrix=_CNOT))
    circuit = Circuit(tuple(gates), n_qubits=3, n_params=slot)
    obs, h = _z_observables()
    return QuantumMultiTaskModel(circuit, tuple(obs), h)


# --------------------------------------------------------------------------
# Measurement triples and bias operators
# --------------------------------------------------------------------------


def build_trine_observables():
    """Three equally spaced single-qubit observables that sum to zero.

    O_k = cos(2*pi*k/3) X + sin(2*pi*k/3) Y for k = 1, 2, 3: unit Bloch
    vectors 120 degrees apart in the equatorial plane.
    """
    out = []
    for k in (1, 2, 3):
        angle = 2.0 * math.pi * k / 3.0
        out.append(math.cos(angle) * _PAULI_X + math.sin(angle) * _PAULI_Y)
    return out


def build_even_dim_triple(d):
    """Three +/-1-valued d x d observables summing to zero, for even d.

    Built from projections P = diag(I, 0) and Q = (1/4) [[I, sqrt(3) I],
    [sqrt(3) I, 3 I]] in d/2-block form, which satisfy (P - Q)^2 = (3/4) I;
    then O1 = 2P - I, O2 = 2Q - I and O3 = -O1 - O2.
    """
    if d < 2 or d % 2 != 0:
        raise ValueError("dimension must be even and at least 2")
    half = d // 2
    eye = np.eye(half)
    zero = np.zeros((half, half))
    p = np.block([[eye, zero], [zero, zero]])
    q = 0.25 * np.block([[eye, math.sqrt(3.0) * eye], [math.sqrt(3.0) * eye, 3.0 * eye]])
    o1 = 2.0 * p - np.eye(d)
    o2 = 2.0 * q - np.eye(d)
    o3 = -o1 - o2
    return [o1, o2, o3]


def build_bias_operator(observables, label_functions):
    """Bias operator for per-task label functions f_k applied spectrally.

    Each observable must be +/-1-valued; H = sum_k [f_k(+1) M_k+ +
    f_k(-1) M_k-] with M_k+/- the eigenprojectors of O_k.  With identity
    label functions this reduces to the plain sum of the observables.
    """
    obs = [np.asarray(o, dtype=np.complex128) for o in observables]
    if len(obs) != len(label_functions):
        raise ValueError("need one label function per observable")
    dim = obs[0].shape[0]
    h = np.zeros((dim, dim), dtype=np.complex128)
    for o, f in zip(obs, label_functions):
        if o.shape != (dim, dim):
            raise ValueError("observables must share one dimension")
        if np.abs(o @ o - np.eye(dim)).max() > 1e-10:
            raise ValueError("observable is not +/-1-valued (O^2 != I)")
        m_plus = (np.eye(dim) + o) / 2.0
        m_minus = (np.eye(dim) - o) / 2.0
        h = h + f(+1) * m_plus + f(-1) * m_minus
    return h


def check_generator_commutes(g, h, tol=1e-10):
    """Whether two Hermitian operators commute within ``tol`` (max norm)."""
    g = np.asarray(g, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if g.shape != h.shape:
        raise ValueError("operators must have the same shape")
    return bool(np.abs(g @ h - h @ g).max() <= tol)


# --------------------------------------------------------------------------
# Model files
# --------------------------------------------------------------------------

ANSATZ_BUILDERS = {
    "biased-quantum": build_biased_ansatz,
    "generic-quantum": build_generic_ansatz,
}


def model_from_spec(kind, L, B):
    """Construct a model from its file-level description."""
    try:
        builder = ANSATZ_BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown ansatz kind {kind!r}") from None
    return builder(L, B)


def save_model(path, kind, L, B, params):
    """Write an ansatz description plus its trained parameter vector."""
    if kind not in ANSATZ_BUILDERS:
        raise ValueError(f"unknown ansatz kind {kind!r}")
    doc = {
        "kind": kind,
        "L": int(L),
        "B": int(B),
        "params": [float(v) for v in np.asarray(params).ravel()],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path):
    """Read a model file; returns (kind, L, B, params)."""
    doc = json.loads(Path(path).read_text())
    params = np.asarray(doc["params"], dtype=np.float64)
    return doc["kind"], int(doc["L"]), int(doc["B"]), params
