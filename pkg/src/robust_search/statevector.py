"""State vectors, target sets, unitary families and the kernels that act on them.

Kernels mutate the state they are given and return it.  Callers that need the
input preserved must ``copy()`` first.

Qubit ``q`` is bit ``q`` of the basis index (little-endian), so a register of
``n`` qubits has ``N = 2**n`` amplitudes.  Every kernel here also accepts raw
arrays of shape ``(N, *batch)``; the leading axis is the register and the
trailing axes are carried along unchanged.  That is how ``U ⊗ I`` on a joint
search/workspace register is applied without building the product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapabilityError, DimensionError

MAX_DENSE_DIM = 4096
_UNITARY_TOL = 1e-10


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_dim(dim: int) -> int:
    if not is_power_of_two(int(dim)):
        raise DimensionError(f"dimension must be a power of two, got {dim}")
    return int(dim)


@dataclass
class StateVector:
    """Pure state of an ``n``-qubit register, stored as ``N`` complex amplitudes."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.ndim != 1:
            raise DimensionError("amplitudes must be a 1-d array")
        _check_dim(amps.shape[0])
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalised (norm {norm!r})")
        self.amps = amps

    @classmethod
    def basis(cls, dim: int, index: int = 0) -> "StateVector":
        dim = _check_dim(dim)
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} out of range for dim {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "StateVector":
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class TargetSet:
    """The marked items ``T`` of an ``N``-item search space."""

    dim: int
    indices: tuple[int, ...]

    def __post_init__(self):
        _check_dim(self.dim)
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("target indices must be distinct")
        if not idx or len(idx) >= self.dim:
            raise ValueError(f"need 1 <= M < N targets, got M={len(idx)}, N={self.dim}")
        if idx[0] < 0 or idx[-1] >= self.dim:
            raise IndexError(f"target index out of range [0, {self.dim})")
        object.__setattr__(self, "indices", idx)

    @property
    def count(self) -> int:
        return len(self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[list(self.indices)] = True
        return m

    def __contains__(self, j) -> bool:
        return j in self.indices

    def lifted(self, ancilla_dim: int) -> "TargetSet":
        """Target set on ``H_s ⊗ H_w``: every workspace value of a marked item."""
        return TargetSet(
            self.dim * ancilla_dim,
            tuple(j * ancilla_dim + k for j in self.indices for k in range(ancilla_dim)),
        )


# --------------------------------------------------------------------------
# raw kernels on arrays of shape (N, *batch)


def _wht_inplace(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    batch = x.shape[1:]
    h = 1
    while h < n:
        v = x.reshape((n // (2 * h), 2, h) + batch)
        a = v[:, 0]
        b = v[:, 1]
        diff = a - b
        a += b
        b[...] = diff
        h *= 2
    x *= 1.0 / np.sqrt(n)
    return x


def _qubit_gate_inplace(x: np.ndarray, q: int, gate: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    h = 1 << q
    v = x.reshape((n // (2 * h), 2, h) + x.shape[1:])
    a = v[:, 0].copy()
    b = v[:, 1]
    v[:, 0] = gate[0, 0] * a + gate[0, 1] * b
    v[:, 1] = gate[1, 0] * a + gate[1, 1] * b
    return x


def _as_array(state) -> np.ndarray:
    return state.amps if isinstance(state, StateVector) else state


# --------------------------------------------------------------------------
# unitary families


class UnitaryFamily:
    """A structured unitary ``U`` that can be applied forward or as ``U†``."""

    kind: str = ""
    dim: int

    def apply(self, state, inverse: bool = False):
        x = _as_array(state)
        if x.shape[0] != self.dim:
            raise DimensionError(f"unitary has dim {self.dim}, state has {x.shape[0]}")
        self._apply(x, inverse)
        return state

    def _apply(self, x: np.ndarray, inverse: bool) -> None:
        raise NotImplementedError

    def column0(self) -> np.ndarray:
        """``U|0⟩`` as a fresh array."""
        x = np.zeros(self.dim, dtype=np.complex128)
        x[0] = 1.0
        self._apply(x, False)
        return x

    def initial_state(self) -> StateVector:
        return StateVector(self.column0())

    def matrix(self) -> np.ndarray:
        if self.dim > MAX_DENSE_DIM:
            raise CapabilityError(f"dense matrix of dim {self.dim} exceeds {MAX_DENSE_DIM}")
        m = np.eye(self.dim, dtype=np.complex128)
        self._apply(m, False)
        return m


class WalshHadamard(UnitaryFamily):
    kind = "walsh_hadamard"

    def __init__(self, dim: int):
        self.dim = _check_dim(dim)

    def _apply(self, x, inverse):
        _wht_inplace(x)


@dataclass(eq=False)
class QubitProduct(UnitaryFamily):
    """Layers of single-qubit gates, optionally interleaved with full WHT layers.

    ``layers`` is applied in order.  Each entry is either the string ``"wht"``
    or an array of shape ``(n, 2, 2)`` giving one gate per qubit.
    """

    n_qubits: int
    layers: list = field(default_factory=list)
    kind = "qubit_product"

    def __post_init__(self):
        self.dim = 1 << self.n_qubits
        checked = []
        for layer in self.layers:
            if isinstance(layer, str):
                if layer != "wht":
                    raise ValueError(f"unknown layer {layer!r}")
                checked.append(layer)
                continue
            gates = np.asarray(layer, dtype=np.complex128)
            if gates.shape != (self.n_qubits, 2, 2):
                raise DimensionError(f"gate layer must have shape ({self.n_qubits}, 2, 2)")
            for g in gates:
                if np.max(np.abs(g.conj().T @ g - np.eye(2))) > _UNITARY_TOL:
                    raise ValueError("single-qubit gate is not unitary")
            checked.append(gates)
        self.layers = checked

    def _apply(self, x, inverse):
        seq = reversed(self.layers) if inverse else self.layers
        for layer in seq:
            if isinstance(layer, str):
                _wht_inplace(x)
                continue
            for q, g in enumerate(layer):
                _qubit_gate_inplace(x, q, g.conj().T if inverse else g)


class DenseUnitary(UnitaryFamily):
    kind = "dense"

    def __init__(self, matrix, check: bool = True):
        m = np.ascontiguousarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("dense unitary must be square")
        self.dim = _check_dim(m.shape[0])
        if self.dim > MAX_DENSE_DIM:
            raise CapabilityError(f"dense unitary of dim {self.dim} exceeds {MAX_DENSE_DIM}")
        if check:
            err = np.max(np.abs(m.conj().T @ m - np.eye(self.dim)))
            if err > _UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (max |M†M - I| = {err:.3g})")
        self._m = m
        self._mh = m.conj().T.copy()

    def _apply(self, x, inverse):
        x[...] = np.tensordot(self._mh if inverse else self._m, x, axes=(1, 0))

    def matrix(self):
        return self._m.copy()


class Composed(UnitaryFamily):
    """Product of unitaries applied in sequence; ``parts`` are ``(u, inverse)`` pairs.

    ``Composed([(e_p, False), (u, False), (e_q, True)])`` is ``E_Q† U E_P``.
    """

    kind = "composed"

    def __init__(self, parts: Sequence[tuple[UnitaryFamily, bool]]):
        parts = list(parts)
        dims = {p.dim for p, _ in parts}
        if len(dims) != 1:
            raise DimensionError(f"composed parts disagree on dimension: {sorted(dims)}")
        self.dim = dims.pop()
        self.parts = parts

    def _apply(self, x, inverse):
        if inverse:
            for p, inv in reversed(self.parts):
                p._apply(x, not inv)
        else:
            for p, inv in self.parts:
                p._apply(x, inv)


class Lifted(UnitaryFamily):
    """``U ⊗ I_w``: ``U`` on the search register, identity on a low-bit workspace."""

    kind = "lifted"

    def __init__(self, u: UnitaryFamily, ancilla_dim: int):
        self.u = u
        self.ancilla_dim = _check_dim(ancilla_dim)
        self.dim = u.dim * self.ancilla_dim

    def _apply(self, x, inverse):
        rest = x.shape[1:]
        self.u._apply(x.reshape((self.u.dim, self.ancilla_dim) + rest), inverse)


def hadamard_product(n_qubits: int, extra: Sequence[np.ndarray] | None = None) -> QubitProduct:
    """W followed by one layer of per-qubit gates (``extra``), as a QubitProduct."""
    layers: list = ["wht"]
    if extra is not None:
        layers.append(np.asarray(extra))
    return QubitProduct(n_qubits, layers)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def near_identity_unitary(dim: int, distance: float, rng: np.random.Generator) -> np.ndarray:
    """Random unitary ``E`` with ``‖E - I‖ = distance`` (operator norm), ``distance < 2``."""
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    angle = 2 * np.arcsin(distance / 2)
    w = angle * w / np.max(np.abs(w))
    return (v * np.exp(1j * w)) @ v.conj().T


# --------------------------------------------------------------------------
# public kernel API


def apply_walsh_hadamard(state: StateVector) -> StateVector:
    _wht_inplace(state.amps)
    return state


def apply_unitary(state: StateVector, u: UnitaryFamily, inverse: bool = False) -> StateVector:
    return u.apply(state, inverse)


def apply_diagonal(state: StateVector, op) -> StateVector:
    """Multiply each amplitude by ``exp(i φ_j)``; ``op`` is a DiagonalPhaseOp."""
    return op.apply(state)


def inner_product(a, b) -> complex:
    """``⟨a|b⟩``."""
    xa, xb = _as_array(a), _as_array(b)
    if xa.shape != xb.shape:
        raise DimensionError(f"inner product of dims {xa.shape} and {xb.shape}")
    return complex(np.vdot(xa, xb))


def target_projection(state, targets: TargetSet) -> float:
    """Norm of the projection onto the target subspace, ``sqrt(Σ_{j∈T} |ψ_j|²)``."""
    x = _as_array(state)
    if x.shape[0] != targets.dim:
        raise DimensionError(f"state dim {x.shape[0]} != target-set dim {targets.dim}")
    sub = x[list(targets.indices)]
    return float(min(1.0, np.sqrt(np.real(np.vdot(sub, sub)))))


def fidelity(a, b) -> float:
    return abs(inner_product(a, b)) ** 2
