"""Search register coupled to an ancilla workspace.

Joint index ``j * 2**w + k`` holds search item ``j`` and workspace value
``k``; the workspace sits in the low bits so ``U ⊗ I`` is :class:`Lifted`.
The imperfect oracle acts as ``A`` on the workspace of marked items and as
``B`` on the rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..errors import ConfigError, DimensionError
from ..selective import wrap_angle
from ..statevector import TargetSet, _as_array, ry
from .config import parse_angle

MAX_JOINT_DIM = 1 << 20


def parse_workspace_op(spec: str, w: int) -> np.ndarray:
    """Build a ``2**w`` workspace unitary from a short spec string.

    ``identity``, ``neg_identity``, ``phase:a`` (``e^{ia} I``), ``ry:a`` and
    ``neg_ry:a`` (``±R_y(a)`` on every workspace qubit).  Angles accept
    ``pi`` literals.
    """
    dim = 1 << w
    name, _, arg = spec.strip().partition(":")
    try:
        if name == "identity":
            return np.eye(dim, dtype=np.complex128)
        if name == "neg_identity":
            return -np.eye(dim, dtype=np.complex128)
        angle = parse_angle(arg)
        if name == "phase":
            return np.exp(1j * angle) * np.eye(dim, dtype=np.complex128)
        if name in ("ry", "neg_ry"):
            m = reduce(np.kron, [ry(angle)] * w)
            return -m if name == "neg_ry" else m
    except ValueError as exc:
        raise ConfigError("workspace", f"bad operator spec {spec!r}: {exc}") from exc
    raise ConfigError("workspace", f"unknown workspace operator {spec!r}")


@dataclass
class WorkspaceSpec:
    search_qubits: int
    ancilla_qubits: int
    a_op: np.ndarray
    b_op: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.ancilla_qubits <= 4:
            raise ValueError("ancilla_qubits must lie in [1, 4]")
        w = 1 << self.ancilla_qubits
        if self.b_op is None:
            self.b_op = np.eye(w, dtype=np.complex128)
        for name in ("a_op", "b_op"):
            m = np.asarray(getattr(self, name), dtype=np.complex128)
            if m.shape != (w, w):
                raise DimensionError(f"{name} must be {w}x{w}")
            if np.max(np.abs(m.conj().T @ m - np.eye(w))) > 1e-10:
                raise ValueError(f"{name} is not unitary")
            setattr(self, name, m)
        if self.joint_dim > MAX_JOINT_DIM:
            raise DimensionError(f"joint dimension {self.joint_dim} exceeds 2^20")

    @property
    def ancilla_dim(self) -> int:
        return 1 << self.ancilla_qubits

    @property
    def joint_dim(self) -> int:
        return (1 << self.search_qubits) * self.ancilla_dim

    @property
    def b_is_identity(self) -> bool:
        return bool(np.allclose(self.b_op, np.eye(self.ancilla_dim), atol=1e-14))

    def distances(self) -> tuple[float, float]:
        """Largest eigenphase deviation of ``A`` from ``π`` and of ``B`` from ``0``."""
        ea = np.angle(np.linalg.eigvals(self.a_op))
        eb = np.angle(np.linalg.eigvals(self.b_op))
        return float(np.max(np.abs(wrap_angle(ea - np.pi)))), float(np.max(np.abs(eb)))


class WorkspaceOracle:
    """``Σ_j |j⟩⟨j| ⊗ (A if j ∈ T else B)`` on the joint register."""

    def __init__(self, ws: WorkspaceSpec, targets: TargetSet):
        if targets.dim != 1 << ws.search_qubits:
            raise DimensionError("target set does not match the search register")
        self.ws = ws
        self.dim = ws.joint_dim
        self._mask = targets.mask()
        self._a, self._b = ws.a_op, ws.b_op
        self._b_trivial = ws.b_is_identity

    def apply(self, state, inverse: bool = False):
        x = _as_array(state)
        if x.shape[0] != self.dim:
            raise DimensionError(f"oracle has dim {self.dim}, state has {x.shape[0]}")
        v = x.reshape((-1, self.ws.ancilla_dim) + x.shape[1:])
        a = self._a.conj().T if inverse else self._a
        v[self._mask] = np.einsum("ab,tb...->ta...", a, v[self._mask])
        if not self._b_trivial:
            b = self._b.conj().T if inverse else self._b
            rest = ~self._mask
            v[rest] = np.einsum("ab,tb...->ta...", b, v[rest])
        return state
