"""Continuous-time search Hamiltonians and exact dense evolution.

``H_v = I - |v⟩⟨v|`` is the projector Hamiltonian penalising everything
orthogonal to ``|v⟩``.  Supported kinds:

* ``fg``            ``H_{U|0⟩} + H_{|t⟩}``
* ``fg_perturbed``  ``(1-s) H_{U|0⟩} + (1+s) H_{|t⟩}``
* ``new``           ``H_{U|0⟩} + Rt† H_{U|0⟩} Rt``

``|t⟩`` is the normalised target-subspace part of ``U|0⟩``.  Evolution uses
one eigendecomposition per Hamiltonian, so it is exact to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CapabilityError, DimensionError
from .search import compute_subspace_frame
from .statevector import MAX_DENSE_DIM, StateVector, TargetSet, UnitaryFamily, _as_array

KINDS = ("fg", "fg_perturbed", "new")


def projector_hamiltonian(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    return np.eye(v.shape[0], dtype=np.complex128) - np.outer(v, v.conj())


@dataclass(eq=False)
class SearchHamiltonian:
    kind: str
    u: UnitaryFamily
    targets: TargetSet
    rt: object = None
    s: float = 0.0
    scale: float = 1.0
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.u.dim > MAX_DENSE_DIM:
            raise CapabilityError(f"dense Hamiltonian of dim {self.u.dim} exceeds {MAX_DENSE_DIM}")
        if self.targets.dim != self.u.dim:
            raise DimensionError("target set and U disagree on dimension")
        u0 = self.u.column0()
        h0 = projector_hamiltonian(u0)
        if self.kind == "new":
            if self.rt is None:
                raise ValueError("the 'new' Hamiltonian needs a target rotation rt")
            f = self.rt.factors
            h = h0 + (f.conj()[:, None] * h0) * f[None, :]
        else:
            s = self.s if self.kind == "fg_perturbed" else 0.0
            t = np.zeros_like(u0)
            idx = list(self.targets.indices)
            t[idx] = u0[idx]
            if np.linalg.norm(t) == 0:
                raise ValueError("U|0⟩ has no target component; |t⟩ is undefined")
            h = (1 - s) * h0 + (1 + s) * projector_hamiltonian(t)
        h = self.scale * h
        herm = np.max(np.abs(h - h.conj().T))
        if herm > 1e-12:
            raise ArithmeticError(f"Hamiltonian is not Hermitian (max deviation {herm:.3g})")
        self.matrix = (h + h.conj().T) / 2
        self._eig = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = np.linalg.eigh(self.matrix)
        return self._eig

    def norm(self) -> float:
        w, _ = self.eig
        return float(np.max(np.abs(w)))

    def energy(self, state) -> float:
        x = _as_array(state)
        return float(np.real(np.vdot(x, self.matrix @ x)))

    def initial_state(self) -> StateVector:
        return self.u.initial_state()

    def tau(self) -> np.ndarray:
        """The ``|τ⟩`` direction of the rotation oracle (only for kind ``new``)."""
        return compute_subspace_frame(self.u, self.rt, self.targets).tau

    def evolution_basis(self) -> np.ndarray:
        """Orthonormal basis of the 2-d subspace the dynamics is confined to."""
        u0 = self.u.column0()
        if self.kind == "new":
            other = self.rt.apply(u0.copy(), inverse=True)
        else:
            other = np.zeros_like(u0)
            idx = list(self.targets.indices)
            other[idx] = u0[idx]
        q, _ = np.linalg.qr(np.stack([u0, other], axis=1))
        return q


def build_hamiltonian(kind: str, u: UnitaryFamily, targets: TargetSet, rt=None, s: float = 0.0,
                      scale: float = 1.0) -> SearchHamiltonian:
    return SearchHamiltonian(kind, u, targets, rt=rt, s=s, scale=scale)


def evolve(h: SearchHamiltonian, state, time: float, step: float | None = None) -> StateVector:
    """``exp(-i H time) |state⟩``.

    With ``step`` the time is split into equal sub-intervals no longer than
    ``step`` and the eigenphases are advanced one sub-interval at a time.
    """
    x = _as_array(state)
    if x.shape[0] != h.dim:
        raise DimensionError(f"state dim {x.shape[0]} != Hamiltonian dim {h.dim}")
    w, v = h.eig
    c = v.conj().T @ x
    if step is None or time == 0:
        c = c * np.exp(-1j * w * time)
    else:
        if step <= 0 or step > 0.05 / max(h.norm(), 1e-300) * (1 + 1e-12):
            raise ValueError(f"step must lie in (0, 0.05/‖H‖] = (0, {0.05 / h.norm():.4g}]")
        n = max(1, math.ceil(abs(time) / step))
        phase = np.exp(-1j * w * (time / n))
        for _ in range(n):
            c *= phase
    return StateVector(v @ c)


@dataclass
class Scan:
    times: np.ndarray
    probabilities: np.ndarray
    peak_time: float
    peak_probability: float

    def rows(self):
        return list(zip(self.times.tolist(), self.probabilities.tolist()))


def _probability_fn(h: SearchHamiltonian, measure, state):
    w, v = h.eig
    c = v.conj().T @ _as_array(state)
    if isinstance(measure, TargetSet):
        rows = v[list(measure.indices), :]

        def prob(times):
            amps = rows @ (np.exp(-1j * np.outer(w, np.atleast_1d(times))) * c[:, None])
            return np.sum(np.abs(amps) ** 2, axis=0)
    else:
        vec = np.asarray(measure, dtype=np.complex128)
        vec = vec / np.linalg.norm(vec)
        proj = vec.conj() @ v

        def prob(times):
            amps = proj @ (np.exp(-1j * np.outer(w, np.atleast_1d(times))) * c[:, None])
            return np.abs(amps) ** 2

    return prob


def scan_target_probability(h: SearchHamiltonian, measure, t_max: float, samples: int,
                            state=None) -> Scan:
    """Probability of ``measure`` at ``samples`` evenly spaced times in ``[0, t_max]``.

    ``measure`` is a TargetSet (subspace probability) or a vector (probability
    of that direction, e.g. ``h.tau()``).  The peak is refined by a bounded
    golden-section search between the neighbours of the best sample.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if state is None:
        state = h.initial_state()
    prob = _probability_fn(h, measure, state)
    times = np.linspace(0.0, t_max, samples)
    probs = np.clip(prob(times), 0.0, 1.0)
    k = int(np.argmax(probs))
    lo, hi = times[max(k - 1, 0)], times[min(k + 1, samples - 1)]
    peak_t, peak_p = float(times[k]), float(probs[k])
    if hi > lo:
        res = minimize_scalar(lambda t: -prob(t)[0], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * max(1.0, t_max)})
        if -res.fun > peak_p:
            peak_t, peak_p = float(res.x), float(min(1.0, -res.fun))
    return Scan(times, probs, peak_t, peak_p)
