"""Selective transformations: exact inversions, phase rotations, perturbed
inversions with seeded noise, and conjugated (non-diagonal) operators.

Every operator here exposes ``apply(state, inverse=False)`` and ``dim``; the
search engines rely on nothing else.

Noise stream
------------
Perturbations are drawn from a counter-based splitmix64 stream so the same
seed yields the same phases in any language.  For seed ``s`` and counter
``k >= 1`` the raw word is::

    z = s + k * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    z = z ^ (z >> 31)

which is exactly the ``k``-th output of the sequential splitmix64 generator
seeded with ``s``.  Index ``j`` of the target-side operator uses counter
``2*j + 1`` and of the zero-side operator counter ``2*j + 2``, so the two
streams never share a word.  The word becomes ``u = (z >> 11) * 2**-53`` in
``[0, 1)`` and the ``uniform`` law sets the perturbation to ``Δ (2u - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .errors import DimensionError
from .statevector import DenseUnitary, TargetSet, _as_array, _check_dim

_MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
NOISE_LAWS = ("uniform", "fixed_offset", "per_index_list")


def splitmix64(seed: int, counters) -> np.ndarray:
    """Counter-based splitmix64 words for ``counters`` (array of ints >= 1)."""
    k = np.asarray(counters, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + k * np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniform01(seed: int, counters) -> np.ndarray:
    return (splitmix64(seed, counters) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def wrap_angle(x):
    """Map angles to ``(-π, π]``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def _indices(marked, dim: int) -> list[int]:
    if isinstance(marked, TargetSet):
        if marked.dim != dim:
            raise DimensionError(f"target set dim {marked.dim} != {dim}")
        return list(marked.indices)
    idx = [int(i) for i in marked]
    for i in idx:
        if not 0 <= i < dim:
            raise IndexError(f"index {i} out of range [0, {dim})")
    return idx


@dataclass(frozen=True, eq=False)
class DiagonalPhaseOp:
    """``Σ_j exp(i φ_j) |j⟩⟨j|``."""

    phases: np.ndarray

    def __post_init__(self):
        p = np.array(self.phases, dtype=np.float64)
        if p.ndim != 1:
            raise DimensionError("phases must be 1-d")
        _check_dim(p.shape[0])
        if not np.all(np.isfinite(p)):
            raise ValueError("phases must be finite")
        p.setflags(write=False)
        f = np.exp(1j * p)
        f.setflags(write=False)
        object.__setattr__(self, "phases", p)
        object.__setattr__(self, "_factors", f)

    @property
    def dim(self) -> int:
        return self.phases.shape[0]

    @property
    def factors(self) -> np.ndarray:
        return self._factors

    def apply(self, state, inverse: bool = False):
        x = _as_array(state)
        if x.shape[0] != self.dim:
            raise DimensionError(f"diagonal op has dim {self.dim}, state has {x.shape[0]}")
        f = self._factors.conj() if inverse else self._factors
        x *= f.reshape((-1,) + (1,) * (x.ndim - 1))
        return state

    def conjugate(self) -> "DiagonalPhaseOp":
        return DiagonalPhaseOp(-self.phases)

    def compose(self, other: "DiagonalPhaseOp") -> "DiagonalPhaseOp":
        if other.dim != self.dim:
            raise DimensionError("cannot compose diagonal ops of different dims")
        return DiagonalPhaseOp(self.phases + other.phases)

    def with_phase(self, index: int, angle: float) -> "DiagonalPhaseOp":
        p = self.phases.copy()
        p[index] = angle
        return DiagonalPhaseOp(p)

    def matrix(self) -> np.ndarray:
        return np.diag(self._factors)


@dataclass(frozen=True)
class NoiseSpec:
    """Bounds and sampling law for the phase errors of ``S_t`` and ``S_0``.

    ``eps`` / ``mu`` hold explicit per-index offsets for the ``per_index_list``
    law (length ``N``); they are ignored by the other laws.
    """

    delta_t: float = 0.0
    delta_0: float = 0.0
    law: str = "uniform"
    seed: int = 0
    eps: tuple[float, ...] | None = field(default=None, compare=True)
    mu: tuple[float, ...] | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.law not in NOISE_LAWS:
            raise ValueError(f"unknown noise law {self.law!r}; expected one of {NOISE_LAWS}")
        for name in ("delta_t", "delta_0"):
            d = getattr(self, name)
            if not (0.0 <= d < np.pi):
                raise ValueError(f"{name} must lie in [0, π), got {d}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name, bound in (("eps", self.delta_t), ("mu", self.delta_0)):
            vals = getattr(self, name)
            if vals is not None:
                vals = tuple(float(v) for v in vals)
                object.__setattr__(self, name, vals)
                if vals and max(abs(v) for v in vals) > bound:
                    raise ValueError(f"{name} offsets exceed their bound {bound}")

    def to_text(self) -> str:
        lines = [
            f"delta_t={self.delta_t!r}",
            f"delta_0={self.delta_0!r}",
            f"law={self.law}",
            f"seed={self.seed}",
        ]
        if self.eps is not None:
            lines.append("eps=" + ",".join(repr(v) for v in self.eps))
        if self.mu is not None:
            lines.append("mu=" + ",".join(repr(v) for v in self.mu))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NoiseSpec":
        kv = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        return cls.from_mapping(kv)

    @classmethod
    def from_mapping(cls, kv) -> "NoiseSpec":
        def floats(s):
            return tuple(float(v) for v in s.split(",") if v.strip())

        return cls(
            delta_t=float(kv.get("delta_t", 0.0)),
            delta_0=float(kv.get("delta_0", 0.0)),
            law=kv.get("law", "uniform"),
            seed=int(kv.get("seed", 0)),
            eps=floats(kv["eps"]) if kv.get("eps") else None,
            mu=floats(kv["mu"]) if kv.get("mu") else None,
        )

    def offsets(self, dim: int, which: str) -> np.ndarray:
        """Per-index phase perturbations for the ``target`` or ``zero`` operator."""
        if which not in ("target", "zero"):
            raise ValueError("which must be 'target' or 'zero'")
        delta = self.delta_t if which == "target" else self.delta_0
        if self.law == "per_index_list":
            vals = self.eps if which == "target" else self.mu
            if vals is None:
                return np.zeros(dim)
            if len(vals) != dim:
                raise DimensionError(f"per-index list has {len(vals)} entries, need {dim}")
            return np.array(vals, dtype=float)
        if delta == 0.0:
            return np.zeros(dim)
        if self.law == "fixed_offset":
            return np.full(dim, delta)
        stream = 1 if which == "target" else 2
        u = uniform01(self.seed, 2 * np.arange(dim, dtype=np.uint64) + np.uint64(stream))
        return delta * (2.0 * u - 1.0)


# --------------------------------------------------------------------------
# builders


def build_selective_rotation(dim: int, marked, angles) -> DiagonalPhaseOp:
    """Rotate the phase of each marked index by its angle; identity elsewhere.

    ``angles`` is a scalar (same angle everywhere) or one angle per marked index.
    Angle ``π`` on every marked index gives the exact selective inversion.
    """
    dim = _check_dim(dim)
    idx = _indices(marked, dim)
    a = np.broadcast_to(np.asarray(angles, dtype=float), (len(idx),))
    phases = np.zeros(dim)
    phases[idx] = a
    return DiagonalPhaseOp(phases)


def selective_inversion(dim: int, marked) -> DiagonalPhaseOp:
    return build_selective_rotation(dim, marked, np.pi)


def sample_perturbed_inversion(dim: int, marked, noise: NoiseSpec, which: str) -> DiagonalPhaseOp:
    """``π·[j marked] + perturbation_j`` with ``|perturbation_j|`` bounded by the noise delta.

    ``which='target'`` draws the ``ε`` stream (bounded by ``delta_t``),
    ``which='zero'`` the ``μ`` stream (bounded by ``delta_0``).
    """
    dim = _check_dim(dim)
    idx = _indices(marked, dim)
    phases = noise.offsets(dim, which).copy()
    phases[idx] += np.pi
    return DiagonalPhaseOp(phases)


def ideal_phases(dim: int, marked) -> np.ndarray:
    p = np.zeros(dim)
    p[_indices(marked, dim)] = np.pi
    return p


def phase_errors(op: DiagonalPhaseOp, marked) -> np.ndarray:
    """Per-index deviation of ``op`` from the selective inversion of ``marked``, in ``(-π, π]``."""
    return wrap_angle(op.phases - ideal_phases(op.dim, marked))


def operator_distance(op: DiagonalPhaseOp, marked) -> float:
    """``‖op - I_marked‖`` in operator norm, i.e. ``2 max_j |sin(ε_j / 2)|``."""
    ideal = np.exp(1j * ideal_phases(op.dim, marked))
    return float(np.max(np.abs(op.factors - ideal)))


class ConjugatedOp:
    """``E · D · E†`` for a dense basis change ``E`` and diagonal core ``D``."""

    def __init__(self, basis: DenseUnitary, core: DiagonalPhaseOp):
        if basis.dim != core.dim:
            raise DimensionError(f"basis dim {basis.dim} != core dim {core.dim}")
        self.basis = basis
        self.core = core

    @property
    def dim(self) -> int:
        return self.core.dim

    def apply(self, state, inverse: bool = False):
        x = _as_array(state)
        self.basis.apply(x, inverse=True)
        self.core.apply(x, inverse=inverse)
        self.basis.apply(x)
        return state

    def matrix(self) -> np.ndarray:
        e = self.basis.matrix()
        return (e * self.core.factors) @ e.conj().T


def build_conjugated(basis, core: DiagonalPhaseOp) -> ConjugatedOp:
    if not isinstance(basis, DenseUnitary):
        basis = DenseUnitary(basis)
    return ConjugatedOp(basis, core)


def selectivity_diagnostics(basis, index: int) -> float:
    """``|E_{ii}|``; values well below 1 mean the operator is not really selective."""
    m = basis.matrix() if hasattr(basis, "matrix") else np.asarray(basis)
    return float(abs(m[index, index]))
