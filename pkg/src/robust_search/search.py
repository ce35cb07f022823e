"""Search engines and the analytic quantities used to check them.

Three engines share one oracle-counting convention: every application of the
target-side operator (or its inverse) is one query.

* :func:`run_amplitude_amplification` iterates ``U S0 U† St``.
* :func:`run_iterative` iterates the phase-matched step
  ``U R0(-ϕ) U† Rt† U R0(ϕ) U† Rt`` (two queries per step).
* :func:`run_recursive` builds ``U_m = U_{m-1} S0 U_{m-1}† St U_{m-1}`` as an
  operator call tree on a single vector.

Operators only need ``apply(x, inverse=False)`` and ``dim``, so diagonal,
conjugated and workspace oracles all plug in unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DimensionError, DivergenceError
from .selective import DiagonalPhaseOp, build_selective_rotation, phase_errors, wrap_angle
from .statevector import StateVector, TargetSet, UnitaryFamily, _as_array, target_projection

THETA_MIN = 1e-9


# --------------------------------------------------------------------------
# trajectories


@dataclass
class StepRecord:
    step_index: int
    oracle_queries: int
    alpha: float
    success_prob: float
    angle_to_sigma: float | None = None
    overlap_tau: float | None = None


@dataclass
class RunTrajectory:
    steps: list[StepRecord] = field(default_factory=list)
    truncated: bool = False
    final_state: StateVector | None = None
    states: list[np.ndarray] | None = None
    frame: "SubspaceFrame | None" = None

    def record(self, x, targets, queries, sigma=None, tau=None, keep_state=False):
        alpha = target_projection(x, targets)
        angle = overlap = None
        if sigma is not None:
            angle = math.acos(min(1.0, abs(np.vdot(sigma, x))))
        if tau is not None:
            overlap = min(1.0, abs(np.vdot(tau, x)))
        self.steps.append(
            StepRecord(len(self.steps), int(queries), alpha, alpha * alpha, angle, overlap)
        )
        if keep_state:
            if self.states is None:
                self.states = []
            self.states.append(np.array(x, copy=True))

    def __len__(self):
        return len(self.steps)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([s.alpha for s in self.steps])

    @property
    def success(self) -> np.ndarray:
        return np.array([s.success_prob for s in self.steps])

    @property
    def queries(self) -> np.ndarray:
        return np.array([s.oracle_queries for s in self.steps], dtype=np.int64)

    @property
    def kappas(self) -> np.ndarray:
        """Ratio of successive target projections (amplification per step or level)."""
        a = self.alphas
        return a[1:] / a[:-1]


# --------------------------------------------------------------------------
# amplitude amplification baseline


def grover_iterations(alpha: float) -> int:
    """``⌊π / (4 arcsin α)⌋``, the iteration count that peaks the success probability."""
    return int(math.floor(math.pi / (4 * math.asin(alpha))))


def run_amplitude_amplification(
    u: UnitaryFamily, s0, st, n_iters, targets: TargetSet, keep_states: bool = False
) -> RunTrajectory:
    """Iterate ``U S0 U† St`` on ``U|0⟩``, recording the target projection each step."""
    x = u.column0()
    if n_iters == "auto":
        n_iters = grover_iterations(target_projection(x, targets))
    if n_iters < 0:
        raise ValueError("n_iters must be non-negative")
    traj = RunTrajectory()
    traj.record(x, targets, 0, keep_state=keep_states)
    for k in range(1, n_iters + 1):
        st.apply(x)
        u.apply(x, inverse=True)
        s0.apply(x)
        u.apply(x)
        traj.record(x, targets, k, keep_state=keep_states)
    traj.final_state = StateVector(x)
    return traj


# --------------------------------------------------------------------------
# iterative algorithm


class TStep:
    """``U R0† U† Rt† U R0 U† Rt``; with ``R0 = R0(ϕ)`` this is the phase-matched step."""

    queries_per_step = 2

    def __init__(self, u: UnitaryFamily, r0, rt):
        if not (u.dim == r0.dim == rt.dim):
            raise DimensionError("U, R0 and Rt must share a dimension")
        self.u, self.r0, self.rt = u, r0, rt
        self.dim = u.dim

    def apply(self, state, inverse: bool = False):
        x = _as_array(state)
        u, r0, rt = self.u, self.r0, self.rt
        if not inverse:
            rt.apply(x)
            u.apply(x, inverse=True)
            r0.apply(x)
            u.apply(x)
            rt.apply(x, inverse=True)
            u.apply(x, inverse=True)
            r0.apply(x, inverse=True)
            u.apply(x)
        else:
            u.apply(x, inverse=True)
            r0.apply(x)
            u.apply(x)
            rt.apply(x)
            u.apply(x, inverse=True)
            r0.apply(x, inverse=True)
            u.apply(x)
            rt.apply(x, inverse=True)
        return state


def build_T_step(u: UnitaryFamily, rt, varphi: float) -> TStep:
    if math.isclose(math.remainder(varphi, 2 * math.pi), 0.0, abs_tol=1e-15):
        raise ValueError("varphi must not be a multiple of 2π (the step would be the identity)")
    return TStep(u, build_selective_rotation(u.dim, [0], varphi), rt)


@dataclass
class SubspaceFrame:
    """Orthonormal pair with ``U|0⟩ = cos θ |σ⟩ + sin θ |τ⟩``.

    ``sigma`` is ``Rt†U|0⟩`` multiplied by the phase ``chi`` that makes
    ``⟨σ|U|0⟩`` real and non-negative.
    """

    sigma: np.ndarray
    tau: np.ndarray
    theta: float
    chi: complex

    def leakage(self, x) -> float:
        """Norm of the part of ``x`` outside ``span{σ, τ}``."""
        x = _as_array(x)
        r = x - np.vdot(self.sigma, x) * self.sigma - np.vdot(self.tau, x) * self.tau
        return float(np.linalg.norm(r))


def compute_subspace_frame(u: UnitaryFamily, rt, targets: TargetSet | None = None) -> SubspaceFrame:
    u0 = u.column0()
    sigma = rt.apply(u0.copy(), inverse=True)
    c = np.vdot(sigma, u0)
    cos_t = min(1.0, abs(c))
    theta = math.acos(cos_t)
    if theta < THETA_MIN:
        raise DegenerateError(f"oracle acts trivially on U|0⟩ (θ = {theta:.3g})")
    chi = c / abs(c) if abs(c) > 1e-15 else 1.0 + 0j
    sigma *= chi
    tau = (u0 - cos_t * sigma) / math.sin(theta)
    return SubspaceFrame(sigma, tau, theta, complex(chi))


def iterative_steps(theta: float, varphi: float) -> int:
    return int(math.floor(math.pi / (4 * theta * math.sin(varphi / 2))))


def run_iterative(
    u: UnitaryFamily,
    rt,
    varphi: float,
    targets: TargetSet,
    n_iters="auto",
    r0=None,
    keep_states: bool = False,
) -> RunTrajectory:
    """Iterate the phase-matched step from ``U|0⟩``.

    ``n_iters="auto"`` stops at ``⌊π / (4 θ sin(ϕ/2))⌋`` using the measured
    ``θ``.  ``r0`` replaces the default ``R0(ϕ)`` (used for conjugated
    operators); ``varphi`` still sets the stopping rule.
    """
    frame = compute_subspace_frame(u, rt, targets)
    step = build_T_step(u, rt, varphi) if r0 is None else TStep(u, r0, rt)
    if n_iters == "auto":
        n_iters = iterative_steps(frame.theta, varphi)
    x = u.column0()
    traj = RunTrajectory()
    traj.record(x, targets, 0, frame.sigma, frame.tau, keep_states)
    for k in range(1, n_iters + 1):
        step.apply(x)
        traj.record(x, targets, 2 * k, frame.sigma, frame.tau, keep_states)
    traj.final_state = StateVector(x)
    traj.frame = frame
    return traj


def predicted_angle(theta: float, varphi: float, n) -> np.ndarray:
    """``θ (1 + 2 n sin(ϕ/2))``."""
    return theta * (1 + 2 * np.asarray(n) * math.sin(varphi / 2))


def predict_iterative_queries(u: UnitaryFamily, rt: DiagonalPhaseOp, varphi: float) -> float:
    """``Q = π / (4 sin(ϕ/2) sqrt(Σ_j |U_j0|² sin²(φ_j/2)))``.

    Off-target phases are zero for a rotation oracle, so the sum may run over
    all indices.
    """
    w = np.abs(u.column0()) ** 2
    s = float(np.sum(w * np.sin(rt.phases / 2) ** 2))
    denom = 4 * math.sin(varphi / 2) * math.sqrt(s)
    if abs(denom) < 1e-15:
        raise DivergenceError("query count diverges: the oracle or R0 rotation vanishes")
    return math.pi / denom


def grover_queries(alpha: float) -> float:
    return math.pi / (4 * alpha)


# --------------------------------------------------------------------------
# recursive algorithm


class RecursiveUnitary(UnitaryFamily):
    """``U_m`` applied as a call tree; ``queries`` counts target-operator uses."""

    kind = "recursive"

    def __init__(self, u: UnitaryFamily, s0, st, level: int):
        if level < 0:
            raise ValueError("level must be non-negative")
        if not (u.dim == s0.dim == st.dim):
            raise DimensionError("U, S0 and St must share a dimension")
        self.u, self.s0, self.st, self.level = u, s0, st, level
        self.dim = u.dim
        self.queries = 0

    def _apply(self, x, inverse):
        self._level(x, self.level, inverse)

    def _level(self, x, level, inverse):
        if level == 0:
            self.u._apply(x, inverse)
            return
        lower = level - 1
        if not inverse:
            self._level(x, lower, False)
            self.st.apply(x)
            self._level(x, lower, True)
            self.s0.apply(x)
            self._level(x, lower, False)
        else:
            self._level(x, lower, True)
            self.s0.apply(x, inverse=True)
            self._level(x, lower, False)
            self.st.apply(x, inverse=True)
            self._level(x, lower, True)
        self.queries += 1


def recursion_query_count(m: int) -> int:
    """``(3^m - 1) / 2``, the queries used by ``U_m``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    q = (3**m - 1) // 2
    if q > 2**63 - 1:
        raise OverflowError(f"query count for m={m} exceeds 64 bits")
    return q


def run_recursive(
    u: UnitaryFamily, s0, st, targets: TargetSet, levels: int, budget: int | None = None
) -> tuple[RunTrajectory, StateVector]:
    """Build ``U_l|0⟩`` for ``l = 0..levels`` and record ``α`` per level.

    Stops before any level whose query count would exceed ``budget`` and sets
    ``truncated`` on the trajectory.
    """
    if levels < 0:
        raise ValueError("levels must be non-negative")
    traj = RunTrajectory()
    x = u.column0()
    for level in range(levels + 1):
        if budget is not None and recursion_query_count(level) > budget:
            traj.truncated = True
            break
        op = RecursiveUnitary(u, s0, st, level)
        x = op.column0()
        traj.record(x, targets, op.queries)
    state = StateVector(x)
    traj.final_state = state
    return traj, state


def kappa_bar(delta_t: float, delta_0: float) -> float:
    return 3 - (7 / 3) * delta_t**2 - (2 / 3) * delta_t * delta_0 - (1 / 3) * delta_0**2


def ratio_bound(delta_t: float, delta_0: float, alpha: float) -> float:
    """Upper bound on ``3 - ρ_j`` (and ``3 - κ`` when ``S0`` only rotates ``|0⟩``)."""
    return 3 - kappa_bar(delta_t, delta_0) + 4 * alpha**2


def kappa_lower_bound(delta_t: float, delta_0: float, alpha: float) -> float:
    return kappa_bar(delta_t, delta_0) - 4 * alpha**2


def exponent_p(delta_t: float, delta_0: float) -> float:
    """``log 3 / log κ̄ - 1``: the query complexity is ``O(α^-(1+p))``."""
    kb = kappa_bar(delta_t, delta_0)
    if kb <= 1:
        raise ValueError(f"κ̄ = {kb:.4g} <= 1: noise too large for the amplification bound")
    return math.log(3) / math.log(kb) - 1


def exponent_p_bound(delta_t: float, delta_0: float) -> float:
    """The closed-form quadratic upper estimate ``0.71Δt² + 0.20ΔtΔ0 + 0.10Δ0²``."""
    return 0.71 * delta_t**2 + 0.20 * delta_t * delta_0 + 0.10 * delta_0**2


@dataclass
class RecursionDiagnostics:
    """Decomposition of one recursion level into the quantities of the κ analysis.

    Per-target arrays are aligned with ``targets`` (targets with ``U_j0 = 0``
    are listed in ``excluded`` and dropped).  ``c_terms[:, k]`` holds
    ``C_{k+1, j}``; ``|Σ_k C_kj|`` reproduces ``rho`` exactly because the
    terms use ``sin γ_j`` rather than its small-angle value.
    """

    alpha: float
    beta: complex
    xi: float
    mu0: float
    beta_prime: float
    beta_bar: float
    targets: tuple[int, ...]
    excluded: tuple[int, ...]
    eps: np.ndarray
    xi_prime: np.ndarray
    special_ratio: np.ndarray
    rho: np.ndarray
    kappa: float
    gamma: np.ndarray
    c_terms: np.ndarray
    xy_overlap: np.ndarray
    condition_lhs: np.ndarray
    condition_rhs: np.ndarray
    phase_correlation: float
    dim: int
    condition_margin: float = 0.1

    @property
    def condition_holds(self) -> np.ndarray:
        """``γ_j β̄ / √N <= margin · 3|U_j0|``: the "much less than" read with a 10x margin."""
        return self.condition_lhs <= self.condition_margin * self.condition_rhs

    @property
    def random_overlap_ok(self) -> np.ndarray:
        """Whether ``|⟨x_j|y⟩|`` is within 10x of the random-vector value ``1/√N``."""
        return self.xy_overlap <= 10 / math.sqrt(self.dim)

    @property
    def correlated(self) -> bool:
        return abs(self.phase_correlation) > 0.5

    def beta_bounds(self, delta_t: float) -> tuple[bool, bool]:
        re_ok = (1 - self.beta.real) <= 0.5 * delta_t**2 + 2 * self.alpha**2 + 1e-12
        im_ok = abs(self.beta.imag) <= delta_t + 1e-12
        return re_ok, im_ok

    def beta_prime_bound(self, delta_t: float, delta_0: float) -> bool:
        rhs = 0.5 * delta_t**2 + 0.125 * delta_0**2 + 2 * self.alpha**2
        return (1 - self.beta_prime) <= rhs + 1e-12

    def xi_prime_bound(self, delta_t: float, delta_0: float) -> np.ndarray:
        return np.abs(self.xi_prime) <= 2 * delta_t + 0.5 * delta_0 + 1e-12

    def beta_bar_bound(self, delta_t: float) -> bool:
        return self.beta_bar <= math.sqrt(delta_t**2 + 4 * self.alpha**2) + 1e-9

    def report(self) -> str:
        lines = [
            f"alpha={self.alpha:.6g} beta={self.beta:.6g} beta_bar={self.beta_bar:.6g} "
            f"kappa={self.kappa:.6g} phase_correlation={self.phase_correlation:.3g}"
        ]
        for k, j in enumerate(self.targets):
            lines.append(
                f"target={j} rho={self.rho[k]:.6g} gamma={self.gamma[k]:.4g} "
                f"lhs={self.condition_lhs[k]:.4g} rhs={self.condition_rhs[k]:.4g} "
                f"holds={bool(self.condition_holds[k])} |<x|y>|={self.xy_overlap[k]:.4g}"
            )
        if self.excluded:
            lines.append("excluded (U_j0 = 0): " + ",".join(map(str, self.excluded)))
        if self.correlated:
            lines.append("warning: St and S0 phase errors are correlated")
        return "\n".join(lines)


def compute_recursion_diagnostics(
    u: UnitaryFamily, s0: DiagonalPhaseOp, st: DiagonalPhaseOp, targets: TargetSet
) -> RecursionDiagnostics:
    n = u.dim
    u0 = u.column0()
    alpha = target_projection(u0, targets)
    eps_all = phase_errors(st, targets)
    mu_all = phase_errors(s0, [0])

    psi = st.factors * u0
    beta = complex(np.vdot(u0, psi))
    xi = float(np.angle(beta))
    phi0 = float(s0.phases[0])
    mu0 = float(mu_all[0])
    beta_prime = math.cos(mu0 / 2) * abs(beta)
    psi_p = psi - (1 - np.exp(1j * phi0)) * beta * u0

    u1 = psi.copy()
    u.apply(u1, inverse=True)
    s0.apply(u1)
    u.apply(u1)
    kappa = target_projection(u1, targets) / alpha

    rest = psi_p - np.exp(1j * phi0) * beta * u0
    beta_bar = math.sqrt(max(0.0, 1 - abs(beta) ** 2))
    y = rest / beta_bar if beta_bar > 1e-15 else np.zeros_like(rest)

    s0_prime = s0.with_phase(0, 0.0)
    kept = [j for j in targets.indices if abs(u0[j]) > 1e-14]
    excluded = tuple(j for j in targets.indices if j not in kept)
    m = len(kept)
    gamma = np.zeros(m)
    c_terms = np.zeros((m, 3), dtype=np.complex128)
    xy = np.zeros(m)
    rho = np.zeros(m)
    for k, j in enumerate(kept):
        col = np.zeros(n, dtype=np.complex128)
        col[j] = 1.0
        u.apply(col, inverse=True)
        s0_prime.apply(col, inverse=True)
        u.apply(col)
        row = col.conj()
        d = row[j]
        cos_g = min(1.0, abs(d))
        g = math.acos(cos_g)
        sin_g = math.sin(g)
        if sin_g > 1e-15:
            eta = d / abs(d)
            x_row = row.copy()
            x_row[j] = 0.0
            x_row /= eta * sin_g
        else:
            x_row = np.zeros(n, dtype=np.complex128)
        c1 = cos_g * np.exp(1j * st.phases[j]) * (
            1 + 2 * beta_prime * np.exp(1j * (xi - eps_all[j] + mu0 / 2))
        )
        c2 = sin_g * np.exp(1j * phi0) * beta * (x_row @ u0) / u0[j]
        xy_j = x_row @ y
        c3 = sin_g * beta_bar * xy_j / u0[j]
        gamma[k] = g
        c_terms[k] = (c1, c2, c3)
        xy[k] = abs(xy_j)
        rho[k] = abs(u1[j] / u0[j])

    kept_idx = np.array(kept, dtype=int)
    xi_prime = wrap_angle(xi - eps_all[kept_idx] + mu0 / 2) if m else np.zeros(0)
    special = np.abs(psi_p[kept_idx] / u0[kept_idx]) if m else np.zeros(0)

    mask = np.ones(n, dtype=bool)
    mask[list(targets.indices)] = False
    mask[0] = False
    e, mu = eps_all[mask], mu_all[mask]
    corr = 0.0
    if e.size > 2 and np.std(e) > 0 and np.std(mu) > 0:
        corr = float(np.corrcoef(e, mu)[0, 1])

    return RecursionDiagnostics(
        alpha=alpha,
        beta=beta,
        xi=xi,
        mu0=mu0,
        beta_prime=beta_prime,
        beta_bar=beta_bar,
        targets=tuple(kept),
        excluded=excluded,
        eps=eps_all[kept_idx],
        xi_prime=np.atleast_1d(xi_prime),
        special_ratio=special,
        rho=rho,
        kappa=kappa,
        gamma=gamma,
        c_terms=c_terms,
        xy_overlap=xy,
        condition_lhs=gamma * beta_bar / math.sqrt(n),
        condition_rhs=3 * np.abs(u0[kept_idx]),
        phase_correlation=corr,
        dim=n,
    )
