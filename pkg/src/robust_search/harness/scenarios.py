"""Deterministic scenario runners.

Each runner takes a validated :class:`ExperimentConfig` and returns a
:class:`ScenarioResult`: the measured trajectory (or Hamiltonian scan) plus a
summary that always carries predicted and measured values side by side.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import search
from ..errors import CapabilityError, ConfigError
from ..hamiltonian import build_hamiltonian, scan_target_probability
from ..search import (
    RecursiveUnitary,
    TStep,
    compute_recursion_diagnostics,
    exponent_p,
    exponent_p_bound,
    grover_iterations,
    kappa_lower_bound,
    predict_iterative_queries,
    recursion_query_count,
    run_amplitude_amplification,
    run_iterative,
    run_recursive,
)
from ..selective import (
    ConjugatedOp,
    build_selective_rotation,
    phase_errors,
    sample_perturbed_inversion,
    selectivity_diagnostics,
)
from ..statevector import (
    MAX_DENSE_DIM,
    Composed,
    DenseUnitary,
    Lifted,
    QubitProduct,
    TargetSet,
    WalshHadamard,
    haar_unitary,
    near_identity_unitary,
    target_projection,
)
from .config import ExperimentConfig
from .csvio import result_csv
from .workspace import WorkspaceOracle, WorkspaceSpec, parse_workspace_op

log = logging.getLogger(__name__)

SELECTIVITY_WARN = 0.9
DEFAULT_REPETITION_C = 0.5


@dataclass
class ScenarioResult:
    result: object
    summary: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def csv(self, prefix=()) -> str:
        return result_csv(self.result, prefix)

    def summary_text(self) -> str:
        lines = []
        for k, v in self.summary.items():
            if isinstance(v, float):
                v = format(v, ".12g")
            elif isinstance(v, (list, tuple)):
                v = ",".join(format(x, ".12g") if isinstance(x, float) else str(x) for x in v)
            lines.append(f"{k}={v}")
        lines.extend(f"warning={w}" for w in self.warnings)
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# building blocks


def build_unitary(cfg: ExperimentConfig):
    spec, n = cfg.unitary, cfg.n_qubits
    dim = 1 << n
    if spec.kind == "walsh_hadamard":
        return WalshHadamard(dim)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "qubit_product":
        angles = spec.spread * (2 * rng.random((n, 2)) - 1)
        gates = []
        for a, b in angles:
            rz = np.diag([np.exp(-0.5j * b), np.exp(0.5j * b)])
            c, s = math.cos(a / 2), math.sin(a / 2)
            gates.append(rz @ np.array([[c, -s], [s, c]]))
        return QubitProduct(n, ["wht", np.array(gates)])
    if dim > MAX_DENSE_DIM:
        raise CapabilityError(f"unitary kind {spec.kind!r} needs N <= {MAX_DENSE_DIM}, got {dim}")
    if spec.kind == "dense_walsh":
        return DenseUnitary(WalshHadamard(dim).matrix())
    return DenseUnitary(haar_unitary(dim, rng))


def _target_rotation(cfg: ExperimentConfig, targets: TargetSet):
    angles = cfg.phi_list if cfg.phi_list else cfg.phi
    if cfg.phi_list and len(cfg.phi_list) != targets.count:
        raise ConfigError("phi_list", f"need {targets.count} angles, got {len(cfg.phi_list)}")
    return build_selective_rotation(cfg.dim, targets, angles)


def _noisy_pair(cfg: ExperimentConfig, targets: TargetSet, dim=None, marked_t=None):
    dim = dim or cfg.dim
    st = sample_perturbed_inversion(dim, marked_t or targets, cfg.noise, "target")
    s0 = sample_perturbed_inversion(dim, [0], cfg.noise, "zero")
    return s0, st


# --------------------------------------------------------------------------
# scenarios


def _grover(cfg: ExperimentConfig) -> ScenarioResult:
    t = cfg.target_set()
    u = build_unitary(cfg)
    s0, st = _noisy_pair(cfg, t)
    alpha = target_projection(u.column0(), t)
    n = grover_iterations(alpha) if cfg.n_iters == "auto" else cfg.n_iters
    traj = run_amplitude_amplification(u, s0, st, n, t)
    summ = {
        "scenario": cfg.scenario,
        "alpha_u": alpha,
        "iterations": n,
        "predicted_queries": search.grover_queries(alpha),
        "measured_queries": int(traj.queries[-1]),
        "predicted_success_exact_phases": math.sin((2 * n + 1) * math.asin(alpha)) ** 2,
        "measured_success": traj.steps[-1].success_prob,
        "measured_max_success": float(traj.success.max()),
    }
    return ScenarioResult(traj, summ)


def _mismatch(cfg: ExperimentConfig) -> ScenarioResult:
    t = cfg.target_set()
    u = build_unitary(cfg)
    st = _target_rotation(cfg, t)
    s0 = build_selective_rotation(cfg.dim, [0], cfg.varphi)
    alpha = target_projection(u.column0(), t)
    n = 10 * grover_iterations(alpha) if cfg.n_iters == "auto" else cfg.n_iters
    traj = run_amplitude_amplification(u, s0, st, n, t)
    succ = traj.success
    summ = {
        "scenario": cfg.scenario,
        "alpha_u": alpha,
        "phi": cfg.phi,
        "varphi": cfg.varphi,
        "phase_mismatch": abs(cfg.phi - cfg.varphi),
        "iterations": n,
        "predicted_max_success_if_matched": 1.0,
        "measured_max_success": float(succ.max()),
        "measured_argmax_step": int(np.argmax(succ)),
    }
    return ScenarioResult(traj, summ)


def _iterative(cfg: ExperimentConfig) -> ScenarioResult:
    t = cfg.target_set()
    u = build_unitary(cfg)
    rt = _target_rotation(cfg, t)
    traj = run_iterative(u, rt, cfg.varphi, t, cfg.n_iters)
    q_pred = predict_iterative_queries(u, rt, cfg.varphi)
    n = len(traj) - 1
    summ = {
        "scenario": cfg.scenario,
        "alpha_u": traj.steps[0].alpha,
        "theta": traj.frame.theta,
        "iterations": n,
        "predicted_queries": q_pred,
        "measured_queries": int(traj.queries[-1]),
        "predicted_final_angle": float(search.predicted_angle(traj.frame.theta, cfg.varphi, n)),
        "measured_final_angle": traj.steps[-1].angle_to_sigma,
        "measured_final_overlap_tau": traj.steps[-1].overlap_tau,
        "measured_success": traj.steps[-1].success_prob,
    }
    return ScenarioResult(traj, summ)


def _recursion_summary(cfg, traj, delta_t, delta_0, summ):
    alphas = traj.alphas
    kappas = traj.kappas
    summ["levels_run"] = len(traj) - 1
    summ["truncated"] = traj.truncated
    summ["predicted_queries"] = [recursion_query_count(level) for level in range(len(traj))]
    summ["measured_queries"] = [int(q) for q in traj.queries]
    summ["alpha_per_level"] = [float(a) for a in alphas]
    summ["measured_kappa"] = [float(k) for k in kappas]
    summ["predicted_kappa_lower_bound"] = [
        kappa_lower_bound(delta_t, delta_0, float(a)) for a in alphas[:-1]
    ]
    summ["measured_success"] = float(alphas[-1] ** 2)
    summ["implied_repetitions"] = (
        math.ceil(DEFAULT_REPETITION_C / alphas[-1] ** 2) if alphas[-1] > 0 else None
    )
    try:
        summ["exponent_p"] = exponent_p(delta_t, delta_0)
        summ["exponent_p_closed_form_bound"] = exponent_p_bound(delta_t, delta_0)
    except ValueError:
        summ["exponent_p"] = None
    return summ


def _recursive(cfg: ExperimentConfig) -> ScenarioResult:
    t = cfg.target_set()
    u = build_unitary(cfg)
    s0, st = _noisy_pair(cfg, t)
    traj, _ = run_recursive(u, s0, st, t, cfg.levels, cfg.budget)
    summ = {
        "scenario": cfg.scenario,
        "alpha_u": traj.steps[0].alpha,
        "delta_t": cfg.noise.delta_t,
        "delta_0": cfg.noise.delta_0,
        "measured_delta_t": float(np.max(np.abs(phase_errors(st, t)))),
        "measured_delta_0": float(np.max(np.abs(phase_errors(s0, [0])))),
    }
    _recursion_summary(cfg, traj, cfg.noise.delta_t, cfg.noise.delta_0, summ)
    warnings = []
    if u.dim <= (1 << 16):
        diag = compute_recursion_diagnostics(u, s0, st, t)
        summ["condition_holds_all_targets"] = bool(np.all(diag.condition_holds))
        if diag.excluded:
            warnings.append(f"targets with U_j0 = 0 excluded from ratios: {diag.excluded}")
        if diag.correlated:
            warnings.append("St and S0 phase errors are correlated; the random-overlap estimate may not apply")
    if traj.truncated:
        warnings.append(f"query budget {cfg.budget} reached; trajectory truncated")
    return ScenarioResult(traj, summ, warnings)


def _hamiltonian(cfg: ExperimentConfig) -> ScenarioResult:
    t = cfg.target_set()
    u = build_unitary(cfg)
    if u.dim > MAX_DENSE_DIM:
        raise CapabilityError(f"Hamiltonian scenarios need N <= {MAX_DENSE_DIM}")
    hs = cfg.hamiltonian
    alpha = target_projection(u.column0(), t)
    s = hs.s_alpha * alpha if hs.s_alpha is not None else hs.s
    rt = _target_rotation(cfg, t) if hs.kind == "new" else None
    h = build_hamiltonian(hs.kind, u, t, rt=rt, s=s)
    t_max = hs.t_max if hs.t_max is not None else 2 * math.pi / alpha
    scan = scan_target_probability(h, t, t_max, hs.samples)
    summ = {
        "scenario": cfg.scenario,
        "kind": hs.kind,
        "alpha_u": alpha,
        "s": s,
        "t_max": t_max,
        "measured_initial_probability": float(scan.probabilities[0]),
        "predicted_initial_probability": alpha**2,
        "measured_peak_time": scan.peak_time,
        "measured_peak_probability": scan.peak_probability,
    }
    if hs.kind != "new":
        summ["predicted_peak_time_unperturbed"] = math.pi / (2 * alpha)
    else:
        tau_scan = scan_target_probability(h, h.tau(), t_max, hs.samples)
        summ["measured_peak_tau_probability"] = tau_scan.peak_probability
    return ScenarioResult(scan, summ)


def run_nondiagonal_scenario(e_p, e_q, noise_cfg: ExperimentConfig, u, mode: str = "iterative",
                             targets: TargetSet | None = None) -> ScenarioResult:
    """Run with ``P = E_P S0 E_P†`` and ``Q = E_Q St E_Q†``, and cross-check in the ``V`` frame.

    The ``V`` frame runs the same engine with ``V = E_Q† U E_P`` and the
    diagonal cores, starting from ``V E_P†|0⟩``, and maps each state back with
    ``E_Q``.  ``max_form_deviation`` is the largest amplitude difference seen.
    """
    cfg = noise_cfg
    t = targets or cfg.target_set()
    e_p = e_p if isinstance(e_p, DenseUnitary) else DenseUnitary(e_p)
    e_q = e_q if isinstance(e_q, DenseUnitary) else DenseUnitary(e_q)
    warnings = []
    sel_p = selectivity_diagnostics(e_p, 0)
    sel_q = min(selectivity_diagnostics(e_q, j) for j in t.indices)
    for name, val in (("E_P", sel_p), ("E_Q", sel_q)):
        if val < SELECTIVITY_WARN:
            msg = f"{name} diagonal element {val:.3g} < {SELECTIVITY_WARN}: transformation is not selective"
            log.warning(msg)
            warnings.append(msg)

    if mode == "iterative":
        s0_core = build_selective_rotation(u.dim, [0], cfg.varphi)
        st_core = _target_rotation(cfg, t)
    else:
        s0_core, st_core = _noisy_pair(cfg, t)
    p_op = ConjugatedOp(e_p, s0_core)
    q_op = ConjugatedOp(e_q, st_core)
    v = Composed([(e_p, False), (u, False), (e_q, True)])

    ep0 = np.zeros(u.dim, dtype=np.complex128)
    ep0[0] = 1.0
    e_p.apply(ep0, inverse=True)
    start_v = v.apply(ep0.copy())

    if mode == "iterative":
        traj = run_iterative(u, q_op, cfg.varphi, t, cfg.n_iters, r0=p_op, keep_states=True)
        step = TStep(v, s0_core, st_core)
        x = start_v.copy()
        v_states = [x.copy()]
        for _ in range(len(traj) - 1):
            step.apply(x)
            v_states.append(x.copy())
    else:
        traj, _ = run_recursive(u, p_op, q_op, t, cfg.levels, cfg.budget)
        traj.states = []
        v_states = []
        for level in range(len(traj)):
            traj.states.append(RecursiveUnitary(u, p_op, q_op, level).column0())
            x = ep0.copy()
            RecursiveUnitary(v, s0_core, st_core, level).apply(x)
            v_states.append(x)
    dev = 0.0
    for xs, xv in zip(traj.states, v_states):
        back = e_q.apply(xv.copy())
        dev = max(dev, float(np.max(np.abs(back - xs))))
    alpha_v = target_projection(v.column0(), t)
    summ = {
        "scenario": "nondiagonal",
        "mode": mode,
        "selectivity_e_p": sel_p,
        "selectivity_e_q": sel_q,
        "alpha_u": traj.steps[0].alpha,
        "alpha_v": alpha_v,
        "measured_queries": int(traj.queries[-1]),
        "measured_success": traj.steps[-1].success_prob,
        "max_form_deviation": dev,
    }
    if mode == "iterative":
        summ["predicted_queries_v_frame"] = predict_iterative_queries(
            DenseUnitary(v.matrix(), check=False), st_core, cfg.varphi
        )
    traj.states = None
    return ScenarioResult(traj, summ, warnings)


def _nondiagonal(cfg: ExperimentConfig) -> ScenarioResult:
    if cfg.dim > MAX_DENSE_DIM:
        raise CapabilityError(f"non-diagonal scenarios need N <= {MAX_DENSE_DIM}")
    nd = cfg.nondiagonal
    rng = np.random.default_rng(nd.basis_seed)
    e_p = near_identity_unitary(cfg.dim, nd.ep_distance, rng) if nd.ep_distance else np.eye(cfg.dim)
    e_q = near_identity_unitary(cfg.dim, nd.eq_distance, rng) if nd.eq_distance else np.eye(cfg.dim)
    return run_nondiagonal_scenario(e_p, e_q, cfg, build_unitary(cfg), nd.mode)


def run_workspace_scenario(ws: WorkspaceSpec, u, varphi: float, mode: str, targets: TargetSet,
                           levels: int = 0, n_iters="auto", s0=None, budget=None) -> ScenarioResult:
    """Search with an oracle that entangles the search register with a workspace.

    ``u`` acts on the search register only; success is the search-space
    marginal probability of the targets.
    """
    if mode == "iterative" and not ws.b_is_identity:
        raise ConfigError(
            "workspace.b_op",
            "B must be the identity in iterative mode: with B != I the iterative algorithm "
            "cannot take us to a target state; use mode=recursive",
        )
    uhat = Lifted(u, ws.ancilla_dim)
    oracle = WorkspaceOracle(ws, targets)
    joint_t = targets.lifted(ws.ancilla_dim)
    summ = {"scenario": "workspace", "mode": mode, "joint_dim": ws.joint_dim}
    if mode == "iterative":
        r0 = build_selective_rotation(ws.joint_dim, [0], varphi)
        traj = run_iterative(uhat, oracle, varphi, joint_t, n_iters, r0=r0)
        summ.update(
            alpha_u=traj.steps[0].alpha,
            theta=traj.frame.theta,
            measured_queries=int(traj.queries[-1]),
            measured_marginal_success=traj.steps[-1].success_prob,
        )
        return ScenarioResult(traj, summ)
    if s0 is None:
        s0 = build_selective_rotation(ws.joint_dim, [0], math.pi)
    traj, _ = run_recursive(uhat, s0, oracle, joint_t, levels, budget)
    # B != I perturbs the oracle away from the ideal inversion just as A != -I
    # does, so the bound takes the larger of the two eigenphase deviations.
    d_a, d_b = ws.distances()
    d_t = max(d_a, d_b)
    d_0 = float(np.max(np.abs(phase_errors(s0, [0])))) if hasattr(s0, "phases") else 0.0
    summ.update(measured_delta_a=d_a, measured_delta_b=d_b, measured_delta_t=d_t, measured_delta_0=d_0)
    _recursion_summary(None, traj, d_t, d_0, summ)
    summ["measured_marginal_success"] = summ.pop("measured_success")
    return ScenarioResult(traj, summ)


def _workspace(cfg: ExperimentConfig) -> ScenarioResult:
    wc = cfg.workspace
    ws = WorkspaceSpec(
        cfg.n_qubits,
        wc.ancilla_qubits,
        parse_workspace_op(wc.a_op, wc.ancilla_qubits),
        parse_workspace_op(wc.b_op, wc.ancilla_qubits),
    )
    s0 = None
    if wc.mode == "recursive" and cfg.noise.delta_0 > 0:
        s0 = sample_perturbed_inversion(ws.joint_dim, [0], cfg.noise, "zero")
    return run_workspace_scenario(ws, build_unitary(cfg), cfg.varphi, wc.mode, cfg.target_set(),
                                  cfg.levels, cfg.n_iters, s0, cfg.budget)


def _per_target(cfg: ExperimentConfig) -> ScenarioResult:
    """Exploratory: which targets does plain amplification amplify when phases differ per target?"""
    t = cfg.target_set()
    u = build_unitary(cfg)
    st = _target_rotation(cfg, t)
    s0 = build_selective_rotation(cfg.dim, [0], cfg.varphi)
    u0 = u.column0()
    alpha = target_projection(u0, t)
    n = 10 * grover_iterations(alpha) if cfg.n_iters == "auto" else cfg.n_iters
    traj = run_amplitude_amplification(u, s0, st, n, t, keep_states=True)
    idx = list(t.indices)
    peak = np.max(np.abs(np.array(traj.states)[:, idx]) ** 2, axis=0)
    traj.states = None
    phis = st.phases[idx]
    summ = {
        "scenario": cfg.scenario,
        "alpha_u": alpha,
        "targets": idx,
        "phase_mismatch_per_target": [float(abs(p - cfg.varphi)) for p in phis],
        "u_j0_per_target": [float(abs(u0[j])) for j in idx],
        "measured_peak_probability_per_target": [float(p) for p in peak],
    }
    return ScenarioResult(traj, summ, ["exploratory scenario; not an acceptance gate"])


_RUNNERS = {
    "grover_baseline": _grover,
    "phase_mismatch": _mismatch,
    "iterative": _iterative,
    "recursive": _recursive,
    "hamiltonian": _hamiltonian,
    "nondiagonal": _nondiagonal,
    "workspace": _workspace,
    "per_target_matching": _per_target,
}


def run_scenario(cfg: ExperimentConfig) -> ScenarioResult:
    cfg.validate()
    return _RUNNERS[cfg.scenario](cfg)


# --------------------------------------------------------------------------
# sweeps


def sweep_point(cfg: ExperimentConfig, value) -> ExperimentConfig:
    p = cfg.sweep.param
    if p in ("delta_t", "delta_0"):
        return replace(cfg, noise=replace(cfg.noise, **{p: float(value)}))
    if p == "noise_seed":
        return replace(cfg, noise=replace(cfg.noise, seed=int(value)))
    if p == "s_alpha":
        return replace(cfg, hamiltonian=replace(cfg.hamiltonian, s_alpha=float(value)))
    if p in ("n_qubits", "levels"):
        return replace(cfg, **{p: int(value)})
    return replace(cfg, **{p: float(value)})


def _sweep_worker(args):
    cfg, value = args
    res = run_scenario(cfg)
    return value, res.csv(prefix=((f"sweep_{cfg.sweep.param}", value),)), res.summary_text()


def run_sweep(cfg: ExperimentConfig) -> tuple[str, list[str]]:
    """Run every sweep point; returns the concatenated CSV and per-point summaries.

    Points run in a process pool when ``workers > 1``; results are joined in
    sweep order so the output does not depend on scheduling.
    """
    cfg.validate()
    if cfg.sweep.param is None:
        raise ConfigError("sweep.param", "no sweep block in config")
    jobs = [(sweep_point(cfg, v).validate(), v) for v in cfg.sweep.values]
    if cfg.sweep.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sweep.workers) as pool:
            out = list(pool.map(_sweep_worker, jobs))
    else:
        out = [_sweep_worker(j) for j in jobs]
    chunks, summaries = [], []
    for k, (value, text, summ) in enumerate(out):
        lines = text.splitlines(keepends=True)
        chunks.append("".join(lines if k == 0 else lines[1:]))
        summaries.append(f"sweep_{cfg.sweep.param}={value!r}\n{summ}")
    return "".join(chunks), summaries


__all__ = [
    "ScenarioResult",
    "build_unitary",
    "run_scenario",
    "run_sweep",
    "run_workspace_scenario",
    "run_nondiagonal_scenario",
]
