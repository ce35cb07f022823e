import hashlib
import math

import numpy as np
import pytest

from robust_search.cli import main
from robust_search.errors import ConfigError
from robust_search.harness.config import ExperimentConfig, load_config, parse_angle
from robust_search.harness.csvio import TRAJECTORY_COLUMNS, emit_csv, emit_scan_csv
from robust_search.harness.scenarios import (
    run_nondiagonal_scenario,
    run_scenario,
    run_sweep,
    run_workspace_scenario,
)
from robust_search.harness.workspace import WorkspaceOracle, WorkspaceSpec, parse_workspace_op
from robust_search.search import RunTrajectory, run_amplitude_amplification, run_iterative
from robust_search.selective import build_selective_rotation, selective_inversion
from robust_search.statevector import TargetSet, WalshHadamard, fidelity, near_identity_unitary

BASE = """
[experiment]
scenario = {scenario}
seed = 5
n_qubits = {n}
targets = 5
"""


def cfg_for(scenario, n=8, extra="", **kw):
    return ExperimentConfig.from_text(BASE.format(scenario=scenario, n=n) + extra, **kw)


class TestConfig:
    def test_roundtrip(self):
        text = BASE.format(scenario="recursive", n=10) + """
levels = 3
phi_list = 1.0,2.0
[noise]
delta_t = 0.2
delta_0 = 0.1
[hamiltonian]
kind = fg_perturbed
s_alpha = 4
[sweep]
param = delta_t
values = 0.0,0.1
"""
        cfg = ExperimentConfig.from_text(text)
        assert ExperimentConfig.from_text(cfg.to_text()) == cfg
        assert cfg.noise.seed == 5

    def test_seed_is_mandatory(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_text("[experiment]\nscenario = iterative\n")
        assert err.value.field == "seed"

    @pytest.mark.parametrize("extra,overrides,field", [
        ("", {"n_qubits": 40}, "n_qubits"),
        ("", {"targets": (999,)}, "targets"),
        ("", {"levels": -1}, "levels"),
        ("", {"varphi": 0.0}, "varphi"),
        ("[unitary]\nkind = cubic\n", {}, "unitary.kind"),
        ("[sweep]\nparam = colour\nvalues = 1\n", {}, "sweep.param"),
    ])
    def test_validation_names_field(self, extra, overrides, field):
        with pytest.raises(ConfigError) as err:
            cfg_for("iterative", extra=extra, **overrides).validate()
        assert err.value.field == field

    def test_large_noise_rejected_with_reason(self):
        with pytest.raises(ConfigError, match="small perturbations"):
            cfg_for("recursive", extra="[noise]\ndelta_t = 1.6\n").validate()

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError):
            cfg_for("teleport").validate()

    def test_exploratory_gate(self):
        with pytest.raises(ConfigError) as err:
            cfg_for("per_target_matching").validate()
        assert err.value.field == "exploratory"

    @pytest.mark.parametrize("raw,val", [("pi", math.pi), ("pi/2", math.pi / 2), ("2*pi/3", 2 * math.pi / 3),
                                         ("-pi/4", -math.pi / 4), ("0.25", 0.25)])
    def test_parse_angle(self, raw, val):
        assert parse_angle(raw) == pytest.approx(val)

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    def test_overrides(self):
        cfg = cfg_for("recursive").with_overrides(delta_t=0.2, levels=2)
        assert cfg.noise.delta_t == 0.2 and cfg.levels == 2


class TestCsv:
    def test_empty_trajectory_is_header_only(self, tmp_path):
        p = tmp_path / "e.csv"
        emit_csv(RunTrajectory(), p)
        assert p.read_text() == ",".join(TRAJECTORY_COLUMNS) + "\n"

    def test_three_steps_four_lines(self, tmp_path):
        u, t = WalshHadamard(64), TargetSet(64, (3,))
        traj = run_amplitude_amplification(u, selective_inversion(64, [0]), selective_inversion(64, t), 2, t)
        p = tmp_path / "t.csv"
        emit_csv(traj, p)
        lines = p.read_text().splitlines()
        assert len(lines) == 4
        assert lines[1] == "0,0,0.125,0.015625,,"

    def test_twelve_significant_digits(self, tmp_path):
        u, t = WalshHadamard(1024), TargetSet(1024, (3,))
        traj = run_iterative(u, selective_inversion(1024, t), math.pi / 2, t, 1)
        p = tmp_path / "t.csv"
        emit_csv(traj, p)
        field = p.read_text().splitlines()[2].split(",")[2]
        assert len(field.replace("0.", "", 1).lstrip("0")) <= 12
        assert float(field) == pytest.approx(traj.steps[1].alpha, rel=1e-11)

    def test_write_failure_names_path(self, tmp_path):
        bad = tmp_path / "missing" / "x.csv"
        with pytest.raises(OSError, match="missing"):
            emit_csv(RunTrajectory(), bad)

    def test_scan_csv(self, tmp_path):
        res = run_scenario(cfg_for("hamiltonian", n=5, extra="[hamiltonian]\nsamples = 5\n"))
        p = tmp_path / "s.csv"
        emit_scan_csv(res.result, p)
        assert p.read_text().splitlines()[0] == "time,probability"


class TestScenarios:
    def test_grover_summary(self):
        res = run_scenario(cfg_for("grover_baseline", n=10))
        assert res.summary["measured_queries"] == 25
        assert res.summary["measured_success"] >= 0.999
        assert res.summary["predicted_success_exact_phases"] == pytest.approx(res.summary["measured_success"])

    def test_recursive_noiseless_equals_forty_grover_steps(self):
        rec = run_scenario(cfg_for("recursive", n=8, levels=4))
        base = run_scenario(cfg_for("grover_baseline", n=8, n_iters=40))
        assert rec.result.alphas[-1] == pytest.approx(base.result.alphas[-1], abs=1e-10)
        assert rec.summary["predicted_queries"] == rec.summary["measured_queries"]

    def test_mismatch_versus_iterative(self):
        mis = run_scenario(cfg_for("phase_mismatch", n=10, varphi=math.pi / 2))
        it = run_scenario(cfg_for("iterative", n=10, phi=math.pi / 2, varphi=math.pi / 2))
        assert mis.summary["measured_max_success"] <= 0.05
        assert it.summary["measured_success"] >= 0.99
        assert {"predicted_queries", "measured_queries"} <= set(it.summary)

    def test_recursive_summary_has_bound_and_measurement(self):
        res = run_scenario(cfg_for("recursive", n=10, levels=3, extra="[noise]\ndelta_t = 0.2\ndelta_0 = 0.2\n"))
        s = res.summary
        assert len(s["measured_kappa"]) == len(s["predicted_kappa_lower_bound"]) == 3
        assert all(k >= b for k, b in zip(s["measured_kappa"], s["predicted_kappa_lower_bound"]))

    def test_per_target_runs_when_enabled(self):
        res = run_scenario(cfg_for("per_target_matching", exploratory=True, targets=(3, 9),
                                   phi_list=(3.1, 2.0)))
        assert len(res.summary["measured_peak_probability_per_target"]) == 2
        assert res.warnings

    def test_phi_list_length_checked(self):
        with pytest.raises(ConfigError):
            run_scenario(cfg_for("iterative", phi_list=(1.0, 2.0)))


class TestWorkspace:
    def test_op_parsing(self):
        np.testing.assert_allclose(parse_workspace_op("phase:pi/2", 1), 1j * np.eye(2))
        np.testing.assert_allclose(parse_workspace_op("neg_identity", 2), -np.eye(4))
        with pytest.raises(ConfigError):
            parse_workspace_op("swap", 1)

    def test_oracle_matches_dense(self, rng):
        a = parse_workspace_op("ry:0.4", 1)
        b = parse_workspace_op("phase:0.2", 1)
        ws = WorkspaceSpec(3, 1, a, b)
        t = TargetSet(8, (2, 6))
        dense = np.zeros((16, 16), dtype=complex)
        for j in range(8):
            dense[2 * j:2 * j + 2, 2 * j:2 * j + 2] = a if j in t else b
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        np.testing.assert_allclose(WorkspaceOracle(ws, t).apply(x.copy()), dense @ x, atol=1e-13)

    def test_joint_dimension_limit(self):
        with pytest.raises(Exception):
            WorkspaceSpec(18, 4, -np.eye(16))

    def test_perfect_oracle_reduces_to_plain_search(self):
        u, t = WalshHadamard(256), TargetSet(256, (5,))
        ws = WorkspaceSpec(8, 1, -np.eye(2))
        joint = run_workspace_scenario(ws, u, math.pi, "iterative", t)
        plain = run_iterative(u, selective_inversion(256, t), math.pi, t)
        np.testing.assert_allclose(joint.result.success, plain.success, atol=1e-10)

    def test_phase_quarter_turn_oracle(self):
        u, t = WalshHadamard(256), TargetSet(256, (5,))
        ws = WorkspaceSpec(8, 1, parse_workspace_op("phase:pi/2", 1))
        res = run_workspace_scenario(ws, u, math.pi / 2, "iterative", t)
        assert res.summary["measured_marginal_success"] >= 0.95

    def test_iterative_requires_identity_b(self):
        ws = WorkspaceSpec(4, 1, -np.eye(2), parse_workspace_op("ry:0.1", 1))
        with pytest.raises(ConfigError, match="cannot take us to a target state"):
            run_workspace_scenario(ws, WalshHadamard(16), math.pi, "iterative", TargetSet(16, (3,)))

    def test_recursive_mode_meets_kappa_bound(self):
        ws = WorkspaceSpec(8, 1, parse_workspace_op("neg_ry:0.1", 1), parse_workspace_op("ry:0.1", 1))
        res = run_workspace_scenario(ws, WalshHadamard(256), math.pi, "recursive", TargetSet(256, (5,)), levels=3)
        s = res.summary
        assert all(k >= b for k, b in zip(s["measured_kappa"], s["predicted_kappa_lower_bound"]))


class TestNondiagonal:
    def _cfg(self, **kw):
        return cfg_for("nondiagonal", n=8, **kw)

    def test_identity_bases_match_diagonal_run(self):
        cfg = self._cfg(phi=math.pi / 2, varphi=math.pi / 2)
        res = run_nondiagonal_scenario(np.eye(256), np.eye(256), cfg, WalshHadamard(256))
        t = cfg.target_set()
        ref = run_iterative(WalshHadamard(256), build_selective_rotation(256, t, math.pi / 2), math.pi / 2, t)
        np.testing.assert_allclose(res.result.alphas, ref.alphas, atol=1e-12)
        assert fidelity(res.result.final_state, ref.final_state) >= 1 - 1e-12

    @pytest.mark.parametrize("mode", ["iterative", "recursive"])
    def test_two_forms_agree(self, mode, rng):
        cfg = self._cfg(levels=3, extra="[noise]\ndelta_t = 0.1\ndelta_0 = 0.1\n")
        e_p, e_q = near_identity_unitary(256, 0.1, rng), near_identity_unitary(256, 0.1, rng)
        res = run_nondiagonal_scenario(e_p, e_q, cfg, WalshHadamard(256), mode)
        assert res.summary["max_form_deviation"] <= 1e-9

    def test_small_bases_still_succeed(self, rng):
        cfg = self._cfg()
        e_p, e_q = near_identity_unitary(256, 0.1, rng), near_identity_unitary(256, 0.1, rng)
        res = run_nondiagonal_scenario(e_p, e_q, cfg, WalshHadamard(256))
        assert res.summary["measured_success"] >= 0.95
        alpha_v = res.summary["alpha_v"]
        assert res.summary["measured_queries"] <= 2 * math.pi / (4 * alpha_v)
        assert not res.warnings

    def test_non_selective_basis_warns(self, rng, caplog):
        from oracles import haar

        cfg = self._cfg(n_iters=2)
        res = run_nondiagonal_scenario(haar(256, rng), np.eye(256), cfg, WalshHadamard(256))
        assert any("E_P" in w for w in res.warnings)
        assert "not selective" in caplog.text


class TestSweepAndDeterminism:
    SWEEP = BASE.format(scenario="recursive", n=8) + "levels = 2\n[sweep]\nparam = delta_t\nvalues = 0.3,0.0,0.1\n"

    def test_sweep_keeps_order_and_prefix(self):
        text, summaries = run_sweep(ExperimentConfig.from_text(self.SWEEP))
        lines = text.splitlines()
        assert lines[0].startswith("sweep_delta_t,step,")
        assert [ln.split(",")[0] for ln in lines[1:]] == ["0.3"] * 3 + ["0"] * 3 + ["0.1"] * 3
        assert len(summaries) == 3

    def test_pool_matches_serial(self):
        serial, _ = run_sweep(ExperimentConfig.from_text(self.SWEEP))
        pooled, _ = run_sweep(ExperimentConfig.from_text(self.SWEEP + "workers = 2\n"))
        assert serial == pooled

    def test_rerun_byte_identical(self):
        cfg = cfg_for("recursive", n=9, levels=3, extra="[noise]\ndelta_t = 0.2\ndelta_0 = 0.2\n")
        a = hashlib.sha256(run_scenario(cfg).csv().encode()).hexdigest()
        b = hashlib.sha256(run_scenario(cfg).csv().encode()).hexdigest()
        assert a == b


class TestCli:
    def test_success_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "g.csv"
        assert main(["grover", "--seed", "1", "--n-qubits", "6", "--targets", "3", "--out", str(out)]) == 0
        assert out.read_text().startswith("step,queries")
        assert "measured_success" in capsys.readouterr().out

    def test_seed_required(self):
        with pytest.raises(SystemExit) as err:
            main(["grover"])
        assert err.value.code == 2

    def test_config_error_exit_code(self, capsys):
        assert main(["recursive", "--seed", "1", "--delta-t", "2.0"]) == 2
        assert "delta_t" in capsys.readouterr().err

    def test_capability_error_exit_code(self):
        assert main(["hamiltonian", "--seed", "1", "--n-qubits", "13", "--targets", "3"]) == 3

    def test_config_file_with_overrides(self, tmp_path):
        cfgfile = tmp_path / "c.ini"
        cfgfile.write_text(BASE.format(scenario="grover_baseline", n=6))
        out = tmp_path / "o.csv"
        assert main(["iterative", "--config", str(cfgfile), "--seed", "2", "--phi", "pi/2", "--varphi", "pi/2",
                     "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0].endswith("overlap_tau")

    def test_sweep_needs_config(self):
        assert main(["sweep", "--seed", "1"]) == 2
