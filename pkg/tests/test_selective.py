import math

import numpy as np
import pytest

from robust_search.errors import DimensionError
from robust_search.selective import (
    ConjugatedOp,
    DiagonalPhaseOp,
    NoiseSpec,
    build_conjugated,
    build_selective_rotation,
    operator_distance,
    phase_errors,
    sample_perturbed_inversion,
    selective_inversion,
    selectivity_diagnostics,
    splitmix64,
    uniform01,
    wrap_angle,
)
from robust_search.statevector import DenseUnitary, StateVector, TargetSet, fidelity, haar_unitary

from oracles import haar

M64 = (1 << 64) - 1


def sequential_splitmix64(seed, n):
    """Textbook sequential splitmix64 on Python ints."""
    out, state = [], seed
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        out.append(z ^ (z >> 31))
    return out


class TestNoiseStream:
    def test_known_first_word(self):
        assert int(splitmix64(0, [1])[0]) == 0xE220A8397B1DCDAF

    @pytest.mark.parametrize("seed", [0, 1, 7, 2**63 + 5, M64])
    def test_counter_form_matches_sequential(self, seed):
        words = splitmix64(seed, np.arange(1, 65, dtype=np.uint64))
        assert [int(w) for w in words] == sequential_splitmix64(seed, 64)

    def test_uniform_range(self):
        u = uniform01(3, np.arange(1, 10001, dtype=np.uint64))
        assert u.min() >= 0.0 and u.max() < 1.0

    def test_offsets_do_not_depend_on_dimension(self):
        ns = NoiseSpec(delta_t=0.2, delta_0=0.1, seed=9)
        small, big = ns.offsets(64, "target"), ns.offsets(1024, "target")
        np.testing.assert_array_equal(small, big[:64])

    def test_target_and_zero_streams_differ(self):
        ns = NoiseSpec(delta_t=0.2, delta_0=0.2, seed=9)
        assert not np.allclose(ns.offsets(32, "target"), ns.offsets(32, "zero"))

    def test_uniform_law_statistics(self):
        ns = NoiseSpec(delta_t=0.2, seed=2024)
        eps = phase_errors(sample_perturbed_inversion(1024, TargetSet(1024, (3,)), ns, "target"), [3])
        assert np.max(np.abs(eps)) <= 0.2
        assert abs(np.mean(np.abs(eps)) - 0.1) <= 0.02


class TestNoiseSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(law="gaussian")
        with pytest.raises(ValueError):
            NoiseSpec(delta_t=-0.1)
        with pytest.raises(ValueError):
            NoiseSpec(delta_t=0.1, law="per_index_list", eps=(0.0, 0.2))

    def test_text_roundtrip(self):
        ns = NoiseSpec(delta_t=0.1, delta_0=0.05, law="per_index_list", seed=3,
                       eps=(0.1, -0.05, 0.0, 0.01), mu=(0.0, 0.05, -0.05, 0.0))
        assert NoiseSpec.from_text(ns.to_text()) == ns

    def test_fixed_offset(self):
        ns = NoiseSpec(delta_t=0.3, law="fixed_offset")
        np.testing.assert_array_equal(ns.offsets(8, "target"), np.full(8, 0.3))

    def test_per_index_length_checked(self):
        ns = NoiseSpec(delta_t=0.1, law="per_index_list", eps=(0.0, 0.1))
        with pytest.raises(DimensionError):
            ns.offsets(4, "target")


class TestBuilders:
    def test_zero_inversion(self):
        np.testing.assert_allclose(selective_inversion(8, [0]).factors, [-1, 1, 1, 1, 1, 1, 1, 1], atol=1e-15)

    def test_target_inversion(self):
        op = build_selective_rotation(8, TargetSet(8, (6,)), math.pi)
        expected = np.ones(8)
        expected[6] = -1
        np.testing.assert_allclose(op.factors, expected, atol=1e-15)

    def test_per_target_angles(self):
        op = build_selective_rotation(8, TargetSet(8, (2, 5)), [math.pi / 2, math.pi / 3])
        np.testing.assert_allclose(op.phases, [0, 0, math.pi / 2, 0, 0, math.pi / 3, 0, 0])

    def test_zero_noise_is_exact(self):
        t = TargetSet(16, (4, 9))
        op = sample_perturbed_inversion(16, t, NoiseSpec(seed=4), "target")
        np.testing.assert_array_equal(op.phases, selective_inversion(16, t).phases)

    def test_same_seed_same_phases(self):
        ns = NoiseSpec(delta_t=0.2, delta_0=0.2, seed=77)
        a = sample_perturbed_inversion(64, [0], ns, "zero")
        b = sample_perturbed_inversion(64, [0], ns, "zero")
        np.testing.assert_array_equal(a.phases, b.phases)

    def test_phases_are_read_only(self):
        op = selective_inversion(4, [1])
        with pytest.raises(ValueError):
            op.phases[0] = 1.0

    def test_wrap_angle_range(self):
        w = wrap_angle(np.array([math.pi, -math.pi, 3 * math.pi, 0.5]))
        np.testing.assert_allclose(w, [math.pi, math.pi, math.pi, 0.5])


class TestOperatorDistance:
    def test_exact_is_zero(self):
        assert operator_distance(selective_inversion(8, [3]), [3]) == 0.0

    def test_single_offset_closed_form(self):
        p = selective_inversion(8, [3]).phases.copy()
        p[3] += 0.2
        assert operator_distance(DiagonalPhaseOp(p), [3]) == pytest.approx(2 * math.sin(0.1), abs=1e-14)

    def test_antipodal_is_two(self):
        op = DiagonalPhaseOp(selective_inversion(8, [3]).phases + math.pi)
        assert operator_distance(op, [3]) == pytest.approx(2.0)


class TestConjugated:
    def test_identity_basis_equals_core(self, rng):
        core = build_selective_rotation(16, [0], 1.1)
        conj = build_conjugated(np.eye(16), core)
        s = StateVector.random(16, rng)
        np.testing.assert_allclose(conj.apply(s.copy()).amps, core.apply(s.copy()).amps, atol=1e-15)

    def test_roundtrip(self, rng):
        op = ConjugatedOp(DenseUnitary(haar_unitary(16, rng)), build_selective_rotation(16, [2, 3], 0.7))
        s = StateVector.random(16, rng)
        back = op.apply(op.apply(s.copy()), inverse=True)
        assert fidelity(back, s) >= 1 - 1e-10

    def test_matches_dense_product(self, rng):
        e = haar(16, rng)
        phases = rng.uniform(-math.pi, math.pi, 16)
        op = build_conjugated(e, DiagonalPhaseOp(phases))
        dense = e @ np.diag(np.exp(1j * phases)) @ e.conj().T
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        assert np.max(np.abs(op.apply(x.copy()) - dense @ x)) <= 1e-11
        assert np.max(np.abs(op.matrix() - dense)) <= 1e-11

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            ConjugatedOp(DenseUnitary(np.eye(8)), selective_inversion(16, [0]))


class TestSelectivity:
    def test_identity(self):
        assert selectivity_diagnostics(np.eye(8), 0) == 1.0

    def test_two_level_rotation(self):
        g = 0.3
        e = np.eye(8, dtype=complex)
        e[0, 0] = e[5, 5] = math.cos(g)
        e[0, 5], e[5, 0] = -math.sin(g), math.sin(g)
        assert selectivity_diagnostics(DenseUnitary(e), 0) == pytest.approx(math.cos(g), abs=1e-15)

    def test_random_unitary_is_not_selective(self, rng):
        vals = [selectivity_diagnostics(haar(64, rng), 0) for _ in range(300)]
        # E|U_00| for a Haar unitary is Γ(N)Γ(3/2)/Γ(N+1/2), about 0.11 at N=64
        expected = math.exp(math.lgamma(64) + math.lgamma(1.5) - math.lgamma(64.5))
        assert abs(np.mean(vals) - expected) < 0.01
        assert np.mean(np.array(vals) < 0.9) == 1.0
