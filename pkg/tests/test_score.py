import math

import numpy as np
import pytest

from spindir.score import (
    PovmKernelDiagonal,
    epsilon_factor,
    exact_mean_score,
    optimal_kernel,
    score_gap,
    score_to_fidelity,
    sphere_quadrature_score,
)
from spindir.spinops import HalfInt, degeneracy, m_floats
from spindir.thermal import Block, BlockDiagonalState, ThermalSpec, polarization_moment, pure_polarized, thermal_state
from spindir.wigner import rotation_matrix


def random_kernel(j, rng):
    raw = rng.random(j.dim) + 1e-3
    return PovmKernelDiagonal(j, raw * j.dim / raw.sum())


def optimal_kernels_for(state):
    return {j: optimal_kernel(j) for j in state.blocks}


class TestKernelValidation:
    def test_trace_enforced(self):
        with pytest.raises(ValueError):
            PovmKernelDiagonal(1, [1.0, 1.0, 2.0])

    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            PovmKernelDiagonal(1, [4.0, -0.5, -0.5])

    def test_optimal_kernel_shape(self):
        k = optimal_kernel(1)
        assert np.array_equal(k.o, [3.0, 0.0, 0.0])


class TestPureStateScore:
    def test_optimal_score_and_fidelity(self):
        for twice_J in (1, 4, 13, 50):
            J = HalfInt.from_twice(twice_J)
            jf = float(J)
            br = exact_mean_score(pure_polarized(J), {J: optimal_kernel(J)})
            assert abs(br.score - jf / (jf + 1.0)) < 1e-14
            n = twice_J
            assert abs(score_to_fidelity(br.score) - (n + 1) / (n + 2)) < 1e-14

    def test_single_qubit_third(self):
        J = HalfInt(0.5)
        br = exact_mean_score(pure_polarized(J), {J: optimal_kernel(J)})
        assert abs(br.score - 1.0 / 3.0) < 1e-15
        assert abs(score_to_fidelity(br.score) - 2.0 / 3.0) < 1e-15

    def test_uninformative_kernel_scores_zero(self):
        J = HalfInt(3)
        flat = PovmKernelDiagonal(J, np.ones(J.dim))
        br = exact_mean_score(pure_polarized(J), {J: flat})
        assert abs(br.score) < 1e-15
        assert abs(br.gap - 3.0 / 4.0) < 1e-15


class TestSphereOracle:
    def test_matches_factorized_score(self):
        rng = np.random.default_rng(21)
        for twice_j in (1, 2):
            j = HalfInt.from_twice(twice_j)
            for _ in range(3):
                coeffs = rng.random(j.dim)
                coeffs /= coeffs.sum()
                state = BlockDiagonalState(j, {j: Block(1.0, coeffs)})
                kernels = {j: random_kernel(j, rng)}
                exact = exact_mean_score(state, kernels).score
                quad = sphere_quadrature_score(state, kernels)
                assert abs(exact - quad) < 1e-3  # exact grid, really ~1e-15

    def test_multi_block_thermal(self):
        rng = np.random.default_rng(22)
        j = HalfInt(1)
        state = thermal_state(ThermalSpec(j, 0.8))
        kernels = {bj: random_kernel(bj, rng) for bj in state.blocks}
        exact = exact_mean_score(state, kernels).score
        quad = sphere_quadrature_score(state, kernels)
        assert abs(exact - quad) < 1e-3

    def test_rotation_average_identity(self):
        # diagonal matrix element of the direction-weighted rotation average,
        # the key step behind the factorized score
        for twice_j in (1, 3):
            j = HalfInt.from_twice(twice_j)
            jf = float(j)
            xs, ws = np.polynomial.legendre.leggauss(24)
            phis = 2 * math.pi * np.arange(24) / 24
            mvals = m_floats(j)
            for mi in range(j.dim):
                for ki in range(j.dim):
                    acc = 0.0
                    for x, w in zip(xs, ws):
                        theta = math.acos(x)
                        for phi in phis:
                            rot = rotation_matrix(j, theta, phi)
                            acc += (w / 2 / 24) * x * abs(rot[mi, ki]) ** 2
                    expected = mvals[mi] * mvals[ki] / (jf * (jf + 1) * j.dim)
                    assert abs(acc - expected) < 1e-12


class TestThermalScore:
    def test_optimal_thermal_closed_form(self):
        # G_opt = (1/Z) sum_j j A_j f_j(beta) / (j+1)
        for twice_J, beta in ((6, 0.8), (9, 1.7)):
            J = HalfInt.from_twice(twice_J)
            spec = ThermalSpec(J, beta)
            state = thermal_state(spec)
            br = exact_mean_score(state, optimal_kernels_for(state))
            log_z = twice_J * math.log(2 * math.cosh(beta / 2))
            expected = 0.0
            for twice_j in range(twice_J, 0, -2):
                j = HalfInt.from_twice(twice_j)
                jf = float(j)
                expected += (
                    jf / (jf + 1.0)
                    * degeneracy(J, j)
                    * polarization_moment(spec, j)
                    * math.exp(-log_z)
                )
            assert abs(br.score_opt - expected) < 1e-12
            assert abs(br.score - br.score_opt) < 1e-15  # optimal kernels supplied

    def test_low_temperature_approaches_pure(self):
        J = HalfInt(5)
        for beta, tol in ((12.0, 1e-3), (20.0, 1e-6)):
            state = thermal_state(ThermalSpec(J, beta))
            br = exact_mean_score(state, optimal_kernels_for(state))
            assert abs(br.score_opt - 5.0 / 6.0) < tol

    def test_missing_kernel_raises(self):
        state = thermal_state(ThermalSpec(HalfInt(1), 0.5))
        with pytest.raises(ValueError, match="no measurement kernel"):
            exact_mean_score(state, {HalfInt(1): optimal_kernel(1)})

    def test_mislabelled_kernel_raises(self):
        J = HalfInt(1)
        with pytest.raises(ValueError, match="labelled"):
            exact_mean_score(pure_polarized(J), {J: optimal_kernel(2)})


class TestScoreGap:
    def test_optimal_gap_is_zero(self):
        J = HalfInt(4)
        state = pure_polarized(J)
        br = score_gap(state, {J: optimal_kernel(J)})
        assert br.gap == 0.0

    def test_two_paths_agree(self):
        rng = np.random.default_rng(30)
        state = thermal_state(ThermalSpec(HalfInt(3), 1.0))
        kernels = {j: random_kernel(j, rng) for j in state.blocks}
        a = exact_mean_score(state, kernels)
        b = score_gap(state, kernels)
        assert abs(a.gap - b.gap) < 1e-12
        assert abs((a.score_opt - a.score) - b.gap) < 1e-12

    def test_per_block_terms_nonnegative_and_bounded(self):
        rng = np.random.default_rng(31)
        state = thermal_state(ThermalSpec(HalfInt(4), 0.9))
        kernels = {j: random_kernel(j, rng) for j in state.blocks}
        br = score_gap(state, kernels)
        for blk in br.blocks:
            assert blk.gap >= 0.0
            assert 0.0 <= blk.state_term <= 1.0
            assert -1.0 <= blk.povm_term <= 1.0
            jf = float(blk.j)
            if blk.j.twice:
                assert blk.weight_term <= jf / (jf + 1.0) + 1e-15


class TestProperties:
    def test_shifting_weight_to_top_never_decreases_score(self):
        rng = np.random.default_rng(32)
        J = HalfInt(3)
        state = thermal_state(ThermalSpec(J, 0.7))
        for _ in range(50):
            kernels = {j: random_kernel(j, rng) for j in state.blocks}
            base = exact_mean_score(state, kernels).score
            o = kernels[J].o.copy()
            move = 0.5 * o[1]
            o[0] += move
            o[1] -= move
            kernels[J] = PovmKernelDiagonal(J, o)
            assert exact_mean_score(state, kernels).score >= base - 1e-14

    def test_no_kernel_beats_optimal(self):
        rng = np.random.default_rng(33)
        for twice_j in (1, 2, 5, 10):
            j = HalfInt.from_twice(twice_j)
            state = pure_polarized(j)
            opt = exact_mean_score(state, {j: optimal_kernel(j)}).score
            for _ in range(200):
                score = exact_mean_score(state, {j: random_kernel(j, rng)}).score
                assert score <= opt + 1e-14

    def test_epsilon_factor_values(self):
        assert epsilon_factor(5, 1.0) == 0.0
        assert abs(epsilon_factor(9, 0.9) - 0.9) < 1e-15
        J = 7
        g_opt = J / (J + 1)
        assert abs(epsilon_factor(J, g_opt) - J / (J + 1)) < 1e-12

    def test_fidelity_map(self):
        assert score_to_fidelity(0.0) == 0.5
        assert score_to_fidelity(1.0) == 1.0
        with pytest.raises(ValueError):
            score_to_fidelity(1.5)
