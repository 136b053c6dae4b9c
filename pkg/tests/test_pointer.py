import math

import numpy as np
import pytest

from spindir.pointer import (
    PointerConfig,
    QuadratureError,
    epsilon_lower_bound,
    kraus_diagonal,
    povm_kernel,
    radial_profile,
    score_vs_delta,
    thermal_pointer_score,
    top_moment_bounds,
)
from spindir.score import PovmKernelDiagonal, epsilon_factor, exact_mean_score
from spindir.spinops import HalfInt
from spindir.thermal import ThermalSpec, pure_polarized


def cartesian_oracle(delta, r, n=64, pmax=None):
    """Brute-force 3D momentum-grid evaluation at j = 1/2 (midpoint rule)."""
    pmax = pmax if pmax is not None else 8.0 / delta
    edges = np.linspace(-pmax, pmax, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    dv = (edges[1] - edges[0]) ** 3
    px, py, pz = np.meshgrid(mid, mid, mid, indexing="ij")
    pz = pz.ravel()
    pnorm = np.sqrt(px.ravel() ** 2 + py.ravel() ** 2 + pz**2)
    c0 = (2 * math.pi) ** (-1.5) * (2 * delta**2 / math.pi) ** 0.75
    base = np.exp(1j * r * pz) * np.exp(-(delta**2) * pnorm**2)
    up = np.sum(base * (np.cos(pnorm / 2) - 1j * np.sin(pnorm / 2) * pz / pnorm)) * dv * c0
    dn = np.sum(base * (np.cos(pnorm / 2) + 1j * np.sin(pnorm / 2) * pz / pnorm)) * dv * c0
    assert abs(up.imag) < 1e-12 and abs(dn.imag) < 1e-12
    return np.array([up.real, dn.real])


class TestKrausDiagonal:
    def test_scalar_block_gaussian_profile(self):
        delta = 0.7
        c0 = (2 * math.pi) ** (-1.5) * (2 * delta**2 / math.pi) ** 0.75
        for r in (0.0, 0.9, 2.4):
            value = kraus_diagonal(HalfInt(0), delta, r)[0]
            expected = c0 * (math.pi / delta**2) ** 1.5 * math.exp(-(r**2) / (4 * delta**2))
            assert abs(value - expected) < 1e-10 * expected + 1e-14

    def test_realness_small_blocks(self):
        for twice_j in (1, 3, 6):
            for delta in (0.5, 2.0):
                prof = radial_profile(HalfInt.from_twice(twice_j), delta)
                assert prof.max_imag < 1e-8

    def test_matches_cartesian_grid(self):
        delta = 1.0
        for r in (0.4, 1.1, 2.6):
            mine = kraus_diagonal(HalfInt(0.5), delta, r)
            brute = cartesian_oracle(delta, r)
            assert np.max(np.abs(mine - brute)) < 1e-4

    def test_rejects_negative_radius(self):
        with pytest.raises(ValueError):
            kraus_diagonal(HalfInt(1), 1.0, -0.5)


class TestPovmKernel:
    def test_very_weak_pointer_is_uninformative(self):
        for twice_j in (2, 5):
            j = HalfInt.from_twice(twice_j)
            kern = povm_kernel(j, 1e3 * math.sqrt(float(j)), refine=False)
            assert np.max(np.abs(kern.o - 1.0)) < 1e-2

    def test_top_moment_dominates_at_matched_width(self):
        j = HalfInt(5)
        kern = povm_kernel(j, math.sqrt(5 / 4))
        assert kern.o[0] == np.max(kern.o)
        assert kern.o[0] > 0.9 * j.dim

    def test_trace_normalization(self):
        for twice_j, delta in ((1, 0.6), (4, 1.1), (9, 3.0)):
            j = HalfInt.from_twice(twice_j)
            kern = povm_kernel(j, delta, refine=False)
            assert abs(float(np.sum(kern.o)) - j.dim) < 1e-6

    def test_bad_quadrature_raises(self):
        # momentum cutoff far too small: completeness integral collapses
        cfg = PointerConfig(1.0, 64, 9.0, 48, 16, 0.3)
        with pytest.raises(QuadratureError):
            povm_kernel(HalfInt(1), 1.0, cfg, refine=False)


class TestScoreVsDelta:
    def test_interior_maximum_near_matched_width(self):
        for J in (HalfInt(5), HalfInt(10)):
            matched = math.sqrt(float(J) / 4)
            deltas = [f * matched for f in (0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.8, 4.0)]
            curve = score_vs_delta(J, deltas)
            peak = int(np.argmax(curve.score))
            assert 0 < peak < len(deltas) - 1
            assert 0.5 * matched <= curve.argmax_delta() <= 2.0 * matched
            assert np.all(curve.score_opt >= curve.score - 1e-12)

    def test_epsilon_column_consistent(self):
        J = HalfInt(4)
        curve = score_vs_delta(J, [1.0, 2.0])
        for g, eps in zip(curve.score, curve.epsilon):
            assert abs(eps - epsilon_factor(J, g)) < 1e-12


class TestTopMomentBounds:
    def test_saturated_kernel_algebra(self):
        for J in (HalfInt(3), HalfInt(7)):
            jf = float(J)
            assert abs(epsilon_lower_bound(J, J.dim) - jf / (jf + 1.0)) < 1e-12

    def test_vanishing_top_moment_tends_to_two(self):
        assert epsilon_lower_bound(HalfInt(300), 0.0) > 1.99

    def test_bounds_bracket_exact_score(self):
        J = HalfInt(10)
        delta = math.sqrt(10 / 4)
        bounds = top_moment_bounds(J, delta)
        kern = povm_kernel(J, delta)
        exact = exact_mean_score(pure_polarized(J), {J: kern}).score
        assert bounds.score_lower <= exact <= bounds.score_upper + 1e-12

    def test_random_kernels_respect_epsilon_bound(self):
        rng = np.random.default_rng(17)
        J = HalfInt(6)
        state = pure_polarized(J)
        for _ in range(200):
            raw = rng.random(J.dim)
            kern = PovmKernelDiagonal(J, raw * J.dim / raw.sum())
            eps = exact_mean_score(state, {J: kern}).epsilon
            assert eps >= epsilon_lower_bound(J, kern.o[0]) - 1e-12

    def test_rejects_out_of_range_moment(self):
        with pytest.raises(ValueError):
            epsilon_lower_bound(HalfInt(3), 9.0)


class TestThermalPointer:
    def test_zero_temperature_reduces_to_pure_pipeline(self):
        J = HalfInt(6)
        res = thermal_pointer_score(ThermalSpec(J, math.inf))
        assert abs(res.delta - math.sqrt(6 / 4)) < 1e-12
        kern = povm_kernel(J, res.delta)
        direct = exact_mean_score(pure_polarized(J), {J: kern})
        assert abs(res.breakdown.score - direct.score) < 1e-12

    def test_infinite_temperature_scores_zero(self):
        res = thermal_pointer_score(ThermalSpec(HalfInt(3), 0.0))
        assert abs(res.breakdown.score) < 1e-12
        assert abs(res.breakdown.score_opt) < 1e-12

    def test_moderate_temperature_close_to_optimal(self):
        res = thermal_pointer_score(ThermalSpec(HalfInt(5), 2.0 * math.atanh(0.8)))
        assert res.breakdown.gap >= 0.0
        assert res.j_delta_g < 0.3


def test_block_kernel_independent_of_parent_size():
    # the spin-j kernel is the whole story for a j block of any N; the
    # product-space reduction behind that statement is checked in the
    # selftest against dense 10-qubit operators
    from spindir.selftest import _check_block_equivalence

    ok, detail = _check_block_equivalence()
    assert ok, detail
