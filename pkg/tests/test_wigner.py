import math

import numpy as np

from spindir.spinops import HalfInt, coherent_state, spin_matrices
from spindir.wigner import rotation_matrix, small_d_batch, small_d_tower, wigner_small_d


def expm_rotation(j, theta):
    """Independent oracle: exp(-i theta Sy) by eigendecomposition."""
    rep = spin_matrices(j)
    evals, evecs = np.linalg.eigh(rep.sy)
    return (evecs * np.exp(-1j * theta * evals)) @ evecs.conj().T


def test_spin_half_matrix():
    theta = 0.77
    d = wigner_small_d(0.5, theta).d
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    assert np.allclose(d, [[c, -s], [s, c]], atol=1e-15)


def test_zero_angle_is_identity():
    for twice_j in (1, 4, 11, 60):
        d = wigner_small_d(HalfInt.from_twice(twice_j), 0.0).d
        assert np.max(np.abs(d - np.eye(twice_j + 1))) < 1e-13


def test_matches_matrix_exponential():
    rng = np.random.default_rng(4)
    for twice_j in range(1, 11):
        j = HalfInt.from_twice(twice_j)
        for theta in rng.uniform(-math.pi, math.pi, 3):
            d = wigner_small_d(j, float(theta)).d
            oracle = expm_rotation(j, float(theta))
            assert np.max(np.abs(oracle.imag)) < 1e-12
            assert np.max(np.abs(d - oracle.real)) < 1e-9


def test_orthogonality_up_to_j50():
    for twice_j in (1, 20, 64, 100):
        j = HalfInt.from_twice(twice_j)
        for theta in (0.21, 1.57, 2.95):
            d = wigner_small_d(j, theta).d
            assert np.max(np.abs(d @ d.T - np.eye(j.dim))) < 1e-10


def test_rotation_reproduces_coherent_state():
    for twice_j in (2, 7, 15):
        j = HalfInt.from_twice(twice_j)
        theta, phi = 0.9, 2.2
        pole = coherent_state(j, 0.0, 0.0).amplitudes
        rotated = rotation_matrix(j, theta, phi) @ pole
        target = coherent_state(j, theta, phi).amplitudes
        fidelity = abs(np.vdot(target, rotated)) ** 2
        assert fidelity > 1.0 - 1e-10


def test_rotation_conjugates_sz_to_axis():
    j = HalfInt.from_twice(5)
    rep = spin_matrices(j)
    theta, phi = 1.1, 0.6
    rot = rotation_matrix(j, theta, phi)
    s_axis = (
        math.sin(theta) * math.cos(phi) * rep.sx
        + math.sin(theta) * math.sin(phi) * rep.sy
        + math.cos(theta) * rep.sz
    )
    assert np.max(np.abs(rot @ rep.sz @ rot.conj().T - s_axis)) < 1e-12


def test_tower_matches_per_block_calls():
    thetas = [0.4, 1.9]
    tower = small_d_tower(HalfInt.from_twice(6), thetas)
    for twice_j in range(7):
        direct = small_d_batch(HalfInt.from_twice(twice_j), thetas)
        assert np.array_equal(tower[twice_j], direct)
