import numpy as np
import pytest

from spindir.backend import HAVE_COMPILED, backend_name, get_stepper


def tiny_workload(stepper, seed=60):
    rng = np.random.default_rng(seed)
    dim, n_traj, n_steps = 4, 8, 10
    psi = np.zeros((n_traj, dim), dtype=complex)
    psi[:, 0] = 1.0
    eye = np.eye(dim, dtype=complex)
    into = np.stack([eye])
    uniforms = rng.random((n_traj, n_steps))
    normals = rng.standard_normal((n_traj, n_steps))
    outcomes = np.empty((n_traj, n_steps))
    final = stepper.run_chain(
        psi, eye.copy(), True, into, np.array([1], dtype=np.uint8),
        np.array([1.5, 0.5, -0.5, -1.5]), 0.8, uniforms, normals, outcomes,
        eye.copy(), True,
    )
    return outcomes, np.asarray(final)


def test_default_backend_resolves():
    assert backend_name() in ("compiled", "python")
    assert get_stepper("python").BACKEND_NAME == "python"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        get_stepper("fortran")


def test_eigenstate_fixed_point_python():
    outcomes, final = tiny_workload(get_stepper("python"))
    # z measurements of the m = 3/2 eigenstate never move the state
    assert np.allclose(np.abs(final[:, 0]), 1.0)
    assert np.allclose(final[:, 1:], 0.0)
    assert np.all(np.abs(outcomes - 1.5) < 5 * 0.8)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled stepper not built")
def test_backends_bitwise_close():
    o1, f1 = tiny_workload(get_stepper("python"))
    o2, f2 = tiny_workload(get_stepper("compiled"))
    assert np.array_equal(o1, o2)  # identity transforms: no matmul rounding
    assert np.max(np.abs(f1 - f2)) < 1e-14
