# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled weak-measurement trajectory stepper.

Same contract as the pure-python fallback in _stepper_py: pre-drawn random
columns drive each step, eigenvalue selection scans the left-to-right
cumulative probability, and the state is renormalized after every Gaussian
collapse.  Everything runs in C per trajectory with the GIL released, so
chunks can be farmed out to Python threads.
"""

import numpy as np

from libc.math cimport exp, sqrt

BACKEND_NAME = "compiled"


def run_chain(
    double complex[:, ::1] psi,
    double complex[:, ::1] first,
    bint first_identity,
    double complex[:, :, ::1] into,
    unsigned char[::1] into_identity,
    double[::1] mvals,
    double delta,
    double[:, ::1] uniforms,
    double[:, ::1] normals,
    double[:, ::1] outcomes,
    double complex[:, ::1] exit_mat,
    bint exit_identity,
):
    cdef Py_ssize_t n_traj = psi.shape[0]
    cdef Py_ssize_t dim = psi.shape[1]
    cdef Py_ssize_t n_steps = uniforms.shape[1]
    cdef Py_ssize_t n_axes = into.shape[0]
    cdef double inv_4d2 = 1.0 / (4.0 * delta * delta)

    scratch_arr = np.empty(dim, dtype=np.complex128)
    cum_arr = np.empty(dim, dtype=np.float64)
    cdef double complex[::1] scratch = scratch_arr
    cdef double[::1] cum = cum_arr

    cdef Py_ssize_t b, s, a, i, q, pick
    cdef double total, threshold, r, w, nrm2, inv_nrm, diff
    cdef double complex acc
    cdef bint do_transform

    with nogil:
        for b in range(n_traj):
            for s in range(n_steps):
                a = s % n_axes
                if s == 0:
                    do_transform = not first_identity
                else:
                    do_transform = not into_identity[a]
                if do_transform:
                    if s == 0:
                        for q in range(dim):
                            acc = 0
                            for i in range(dim):
                                acc = acc + psi[b, i] * first[i, q]
                            scratch[q] = acc
                    else:
                        for q in range(dim):
                            acc = 0
                            for i in range(dim):
                                acc = acc + psi[b, i] * into[a, i, q]
                            scratch[q] = acc
                    for q in range(dim):
                        psi[b, q] = scratch[q]
                total = 0.0
                for i in range(dim):
                    total = total + psi[b, i].real * psi[b, i].real + psi[b, i].imag * psi[b, i].imag
                    cum[i] = total
                threshold = uniforms[b, s] * total
                pick = dim - 1
                for i in range(dim):
                    if cum[i] > threshold:
                        pick = i
                        break
                r = mvals[pick] + delta * normals[b, s]
                nrm2 = 0.0
                for i in range(dim):
                    diff = r - mvals[i]
                    w = exp(-diff * diff * inv_4d2)
                    psi[b, i] = psi[b, i] * w
                    nrm2 = nrm2 + psi[b, i].real * psi[b, i].real + psi[b, i].imag * psi[b, i].imag
                inv_nrm = 1.0 / sqrt(nrm2)
                for i in range(dim):
                    psi[b, i] = psi[b, i] * inv_nrm
                outcomes[b, s] = r
            if not exit_identity:
                for q in range(dim):
                    acc = 0
                    for i in range(dim):
                        acc = acc + psi[b, i] * exit_mat[i, q]
                    scratch[q] = acc
                for q in range(dim):
                    psi[b, q] = scratch[q]
    return np.asarray(psi)
