"""Pure-numpy weak-measurement trajectory stepper.

Fallback used when the compiled extension is unavailable.  Trajectories in
a batch advance in lock-step; every per-step operation is vectorized over
the batch.  The sampling rule, summation orders and normalization match
the compiled kernel, so both backends produce the same outcome sequences
for the same pre-drawn random numbers (up to last-bit rounding of the
basis-change matmuls).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def run_chain(
    psi: np.ndarray,
    first: np.ndarray,
    first_identity: bool,
    into: np.ndarray,
    into_identity: np.ndarray,
    mvals: np.ndarray,
    delta: float,
    uniforms: np.ndarray,
    normals: np.ndarray,
    outcomes: np.ndarray,
    exit_mat: np.ndarray,
    exit_identity: bool,
) -> np.ndarray:
    """Advance a batch of trajectories through S weak-measurement steps.

    Parameters
    ----------
    psi : (B, dim) complex
        Input states in the z eigenbasis; overwritten along the chain.
    first : (dim, dim) complex
        Basis change applied before step 0 (z basis to axis-0 eigenbasis).
    into : (n_axes, dim, dim) complex
        into[a] moves a row state from the previous axis' eigenbasis to
        axis a's; used for every step s > 0 with a = s mod n_axes.
    mvals : (dim,) float
        Eigenvalues (m descending) shared by all axes.
    delta : float
        Pointer width of each weak coupling.
    uniforms, normals : (B, S) float
        Pre-drawn randoms; column s drives step s (one uniform to pick the
        eigenvalue branch, one normal for the Gaussian readout).
    outcomes : (B, S) float, output
        Measured pointer positions.
    exit_mat : (dim, dim) complex
        Returns the final states to the z basis.

    Returns
    -------
    (B, dim) complex final states in the z basis.
    """
    n_steps = uniforms.shape[1]
    n_axes = into.shape[0]
    inv_4d2 = 1.0 / (4.0 * delta * delta)
    for s in range(n_steps):
        a = s % n_axes
        if s == 0:
            if not first_identity:
                psi = psi @ first
        elif not into_identity[a]:
            psi = psi @ into[a]
        prob = psi.real**2 + psi.imag**2
        cum = np.cumsum(prob, axis=1)
        threshold = uniforms[:, s] * cum[:, -1]
        pick = (cum > threshold[:, None]).argmax(axis=1)
        r = mvals[pick] + delta * normals[:, s]
        psi = psi * np.exp(-((r[:, None] - mvals[None, :]) ** 2) * inv_4d2)
        norm = np.sqrt(np.sum(psi.real**2 + psi.imag**2, axis=1))
        psi = psi / norm[:, None]
        outcomes[:, s] = r
    if not exit_identity:
        psi = psi @ exit_mat
    return np.ascontiguousarray(psi)
