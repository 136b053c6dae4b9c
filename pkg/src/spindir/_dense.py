"""Brute-force product-space constructions for small qubit counts.

Independent of the block-wise machinery: states live in the full 2^n
computational basis and total-spin structure is recovered numerically
(per-Sz-sector eigendecomposition of S^2).  Used by the selftest and the
test suite as oracles; n beyond ~12 is intentionally out of reach.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = [
    "sz_diagonal",
    "sector_indices",
    "spin_sector_vectors",
    "total_spin_square",
    "y_rotation",
    "axis_angle_exponential",
]


def sz_diagonal(n: int) -> np.ndarray:
    """Diagonal of the collective Sz in the computational basis.

    Bit k set means qubit k points down; entry is (n_up - n_down)/2.
    """
    idx = np.arange(2**n)
    ones = np.array([bin(i).count("1") for i in idx])
    return (n - 2.0 * ones) / 2.0


def sector_indices(n: int) -> dict[int, np.ndarray]:
    """Basis indices grouped by 2m, descending m."""
    diag = sz_diagonal(n)
    out = {}
    for twice_m in range(n, -n - 1, -2):
        out[twice_m] = np.nonzero(np.abs(2.0 * diag - twice_m) < 0.5)[0]
    return out


def _splus_sector(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Matrix of S+ from the m sector (src) to the m+1 sector (dst)."""
    pos = {int(i): k for k, i in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)))
    for col, state in enumerate(src):
        state = int(state)
        for bit in range(n):
            if state & (1 << bit):  # qubit down, can be raised
                mat[pos[state ^ (1 << bit)], col] = 1.0
    return mat


@lru_cache(maxsize=8)
def spin_sector_vectors(n: int) -> dict[tuple[int, int], np.ndarray]:
    """Orthonormal bases of the (j, m) subspaces in the full 2^n space.

    Returns a map (2j, 2m) -> matrix of shape (2^n, multiplicity) whose
    columns span the subspace with S^2 = j(j+1) and Sz = m.  Obtained by
    diagonalizing S^2 = S- S+ + Sz(Sz + 1) inside each Sz sector.
    """
    sectors = sector_indices(n)
    collected: dict[tuple[int, int], list[np.ndarray]] = {}
    dim = 2**n
    for twice_m, idx in sectors.items():
        if len(idx) == 0:
            continue
        m = twice_m / 2.0
        if twice_m == n:
            block = np.zeros((1, 1))
        else:
            up = sectors[twice_m + 2]
            sp = _splus_sector(n, idx, up)
            block = sp.T @ sp
        s2 = block + (m * m + m) * np.eye(len(idx))
        evals, evecs = np.linalg.eigh(s2)
        for col, val in enumerate(evals):
            j = 0.5 * (math.sqrt(1.0 + 4.0 * max(0.0, val)) - 1.0)
            twice_j = round(2.0 * j)
            if abs(2.0 * j - twice_j) > 1e-6:
                raise RuntimeError(f"non-spin eigenvalue {val} in sector m={m}")
            full = np.zeros(dim)
            full[idx] = evecs[:, col]
            collected.setdefault((twice_j, twice_m), []).append(full)
    return {key: np.stack(vecs, axis=1) for key, vecs in collected.items()}


def total_spin_square(n: int) -> np.ndarray:
    """Dense S^2 on the full 2^n space (small n only)."""
    dim = 2**n
    sz = sz_diagonal(n)
    s2 = np.diag(sz * sz + sz)
    sectors = sector_indices(n)
    for twice_m, idx in sectors.items():
        if twice_m == n or len(idx) == 0:
            continue
        up = sectors[twice_m + 2]
        sp = _splus_sector(n, idx, up)
        block = sp.T @ sp  # S- S+ restricted to the sector
        s2[np.ix_(idx, idx)] += block
    return s2


def y_rotation(n: int, theta: float) -> np.ndarray:
    """Product rotation exp(-i theta Sy) = tensor power of the qubit one."""
    half = theta / 2.0
    q = np.array([[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]])
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, q)
    return out


def axis_angle_exponential(n: int, p: float, theta: float) -> np.ndarray:
    """exp(-i p S_axis) for the axis (sin theta, 0, cos theta).

    Built as R_y(theta) exp(-i p Sz) R_y(theta)^T with the product-space
    rotation, so it is independent of any block-wise representation.
    """
    rot = y_rotation(n, theta)
    phases = np.exp(-1j * p * sz_diagonal(n))
    return (rot * phases[None, :]) @ rot.T
