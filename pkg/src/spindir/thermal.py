"""Rotation-symmetric input states decomposed into total-spin blocks.

A permutation-symmetric N-qubit state that commutes with Sz is fully
described by one weight per spin-j block and a diagonal coefficient per m
inside the block.  The thermal product state is the main instance; its
coefficients are c_m = e^(beta m) / Z with Z = (2 cosh(beta/2))^N.

Sign convention: weights grow with m, so every block is positively
polarized along +z for beta > 0.  The opposite convention merely flips the
z axis and changes nothing physical, but scores downstream assume positive
block polarizations.
"""

from __future__ import annotations

import math

import numpy as np

from .spinops import HalfInt, as_halfint, degeneracy, m_floats

__all__ = [
    "ThermalSpec",
    "Block",
    "BlockDiagonalState",
    "thermal_state",
    "pure_polarized",
    "polarization_moment",
    "mean_total_spin",
]


class ThermalSpec:
    """N = 2J qubits at inverse temperature beta (spin units).

    beta = math.inf is accepted and denotes the pure |J, J> limit.
    """

    __slots__ = ("J", "beta")

    def __init__(self, J, beta: float):
        self.J = as_halfint(J)
        self.beta = float(beta)
        if math.isnan(self.beta):
            raise ValueError("beta must be a real number or +inf")

    def __repr__(self):
        return f"ThermalSpec(J={self.J}, beta={self.beta})"


class Block:
    """One spin-j sector: total weight A_j Tr(rho^j) and coefficients c_m."""

    __slots__ = ("weight", "coeffs")

    def __init__(self, weight: float, coeffs: np.ndarray):
        self.weight = float(weight)
        self.coeffs = np.asarray(coeffs, dtype=float)


class BlockDiagonalState:
    """Block decomposition of a rotation-symmetric N = 2J qubit state.

    ``blocks`` maps HalfInt j to a Block whose coefficients are indexed by
    m descending.  The total weight sums to one; iteration order is j
    descending so downstream reductions are bit-reproducible.
    """

    __slots__ = ("J", "blocks")

    def __init__(self, J, blocks: dict):
        self.J = as_halfint(J)
        total = 0.0
        for j, block in blocks.items():
            if np.any(block.coeffs < 0.0):
                raise ValueError(f"negative coefficient in block j={j}")
            total += block.weight
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"block weights sum to {total!r}, not 1")
        self.blocks = blocks

    def block_js(self) -> list[HalfInt]:
        return list(self.blocks.keys())


def _block_range(J: HalfInt) -> list[HalfInt]:
    """j = J, J-1, ..., down to 0 or 1/2."""
    return [HalfInt.from_twice(t) for t in range(J.twice, -1, -2)]


def pure_polarized(J) -> BlockDiagonalState:
    """The fully polarized pure state |J, J>: a single block at j = J."""
    J = as_halfint(J)
    coeffs = np.zeros(J.dim)
    coeffs[0] = 1.0
    return BlockDiagonalState(J, {J: Block(1.0, coeffs)})


def thermal_state(spec: ThermalSpec) -> BlockDiagonalState:
    """Block decomposition of the thermal N-qubit product state.

    c_m = e^(beta m) / Z in every block, Z = (2 cosh(beta/2))^N.  The
    exponentials are evaluated in log space so beta * J far beyond 300
    only underflows the negligible low-m coefficients instead of
    overflowing Z.
    """
    J = spec.J
    beta = spec.beta
    if math.isinf(beta):
        if beta < 0:
            raise ValueError("beta = -inf is not a state")
        return pure_polarized(J)
    n_qubits = J.twice
    # log(2 cosh(beta/2)) without overflow
    log_z1 = abs(beta) / 2.0 + math.log1p(math.exp(-abs(beta)))
    blocks: dict[HalfInt, Block] = {}
    for j in _block_range(J):
        coeffs = np.exp(beta * m_floats(j) - n_qubits * log_z1)
        a_j = degeneracy(J, j)
        blocks[j] = Block(a_j * float(np.sum(coeffs)), coeffs)
    return BlockDiagonalState(J, blocks)


def polarization_moment(spec: ThermalSpec, j) -> float:
    """Unnormalized block polarization sum_m (m/j) e^(beta m).

    Equals Z * Tr[(Sz/j) rho^(alpha,j)] for one multiplicity copy of the
    spin-j sector, in closed form

        [ j sinh((1+j) beta) - (1+j) sinh(j beta) ] / (2 j sinh^2(beta/2)).

    The beta -> 0 limit is 0 and is returned explicitly.  The value is
    positive for beta > 0 under this package's sign convention.  Overflows
    to +inf once (1+j) beta exceeds ~709, which is far outside the regime
    where the un-divided moment is useful.
    """
    j = as_halfint(j)
    beta = spec.beta
    if j.twice == 0:
        return 0.0
    if beta == 0.0:
        return 0.0
    jf = float(j)
    try:
        num = jf * math.sinh((1.0 + jf) * beta) - (1.0 + jf) * math.sinh(jf * beta)
        den = 2.0 * jf * math.sinh(beta / 2.0) ** 2
        return num / den
    except OverflowError:
        return math.inf


def mean_total_spin(spec: ThermalSpec) -> tuple[float, float]:
    """Mean squared total spin of the thermal state and the matched j.

    Returns (s2, j_eq) with s2 = <S^2> = 3N/4 + N(N-1)/4 tanh^2(beta/2)
    and j_eq the positive root of j(j+1) = s2.  At beta -> inf this is
    exactly (J(J+1), J); at beta = 0 the qubits are uncorrelated and
    s2 = 3N/4.
    """
    n = spec.J.twice
    t = math.tanh(spec.beta / 2.0) if not math.isinf(spec.beta) else 1.0
    if math.isinf(spec.beta):
        t = 1.0 if spec.beta > 0 else -1.0
    s2 = 0.75 * n + 0.25 * n * (n - 1) * t * t
    j_eq = 0.5 * (math.sqrt(1.0 + 4.0 * s2) - 1.0)
    return s2, j_eq
