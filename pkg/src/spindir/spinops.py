"""Exact collective-spin algebra.

Spin-j matrices, Dicke-basis bookkeeping, spin coherent states and the
permutation degeneracies that weight every block-wise computation in this
package.  All vectors and matrices over a spin-j block are indexed by the
magnetic quantum number m *descending* from +j to -j.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "HalfInt",
    "as_halfint",
    "m_values",
    "m_floats",
    "SpinRep",
    "spin_matrices",
    "degeneracy",
    "PureSpinState",
    "coherent_state",
    "sample_uniform_direction",
    "direction_angles",
]


class HalfInt:
    """An integer or half-integer quantum number stored as ``2j``.

    Storing the doubled value keeps basis bookkeeping exact: j = 3/2 is
    ``twice = 3``, and sums/differences of quantum numbers never drift the
    way repeated float arithmetic can.
    """

    __slots__ = ("twice",)

    def __init__(self, value):
        if isinstance(value, HalfInt):
            self.twice = value.twice
            return
        if isinstance(value, (int, np.integer)):
            self.twice = 2 * int(value)
            return
        doubled = 2.0 * float(value)
        rounded = round(doubled)
        if abs(doubled - rounded) > 1e-9:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        self.twice = int(rounded)

    @classmethod
    def from_twice(cls, twice) -> "HalfInt":
        obj = cls.__new__(cls)
        obj.twice = int(twice)
        return obj

    @property
    def dim(self) -> int:
        """Dimension 2j+1 of the spin-j representation."""
        return self.twice + 1

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2.0

    def __repr__(self) -> str:
        if self.twice % 2 == 0:
            return f"HalfInt({self.twice // 2})"
        return f"HalfInt({self.twice}/2)"

    def __str__(self) -> str:
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def _coerce(self, other):
        try:
            return HalfInt(other)
        except (ValueError, TypeError):
            return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.twice == o.twice

    def __hash__(self):
        # Matches hash(float(self)) so HalfInt(1) and 1 collide in dicts.
        return hash(self.twice / 2.0)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.twice < o.twice

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.twice <= o.twice

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.twice > o.twice

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.twice >= o.twice

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return HalfInt.from_twice(self.twice + o.twice)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return HalfInt.from_twice(self.twice - o.twice)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return HalfInt.from_twice(o.twice - self.twice)

    def __neg__(self):
        return HalfInt.from_twice(-self.twice)

    def __abs__(self):
        return HalfInt.from_twice(abs(self.twice))


def as_halfint(value) -> HalfInt:
    """Coerce an int, float or HalfInt to HalfInt."""
    return value if isinstance(value, HalfInt) else HalfInt(value)


def m_values(j) -> list[HalfInt]:
    """All magnetic quantum numbers of a spin-j block, descending from +j."""
    j = as_halfint(j)
    return [HalfInt.from_twice(t) for t in range(j.twice, -j.twice - 1, -2)]


def m_floats(j) -> np.ndarray:
    """Magnetic quantum numbers as floats, descending from +j to -j."""
    j = as_halfint(j)
    return (j.twice - 2.0 * np.arange(j.dim)) / 2.0


class SpinRep:
    """Spin-j generators in the Dicke basis (hbar = 1, m descending).

    Attributes
    ----------
    j : HalfInt
    dim : int
        2j+1.
    sx, sy, sz : ndarray
        Complex (dim, dim) Hermitian matrices satisfying the angular
        momentum algebra [sx, sy] = i sz (and cyclic).
    """

    __slots__ = ("j", "dim", "sx", "sy", "sz")

    def __init__(self, j, sx, sy, sz):
        self.j = as_halfint(j)
        self.dim = self.j.dim
        self.sx = sx
        self.sy = sy
        self.sz = sz


def spin_matrices(j) -> SpinRep:
    """Build the spin-j matrices from the ladder-operator elements.

    Uses <m+1| S+ |m> = sqrt(j(j+1) - m(m+1)); sz is diagonal with entries
    j, j-1, ..., -j.

    Parameters
    ----------
    j : HalfInt, int or float
        Non-negative integer or half-integer spin.

    Returns
    -------
    SpinRep
    """
    j = as_halfint(j)
    if j.twice < 0:
        raise ValueError("spin must be non-negative")
    jf = float(j)
    dim = j.dim
    m = m_floats(j)
    # raising S+ sends column m = m[i] (i >= 1) to row m+1 = m[i-1]
    raise_amp = np.sqrt(jf * (jf + 1.0) - m[1:] * (m[1:] + 1.0))
    sp = np.zeros((dim, dim), dtype=complex)
    sp[np.arange(dim - 1), np.arange(1, dim)] = raise_amp
    sm = sp.conj().T
    sx = (sp + sm) / 2.0
    sy = (sp - sm) / 2.0j
    sz = np.diag(m).astype(complex)
    return SpinRep(j, sx, sy, sz)


def degeneracy(J, j) -> int:
    """Multiplicity of the spin-j irreducible block inside 2J spin-1/2's.

    Counts the permutation copies of total spin j in the N = 2J qubit
    Hilbert space: C(2J, J-j) - C(2J, J-j-1).  Exact integer arithmetic;
    the big binomials never overflow.
    """
    J = as_halfint(J)
    j = as_halfint(j)
    if (J.twice - j.twice) % 2 != 0:
        raise ValueError(f"J - j must be an integer, got J={J}, j={j}")
    if j.twice < 0 or j.twice > J.twice:
        raise ValueError(f"need 0 <= j <= J, got J={J}, j={j}")
    n = J.twice
    k = (J.twice - j.twice) // 2
    a = math.comb(n, k)
    if k >= 1:
        a -= math.comb(n, k - 1)
    return a


class PureSpinState:
    """Pure state of one spin-j block, amplitudes indexed m = j ... -j."""

    __slots__ = ("j", "amplitudes")

    def __init__(self, j, amplitudes):
        self.j = as_halfint(j)
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (self.j.dim,):
            raise ValueError(
                f"expected {self.j.dim} amplitudes for j={self.j}, got shape {amps.shape}"
            )
        norm2 = float(np.sum(amps.real**2 + amps.imag**2))
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |psi|^2 = {norm2!r}")
        self.amplitudes = amps

    def expectation(self, op: np.ndarray) -> float:
        """Real part of <psi| op |psi>."""
        return float(np.vdot(self.amplitudes, op @ self.amplitudes).real)

    def overlap(self, other: "PureSpinState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def coherent_state(j, theta: float, phi: float) -> PureSpinState:
    """Spin coherent state along the direction (theta, phi).

    Amplitude at m is sqrt(C(2j, j+m)) cos(theta/2)^(j+m)
    sin(theta/2)^(j-m) e^(-i m phi).  This is the maximal-polarization
    state of the block, i.e. the rotated |j, j>.  The e^(-i m phi) phase
    convention is used consistently across the package.

    Parameters
    ----------
    j : spin of the block
    theta : polar angle in [0, pi]
    phi : azimuthal angle
    """
    j = as_halfint(j)
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    dim = j.dim
    amps = np.zeros(dim, dtype=complex)
    if theta == 0.0:
        amps[0] = 1.0
    elif theta == math.pi:
        amps[-1] = np.exp(1j * float(j) * phi)
    else:
        jf = float(j)
        mf = m_floats(j)
        log_c = math.log(math.cos(theta / 2.0))
        log_s = math.log(math.sin(theta / 2.0))
        log_binom = np.array(
            [
                math.lgamma(j.twice + 1)
                - math.lgamma(k + 1)
                - math.lgamma(j.twice - k + 1)
                for k in range(dim)
            ]
        )[::-1]  # index 0 is m = +j, i.e. binomial C(2j, 2j)
        log_mag = 0.5 * log_binom + (jf + mf) * log_c + (jf - mf) * log_s
        amps = np.exp(log_mag) * np.exp(-1j * mf * phi)
        amps /= math.sqrt(float(np.sum(amps.real**2 + amps.imag**2)))
    return PureSpinState(j, amps)


def sample_uniform_direction(rng: np.random.Generator) -> np.ndarray:
    """Draw a unit 3-vector uniformly on the sphere.

    Consumes exactly two uniform draws from ``rng``: the z component is
    uniform on [-1, 1] and the azimuth uniform on [0, 2 pi).
    """
    z = 2.0 * rng.random() - 1.0
    phi = 2.0 * math.pi * rng.random()
    s = math.sqrt(max(0.0, 1.0 - z * z))
    return np.array([s * math.cos(phi), s * math.sin(phi), z])


def direction_angles(u) -> tuple[float, float]:
    """Polar and azimuthal angles of a unit vector (phi in [0, 2 pi))."""
    u = np.asarray(u, dtype=float)
    theta = math.acos(min(1.0, max(-1.0, float(u[2]))))
    phi = math.atan2(float(u[1]), float(u[0])) % (2.0 * math.pi)
    return theta, phi
