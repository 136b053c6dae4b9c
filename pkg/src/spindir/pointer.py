"""Three-dimensional Gaussian-pointer measurement of a spin block.

The measurement couples every spin component to the matching coordinate of
one 3D pointer of width delta and then reads the pointer position r.  The
outcome operator for r along +z,

    E_r  =  c0 * integral d^3p  e^(i r.p) e^(-delta^2 p^2) e^(-i p.S),

commutes with rotations about z and is Hermitian, so it is diagonal in
|j, m> with real eigenvalues e_m(r).  Writing the momentum integral in
spherical coordinates and expanding the axis-angle rotation through the
small-d matrix turns the 3D operator integral into a 2D scalar quadrature:

    e_m(r) = c0 * 2 pi * int_0^inf dp p^2 e^(-delta^2 p^2)
             int_-1^1 dxi e^(i r p xi) sum_m' |d^j_{m m'}(arccos xi)|^2 e^(-i p m')

with c0 = (2 pi)^(-3/2) (2 delta^2 / pi)^(3/4) fixed analytically by
completeness of the full position measurement (the Gaussian p-integral of
the scalar part).  Radial moments of e_m(r)^2 then give the diagonal o_m
of the direction kernel, normalized to trace 2j+1.

Gauss-Legendre nodes are used on all three axes.  Node counts scale with
the total oscillation phase (r_max * p_max) and are doubled until the
kernel's score moment stabilizes; the truncation tails of the Gaussians
are negligible at the default cutoffs r_max = j + 8 delta, p_max = 8/delta.
"""

from __future__ import annotations

import math

import numpy as np

from .spinops import HalfInt, as_halfint, m_floats
from .score import PovmKernelDiagonal, exact_mean_score, optimal_kernel
from .thermal import ThermalSpec, mean_total_spin, thermal_state, pure_polarized
from .wigner import small_d_batch

__all__ = [
    "QuadratureError",
    "PointerConfig",
    "KrausRadialProfile",
    "kraus_diagonal",
    "radial_profile",
    "povm_kernel",
    "ScoreCurve",
    "score_vs_delta",
    "TopMomentBounds",
    "top_moment_bounds",
    "epsilon_lower_bound",
    "ThermalPointerResult",
    "thermal_pointer_score",
]

COMPLETENESS_TOL = 1e-4
IMAG_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Raised when a pointer quadrature fails its self-consistency checks."""


class PointerConfig:
    """Quadrature plan for one (j, delta) pointer-kernel evaluation."""

    __slots__ = ("delta", "n_radial", "r_max", "n_theta", "n_momentum", "p_max")

    def __init__(self, delta, n_radial, r_max, n_theta, n_momentum, p_max):
        if delta <= 0:
            raise ValueError("pointer width delta must be positive")
        self.delta = float(delta)
        self.n_radial = int(n_radial)
        self.r_max = float(r_max)
        self.n_theta = int(n_theta)
        self.n_momentum = int(n_momentum)
        self.p_max = float(p_max)

    @classmethod
    def default(cls, j, delta: float) -> "PointerConfig":
        """Node counts sized to the oscillation phase of the integrands.

        The p-integrand oscillates with total phase ~ (r_max + j) p_max and
        the xi-integrand with ~ r_max p_max plus the polynomial degree 2j
        of the rotation weights; Gauss-Legendre needs roughly half the
        phase in nodes, padded here with a safety margin.
        """
        j = as_halfint(j)
        jf = float(j)
        delta = float(delta)
        r_max = jf + 8.0 * delta
        p_max = 8.0 / delta
        n_momentum = max(96, int(0.6 * (r_max + jf) * p_max) + 16)
        n_theta = max(96, int(0.6 * r_max * p_max) + j.twice + 16)
        n_radial = max(128, int(0.6 * r_max * p_max) + 32)
        return cls(delta, n_radial, r_max, n_theta, n_momentum, p_max)

    def doubled(self) -> "PointerConfig":
        return PointerConfig(
            self.delta, 2 * self.n_radial, self.r_max, 2 * self.n_theta,
            2 * self.n_momentum, self.p_max,
        )


class KrausRadialProfile:
    """Table of pointer eigenvalues e_m(r) on the radial quadrature nodes."""

    __slots__ = ("j", "delta", "r_nodes", "r_weights", "table", "max_imag")

    def __init__(self, j, delta, r_nodes, r_weights, table, max_imag):
        self.j = as_halfint(j)
        self.delta = float(delta)
        self.r_nodes = r_nodes
        self.r_weights = r_weights
        self.table = table  # (n_radial, 2j+1), real
        self.max_imag = float(max_imag)


# |d^j(theta)|^2 tables keyed by (2j, n_theta); xi nodes depend only on n_theta
_DSQ_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _dsq_table(j: HalfInt, n_theta: int):
    key = (j.twice, n_theta)
    hit = _DSQ_CACHE.get(key)
    if hit is not None:
        return hit
    xi, w_xi = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(xi)
    dsq = small_d_batch(j, thetas) ** 2  # (n_theta, dim, dim)
    _DSQ_CACHE[key] = (xi, w_xi, dsq)
    return xi, w_xi, dsq


def _scaled_leggauss(n: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _eigenvalue_table(j: HalfInt, delta: float, cfg: PointerConfig, r_nodes: np.ndarray):
    """Complex e_m(r) on the given radial nodes; caller checks Im residue."""
    dim = j.dim
    mf = m_floats(j)
    xi, w_xi, dsq = _dsq_table(j, cfg.n_theta)
    p, w_p = _scaled_leggauss(cfg.n_momentum, 0.0, cfg.p_max)

    phase = np.exp(-1j * np.outer(p, mf))  # (n_p, dim)
    # rotation-weighted phase sum: A[p, t, m] = sum_m' dsq[t, m, m'] e^(-i p m')
    a = np.tensordot(phase, dsq, axes=([1], [2]))  # (n_p, n_theta, dim)
    a *= w_xi[None, :, None]

    w_p_eff = w_p * p * p * np.exp(-(delta * delta) * p * p)
    c0 = (2.0 * math.pi) ** (-1.5) * (2.0 * delta * delta / math.pi) ** 0.75

    n_r = r_nodes.shape[0]
    out = np.empty((n_r, dim), dtype=complex)
    chunk = max(1, int(48_000_000 // (16 * cfg.n_momentum * cfg.n_theta)))
    for start in range(0, n_r, chunk):
        rc = r_nodes[start : start + chunk]
        osc = np.exp(1j * p[:, None, None] * rc[None, :, None] * xi[None, None, :])
        # osc: (n_p, chunk, n_theta); contract theta then momentum
        c = osc @ a  # (n_p, chunk, dim)
        out[start : start + chunk] = np.tensordot(w_p_eff, c, axes=([0], [0]))
    out *= c0 * 2.0 * math.pi
    return out


def radial_profile(j, delta: float, quad: PointerConfig | None = None) -> KrausRadialProfile:
    """Evaluate e_m(r) on the radial Gauss-Legendre grid of the config.

    Raises QuadratureError if the Hermiticity residue (the imaginary part
    that must cancel between the two momentum hemispheres) exceeds 1e-8.
    """
    j = as_halfint(j)
    cfg = quad if quad is not None else PointerConfig.default(j, delta)
    r_nodes, r_weights = _scaled_leggauss(cfg.n_radial, 0.0, cfg.r_max)
    raw = _eigenvalue_table(j, cfg.delta, cfg, r_nodes)
    max_imag = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
    if max_imag > IMAG_TOL:
        raise QuadratureError(
            f"pointer eigenvalues not real: max |Im| = {max_imag:.3e} "
            f"at j={j}, delta={cfg.delta}"
        )
    return KrausRadialProfile(j, cfg.delta, r_nodes, r_weights, raw.real, max_imag)


def kraus_diagonal(j, delta: float, r: float, quad: PointerConfig | None = None) -> np.ndarray:
    """Diagonal eigenvalues e_m(r) of the outcome operator at radius r."""
    j = as_halfint(j)
    if r < 0:
        raise ValueError("pointer radius r must be non-negative")
    cfg = quad if quad is not None else PointerConfig.default(j, delta)
    raw = _eigenvalue_table(j, cfg.delta, cfg, np.array([float(r)]))
    max_imag = float(np.max(np.abs(raw.imag)))
    if max_imag > IMAG_TOL:
        raise QuadratureError(
            f"pointer eigenvalues not real: max |Im| = {max_imag:.3e} "
            f"at j={j}, delta={cfg.delta}, r={r}"
        )
    return raw.real[0]


def _kernel_once(j: HalfInt, cfg: PointerConfig):
    """One quadrature pass: (moments o, completeness defect, score moment)."""
    prof = radial_profile(j, cfg.delta, cfg)
    radial_moment = prof.r_weights * prof.r_nodes**2
    per_m = radial_moment @ (prof.table**2)  # integral r^2 e_m(r)^2 dr
    total = float(np.sum(per_m))
    defect = abs(4.0 * math.pi * total / j.dim - 1.0)
    o = j.dim * per_m / total
    if j.twice:
        w3 = float(np.dot(m_floats(j) / float(j), o)) / j.dim
    else:
        w3 = 0.0
    return o, defect, w3


def povm_kernel(
    j,
    delta: float,
    quad: PointerConfig | None = None,
    *,
    refine: bool | None = None,
    tol: float = 1e-5,
    max_doublings: int = 3,
) -> PovmKernelDiagonal:
    """Direction-kernel diagonal o_m of the pointer measurement.

    o_m is the radial second moment of e_m(r)^2, normalized so the kernel
    trace is 2j+1.  With ``refine`` (default when no explicit config is
    passed) the node counts are doubled until the kernel's score moment
    changes by less than ``tol``; the completeness defect of the final
    quadrature must stay below 1e-4.

    Raises
    ------
    QuadratureError
        If refinement fails to converge or the completeness integral of
        the outcome family deviates from identity by more than 1e-4.
    """
    j = as_halfint(j)
    cfg = quad if quad is not None else PointerConfig.default(j, delta)
    if refine is None:
        refine = quad is None
    o, defect, w3 = _kernel_once(j, cfg)
    if refine:
        converged = False
        change = math.inf
        for _ in range(max_doublings):
            cfg = cfg.doubled()
            o2, defect2, w32 = _kernel_once(j, cfg)
            change = abs(w32 - w3)
            o, defect, w3 = o2, defect2, w32
            if change < tol:
                converged = True
                break
        if not converged:
            raise QuadratureError(
                f"kernel quadrature did not converge at j={j}, delta={delta}: "
                f"last score-moment change {change:.3e}"
            )
    if defect > COMPLETENESS_TOL:
        raise QuadratureError(
            f"completeness defect {defect:.3e} at j={j}, delta={delta}"
        )
    if float(np.min(o)) < -1e-10:
        raise QuadratureError(
            f"negative kernel moment {float(np.min(o)):.3e} at j={j}, delta={delta}"
        )
    return PovmKernelDiagonal(j, np.clip(o, 0.0, None))


class ScoreCurve:
    """Score against pointer width for the fully polarized input."""

    __slots__ = ("J", "deltas", "score", "score_opt", "epsilon", "top_moment")

    def __init__(self, J, deltas, score, score_opt, epsilon, top_moment):
        self.J = J
        self.deltas = deltas
        self.score = score
        self.score_opt = score_opt
        self.epsilon = epsilon
        self.top_moment = top_moment

    def argmax_delta(self) -> float:
        return float(self.deltas[int(np.argmax(self.score))])


def score_vs_delta(J, deltas, quad: PointerConfig | None = None, *, refine: bool = False) -> ScoreCurve:
    """Mean score of the pointer measurement across a grid of widths.

    Runs on the pure fully polarized state (single block j = J).  Per-point
    configs come from PointerConfig.default unless ``quad`` is supplied for
    every point; refinement is off by default since curve shape needs less
    accuracy than single-point optimality factors.
    """
    J = as_halfint(J)
    state = pure_polarized(J)
    deltas = np.asarray(deltas, dtype=float)
    score = np.empty_like(deltas)
    score_opt = np.empty_like(deltas)
    epsilon = np.empty_like(deltas)
    top = np.empty_like(deltas)
    for i, d in enumerate(deltas):
        kern = povm_kernel(J, float(d), quad, refine=refine)
        br = exact_mean_score(state, {J: kern})
        score[i] = br.score
        score_opt[i] = br.score_opt
        epsilon[i] = br.epsilon
        top[i] = kern.o[0]
    return ScoreCurve(J, deltas, score, score_opt, epsilon, top)


class TopMomentBounds:
    """Score bounds using only the top kernel moment o_J.

    score_lower places all residual kernel weight at m = -J (the rigorous
    worst case), score_upper places it at m = J-1 (equivalently weights the
    residual by (J-1)/J), which caps how well any kernel with this o_J can
    do.  The exact score always lies between the two.
    """

    __slots__ = ("J", "delta", "o_top", "score_lower", "score_upper")

    def __init__(self, J, delta, o_top, score_lower, score_upper):
        self.J = J
        self.delta = delta
        self.o_top = o_top
        self.score_lower = score_lower
        self.score_upper = score_upper


def top_moment_bounds(J, delta: float, quad: PointerConfig | None = None, *, refine: bool = True) -> TopMomentBounds:
    """Evaluate the o_J-only score bounds for the pointer kernel."""
    J = as_halfint(J)
    kern = povm_kernel(J, delta, quad, refine=refine)
    jf = float(J)
    q = kern.o[0] / J.dim
    lower = jf / (jf + 1.0) * (2.0 * q - 1.0)
    upper = jf / (jf + 1.0) * (q + (jf - 1.0) / jf * (1.0 - q))
    return TopMomentBounds(J, float(delta), float(kern.o[0]), lower, upper)


def epsilon_lower_bound(J, o_top: float) -> float:
    """Least possible optimality factor for any kernel with top moment o_top.

    epsilon = J(1 - G) of any valid kernel whose top moment is o_top obeys

        epsilon >= J [ 1 - J/(J+1) ( q + (J-1)/J (1 - q) ) ],  q = o_top/(2J+1),

    because the residual trace scores at best like m = J-1.  At q = 1 this
    is J/(J+1); at q = 0 it tends to 2 for large J, so a vanishing top
    moment forbids asymptotic optimality.
    """
    J = as_halfint(J)
    jf = float(J)
    if not 0.0 <= o_top <= J.dim + 1e-9:
        raise ValueError(f"o_top must lie in [0, 2J+1], got {o_top}")
    q = o_top / J.dim
    return jf * (1.0 - jf / (jf + 1.0) * (q + (jf - 1.0) / jf * (1.0 - q)))


class ThermalPointerResult:
    """Pointer measurement of a thermal state with width matched to j_eq."""

    __slots__ = ("spec", "delta", "j_eq", "breakdown")

    def __init__(self, spec, delta, j_eq, breakdown):
        self.spec = spec
        self.delta = delta
        self.j_eq = j_eq
        self.breakdown = breakdown

    @property
    def j_delta_g(self) -> float:
        return float(self.spec.J) * self.breakdown.gap


def thermal_pointer_score(spec: ThermalSpec, quad: PointerConfig | None = None) -> ThermalPointerResult:
    """Score of the pointer measurement on a thermal state.

    A single pointer width must serve every spin block, so delta is set to
    sqrt(j_eq/4) with j_eq the equivalent total spin from <S^2>.  Because
    the outcome operator restricted to a spin-j sector of N qubits equals
    the one of 2j qubits, each block reuses the plain spin-j kernel at that
    shared width; the score then assembles block by block.
    """
    _, j_eq = mean_total_spin(spec)
    delta = math.sqrt(max(j_eq, 1e-12) / 4.0)
    state = thermal_state(spec)
    kernels = {}
    for j, block in state.blocks.items():
        if block.weight == 0.0:
            continue
        kernels[j] = povm_kernel(j, delta, quad)
    breakdown = exact_mean_score(state, kernels)
    return ThermalPointerResult(spec, delta, j_eq, breakdown)
