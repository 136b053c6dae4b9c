"""Repeated weak measurements of a polarized spin ensemble.

Each round couples the state to a fresh 1D Gaussian pointer of width delta
along an axis w and reads the pointer.  The outcome operator for readout r
is K(r) = (2 pi delta^2)^(-1/4) exp(-(r - S_w)^2 / (4 delta^2)), so the
outcome density of a pure state is the Gaussian mixture

    p(r) = sum_m |<m_w|psi>|^2 N(r; m, delta^2)

and sampling draws the branch m from the amplitude weights before drawing
r ~ Normal(m, delta^2); the post-measurement state is K(r) psi renormalized.
x and y axis couplings conjugate by the eigenbases of Sx and Sy.

The 3D protocol repeats x, y, z rounds on a single collective state and
guesses the direction from the plain per-axis averages of the outcomes;
the z-only protocol has a closed-form mean score used as an end-to-end
oracle for the trajectory engine.

Every trajectory owns an RNG stream derived from (master seed, trajectory
index) and statistics are reduced in index order, so results do not depend
on chunking or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .backend import get_stepper
from .spinops import (
    HalfInt,
    PureSpinState,
    as_halfint,
    coherent_state,
    direction_angles,
    m_floats,
    sample_uniform_direction,
)
from .wigner import small_d_batch

__all__ = [
    "WeakStepConfig",
    "TrajectoryRecord",
    "ScoreEstimate",
    "TrajectoryCurve",
    "ScanRow",
    "weak_measure_step",
    "outcome_density",
    "weak1d_score_exact",
    "weak1d_simulated_score",
    "weak3d_run",
    "tmax_scan",
    "smooth_curve",
]

_AXES = ("x", "y", "z")


class WeakStepConfig:
    """One weak coupling: pointer width and measured axis."""

    __slots__ = ("delta", "direction")

    def __init__(self, delta: float, direction: str = "z"):
        if delta <= 0:
            raise ValueError("pointer width delta must be positive")
        if direction not in _AXES:
            raise ValueError(f"direction must be one of {_AXES}, got {direction!r}")
        self.delta = float(delta)
        self.direction = direction


class TrajectoryRecord:
    """Outcome log of one trajectory: truth, readouts, guess and score."""

    __slots__ = ("true_direction", "outcomes", "guess", "score")

    def __init__(self, true_direction, outcomes, guess, score):
        self.true_direction = true_direction
        self.outcomes = outcomes  # sequence of (axis, r)
        self.guess = guess
        self.score = score


class ScoreEstimate:
    """Monte Carlo mean score with its standard error."""

    __slots__ = ("mean", "stderr", "n_trajectories")

    def __init__(self, mean: float, stderr: float, n_trajectories: int):
        self.mean = float(mean)
        self.stderr = float(stderr)
        self.n_trajectories = int(n_trajectories)

    def __repr__(self):
        return f"ScoreEstimate({self.mean:.4f} +- {self.stderr:.4f}, n={self.n_trajectories})"


class TrajectoryCurve:
    """G(t) for t = 1..tau with per-point standard errors."""

    __slots__ = ("t", "mean", "stderr", "n_trajectories")

    def __init__(self, t, mean, stderr, n_trajectories):
        self.t = t
        self.mean = mean
        self.stderr = stderr
        self.n_trajectories = int(n_trajectories)

    def estimates(self) -> list[ScoreEstimate]:
        return [
            ScoreEstimate(m, s, self.n_trajectories)
            for m, s in zip(self.mean, self.stderr)
        ]


# eigenbasis cache: key 2j -> dict axis -> V with S_axis = V diag(m) V+
_BASIS_CACHE: dict[int, dict[str, np.ndarray]] = {}


def _axis_bases(j: HalfInt) -> dict[str, np.ndarray]:
    hit = _BASIS_CACHE.get(j.twice)
    if hit is not None:
        return hit
    d_half = small_d_batch(j, [math.pi / 2.0])[0].astype(complex)
    phase = np.exp(-1j * m_floats(j) * (math.pi / 2.0))
    bases = {
        "x": d_half,
        "y": phase[:, None] * d_half,
        "z": np.eye(j.dim, dtype=complex),
    }
    _BASIS_CACHE[j.twice] = bases
    return bases


def weak_measure_step(
    state: PureSpinState, cfg: WeakStepConfig, rng: np.random.Generator
) -> tuple[float, PureSpinState]:
    """Sample one weak measurement and return (readout, post state).

    Consumes one uniform draw (eigenvalue branch) and one standard normal
    (pointer readout) from ``rng``, in that order.
    """
    j = state.j
    v = _axis_bases(j)[cfg.direction]
    psi_w = v.conj().T @ state.amplitudes if cfg.direction != "z" else state.amplitudes.copy()
    prob = psi_w.real**2 + psi_w.imag**2
    cum = np.cumsum(prob)
    threshold = rng.random() * cum[-1]
    pick = int(np.argmax(cum > threshold))
    mvals = m_floats(j)
    r = float(mvals[pick] + cfg.delta * rng.standard_normal())
    psi_w = psi_w * np.exp(-((r - mvals) ** 2) / (4.0 * cfg.delta**2))
    psi_w = psi_w / math.sqrt(float(np.sum(psi_w.real**2 + psi_w.imag**2)))
    post = v @ psi_w if cfg.direction != "z" else psi_w
    nrm = math.sqrt(float(np.sum(post.real**2 + post.imag**2)))
    if nrm < 1e-300:
        raise RuntimeError("post-measurement state underflowed")
    return r, PureSpinState(j, post / nrm)


def outcome_density(state: PureSpinState, cfg: WeakStepConfig, r) -> np.ndarray:
    """Readout density p(r) = ||K(r) psi||^2 of one weak measurement."""
    v = _axis_bases(state.j)[cfg.direction]
    psi_w = v.conj().T @ state.amplitudes
    weights = psi_w.real**2 + psi_w.imag**2
    mvals = m_floats(state.j)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    gauss = np.exp(-((r[:, None] - mvals[None, :]) ** 2) / (2.0 * cfg.delta**2))
    gauss /= cfg.delta * math.sqrt(2.0 * math.pi)
    return gauss @ weights


def weak1d_score_exact(J, t: int, delta: float) -> float:
    """Closed-form mean score of t repeated weak z measurements.

    All z couplings commute, so the full readout sequence reduces to one
    Gaussian observation of m with effective width delta/sqrt(t) and the
    sign-of-the-sum guess gives

        G = 2 / ((J+1)(2J+1)) * sum_{m>0} m erf(m sqrt(t/2) / delta).

    Depends on (t, delta) only through sqrt(t)/delta; the strong limit is
    J/(2J+1) for integer J and (2J+1)/(4(J+1)) for half-integer J.
    """
    J = as_halfint(J)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    arg = math.sqrt(t / 2.0) / delta
    acc = 0.0
    for twice_m in range(J.twice, 0, -2):
        m = twice_m / 2.0
        acc += m * math.erf(m * arg)
    return 2.0 / ((float(J) + 1.0) * J.dim) * acc


def _traj_entropy(seed, index: int) -> tuple:
    if isinstance(seed, (tuple, list)):
        return (*[int(s) for s in seed], int(index))
    return (int(seed), int(index))


def _prepare_chunk(j: HalfInt, seed, indices, n_steps: int):
    """Per-trajectory direction draws and pre-drawn step randoms."""
    dim = j.dim
    n = len(indices)
    psi = np.empty((n, dim), dtype=complex)
    dirs = np.empty((n, 3))
    uniforms = np.empty((n, n_steps))
    normals = np.empty((n, n_steps))
    for row, idx in enumerate(indices):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_traj_entropy(seed, idx))))
        u = sample_uniform_direction(rng)
        theta, phi = direction_angles(u)
        psi[row] = coherent_state(j, theta, phi).amplitudes
        dirs[row] = u
        uniforms[row] = rng.random(n_steps)
        normals[row] = rng.standard_normal(n_steps)
    return psi, dirs, uniforms, normals


def _chain_matrices(j: HalfInt, axes: tuple[str, ...]):
    """first/into/exit transforms for a repeating axis cycle (row states)."""
    bases = _axis_bases(j)
    dim = j.dim
    eye = np.eye(dim, dtype=complex)

    def fwd(axis):
        return np.ascontiguousarray(bases[axis].conj())

    def back(axis):
        return np.ascontiguousarray(bases[axis].T)

    first = fwd(axes[0])
    into = np.empty((len(axes), dim, dim), dtype=complex)
    for a, axis in enumerate(axes):
        prev = axes[(a - 1) % len(axes)]
        into[a] = back(prev) @ fwd(axis)
    exit_mat = back(axes[-1])

    def is_eye(mat):
        return bool(np.all(np.abs(mat - eye) < 1e-15))

    first_identity = is_eye(first)
    into_identity = np.array([is_eye(into[a]) for a in range(len(axes))], dtype=np.uint8)
    exit_identity = is_eye(exit_mat)
    return first, first_identity, into, into_identity, exit_mat, exit_identity


def _run_outcomes(j, axes, delta, n_rounds, n_traj, seed, threads=1, backend=None, chunk_size=256):
    """Yield (dirs, outcomes) chunks in trajectory order."""
    j = as_halfint(j)
    stepper = get_stepper(backend)
    first, first_id, into, into_id, exit_mat, exit_id = _chain_matrices(j, axes)
    mvals = m_floats(j)
    n_steps = n_rounds * len(axes)

    def work(start):
        indices = range(start, min(start + chunk_size, n_traj))
        psi, dirs, uniforms, normals = _prepare_chunk(j, seed, indices, n_steps)
        outcomes = np.empty((len(dirs), n_steps))
        stepper.run_chain(
            psi, first, first_id, into, into_id, mvals, float(delta),
            uniforms, normals, outcomes, exit_mat, exit_id,
        )
        return dirs, outcomes

    starts = list(range(0, n_traj, chunk_size))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(work, starts)
    else:
        for start in starts:
            yield work(start)


def weak1d_simulated_score(
    J, t: int, delta: float, n_traj: int, seed, *, threads: int = 1, backend: str | None = None
) -> ScoreEstimate:
    """Monte Carlo score of t weak z measurements with the sign guess.

    Draws the true direction uniformly per trajectory, accumulates the t
    readouts and guesses +-z from the sign of their sum.  Agrees with
    weak1d_score_exact within statistical error.
    """
    J = as_halfint(J)
    if t < 1:
        raise ValueError("t must be at least 1")
    total = 0.0
    total_sq = 0.0
    for dirs, outcomes in _run_outcomes(J, ("z",), delta, t, n_traj, seed, threads, backend):
        scores = np.sign(outcomes.sum(axis=1)) * dirs[:, 2]
        total += float(scores.sum())
        total_sq += float((scores**2).sum())
    mean = total / n_traj
    var = max(0.0, (total_sq - n_traj * mean * mean) / max(1, n_traj - 1))
    return ScoreEstimate(mean, math.sqrt(var / n_traj), n_traj)


def weak3d_run(
    N: int,
    delta: float,
    tau: int,
    n_traj: int,
    seed,
    *,
    threads: int = 1,
    backend: str | None = None,
) -> TrajectoryCurve:
    """Simulate tau rounds of x, y, z weak measurements on N qubits.

    The collective state starts as the product state along a uniformly
    random direction u (represented in its symmetric spin-N/2 block) and
    is re-used, gradually disturbed, across all rounds.  After round t the
    direction guess is the normalized vector of the running x, y, z
    readout averages; a zero vector scores 0.  Returns the mean u . guess
    per round with standard errors.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if tau < 1:
        raise ValueError("tau must be at least 1")
    j = HalfInt.from_twice(N)
    sum_g = np.zeros(tau)
    sum_g2 = np.zeros(tau)
    inv_t = 1.0 / np.arange(1.0, tau + 1.0)
    for dirs, outcomes in _run_outcomes(j, _AXES, delta, tau, n_traj, seed, threads, backend):
        per_round = outcomes.reshape(len(dirs), tau, 3)
        running = np.cumsum(per_round, axis=1) * inv_t[None, :, None]
        norms = np.sqrt(np.sum(running**2, axis=2))
        dots = np.einsum("btk,bk->bt", running, dirs)
        scores = np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)
        sum_g += scores.sum(axis=0)
        sum_g2 += (scores**2).sum(axis=0)
    mean = sum_g / n_traj
    var = np.maximum(0.0, (sum_g2 - n_traj * mean**2) / max(1, n_traj - 1))
    return TrajectoryCurve(np.arange(1, tau + 1), mean, np.sqrt(var / n_traj), n_traj)


def smooth_curve(values: np.ndarray, window: int = 5) -> np.ndarray:
    """Centered moving average with edge truncation (odd window)."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    half = window // 2
    n = len(values)
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = values[lo:hi].mean()
    return out


class ScanRow:
    """One (delta) entry of a t_max scan."""

    __slots__ = ("N", "delta", "t_max", "g_max", "ratio", "truncated", "curve")

    def __init__(self, N, delta, t_max, g_max, ratio, truncated, curve):
        self.N = N
        self.delta = delta
        self.t_max = t_max
        self.g_max = g_max
        self.ratio = ratio
        self.truncated = truncated
        self.curve = curve


def tmax_scan(
    N: int,
    delta_list,
    tau: int,
    n_traj: int,
    seed,
    *,
    window: int = 5,
    threads: int = 1,
    backend: str | None = None,
) -> list[ScanRow]:
    """Locate the score-maximizing round count for each pointer width.

    Runs the 3D protocol per delta, smooths G(t) with a moving average and
    reads off t_max, G_max and the invariant ratio sqrt(t_max)/delta.  A
    row whose argmax hits tau is flagged truncated (tau too small).  Each
    delta gets an independent seed branch so adding widths never reshuffles
    existing rows.
    """
    rows = []
    for k, delta in enumerate(delta_list):
        curve = weak3d_run(
            N, float(delta), tau, n_traj, _traj_entropy(seed, k),
            threads=threads, backend=backend,
        )
        smoothed = smooth_curve(curve.mean, window)
        t_max = int(np.argmax(smoothed)) + 1
        g_max = float(smoothed[t_max - 1])
        rows.append(
            ScanRow(
                N, float(delta), t_max, g_max,
                math.sqrt(t_max) / float(delta), t_max >= tau, curve,
            )
        )
    return rows
