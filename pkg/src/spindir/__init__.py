"""Direction estimation for collective spin ensembles.

Exact covariant-measurement scores over total-spin blocks, the 3D
Gaussian-pointer measurement with its direction kernel, thermal input
states, and Monte Carlo simulation of repeated weak measurements.
"""

__version__ = "0.1.0"

from .backend import HAVE_COMPILED, backend_name, get_stepper
from .pointer import (
    KrausRadialProfile,
    PointerConfig,
    QuadratureError,
    ScoreCurve,
    ThermalPointerResult,
    TopMomentBounds,
    epsilon_lower_bound,
    kraus_diagonal,
    povm_kernel,
    radial_profile,
    score_vs_delta,
    thermal_pointer_score,
    top_moment_bounds,
)
from .score import (
    PovmKernelDiagonal,
    ScoreBreakdown,
    epsilon_factor,
    exact_mean_score,
    optimal_kernel,
    score_gap,
    score_to_fidelity,
    sphere_quadrature_score,
)
from .spinops import (
    HalfInt,
    PureSpinState,
    SpinRep,
    as_halfint,
    coherent_state,
    degeneracy,
    direction_angles,
    m_floats,
    m_values,
    sample_uniform_direction,
    spin_matrices,
)
from .thermal import (
    Block,
    BlockDiagonalState,
    ThermalSpec,
    mean_total_spin,
    polarization_moment,
    pure_polarized,
    thermal_state,
)
from .weak import (
    ScanRow,
    ScoreEstimate,
    TrajectoryCurve,
    TrajectoryRecord,
    WeakStepConfig,
    outcome_density,
    smooth_curve,
    tmax_scan,
    weak1d_score_exact,
    weak1d_simulated_score,
    weak3d_run,
    weak_measure_step,
)
from .wigner import WignerD, rotation_matrix, small_d_batch, small_d_tower, wigner_small_d

__all__ = [name for name in dir() if not name.startswith("_")]
