"""Unified-transform solver for the Airy equation on [0, 1] with a nonlocal condition."""

from .contour_quadrature import QuadratureSpec, SpectralEval
from .invp_solver import (
    SolutionField,
    SolverConfig,
    VariantReport,
    ZeroGateError,
    cross_check_variants,
    right_combination,
    solve_invp,
)
from .longtime import DecayReport, eval_longtime, measure_decay, solve_homogeneous
from .periodic_solver import (
    CoeffSet,
    CriterionError,
    PeriodicCriterionReport,
    check_criterion,
    eval_periodic,
    solve_A,
    solve_G,
    solve_coefficients,
    solve_gamma2,
)
from .spectral_core import (
    DataError,
    FunctionSpec,
    ProblemData,
    SingularDeltaError,
    delta,
    fourier_restricted,
    kappa_hat,
    n0,
    n1,
    n_combined,
    time_transform,
)
from .verification import (
    CircleRegion,
    ManufacturedCase,
    SectorRegion,
    StripRegion,
    ZeroCountReport,
    count_delta_zeros,
    global_relation_residual,
    make_manufactured_invp,
    make_manufactured_periodic,
    periodic_relation_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
