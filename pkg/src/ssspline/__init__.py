"""Shifted surface spline interpolation and shape-parameter selection."""
from .errors import DomainError, NumericalError, SplineError, ValidationError
from .estimator import ShapeParameterSelector, ShiftedSurfaceSpline
from .harness import (BandLimitedFunction, BoundReport, make_sinc_product,
                      run_bound_experiment)
from .interp import (CubeDomain, Interpolant, ScatteredData, build_interpolant,
                     eval_interpolant, fill_distance, poly_basis)
from .kernel import bessel_k, eval_h, eval_h_fourier
from .logscalar import LogScalar
from .select import (CaseId, Recommendation, SelectionProblem, compute_c0,
                     compute_c1, compute_omega_and_d0, error_bound, log_mn,
                     oracle_minimize_mn, select_c, select_c_dilation,
                     select_c_fixed, seminorm_bound)
from .theory import (KernelParams, TheoryContext, c0_norm_constant, gamma,
                     l_constant, rho_and_delta0, theory_context,
                     unit_ball_volume)

__version__ = "0.1.0"
