"""polybarrier: minimax polynomial approximation vs. l1-constrained ridge networks.

The library computes best uniform polynomial approximation errors (Remez
exchange with an LP oracle), Bernstein-ellipse sup norms of analytic
activations, constrained fits of single-hidden-layer ridge networks, and the
residual certificates that lower-bound network approximation error by
polynomial approximation error.
"""

from .chebyshev import ChebyshevSeries, cheb_interpolate, eval_clenshaw
from .remez import (
    EquioscillationSolution,
    RemezConvergenceError,
    decay_rate_fit,
    discrete_minimax,
    remez_best_approx,
)
from .ellipse import (
    BernsteinEllipse,
    ellipse_boundary,
    ellipse_norm,
    joukowski,
    max_rho_for_strip,
)
from .activations import ActivationSpec, catalog_names, get_activation
from .network import (
    ConstraintSet,
    FitConfig,
    NetworkParams,
    StepRule,
    barron_weighted_norm,
    eval_complex,
    eval_real,
    fit_l1_constrained,
    frequency_split,
    gevrey_derivative_bound,
    holo_sup_bound,
    l1_ball_projection,
    load_network,
    save_network,
    zero_network,
)
from .barrier import (
    AnalyticEllipseParams,
    BarrierReport,
    GevreyParams,
    Schedule,
    StripParams,
    analytic_residual,
    barron_remainder_check,
    best_poly_multid,
    default_gevrey_constants,
    gevrey_residual,
    regime_classification,
    strip_residual,
    verify_barrier,
    verify_barrier_multid,
    verify_network_poly_bound,
)

__version__ = "0.1.0"
