"""greypath: subordinated-path processes and measure-change verification.

Builds generalized grey Brownian motion from its subordinated kernel
representation and verifies, by quadrature and Monte Carlo, the shift
quasi-invariance identities, the likelihood-ratio normalization, and the
derivative / adjoint duality for cylinder functionals.
"""

__version__ = "0.1.0"

from .cameron_martin import lift_for_draw, rn_density, shift_values, verify_cm_identity
from .errors import DomainError, NumericError, UnsupportedRangeError
from .fbm import (CameronMartinElement, CoupledPath, HurstParam, TimeGrid,
                  apply_kernel, build_kernel_matrix, exponential_martingale,
                  fbm_covariance, fbm_kernel, kernel_covariance_quad,
                  kernel_matrix_csv, sample_coupled, sample_fbm_cholesky,
                  wiener_integral)
from .ggbm import (GgbmDraw, GgbmParams, ggbm_char, ggbm_covariance,
                   ggbm_increment_char, ggbm_moment, sample_ggbm,
                   sample_ggbm_product)
from .malliavin import (CylinderFunction, GradientElement, cylinder,
                        directional_derivative, gradient, ibp_adjoint,
                        lp_moment_bound, verify_ibp)
from .mc import MonteCarloReport, RunningStats, splitmix64, stream_for
from .shifts import HdotSpec, parse_hdot
from .specfun import (BetaParam, gamma_fn, m_wright_moment, m_wright_pdf,
                      mittag_leffler)
from .subordinator import sample_mwright, sample_positive_stable

__all__ = [
    "__version__",
    "BetaParam", "HurstParam", "GgbmParams", "TimeGrid",
    "CameronMartinElement", "CoupledPath", "GgbmDraw", "CylinderFunction",
    "GradientElement", "HdotSpec", "MonteCarloReport", "RunningStats",
    "DomainError", "UnsupportedRangeError", "NumericError",
    "gamma_fn", "mittag_leffler", "m_wright_moment", "m_wright_pdf",
    "fbm_covariance", "fbm_kernel", "kernel_covariance_quad",
    "build_kernel_matrix", "kernel_matrix_csv", "apply_kernel",
    "sample_fbm_cholesky", "sample_coupled", "wiener_integral",
    "exponential_martingale",
    "sample_positive_stable", "sample_mwright",
    "sample_ggbm", "sample_ggbm_product", "ggbm_covariance", "ggbm_moment",
    "ggbm_increment_char", "ggbm_char",
    "lift_for_draw", "shift_values", "rn_density", "verify_cm_identity",
    "cylinder", "directional_derivative", "gradient", "ibp_adjoint",
    "verify_ibp", "lp_moment_bound",
    "parse_hdot", "splitmix64", "stream_for",
]
