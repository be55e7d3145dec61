"""Anisotropic fractional Sobolev seminorms, moment-body norms and their limits."""

from gaugefrac.bodies import (
    BodyNormHandle,
    ConvexBody,
    alpha_np,
    gauge_polar_integral,
    lp_moment_norm,
    lp_moment_norm_error,
)
from gaugefrac.functions import TestFunction, anisotropic_sobolev_seminorm, lp_norm
from gaugefrac.limits import (
    ConvergenceReport,
    verify_bbm_1d,
    verify_bbm_limit,
    verify_ms_1d,
    verify_ms_limit,
)
from gaugefrac.quadrature import QuadratureSpec
from gaugefrac.seminorm import SeminormEstimate, gagliardo_1d, seminorm, seminorm_direct, seminorm_via_bp

__version__ = "0.1.0"

__all__ = [
    "BodyNormHandle",
    "ConvergenceReport",
    "ConvexBody",
    "QuadratureSpec",
    "SeminormEstimate",
    "TestFunction",
    "alpha_np",
    "anisotropic_sobolev_seminorm",
    "gagliardo_1d",
    "gauge_polar_integral",
    "lp_moment_norm",
    "lp_moment_norm_error",
    "lp_norm",
    "seminorm",
    "seminorm_direct",
    "seminorm_via_bp",
    "verify_bbm_1d",
    "verify_bbm_limit",
    "verify_ms_1d",
    "verify_ms_limit",
]
