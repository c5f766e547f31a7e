"""Numerical checks of Hardy and Rellich identities and inequalities on
homogeneous groups, with sharp-constant sweeps and a reproducible CLI."""

from .calculus import DEFAULT_FD, RadialMethod, euler_apply, radial_derivative, radial_jet
from .group import (
    ConfigurationError,
    DilationGroup,
    QuasiNorm,
    anisotropic_norm,
    euclidean_norm,
    koranyi_norm,
    make_group,
)
from .identities import (
    DegenerateConstantError,
    DomainError,
    IdentityReport,
    complex_reduction_check,
    hardy_l2_report,
    hardy_lp_report,
    higher_order_report,
    ibp_report,
    log_hardy_report,
    rellich_report,
    uncertainty_report,
    weighted_l2_report,
)
from .quadrature import QuadratureSpec, SupportBox, integrate_lebesgue, polar_integrate, sphere_integrate
from .sharpness import optimize_constant, rayleigh_quotient, sharpness_sweep
from .testfuncs import CapabilityError, SeparableFunction, general, separable

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_FD", "RadialMethod", "euler_apply", "radial_derivative", "radial_jet",
    "ConfigurationError", "DilationGroup", "QuasiNorm", "anisotropic_norm", "euclidean_norm",
    "koranyi_norm", "make_group",
    "DegenerateConstantError", "DomainError", "IdentityReport", "complex_reduction_check",
    "hardy_l2_report", "hardy_lp_report", "higher_order_report", "ibp_report",
    "log_hardy_report", "rellich_report", "uncertainty_report", "weighted_l2_report",
    "QuadratureSpec", "SupportBox", "integrate_lebesgue", "polar_integrate", "sphere_integrate",
    "optimize_constant", "rayleigh_quotient", "sharpness_sweep",
    "CapabilityError", "SeparableFunction", "general", "separable",
    "__version__",
]
