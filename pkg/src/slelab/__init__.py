"""Chordal SLE_kappa simulation and Green's-function laboratory."""

from .errors import (
    BoundaryPointError,
    CalibrationError,
    DomainError,
    InvalidArgumentError,
    InvalidConfigurationError,
    PreconditionError,
    SingularInputError,
    SLELabError,
)
from .sle_math import (
    GreenKind,
    GreenValue,
    Kappa,
    PointConfig,
    config_quantities,
    f_limit,
    f_radii,
    green_one_point,
    kappa_params,
    p_y,
    pde_residual_1pt,
)

__version__ = "0.1.0"
