"""Numerical fractional calculus on the cone of positive definite
matrices and Radon transforms on Grassmann manifolds, with a seeded
Monte Carlo / quadrature verification suite."""

from .core import (
    ConstraintViolation,
    DegenerateBlock,
    DegenerateProjection,
    DimError,
    DimMismatch,
    DomainError,
    NotPositiveDefinite,
    PointOutsideQ,
    PoleError,
    RankDeficient,
    RankTooLarge,
    SpdMatrix,
    StepTooSmall,
    StiefelFrame,
    SymmetricMatrix,
    TestFunction,
    det,
    loewner_lt,
    sqrt_spd,
)
from .fracint import (
    IntegralSpec,
    WallachParameter,
    cayley_apply,
    ek_integral,
    ek_stiefel_form,
    gg_distribution,
    gg_halfint,
    gg_integral,
    laplace,
)
from .functions import named_test_function
from .radon import (
    GrassmannConfig,
    ZonalFunction,
    dual_radon,
    projection_profile,
    radon,
    rotation_to_frame,
    verify_dual_theorem,
    verify_radon_theorem,
)
from .sampling import (
    MonteCarloEstimate,
    RngState,
    bistiefel_decompose,
    polar_decompose,
    sample_matrix_interval,
    sample_stiefel,
)
from .special import siegel_beta, siegel_gamma, siegel_log_gamma, stiefel_volume

__version__ = "0.1.0"
