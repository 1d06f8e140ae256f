"""Gibbs point processes with (possibly non-hereditary) hardcore
interactions: simulation, equilibrium diagnostics, and two-step
pseudo-likelihood estimation."""

from .configuration import (
    BallRegion,
    PointConfiguration,
    RectRegion,
    UnionRegion,
    load_pattern,
    save_pattern,
    whole_window,
)
from .errors import NhGibbsError
from .estimate import (
    QuadratureSpec,
    contrast_kn,
    estimate_alpha,
    estimate_theta,
    pll,
    pll_gradient_hessian,
    two_step,
)
from .geometry import (
    Point,
    TorusWindow,
    Triangulation,
    circumcircle,
    delaunay_triangulate,
    k_nearest,
    torus_distance,
)
from .gnz import TestFunctional, gnz_lhs, gnz_report, gnz_rhs
from .models import (
    DelaunayModel,
    DelaunaySpec,
    HardSphereModel,
    HardSphereSpec,
    KnnModel,
    KnnSpec,
    ModelParams,
    PhiConstant,
    PhiStep,
    PhiTruncLin,
    PoissonModel,
    build_model,
)
from .sampler import (
    SamplerConfig,
    SampleSet,
    default_sampler_config,
    feasible_initial,
    load_archive,
    mcmc_step,
    run_chain,
    save_archive,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
