"""Invariant (alpha, beta)-Finsler metrics on Lie groups and reductive homogeneous spaces."""

from .alpha_beta import (
    AlphaBetaMetric,
    PhiFunction,
    check_phi_condition,
    eval_F,
    fundamental_form,
    fundamental_form_fd,
    g_y_y_bracket,
)
from .curvature import (
    Flag,
    check_biinvariance_lemma,
    flag_curvature_closed,
    flag_curvature_general,
    is_berwald_candidate,
    riemann_biinvariant,
)
from .errors import DegenerateDirection, DomainError, FinslerError, ModelError, ValidationError
from .geodesic import (
    check_conditional_equivalence,
    check_point_equivalence,
    find_geodesic_vectors,
    is_geodesic_finsler,
    is_geodesic_riemannian,
)
from .lie_core import LieAlgebra, ReductiveDecomposition, bracket, catalog, check_jacobi, project_h, project_m
from .metric_core import (
    InnerProduct,
    alpha_norm,
    beta_eval,
    beta_norm,
    check_ad_skew,
    check_h_invariance,
    ip_eval,
)
from .model import ModelFile, parse_model, serialize_model

__version__ = "0.1.0"
