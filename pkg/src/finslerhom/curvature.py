"""Flag curvature of bi-invariant (alpha, beta)-metrics of Berwald type on Lie groups."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .alpha_beta import AlphaBetaMetric, _closed_form, g_y_y_bracket
from .errors import DegenerateDirection, DomainError, ValidationError
from .lie_core import DEFAULT_TOL, LieAlgebra, bracket
from .metric_core import InnerProduct, check_ad_skew


class NotBerwaldWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Flag:
    """Flag with flagpole ``y`` and transverse edge ``u`` spanning the plane ``P``."""

    y: np.ndarray
    u: np.ndarray
    orthonormal: bool

    @classmethod
    def make(cls, a: InnerProduct, y, u, tol=DEFAULT_TOL):
        y = np.asarray(a.check_domain(y), dtype=float)
        u = np.asarray(a.check_domain(u), dtype=float)
        yy, uu, yu = a.form(y, y), a.form(u, u), a.form(y, u)
        if yy <= 0 or uu <= 0:
            raise DegenerateDirection("flag vectors must be nonzero")
        if yy * uu - yu * yu <= tol * yy * uu:
            raise DegenerateDirection("u is parallel to y")
        ortho = abs(yy - 1) <= tol and abs(uu - 1) <= tol and abs(yu) <= tol
        return cls(y, u, bool(ortho))

    @classmethod
    def orthonormalized(cls, a: InnerProduct, y, u):
        """Gram-Schmidt ``(y, u)`` with respect to ``a``."""
        y = np.asarray(y, dtype=float)
        y = y / math.sqrt(a.form(y, y))
        u = np.asarray(u, dtype=float) - a.form(y, u) * y
        uu = a.form(u, u)
        if not uu > DEFAULT_TOL:
            raise DegenerateDirection("u is parallel to y")
        u = u / math.sqrt(uu)
        return cls.make(a, y, u)


def riemann_biinvariant(alg: LieAlgebra, u, y):
    """``R(u, y) y = 1/4 [y, [u, y]]`` for a bi-invariant metric."""
    return 0.25 * bracket(alg, y, bracket(alg, u, y))


def flag_curvature_general(M: AlphaBetaMetric, flag: Flag, r_value, tol=DEFAULT_TOL):
    """``g_y(R, u) / (g_y(y, y) g_y(u, u) - g_y(y, u)^2)`` with ``R = R(u, y) y`` supplied."""
    y, u = flag.y, flag.u
    r_value = M.a.check_domain(r_value)
    gyy = _closed_form(M, y, y, y)
    guu = _closed_form(M, y, u, u)
    gyu = _closed_form(M, y, y, u)
    denom = gyy * guu - gyu * gyu
    if denom <= tol * gyy * guu:
        raise DegenerateDirection("flag is degenerate (denominator vanishes)")
    return float(_closed_form(M, y, r_value, u) / denom)


def is_berwald_candidate(alg: LieAlgebra, x, tol=DEFAULT_TOL):
    """Sufficient Berwald test: ``x`` is central in ``alg``."""
    x = alg.check_vector(x)
    return bool(np.max(np.linalg.norm(bracket(alg, alg.basis(), x), axis=-1)) <= tol)


def _require_group(M):
    if not M.decomposition.is_trivial:
        raise DomainError("flag curvature formulas here are for Lie groups (trivial h)")


def flag_curvature_closed(M: AlphaBetaMetric, flag: Flag, tol=DEFAULT_TOL):
    """Explicit flag curvature for an ``a``-orthonormal flag.

    Requires ``a`` bi-invariant; warns if ``X`` is not central, since the
    formula assumes F is of Berwald type.
    """
    _require_group(M)
    if not flag.orthonormal:
        raise ValidationError("the closed formula needs an a-orthonormal flag", "E_FLAG_FRAME")
    report = check_ad_skew(M.algebra, M.a, tol)
    if not report.passed:
        raise ValidationError(
            f"inner product is not bi-invariant (residual {report.residual:.3g})", "E_NOT_BIINVARIANT"
        )
    if not is_berwald_candidate(M.algebra, M.x, tol):
        warnings.warn("X is not central; Berwald type is not certified", NotBerwaldWarning, stacklevel=2)
    alg, form, x = M.algebra, M.a.form, M.x
    y, u = flag.y, flag.u
    r = form(x, y)
    p, p1, p2 = (float(f(r)) for f in (M.phi, M.phi.d1, M.phi.d2))
    xu = form(x, u)
    yu_br = bracket(alg, y, u)
    theta = p * p * (p * p + p * p2 * xu * xu - p * p1 * r)
    if not theta > 0:
        raise ValidationError(f"theta = {theta:.6g} is not positive", "E_THETA")
    numerator = (p * p - p * p1 * r) * form(yu_br, yu_br) + (p1 * p1 + p * p2) * xu * form(
        bracket(alg, x, y), bracket(alg, u, y)
    )
    return float(numerator / (4 * theta))


def check_biinvariance_lemma(M: AlphaBetaMetric, samples=500, seed=0):
    """Max ``|g_y(y, [y, z])|`` over random ``(y, z)`` for a bi-invariant ``F``.

    Bi-invariance of ``F`` is certified by an ad-skew ``a`` and central ``X``.
    """
    _require_group(M)
    if not check_ad_skew(M.algebra, M.a).passed:
        raise ValidationError("inner product is not bi-invariant", "E_NOT_BIINVARIANT")
    if not is_berwald_candidate(M.algebra, M.x):
        raise ValidationError("X is not central, F is not certified bi-invariant", "E_NOT_CENTRAL")
    rng = np.random.default_rng(seed)
    ys = rng.standard_normal((samples, M.dim))
    zs = rng.standard_normal((samples, M.dim))
    return float(np.max(np.abs(g_y_y_bracket(M, ys, zs))))
