"""Invariant (alpha, beta)-metrics ``F(y) = alpha(y) * phi(a(X, y) / alpha(y))``.

The fundamental tensor ``g_y(u, v) = 1/2 d^2/ds dt F^2(y + s u + t v)`` is
available both in closed form and as a finite-difference oracle.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from numpy.polynomial import polynomial as P

from .checks import CheckReport
from .errors import DegenerateDirection, DomainError, ValidationError
from .lie_core import LieAlgebra, ReductiveDecomposition, bracket
from .metric_core import InnerProduct, alpha_norm

PHI_GRID = 201


class ZeroVectorWarning(UserWarning):
    pass


class PhiFunction:
    """Profile ``phi`` on ``(-b0, b0)`` together with its first two derivatives.

    Use the constructors :meth:`riemannian`, :meth:`randers`,
    :meth:`polynomial` and :meth:`custom`. Evaluators must accept numpy arrays.
    """

    def __init__(self, kind, f, d1, d2, b0, coefficients=None):
        self.kind = kind
        self._f, self._d1, self._d2 = f, d1, d2
        self.b0 = float(b0)
        self.coefficients = None if coefficients is None else tuple(float(c) for c in coefficients)
        if not self.b0 > 0:
            raise ValidationError("b0 must be positive", "E_PHI_INVALID")
        if kind in ("polynomial", "custom"):
            self._validate()

    @classmethod
    def riemannian(cls):
        return cls(
            "riemannian",
            lambda s: np.ones_like(np.asarray(s, dtype=float)),
            lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            math.inf,
        )

    @classmethod
    def randers(cls):
        return cls(
            "randers",
            lambda s: 1.0 + np.asarray(s, dtype=float),
            lambda s: np.ones_like(np.asarray(s, dtype=float)),
            lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            1.0,
        )

    @classmethod
    def polynomial(cls, coefficients, b0):
        """``phi(s) = sum_k coefficients[k] * s**k``."""
        c = np.asarray(coefficients, dtype=float)
        if c.ndim != 1 or len(c) == 0:
            raise ValidationError("polynomial phi needs at least one coefficient", "E_PHI_INVALID")
        c1, c2 = P.polyder(c), P.polyder(c, 2)
        return cls(
            "polynomial",
            lambda s: P.polyval(np.asarray(s, dtype=float), c),
            lambda s: P.polyval(np.asarray(s, dtype=float), c1),
            lambda s: P.polyval(np.asarray(s, dtype=float), c2),
            b0,
            coefficients=c,
        )

    @classmethod
    def custom(cls, f, d1, d2, b0):
        return cls("custom", f, d1, d2, b0)

    def __call__(self, s):
        return self._f(s)

    def d1(self, s):
        return self._d1(s)

    def d2(self, s):
        return self._d2(s)

    def sample_points(self, n=PHI_GRID):
        # the open interval, or [-10, 10] when b0 is infinite
        half = min(self.b0, 10.0)
        s = np.linspace(-half, half, n + 2)
        return s[1:-1] if math.isfinite(self.b0) else s

    def _validate(self):
        s = self.sample_points()
        vals = self(s)
        if not np.all(vals > 0):
            raise ValidationError(
                f"phi is not positive on (-b0, b0); min {vals.min():.6g}", "E_PHI_INVALID"
            )
        # derivative consistency against central differences of phi itself
        inner = s[np.abs(s) < self.b0 - 1e-3] if math.isfinite(self.b0) else s
        h1, h2 = 1e-5, 1e-4
        fd1 = (self(inner + h1) - self(inner - h1)) / (2 * h1)
        fd2 = (self(inner + h2) - 2 * self(inner) + self(inner - h2)) / h2**2
        for label, exact, approx in (("phi'", self.d1(inner), fd1), ("phi''", self.d2(inner), fd2)):
            err = np.abs(exact - approx) / np.maximum(1.0, np.abs(exact))
            if err.max() > 1e-6:
                raise ValidationError(
                    f"{label} disagrees with finite differences of phi (rel. error {err.max():.3g})",
                    "E_PHI_INVALID",
                )

    def spec(self):
        """Text form used by the model file and the CLI."""
        if self.kind == "polynomial":
            return "polynomial " + ", ".join(repr(c) for c in self.coefficients)
        return self.kind

    def __eq__(self, other):
        if not isinstance(other, PhiFunction):
            return NotImplemented
        if self.kind == "custom" or other.kind == "custom":
            return self is other
        return (self.kind, self.coefficients, self.b0) == (other.kind, other.coefficients, other.b0)

    __hash__ = None

    def __repr__(self):
        return f"PhiFunction({self.spec()!r}, b0={self.b0})"


def check_phi_condition(phi: PhiFunction, b, grid=PHI_GRID):
    """Sample ``phi(s) - s phi'(s) + (b^2 - s^2) phi''(s)`` on ``|s| <= b``."""
    b = float(b)
    if not 0 <= b < phi.b0:
        raise ValidationError(f"need 0 <= b < b0 = {phi.b0}, got b = {b}", "E_B_RANGE")
    if grid < 1:
        raise ValueError("grid must be positive")
    s = np.linspace(-b, b, grid)
    vals = phi(s) - s * phi.d1(s) + (b * b - s * s) * phi.d2(s)
    i = int(np.argmin(vals))
    worst = float(vals[i])
    return CheckReport("phi_condition", worst > 0, worst, 0.0, (float(s[i]),))


class AlphaBetaMetric:
    """Invariant (alpha, beta)-metric at the origin of ``G/H``.

    ``x`` is the value at the origin of the invariant vector field that
    represents beta; it must lie in ``m`` and satisfy ``||x||_alpha < b0``.
    """

    def __init__(self, decomposition, a: InnerProduct, x, phi: PhiFunction, grid=PHI_GRID):
        if isinstance(decomposition, LieAlgebra):
            decomposition = ReductiveDecomposition.trivial(decomposition)
        if not decomposition.is_trivial and a.decomposition is not decomposition and a.decomposition != decomposition:
            raise DomainError("the inner product must live on m of the given decomposition")
        if a.ambient_dim != decomposition.algebra.dim:
            raise DomainError("inner product and algebra dimensions differ")
        self.decomposition = decomposition
        self.algebra = decomposition.algebra
        self.a = a
        self.x = np.array(a.check_domain(x), dtype=float)
        self.x.setflags(write=False)
        self.phi = phi
        self.b = float(alpha_norm(a, self.x))
        if not self.b < phi.b0:
            raise ValidationError(
                f"||X||_alpha = {self.b:.17g} must be < b0 = {phi.b0:.17g}", "E_X_NORM"
            )
        report = check_phi_condition(phi, self.b, grid)
        if not report.passed:
            raise ValidationError(
                f"phi condition fails on |s| <= {self.b:.6g} (min {report.residual:.6g} at s = {report.where[0]:.6g})",
                "E_PHI_CONDITION",
            )

    @property
    def dim(self):
        return self.algebra.dim

    def __repr__(self):
        return f"AlphaBetaMetric(dim={self.dim}, phi={self.phi.spec()!r}, |X|={self.b:.6g})"


def _scalar(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def _F(M: AlphaBetaMetric, y):
    alpha = np.sqrt(np.maximum(np.asarray(M.a.form(y, y)), 0.0))
    pos = alpha > 0
    s = np.divide(M.a.form(M.x, y), alpha, out=np.zeros_like(alpha), where=pos)
    if np.any(np.abs(s) >= M.phi.b0):
        raise DomainError("s = beta/alpha left (-b0, b0)", "E_PHI_DOMAIN")
    return np.where(pos, alpha * M.phi(s), 0.0)


def eval_F(M: AlphaBetaMetric, y):
    """Finsler function; ``F(0) = 0`` by convention with a :class:`ZeroVectorWarning`."""
    y = M.a.check_domain(y)
    value = _scalar(_F(M, y))
    if np.any(M.a.form(y, y) == 0):
        warnings.warn("F evaluated at the zero vector; returning 0", ZeroVectorWarning, stacklevel=2)
    return value


def _require_nonzero(M, y):
    if np.any(M.a.form(y, y) <= 0):
        raise DegenerateDirection("g_y is undefined at y = 0")


def _closed_form(M, y, u, v):
    form = M.a.form
    ayy = form(y, y)
    sq = np.sqrt(ayy)
    axy = form(M.x, y)
    r = axy / sq
    p, p1, p2 = M.phi(r), M.phi.d1(r), M.phi.d2(r)
    ayu, ayv = form(y, u), form(y, v)
    axu, axv = form(M.x, u), form(M.x, v)
    auv = form(u, v)
    dv = axv / sq - axy * ayv / ayy**1.5
    du = axu * sq - ayu * axy / sq
    return (
        auv * p**2
        + ayu * p * p1 * dv
        + (p1**2 + p * p2) * dv * du
        + p * p1 / sq * (axu * ayv - auv * axy)
    )


def fundamental_form(M: AlphaBetaMetric, y, u, v):
    """Closed-form ``g_y(u, v)``, with ``r = a(X, y) / sqrt(a(y, y))``.

    Symmetric and bilinear in ``(u, v)``, 0-homogeneous in ``y``.
    Broadcasts over leading axes.
    """
    y, u, v = (M.a.check_domain(w) for w in (y, u, v))
    _require_nonzero(M, y)
    return _scalar(_closed_form(M, y, u, v))


def _fd_stencil(M, y, u, v, h):
    def f2(w):
        return _F(M, w) ** 2

    return (f2(y + h * u + h * v) - f2(y + h * u - h * v) - f2(y - h * u + h * v) + f2(y - h * u - h * v)) / (
        8 * h * h
    )


def fundamental_form_fd(M: AlphaBetaMetric, y, u, v, h=1e-4):
    """Finite-difference oracle for :func:`fundamental_form`.

    Central mixed second difference of ``F^2``. When the stencil at ``h`` and
    ``h/2`` disagree by more than ``1e-7`` the Richardson extrapolation of the
    two is returned instead.
    """
    y, u, v = (np.asarray(M.a.check_domain(w), dtype=float) for w in (y, u, v))
    _require_nonzero(M, y)
    def alpha(w):
        return np.sqrt(M.a.form(w, w))

    if np.any(h * (alpha(u) + alpha(v)) >= alpha(y)):
        raise DomainError("finite-difference stencil reaches the zero vector; reduce h", "E_PHI_DOMAIN")
    coarse = _fd_stencil(M, y, u, v, h)
    fine = _fd_stencil(M, y, u, v, h / 2)
    return _scalar(
        np.where(np.abs(coarse - fine) > 1e-7 * (1 + np.abs(fine)), (4 * fine - coarse) / 3, coarse)
    )


def g_y_y_bracket(M: AlphaBetaMetric, y, z):
    """``g_y(y, w)`` for ``w = [y, z]_m`` via the reduced two-term identity

    ``a(y, w) (phi^2 - phi phi' r) + a(X, w) phi phi' sqrt(a(y, y))``.

    For a Lie group (trivial ``h``) ``w`` is just ``[y, z]``.
    """
    y = M.a.check_domain(y)
    _require_nonzero(M, y)
    w = M.decomposition.project_m(bracket(M.algebra, y, z))
    form = M.a.form
    sq = np.sqrt(form(y, y))
    r = form(M.x, y) / sq
    p, p1 = M.phi(r), M.phi.d1(r)
    return _scalar(form(y, w) * (p**2 - p * p1 * r) + form(M.x, w) * p * p1 * sq)


def gram_matrix(M: AlphaBetaMetric, y):
    """Matrix of ``g_y`` in the ``m`` basis."""
    basis = M.decomposition.m_basis
    return fundamental_form(M, y, basis[:, None, :], basis[None, :, :])


def is_positive_definite(matrix):
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def metric_checks(M: AlphaBetaMetric):
    """Reports for the metric-level invariants (norm bound, phi condition)."""
    return [
        CheckReport("x_norm", M.b < M.phi.b0, M.b, M.phi.b0),
        check_phi_condition(M.phi, M.b),
    ]
