"""Geodesic vectors of homogeneous Riemannian and (alpha, beta) spaces.

A nonzero ``X`` in ``g`` is geodesic for the Riemannian metric ``a`` iff
``a([X, Y]_m, X_m) = 0`` for every ``Y`` in ``m``, and for a Finsler metric iff
``g_{X_m}(X_m, [X, Z]_m) = 0`` for every ``Z`` in ``g`` (equivalently in ``m``).
Residuals reported here are the maxima of those quantities over a basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from .alpha_beta import AlphaBetaMetric, _closed_form
from .errors import DegenerateDirection
from .lie_core import LieAlgebra, ReductiveDecomposition, bracket
from .metric_core import InnerProduct

DEFAULT_TOL = 1e-12
QUANTIFIERS = ("m", "g")


@dataclass(frozen=True)
class GeodesicReport:
    vector: np.ndarray
    tolerance: float
    riemannian_residual: float | None = None
    finsler_residual: float | None = None
    degenerate: bool = False
    quantifier: str = "m"

    @property
    def is_geodesic_riemannian(self):
        if self.riemannian_residual is None:
            return None
        return self.riemannian_residual <= self.tolerance

    @property
    def is_geodesic_finsler(self):
        if self.finsler_residual is None:
            return None
        return self.finsler_residual <= self.tolerance

    @property
    def finsler_verdict(self):
        """``"geodesic"``, ``"not geodesic"``, ``"degenerate"`` or ``None``."""
        if self.degenerate:
            return "degenerate"
        if self.finsler_residual is None:
            return None
        return "geodesic" if self.is_geodesic_finsler else "not geodesic"


def _as_decomposition(dec):
    if isinstance(dec, LieAlgebra):
        return ReductiveDecomposition.trivial(dec)
    return dec


def _riemannian_residuals(dec, a, xs):
    """``a([X, Y_j]_m, X_m)`` for each ``m`` basis vector ``Y_j``; shape ``(..., k)``."""
    w = dec.project_m(bracket(dec.algebra, xs[..., None, :], dec.m_basis))
    return a.form(w, dec.project_m(xs)[..., None, :])


def _test_basis(dec, quantifier):
    if quantifier not in QUANTIFIERS:
        raise ValueError(f"quantifier must be one of {QUANTIFIERS}, got {quantifier!r}")
    return dec.m_basis if quantifier == "m" else dec.algebra.basis()


def _finsler_residuals(M, xs, quantifier="m"):
    """``g_{X_m}(X_m, [X, Z_j]_m)``; NaN where ``X_m`` vanishes."""
    dec = M.decomposition
    ym = dec.project_m(xs)[..., None, :]
    w = dec.project_m(bracket(dec.algebra, xs[..., None, :], _test_basis(dec, quantifier)))
    with np.errstate(invalid="ignore", divide="ignore"):
        return _closed_form(M, ym, ym, w)


def _is_degenerate(dec, x, tol=DEFAULT_TOL):
    return np.linalg.norm(dec.project_m(x), axis=-1) <= tol * np.maximum(1.0, np.linalg.norm(x, axis=-1))


def is_geodesic_riemannian(dec, a: InnerProduct, x, tol=DEFAULT_TOL):
    dec = _as_decomposition(dec)
    x = dec.algebra.check_vector(x).astype(float)
    if not np.any(x):
        raise DegenerateDirection("geodesic vectors are nonzero")
    residual = float(np.max(np.abs(_riemannian_residuals(dec, a, x))))
    return GeodesicReport(x, tol, riemannian_residual=residual)


def is_geodesic_finsler(M: AlphaBetaMetric, x, tol=DEFAULT_TOL, quantifier="m"):
    """Finsler criterion, with ``Z`` running over a basis of ``m`` or of ``g``.

    A vector with ``X_m = 0`` is reported as degenerate (no verdict).
    """
    dec = M.decomposition
    x = dec.algebra.check_vector(x).astype(float)
    _test_basis(dec, quantifier)
    if not np.any(x):
        raise DegenerateDirection("geodesic vectors are nonzero")
    if _is_degenerate(dec, x):
        return GeodesicReport(x, tol, degenerate=True, quantifier=quantifier)
    residual = float(np.max(np.abs(_finsler_residuals(M, x, quantifier))))
    return GeodesicReport(x, tol, finsler_residual=residual, quantifier=quantifier)


def geodesic_report(M: AlphaBetaMetric, x, tol=DEFAULT_TOL, quantifier="m"):
    """Both predicates for ``x`` in a single report."""
    fin = is_geodesic_finsler(M, x, tol, quantifier)
    riem = is_geodesic_riemannian(M.decomposition, M.a, x, tol)
    return GeodesicReport(
        fin.vector,
        tol,
        riemannian_residual=riem.riemannian_residual,
        finsler_residual=fin.finsler_residual,
        degenerate=fin.degenerate,
        quantifier=quantifier,
    )


@dataclass(frozen=True)
class PointEquivalenceReport:
    identity_residual: float
    riemannian: GeodesicReport
    finsler: GeodesicReport

    @property
    def verdicts_agree(self):
        return self.riemannian.is_geodesic_riemannian == self.finsler.is_geodesic_finsler


def check_point_equivalence(M: AlphaBetaMetric, tol=DEFAULT_TOL):
    """Geodesic test of the metric's own vector ``X``.

    Checks ``g_X(X, [X, Z]_m) = a(X, [X, Z]_m) phi(||X||_alpha)^2`` on the
    ``m`` basis and evaluates both geodesic predicates at ``X``.
    """
    dec = M.decomposition
    x = np.asarray(M.x)
    if not np.any(x):
        raise DegenerateDirection("the metric's vector X is zero")
    w = dec.project_m(bracket(dec.algebra, x, dec.m_basis))
    lhs = _closed_form(M, x, x, w)
    rhs = M.a.form(x, w) * M.phi(math.sqrt(M.a.form(x, x))) ** 2
    residual = float(np.max(np.abs(lhs - rhs)))
    return PointEquivalenceReport(
        residual, is_geodesic_riemannian(dec, M.a, x, tol), is_geodesic_finsler(M, x, tol)
    )


@dataclass(frozen=True)
class ConditionalReport:
    vector: np.ndarray
    r_m: float
    phi2_nonpositive: bool
    bracket_orthogonal: bool
    positivity_factor: float
    expansion_residual: float
    identity_residual: float | None
    riemannian: GeodesicReport
    finsler: GeodesicReport

    @property
    def hypotheses_hold(self):
        return self.phi2_nonpositive and self.bracket_orthogonal

    @property
    def verdicts_agree(self):
        return self.riemannian.is_geodesic_riemannian == self.finsler.is_geodesic_finsler


def check_conditional_equivalence(M: AlphaBetaMetric, y, tol=DEFAULT_TOL):
    """Check the sufficient conditions under which ``y`` is geodesic for ``F`` iff for ``a``.

    Hypotheses: ``phi''(r_m) <= 0`` and ``a(X, [Y, Z]_m) = 0`` for all ``Z``
    in ``m``. Under them ``g_{Y_m}(Y_m, [Y, Z]_m)`` reduces to
    ``a(Y_m, [Y, Z]_m) (phi^2 - phi phi' r_m)`` and the factor is positive.
    The unreduced three-term identity is always checked.
    """
    dec = M.decomposition
    y = dec.algebra.check_vector(y).astype(float)
    if _is_degenerate(dec, y):
        raise DegenerateDirection("Y_m = 0")
    ym = dec.project_m(y)
    form = M.a.form
    norm_m = math.sqrt(form(ym, ym))
    r = form(M.x, ym) / norm_m
    p, p1, p2 = (float(f(r)) for f in (M.phi, M.phi.d1, M.phi.d2))
    factor = p * p - p * p1 * r

    w = dec.project_m(bracket(dec.algebra, y, dec.m_basis))
    lhs = _closed_form(M, ym, ym, w)
    x_terms = form(M.x, w)
    expansion = form(ym, w) * factor + x_terms * p * p1 * norm_m
    expansion_residual = float(np.max(np.abs(lhs - expansion)))
    orthogonal = bool(np.max(np.abs(x_terms)) <= tol)
    concave = p2 <= 0
    identity_residual = None
    if concave and orthogonal:
        identity_residual = float(np.max(np.abs(lhs - form(ym, w) * factor)))
    return ConditionalReport(
        y,
        r,
        concave,
        orthogonal,
        factor,
        expansion_residual,
        identity_residual,
        is_geodesic_riemannian(dec, M.a, y, tol),
        is_geodesic_finsler(M, y, tol),
    )


# ---------------------------------------------------------------- solver


def sphere_grid(dim, resolution, seed=0):
    """Quasi-uniform points on the unit sphere of ``R^dim``.

    Fibonacci lattice for ``dim == 3``, equispaced angles for ``dim == 2`` and
    scrambled Sobol points pushed through the Gaussian quantile otherwise.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        i = np.arange(resolution) + 0.5
        z = 1 - 2 * i / resolution
        phi = np.pi * (3 - math.sqrt(5)) * i
        rho = np.sqrt(1 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    sampler = qmc.Sobol(dim, scramble=True, seed=seed)
    u = sampler.random_base2(math.ceil(math.log2(resolution)))
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _normalize(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _jacobian(fn, xs, h=1e-7):
    n = xs.shape[-1]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        cols.append((fn(xs + e) - fn(xs - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def _tangent_jacobian(fn, xs):
    proj = np.eye(xs.shape[-1]) - xs[..., :, None] * xs[..., None, :]
    return _jacobian(fn, xs) @ proj


def _cost(r):
    return np.max(np.abs(r), axis=-1)


def _refine(fn, xs, tol, iters=60):
    """Damped Gauss-Newton on the sphere; each step is the minimum-norm tangent step."""
    xs = xs.copy()
    r = fn(xs)
    cost = _cost(r)
    active = np.flatnonzero(np.isfinite(cost) & (cost > tol * 1e-3))
    for _ in range(iters):
        if active.size == 0:
            break
        xa, ra = xs[active], r[active]
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(_tangent_jacobian(fn, xa), rcond=1e-10), ra)
        scale = np.ones(len(active))
        best_x, best_r, best_c = xa, ra, cost[active]
        improved = np.zeros(len(active), dtype=bool)
        for _ls in range(10):
            todo = ~improved
            if not todo.any():
                break
            trial = _normalize(xa[todo] + scale[todo, None] * step[todo])
            tr = fn(trial)
            tc = _cost(tr)
            ok = np.isfinite(tc) & (tc < best_c[todo])
            idx = np.flatnonzero(todo)[ok]
            best_x = best_x.copy()
            best_x[idx], best_r[idx], best_c[idx] = trial[ok], tr[ok], tc[ok]
            improved[idx] = True
            scale[np.flatnonzero(todo)[~ok]] *= 0.5
        xs[active], r[active], cost[active] = best_x, best_r, best_c
        active = active[improved & (best_c > tol * 1e-3)]
    return xs, cost


def _canonical(x, symmetric=True):
    x = np.atleast_2d(x)
    if not symmetric:
        return x
    lead = np.argmax(np.abs(x) > 1e-9, axis=1)
    signs = np.sign(x[np.arange(len(x)), lead])
    signs[signs == 0] = 1.0
    return x * signs[:, None]


def _leader_clusters(points, order, radius, symmetric=True):
    """Greedy clustering (up to sign when ``symmetric``): each unassigned point in ``order`` absorbs its neighbours."""
    chord = 2 * math.sin(radius / 2)
    tree = cKDTree(np.vstack([points, -points]) if symmetric else points)
    n = len(points)
    assigned = np.zeros(n, dtype=bool)
    leaders = []
    for i in order:
        if assigned[i]:
            continue
        leaders.append(i)
        near = np.asarray(tree.query_ball_point(points[i], chord), dtype=int) % n
        assigned[near] = True
        assigned[i] = True
    return leaders


def _local_dimension(fn, x, rel=1e-6):
    jt = _tangent_jacobian(fn, x[None])[0]
    s = np.linalg.svd(jt, compute_uv=False)
    rank = int(np.sum(s > rel * max(1.0, s.max(initial=0.0))))
    return max(len(x) - 1 - rank, 0)


def _null_tangent(fn, x):
    proj = np.eye(len(x)) - np.outer(x, x)
    basis = np.linalg.svd(proj)[0][:, : len(x) - 1]
    jt = _jacobian(fn, x[None])[0] @ basis
    vt = np.linalg.svd(jt)[2]
    return basis @ vt[-1]


def _angle(x, y):
    return 2 * math.asin(min(1.0, np.linalg.norm(x - y) / 2))


def _trace_curve(fn, x0, step, tol, max_steps, symmetric=True):
    """Follow a one-dimensional solution curve from ``x0`` until it returns to ``x0``.

    For a sign-symmetric solution set reaching ``-x0`` also closes the curve.
    """
    targets = [x0, -x0] if symmetric else [x0]
    points = [x0]
    t0 = _null_tangent(fn, x0)
    for direction in (1.0, -1.0):
        x, t = x0, direction * t0
        closed = False
        for i in range(max_steps):
            pred = _normalize(x + step * t)
            corr, cost = _refine(fn, pred[None], tol, iters=8)
            corr = corr[0]
            if not cost[0] <= tol or _angle(corr, x) > 3 * step:
                break
            tn = _null_tangent(fn, corr)
            if tn @ t < 0:
                tn = -tn
            points.append(corr)
            x, t = corr, tn
            if i > 2 and min(_angle(corr, p) for p in targets) < 0.75 * step:
                closed = True
                break
        if closed:
            break
    return np.array(points)


@dataclass
class GeodesicSearch:
    """Result of :func:`find_geodesic_vectors`.

    ``points`` holds unit representatives of isolated (or higher-dimensional,
    unresolved) solution clusters with their local solution dimension;
    ``curves`` holds dense samples of one-dimensional solution curves. In
    riemannian mode directions are reported once up to sign; finsler
    solution sets are only invariant under positive scaling.
    """

    mode: str
    tolerance: float
    grid_size: int
    all_vectors: bool = False
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    dimensions: tuple = ()
    curves: list = field(default_factory=list)
    symmetric: bool = True

    def representatives(self):
        parts = [self.points] + list(self.curves)
        parts = [p for p in parts if p.size]
        if not parts:
            return np.zeros((0, self.points.shape[-1] if self.points.ndim == 2 else 0))
        return _canonical(np.vstack(parts), self.symmetric)

    def angular_distance(self, direction):
        """Smallest angle between ``direction`` (or ``-direction`` when symmetric) and any representative."""
        if self.all_vectors:
            return 0.0
        reps = self.representatives()
        if len(reps) == 0:
            return math.inf
        d = _normalize(np.asarray(direction, dtype=float))
        cos = reps @ d
        if self.symmetric:
            cos = np.abs(cos)
        return float(np.arccos(np.clip(cos.max(), -1.0, 1.0)))


def find_geodesic_vectors(
    dec,
    metric,
    mode="riemannian",
    resolution=10_000,
    tol=1e-10,
    seed=0,
    cluster_radius=1e-3,
    trace_step=9e-4,
    max_trace_steps=20_000,
):
    """Search the unit sphere of ``g`` for geodesic vectors.

    ``metric`` is an :class:`InnerProduct` (riemannian mode) or an
    :class:`AlphaBetaMetric` (either mode). Every grid point is refined by
    damped Gauss-Newton; refined points with residual ``<= tol`` are
    clustered, one-dimensional clusters are traced into curves. When more
    than 99% of the raw grid already satisfies the criterion the result only
    carries ``all_vectors=True``.
    """
    if mode not in ("riemannian", "finsler"):
        raise ValueError("mode must be 'riemannian' or 'finsler'")
    if mode == "finsler" and not isinstance(metric, AlphaBetaMetric):
        raise TypeError("finsler mode needs an AlphaBetaMetric")
    if isinstance(metric, AlphaBetaMetric):
        dec = metric.decomposition
    dec = _as_decomposition(dec)
    if mode == "riemannian":
        a = metric.a if isinstance(metric, AlphaBetaMetric) else metric

        def fn(xs):
            return _riemannian_residuals(dec, a, xs)

    else:

        def fn(xs):
            return _finsler_residuals(metric, xs)

    n = dec.algebra.dim
    grid = sphere_grid(n, resolution, seed)
    raw = _cost(fn(grid))
    # riemannian residuals are even in X; finsler ones are not for a non-reversible F
    symmetric = mode == "riemannian"
    result = GeodesicSearch(mode, tol, len(grid), points=np.zeros((0, n)), symmetric=symmetric)
    if np.mean(raw <= tol) > 0.99:
        result.all_vectors = True
        return result

    refined, cost = _refine(fn, grid, tol)
    good = np.isfinite(cost) & (cost <= tol)
    if mode == "finsler":
        good &= np.linalg.norm(dec.project_m(refined), axis=-1) > 1e-6
    sols, sol_cost = _canonical(refined[good], symmetric), cost[good]
    if len(sols) == 0:
        return result
    order = np.lexsort((np.arange(len(sols)), sol_cost))
    leaders = _leader_clusters(sols, order, cluster_radius, symmetric)
    reps = sols[leaders]
    dims = [_local_dimension(fn, x) for x in reps]

    curves, keep = [], []
    for x, d in zip(reps, dims):
        if d == 1:
            signs = (1.0, -1.0) if symmetric else (1.0,)
            if any(np.min(np.linalg.norm(c - sg * x, axis=1)) < 3 * trace_step for c in curves for sg in signs):
                continue
            curve = _trace_curve(fn, x, trace_step, tol, max_trace_steps, symmetric)
            curves.append(_canonical(curve, symmetric))
        else:
            keep.append((x, d))
    result.points = np.array([x for x, _ in keep]).reshape(-1, n)
    result.dimensions = tuple(d for _, d in keep)
    result.curves = curves
    return result
