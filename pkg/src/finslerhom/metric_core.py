"""Invariant inner products on ``g`` or on ``m``, the norm alpha and the form beta."""
from __future__ import annotations

import numpy as np

from .checks import CheckReport
from .errors import DimensionError, DomainError, ValidationError
from .lie_core import DEFAULT_TOL, LieAlgebra, ReductiveDecomposition, bracket


class InnerProduct:
    """Symmetric positive-definite bilinear form.

    With ``decomposition=None`` (or a decomposition with trivial ``h``) the
    matrix acts on ambient coordinates. Otherwise it is given in the
    coordinates of ``decomposition.m_basis`` and only vectors of ``m`` may be
    fed to it.

    Only the upper triangle of ``matrix`` is read.
    """

    def __init__(self, matrix, decomposition: ReductiveDecomposition | None = None):
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"inner product matrix must be square, got {a.shape}")
        a = np.triu(a) + np.triu(a, 1).T
        if decomposition is not None and decomposition.is_trivial:
            decomposition = None
        if decomposition is not None and a.shape[0] != len(decomposition.m_basis):
            raise DimensionError(
                f"m has dimension {len(decomposition.m_basis)} but the matrix is {a.shape[0]}x{a.shape[0]}"
            )
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise ValidationError("inner product matrix is not positive definite", "E_NOT_SPD") from None
        a.setflags(write=False)
        self.matrix = a
        self.decomposition = decomposition
        if decomposition is None:
            gram = a
        else:
            coords = decomposition._m_coords
            gram = coords.T @ a @ coords
        # ambient Gram matrix; it annihilates h, so form() never needs to project
        self.gram = gram
        self.gram.setflags(write=False)

    @classmethod
    def identity(cls, n, decomposition=None):
        return cls(np.eye(n), decomposition)

    @classmethod
    def diag(cls, values, decomposition=None):
        return cls(np.diag(np.asarray(values, dtype=float)), decomposition)

    @property
    def restricted(self):
        return self.decomposition is not None

    @property
    def ambient_dim(self):
        return self.gram.shape[0]

    def form(self, u, v):
        """Unchecked evaluation ``u^T G v``, broadcasting over leading axes."""
        return np.einsum("...i,ij,...j->...", u, self.gram, v)

    def check_domain(self, x, tol=DEFAULT_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.ambient_dim,):
            raise DimensionError(f"expected vectors of length {self.ambient_dim}, got shape {x.shape}")
        if self.decomposition is not None:
            off = np.linalg.norm(self.decomposition.project_h(x), axis=-1)
            scale = np.maximum(1.0, np.linalg.norm(x, axis=-1))
            if np.any(off > tol * scale):
                raise DomainError("vector has a component along h; the inner product lives on m")
        return x

    def __eq__(self, other):
        if not isinstance(other, InnerProduct):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix) and self.decomposition == other.decomposition

    __hash__ = None


def ip_eval(a: InnerProduct, u, v):
    u = a.check_domain(u)
    v = a.check_domain(v)
    return a.form(u, v)


def alpha_norm(a: InnerProduct, y):
    """Riemannian norm ``sqrt(a(y, y))``."""
    y = a.check_domain(y)
    return np.sqrt(np.maximum(a.form(y, y), 0.0))


def beta_eval(a: InnerProduct, x, y):
    """The 1-form represented by ``x``: ``beta(y) = a(x, y)``."""
    return ip_eval(a, x, y)


def beta_norm(a: InnerProduct, x):
    """``||beta||_alpha``, which equals the alpha-length of the representing vector."""
    return alpha_norm(a, x)


def check_ad_skew(alg: LieAlgebra, a: InnerProduct, tol=DEFAULT_TOL):
    """Bi-invariance test ``a([e_i, e_j], e_k) + a(e_j, [e_i, e_k]) = 0``."""
    if a.restricted:
        raise DomainError("ad-skewness is tested for inner products on the whole algebra")
    if a.ambient_dim != alg.dim:
        raise DimensionError("inner product and algebra dimensions differ")
    c, g = alg.structure, a.gram
    res = np.einsum("ijl,lk->ijk", c, g) + np.einsum("jl,ikl->ijk", g, c)
    res = np.abs(res)
    idx = np.unravel_index(np.argmax(res), res.shape)
    worst = float(res[idx])
    return CheckReport("ad_skew", worst <= tol, worst, tol, tuple(int(i) + 1 for i in idx))


def check_h_invariance(dec: ReductiveDecomposition, a: InnerProduct, tol=DEFAULT_TOL):
    """Infinitesimal Ad(H)-invariance: ``a([h, x]_m, y) + a(x, [h, y]_m) = 0``."""
    if dec.is_trivial:
        return CheckReport("h_invariance", True, 0.0, tol, detail="h is trivial")
    worst, where = 0.0, None
    for p, hv in enumerate(dec.h_basis):
        moved = dec.project_m(bracket(dec.algebra, hv, dec.m_basis))
        res = np.abs(a.form(moved[:, None, :], dec.m_basis[None, :, :]) + a.form(dec.m_basis[:, None, :], moved[None, :, :]))
        idx = np.unravel_index(np.argmax(res), res.shape)
        if res[idx] > worst or where is None:
            worst, where = float(res[idx]), (p + 1, int(idx[0]) + 1, int(idx[1]) + 1)
    return CheckReport("h_invariance", worst <= tol, worst, tol, where)


def check_vector_h_invariance(dec: ReductiveDecomposition, x, tol=DEFAULT_TOL):
    """``[h, x]_m = 0`` for all of ``h``: ``x`` extends to an invariant vector field."""
    if dec.is_trivial:
        return CheckReport("x_h_invariance", True, 0.0, tol, detail="h is trivial")
    moved = dec.project_m(bracket(dec.algebra, dec.h_basis, np.asarray(x, dtype=float)))
    worst = float(np.linalg.norm(moved, axis=-1).max())
    return CheckReport("x_h_invariance", worst <= tol, worst, tol)
