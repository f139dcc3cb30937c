"""Finite-dimensional real Lie algebras given by structure constants.

Vectors are plain ``numpy`` arrays of coordinates in the ambient basis
``e1, ..., en``. The bracket broadcasts over leading axes, so batches of
vectors with shape ``(..., n)`` are accepted everywhere.
"""
from __future__ import annotations

import re

import numpy as np

from .checks import CheckReport
from .errors import DimensionError, FinslerError, ValidationError

DEFAULT_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class LieAlgebra:
    """Real Lie algebra with ``[e_i, e_j] = sum_k c[i, j, k] e_k``.

    Only the strict upper triangle ``i < j`` of ``structure`` is read; the
    lower triangle is mirrored from it, so antisymmetry holds exactly.
    """

    def __init__(self, structure, labels=None):
        c = np.asarray(structure, dtype=float)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[1] != c.shape[2]:
            raise DimensionError(f"structure constants must have shape (n, n, n), got {c.shape}")
        n = c.shape[0]
        if n < 1:
            raise DimensionError("dimension must be positive")
        iu, ju = np.triu_indices(n, 1)
        full = np.zeros_like(c)
        full[iu, ju] = c[iu, ju]
        full[ju, iu] = -c[iu, ju]
        self.dim = n
        self.structure = _frozen(full)
        # rows of _upper are [e_i, e_j] for i < j, in triu order
        self._iu, self._ju = iu, ju
        self._upper = _frozen(full[iu, ju])
        if labels is None:
            labels = [f"e{i + 1}" for i in range(n)]
        labels = tuple(labels)
        if len(labels) != n or len(set(labels)) != n:
            raise DimensionError("labels must be n distinct names")
        self.labels = labels

    @classmethod
    def from_brackets(cls, dim, rules, labels=None):
        """Build from ``{(i, j): vector}`` with 0-based ``i != j``; unlisted brackets are 0."""
        c = np.zeros((dim, dim, dim))
        for (i, j), vec in rules.items():
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                raise DimensionError(f"bad bracket indices ({i + 1}, {j + 1})")
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (dim,):
                raise DimensionError(f"bracket value must have length {dim}")
            if i < j:
                c[i, j] = vec
            else:
                c[j, i] = -vec
        return cls(c, labels)

    def basis(self, i=None):
        eye = np.eye(self.dim)
        return eye if i is None else eye[i]

    def ad(self, x):
        """Matrix of ``ad_x = [x, .]`` acting on coordinate columns."""
        x = self.check_vector(x)
        return np.einsum("i,ijk->kj", x, self.structure)

    def check_vector(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise DimensionError(f"expected vectors of length {self.dim}, got shape {x.shape}")
        return x

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.structure, other.structure)

    __hash__ = None

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim})"


def bracket(alg: LieAlgebra, x, y):
    """Lie bracket ``[x, y]``.

    Evaluated as ``sum_{i<j} (x_i y_j - x_j y_i) [e_i, e_j]`` so that
    ``bracket(x, x) == 0`` and ``bracket(y, x) == -bracket(x, y)`` hold exactly.
    """
    x = alg.check_vector(x)
    y = alg.check_vector(y)
    if alg.dim == 1:
        return np.zeros(np.broadcast_shapes(x.shape, y.shape))
    iu, ju = alg._iu, alg._ju
    wedge = x[..., iu] * y[..., ju] - x[..., ju] * y[..., iu]
    return wedge @ alg._upper


def check_jacobi(alg: LieAlgebra, tol=DEFAULT_TOL):
    """Max norm of the Jacobiator over all basis triples."""
    c = alg.structure
    # inner[i, j, k] = [e_i, [e_j, e_k]]
    inner = np.einsum("jkl,ilm->ijkm", c, c)
    jac = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    norms = np.linalg.norm(jac, axis=-1)
    idx = np.unravel_index(np.argmax(norms), norms.shape)
    residual = float(norms[idx])
    scale = max(1.0, float(np.abs(c).max(initial=0.0))) ** 2
    bound = tol * scale
    return CheckReport(
        "jacobi", residual <= bound, residual, bound, tuple(int(i) + 1 for i in idx)
    )


class ReductiveDecomposition:
    """Splitting ``g = h + m`` with ``[h, h] in h`` and ``[h, m] in m``.

    Both bases are given in ambient coordinates. ``h_basis`` may be empty
    (a Lie group, ``m = g``).
    """

    def __init__(self, algebra: LieAlgebra, h_basis, m_basis, tol=DEFAULT_TOL):
        n = algebra.dim
        h = np.asarray(h_basis, dtype=float).reshape(-1, n)
        m = np.asarray(m_basis, dtype=float).reshape(-1, n)
        if len(m) == 0:
            raise ValidationError("m must be nonzero", "E_DECOMPOSITION")
        basis = np.vstack([h, m])
        if basis.shape[0] != n or np.linalg.matrix_rank(basis) != n:
            raise ValidationError(
                f"h and m bases must together form a basis of the {n}-dimensional algebra",
                "E_DECOMPOSITION",
            )
        self.algebra = algebra
        self.h_basis = _frozen(h)
        self.m_basis = _frozen(m)
        inv = np.linalg.inv(basis.T)
        # coordinates of x in the (h, m) basis are inv @ x
        self._h_coords = _frozen(inv[: len(h)])
        self._m_coords = _frozen(inv[len(h):])
        for report in (self.check_subalgebra(tol), self.check_reductive(tol)):
            if not report.passed:
                raise ValidationError(
                    f"{report.name} violated (residual {report.residual:.3g})", "E_DECOMPOSITION"
                )

    @classmethod
    def trivial(cls, algebra: LieAlgebra):
        return cls(algebra, np.zeros((0, algebra.dim)), np.eye(algebra.dim))

    @classmethod
    def from_indices(cls, algebra: LieAlgebra, h_idx, m_idx, tol=DEFAULT_TOL):
        """Coordinate decomposition from 0-based basis indices."""
        eye = np.eye(algebra.dim)
        return cls(algebra, eye[list(h_idx)], eye[list(m_idx)], tol)

    @property
    def is_trivial(self):
        return len(self.h_basis) == 0

    def m_coords(self, x):
        return self.algebra.check_vector(x) @ self._m_coords.T

    def project_m(self, x):
        return self.m_coords(x) @ self.m_basis

    def project_h(self, x):
        x = self.algebra.check_vector(x)
        if self.is_trivial:
            return np.zeros_like(x)
        return (x @ self._h_coords.T) @ self.h_basis

    def _bracket_residual(self, left, right, project):
        worst = 0.0
        for a in left:
            for b in right:
                w = bracket(self.algebra, a, b)
                worst = max(worst, float(np.linalg.norm(project(w))))
        return worst

    def check_subalgebra(self, tol=DEFAULT_TOL):
        r = self._bracket_residual(self.h_basis, self.h_basis, self.project_m)
        return CheckReport("h_subalgebra", r <= tol, r, tol)

    def check_reductive(self, tol=DEFAULT_TOL):
        r = self._bracket_residual(self.h_basis, self.m_basis, self.project_h)
        return CheckReport("reductive", r <= tol, r, tol)

    def __eq__(self, other):
        if not isinstance(other, ReductiveDecomposition):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and np.array_equal(self.h_basis, other.h_basis)
            and np.array_equal(self.m_basis, other.m_basis)
        )

    __hash__ = None


def project_m(dec: ReductiveDecomposition, x):
    return dec.project_m(x)


def project_h(dec: ReductiveDecomposition, x):
    return dec.project_h(x)


def _cyclic(dim, triples):
    rules = {}
    for i, j, k in triples:
        rules[(i, j)] = np.eye(dim)[k]
    return rules


_SU2 = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
CATALOG_NAMES = ("su2", "heis3", "abelian(n)", "su2r", "so3_so2", "so3r_so2")


def catalog(name: str):
    """Fixed example algebras.

    Returns ``(algebra, decomposition)`` where the decomposition is ``None``
    for Lie groups (trivial ``h``).
    """
    key = name.strip().lower()
    match = re.fullmatch(r"abelian\s*(?:\(\s*(\d+)\s*\)|:?\s*(\d+))", key)
    if match:
        n = int(match.group(1) or match.group(2))
        if n < 1:
            raise FinslerError("abelian dimension must be positive", "E_CATALOG")
        return LieAlgebra(np.zeros((n, n, n))), None
    if key == "su2":
        return LieAlgebra.from_brackets(3, _cyclic(3, _SU2)), None
    if key == "heis3":
        return LieAlgebra.from_brackets(3, _cyclic(3, [(0, 1, 2)])), None
    if key == "su2r":
        return LieAlgebra.from_brackets(4, _cyclic(4, _SU2)), None
    if key == "so3_so2":
        alg = LieAlgebra.from_brackets(3, _cyclic(3, _SU2))
        return alg, ReductiveDecomposition.from_indices(alg, [2], [0, 1])
    if key == "so3r_so2":
        alg = LieAlgebra.from_brackets(4, _cyclic(4, _SU2))
        return alg, ReductiveDecomposition.from_indices(alg, [2], [0, 1, 3])
    raise FinslerError(
        f"unknown catalog entry {name!r}; expected one of {', '.join(CATALOG_NAMES)}",
        "E_CATALOG",
    )
