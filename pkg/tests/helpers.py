"""Random admissible configurations and brute-force oracles shared by the tests."""
import itertools

import numpy as np

from finslerhom import AlphaBetaMetric, InnerProduct, PhiFunction, catalog


def phi_profiles():
    return {
        "riemannian": PhiFunction.riemannian(),
        "randers": PhiFunction.randers(),
        "poly": PhiFunction.polynomial([1.0, 1.0, 0.1], 1.0),
    }


def random_spd(rng, n):
    q = rng.standard_normal((n, n))
    return q @ q.T + 0.5 * np.eye(n)


def random_metric(rng, name, phi, x_scale=0.9):
    """Random admissible (alpha, beta)-metric on a catalog entry.

    Lie groups get an arbitrary SPD matrix and arbitrary X; so3r_so2 gets the
    Ad(SO(2))-invariant diag(l, l, m) on m and X on the fixed line of e4.
    ||X||_alpha < x_scale * min(b0, 1).
    """
    alg, dec = catalog(name)
    if dec is None:
        a = InnerProduct(random_spd(rng, alg.dim))
        x = rng.standard_normal(alg.dim)
        target = alg
    else:
        lam, mu = rng.uniform(0.5, 2.0, 2)
        a = InnerProduct.diag([lam, lam, mu], dec)
        x = np.array([0.0, 0.0, 0.0, rng.choice([-1.0, 1.0])])
        target = dec
    bound = min(phi.b0, 1.0) * x_scale
    x *= rng.uniform(0.0, bound) / np.sqrt(a.form(x, x))
    return AlphaBetaMetric(target, a, x, phi)


def random_in_m(rng, M, count=None):
    basis = M.decomposition.m_basis
    shape = (len(basis),) if count is None else (count, len(basis))
    return rng.standard_normal(shape) @ basis


def jacobi_bruteforce(structure):
    """Max Jacobiator norm from explicit loops over the raw structure constants."""
    c = np.asarray(structure)
    n = c.shape[0]

    def br(x, y):
        out = np.zeros(n)
        for i in range(n):
            for j in range(n):
                out += x[i] * y[j] * c[i, j]
        return out

    e = np.eye(n)
    worst = 0.0
    for i, j, k in itertools.product(range(n), repeat=3):
        jac = br(e[i], br(e[j], e[k])) + br(e[j], br(e[k], e[i])) + br(e[k], br(e[i], e[j]))
        worst = max(worst, np.linalg.norm(jac))
    return worst


def hessian_F2_oracle(M, y, h=1e-4):
    """Half the full coordinate Hessian of F^2 by central differences (m-coordinates)."""
    basis = M.decomposition.m_basis
    k = len(basis)

    def f2(c):
        w = y + c @ basis
        alpha = np.sqrt(M.a.form(w, w))
        return (alpha * M.phi(M.a.form(M.x, w) / alpha)) ** 2

    H = np.zeros((k, k))
    e = np.eye(k) * h
    for i in range(k):
        for j in range(k):
            H[i, j] = (f2(e[i] + e[j]) - f2(e[i] - e[j]) - f2(-e[i] + e[j]) + f2(-e[i] - e[j])) / (4 * h * h)
    return 0.5 * H


def randers_g_oracle(A, x, y, u, v):
    """Textbook Randers fundamental tensor (F/alpha)(a - l l) + (l + b)(l + b), l = a(y, .)/alpha."""
    A = np.asarray(A, dtype=float)
    alpha = np.sqrt(y @ A @ y)
    F = alpha + x @ A @ y
    lu, lv = (y @ A @ u) / alpha, (y @ A @ v) / alpha
    return F / alpha * (u @ A @ v - lu * lv) + (lu + x @ A @ u) * (lv + x @ A @ v)


def bracket_bruteforce(structure, x, y):
    c = np.asarray(structure)
    return np.einsum("i,j,ijk->k", x, y, c)


def randers_flag_oracle(alg, A, x, y, u):
    """Flag curvature of a Berwald Randers metric on a bi-invariant group via the textbook tensor."""
    R = 0.25 * bracket_bruteforce(alg.structure, y, bracket_bruteforce(alg.structure, u, y))
    g = lambda p, q: randers_g_oracle(A, x, y, p, q)  # noqa: E731
    return g(R, u) / (g(y, y) * g(u, u) - g(y, u) ** 2)


def random_unit_in_m(rng, M, count):
    w = random_in_m(rng, M, count)
    return w / np.sqrt(M.a.form(w, w))[:, None]
