import numpy as np
import pytest

from finslerhom import (
    AlphaBetaMetric,
    InnerProduct,
    PhiFunction,
    bracket,
    catalog,
    check_conditional_equivalence,
    check_point_equivalence,
    find_geodesic_vectors,
    is_geodesic_finsler,
    is_geodesic_riemannian,
)
from finslerhom.errors import DegenerateDirection
from finslerhom.geodesic import geodesic_report, sphere_grid
from helpers import phi_profiles, random_metric


def heis3_metric(x=(0.0, 0.0, 0.5), phi=None):
    alg, _ = catalog("heis3")
    return AlphaBetaMetric(alg, InnerProduct.identity(3), x, phi or PhiFunction.randers())


def test_riemannian_examples(rng):
    alg, _ = catalog("su2")
    for x in rng.standard_normal((20, 3)):
        assert is_geodesic_riemannian(alg, InnerProduct.identity(3), x).is_geodesic_riemannian
    h, _ = catalog("heis3")
    a = InnerProduct.identity(3)
    assert is_geodesic_riemannian(h, a, [1, 0, 0]).is_geodesic_riemannian
    assert is_geodesic_riemannian(h, a, [0, 0, 1]).is_geodesic_riemannian
    rep = is_geodesic_riemannian(h, a, [1, 0, 1])
    assert not rep.is_geodesic_riemannian and rep.riemannian_residual == pytest.approx(1.0)


def test_heis3_hand_classification(rng):
    # a([X, Y], X) = x3 (x1 y2 - x2 y1): geodesic iff x3 = 0 or x1 = x2 = 0
    h, _ = catalog("heis3")
    a = InnerProduct.identity(3)
    for x in rng.standard_normal((200, 3)):
        assert not is_geodesic_riemannian(h, a, x).is_geodesic_riemannian
        plane = np.array([x[0], x[1], 0.0])
        assert is_geodesic_riemannian(h, a, plane).is_geodesic_riemannian


def test_zero_vector_rejected():
    alg, _ = catalog("su2")
    with pytest.raises(DegenerateDirection):
        is_geodesic_riemannian(alg, InnerProduct.identity(3), np.zeros(3))


def test_finsler_examples():
    M = heis3_metric()
    assert is_geodesic_finsler(M, [0, 0, 1]).is_geodesic_finsler
    assert is_geodesic_finsler(M, [0, 0, -1]).is_geodesic_finsler
    # g_{e1}(e1, e3) = a(X, e3) phi(0) phi'(0) = 0.5
    rep = is_geodesic_finsler(M, [1, 0, 0])
    assert not rep.is_geodesic_finsler and rep.finsler_residual == pytest.approx(0.5, abs=1e-14)
    assert not is_geodesic_finsler(M, [1, 0, 1]).is_geodesic_finsler


def _heis3_randers_cone(y, b=0.5):
    # residual factor for randers: y3 + b |y|, so the cone y3 = -b |y| besides the e3 axis
    return y[2] + b * np.linalg.norm(y)


def test_heis3_randers_cone_not_sign_symmetric():
    M = heis3_metric((0.0, 0.0, 0.5))
    t = 0.7
    y = np.array([np.cos(t) * np.sqrt(0.75), np.sin(t) * np.sqrt(0.75), -0.5])
    assert abs(_heis3_randers_cone(y)) <= 1e-15
    assert is_geodesic_finsler(M, y, 1e-12).is_geodesic_finsler
    assert not is_geodesic_finsler(M, -y, 1e-12).is_geodesic_finsler


def test_h_only_vector_is_degenerate():
    alg, dec = catalog("so3_so2")
    M = AlphaBetaMetric(dec, InnerProduct.identity(2, dec), [0.3, 0, 0], PhiFunction.randers())
    rep = is_geodesic_finsler(M, [0, 0, 1])
    assert rep.degenerate and rep.finsler_verdict == "degenerate"


@pytest.mark.parametrize("name", ["su2", "heis3", "su2r", "so3r_so2"])
def test_riemannian_phi_collapses(name, rng):
    M = random_metric(rng, name, PhiFunction.riemannian())
    for x in rng.standard_normal((30, M.algebra.dim)):
        rep = geodesic_report(M, x)
        if not rep.degenerate:
            assert rep.riemannian_residual == pytest.approx(rep.finsler_residual, abs=1e-12)


@pytest.mark.parametrize("name", ["su2", "heis3", "su2r", "so3r_so2"])
def test_quantifier_equivalence(name, rng):
    M = random_metric(rng, name, phi_profiles()["randers"])
    for x in np.vstack([np.eye(M.algebra.dim), rng.standard_normal((50, M.algebra.dim))]):
        over_m = is_geodesic_finsler(M, x, 1e-10, "m")
        if over_m.degenerate:
            continue
        assert over_m.is_geodesic_finsler == is_geodesic_finsler(M, x, 1e-10, "g").is_geodesic_finsler


def test_point_equivalence_heis3():
    M = heis3_metric((0.0, 0.0, 0.5))
    rep = check_point_equivalence(M)
    assert rep.identity_residual <= 1e-12 and rep.verdicts_agree
    M = heis3_metric((0.3, 0.2, 0.4))
    rep = check_point_equivalence(M)
    assert rep.identity_residual <= 1e-12
    assert rep.verdicts_agree and not rep.riemannian.is_geodesic_riemannian


def test_point_equivalence_requires_nonzero_x():
    with pytest.raises(DegenerateDirection):
        check_point_equivalence(heis3_metric((0.0, 0.0, 0.0)))


def test_conditional_equivalence_holds():
    alg, dec = catalog("so3r_so2")
    a = InnerProduct.diag([1, 1, 2], dec)
    M = AlphaBetaMetric(dec, a, [0, 0, 0, 0.3], PhiFunction.randers())
    for y in ([1, 0, 0, 0], [1, 1, 0, 0], [0.3, -0.7, 0.5, 0]):
        rep = check_conditional_equivalence(M, y)
        assert rep.hypotheses_hold and rep.positivity_factor > 0
        assert rep.identity_residual <= 1e-12 and rep.expansion_residual <= 1e-12
        assert rep.verdicts_agree


def test_conditional_hypothesis_fails_for_convex_phi():
    alg, _ = catalog("su2r")
    M = AlphaBetaMetric(alg, InnerProduct.identity(4), [0, 0, 0, 0.4], PhiFunction.polynomial([1, 1, 0.1], 1.0))
    rep = check_conditional_equivalence(M, [1, 0, 0, 0.5])
    assert not rep.hypotheses_hold and rep.identity_residual is None
    assert rep.expansion_residual <= 1e-10


def test_sphere_grid_deterministic():
    for dim in (2, 3, 4, 5):
        g1, g2 = sphere_grid(dim, 500, seed=3), sphere_grid(dim, 500, seed=3)
        assert np.array_equal(g1, g2)
        np.testing.assert_allclose(np.linalg.norm(g1, axis=1), 1.0, atol=1e-14)


def _heis3_hand_set(n=720):
    t = np.linspace(0, np.pi, n, endpoint=False)
    return np.vstack([np.column_stack([np.cos(t), np.sin(t), np.zeros(n)]), [[0.0, 0.0, 1.0]]])


@pytest.mark.parametrize("name", ["heis3", "so3_so2"])
def test_solver_recovers_hand_solutions(name):
    alg, dec = catalog(name)
    target = alg if dec is None else dec
    a = InnerProduct.identity(3)
    res = find_geodesic_vectors(target, a, "riemannian", resolution=3000, tol=1e-10)
    assert not res.all_vectors
    reps = res.representatives()
    d = dec if dec is not None else target
    worst = max(is_geodesic_riemannian(d, a, r, 1e-8).riemannian_residual for r in reps)
    assert worst <= 1e-8
    assert max(res.angular_distance(v) for v in _heis3_hand_set()) <= 1e-3


def test_solver_all_vectors_su2():
    alg, _ = catalog("su2")
    res = find_geodesic_vectors(alg, InnerProduct.identity(3), resolution=2000)
    assert res.all_vectors and res.angular_distance([0.3, 0.1, 0.2]) == 0.0


def test_solver_deterministic():
    alg, _ = catalog("heis3")
    r1 = find_geodesic_vectors(alg, InnerProduct.identity(3), resolution=1500, seed=5)
    r2 = find_geodesic_vectors(alg, InnerProduct.identity(3), resolution=1500, seed=5)
    assert np.array_equal(r1.representatives(), r2.representatives())


def test_solver_finsler_mode_heis3():
    M = heis3_metric((0.0, 0.0, 0.5))
    res = find_geodesic_vectors(None, M, "finsler", resolution=2000, tol=1e-10)
    assert not res.symmetric
    for r in res.representatives():
        assert is_geodesic_finsler(M, r, 1e-8).is_geodesic_finsler
    assert res.angular_distance([0, 0, 1]) <= 1e-3
    assert res.angular_distance([0, 0, -1]) <= 1e-3
    for t in np.linspace(0, 2 * np.pi, 50, endpoint=False):
        on_cone = [np.cos(t) * np.sqrt(0.75), np.sin(t) * np.sqrt(0.75), -0.5]
        assert res.angular_distance(on_cone) <= 1e-3
    # the reflected cone is not a solution set
    assert res.angular_distance([np.sqrt(0.75), 0, 0.5]) > 0.1


def test_bracket_orthogonality_hypothesis_detected():
    # so3r_so2 with X in the so(3) block: a(X, [Y, Z]_m) is not identically zero
    alg, dec = catalog("so3r_so2")
    M = AlphaBetaMetric(dec, InnerProduct.diag([1, 1, 2], dec), [0.3, 0, 0, 0], PhiFunction.randers())
    y = np.array([0.0, 1.0, 1.0, 0.0])
    # [y, e2]_m = -e1, so a(X, [y, e2]_m) = -0.3
    assert M.a.form(M.x, dec.project_m(bracket(alg, y, [0, 1, 0, 0]))) == pytest.approx(-0.3)
    assert not check_conditional_equivalence(M, y).bracket_orthogonal
