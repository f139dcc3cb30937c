"""Library side of the command-line tool: every command maps a bundle to result rows.

Exit statuses: 0 success, 1 validation failure, 2 numerical failure.
"""
from __future__ import annotations

import numpy as np

from . import alpha_beta as ab
from .curvature import (
    Flag,
    check_biinvariance_lemma,
    flag_curvature_closed,
    flag_curvature_general,
    is_berwald_candidate,
    riemann_biinvariant,
)
from .errors import DegenerateDirection, FinslerError
from .geodesic import (
    _riemannian_residuals,
    check_point_equivalence,
    find_geodesic_vectors,
    geodesic_report,
    is_geodesic_finsler,
)
from .lie_core import bracket, check_jacobi
from .metric_core import check_ad_skew, check_h_invariance, check_vector_h_invariance
from .model import ModelFile
from .output import ResultRow, check_rows, fmt_vector, geodesic_rows

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
FLAG_TOL = 1e-9
_REQUIRED = {"jacobi", "h_subalgebra", "reductive", "x_norm", "phi_condition"}


def is_biinvariant_group(bundle: ModelFile):
    return bundle.dec.is_trivial and check_ad_skew(bundle.algebra, bundle.a).passed


def cmd_check(bundle: ModelFile):
    dec, M = bundle.dec, bundle.metric
    reports = [check_jacobi(bundle.algebra), dec.check_subalgebra(), dec.check_reductive()]
    reports += ab.metric_checks(M)
    if dec.is_trivial:
        reports.append(check_ad_skew(bundle.algebra, bundle.a, bundle.tol))
    else:
        reports.append(check_h_invariance(dec, bundle.a, bundle.tol))
        reports.append(check_vector_h_invariance(dec, M.x, bundle.tol))
    rows = check_rows(reports)
    rows.append(ResultRow("check.spd", "", None, None, None, True))
    rows.append(ResultRow("check.berwald_candidate", "X=" + fmt_vector(M.x), None, None, None,
                          is_berwald_candidate(bundle.algebra, M.x)))
    failed = any(not r.passed for r in reports if r.name in _REQUIRED)
    return (EXIT_VALIDATION if failed else EXIT_OK), rows


def cmd_gv_test(bundle: ModelFile, x, quantifier="m"):
    return EXIT_OK, geodesic_rows(geodesic_report(bundle.metric, x, bundle.tol, quantifier))


def cmd_gv_find(bundle: ModelFile, mode="riemannian", resolution=10_000, seed=0, tol=1e-10, dense=False):
    res = find_geodesic_vectors(bundle.dec, bundle.metric, mode, resolution, tol, seed)
    if res.all_vectors:
        return EXIT_OK, [ResultRow("gv.find.all", f"grid={res.grid_size}", None, None, tol, True)]
    if mode == "riemannian":
        def residual(p):
            return float(np.max(np.abs(_riemannian_residuals(bundle.dec, bundle.a, p))))
    else:
        def residual(p):
            return is_geodesic_finsler(bundle.metric, p, tol).finsler_residual
    rows = []
    grouped = {}
    for p, d in zip(res.points, res.dimensions):
        if d == 0 or dense:
            r = residual(p)
            rows.append(ResultRow(f"gv.find.point.dim{d}", "X=" + fmt_vector(p), r, r, tol, r <= tol))
        else:
            grouped.setdefault(d, []).append(p)
    for d, pts in sorted(grouped.items()):
        worst = max(residual(p) for p in pts)
        rows.append(ResultRow(f"gv.find.component.dim{d}", f"clusters={len(pts)} first=" + fmt_vector(pts[0]),
                              worst, worst, tol, worst <= tol))
    for k, curve in enumerate(res.curves):
        if dense:
            for p in curve:
                r = residual(p)
                rows.append(ResultRow(f"gv.find.curve{k}", "X=" + fmt_vector(p), r, r, tol, r <= tol))
        else:
            worst = max(residual(p) for p in curve)
            rows.append(ResultRow(f"gv.find.curve{k}", f"samples={len(curve)} start=" + fmt_vector(curve[0]),
                                  worst, worst, tol, worst <= tol))
    return EXIT_OK, rows


def cmd_flag(bundle: ModelFile, y, u):
    M = bundle.metric
    flag = Flag.make(bundle.a, y, u)
    inputs = f"y={fmt_vector(flag.y)} u={fmt_vector(flag.u)}"
    general = flag_curvature_general(M, flag, riemann_biinvariant(bundle.algebra, flag.u, flag.y))
    rows = [ResultRow("flag.general", inputs, general)]
    status = EXIT_OK
    if flag.orthonormal and is_biinvariant_group(bundle):
        closed = flag_curvature_closed(M, flag)
        diff = abs(closed - general)
        rows.append(ResultRow("flag.closed", inputs, closed))
        rows.append(ResultRow("flag.diff", inputs, diff, diff, FLAG_TOL, diff <= FLAG_TOL))
        if diff > FLAG_TOL:
            status = EXIT_NUMERICAL
    return status, rows


def _random_m(rng, dec, count):
    return rng.standard_normal((count, len(dec.m_basis))) @ dec.m_basis


def run_verify(bundle: ModelFile, seed=0, samples=200):
    """Oracle and identity checks on the bundle's metric at reduced sample counts."""
    rng = np.random.default_rng(seed)
    M, dec, alg, a = bundle.metric, bundle.dec, bundle.algebra, bundle.a
    rows = check_rows([check_jacobi(alg)], "verify")

    y, u, v, w = (_random_m(rng, dec, samples) for _ in range(4))
    y = y / np.sqrt(a.form(y, y))[:, None]
    closed = ab.fundamental_form(M, y, u, v)
    fd = ab.fundamental_form_fd(M, y, u, v)
    err = float(np.max(np.abs(closed - fd) / (1 + np.abs(closed))))
    rows.append(ResultRow("verify.g_closed_vs_fd", f"n={samples}", err, err, 1e-6, err <= 1e-6))

    sym = float(np.max(np.abs(closed - ab.fundamental_form(M, y, v, u))))
    rows.append(ResultRow("verify.g_symmetry", f"n={samples}", sym, sym, 1e-10, sym <= 1e-10))

    c1, c2 = rng.standard_normal((2, samples, 1))
    lin = ab.fundamental_form(M, y, c1 * u + c2 * w, v) - c1[:, 0] * closed - c2[:, 0] * ab.fundamental_form(M, y, w, v)
    lin = float(np.max(np.abs(lin)))
    rows.append(ResultRow("verify.g_linearity", f"n={samples}", lin, lin, 1e-10, lin <= 1e-10))

    lam = rng.uniform(0.1, 10.0, (samples, 1))
    hom = float(np.max(np.abs(ab.fundamental_form(M, lam * y, u, v) - closed)))
    rows.append(ResultRow("verify.g_homogeneity", f"n={samples}", hom, hom, 1e-9, hom <= 1e-9))

    f2 = ab.eval_F(M, y) ** 2
    euler = float(np.max(np.abs(ab.fundamental_form(M, y, y, y) - f2) / (1 + f2)))
    rows.append(ResultRow("verify.g_yy_equals_F2", f"n={samples}", euler, euler, 1e-10, euler <= 1e-10))

    pivots = min(float(np.linalg.eigvalsh(ab.gram_matrix(M, yy)).min()) for yy in y[: min(samples, 100)])
    rows.append(ResultRow("verify.g_positive_definite", "min eigenvalue", pivots, None, 0.0, pivots > 0))

    z = rng.standard_normal((samples, alg.dim))
    lhs = ab.g_y_y_bracket(M, y, z)
    rhs = ab.fundamental_form(M, y, y, dec.project_m(bracket(alg, y, z)))
    bracket_err = float(np.max(np.abs(lhs - rhs)))
    rows.append(ResultRow("verify.g_y_y_bracket_identity", f"n={samples}", bracket_err, bracket_err, 1e-10, bracket_err <= 1e-10))

    if np.any(M.x):
        rep = check_point_equivalence(M, bundle.tol)
        rows.append(ResultRow("verify.point_identity", "X=" + fmt_vector(M.x), rep.identity_residual,
                              rep.identity_residual, 1e-10, rep.identity_residual <= 1e-10))
        rows.append(ResultRow("verify.point_verdicts", "X=" + fmt_vector(M.x), None, None, None, rep.verdicts_agree))

    probes = np.vstack([alg.basis(), rng.standard_normal((samples, alg.dim))])
    mismatches = 0
    for p in probes:
        over_m = is_geodesic_finsler(M, p, bundle.tol, "m")
        if over_m.degenerate:
            continue
        over_g = is_geodesic_finsler(M, p, bundle.tol, "g")
        mismatches += over_m.is_geodesic_finsler != over_g.is_geodesic_finsler
    rows.append(ResultRow("verify.quantifier_agreement", f"n={len(probes)}", mismatches, None, 0.0, mismatches == 0))

    if M.phi.kind == "riemannian":
        worst = 0.0
        for p in probes:
            rep = geodesic_report(M, p, bundle.tol)
            if not rep.degenerate:
                worst = max(worst, abs(rep.riemannian_residual - rep.finsler_residual))
        rows.append(ResultRow("verify.riemannian_collapse", f"n={len(probes)}", worst, worst, 1e-12, worst <= 1e-12))

    if is_biinvariant_group(bundle) and is_berwald_candidate(alg, M.x):
        lemma = check_biinvariance_lemma(M, samples, seed)
        rows.append(ResultRow("verify.biinvariance_lemma", f"n={samples}", lemma, lemma, 1e-10, lemma <= 1e-10))
        if alg.dim >= 2:
            worst = 0.0
            for yy, uu in zip(rng.standard_normal((samples, alg.dim)), rng.standard_normal((samples, alg.dim))):
                try:
                    flag = Flag.orthonormalized(a, yy, uu)
                except DegenerateDirection:
                    continue
                k_general = flag_curvature_general(M, flag, riemann_biinvariant(alg, flag.u, flag.y))
                worst = max(worst, abs(flag_curvature_closed(M, flag) - k_general))
            rows.append(ResultRow("verify.flag_closed_vs_general", f"n={samples}", worst, worst, FLAG_TOL,
                                  worst <= FLAG_TOL))
    failed = any(r.passed is False for r in rows)
    return (EXIT_NUMERICAL if failed else EXIT_OK), rows


def run_command(bundle: ModelFile, command, *args, **kwargs):
    """Dispatch ``check``, ``gv test``, ``gv find``, ``flag`` or ``verify``; returns ``(status, rows)``."""
    table = {
        "check": cmd_check,
        "gv test": cmd_gv_test,
        "gv find": cmd_gv_find,
        "flag": cmd_flag,
        "verify": run_verify,
    }
    if command not in table:
        raise FinslerError(f"unknown command {command!r}", "E_COMMAND")
    return table[command](bundle, *args, **kwargs)


__all__ = ["run_command", "run_verify", "EXIT_OK", "EXIT_VALIDATION", "EXIT_NUMERICAL"]
