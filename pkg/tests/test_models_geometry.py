"""Frames, Levi forms, curvature values and structure equations."""

import numpy as np
import pytest
import sympy as sp

from crlab.models.evaluate import (dual_frame_residual, evaluate_expr, max_abs,
                                   structure_equation_residuals)
from crlab.models.chart import lambdified_field
from crlab.parser import parse_expression as pe

S3_REINHARDT = -1.0 / 36.0  # brute-force value of the cubic contraction


def _ev(chart, text, x):
    return evaluate_expr(chart, pe(text), x)


def test_levi_inverse(sphere, reinhardt, sphere_pts, reinhardt_pts):
    for ch, xs in ((sphere, sphere_pts), (reinhardt, reinhardt_pts)):
        for x in xs:
            h = lambdified_field(ch.name, "h", ())(x)
            hinv = lambdified_field(ch.name, "hinv", ())(x)
            assert np.max(np.abs(np.einsum("ab,gb->ag", hinv, h) - np.eye(2))) < 1e-12
            # positive definiteness
            assert np.all(np.linalg.eigvalsh(np.array(h)) > 0)


def test_levi_form_is_minus_del_delbar_rho(sphere, reinhardt, sphere_pts, reinhardt_pts):
    """The closed-form h equals -del delbar rho(Z_a, Zbar_b), symbolically."""
    for ch, xs in ((sphere, sphere_pts), (reinhardt, reinhardt_pts)):
        rho_hess = [[sp.simplify(ch.dzb(ch.dz(ch.rho, j), k)) for k in range(3)]
                    for j in range(3)]
        for a in range(2):
            for b in range(2):
                za, zb = ch.frame_Z[a], ch.frame_Z[b]
                val = -sum(za.dz[j] * sp.conjugate(zb.dz[k]) * rho_hess[j][k]
                           for j in range(3) for k in range(3))
                diff = sp.lambdify(ch.xs, val - ch.H[a][b], modules="numpy")
                for x in xs:
                    assert abs(complex(diff(*x))) < 1e-12


def test_sphere_flat_values(sphere, sphere_pts):
    for x in sphere_pts:
        assert abs(_ev(sphere, "1/6 R[_a,^a,_b,^b]", x) - 1.0) < 1e-12  # P = 1
        assert max_abs(_ev(sphere, "A[_a,_b]", x)) == 0.0
        assert max_abs(_ev(sphere, "S[_a,_b!,_c,_d!]", x)) == 0.0
        assert max_abs(_ev(sphere, "V[_a,_b!,_c]", x)) == 0.0
        # R = h # h + h # h; as weighted densities the right side carries P,
        # whose component is 1 in this trivialization
        r = _ev(sphere, "R[_a,_b!,_c,_d!] - P * h[_a,_b!]*h[_c,_d!]"
                        " - P * h[_c,_b!]*h[_a,_d!]", x)
        assert max_abs(r) < 1e-12


def test_sphere_identity_levi_form_at_pole(sphere):
    x = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0])  # z = 0, w = 1
    h = lambdified_field(sphere.name, "h", ())(x)
    assert np.max(np.abs(h - np.eye(2))) < 1e-14


def test_reinhardt_values(reinhardt, reinhardt_pts):
    for x in reinhardt_pts:
        assert abs(_ev(reinhardt, "1/6 R[_a,^a,_b,^b]", x) - 1 / 6) < 1e-12  # P = 1/6
        # torsion is -(i/4) times the Levi form in this frame
        h = lambdified_field(reinhardt.name, "h", ())(x)
        a = lambdified_field(reinhardt.name, "A", ())(x)
        assert np.max(np.abs(a + 0.25j * h)) < 1e-13
        assert abs(_ev(reinhardt, "A[_c,_d] * A~[^c,^d]", x) - 1 / 8) < 1e-12


def test_pseudo_einstein_pointwise(sphere, reinhardt, sphere_pts, reinhardt_pts):
    expr = "R[_c,^c,_a,_b!] - 1/2 R[_c,^c,_d,^d] * h[_a,_b!]"
    for ch, xs in ((sphere, sphere_pts), (reinhardt, reinhardt_pts)):
        assert max(max_abs(_ev(ch, expr, x)) for x in xs) < 1e-9


def test_s_squared_and_cubic_constants(reinhardt, reinhardt_pts):
    s2 = [_ev(reinhardt, "S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]", x).real
          for x in reinhardt_pts]
    s3 = [_ev(reinhardt, "S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]", x).real
          for x in reinhardt_pts]
    assert max(abs(v - 1 / 6) for v in s2) < 1e-12
    assert max(s3) - min(s3) < 1e-9  # constant across points
    assert max(abs(v - S3_REINHARDT) for v in s3) < 1e-12


def test_s_cubic_brute_force_oracle(reinhardt, reinhardt_pts):
    """Plain index loops, independent of the expression evaluator."""
    x = reinhardt_pts[0]
    H = np.asarray(lambdified_field(reinhardt.name, "h", ())(x))
    Hi = np.asarray(lambdified_field(reinhardt.name, "hinv", ())(x))
    S = np.asarray(lambdified_field(reinhardt.name, "S", ())(x))
    # mixed components S_a^b_c^d = S_{a m c n} hinv[b,m]... via loops
    Sm = np.zeros((2, 2, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    acc = 0
                    for m in range(2):
                        for n in range(2):
                            acc += S[a, m, c, n] * Hi[b, m] * Hi[d, n]
                    Sm[a, b, c, d] = acc
    total = 0
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    for e in range(2):
                        for f in range(2):
                            total += Sm[a, b, c, d] * Sm[b, e, d, f] * Sm[e, a, f, c]
    assert abs(total - S3_REINHARDT) < 1e-12
    # |S|^2 by loops
    s2 = 0
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    s2 += Sm[a, b, c, d] * Sm[b, a, d, c]
    assert abs(s2 - 1 / 6) < 1e-12


def test_frame_covariance(sphere, reinhardt, rng):
    """Invariant scalars agree across chart parameterizations: swapping the
    two holomorphic coordinates is a CR automorphism of both models."""
    from crlab.models.reinhardt import random_points as rpts
    from crlab.models.sphere import random_points as spts
    for ch, pts, swap in ((sphere, spts(rng, 4), lambda x: x[[2, 3, 0, 1, 4, 5]]),
                          (reinhardt, rpts(rng, 4), lambda x: x[[0, 1, 4, 5, 2, 3]])):
        for text in ("A[_c,_d] * A~[^c,^d]",
                     "S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]",
                     "1/6 R[_a,^a,_b,^b]"):
            for x in pts:
                v1 = _ev(ch, text, x)
                v2 = _ev(ch, text, swap(x))
                assert abs(v1 - v2) < 1e-9


def test_dual_frames(sphere, reinhardt, sphere_pts, reinhardt_pts):
    assert dual_frame_residual(sphere, sphere_pts[0]) < 1e-12
    assert dual_frame_residual(reinhardt, reinhardt_pts[0]) < 1e-12


@pytest.mark.parametrize("route,tol", [("fd", 1e-6), ("sym", 1e-9)])
def test_structure_equations(sphere, reinhardt, sphere_pts, reinhardt_pts, route, tol):
    for ch, xs in ((sphere, sphere_pts), (reinhardt, reinhardt_pts)):
        for x in xs[:3]:
            res = structure_equation_residuals(ch, x, 1e-4, route)
            assert res["first_structure_equation"] < tol, (ch.name, route)
            assert res["second_structure_equation"] < tol, (ch.name, route)


def test_step_out_of_range(sphere, sphere_pts):
    from crlab.errors import EvaluationError
    with pytest.raises(EvaluationError):
        structure_equation_residuals(sphere, sphere_pts[0], 1e-8, "fd")


def test_point_constraints(sphere_pts, reinhardt_pts):
    for x in sphere_pts:
        assert abs(np.sum(x ** 2) - 1) < 1e-12
    for x in reinhardt_pts:
        assert abs(x[0] ** 2 + x[2] ** 2 + x[4] ** 2 - 1) < 1e-12
