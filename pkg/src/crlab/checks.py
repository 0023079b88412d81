"""Residual reports for the model geometries, used by the CLI and tests."""

from __future__ import annotations

import numpy as np

from .parser import parse_expression
from .models import reinhardt as rh
from .models import sphere as sph
from .models.evaluate import (FDEvaluator, dual_frame_residual, evaluate_expr,
                              max_abs, structure_equation_residuals)
from .models.quadrature import QuadratureSpec, ReinhardtQuadrature, SphereQuadrature

PSEUDO_EINSTEIN = "R[_c,^c,_a,_b!] - 1/2 R[_c,^c,_d,^d] * h[_a,_b!]"
A_DIV_LHS = "D[^b](A[_a,_b])"
A_DIV_RHS = "-3i D[_a](P)"
DIV_S = "D[^d!](S[_a,_b!,_c,_d!]) + 2i V[_a,_b!,_c]"
V_S = ("D[_a](S[_b,^c,_d,^e]) - D[_b](S[_a,^c,_d,^e])"
       " - i V[_d,^e,_a] * h[_b,_m!]*hinv[^c,^m!]"
       " + i V[_d,^e,_b] * h[_a,_m!]*hinv[^c,^m!]"
       " - i V[_d,^c,_a] * h[_b,_m!]*hinv[^e,^m!]"
       " + i V[_d,^c,_b] * h[_a,_m!]*hinv[^e,^m!]")


def _chart_and_points(model: str, seed: int, points: int):
    rng = np.random.default_rng(seed)
    if model == "sphere":
        return sph.sphere_chart(), sph.random_points(rng, points)
    return rh.reinhardt_chart(), rh.random_points(rng, points)


def _residual(chart, expr_text: str, xs, comps_fn=None) -> float:
    e = parse_expression(expr_text)
    return max(max_abs(evaluate_expr(chart, e, x, comps_fn)) for x in xs)


def model_check_report(model: str, check: str, seed: int = 0, points: int = 5,
                       tol_fd: float = 1e-6, tol_sym: float = 1e-9) -> dict:
    chart, xs = _chart_and_points(model, seed, points)
    rep: dict = {"model": model, "check": check, "seed": seed, "points": points}
    failures = []
    if check == "pseudo-einstein":
        r = _residual(chart, PSEUDO_EINSTEIN, xs)
        rep["residuals"] = {"pseudo_einstein": r}
        if r > tol_sym:
            failures.append("pseudo_einstein")
    elif check == "identities":
        fd = FDEvaluator(chart)
        res = {}
        for name, text in (("a_div_lhs", A_DIV_LHS), ("a_div_rhs", A_DIV_RHS),
                           ("div_s", DIV_S), ("v_s", V_S),
                           ("pseudo_einstein", PSEUDO_EINSTEIN)):
            res[name + "_symbolic"] = _residual(chart, text, xs)
            if res[name + "_symbolic"] > tol_sym:
                failures.append(name + "_symbolic")
        for name, text in (("div_s", DIV_S), ("a_div_lhs", A_DIV_LHS)):
            res[name + "_fd"] = _residual(chart, text, xs[:2], comps_fn=fd.comps)
            if res[name + "_fd"] > tol_fd:
                failures.append(name + "_fd")
        rep["residuals"] = res
    elif check == "structure":
        res = {"dual_frame": dual_frame_residual(chart, xs[0])}
        for route, tol in (("fd", tol_fd), ("sym", tol_sym)):
            r = {}
            for x in xs[:3]:
                got = structure_equation_residuals(chart, x, 1e-4, route)
                for k, v in got.items():
                    r[k] = max(r.get(k, 0.0), v)
            for k, v in r.items():
                res[f"{k}_{route}"] = v
                if v > tol:
                    failures.append(f"{k}_{route}")
        rep["residuals"] = res
    else:
        raise ValueError(f"unknown check {check!r}")
    rep["tolerances"] = {"finite_difference": tol_fd, "coordinate_symbolic": tol_sym}
    rep["failures"] = failures
    rep["pass"] = not failures
    return rep


def integrate_report(model: str, k: int | None = None, m: int | None = None,
                     quantity: str | None = None, nodes: int = 48,
                     tol: float = 1e-6) -> dict:
    spec = QuadratureSpec(n_compact=nodes, n_periodic=nodes)
    if model == "sphere":
        quad = SphereQuadrature(spec)
        if k is not None:
            value = quad.integrate_z1(lambda z1: np.abs(z1) ** (2 * k)).real
            target = 2 * np.pi ** 3 / ((k + 1) * (k + 2))
            rel = abs(value - target) / abs(target)
            return {"model": model, "k": k, "value": value, "target": target,
                    "abs_err": abs(value - target), "rel_err": rel, "pass": rel < tol}
        if m is None or quantity is None:
            raise ValueError("sphere integration needs --k or --family m=<int> --quantity")
        from .variation import SphereFamilyData, sphere_constraint
        row = sphere_constraint(m, quad, tol)
        idx = {"uab2": 0, "delta2-pdp": 1}[quantity]
        value = row.numeric[idx]
        target = (6 * (m - 1) if idx == 0 else 4 * (m - 1) ** 2) / (m * (m + 1) * (m + 2))
        rel = abs(value - target) / abs(target)
        return {"model": model, "m": m, "quantity": quantity, "value": value,
                "target": target, "abs_err": abs(value - target), "rel_err": rel,
                "pass": rel < tol}
    quad = ReinhardtQuadrature(spec)
    if quantity == "vol":
        value = quad.volume()
    elif quantity == "j2":
        value = quad.integrate_x(lambda x: 1 - x[1] ** 2).real
    elif quantity == "j4":
        value = quad.integrate_x(lambda x: (1 - x[1] ** 2) ** 2).real
    else:
        raise ValueError("reinhardt integration supports --quantity vol|j2|j4")
    fine = ReinhardtQuadrature(QuadratureSpec(n_compact=nodes + 16, n_periodic=nodes))
    ref = {"vol": fine.volume(),
           "j2": fine.integrate_x(lambda x: 1 - x[1] ** 2).real,
           "j4": fine.integrate_x(lambda x: (1 - x[1] ** 2) ** 2).real}[quantity]
    rel = abs(value - ref) / abs(ref)
    return {"model": model, "quantity": quantity, "value": value,
            "refined_value": ref, "rel_change_on_refinement": rel,
            "positive": value > 0, "pass": rel < tol and value > 0}
