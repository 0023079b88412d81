"""Numeric evaluation of tensor expressions on the model geometries.

Two independent derivative routes are provided and cross-checked in the
test suite: symbolic differentiation of the chart formulas (exact up to
rounding) and nested central finite differences with Richardson
extrapolation.  Contractions are assembled as einsum calls over the frame
components, with one inverse-Levi-form operand per contraction pair and
per raised free slot.
"""

from __future__ import annotations

import itertools
import string

import numpy as np
import sympy as sp

from ..errors import EvaluationError
from ..expr import Mono, TExpr, nslots, slot_bt
from ..species import ANTI, HOLO, REEB, species
from .chart import Chart, decorated_field, lambdified_field

_LETTERS = string.ascii_lowercase + string.ascii_uppercase


def _hinv_np(chart: Chart, x: np.ndarray) -> np.ndarray:
    """Numeric h^{alpha betabar}: first axis holomorphic, second anti."""
    arr = lambdified_field(chart.name, "hinv", ())(x)
    return arr


def _axis_map(f) -> dict[int, int]:
    """Internal slot index -> component axis (reeb slots carry no axis)."""
    out = {}
    ax = 0
    nd = len(f.dslots)
    for si, d in enumerate(f.dslots):
        if d != REEB:
            out[si] = ax
            ax += 1
    for k in range(species(f.species).arity):
        out[nd + k] = ax
        ax += 1
    return out


def evaluate_mono(chart: Chart, m: Mono, x: np.ndarray, comps_fn=None):
    """Evaluate one canonical monomial at a chart point.

    Returns (labels, array): ``labels`` the sorted free labels, ``array``
    the complex ndarray over their index values (0-dim when closed).
    ``comps_fn(chart, species, dseq, x)`` supplies factor components; the
    default is the symbolic route.
    """
    comps_fn = comps_fn or (lambda ch, s, d, xx: lambdified_field(ch.name, s, d)(xx))
    letters = iter(_LETTERS)
    slot_letter: dict = {}
    operands = []
    subs = []
    for fi, f in enumerate(m.factors):
        amap = _axis_map(f)
        arr = comps_fn(chart, f.species, f.dslots, x)
        sub = [None] * len(amap)
        for si, ax in amap.items():
            l = next(letters)
            slot_letter[(fi, si)] = l
            sub[ax] = l
        operands.append(np.asarray(arr, dtype=complex))
        subs.append("".join(sub))
    hinv = _hinv_np(chart, x)
    for u, v in m.pairs:
        operands.append(hinv)
        subs.append(slot_letter[u] + slot_letter[v])
    out_labels = []
    out_letters = []
    for slot, lab, raised in sorted(m.free, key=lambda t: t[1]):
        sp_ = species(m.factors[slot[0]].species)
        if raised and not sp_.native_upper:
            l_out = next(letters)
            bt = slot_bt(m.factors, slot)
            if bt == ANTI:
                operands.append(hinv)
                subs.append(l_out + slot_letter[slot])
            else:
                operands.append(hinv)
                subs.append(slot_letter[slot] + l_out)
            out_letters.append(l_out)
        else:
            out_letters.append(slot_letter[slot])
        out_labels.append(lab)
    batch = np.shape(x)[1:]
    if not operands:
        return out_labels, np.ones(batch, dtype=complex)
    eq = ",".join(s + "..." for s in subs) + "->" + "".join(out_letters) + "..."
    return out_labels, np.einsum(eq, *operands)


def evaluate_expr(chart: Chart, e: TExpr, x: np.ndarray, comps_fn=None):
    """Evaluate an expression; scalar for closed expressions, else an array
    over the sorted free labels."""
    total = None
    labels0 = None
    for m, c in e.terms.items():
        labels, arr = evaluate_mono(chart, m, x, comps_fn)
        val = complex(c) * arr
        if total is None:
            total, labels0 = val, labels
        else:
            if labels != labels0:
                raise EvaluationError("free labels differ across terms")
            total = total + val
    if total is None:
        return 0.0 + 0.0j
    return total if total.shape else complex(total)


def max_abs(val) -> float:
    return float(np.max(np.abs(val)))


# ---------------------------------------------------------------------------
# finite-difference route
# ---------------------------------------------------------------------------

class FDEvaluator:
    """Covariant derivatives by nested central differences in the chart."""

    def __init__(self, chart: Chart, step: float = 1e-5, richardson: bool = True):
        self.chart = chart
        self.step = step
        self.richardson = richardson
        self._vec_cache: dict = {}
        self._conn_cache: dict = {}

    def _vec_np(self, direction):
        if direction not in self._vec_cache:
            v = self.chart.vec(direction)
            fn = sp.lambdify(self.chart.xs, list(v.dz) + list(v.dzb), modules="numpy")
            self._vec_cache[direction] = fn
        return self._vec_cache[direction]

    def _conn_np(self, direction):
        if direction not in self._conn_cache:
            mat = [[self.chart.conn_entry(direction, b, a) for a in range(2)]
                   for b in range(2)]
            fn = sp.lambdify(self.chart.xs, mat, modules="numpy")
            self._conn_cache[direction] = fn
        return self._conn_cache[direction]

    def _dirderiv(self, g, x: np.ndarray, direction):
        """Directional derivative of array-valued g along a frame vector."""
        coefs = np.asarray(self._vec_np(direction)(*x), dtype=complex)

        def d_real(fun, k, h):
            ek = np.zeros(6)
            ek[k] = h
            return (fun(x + ek) - fun(x - ek)) / (2 * h)

        def grad(fun, h):
            parts = [d_real(fun, k, h) for k in range(6)]
            out = 0
            for j in range(3):
                dzj = (parts[2 * j] - 1j * parts[2 * j + 1]) / 2
                dzbj = (parts[2 * j] + 1j * parts[2 * j + 1]) / 2
                out = out + coefs[j] * dzj + coefs[3 + j] * dzbj
            return out

        if not self.richardson:
            return grad(g, self.step)
        d1 = grad(g, self.step)
        d2 = grad(g, self.step / 2)
        return (4 * d2 - d1) / 3

    def comps(self, chart: Chart, species_name: str, dseq: tuple[str, ...],
              x: np.ndarray) -> np.ndarray:
        if not dseq:
            return lambdified_field(chart.name, species_name, ())(x)
        bt, inner = dseq[0], dseq[1:]
        fld = decorated_field(chart.name, species_name, inner)
        inner_bts = fld.bts

        def g(y):
            return self.comps(chart, species_name, inner, y)

        base = g(x)
        dirs = [(bt, 0), (bt, 1)] if bt != REEB else [(REEB,)]
        pieces = []
        for d in dirs:
            val = self._dirderiv(g, x, d)
            conn = np.asarray(self._conn_np(d)(*x), dtype=complex)
            cd = d if d == (REEB,) else ((ANTI, d[1]) if d[0] == HOLO else (HOLO, d[1]))
            conn_bar = np.conj(np.asarray(self._conn_np(cd)(*x), dtype=complex))
            for k, sbt in enumerate(inner_bts):
                mat = conn if sbt == HOLO else conn_bar
                # subtract omega_{idx_k}^mu T_{... mu ...}
                val = val - np.tensordot(mat, base, axes=([1], [k])).transpose(
                    _restore_axis(len(inner_bts), k))
            pieces.append(val)
        if bt == REEB:
            return pieces[0]
        return np.stack(pieces, axis=0)


def _restore_axis(nax: int, k: int):
    """tensordot puts the contracted factor axis first; move it back to k."""
    order = list(range(1, nax))
    order.insert(k, 0)
    return order


# ---------------------------------------------------------------------------
# structure equations (Graham-Lee) by forms
# ---------------------------------------------------------------------------

def _lamb_form(chart: Chart, form):
    return sp.lambdify(chart.xs, list(form), modules="numpy")


def _lamb_scalar(chart: Chart, s):
    return sp.lambdify(chart.xs, s, modules="numpy")


def _fd_gradient(fn, x: np.ndarray, h: float) -> np.ndarray:
    """Richardson-extrapolated central differences of a vector function."""
    def central(step):
        rows = []
        for j in range(6):
            ej = np.zeros(6)
            ej[j] = step
            wp = np.asarray(fn(*(x + ej)), dtype=complex)
            wm = np.asarray(fn(*(x - ej)), dtype=complex)
            rows.append((wp - wm) / (2 * step))
        return np.array(rows)

    d1 = central(h)
    d2 = central(h / 2)
    return (4 * d2 - d1) / 3


def _d_form_fd(coeff_fn, x: np.ndarray, h: float) -> np.ndarray:
    """Exterior derivative of a 1-form by central differences: (6,6)."""
    grad = _fd_gradient(coeff_fn, x, h)  # grad[j][k] = d(omega_k)/dx_j
    return grad - grad.T


def _d_form_sym(chart: Chart, form):
    mat = sp.zeros(6, 6)
    for j in range(6):
        for k in range(6):
            mat[j, k] = sp.diff(form[k], chart.xs[j]) - sp.diff(form[j], chart.xs[k])
    return mat


def _wedge11(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def structure_equation_residuals(chart: Chart, x: np.ndarray, h: float = 1e-4,
                                 route: str = "fd") -> dict[str, float]:
    """Residuals of the two Graham-Lee structure equations at a point."""
    if not 1e-6 <= h <= 1e-3:
        raise EvaluationError("finite-difference step out of range")
    theta_a = [np.asarray(_lamb_form(chart, f)(*x), dtype=complex)
               for f in chart.theta_a_forms]
    theta_ab = [np.conj(t) for t in theta_a]
    prho = np.asarray(_lamb_form(chart, chart.prho_form)(*x), dtype=complex)
    pbrho = np.conj(prho)
    drho = prho + pbrho
    kappa = complex(_lamb_scalar(chart, chart.kappa)(*x))
    phi = [[np.asarray(_lamb_form(chart, chart.phi_gl[b][a])(*x), dtype=complex)
            for a in range(2)] for b in range(2)]
    Agl = [[complex(_lamb_scalar(chart, chart.A_gl[a][b])(*x)) for b in range(2)]
           for a in range(2)]
    H = np.asarray(lambdified_field(chart.name, "h", ())(x), dtype=complex)
    Hinv = np.asarray(lambdified_field(chart.name, "hinv", ())(x), dtype=complex)

    # kappa^alpha = h^{alpha beta-bar} Zbar_beta(kappa)
    kot = []
    for b in range(2):
        v = chart.vec((ANTI, b))
        kot.append(complex(_lamb_scalar(chart, chart.apply_vec(v, chart.kappa))(*x)))
    kup = [sum(Hinv[a, b] * kot[b] for b in range(2)) for a in range(2)]

    if route == "fd":
        d_theta = [_d_form_fd(_lamb_form(chart, f), x, h) for f in chart.theta_a_forms]
        d_h = np.empty((2, 2, 6), dtype=complex)
        for a in range(2):
            for b in range(2):
                fn = _lamb_scalar(chart, chart.H[a][b])
                d_h[a, b] = _fd_gradient(lambda *y: np.atleast_1d(fn(*y)), x, h)[:, 0]
    else:
        d_theta = [np.asarray(_lamb_form(chart, _d_form_sym(chart, f))(*x),
                              dtype=complex).reshape(6, 6)
                   for f in chart.theta_a_forms]
        d_h = np.empty((2, 2, 6), dtype=complex)
        for a in range(2):
            for b in range(2):
                gform = sp.Matrix([sp.diff(chart.H[a][b], chart.xs[j]) for j in range(6)])
                d_h[a, b] = np.asarray(_lamb_form(chart, gform)(*x), dtype=complex)

    res1 = 0.0
    for al in range(2):
        rhs = sum(_wedge11(theta_a[b], phi[b][al]) for b in range(2))
        rhs = rhs + 1j * sum(Agl[al][b] * _wedge11(prho, theta_ab[b]) for b in range(2))
        rhs = rhs - kup[al] * _wedge11(prho, pbrho)
        rhs = rhs - 0.5 * kappa * _wedge11(drho, theta_a[al])
        res1 = max(res1, float(np.max(np.abs(d_theta[al] - rhs))))

    res2 = 0.0
    for a in range(2):
        for b in range(2):
            rhs = sum(phi[a][g] * H[g, b] for g in range(2))
            rhs = rhs + sum(H[a, g] * np.conj(phi[b][g]) for g in range(2))
            res2 = max(res2, float(np.max(np.abs(d_h[a, b] - rhs))))
    return {"first_structure_equation": res1, "second_structure_equation": res2}


def dual_frame_residual(chart: Chart, x: np.ndarray) -> float:
    """theta^a(Z_b) = delta, theta^a(xi) = 0, prho(Z_a) = 0, prho(xi) = 1."""
    def pair(form, vec):
        fv = np.asarray(_lamb_form(chart, form)(*x), dtype=complex)
        vv = np.asarray(sp.lambdify(chart.xs, list(vec.dz) + list(vec.dzb),
                                    modules="numpy")(*x), dtype=complex)
        # form(dz_j) coefficient: form acts on the real-coordinate components
        # of the complex vector: v = sum c_j d/dz_j + d_j d/dzbar_j with
        # d/dz_j = (d/dx - i d/dy)/2.
        tot = 0
        for j in range(3):
            c, d = vv[j], vv[3 + j]
            tot += fv[2 * j] * (c + d) / 2 + fv[2 * j + 1] * (1j * (c - d)) / 2 * (-1)
        return tot

    res = 0.0
    for a in range(2):
        for b in range(2):
            v = pair(chart.theta_a_forms[a], chart.frame_Z[b])
            res = max(res, abs(v - (1 if a == b else 0)))
        res = max(res, abs(pair(chart.theta_a_forms[a], chart.xi)))
        res = max(res, abs(pair(chart.prho_form, chart.frame_Z[a])))
    res = max(res, abs(pair(chart.prho_form, chart.xi) - 1))
    return float(res)
