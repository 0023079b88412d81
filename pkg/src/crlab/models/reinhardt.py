"""The Reinhardt hypersurface sum (x^j)^2 = 1 in logarithmic coordinates.

Ambient complex coordinates (w, z1, z2) = (z^0, z^1, z^2), z^j = x^j + i y^j,
chart x^0 != 0; defining function rho = 2(1 - sum (x^j)^2).  The frame
realizes constant nonzero torsion A = -(i/4) h, a nonzero Chern-Moser
tensor, V = 0 and constant P = 1/6; the structure is pseudo-Einstein.
"""

from __future__ import annotations

import numpy as np
import sympy as sp

from ..species import ANTI, HOLO, REEB
from .chart import NC, Chart, CVec, TField, register_chart, scalar_field


def _build(with_family: bool) -> Chart:
    name = "reinhardt" if not with_family else "reinhardt[u]"
    ch = Chart(name)
    z = [ch.z(j) for j in range(NC)]
    x = [ch.xs[2 * j] for j in range(NC)]  # x^j = Re z^j
    ch.rho = 2 * (1 - sum(xj ** 2 for xj in x))
    ch.kappa = 1 / (2 * (2 - ch.rho))

    # species index a in {0,1} corresponds to coordinate j = a + 1
    ch.frame_Z = [
        CVec((-x[1] / x[0], sp.S.One, sp.S.Zero), (0, 0, 0)),
        CVec((-x[2] / x[0], sp.S.Zero, sp.S.One), (0, 0, 0)),
    ]
    ch.frame_T = CVec(tuple(sp.I * xj / 2 for xj in x),
                      tuple(-sp.I * xj / 2 for xj in x))
    ch.xi = CVec(tuple(xj / (ch.rho - 2) for xj in x), (0, 0, 0))

    H = [[(1 if a == b else 0) + x[a + 1] * x[b + 1] / x[0] ** 2 for b in range(2)]
         for a in range(2)]
    Hinv = [[(1 if a == b else 0) - 2 * x[a + 1] * x[b + 1] / (2 - ch.rho)
             for b in range(2)] for a in range(2)]
    ch.H, ch.Hinv = H, Hinv

    # omega_b^a = (1/2) x^a h_{b g}(theta^g + theta^gbar) - (i/4) theta d_b^a
    ch.conn = {}
    for mdir in range(2):
        row = [[x[a + 1] * H[b][mdir] / 2 for a in range(2)] for b in range(2)]
        ch.conn[(HOLO, mdir)] = row
        ch.conn[(ANTI, mdir)] = row
    ch.conn[(REEB,)] = [[-sp.I / 4 if a == b else sp.S.Zero for a in range(2)]
                        for b in range(2)]

    A = [[-sp.I * H[a][b] / 4 for b in range(2)] for a in range(2)]
    fields: dict[str, TField] = {}
    fields["h"] = TField((HOLO, ANTI), {(a, b): H[a][b] for a in range(2) for b in range(2)})
    fields["hinv"] = TField((HOLO, ANTI), {(a, b): Hinv[a][b] for a in range(2) for b in range(2)})
    fields["A"] = TField((HOLO, HOLO), {(a, b): A[a][b] for a in range(2) for b in range(2)})
    fields["A~"] = TField((ANTI, ANTI), {(a, b): sp.conjugate(A[a][b])
                                         for a in range(2) for b in range(2)})
    fields["R"] = TField((HOLO, ANTI, HOLO, ANTI), {
        (a, b, c, d): (H[a][b] * H[c][d] + H[c][b] * H[a][d]) / 4 - H[d][b] * H[c][a] / 4
        for a in range(2) for b in range(2) for c in range(2) for d in range(2)})
    fields["S"] = TField((HOLO, ANTI, HOLO, ANTI), {
        (a, b, c, d): (H[a][b] * H[c][d] + H[c][b] * H[a][d]) / 12 - H[a][c] * H[b][d] / 4
        for a in range(2) for b in range(2) for c in range(2) for d in range(2)})
    fields["V"] = TField((HOLO, ANTI, HOLO), {})
    fields["V~"] = TField((ANTI, HOLO, ANTI), {})
    fields["P"] = scalar_field(sp.Rational(1, 6))
    fields["Pab"] = TField((HOLO, ANTI), {(a, b): H[a][b] / 12
                                          for a in range(2) for b in range(2)})
    fields["T"] = TField((HOLO,), {})
    fields["T~"] = TField((ANTI,), {})
    if with_family:
        fields["U"] = scalar_field(z[1] + sp.conjugate(z[1]))  # 2 x^1
    ch._fields = fields
    ch.base_field = lambda s: ch._fields[s]

    # Graham-Lee data for the structure-equation checks
    ch.theta_a_forms = [_form_dz(ch, [1 if j == al + 1 else 0 for j in range(NC)])
                        + (x[al + 1] / (2 - ch.rho)) * _prho(ch) for al in range(2)]
    ch.prho_form = _prho(ch)
    ch.A_gl = [[sp.I / (2 * (2 - ch.rho)) if a == b else sp.S.Zero for a in range(2)]
               for b in range(2)]
    ch.phi_gl = [[(x[a + 1] / (2 - ch.rho))
                  * sum((H[b][g] * (ch.theta_a_forms[g] + sp.conjugate(ch.theta_a_forms[g]))
                         for g in range(2)), sp.zeros(6, 1))
                  + (sp.S.One if a == b else sp.S.Zero) / (4 * (2 - ch.rho))
                  * (ch.prho_form - sp.conjugate(ch.prho_form))
                  for a in range(2)] for b in range(2)]
    register_chart(ch)
    return ch


def _prho(ch: Chart):
    coeffs = sp.zeros(6, 1)
    for j in range(NC):
        c = ch.dz(ch.rho, j)
        coeffs[2 * j] += c
        coeffs[2 * j + 1] += sp.I * c
    return coeffs


def _form_dz(ch: Chart, dz_coeffs):
    coeffs = sp.zeros(6, 1)
    for j, c in enumerate(dz_coeffs):
        if c == 0:
            continue
        coeffs[2 * j] += c
        coeffs[2 * j + 1] += sp.I * c
    return coeffs


_CACHE: dict[bool, Chart] = {}


def reinhardt_chart(with_family: bool = False) -> Chart:
    if with_family not in _CACHE:
        _CACHE[with_family] = _build(with_family)
    return _CACHE[with_family]


def random_points(rng: np.random.Generator, count: int, min_x0: float = 0.35) -> np.ndarray:
    """Sample chart points (count, 6): coordinates (x0,y0,x1,y1,x2,y2)."""
    out = []
    while len(out) < count:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if abs(v[0]) < min_x0:
            continue
        y = rng.uniform(0.0, 2 * np.pi, size=3)
        out.append([v[0], y[0], v[1], y[1], v[2], y[2]])
    return np.array(out)


def point_from_xy(xv, yv) -> np.ndarray:
    return np.array([xv[0], yv[0], xv[1], yv[1], xv[2], yv[2]])
