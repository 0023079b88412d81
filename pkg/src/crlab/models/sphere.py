"""The CR sphere S^5 in the chart w != 0.

Ambient complex coordinates (z1, z2, w); defining function
rho = 1 - |z1|^2 - |z2|^2 - |w|^2.  All fields are the explicit closed
formulas of this geometry: vanishing torsion, curvature h#h + h#h,
scalar Schouten function 1, vanishing Chern-Moser tensor.
"""

from __future__ import annotations

import numpy as np
import sympy as sp

from ..species import ANTI, HOLO, REEB
from .chart import NC, Chart, CVec, TField, register_chart, scalar_field


def _build(m_family: int | None = None) -> Chart:
    name = "sphere" if m_family is None else f"sphere[m{m_family}]"
    ch = Chart(name)
    z = [ch.z(j) for j in range(NC)]
    zb = [ch.zb(j) for j in range(NC)]
    z1, z2, w = z
    ch.rho = 1 - sum(zj * zbj for zj, zbj in zip(z, zb))
    ch.kappa = 1 / (1 - ch.rho)

    # Graham-Lee frame and Reeb vector
    ch.frame_Z = [
        CVec((sp.S.One, sp.S.Zero, -zb[0] / zb[2]), (0, 0, 0)),
        CVec((sp.S.Zero, sp.S.One, -zb[1] / zb[2]), (0, 0, 0)),
    ]
    ch.frame_T = CVec(tuple(sp.I * zj for zj in z), tuple(-sp.I * zbj for zbj in zb))
    ch.xi = CVec(tuple(zj / (ch.rho - 1) for zj in z), (0, 0, 0))

    H = [[(1 if a == b else 0) + zb[a] * z[b] / (w * zb[2]) for b in range(2)]
         for a in range(2)]
    Hinv = [[(1 if a == b else 0) - z[a] * zb[b] / (1 - ch.rho) for b in range(2)]
            for a in range(2)]
    ch.H, ch.Hinv = H, Hinv

    # Tanaka-Webster connection on M: omega_b^a = z^a h_{b g} theta^gbar - i theta d_b^a
    ch.conn = {}
    for mdir in range(2):
        ch.conn[(HOLO, mdir)] = [[sp.S.Zero for _ in range(2)] for _ in range(2)]
        ch.conn[(ANTI, mdir)] = [[z[a] * H[b][mdir] for a in range(2)] for b in range(2)]
    ch.conn[(REEB,)] = [[-sp.I if a == b else sp.S.Zero for a in range(2)]
                        for b in range(2)]

    zero2 = {(): sp.S.Zero}
    fields: dict[str, TField] = {}
    fields["h"] = TField((HOLO, ANTI), {(a, b): H[a][b] for a in range(2) for b in range(2)})
    fields["hinv"] = TField((HOLO, ANTI), {(a, b): Hinv[a][b] for a in range(2) for b in range(2)})
    fields["A"] = TField((HOLO, HOLO), {})
    fields["A~"] = TField((ANTI, ANTI), {})
    fields["R"] = TField((HOLO, ANTI, HOLO, ANTI), {
        (a, b, c, d): H[a][b] * H[c][d] + H[c][b] * H[a][d]
        for a in range(2) for b in range(2) for c in range(2) for d in range(2)})
    fields["S"] = TField((HOLO, ANTI, HOLO, ANTI), {})
    fields["V"] = TField((HOLO, ANTI, HOLO), {})
    fields["V~"] = TField((ANTI, HOLO, ANTI), {})
    fields["P"] = scalar_field(sp.S.One)
    fields["Pab"] = TField((HOLO, ANTI), {(a, b): H[a][b] / 2 for a in range(2) for b in range(2)})
    fields["T"] = TField((HOLO,), {})
    fields["T~"] = TField((ANTI,), {})
    if m_family is not None:
        fields["U"] = scalar_field((z1 ** m_family + zb[0] ** m_family) / m_family)
    ch._fields = fields
    ch.base_field = lambda s: ch._fields[s]
    ch.m_family = m_family

    # Graham-Lee data for the structure-equation checks
    ch.theta_a_forms = [_form_dz(ch, [1 if j == al else 0 for j in range(NC)])
                        + (z[al] / (1 - ch.rho)) * _prho(ch) for al in range(2)]
    ch.prho_form = _prho(ch)
    ch.A_gl = [[sp.S.Zero for _ in range(2)] for _ in range(2)]
    ch.phi_gl = [[(z[a] / (1 - ch.rho)) * sum((H[b][g] * sp.conjugate(ch.theta_a_forms[g])
                                               for g in range(2)), sp.zeros(6, 1))
                  + (sp.S.One if a == b else sp.S.Zero) / (2 * (1 - ch.rho))
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


_CACHE: dict[int | None, Chart] = {}


def sphere_chart(m_family: int | None = None) -> Chart:
    if m_family not in _CACHE:
        _CACHE[m_family] = _build(m_family)
    return _CACHE[m_family]


def random_points(rng: np.random.Generator, count: int, min_w: float = 0.35) -> np.ndarray:
    """Sample chart points; returns an array (count, 6) of real coordinates."""
    out = []
    while len(out) < count:
        v = rng.normal(size=6)
        v /= np.linalg.norm(v)
        if abs(complex(v[4], v[5])) < min_w:
            continue
        out.append(v)
    return np.array(out)


def point_from_ambient(z1: complex, z2: complex, w: complex) -> np.ndarray:
    return np.array([z1.real, z1.imag, z2.real, z2.imag, w.real, w.imag])
