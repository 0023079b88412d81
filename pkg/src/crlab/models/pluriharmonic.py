"""The pluriharmonic family on the sphere: closed-form pointwise bundle.

U_m = ((z1)^m + conj)/m; in the model frame the only nonzero components
are U_1 = (z1)^{m-1} and U_11 = (m-1)(z1)^{m-2}, the mixed second
derivative is U_{a bbar} = -(z1)^m h_{a bbar}, and the sublaplacian acts
by 2m on the family.
"""

from __future__ import annotations

import numpy as np


def sphere_pluriharmonic(m: int) -> dict:
    """Pointwise evaluables of the degree-m family; z1 is a complex array,
    full-chart quantities take the 6 real coordinates."""
    if m < 1:
        raise ValueError("the family needs m >= 1")

    def u(z1):
        z1 = np.asarray(z1, dtype=complex)
        return (z1 ** m + np.conj(z1) ** m) / m

    def ua(z1):
        z1 = np.asarray(z1, dtype=complex)
        out = np.zeros((2,) + z1.shape, dtype=complex)
        out[0] = z1 ** (m - 1)
        return out

    def uab(z1):
        z1 = np.asarray(z1, dtype=complex)
        out = np.zeros((2, 2) + z1.shape, dtype=complex)
        out[0, 0] = (m - 1) * (z1 ** (m - 2) if m >= 2 else 0)
        return out

    def uabbar(x):
        from .chart import lambdified_field
        x = np.asarray(x, dtype=float)
        h = lambdified_field("sphere", "h", ())(x)
        z1 = x[0] + 1j * x[1]
        return -(z1 ** m) * h

    def ua_ua(z1):
        t = np.abs(np.asarray(z1, dtype=complex)) ** 2
        return (1 - t) * t ** (m - 1)

    def uab_uab(z1):
        t = np.abs(np.asarray(z1, dtype=complex)) ** 2
        return (m - 1) ** 2 * (1 - t) ** 2 * (t ** (m - 2) if m >= 2 else np.zeros_like(t))

    return {
        "m": m,
        "U": u,
        "Ua": ua,
        "Uab": uab,
        "Uabbar": uabbar,
        "DbU": lambda z1: 2 * m * u(z1),
        "Db2U": lambda z1: 4 * m ** 2 * u(z1),
        "UaUa": ua_ua,
        "UabUab": uab_uab,
    }
