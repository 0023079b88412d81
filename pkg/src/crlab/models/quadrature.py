"""Product quadrature on the two model manifolds.

Sphere: Gauss-Legendre in the four compact polar angles, uniform nodes in
the periodic angle, with the polar volume element; integrands are given
either as vectorized functions of z^1 (every integrand in scope descends
to one) or as expressions evaluated on batched ambient points.  Reinhardt:
Gauss-Legendre x uniform on the x-sphere parameters, the torus directions
integrating exactly by translation invariance; the volume density is the
numeric pullback of theta ^ (d theta)^2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError


@dataclass(frozen=True)
class QuadratureSpec:
    n_compact: int = 48
    n_periodic: int = 48
    tol: float = 1e-6


def gauss_legendre(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return (b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w


class SphereQuadrature:
    """Polar-coordinate quadrature on S^5 with dV = sin^4 sin^3 sin^2 sin."""

    def __init__(self, spec: QuadratureSpec = QuadratureSpec()):
        self.spec = spec
        n = spec.n_compact
        self.t_nodes, self.t_weights = zip(*[gauss_legendre(n, 0.0, np.pi) for _ in range(4)])
        m = spec.n_periodic
        self.p_nodes = np.arange(m) * 2 * np.pi / m
        self.p_weight = 2 * np.pi / m
        s = [np.sin(t) for t in self.t_nodes]
        c = [np.cos(t) for t in self.t_nodes]
        jac = [s[0] ** 4, s[1] ** 3, s[2] ** 2, s[3]]
        w4 = [w * j for w, j in zip(self.t_weights, jac)]
        # flattened 4d grids of |z1| = s1 s2 s3 s4 and of the weights
        self.s4 = (s[0][:, None, None, None] * s[1][None, :, None, None]
                   * s[2][None, None, :, None] * s[3][None, None, None, :]).ravel()
        self.w4 = (w4[0][:, None, None, None] * w4[1][None, :, None, None]
                   * w4[2][None, None, :, None] * w4[3][None, None, None, :]).ravel()
        self._sc = (s, c)

    def volume(self) -> float:
        return float(np.sum(self.w4) * 2 * np.pi)

    def integrate_z1(self, fn) -> complex:
        """Integrate a vectorized function of z^1 over the sphere."""
        v0 = np.asarray(fn(self.s4 * np.exp(1j * self.p_nodes[0])))
        v1 = np.asarray(fn(self.s4 * np.exp(1j * self.p_nodes[min(1, len(self.p_nodes) - 1)])))
        scale = max(1.0, float(np.max(np.abs(v0))))
        if float(np.max(np.abs(v0 - v1))) < 1e-13 * scale:
            return complex(np.sum(self.w4 * v0) * 2 * np.pi)
        total = np.sum(self.w4 * v0) * self.p_weight
        for p in self.p_nodes[1:]:
            total += np.sum(self.w4 * np.asarray(fn(self.s4 * np.exp(1j * p)))) * self.p_weight
        return complex(total)

    def radial_moment(self, fn) -> complex:
        """Integral over the four compact angles of a function of |z1|."""
        return complex(np.sum(self.w4 * np.asarray(fn(self.s4))))

    def periodic_moment(self, fn) -> complex:
        """Quadrature sum over the periodic angle."""
        return complex(np.sum(self.p_weight * np.asarray(fn(self.p_nodes))))

    def grid_points(self):
        """Ambient coordinate batches (6, N) with weights, one periodic node
        at a time (memory-bounded); ordering of coordinates: the last two
        polar coordinates are Re z1, Im z1."""
        s, c = self._sc
        x1 = c[0][:, None, None, None]
        x2 = (s[0][:, None, None, None] * c[1][None, :, None, None])
        x3 = (s[0][:, None, None, None] * s[1][None, :, None, None] * c[2][None, None, :, None])
        x4 = (s[0][:, None, None, None] * s[1][None, :, None, None]
              * s[2][None, None, :, None] * c[3][None, None, None, :])
        shape = tuple(len(t) for t in self.t_nodes)
        x1, x2, x3, x4 = (np.broadcast_to(a, shape).ravel() for a in (x1, x2, x3, x4))
        r = self.s4
        for p in self.p_nodes:
            x5 = r * np.cos(p)
            x6 = r * np.sin(p)
            # chart coordinates (z1, z2, w) = (x5 + i x6, x3 + i x4, x1 + i x2)
            pts = np.stack([x5, x6, x3, x4, x1, x2])
            yield pts, self.w4 * self.p_weight

    def integrate_points(self, fn) -> complex:
        total = 0.0 + 0.0j
        for pts, w in self.grid_points():
            total += complex(np.sum(w * np.asarray(fn(pts))))
        return total


class ReinhardtQuadrature:
    """Quadrature on the Reinhardt hypersurface against theta ^ (d theta)^2.

    Every integrand in scope is independent of the torus coordinates, so
    the y-integral contributes (2 pi)^3 exactly; the (u, v) sphere factor
    carries the pulled-back 5-form density.
    """

    def __init__(self, spec: QuadratureSpec = QuadratureSpec()):
        self.spec = spec
        self.u_nodes, self.u_weights = gauss_legendre(spec.n_compact, 0.0, np.pi)
        m = spec.n_periodic
        self.v_nodes = np.arange(m) * 2 * np.pi / m
        self.v_weight = 2 * np.pi / m
        uu, vv = np.meshgrid(self.u_nodes, self.v_nodes, indexing="ij")
        ww = np.outer(self.u_weights, np.full(m, self.v_weight))
        self.x = np.stack([np.cos(uu).ravel(), (np.sin(uu) * np.cos(vv)).ravel(),
                           (np.sin(uu) * np.sin(vv)).ravel()])
        self.w_uv = ww.ravel()
        self.density = self._pullback_density(uu.ravel(), vv.ravel())
        if np.min(self.density) <= 0:
            if np.max(self.density) < 0:
                self.density = -self.density  # orientation flip
            else:
                raise EvaluationError("volume density changes sign on the grid")

    @staticmethod
    def _pullback_density(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """theta ^ (d theta)^2 on (du, dv, dy0, dy1, dy2), coordinates
        ordered (x0, y0, x1, y1, x2, y2)."""
        n = len(u)
        x = np.stack([np.cos(u), np.sin(u) * np.cos(v), np.sin(u) * np.sin(v)], axis=1)
        du = np.stack([-np.sin(u), np.cos(u) * np.cos(v), np.cos(u) * np.sin(v)], axis=1)
        dv = np.stack([np.zeros(n), -np.sin(u) * np.sin(v), np.sin(u) * np.cos(v)], axis=1)
        tangents = np.zeros((n, 5, 6))
        for j in range(3):
            tangents[:, 0, 2 * j] = du[:, j]
            tangents[:, 1, 2 * j] = dv[:, j]
            tangents[:, 2 + j, 2 * j + 1] = 1.0
        theta = np.zeros((n, 6))
        for j in range(3):
            theta[:, 2 * j + 1] = 2 * x[:, j]
        dtheta = np.zeros((6, 6))
        for j in range(3):
            dtheta[2 * j, 2 * j + 1] = 2.0
            dtheta[2 * j + 1, 2 * j] = -2.0
        th_v = np.einsum("nk,nak->na", theta, tangents)
        dt_vv = np.einsum("jk,naj,nbk->nab", dtheta, tangents, tangents)
        dens = np.zeros(n)
        for perm in itertools.permutations(range(5)):
            sgn = _perm_sign(perm)
            dens += (sgn * th_v[:, perm[0]] * dt_vv[:, perm[1], perm[2]]
                     * dt_vv[:, perm[3], perm[4]])
        return dens / 4.0  # 1! 2! 2!

    def volume(self) -> float:
        return float(np.sum(self.w_uv * self.density) * (2 * np.pi) ** 3)

    def integrate_x(self, fn) -> complex:
        """Integrate a vectorized torus-invariant function of x."""
        vals = np.asarray(fn(self.x))
        return complex(np.sum(self.w_uv * self.density * vals) * (2 * np.pi) ** 3)

    def grid_points(self):
        pts = np.zeros((6, self.x.shape[1]))
        pts[0] = self.x[0]
        pts[2] = self.x[1]
        pts[4] = self.x[2]
        yield pts, self.w_uv * self.density * (2 * np.pi) ** 3

    def integrate_points(self, fn) -> complex:
        total = 0.0 + 0.0j
        for pts, w in self.grid_points():
            total += complex(np.sum(w * np.asarray(fn(pts))))
        return total


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign
