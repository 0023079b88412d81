"""Symbolic chart machinery shared by the two model manifolds.

A model is described in six real ambient coordinates carrying three
complex coordinates.  Frames, connection coefficient tables and tensor
component fields are sympy expressions in the real coordinates; covariant
derivatives are computed symbolically and the results lambdified (and
cached) for numeric evaluation, including vectorized evaluation on
quadrature grids.  A finite-difference evaluator for the same covariant
derivatives lives in :mod:`crlab.models.evaluate` as the independent
cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from ..errors import EvaluationError
from ..species import ANTI, HOLO, REEB

NC = 3  # complex ambient coordinates


@dataclass
class CVec:
    """A complex vector field: coefficients of d/dz_j and d/dzbar_j."""

    dz: tuple  # length NC sympy exprs
    dzb: tuple

    def conj(self) -> "CVec":
        return CVec(tuple(sp.conjugate(c) for c in self.dzb),
                    tuple(sp.conjugate(c) for c in self.dz))


class Chart:
    """Symbolic description of one model in a fixed frame chart."""

    def __init__(self, name: str):
        self.name = name
        self.xs = sp.symbols(f"x0:6", real=True)

    # complex coordinates: z_j = xs[2j] + i xs[2j+1]
    def z(self, j: int):
        return self.xs[2 * j] + sp.I * self.xs[2 * j + 1]

    def zb(self, j: int):
        return self.xs[2 * j] - sp.I * self.xs[2 * j + 1]

    def dz(self, f, j: int):
        return (sp.diff(f, self.xs[2 * j]) - sp.I * sp.diff(f, self.xs[2 * j + 1])) / 2

    def dzb(self, f, j: int):
        return (sp.diff(f, self.xs[2 * j]) + sp.I * sp.diff(f, self.xs[2 * j + 1])) / 2

    def apply_vec(self, v: CVec, f):
        out = sp.S.Zero
        for j in range(NC):
            if v.dz[j] != 0:
                out += v.dz[j] * self.dz(f, j)
            if v.dzb[j] != 0:
                out += v.dzb[j] * self.dzb(f, j)
        return out

    # ---- populated by the concrete models --------------------------------
    # frame_Z[a]: CVec, frame_T: CVec
    # conn[dir]: 2x2 nested list, conn[dir][b][a] = omega_b^a(vec(dir)),
    #   dir in ("h",0),("h",1),("a",0),("a",1),("0",)
    # fields: species name -> (bts, comps dict)
    # plus: rho, levi (given closed form), levi_inv, sample(rng)

    def vec(self, direction) -> CVec:
        if direction[0] == HOLO:
            return self.frame_Z[direction[1]]
        if direction[0] == ANTI:
            return self.frame_Z[direction[1]].conj()
        return self.frame_T

    def conn_entry(self, direction, b: int, a: int):
        """omega_b^a evaluated on the direction vector (holomorphic block)."""
        return self.conn[direction][b][a]

    def conn_entry_bar(self, direction, b: int, a: int):
        """omega_bbar^abar on the direction vector: conjugate block."""
        if direction[0] == HOLO:
            cd = (ANTI, direction[1])
        elif direction[0] == ANTI:
            cd = (HOLO, direction[1])
        else:
            cd = direction
        return sp.conjugate(self.conn[cd][b][a])


@dataclass
class TField:
    """Tensor components in the model frame, all slots lowered."""

    bts: tuple[str, ...]
    comps: dict[tuple[int, ...], object]

    def comp(self, idx) -> object:
        return self.comps.get(tuple(idx), sp.S.Zero)


def cov_deriv(chart: Chart, fld: TField, bt: str) -> TField:
    """Covariant derivative; the new slot is prepended (outermost first).

    For ``bt`` '0' (reeb) the slot structure is unchanged.
    """
    dirs = [(bt, 0), (bt, 1)] if bt != REEB else [(REEB,)]
    out: dict[tuple[int, ...], object] = {}
    for prefix_dir in dirs:
        v = chart.vec(prefix_dir)
        for idx in itertools.product((0, 1), repeat=len(fld.bts)):
            val = chart.apply_vec(v, fld.comp(idx))
            for k, sbt in enumerate(fld.bts):
                for mu in (0, 1):
                    idx2 = idx[:k] + (mu,) + idx[k + 1:]
                    c = fld.comp(idx2)
                    if c == 0:
                        continue
                    if sbt == HOLO:
                        val -= chart.conn_entry(prefix_dir, idx[k], mu) * c
                    else:
                        val -= chart.conn_entry_bar(prefix_dir, idx[k], mu) * c
            if bt == REEB:
                out[idx] = val
            else:
                out[(prefix_dir[1],) + idx] = val
    if bt == REEB:
        return TField(fld.bts, out)
    return TField((bt,) + fld.bts, out)


def scalar_field(expr) -> TField:
    return TField((), {(): expr})


# ---------------------------------------------------------------------------
# lambdified component caches
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def decorated_field(chart_key, species_name: str, dseq: tuple[str, ...]) -> TField:
    chart = _CHARTS[chart_key]
    fld = chart.base_field(species_name)
    for bt in reversed(dseq):  # innermost derivative applied first
        fld = cov_deriv(chart, fld, bt)
    return fld


@lru_cache(maxsize=None)
def lambdified_field(chart_key, species_name: str, dseq: tuple[str, ...]):
    chart = _CHARTS[chart_key]
    fld = decorated_field(chart_key, species_name, dseq)
    shape = (2,) * len(fld.bts)
    order = list(itertools.product((0, 1), repeat=len(fld.bts)))
    exprs = [fld.comp(idx) for idx in order]
    fn = sp.lambdify(chart.xs, exprs, modules="numpy")

    def eval_at(x: np.ndarray) -> np.ndarray:
        vals = fn(*x)
        batch = np.shape(x)[1:]
        arrs = [np.broadcast_to(np.asarray(v, dtype=complex), batch) for v in vals]
        return np.array(arrs).reshape(shape + batch)

    return eval_at


_CHARTS: dict[str, Chart] = {}


def register_chart(chart: Chart) -> None:
    _CHARTS[chart.name] = chart


def get_chart(name: str) -> Chart:
    try:
        return _CHARTS[name]
    except KeyError:
        raise EvaluationError(f"unknown model {name!r}") from None
