"""Rewrite rules of pseudo-Einstein pseudo-hermitian geometry, n = 2.

* ``substitute_pseudo_einstein`` -- curvature in terms of the trace-free
  part and the scalar Schouten function; torsion divergence and the
  antiholomorphic torsion derivative in terms of V; Schouten tensor and
  T in terms of P.  Output species: S, V, V~, A, A~, P, h, hinv, grad.
* ``ricci_commute`` -- commutation of an adjacent outermost pair of
  covariant derivatives of opposite bartype, with curvature action and
  the Levi-form times reeb-derivative term.
* ``eliminate_reeb`` -- removal of reeb derivatives valid modulo
  divergences: the torsion instance and the scalar commutator trick for
  diagonal-weight scalars.
"""

from __future__ import annotations

from functools import lru_cache

from .algebra import GaussRat, ONE, rat
from .errors import RewriteError
from .expr import Factor, Mono, Slot, TExpr, conj_parts, sublaplacian
from .parser import parse_expression
from .species import ANTI, HOLO, REEB, species

I = GaussRat.of(0, 1)
MI = GaussRat.of(0, -1)


def replace_factor(m: Mono, fi: int, repl: list[Factor], wiring: dict[int, Slot],
                   internal_pairs=()):
    """Raw parts of ``m`` with factor ``fi`` replaced by ``repl``.

    ``wiring`` maps old slot indices of factor ``fi`` to (local factor,
    local slot); ``internal_pairs`` are extra contractions among the new
    factors, holomorphic side first, in local addressing.
    """
    nrep = len(repl)

    def mv(slot: Slot) -> Slot:
        f, s = slot
        if f < fi:
            return slot
        if f == fi:
            k, ls = wiring[s]
            return (fi + k, ls)
        return (f + nrep - 1, s)

    factors = m.factors[:fi] + tuple(repl) + m.factors[fi + 1:]
    pairs = [(mv(u), mv(v)) for u, v in m.pairs]
    pairs += [((fi + k1, s1), (fi + k2, s2)) for (k1, s1), (k2, s2) in internal_pairs]
    free = [(mv(s), lab, r) for s, lab, r in m.free]
    return factors, pairs, free


def _one_mono_expr(m: Mono) -> TExpr:
    e = TExpr()
    e.add_mono(ONE, m)
    return e


def _conj_route(m: Mono, rule) -> TExpr | None:
    """Apply ``rule`` to the conjugate monomial and conjugate back."""
    cf, cp, cfree = conj_parts(m)
    tmp = TExpr()
    tmp.add_raw(ONE, cf, cp, cfree)
    out = TExpr()
    for mm, cc in tmp.terms.items():
        r = rule(mm)
        if r is None:
            return None
        for m2, c2 in r.terms.items():
            out.add_mono(cc * c2, m2)
    return out.conj()


# ---------------------------------------------------------------------------
# pseudo-Einstein substitution
# ---------------------------------------------------------------------------

def _pe_step(m: Mono) -> TExpr | None:
    for fi, f in enumerate(m.factors):
        nd = len(f.dslots)
        if f.species == "R":
            out = TExpr()
            # trace-free part, same derivative prefix
            wiring = {k: (0, k) for k in range(nd + 4)}
            out.add_raw(ONE, *replace_factor(m, fi, [Factor("S", f.dslots)], wiring))
            # P (h h + h h); derivatives fall on P alone
            base = {k: (0, k) for k in range(nd)}
            w1 = dict(base)
            w1.update({nd: (1, 0), nd + 1: (1, 1), nd + 2: (2, 0), nd + 3: (2, 1)})
            out.add_raw(ONE, *replace_factor(
                m, fi, [Factor("P", f.dslots), Factor("h"), Factor("h")], w1))
            w2 = dict(base)
            w2.update({nd + 2: (1, 0), nd + 1: (1, 1), nd: (2, 0), nd + 3: (2, 1)})
            out.add_raw(ONE, *replace_factor(
                m, fi, [Factor("P", f.dslots), Factor("h"), Factor("h")], w2))
            return out
        if f.species == "Pab":
            # Schouten tensor of a pseudo-Einstein structure: (P/2) h
            wiring = {k: (0, k) for k in range(nd)}
            wiring.update({nd: (1, 0), nd + 1: (1, 1)})
            out = TExpr()
            out.add_raw(rat(1, 2), *replace_factor(
                m, fi, [Factor("P", f.dslots), Factor("h")], wiring))
            return out
        if f.species in ("T", "T~"):
            bt = HOLO if f.species == "T" else ANTI
            wiring = {k: (0, k) for k in range(nd)}
            wiring[nd] = (0, nd)
            out = TExpr()
            out.add_raw(rat(-1, 2), *replace_factor(
                m, fi, [Factor("P", f.dslots + (bt,))], wiring))
            return out
        if f.species == "A" and nd and f.dslots[-1] == ANTI:
            # grad_bbar A_ag = V_abbar g - i(grad_a P) h_gbbar - i(grad_g P) h_abbar
            out = TExpr()
            outer = {k: (0, k) for k in range(nd - 1)}
            w_v = dict(outer)
            w_v.update({nd + 0: (0, nd - 1), nd - 1: (0, nd), nd + 1: (0, nd + 1)})
            out.add_raw(ONE, *replace_factor(m, fi, [Factor("V", f.dslots[:-1])], w_v))
            w_p1 = dict(outer)
            w_p1.update({nd + 0: (0, nd - 1), nd + 1: (1, 0), nd - 1: (1, 1)})
            out.add_raw(MI, *replace_factor(
                m, fi, [Factor("P", f.dslots[:-1] + (HOLO,)), Factor("h")], w_p1))
            w_p2 = dict(outer)
            w_p2.update({nd + 1: (0, nd - 1), nd + 0: (1, 0), nd - 1: (1, 1)})
            out.add_raw(MI, *replace_factor(
                m, fi, [Factor("P", f.dslots[:-1] + (HOLO,)), Factor("h")], w_p2))
            return out
        if f.species == "A~" and nd and f.dslots[-1] == HOLO:
            return _conj_route(m, _pe_step)
    return None


def substitute_pseudo_einstein(e: TExpr) -> TExpr:
    cur = e
    while True:
        out = TExpr()
        changed = False
        for m, c in cur.terms.items():
            r = _pe_step(m)
            if r is None:
                out.add_mono(c, m)
            else:
                changed = True
                for mm, cc in r.terms.items():
                    out.add_mono(c * cc, mm)
        cur = out
        if not changed:
            return cur


# ---------------------------------------------------------------------------
# Ricci commutation
# ---------------------------------------------------------------------------

def ricci_commute_mono(m: Mono, fi: int) -> TExpr:
    """Rewrite of ``m`` with the outermost derivative pair of factor ``fi``
    commuted; the pair must have opposite bartypes.  Returns an expression
    equal to ``m`` as a tensor identity."""
    f = m.factors[fi]
    if len(f.dslots) < 2:
        raise RewriteError("factor carries fewer than two derivative slots")
    d0, d1 = f.dslots[0], f.dslots[1]
    if {d0, d1} != {HOLO, ANTI}:
        raise RewriteError(
            f"unsupported commutation of derivative bartypes ({d0},{d1})")
    sign = ONE if d0 == HOLO else GaussRat.of(-1)
    # slots of the underlying tensor B (inner derivatives + species slots)
    nd = len(f.dslots)
    a_slot, b_slot = (0, 1) if d0 == HOLO else (1, 0)  # holomorphic, antiholomorphic

    out = TExpr()
    # swapped-order term
    swapped = Factor(f.species, (d1, d0) + f.dslots[2:])
    wiring = {k: (0, k) for k in range(nd + species(f.species).arity)}
    wiring[0], wiring[1] = (0, 1), (0, 0)
    out.add_raw(ONE, *replace_factor(m, fi, [swapped], wiring))

    inner = Factor(f.species, f.dslots[2:])
    arity = species(f.species).arity
    b_slots = [k for k in range(2, nd + arity)]
    for t in b_slots:
        bt = f.dslots[t] if t < nd else species(f.species).bts[t - nd]
        if bt == REEB:
            continue
        wiring = {k: (0, k - 2) for k in b_slots}
        if bt == HOLO:
            # -R_t^nu_{a bbar} B_nu
            wiring[t] = (1, 0)
            wiring[a_slot] = (1, 2)
            wiring[b_slot] = (1, 3)
            coeff = sign * GaussRat.of(-1)
            ip = [((0, t - 2), (1, 1))]
        else:
            # +R_nu^t_{a bbar} B^nu
            wiring[t] = (1, 1)
            wiring[a_slot] = (1, 2)
            wiring[b_slot] = (1, 3)
            coeff = sign
            ip = [((1, 0), (0, t - 2))]
        out.add_raw(coeff, *replace_factor(
            m, fi, [inner, Factor("R")], wiring, internal_pairs=ip))

    # -i h_{a bbar} grad_0 B
    reeb = Factor(f.species, (REEB,) + f.dslots[2:])
    wiring = {k: (0, k - 1) for k in b_slots}
    wiring[a_slot] = (1, 0)
    wiring[b_slot] = (1, 1)
    out.add_raw(sign * MI, *replace_factor(m, fi, [reeb, Factor("h")], wiring))
    return out


def ricci_commute(e: TExpr, factor: int, pair: tuple[int, int] = (0, 1)) -> TExpr:
    """Commute the outermost adjacent derivative pair of one factor in every
    term.  Only the outermost pair is supported; anything else is reported."""
    if tuple(pair) != (0, 1):
        raise RewriteError("only the outermost adjacent derivative pair is supported")
    out = TExpr()
    for m, c in e.terms.items():
        r = ricci_commute_mono(m, factor)
        for mm, cc in r.terms.items():
            out.add_mono(c * cc, mm)
    return out


# ---------------------------------------------------------------------------
# reeb elimination (valid modulo divergences, pseudo-Einstein)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _torsion_reeb_rhs() -> TExpr:
    """RHS of the identity for i (grad_0 A)_{ab} A^{ab} modulo divergences."""
    r_scalar = parse_expression("R[_a,^a,_b,^b]")
    t1 = (r_scalar * sublaplacian(r_scalar)).scale(rat(-1, 8))
    t2 = parse_expression("D[_g!](A[_a,_b]) * D[^g!](A~[^a,^b])")
    t3 = parse_expression("R[_a,_b!,_c,_d!] * A~[^a,^c] * A[^b!,^d!]")
    t4 = (r_scalar * parse_expression("A[_c,_d] * A~[^c,^d]")).scale(rat(-1, 2))
    return t1 + t2 + t3 + t4


def _match_torsion_reeb(m: Mono) -> GaussRat | None:
    """Match c*(grad_0 A)_{ab} A^{ab}; returns the factor to multiply the RHS
    by (so that the monomial equals it), or None."""
    if len(m.factors) != 2 or m.free:
        return None
    fa, fb = m.factors
    if fa.species == "A" and fa.dslots == (REEB,) and fb == Factor("A~", ()):
        # i X = RHS  =>  X = -i RHS
        return MI
    return None


def _eliminate_mono(m: Mono, depth: int = 0) -> TExpr:
    reeb_factors = [fi for fi, f in enumerate(m.factors) if REEB in f.dslots]
    if not reeb_factors:
        return _one_mono_expr(m)
    if depth > 4:
        raise RewriteError(f"unhandled reeb pattern (cycle): {m}")
    if len(reeb_factors) > 1:
        raise RewriteError(f"unhandled reeb pattern (two reeb factors): {m}")
    fi = reeb_factors[0]
    if m.factors[fi].dslots[0] != REEB:
        raise RewriteError(f"unhandled reeb pattern (inner reeb derivative): {m}")

    k = _match_torsion_reeb(m)
    if k is not None:
        return _torsion_reeb_rhs().scale(k)
    cj = _conj_route(m, lambda mm: (_torsion_reeb_rhs().scale(kk)
                                    if (kk := _match_torsion_reeb(mm)) is not None else None))
    if cj is not None:
        return cj

    # scalar move: sum_j (grad_0 on factor j) == grad_0(full scalar) == 0 mod div
    if m.free:
        raise RewriteError(f"unhandled reeb pattern (free indices): {m}")
    f = m.factors[fi]
    stripped = Factor(f.species, f.dslots[1:])
    wiring = {k2: (0, k2 - 1) for k2 in range(1, len(f.dslots) + species(f.species).arity)}
    base_parts = replace_factor(m, fi, [stripped], wiring)
    base = TExpr()
    base.add_raw(ONE, *base_parts)
    if len(base.terms) != 1:
        raise RewriteError(f"unhandled reeb pattern: {m}")
    (base_mono,) = base.terms
    moved: list[Mono] = []
    for fj, fj_fac in enumerate(base_mono.factors):
        if species(fj_fac.species).parallel:
            continue
        w2 = {k2: (0, k2 + 1) for k2 in
              range(len(fj_fac.dslots) + species(fj_fac.species).arity)}
        with_reeb = Factor(fj_fac.species, (REEB,) + fj_fac.dslots)
        tmp = TExpr()
        tmp.add_raw(ONE, *replace_factor(base_mono, fj, [with_reeb], w2))
        if len(tmp.terms) != 1:
            raise RewriteError(f"unhandled reeb pattern: {m}")
        moved.append(next(iter(tmp.terms)))

    self_count = sum(1 for mm in moved if mm == m)
    others = [mm for mm in moved if mm != m]
    if self_count == 0:
        raise RewriteError(f"unhandled reeb pattern (lost self term): {m}")
    out = TExpr()
    scale = rat(-1, self_count)
    for mm in others:
        sub = _eliminate_mono(mm, depth + 1)
        for m2, c2 in sub.terms.items():
            out.add_mono(scale * c2, m2)
    return out


def eliminate_reeb(e: TExpr) -> TExpr:
    out = TExpr()
    for m, c in e.terms.items():
        r = _eliminate_mono(m)
        for mm, cc in r.terms.items():
            out.add_mono(c * cc, mm)
    return out


def reduce_pseudo_einstein(e: TExpr) -> TExpr:
    """Full reduction: pseudo-Einstein substitution and reeb elimination."""
    cur = substitute_pseudo_einstein(e)
    cur = eliminate_reeb(cur)
    cur = substitute_pseudo_einstein(cur)
    return cur


# ---------------------------------------------------------------------------
# machine-readable rule catalog
# ---------------------------------------------------------------------------

RULESET = [
    {
        "name": "curvature-split",
        "lhs": "R[_a,_b!,_c,_d!]",
        "rhs": "S[_a,_b!,_c,_d!] + P * h[_a,_b!] * h[_c,_d!] + P * h[_c,_b!] * h[_a,_d!]",
        "validity": "pseudo-einstein-only",
    },
    {
        "name": "schouten-tensor",
        "lhs": "Pab[_a,_b!]",
        "rhs": "1/2 P * h[_a,_b!]",
        "validity": "pseudo-einstein-only",
    },
    {
        "name": "torsion-divergence",
        "lhs": "A[_a,^b]  (derivative contracted with own slot)",
        "rhs": "-3i D[_a](P)",
        "validity": "pseudo-einstein-only",
    },
    {
        "name": "torsion-antiholomorphic-derivative",
        "lhs": "D[_b!](A[_a,_c])",
        "rhs": "V[_a,_b!,_c] - i D[_a](P) * h[_c,_b!] - i D[_c](P) * h[_a,_b!]",
        "validity": "pseudo-einstein-only",
    },
    {
        "name": "t-vector",
        "lhs": "T[_a]",
        "rhs": "-1/2 D[_a](P)",
        "validity": "pseudo-einstein-only",
    },
    {
        "name": "ricci-commutation",
        "lhs": "D[_a](D[_b!](B...)) - D[_b!](D[_a](B...))",
        "rhs": "curvature action - i h[_a,_b!] D[_0](B...)",
        "validity": "always",
    },
    {
        "name": "reeb-torsion",
        "lhs": "i D[_0](A[_a,_b]) * A~[^a,^b]",
        "rhs": "-1/8 R DeltaR + |grad A|^2 + R A A - 1/2 R |A|^2",
        "validity": "mod-divergence-only",
    },
    {
        "name": "reeb-scalar",
        "lhs": "D[_0](scalar of weight (-2,-2))",
        "rhs": "0",
        "validity": "mod-divergence-only",
    },
]
