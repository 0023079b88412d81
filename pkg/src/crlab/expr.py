"""Abstract-index tensor expressions and their canonical forms.

Internal representation of a monomial:

* ``factors`` -- tuple of ``(species_name, dslots)``; ``dslots`` is the
  covariant-derivative prefix, outermost first, entries 'h'/'a'/'0'.
* slots of a factor are addressed ``(fi, si)`` with the derivative slots
  first, then the species slots in the all-lowered convention.
* ``pairs`` -- contractions; each pair joins a holomorphic slot with an
  antiholomorphic slot and stands for one insertion of the inverse Levi
  form.  Explicit ``hinv`` factors are absorbed into pairs at parse time.
* ``free`` -- markers ``(slot, label, raised)``; a raised marker stands
  for one more inverse Levi form and flips the effective bartype.

Canonicalization minimizes a string encoding over factor reorderings,
declared slot symmetries and (for scalar factors) permutations of
consecutive same-bartype derivative slots, then renames contraction
pairs in scan order.  All declared symmetries here have sign +1.
"""

from __future__ import annotations

import itertools
from typing import Iterable, NamedTuple

from .algebra import GaussRat, ONE, ZERO
from .errors import IndexUsageError, WeightMismatchError
from .species import ANTI, HOLO, NDIM, REEB, SPECIES, flip, species


class Factor(NamedTuple):
    species: str
    dslots: tuple[str, ...] = ()


Slot = tuple[int, int]


class Mono(NamedTuple):
    factors: tuple[Factor, ...]
    pairs: tuple[tuple[Slot, Slot], ...]  # (holomorphic slot, antiholomorphic slot)
    free: tuple[tuple[Slot, str, bool], ...]  # (slot, label, raised)


def nslots(f: Factor) -> int:
    return len(f.dslots) + species(f.species).arity


def slot_bt(factors: tuple[Factor, ...], slot: Slot) -> str:
    f = factors[slot[0]]
    nd = len(f.dslots)
    if slot[1] < nd:
        return f.dslots[slot[1]]
    return species(f.species).bts[slot[1] - nd]


def eff_free_index(factors: tuple[Factor, ...], slot: Slot, label: str, raised: bool):
    """Effective (label, bartype, position) of a free slot as written."""
    sp = species(factors[slot[0]].species)
    bt = slot_bt(factors, slot)
    if sp.native_upper:
        return (label, bt, "up")
    if raised:
        return (label, flip(bt), "up")
    return (label, bt, "lo")


def mono_weight(m: Mono) -> int:
    w = sum(species(f.species).weight for f in m.factors)
    w -= len(m.pairs)
    w -= sum(1 for f in m.factors for d in f.dslots if d == REEB)
    for slot, _label, raised in m.free:
        if raised and not species(m.factors[slot[0]].species).native_upper:
            w -= 1
    return w


# ---------------------------------------------------------------------------
# normalization: Levi-form absorption, trace annihilation
# ---------------------------------------------------------------------------

def normalize(coeff: GaussRat, factors, pairs, free):
    """Apply the n=2 metric plumbing; returns (coeff, Mono) or (ZERO, None).

    ``factors``/``pairs``/``free`` may be lists; slots refer to positions in
    ``factors``.  Eliminates every ``h`` factor with a contracted slot,
    multiplies self-contracted Levi forms out to the trace value 2, and
    kills declared trace-free self-contractions.
    """
    factors = list(factors)
    pairmap: dict[Slot, Slot] = {}
    for u, v in pairs:
        pairmap[u] = v
        pairmap[v] = u
    freemap: dict[Slot, tuple[str, bool]] = {slot: (lab, r) for slot, lab, r in free}

    def is_h_side(slot: Slot) -> bool:
        return slot_bt(tuple(factors), slot) == HOLO

    changed = True
    while changed:
        changed = False
        ftup = tuple(factors)
        # derivative of a parallel factor vanishes
        for f in factors:
            if species(f.species).parallel and f.dslots:
                return ZERO, None
        # trace-free self contractions
        for u, v in list(pairmap.items()):
            if u > v:
                continue
            if u[0] == v[0]:
                f = factors[u[0]]
                nd = len(f.dslots)
                if u[1] >= nd and v[1] >= nd and species(f.species).selftrace_zero:
                    return ZERO, None
        # eliminate one contracted Levi form, then rescan
        for fi, f in enumerate(factors):
            if f.species != "h":
                continue
            s0, s1 = (fi, 0), (fi, 1)
            if s0 in freemap and s1 in freemap:
                continue
            if pairmap.get(s0) == s1:
                coeff = coeff * GaussRat.of(NDIM)
                del pairmap[s0], pairmap[s1]
            elif s0 in pairmap and s1 in pairmap:
                p, q = pairmap[s0], pairmap[s1]
                del pairmap[s0], pairmap[s1], pairmap[p], pairmap[q]
                pairmap[q] = p
                pairmap[p] = q
            elif s0 in pairmap:
                p = pairmap[s0]
                del pairmap[s0], pairmap[p]
                freemap[p] = freemap.pop(s1)
            else:
                q = pairmap[s1]
                del pairmap[s1], pairmap[q]
                freemap[q] = freemap.pop(s0)
            # drop factor fi, shift slot addresses
            del factors[fi]

            def shift(slot: Slot) -> Slot:
                return (slot[0] - 1, slot[1]) if slot[0] > fi else slot

            pairmap = {shift(a): shift(b) for a, b in pairmap.items()}
            freemap = {shift(a): v for a, v in freemap.items()}
            changed = True
            break

    ftup = tuple(factors)
    out_pairs = []
    seen = set()
    for u, v in pairmap.items():
        if u in seen:
            continue
        seen.add(u)
        seen.add(v)
        if is_h_side(u):
            out_pairs.append((u, v))
        else:
            out_pairs.append((v, u))
    out_free = tuple(sorted((slot, lab, r) for slot, (lab, r) in freemap.items()))
    return coeff, Mono(ftup, tuple(sorted(out_pairs)), out_free)


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------

_ARR_CACHE: dict[tuple[str, tuple[str, ...]], tuple[tuple[int, ...], ...]] = {}
_CANON_CACHE: dict[Mono, Mono] = {}


def _arrangements(f: Factor) -> tuple[tuple[int, ...], ...]:
    """Slot permutations (new position -> old position) allowed for a factor."""
    key = (f.species, f.dslots)
    got = _ARR_CACHE.get(key)
    if got is not None:
        return got
    sp = species(f.species)
    nd = len(f.dslots)
    if sp.arity > 0:
        arrs = tuple(
            tuple(range(nd)) + tuple(nd + g[k] for k in range(sp.arity)) for g in sp.sym
        )
    else:
        # scalar factor: consecutive same-bartype covariant derivatives commute
        runs = []
        i = 0
        while i < nd:
            j = i
            while j < nd and f.dslots[j] == f.dslots[i]:
                j += 1
            runs.append(list(range(i, j)))
            i = j
        per_run = [list(itertools.permutations(r)) for r in runs]
        arrs = tuple(
            tuple(itertools.chain.from_iterable(combo))
            for combo in itertools.product(*per_run)
        ) or (tuple(),)
    _ARR_CACHE[key] = arrs
    return arrs


def canonical(m: Mono) -> Mono:
    got = _CANON_CACHE.get(m)
    if got is not None:
        return got
    nf = len(m.factors)
    pairmap: dict[Slot, Slot] = {}
    for u, v in m.pairs:
        pairmap[u] = v
        pairmap[v] = u
    freemap = {slot: (lab, r) for slot, lab, r in m.free}

    base = sorted(range(nf), key=lambda fi: (m.factors[fi].species, m.factors[fi].dslots))
    groups: list[list[int]] = []
    for fi in base:
        if groups and m.factors[groups[-1][-1]] == m.factors[fi]:
            groups[-1].append(fi)
        else:
            groups.append([fi])
    arrs = [_arrangements(f) for f in m.factors]

    best_key = None
    best = None
    for group_orders in itertools.product(*[itertools.permutations(g) for g in groups]):
        order = tuple(itertools.chain.from_iterable(group_orders))
        for choice in itertools.product(*[arrs[fi] for fi in order]):
            tokens = []
            pairnum: dict[Slot, int] = {}
            counter = 0
            posmap: dict[Slot, Slot] = {}
            for new_fi, (fi, p) in enumerate(zip(order, choice)):
                for new_si, old_si in enumerate(p):
                    slot = (fi, old_si)
                    posmap[slot] = (new_fi, new_si)
                    if slot in freemap:
                        lab, r = freemap[slot]
                        tokens.append((1, lab, r))
                    elif slot in pairmap:
                        partner = pairmap[slot]
                        n = pairnum.get(partner)
                        if n is None:
                            pairnum[slot] = counter
                            n = counter
                            counter += 1
                        tokens.append((0, n, False))
                    else:
                        tokens.append((2, "", False))  # reeb slot
            key = tuple(tokens)
            if best_key is None or key < best_key:
                best_key = key
                best = (order, posmap)

    order, posmap = best
    new_factors = tuple(m.factors[fi] for fi in order)
    new_pairs = tuple(sorted((posmap[u], posmap[v]) for u, v in m.pairs))
    new_free = tuple(sorted((posmap[s], lab, r) for s, lab, r in m.free))
    out = Mono(new_factors, new_pairs, new_free)
    _CANON_CACHE[m] = out
    _CANON_CACHE[out] = out
    return out


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

class TExpr:
    """A sum of canonical monomials with exact Gaussian-rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Mono, GaussRat] | None = None):
        self.terms: dict[Mono, GaussRat] = terms or {}

    @staticmethod
    def zero() -> "TExpr":
        return TExpr()

    @staticmethod
    def const(c: GaussRat) -> "TExpr":
        e = TExpr()
        e.add_raw(c, (), (), ())
        return e

    def add_raw(self, coeff: GaussRat, factors, pairs, free) -> None:
        if coeff.is_zero():
            return
        coeff, m = normalize(coeff, factors, pairs, free)
        if m is None or coeff.is_zero():
            return
        m = canonical(m)
        c = self.terms.get(m, ZERO) + coeff
        if c.is_zero():
            self.terms.pop(m, None)
        else:
            self.terms[m] = c

    def add_mono(self, coeff: GaussRat, m: Mono) -> None:
        self.add_raw(coeff, m.factors, m.pairs, m.free)

    def __add__(self, other: "TExpr") -> "TExpr":
        out = TExpr(dict(self.terms))
        for m, c in other.terms.items():
            cc = out.terms.get(m, ZERO) + c
            if cc.is_zero():
                out.terms.pop(m, None)
            else:
                out.terms[m] = cc
        return out

    def __sub__(self, other: "TExpr") -> "TExpr":
        return self + other.scale(GaussRat.of(-1))

    def scale(self, c: GaussRat) -> "TExpr":
        if c.is_zero():
            return TExpr()
        return TExpr({m: cc * c for m, cc in self.terms.items()})

    def __mul__(self, other: "TExpr") -> "TExpr":
        """Tensor product; operands must not share free labels."""
        mine = {lab for m in self.terms for _s, lab, _r in m.free}
        theirs = {lab for m in other.terms for _s, lab, _r in m.free}
        shared = mine & theirs
        if shared:
            raise IndexUsageError(f"shared free labels in product: {sorted(shared)}")
        out = TExpr()
        for m1, c1 in self.terms.items():
            n1 = len(m1.factors)
            for m2, c2 in other.terms.items():
                factors = m1.factors + m2.factors

                def sh(slot: Slot) -> Slot:
                    return (slot[0] + n1, slot[1])

                pairs = list(m1.pairs) + [(sh(u), sh(v)) for u, v in m2.pairs]
                free = list(m1.free) + [(sh(s), lab, r) for s, lab, r in m2.free]
                out.add_raw(c1 * c2, factors, pairs, free)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, TExpr) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("TExpr is not hashable")

    # -- well-formedness ---------------------------------------------------

    def weight(self) -> int:
        ws = {mono_weight(m) for m in self.terms}
        if not ws:
            return 0
        if len(ws) > 1:
            raise WeightMismatchError(f"mixed CR weights {sorted(ws)}")
        return ws.pop()

    def free_signature(self) -> frozenset:
        sigs = {
            frozenset(eff_free_index(m.factors, s, lab, r) for s, lab, r in m.free)
            for m in self.terms
        }
        if not sigs:
            return frozenset()
        if len(sigs) > 1:
            raise IndexUsageError("free-index sets differ across terms")
        return sigs.pop()

    # -- conjugation -------------------------------------------------------

    def conj(self) -> "TExpr":
        out = TExpr()
        for m, c in self.terms.items():
            out.add_raw(c.conj(), *conj_parts(m))
        return out

    # -- printing ----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        rendered = sorted(
            ((_mono_grade(m), _mono_str(m), m, c) for m, c in self.terms.items()),
            key=lambda t: (t[0], t[1]),
        )
        parts: list[str] = []
        for k, (_g, s, _m, c) in enumerate(rendered):
            neg = c.re < 0 or (c.re == 0 and c.im < 0)
            cc = -c if neg else c
            body = _coeff_prefix(cc, s)
            if k == 0:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"TExpr({self})"


def conj_parts(m: Mono):
    """Raw parts of the complex conjugate of a monomial."""
    new_factors = []
    slotmap: dict[Slot, Slot] = {}
    for fi, f in enumerate(m.factors):
        sp = species(f.species)
        nd = len(f.dslots)
        new_factors.append(Factor(sp.conj_name, tuple(flip(d) for d in f.dslots)))
        for k in range(nd):
            slotmap[(fi, k)] = (fi, k)
        for j, old in enumerate(sp.conj_perm):
            slotmap[(fi, nd + old)] = (fi, nd + j)
    pairs = [(slotmap[v], slotmap[u]) for u, v in m.pairs]  # bartypes flip: swap sides
    free = [(slotmap[s], lab, r) for s, lab, r in m.free]
    return tuple(new_factors), pairs, free


# ---------------------------------------------------------------------------
# structural calculus
# ---------------------------------------------------------------------------

def deriv_expr(e: TExpr, bt: str, label: str, raised: bool = False) -> TExpr:
    """Leibniz covariant derivative; the new outermost slot is left free.

    ``bt`` is the internal bartype of the new derivative slot ('h', 'a' or
    '0'); for '0' no free marker is attached.  Parallel factors (Levi form)
    are skipped.
    """
    out = TExpr()
    for m, c in e.terms.items():
        for fi, f in enumerate(m.factors):
            if species(f.species).parallel:
                continue
            factors = list(m.factors)
            factors[fi] = Factor(f.species, (bt,) + f.dslots)

            def sh(slot: Slot) -> Slot:
                return (slot[0], slot[1] + 1) if slot[0] == fi else slot

            pairs = [(sh(u), sh(v)) for u, v in m.pairs]
            free = [(sh(s), lab, r) for s, lab, r in m.free]
            if bt != REEB:
                free.append(((fi, 0), label, raised))
            out.add_raw(c, factors, pairs, free)
    return out


def contract_free(e: TExpr, label_h: str, label_a: str) -> TExpr:
    """Contract two free labels (effective holomorphic lower + upper pair)."""
    out = TExpr()
    for m, c in e.terms.items():
        slot_h = slot_a = None
        free = []
        for s, lab, r in m.free:
            if lab == label_h:
                slot_h = s
            elif lab == label_a:
                slot_a = s
            else:
                free.append((s, lab, r))
        if slot_h is None or slot_a is None:
            raise IndexUsageError(f"labels {label_h},{label_a} not free in monomial")
        bt_h = slot_bt(m.factors, slot_h)
        bt_a = slot_bt(m.factors, slot_a)
        if {bt_h, bt_a} != {HOLO, ANTI}:
            raise IndexUsageError("contraction needs one holomorphic and one antiholomorphic slot")
        pair = (slot_h, slot_a) if bt_h == HOLO else (slot_a, slot_h)
        out.add_raw(c, m.factors, list(m.pairs) + [pair], free)
    return out


_FRESH = itertools.count()


def fresh_label() -> str:
    return f"#{next(_FRESH)}"


def sublaplacian(e: TExpr) -> TExpr:
    """Delta_b e = -grad_a grad^a e - grad^a grad_a e (Leibniz throughout)."""
    u, v = fresh_label(), fresh_label()
    t1 = contract_free(deriv_expr(deriv_expr(e, ANTI, u, raised=True), HOLO, v), v, u)
    u2, v2 = fresh_label(), fresh_label()
    t2 = contract_free(deriv_expr(deriv_expr(e, HOLO, u2), ANTI, v2, raised=True), u2, v2)
    return t1.scale(GaussRat.of(-1)) + t2.scale(GaussRat.of(-1))


# ---------------------------------------------------------------------------
# printing helpers
# ---------------------------------------------------------------------------

_LETTERS = "abcdefgjklmnopqrstuvwxyz"  # 'i' reserved for the imaginary unit


def _mono_grade(m: Mono):
    return (sum(nslots(f) for f in m.factors), len(m.factors))


def _mono_str(m: Mono) -> str:
    used = {lab for _s, lab, _r in m.free if len(lab) == 1}
    pool = iter(ch for ch in _LETTERS if ch not in used)
    pairname: dict[Slot, str] = {}
    for u, v in m.pairs:
        # scan order: first endpoint in slot order gets the next letter
        pass
    order: dict[Slot, int] = {}
    pos = 0
    for fi, f in enumerate(m.factors):
        for si in range(nslots(f)):
            order[(fi, si)] = pos
            pos += 1
    for u, v in sorted(m.pairs, key=lambda p: min(order[p[0]], order[p[1]])):
        name = next(pool)
        pairname[u] = name
        pairname[v] = name
    freemap = {s: (lab, r) for s, lab, r in m.free}

    def slot_str(slot: Slot) -> str:
        sp = species(m.factors[slot[0]].species)
        bt = slot_bt(m.factors, slot)
        if bt == REEB:
            return "_0"
        if sp.native_upper and slot[1] >= len(m.factors[slot[0]].dslots):
            lab, _r = freemap[slot]
            return "^" + lab + ("!" if bt == ANTI else "")
        if slot in pairname:
            # holomorphic side prints lower, antiholomorphic side prints raised
            if bt == HOLO:
                return "_" + pairname[slot]
            return "^" + pairname[slot]
        lab, r = freemap[slot]
        if r:
            return "^" + lab + ("!" if bt == HOLO else "")
        return "_" + lab + ("!" if bt == ANTI else "")

    fparts = []
    for fi, f in enumerate(m.factors):
        nd = len(f.dslots)
        sp = species(f.species)
        if sp.arity:
            core = f.species + "[" + ",".join(slot_str((fi, nd + j)) for j in range(sp.arity)) + "]"
        else:
            core = f.species
        for k in range(nd - 1, -1, -1):
            core = "D[" + slot_str((fi, k)) + "](" + core + ")"
        fparts.append(core)
    return " * ".join(fparts)


def _coeff_prefix(c: GaussRat, body: str) -> str:
    if not body:
        return str(c)
    if c == ONE:
        return body
    return str(c) + " " + body


def mono_str(m: Mono) -> str:
    return _mono_str(m)
