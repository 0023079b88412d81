"""The space of weight (-3,-3) invariants modulo divergences.

Ambient space: every reeb-free complete contraction of S, V, V~, A, A~, P
and their covariant derivatives (total order <= 4) of weight (-3,-3), in
pseudo-Einstein-reduced form.  Relations: total divergences, Ricci
commutations, the two identities tying the curvature derivative to V, and
the dimension-5 skew-symmetrization identity.  Reduction is exact
rational row reduction with a fixed column order; the reduced row echelon
form is unique, so the result is independent of relation order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .algebra import GaussRat, ONE, ZERO, rat
from .errors import ReductionError
from .expr import (Factor, Mono, Slot, TExpr, canonical, contract_free, deriv_expr,
                   mono_str, normalize, nslots, slot_bt, sublaplacian, _mono_grade)
from .parser import parse_expression
from .rewrite import (reduce_pseudo_einstein, replace_factor, ricci_commute_mono,
                      _one_mono_expr)
from .species import ANTI, HOLO, NDIM, species

I = GaussRat.of(0, 1)
MI = GaussRat.of(0, -1)

AMBIENT_SPECIES = ("P", "A", "A~", "S", "V", "V~")
MAX_DERIV_ORDER = 4

CLASS_NAMES = ("P3", "P|A|2", "P|S|2", "PDbP", "|V|2", "SAA", "S3")


def class_expressions() -> dict[str, TExpr]:
    """The seven spanning classes of the weight (-3,-3) quotient."""
    p = parse_expression("P")
    return {
        "P3": parse_expression("P * P * P"),
        "P|A|2": parse_expression("P * A[_a,_b] * A~[^a,^b]"),
        "P|S|2": parse_expression("P * S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]"),
        "PDbP": p * sublaplacian(p),
        "|V|2": parse_expression("V[_a,_b!,_c] * V~[^a,^b!,^c]"),
        "SAA": parse_expression("S[_a,_b!,_c,_d!] * A~[^a,^c] * A[^b!,^d!]"),
        "S3": parse_expression("S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]"),
    }


def q_prime_expression() -> TExpr:
    """The Q'-curvature modulo divergence terms (closed formula)."""
    c = class_expressions()
    return (c["P3"].scale(rat(2)) + c["P|A|2"].scale(rat(-2))
            + c["SAA"].scale(rat(-1)) + c["|V|2"].scale(rat(-1)))


def i_prime_expression() -> TExpr:
    """The I'-curvature; its sublaplacian term is a pure divergence."""
    c = class_expressions()
    s2 = parse_expression("S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]")
    return (c["P|S|2"].scale(rat(1, 2)) + c["|V|2"]
            + sublaplacian(s2).scale(rat(1, 8)))


# ---------------------------------------------------------------------------
# line plumbing on a single monomial
# ---------------------------------------------------------------------------

class MonoEdit:
    """Mutable view of a monomial for rewiring contractions."""

    def __init__(self, m: Mono):
        self.factors: list[Factor] = list(m.factors)
        self.pm: dict[Slot, Slot] = {}
        for u, v in m.pairs:
            self.pm[u] = v
            self.pm[v] = u
        self.fm: dict[Slot, tuple[str, bool]] = {s: (lab, r) for s, lab, r in m.free}

    def cut(self, slot: Slot, tmp: str):
        """Detach a slot.  If paired, the partner keeps a marker ``tmp`` and
        ('slot', tmp) is returned; if free, its marker is returned."""
        if slot in self.pm:
            partner = self.pm.pop(slot)
            del self.pm[partner]
            self.fm[partner] = (tmp, False)
            return ("slot", tmp)
        lab, r = self.fm.pop(slot)
        return ("marker", lab, r)

    def drop_pair(self, s1: Slot, s2: Slot):
        assert self.pm.get(s1) == s2
        del self.pm[s1], self.pm[s2]

    def replace(self, fi: int, repl: list[Factor], wiring: dict[int, Slot]):
        """Replace factor ``fi``; every attached old slot must be wired."""
        nrep = len(repl)

        def mv(slot: Slot) -> Slot:
            f, s = slot
            if f < fi:
                return slot
            if f == fi:
                k, ls = wiring[s]
                return (fi + k, ls)
            return (f + nrep - 1, s)

        self.pm = {mv(a): mv(b) for a, b in self.pm.items()}
        self.fm = {mv(a): v for a, v in self.fm.items()}
        self.factors[fi:fi + 1] = repl

    def add_pair_local(self, u: Slot, v: Slot):
        self.pm[u] = v
        self.pm[v] = u

    def join(self, line1, line2) -> GaussRat:
        """Connect two cut lines (a Kronecker delta); returns a scalar factor.

        When the two cut slots were contracted with each other the delta
        closes onto itself and contributes its trace, the dimension 2.
        """
        if (line1[0] == "slot" and line2[0] == "marker" and line2[1] == line1[1]) or \
           (line2[0] == "slot" and line1[0] == "marker" and line1[1] == line2[1]):
            return GaussRat.of(NDIM)

        def slot_of(line):
            if line[0] != "slot":
                return None
            tmp = line[1]
            for s, (lab, _r) in self.fm.items():
                if lab == tmp:
                    return s
            raise AssertionError(f"cut marker {tmp} vanished")

        s1, s2 = slot_of(line1), slot_of(line2)
        if s1 is not None and s2 is not None:
            del self.fm[s1], self.fm[s2]
            self.add_pair_local(s1, s2)
        elif s1 is not None:
            self.fm[s1] = (line2[1], line2[2])
        elif s2 is not None:
            self.fm[s2] = (line1[1], line1[2])
        else:
            raise ReductionError("delta with two free indices is not supported here")
        return ONE

    def raw(self):
        factors = tuple(self.factors)
        pairs = []
        seen = set()
        for u, v in self.pm.items():
            if u in seen:
                continue
            seen.add(u)
            seen.add(v)
            pairs.append((u, v) if slot_bt(factors, u) == HOLO else (v, u))
        free = tuple(sorted((s, lab, r) for s, (lab, r) in self.fm.items()))
        return factors, tuple(sorted(pairs)), free


# ---------------------------------------------------------------------------
# enumeration of monomials
# ---------------------------------------------------------------------------

def _prefix_ok(name: str, dseq: tuple[str, ...]) -> bool:
    """Ambient prefixes exclude shapes removed by the pseudo-Einstein rules."""
    if not dseq:
        return True
    if name == "A" and dseq[-1] == ANTI:
        return False
    if name == "A~" and dseq[-1] == HOLO:
        return False
    return True


def _decorated_factors(names: tuple[str, ...], total_d: int):
    """Assignments of ordered derivative prefixes with ``total_d`` slots."""
    def splits(rem: int, k: int):
        if k == 1:
            yield (rem,)
            return
        for first in range(rem + 1):
            for rest in splits(rem - first, k - 1):
                yield (first,) + rest

    for counts in splits(total_d, len(names)):
        per_factor = []
        for name, c in zip(names, counts):
            seqs = [s for s in itertools.product((HOLO, ANTI), repeat=c)
                    if _prefix_ok(name, s)]
            per_factor.append([Factor(name, s) for s in seqs])
        yield from itertools.product(*per_factor)


def _typed_slots(factors):
    hs, as_ = [], []
    for fi, f in enumerate(factors):
        for si in range(nslots(f)):
            (hs if slot_bt(factors, (fi, si)) == HOLO else as_).append((fi, si))
    return hs, as_


def enumerate_ambient(max_order: int = MAX_DERIV_ORDER) -> list[Mono]:
    """Canonical reeb-free weight (-3,-3) complete contractions."""
    out = set()
    for nf in (1, 2, 3):
        for names in itertools.combinations_with_replacement(AMBIENT_SPECIES, nf):
            base_w = sum(species(n).weight for n in names)
            base_slots = sum(species(n).arity for n in names)
            for d in range(0, max_order + 1):
                slots = base_slots + d
                if slots % 2 or base_w - slots // 2 != -3:
                    continue
                for factors in _decorated_factors(names, d):
                    hs, as_ = _typed_slots(factors)
                    if len(hs) != len(as_):
                        continue
                    for perm in itertools.permutations(as_):
                        coeff, m = normalize(ONE, factors, tuple(zip(hs, perm)), ())
                        if m is not None:
                            out.add(canonical(m))
    return sorted(out, key=lambda m: (_mono_grade(m), mono_str(m)))


def enumerate_divergence_generators(max_order: int = MAX_DERIV_ORDER - 1) -> list[Mono]:
    """Monomials with one free raised slot whose divergence is weight (-3,-3)."""
    out = set()
    for nf in (1, 2, 3):
        for names in itertools.combinations_with_replacement(AMBIENT_SPECIES, nf):
            base_w = sum(species(n).weight for n in names)
            base_slots = sum(species(n).arity for n in names)
            for d in range(0, max_order + 1):
                slots = base_slots + d
                if slots % 2 == 0 or base_w - (slots - 1) // 2 - 1 != -3:
                    continue
                for factors in _decorated_factors(names, d):
                    hs, as_ = _typed_slots(factors)
                    if abs(len(hs) - len(as_)) != 1:
                        continue
                    big, small = (hs, as_) if len(hs) > len(as_) else (as_, hs)
                    for free_slot in big:
                        rest = [s for s in big if s != free_slot]
                        for perm in itertools.permutations(rest):
                            pairs = (tuple(zip(perm, small)) if len(hs) > len(as_)
                                     else tuple(zip(small, perm)))
                            coeff, m = normalize(ONE, factors, pairs,
                                                 ((free_slot, "z", True),))
                            if m is not None:
                                out.add(canonical(m))
    return sorted(out, key=lambda m: (_mono_grade(m), mono_str(m)))


# ---------------------------------------------------------------------------
# relation rows
# ---------------------------------------------------------------------------

def divergence_expression(x: Mono) -> TExpr:
    """One-sided divergence of a one-free-slot monomial, Leibniz expanded."""
    (slot, _lab, _raised), = x.free
    bt = slot_bt(x.factors, slot)
    e = TExpr()
    e.add_raw(ONE, x.factors, x.pairs, ((slot, "z", True),))
    if bt == ANTI:
        return contract_free(deriv_expr(e, HOLO, "w"), "w", "z")
    return contract_free(deriv_expr(e, ANTI, "w", raised=True), "z", "w")


def divergence_rows(order_bound: int = MAX_DERIV_ORDER) -> list[TExpr]:
    """Total divergences grad_a X^a + conjugate (and the i-rotated rows)."""
    rows: list[TExpr] = []
    for x in enumerate_divergence_generators(order_bound - 1):
        half = divergence_expression(x)
        rows.append(half + half.conj())
        rows.append(half.scale(I) + half.conj().scale(MI))
    return rows


def ricci_rows(ambient: list[Mono]) -> list[TExpr]:
    rows = []
    for m in ambient:
        if len(m.factors) < 2:
            continue  # single-factor contractions die as plain divergences
        for fi, f in enumerate(m.factors):
            if len(f.dslots) >= 2 and {f.dslots[0], f.dslots[1]} == {HOLO, ANTI}:
                rows.append(_one_mono_expr(m) - ricci_commute_mono(m, fi))
    return rows


def div_s_rewrite(m: Mono, fi: int) -> TExpr | None:
    """grad^mubar S_{a bbar g mubar} -> -i n V_{a bbar g} on factor ``fi``."""
    f = m.factors[fi]
    if f.species != "S" or not f.dslots or f.dslots[-1] != HOLO:
        return None
    nd = len(f.dslots)
    dslot = (fi, nd - 1)
    pm = dict(m.pairs)
    pm.update({v: u for u, v in m.pairs})
    partner = pm.get(dslot)
    if partner is None or partner[0] != fi or partner[1] < nd:
        return None
    traced = partner[1] - nd  # 1 or 3
    keep = (0, 3, 2) if traced == 1 else (0, 1, 2)
    ed = MonoEdit(m)
    ed.drop_pair(dslot, partner)
    wiring = {k: (0, k) for k in range(nd - 1)}
    for vslot, sslot in enumerate(keep):
        wiring[nd + sslot] = (0, (nd - 1) + vslot)
    ed.replace(fi, [Factor("V", f.dslots[:-1])], wiring)
    out = TExpr()
    out.add_raw(MI * GaussRat.of(NDIM), *ed.raw())
    return out


def v_s_rows(m: Mono, fi: int) -> list[TExpr]:
    """Instances of the antisymmetrized curvature-derivative identity.

    2 grad_[a S_b]^g_m^n  =  i( V_m^n_a d_b^g - V_m^n_b d_a^g
                              + V_m^g_a d_b^n - V_m^g_b d_a^n )
    applied to the innermost holomorphic derivative of an S factor, the
    swap slot being the factor's first holomorphic slot.
    """
    f = m.factors[fi]
    if f.species != "S" or not f.dslots or f.dslots[-1] != HOLO:
        return []
    nd = len(f.dslots)
    dslot = (fi, nd - 1)
    s0, s1, s2, s3 = ((fi, nd + j) for j in range(4))
    outer = f.dslots[:-1]
    nd2 = len(outer)

    def swapped() -> TExpr:
        ed = MonoEdit(m)
        la = ed.cut(dslot, "#a")
        lb = ed.cut(s0, "#b")
        # reattach exchanged
        for slot, line in ((dslot, lb), (s0, la)):
            if line[0] == "slot":
                tgt = next(s for s, (lab, _r) in ed.fm.items() if lab == line[1])
                del ed.fm[tgt]
                ed.add_pair_local(slot, tgt)
            else:
                ed.fm[slot] = (line[1], line[2])
        e = TExpr()
        e.add_raw(ONE, *ed.raw())
        return e

    def v_term(vwires: tuple[int, int, int], join_a: Slot, join_b: Slot) -> TExpr:
        """V on the lines of ``vwires`` (old slots); delta joins the other two."""
        ed = MonoEdit(m)
        la = ed.cut(join_a, "#d0")
        lb = ed.cut(join_b, "#d1")
        wiring = {k: (0, k) for k in range(nd2)}
        for vslot, old in enumerate(vwires):
            wiring[old] = (0, nd2 + vslot)
        ed.replace(fi, [Factor("V", outer)], wiring)
        mult = ed.join(la, lb)
        e = TExpr()
        e.add_raw(mult, *ed.raw())
        return e

    d_idx = nd - 1
    row = _one_mono_expr(m) - swapped()
    row = row - v_term((nd + 2, nd + 3, d_idx), s0, s1).scale(I)
    row = row + v_term((nd + 2, nd + 3, nd + 0), dslot, s1).scale(I)
    row = row - v_term((nd + 2, nd + 1, d_idx), s0, s3).scale(I)
    row = row + v_term((nd + 2, nd + 1, nd + 0), dslot, s3).scale(I)
    return [row]


def identity_rows(ambient: list[Mono]) -> list[TExpr]:
    rows: list[TExpr] = []
    for m in ambient:
        for fi, f in enumerate(m.factors):
            if f.species != "S" or not f.dslots or f.dslots[-1] != HOLO:
                continue
            r = div_s_rewrite(m, fi)
            if r is not None:
                rows.append(_one_mono_expr(m) - r)
            rows.extend(v_s_rows(m, fi))
    rows += [r.conj() for r in rows]
    return rows


def antisymmetrize(m: Mono, slots3) -> TExpr:
    """Alternating sum over the lines attached to three holomorphic slots."""
    pm0 = dict(m.pairs)
    pm0.update({v: u for u, v in m.pairs})
    fm0 = {s: (lab, r) for s, lab, r in m.free}

    def line_of(s):
        return ("p", pm0[s]) if s in pm0 else ("f",) + fm0[s]

    base_lines = [line_of(s) for s in slots3]
    out = TExpr()
    for perm in itertools.permutations(range(3)):
        sign = ONE if _perm_sign(perm) > 0 else GaussRat.of(-1)
        pm = dict(pm0)
        fm = dict(fm0)
        for s in slots3:
            if s in pm:
                del pm[pm[s]], pm[s]
            else:
                del fm[s]
        for k, s in enumerate(slots3):
            l = base_lines[perm[k]]
            if l[0] == "p":
                pm[s] = l[1]
                pm[l[1]] = s
            else:
                fm[s] = (l[1], l[2])
        pairs = []
        seen = set()
        for u, v in pm.items():
            if u in seen:
                continue
            seen.add(u)
            seen.add(v)
            pairs.append((u, v) if slot_bt(m.factors, u) == HOLO else (v, u))
        free = tuple(sorted((s, lab, r) for s, (lab, r) in fm.items()))
        out.add_raw(sign, m.factors, pairs, free)
    return out


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def skew_rows(ambient: list[Mono]) -> list[TExpr]:
    """Dimension n=2 identities for the derivative-free triple-S family."""
    rows = []
    for m in ambient:
        if len(m.factors) != 3:
            continue
        if any(f.species != "S" or f.dslots for f in m.factors):
            continue
        h_slots = [(fi, si) for fi, f in enumerate(m.factors)
                   for si in range(nslots(f))
                   if slot_bt(m.factors, (fi, si)) == HOLO]
        for triple in itertools.combinations(h_slots, 3):
            row = antisymmetrize(m, triple)
            if not row.is_zero():
                rows.append(row)
    rows += [r.conj() for r in rows]
    return rows


# ---------------------------------------------------------------------------
# exact row reduction and the quotient object
# ---------------------------------------------------------------------------

class ExactRREF:
    """Fully reduced row echelon form over Q(i), sparse rows."""

    def __init__(self):
        self.pivots: dict[int, dict[int, GaussRat]] = {}

    def reduce(self, vec: dict[int, GaussRat]) -> dict[int, GaussRat]:
        vec = dict(vec)
        for col in sorted(vec):
            c = vec.get(col)
            if c is None or c.is_zero():
                continue
            row = self.pivots.get(col)
            if row is None:
                continue
            for c2, v2 in row.items():
                nv = vec.get(c2, ZERO) - c * v2
                if nv.is_zero():
                    vec.pop(c2, None)
                else:
                    vec[c2] = nv
        return {c: v for c, v in vec.items() if not v.is_zero()}

    def insert(self, vec: dict[int, GaussRat]) -> bool:
        vec = self.reduce(vec)
        if not vec:
            return False
        lead = min(vec)
        inv = ONE / vec[lead]
        row = {c: v * inv for c, v in vec.items()}
        # maintain full reduction
        for pcol, prow in self.pivots.items():
            c = prow.get(lead)
            if c is None or c.is_zero():
                continue
            for c2, v2 in row.items():
                nv = prow.get(c2, ZERO) - c * v2
                if nv.is_zero():
                    prow.pop(c2, None)
                else:
                    prow[c2] = nv
        self.pivots[lead] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


@dataclass
class DivergenceQuotient:
    """Weight (-3,-3) invariants modulo divergences, pseudo-Einstein reduced."""

    ambient: list[Mono]
    index: dict[Mono, int]
    rref: ExactRREF
    relation_count: int
    class_names: tuple[str, ...] = CLASS_NAMES
    class_vectors: dict[str, dict[int, GaussRat]] = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return len(self.ambient)

    @property
    def dim(self) -> int:
        return len(self.ambient) - self.rref.rank

    def basis_monos(self) -> list[Mono]:
        piv = set(self.rref.pivots)
        return [m for i, m in enumerate(self.ambient) if i not in piv]

    def vectorize(self, e: TExpr) -> dict[int, GaussRat]:
        vec: dict[int, GaussRat] = {}
        for m, c in e.terms.items():
            i = self.index.get(m)
            if i is None:
                raise ReductionError(f"monomial outside the ambient space: {mono_str(m)}")
            vec[i] = vec.get(i, ZERO) + c
        return {c: v for c, v in vec.items() if not v.is_zero()}

    def reduce_expr(self, e: TExpr) -> dict[int, GaussRat]:
        return self.rref.reduce(self.vectorize(reduce_pseudo_einstein(e)))

    def coordinates(self, e: TExpr) -> list[GaussRat]:
        """Exact coordinates of [e] on the seven named classes."""
        target = self.reduce_expr(e)
        cols = sorted(set(itertools.chain(target, *self.class_vectors.values())))
        names = list(self.class_names)
        rows = [[self.class_vectors[n].get(c, ZERO) for n in names]
                + [target.get(c, ZERO)] for c in cols]
        coords = _solve_exact(rows, len(names))
        if coords is None:
            raise ReductionError("expression is not in the span of the seven classes")
        return coords


def _solve_exact(rows: list[list[GaussRat]], nunk: int) -> list[GaussRat] | None:
    """Solve an overdetermined exact linear system; None if inconsistent."""
    rows = [list(r) for r in rows]
    piv_of_col: dict[int, list[GaussRat]] = {}
    for r in rows:
        for col in range(nunk):
            if r[col].is_zero():
                continue
            p = piv_of_col.get(col)
            if p is None:
                inv = ONE / r[col]
                piv_of_col[col] = [v * inv for v in r]
                r = None
                break
            c = r[col]
            r = [a - c * b for a, b in zip(r, p)]
        if r is not None and not r[nunk].is_zero() and all(v.is_zero() for v in r[:nunk]):
            return None
    sol = [ZERO] * nunk
    for col in sorted(piv_of_col, reverse=True):
        row = piv_of_col[col]
        acc = row[nunk]
        for c2 in range(col + 1, nunk):
            acc = acc - row[c2] * sol[c2]
        sol[col] = acc
    return sol


def build_quotient(order_bound: int = MAX_DERIV_ORDER, progress=None,
                   shuffle_seed: int | None = None) -> DivergenceQuotient:
    """Assemble the quotient.  ``shuffle_seed`` permutes the relation order;
    the fully reduced echelon form is unique, so the result cannot change
    (exercised by the property tests)."""
    ambient = enumerate_ambient(order_bound)
    index = {m: i for i, m in enumerate(ambient)}
    rows: list[TExpr] = []
    rows += divergence_rows(order_bound)
    rows += ricci_rows(ambient)
    rows += identity_rows(ambient)
    rows += skew_rows(ambient)
    if shuffle_seed is not None:
        import random
        random.Random(shuffle_seed).shuffle(rows)

    q = DivergenceQuotient(ambient=ambient, index=index, rref=ExactRREF(),
                           relation_count=len(rows))
    for k, row in enumerate(rows):
        reduced = reduce_pseudo_einstein(row)
        q.rref.insert(q.vectorize(reduced))
        if progress and k % 200 == 0:
            progress(k, len(rows))
    for name, e in class_expressions().items():
        q.class_vectors[name] = q.reduce_expr(e)
        if not q.class_vectors[name]:
            raise ReductionError(f"class {name} vanishes in the quotient")
    return q
