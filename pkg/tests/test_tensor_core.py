"""Parser, canonical forms, weights and conjugation."""

import itertools
import random

import pytest

from crlab.algebra import GaussRat, rat
from crlab.errors import IndexUsageError, ParseError, WeightMismatchError
from crlab.expr import Factor, TExpr, canonical, normalize, sublaplacian
from crlab.parser import parse_expression as pe
from crlab.species import SPECIES, species


def test_torsion_square_parses_to_scalar():
    e = pe("A[_a,_b] * A~[^a!,^b!]")
    assert e.weight() == -2
    assert e.free_signature() == frozenset()
    assert len(e.terms) == 1


def test_trace_flagged_as_zero():
    # a trace of the trace-free curvature parses and is annihilated
    assert pe("S[_a,_b!,_c,_d!] * hinv[^a,^b!]").is_zero()
    assert pe("V[_a,_b!,_c] * hinv[^a,^b!]").is_zero()


def test_weight_mismatch_rejected():
    with pytest.raises(WeightMismatchError):
        pe("A[_a,_b] + P")


def test_levi_trace_is_dimension():
    e = pe("hinv[^a,^a!] * h[_a,_a!]")
    assert str(e) == "2"


def test_symmetry_of_torsion():
    assert pe("A[_a,_b] - A[_b,_a]").is_zero()


def test_weight_examples():
    assert pe("R[_a,^b,_c,_d!]").weight() == 0
    assert pe("h[_a,_b!]").weight() == 1
    assert pe("P * P * P").weight() == -3
    assert pe("A[_a,_b]").weight() == 0
    assert pe("T[_a]").weight() == -1


def test_conjugation_examples():
    a = pe("A[_a,_b]")
    assert str(a.conj()) == "A~[_a!,_b!]"
    p = pe("P")
    assert p.conj() == p
    v2 = pe("i * V[_a,_b!,_c] * V~[^a,^b!,^c]")
    assert v2.conj() == v2.scale(rat(-1))


def test_conjugation_involution():
    for text in ("R[_a,_b!,_c,_d!]", "D[_a](D[_b!](A[_c,_d]))",
                 "S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]",
                 "(1+2i) Pab[_a,_b!] * T[_c]"):
        e = pe(text)
        assert e.conj().conj() == e


def test_print_parse_roundtrip():
    exprs = [
        "A[_a,_b] * A~[^a,^b]",
        "D[_a](D[_b!](A[_c,_d]))",
        "P * S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]",
        "i V[_a,_b!,_c] * V~[^a,^b!,^c] - 2/3 P * P * P",
    ]
    for text in exprs:
        e = pe(text)
        assert pe(str(e)) == e


def test_parse_errors_report_position():
    with pytest.raises(ParseError):
        pe("A[_a,")
    with pytest.raises(IndexUsageError):
        pe("A[_a,_b] * h[_a,_c!] * hinv[^a,^d!]")  # label a used three times
    with pytest.raises(IndexUsageError):
        pe("A[_a,_b!]")  # slot 2 of A is holomorphic
    with pytest.raises(ParseError):
        pe("A[_a,_0]")  # reeb slot only as a derivative


def test_reeb_derivative_parses():
    e = pe("D[_0](A[_a,_b])")
    assert e.weight() == -1


def test_sublaplacian_weight_and_roundtrip():
    db = sublaplacian(pe("P"))
    assert db.weight() == -2
    assert pe(str(db)) == db


# ---------------------------------------------------------------------------
# canonicalizer properties
# ---------------------------------------------------------------------------

def _random_monomial(rnd: random.Random):
    pool = ["A", "A~", "S", "V", "V~", "P", "R", "Pab", "T", "T~"]
    nf = rnd.randint(1, 3)
    factors = []
    for _ in range(nf):
        name = rnd.choice(pool)
        nd = rnd.randint(0, 2)
        dseq = tuple(rnd.choice("ha") for _ in range(nd))
        factors.append(Factor(name, dseq))
    factors = tuple(factors)
    hs, as_ = [], []
    from crlab.expr import nslots, slot_bt
    for fi, f in enumerate(factors):
        for si in range(nslots(f)):
            (hs if slot_bt(factors, (fi, si)) == "h" else as_).append((fi, si))
    rnd.shuffle(hs)
    rnd.shuffle(as_)
    k = rnd.randint(0, min(len(hs), len(as_)))
    pairs = tuple(zip(hs[:k], as_[:k]))
    free = []
    labels = iter("abcdefgjklmnopqrstuvwxyz")
    for s in hs[k:] + as_[k:]:
        free.append((s, next(labels), rnd.random() < 0.5))
    return factors, pairs, tuple(free)


def test_canonicalization_idempotent_and_order_free():
    rnd = random.Random(7)
    checked = 0
    for _ in range(400):
        factors, pairs, free = _random_monomial(rnd)
        coeff, m = normalize(GaussRat.of(1), factors, pairs, free)
        if m is None:
            continue
        c = canonical(m)
        assert canonical(c) == c
        # factor-order independence
        perm = list(range(len(factors)))
        rnd.shuffle(perm)
        inv = {old: new for new, old in enumerate(perm)}
        f2 = tuple(factors[i] for i in perm)
        mv = lambda s: (inv[s[0]], s[1])
        p2 = [(mv(u), mv(v)) for u, v in pairs]
        fr2 = [(mv(s), lab, r) for s, lab, r in free]
        coeff2, m2 = normalize(GaussRat.of(1), f2, p2, fr2)
        assert m2 is not None and canonical(m2) == c
        checked += 1
    assert checked > 200


def test_symmetry_soundness_all_species():
    """For every declared generating permutation: T - sigma T == 0."""
    labels = "abcdefg"
    for name, sp in SPECIES.items():
        if sp.native_upper or sp.arity == 0:
            continue
        slots = []
        for j, bt in enumerate(sp.bts):
            slots.append(("_" if True else "^") + labels[j] + ("!" if bt == "a" else ""))
        base = f"{name}[{','.join(slots)}]"
        for g in sp.sym:
            permuted = f"{name}[{','.join(slots[g[j]] for j in range(sp.arity))}]"
            assert pe(base + " - " + permuted).is_zero(), (name, g)
