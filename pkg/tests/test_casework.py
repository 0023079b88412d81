"""Cases 1-7: enumeration and reduction into the seven classes."""

from crlab.casework import BuildingBlockCase, enumerate_cases, enumerate_contractions, reduce_case
from crlab.quotient import CLASS_NAMES

# frozen counts of canonically distinct complete contractions per case
FROZEN_COUNTS = {
    "case1": 3, "case2": 12, "case3": 12, "case3~": 12,
    "case4": 12, "case4~": 12, "case5": 8, "case6": 33, "case7": 42,
}


def _nonzero_classes(rows):
    out = set()
    for _m, coords in rows:
        for name, c in zip(CLASS_NAMES, coords):
            if not c.is_zero():
                out.add(name)
    return out


def test_case_list():
    cases = enumerate_cases()
    labels = [c.label for c in cases]
    assert labels == ["case1", "case2", "case3", "case3~", "case4", "case4~",
                      "case5", "case6", "case7"]
    by_label = {c.label: c for c in cases}
    assert by_label["case1"].tensors == ("A", "A~", "R")
    assert by_label["case5"].tensors == ("R", "R", "R")
    assert (by_label["case2"].d_holo, by_label["case2"].d_anti) == (1, 1)


def test_two_torsions_alone_cannot_contract():
    c = BuildingBlockCase(0, ("A", "A"), 0, 0)
    assert enumerate_contractions(c) == []


def test_contraction_counts():
    for case in enumerate_cases():
        assert len(enumerate_contractions(case)) == FROZEN_COUNTS[case.label], case.label


def test_determinism():
    case5 = [c for c in enumerate_cases() if c.label == "case5"][0]
    assert enumerate_contractions(case5) == enumerate_contractions(case5)


def test_case1_reduction(quotient):
    rows = reduce_case([c for c in enumerate_cases() if c.label == "case1"][0], quotient)
    assert _nonzero_classes(rows) == {"SAA", "P|A|2"}


def test_case2_reduction(quotient):
    rows = reduce_case([c for c in enumerate_cases() if c.label == "case2"][0], quotient)
    assert _nonzero_classes(rows) == {"|V|2", "PDbP", "SAA", "P|A|2"}


def test_case3_reduction(quotient):
    for label in ("case3", "case3~"):
        rows = reduce_case([c for c in enumerate_cases() if c.label == label][0], quotient)
        assert _nonzero_classes(rows) == {"PDbP", "|V|2"}


def test_cases_4_and_7_vanish(quotient):
    for label in ("case4", "case4~", "case7"):
        rows = reduce_case([c for c in enumerate_cases() if c.label == label][0], quotient)
        assert _nonzero_classes(rows) == set(), label


def test_case5_reduction(quotient):
    rows = reduce_case([c for c in enumerate_cases() if c.label == "case5"][0], quotient)
    assert _nonzero_classes(rows) == {"P3", "P|S|2", "S3"}


def test_case5_pure_cubic_contractions_are_multiples(quotient):
    """The two complete contractions of three trace-free curvatures reduce
    to opposite multiples of the single cubic class."""
    from crlab.algebra import rat
    from crlab.parser import parse_expression as pe
    t1 = pe("S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]")
    t2 = pe("S[_n,^b,_g,^m] * S[_a,^n,_m,^t] * S[_b,^a,_t,^g]")
    assert quotient.coordinates(t1) == [rat(0)] * 6 + [rat(1)]
    assert quotient.coordinates(t2) == [rat(0)] * 6 + [rat(-1)]


def test_case6_reduction(quotient):
    rows = reduce_case([c for c in enumerate_cases() if c.label == "case6"][0], quotient)
    assert _nonzero_classes(rows) == {"PDbP", "P|S|2", "S3", "|V|2"}


def test_completeness(quotient):
    """The union of the reduced cases spans the full seven-class space."""
    from crlab.algebra import ZERO
    seen = [set() for _ in range(7)]
    vectors = []
    for case in enumerate_cases():
        for _m, coords in reduce_case(case, quotient):
            vectors.append(coords)
    # rank of the coordinate vectors over Q(i) must be 7
    rank = 0
    basis = []
    for v in vectors:
        v = list(v)
        for b in basis:
            lead = next(k for k in range(7) if not b[k].is_zero())
            if not v[lead].is_zero():
                c = v[lead] / b[lead]
                v = [a - c * bb for a, bb in zip(v, b)]
        if any(not a.is_zero() for a in v):
            basis.append(v)
            rank += 1
    assert rank == 7
