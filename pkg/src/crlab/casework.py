"""Candidate invariants of weight (-3,-3): the seven building-block cases.

Weight counting over the blocks {curvature, torsion, conjugate torsion,
holomorphic and antiholomorphic derivatives} forces exactly three inverse
Levi forms, which leaves the seven multisets below (with conjugates where
the block content is chiral).  Every complete contraction of each case is
generated, canonicalized, and reduced into the divergence quotient.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import GaussRat, ONE
from .expr import Mono, TExpr, canonical, mono_str, normalize, _mono_grade
from .expr import Factor, nslots, slot_bt
from .quotient import DivergenceQuotient, _typed_slots
from .species import ANTI, HOLO


@dataclass(frozen=True)
class BuildingBlockCase:
    case_id: int
    tensors: tuple[str, ...]
    d_holo: int
    d_anti: int
    conjugate: bool = False

    @property
    def label(self) -> str:
        return f"case{self.case_id}" + ("~" if self.conjugate else "")


def enumerate_cases() -> list[BuildingBlockCase]:
    cases = [
        BuildingBlockCase(1, ("A", "A~", "R"), 0, 0),
        BuildingBlockCase(2, ("A", "A~"), 1, 1),
        BuildingBlockCase(3, ("A", "R"), 0, 2),
        BuildingBlockCase(3, ("A~", "R"), 2, 0, conjugate=True),
        BuildingBlockCase(4, ("A",), 1, 3),
        BuildingBlockCase(4, ("A~",), 3, 1, conjugate=True),
        BuildingBlockCase(5, ("R", "R", "R"), 0, 0),
        BuildingBlockCase(6, ("R", "R"), 1, 1),
        BuildingBlockCase(7, ("R",), 2, 2),
    ]
    return cases


def _derivative_assignments(nf: int, d_holo: int, d_anti: int):
    """Ordered derivative prefixes per factor for the given block counts."""
    def splits(rem, k):
        if k == 1:
            yield (rem,)
            return
        for first in range(rem + 1):
            for rest in splits(rem - first, k - 1):
                yield (first,) + rest

    for hsplit in splits(d_holo, nf):
        for asplit in splits(d_anti, nf):
            per_factor = []
            for h, a in zip(hsplit, asplit):
                seqs = sorted(set(itertools.permutations((HOLO,) * h + (ANTI,) * a)))
                per_factor.append(seqs)
            yield from itertools.product(*per_factor)


def enumerate_contractions(case: BuildingBlockCase) -> list[Mono]:
    """All canonically distinct complete contractions of one case."""
    out = set()
    for prefixes in _derivative_assignments(len(case.tensors), case.d_holo, case.d_anti):
        factors = tuple(Factor(n, p) for n, p in zip(case.tensors, prefixes))
        hs, as_ = _typed_slots(factors)
        if len(hs) != len(as_):
            continue
        for perm in itertools.permutations(as_):
            coeff, m = normalize(ONE, factors, tuple(zip(hs, perm)), ())
            if m is not None:
                out.add(canonical(m))
    return sorted(out, key=lambda m: (_mono_grade(m), mono_str(m)))


def reduce_case(case: BuildingBlockCase, q: DivergenceQuotient):
    """Quotient coordinates (on the seven classes) of every case monomial."""
    results = []
    for m in enumerate_contractions(case):
        e = TExpr()
        e.add_mono(ONE, m)
        results.append((m, q.coordinates(e)))
    return results


def case_report(q: DivergenceQuotient) -> list[dict]:
    """Machine-readable summary used by the CLI and the acceptance suite."""
    report = []
    for case in enumerate_cases():
        rows = reduce_case(case, q)
        report.append({
            "case": case.label,
            "tensors": list(case.tensors),
            "derivatives": [case.d_holo, case.d_anti],
            "monomials": len(rows),
            "reduced": [
                {"monomial": mono_str(m), "coordinates": [str(c) for c in coords]}
                for m, coords in rows
            ],
        })
    return report
