"""Registry of tensor species: slots, symmetries, CR weights, conjugates.

Everything is hard-fixed to CR dimension n = 2 (real dimension 5).  Slot
bartypes use the all-lowered convention: 'h' for a holomorphic lower slot,
'a' for an antiholomorphic lower slot.  Raised slots are represented by
markers on the monomial, not by separate species (except ``hinv``, whose
two slots are natively upper).
"""

from __future__ import annotations

from dataclasses import dataclass, field

NDIM = 2  # CR dimension n; trace of the Levi form

HOLO = "h"
ANTI = "a"
REEB = "0"


def flip(bt: str) -> str:
    if bt == HOLO:
        return ANTI
    if bt == ANTI:
        return HOLO
    return bt


@dataclass(frozen=True)
class Species:
    name: str
    bts: tuple[str, ...]  # slot bartypes, all-lowered convention
    weight: int  # diagonal CR weight (m, m)
    sym: tuple[tuple[int, ...], ...] = ((),)  # slot permutation group (identity included)
    selftrace_zero: bool = False  # any contraction between two own slots vanishes
    conj_name: str = ""
    conj_perm: tuple[int, ...] = ()  # new slot j carries the line of old slot conj_perm[j]
    parallel: bool = False  # covariant derivative vanishes (Levi form and inverse)
    native_upper: bool = False  # slots are written upper (hinv only)

    @property
    def arity(self) -> int:
        return len(self.bts)


def _grp(arity: int, *gens: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Close a set of slot permutations into a group (small groups only)."""
    ident = tuple(range(arity))
    elems = {ident}
    frontier = [ident]
    gens = tuple(gens)
    while frontier:
        g = frontier.pop()
        for s in gens:
            h = tuple(g[s[k]] for k in range(arity))
            if h not in elems:
                elems.add(h)
                frontier.append(h)
    return tuple(sorted(elems))


_PAIR_SWAP = (1, 0)
_R_SYM = _grp(4, (2, 1, 0, 3), (0, 3, 2, 1))  # exchange slots 1<->3 and 2<->4

SPECIES: dict[str, Species] = {}


def _register(sp: Species) -> None:
    SPECIES[sp.name] = sp


_register(Species("h", (HOLO, ANTI), 1, ((0, 1),), conj_name="h", conj_perm=(1, 0), parallel=True))
_register(Species("hinv", (HOLO, ANTI), -1, ((0, 1),), conj_name="hinv", conj_perm=(1, 0),
                  parallel=True, native_upper=True))
_register(Species("A", (HOLO, HOLO), 0, _grp(2, _PAIR_SWAP), conj_name="A~", conj_perm=(0, 1)))
_register(Species("A~", (ANTI, ANTI), 0, _grp(2, _PAIR_SWAP), conj_name="A", conj_perm=(0, 1)))
_register(Species("R", (HOLO, ANTI, HOLO, ANTI), 1, _R_SYM, conj_name="R", conj_perm=(1, 0, 3, 2)))
_register(Species("S", (HOLO, ANTI, HOLO, ANTI), 1, _R_SYM, selftrace_zero=True,
                  conj_name="S", conj_perm=(1, 0, 3, 2)))
_register(Species("V", (HOLO, ANTI, HOLO), 0, _grp(3, (2, 1, 0)), selftrace_zero=True,
                  conj_name="V~", conj_perm=(0, 1, 2)))
_register(Species("V~", (ANTI, HOLO, ANTI), 0, _grp(3, (2, 1, 0)), selftrace_zero=True,
                  conj_name="V", conj_perm=(0, 1, 2)))
_register(Species("P", (), -1, ((),), conj_name="P", conj_perm=()))
_register(Species("Pab", (HOLO, ANTI), 0, ((0, 1),), conj_name="Pab", conj_perm=(1, 0)))
_register(Species("T", (HOLO,), -1, ((0,),), conj_name="T~", conj_perm=(0,)))
_register(Species("T~", (ANTI,), -1, ((0,),), conj_name="T", conj_perm=(0,)))
_register(Species("U", (), 0, ((),), conj_name="U", conj_perm=()))


def species(name: str) -> Species:
    try:
        return SPECIES[name]
    except KeyError:
        raise KeyError(f"unknown tensor species {name!r}") from None
