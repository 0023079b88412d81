"""Parser for the expression grammar.

::

    expr   := [sign] term (sign term)*
    term   := (coeff '*'?)? factor ('*' factor)*  |  coeff
    coeff  := 'i' | number ['i'] | '(' [sign] number ['i'] [sign [number] 'i'] ')'
    number := INT ['/' INT]
    factor := NAME ['[' slot (',' slot)* ']'] | 'D' '[' slot ']' '(' factor ')'
    slot   := ('^'|'_') (letter ['!'] | '0')

Contraction: a letter occurring twice in a monomial, once lower and once
upper, with the same effective bartype.  A lower slot must be written with
the bar of its declared species bartype; on an upper (raised) slot the bar
is accepted either way, the effective bartype being the opposite of the
declared one.  ``hinv`` slots are natively upper and contract lower slots
of their declared bartype directly; contracted ``hinv``/``h`` factors are
absorbed into the contraction pattern.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .algebra import GaussRat, ONE
from .errors import IndexUsageError, ParseError
from .expr import Factor, TExpr
from .species import ANTI, HOLO, REEB, SPECIES, flip, species

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9]*~?)|(?P<punct>[-+*/()\[\],^_!]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append((m.group("punct"), m.group("punct"), m.start("punct")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, kind: str):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    # -- coefficient -------------------------------------------------------

    def _number(self) -> Fraction:
        t = self.expect("num")
        val = Fraction(int(t[1]))
        if self.peek()[0] == "/":
            self.next()
            d = self.expect("num")
            val /= int(d[1])
        return val

    def _try_coeff(self) -> GaussRat | None:
        t = self.peek()
        if t[0] == "num":
            v = self._number()
            if self.peek()[0] == "name" and self.peek()[1] == "i":
                self.next()
                return GaussRat(Fraction(0), v)
            return GaussRat(v, Fraction(0))
        if t[0] == "name" and t[1] == "i":
            self.next()
            return GaussRat(Fraction(0), Fraction(1))
        if t[0] == "(":
            # complex coefficient in parentheses
            self.next()
            sign = 1
            if self.peek()[0] in "+-":
                sign = -1 if self.next()[0] == "-" else 1
            first = self._number() * sign
            re_part, im_part = first, Fraction(0)
            if self.peek()[0] == "name" and self.peek()[1] == "i":
                self.next()
                re_part, im_part = Fraction(0), first
            if self.peek()[0] in "+-":
                s2 = -1 if self.next()[0] == "-" else 1
                if self.peek()[0] == "num":
                    v2 = self._number()
                else:
                    v2 = Fraction(1)
                it = self.expect("name")
                if it[1] != "i":
                    raise ParseError("expected 'i' in complex coefficient", it[2])
                im_part = s2 * v2
            self.expect(")")
            return GaussRat(re_part, im_part)
        return None

    # -- factors -----------------------------------------------------------

    def _slot(self, allow_reeb: bool):
        t = self.next()
        if t[0] not in ("^", "_"):
            raise ParseError(f"expected slot, found {t[1]!r}", t[2])
        upper = t[0] == "^"
        nt = self.next()
        if nt[0] == "num" and nt[1] == "0":
            if upper or not allow_reeb:
                raise ParseError("reeb slot must be a lower derivative slot", nt[2])
            return ("0", "", False, nt[2])
        if nt[0] != "name" or len(nt[1]) != 1:
            raise ParseError("slot label must be a single letter", nt[2])
        bar = False
        if self.peek()[0] == "!":
            self.next()
            bar = True
        return ("^" if upper else "_", nt[1], bar, nt[2])

    def _factor(self):
        t = self.expect("name")
        if t[1] == "D":
            self.expect("[")
            s = self._slot(allow_reeb=True)
            self.expect("]")
            self.expect("(")
            inner = self._factor()
            self.expect(")")
            return (inner[0], [s] + inner[1], inner[2], t[2])
        name = t[1]
        if name not in SPECIES:
            raise ParseError(f"unknown tensor name {name!r}", t[2])
        sp = species(name)
        slots = []
        if self.peek()[0] == "[":
            self.next()
            slots.append(self._slot(allow_reeb=False))
            while self.peek()[0] == ",":
                self.next()
                slots.append(self._slot(allow_reeb=False))
            self.expect("]")
        if len(slots) != sp.arity:
            raise ParseError(
                f"{name} takes {sp.arity} slots, {len(slots)} given", t[2]
            )
        return (name, [], slots, t[2])

    def _term(self):
        coeff = self._try_coeff()
        factors = []
        if coeff is not None and self.peek()[0] == "*":
            self.next()
            factors.append(self._factor())
        elif self.peek()[0] == "name":
            factors.append(self._factor())
        while self.peek()[0] == "*":
            self.next()
            factors.append(self._factor())
        if coeff is None and not factors:
            t = self.peek()
            raise ParseError(f"expected term, found {t[1]!r}", t[2])
        return (coeff if coeff is not None else ONE), factors

    def parse(self) -> TExpr:
        out = TExpr()
        sign = 1
        if self.peek()[0] in "+-":
            sign = -1 if self.next()[0] == "-" else 1
        coeff, factors = self._term()
        _add_term(out, coeff if sign > 0 else -coeff, factors)
        while self.peek()[0] in "+-":
            sign = -1 if self.next()[0] == "-" else 1
            coeff, factors = self._term()
            _add_term(out, coeff if sign > 0 else -coeff, factors)
        self.expect("end")
        return out


def _add_term(out: TExpr, coeff: GaussRat, fspecs) -> None:
    """Resolve slot labels of one monomial and add it to ``out``."""
    factors: list[Factor] = []
    records = []  # (eff_key, slot, pos, internal_bt, is_hinv)
    hinv_factors = []
    for fi, (name, dslots, slots, tpos) in enumerate(fspecs):
        sp = species(name)
        bts = []
        for pos, letter, bar, spos in dslots:
            if pos == "0":
                bts.append(REEB)
                continue
            written = ANTI if bar else HOLO
            if pos == "_":
                bts.append(written)
                records.append(((letter, written), (fi, len(bts) - 1), "lo", written, False))
            else:
                bts.append(flip(written))
                records.append(((letter, written), (fi, len(bts) - 1), "up", flip(written), False))
        factors.append(Factor(name, tuple(bts)))
        nd = len(bts)
        for j, (pos, letter, bar, spos) in enumerate(slots):
            decl = sp.bts[j]
            written = ANTI if bar else HOLO
            slot = (fi, nd + j)
            if sp.native_upper:
                if pos != "^" or written != decl:
                    raise ParseError("hinv slots are written upper with their own bartype", spos)
                records.append(((letter, decl), slot, "up", decl, True))
                continue
            if pos == "_":
                if written != decl:
                    raise IndexUsageError(
                        f"slot {j + 1} of {name} is "
                        f"{'antiholomorphic' if decl == ANTI else 'holomorphic'}"
                    )
                records.append(((letter, decl), slot, "lo", decl, False))
            else:
                records.append(((letter, flip(decl)), slot, "up", decl, False))
        if sp.native_upper:
            hinv_factors.append(fi)

    buckets: dict[tuple[str, str], list] = {}
    for rec in records:
        buckets.setdefault(rec[0], []).append(rec)

    pairs: list[tuple] = []
    free: list[tuple] = []
    hinv_link: dict[tuple, tuple] = {}
    for key, bucket in buckets.items():
        if len(bucket) > 2:
            raise IndexUsageError(f"label {key[0]!r} used more than twice")
        if len(bucket) == 1:
            rec = bucket[0]
            if rec[4]:
                hinv_link[rec[1]] = None
            else:
                free.append((rec[1], key[0], rec[2] == "up"))
            continue
        r1, r2 = bucket
        if r1[4] or r2[4]:
            hv, other = (r1, r2) if r1[4] else (r2, r1)
            if other[4] or other[2] != "lo":
                raise IndexUsageError(f"label {key[0]!r}: cannot contract two upper slots")
            hinv_link[hv[1]] = other[1]
            continue
        if r1[2] == r2[2]:
            raise IndexUsageError(f"label {key[0]!r} used twice in the same position")
        a, b = (r1, r2) if r1[3] == HOLO else (r2, r1)
        if a[3] != HOLO or b[3] != ANTI:
            raise IndexUsageError(f"label {key[0]!r}: bartype mismatch in contraction")
        pairs.append((a[1], b[1]))

    # absorb contracted hinv factors into the pairing
    delete = set()
    for fi in hinv_factors:
        s0, s1 = (fi, 0), (fi, 1)
        l0, l1 = hinv_link.get(s0, None), hinv_link.get(s1, None)
        if l0 is None and l1 is None and s0 in hinv_link and s1 in hinv_link:
            # both slots free: keep the factor; recover labels from records
            for rec in records:
                if rec[1] in (s0, s1):
                    free.append((rec[1], rec[0][0], False))
            continue
        if l0 is not None and l1 is not None:
            pairs.append((l0, l1))
        elif l0 is not None:
            lab = next(rec[0][0] for rec in records if rec[1] == s1)
            free.append((l0, lab, True))
        elif l1 is not None:
            lab = next(rec[0][0] for rec in records if rec[1] == s0)
            free.append((l1, lab, True))
        delete.add(fi)

    if delete:
        remap = {}
        new_factors = []
        for fi, f in enumerate(factors):
            if fi in delete:
                continue
            remap[fi] = len(new_factors)
            new_factors.append(f)

        def mv(slot):
            return (remap[slot[0]], slot[1])

        pairs = [(mv(u), mv(v)) for u, v in pairs]
        free = [(mv(s), lab, r) for s, lab, r in free]
        factors = new_factors

    out.add_raw(coeff, tuple(factors), pairs, free)


def parse_expression(text: str) -> TExpr:
    """Parse, weight-check and canonicalize an expression string."""
    e = _Parser(text).parse()
    e.weight()
    e.free_signature()
    return e
