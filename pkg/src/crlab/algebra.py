"""Exact Gaussian-rational arithmetic for tensor coefficients.

All coefficients in the symbolic layer are elements of Q(i).  Floating
point only ever appears in the model-evaluation layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class GaussRat:
    """A Gaussian rational a + b*i with exact rational a, b."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(re, im=0) -> "GaussRat":
        return GaussRat(Fraction(re), Fraction(im))

    def __add__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "GaussRat") -> "GaussRat":
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussRat")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        def frac(q: Fraction) -> str:
            return str(q)

        if self.im == 0:
            return frac(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return frac(self.im) + "i"
        im_part = "i" if self.im == 1 else ("-i" if self.im == -1 else frac(self.im) + "i")
        sign = "+" if self.im > 0 and not im_part.startswith("-") else ""
        return "(" + frac(self.re) + sign + im_part + ")"


ZERO = GaussRat.of(0)
ONE = GaussRat.of(1)
MINUS_ONE = GaussRat.of(-1)
I = GaussRat.of(0, 1)
MINUS_I = GaussRat.of(0, -1)


def rat(p, q=1) -> GaussRat:
    """Shorthand for the real rational p/q as a GaussRat."""
    return GaussRat(Fraction(p, q), Fraction(0))
