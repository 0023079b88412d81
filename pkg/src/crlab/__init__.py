"""crlab: weight (-3,-3) pseudo-hermitian invariants on CR 5-manifolds.

Symbolic layer: abstract-index tensor expressions over exact Gaussian
rationals, canonical forms, the identities of pseudo-Einstein geometry
and the divergence quotient.  Numeric layer: exact-formula geometry of
the CR sphere and a Reinhardt hypersurface with quadrature, used both as
an oracle for every rewrite rule and to assemble the classification
constraints.
"""

from .algebra import GaussRat, rat
from .expr import TExpr
from .parser import parse_expression

__all__ = ["GaussRat", "rat", "TExpr", "parse_expression"]
__version__ = "0.1.0"
