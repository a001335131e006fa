from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from discretegl.errors import DomainError, ModeError, SingularMatrixError
from discretegl.exactcore import (
    FLOAT,
    GaussianRational,
    GroupSpec,
    Polynomial,
    diag,
    format_scalar,
    identity,
    mat_inverse,
    matrix,
    operator_norm,
    parse_scalar,
    poly_gcd,
)

from conftest import M, brute_product, gr

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=7)


def gaussian():
    return st.builds(GaussianRational, fractions, fractions)


def exact_matrices(n):
    return st.lists(st.lists(st.builds(str, fractions), min_size=n, max_size=n), min_size=n, max_size=n).map(matrix)


def P(*coeffs):
    return Polynomial([Fraction(c) for c in coeffs])


# scalars

@pytest.mark.parametrize("text, re, im", [
    ("3", 3, 0), ("-1/2", Fraction(-1, 2), 0), ("1/2+3/4*i", Fraction(1, 2), Fraction(3, 4)),
    ("-i", 0, -1), ("2*i", 0, 2), ("0.25", Fraction(1, 4), 0), ("1-i", 1, -1),
])
def test_parse_scalar(text, re, im):
    assert parse_scalar(text) == gr(re, im)


def test_parse_rejects_garbage():
    with pytest.raises(DomainError):
        parse_scalar("1/0")
    with pytest.raises(DomainError):
        parse_scalar("two")


def test_float_cannot_enter_exact():
    with pytest.raises(ModeError):
        GaussianRational(0.5)


@given(gaussian())
def test_format_parse_roundtrip(z):
    assert parse_scalar(format_scalar(z)) == z


@given(st.integers(-50, 50), st.integers(1, 50), st.integers(-50, 50), st.integers(1, 50))
def test_normalization_idempotent(a, b, c, d):
    z = GaussianRational.from_parts(a, b, c, d)
    assert z.normalized() == z
    assert z.normalized().normalized() == z.normalized()
    from math import gcd
    assert z.re_den > 0 and z.im_den > 0
    assert gcd(z.re_num, z.re_den) == 1 and gcd(z.im_num, z.im_den) == 1


@given(gaussian(), gaussian())
def test_field_arithmetic_matches_complex(a, b):
    assert complex(a * b) == pytest.approx(complex(a) * complex(b))
    if b:
        assert (a / b) * b == a


# polynomials

def test_gcd_shared_linear_factor():
    assert poly_gcd(P(-1, 0, 1), P(1, 1)) == P(1, 1)


def test_gcd_coprime():
    assert poly_gcd(P(1, 0, 1), P(-1, 1)) == P(1)


def test_gcd_common_factor():
    assert poly_gcd(P(1, -2, 1), P(2, -3, 1)) == P(-1, 1)


def test_gcd_float_mode_refused():
    with pytest.raises(ModeError):
        poly_gcd(Polynomial([1.0, 2.0]), Polynomial([1.0, 1.0]))


@given(st.lists(fractions, min_size=1, max_size=5), st.lists(fractions, min_size=1, max_size=5),
       st.lists(fractions, min_size=0, max_size=3))
def test_gcd_divides_both(a, b, c):
    common = Polynomial(c + [Fraction(1)])
    p, q = Polynomial(a) * common, Polynomial(b) * common
    if p.is_zero and q.is_zero:
        return
    g = poly_gcd(p, q)
    assert p.divmod(g)[1].is_zero and q.divmod(g)[1].is_zero
    assert g.leading == GaussianRational(1)
    assert g.divmod(common)[1].is_zero


# matrices

def test_inverse_examples():
    assert mat_inverse(identity(2)) == identity(2)
    assert mat_inverse(diag("2", "1/2")) == diag("1/2", "2")
    assert mat_inverse(M([1, 1], [0, 1])) == M([1, -1], [0, 1])


def test_singular_inverse():
    with pytest.raises(SingularMatrixError):
        mat_inverse(M([1, 2], [2, 4]))


@given(exact_matrices(3))
def test_double_inverse(A):
    if not A.det():
        return
    assert mat_inverse(mat_inverse(A)) == A
    assert A @ mat_inverse(A) == identity(3)


@given(exact_matrices(3), exact_matrices(3))
def test_product_matches_nested_loops(A, B):
    rows = lambda X: [[z.re for z in r] for r in X.rows()]
    expected = brute_product([rows(A), rows(B)], 3)
    assert [[z.re for z in r] for r in (A @ B).rows()] == expected


def test_operator_norm_examples():
    assert operator_norm(identity(2)) == pytest.approx(1.0, rel=1e-9)
    assert operator_norm(diag(2, 3)) == pytest.approx(3.0, rel=1e-9)
    # nilpotent shift: singular values are 1 and 0
    assert operator_norm(M([0, 1], [0, 0])) == pytest.approx(1.0, rel=1e-9)


@given(exact_matrices(3), exact_matrices(3))
def test_operator_norm_submultiplicative(A, B):
    assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) + 1e-9


@given(exact_matrices(2))
def test_operator_norm_is_sup_over_vectors(A):
    a = A.to_numpy()
    rng = np.random.default_rng(0)
    vs = rng.normal(size=(2, 200)) + 1j * rng.normal(size=(2, 200))
    ratios = np.linalg.norm(a @ vs, axis=0) / np.linalg.norm(vs, axis=0)
    assert ratios.max() <= operator_norm(A) * (1 + 1e-9) + 1e-12
    assert operator_norm(A) == pytest.approx(np.linalg.svd(a, compute_uv=False)[0], rel=1e-9, abs=1e-12)


def test_group_spec_symmetric():
    spec = GroupSpec.from_entries([[["1", "2"], ["0", "1"]], [["1", "0"], ["2", "1"]]])
    labels = [lab for lab, _ in spec.symmetric]
    assert labels == [1, -1, 2, -2]
    for lab, m in spec.symmetric:
        assert m @ spec.letter(-lab) == identity(2)


def test_group_spec_rejects_singular():
    with pytest.raises(SingularMatrixError):
        GroupSpec.from_entries([[["1", "2"], ["2", "4"]]])


def test_group_spec_float_tolerance():
    spec = GroupSpec.from_entries([[[1, 1], [1, 2]]], mode=FLOAT)
    assert spec.mode == FLOAT
    assert spec.equal(spec.evaluate([1, -1]), spec.identity)
