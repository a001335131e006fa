import cmath
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from discretegl.errors import DomainError, ModeError, PreconditionError, SpectrumNotRepresentable
from discretegl.exactcore import FLOAT, convert, GaussianRational, I_UNIT, Polynomial, diag, identity, matrix, poly_gcd
from discretegl.spectral import (
    continued_fraction,
    convergents,
    eigen_chain_verify,
    exact_eigenvalues,
    is_diagonalizable,
    jordan_basis,
    jordan_block_power,
    minimal_polynomial,
    root_of_unity_order,
    simultaneous_diagonalize,
    unit_part_order,
)
from discretegl.structure import commutator

from conftest import M, gr


def P(*coeffs):
    return Polynomial([Fraction(c) for c in coeffs])


small = st.fractions(min_value=-5, max_value=5, max_denominator=3)


def exact_square(n):
    return st.lists(st.lists(st.builds(str, small), min_size=n, max_size=n), min_size=n, max_size=n).map(matrix)


def sympy_matrix(A):
    return sympy.Matrix([[sympy.Rational(z.re.numerator, z.re.denominator)
                          + sympy.I * sympy.Rational(z.im.numerator, z.im.denominator) for z in r]
                         for r in A.rows()])


# minimal polynomial

def test_minpoly_examples():
    assert minimal_polynomial(identity(2)) == P(-1, 1)
    assert minimal_polynomial(M([1, 1], [0, 1])) == P(1, -2, 1)
    assert minimal_polynomial(diag(2, 3)) == P(6, -5, 1)


def test_minpoly_float_refused():
    with pytest.raises(ModeError):
        minimal_polynomial(identity(2, FLOAT))


def _dependency_oracle(A):
    """Smallest k with A^k in the span of lower powers, via sympy rank on vectorized powers."""
    n = A.n
    S = sympy_matrix(A)
    vecs = [sympy.eye(n)]
    for k in range(1, n + 1):
        vecs.append(vecs[-1] * S)
        stacked = sympy.Matrix.hstack(*[v.reshape(n * n, 1) for v in vecs])
        if stacked.rank() < k + 1:
            return k
    return n  # pragma: no cover


@given(exact_square(3))
def test_minpoly_annihilates_and_is_minimal(A):
    mp = minimal_polynomial(A)
    assert not any(z for r in mp.eval_matrix(A).rows() for z in r)
    assert mp.leading == GaussianRational(1)
    assert mp.degree == _dependency_oracle(A)


# diagonalizability

def test_diagonalizability_examples():
    assert not is_diagonalizable(M([1, 1], [0, 1]))
    assert is_diagonalizable(diag(5, 5))
    assert is_diagonalizable(M([0, -1], [1, 0]))
    w = np.linalg.eigvals(np.array([[0, -1], [1, 0]], dtype=float))
    assert sorted(w.imag) == pytest.approx([-1, 1])


@given(exact_square(3))
def test_diagonalizable_iff_squarefree(A):
    mp = minimal_polynomial(A)
    squarefree = poly_gcd(mp, mp.derivative()).degree == 0
    assert bool(is_diagonalizable(A)) == squarefree
    assert bool(is_diagonalizable(A, fast=False)) == squarefree


@given(exact_square(3))
def test_squarefree_agrees_with_eigenspace_dimensions(A):
    try:
        roots = exact_eigenvalues(A)
    except SpectrumNotRepresentable:
        return
    S = sympy_matrix(A)
    total = 0
    for lam, _ in roots:
        shift = S - (sympy.Rational(lam.re.numerator, lam.re.denominator)
                     + sympy.I * sympy.Rational(lam.im.numerator, lam.im.denominator)) * sympy.eye(A.n)
        total += A.n - shift.rank()
    assert bool(is_diagonalizable(A)) == (total == A.n)


def test_float_diagonalizability():
    assert not is_diagonalizable(matrix([[1, 1], [0, 1]], FLOAT))
    assert is_diagonalizable(matrix([[1, 1], [1, 2]], FLOAT))


# Jordan blocks

def _jordan_unit(lam, m):
    return [[lam if i == j else (GaussianRational(1) if j == i + 1 else GaussianRational(0))
             for j in range(m)] for i in range(m)]


def test_jordan_block_power_examples():
    assert jordan_block_power(1, 2, 3) == M([1, 3], [0, 1])
    assert jordan_block_power(2, 3, 2) == M([4, 4, 1], [0, 4, 4], [0, 0, 4])
    lam = gr(3, -2)
    assert jordan_block_power(lam, 1, 5) == matrix([[lam ** 5]])


def test_jordan_block_power_zero_eigenvalue():
    with pytest.raises(DomainError):
        jordan_block_power(0, 2, 3)


@pytest.mark.parametrize("lam", [gr(1), gr(2), gr(Fraction(1, 2)), I_UNIT])
def test_jordan_power_matches_repeated_product(lam):
    for m in range(1, 6):
        base = jordan_block_power(lam, m, 1)
        assert base == matrix(_jordan_unit(lam, m))
        acc = base
        for k in range(1, 13):
            assert jordan_block_power(lam, m, k) == acc
            acc = acc @ base


def test_jordan_basis_examples():
    js = jordan_basis(diag(3, 3))
    assert [(z, s) for z, s in js.blocks] == [(gr(3), 1), (gr(3), 1)]
    assert js.basis == identity(2)
    js = jordan_basis(M([1, 1], [0, 1]))
    assert [(z, s) for z, s in js.blocks] == [(gr(1), 2)]
    assert js.basis == identity(2)
    js = jordan_basis(M([5, 1, 0], [0, 5, 0], [0, 0, 2]))
    assert [(z, s) for z, s in js.blocks] == [(gr(5), 2), (gr(2), 1)]


def test_jordan_basis_irrational_spectrum():
    with pytest.raises(SpectrumNotRepresentable):
        jordan_basis(M([1, 1], [1, 2]))
    js = jordan_basis(matrix([[1, 1], [1, 2]], FLOAT))
    assert sum(s for _, s in js.blocks) == 2


@given(exact_square(3))
def test_jordan_reconstruction(A):
    try:
        js = jordan_basis(A)
    except SpectrumNotRepresentable:
        return
    assert sum(s for _, s in js.blocks) == A.n
    assert js.basis @ A @ js.basis.inverse() == js.jordan
    # block sizes agree with sympy's Jordan form
    _, J = sympy_matrix(A).jordan_form()
    sizes = []
    i = 0
    while i < A.n:
        j = i
        while j + 1 < A.n and J[j, j + 1] == 1:
            j += 1
        sizes.append(j - i + 1)
        i = j + 1
    assert sorted(sizes) == sorted(s for _, s in js.blocks)


# simultaneous diagonalization

def test_simultaneous_examples():
    w = simultaneous_diagonalize([diag(2, 3), diag(5, 7)])
    assert w.basis == identity(2)
    w = simultaneous_diagonalize([M([0, 1], [1, 0])])
    rows = [[z.re for z in r] for r in w.basis.rows()]
    assert sorted([r[0] == r[1], r[0] == -r[1]] for r in rows) == [[False, True], [True, False]]
    assert w.diagonals[0] == diag(1, -1)
    with pytest.raises(PreconditionError):
        simultaneous_diagonalize([M([0, 1], [1, 0]), M([1, 1], [0, 1])])


@given(st.lists(small, min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3),
       st.lists(st.integers(-3, 3), min_size=9, max_size=9))
def test_simultaneous_commuting_family(d1, d2, u):
    U = matrix([u[0:3], u[3:6], u[6:9]])
    if not U.det():
        return
    Ui = U.inverse()
    fam = [U @ diag(*[str(x) for x in d1]) @ Ui, U @ diag(*[str(x) for x in d2]) @ Ui]
    w = simultaneous_diagonalize(fam)
    for X in fam:
        assert (w.basis @ X @ w.basis.inverse()).is_diagonal()
    wf = simultaneous_diagonalize([convert(X, FLOAT) for X in fam])
    for D in wf.diagonals:
        off = D.to_numpy() - np.diag(np.diag(D.to_numpy()))
        assert np.max(np.abs(off)) < 1e-6


# roots of unity

def test_root_of_unity_examples():
    assert root_of_unity_order(I_UNIT) == 4
    assert root_of_unity_order(gr(1)) == 1
    assert root_of_unity_order(cmath.exp(1j), 360) is None
    assert root_of_unity_order(cmath.exp(2j * cmath.pi * 5 / 7)) == 7


def test_exp_i_has_no_small_convergent():
    # oracle: no denominator q <= 360 brings exp(i q) within 1e-9 of 1
    qs = [q for q in range(1, 361) if abs(cmath.exp(1j * q) - 1) < 1e-9]
    assert qs == []


def test_root_of_unity_needs_unit_modulus():
    with pytest.raises(DomainError):
        root_of_unity_order(gr(2))


def test_unit_part_order():
    assert unit_part_order(gr(0, 2)) == 4
    assert unit_part_order(gr(1, 1)) == 8
    assert unit_part_order(gr(3, 4)) is None
    assert unit_part_order(-2.0) == 2


def test_continued_fraction_of_rational():
    assert continued_fraction(0.75) == [0, 1, 3]
    assert convergents([0, 1, 3])[-1] == Fraction(3, 4)


# eigenvalue chain

def test_chain_heisenberg_a_not_diagonalizable(heisenberg):
    a, b = heisenberg.generators
    c = commutator(a, b)
    with pytest.raises(PreconditionError, match="a is not diagonalizable"):
        eigen_chain_verify(a, b, c)


def test_chain_torsion_c():
    with pytest.raises(PreconditionError, match="c is torsion"):
        eigen_chain_verify(diag(2, 3), identity(2), identity(2))


def test_chain_constructed_float_triple():
    a = diag(2, 4, 1, mode=FLOAT)
    b = matrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]], FLOAT)
    c = commutator(a, b)
    assert np.allclose(np.diag(c.to_numpy()), [2, 2, 0.25])
    with pytest.raises(PreconditionError, match="bc=cb"):
        eigen_chain_verify(a, b, c)
    rep = eigen_chain_verify(a, b, c, strict=False)
    assert rep.lambda_c == pytest.approx(2)
    # oracle: a (b v) = 4 e2 = 2 * 2 * (b v); a (b^2 v) = e3 but the target is 8 e3
    assert rep.holds == [True, False]
    assert rep.first_failure == 2 <= a.n
