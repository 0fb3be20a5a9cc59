import math
from itertools import combinations_with_replacement

import numpy as np
import pytest

from pinchsim.bogoliubov import (
    OperatorPolynomial,
    TermBudgetError,
    b_approx,
    c1_closed_form,
    c2_closed_form,
    c_term,
    commutator,
    generator,
    polar_decompose,
    squeeze_closed_form,
)
from pinchsim.tensor import SymmetricTensor, ghz_tensor


def random_tensor(rng, n, d, density=0.6, scale=0.2):
    entries = {}
    for key in combinations_with_replacement(range(1, n * d + 1), n):
        if rng.random() < density:
            entries[key] = complex(rng.normal(), rng.normal()) * scale
    return SymmetricTensor(n, d, entries)


def random_poly(rng, modes=3, nterms=4, degree=2):
    terms = {}
    for _ in range(nterms):
        cre = tuple(sorted(rng.integers(1, modes + 1, size=rng.integers(0, degree + 1))))
        ann = tuple(sorted(rng.integers(1, modes + 1, size=rng.integers(0, degree + 1))))
        terms[(cre, ann)] = complex(rng.normal(), rng.normal())
    return OperatorPolynomial(terms)


class TestCommutator:
    def test_canonical_pair(self):
        a1 = OperatorPolynomial.annihilation(1)
        assert commutator(a1, OperatorPolynomial.creation(1)) == \
            OperatorPolynomial.identity()

    def test_distinct_modes_commute(self):
        a1 = OperatorPolynomial.annihilation(1)
        assert commutator(a1, OperatorPolynomial.creation(2)).is_zero()

    def test_three_creators(self):
        a1 = OperatorPolynomial.annihilation(1)
        triple = OperatorPolynomial.monomial(1.0, creators=(1, 2, 3))
        assert commutator(a1, triple) == OperatorPolynomial.monomial(1.0, creators=(2, 3))

    def test_antisymmetry_and_linearity(self):
        rng = np.random.default_rng(4)
        for _ in range(8):
            p, q, s = (random_poly(rng) for _ in range(3))
            assert commutator(p, q) == commutator(q, p).scale(-1.0)
            lhs = commutator(p + q.scale(2.5), s)
            rhs = commutator(p, s) + commutator(q, s).scale(2.5)
            assert lhs == rhs

    def test_jacobi_identity(self):
        rng = np.random.default_rng(9)
        for _ in range(4):
            p, q, s = (random_poly(rng, nterms=3, degree=1) for _ in range(3))
            total = commutator(commutator(p, q), s) + \
                commutator(commutator(q, s), p) + \
                commutator(commutator(s, p), q)
            assert total.is_zero()

    def test_term_cap(self):
        rng = np.random.default_rng(5)
        p = random_poly(rng, modes=4, nterms=6, degree=3)
        q = random_poly(rng, modes=4, nterms=6, degree=3)
        with pytest.raises(TermBudgetError):
            commutator(p, q, term_cap=3)


class TestNormalOrdering:
    def test_a2_adag2(self):
        p = OperatorPolynomial.monomial(1.0, annihilators=(1, 1))
        q = OperatorPolynomial.monomial(1.0, creators=(1, 1))
        expected = OperatorPolynomial({
            ((), ()): 2.0,
            ((1,), (1,)): 4.0,
            ((1, 1), (1, 1)): 1.0,
        })
        assert p.multiply(q) == expected

    def test_adjoint_involution(self):
        rng = np.random.default_rng(8)
        p = random_poly(rng)
        assert p.adjoint().adjoint() == p

    def test_pretty_print_golden(self):
        gen = generator(ghz_tensor(3, 0.6, 0.0))
        assert gen.to_text() == (
            "(-0.6+0i) a[1,3,5] (-0.6+0i) a[2,4,6] "
            "(+0.6+0i) a†[1,3,5] (+0.6+0i) a†[2,4,6]"
        )


class TestGenerator:
    def test_ghz_form(self):
        gen = generator(ghz_tensor(3, 0.7, 0.0))
        assert gen.coefficient(creators=(1, 3, 5)) == pytest.approx(0.7)
        assert gen.coefficient(creators=(2, 4, 6)) == pytest.approx(0.7)
        assert gen.coefficient(annihilators=(1, 3, 5)) == pytest.approx(-0.7)
        assert len(gen.terms) == 4

    def test_zero_tensor(self):
        assert generator(SymmetricTensor(3, 2)).is_zero()

    def test_rank1_displacement(self):
        xi = [0.3 + 0.1j, -0.2j, 0.05]
        t = SymmetricTensor(1, 3, {(j + 1,): xi[j] for j in range(3)})
        gen = generator(t)
        for j in range(3):
            assert gen.coefficient(creators=(j + 1,)) == pytest.approx(xi[j])
            assert gen.coefficient(annihilators=(j + 1,)) == \
                pytest.approx(-xi[j].conjugate())

    def test_skew_hermitian(self):
        rng = np.random.default_rng(12)
        for n, d in [(1, 3), (2, 2), (3, 2)]:
            gen = generator(random_tensor(rng, n, d))
            assert (gen.adjoint() + gen).is_zero()


class TestRecursion:
    def test_rank1(self):
        t = SymmetricTensor(1, 2, {(1,): 0.3 + 0.1j, (2,): -0.2j})
        assert c_term(t, 1, 1) == OperatorPolynomial.identity(0.3 + 0.1j)
        assert c_term(t, 1, 2).is_zero()
        assert c_term(t, 2, 3).is_zero()

    def test_rank2_first_order(self):
        rng = np.random.default_rng(2)
        t = random_tensor(rng, 2, 2, density=1.0)
        for i in range(1, 5):
            c1 = c_term(t, i, 1)
            for j in range(1, 5):
                assert c1.coefficient(creators=(j,)) == pytest.approx(t.value(i, j))

    def test_ghz_first_order(self):
        c1 = c_term(ghz_tensor(3, 0.45, 0.0), 1, 1)
        assert c1 == OperatorPolynomial.monomial(0.45, creators=(3, 5))

    def test_closed_forms_match_recursion(self):
        rng = np.random.default_rng(21)
        for rank, nd, d in [(1, 4, 4), (2, 4, 2), (3, 6, 2)]:
            t = random_tensor(rng, rank, d)
            for i in range(1, nd + 1):
                assert c_term(t, i, 1) == c1_closed_form(t, i)
                if rank >= 2:
                    assert c_term(t, i, 2) == c2_closed_form(t, i)

    def test_c2_n3_explicit_formula(self):
        # independent construction of the normal-ordered n=3 expression:
        # (1/2) sum xi_ijk conj(xi_jkl) a_l
        #   + (1/2) sum xi_ijk conj(xi_klm) adag_j a_l a_m
        rng = np.random.default_rng(31)
        t = random_tensor(rng, 3, 2, density=0.5)
        nd = 6
        for i in (1, 4):
            terms = {}
            for j in range(1, nd + 1):
                for k in range(1, nd + 1):
                    xij = t.value(i, j, k)
                    if xij == 0:
                        continue
                    for l in range(1, nd + 1):
                        key = ((), (l,))
                        terms[key] = terms.get(key, 0.0) + \
                            0.5 * xij * t.value(j, k, l).conjugate()
                        for m in range(1, nd + 1):
                            key = ((j,), tuple(sorted((l, m))))
                            terms[key] = terms.get(key, 0.0) + \
                                0.5 * xij * t.value(k, l, m).conjugate()
            assert OperatorPolynomial(terms) == c_term(t, i, 2)

    def test_c2_zero_tensor(self):
        assert c2_closed_form(SymmetricTensor(3, 2), 1).is_zero()


class TestBApprox:
    def test_order_zero(self):
        t = ghz_tensor(3, 0.5)
        assert b_approx(t, 2, 0) == OperatorPolynomial.annihilation(2)

    def test_ghz_order_one(self):
        t = ghz_tensor(3, 0.5, 0.0)
        expected = OperatorPolynomial.annihilation(1) + \
            OperatorPolynomial.monomial(0.5, creators=(3, 5))
        assert b_approx(t, 1, 1) == expected

    def test_diagonal_squeezing_limit(self):
        s = 0.3
        t = SymmetricTensor(2, 1, {(1, 1): s, (2, 2): s})
        poly = b_approx(t, 1, 12)
        assert poly.coefficient(annihilators=(1,)) == pytest.approx(math.cosh(s), abs=1e-12)
        assert poly.coefficient(creators=(1,)) == pytest.approx(math.sinh(s), abs=1e-12)


class TestPolarAndSqueeze:
    def test_diagonal(self):
        factors = polar_decompose(np.diag([0.4, 0.2]).astype(complex))
        np.testing.assert_allclose(factors.R, np.diag([0.4, 0.2]), atol=1e-12)
        np.testing.assert_allclose(factors.Q, np.eye(2), atol=1e-12)

    def test_negative_diagonal(self):
        factors = polar_decompose(np.diag([-0.4, -0.2]).astype(complex))
        np.testing.assert_allclose(factors.R, np.diag([0.4, 0.2]), atol=1e-12)
        np.testing.assert_allclose(factors.Q, -np.eye(2), atol=1e-12)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            xi = m + m.T
            factors = polar_decompose(xi)
            np.testing.assert_allclose(factors.R @ factors.Q, xi, atol=1e-10)
            np.testing.assert_allclose(factors.Q.conj().T @ factors.Q, np.eye(4),
                                       atol=1e-10)
            evals = np.linalg.eigvalsh(factors.R)
            assert evals.min() > -1e-12

    def test_singular_input(self):
        xi = np.zeros((3, 3), dtype=complex)
        xi[0, 0] = 0.5
        factors = polar_decompose(xi)
        np.testing.assert_allclose(factors.R @ factors.Q, xi, atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            polar_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_squeeze_zero(self):
        cosh_m, sinh_q = squeeze_closed_form(np.zeros((2, 2)))
        np.testing.assert_allclose(cosh_m, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(sinh_q, 0.0, atol=1e-14)

    def test_squeeze_scalar_values(self):
        cosh_m, sinh_q = squeeze_closed_form(np.diag([0.3]).astype(complex))
        assert cosh_m[0, 0] == pytest.approx(1.0453385141288605, abs=1e-12)
        assert sinh_q[0, 0] == pytest.approx(0.30452029344714261, abs=1e-12)

    def test_series_matches_closed_form(self):
        rng = np.random.default_rng(17)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        xi = 0.012 * (m + m.T)  # ||xi|| < 0.1
        t = SymmetricTensor(2, 2, {(i + 1, j + 1): xi[i, j]
                                   for i in range(4) for j in range(i, 4)})
        cosh_m, sinh_q = squeeze_closed_form(xi)
        for i in range(1, 5):
            poly = b_approx(t, i, 7)
            for j in range(1, 5):
                assert abs(poly.coefficient(annihilators=(j,)) -
                           cosh_m[i - 1, j - 1]) < 1e-9
                assert abs(poly.coefficient(creators=(j,)) -
                           sinh_q[i - 1, j - 1]) < 1e-9

    def test_parity_pattern(self):
        # even k: only annihilators with matrix R^k; odd k: creators with R^k Q
        rng = np.random.default_rng(23)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        xi = 0.1 * (m + m.T)
        t = SymmetricTensor(2, 2, {(i + 1, j + 1): xi[i, j]
                                   for i in range(4) for j in range(i, 4)})
        factors = polar_decompose(xi)
        for k in range(1, 5):
            coeff = np.linalg.matrix_power(factors.R, k)
            if k % 2:
                coeff = coeff @ factors.Q
            for i in range(1, 5):
                poly = c_term(t, i, k)
                for (cre, ann), value in poly.terms.items():
                    if k % 2:
                        assert len(cre) == 1 and not ann
                    else:
                        assert len(ann) == 1 and not cre
                for j in range(1, 5):
                    got = poly.coefficient(creators=(j,)) if k % 2 else \
                        poly.coefficient(annihilators=(j,))
                    assert got == pytest.approx(coeff[i - 1, j - 1], abs=1e-12)
