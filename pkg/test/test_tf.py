import numpy as np
import pytest
from pytest import approx

from gfmimp.tf import (Polynomial, RationalTF, TFMatrix2x2, PoleError,
                       poly_add, poly_mul, positive_sequence,
                       rtf_add, rtf_div)


class TestPolynomial:
    def test_trailing_zeros_stripped(self):
        p = Polynomial([1., 2., 0., 0.])
        assert list(p.coeffs) == [1., 2.]
        assert p.degree == 1
        assert p.leading == 2.

        zero = Polynomial([0., 0.])
        assert zero.is_zero
        assert list(zero.coeffs) == [0.]
        assert zero.degree == 0

    def test_immutable(self):
        p = Polynomial([1., 2.])
        with pytest.raises(ValueError):
            p.coeffs[0] = 3.

    def test_invalid(self):
        with pytest.raises(ValueError, match='finite'):
            Polynomial([1., np.inf])
        with pytest.raises(ValueError, match='one-dimensional'):
            Polynomial([[1., 2.], [3., 4.]])

    def test_arithmetic(self):
        a = Polynomial([1., 1.])
        b = Polynomial([2., 1.])
        assert poly_mul(a, b) == Polynomial([2., 3., 1.])
        assert poly_add(a, b) == Polynomial([3., 2.])
        assert a - a == Polynomial([0.])
        assert (a * 2.) == Polynomial([2., 2.])

    def test_roots(self):
        p = Polynomial([2., 3., 1.])
        np.testing.assert_allclose(p.roots(), [-2., -1.], atol=1e-12)
        assert len(Polynomial([5.]).roots()) == 0

        q = Polynomial([1., 0., 1.])
        roots = sorted(q.roots(), key=lambda r: r.imag)
        np.testing.assert_allclose(roots, [-1j, 1j], atol=1e-12)

    def test_origin_multiplicity(self):
        p = Polynomial([0., 0., 3., 1.])
        assert p.origin_multiplicity == 2
        assert p.shift_down(2) == Polynomial([3., 1.])
        with pytest.raises(ValueError):
            p.shift_down(3)


class TestRationalTF:
    def test_monic_denominator(self):
        h = RationalTF([2.], [4., 2.])
        assert list(h.den.coeffs) == [2., 1.]
        assert list(h.num.coeffs) == [1.]

    def test_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            RationalTF(1., 0.)
        with pytest.raises(ZeroDivisionError):
            RationalTF(1.) / RationalTF(0.)

    def test_evaluate(self):
        h = RationalTF([1.], [1., 1.])
        assert isinstance(h(1j), complex)
        assert h(1j) == approx(1 / (1 + 1j))
        values = h(np.array([0., 1j, 2j]))
        assert values.shape == (3,)
        assert values[2] == approx(1 / (1 + 2j))

    def test_pole(self):
        integrator = RationalTF(1., [0., 1.])
        with pytest.raises(PoleError) as err:
            integrator(0.)
        assert err.value.s == 0
        assert isinstance(err.value, ZeroDivisionError)
        with pytest.raises(PoleError):
            integrator(np.array([1j, 0., 2j]))

    def test_conjugate_symmetry(self):
        h = RationalTF([3., 1., 0.2], [5., 2., 1.])
        for w in (0.3, 7., 120.):
            assert h(-1j * w) == approx(np.conj(h(1j * w)))

    def test_arithmetic_matches_pointwise(self):
        a = RationalTF([1., 2.], [3., 1.])
        b = RationalTF.pi(0.5, 10.)
        s = np.array([0.5j, 3j, 40j])
        np.testing.assert_allclose((a + b)(s), a(s) + b(s))
        np.testing.assert_allclose((a * b)(s), a(s) * b(s))
        np.testing.assert_allclose((a / b)(s), a(s) / b(s))
        np.testing.assert_allclose((a - b)(s), a(s) - b(s))
        np.testing.assert_allclose((1 - a)(s), 1 - a(s))
        np.testing.assert_allclose((2 / a)(s), 2 / a(s))

    def test_shared_denominator_and_zero_division(self):
        a = RationalTF([1.], [2., 1.])
        b = RationalTF([3., 1.], [2., 1.])
        assert rtf_add(a, b).den == a.den
        assert rtf_add(a, 1.) == RationalTF([3., 1.], [2., 1.])
        with pytest.raises(ZeroDivisionError):
            rtf_div(a, RationalTF([0.]))

    def test_reduce_cancels_common_factors(self):
        h = RationalTF([1., 1.], [2., 3., 1.])
        r = h.reduce()
        np.testing.assert_allclose(r.num.coeffs, [1.])
        np.testing.assert_allclose(r.den.coeffs, [2., 1.])

        g = RationalTF([0., 0., 1.], [0., 1., 0., 1.])
        r = g.reduce()
        assert r.num == Polynomial([0., 1.])
        assert r.den == Polynomial([1., 0., 1.])

        assert RationalTF(0., [1., 1.]).reduce().is_zero

    def test_parallel(self):
        one = RationalTF(1.)
        assert one.parallel(1.)(1j) == approx(0.5)
        r = RationalTF([0., 2.])
        c = RationalTF(1., [0., 3.])
        s = 5j
        assert r.parallel(c)(s) == approx(r(s) * c(s) / (r(s) + c(s)))

    def test_poles_and_zeros(self):
        h = RationalTF([-1., 1.], [6., 5., 1.])
        np.testing.assert_allclose(h.zeros(), [1.])
        np.testing.assert_allclose(h.poles(), [-3., -2.], atol=1e-12)

    def test_pi(self):
        assert RationalTF.pi(2., 0.) == RationalTF(2.)
        assert RationalTF.pi(2., 3.)(1j) == approx(2. - 3j)


class TestTFMatrix:
    def test_positive_sequence_of_diagonal(self):
        z = RationalTF([1., 2.], [1., 1.])
        m = TFMatrix2x2.diagonal(z)
        assert m.is_diagonal
        s = np.array([1j, 4j])
        np.testing.assert_allclose(m.positive_sequence(s), z(s))

    def test_positive_sequence_combination(self):
        z = np.array([[1. + 1j, 2.], [3. - 1j, 4.]])
        expected = 0.5 * (z[0, 0] + z[1, 1]) + 0.5j * (z[1, 0] - z[0, 1])
        assert positive_sequence(z) == approx(expected)

        with pytest.raises(ValueError):
            positive_sequence(np.zeros((3, 3)))

    def test_evaluate_shape(self):
        coupling = RationalTF(5., [1., 1.])
        m = TFMatrix2x2([[1., 0.], [coupling, 1.]])
        assert not m.is_diagonal
        assert m[0, 1].is_zero
        values = m.evaluate(np.array([1j, 2j, 3j]))
        assert values.shape == (3, 2, 2)
        assert values[1, 1, 0] == approx(coupling(2j))
        assert values[1, 0, 1] == 0
        assert m.positive_sequence(2j) == approx(1. + 0.5j * coupling(2j))

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            TFMatrix2x2([[1., 0., 0.], [0., 1., 0.]])
