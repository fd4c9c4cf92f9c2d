"""Unit tests for truncated series, jets and sparse polynomials."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jets.models import XJetScalar
from jets.monomials import monomial_basis
from jets.polynomials import Polynomial
from jets.ray_series import ray_constant, ray_linear, ray_mul
from jets.truncated_series import (
    TruncatedSeries,
    combine,
    definite_time_integral,
    series_invert_map,
)
from numerics.errors import PreconditionError

coefficient = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


def random_series(values, num_vars=2, order=3):
    basis = monomial_basis(num_vars, order)
    series = TruncatedSeries.zeros(num_vars, order)
    series.values[:] = np.resize(np.asarray(values, dtype=float), len(basis))
    return series


class TestMonomialBasis:
    """Test cases for monomial bases."""

    def test_sizes_and_degree_slices(self):
        """Test the count of monomials and contiguous degree slices."""
        basis = monomial_basis(2, 3)

        assert len(basis) == 10
        assert list(basis.degrees[basis.degree_slice(2)]) == [2, 2, 2]
        assert basis.exponent_tuples[0] == (0, 0)

    def test_bases_are_shared(self):
        """Test that equal parameters return the same basis object."""
        assert monomial_basis(3, 4) is monomial_basis(3, 4)


class TestTruncatedSeries:
    """Test cases for truncated series arithmetic."""

    def test_product_truncates(self):
        """Test (1 + u)(1 - u) = 1 - u^2 with terms above the order dropped."""
        u = TruncatedSeries.variable(1, 2, 0)

        product = (1.0 + u) * (1.0 - u)

        assert product.coefficient((0,)).value == pytest.approx(1.0)
        assert product.coefficient((1,)).value == pytest.approx(0.0)
        assert product.coefficient((2,)).value == pytest.approx(-1.0)

    def test_cube_overflows_order(self):
        """Test that u^3 vanishes at order 2."""
        u = TruncatedSeries.variable(1, 2, 0)

        assert np.all((u * u * u).values == 0.0)

    def test_product_without_jets_in_two_variables(self):
        """Test (1 + u + v)(u - v) coefficient-wise when the series carry no x-jet."""
        u = TruncatedSeries.variable(2, 3, 0)
        v = TruncatedSeries.variable(2, 3, 1)

        product = (1.0 + u + v) * (u - v)

        assert product.jet_dim == 0
        assert product.hess.shape == (len(product.values), 0, 0)
        assert product.coefficient((1, 0)).value == pytest.approx(1.0)
        assert product.coefficient((0, 1)).value == pytest.approx(-1.0)
        assert product.coefficient((2, 0)).value == pytest.approx(1.0)
        assert product.coefficient((1, 1)).value == pytest.approx(0.0)
        assert product.coefficient((0, 2)).value == pytest.approx(-1.0)

    def test_derivative(self):
        """Test d/du (u^2 v) = 2 u v."""
        series = TruncatedSeries.from_values(2, 3, {(2, 1): 1.0})

        derivative = series.derivative(0)

        assert derivative.coefficient((1, 1)).value == pytest.approx(2.0)
        assert derivative.coefficient((2, 1)).value == pytest.approx(0.0)

    def test_times_variable_and_homogeneous_part(self):
        """Test shifting by a variable and extracting a degree."""
        series = TruncatedSeries.from_values(2, 3, {(0, 0): 1.0, (1, 0): 2.0, (0, 2): 3.0})

        shifted = series.times_variable(1)
        quadratic = shifted.homogeneous_part(2)

        assert shifted.coefficient((0, 3)).value == pytest.approx(3.0)
        assert quadratic.coefficient((1, 1)).value == pytest.approx(2.0)
        assert quadratic.coefficient((0, 1)).value == pytest.approx(0.0)

    def test_jet_channels_follow_product_rule(self):
        """Test that gradients in x obey the product rule."""
        point = np.array([0.3, -0.7])
        a = TruncatedSeries.constant(1, 2, XJetScalar.coordinate(point, 0))
        b = TruncatedSeries.constant(1, 2, XJetScalar.coordinate(point, 1))

        product = (a * b).coefficient((0,))

        assert product.value == pytest.approx(-0.21)
        assert product.grad_x == pytest.approx([-0.7, 0.3])
        assert product.hess_x == pytest.approx(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_evaluate(self):
        """Test summing a series at a point."""
        series = TruncatedSeries.from_values(2, 2, {(0, 0): 1.0, (1, 0): 2.0, (1, 1): -1.0})

        assert series.evaluate(np.array([0.5, 2.0])).value == pytest.approx(1.0)

    def test_compose(self):
        """Test f(u) = u + u^2 composed with u = 2 v."""
        f = TruncatedSeries.from_values(1, 4, {(1,): 1.0, (2,): 1.0})
        inner = TruncatedSeries.variable(1, 4, 0) * 2.0

        composite = f.compose([inner])

        assert composite.coefficient((1,)).value == pytest.approx(2.0)
        assert composite.coefficient((2,)).value == pytest.approx(4.0)
        assert composite.coefficient((3,)).value == pytest.approx(0.0)

    def test_compose_rejects_constant_terms(self):
        """Test that inner series with a constant term are rejected."""
        f = TruncatedSeries.from_values(1, 3, {(1,): 1.0})
        inner = TruncatedSeries.variable(1, 3, 0) + 1.0

        with pytest.raises(PreconditionError):
            f.compose([inner])

    def test_invert_map(self):
        """Test that the compositional inverse undoes F(p) = p + p^2."""
        forward = TruncatedSeries.from_values(1, 5, {(1,): 1.0, (2,): 1.0})

        inverse = series_invert_map([forward])
        roundtrip = forward.compose(inverse)

        assert roundtrip.max_abs_difference(TruncatedSeries.variable(1, 5, 0)) < 1e-12
        # Catalan numbers with alternating signs
        assert inverse[0].coefficient((2,)).value == pytest.approx(-1.0)
        assert inverse[0].coefficient((3,)).value == pytest.approx(2.0)
        assert inverse[0].coefficient((4,)).value == pytest.approx(-5.0)

    def test_invert_two_dimensional_map(self):
        """Test inversion of a map with a non-identity linear part."""
        u = TruncatedSeries.variable(2, 4, 0)
        v = TruncatedSeries.variable(2, 4, 1)
        forward = [2.0 * u + v * v, v + u * v]

        inverse = series_invert_map(forward)
        roundtrip = [component.compose(inverse) for component in forward]

        assert roundtrip[0].max_abs_difference(u) < 1e-12
        assert roundtrip[1].max_abs_difference(v) < 1e-12

    def test_invert_rejects_constant_term(self):
        """Test that maps not fixing the origin are rejected."""
        forward = TruncatedSeries.from_values(1, 3, {(0,): 1.0, (1,): 1.0})

        with pytest.raises(PreconditionError):
            series_invert_map([forward])

    def test_combine(self):
        """Test applying a constant matrix to a vector of series."""
        u = TruncatedSeries.variable(2, 2, 0)
        v = TruncatedSeries.variable(2, 2, 1)

        first, second = combine(np.array([[1.0, 2.0], [0.0, -1.0]]), [u, v])

        assert first.coefficient((0, 1)).value == pytest.approx(2.0)
        assert second.coefficient((0, 1)).value == pytest.approx(-1.0)
        assert second.coefficient((1, 0)).value == pytest.approx(0.0)

    def test_definite_time_integral(self):
        """Test that u^r integrates to 1 / (r + 1)."""
        ones = [TruncatedSeries.from_values(1, 2, {(0,): 1.0}) for _ in range(3)]

        total = definite_time_integral(ones)

        assert total.coefficient((0,)).value == pytest.approx(1.0 + 1 / 2 + 1 / 3)


class TestSeriesRing:
    """Property tests for the ring axioms of truncated series."""

    @settings(max_examples=40, deadline=None)
    @given(st.lists(coefficient, min_size=10, max_size=10),
           st.lists(coefficient, min_size=10, max_size=10))
    def test_product_is_commutative(self, a, b):
        """Test a * b = b * a."""
        x, y = random_series(a), random_series(b)

        assert (x * y).max_abs_difference(y * x) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.lists(coefficient, min_size=10, max_size=10),
           st.lists(coefficient, min_size=10, max_size=10),
           st.lists(coefficient, min_size=10, max_size=10))
    def test_product_distributes_and_associates(self, a, b, c):
        """Test a (b + c) = a b + a c and (a b) c = a (b c)."""
        x, y, z = random_series(a), random_series(b), random_series(c)

        assert (x * (y + z)).max_abs_difference(x * y + x * z) < 1e-11
        assert ((x * y) * z).max_abs_difference(x * (y * z)) < 1e-10


class TestPolynomial:
    """Test cases for sparse polynomials."""

    def test_arithmetic_and_evaluate(self):
        """Test sums, products and evaluation."""
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)

        poly = (x + y) * (x - y) + 3.0

        assert poly.evaluate(np.array([2.0, 1.0])) == pytest.approx(6.0)
        assert poly.terms[(2, 0)] == pytest.approx(1.0)
        assert (0, 2) in poly.terms and (1, 1) not in poly.terms

    def test_derivative(self):
        """Test d/dx (x^2 y + y) = 2 x y."""
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)

        derivative = (x * x * y + y).derivative(0)

        assert derivative.terms == {(1, 1): 2.0}

    def test_weighted_truncation_and_homogeneous_parts(self):
        """Test that weights select the degree counted for truncation."""
        p = Polynomial.variable(2, 0)
        x = Polynomial.variable(2, 1)
        poly = p + p * p * x + x * x * x
        weights = [1, 0]

        assert set(poly.truncated(weights, 1).terms) == {(1, 0), (0, 3)}
        assert set(poly.homogeneous(weights, 2).terms) == {(2, 1)}

    def test_substitute(self):
        """Test composition with polynomials in other variables."""
        u = Polynomial.variable(1, 0)
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)
        poly = x * y + x

        composite = poly.substitute([u + 1.0, u * u])

        assert composite.terms == {(3,): 1.0, (2,): 1.0, (1,): 1.0, (0,): 1.0}

    def test_substitute_with_truncation(self):
        """Test that substitution drops terms above max_degree."""
        u = Polynomial.variable(1, 0)
        x = Polynomial.variable(1, 0)

        composite = (x * x * x).substitute([u + u * u], [1], 4)

        assert max(sum(e) for e in composite.terms) == 4

    def test_jet(self):
        """Test exact gradient and Hessian of a polynomial."""
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)

        value, grad, hess = (x * x * y).jet(np.array([1.0, 2.0]))

        assert value == pytest.approx(2.0)
        assert grad == pytest.approx([4.0, 1.0])
        assert hess == pytest.approx(np.array([[4.0, 2.0], [2.0, 0.0]]))

    def test_jet_with_a_vanishing_coordinate(self):
        """Test the jet of x^2 y z^3 + 2 x z at a point with y = 0."""
        x, y, z = (Polynomial.variable(3, v) for v in range(3))

        value, grad, hess = (x * x * y * z * z * z + 2.0 * x * z).jet(np.array([1.0, 0.0, 2.0]))

        assert value == pytest.approx(4.0)
        assert grad == pytest.approx([4.0, 8.0, 2.0])
        assert hess == pytest.approx(np.array([
            [0.0, 16.0, 2.0],
            [16.0, 0.0, 12.0],
            [2.0, 12.0, 0.0],
        ]))

    def test_arrays_round_trip(self):
        """Test that from_arrays inverts arrays."""
        poly = Polynomial(2, {(1, 0): 2.0, (0, 3): -1.0})

        exps, coeffs = poly.arrays()

        assert Polynomial.from_arrays(exps, coeffs).terms == poly.terms

    def test_empty_polynomial(self):
        """Test the zero polynomial."""
        zero = Polynomial(3, {})

        assert zero.evaluate(np.ones(3)) == 0.0
        assert zero.max_abs_coefficient() == 0.0


class TestRaySeries:
    """Test cases for ray series helpers."""

    def test_cauchy_product(self):
        """Test (1 + eps)(eps) = eps + eps^2 truncated at length 3."""
        one = ray_constant(np.array([1.0]), 3)
        eps = ray_linear(np.array([1.0]), 3)

        product = ray_mul(one + eps, eps)

        assert product[0] == pytest.approx([0.0, 1.0, 1.0])
