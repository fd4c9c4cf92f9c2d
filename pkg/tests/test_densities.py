"""Unit tests for alpha-densities and enhanced linear compositions."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, null_space

from densities.density_algebra import (
    HALF,
    compose_enhanced_linear,
    eval_density,
    liouville_density,
    liouville_half_density,
    quotient_density,
    sub_density,
)
from densities.models import (
    AlphaDensity,
    LinearCanonicalRelation,
    ShortExactPresentation,
    standard_symplectic,
)
from numerics.errors import DegenerateBasisError, NonTransverseCompositionError


def random_symplectic(rng, n):
    """exp(J H) for a small random symmetric H."""
    h = rng.normal(scale=0.5, size=(2 * n, 2 * n))
    return expm(standard_symplectic(n) @ (h + h.T) / 2)


class TestEvalDensity:
    """Test cases for evaluating alpha-densities on bases."""

    def test_reference_basis_gives_reference_value(self):
        """Test that the reference basis returns the stored value."""
        density = AlphaDensity.on_identity(HALF, 3, 2.5)

        assert eval_density(density, np.eye(3)) == pytest.approx(2.5)

    def test_scaling_law(self):
        """Test sigma(B A) = |det A|^alpha sigma(B) for a fixed instance."""
        rng = np.random.default_rng(3)
        density = AlphaDensity(Fraction(1, 3), 3, 1.7, rng.normal(size=(3, 3)) + 3 * np.eye(3))
        basis = rng.normal(size=(3, 3))
        change = rng.normal(size=(3, 3))

        lhs = eval_density(density, basis @ change)
        rhs = eval_density(density, basis) * abs(np.linalg.det(change)) ** (1 / 3)

        assert lhs == pytest.approx(rhs, rel=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2 ** 31),
        dim=st.integers(min_value=1, max_value=4),
        order=st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(1, 3)]),
    )
    def test_scaling_law_property(self, seed, dim, order):
        """Test the scaling law on random bases and changes of basis."""
        rng = np.random.default_rng(seed)
        density = AlphaDensity(order, dim, 1.0, np.eye(dim) + 0.1 * rng.normal(size=(dim, dim)))
        basis = np.eye(dim) + 0.3 * rng.normal(size=(dim, dim))
        change = np.eye(dim) + 0.3 * rng.normal(size=(dim, dim))

        lhs = eval_density(density, basis @ change)
        rhs = eval_density(density, basis) * abs(np.linalg.det(change)) ** float(order)

        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))

    def test_degenerate_basis_raises(self):
        """Test that linearly dependent columns are rejected."""
        density = AlphaDensity.on_identity(HALF, 2, 1.0)
        basis = np.array([[1.0, 2.0], [2.0, 4.0]])

        with pytest.raises(DegenerateBasisError):
            eval_density(density, basis)

    def test_zero_dimensional_density(self):
        """Test that a density on the zero space is its reference value."""
        density = AlphaDensity.on_identity(HALF, 0, 3.0)

        assert eval_density(density, np.zeros((0, 0))) == pytest.approx(3.0)


class TestLiouville:
    """Test cases for Liouville densities."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_half_density_is_one_on_symplectic_bases(self, n):
        """Test normalization on images of the standard basis under symplectic maps."""
        rng = np.random.default_rng(n)
        density = liouville_half_density(standard_symplectic(n))

        for _ in range(5):
            basis = random_symplectic(rng, n)
            assert eval_density(density, basis) == pytest.approx(1.0, abs=1e-9)

    def test_scaled_form(self):
        """Test that scaling omega by c scales the half-density by |c|^(n/2)."""
        omega = 4.0 * standard_symplectic(1)

        value = eval_density(liouville_half_density(omega), np.eye(2))

        assert value == pytest.approx(2.0)

    def test_full_density_order(self):
        """Test the order-one Liouville density on the standard basis."""
        density = liouville_density(standard_symplectic(2), Fraction(1))

        assert eval_density(density, np.eye(4)) == pytest.approx(1.0)

    def test_non_skew_form_rejected(self):
        """Test that a symmetric matrix is not accepted as a symplectic form."""
        with pytest.raises(ValueError):
            liouville_half_density(np.eye(2))


class TestQuotients:
    """Test cases for quotient and sub densities."""

    def test_quotient_independent_of_complement(self):
        """Test that shifting the complement by V1 leaves sigma/sigma1 unchanged."""
        rng = np.random.default_rng(11)
        v1 = rng.normal(size=(4, 2))
        projection = null_space(v1.T).T
        complement = rng.normal(size=(4, 2))
        shifted = complement + v1 @ rng.normal(size=(2, 2))
        sigma = AlphaDensity(HALF, 4, 1.3, np.eye(4) + 0.1 * rng.normal(size=(4, 4)))
        sigma1 = AlphaDensity.on_identity(HALF, 2, 0.7)

        first = quotient_density(sigma, sigma1, ShortExactPresentation(4, v1, complement, projection))
        second = quotient_density(sigma, sigma1, ShortExactPresentation(4, v1, shifted, projection))

        assert eval_density(first, np.eye(2)) == pytest.approx(
            eval_density(second, np.eye(2)), rel=1e-9
        )

    def test_quotient_times_sub_recovers_sigma(self):
        """Test that sigma/sigma1 on V2 times sigma1 gives sigma on the joined basis."""
        rng = np.random.default_rng(5)
        v1 = rng.normal(size=(4, 2))
        projection = null_space(v1.T).T
        complement = rng.normal(size=(4, 2))
        pres = ShortExactPresentation(4, v1, complement, projection)
        sigma = AlphaDensity.on_identity(HALF, 4, 2.0)
        sigma1 = AlphaDensity.on_identity(HALF, 2, 0.5)

        quotient = quotient_density(sigma, sigma1, pres)
        recovered = sub_density(sigma, quotient, pres)

        assert eval_density(recovered, np.eye(2)) == pytest.approx(0.5, rel=1e-9)

    def test_presentation_exactness(self):
        """Test the exactness check of a short exact presentation."""
        v1 = np.array([[1.0], [0.0]])
        pres = ShortExactPresentation(2, v1, np.array([[0.0], [1.0]]), np.array([[0.0, 1.0]]))
        bad = pres.with_complement(np.array([[1.0], [0.0]]))

        assert pres.is_exact()
        assert not bad.is_exact()

    def test_orders_must_match(self):
        """Test that densities of different orders cannot be divided."""
        v1 = np.array([[1.0], [0.0]])
        pres = ShortExactPresentation(2, v1, np.array([[0.0], [1.0]]), np.array([[0.0, 1.0]]))

        with pytest.raises(ValueError):
            quotient_density(
                AlphaDensity.on_identity(HALF, 2, 1.0),
                AlphaDensity.on_identity(Fraction(1), 1, 1.0),
                pres,
            )


class TestLinearComposition:
    """Test cases for enhanced linear canonical relations."""

    def test_graph_of_symplectic_map_is_lagrangian(self):
        """Test that graphs of symplectic maps are Lagrangian."""
        rng = np.random.default_rng(2)
        omega = standard_symplectic(2)

        relation = LinearCanonicalRelation.graph(random_symplectic(rng, 2), omega)

        assert relation.is_lagrangian()

    def test_graph_of_non_symplectic_map_is_not_lagrangian(self):
        """Test that a scaling map does not give a Lagrangian graph."""
        relation = LinearCanonicalRelation.graph(2.0 * np.eye(2), standard_symplectic(1))

        assert not relation.is_lagrangian()

    def test_identity_composition_keeps_density(self):
        """Test that composing with the identity relation of density 1 is neutral."""
        omega = standard_symplectic(1)
        identity = LinearCanonicalRelation.identity(omega)
        relation = LinearCanonicalRelation.graph(np.array([[1.0, 0.5], [0.0, 1.0]]), omega)

        composite, density = compose_enhanced_linear(
            relation, AlphaDensity.on_identity(HALF, 2, 1.5),
            identity, AlphaDensity.on_identity(HALF, 2, 1.0),
        )
        change = composite.coordinates(relation.basis_L)

        assert eval_density(density, change) == pytest.approx(1.5, rel=1e-9)

    @pytest.mark.parametrize("n", [1, 2])
    def test_composition_is_associative(self, n):
        """Test (L1 L2) L3 = L1 (L2 L3) with their densities."""
        rng = np.random.default_rng(10 + n)
        omega = standard_symplectic(n)
        relations = [LinearCanonicalRelation.graph(random_symplectic(rng, n), omega) for _ in range(3)]
        densities = [AlphaDensity.on_identity(HALF, 2 * n, v) for v in (0.8, 1.1, 1.9)]

        left = compose_enhanced_linear(
            *compose_enhanced_linear(relations[0], densities[0], relations[1], densities[1]),
            relations[2], densities[2],
        )
        right = compose_enhanced_linear(
            relations[0], densities[0],
            *compose_enhanced_linear(relations[1], densities[1], relations[2], densities[2]),
        )
        change = right[0].coordinates(left[0].basis_L)

        assert eval_density(left[1], np.eye(2 * n)) == pytest.approx(
            eval_density(right[1], change), rel=1e-9
        )

    def test_non_transverse_composition_raises(self):
        """Test that a clean but non-transverse composition is rejected."""
        omega = standard_symplectic(1)
        basis = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        relation = LinearCanonicalRelation(omega, omega, basis)
        density = AlphaDensity.on_identity(HALF, 2, 1.0)

        with pytest.raises(NonTransverseCompositionError):
            compose_enhanced_linear(relation, density, relation, density)
