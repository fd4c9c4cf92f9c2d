"""Unit tests for cochains, the unit and identity checks, and the coboundary solvers."""
import numpy as np
import pytest

from cocycles.coboundary_solver import (
    additive_delta_polynomial,
    check_normalized,
    coboundary_solve_pi0,
    delta0,
    graded_blocks_from_values,
    graded_coboundary_solve,
)
from cocycles.cochain_calculus import (
    additive_coboundary_of,
    area_cocycle,
    coboundary_of,
    delta_add,
    delta_mult,
    identity_axiom_check,
    multiplicative_delta,
    pair_coboundary,
    pair_delta_mult,
    pair_multiply,
    symmetry_and_vanest0,
    transport,
    unit_propagation_check,
)
from cocycles.models import Cochain1, Cochain2, EnhancementFactor
from densities.models import standard_symplectic
from jets.polynomials import Polynomial
from numerics.errors import CocycleUndefinedError, NotNormalizedError, PreconditionError
from poisson.structures import builtin_structure
from spray.generating_function import build_generating_function
from spray.models import GroupoidPoint

P1 = np.array([0.05, -0.03, 0.04])
P2 = np.array([-0.02, 0.06, 0.01])
P3 = np.array([0.03, 0.02, -0.05])
X = np.array([0.3, 0.5, -0.2])


@pytest.fixture
def so3():
    """The so3 structure with its closed-form generating function."""
    pi = builtin_structure("so3")
    return pi, build_generating_function(pi, "closed_linear", 10)


@pytest.fixture
def constant():
    """The symplectic plane with its closed-form generating function."""
    pi = builtin_structure("constant")
    return pi, build_generating_function(pi, "closed_constant")


@pytest.fixture
def kappa():
    """A normalized nonvanishing 1-cochain."""
    return Cochain1(lambda x, p: float(np.exp(0.5 * p[0] * (1.0 + x[-1]) + 0.2 * p[-1] ** 2)))


class TestDifferentials:
    """Test cases for multiplicative and additive differentials."""

    def test_multiplicative_delta_of_zero(self):
        """Test that a vanishing value makes the differential undefined."""
        with pytest.raises(CocycleUndefinedError):
            multiplicative_delta(1.0, 0.0, 1.0, 1.0)

    def test_constant_is_cocycle(self, so3):
        """Test that constant cochains have trivial differential."""
        _, S = so3

        assert delta_mult(Cochain2.constant(2.0), S, P1, P2, P3, X) == pytest.approx(1.0)

    def test_coboundary_is_cocycle(self, so3, kappa):
        """Test delta(delta kappa) = 1."""
        _, S = so3

        value = delta_mult(coboundary_of(kappa, S), S, P1, P2, P3, X)

        assert abs(value - 1.0) < 1e-7

    def test_transport_keeps_cocycles(self, so3, kappa):
        """Test that f . delta kappa is a cocycle when f is."""
        _, S = so3
        moved = transport(Cochain2.constant(1.5), kappa, S)

        assert abs(delta_mult(moved, S, P1, P2, P3, X) - 1.0) < 1e-7
        assert moved(P1, P2, X) != pytest.approx(1.5)

    def test_additive_coboundary_is_cocycle(self, so3):
        """Test that the additive differential of delta h' vanishes."""
        _, S = so3
        h1 = Cochain1(lambda x, p: p[0] * x[1] + p[1] ** 2, additive=True, name="h1")

        assert abs(delta_add(additive_coboundary_of(h1, S), S, P1, P2, P3, X)) < 1e-7

    def test_additive_delta_of_one_cochain(self):
        """Test delta(p_1^2) = -2 p1_1 p2_1 for pi = 0."""
        S = build_generating_function(builtin_structure("zero"), "closed_zero")
        h1 = Cochain1(lambda x, p: p[0] ** 2, additive=True)
        p1, p2 = np.array([0.1, 0.3]), np.array([-0.2, 0.05])

        value = delta_add(h1, S, p1, p2, np.array([0.4, 0.7]))

        assert value == pytest.approx(-2 * 0.1 * -0.2)

    def test_log_of_multiplicative_cochain(self):
        """Test ln f and that additive cochains are their own log."""
        f = Cochain2(lambda p1, p2, x: float(np.exp(p1[0] * p2[0])))

        log = f.log()

        assert log(P1, P2, X) == pytest.approx(P1[0] * P2[0])
        assert log.additive
        assert log.log() is log


class TestUnitAndIdentity:
    """Test cases for unit propagation and the identity axiom."""

    def test_constant_propagates(self, so3):
        """Test that constant factors pass the unit checks."""
        _, S = so3

        report = unit_propagation_check(Cochain2.constant(3.0), S, [GroupoidPoint(X, P1)])

        assert report.passed
        assert report.max_residual < 1e-12

    def test_non_normalized_factor_fails(self, so3):
        """Test that f = 1 + p2_1 changes along unit pairs."""
        _, S = so3
        f = Cochain2(lambda p1, p2, x: 1.0 + p2[0])

        report = unit_propagation_check(f, S, [GroupoidPoint(X, P1)])

        assert not report.passed
        assert report.violations[0]["left"] == pytest.approx(P1[0], rel=1e-6)

    def test_out_of_domain_sample_is_a_violation(self, so3):
        """Test that failing samples are recorded rather than raised."""
        _, S = so3

        report = unit_propagation_check(Cochain2.constant(1.0), S, [GroupoidPoint(X, np.array([0.5, 0, 0]))])

        assert not report.passed
        assert "error" in report.violations[0]

    @pytest.mark.parametrize("value", [1.0, 2.0])
    def test_constant_factors_satisfy_identity_axiom(self, constant, value):
        """Test that constant enhancement factors satisfy the identity axiom."""
        pi, S = constant
        factor = EnhancementFactor(Cochain2.constant(value, name="c"))

        report = identity_axiom_check(factor, S, pi, [GroupoidPoint(np.array([0.3, -0.2]), np.array([0.1, 0.05]))])

        assert report.passed, report.violations

    def test_canonical_factor_on_so3(self, so3):
        """Test the identity axiom for sigma^c on so3."""
        pi, S = so3
        factor = EnhancementFactor(Cochain2.constant(1.0, name="one"))

        report = identity_axiom_check(factor, S, pi, [GroupoidPoint(X, P1)])

        assert report.passed, report.violations

    def test_non_normalized_factor_breaks_identity_axiom(self, constant):
        """Test that f = 1 + p2_1 fails the identity axiom."""
        pi, S = constant
        factor = EnhancementFactor(Cochain2(lambda p1, p2, x: 1.0 + p2[0], name="skewed"))

        report = identity_axiom_check(factor, S, pi, [GroupoidPoint(np.array([0.3, -0.2]), np.array([0.1, 0.05]))])

        assert not report.passed
        assert report.max_residual > 1e-3


class TestSymmetry:
    """Test cases for the symmetry condition and the van Est projection."""

    def test_symmetric_polynomial(self):
        """Test that p1_1 p2_1 has no skew part."""
        h = Cochain2.from_polynomial(Polynomial(6, {(1, 0, 1, 0, 0, 0): 1.0}))

        result = symmetry_and_vanest0(h, [np.array([0.5, 0.1])])

        assert result.passed
        assert result.symmetric_parts[0][0, 0] == pytest.approx(1.0)

    def test_skew_polynomial(self):
        """Test that x_1 (p1 wedge p2) is detected."""
        h = Cochain2.from_polynomial(Polynomial(6, {
            (1, 0, 0, 1, 1, 0): 1.0,
            (0, 1, 1, 0, 1, 0): -1.0,
        }))

        result = symmetry_and_vanest0(h, [np.array([0.5, 0.1])])

        assert not result.passed
        assert result.max_skew == pytest.approx(0.5)

    def test_black_box_cochain(self):
        """Test the finite-difference Hessian on a cochain without polynomial."""
        h = Cochain2(lambda p1, p2, x: float(p1 @ p2) * (1.0 + x[0]), additive=True)

        result = symmetry_and_vanest0(h, [np.array([0.2, -0.4])], step=1e-3)

        assert result.passed
        assert result.symmetric_parts[0] == pytest.approx(1.2 * np.eye(2), abs=1e-6)


class TestCoboundarySolvers:
    """Test cases for primitives of additive cochains."""

    def test_pi0_round_trip(self):
        """Test that the zero-structure solver recovers h' from delta0 h'."""
        h1 = Polynomial(4, {(2, 0, 0, 1): 1.0, (1, 1, 0, 0): -0.5, (0, 3, 1, 0): 2.0})

        result = coboundary_solve_pi0(delta0(h1, 2), 2, 3)

        assert result.success
        assert (result.primitive - h1).max_abs_coefficient() < 1e-10

    def test_pi0_skew_certificate(self):
        """Test that p1 wedge p2 has no primitive and is returned as certificate."""
        h = Polynomial(6, {(1, 0, 0, 1, 0, 0): 1.0, (0, 1, 1, 0, 0, 0): -1.0})

        result = coboundary_solve_pi0(h, 2, 2)

        assert not result.success
        assert result.degree == 2
        assert result.certificate.max_abs_coefficient() == pytest.approx(1.0)

    def test_degree_above_max(self):
        """Test that terms above max_degree are rejected."""
        h = Polynomial(6, {(2, 0, 1, 0, 0, 0): 1.0})

        with pytest.raises(ValueError):
            coboundary_solve_pi0(h, 2, 2)

    def test_not_normalized(self):
        """Test that terms without p2 are rejected."""
        with pytest.raises(NotNormalizedError):
            check_normalized(Polynomial(6, {(1, 0, 0, 0, 1, 0): 1.0}), 2)

    def test_graded_round_trip_on_so3(self, so3):
        """Test that the graded solver recovers h' from delta h' on so3."""
        _, S = so3
        weights = [1] * 6 + [0] * 3
        h1 = Polynomial(6, {(2, 0, 0, 0, 0, 0): 1.0, (0, 1, 1, 1, 0, 0): 0.5})
        h = additive_delta_polynomial(h1, S.polynomial.truncated(weights, 4), 3, 3)
        graded = {k: h.homogeneous(weights, k) for k in (2, 3)}

        result = graded_coboundary_solve(graded, S, 3)

        assert result.success
        assert (result.primitive - h1).max_abs_coefficient() < 1e-9

    def test_graded_rejects_non_cocycle(self, so3):
        """Test that p1_1^2 p2_1 is refused as not closed."""
        _, S = so3
        h = Polynomial(9, {(2, 0, 0, 1, 0, 0, 0, 0, 0): 1.0})

        with pytest.raises(PreconditionError, match="at degree 3") as info:
            graded_coboundary_solve({3: h}, S, 3)

        assert info.value.check == "cocycle"

    def test_graded_rejects_skew_cochain(self, so3):
        """Test that a cochain failing the symmetry condition is refused."""
        _, S = so3
        h = Polynomial(9, {(1, 0, 0, 0, 1, 0, 0, 0, 0): 1.0, (0, 1, 0, 1, 0, 0, 0, 0, 0): -1.0})

        with pytest.raises(PreconditionError) as info:
            graded_coboundary_solve({2: h}, S, 2)

        assert info.value.check == "symmetry"

    def test_graded_zero_cochain(self):
        """Test that the zero cochain has the zero primitive."""
        pi = builtin_structure("h3")
        S = build_generating_function(pi, "closed_linear", 6)

        result = graded_coboundary_solve({}, S, 3)

        assert result.success
        assert result.primitive.terms == {}

    def test_blocks_from_values_of_a_polynomial_cochain(self):
        """Test that sampled values give back the mixed coefficients by p-degree."""
        poly = Polynomial(3, {(1, 1, 0): 2.0, (2, 1, 1): 0.5})
        h = Cochain2.from_polynomial(poly)

        blocks = graded_blocks_from_values(h, 1, 3, x_degree=1, radius=0.1)

        assert sorted(blocks) == [2, 3]
        assert blocks[2].terms[(1, 1, 0)] == pytest.approx(2.0, abs=1e-8)
        assert blocks[3].terms[(2, 1, 1)] == pytest.approx(0.5, abs=1e-8)
        assert (blocks[2] + blocks[3] - poly).max_abs_coefficient() < 1e-8


class TestPairGroupoid:
    """Test cases for the pair groupoid fixture."""

    def test_area_cocycle(self):
        """Test that the exponentiated triangle area is a 2-cocycle."""
        rng = np.random.default_rng(8)
        f = area_cocycle(standard_symplectic(1), scale=3.0)

        for _ in range(5):
            points = rng.uniform(-1.0, 1.0, size=(4, 2))
            assert pair_delta_mult(f, *points) == pytest.approx(1.0)

    def test_coboundary(self):
        """Test that kappa(x, y) kappa(y, z) / kappa(x, z) is a 2-cocycle."""
        f = pair_coboundary(lambda x, y: 1.0 + (x @ y) ** 2)
        points = np.array([[0.1, 0.2], [0.5, -0.3], [-0.4, 0.8], [0.9, 0.0]])

        assert pair_delta_mult(f, *points) == pytest.approx(1.0)

    def test_non_composable_pair(self):
        """Test that mismatched pair arrows are rejected."""
        with pytest.raises(CocycleUndefinedError):
            pair_multiply((np.zeros(2), np.ones(2)), (np.zeros(2), np.ones(2)))
