"""Associativity of enhancements of the action groupoid, checked two ways.

The split form evaluates both sides of the associativity equation after
decomposing TG^(2) with the splitting h^L(v) = (0, v). The direct form
composes the enhanced graphs of m x id and m on a common basis of the
tangent space of composable triples.
"""
import logging
from fractions import Fraction
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag, null_space

from densities.density_algebra import (
    compose_graph_enhancements,
    eval_density,
    liouville_half_density,
    sub_density,
)
from densities.models import AlphaDensity, GraphTangentData, ShortExactPresentation
from liecase.action_groupoid import (
    action_multiply,
    inverse,
    source,
    symplectic_form,
    target,
)
from liecase.bch import local_product_differential
from liecase.models import ActionGroupoidElement
from numerics.differentiation import jacobian_fd
from numerics.errors import DegenerateBasisError
from poisson.models import LieAlgebraData

logger = logging.getLogger(__name__)

Enhancement = Callable[[ActionGroupoidElement, ActionGroupoidElement], float]

HALF = Fraction(1, 2)
JACOBIAN_STEP = 1e-3
KERNEL_CONDITION_LIMIT = 1e8
BROKEN_AMPLITUDE = 0.5


def unit_enhancement(g1: ActionGroupoidElement, g2: ActionGroupoidElement) -> float:
    return 1.0


def broken_enhancement(g1: ActionGroupoidElement, g2: ActionGroupoidElement) -> float:
    """A factor that is not a multiplicative 2-cocycle."""
    return 1.0 + BROKEN_AMPLITUDE * g1.a[0] ** 2 * g2.a[1]


def coboundary_enhancement(
    lie: LieAlgebraData,
    kappa: Callable[[ActionGroupoidElement], float],
    order: Optional[int] = None
) -> Enhancement:
    """The factor kappa(g1) kappa(g2) / kappa(g1 g2)."""
    def f(g1: ActionGroupoidElement, g2: ActionGroupoidElement) -> float:
        return kappa(g1) * kappa(g2) / kappa(action_multiply(lie, g1, g2, order))
    return f


class ActionTangents:
    """Differentials of the structure maps of the action groupoid at points."""

    def __init__(self, lie: LieAlgebraData, order: Optional[int] = None):
        self.lie = lie
        self.order = order
        self.n = lie.dim

    def ds(self, g: ActionGroupoidElement) -> np.ndarray:
        return jacobian_fd(lambda v: v[self.n:], g.vector, JACOBIAN_STEP)

    def dt(self, g: ActionGroupoidElement) -> np.ndarray:
        return jacobian_fd(
            lambda v: target(self.lie, ActionGroupoidElement.from_vector(v)),
            g.vector, JACOBIAN_STEP
        )

    def dinv(self, g: ActionGroupoidElement) -> np.ndarray:
        return jacobian_fd(
            lambda v: inverse(self.lie, ActionGroupoidElement.from_vector(v)).vector,
            g.vector, JACOBIAN_STEP
        )

    def dm(self, g1: ActionGroupoidElement, g2: ActionGroupoidElement) -> np.ndarray:
        """Differential (2n x 4n) of the extended multiplication at (g1, g2)."""
        n = self.n
        product = local_product_differential(self.lie, g1.a, g2.a, self.order)
        differential = np.zeros((2 * n, 4 * n))
        differential[:n, :n] = product[:, :n]
        differential[:n, 2 * n:3 * n] = product[:, n:]
        differential[n:, 3 * n:] = np.eye(n)
        return differential

    def kernel(self, differential: np.ndarray) -> np.ndarray:
        basis = null_space(differential)
        if basis.shape[1] != self.n:
            raise DegenerateBasisError("ill-conditioned kernel basis")
        singular_values = np.linalg.svd(differential, compute_uv=False)
        if singular_values[0] > KERNEL_CONDITION_LIMIT * singular_values[-1]:
            raise DegenerateBasisError("ill-conditioned kernel basis")
        return basis

    def a_s(self, x: np.ndarray) -> np.ndarray:
        return self.kernel(self.ds(ActionGroupoidElement.unit(x)))

    def a_t(self, x: np.ndarray) -> np.ndarray:
        return self.kernel(self.dt(ActionGroupoidElement.unit(x)))

    def right_translation(self, g: ActionGroupoidElement) -> np.ndarray:
        """TR_g on T_{1_{t(g)}} G."""
        unit = ActionGroupoidElement.unit(target(self.lie, g))
        return self.dm(unit, g)[:, :2 * self.n]

    def left_translation(self, g: ActionGroupoidElement) -> np.ndarray:
        """TL_g on T_{1_{s(g)}} G."""
        unit = ActionGroupoidElement.unit(source(g))
        return self.dm(g, unit)[:, 2 * self.n:]

    def h_left(self, g: ActionGroupoidElement) -> np.ndarray:
        return np.vstack([np.zeros((self.n, self.n)), np.eye(self.n)])

    def h_right(self, g: ActionGroupoidElement) -> np.ndarray:
        """h^R_g(v) = Tinv(h^L_{g^-1}(v))."""
        g_inv = inverse(self.lie, g)
        return self.dinv(g_inv) @ self.h_left(g_inv)

    def sigma_left(self, g: ActionGroupoidElement, a_s: np.ndarray) -> np.ndarray:
        return np.hstack([self.right_translation(g) @ a_s, self.h_left(g)])

    def sigma_right(self, g: ActionGroupoidElement, a_t: np.ndarray) -> np.ndarray:
        return np.hstack([self.h_right(g), self.left_translation(g) @ a_t])

    def phi_h(
        self,
        g1: ActionGroupoidElement,
        g2: ActionGroupoidElement,
        a_s: np.ndarray,
        a_t: np.ndarray
    ) -> np.ndarray:
        """Image of a_s (+) I_n (+) a_t in T G^(2), as a 4n x 3n matrix."""
        n = self.n
        top = np.hstack([
            self.right_translation(g1) @ a_s, self.h_left(g1), np.zeros((2 * n, n))
        ])
        bottom = np.hstack([
            np.zeros((2 * n, n)), self.h_right(g2), self.left_translation(g2) @ a_t
        ])
        return np.vstack([top, bottom])

    def pair_kernel(
        self,
        g1: ActionGroupoidElement,
        g2: ActionGroupoidElement
    ) -> np.ndarray:
        """Orthonormal basis of T G^(2) at (g1, g2)."""
        return null_space(np.hstack([self.ds(g1), -self.dt(g2)]))


def liouville_value(lie: LieAlgebraData, g: ActionGroupoidElement, basis: np.ndarray) -> float:
    return float(np.real(eval_density(liouville_half_density(symplectic_form(lie, g)), basis)))


def canonical_enhancement(
    tangents: ActionTangents,
    g1: ActionGroupoidElement,
    g2: ActionGroupoidElement,
    basis: np.ndarray
) -> float:
    """
    sigma^c = (lambda_G x lambda_G)/mu on a basis of T G^(2).

    mu is the coordinate half-density of g*.
    """
    lie, n = tangents.lie, tangents.n
    omega = block_diag(symplectic_form(lie, g1), symplectic_form(lie, g2))
    complement = np.vstack([tangents.h_left(g1), np.zeros((2 * n, n))])
    projection = np.hstack([tangents.ds(g1), -tangents.dt(g2)])
    presentation = ShortExactPresentation(4 * n, basis, complement, projection)
    mu = AlphaDensity.on_identity(HALF, n, 1.0)
    density = sub_density(liouville_half_density(omega), mu, presentation)
    return float(np.real(eval_density(density, np.eye(basis.shape[1]))))


def _check_triple(
    lie: LieAlgebraData,
    triple: Tuple[ActionGroupoidElement, ...],
    order: Optional[int]
) -> Tuple[ActionGroupoidElement, ActionGroupoidElement]:
    g1, g2, g3 = triple
    return action_multiply(lie, g1, g2, order), action_multiply(lie, g2, g3, order)


def split_associativity_residual(
    lie: LieAlgebraData,
    triple: Tuple[ActionGroupoidElement, ActionGroupoidElement, ActionGroupoidElement],
    f: Enhancement = unit_enhancement,
    order: Optional[int] = None
) -> float:
    """
    Relative mismatch of the split associativity equation for f * sigma^c.

    Args:
        lie: Lie algebra of the action groupoid
        triple: Composable arrows (g1, g2, g3)
        f: Enhancement factor on composable pairs
        order: BCH order for the product; None uses the exact product

    Returns:
        |LHS - RHS| / |LHS|

    Raises:
        CompositionError: If the triple is not composable
        DegenerateBasisError: If a kernel basis is ill-conditioned
    """
    g1, g2, g3 = triple
    g12, g23 = _check_triple(lie, triple, order)
    tangents = ActionTangents(lie, order)
    n = tangents.n

    def sigma(a: ActionGroupoidElement, b: ActionGroupoidElement, basis: np.ndarray) -> float:
        return f(a, b) * canonical_enhancement(tangents, a, b, basis)

    a_s = tangents.a_s(target(lie, g1))
    a_t2 = tangents.a_t(source(g2))
    a_t3 = tangents.a_t(source(g3))

    lhs = (
        sigma(g12, g3, tangents.phi_h(g12, g3, a_s, a_t3))
        * sigma(g1, g2, tangents.phi_h(g1, g2, a_s, a_t2))
        / liouville_value(lie, g12, tangents.sigma_left(g12, a_s))
    )

    moved = tangents.sigma_right(g2, a_t2)
    shifted = np.vstack([
        np.hstack([moved, np.zeros((2 * n, n))]),
        np.hstack([
            tangents.h_right(g3) @ tangents.ds(g2) @ moved,
            tangents.left_translation(g3) @ a_t3
        ])
    ])
    rhs = (
        sigma(g2, g3, shifted)
        * sigma(g1, g23, tangents.phi_h(g1, g23, a_s, a_t3))
        / liouville_value(lie, g23, tangents.sigma_right(g23, a_t3))
    )
    residual = abs(lhs - rhs) / abs(lhs)
    logger.debug(f"split associativity: lhs {lhs:.12e}, rhs {rhs:.12e}")
    return float(residual)


def direct_associativity_residual(
    lie: LieAlgebraData,
    triple: Tuple[ActionGroupoidElement, ActionGroupoidElement, ActionGroupoidElement],
    f: Enhancement = unit_enhancement,
    order: Optional[int] = None
) -> float:
    """
    Relative mismatch of sigma o (sigma x lambda) and sigma o (lambda x sigma).

    Both composites are evaluated on one basis of the tangent space of
    composable triples.
    """
    g1, g2, g3 = triple
    g12, g23 = _check_triple(lie, triple, order)
    g123 = action_multiply(lie, g12, g3, order)
    tangents = ActionTangents(lie, order)
    n = tangents.n
    omega = {id(g): symplectic_form(lie, g) for g in (g1, g2, g3, g12, g23, g123)}

    def sigma_density(a: ActionGroupoidElement, b: ActionGroupoidElement) -> Tuple[np.ndarray, float]:
        basis = tangents.pair_kernel(a, b)
        return basis, f(a, b) * canonical_enhancement(tangents, a, b, basis)

    def lam(g: ActionGroupoidElement) -> float:
        return liouville_value(lie, g, np.eye(2 * n))

    triple_kernel = null_space(np.vstack([
        np.hstack([tangents.ds(g1), -tangents.dt(g2), np.zeros((n, 2 * n))]),
        np.hstack([np.zeros((n, 2 * n)), tangents.ds(g2), -tangents.dt(g3)]),
    ]))
    source_form = block_diag(omega[id(g1)], omega[id(g2)], omega[id(g3)])

    # sigma o (sigma x lambda_G)
    b12, s12 = sigma_density(g1, g2)
    first = GraphTangentData(
        block_diag(b12, np.eye(2 * n)),
        block_diag(tangents.dm(g1, g2) @ b12, np.eye(2 * n)),
        source_form,
        block_diag(omega[id(g12)], omega[id(g3)]),
    )
    b12_3, s12_3 = sigma_density(g12, g3)
    second = GraphTangentData(
        b12_3, tangents.dm(g12, g3) @ b12_3,
        block_diag(omega[id(g12)], omega[id(g3)]), omega[id(g123)],
    )
    left = compose_graph_enhancements(
        first, AlphaDensity.on_identity(HALF, 5 * n, s12 * lam(g3)),
        second, AlphaDensity.on_identity(HALF, 3 * n, s12_3),
        d0_coordinates=np.linalg.lstsq(first.domain_basis, triple_kernel, rcond=None)[0],
    )

    # sigma o (lambda_G x sigma)
    b23, s23 = sigma_density(g2, g3)
    first = GraphTangentData(
        block_diag(np.eye(2 * n), b23),
        block_diag(np.eye(2 * n), tangents.dm(g2, g3) @ b23),
        source_form,
        block_diag(omega[id(g1)], omega[id(g23)]),
    )
    b1_23, s1_23 = sigma_density(g1, g23)
    second = GraphTangentData(
        b1_23, tangents.dm(g1, g23) @ b1_23,
        block_diag(omega[id(g1)], omega[id(g23)]), omega[id(g123)],
    )
    right = compose_graph_enhancements(
        first, AlphaDensity.on_identity(HALF, 5 * n, lam(g1) * s23),
        second, AlphaDensity.on_identity(HALF, 3 * n, s1_23),
        d0_coordinates=np.linalg.lstsq(first.domain_basis, triple_kernel, rcond=None)[0],
    )
    residual = abs(left - right) / abs(left)
    logger.debug(f"direct associativity: {abs(left):.12e} vs {abs(right):.12e}")
    return float(residual)
