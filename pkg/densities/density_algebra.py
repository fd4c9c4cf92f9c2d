"""Evaluation, quotients and compositions of alpha-densities."""
import logging
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from densities.models import (
    AlphaDensity,
    GraphTangentData,
    LinearCanonicalRelation,
    ShortExactPresentation,
)
from numerics.errors import (
    DegenerateBasisError,
    NonTransverseCompositionError,
    VanishingDensityError,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
DEGENERACY_TOL = 1e-13
TRANSVERSALITY_TOL = 1e-8


def _is_degenerate(matrix: np.ndarray, tol: float) -> bool:
    if matrix.size == 0:
        return False
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    return singular_values[-1] <= tol * max(singular_values[0], 1e-300)


def _abs_det_power(matrix: np.ndarray, order: Fraction) -> float:
    if matrix.size == 0:
        return 1.0
    _, logabsdet = np.linalg.slogdet(matrix)
    return float(np.exp(float(order) * logabsdet))


def eval_density(density: AlphaDensity, basis: np.ndarray) -> complex:
    """
    Evaluate an alpha-density on a basis.

    Args:
        density: The density
        basis: dim x dim matrix whose columns form the basis

    Returns:
        ref_value * |det(ref_basis^-1 basis)|^order

    Raises:
        DegenerateBasisError: If the columns are linearly dependent
    """
    basis = np.asarray(basis, dtype=float).reshape(density.dim, density.dim)
    if _is_degenerate(basis, DEGENERACY_TOL):
        raise DegenerateBasisError()
    change = np.linalg.solve(density.ref_basis, basis) if density.dim else basis
    return density.ref_value * _abs_det_power(change, density.order)


def liouville_density(omega: np.ndarray, order: Fraction) -> AlphaDensity:
    """Alpha-density |omega^n/n!|^order on the symplectic space (R^2n, omega)."""
    omega = np.asarray(omega, dtype=float)
    if not np.allclose(omega, -omega.T, atol=1e-12):
        raise ValueError("symplectic form must be skew")
    if _is_degenerate(omega, DEGENERACY_TOL):
        raise DegenerateBasisError("degenerate symplectic form")
    value = _abs_det_power(omega, Fraction(order) / 2)
    return AlphaDensity.on_identity(order, omega.shape[0], value)


def liouville_half_density(omega: np.ndarray) -> AlphaDensity:
    """
    Liouville half-density of a symplectic vector space.

    Its value on a basis is |det Gram|^{1/4}, which is 1 on any
    standard symplectic basis.
    """
    return liouville_density(omega, HALF)


def quotient_density(
    sigma: AlphaDensity,
    sigma1: AlphaDensity,
    pres: ShortExactPresentation
) -> AlphaDensity:
    """
    Divide a density on V by a density on the subspace V1.

    Args:
        sigma: Density on V
        sigma1: Density on V1, in coordinates relative to pres.basis_V1
        pres: Presentation of 0 -> V1 -> V -> V2 -> 0

    Returns:
        sigma/sigma1 on V2, referenced to the projected complement

    Raises:
        VanishingDensityError: If sigma1 is zero
    """
    if sigma.order != sigma1.order:
        raise ValueError("orders of numerator and denominator differ")
    denominator = eval_density(sigma1, np.eye(sigma1.dim))
    if abs(denominator) == 0.0:
        raise VanishingDensityError()

    joined = np.hstack([pres.basis_V1, pres.complement])
    numerator = eval_density(sigma, joined)
    reference = pres.projection @ pres.complement
    return AlphaDensity(
        sigma.order, reference.shape[0], numerator / denominator, reference
    )


def sub_density(
    sigma: AlphaDensity,
    sigma2: AlphaDensity,
    pres: ShortExactPresentation
) -> AlphaDensity:
    """Density sigma/sigma2 on V1, in coordinates relative to pres.basis_V1."""
    if sigma.order != sigma2.order:
        raise ValueError("orders of numerator and denominator differ")
    denominator = eval_density(sigma2, pres.projection @ pres.complement)
    if abs(denominator) == 0.0:
        raise VanishingDensityError()
    joined = np.hstack([pres.basis_V1, pres.complement])
    value = eval_density(sigma, joined) / denominator
    return AlphaDensity.on_identity(sigma.order, pres.basis_V1.shape[1], value)


def compose_enhanced_linear(
    rel1: LinearCanonicalRelation,
    s1: AlphaDensity,
    rel2: LinearCanonicalRelation,
    s2: AlphaDensity
) -> Tuple[LinearCanonicalRelation, AlphaDensity]:
    """
    Compose two enhanced linear canonical relations.

    Densities are given in coordinates relative to the basis columns of
    their relations. The composite density is returned relative to the
    basis of the composite relation.

    Raises:
        NonTransverseCompositionError: If the fiber product map has a kernel
    """
    if s1.order != s2.order:
        raise ValueError("densities of different orders cannot be composed")
    d1, d2 = rel1.dims
    d2_check, d3 = rel2.dims
    if d2 != d2_check:
        raise ValueError("middle spaces of the relations differ")

    b1, b2 = rel1.basis_L, rel2.basis_L
    k1, k2 = b1.shape[1], b2.shape[1]
    fiber = np.hstack([b1[d1:], -b2[:d2]])
    product_basis = null_space(fiber)
    rank = product_basis.shape[1]

    outer = np.zeros((d1 + d3, k1 + k2))
    outer[:d1, :k1] = b1[:d1]
    outer[d1:, k1:] = b2[d2:]
    composite = outer @ product_basis

    if rank != (d1 + d3) // 2 or _is_degenerate(composite, TRANSVERSALITY_TOL):
        raise NonTransverseCompositionError()

    complement = null_space(product_basis.T)
    middle = fiber @ complement
    if middle.shape != (d2, d2) or _is_degenerate(middle, TRANSVERSALITY_TOL):
        raise NonTransverseCompositionError()

    order = s1.order
    liouville = liouville_density(rel1.omega2, order)
    change = np.hstack([product_basis, complement])
    value = (
        eval_density(s1, np.eye(k1)) * eval_density(s2, np.eye(k2))
        * _abs_det_power(change, order)
        / eval_density(liouville, middle)
    )
    logger.debug(f"composed relations {rel1.dims} and {rel2.dims}")
    relation = LinearCanonicalRelation(rel1.omega1, rel2.omega2, composite)
    return relation, AlphaDensity.on_identity(order, rank, value)


def compose_graph_enhancements(
    first: GraphTangentData,
    s1: AlphaDensity,
    second: GraphTangentData,
    s2: AlphaDensity,
    d0_coordinates: Optional[np.ndarray] = None,
    complement: Optional[np.ndarray] = None
) -> complex:
    """
    Evaluate the composite of two enhanced map graphs on [T_x D0].

    D0 is the preimage of the second domain under the first map. The
    basis [T_x D0] is d0_coordinates (coordinates relative to
    first.domain_basis) or, by default, an orthonormal kernel basis.

    Args:
        first: Tangent data of f1: D1 -> S2 at x
        s1: Density on T_x D1, coordinates relative to first.domain_basis
        second: Tangent data of f2: D2 -> S3 at f1(x)
        s2: Density on T D2, coordinates relative to second.domain_basis
        d0_coordinates: Optional basis of T_x D0 in D1 coordinates
        complement: Optional complement of T_x D0 in D1 coordinates

    Returns:
        Value of the composite half-density on [T_x D0]

    Raises:
        NonTransverseCompositionError: If Df1 is not transverse to D2
    """
    image = first.differential_image
    target_basis = second.domain_basis
    target_dim = image.shape[0]

    stacked = np.hstack([target_basis, image])
    singular_values = np.linalg.svd(stacked, compute_uv=False)
    if (
        singular_values.size < target_dim
        or singular_values[target_dim - 1]
        <= TRANSVERSALITY_TOL * singular_values[0]
    ):
        raise NonTransverseCompositionError()

    normal = null_space(target_basis.T)
    if normal.shape[1] == 0:
        kernel = np.eye(first.domain_dim)
    else:
        kernel = null_space(normal.T @ image)

    if d0_coordinates is None:
        d0_coordinates = kernel
    elif not np.allclose(normal.T @ image @ d0_coordinates, 0.0, atol=1e-9):
        raise ValueError("d0_coordinates do not lie in the fiber product")

    if complement is None:
        complement = null_space(kernel.T)

    liouville = liouville_density(first.target_form, s1.order)
    value = (
        eval_density(s2, np.eye(second.domain_dim))
        * eval_density(s1, np.hstack([d0_coordinates, complement]))
        / eval_density(liouville, np.hstack([target_basis, image @ complement]))
    )
    return complex(value)
