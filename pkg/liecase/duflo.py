"""Duflo-type factors, the plane-wave star product and the Duflo identity."""
import logging
from typing import Optional, Tuple

import numpy as np

from liecase.bch import DEFAULT_ORDER, local_product
from liecase.matrix_functions import one_minus_exp_over, sinhc_half
from liecase.models import DufloFactors
from poisson.models import LieAlgebraData
from poisson.structures import lie_to_poisson
from spray.generating_function import build_generating_function
from spray.groupoid_ops import gamma_S
from spray.models import ComposablePairChart

logger = logging.getLogger(__name__)

F_CHOICES = ("gutt", "rieffel", "kontsevich", "tilde")


def duflo_factors(lie: LieAlgebraData, p: np.ndarray) -> DufloFactors:
    """
    Evaluate F_G, F_R, F_K and F_tilde at p.

    Args:
        lie: Lie algebra
        p: Algebra element with |ad_p| < 1

    Returns:
        DufloFactors

    Raises:
        OutsideLocalDomainError: If the norm guard is violated
    """
    ad = lie.ad(np.asarray(p, dtype=float))
    F_R = float(np.linalg.det(sinhc_half(ad)))
    F_tilde = float(np.linalg.det(one_minus_exp_over(ad)))
    return DufloFactors(F_G=1.0, F_R=F_R, F_K=float(np.sqrt(F_R)), F_tilde=F_tilde)


def factor(lie: LieAlgebraData, choice: str, p: np.ndarray) -> float:
    if choice == "gutt":
        return 1.0
    return duflo_factors(lie, p).by_choice(choice)


def plane_wave_star(
    lie: LieAlgebraData,
    F_choice: str,
    p1: np.ndarray,
    p2: np.ndarray,
    order: Optional[int] = None
) -> Tuple[np.ndarray, float]:
    """
    Action of the star product on two plane waves.

    Args:
        lie: Lie algebra
        F_choice: gutt, rieffel, kontsevich or tilde
        p1: Frequency of the first plane wave
        p2: Frequency of the second plane wave
        order: BCH order; None uses the exact local product when available

    Returns:
        (p1 . p2, F(p1) F(p2) / F(p1 . p2))
    """
    if F_choice not in F_CHOICES:
        raise ValueError(f"unknown F choice '{F_choice}'")
    product = local_product(lie, p1, p2, order)
    amplitude = (
        factor(lie, F_choice, p1) * factor(lie, F_choice, p2)
        / factor(lie, F_choice, product)
    )
    return product, amplitude


def star_associativity_residual(
    lie: LieAlgebraData,
    F_choice: str,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    order: Optional[int] = None
) -> float:
    """Mismatch of both bracketings of three plane waves (frequency and amplitude)."""
    p12, a12 = plane_wave_star(lie, F_choice, p1, p2, order)
    left_p, left_a = plane_wave_star(lie, F_choice, p12, p3, order)
    p23, a23 = plane_wave_star(lie, F_choice, p2, p3, order)
    right_p, right_a = plane_wave_star(lie, F_choice, p1, p23, order)
    return float(max(
        abs(a12 * left_a - a23 * right_a),
        np.max(np.abs(left_p - right_p), initial=0.0)
    ))


def f_k_cocycle(lie: LieAlgebraData, p1: np.ndarray, p2: np.ndarray,
                product: np.ndarray, choice: str = "kontsevich") -> float:
    return factor(lie, choice, p1) * factor(lie, choice, p2) / factor(lie, choice, product)


def duflo_identity_residual(
    lie: LieAlgebraData,
    p1: np.ndarray,
    p2: np.ndarray,
    x: np.ndarray,
    order: int = DEFAULT_ORDER,
    choice: str = "kontsevich"
) -> dict:
    """
    Compare gamma_S from the spray pipeline with the F cocycle.

    The spray groupoid of the linear structure multiplies covectors as
    BCH(p2, p1), and gamma_S at (p1, p2, x) is checked against
    F(p1) F(p2) / F(p1 . p2) with that product.

    Returns:
        Record with gamma_S, the F ratio, the F_tilde cross-check and
        the relative residual
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    pi = lie_to_poisson(lie)
    S = build_generating_function(pi, "closed_linear", order, lie=lie)
    gamma = gamma_S(S, pi, ComposablePairChart(p1, p2, np.asarray(x, float)), order)

    product = local_product(lie, p2, p1, order)
    ratio = f_k_cocycle(lie, p1, p2, product, choice)
    tilde = abs(f_k_cocycle(lie, p1, p2, product, "tilde")) ** 0.5
    residual = abs(gamma - ratio) / abs(ratio)
    logger.debug(f"duflo identity: gamma {gamma:.12f}, {choice} ratio {ratio:.12f}")
    return {
        "gamma_S": gamma,
        "ratio": ratio,
        "tilde_ratio": tilde,
        "tilde_residual": abs(gamma - tilde) / abs(tilde),
        "residual": residual,
    }
