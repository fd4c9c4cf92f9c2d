"""The coadjoint action groupoid G x g* in exponential coordinates."""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import expm

from liecase.bch import local_product
from liecase.matrix_functions import phi1
from liecase.models import ActionGroupoidElement
from numerics.errors import CompositionError, OutsideLocalDomainError
from poisson.models import LieAlgebraData

logger = logging.getLogger(__name__)

A_MAX = 0.5
COMPOSABILITY_TOL = 1e-9


def coadjoint(lie: LieAlgebraData, a: np.ndarray) -> np.ndarray:
    """Matrix of Ad*_a = exp(-ad_a)^T."""
    return expm(-lie.ad(np.asarray(a, dtype=float))).T


def source(g: ActionGroupoidElement) -> np.ndarray:
    return g.x


def target(lie: LieAlgebraData, g: ActionGroupoidElement) -> np.ndarray:
    return coadjoint(lie, g.a) @ g.x


def inverse(lie: LieAlgebraData, g: ActionGroupoidElement) -> ActionGroupoidElement:
    return ActionGroupoidElement(-g.a, target(lie, g))


def check_local(g: ActionGroupoidElement, a_max: float = A_MAX) -> None:
    if np.linalg.norm(g.a) > a_max:
        raise OutsideLocalDomainError(
            f"outside local domain (|a| = {np.linalg.norm(g.a):.3f} > {a_max})"
        )


def action_multiply(
    lie: LieAlgebraData,
    g1: ActionGroupoidElement,
    g2: ActionGroupoidElement,
    order: Optional[int] = None
) -> ActionGroupoidElement:
    """
    Compose (a1, x1)(a2, x2) = (a1 . a2, x2).

    Raises:
        CompositionError: If x1 differs from Ad*_{a2} x2
    """
    gap = float(np.max(np.abs(g1.x - target(lie, g2)), initial=0.0))
    if gap > COMPOSABILITY_TOL:
        raise CompositionError(f"arrows not composable (gap {gap:.2e})")
    return ActionGroupoidElement(local_product(lie, g1.a, g2.a, order), g2.x.copy())


def extended_multiply(
    lie: LieAlgebraData,
    vector1: np.ndarray,
    vector2: np.ndarray,
    order: Optional[int] = None
) -> np.ndarray:
    """Multiplication formula extended to all pairs by ignoring x1."""
    n = lie.dim
    return np.concatenate([
        local_product(lie, vector1[:n], vector2[:n], order), vector2[n:]
    ])


def symplectic_form(lie: LieAlgebraData, g: ActionGroupoidElement) -> np.ndarray:
    """
    Matrix of d<x, theta> in (a, x) coordinates.

    theta is the left Maurer-Cartan form (1 - e^{-ad_a})/ad_a, and the
    aa block -Theta^T C_x Theta comes from d theta = -1/2 [theta, theta].
    """
    theta = phi1(-lie.ad(g.a))
    bracket_form = np.einsum('ijm,m->ij', lie.c, g.x)
    n = lie.dim
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, :n] = -theta.T @ bracket_form @ theta
    omega[:n, n:] = -theta.T
    omega[n:, :n] = theta
    return omega


def from_spray_arrow(p: np.ndarray, source_point: np.ndarray) -> ActionGroupoidElement:
    """Image of the spray arrow with covector p and source point s(x, p)."""
    return ActionGroupoidElement(-np.asarray(p, dtype=float),
                                 np.asarray(source_point, dtype=float))
