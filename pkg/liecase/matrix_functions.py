"""Analytic functions of ad_p by truncated Taylor series."""
import logging
from math import factorial
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import bernoulli

from numerics.errors import OutsideLocalDomainError

logger = logging.getLogger(__name__)

TAYLOR_ORDER = 20
NORM_GUARD = 1.0

SINHC_HALF = [
    (0.5 ** k) / factorial(k + 1) if k % 2 == 0 else 0.0
    for k in range(TAYLOR_ORDER + 1)
]
ONE_MINUS_EXP_OVER_Z = [(-1.0) ** k / factorial(k + 1) for k in range(TAYLOR_ORDER + 1)]
Z_OVER_EXP_MINUS_ONE = [
    float(b) / factorial(k) for k, b in enumerate(bernoulli(TAYLOR_ORDER))
]


def matrix_series(matrix: np.ndarray, coefficients: Sequence[float]) -> np.ndarray:
    """Horner evaluation of sum_k coefficients[k] * matrix^k."""
    n = matrix.shape[0]
    result = np.eye(n) * coefficients[-1]
    for coefficient in reversed(coefficients[:-1]):
        result = matrix @ result + np.eye(n) * coefficient
    return result


def check_norm(matrix: np.ndarray, guard: float = NORM_GUARD) -> None:
    """
    Raises:
        OutsideLocalDomainError: If the spectral norm reaches the guard
    """
    norm = float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0
    if norm >= guard:
        raise OutsideLocalDomainError(
            f"outside local domain (|ad_p| = {norm:.3f} >= {guard})"
        )


def sinhc_half(matrix: np.ndarray) -> np.ndarray:
    """sinh(z/2)/(z/2) at z = matrix."""
    check_norm(matrix)
    return matrix_series(matrix, SINHC_HALF)


def one_minus_exp_over(matrix: np.ndarray) -> np.ndarray:
    """(1 - e^{-z})/z at z = matrix."""
    check_norm(matrix)
    return matrix_series(matrix, ONE_MINUS_EXP_OVER_Z)


def todd(matrix: np.ndarray) -> np.ndarray:
    """z/(e^z - 1) at z = matrix."""
    check_norm(matrix)
    return matrix_series(matrix, Z_OVER_EXP_MINUS_ONE)


def phi1(matrix: np.ndarray) -> np.ndarray:
    """
    Exact (e^z - 1)/z at z = matrix, without a norm guard.

    Read off the top-right block of the exponential of [[z, I], [0, 0]].
    """
    n = matrix.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = matrix
    block[:n, n:] = np.eye(n)
    return expm(block)[:n, n:]
