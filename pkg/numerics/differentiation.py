"""Central finite differences used where no jet channel is available."""
from typing import Callable

import numpy as np

JACOBIAN_STEP = 1e-3
HESSIAN_STEP = 1e-4


def jacobian_fd(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = JACOBIAN_STEP
) -> np.ndarray:
    """
    Fourth-order central-difference Jacobian of a vector function.

    Args:
        func: Map from R^k to R^m
        x: Base point
        step: Difference step

    Returns:
        m x k matrix of partial derivatives
    """
    x = np.asarray(x, dtype=float)
    columns = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        column = (
            -np.asarray(func(x + 2 * e)) + 8 * np.asarray(func(x + e))
            - 8 * np.asarray(func(x - e)) + np.asarray(func(x - 2 * e))
        ) / (12 * step)
        columns.append(np.atleast_1d(column))
    return np.stack(columns, axis=-1)


def mixed_hessian_fd(
    func: Callable[[np.ndarray, np.ndarray], complex],
    a: np.ndarray,
    b: np.ndarray,
    step: float = HESSIAN_STEP
) -> np.ndarray:
    """
    Central-difference mixed second derivative d^2 func / da_i db_j.

    Args:
        func: Scalar function of two vector arguments
        a: First argument base point
        b: Second argument base point
        step: Difference step

    Returns:
        len(a) x len(b) matrix
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    result = np.zeros((a.size, b.size))
    for i in range(a.size):
        ea = np.zeros_like(a)
        ea[i] = step
        for j in range(b.size):
            eb = np.zeros_like(b)
            eb[j] = step
            result[i, j] = np.real(
                func(a + ea, b + eb) - func(a + ea, b - eb)
                - func(a - ea, b + eb) + func(a - ea, b - eb)
            ) / (4 * step * step)
    return result
