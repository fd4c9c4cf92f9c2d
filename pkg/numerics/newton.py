"""Damped Newton iteration for the implicit solves of the local groupoid."""
import logging
from typing import Callable, Optional

import numpy as np

from numerics.differentiation import jacobian_fd
from numerics.errors import OutsideLocalDomainError

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 50
TOLERANCE = 1e-12
MAX_HALVINGS = 12


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    tol: float = TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
    label: str = "newton"
) -> np.ndarray:
    """
    Solve residual(x) = 0 by damped Newton steps.

    Steps come from a least-squares solve so overdetermined consistent
    systems are accepted. A step is halved until the residual norm stops
    growing.

    Args:
        residual: Map from R^k to R^m
        x0: Initial guess
        jacobian: Optional analytic Jacobian; finite differences otherwise
        tol: Tolerance on the residual norm and on the relative step
        max_iter: Iteration cap
        label: Name used in log and error messages

    Returns:
        The converged point

    Raises:
        OutsideLocalDomainError: If the iteration does not converge
    """
    x = np.array(x0, dtype=float)
    f = np.asarray(residual(x), dtype=float)
    norm = float(np.linalg.norm(f))

    for iteration in range(max_iter):
        if norm <= tol:
            logger.debug(f"{label}: converged in {iteration} iterations")
            return x

        jac = jacobian(x) if jacobian is not None else jacobian_fd(residual, x)
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]

        scale = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = x + scale * step
            f_candidate = np.asarray(residual(candidate), dtype=float)
            norm_candidate = float(np.linalg.norm(f_candidate))
            if np.isfinite(norm_candidate) and norm_candidate <= norm:
                break
            scale *= 0.5
        else:
            if norm <= np.sqrt(tol):
                logger.debug(f"{label}: no descent below {norm:.2e}")
                return x
            raise OutsideLocalDomainError(
                f"outside local domain ({label}: no descent step)"
            )

        x, f, norm = candidate, f_candidate, norm_candidate
        if np.linalg.norm(scale * step) <= tol * (1.0 + np.linalg.norm(x)):
            if norm <= np.sqrt(tol):
                logger.debug(f"{label}: stalled at residual {norm:.2e}")
                return x
            raise OutsideLocalDomainError(
                f"outside local domain ({label}: stalled at {norm:.2e})"
            )

    if norm <= tol:
        return x
    raise OutsideLocalDomainError(
        f"outside local domain ({label}: no convergence in {max_iter} "
        f"iterations)"
    )
