"""Flat Poisson spray: averaged flows Q, source and target maps."""
import logging
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np

from jets.models import XJetScalar, XJetVector
from jets.polynomials import Polynomial
from jets.truncated_series import TruncatedSeries, definite_time_integral
from numerics.errors import DegenerateBasisError, OutsideLocalDomainError
from numerics.newton import MAX_ITERATIONS, TOLERANCE
from poisson.models import PoissonStructure
from poisson.structures import bivector_on_series, eval_bivector
from spray.models import SourceJet, SprayAverage

logger = logging.getLogger(__name__)

P_MAX = 0.25
DEFAULT_FLOW_ORDER = 8


def check_locality(p: np.ndarray, p_max: float = P_MAX) -> None:
    """
    Raises:
        OutsideLocalDomainError: If |p| exceeds p_max
    """
    norm = float(np.linalg.norm(p))
    if norm > p_max:
        raise OutsideLocalDomainError(
            f"outside local domain (|p| = {norm:.3g} > p_max = {p_max})"
        )


def _averaged_flow(
    pi: PoissonStructure,
    initial: Sequence[TruncatedSeries],
    p_vars: Sequence[int],
    order: int
) -> List[TruncatedSeries]:
    """
    Time-one flow of x' = pi(x) p as series in the p variables.

    The flow is homogeneous in (u, p), so x(u) is the time-one flow at u p
    and the Picard map integrates the degree-r part of pi(phi) p with the
    weight 1/r. Each sweep fixes one more p-degree.
    """
    n = pi.dim
    phi = list(initial)
    for sweep in range(order):
        table = bivector_on_series(pi, phi)
        updated = []
        for i in range(n):
            velocity = table[i][0].times_variable(p_vars[0])
            for j in range(1, n):
                velocity = velocity + table[i][j].times_variable(p_vars[j])
            parts = [velocity.homogeneous_part(r + 1, p_vars) for r in range(order)]
            updated.append(initial[i] + definite_time_integral(parts))
        phi = updated
        logger.debug(f"spray Picard sweep {sweep + 1}/{order}")
    return phi


def _average_in_time(
    phi: Sequence[TruncatedSeries],
    p_vars: Sequence[int],
    order: int
) -> List[TruncatedSeries]:
    return [
        definite_time_integral([c.homogeneous_part(r, p_vars) for r in range(order + 1)])
        for c in phi
    ]


def spray_average_Q(
    pi: PoissonStructure,
    x_tilde: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER
) -> List[TruncatedSeries]:
    """
    Q(x_tilde, p), the time average of the spray flow, as series in p.

    Coefficients carry the x_tilde-jet, so gradients and Hessians of Q in
    its base argument come for free.

    Args:
        pi: Poisson structure
        x_tilde: Base point
        order: Truncation degree in p (at least 1)

    Returns:
        One TruncatedSeries per coordinate
    """
    if order < 1:
        raise ValueError(f"spray order must be at least 1, got {order}")
    x_tilde = np.asarray(x_tilde, dtype=float)
    n = pi.dim
    initial = [
        TruncatedSeries.constant(n, order, XJetScalar.coordinate(x_tilde, i))
        for i in range(n)
    ]
    p_vars = list(range(n))
    return _average_in_time(_averaged_flow(pi, initial, p_vars, order), p_vars, order)


def spray_average_Q_local(
    pi: PoissonStructure,
    x: np.ndarray,
    order: int
) -> List[TruncatedSeries]:
    """
    Q(x + dy, p) as plain series in the 2n variables (dy, p).

    Truncation is by total degree, which is exact for the p-degree <= order
    terms whenever dy is itself O(p).
    """
    x = np.asarray(x, dtype=float)
    n = pi.dim
    initial = [
        TruncatedSeries.variable(2 * n, order, i) + float(x[i]) for i in range(n)
    ]
    p_vars = list(range(n, 2 * n))
    return _average_in_time(_averaged_flow(pi, initial, p_vars, order), p_vars, order)


def _scaled_by_p_degree(poly: Polynomial, n: int, scale: Callable[[int], float]) -> Polynomial:
    return Polynomial(poly.num_vars, {
        exps: value * scale(sum(exps[n:])) for exps, value in poly.terms.items()
    })


@lru_cache(maxsize=32)
def spray_average(pi: PoissonStructure, order: int = DEFAULT_FLOW_ORDER) -> SprayAverage:
    """
    Q(y, p) as polynomials in (y, p), built once per structure and order.

    Same Picard recursion as spray_average_Q, run on exact polynomials in
    the base point; sweep k truncates at p-degree k.

    Raises:
        ValueError: If order < 1
    """
    if order < 1:
        raise ValueError(f"spray order must be at least 1, got {order}")
    n = pi.dim
    weights = [0] * n + [1] * n
    ys = [Polynomial.variable(2 * n, i) for i in range(n)]
    ps = [Polynomial.variable(2 * n, n + j) for j in range(n)]

    phi = list(ys)
    for sweep in range(1, order + 1):
        updated = []
        for i in range(n):
            velocity = Polynomial(2 * n, {})
            for j in range(n):
                entry = pi.polynomials[i][j]
                if not entry.terms:
                    continue
                on_flow = entry.substitute(phi, weights, sweep - 1)
                velocity = velocity + on_flow.mul_truncated(ps[j], weights, sweep)
            updated.append(ys[i] + _scaled_by_p_degree(velocity, n, lambda k: 1.0 / k))
        phi = updated

    average = [_scaled_by_p_degree(c, n, lambda k: 1.0 / (k + 1)) for c in phi]
    keys = sorted(set().union(*(c.terms for c in average)))
    index = {key: t for t, key in enumerate(keys)}
    coeffs = np.zeros((len(keys), n))
    for i, component in enumerate(average):
        for key, value in component.terms.items():
            coeffs[index[key], i] = value
    logger.debug(f"spray average of '{pi.name}' at order {order}: {len(keys)} terms")
    return SprayAverage(n, order, np.array(keys, dtype=int), coeffs)


def _evaluate_Q(
    pi: PoissonStructure,
    y: np.ndarray,
    p: np.ndarray,
    order: int
) -> Tuple[XJetVector, np.ndarray]:
    """Q(y, p) with its y-jet and its p-Jacobian."""
    return spray_average(pi, order).jet(y, p)


def source_map(
    pi: PoissonStructure,
    x: np.ndarray,
    p: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER,
    p_max: float = P_MAX
) -> SourceJet:
    """
    s(x, p) from Q(s, p) = x by Newton steps in the base argument.

    Args:
        pi: Poisson structure
        x: Point of M
        p: Covector
        order: Spray truncation order
        p_max: Locality radius

    Returns:
        SourceJet with the value, its x-gradient and x-Hessian, and d_p s

    Raises:
        OutsideLocalDomainError: If |p| > p_max or Newton fails
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    check_locality(p, p_max)
    if not np.any(p):
        n = pi.dim
        return SourceJet(
            XJetVector(x.copy(), np.eye(n), np.zeros((n, n, n))),
            -0.5 * eval_bivector(pi, x).value
        )

    y = x - 0.5 * eval_bivector(pi, x).value @ p
    for iteration in range(MAX_ITERATIONS):
        q_jet, q_p = _evaluate_Q(pi, y, p, order)
        gap = q_jet.value - x
        if np.linalg.norm(gap) <= TOLERANCE * (1.0 + np.linalg.norm(x)):
            break
        try:
            step = np.linalg.solve(q_jet.grad_x, gap)
        except np.linalg.LinAlgError as e:
            raise OutsideLocalDomainError(
                "outside local domain (singular dQ in source map)"
            ) from e
        y = y - step
    else:
        raise OutsideLocalDomainError(
            f"outside local domain (source map: no convergence in {MAX_ITERATIONS} iterations)"
        )
    logger.debug(f"source map converged in {iteration} Newton steps")

    q_x = q_jet.grad_x
    if abs(np.linalg.det(q_x)) < 1e-14:
        raise DegenerateBasisError("dQ degenerate at the source point")
    inverse = np.linalg.inv(q_x)
    hess = -np.einsum('ia,abc,bj,ck->ijk', inverse, q_jet.hess_x, inverse, inverse)
    return SourceJet(XJetVector(y, inverse, hess), -inverse @ q_p)


def target_map(
    pi: PoissonStructure,
    x: np.ndarray,
    p: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER,
    p_max: float = P_MAX
) -> SourceJet:
    """t(x, p) = s(x, -p); d_p carries the sign of the flip."""
    jet = source_map(pi, x, -np.asarray(p, dtype=float), order, p_max)
    return SourceJet(jet.point, -jet.d_p)


def source_target(
    pi: PoissonStructure,
    x: np.ndarray,
    p: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER,
    p_max: float = P_MAX
) -> Tuple[SourceJet, SourceJet]:
    return source_map(pi, x, p, order, p_max), target_map(pi, x, p, order, p_max)


def realization_residual(
    pi: PoissonStructure,
    x: np.ndarray,
    p: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER
) -> float:
    """
    Largest deviation of the canonical brackets of s and t from pi.

    Checks {s^i, s^j} = pi^{ij}(s), {t^i, t^j} = -pi^{ij}(t) and
    {s^i, t^j} = 0 with {f, g} = d_x f . d_p g - d_p f . d_x g.
    """
    s, t = source_target(pi, x, p, order)

    def bracket(a: SourceJet, b: SourceJet) -> np.ndarray:
        return a.d_x @ b.d_p.T - a.d_p @ b.d_x.T

    deviations = [
        bracket(s, s) - eval_bivector(pi, s.value).value,
        bracket(t, t) + eval_bivector(pi, t.value).value,
        bracket(s, t),
    ]
    return float(max(np.max(np.abs(d)) for d in deviations))
