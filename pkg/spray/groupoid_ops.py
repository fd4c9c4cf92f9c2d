"""Multiplication, the SGA and a0 residuals, and the canonical factor gamma_S."""
import logging
from typing import Callable, Tuple

import numpy as np

from numerics.errors import CompositionError, OutsideLocalDomainError
from numerics.newton import newton_solve
from poisson.models import PoissonStructure
from spray.flow import DEFAULT_FLOW_ORDER, P_MAX, check_locality, source_map, spray_average
from spray.models import ComposablePairChart, GeneratingFunction, GroupoidPoint, TripleChart

logger = logging.getLogger(__name__)

COMPOSABILITY_TOL = 1e-9
# Gap accepted in d_p2 S = x2 once d_p1 S = x1 is solved
SOLVE_TOL = 1e-10
TRUNCATED_BACKENDS = ("closed_linear", "series")
TRUNCATION_SLACK = 1.0

A0Function = Callable[[np.ndarray, np.ndarray, np.ndarray], float]
ScalarFunction = Callable[[np.ndarray], float]


def source_of(S: GeneratingFunction, g: GroupoidPoint) -> np.ndarray:
    """s(g) = d_p2 S(p, 0, x)."""
    return S.grad_p2(g.p, np.zeros_like(g.p), g.x)


def target_of(S: GeneratingFunction, g: GroupoidPoint) -> np.ndarray:
    """t(g) = d_p1 S(0, p, x)."""
    return S.grad_p1(np.zeros_like(g.p), g.p, g.x)


def chart_pair(
    S: GeneratingFunction,
    chart: ComposablePairChart
) -> Tuple[GroupoidPoint, GroupoidPoint, GroupoidPoint]:
    """The pair J(p1, p2, x) and its product (x, d_x S)."""
    jet = S.jet(chart.p1, chart.p2, chart.x)
    return (
        GroupoidPoint(jet.grad_p1, np.asarray(chart.p1, dtype=float)),
        GroupoidPoint(jet.grad_p2, np.asarray(chart.p2, dtype=float)),
        GroupoidPoint(np.asarray(chart.x, dtype=float), jet.grad_x),
    )


def truncation_bound(S: GeneratingFunction, *covectors: np.ndarray) -> float:
    """Size of the dropped p-degree terms of a truncated S at the given covectors."""
    if S.backend not in TRUNCATED_BACKENDS:
        return 0.0
    scale = sum(float(np.linalg.norm(p)) for p in covectors)
    return TRUNCATION_SLACK * scale ** S.order


def fit_chart(
    S: GeneratingFunction,
    g1: GroupoidPoint,
    g2: GroupoidPoint,
    p_max: float = P_MAX
) -> ComposablePairChart:
    """
    J-chart coordinates of a raw composable pair.

    Solves d_p1 S(p1, p2, x) = x1 for x and requires d_p2 S(p1, p2, x) = x2
    up to the truncation of S.

    Raises:
        CompositionError: If s(g1) and t(g2) differ by more than COMPOSABILITY_TOL
        OutsideLocalDomainError: If a covector is too large, Newton fails or
            the x2 gap exceeds the truncation bound
    """
    check_locality(g1.p, p_max)
    check_locality(g2.p, p_max)
    gap = float(np.max(np.abs(source_of(S, g1) - target_of(S, g2))))
    if gap > COMPOSABILITY_TOL:
        raise CompositionError(f"arrows not composable (s(g1) - t(g2) = {gap:.2e})")

    x = newton_solve(
        lambda x: S.grad_p1(g1.p, g2.p, x) - g1.x,
        g1.x,
        lambda x: S.jet(g1.p, g2.p, x).hess_block('p1', 'x'),
        label="multiply"
    )
    second_gap = float(np.linalg.norm(S.grad_p2(g1.p, g2.p, x) - g2.x))
    allowed = SOLVE_TOL * max(1.0, float(np.linalg.norm(g1.x))) + truncation_bound(S, g1.p, g2.p)
    if second_gap > allowed:
        raise OutsideLocalDomainError(
            f"outside local domain (multiply gap {second_gap:.2e} > {allowed:.2e})"
        )
    logger.debug(f"fitted chart with d_p2 gap {second_gap:.2e}")
    return ComposablePairChart(np.asarray(g1.p, float), np.asarray(g2.p, float), x)


def multiply(
    S: GeneratingFunction,
    g1: GroupoidPoint,
    g2: GroupoidPoint,
    p_max: float = P_MAX
) -> GroupoidPoint:
    """
    Product g1 g2 read off the graph of multiplication.

    Args:
        S: Generating function
        g1: Left arrow
        g2: Right arrow, with t(g2) = s(g1)
        p_max: Locality radius

    Returns:
        The arrow (x, d_x S(p1, p2, x))
    """
    chart = fit_chart(S, g1, g2, p_max)
    return GroupoidPoint(chart.x, S.grad_x(chart.p1, chart.p2, chart.x))


def arrow_with_target(S: GeneratingFunction, y: np.ndarray, p: np.ndarray) -> GroupoidPoint:
    """The arrow with covector p and t = y."""
    p = np.asarray(p, dtype=float)
    zero = np.zeros_like(p)
    x = newton_solve(
        lambda x: S.grad_p1(zero, p, x) - y,
        np.asarray(y, dtype=float),
        lambda x: S.jet(zero, p, x).hess_block('p1', 'x'),
        label="arrow with target"
    )
    return GroupoidPoint(x, p)


def arrow_with_source(S: GeneratingFunction, y: np.ndarray, p: np.ndarray) -> GroupoidPoint:
    """The arrow with covector p and s = y."""
    p = np.asarray(p, dtype=float)
    zero = np.zeros_like(p)
    x = newton_solve(
        lambda x: S.grad_p2(p, zero, x) - y,
        np.asarray(y, dtype=float),
        lambda x: S.jet(p, zero, x).hess_block('p2', 'x'),
        label="arrow with source"
    )
    return GroupoidPoint(x, p)


def associativity_residual(
    S: GeneratingFunction,
    g1: GroupoidPoint,
    g2: GroupoidPoint,
    g3: GroupoidPoint
) -> float:
    """Largest difference between (g1 g2) g3 and g1 (g2 g3)."""
    left = multiply(S, multiply(S, g1, g2), g3)
    right = multiply(S, g1, multiply(S, g2, g3))
    return float(max(np.max(np.abs(left.x - right.x)), np.max(np.abs(left.p - right.p))))


def gamma_S(
    S: GeneratingFunction,
    pi: PoissonStructure,
    chart: ComposablePairChart,
    order: int = DEFAULT_FLOW_ORDER
) -> float:
    """
    Canonical half-density factor on composable pairs.

    gamma_S = |det(d_x x~) det(d_x Q(x~, p1)) det(d_x Q~(x~, p2))|^(1/2), where
    x~ = s(g1) is the point where the pair joins.

    Args:
        S: Generating function
        pi: Poisson structure of S
        chart: J-chart point (p1, p2, x)
        order: Spray truncation order

    Returns:
        The positive factor; exactly 1 at p1 = p2 = 0
    """
    p1 = np.asarray(chart.p1, dtype=float)
    p2 = np.asarray(chart.p2, dtype=float)
    jet = S.jet(p1, p2, chart.x)
    joined = source_map(pi, jet.grad_p1, p1, order)
    d_x_tilde = joined.d_x @ jet.hess_block('p1', 'x')

    average = spray_average(pi, order)
    dq_first = average.jet(joined.value, p1)[0].grad_x
    dq_second = average.jet(joined.value, -p2)[0].grad_x
    product = np.linalg.det(d_x_tilde) * np.linalg.det(dq_first) * np.linalg.det(dq_second)
    return float(abs(product) ** 0.5)


def solve_triple(
    S: GeneratingFunction,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    x: np.ndarray
) -> TripleChart:
    """
    Solve the barred and tilde systems of a composable triple.

    x_bar = d_p1 S(p_bar, p3, x),  p_bar = d_x S(p1, p2, x_bar)
    x_tilde = d_p2 S(p1, p_tilde, x),  p_tilde = d_x S(p2, p3, x_tilde)

    Raises:
        OutsideLocalDomainError: If either Newton solve fails
    """
    n = S.dim
    identity = np.eye(n)

    def barred(z):
        x_bar, p_bar = z[:n], z[n:]
        return np.concatenate([
            x_bar - S.grad_p1(p_bar, p3, x),
            p_bar - S.grad_x(p1, p2, x_bar),
        ])

    def barred_jacobian(z):
        x_bar, p_bar = z[:n], z[n:]
        return np.block([
            [identity, -S.jet(p_bar, p3, x).hess_block('p1', 'p1')],
            [-S.jet(p1, p2, x_bar).hess_block('x', 'x'), identity],
        ])

    def tilde(z):
        x_tilde, p_tilde = z[:n], z[n:]
        return np.concatenate([
            x_tilde - S.grad_p2(p1, p_tilde, x),
            p_tilde - S.grad_x(p2, p3, x_tilde),
        ])

    def tilde_jacobian(z):
        x_tilde, p_tilde = z[:n], z[n:]
        return np.block([
            [identity, -S.jet(p1, p_tilde, x).hess_block('p2', 'p2')],
            [-S.jet(p2, p3, x_tilde).hess_block('x', 'x'), identity],
        ])

    bar = newton_solve(barred, np.concatenate([x, p1 + p2]), barred_jacobian, label="SGA barred")
    til = newton_solve(tilde, np.concatenate([x, p2 + p3]), tilde_jacobian, label="SGA tilde")
    return TripleChart(bar[:n], bar[n:], til[:n], til[n:])


def _as_arrays(*vectors):
    return tuple(np.asarray(v, dtype=float) for v in vectors)


def sga_residual(
    S: GeneratingFunction,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    x: np.ndarray
) -> float:
    """
    |LHS - RHS| of the associativity equation for S.

    S(p1, p2, x_bar) + S(p_bar, p3, x) - x_bar . p_bar
      = S(p2, p3, x_tilde) + S(p1, p_tilde, x) - x_tilde . p_tilde
    """
    p1, p2, p3, x = _as_arrays(p1, p2, p3, x)
    triple = solve_triple(S, p1, p2, p3, x)
    lhs = S.value(p1, p2, triple.x_bar) + S.value(triple.p_bar, p3, x) - triple.x_bar @ triple.p_bar
    rhs = (
        S.value(p2, p3, triple.x_tilde) + S.value(p1, triple.p_tilde, x)
        - triple.x_tilde @ triple.p_tilde
    )
    return float(abs(lhs - rhs))


def _transversality_factor(first: np.ndarray, second: np.ndarray) -> float:
    """
    Raises:
        OutsideLocalDomainError: If det(I - first second) <= 0
    """
    det = float(np.linalg.det(np.eye(first.shape[0]) - first @ second))
    if det <= 0.0:
        raise OutsideLocalDomainError(
            f"outside local domain (determinant factor {det:.3e})"
        )
    return det ** -0.5


def a0_residual(
    S: GeneratingFunction,
    a0: A0Function,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    x: np.ndarray
) -> float:
    """
    |LHS - RHS| of the amplitude equation paired with the SGA equation.

    Each side multiplies two values of a0 by |det(I - d2_x S d2_p S)|^(-1/2)
    evaluated at the solutions of the barred and tilde systems.

    Args:
        S: Generating function
        a0: Callable (p1, p2, x) -> float
        p1, p2, p3: Covectors of the triple
        x: Base point

    Raises:
        OutsideLocalDomainError: If a determinant factor is not positive
    """
    p1, p2, p3, x = _as_arrays(p1, p2, p3, x)
    tc = solve_triple(S, p1, p2, p3, x)
    lhs = (
        a0(p1, p2, tc.x_bar) * a0(tc.p_bar, p3, x)
        * _transversality_factor(
            S.jet(p1, p2, tc.x_bar).hess_block('x', 'x'),
            S.jet(tc.p_bar, p3, x).hess_block('p1', 'p1'),
        )
    )
    rhs = (
        a0(p2, p3, tc.x_tilde) * a0(p1, tc.p_tilde, x)
        * _transversality_factor(
            S.jet(p2, p3, tc.x_tilde).hess_block('x', 'x'),
            S.jet(p1, tc.p_tilde, x).hess_block('p2', 'p2'),
        )
    )
    return float(abs(lhs - rhs))


def gamma_amplitude(S: GeneratingFunction, pi: PoissonStructure, order: int) -> A0Function:
    """gamma_S as an a0 callable."""
    def a0(p1, p2, x):
        return gamma_S(S, pi, ComposablePairChart(p1, p2, x), order)
    return a0


def convolve_bisections(
    S: GeneratingFunction,
    a0: A0Function,
    p1: np.ndarray,
    p2: np.ndarray,
    f1: ScalarFunction,
    f2: ScalarFunction,
    x: np.ndarray
) -> Tuple[float, np.ndarray, float]:
    """
    Convolve the bisections of constant covectors p1 and p2.

    Returns:
        S(p1, p2, x), d_x S(p1, p2, x) and the density factor
        f1(d_p1 S) f2(d_p2 S) a0(p1, p2, x)
    """
    p1, p2, x = _as_arrays(p1, p2, x)
    jet = S.jet(p1, p2, x)
    factor = f1(jet.grad_p1) * f2(jet.grad_p2) * a0(p1, p2, x)
    return jet.value, jet.grad_x, float(factor)


def convolution_identity_residual(
    S: GeneratingFunction,
    pi: PoissonStructure,
    p1: np.ndarray,
    p2: np.ndarray,
    f1: ScalarFunction,
    f2: ScalarFunction,
    x: np.ndarray,
    order: int = DEFAULT_FLOW_ORDER
) -> float:
    """
    Relative gap in the convolution of two source pullbacks through gamma_S.

    The left side convolves s*(f1 mu) on the p1 bisection with s*(f2 mu)
    on the p2 bisection. The right side is f1 at the joining point times
    the source pullback of f2 mu to the product bisection {(x, d_x S)}.
    """
    p1, p2, x = _as_arrays(p1, p2, x)
    jet = S.jet(p1, p2, x)
    first = source_map(pi, jet.grad_p1, p1, order)
    second = source_map(pi, jet.grad_p2, p2, order)
    gamma = gamma_S(S, pi, ComposablePairChart(p1, p2, x), order)
    lhs = (
        f1(first.value) * abs(np.linalg.det(first.d_x)) ** 0.5
        * f2(second.value) * abs(np.linalg.det(second.d_x)) ** 0.5
        * gamma
    )

    product = source_map(pi, x, jet.grad_x, order)
    along_bisection = product.d_x + product.d_p @ jet.hess_block('x', 'x')
    rhs = f1(first.value) * f2(product.value) * abs(np.linalg.det(along_bisection)) ** 0.5
    return float(abs(lhs - rhs) / max(abs(rhs), 1e-300))
