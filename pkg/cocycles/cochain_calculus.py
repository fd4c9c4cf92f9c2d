"""Differentials of cochains, transport, and the unit, identity and symmetry checks."""
import logging
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from cocycles.models import Cochain1, Cochain2, CochainReport, EnhancementFactor, VanEstResult
from densities.density_algebra import (
    HALF,
    compose_graph_enhancements,
    eval_density,
    liouville_half_density,
    quotient_density,
)
from densities.models import AlphaDensity, GraphTangentData, ShortExactPresentation, standard_symplectic
from numerics.differentiation import HESSIAN_STEP, mixed_hessian_fd
from numerics.errors import CocycleUndefinedError, SgaLabError
from poisson.models import PoissonStructure
from spray.flow import DEFAULT_FLOW_ORDER
from spray.groupoid_ops import chart_pair, fit_chart, gamma_S, solve_triple, source_of, target_of
from spray.models import ComposablePairChart, GeneratingFunction, GroupoidPoint

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-8
IDENTITY_TOL = 1e-9
SKEW_TOL = 1e-8
# Mixed-Hessian step for cochains computed through the spray pipeline
PIPELINE_FD_STEP = 1e-2

Chart = Tuple[np.ndarray, np.ndarray, np.ndarray]


def triple_charts(
    S: GeneratingFunction,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    x: np.ndarray
) -> Dict[str, Chart]:
    """
    J-chart arguments of the pairs (g1,g2), (g1g2,g3), (g2,g3) and (g1,g2g3).

    Raises:
        OutsideLocalDomainError: If the implicit solves fail
    """
    tc = solve_triple(S, p1, p2, p3, x)
    return {
        "12": (p1, p2, tc.x_bar),
        "12_3": (tc.p_bar, p3, x),
        "23": (p2, p3, tc.x_tilde),
        "1_23": (p1, tc.p_tilde, x),
    }


def multiplicative_delta(f23: complex, f12_3: complex, f1_23: complex, f12: complex) -> complex:
    """
    f(g2,g3) f(g1g2,g3)^-1 f(g1,g2g3) f(g1,g2)^-1.

    Raises:
        CocycleUndefinedError: If a value is zero
    """
    if f12_3 == 0 or f12 == 0 or f23 == 0 or f1_23 == 0:
        raise CocycleUndefinedError()
    return f23 / f12_3 * f1_23 / f12


def delta_mult(
    f: Cochain2,
    S: GeneratingFunction,
    p1: np.ndarray,
    p2: np.ndarray,
    p3: np.ndarray,
    x: np.ndarray
) -> complex:
    """Multiplicative differential of f at the triple with chart (p1, p2, p3, x); 1 on cocycles."""
    charts = triple_charts(S, *_arrays(p1, p2, p3, x))
    return multiplicative_delta(*(f(*charts[key]) for key in ("23", "12_3", "1_23", "12")))


def delta_add(h, S: GeneratingFunction, *args) -> complex:
    """
    Additive differential.

    For a Cochain2 the arguments are (p1, p2, p3, x) and the result is
    h(g2,g3) - h(g1g2,g3) + h(g1,g2g3) - h(g1,g2). For a Cochain1 they
    are the chart (p1, p2, x) of a pair and the result is
    h'(g1) + h'(g2) - h'(g1 g2).
    """
    if isinstance(h, Cochain1):
        g1, g2, g12 = chart_pair(S, ComposablePairChart(*_arrays(*args)))
        return h(g1.x, g1.p) + h(g2.x, g2.p) - h(g12.x, g12.p)
    charts = triple_charts(S, *_arrays(*args))
    return h(*charts["23"]) - h(*charts["12_3"]) + h(*charts["1_23"]) - h(*charts["12"])


def coboundary_of(kappa: Cochain1, S: GeneratingFunction) -> Cochain2:
    """kappa(g1) kappa(g2) / kappa(g1 g2) as a J-chart cochain."""
    def evaluate(p1, p2, x):
        g1, g2, g12 = chart_pair(S, ComposablePairChart(p1, p2, x))
        denominator = kappa(g12.x, g12.p)
        if denominator == 0:
            raise CocycleUndefinedError()
        return kappa(g1.x, g1.p) * kappa(g2.x, g2.p) / denominator
    return Cochain2(evaluate, name=f"delta {kappa.name}")


def additive_coboundary_of(h1: Cochain1, S: GeneratingFunction) -> Cochain2:
    """h'(g1) + h'(g2) - h'(g1 g2) as a J-chart cochain."""
    def evaluate(p1, p2, x):
        return delta_add(h1, S, p1, p2, x)
    return Cochain2(evaluate, additive=True, name=f"delta {h1.name}")


def transport(f: Cochain2, kappa: Cochain1, S: GeneratingFunction) -> Cochain2:
    """The equivalent factor f . delta(kappa)."""
    boundary = coboundary_of(kappa, S)
    return Cochain2(
        lambda p1, p2, x: f(p1, p2, x) * boundary(p1, p2, x),
        name=f"{f.name} . delta {kappa.name}",
    )


def _arrays(*vectors):
    return tuple(np.asarray(v, dtype=float) for v in vectors)


def _relative(a: complex, b: complex) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


def unit_propagation_check(
    f: Cochain2,
    S: GeneratingFunction,
    samples: Sequence[GroupoidPoint],
    tol: float = UNIT_TOL
) -> CochainReport:
    """
    Check f(1, g) = f(1, 1), f(g, 1) = f(1, 1) and the inverse relation.

    The inverse relation is f(g, g^-1) = f(1_s, 1_s) / f(1_t, 1_t) f(g^-1, g).
    Samples that leave the local domain are recorded as violations.
    """
    report = CochainReport("unit_propagation")
    for index, g in enumerate(samples):
        try:
            s, t = source_of(S, g), target_of(S, g)
            inverse = GroupoidPoint(g.x, -g.p)

            def f_pair(a: GroupoidPoint, b: GroupoidPoint) -> complex:
                chart = fit_chart(S, a, b)
                return f(chart.p1, chart.p2, chart.x)

            f_ss = f_pair(GroupoidPoint.unit(s), GroupoidPoint.unit(s))
            f_tt = f_pair(GroupoidPoint.unit(t), GroupoidPoint.unit(t))
            right = _relative(f_pair(g, GroupoidPoint.unit(s)), f_ss)
            left = _relative(f_pair(GroupoidPoint.unit(t), g), f_tt)
            inverse_gap = _relative(
                f_pair(g, inverse), f_ss / f_tt * f_pair(inverse, g)
            )
        except SgaLabError as e:
            logger.warning(f"unit propagation sample {index} failed: {e}")
            report.record(index, float("inf"), tol, error=str(e))
            continue
        report.record(index, max(left, right, inverse_gap), tol,
                      left=left, right=right, inverse=inverse_gap)
    return report


def _pair_differentials(S: GeneratingFunction, p1, p2, x) -> Tuple[np.ndarray, np.ndarray]:
    """DJ (4n x 3n) and the product differential (2n x 3n) at a chart point."""
    n = S.dim
    hess = S.jet(p1, p2, x).hess
    identity, zero = np.eye(n), np.zeros((n, n))
    chart = np.vstack([
        hess[:n], np.hstack([identity, zero, zero]),
        hess[n:2 * n], np.hstack([zero, identity, zero]),
    ])
    product = np.vstack([np.hstack([zero, zero, identity]), hess[2 * n:]])
    return chart, product


def source_differential(S: GeneratingFunction, g: GroupoidPoint) -> np.ndarray:
    """ds in (x, p) coordinates from s(x, p) = d_p2 S(p, 0, x)."""
    n = S.dim
    hess = S.jet(g.p, np.zeros_like(g.p), g.x).hess
    return np.hstack([hess[n:2 * n, 2 * n:], hess[n:2 * n, :n]])


def target_differential(S: GeneratingFunction, g: GroupoidPoint) -> np.ndarray:
    """dt in (x, p) coordinates from t(x, p) = d_p1 S(0, p, x)."""
    n = S.dim
    hess = S.jet(np.zeros_like(g.p), g.p, g.x).hess
    return np.hstack([hess[:n, 2 * n:], hess[:n, n:2 * n]])


def mu_sigma(factor: EnhancementFactor, S: GeneratingFunction, y: np.ndarray) -> float:
    """
    The half-density (lambda_G x lambda_G) / sigma at (1_y, 1_y) on the basis of T_y M.

    Raises:
        VanishingDensityError: If f vanishes at the unit pair
    """
    n = S.dim
    y = np.asarray(y, dtype=float)
    zero = np.zeros(n)
    unit = GroupoidPoint.unit(y)
    chart, _ = _pair_differentials(S, zero, zero, y)
    complement = np.vstack([np.eye(n), np.zeros((3 * n, n))])
    projection = np.hstack([source_differential(S, unit), -target_differential(S, unit)])
    presentation = ShortExactPresentation(4 * n, chart, complement, projection)
    omega = standard_symplectic(n)
    sigma = AlphaDensity.on_identity(HALF, 3 * n, factor.factor(zero, zero, y))
    density = quotient_density(liouville_half_density(block_diag(omega, omega)), sigma, presentation)
    return float(np.real(eval_density(density, np.eye(n))))


def _unit_composition(
    factor: EnhancementFactor,
    S: GeneratingFunction,
    pi: PoissonStructure,
    g: GroupoidPoint,
    order: int,
    side: str
) -> complex:
    """Compose (gr(m), f sigma^c) with (1_M, mu_sigma) on one side, evaluated over g."""
    n = S.dim
    omega = standard_symplectic(n)
    if side == "right":
        y = source_of(S, g)
        chart = fit_chart(S, g, GroupoidPoint.unit(y))
        image = block_diag(np.eye(2 * n), np.vstack([np.eye(n), np.zeros((n, n))]))
        d0 = np.vstack([np.eye(2 * n), source_differential(S, g)])
    else:
        y = target_of(S, g)
        chart = fit_chart(S, GroupoidPoint.unit(y), g)
        image = block_diag(np.vstack([np.eye(n), np.zeros((n, n))]), np.eye(2 * n))
        d0 = np.vstack([target_differential(S, g), np.eye(2 * n)])

    basis, product = _pair_differentials(S, chart.p1, chart.p2, chart.x)
    sigma = factor.factor(chart.p1, chart.p2, chart.x) * gamma_S(S, pi, chart, order)
    lam = float(np.real(eval_density(liouville_half_density(omega), np.eye(2 * n))))

    first = GraphTangentData(np.eye(3 * n), image, block_diag(omega, np.zeros((n, n))),
                             block_diag(omega, omega))
    second = GraphTangentData(basis, product, block_diag(omega, omega), omega)
    return compose_graph_enhancements(
        first, AlphaDensity.on_identity(HALF, 3 * n, lam * mu_sigma(factor, S, y)),
        second, AlphaDensity.on_identity(HALF, 3 * n, sigma),
        d0_coordinates=d0,
    )


def identity_axiom_check(
    factor: EnhancementFactor,
    S: GeneratingFunction,
    pi: PoissonStructure,
    samples: Sequence[GroupoidPoint],
    order: int = DEFAULT_FLOW_ORDER,
    tol: float = IDENTITY_TOL
) -> CochainReport:
    """
    Compose f sigma^c with (1_M, mu_sigma) on both sides and compare with lambda_G.

    Both composites must return the Liouville value 1 on the coordinate
    basis of T_g G.
    """
    report = CochainReport("identity_axiom")
    lam = float(np.real(eval_density(liouville_half_density(standard_symplectic(S.dim)),
                                     np.eye(2 * S.dim))))
    for index, g in enumerate(samples):
        try:
            right = abs(_unit_composition(factor, S, pi, g, order, "right") - lam) / lam
            left = abs(_unit_composition(factor, S, pi, g, order, "left") - lam) / lam
        except SgaLabError as e:
            logger.warning(f"identity axiom sample {index} failed: {e}")
            report.record(index, float("inf"), tol, error=str(e))
            continue
        report.record(index, float(max(left, right)), tol, left=float(left), right=float(right))
    return report


def mixed_hessian_at_units(h: Cochain2, x: np.ndarray, step: float = HESSIAN_STEP) -> np.ndarray:
    """d2 h / dp1_i dp2_j at (0, 0, x); exact for polynomial cochains."""
    x = np.asarray(x, dtype=float)
    n = x.size
    zero = np.zeros(n)
    if h.polynomial is not None:
        _, _, hess = h.polynomial.jet(np.concatenate([zero, zero, x]))
        return hess[:n, n:2 * n]
    return mixed_hessian_fd(lambda a, b: h(a, b, x), zero, zero, step)


def symmetry_and_vanest0(
    h: Cochain2,
    points: Sequence[np.ndarray],
    step: float = HESSIAN_STEP,
    tol: float = SKEW_TOL
) -> VanEstResult:
    """
    Split the mixed Hessian of h at the units into symmetric and skew parts.

    The skew part is the van Est image of h; the symmetry condition holds
    when it vanishes at every point.
    """
    symmetric, skew = [], []
    for x in points:
        hess = mixed_hessian_at_units(h, x, step)
        symmetric.append(0.5 * (hess + hess.T))
        skew.append(0.5 * (hess - hess.T))
    max_skew = float(max((np.max(np.abs(s)) for s in skew), default=0.0))
    logger.debug(f"van Est projection of {h.name}: max skew {max_skew:.2e}")
    return VanEstResult(symmetric, skew, max_skew, max_skew < tol)


# Pair groupoid M x M with t(x, y) = x, s(x, y) = y

PairArrow = Tuple[np.ndarray, np.ndarray]
TripleFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], complex]


def pair_multiply(g1: PairArrow, g2: PairArrow, tol: float = 1e-12) -> PairArrow:
    if np.max(np.abs(g1[1] - g2[0])) > tol:
        raise CocycleUndefinedError("pair arrows not composable")
    return g1[0], g2[1]


def pair_delta_mult(f: TripleFunction, x1, x2, x3, x4) -> complex:
    """
    Multiplicative differential on the quadruple (x1, x2, x3, x4).

    Arrows g1 = (x1, x2), g2 = (x2, x3), g3 = (x3, x4); a pair (a, b)
    with a = (x, y), b = (y, z) carries the value f(x, y, z).
    """
    def f_pair(a: PairArrow, b: PairArrow) -> complex:
        return f(a[0], a[1], b[1])

    g1, g2, g3 = (x1, x2), (x2, x3), (x3, x4)
    return multiplicative_delta(
        f_pair(g2, g3),
        f_pair(pair_multiply(g1, g2), g3),
        f_pair(g1, pair_multiply(g2, g3)),
        f_pair(g1, g2),
    )


def area_cocycle(omega: np.ndarray, scale: float = 1.0) -> TripleFunction:
    """exp(i scale A) with A the symplectic area of the triangle (x1, x2, x3)."""
    def f(x1, x2, x3):
        area = 0.5 * (x2 - x1) @ omega @ (x3 - x1)
        return complex(np.exp(1j * scale * area))
    return f


def pair_coboundary(kappa: Callable[[np.ndarray, np.ndarray], complex]) -> TripleFunction:
    """kappa(x, y) kappa(y, z) / kappa(x, z)."""
    def f(x1, x2, x3):
        return kappa(x1, x2) * kappa(x2, x3) / kappa(x1, x3)
    return f
