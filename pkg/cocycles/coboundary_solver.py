"""Primitives of additive 2-cochains, degree by degree in p."""
import itertools
import logging
from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import comb

from cocycles.cochain_calculus import symmetry_and_vanest0
from cocycles.models import Cochain2, CoboundaryResult
from jets.monomials import monomial_basis
from jets.polynomials import Polynomial
from jets.ray_series import RayPolynomialEvaluator, ray_constant, ray_linear, stack_ray_args
from numerics.errors import NotNormalizedError, PreconditionError
from spray.generating_function import SERIES_SEED, gradient_evaluator, triple_rays
from spray.models import GeneratingFunction

logger = logging.getLogger(__name__)

COBOUNDARY_TOL = 1e-10
RCOND = 1e-10
COCYCLE_TOL = 1e-9
ROUNDING_TOL = 1e-13
COCYCLE_RAYS = 24
SYMMETRY_POINTS = 4

Exponent = Tuple[int, ...]


def _split(exps: Exponent, n: int) -> Tuple[Exponent, Exponent, Exponent]:
    return exps[:n], exps[n:2 * n], exps[2 * n:]


def check_normalized(h: Polynomial, n: int) -> None:
    """
    Raises:
        NotNormalizedError: If a term of h lacks p1 or p2
    """
    for exps in h.terms:
        p1, p2, _ = _split(exps, n)
        if not any(p1) or not any(p2):
            raise NotNormalizedError(
                f"cochain not normalized: term p1^{p1} p2^{p2} does not vanish on units"
            )


def delta0_matrix(n: int, k: int) -> Tuple[np.ndarray, Dict[Exponent, int], np.ndarray]:
    """
    Matrix of h'(p1) + h'(p2) - h'(p1 + p2) on degree-k monomials.

    Returns:
        (source exponents (A, n), index of target (p1, p2) exponents, matrix (B, A))
    """
    single, pair = monomial_basis(n, k), monomial_basis(2 * n, k)
    source = single.exponents[single.degree_slice(k)]
    target = pair.exponents[pair.degree_slice(k)]
    index = {tuple(int(e) for e in row): i for i, row in enumerate(target)}
    matrix = np.zeros((len(target), len(source)))
    for col, alpha in enumerate(source):
        alpha = tuple(int(a) for a in alpha)
        matrix[index[alpha + (0,) * n], col] += 1.0
        matrix[index[(0,) * n + alpha], col] += 1.0
        for first in itertools.product(*(range(a + 1) for a in alpha)):
            second = tuple(a - b for a, b in zip(alpha, first))
            weight = float(np.prod([comb(a, b, exact=True) for a, b in zip(alpha, first)]))
            matrix[index[first + second], col] -= weight
    return source, index, matrix


def delta0(h1: Polynomial, n: int) -> Polynomial:
    """h'(p1, x) + h'(p2, x) - h'(p1 + p2, x) for h' over (p, x)."""
    variables = [Polynomial.variable(3 * n, v) for v in range(3 * n)]
    p1, p2, x = variables[:n], variables[n:2 * n], variables[2 * n:]
    total = [a + b for a, b in zip(p1, p2)]
    return h1.substitute(p1 + x) + h1.substitute(p2 + x) - h1.substitute(total + x)


def coboundary_solve_pi0(h: Polynomial, n: int, max_degree: int) -> CoboundaryResult:
    """
    Solve delta0 h' = h for the zero Poisson structure.

    Each p-degree and x-monomial is an independent least-squares problem.
    At degree 2 the residual is the skew part of the mixed Hessian, which
    is returned as the certificate.

    Args:
        h: Normalized polynomial in (p1, p2, x)
        n: Dimension of M
        max_degree: Highest p-degree solved

    Returns:
        CoboundaryResult with the primitive over (p, x) or the certificate

    Raises:
        NotNormalizedError: If h does not vanish on units
    """
    check_normalized(h, n)
    blocks: Dict[Tuple[int, Exponent], Dict[Exponent, float]] = defaultdict(dict)
    for exps, value in h.terms.items():
        p1, p2, x = _split(exps, n)
        degree = sum(p1) + sum(p2)
        if degree > max_degree:
            raise ValueError(f"term of p-degree {degree} above max_degree {max_degree}")
        blocks[(degree, x)][p1 + p2] = value

    primitive: Dict[Exponent, float] = {}
    worst = 0.0
    for (k, beta) in sorted(blocks):
        source, index, matrix = delta0_matrix(n, k)
        rhs = np.zeros(len(index))
        for pp, value in blocks[(k, beta)].items():
            rhs[index[pp]] = value
        solution = np.linalg.lstsq(matrix, rhs, rcond=RCOND)[0]
        leftover = rhs - matrix @ solution
        residual = float(np.max(np.abs(leftover)))
        worst = max(worst, residual)
        if residual > COBOUNDARY_TOL * max(1.0, float(np.max(np.abs(rhs)))):
            logger.info(f"no primitive at p-degree {k}: residual {residual:.2e}")
            certificate = {
                pp + beta: float(value)
                for pp, value in zip(index, leftover) if abs(value) > COBOUNDARY_TOL
            }
            return CoboundaryResult(
                False, residual=residual, degree=k, certificate=Polynomial(3 * n, certificate)
            )
        for alpha, value in zip(source, solution):
            if abs(value) > COBOUNDARY_TOL:
                primitive[tuple(int(a) for a in alpha) + beta] = float(value)

    result = Polynomial(2 * n, primitive)
    mismatch = (delta0(result, n) - h).max_abs_coefficient()
    logger.debug(f"delta0 primitive verified to {mismatch:.2e}")
    return CoboundaryResult(True, primitive=result, residual=max(worst, mismatch))


def _weights(n: int) -> List[int]:
    return [1] * (2 * n) + [0] * n


def _drop_small(poly: Polynomial, tol: float) -> Polynomial:
    """Remove rounding residue left by cancelling substitutions."""
    return Polynomial(poly.num_vars, {k: v for k, v in poly.terms.items() if abs(v) > tol})


def graded_blocks_from_values(
    h: Cochain2,
    n: int,
    max_degree: int,
    x_degree: int = 0,
    radius: float = 0.05,
    seed: int = SERIES_SEED
) -> Dict[int, Polynomial]:
    """
    Fit the p-degree blocks 2..max_degree of a normalized cochain from its values.

    Only mixed monomials (p1 and p2 both present) are fitted, and the
    x-degree is bounded by x_degree. Blocks above max_degree are folded
    into the fit, so the error is of order radius^(max_degree + 1).
    """
    p_basis = monomial_basis(2 * n, max_degree)
    p_monomials = p_basis.exponents[p_basis.degrees >= 2]
    p_monomials = p_monomials[
        (p_monomials[:, :n].sum(axis=1) > 0) & (p_monomials[:, n:].sum(axis=1) > 0)
    ]
    x_monomials = monomial_basis(n, x_degree).exponents
    exps = np.array([np.concatenate([pm, xm]) for pm in p_monomials for xm in x_monomials],
                    dtype=int).reshape(-1, 3 * n)

    rng = np.random.default_rng(seed)
    count = 2 * exps.shape[0]
    points = np.hstack([
        rng.uniform(-radius, radius, size=(count, 2 * n)),
        rng.uniform(-1.0, 1.0, size=(count, n)),
    ])
    values = np.array([float(np.real(h(row[:n], row[n:2 * n], row[2 * n:]))) for row in points])
    matrix = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
    coefficients = np.linalg.lstsq(matrix, values, rcond=None)[0]

    blocks: Dict[int, Dict[Exponent, float]] = defaultdict(dict)
    for row, value in zip(exps, coefficients):
        blocks[int(row[:2 * n].sum())][tuple(int(e) for e in row)] = float(value)
    logger.debug(f"fitted {exps.shape[0]} graded coefficients of {h.name} from {count} values")
    return {k: Polynomial(3 * n, terms) for k, terms in sorted(blocks.items())}


def additive_delta_polynomial(h1: Polynomial, S: Polynomial, n: int, max_degree: int) -> Polynomial:
    """
    h'(g1) + h'(g2) - h'(g1 g2) in the J-chart, truncated at p-degree max_degree.

    g1 = (d_p1 S, p1), g2 = (d_p2 S, p2) and g1 g2 = (x, d_x S).
    """
    weights = _weights(n)
    variables = [Polynomial.variable(3 * n, v) for v in range(3 * n)]
    grads = [S.derivative(v) for v in range(3 * n)]
    first = h1.substitute(variables[:n] + grads[:n], weights, max_degree)
    second = h1.substitute(variables[n:2 * n] + grads[n:2 * n], weights, max_degree)
    product = h1.substitute(grads[2 * n:] + variables[2 * n:], weights, max_degree)
    return first + second - product


def graded_cocycle_defect(
    h: Polynomial,
    S: Polynomial,
    n: int,
    max_degree: int,
    rays: int = COCYCLE_RAYS,
    seed: int = SERIES_SEED
) -> Dict[int, float]:
    """
    Largest coefficient of eps^k in delta h along random rays (eps q1, eps q2, eps q3, x).

    Returns:
        Mapping k -> defect for k = 0..max_degree
    """
    rng = np.random.default_rng(seed)
    length = max_degree + 1
    q1, q2, q3 = rng.normal(size=(3, rays, n))
    x = rng.uniform(-1.0, 1.0, size=(rays, n))
    e1, e2, e3 = (ray_linear(q.T, length) for q in (q1, q2, q3))
    xc = ray_constant(x.T, length)
    x_bar, p_bar, x_tilde, p_tilde = triple_rays(gradient_evaluator(S), n, e1, e2, e3, xc)

    exps, coeffs = h.arrays()
    evaluator = RayPolynomialEvaluator(exps, coeffs)

    def value(a, b, c):
        return evaluator(stack_ray_args([a, b, c]))[0]

    delta = (value(e2, e3, x_tilde) - value(p_bar, e3, xc)
             + value(e1, p_tilde, xc) - value(e1, e2, x_bar))
    return {k: float(np.max(np.abs(delta[:, k]))) for k in range(length)}


def graded_coboundary_solve(
    h_graded: Dict[int, Polynomial],
    S: GeneratingFunction,
    max_degree: int,
    seed: int = SERIES_SEED
) -> CoboundaryResult:
    """
    Solve delta h' = h for a cochain given by its p-degree blocks.

    At degree k the new block of h' solves delta0 h'_k = h_k - [delta h'_{<k}]_k.
    The degree-1 part of h' is taken to be zero.

    Args:
        h_graded: Mapping k -> homogeneous block of p-degree k over (p1, p2, x)
        S: Generating function of the groupoid
        max_degree: Highest p-degree solved
        seed: Seed of the cocycle test rays

    Returns:
        CoboundaryResult with the graded primitive over (p, x)

    Raises:
        PreconditionError: If h is not symmetric, not a cocycle, or not a coboundary
        NotNormalizedError: If h does not vanish on units
    """
    n = S.dim
    weights = _weights(n)
    h = Polynomial(3 * n, {})
    for k, block in h_graded.items():
        if k <= max_degree:
            h = h + block
    scale = max(1.0, h.max_abs_coefficient())
    h = _drop_small(h, ROUNDING_TOL * scale)
    check_normalized(h, n)
    if not h.terms:
        logger.debug("zero cochain: primitive is zero")
        return CoboundaryResult(True, primitive=Polynomial(2 * n, {}), residual=0.0)

    rng = np.random.default_rng(seed)
    points = rng.uniform(-1.0, 1.0, size=(SYMMETRY_POINTS, n))
    vanest = symmetry_and_vanest0(Cochain2.from_polynomial(h), list(points))
    if not vanest.passed:
        raise PreconditionError("symmetry", f"skew mixed Hessian {vanest.max_skew:.2e}")

    S_poly = S.polynomial.truncated(weights, max_degree + 1)
    for k, defect in graded_cocycle_defect(h, S_poly, n, max_degree, seed=seed).items():
        if defect > COCYCLE_TOL * scale:
            raise PreconditionError("cocycle", f"delta h = {defect:.2e} at degree {k}")

    primitive = Polynomial(2 * n, {})
    worst = 0.0
    for k in range(2, max_degree + 1):
        lower = additive_delta_polynomial(primitive, S_poly, n, k).homogeneous(weights, k)
        target = _drop_small(h.homogeneous(weights, k) - lower, ROUNDING_TOL * scale)
        if not target.terms:
            continue
        step = coboundary_solve_pi0(target, n, k)
        if not step.success:
            raise PreconditionError(
                "coboundary", f"degree {k}: residual {step.residual:.2e}"
            )
        worst = max(worst, step.residual)
        primitive = primitive + step.primitive
        logger.debug(f"graded primitive fixed through p-degree {k}")

    check = (additive_delta_polynomial(primitive, S_poly, n, max_degree) - h).truncated(
        weights, max_degree
    )
    mismatch = check.max_abs_coefficient()
    if mismatch > COBOUNDARY_TOL * scale:
        raise PreconditionError("verification", f"delta h' - h = {mismatch:.2e}")
    return CoboundaryResult(True, primitive=primitive, residual=max(worst, mismatch))
