"""Generating functions S(p1, p2, x): closed forms and the order-by-order series solve."""
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np

from jets.monomials import monomial_basis
from jets.polynomials import Polynomial
from jets.ray_series import (
    RayPolynomialEvaluator,
    ray_constant,
    ray_linear,
    ray_mul,
    stack_ray_args,
)
from jets.truncated_series import TruncatedSeries
from liecase.bch import DEFAULT_ORDER as BCH_DEFAULT_ORDER
from liecase.bch import bch_series
from numerics.errors import PreconditionError, SeriesConsistencyError
from poisson.models import LieAlgebraData, PoissonStructure
from poisson.structures import LINEAR_SIGN, eval_bivector
from spray.flow import source_map, spray_average_Q, spray_average_Q_local, target_map
from spray.models import BACKENDS, GeneratingFunction

logger = logging.getLogger(__name__)

# Series orders by polynomial degree of pi
SERIES_DEFAULT_ORDERS = {0: 8, 1: 4}
SERIES_FALLBACK_ORDER = 5
SERIES_SEED = 20240611
RANK_TOL = 1e-10
CONSISTENCY_TOL = 1e-8
PRUNE_TOL = 1e-13
RAY_CHUNK = 200
MIN_SGA_ROWS = 40
SLICE_POINTS = 24
SLICE_DIRECTIONS = 4


def default_order(pi: PoissonStructure, backend: str) -> int:
    if backend == "closed_linear":
        return BCH_DEFAULT_ORDER
    if backend == "series":
        return SERIES_DEFAULT_ORDERS.get(pi.degree, SERIES_FALLBACK_ORDER)
    return 2


def _weights(n: int) -> List[int]:
    """Degree in (p1, p2) only; x does not count."""
    return [1] * (2 * n) + [0] * n


def _base_polynomial(n: int) -> Polynomial:
    """x . (p1 + p2) in the 3n variables (p1, p2, x)."""
    terms = {}
    for block in (0, 1):
        for i in range(n):
            exps = [0] * (3 * n)
            exps[block * n + i] = 1
            exps[2 * n + i] = 1
            terms[tuple(exps)] = 1.0
    return Polynomial(3 * n, terms)


def _linear_coefficients(pi: PoissonStructure) -> np.ndarray:
    """c_pi[i, j, k] with pi^{ij} = sum_k c_pi[i, j, k] x_k."""
    n = pi.dim
    c_pi = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for exps, value in pi.polynomials[i][j].terms.items():
                if sum(exps) != 1:
                    raise PreconditionError(
                        "linear structure", f"pi^{i}{j} has a term of degree {sum(exps)}"
                    )
                c_pi[i, j, exps.index(1)] = value
    return c_pi


def _lie_for(pi: PoissonStructure, lie: Optional[LieAlgebraData]) -> LieAlgebraData:
    if lie is not None:
        return lie
    if pi.lie is not None:
        return pi.lie
    c = _linear_coefficients(pi) / LINEAR_SIGN
    return LieAlgebraData(pi.dim, c, name=pi.name)


def _closed_zero(pi: PoissonStructure) -> Polynomial:
    if not pi.is_zero:
        raise PreconditionError("zero structure", f"'{pi.name}' is not the zero bivector")
    return _base_polynomial(pi.dim)


def _closed_constant(pi: PoissonStructure) -> Polynomial:
    if pi.degree != 0:
        raise PreconditionError("constant structure", f"'{pi.name}' has degree {pi.degree}")
    n = pi.dim
    matrix = eval_bivector(pi, np.zeros(n)).value
    terms = {}
    for i in range(n):
        for j in range(n):
            if matrix[i, j] != 0.0:
                exps = [0] * (3 * n)
                exps[i] += 1
                exps[n + j] += 1
                terms[tuple(exps)] = 0.5 * matrix[i, j]
    return _base_polynomial(n) + Polynomial(3 * n, terms)


def _closed_linear(pi: PoissonStructure, lie: LieAlgebraData, order: int):
    """
    W(p1, p2) with S = <x, W>, read off the BCH series.

    With pi = -c x the spray product is BCH(p2, p1), so the BCH variables
    (X, Y) map to (p2, p1); the opposite sign keeps them in place.
    """
    c_pi = _linear_coefficients(pi)
    if lie.dim != pi.dim:
        raise PreconditionError("linear structure", "algebra and structure dimensions differ")
    if np.allclose(c_pi, -lie.c, atol=1e-14):
        swap = True
    elif np.allclose(c_pi, lie.c, atol=1e-14):
        swap = False
    else:
        raise PreconditionError(
            "linear structure", f"'{pi.name}' is not +-c.x for algebra '{lie.name}'"
        )
    series = bch_series(lie, order)
    n = pi.dim
    exps = series.basis.exponents
    if swap:
        exps = np.concatenate([exps[:, n:], exps[:, :n]], axis=1)
    return exps, np.array(series.coefficients)


def _monomial_matrix(exps: np.ndarray, points: np.ndarray) -> np.ndarray:
    """(R, U) values of U monomials at R points."""
    return np.prod(points[:, None, :] ** exps[None, :, :], axis=2)


def _monomial_derivative_matrix(exps: np.ndarray, points: np.ndarray, var: int) -> np.ndarray:
    lowered = exps.copy()
    lowered[:, var] = np.maximum(lowered[:, var] - 1, 0)
    return exps[None, :, var] * _monomial_matrix(lowered, points)


def _stacked_evaluator(polys: Sequence[Polynomial]) -> RayPolynomialEvaluator:
    """One ray evaluator for several polynomials over the same variables."""
    num_vars = polys[0].num_vars
    keys = sorted(set().union(*(p.terms for p in polys))) or [(0,) * num_vars]
    index = {key: i for i, key in enumerate(keys)}
    coeffs = np.zeros((len(keys), len(polys)))
    for column, poly in enumerate(polys):
        for key, value in poly.terms.items():
            coeffs[index[key], column] = value
    return RayPolynomialEvaluator(np.array(keys, dtype=int), coeffs)


def _series_evaluator(components: Sequence[TruncatedSeries]) -> RayPolynomialEvaluator:
    basis = components[0].basis
    coeffs = np.stack([c.values for c in components], axis=1)
    return RayPolynomialEvaluator(basis.exponents, coeffs)


def gradient_evaluator(S: Polynomial) -> RayPolynomialEvaluator:
    """Ray evaluator of all 3n first derivatives of S."""
    return _stacked_evaluator([S.derivative(v) for v in range(S.num_vars)])


def triple_rays(grad_eval: RayPolynomialEvaluator, n: int, e1, e2, e3, xc):
    """
    Ray series of (x_bar, p_bar, x_tilde, p_tilde) for a triple of covector rays.

    Fixed-point sweeps gain one eps-order each, so L sweeps fix every
    coefficient of rays of length L.

    Returns:
        Four (n, R, L) ray series
    """
    def grad(a, b, c):
        return grad_eval(stack_ray_args([a, b, c]))

    x_bar, p_bar = xc, e1 + e2
    x_tilde, p_tilde = xc, e2 + e3
    for _ in range(xc.shape[-1]):
        x_bar, p_bar = grad(p_bar, e3, xc)[:n], grad(e1, e2, x_bar)[2 * n:]
        x_tilde, p_tilde = grad(e1, p_tilde, xc)[n:2 * n], grad(e2, e3, x_tilde)[2 * n:]
    return x_bar, p_bar, x_tilde, p_tilde


class SeriesSolver:
    """
    Solve for S = x . (p1 + p2) + sum_k S_k one p-degree at a time.

    At degree k the unknowns are the coefficients of S_k on mixed monomials
    p1^a p2^b (both parts non-empty) times x-monomials of bounded degree.
    They are fixed by the degree-k part of the SGA residual along random
    rays together with the s, t, Q and Q~ slices computed from the spray.
    """

    def __init__(self, pi: PoissonStructure, order: int, seed: int = SERIES_SEED):
        if order < 1:
            raise ValueError(f"series order must be at least 1, got {order}")
        self.pi = pi
        self.n = pi.dim
        self.order = order
        self.rng = np.random.default_rng(seed)
        self._slices = None

    def unknown_exponents(self, k: int) -> np.ndarray:
        """Mixed monomials of p-degree k; x-degree bounded by (k-1)(d-1)+1."""
        n = self.n
        x_degree = max(0, (k - 1) * (self.pi.degree - 1) + 1)
        x_monomials = monomial_basis(n, x_degree).exponents
        p_basis = monomial_basis(2 * n, k)
        p_monomials = p_basis.exponents[p_basis.degree_slice(k)]
        mixed = p_monomials[(p_monomials[:, :n].sum(axis=1) > 0) & (p_monomials[:, n:].sum(axis=1) > 0)]
        rows = [np.concatenate([pm, xm]) for pm in mixed for xm in x_monomials]
        return np.array(rows, dtype=int).reshape(-1, 3 * n)

    def solve(self) -> Polynomial:
        S = _base_polynomial(self.n)
        for k in range(2, self.order + 1):
            S = S + self._solve_degree(S, k)
        return S

    def _solve_degree(self, S_lower: Polynomial, k: int) -> Polynomial:
        exps = self.unknown_exponents(k)
        if exps.shape[0] == 0:
            return Polynomial(3 * self.n, {})

        blocks = [self._sga_rows(exps, S_lower, k), self._slice_rows(exps, k)]
        A = np.vstack([b[0] for b in blocks])
        b = np.concatenate([b[1] for b in blocks])

        solution, _, rank, _ = np.linalg.lstsq(A, b, rcond=RANK_TOL)
        if rank < exps.shape[0]:
            logger.warning(
                f"series degree {k}: rank {rank} < {exps.shape[0]} unknowns, "
                f"taking the minimal-norm solution"
            )
        residual = float(np.linalg.norm(A @ solution - b))
        scale = max(1.0, float(np.linalg.norm(b)))
        logger.debug(
            f"series degree {k}: {exps.shape[0]} unknowns, {A.shape[0]} equations, "
            f"residual {residual:.2e}"
        )
        if residual > CONSISTENCY_TOL * scale:
            raise SeriesConsistencyError(k, residual / scale)

        terms = {
            tuple(int(e) for e in row): float(value)
            for row, value in zip(exps, solution) if abs(value) > PRUNE_TOL
        }
        return Polynomial(3 * self.n, terms)

    def _sga_rows(self, exps: np.ndarray, S_lower: Polynomial, k: int):
        n = self.n
        count = max(2 * exps.shape[0], MIN_SGA_ROWS)
        q1, q2, q3 = self.rng.normal(size=(3, count, n))
        x = self.rng.uniform(-1.0, 1.0, size=(count, n))

        def at(a, b):
            return _monomial_matrix(exps, np.hstack([a, b, x]))

        rows = at(q1, q2) + at(q1 + q2, q3) - at(q2, q3) - at(q1, q2 + q3)
        value_eval = _stacked_evaluator([S_lower])
        grad_eval = gradient_evaluator(S_lower)
        rhs = np.concatenate([
            -self._ray_sga_residual(
                value_eval, grad_eval,
                q1[c:c + RAY_CHUNK], q2[c:c + RAY_CHUNK], q3[c:c + RAY_CHUNK], x[c:c + RAY_CHUNK], k
            )
            for c in range(0, count, RAY_CHUNK)
        ])
        return rows, rhs

    def _ray_sga_residual(self, value_eval, grad_eval, q1, q2, q3, x, k: int) -> np.ndarray:
        """Coefficient of eps^k in the SGA residual of S_lower at (eps q1, eps q2, eps q3, x)."""
        length = k + 1
        e1, e2, e3 = (ray_linear(q.T, length) for q in (q1, q2, q3))
        xc = ray_constant(x.T, length)
        x_bar, p_bar, x_tilde, p_tilde = triple_rays(grad_eval, self.n, e1, e2, e3, xc)

        def value(a, b, c):
            return value_eval(stack_ray_args([a, b, c]))[0]

        lhs = value(e1, e2, x_bar) + value(p_bar, e3, xc) - ray_mul(x_bar, p_bar).sum(axis=0)
        rhs = value(e2, e3, x_tilde) + value(e1, p_tilde, xc) - ray_mul(x_tilde, p_tilde).sum(axis=0)
        return (lhs - rhs)[:, k]

    def _slice_data(self):
        """Ray series of Q(x, eps q) and s(x, eps q) at the slice samples."""
        if self._slices is not None:
            return self._slices
        n = self.n
        length = self.order
        xs = self.rng.uniform(-1.0, 1.0, size=(SLICE_POINTS, n))
        qs = self.rng.normal(size=(SLICE_POINTS, SLICE_DIRECTIONS, n))
        q_rays, s_rays = [], []
        for x, directions in zip(xs, qs):
            evaluator = _series_evaluator(spray_average_Q_local(self.pi, x, self.order - 1))
            e = ray_linear(directions.T, length)
            xc = ray_constant(np.repeat(x[:, None], SLICE_DIRECTIONS, axis=1), length)
            q_rays.append(evaluator(stack_ray_args([np.zeros_like(e), e])))
            sigma = np.zeros_like(e)
            for _ in range(length):
                sigma = sigma - (evaluator(stack_ray_args([sigma, e])) - xc)
            s_rays.append(xc + sigma)
        points = np.repeat(xs, SLICE_DIRECTIONS, axis=0)
        directions = qs.reshape(-1, n)
        self._slices = (
            points, directions,
            np.concatenate(q_rays, axis=1), np.concatenate(s_rays, axis=1)
        )
        return self._slices

    def _slice_rows(self, exps: np.ndarray, k: int):
        n = self.n
        x, q, q_rays, s_rays = self._slice_data()
        zero = np.zeros_like(q)
        sign = (-1.0) ** (k - 1)
        # (point, differentiated block, target ray, sign)
        slices = [
            (np.hstack([-q, q, x]), 1, q_rays, 1.0),
            (np.hstack([q, -q, x]), 0, q_rays, sign),
            (np.hstack([q, zero, x]), 1, s_rays, 1.0),
            (np.hstack([zero, q, x]), 0, s_rays, sign),
        ]
        rows, rhs = [], []
        for points, block, rays, factor in slices:
            for i in range(n):
                rows.append(_monomial_derivative_matrix(exps, points, block * n + i))
                rhs.append(factor * rays[i, :, k - 1])
        return np.vstack(rows), np.concatenate(rhs)


@lru_cache(maxsize=16)
def _series_polynomial(pi: PoissonStructure, order: int) -> Polynomial:
    logger.info(f"solving series generating function for '{pi.name}' to order {order}")
    return SeriesSolver(pi, order).solve()


def build_generating_function(
    pi: PoissonStructure,
    backend: str,
    order: Optional[int] = None,
    lie: Optional[LieAlgebraData] = None,
    perturbation: Optional[Polynomial] = None
) -> GeneratingFunction:
    """
    Build S for a structure with one of the supported backends.

    Args:
        pi: Poisson structure
        backend: closed_zero, closed_constant, closed_linear or series
        order: Truncation order; backend default when None
        lie: Algebra for closed_linear; read from pi when None
        perturbation: Polynomial in (p1, p2, x) added to S

    Returns:
        The GeneratingFunction

    Raises:
        PreconditionError: If the backend does not match the structure
        SeriesConsistencyError: If the series solve is inconsistent at some order
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend '{backend}', expected one of {BACKENDS}")
    order = default_order(pi, backend) if order is None else order
    n = pi.dim
    vector_exps = vector_coeffs = None
    algebra = None

    if backend == "closed_zero":
        scalar = _closed_zero(pi)
    elif backend == "closed_constant":
        scalar = _closed_constant(pi)
    elif backend == "closed_linear":
        algebra = _lie_for(pi, lie)
        vector_exps, vector_coeffs = _closed_linear(pi, algebra, order)
        scalar = Polynomial(3 * n, {})
    else:
        scalar = _series_polynomial(pi, order)

    if perturbation is not None:
        if perturbation.num_vars != 3 * n:
            raise PreconditionError(
                "perturbation arity", f"expected {3 * n} variables, got {perturbation.num_vars}"
            )
        scalar = scalar + perturbation

    logger.debug(f"generating function '{backend}' for '{pi.name}' at order {order}")
    return GeneratingFunction(
        backend=backend,
        dim=n,
        order=order,
        scalar_part=scalar,
        vector_exps=vector_exps,
        vector_coeffs=vector_coeffs,
        lie=algebra,
    )


def backend_for(pi: PoissonStructure) -> str:
    """Closed form when one exists, the series solve otherwise."""
    if pi.is_zero:
        return "closed_zero"
    if pi.degree == 0:
        return "closed_constant"
    if pi.lie is not None:
        return "closed_linear"
    return "series"


def taylor_S_family(pi: PoissonStructure, max_order: int) -> Dict[int, Polynomial]:
    """
    Blocks of the series S grouped by p-degree k.

    Returns:
        Mapping k -> homogeneous part of degree k in (p1, p2), k = 1..max_order
    """
    S = _series_polynomial(pi, max_order)
    weights = _weights(pi.dim)
    return {k: S.homogeneous(weights, k) for k in range(1, max_order + 1)}


def coefficient_table(family: Dict[int, Polynomial], dim: int) -> List[dict]:
    """Flatten a Taylor family into records sorted by degree and monomial."""
    records = []
    for k, block in sorted(family.items()):
        for exps, value in sorted(block.terms.items()):
            records.append({
                "degree": k,
                "p1": [int(e) for e in exps[:dim]],
                "p2": [int(e) for e in exps[dim:2 * dim]],
                "x": [int(e) for e in exps[2 * dim:]],
                "coefficient": float(value),
            })
    return records


def slice_residuals(
    S: GeneratingFunction,
    pi: PoissonStructure,
    x: np.ndarray,
    p: np.ndarray,
    order: int
) -> Dict[str, float]:
    """
    Compare the slices of S with the spray maps at (x, p).

    Returns:
        Deviations for s, t, Q, Q~ and the unit boundary x . p
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    zero = np.zeros_like(p)
    q_series = spray_average_Q(pi, x, order)
    q_plus = np.array([c.evaluate(p).value for c in q_series])
    q_minus = np.array([c.evaluate(-p).value for c in q_series])
    return {
        "s": float(np.max(np.abs(S.grad_p2(p, zero, x) - source_map(pi, x, p, order).value))),
        "t": float(np.max(np.abs(S.grad_p1(zero, p, x) - target_map(pi, x, p, order).value))),
        "Q": float(np.max(np.abs(S.grad_p2(-p, p, x) - q_plus))),
        "Q_tilde": float(np.max(np.abs(S.grad_p1(p, -p, x) - q_minus))),
        "unit": float(max(
            abs(S.value(p, zero, x) - x @ p),
            abs(S.value(zero, p, x) - x @ p),
            np.max(np.abs(S.grad_p1(zero, zero, x) - x)),
            np.max(np.abs(S.grad_p2(zero, zero, x) - x)),
        )),
    }
