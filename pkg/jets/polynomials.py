"""Sparse real polynomials and their exact second-order jets."""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


def polynomial_jet(
    exps: np.ndarray,
    coeffs: np.ndarray,
    point: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Exact value, gradient and Hessian of sum_t coeffs[t] * point^exps[t].

    Args:
        exps: (T, m) integer exponent matrix
        coeffs: (T,) or (T, q) coefficients; q > 1 evaluates q polynomials
        point: (m,) evaluation point

    Returns:
        value (q,), gradient (q, m) and Hessian (q, m, m); the leading
        axis is dropped when coeffs is one-dimensional
    """
    exps = np.asarray(exps, dtype=int)
    coeffs = np.asarray(coeffs, dtype=float)
    point = np.asarray(point, dtype=float)
    squeeze = coeffs.ndim == 1
    if squeeze:
        coeffs = coeffs[:, None]
    m = point.size
    q = coeffs.shape[1]

    if exps.shape[0] == 0:
        value, grad, hess = np.zeros(q), np.zeros((q, m)), np.zeros((q, m, m))
    else:
        factors = point[None, :] ** exps
        first = np.where(exps > 0, exps * point ** np.maximum(exps - 1, 0), 0.0)
        second = np.where(
            exps > 1,
            exps * (exps - 1) * point ** np.maximum(exps - 2, 0),
            0.0
        )

        value = coeffs.T @ np.prod(factors, axis=1)
        grad = np.zeros((q, m))
        hess = np.zeros((q, m, m))
        # prefix[:, k] = prod factors[:, :k], suffix[:, k] = prod factors[:, k:]
        ones = np.ones((exps.shape[0], 1))
        prefix = np.hstack([ones, np.cumprod(factors, axis=1)])
        suffix = np.hstack([np.cumprod(factors[:, ::-1], axis=1)[:, ::-1], ones])
        for v in range(m):
            others = prefix[:, v] * suffix[:, v + 1]
            grad[:, v] = coeffs.T @ (first[:, v] * others)
            hess[:, v, v] = coeffs.T @ (second[:, v] * others)
            between = np.ones(exps.shape[0])
            for w in range(v + 1, m):
                rest = prefix[:, v] * between * suffix[:, w + 1]
                hess[:, v, w] = coeffs.T @ (first[:, v] * first[:, w] * rest)
                hess[:, w, v] = hess[:, v, w]
                between = between * factors[:, w]

    if squeeze:
        return value[0], grad[0], hess[0]
    return value, grad, hess


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Sparse polynomial with float coefficients keyed by exponent tuples."""
    num_vars: int
    terms: Dict[Exponent, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, num_vars: int, value: float) -> 'Polynomial':
        if value == 0.0:
            return cls(num_vars, {})
        return cls(num_vars, {(0,) * num_vars: float(value)})

    @classmethod
    def variable(cls, num_vars: int, var: int) -> 'Polynomial':
        exps = [0] * num_vars
        exps[var] = 1
        return cls(num_vars, {tuple(exps): 1.0})

    @classmethod
    def from_arrays(cls, exps: np.ndarray, coeffs: np.ndarray) -> 'Polynomial':
        exps = np.asarray(exps, dtype=int)
        terms: Dict[Exponent, float] = defaultdict(float)
        for row, value in zip(exps, coeffs):
            terms[tuple(int(e) for e in row)] += float(value)
        return cls(exps.shape[1], _pruned(terms))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, self.num_vars), dtype=int), np.zeros(0)
        keys = sorted(self.terms)
        return np.array(keys, dtype=int), np.array([self.terms[k] for k in keys])

    def __add__(self, other: 'Polynomial') -> 'Polynomial':
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.num_vars, float(other))
        terms = defaultdict(float, self.terms)
        for exps, value in other.terms.items():
            terms[exps] += value
        return Polynomial(self.num_vars, _pruned(terms))

    __radd__ = __add__

    def __neg__(self) -> 'Polynomial':
        return Polynomial(self.num_vars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: 'Polynomial') -> 'Polynomial':
        return self + (-other)

    def __mul__(self, other) -> 'Polynomial':
        if not isinstance(other, Polynomial):
            return Polynomial(
                self.num_vars,
                _pruned({k: v * float(other) for k, v in self.terms.items()})
            )
        return self.mul_truncated(other)

    __rmul__ = __mul__

    def mul_truncated(
        self,
        other: 'Polynomial',
        weights: Optional[Sequence[int]] = None,
        max_degree: Optional[int] = None
    ) -> 'Polynomial':
        """Product keeping only terms of weighted degree <= max_degree."""
        terms = defaultdict(float)
        for ea, va in self.terms.items():
            for eb, vb in other.terms.items():
                exps = tuple(a + b for a, b in zip(ea, eb))
                if max_degree is not None and _weighted(exps, weights) > max_degree:
                    continue
                terms[exps] += va * vb
        return Polynomial(self.num_vars, _pruned(terms))

    def derivative(self, var: int) -> 'Polynomial':
        terms = defaultdict(float)
        for exps, value in self.terms.items():
            if exps[var] > 0:
                lowered = exps[:var] + (exps[var] - 1,) + exps[var + 1:]
                terms[lowered] += exps[var] * value
        return Polynomial(self.num_vars, _pruned(terms))

    def truncated(self, weights: Sequence[int], max_degree: int) -> 'Polynomial':
        return Polynomial(self.num_vars, {
            k: v for k, v in self.terms.items()
            if _weighted(k, weights) <= max_degree
        })

    def homogeneous(self, weights: Sequence[int], degree: int) -> 'Polynomial':
        return Polynomial(self.num_vars, {
            k: v for k, v in self.terms.items()
            if _weighted(k, weights) == degree
        })

    def substitute(
        self,
        values: Sequence['Polynomial'],
        weights: Optional[Sequence[int]] = None,
        max_degree: Optional[int] = None
    ) -> 'Polynomial':
        """Compose with one polynomial per variable, optionally truncating."""
        target_vars = values[0].num_vars
        result = Polynomial(target_vars, {})
        powers: Dict[Tuple[int, int], Polynomial] = {}

        def power(var: int, exponent: int) -> Polynomial:
            if exponent == 0:
                return Polynomial.constant(target_vars, 1.0)
            key = (var, exponent)
            if key not in powers:
                powers[key] = power(var, exponent - 1).mul_truncated(
                    values[var], weights, max_degree
                )
            return powers[key]

        for exps, coefficient in self.terms.items():
            term = Polynomial.constant(target_vars, coefficient)
            for var, exponent in enumerate(exps):
                if exponent:
                    term = term.mul_truncated(power(var, exponent), weights, max_degree)
            result = result + term
        return result

    def evaluate(self, point: np.ndarray) -> float:
        exps, coeffs = self.arrays()
        if coeffs.size == 0:
            return 0.0
        return float(coeffs @ np.prod(np.asarray(point, float)[None, :] ** exps, axis=1))

    def jet(self, point: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        exps, coeffs = self.arrays()
        return polynomial_jet(exps, coeffs, point)

    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)


def _weighted(exps: Exponent, weights: Optional[Sequence[int]]) -> int:
    if weights is None:
        return sum(exps)
    return sum(e * w for e, w in zip(exps, weights))


def _pruned(terms: Dict[Exponent, float]) -> Dict[Exponent, float]:
    return {k: v for k, v in terms.items() if v != 0.0}
