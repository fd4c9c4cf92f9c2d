"""Univariate series along rays p = eps * q, batched over many rays.

A ray series is an array whose last axis holds the coefficients of
eps^0 ... eps^(L-1).
"""
from typing import Dict, List, Tuple

import numpy as np


def ray_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product over the last axis, broadcasting the rest."""
    length = a.shape[-1]
    out = np.zeros(np.broadcast(a, b).shape)
    for i in range(length):
        out[..., i:] += a[..., i:i + 1] * b[..., :length - i]
    return out


def ray_constant(values: np.ndarray, length: int) -> np.ndarray:
    """Lift an array of constants to ray series."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(values.shape + (length,))
    out[..., 0] = values
    return out


def ray_linear(directions: np.ndarray, length: int) -> np.ndarray:
    """Ray series eps * directions."""
    directions = np.asarray(directions, dtype=float)
    out = np.zeros(directions.shape + (length,))
    if length > 1:
        out[..., 1] = directions
    return out


def ray_flip(series: np.ndarray) -> np.ndarray:
    """Substitute eps -> -eps."""
    signs = (-1.0) ** np.arange(series.shape[-1])
    return series * signs


class RayPolynomialEvaluator:
    """Evaluate fixed polynomials at ray-series arguments.

    Monomials are built degree by degree from a parent monomial times one
    variable, so every degree costs one batched Cauchy product.
    """

    def __init__(self, exps: np.ndarray, coeffs: np.ndarray):
        exps = np.asarray(exps, dtype=int)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        self.num_vars = exps.shape[1]

        closure: Dict[Tuple[int, ...], None] = {}
        for row in exps:
            current = tuple(int(e) for e in row)
            while current not in closure:
                closure[current] = None
                if sum(current) == 0:
                    break
                var = next(v for v, e in enumerate(current) if e > 0)
                current = current[:var] + (current[var] - 1,) + current[var + 1:]

        zero = (0,) * self.num_vars
        closure.setdefault(zero, None)
        monomials = sorted(closure, key=lambda e: (sum(e), e))
        self.index = {m: i for i, m in enumerate(monomials)}
        self.degrees = np.array([sum(m) for m in monomials])

        self.parent = np.zeros(len(monomials), dtype=int)
        self.parent_var = np.zeros(len(monomials), dtype=int)
        for i, m in enumerate(monomials):
            if sum(m) == 0:
                continue
            var = next(v for v, e in enumerate(m) if e > 0)
            lowered = m[:var] + (m[var] - 1,) + m[var + 1:]
            self.parent[i] = self.index[lowered]
            self.parent_var[i] = var

        self.coefficients = np.zeros((len(monomials), coeffs.shape[1]))
        for row, value in zip(exps, coeffs):
            self.coefficients[self.index[tuple(int(e) for e in row)]] += value

    def __call__(self, args: np.ndarray) -> np.ndarray:
        """
        Evaluate at ray arguments.

        Args:
            args: (num_vars, R, L) ray series, one per variable

        Returns:
            (q, R, L) ray series, one per coefficient column
        """
        _, rays, length = args.shape
        values = np.zeros((len(self.degrees), rays, length))
        values[0, :, 0] = 1.0
        for degree in range(1, int(self.degrees.max(initial=0)) + 1):
            layer = np.nonzero(self.degrees == degree)[0]
            values[layer] = ray_mul(
                values[self.parent[layer]], args[self.parent_var[layer]]
            )
        return np.einsum('mq,mrl->qrl', self.coefficients, values)


def ray_polynomials(
    exps: np.ndarray,
    coeffs: np.ndarray,
    args: np.ndarray
) -> np.ndarray:
    """One-shot form of RayPolynomialEvaluator."""
    return RayPolynomialEvaluator(exps, coeffs)(args)


def stack_ray_args(blocks: List[np.ndarray]) -> np.ndarray:
    """Concatenate per-block (n_i, R, L) arguments along the variable axis."""
    return np.concatenate(blocks, axis=0)
