"""Data models for the spray groupoid."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from jets.models import XJetVector
from jets.polynomials import Polynomial, polynomial_jet
from poisson.models import LieAlgebraData

BACKENDS = ("closed_zero", "closed_constant", "closed_linear", "series")


@dataclass(frozen=True, eq=False)
class GroupoidPoint:
    """Arrow (x, p) of T*M; units are the points with p = 0."""
    x: np.ndarray
    p: np.ndarray

    @classmethod
    def unit(cls, x: np.ndarray) -> 'GroupoidPoint':
        x = np.asarray(x, dtype=float)
        return cls(x.copy(), np.zeros_like(x))

    @property
    def is_unit(self) -> bool:
        return not np.any(self.p)


@dataclass(frozen=True, eq=False)
class ComposablePairChart:
    """J-chart coordinates (p1, p2, x) of a composable pair."""
    p1: np.ndarray
    p2: np.ndarray
    x: np.ndarray


@dataclass(frozen=True, eq=False)
class TripleChart:
    """Solutions of the implicit systems attached to a composable triple."""
    x_bar: np.ndarray
    p_bar: np.ndarray
    x_tilde: np.ndarray
    p_tilde: np.ndarray


@dataclass(frozen=True, eq=False)
class SourceJet:
    """s(x, p) with its x-jet and its p-derivative d_p[i, j] = ds^i/dp_j."""
    point: XJetVector
    d_p: np.ndarray = field(repr=False)

    @property
    def value(self) -> np.ndarray:
        return self.point.value

    @property
    def d_x(self) -> np.ndarray:
        return self.point.grad_x


@dataclass(frozen=True, eq=False)
class SprayAverage:
    """Q(y, p) as n polynomials in the 2n variables (y, p), exact up to p-degree order."""
    dim: int
    order: int
    exps: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    def jet(self, y: np.ndarray, p: np.ndarray) -> Tuple[XJetVector, np.ndarray]:
        """Q(y, p) with its y-jet, and the p-Jacobian d_p[i, j] = dQ^i/dp_j."""
        n = self.dim
        point = np.concatenate([np.asarray(y, dtype=float), np.asarray(p, dtype=float)])
        value, grad, hess = polynomial_jet(self.exps, self.coeffs, point)
        return XJetVector(value, grad[:, :n], hess[:, :n, :n]), grad[:, n:]


@dataclass(frozen=True, eq=False)
class SJet:
    """Value, gradient and Hessian of S in the variables (p1, p2, x)."""
    dim: int
    value: float
    grad: np.ndarray = field(repr=False)
    hess: np.ndarray = field(repr=False)

    def _block(self, i: int) -> slice:
        return slice(i * self.dim, (i + 1) * self.dim)

    @property
    def grad_p1(self) -> np.ndarray:
        return self.grad[self._block(0)]

    @property
    def grad_p2(self) -> np.ndarray:
        return self.grad[self._block(1)]

    @property
    def grad_x(self) -> np.ndarray:
        return self.grad[self._block(2)]

    def hess_block(self, first: str, second: str) -> np.ndarray:
        """Block of the Hessian, e.g. hess_block('p1', 'x')[i, j] = d2S/dp1_i dx_j."""
        names = {"p1": 0, "p2": 1, "x": 2}
        return self.hess[self._block(names[first]), self._block(names[second])]


@dataclass(frozen=True, eq=False)
class GeneratingFunction:
    """
    S(p1, p2, x) = <x, W(p1, p2)> + P(p1, p2, x).

    W is a vector polynomial in (p1, p2) used by the linear backend; P is a
    scalar polynomial in (p1, p2, x) carrying every other contribution.
    """
    backend: str
    dim: int
    order: int
    scalar_part: Polynomial = field(repr=False)
    vector_exps: Optional[np.ndarray] = field(default=None, repr=False)
    vector_coeffs: Optional[np.ndarray] = field(default=None, repr=False)
    lie: Optional[LieAlgebraData] = field(default=None, repr=False)

    @cached_property
    def _scalar_arrays(self):
        return self.scalar_part.arrays()

    @cached_property
    def polynomial(self) -> Polynomial:
        """S expanded as one polynomial in the 3n variables (p1, p2, x)."""
        n = self.dim
        total = self.scalar_part
        if self.vector_exps is not None:
            terms = {}
            for exps, row in zip(self.vector_exps, self.vector_coeffs):
                for k in np.nonzero(row)[0]:
                    key = tuple(int(e) for e in exps) + tuple(int(j == k) for j in range(n))
                    terms[key] = terms.get(key, 0.0) + float(row[k])
            total = total + Polynomial(3 * n, terms)
        return total

    def jet(self, p1: np.ndarray, p2: np.ndarray, x: np.ndarray) -> SJet:
        n = self.dim
        point = np.concatenate([p1, p2, x]).astype(float)
        exps, coeffs = self._scalar_arrays
        value, grad, hess = polynomial_jet(exps, coeffs, point)
        grad = np.array(grad, dtype=float)
        hess = np.array(hess, dtype=float)

        if self.vector_exps is not None:
            w, w_grad, w_hess = polynomial_jet(self.vector_exps, self.vector_coeffs, point[:2 * n])
            xs = point[2 * n:]
            value = value + float(xs @ w)
            grad[:2 * n] += w_grad.T @ xs
            grad[2 * n:] += w
            hess[:2 * n, :2 * n] += np.einsum('k,kab->ab', xs, w_hess)
            hess[:2 * n, 2 * n:] += w_grad.T
            hess[2 * n:, :2 * n] += w_grad
        return SJet(n, float(value), grad, hess)

    def value(self, p1, p2, x) -> float:
        return self.jet(p1, p2, x).value

    def grad_p1(self, p1, p2, x) -> np.ndarray:
        return self.jet(p1, p2, x).grad_p1

    def grad_p2(self, p1, p2, x) -> np.ndarray:
        return self.jet(p1, p2, x).grad_p2

    def grad_x(self, p1, p2, x) -> np.ndarray:
        return self.jet(p1, p2, x).grad_x
