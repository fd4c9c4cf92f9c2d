"""Data models for the Lie algebra case."""
from dataclasses import dataclass, field

import numpy as np

from jets.monomials import MonomialBasis
from poisson.models import LieAlgebraData


@dataclass(frozen=True, eq=False)
class BCHSeries:
    """log(exp(X) exp(Y)) truncated at total degree order.

    coefficients[m, k] is the coefficient of monomial m of basis (over the
    variables X_1..X_n, Y_1..Y_n) in the k-th output component.
    """
    lie: LieAlgebraData = field(repr=False)
    order: int
    basis: MonomialBasis = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    def __call__(self, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        point = np.concatenate([np.asarray(p1, float), np.asarray(p2, float)])
        return self.basis.monomial_values(point) @ self.coefficients

    def jacobian(self, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        """dim x 2 dim matrix of partial derivatives in (p1, p2)."""
        point = np.concatenate([np.asarray(p1, float), np.asarray(p2, float)])
        values = self.basis.monomial_values(point)
        exponents, lowered = self.basis.exponents, self.basis.derivative_index
        columns = [
            np.where(lowered[v] >= 0, exponents[:, v] * values[lowered[v]], 0.0) @ self.coefficients
            for v in range(point.size)
        ]
        return np.stack(columns, axis=1)

    def homogeneous_block(self, degree: int) -> np.ndarray:
        """Coefficient rows of the given total degree."""
        return self.coefficients[self.basis.degree_slice(degree)]

    def term(self, exps_x: tuple, exps_y: tuple) -> np.ndarray:
        """Output vector multiplying the monomial X^exps_x Y^exps_y."""
        return self.coefficients[self.basis.index[tuple(exps_x) + tuple(exps_y)]]


@dataclass(frozen=True)
class DufloFactors:
    """Matrix-function determinants at one Lie algebra element."""
    F_G: float
    F_R: float
    F_K: float
    F_tilde: float

    def by_choice(self, choice: str) -> float:
        try:
            return {
                "gutt": self.F_G,
                "rieffel": self.F_R,
                "kontsevich": self.F_K,
                "tilde": self.F_tilde,
            }[choice]
        except KeyError:
            raise ValueError(f"unknown F choice '{choice}'")


@dataclass(frozen=True, eq=False)
class ActionGroupoidElement:
    """Arrow (a, x) of the coadjoint action groupoid, a in exponential coordinates."""
    a: np.ndarray
    x: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.x])

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> 'ActionGroupoidElement':
        n = len(vector) // 2
        return cls(np.array(vector[:n], dtype=float), np.array(vector[n:], dtype=float))

    @classmethod
    def unit(cls, x: np.ndarray) -> 'ActionGroupoidElement':
        x = np.asarray(x, dtype=float)
        return cls(np.zeros_like(x), x.copy())
