"""Data models for alpha-densities and linear canonical relations."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

import numpy as np


def standard_symplectic(n: int) -> np.ndarray:
    """Matrix of dx^i wedge dp_i on R^{2n} in (x, p) coordinates."""
    identity = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, identity], [-identity, zero]])


@dataclass(frozen=True, eq=False)
class AlphaDensity:
    """An alpha-density given by its value on one reference basis."""
    order: Fraction
    dim: int
    ref_value: complex
    ref_basis: np.ndarray = field(repr=False)

    @classmethod
    def on_identity(
        cls,
        order: Fraction,
        dim: int,
        value: complex
    ) -> 'AlphaDensity':
        """Density taking `value` on the coordinate basis of R^dim."""
        return cls(Fraction(order), dim, complex(value), np.eye(dim))


@dataclass(frozen=True, eq=False)
class LinearCanonicalRelation:
    """Lagrangian subspace L of V1-bar x V2 spanned by basis_L columns."""
    omega1: np.ndarray = field(repr=False)
    omega2: np.ndarray = field(repr=False)
    basis_L: np.ndarray = field(repr=False)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.omega1.shape[0], self.omega2.shape[0]

    @property
    def ambient_form(self) -> np.ndarray:
        """The form (-omega1) + omega2 on V1 x V2."""
        d1, d2 = self.dims
        form = np.zeros((d1 + d2, d1 + d2))
        form[:d1, :d1] = -self.omega1
        form[d1:, d1:] = self.omega2
        return form

    @classmethod
    def graph(
        cls,
        transform: np.ndarray,
        omega1: np.ndarray,
        omega2: np.ndarray = None
    ) -> 'LinearCanonicalRelation':
        """Graph {(v, Tv)} of a linear map T: V1 -> V2."""
        omega2 = omega1 if omega2 is None else omega2
        basis = np.vstack([np.eye(omega1.shape[0]), transform])
        return cls(omega1, omega2, basis)

    @classmethod
    def identity(cls, omega: np.ndarray) -> 'LinearCanonicalRelation':
        return cls.graph(np.eye(omega.shape[0]), omega)

    def is_lagrangian(self, tol: float = 1e-9) -> bool:
        """Check isotropy and half dimension."""
        d1, d2 = self.dims
        if self.basis_L.shape != (d1 + d2, (d1 + d2) // 2):
            return False
        if np.linalg.matrix_rank(self.basis_L) != self.basis_L.shape[1]:
            return False
        gram = self.basis_L.T @ self.ambient_form @ self.basis_L
        return float(np.max(np.abs(gram), initial=0.0)) <= tol * max(
            1.0, float(np.max(np.abs(self.basis_L)) ** 2)
        )

    def coordinates(self, vectors: np.ndarray) -> np.ndarray:
        """Coefficients of vectors lying in L with respect to basis_L."""
        return np.linalg.lstsq(self.basis_L, vectors, rcond=None)[0]


@dataclass(frozen=True, eq=False)
class ShortExactPresentation:
    """A presentation 0 -> V1 -> V -> V2 -> 0 by explicit matrices.

    basis_V1 holds the image of V1 in V, complement holds lifts of a basis
    of V2, and projection realizes V -> V2.
    """
    ambient_dim: int
    basis_V1: np.ndarray = field(repr=False)
    complement: np.ndarray = field(repr=False)
    projection: np.ndarray = field(repr=False)

    def is_exact(self, tol: float = 1e-10) -> bool:
        joined = np.hstack([self.basis_V1, self.complement])
        if joined.shape != (self.ambient_dim, self.ambient_dim):
            return False
        if np.linalg.matrix_rank(joined) != self.ambient_dim:
            return False
        return bool(np.allclose(self.projection @ self.basis_V1, 0.0, atol=tol))

    def with_complement(
        self,
        complement: np.ndarray
    ) -> 'ShortExactPresentation':
        return ShortExactPresentation(
            self.ambient_dim, self.basis_V1, complement, self.projection
        )


@dataclass(frozen=True, eq=False)
class GraphTangentData:
    """Tangent data of a map f: D -> T between symplectic spaces at a point.

    domain_basis spans T_x D in ambient source coordinates and
    differential_image holds Df applied to those columns.
    """
    domain_basis: np.ndarray = field(repr=False)
    differential_image: np.ndarray = field(repr=False)
    source_form: np.ndarray = field(repr=False)
    target_form: np.ndarray = field(repr=False)

    @property
    def domain_dim(self) -> int:
        return self.domain_basis.shape[1]
