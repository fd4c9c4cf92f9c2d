"""Data models for Poisson structures and Lie algebras."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from jets.polynomials import Polynomial

Term = Tuple[Tuple[int, ...], float]


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Structure constants c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k."""
    dim: int
    c: np.ndarray = field(repr=False)
    rep: Optional[List[np.ndarray]] = field(default=None, repr=False)
    name: str = "custom"

    def ad(self, p: np.ndarray) -> np.ndarray:
        """Matrix of ad_p acting on column vectors."""
        return np.einsum('ijk,i->kj', self.c, p)

    def bracket(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.einsum('ijk,i,j->k', self.c, p, q)

    def antisymmetry_defect(self) -> float:
        return float(np.max(np.abs(self.c + self.c.transpose(1, 0, 2)), initial=0.0))

    def jacobi_defect(self) -> float:
        """Largest entry of the cyclic sum [[e_i, e_j], e_k] + cyclic."""
        first = np.einsum('ijm,mkl->ijkl', self.c, self.c)
        cyclic = first + first.transpose(1, 2, 0, 3) + first.transpose(2, 0, 1, 3)
        return float(np.max(np.abs(cyclic), initial=0.0))

    @property
    def cache_key(self) -> Tuple[int, bytes]:
        return self.dim, np.ascontiguousarray(self.c, dtype=float).tobytes()


@dataclass(frozen=True, eq=False)
class PoissonStructure:
    """Bivector pi^{ij}(x) given by polynomial coefficients for i < j."""
    dim: int
    coeffs: Dict[Tuple[int, int], List[Term]] = field(default_factory=dict)
    name: str = "custom"
    lie: Optional[LieAlgebraData] = field(default=None, repr=False)

    @cached_property
    def polynomials(self) -> List[List[Polynomial]]:
        """Skew matrix of coefficient polynomials."""
        n = self.dim
        table = [[Polynomial(n, {}) for _ in range(n)] for _ in range(n)]
        for (i, j), terms in self.coeffs.items():
            poly = Polynomial(n, {})
            for exps, value in terms:
                poly = poly + Polynomial(n, {tuple(int(e) for e in exps): float(value)})
            table[i][j] = poly
            table[j][i] = -poly
        return table

    @property
    def degree(self) -> int:
        """Largest polynomial degree among the coefficients."""
        return max(
            (sum(exps) for terms in self.coeffs.values() for exps, value in terms
             if value != 0.0),
            default=0
        )

    @property
    def is_zero(self) -> bool:
        return all(
            value == 0.0 for terms in self.coeffs.values() for _, value in terms
        )


@dataclass(frozen=True, eq=False)
class StructureConfig:
    """A loaded structure: Poisson data plus optional generating-function tweaks."""
    poisson: PoissonStructure
    lie: Optional[LieAlgebraData] = None
    perturbation: Optional[Polynomial] = None
    source: str = "builtin"

    @property
    def name(self) -> str:
        return self.poisson.name
