"""Built-in Poisson structures, bivector evaluation and the Jacobi check."""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from jets.models import XJetScalar
from jets.truncated_series import TruncatedSeries
from poisson.models import LieAlgebraData, PoissonStructure

logger = logging.getLogger(__name__)

LINEAR_SIGN = -1.0
LIE_NAMES = ("so3", "sl2", "h3", "aff1", "abelian2")


@dataclass(frozen=True, eq=False)
class BivectorJet:
    """pi^{ij}(x) with its x-gradient grad[i, j, a] and x-Hessian hess[i, j, a, b]."""
    value: np.ndarray
    grad: np.ndarray = field(repr=False)
    hess: np.ndarray = field(repr=False)

    def entry(self, i: int, j: int) -> XJetScalar:
        return XJetScalar(float(self.value[i, j]), self.grad[i, j], self.hess[i, j])


def eval_bivector(pi: PoissonStructure, x: np.ndarray) -> BivectorJet:
    """
    Evaluate the bivector and its exact derivatives at a point.

    Args:
        pi: Poisson structure
        x: Base point of length pi.dim

    Returns:
        BivectorJet with a skew value matrix
    """
    x = np.asarray(x, dtype=float)
    n = pi.dim
    value = np.zeros((n, n))
    grad = np.zeros((n, n, n))
    hess = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            poly = pi.polynomials[i][j]
            if not poly.terms:
                continue
            v, g, h = poly.jet(x)
            value[i, j], grad[i, j], hess[i, j] = v, g, h
            value[j, i], grad[j, i], hess[j, i] = -v, -g, -h
    return BivectorJet(value, grad, hess)


def jacobi_residual(pi: PoissonStructure, x: np.ndarray) -> float:
    """Largest component of the cyclic sum pi^{il} d_l pi^{jk} + cyclic."""
    jet = eval_bivector(pi, x)
    P, G = jet.value, jet.grad
    cyclic = (
        np.einsum('il,jkl->ijk', P, G)
        + np.einsum('jl,kil->ijk', P, G)
        + np.einsum('kl,ijl->ijk', P, G)
    )
    return float(np.max(np.abs(cyclic), initial=0.0))


def bivector_on_series(
    pi: PoissonStructure,
    phi: List[TruncatedSeries]
) -> List[List[TruncatedSeries]]:
    """
    Substitute a vector of series for x in every coefficient pi^{ij}.

    Args:
        pi: Poisson structure
        phi: One series per coordinate, all on the same basis

    Returns:
        Skew n x n table of series pi^{ij}(phi)
    """
    n = pi.dim
    first = phi[0]
    zero = TruncatedSeries.zeros(first.num_vars, first.order, first.jet_dim)
    one = TruncatedSeries.constant(
        first.num_vars, first.order, XJetScalar.constant(1.0, first.jet_dim)
    )
    powers: Dict[Tuple[int, int], TruncatedSeries] = {}

    def power(var: int, exponent: int) -> TruncatedSeries:
        if exponent == 0:
            return one
        if exponent == 1:
            return phi[var]
        key = (var, exponent)
        if key not in powers:
            powers[key] = power(var, exponent - 1) * phi[var]
        return powers[key]

    table = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            total: Optional[TruncatedSeries] = None
            for exps, coefficient in pi.polynomials[i][j].terms.items():
                term = one * coefficient
                for var, exponent in enumerate(exps):
                    if exponent:
                        term = term * power(var, exponent)
                total = term if total is None else total + term
            if total is not None:
                table[i][j] = total
                table[j][i] = -total
    return table


def zero_structure(dim: int) -> PoissonStructure:
    return PoissonStructure(dim, {}, name=f"zero{dim}")


def constant_structure() -> PoissonStructure:
    """Symplectic pi = d_x1 ^ d_x2 on R^2."""
    return PoissonStructure(2, {(0, 1): [((0, 0), 1.0)]}, name="constant")


def constant4_structure() -> PoissonStructure:
    """A non-degenerate constant bivector on R^4 with an off-block entry."""
    return PoissonStructure(4, {
        (0, 2): [((0, 0, 0, 0), 1.0)],
        (1, 3): [((0, 0, 0, 0), 1.0)],
        (0, 1): [((0, 0, 0, 0), 0.5)],
    }, name="constant4")


def quadratic_structure() -> PoissonStructure:
    """pi^{12} = x1 x2 on R^2."""
    return PoissonStructure(2, {(0, 1): [((1, 1), 1.0)]}, name="quadratic")


def _unit(n: int, i: int, j: int) -> np.ndarray:
    matrix = np.zeros((n, n))
    matrix[i, j] = 1.0
    return matrix


def _from_brackets(
    dim: int,
    brackets: Dict[Tuple[int, int], Dict[int, float]]
) -> np.ndarray:
    c = np.zeros((dim, dim, dim))
    for (i, j), result in brackets.items():
        for k, value in result.items():
            c[i, j, k] = value
            c[j, i, k] = -value
    return c


def builtin_lie(name: str) -> LieAlgebraData:
    """
    Shipped Lie algebras with a faithful matrix representation.

    Args:
        name: One of so3, sl2, h3, aff1, abelian2

    Returns:
        LieAlgebraData

    Raises:
        KeyError: If the name is unknown
    """
    if name == "so3":
        c = np.zeros((3, 3, 3))
        for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
            c[i, j, k] = 1.0
            c[j, i, k] = -1.0
        rep = [-c[i].copy() for i in range(3)]
        return LieAlgebraData(3, c, rep, name="so3")
    if name == "sl2":
        # H, E, F
        c = _from_brackets(3, {(0, 1): {1: 2.0}, (0, 2): {2: -2.0}, (1, 2): {0: 1.0}})
        rep = [np.diag([1.0, -1.0]), _unit(2, 0, 1), _unit(2, 1, 0)]
        return LieAlgebraData(3, c, rep, name="sl2")
    if name == "h3":
        c = _from_brackets(3, {(0, 1): {2: 1.0}})
        rep = [_unit(3, 0, 1), _unit(3, 1, 2), _unit(3, 0, 2)]
        return LieAlgebraData(3, c, rep, name="h3")
    if name == "aff1":
        c = _from_brackets(2, {(0, 1): {1: 1.0}})
        rep = [_unit(2, 0, 0), _unit(2, 0, 1)]
        return LieAlgebraData(2, c, rep, name="aff1")
    if name == "abelian2":
        return LieAlgebraData(
            2, np.zeros((2, 2, 2)), [_unit(2, 0, 0), _unit(2, 1, 1)], name="abelian2"
        )
    raise KeyError(f"unknown Lie algebra '{name}'")


def jacobi_violating_lie() -> LieAlgebraData:
    """
    Antisymmetric constants [e0, e1] = e2, [e0, e2] = e0 that fail Jacobi.

    The cyclic sum on (e0, e1, e2) is -e2. Note that the cyclic choice
    c[0,1,2] = c[1,2,0] = c[0,2,1] = 1 is so(2,1) and satisfies Jacobi.
    """
    c = _from_brackets(3, {(0, 1): {2: 1.0}, (0, 2): {0: 1.0}})
    return LieAlgebraData(3, c, None, name="jacobi-violating")


@lru_cache(maxsize=32)
def lie_to_poisson(lie: LieAlgebraData, sign: float = LINEAR_SIGN) -> PoissonStructure:
    """Linear structure pi^{ij}(x) = sign * sum_k c[i, j, k] x_k, one instance per algebra."""
    n = lie.dim
    coeffs = {}
    for i in range(n):
        for j in range(i + 1, n):
            terms = []
            for k in range(n):
                if lie.c[i, j, k] != 0.0:
                    exps = tuple(int(m == k) for m in range(n))
                    terms.append((exps, sign * float(lie.c[i, j, k])))
            if terms:
                coeffs[(i, j)] = terms
    return PoissonStructure(n, coeffs, name=lie.name, lie=lie)


def builtin_structure(name: str) -> PoissonStructure:
    """
    Resolve a --pi name.

    Args:
        name: zero[:n], constant, constant4, quadratic or a Lie algebra name

    Returns:
        PoissonStructure

    Raises:
        KeyError: If the name is unknown
    """
    if name == "zero" or name.startswith("zero:"):
        dim = int(name.split(":", 1)[1]) if ":" in name else 2
        return zero_structure(dim)
    if name == "constant":
        return constant_structure()
    if name == "constant4":
        return constant4_structure()
    if name == "quadratic":
        return quadratic_structure()
    if name in LIE_NAMES:
        return lie_to_poisson(builtin_lie(name))
    raise KeyError(f"unknown Poisson structure '{name}'")
