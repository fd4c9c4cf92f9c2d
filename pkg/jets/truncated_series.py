"""Truncated power series in covector variables with jet coefficients."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from jets.models import XJetScalar
from jets.monomials import MonomialBasis, monomial_basis
from numerics.errors import DegenerateBasisError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 8


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Series in num_vars variables truncated above total degree order.

    Coefficient i belongs to basis.exponents[i] and carries a value, a
    gradient and a Hessian in the jet variables x (dimension jet_dim).
    """
    basis: MonomialBasis = field(repr=False)
    values: np.ndarray = field(repr=False)
    grads: np.ndarray = field(repr=False)
    hess: np.ndarray = field(repr=False)

    @property
    def num_vars(self) -> int:
        return self.basis.num_vars

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def jet_dim(self) -> int:
        return self.grads.shape[1]

    @classmethod
    def zeros(cls, num_vars: int, order: int, jet_dim: int = 0) -> 'TruncatedSeries':
        basis = monomial_basis(num_vars, order)
        size = len(basis)
        return cls(
            basis,
            np.zeros(size),
            np.zeros((size, jet_dim)),
            np.zeros((size, jet_dim, jet_dim))
        )

    @classmethod
    def from_values(
        cls,
        num_vars: int,
        order: int,
        coefficients: dict,
        jet_dim: int = 0
    ) -> 'TruncatedSeries':
        """Series with plain float coefficients given by exponent tuples."""
        series = cls.zeros(num_vars, order, jet_dim)
        for exps, value in coefficients.items():
            if sum(exps) <= order:
                series.values[series.basis.index[tuple(exps)]] = value
        return series

    @classmethod
    def constant(cls, num_vars: int, order: int, jet: XJetScalar) -> 'TruncatedSeries':
        series = cls.zeros(num_vars, order, jet.dim)
        series.values[0] = jet.value
        series.grads[0] = jet.grad_x
        series.hess[0] = jet.hess_x
        return series

    @classmethod
    def variable(
        cls,
        num_vars: int,
        order: int,
        var: int,
        jet_dim: int = 0
    ) -> 'TruncatedSeries':
        series = cls.zeros(num_vars, order, jet_dim)
        exps = [0] * num_vars
        exps[var] = 1
        series.values[series.basis.index[tuple(exps)]] = 1.0
        return series

    def _like(self, values, grads, hess) -> 'TruncatedSeries':
        return TruncatedSeries(self.basis, values, grads, hess)

    def coefficient(self, exps: Sequence[int]) -> XJetScalar:
        i = self.basis.index[tuple(exps)]
        return XJetScalar(float(self.values[i]), self.grads[i], self.hess[i])

    def __add__(self, other: Union['TruncatedSeries', float]) -> 'TruncatedSeries':
        if isinstance(other, TruncatedSeries):
            return self._like(
                self.values + other.values,
                self.grads + other.grads,
                self.hess + other.hess
            )
        values = self.values.copy()
        values[0] += other
        return self._like(values, self.grads, self.hess)

    __radd__ = __add__

    def __neg__(self) -> 'TruncatedSeries':
        return self._like(-self.values, -self.grads, -self.hess)

    def __sub__(self, other: Union['TruncatedSeries', float]) -> 'TruncatedSeries':
        return self + (-other)

    def __rsub__(self, other: float) -> 'TruncatedSeries':
        return (-self) + other

    def __mul__(self, other: Union['TruncatedSeries', float]) -> 'TruncatedSeries':
        if not isinstance(other, TruncatedSeries):
            return self._like(
                self.values * other, self.grads * other, self.hess * other
            )
        if other.basis is not self.basis:
            raise ValueError("series live on different monomial bases")

        ia, ib, _ = self.basis.product_pairs
        summation = self.basis.summation
        av, bv = self.values[ia], other.values[ib]
        ag, bg = self.grads[ia], other.grads[ib]
        d = self.jet_dim

        values = summation @ (av * bv)
        size = len(values)
        if d == 0:
            return self._like(values, np.zeros((size, 0)), np.zeros((size, 0, 0)))

        grads = summation @ (ag * bv[:, None] + av[:, None] * bg)
        cross = np.einsum('ka,kb->kab', ag, bg)
        hess_terms = (
            self.hess[ia] * bv[:, None, None]
            + cross + cross.transpose(0, 2, 1)
            + av[:, None, None] * other.hess[ib]
        )
        hess = (summation @ hess_terms.reshape(len(ia), d * d)).reshape(size, d, d)
        return self._like(values, grads, hess)

    __rmul__ = __mul__

    def scale_by_jet(self, jet: XJetScalar) -> 'TruncatedSeries':
        """Multiply every coefficient by the same x-jet."""
        cross = np.einsum('a,kb->kab', jet.grad_x, self.grads)
        return self._like(
            jet.value * self.values,
            np.outer(self.values, jet.grad_x) + jet.value * self.grads,
            self.values[:, None, None] * jet.hess_x
            + cross + cross.transpose(0, 2, 1) + jet.value * self.hess
        )

    def derivative(self, var: int) -> 'TruncatedSeries':
        """Partial derivative in the covector variable var."""
        target = self.basis.derivative_index[var]
        factor = self.basis.exponents[:, var].astype(float)
        keep = target >= 0
        result = TruncatedSeries.zeros(self.num_vars, self.order, self.jet_dim)
        result.values[target[keep]] = factor[keep] * self.values[keep]
        result.grads[target[keep]] = factor[keep, None] * self.grads[keep]
        result.hess[target[keep]] = factor[keep, None, None] * self.hess[keep]
        return result

    def times_variable(self, var: int) -> 'TruncatedSeries':
        """Multiply by the covector variable var, dropping overflow."""
        target = self.basis.shift_index[var]
        keep = target >= 0
        result = TruncatedSeries.zeros(self.num_vars, self.order, self.jet_dim)
        result.values[target[keep]] = self.values[keep]
        result.grads[target[keep]] = self.grads[keep]
        result.hess[target[keep]] = self.hess[keep]
        return result

    def homogeneous_part(
        self,
        degree: int,
        variables: Optional[Sequence[int]] = None
    ) -> 'TruncatedSeries':
        """Terms of the given degree, counted in `variables` when given."""
        if variables is None:
            degrees = self.basis.degrees
        else:
            degrees = self.basis.exponents[:, list(variables)].sum(axis=1)
        mask = degrees == degree
        return self._like(
            np.where(mask, self.values, 0.0),
            self.grads * mask[:, None],
            self.hess * mask[:, None, None]
        )

    def evaluate(self, point: np.ndarray) -> XJetScalar:
        """Sum the series at a covector point, keeping the x-jet channels."""
        monomials = self.basis.monomial_values(point)
        return XJetScalar(
            float(self.values @ monomials),
            monomials @ self.grads,
            np.einsum('k,kab->ab', monomials, self.hess)
        )

    def max_abs_difference(self, other: 'TruncatedSeries') -> float:
        return float(max(
            np.max(np.abs(self.values - other.values), initial=0.0),
            np.max(np.abs(self.grads - other.grads), initial=0.0),
            np.max(np.abs(self.hess - other.hess), initial=0.0),
        ))

    def compose(self, inner: Sequence['TruncatedSeries']) -> 'TruncatedSeries':
        """
        Substitute series for the variables of this series.

        Args:
            inner: One series per variable, all on a common basis and
                without constant term

        Returns:
            The composite, truncated at the inner basis order

        Raises:
            PreconditionError: If an inner series has a constant term
        """
        if len(inner) != self.num_vars:
            raise ValueError("need one inner series per variable")
        for series in inner:
            if (
                abs(series.values[0]) > 0.0
                or np.any(series.grads[0] != 0.0)
                or np.any(series.hess[0] != 0.0)
            ):
                raise PreconditionError(
                    "inner constant term", "composition needs zero constant terms"
                )

        first = inner[0]
        one = TruncatedSeries.constant(
            first.num_vars, first.order, XJetScalar.constant(1.0, first.jet_dim)
        )
        powers: List[TruncatedSeries] = [one]
        result = one.scale_by_jet(self.coefficient(self.basis.exponent_tuples[0]))
        for i in range(1, len(self.basis)):
            power = powers[self.basis.parent[i]] * inner[self.basis.parent_var[i]]
            powers.append(power)
            if self.values[i] != 0.0 or np.any(self.grads[i]) or np.any(self.hess[i]):
                result = result + power.scale_by_jet(
                    XJetScalar(float(self.values[i]), self.grads[i], self.hess[i])
                )
        return result


def combine(matrix: np.ndarray, series: Sequence[TruncatedSeries]) -> List[TruncatedSeries]:
    """Apply a constant matrix to a vector of series."""
    result = []
    for row in np.atleast_2d(matrix):
        total = series[0] * float(row[0])
        for coefficient, item in zip(row[1:], series[1:]):
            if coefficient != 0.0:
                total = total + item * float(coefficient)
        result.append(total)
    return result


def series_invert_map(
    components: Sequence[TruncatedSeries]
) -> List[TruncatedSeries]:
    """
    Compositional inverse of a map F(p) = L p + higher order terms.

    The linear part is read from the value channel. Each fixed-point
    sweep G <- L^-1 (p - H(G)) fixes one more order.

    Raises:
        PreconditionError: If F has a constant term
        DegenerateBasisError: If the linear part is singular
    """
    n = len(components)
    first = components[0]
    if any(c.num_vars != n for c in components):
        raise ValueError("map must be square")
    if any(abs(c.values[0]) > 0.0 for c in components):
        raise PreconditionError("constant term", "map must fix the origin")

    linear_slice = first.basis.degree_slice(1)
    unit_indices = [
        first.basis.index[tuple(int(j == k) for k in range(n))] for j in range(n)
    ]
    linear = np.array([c.values[unit_indices] for c in components])
    if np.linalg.cond(linear) > 1e12:
        raise DegenerateBasisError("singular linear part")
    inverse = np.linalg.inv(linear)

    nonlinear = []
    for c in components:
        values = c.values.copy()
        values[linear_slice] = 0.0
        grads = c.grads.copy()
        grads[linear_slice] = 0.0
        hess = c.hess.copy()
        hess[linear_slice] = 0.0
        nonlinear.append(TruncatedSeries(c.basis, values, grads, hess))

    identity = [
        TruncatedSeries.variable(n, first.order, j, first.jet_dim) for j in range(n)
    ]
    guess = combine(inverse, identity)
    for sweep in range(first.order):
        corrected = [
            identity[i] - nonlinear[i].compose(guess) for i in range(n)
        ]
        guess = combine(inverse, corrected)
        logger.debug(f"series inversion sweep {sweep + 1}/{first.order}")
    return guess


def definite_time_integral(
    poly_in_u: Sequence[TruncatedSeries]
) -> TruncatedSeries:
    """
    Integrate sum_r A_r u^r over u in [0, 1] term by term.

    Args:
        poly_in_u: Coefficient series A_0, A_1, ... of the powers of u

    Returns:
        sum_r A_r / (r + 1)
    """
    total = poly_in_u[0]
    for power, coefficient in enumerate(poly_in_u[1:], start=1):
        total = total + coefficient * (1.0 / (power + 1))
    return total
