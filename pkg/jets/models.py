"""Second-order jets in the base point x."""
from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True, eq=False)
class XJetScalar:
    """Value, x-gradient and x-Hessian of a scalar quantity."""
    value: float
    grad_x: np.ndarray = field(repr=False)
    hess_x: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.grad_x.shape[0]

    @classmethod
    def constant(cls, value: float, dim: int) -> 'XJetScalar':
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def coordinate(cls, point: np.ndarray, index: int) -> 'XJetScalar':
        """The jet of x -> x[index] at point."""
        grad = np.zeros(len(point))
        grad[index] = 1.0
        return cls(float(point[index]), grad, np.zeros((len(point),) * 2))

    def __add__(self, other: Union['XJetScalar', float]) -> 'XJetScalar':
        if isinstance(other, XJetScalar):
            return XJetScalar(
                self.value + other.value,
                self.grad_x + other.grad_x,
                self.hess_x + other.hess_x
            )
        return XJetScalar(self.value + other, self.grad_x, self.hess_x)

    __radd__ = __add__

    def __neg__(self) -> 'XJetScalar':
        return XJetScalar(-self.value, -self.grad_x, -self.hess_x)

    def __sub__(self, other: Union['XJetScalar', float]) -> 'XJetScalar':
        return self + (-other)

    def __mul__(self, other: Union['XJetScalar', float]) -> 'XJetScalar':
        if isinstance(other, XJetScalar):
            outer = np.outer(self.grad_x, other.grad_x)
            return XJetScalar(
                self.value * other.value,
                self.grad_x * other.value + self.value * other.grad_x,
                self.hess_x * other.value + outer + outer.T
                + self.value * other.hess_x
            )
        return XJetScalar(
            self.value * other, self.grad_x * other, self.hess_x * other
        )

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class XJetVector:
    """Value (n,), x-gradient (n, d) and x-Hessian (n, d, d) of a vector."""
    value: np.ndarray
    grad_x: np.ndarray = field(repr=False)
    hess_x: np.ndarray = field(repr=False)

    def __getitem__(self, index: int) -> XJetScalar:
        return XJetScalar(
            float(self.value[index]), self.grad_x[index], self.hess_x[index]
        )

    def __len__(self) -> int:
        return self.value.shape[0]
