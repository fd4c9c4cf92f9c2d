"""Data models for cochains, enhancement factors and check reports."""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from jets.polynomials import Polynomial


@dataclass(frozen=True, eq=False)
class Cochain1:
    """
    A function kappa(x, p) on arrows.

    Multiplicative cochains are nonvanishing; additive ones (h') are their
    logarithms. polynomial, when present, is over the variables (p, x).
    """
    evaluator: Callable[[np.ndarray, np.ndarray], complex] = field(repr=False)
    additive: bool = False
    polynomial: Optional[Polynomial] = field(default=None, repr=False)
    name: str = "kappa"

    def __call__(self, x: np.ndarray, p: np.ndarray) -> complex:
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(p, dtype=float))

    @classmethod
    def from_polynomial(cls, poly: Polynomial, dim: int, name: str = "h1") -> 'Cochain1':
        """Additive cochain evaluating a polynomial in (p, x)."""
        def evaluate(x, p):
            return poly.evaluate(np.concatenate([p, x]))
        if poly.num_vars != 2 * dim:
            raise ValueError(f"expected a polynomial in {2 * dim} variables")
        return cls(evaluate, additive=True, polynomial=poly, name=name)


@dataclass(frozen=True, eq=False)
class Cochain2:
    """
    A function f(p1, p2, x) on composable pairs in the J-chart.

    polynomial, when present, is over the variables (p1, p2, x).
    """
    evaluator: Callable[[np.ndarray, np.ndarray, np.ndarray], complex] = field(repr=False)
    additive: bool = False
    polynomial: Optional[Polynomial] = field(default=None, repr=False)
    name: str = "f"

    def __call__(self, p1: np.ndarray, p2: np.ndarray, x: np.ndarray) -> complex:
        return self.evaluator(
            np.asarray(p1, dtype=float), np.asarray(p2, dtype=float), np.asarray(x, dtype=float)
        )

    @classmethod
    def constant(cls, value: complex, name: str = "constant") -> 'Cochain2':
        return cls(lambda p1, p2, x: value, name=name)

    @classmethod
    def from_polynomial(cls, poly: Polynomial, name: str = "h") -> 'Cochain2':
        """Additive cochain evaluating a polynomial in (p1, p2, x)."""
        def evaluate(p1, p2, x):
            return poly.evaluate(np.concatenate([p1, p2, x]))
        return cls(evaluate, additive=True, polynomial=poly, name=name)

    def log(self) -> 'Cochain2':
        """Additive version ln f of a positive multiplicative cochain."""
        if self.additive:
            return self
        return Cochain2(
            lambda p1, p2, x: float(np.log(abs(self(p1, p2, x)))),
            additive=True,
            name=f"ln {self.name}",
        )


@dataclass(frozen=True, eq=False)
class EnhancementFactor:
    """A multiplicative Cochain2 f read as the enhancement sigma = f sigma^c."""
    factor: Cochain2

    @property
    def name(self) -> str:
        return self.factor.name


@dataclass
class CochainReport:
    """Outcome of a sampled cochain check."""
    check: str
    passed: bool = True
    max_residual: float = 0.0
    violations: List[Dict] = field(default_factory=list)

    def record(self, sample: int, residual: float, tol: float, **details) -> None:
        self.max_residual = max(self.max_residual, residual)
        if not residual <= tol:
            self.passed = False
            self.violations.append({"sample": sample, "residual": residual, **details})


@dataclass(frozen=True, eq=False)
class VanEstResult:
    """Mixed Hessians at (0, 0, x) split into symmetric and skew parts."""
    symmetric_parts: List[np.ndarray] = field(repr=False)
    skew_parts: List[np.ndarray] = field(repr=False)
    max_skew: float
    passed: bool


@dataclass(frozen=True, eq=False)
class CoboundaryResult:
    """
    Primitive of a coboundary, or the certificate of why none exists.

    certificate holds the unsolvable residual component at the failing
    degree; the primitive is over (p, x).
    """
    success: bool
    primitive: Optional[Polynomial] = field(default=None, repr=False)
    residual: float = 0.0
    degree: Optional[int] = None
    certificate: Optional[Polynomial] = field(default=None, repr=False)
