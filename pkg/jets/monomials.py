"""Dense monomial bases and the index tables series arithmetic runs on."""
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse


class MonomialBasis:
    """All monomials of total degree <= order in num_vars variables.

    Monomials are sorted by degree, so each degree occupies a contiguous
    slice of indices.
    """

    def __init__(self, num_vars: int, order: int):
        self.num_vars = num_vars
        self.order = order

        exponents: List[Tuple[int, ...]] = []
        self.slices: List[Tuple[int, int]] = []
        for degree in range(order + 1):
            start = len(exponents)
            for combo in combinations_with_replacement(range(num_vars), degree):
                exps = [0] * num_vars
                for var in combo:
                    exps[var] += 1
                exponents.append(tuple(exps))
            self.slices.append((start, len(exponents)))

        self.exponent_tuples = exponents
        self.exponents = np.array(exponents, dtype=int).reshape(-1, num_vars)
        self.degrees = self.exponents.sum(axis=1)
        self.index: Dict[Tuple[int, ...], int] = {
            exps: i for i, exps in enumerate(exponents)
        }

        size = len(exponents)
        self.shift_index = np.full((num_vars, size), -1, dtype=int)
        self.derivative_index = np.full((num_vars, size), -1, dtype=int)
        self.parent = np.full(size, -1, dtype=int)
        self.parent_var = np.full(size, -1, dtype=int)
        for i, exps in enumerate(exponents):
            for var in range(num_vars):
                raised = exps[:var] + (exps[var] + 1,) + exps[var + 1:]
                self.shift_index[var, i] = self.index.get(raised, -1)
                if exps[var] > 0:
                    lowered = exps[:var] + (exps[var] - 1,) + exps[var + 1:]
                    self.derivative_index[var, i] = self.index[lowered]
                    if self.parent[i] < 0:
                        self.parent[i] = self.index[lowered]
                        self.parent_var[i] = var

    def __len__(self) -> int:
        return len(self.exponent_tuples)

    def degree_slice(self, degree: int) -> slice:
        start, end = self.slices[degree]
        return slice(start, end)

    def monomial_values(self, point: np.ndarray) -> np.ndarray:
        """Values of every monomial at a point."""
        point = np.asarray(point, dtype=float)
        return np.prod(point[None, :] ** self.exponents, axis=1)

    @cached_property
    def product_pairs(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index triples (ia, ib, ic) with m_ia * m_ib = m_ic, degree <= order."""
        radix = self.order + 1
        weights = radix ** np.arange(self.num_vars)
        keys = self.exponents @ weights
        order_of_keys = np.argsort(keys)
        sorted_keys = keys[order_of_keys]

        ia, ib, ic = [], [], []
        for a in range(len(self)):
            room = self.order - self.degrees[a]
            candidates = np.nonzero(self.degrees <= room)[0]
            summed = (self.exponents[candidates] + self.exponents[a]) @ weights
            position = np.searchsorted(sorted_keys, summed)
            ia.append(np.full(candidates.size, a))
            ib.append(candidates)
            ic.append(order_of_keys[position])
        return np.concatenate(ia), np.concatenate(ib), np.concatenate(ic)

    @cached_property
    def summation(self) -> sparse.csr_matrix:
        """Sparse matrix summing pair products into result coefficients."""
        _, _, ic = self.product_pairs
        return sparse.csr_matrix(
            (np.ones(ic.size), (ic, np.arange(ic.size))),
            shape=(len(self), ic.size)
        )


@lru_cache(maxsize=None)
def monomial_basis(num_vars: int, order: int) -> MonomialBasis:
    """Shared basis instance for a (num_vars, order) pair."""
    return MonomialBasis(num_vars, order)
