"""Baker-Campbell-Hausdorff series from Dynkin's formula.

The series is expanded once per (algebra, order) into a polynomial in the
components of X and Y. Right-nested brackets of every word are built from
the word's suffixes, so each bracket costs one letter application.
"""
import logging
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm, logm

from jets.monomials import MonomialBasis, monomial_basis
from liecase.matrix_functions import phi1
from liecase.models import BCHSeries
from poisson.models import LieAlgebraData

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 10
MAX_ORDER = 10
X_LETTER, Y_LETTER = 0, 1

Word = Tuple[int, ...]


@lru_cache(maxsize=None)
def dynkin_coefficient(word: Word) -> Fraction:
    """
    Coefficient of the right-nested bracket of a word in Dynkin's formula.

    Args:
        word: Letters X_LETTER / Y_LETTER

    Returns:
        Exact rational coefficient
    """
    length = len(word)
    blocks: Dict[Tuple[int, int], Fraction] = {}
    for start in range(length):
        xs = ys = 0
        for end in range(start, length):
            if word[end] == X_LETTER:
                if ys:
                    break
                xs += 1
            else:
                ys += 1
            blocks[(start, end + 1)] = Fraction(1, factorial(xs) * factorial(ys))

    # ways[j][k]: weighted count of splittings of word[:j] into k blocks
    ways = [defaultdict(Fraction) for _ in range(length + 1)]
    ways[0][0] = Fraction(1)
    for end in range(1, length + 1):
        for start in range(end):
            weight = blocks.get((start, end))
            if weight is None:
                continue
            for k, value in ways[start].items():
                ways[end][k + 1] += value * weight

    total = sum(
        (Fraction((-1) ** (k - 1), k) * value for k, value in ways[length].items()),
        Fraction(0)
    )
    return total / length


def _apply_letter(
    lie: LieAlgebraData,
    basis: MonomialBasis,
    letter: int,
    value: np.ndarray,
    degree: int
) -> np.ndarray:
    """[letter, value] for a vector polynomial homogeneous of the given degree."""
    n = lie.dim
    source = basis.degree_slice(degree)
    target_start = basis.slices[degree + 1][0]
    result = np.zeros((basis.slices[degree + 1][1] - target_start, n))
    for i in range(n):
        contracted = value @ lie.c[i]
        if not np.any(contracted):
            continue
        var = i + letter * n
        targets = basis.shift_index[var, source] - target_start
        result[targets] += contracted
    return result


@lru_cache(maxsize=32)
def _cached_series(dim: int, constants: bytes, order: int) -> Tuple[np.ndarray, int]:
    c = np.frombuffer(constants, dtype=float).reshape(dim, dim, dim)
    lie = LieAlgebraData(dim, c)
    basis = monomial_basis(2 * dim, order)
    coefficients = np.zeros((len(basis), dim))

    letters = []
    for letter in (X_LETTER, Y_LETTER):
        value = np.zeros((2 * dim, dim))
        for k in range(dim):
            exps = [0] * (2 * dim)
            exps[k + letter * dim] = 1
            value[basis.index[tuple(exps)] - basis.slices[1][0], k] = 1.0
        letters.append(value)

    words = 0
    stack = [((letter,), letters[letter]) for letter in (X_LETTER, Y_LETTER)]
    while stack:
        word, value = stack.pop()
        coefficient = dynkin_coefficient(word)
        degree = len(word)
        if coefficient != 0:
            coefficients[basis.degree_slice(degree)] += float(coefficient) * value
            words += 1
        if degree == order:
            continue
        for letter in (X_LETTER, Y_LETTER):
            if degree == 1 and word[0] == letter:
                continue
            extended = _apply_letter(lie, basis, letter, value, degree)
            if np.any(extended):
                stack.append(((letter,) + word, extended))

    logger.debug(f"BCH series: dim {dim}, order {order}, {words} words")
    coefficients.setflags(write=False)
    return coefficients, words


def bch_series(lie: LieAlgebraData, order: int = DEFAULT_ORDER) -> BCHSeries:
    """
    The BCH polynomial of an algebra truncated at total degree order.

    Raises:
        ValueError: If order is outside 1..MAX_ORDER
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"BCH order must be within 1..{MAX_ORDER}, got {order}")
    dim, constants = lie.cache_key
    coefficients, _ = _cached_series(dim, constants, order)
    return BCHSeries(lie, order, monomial_basis(2 * dim, order), coefficients)


def bch(
    lie: LieAlgebraData,
    p1: np.ndarray,
    p2: np.ndarray,
    order: int = DEFAULT_ORDER
) -> np.ndarray:
    """
    Truncated log(exp(p1) exp(p2)) computed with the structure constants.

    Args:
        lie: Lie algebra
        p1: First element
        p2: Second element
        order: Truncation in total degree

    Returns:
        The BCH product as a vector of lie.dim components
    """
    return bch_series(lie, order)(p1, p2)


def representation_matrix(lie: LieAlgebraData, p: np.ndarray) -> np.ndarray:
    if lie.rep is None:
        raise ValueError(f"Lie algebra '{lie.name}' ships no representation")
    return np.tensordot(np.asarray(p, dtype=float), np.array(lie.rep), axes=1)


def from_representation(lie: LieAlgebraData, matrix: np.ndarray) -> np.ndarray:
    """Coordinates of a matrix in the span of the representation."""
    stacked = np.array([m.ravel() for m in lie.rep]).T
    return np.linalg.lstsq(stacked, np.real(matrix).ravel(), rcond=None)[0]


def bch_matrix_log(lie: LieAlgebraData, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """log(exp(p1) exp(p2)) through a faithful matrix representation."""
    product = expm(representation_matrix(lie, p1)) @ expm(representation_matrix(lie, p2))
    logarithm = logm(product)
    error = np.linalg.norm(expm(logarithm) - product, 1) / np.linalg.norm(product, 1)
    if error > 1e-8:
        logger.warning(f"matrix logarithm error estimate {error:.2e}")
    return from_representation(lie, logarithm)


def local_product(
    lie: LieAlgebraData,
    a1: np.ndarray,
    a2: np.ndarray,
    order: Optional[int] = None
) -> np.ndarray:
    """
    Product of the local group in exponential coordinates.

    Uses the representation when one is shipped and order is None,
    otherwise the BCH series of the given order.
    """
    if order is None and lie.rep is not None:
        return bch_matrix_log(lie, a1, a2)
    return bch(lie, a1, a2, DEFAULT_ORDER if order is None else order)


def local_product_differential(
    lie: LieAlgebraData,
    a1: np.ndarray,
    a2: np.ndarray,
    order: Optional[int] = None
) -> np.ndarray:
    """
    dim x 2 dim differential of local_product in (a1, a2).

    The exact product c = a1 . a2 satisfies phi(ad_c) dc = phi(ad_a1) da1
    + e^{ad_a1} phi(ad_a2) da2 with phi(z) = (e^z - 1)/z; a truncated
    product is differentiated term by term.
    """
    if order is None and lie.rep is not None:
        a1 = np.asarray(a1, dtype=float)
        a2 = np.asarray(a2, dtype=float)
        product = local_product(lie, a1, a2)
        ad1 = lie.ad(a1)
        left = np.hstack([phi1(ad1), expm(ad1) @ phi1(lie.ad(a2))])
        return np.linalg.solve(phi1(lie.ad(product)), left)
    return bch_series(lie, DEFAULT_ORDER if order is None else order).jacobian(a1, a2)
