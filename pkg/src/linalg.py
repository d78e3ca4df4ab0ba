"""
Exact Linear Algebra

Rank, kernel and quotient computations over the rationals, on top of sympy's
``DomainMatrix``. Ranks are computed fraction-free: each row is scaled to
integers and the integer matrix is reduced with ``rref_den``.
"""
import numpy as np
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from src.errors import RegimeError


def zeros(rows: int, cols: int) -> DomainMatrix:
    return DomainMatrix.zeros((rows, cols), QQ)


def exact_rank(mat) -> int:
    """Rank of a rational ``DomainMatrix`` by fraction-free elimination over ``ZZ``."""
    if not isinstance(mat, DomainMatrix):
        raise RegimeError("exact rank requires a rational DomainMatrix")
    rows, cols = mat.shape
    if rows == 0 or cols == 0 or mat.is_zero_matrix:
        return 0
    if mat.domain == ZZ:
        integer = mat
    else:
        _, integer = mat.convert_to(QQ).clear_denoms_rowwise(convert=True)
    _, _, pivots = integer.rref_den()
    return len(pivots)


def float_rank(mat: np.ndarray, tolerance: float) -> int:
    if mat.size == 0:
        return 0
    return int(np.linalg.matrix_rank(mat, tol=tolerance))


def kernel_basis(mat: DomainMatrix) -> list:
    """Basis of the right kernel as a list of coordinate lists (``QQ`` entries)."""
    rows, cols = mat.shape
    if cols == 0:
        return []
    if rows == 0 or mat.is_zero_matrix:
        return [[QQ(1) if i == j else QQ(0) for j in range(cols)] for i in range(cols)]
    null = mat.convert_to(QQ).nullspace()
    return [list(row) for row in null.to_list()]


def image_basis(mat: DomainMatrix) -> list:
    """Basis of the column space, as coordinate lists."""
    rows, cols = mat.shape
    if rows == 0 or cols == 0 or mat.is_zero_matrix:
        return []
    space = mat.convert_to(QQ).transpose().rowspace()
    return [list(row) for row in space.to_list()]


def span_rank(vectors: list, length: int) -> int:
    if not vectors:
        return 0
    return exact_rank(DomainMatrix([[QQ(x) for x in v] for v in vectors], (len(vectors), length), QQ))


def complement_basis(subspace: list, candidates: list, length: int) -> list:
    """Greedy pick of ``candidates`` that stay independent modulo ``subspace``.

    Returns representatives of a basis of ``span(candidates) / span(subspace)``
    when ``subspace`` lies inside ``span(candidates)``.
    """
    chosen = []
    current = list(subspace)
    rank = span_rank(current, length)
    for vec in candidates:
        trial = span_rank(current + [vec], length)
        if trial > rank:
            current.append(vec)
            chosen.append(vec)
            rank = trial
    return chosen


def apply(mat: DomainMatrix, vector: list) -> list:
    rows, cols = mat.shape
    column = DomainMatrix([[QQ(x)] for x in vector], (cols, 1), QQ)
    return [row[0] for row in mat.convert_to(QQ).matmul(column).to_list()]
