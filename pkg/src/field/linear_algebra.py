"""
Exact linear algebra over F_q on galois FieldArrays: inversion, solving
and polynomial evaluation.
"""

from typing import List, Sequence, Tuple, Union

import galois
import numpy as np

from field.prime_field import (
    DimensionError,
    FieldElement,
    FieldMatrix,
    FieldVector,
    ModulusMismatchError,
    PrimeField,
    SingularMatrixError,
)


def row_reduce(matrix: galois.FieldArray, size: int) -> Tuple[galois.FieldArray, List[int]]:
    """
    Gauss-Jordan on the first `size` columns.

    Pivots on the first nonzero entry at or below the current row, so the
    pivot columns are deterministic for a given input.

    Returns:
        (reduced copy, pivot columns in order)
    """
    work = matrix.copy()
    rows = work.shape[0]
    pivots: List[int] = []
    r = 0
    for col in range(size):
        if r == rows:
            break
        candidates = np.nonzero(work[r:, col])[0]
        if candidates.size == 0:
            continue
        pivot = r + int(candidates[0])
        if pivot != r:
            work[[r, pivot]] = work[[pivot, r]]
        work[r] = work[r] / work[r, col]
        factors = work[:, col].copy()
        factors[r] = 0
        work = work - factors[:, np.newaxis] * work[r][np.newaxis, :]
        pivots.append(col)
        r += 1
    return work, pivots


def _check_square(A: FieldMatrix):
    if A.rows != A.cols:
        raise DimensionError(f"Expected a square matrix, got {A.shape}")


def _check_invertible(A: FieldMatrix):
    _, pivots = row_reduce(A.array, A.rows)
    for col in range(A.rows):
        if col >= len(pivots) or pivots[col] != col:
            raise SingularMatrixError(col + 1)


def solve_linear(A: FieldMatrix, b: FieldVector) -> FieldVector:
    """
    Solve A x = b exactly over F_q.

    Raises:
        SingularMatrixError: naming the (1-based) column without a pivot
    """
    _check_square(A)
    if b.modulus != A.modulus:
        raise ModulusMismatchError(A.modulus, b.modulus)
    if len(b) != A.rows:
        raise DimensionError(f"Right-hand side has length {len(b)}, matrix has {A.rows} rows")
    _check_invertible(A)
    return FieldVector(np.linalg.solve(A.array, b.array), A.modulus)


def invert_matrix(A: FieldMatrix) -> FieldMatrix:
    _check_square(A)
    _check_invertible(A)
    return FieldMatrix(np.linalg.inv(A.array), A.modulus)


def eval_poly(coeffs: FieldVector, x: Union[FieldElement, int]) -> FieldElement:
    """Evaluate sum(coeffs[i] * x^i)."""
    modulus = coeffs.modulus
    if isinstance(x, FieldElement) and x.modulus != modulus:
        raise ModulusMismatchError(modulus, x.modulus)
    GF = type(coeffs.array)
    poly = galois.Poly(coeffs.array, order='asc')
    return FieldElement(int(poly(GF(int(x) % modulus))), modulus)


def eval_poly_many(coeffs, x: int, field: PrimeField) -> galois.FieldArray:
    """Evaluate a batch of polynomials (coefficients along the last axis) at x."""
    coeffs = field.array(coeffs)
    degree = coeffs.shape[-1]
    powers = field.GF(int(x) % field.q) ** np.arange(degree)
    flat = coeffs.reshape(-1, degree) @ powers[:, np.newaxis]
    return flat.reshape(coeffs.shape[:-1])


def power_row(x: int, degree: int, field: PrimeField) -> List[int]:
    """[x^0, x^1, ..., x^degree] in F_q."""
    return [int(v) for v in field.GF(int(x) % field.q) ** np.arange(degree + 1)]


def vanishing_product(field: PrimeField, points: Sequence[int], x: int) -> int:
    """prod_i (points[i] - x), the constant that masks encoded noise at x."""
    differences = field.array(list(points)) - field.array(x)
    return int(np.multiply.reduce(differences))
