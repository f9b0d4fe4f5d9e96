"""Exact rational linear algebra over `fractions.Fraction`.

Matrices are lists of rows. Used by the exact-rational mode of `lie_algebra`, where the gallery's
integer structure constants make derived series and radicals tolerance-free.
"""

from fractions import Fraction
from typing import Any, List, Sequence, Tuple

Matrix = List[List[Fraction]]


def to_fraction(value: Any) -> Fraction:
    """Parse an int, a ``"p/q"`` string, or a ``[p, q]`` pair into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rational numbers")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        numerator, denominator = value
        if not isinstance(numerator, int) or not isinstance(denominator, int) or denominator == 0:
            raise ValueError(f"invalid numerator/denominator pair {value!r}")
        return Fraction(numerator, denominator)
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    raise ValueError(f"cannot read {value!r} as an exact rational")


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns."""
    matrix = [list(row) for row in rows]
    pivots: List[int] = []
    lead = 0
    for col in range(ncols):
        pivot_row = next((r for r in range(lead, len(matrix)) if matrix[r][col] != 0), None)
        if pivot_row is None:
            continue
        matrix[lead], matrix[pivot_row] = matrix[pivot_row], matrix[lead]
        factor = matrix[lead][col]
        matrix[lead] = [entry / factor for entry in matrix[lead]]
        for r in range(len(matrix)):
            if r != lead and matrix[r][col] != 0:
                scale = matrix[r][col]
                matrix[r] = [a - scale * b for a, b in zip(matrix[r], matrix[lead])]
        pivots.append(col)
        lead += 1
        if lead == len(matrix):
            break
    return matrix[:lead], pivots


def rank(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def span_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """A basis (rows in RREF) of the span of ``rows``."""
    return rref(rows, ncols)[0]


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Basis of {x : rows @ x = 0}, one vector per returned row."""
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis: Matrix = []
    for f in free:
        vector = [Fraction(0)] * ncols
        vector[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            vector[p] = -row[f]
        basis.append(vector)
    return basis


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    inner = len(b)
    ncols = len(b[0]) if inner else 0
    return [[sum((row[k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(ncols)] for row in a]


def to_float_rows(rows: Sequence[Sequence[Fraction]]) -> List[List[float]]:
    return [[float(entry) for entry in row] for row in rows]
