"""Fraction-free exact linear algebra over the integers."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(matrix)
    if n == 0:
        return 1
    if any(len(row) != n for row in matrix):
        raise ValueError("determinant wants a square matrix")
    m = [list(map(int, row)) for row in matrix]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _minor(matrix: Sequence[Sequence[int]], drop_row: int, drop_col: int) -> list[list[int]]:
    return [
        [v for c, v in enumerate(row) if c != drop_col]
        for r, row in enumerate(matrix) if r != drop_row
    ]


def adjugate(matrix: Sequence[Sequence[int]]) -> list[list[int]]:
    """Exact adjugate: adj(M) @ M = det(M) * I."""
    n = len(matrix)
    if n == 1:
        return [[1]]
    out = [[0] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            cof = bareiss_det(_minor(matrix, r, c))
            if (r + c) % 2:
                cof = -cof
            out[c][r] = cof  # transpose of the cofactor matrix
    return out


def mat_vec_int(matrix: Sequence[Sequence[int]], vec: Sequence[int]) -> list[int]:
    return [sum(a * b for a, b in zip(row, vec)) for row in matrix]


def mat_mul_int(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def solve_fraction(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve a square exact system by Gaussian elimination over Q."""
    n = len(matrix)
    m = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for k in range(n):
        pivot = next((r for r in range(k, n) if m[r][k] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[k], m[pivot] = m[pivot], m[k]
        pk = m[k][k]
        for r in range(n):
            if r != k and m[r][k]:
                f = m[r][k] / pk
                m[r] = [a - f * b for a, b in zip(m[r], m[k])]
    return [m[r][n] / m[r][r] for r in range(n)]
