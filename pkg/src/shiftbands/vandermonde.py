"""Integer direction families with Vandermonde slice matrices.

The family below pins down linear data along a curve of direction vectors.
With doubling-exponent base points

    nu_1 = 1,  nu_s = 2 ** ((d+1) ** (s-2))  for s >= 2,

the rows m_t = (nu_1^(t-1), ..., nu_n^(t-1)) make every degree-j moment
matrix M_j a Vandermonde matrix in the distinct parameters nu^e (one per
degree-j monomial e), so its determinant is a nonzero integer and the scaled
inverse det * M_j^(-1) is integral.  Binomial recombination coefficients for
substituted lines are provided alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .forms import Monomial, monomial_eval, monomials_of_degree
from .intlinalg import adjugate, bareiss_det

MAX_MONOMIALS = 512


class FamilyError(ValueError):
    pass


def monomial_count(n: int, j: int) -> int:
    """Number of degree-j monomials in n variables."""
    return math.comb(j + n - 1, n - 1)


def total_monomial_count(n: int, d: int) -> int:
    """All monomials of degree 1..d."""
    return sum(monomial_count(n, j) for j in range(1, d + 1))


def build_directions(n: int, d: int) -> list[int]:
    """Base points nu_1..nu_n; distinct degree-<=d power products guaranteed."""
    if n < 1 or d < 2:
        raise FamilyError("need n >= 1, d >= 2")
    if monomial_count(n, d) > MAX_MONOMIALS:
        raise FamilyError(f"degree-{d} monomial count exceeds cap {MAX_MONOMIALS}")
    nu = [1]
    for s in range(2, n + 1):
        nu.append(2 ** ((d + 1) ** (s - 2)))
    return nu


def direction_row(nu: Sequence[int], t: int) -> list[int]:
    """m_t = componentwise (t-1)-st powers, t >= 1."""
    return [v ** (t - 1) for v in nu]


@dataclass
class SliceMoments:
    """Degree-j moment matrix of the direction family."""

    j: int
    exponents: tuple[Monomial, ...]   # grevlex descending
    parameters: list[int]             # nu^e per exponent, pairwise distinct
    matrix: list[list[int]]           # rows t = 1..N_j, columns follow exponents

    @property
    def size(self) -> int:
        return len(self.exponents)

    def determinant(self) -> int:
        return bareiss_det(self.matrix)

    def determinant_product_formula(self) -> int:
        """Vandermonde product over parameter pairs; cross-check route."""
        det = 1
        p = self.parameters
        for c1 in range(len(p)):
            for c2 in range(c1 + 1, len(p)):
                det *= p[c2] - p[c1]
        return det

    def scaled_inverse(self) -> list[list[int]]:
        """det * M^(-1), integral by construction (adjugate)."""
        return adjugate(self.matrix)


def slice_moments(n: int, d: int, j: int) -> SliceMoments:
    if not 1 <= j <= d:
        raise FamilyError("degree out of range")
    nu = build_directions(n, d)
    exps = monomials_of_degree(n, j)
    if len(exps) > MAX_MONOMIALS:
        raise FamilyError(f"N_{j} exceeds cap {MAX_MONOMIALS}")
    params = [monomial_eval(e, nu) for e in exps]
    if len(set(params)) != len(params):
        raise FamilyError("direction powers collide; family construction broken")
    size = len(exps)
    matrix = [[p ** (t - 1) for p in params] for t in range(1, size + 1)]
    return SliceMoments(j=j, exponents=exps, parameters=params, matrix=matrix)


def build_family(n: int, d: int) -> dict[int, SliceMoments]:
    """Moment matrices for every degree 1..d."""
    return {j: slice_moments(n, d, j) for j in range(1, d + 1)}


def z_coefficient(j: int, i: Monomial, m: Sequence[int], y: Sequence[int]) -> int:
    """Coefficient of x^j in prod_v (y_v + x*m_v)^(i_v), exactly.

    z_{j,i}(m, y) = sum over e <= i with |e| = j of
                    prod_v C(i_v, e_v) * m^e * y^(i-e).
    """
    n = len(i)
    total = 0
    for e in monomials_of_degree(n, j):
        if any(ev > iv for ev, iv in zip(e, i)):
            continue
        term = 1
        for v in range(n):
            term *= math.comb(i[v], e[v]) * m[v] ** e[v] * y[v] ** (i[v] - e[v])
        total += term
    return total
