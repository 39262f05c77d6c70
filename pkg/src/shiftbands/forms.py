"""Exact integer forms and their shift expansions.

A form is a homogeneous integer polynomial stored sparsely as a map from
exponent vectors to nonzero integer coefficients.  A system bundles R forms
of a common degree d in n variables together with the declared dimension
bound ``sigma`` of the singular locus intersection.

The shift expansion rewrites every form around the diagonal point
(1, ..., 1): writing mu for a scalar shift,

    f_k(x + mu*1) = mu^d * f_k(1) + sum over 1 <= j <= d of
                    mu^(d-j) * (degree-j slice of f_k at x),

where the degree-j slice has integer coefficients obtained by exact formal
differentiation.  Slices drive everything downstream: specialised
approximation searches, exponential-sum phases and the band counters.

Monomials of a fixed degree are ordered graded-reverse-lexicographically
(largest first); that ordering is shared by every module in the package.
"""

from __future__ import annotations

import functools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

Monomial = tuple[int, ...]


class FormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# monomial orderings


def _grevlex_sort_key(e: Monomial):
    # within one degree: e > e' iff the last nonzero entry of e - e' is
    # negative, i.e. reversed(e) is lexicographically smaller
    return tuple(reversed(e))


@functools.lru_cache(maxsize=None)
def monomials_of_degree(n: int, j: int) -> tuple[Monomial, ...]:
    """All exponent vectors in n variables of total degree j, grevlex descending."""
    if n < 1 or j < 0:
        raise FormError("need n >= 1 and j >= 0")

    def rec(vars_left: int, total: int):
        if vars_left == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for tail in rec(vars_left - 1, total - head):
                yield (head,) + tail

    return tuple(sorted(rec(n, j), key=_grevlex_sort_key))


def monomial_eval(e: Monomial, point: Sequence) -> object:
    v = 1
    for exp, x in zip(e, point):
        if exp:
            v *= x ** exp
    return v


# ---------------------------------------------------------------------------
# sparse term maps (shared by forms, gradients and slices)


def terms_eval(terms: dict, point: Sequence):
    return sum((c * monomial_eval(e, point) for e, c in terms.items()),
               start=Fraction(0) if any(isinstance(c, Fraction) for c in terms.values()) else 0)


def terms_diff(terms: dict, var: int) -> dict:
    out: dict = {}
    for e, c in terms.items():
        if e[var] == 0:
            continue
        de = list(e)
        de[var] -= 1
        out[tuple(de)] = c * e[var]
    return out


def _terms_content(terms: dict) -> int:
    g = 0
    for c in terms.values():
        g = math.gcd(g, abs(c))
    return g


# ---------------------------------------------------------------------------
# domain types


@dataclass
class Form:
    """Homogeneous integer form of degree d >= 2 in n variables."""

    n: int
    d: int
    terms: dict  # Monomial -> int, no zero coefficients

    def __post_init__(self):
        if self.n < 1:
            raise FormError("need at least one variable")
        if self.d < 2:
            raise FormError("forms have degree >= 2")
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(v) for v in e)
            c = int(c)
            if len(e) != self.n or any(v < 0 for v in e):
                raise FormError(f"bad exponent vector {e}")
            if sum(e) != self.d:
                raise FormError(f"monomial {e} is not homogeneous of degree {self.d}")
            if c:
                clean[e] = clean.get(e, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, point: Sequence):
        return terms_eval(self.terms, point)

    def coefficient_sum(self) -> int:
        """Value at the all-ones point."""
        return sum(self.terms.values())

    def is_diagonal(self) -> bool:
        return all(sum(1 for v in e if v) <= 1 for e in self.terms)


@dataclass
class FormSystem:
    forms: list[Form]
    sigma: int = 0

    def __post_init__(self):
        if not self.forms:
            raise FormError("a system holds at least one form")
        n = self.forms[0].n
        d = self.forms[0].d
        for f in self.forms:
            if f.n != n or f.d != d:
                raise FormError("all forms must share n and d")
        if self.sigma < 0:
            raise FormError("sigma >= 0")

    @property
    def n(self) -> int:
        return self.forms[0].n

    @property
    def d(self) -> int:
        return self.forms[0].d

    @property
    def count(self) -> int:
        return len(self.forms)

    def is_diagonal(self) -> bool:
        return all(f.is_diagonal() for f in self.forms)


def eval_form(form: Form, point: Sequence):
    """Exact evaluation at a rational point."""
    return form(point)


def gradient(form: Form) -> list[dict]:
    """Partial-derivative term maps, one per variable (degree d-1 each)."""
    return [terms_diff(form.terms, v) for v in range(form.n)]


def rescale_to_dfactorial(system: FormSystem) -> tuple[FormSystem, list[int]]:
    """Scale each form so its coefficients are integer multiples of d!.

    Returns the scaled system and the per-form multiplier used (the smallest
    positive one).
    """
    dfact = math.factorial(system.d)
    scaled = []
    multipliers = []
    for f in system.forms:
        content = _terms_content(f.terms)
        m = dfact // math.gcd(dfact, content) if content else 1
        multipliers.append(m)
        scaled.append(Form(f.n, f.d, {e: c * m for e, c in f.terms.items()}))
    return FormSystem(scaled, sigma=system.sigma), multipliers


# ---------------------------------------------------------------------------
# shift expansion


def _derivative_coefficient(form: Form, e: Monomial) -> int:
    # (1/e!) * (d/dx)^e f evaluated at (1,...,1); exact formal differentiation
    terms = form.terms
    for var, times in enumerate(e):
        for _ in range(times):
            terms = terms_diff(terms, var)
            if not terms:
                return 0
    total = sum(terms.values())
    fact = 1
    for v in e:
        fact *= math.factorial(v)
    if total % fact:
        raise ArithmeticError("derivative sum not divisible by multi-factorial")
    return total // fact


@dataclass
class ShiftExpansion:
    """Slice data of a system around the all-ones direction."""

    system: FormSystem
    # per form: Monomial -> int over all 1 <= |e| <= d, zeros omitted
    tables: list[dict]

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def d(self) -> int:
        return self.system.d

    def coefficient(self, k: int, e: Monomial) -> int:
        return self.tables[k].get(tuple(e), 0)

    def slice(self, k: int, j: int) -> dict:
        """Degree-j slice of form k as a term map (may be empty)."""
        if not 1 <= j <= self.d:
            raise FormError("slice degree out of range")
        return {e: c for e, c in self.tables[k].items() if sum(e) == j}

    def slice_matrix(self, j: int) -> tuple[tuple[Monomial, ...], list[list[int]]]:
        """Rows follow the grevlex order of degree-j monomials; columns are forms."""
        rows = monomials_of_degree(self.n, j)
        mat = [[self.coefficient(k, e) for k in range(self.system.count)] for e in rows]
        return rows, mat

    def constant_term(self, k: int) -> int:
        """f_k at the all-ones point; the shifted constant is mu^d times this."""
        return self.system.forms[k].coefficient_sum()

    def eval_shifted(self, k: int, point: Sequence, mu) -> Fraction:
        """Exact f_k(x + mu*1) for rational mu, via the expansion."""
        mu = Fraction(mu)
        acc = Fraction(self.constant_term(k)) * mu ** self.d
        for e, c in self.tables[k].items():
            acc += c * mu ** (self.d - sum(e)) * monomial_eval(e, point)
        return acc

    def mu_polynomial(self, k: int, point: Sequence) -> list[int]:
        """Coefficients g_0..g_d with f_k(x + mu*1) = sum g_i * mu^i, x integral."""
        coeffs = [0] * (self.d + 1)
        coeffs[self.d] = self.constant_term(k)
        for e, c in self.tables[k].items():
            coeffs[self.d - sum(e)] += c * monomial_eval(e, point)
        return coeffs


def taylor_shift(system: FormSystem) -> ShiftExpansion:
    """Exact expansion tables d_{k,e} for all 1 <= |e| <= d."""
    tables = []
    for f in system.forms:
        table = {}
        for j in range(1, system.d + 1):
            for e in monomials_of_degree(system.n, j):
                c = _derivative_coefficient(f, e)
                if c:
                    table[e] = c
        tables.append(table)
    return ShiftExpansion(system, tables)


# ---------------------------------------------------------------------------
# exact ranks and the admissible-degree set


def rank_of_int_matrix(mat: Sequence[Sequence]) -> int:
    """Exact rank over the rationals (fraction-free elimination)."""
    m = [list(map(Fraction, row)) for row in mat]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pr = m[rank]
        for r in range(rank + 1, rows):
            if m[r][c]:
                factor = m[r][c] / pr[c]
                m[r] = [a - factor * b for a, b in zip(m[r], pr)]
        rank += 1
        if rank == rows:
            break
    return rank


def independent_degrees(expansion: ShiftExpansion) -> set[int]:
    """Degrees j whose slice matrix has full column rank (one per form)."""
    R = expansion.system.count
    good = set()
    for j in range(1, expansion.d + 1):
        _, mat = expansion.slice_matrix(j)
        if rank_of_int_matrix(mat) == R:
            good.add(j)
    return good


# ---------------------------------------------------------------------------
# hypothesis report


@dataclass
class HypothesisReport:
    n: int
    d: int
    forms: int
    sigma: int
    variables_sufficient: bool
    variables_needed: int
    kappa: Fraction
    kappa_exceeds_r_plus_1: bool
    slice_independent_degrees: set[int]
    top_slice_ok: bool
    gradient_slice_ok: bool
    sigma_probe_points: int = 0
    sigma_probe_max_rank: int = 0
    sigma_probe_deficient: int = 0
    sigma_suspect: bool = False

    @property
    def all_pass(self) -> bool:
        return (self.variables_sufficient and self.kappa_exceeds_r_plus_1
                and self.top_slice_ok and self.gradient_slice_ok)

    def summary_lines(self) -> list[str]:
        yes = lambda b: "pass" if b else "FAIL"
        return [
            f"numvars: n={self.n} > sigma + R(R+1)(d-1)2^(d-1) = {self.variables_needed}"
            f" ... {yes(self.variables_sufficient)}",
            f"saving ratio kappa = {self.kappa} > R+1 = {self.forms + 1}"
            f" ... {yes(self.kappa_exceeds_r_plus_1)}",
            f"independent slice degrees: {sorted(self.slice_independent_degrees)}",
            f"top slice independent ... {yes(self.top_slice_ok)}",
            f"gradient slice independent ... {yes(self.gradient_slice_ok)}",
            f"singular-locus probe: {self.sigma_probe_points} points,"
            f" max Jacobian rank {self.sigma_probe_max_rank},"
            f" {self.sigma_probe_deficient} rank-deficient"
            + (" (sigma looks optimistic)" if self.sigma_suspect else ""),
        ]


def _jacobian_rank_at(grads: list[list[dict]], point: list[Fraction]) -> int:
    mat = [[terms_eval(g, point) for g in row] for row in grads]
    return rank_of_int_matrix(mat)


def check_hypotheses(system: FormSystem, expansion: Optional[ShiftExpansion] = None,
                     probe_points: int = 200, seed: int = 0) -> HypothesisReport:
    """Decidable hypotheses exactly; the singular locus only by sampling.

    The probe samples rational points of height <= 10^4 and records how often
    the Jacobian drops rank.  It can only ever raise suspicion about the
    declared sigma, never certify it; consumers decide what to do with the
    advisory flag.
    """
    if expansion is None:
        expansion = taylor_shift(system)
    R, n, d = system.count, system.n, system.d
    needed = system.sigma + R * (R + 1) * (d - 1) * 2 ** (d - 1)
    kappa = Fraction(n - system.sigma, R * (d - 1) * 2 ** (d - 1))
    degrees = independent_degrees(expansion)

    rng = random.Random(seed)
    grads = [gradient(f) for f in system.forms]
    max_rank = 0
    deficient = 0
    for _ in range(probe_points):
        point = [Fraction(rng.randint(-10 ** 4, 10 ** 4), rng.randint(1, 97)) for _ in range(n)]
        r = _jacobian_rank_at(grads, point)
        max_rank = max(max_rank, r)
        if r < R:
            deficient += 1
    return HypothesisReport(
        n=n, d=d, forms=R, sigma=system.sigma,
        variables_sufficient=n > needed,
        variables_needed=needed,
        kappa=kappa,
        kappa_exceeds_r_plus_1=kappa > R + 1,
        slice_independent_degrees=degrees,
        top_slice_ok=d in degrees,
        gradient_slice_ok=(d - 1) in degrees if d >= 2 else False,
        sigma_probe_points=probe_points,
        sigma_probe_max_rank=max_rank,
        sigma_probe_deficient=deficient,
        sigma_suspect=deficient > probe_points // 2,
    )


# ---------------------------------------------------------------------------
# structured input documents


def system_from_document(doc: dict) -> FormSystem:
    """Build a system from the JSON input layout.

    Expected shape::

        {"n": 5, "d": 2, "sigma": 0,
         "forms": [[{"coeff": "1", "exps": [2,0,0,0,0]}, ...], ...]}

    Coefficients are decimal integer strings so arbitrarily large values
    survive the trip through JSON.
    """
    try:
        n = int(doc["n"])
        d = int(doc["d"])
        sigma = int(doc.get("sigma", 0))
        raw_forms = doc["forms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormError(f"malformed system document: {exc}") from exc
    if not isinstance(raw_forms, list) or not raw_forms:
        raise FormError("document needs a non-empty list of forms")
    forms = []
    for raw in raw_forms:
        terms: dict = {}
        for t in raw:
            try:
                c = int(str(t["coeff"]))
                e = tuple(int(v) for v in t["exps"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormError(f"malformed term {t!r}: {exc}") from exc
            if c:
                terms[e] = terms.get(e, 0) + c
        forms.append(Form(n, d, terms))
    return FormSystem(forms, sigma=sigma)


def system_to_document(system: FormSystem) -> dict:
    return {
        "n": system.n,
        "d": system.d,
        "sigma": system.sigma,
        "forms": [
            [{"coeff": str(c), "exps": list(e)} for e, c in sorted(f.terms.items())]
            for f in system.forms
        ],
    }


def load_system(path: str) -> FormSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return system_from_document(json.load(fh))


def diagonal_quadratic(signs: Sequence[int], sigma: int = 0) -> FormSystem:
    """Convenience: the form sum of sign_i * x_i^2."""
    n = len(signs)
    terms = {}
    for i, s in enumerate(signs):
        e = tuple(2 if v == i else 0 for v in range(n))
        terms[e] = int(s)
    return FormSystem([Form(n, 2, terms)], sigma=sigma)
