"""Rational approximation certificates for phase points.

Three certificate shapes are produced and cross-checked here:

* a *window certificate* for the form phases: a single denominator q with
  numerator vector a such that every component of alpha sits within
  P**(R(d-1)theta - d) / (2q) of a_k/q, with q below the window cap;
* a *simultaneous certificate* for the specialised lower-degree phases
  omega_e: one denominator r < P**delta approximating every omega_e to
  within P**(delta - |e|) / r;
* *determinant solutions* recombining the simultaneous numerators through
  a full-rank slice submatrix: a = det * C'^(-1) a', always integral.

Searches scan denominators in increasing order, so the first hit is
automatically primitive (a common factor could be divided out, giving a
smaller hit).  With ``verify_unique`` the scan continues to the cap and
raises if a second primitive certificate shows up; in-range parameters make
that impossible, so a second hit signals a caller bug rather than bad luck.

Every accept/reject decision is made against rigorous rational bounds on the
irrational quantities involved; floats never decide anything here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import (ExactReal, PrecisionError, RatInterval, convergents_from_coeffs,
                    floor_rational_power, nearest_int, power_bounds,
                    strict_floor_rational_power)
from .forms import Monomial, ShiftExpansion, monomials_of_degree
from .intlinalg import adjugate, bareiss_det, mat_vec_int
from .vandermonde import monomial_count


class BudgetExceededError(RuntimeError):
    pass


class AmbiguousCertificateError(RuntimeError):
    """Two primitive certificates in one window; parameters are out of range."""


@dataclass(frozen=True)
class BirchCertificate:
    q: int
    numerators: tuple[int, ...]
    theta: Fraction
    P: int
    quality: Fraction  # rigorous upper bound on 2 * max_k |q alpha_k - a_k|

    def as_fractions(self) -> list[Fraction]:
        return [Fraction(a, self.q) for a in self.numerators]


@dataclass(frozen=True)
class BakerCertificate:
    r: int
    numerators: dict  # Monomial -> int, every 1 <= |e| <= d
    delta: Fraction
    P: int

    def numerator(self, e: Monomial) -> int:
        return self.numerators.get(tuple(e), 0)


@dataclass(frozen=True)
class SpecialSolution:
    """Recombined numerators at one degree: approximates det * r * alpha * mu^(d-j)."""

    degree: int
    determinant: int          # det of the selected R x R slice submatrix
    rows: tuple[int, ...]     # indices into the grevlex monomial list
    numerators: tuple[int, ...]

    def canonical(self) -> tuple[int, tuple[int, ...]]:
        """Sign-normalised, gcd-reduced (det, numerators); det > 0."""
        d, nums = self.determinant, self.numerators
        g = math.gcd(abs(d), *(abs(v) for v in nums))
        d, nums = d // g, tuple(v // g for v in nums)
        if d < 0:
            d, nums = -d, tuple(-v for v in nums)
        return d, nums


@dataclass
class IdentityReport:
    q_divides_det_times_r: bool
    first_degree_match: bool
    top_degree_match: bool
    details: list[str]

    @property
    def all_pass(self) -> bool:
        return (self.q_divides_det_times_r and self.first_degree_match
                and self.top_degree_match)


def _coerce_real(x) -> ExactReal:
    if isinstance(x, ExactReal):
        return x
    return ExactReal.rational(Fraction(x))


# ---------------------------------------------------------------------------
# omega specialisation


def omega_values(expansion: ShiftExpansion, alpha: Sequence, mu) -> dict:
    """omega_e = sum_k alpha_k * d_{k,e} * mu^(d-|e|) for all 1 <= |e| <= d.

    Returns ExactReal values (exact when alpha and mu live in one quadratic
    field or are rational; interval-tracked otherwise).
    """
    mu = _coerce_real(mu)
    alphas = [_coerce_real(a) for a in alpha]
    d = expansion.d
    mu_pows = [mu ** e for e in range(d + 1)]
    out = {}
    for j in range(1, d + 1):
        for e in monomials_of_degree(expansion.n, j):
            acc = ExactReal.rational(0)
            for k, ak in enumerate(alphas):
                c = expansion.coefficient(k, e)
                if c:
                    acc = acc + ak * c
            out[e] = acc * mu_pows[d - j]
    return out


# ---------------------------------------------------------------------------
# denominator scans


def _interval_check(value_iv: RatInterval, thr: RatInterval, strict: bool) -> Optional[bool]:
    mag = abs(value_iv)
    if mag.hi < thr.lo or (not strict and mag.hi == thr.lo == thr.hi):
        return True
    if mag.lo > thr.hi or (strict and mag.lo == thr.hi == thr.lo):
        return False
    return None


def birch_search(alpha: Sequence, P: int, theta, d: int,
                 budget: int = 10 ** 7, verify_unique: bool = True
                 ) -> Optional[BirchCertificate]:
    """Smallest-denominator window certificate for the phase vector, if any.

    Scans q = 1 .. floor(P**(R(d-1)theta)).  For a single phase the scan
    jumps along continued-fraction convergents whenever the approximation
    window is provably narrower than 1/(q * cap), which makes every
    admissible numerator/denominator pair a convergent.
    """
    theta = Fraction(theta)
    if P < 1 or d < 2 or theta <= 0:
        raise ValueError("need P >= 1, d >= 2, theta > 0")
    R = len(alpha)
    reals = [_coerce_real(a) for a in alpha]
    window = Fraction(R * (d - 1)) * theta
    cap = floor_rational_power(P, window.numerator, window.denominator)
    if cap > budget:
        raise BudgetExceededError(f"window cap {cap} exceeds budget {budget}")
    expo = window - d
    thr = power_bounds(P, expo, digits=70)
    ivs = [a.enclosure(Fraction(1, 10 ** 60)) for a in reals]

    def candidate(q: int):
        nums = []
        quality = Fraction(0)
        for k, iv in enumerate(ivs):
            scaled = iv * q
            a_k = nearest_int(scaled)
            err2 = abs(scaled - a_k) * 2
            ok = _interval_check(err2, thr, strict=False)
            if ok is None:
                exact = (reals[k] * q - a_k) * 2
                ok = exact.abs_cmp_power(P, expo, strict=False)
                if ok is None:
                    raise PrecisionError(
                        "certificate check undecidable at stated precision")
            if not ok:
                return None
            nums.append(a_k)
            quality = max(quality, err2.hi)
        return tuple(nums), quality

    # convergent-only jump is valid when P**expo * cap < 1
    use_convergents = False
    if R == 1:
        num, den = expo.numerator, expo.denominator
        if num < 0 and cap ** den < P ** (-num):
            use_convergents = True

    if use_convergents:
        qs = []
        seen = set()
        for conv in convergents_from_coeffs(reals[0].cf_coefficients()):
            if conv.denominator > cap:
                break
            if conv.denominator not in seen:
                seen.add(conv.denominator)
                qs.append(conv.denominator)
        qs.sort()
    else:
        qs = range(1, cap + 1)

    found: Optional[BirchCertificate] = None
    for q in qs:
        hit = candidate(q)
        if hit is None:
            continue
        nums, quality = hit
        g = math.gcd(q, *(abs(v) for v in nums)) if nums else q
        if found is None:
            if g != 1:
                raise AmbiguousCertificateError(
                    "first hit is imprimitive; scan order broken")
            found = BirchCertificate(q=q, numerators=nums, theta=theta, P=P,
                                     quality=quality)
            if not verify_unique:
                return found
            continue
        if (q // g, tuple(v // g for v in nums)) != (found.q, found.numerators):
            raise AmbiguousCertificateError(
                f"second primitive certificate at q={q}")
    return found


def baker_search(omega: dict, P: int, delta, budget: int = 10 ** 7,
                 verify_unique: bool = True) -> Optional[BakerCertificate]:
    """Smallest simultaneous denominator r < P**delta for the omega phases."""
    delta = Fraction(delta)
    if P < 1 or delta <= 0:
        raise ValueError("need P >= 1, delta > 0")
    r_max = strict_floor_rational_power(P, delta.numerator, delta.denominator)
    if r_max > budget:
        raise BudgetExceededError(f"denominator cap {r_max} exceeds budget {budget}")
    if r_max < 1:
        return None
    monos = sorted(omega.keys(), key=lambda e: (sum(e), e))
    degrees = sorted({sum(e) for e in monos})
    thr = {j: power_bounds(P, delta - j, digits=70) for j in degrees}
    reals = {e: _coerce_real(omega[e]) for e in monos}
    ivs = {e: reals[e].enclosure(Fraction(1, 10 ** 60)) for e in monos}

    def candidate(r: int):
        nums = {}
        for e in monos:
            scaled = ivs[e] * r
            a_e = nearest_int(scaled)
            ok = _interval_check(abs(scaled - a_e), thr[sum(e)], strict=True)
            if ok is None:
                exact = reals[e] * r - a_e
                ok = exact.abs_cmp_power(P, delta - sum(e), strict=True)
                if ok is None:
                    raise PrecisionError(
                        "certificate check undecidable at stated precision")
            if not ok:
                return None
            nums[e] = a_e
        return nums

    found: Optional[BakerCertificate] = None
    for r in range(1, r_max + 1):
        nums = candidate(r)
        if nums is None:
            continue
        g = math.gcd(r, *(abs(v) for v in nums.values()))
        if found is None:
            if g != 1:
                raise AmbiguousCertificateError(
                    "first hit is imprimitive; scan order broken")
            found = BakerCertificate(r=r, numerators=dict(nums), delta=delta, P=P)
            if not verify_unique:
                return found
            continue
        reduced = {e: v // g for e, v in nums.items()}
        if (r // g, reduced) != (found.r, found.numerators):
            raise AmbiguousCertificateError(f"second primitive certificate at r={r}")
    return found


# ---------------------------------------------------------------------------
# determinant recombination and exact identities


def special_from_slices(expansion: ShiftExpansion, baker: BakerCertificate
                        ) -> dict[int, SpecialSolution]:
    """Integral solutions a = det * C'^(-1) a' for each full-rank degree."""
    R = expansion.system.count
    out = {}
    for j in range(1, expansion.d + 1):
        monos, mat = expansion.slice_matrix(j)
        chosen: list[int] = []
        basis: list[list[Fraction]] = []
        for idx, row in enumerate(mat):
            trial = basis + [list(map(Fraction, row))]
            if _rank(trial) == len(trial):
                basis = trial
                chosen.append(idx)
                if len(chosen) == R:
                    break
        if len(chosen) < R:
            continue  # degree without independent slices
        sub = [mat[i] for i in chosen]
        det = bareiss_det(sub)
        adj = adjugate(sub)
        rhs = [baker.numerator(monos[i]) for i in chosen]
        nums = mat_vec_int(adj, rhs)
        out[j] = SpecialSolution(degree=j, determinant=det, rows=tuple(chosen),
                                 numerators=tuple(nums))
    return out


def _rank(rows: list[list[Fraction]]) -> int:
    m = [row[:] for row in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(rank + 1, len(m)):
            if m[r][c]:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def identity_checks(expansion: ShiftExpansion, birch: BirchCertificate,
                    baker: BakerCertificate, special: dict[int, SpecialSolution]
                    ) -> IdentityReport:
    """Exact consistency identities tying the three certificate layers.

    The top-degree determinant solution approximates det * r * alpha with no
    shift power attached, so it must agree with the window certificate as an
    exact vector of fractions, and q must divide det * r.  At the top degree
    the simultaneous numerators must equal the slice-weighted recombination
    of the window numerators.
    """
    details = []
    q, r = birch.q, baker.r
    d = expansion.d
    ok_div = True
    ok_first = True
    if d not in special:
        ok_div = ok_first = False
        details.append(f"no determinant solution at top degree {d}")
    else:
        D = special[d].determinant
        ok_div = (D * r) % q == 0
        details.append(f"q={q} divides D*r={D * r}: {ok_div}")
        for k in range(expansion.system.count):
            lhs = Fraction(special[d].numerators[k], D * r)
            rhs = Fraction(birch.numerators[k], q)
            if lhs != rhs:
                ok_first = False
                details.append(f"top-degree recombination mismatch at form {k}:"
                               f" {lhs} != {rhs}")
        if ok_first:
            details.append("determinant recombination matches window numerators")
    ok_top = True
    for e in monomials_of_degree(expansion.n, expansion.d):
        lhs = Fraction(baker.numerator(e), r)
        rhs = Fraction(
            sum(expansion.coefficient(k, e) * birch.numerators[k]
                for k in range(expansion.system.count)), q)
        if lhs != rhs:
            ok_top = False
            details.append(f"top-degree mismatch at {e}: {lhs} != {rhs}")
    if ok_top:
        details.append("top-degree numerators match window recombination")
    return IdentityReport(q_divides_det_times_r=ok_div,
                          first_degree_match=ok_first,
                          top_degree_match=ok_top,
                          details=details)


# ---------------------------------------------------------------------------
# dissection parameters


@dataclass(frozen=True)
class ApproximationParams:
    """Exponent bookkeeping shared by searches and the arc dissection."""

    n: int
    d: int
    forms: int
    theta0: Fraction

    @staticmethod
    def for_system(n: int, d: int, forms: int, theta0=None) -> "ApproximationParams":
        R = forms
        N = sum(monomial_count(n, j) for j in range(1, d + 1))
        default = Fraction(1, 64 * R * (R + 1) * N * d * d)
        t0 = Fraction(theta0) if theta0 is not None else default
        if t0 <= 0:
            raise ValueError("theta0 must be positive")
        return ApproximationParams(n=n, d=d, forms=forms, theta0=t0)

    @property
    def monomial_total(self) -> int:
        return sum(monomial_count(self.n, j) for j in range(1, self.d + 1))

    @property
    def delta(self) -> Fraction:
        R, N, d = self.forms, self.monomial_total, self.d
        return (R * (R + 1) * N * d * d + 1) * self.theta0
