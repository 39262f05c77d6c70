"""Exponential sums over integer boxes and their main-term counterparts.

Three families of objects live here.  Lattice sums: the raw box sum with a
polynomial phase (:func:`weyl_g`) and the shifted sum it factors
(:func:`shifted_S`).  Complete sums: exact-phase sums over residues mod a
composite modulus (:func:`complete_sum`).  Continuous companions: the
oscillatory box integral (:func:`osc_integral`) and the assembled
approximation :func:`s_star` together with the scalar decay witness
:func:`decay_witness`.

Phases on lattice points are never accumulated as floating products of large
coordinates.  Every phase coefficient is rounded once to a 96-bit fixed-point
integer, monomials are evaluated in exact integer arithmetic, and only the
final fractional part (error below 2**-90 per point at desk scales) is sent
through ``exp``.  Accumulation is Kahan-compensated in a fixed lattice order,
so results are bit-reproducible.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import legendre

from .dioph import (BakerCertificate, BirchCertificate, BudgetExceededError,
                    SpecialSolution, identity_checks, omega_values)
from .exact import ExactReal
from .forms import FormSystem, Monomial, ShiftExpansion

PHASE_BITS = 96
PHASE_SCALE = 1 << PHASE_BITS
DEFAULT_POINT_BUDGET = 4_000_000
DEFAULT_NODES_PER_AXIS = 64
DEFAULT_TENSOR_BUDGET = 1 << 24
OSC_DIMENSION_CAP = 6


class InconsistentCertificatesError(ValueError):
    """The certificate bundle violates a required compatibility identity."""


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class WeylSumSpec:
    """Box exponential sum with top-degree phase alpha.f plus lower terms."""

    system: FormSystem
    expansion: ShiftExpansion
    P: int
    alpha: tuple
    omega_diamond: Mapping[Monomial, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.P < 1:
            raise ValueError("P must be >= 1")
        if len(self.alpha) != self.system.count:
            raise ValueError("alpha length must match the number of forms")
        d = self.system.d
        for e in self.omega_diamond:
            if not 1 <= sum(e) <= d - 1:
                raise ValueError("omega_diamond keys must have total degree in [1, d-1]")
            if len(e) != self.system.n:
                raise ValueError("omega_diamond keys must have n entries")


@dataclass(frozen=True)
class QuadratureRule:
    nodes_per_axis: int = DEFAULT_NODES_PER_AXIS
    scheme: str = "gauss-legendre"

    def __post_init__(self):
        if self.nodes_per_axis < 2:
            raise ValueError("need at least 2 nodes per axis")
        if self.scheme != "gauss-legendre":
            raise ValueError("unknown quadrature scheme: %r" % (self.scheme,))


@dataclass(frozen=True)
class OscIntegralSpec:
    """Oscillatory box integral with phase gamma.f(t) + lower-degree terms."""

    gamma: tuple
    gamma_diamond: Mapping[Monomial, float] = field(default_factory=dict)
    quadrature: QuadratureRule = field(default_factory=QuadratureRule)


@dataclass(frozen=True)
class CertificateBundle:
    """Rational approximation data feeding the main-term evaluation."""

    birch: BirchCertificate
    baker: BakerCertificate
    special: Mapping[int, SpecialSolution]
    degree: int

    def top_solution(self) -> tuple[int, tuple]:
        return self.special[self.degree].canonical()

    def second_solution(self) -> tuple[int, tuple]:
        return self.special[self.degree - 1].canonical()

    @classmethod
    def unit(cls, r_count: int, n: int, degree: int, P: int) -> "CertificateBundle":
        """Trivial certificates q = r = D = 1 with zero numerators."""
        birch = BirchCertificate(q=1, numerators=(0,) * r_count,
                                 theta=Fraction(0), P=P, quality=Fraction(0))
        baker = BakerCertificate(r=1, numerators={}, delta=Fraction(0), P=P)
        special = {}
        for j in (degree, degree - 1):
            if j >= 1:
                special[j] = SpecialSolution(degree=j, determinant=1,
                                             rows=tuple(range(r_count)),
                                             numerators=(0,) * r_count)
        return cls(birch=birch, baker=baker, special=special, degree=degree)


# ---------------------------------------------------------------------------
# fixed-point phase machinery


def _phase_scaled(value) -> int:
    """Round a phase coefficient to an integer multiple of 2**-PHASE_BITS."""
    if isinstance(value, ExactReal):
        value = value.enclosure(Fraction(1, 10 ** 60)).mid
    frac = Fraction(value)
    num, den = frac.numerator, frac.denominator
    return (num * PHASE_SCALE + (den // 2 if num >= 0 else -(den // 2))) // den


def _power_tables(P: int, n: int, d: int) -> list[list[int]]:
    # pows[v][x + P][j] = x**j for x in [-P, P]
    table = [[x ** j for j in range(d + 1)] for x in range(-P, P + 1)]
    return table


class _KahanComplex:
    __slots__ = ("re", "im", "cre", "cim")

    def __init__(self):
        self.re = self.im = self.cre = self.cim = 0.0

    def add(self, z: complex) -> None:
        y = z.real - self.cre
        t = self.re + y
        self.cre = (t - self.re) - y
        self.re = t
        y = z.imag - self.cim
        t = self.im + y
        self.cim = (t - self.im) - y
        self.im = t

    def value(self) -> complex:
        return complex(self.re, self.im)


def _lattice_phase_sum(coeffs: dict[Monomial, int], n: int, P: int, d: int,
                       budget: int) -> complex:
    total_points = (2 * P + 1) ** n
    if total_points > budget:
        raise BudgetExceededError(
            "lattice size %d exceeds budget %d" % (total_points, budget))
    items = [(e, c) for e, c in coeffs.items() if c]
    pows = _power_tables(P, n, d)
    acc = _KahanComplex()
    two_pi = 2.0 * math.pi
    for x in itertools.product(range(-P, P + 1), repeat=n):
        idx = tuple(v + P for v in x)
        phase_int = 0
        for e, c in items:
            m = c
            for v in range(n):
                ev = e[v]
                if ev:
                    m *= pows[idx[v]][ev]
            phase_int += m
        frac = (phase_int % PHASE_SCALE) / PHASE_SCALE
        acc.add(cmath.exp(complex(0.0, two_pi * frac)))
    return acc.value()


def weyl_g(spec: WeylSumSpec, budget: int = DEFAULT_POINT_BUDGET) -> complex:
    """Sum of e(alpha.f(x) + sum_j omega_j x^j) over the box |x| <= P."""
    system = spec.system
    n, d = system.n, system.d
    coeffs: dict[Monomial, int] = {}
    for k, form in enumerate(system.forms):
        a_k = spec.alpha[k]
        for e, c in form.terms.items():
            scaled = _phase_scaled(a_k) * c if isinstance(a_k, ExactReal) \
                else _phase_scaled(Fraction(a_k) * c)
            coeffs[e] = coeffs.get(e, 0) + scaled
    for e, w in spec.omega_diamond.items():
        coeffs[e] = coeffs.get(e, 0) + _phase_scaled(w)
    return _lattice_phase_sum(coeffs, n, spec.P, d, budget)


# ---------------------------------------------------------------------------
# shifted sums


@dataclass(frozen=True)
class ShiftedSumResult:
    value: complex
    factored: complex
    unit: complex
    weyl: complex
    residual: float


def _mu_power_fractions(mu: ExactReal, d: int) -> list[Fraction]:
    width = Fraction(1, 10 ** 45)
    pows = [Fraction(1)]
    acc = ExactReal.rational(1)
    for _ in range(d):
        acc = acc * mu
        pows.append(acc.enclosure(width).mid)
    return pows


def shifted_S(system: FormSystem, expansion: ShiftExpansion, mu: ExactReal,
              P: int, alpha: Sequence, budget: int = DEFAULT_POINT_BUDGET
              ) -> ShiftedSumResult:
    """Direct evaluation of sum of e(alpha.f(x + mu*1)) and its factored form.

    The direct route evaluates each form at the shifted point through its
    exact polynomial in mu (integer slice values, high-precision mu powers).
    The factored route multiplies the constant unit e(alpha.f(mu*1)) by the
    box sum of :func:`weyl_g` with the induced lower-degree phases; the
    residual between the two is reported and should vanish to 1e-10.
    """
    n, d = system.n, system.d
    total_points = (2 * P + 1) ** n
    if total_points > budget:
        raise BudgetExceededError(
            "lattice size %d exceeds budget %d" % (total_points, budget))
    alpha = tuple(a if isinstance(a, ExactReal) else Fraction(a) for a in alpha)
    mu_pows = _mu_power_fractions(mu, d)

    alpha_frac = []
    for a in alpha:
        if isinstance(a, ExactReal):
            alpha_frac.append(a.enclosure(Fraction(1, 10 ** 45)).mid)
        else:
            alpha_frac.append(a)

    acc = _KahanComplex()
    two_pi = 2.0 * math.pi
    for x in itertools.product(range(-P, P + 1), repeat=n):
        phase = Fraction(0)
        for k in range(system.count):
            coeffs = expansion.mu_polynomial(k, x)
            val = sum(c * mu_pows[i] for i, c in enumerate(coeffs) if c)
            phase += alpha_frac[k] * val
        frac = phase - (phase.numerator // phase.denominator)
        acc.add(cmath.exp(complex(0.0, two_pi * float(frac))))
    direct = acc.value()

    omega = omega_values(expansion, alpha, mu)
    omega_diamond = {e: w for e, w in omega.items() if sum(e) <= d - 1}
    gsum = weyl_g(WeylSumSpec(system=system, expansion=expansion, P=P,
                              alpha=alpha, omega_diamond=omega_diamond),
                  budget=budget)
    unit_phase = Fraction(0)
    for k in range(system.count):
        unit_phase += alpha_frac[k] * expansion.constant_term(k) * mu_pows[d]
    unit_frac = unit_phase - (unit_phase.numerator // unit_phase.denominator)
    unit = cmath.exp(complex(0.0, two_pi * float(unit_frac)))
    factored = unit * gsum
    return ShiftedSumResult(value=direct, factored=factored, unit=unit,
                            weyl=gsum, residual=abs(direct - factored))


# ---------------------------------------------------------------------------
# complete sums mod Dr


def complete_sum(r: int, D: int, q: int, a: Sequence[int],
                 a_dagger: Mapping[Monomial, int], system: FormSystem,
                 expansion: ShiftExpansion | None = None,
                 budget: int = DEFAULT_POINT_BUDGET) -> complex:
    """Exact-phase sum over x mod D*r of e(a.f(x)/q + sum_j a_j x^j / r).

    Requires q | D*r so the summand is well defined on residue classes.
    ``a_dagger`` carries the lower-degree numerators, indexed by exponent
    tuples of total degree in [1, d-1].
    """
    if r < 1 or D < 1 or q < 1:
        raise ValueError("moduli must be positive")
    if (D * r) % q:
        raise InconsistentCertificatesError("q must divide D*r")
    n, d = system.n, system.d
    modulus = D * r
    total_points = modulus ** n
    if total_points > budget:
        raise BudgetExceededError(
            "residue box size %d exceeds budget %d" % (total_points, budget))
    for e in a_dagger:
        if not 1 <= sum(e) <= d - 1:
            raise ValueError("a_dagger keys must have total degree in [1, d-1]")

    m0 = math.lcm(q, r)
    mult_q = m0 // q
    mult_r = m0 // r
    roots = [cmath.exp(complex(0.0, 2.0 * math.pi * k / m0)) for k in range(m0)]
    dagger = [(e, c) for e, c in a_dagger.items() if c]
    acc = _KahanComplex()
    for x in itertools.product(range(modulus), repeat=n):
        num = 0
        for k, form in enumerate(system.forms):
            if a[k]:
                num += mult_q * a[k] * form(x)
        for e, c in dagger:
            m = c
            for v in range(n):
                ev = e[v]
                if ev:
                    m *= x[v] ** ev
            num += mult_r * m
        acc.add(roots[num % m0])
    return acc.value()


# ---------------------------------------------------------------------------
# oscillatory integrals


@dataclass(frozen=True)
class OscIntegralResult:
    value: complex
    error_estimate: float
    nodes_per_axis: int
    separable: bool


def _phase_coefficients(spec: OscIntegralSpec, system: FormSystem
                        ) -> dict[Monomial, float]:
    coeffs: dict[Monomial, float] = {}
    for k, form in enumerate(system.forms):
        g = float(spec.gamma[k])
        if g == 0.0:
            continue
        for e, c in form.terms.items():
            coeffs[e] = coeffs.get(e, 0.0) + g * c
    for e, c in spec.gamma_diamond.items():
        c = float(c)
        if c:
            coeffs[e] = coeffs.get(e, 0.0) + c
    return {e: c for e, c in coeffs.items() if c}


def _tensor_value(coeffs: dict[Monomial, float], n: int, nodes: int) -> complex:
    x, w = legendre.leggauss(nodes)
    phase = np.zeros((nodes,) * n, dtype=np.float64)
    for e, c in coeffs.items():
        term = np.full((), c, dtype=np.float64)
        for v, ev in enumerate(e):
            if ev:
                shape = [1] * n
                shape[v] = nodes
                term = term * (x ** ev).reshape(shape)
        phase = phase + term
    weight = np.ones((), dtype=np.float64)
    for v in range(n):
        shape = [1] * n
        shape[v] = nodes
        weight = weight * w.reshape(shape)
    return complex((np.exp(2j * np.pi * phase) * weight).sum())


def _separable_value(coeffs: dict[Monomial, float], n: int, nodes: int) -> complex:
    x, w = legendre.leggauss(nodes)
    total = complex(1.0, 0.0)
    for v in range(n):
        phase = np.zeros(nodes, dtype=np.float64)
        for e, c in coeffs.items():
            if e[v]:
                phase += c * x ** e[v]
        total *= complex((np.exp(2j * np.pi * phase) * w).sum())
    return total


def osc_integral(spec: OscIntegralSpec, system: FormSystem,
                 cap: int = OSC_DIMENSION_CAP,
                 budget: int = DEFAULT_TENSOR_BUDGET) -> OscIntegralResult:
    """Box integral of e(gamma.f(t) + sum_j gamma_j t^j) over [-1,1]^n.

    Tensor-product Gauss-Legendre quadrature; the error estimate compares the
    requested node count with a doubled rule.  When every active monomial
    involves a single variable the tensor sum factors exactly into per-axis
    sums, which is used to evaluate high-dimensional separable phases at a
    cost linear in the dimension.
    """
    n = system.n
    if n > cap:
        raise BudgetExceededError("dimension %d exceeds cap %d" % (n, cap))
    coeffs = _phase_coefficients(spec, system)
    separable = all(sum(1 for ev in e if ev) <= 1 for e in coeffs)
    nodes = spec.quadrature.nodes_per_axis

    if separable:
        coarse = _separable_value(coeffs, n, nodes)
        fine = _separable_value(coeffs, n, 2 * nodes)
        return OscIntegralResult(value=fine, error_estimate=abs(fine - coarse),
                                 nodes_per_axis=2 * nodes, separable=True)

    if nodes ** n > budget:
        raise BudgetExceededError(
            "tensor grid %d^%d exceeds budget %d" % (nodes, n, budget))
    coarse = _tensor_value(coeffs, n, nodes)
    if (2 * nodes) ** n <= budget:
        fine = _tensor_value(coeffs, n, 2 * nodes)
        used = 2 * nodes
    else:
        fine, coarse = coarse, _tensor_value(coeffs, n, max(2, nodes // 2))
        used = nodes
    return OscIntegralResult(value=fine, error_estimate=abs(fine - coarse),
                             nodes_per_axis=used, separable=False)


# ---------------------------------------------------------------------------
# assembled main-term value


@dataclass(frozen=True)
class StarResult:
    value: complex
    complete: complex
    oscillatory: complex
    osc_error: float
    unit: complex
    gamma: tuple
    gamma_diamond: dict
    q: int
    r: int
    D: int


def _float_of(value) -> float:
    if isinstance(value, ExactReal):
        return float(value)
    return float(value)


def s_star(alpha: Sequence, certificates: CertificateBundle,
           system: FormSystem, expansion: ShiftExpansion, mu: ExactReal,
           P: int, rule: QuadratureRule | None = None,
           check_identities: bool = True,
           budget: int = DEFAULT_POINT_BUDGET) -> StarResult:
    """Main-term approximation P^n (Dr)^-n S_{r,D,q} I(gamma) e(alpha.f(mu*1)).

    ``gamma`` rescales the distance from alpha to its window approximation by
    P^d, and each lower-degree coordinate rescales the simultaneous
    approximation gap by P^{|j|}.  Certificate compatibility identities are
    verified first unless explicitly disabled.
    """
    n, d = system.n, system.d
    birch, baker = certificates.birch, certificates.baker
    q, r = birch.q, baker.r
    D, _ = certificates.top_solution()
    if (D * r) % q:
        raise InconsistentCertificatesError("q does not divide D*r")
    if check_identities:
        report = identity_checks(expansion, birch, baker, certificates.special)
        if not report.all_pass:
            raise InconsistentCertificatesError(
                "certificate identities failed: " + "; ".join(report.details))

    alpha = tuple(a if isinstance(a, ExactReal) else Fraction(a) for a in alpha)
    gamma = []
    for k in range(system.count):
        z = alpha[k] - Fraction(birch.numerators[k], q)
        gamma.append(float(P) ** d * _float_of(z))
    omega = omega_values(expansion, alpha, mu)
    gamma_diamond: dict[Monomial, float] = {}
    for e, w in omega.items():
        j = sum(e)
        if j > d - 1:
            continue
        z = w - ExactReal.rational(Fraction(baker.numerator(e), r))
        gd = float(P) ** j * float(z)
        if gd or baker.numerator(e):
            gamma_diamond[e] = gd

    a_dagger = {e: c for e, c in baker.numerators.items() if sum(e) <= d - 1}
    complete = complete_sum(r, D, q, birch.numerators, a_dagger, system,
                            expansion, budget=budget)
    spec = OscIntegralSpec(gamma=tuple(gamma), gamma_diamond=gamma_diamond,
                           quadrature=rule or QuadratureRule())
    osc = osc_integral(spec, system)

    mu_pows = _mu_power_fractions(mu, d)
    unit_phase = Fraction(0)
    for k in range(system.count):
        a_k = alpha[k]
        a_frac = a_k.enclosure(Fraction(1, 10 ** 45)).mid \
            if isinstance(a_k, ExactReal) else a_k
        unit_phase += a_frac * expansion.constant_term(k) * mu_pows[d]
    unit_frac = unit_phase - (unit_phase.numerator // unit_phase.denominator)
    unit = cmath.exp(complex(0.0, 2.0 * math.pi * float(unit_frac)))

    value = (float(P) ** n / float(D * r) ** n) * complete * osc.value * unit
    return StarResult(value=value, complete=complete, oscillatory=osc.value,
                      osc_error=osc.error_estimate, unit=unit,
                      gamma=tuple(gamma), gamma_diamond=gamma_diamond,
                      q=q, r=r, D=D)


def decay_witness(alpha: Sequence, P: int, certificates: CertificateBundle,
                  mu: ExactReal, d: int) -> float:
    """Scalar witness (q + P^d |q a - a|)^-1 (Er + P^{d-1} |Er mu a - a2|)^-1.

    Distances are max-norm over the coordinates.  Always in (0, 1].
    """
    birch = certificates.birch
    q = birch.q
    first_dist = 0.0
    for k, a_k in enumerate(alpha):
        z = (a_k if isinstance(a_k, ExactReal) else ExactReal.rational(Fraction(a_k)))
        diff = z * ExactReal.rational(q) - ExactReal.rational(birch.numerators[k])
        first_dist = max(first_dist, abs(float(diff)))
    first = q + float(P) ** d * first_dist

    E, a2 = certificates.second_solution()
    r = certificates.baker.r
    second_dist = 0.0
    for k, a_k in enumerate(alpha):
        z = (a_k if isinstance(a_k, ExactReal) else ExactReal.rational(Fraction(a_k)))
        val = z * mu * ExactReal.rational(E * r) - ExactReal.rational(a2[k])
        second_dist = max(second_dist, abs(float(val)))
    second = E * r + float(P) ** (d - 1) * second_dist
    return 1.0 / (first * second)


# ---------------------------------------------------------------------------
# diagnostics


def osc_decay_report(system: FormSystem, magnitudes: Sequence[float],
                     rule: QuadratureRule | None = None) -> list[tuple[float, float]]:
    """Tabulate |I(gamma, 0)| as the top-degree phase magnitude grows.

    Returns (magnitude, modulus) pairs; the modulus should trend downward for
    a nondegenerate system, but this is a diagnostic, not an assertion.
    """
    rows = []
    r_count = system.count
    for mag in magnitudes:
        gamma = tuple(float(mag) if k == 0 else 0.0 for k in range(r_count))
        spec = OscIntegralSpec(gamma=gamma, gamma_diamond={},
                               quadrature=rule or QuadratureRule())
        res = osc_integral(spec, system)
        rows.append((float(mag), abs(res.value)))
    return rows
