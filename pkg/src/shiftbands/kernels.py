"""Band-limited smoothing kernels that sandwich a band indicator.

The pair of kernels built here has compactly supported Fourier transforms of
trapezoidal shape.  The minus kernel's transform sits below the indicator of
``(-eta, eta)`` and the plus kernel's transform sits above it, so integrating
an exponential sum against the two kernels traps the exact band count between
two smooth quantities.  The transform plateau and ramp are controlled by a
single resolution parameter ``rho``; the scheduling helper ties ``rho`` to the
sample size ``P`` through a slowly growing function so the sandwich tightens
as ``P`` grows.

All kernel evaluations are plain numpy ufunc arithmetic; the only nontrivial
numerics live in :func:`kernel_ft_quadrature`, a deliberately independent
slow route (panel quadrature plus an analytic sine-integral tail) used to
cross-check the closed-form transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from numpy.polynomial import legendre
from scipy.special import sici

PI_SQ = math.pi * math.pi
GL_NODES_PER_PANEL = 16
MAX_CYCLES_PER_PANEL = 1.5


@dataclass(frozen=True)
class Schedule:
    """Resolution parameters tied to a sample size."""

    P: int
    delta: float
    eta: float
    T: float
    L: float
    rho: float

    @property
    def truncation(self) -> float:
        """Default integration cutoff for arcs weighted by these kernels."""
        return 10.0 * self.T


def schedule(P: int, delta, eta) -> Schedule:
    """Pick the kernel resolution for sample size ``P``.

    The scale ``T`` grows like ``P**delta`` for small ``P`` but is capped at
    ``1 + log(1 + P)``, keeping the plateau/ramp ratio logarithmic in ``P``.
    ``L`` is clamped below by 1 so ``rho`` never exceeds ``eta``.
    """
    if P < 1:
        raise ValueError("P must be a positive integer")
    delta = float(delta)
    eta = float(eta)
    if not 0 < eta:
        raise ValueError("eta must be positive")
    T = min(float(P) ** delta, 1.0 + math.log1p(P))
    L = max(1.0, math.log(T))
    return Schedule(P=P, delta=delta, eta=eta, T=T, L=L, rho=eta / L)


def kernel(sign: int, alpha, eta: float, rho: float):
    """Evaluate the band kernel with the given sign at ``alpha``.

    Written as a product of two normalized sinc factors, which is exact and
    stable at ``alpha = 0`` where the value is ``2*eta + sign*rho``.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    _validate_shape(eta, rho)
    alpha = np.asarray(alpha, dtype=np.float64)
    width = 2.0 * eta + sign * rho
    out = width * np.sinc(alpha * rho) * np.sinc(alpha * width)
    return out if out.shape else float(out)


def product_kernel(sign: int, alpha, eta: float, rho: float) -> float:
    """Product of univariate kernels over the coordinates of ``alpha``."""
    values = kernel(sign, np.asarray(alpha, dtype=np.float64), eta, rho)
    return float(np.prod(values))


def kernel_ft(sign: int, t, eta: float, rho: float):
    """Closed-form Fourier transform of :func:`kernel`: a trapezoid.

    For the minus sign the plateau is ``|t| <= eta - rho`` and the support
    ends at ``|t| = eta``; for the plus sign the plateau is ``|t| <= eta`` and
    the support ends at ``|t| = eta + rho``.  Both ramps are linear with
    slope ``1/rho``.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    _validate_shape(eta, rho)
    t = np.abs(np.asarray(t, dtype=np.float64))
    if sign < 0:
        plateau_end, support_end = eta - rho, eta
    else:
        plateau_end, support_end = eta, eta + rho
    out = np.clip((support_end - t) / rho, 0.0, 1.0)
    # exact plateau, immune to rounding in the clip expression
    out = np.where(t <= plateau_end, 1.0, out)
    return out if out.shape else float(out)


def band_indicator(t, eta: float):
    """Indicator of the open band ``|t| < eta``."""
    t = np.asarray(t, dtype=np.float64)
    out = (np.abs(t) < eta).astype(np.float64)
    return out if out.shape else float(out)


def kernel_abs_bound(alpha, eta: float, rho: float):
    """Pointwise bound ``min(2*eta + rho, 1/(pi^2 rho alpha^2))``.

    Valid for both signs: each kernel is a difference of two cosines over
    ``2 pi^2 rho alpha^2``, and at the origin the larger sup is the plus
    kernel's peak.
    """
    _validate_shape(eta, rho)
    alpha = np.asarray(alpha, dtype=np.float64)
    flat = 2.0 * eta + rho
    with np.errstate(divide="ignore"):
        decay = 1.0 / (PI_SQ * rho * alpha * alpha)
    out = np.minimum(flat, decay)
    return out if out.shape else float(out)


def kernel_tail_bound(cutoff: float, eta: float, rho: float) -> float:
    """Bound for ``integral of |kernel|`` over ``|alpha| > cutoff``.

    Integrates the ``1/(pi^2 rho alpha^2)`` envelope, so it is valid for both
    signs whenever ``cutoff > 0``.
    """
    _validate_shape(eta, rho)
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    return 2.0 / (PI_SQ * rho * cutoff)


def kernel_l1_bound(eta: float, rho: float) -> float:
    """Bound for the total integral of ``|kernel|`` over the line.

    Splits at ``|alpha| = 1/(pi sqrt(rho (2 eta + rho)))`` where the flat and
    decaying envelopes cross.
    """
    _validate_shape(eta, rho)
    crossover = 1.0 / (math.pi * math.sqrt(rho * (2.0 * eta + rho)))
    return 2.0 * (2.0 * eta + rho) * crossover + kernel_tail_bound(crossover, eta, rho)


def _validate_shape(eta: float, rho: float) -> None:
    if not (0 < rho <= eta):
        raise ValueError("need 0 < rho <= eta")


# ---------------------------------------------------------------------------
# slow second route for the transform


def _tail_cos_over_sq(freq: float, cutoff: float) -> float:
    # integral over (cutoff, inf) of cos(2 pi freq a) / a^2 da
    if freq == 0.0:
        return 1.0 / cutoff
    k = 2.0 * math.pi * abs(freq)
    si, _ = sici(k * cutoff)
    return math.cos(k * cutoff) / cutoff - k * (0.5 * math.pi - si)


def kernel_ft_quadrature(sign: int, ts, eta: float, rho: float,
                         cutoff: float | None = None) -> np.ndarray:
    """Transform of :func:`kernel` by direct integration.

    Composite Gauss-Legendre panels cover ``[0, cutoff]`` with a panel width
    tied to the fastest oscillation present; the remaining tail is reduced to
    sine integrals of the kernel's two cosine components, so the result does
    not depend on where the integral is truncated.  Used as an independent
    check on :func:`kernel_ft`.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    _validate_shape(eta, rho)
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if cutoff is None:
        cutoff = 50.0 / rho

    t_max = float(np.max(np.abs(ts))) if ts.size else 0.0
    max_freq = 2.0 * eta + rho + t_max
    panel_width = MAX_CYCLES_PER_PANEL / max_freq
    n_panels = max(8, int(math.ceil(cutoff / panel_width)))
    base_nodes, base_weights = legendre.leggauss(GL_NODES_PER_PANEL)

    edges = np.linspace(0.0, cutoff, n_panels + 1)
    half = np.diff(edges) / 2.0
    mids = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mids[:, None] + half[:, None] * base_nodes[None, :]).ravel()
    weights = (half[:, None] * base_weights[None, :]).ravel()

    kvals = kernel(sign, nodes, eta, rho) * weights
    # outer product of quadrature nodes against target points, one pass
    head = 2.0 * (np.cos(2.0 * math.pi * np.outer(ts, nodes)) @ kvals)

    if sign < 0:
        inner, outer = eta - rho, eta
    else:
        inner, outer = eta, eta + rho
    tail = np.empty_like(ts)
    for i, t in enumerate(ts):
        parts = (_tail_cos_over_sq(inner - t, cutoff)
                 + _tail_cos_over_sq(inner + t, cutoff)
                 - _tail_cos_over_sq(outer - t, cutoff)
                 - _tail_cos_over_sq(outer + t, cutoff))
        tail[i] = parts / (2.0 * PI_SQ * rho)
    return head + tail


# ---------------------------------------------------------------------------
# sandwich diagnostics


@dataclass(frozen=True)
class SandwichRow:
    t: float
    lower: float
    indicator: float
    upper: float

    @property
    def ordered(self) -> bool:
        return self.lower <= self.indicator <= self.upper

    @property
    def within_unit(self) -> bool:
        return 0.0 <= self.lower and self.upper <= 1.0


def sandwich_grid(eta: float, rho: float, half_points: int = 100,
                  span_factor: float = 2.0) -> list[SandwichRow]:
    """Tabulate both transforms against the indicator on a symmetric grid.

    The default grid has ``2 * half_points + 1`` equally spaced points
    covering ``[-span_factor*eta, span_factor*eta]``.
    """
    _validate_shape(eta, rho)
    step = span_factor * eta / half_points
    rows = []
    for j in range(-half_points, half_points + 1):
        t = j * step
        rows.append(SandwichRow(
            t=t,
            lower=float(kernel_ft(-1, t, eta, rho)),
            indicator=float(band_indicator(t, eta)),
            upper=float(kernel_ft(+1, t, eta, rho)),
        ))
    return rows


def sandwich_ok(rows: Iterable[SandwichRow]) -> bool:
    return all(r.ordered and r.within_unit for r in rows)


def exact_ft_value(sign: int, t: Fraction, eta: Fraction, rho: Fraction) -> Fraction:
    """Trapezoid transform evaluated in exact rational arithmetic."""
    t = abs(Fraction(t))
    eta = Fraction(eta)
    rho = Fraction(rho)
    if sign < 0:
        plateau_end, support_end = eta - rho, eta
    else:
        plateau_end, support_end = eta, eta + rho
    if t <= plateau_end:
        return Fraction(1)
    if t >= support_end:
        return Fraction(0)
    return (support_end - t) / rho
