"""Exact rational intervals and exact real numbers.

Counting and certificate decisions in this package are never made from bare
floats.  Every comparison that matters goes through one of two routes:

* a ``RatInterval`` (closed interval with ``Fraction`` endpoints) whose
  three-way comparisons return ``True`` / ``False`` / ``None``, where ``None``
  means the interval straddles the threshold and the caller must refine or
  flag the point; or
* the symbolic route ``ExactReal.poly_sign``, which decides the sign of an
  integer-coefficient polynomial evaluated at the shift exactly whenever the
  shift is rational or a quadratic irrational.

``ExactReal`` models the uniform shift: a plain rational, a quadratic
irrational (a + b*sqrt(disc)) / den, or a decimal literal of stated precision.
The first two kinds can be refined to arbitrary accuracy; a decimal literal
is an interval of fixed width and points that cannot be decided inside it are
reported as boundary flags by callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

Rational = Union[int, Fraction]


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction")


class PrecisionError(RuntimeError):
    """A rigorous decision was requested beyond the stated precision."""


class RatInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = _to_fraction(lo)
        hi = _to_fraction(hi)
        if lo > hi:
            raise ValueError("interval endpoints out of order")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, value) -> "RatInterval":
        v = _to_fraction(value)
        return cls(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __repr__(self) -> str:
        return f"RatInterval({self.lo}, {self.hi})"

    def __add__(self, other) -> "RatInterval":
        o = other if isinstance(other, RatInterval) else RatInterval.point(other)
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other) -> "RatInterval":
        return self + (-(other if isinstance(other, RatInterval) else RatInterval.point(other)))

    def __rsub__(self, other) -> "RatInterval":
        return (-self) + other

    def __mul__(self, other) -> "RatInterval":
        o = other if isinstance(other, RatInterval) else RatInterval.point(other)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RatInterval(min(cands), max(cands))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "RatInterval":
        if not isinstance(e, int) or e < 0:
            raise ValueError("interval powers take non-negative integer exponents")
        if e == 0:
            return RatInterval.point(1)
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def __abs__(self) -> "RatInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(Fraction(0), max(-self.lo, self.hi))

    # Three-way comparisons: True / False when every point of the interval
    # agrees, None when the threshold cuts the interval.
    def lt(self, bound) -> Optional[bool]:
        b = _to_fraction(bound)
        if self.hi < b:
            return True
        if self.lo >= b:
            return False
        return None

    def le(self, bound) -> Optional[bool]:
        b = _to_fraction(bound)
        if self.hi <= b:
            return True
        if self.lo > b:
            return False
        return None

    def gt(self, bound) -> Optional[bool]:
        b = _to_fraction(bound)
        if self.lo > b:
            return True
        if self.hi <= b:
            return False
        return None

    def __float__(self) -> float:
        return float(self.mid)


def _sqrt_enclosure(disc: int, digits: int) -> RatInterval:
    # floor/ceil of sqrt(disc) * 10**digits via integer square root
    scale = 10 ** digits
    s = math.isqrt(disc * scale * scale)
    return RatInterval(Fraction(s, scale), Fraction(s + 1, scale))


def _sign_of_quadratic(u: Fraction, v: Fraction, disc: int) -> int:
    """Exact sign of u + v*sqrt(disc) for nonsquare disc > 0."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return 1 if v > 0 else -1
    if u > 0 and v > 0:
        return 1
    if u < 0 and v < 0:
        return -1
    # opposite signs: compare u^2 against v^2 * disc
    left = u * u
    right = v * v * disc
    if left == right:
        raise ArithmeticError("sqrt discriminant is a perfect square")
    if left > right:
        return 1 if u > 0 else -1
    return 1 if v > 0 else -1


def continued_fraction_of_rational(x: Fraction) -> Iterator[int]:
    """Coefficients of the (finite) continued fraction of a rational."""
    p, q = x.numerator, x.denominator
    while q:
        a = p // q
        yield a
        p, q = q, p - a * q


def convergents_from_coeffs(coeffs) -> Iterator[Fraction]:
    p_prev, p_cur = 0, 1
    q_prev, q_cur = 1, 0
    for a in coeffs:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        yield Fraction(p_cur, q_cur)


@dataclass(frozen=True)
class ExactReal:
    """A real shift value with a exactness kind.

    kind "rational":  value = a / den                      (b, disc unused)
    kind "quadratic": value = (a + b*sqrt(disc)) / den     (disc > 0 nonsquare, b != 0)
    kind "decimal":   value = a / den with |error| <= err  (den a power of ten)
    """

    kind: str
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    disc: int = 0
    err: Fraction = Fraction(0)

    # stated decimal literals shorter than this are refused unless forced
    MIN_DECIMAL_DIGITS = 50

    @staticmethod
    def rational(value) -> "ExactReal":
        return ExactReal(kind="rational", a=_to_fraction(value))

    @staticmethod
    def quadratic(a, b, disc: int, den=1) -> "ExactReal":
        """(a + b*sqrt(disc)) / den with exact rational a, b, den."""
        if disc <= 0 or math.isqrt(disc) ** 2 == disc:
            raise ValueError("disc must be a positive nonsquare integer")
        af = _to_fraction(a) / _to_fraction(den)
        bf = _to_fraction(b) / _to_fraction(den)
        if bf == 0:
            raise ValueError("quadratic kind requires a nonzero sqrt part")
        return ExactReal(kind="quadratic", a=af, b=bf, disc=disc)

    @staticmethod
    def sqrt(disc: int) -> "ExactReal":
        return ExactReal.quadratic(0, 1, disc)

    @staticmethod
    def decimal(literal: str, allow_low_precision: bool = False) -> "ExactReal":
        """A decimal literal carrying its own precision.

        The value is taken to be the literal plus an unknown error of at most
        one unit in the last written decimal place.
        """
        text = literal.strip()
        if "." not in text:
            raise ValueError("decimal kind wants a fractional literal; use rational() for integers")
        frac_digits = len(text.split(".", 1)[1])
        if frac_digits < ExactReal.MIN_DECIMAL_DIGITS and not allow_low_precision:
            raise ValueError(
                f"decimal literal has {frac_digits} fractional digits; "
                f"need >= {ExactReal.MIN_DECIMAL_DIGITS} (or allow_low_precision=True)"
            )
        return ExactReal(kind="decimal", a=Fraction(text), err=Fraction(1, 10 ** frac_digits))

    # -- interval access ---------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.kind in ("rational", "quadratic")

    def enclosure(self, max_width: Fraction = Fraction(1, 10 ** 60)) -> RatInterval:
        """An interval containing the value, of width <= max_width when refinable."""
        if self.kind == "rational":
            return RatInterval.point(self.a)
        if self.kind == "decimal":
            # fixed precision; callers see width > max_width and must flag
            return RatInterval(self.a - self.err, self.a + self.err)
        digits = 1
        while Fraction(abs(self.b), 10 ** digits) > max_width:
            digits += 1
        root = _sqrt_enclosure(self.disc, digits)
        return RatInterval.point(self.a) + root * self.b

    def power_enclosure(self, e: int, max_width: Fraction = Fraction(1, 10 ** 60)) -> RatInterval:
        if e == 0:
            return RatInterval.point(1)
        # width of x^e grows like e * |x|^(e-1) * width(x)
        bound = abs(self.a) + abs(self.b) * (math.isqrt(self.disc) + 1) + self.err + 2
        shrink = Fraction(e) * bound ** (e - 1) + 1
        return self.enclosure(max_width / shrink) ** e

    def __float__(self) -> float:
        return float(self.enclosure(Fraction(1, 10 ** 30)).mid)

    # -- exact sign decisions ----------------------------------------------

    def poly_sign(self, coeffs: Sequence[Rational]) -> Optional[int]:
        """Sign of sum(coeffs[i] * value**i), or None if undecidable.

        Exact for rational and quadratic kinds.  For a decimal literal the
        polynomial is evaluated over the stated interval and ``None`` is
        returned when the interval straddles zero.
        """
        cs = [_to_fraction(c) for c in coeffs]
        if self.kind == "rational":
            acc = Fraction(0)
            for c in reversed(cs):
                acc = acc * self.a + c
            return (acc > 0) - (acc < 0)
        if self.kind == "quadratic":
            u, v = Fraction(0), Fraction(0)  # u + v*sqrt(disc)
            for c in reversed(cs):
                u, v = u * self.a + v * self.b * self.disc + c, u * self.b + v * self.a
            return _sign_of_quadratic(u, v, self.disc)
        iv = RatInterval.point(0)
        x = RatInterval(self.a - self.err, self.a + self.err)
        for c in reversed(cs):
            iv = iv * x + RatInterval.point(c)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        return None

    # -- arithmetic ----------------------------------------------------------
    #
    # Rationals and quadratics over one discriminant are closed under ring
    # operations.  Mixing discriminants, or touching a decimal literal,
    # downgrades the result to a decimal-kind interval (width tracked
    # rigorously), which keeps every later comparison honest.

    _DOWNGRADE_WIDTH = Fraction(1, 10 ** 120)

    def _as_decimal_kind(self) -> "ExactReal":
        if self.kind == "decimal":
            return self
        iv = self.enclosure(self._DOWNGRADE_WIDTH)
        return ExactReal(kind="decimal", a=iv.mid, err=iv.width / 2)

    @staticmethod
    def _coerce(x) -> "ExactReal":
        if isinstance(x, ExactReal):
            return x
        return ExactReal.rational(_to_fraction(x))

    def __add__(self, other) -> "ExactReal":
        o = self._coerce(other)
        a, b = self, o
        if a.kind == "rational" and b.kind == "rational":
            return ExactReal(kind="rational", a=a.a + b.a)
        if a.kind != "decimal" and b.kind != "decimal":
            if a.kind == "rational":
                return ExactReal(kind="quadratic", a=a.a + b.a, b=b.b, disc=b.disc)
            if b.kind == "rational":
                return ExactReal(kind="quadratic", a=a.a + b.a, b=a.b, disc=a.disc)
            if a.disc == b.disc:
                s = a.b + b.b
                if s == 0:
                    return ExactReal(kind="rational", a=a.a + b.a)
                return ExactReal(kind="quadratic", a=a.a + b.a, b=s, disc=a.disc)
        da, db = a._as_decimal_kind(), b._as_decimal_kind()
        return ExactReal(kind="decimal", a=da.a + db.a, err=da.err + db.err)

    __radd__ = __add__

    def __neg__(self) -> "ExactReal":
        return ExactReal(kind=self.kind, a=-self.a, b=-self.b, disc=self.disc, err=self.err)

    def __sub__(self, other) -> "ExactReal":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactReal":
        return (-self) + other

    def __mul__(self, other) -> "ExactReal":
        o = self._coerce(other)
        a, b = self, o
        if a.kind == "rational" and b.kind == "rational":
            return ExactReal(kind="rational", a=a.a * b.a)
        if a.kind != "decimal" and b.kind != "decimal":
            if a.kind == "rational":
                a, b = b, a
            if b.kind == "rational":
                if b.a == 0:
                    return ExactReal.rational(0)
                return ExactReal(kind="quadratic", a=a.a * b.a, b=a.b * b.a, disc=a.disc)
            if a.disc == b.disc:
                u = a.a * b.a + a.b * b.b * a.disc
                v = a.a * b.b + a.b * b.a
                if v == 0:
                    return ExactReal(kind="rational", a=u)
                return ExactReal(kind="quadratic", a=u, b=v, disc=a.disc)
        da, db = a._as_decimal_kind(), b._as_decimal_kind()
        err = abs(da.a) * db.err + abs(db.a) * da.err + da.err * db.err
        return ExactReal(kind="decimal", a=da.a * db.a, err=err)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "ExactReal":
        if not isinstance(e, int) or e < 0:
            raise ValueError("ExactReal powers take non-negative integer exponents")
        out = ExactReal.rational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def sign(self) -> Optional[int]:
        return self.poly_sign([0, 1])

    def cmp_fraction(self, bound) -> Optional[int]:
        """Exact sign of (value - bound); None only for undecidable decimals."""
        return (self - _to_fraction(bound)).sign()

    def abs_cmp_power(self, base: int, expo: Fraction, strict: bool) -> Optional[bool]:
        """Decide |value| < base**expo (strict) or <= (non-strict), rigorously.

        Fast path: compare interval enclosures against rational bounds on the
        power.  Tie-break for exact kinds: |x|**den vs base**num in exact
        field arithmetic (den-th powers commute with the comparison since
        both sides are non-negative).
        """
        expo = Fraction(expo)
        t = power_bounds(base, expo)
        y = abs(self.enclosure(Fraction(1, 10 ** 40)))
        for digits in (40, 80, 160):
            t = power_bounds(base, expo, digits=digits + 20)
            y = abs(self.enclosure(Fraction(1, 10 ** digits)))
            if y.hi < t.lo:
                return True
            if y.lo > t.hi:
                return False
        if not self.is_exact:
            return None
        # exact tie-break: x^(2 den) vs base^(2 num) removes sign and root
        den, num = expo.denominator, expo.numerator
        lhs = self ** (2 * den)
        rhs = Fraction(base) ** (2 * num)
        s = lhs.cmp_fraction(rhs)
        if s < 0:
            return True
        if s > 0:
            return False
        return not strict

    # -- continued fractions -----------------------------------------------

    def cf_coefficients(self) -> Iterator[int]:
        if self.kind == "rational":
            yield from continued_fraction_of_rational(self.a)
            return
        if self.kind == "decimal":
            # coefficients are only certified while the tail error cannot
            # perturb them; stop once the convergent denominator is too large
            q_cur, q_prev = 1, 0
            for a in continued_fraction_of_rational(self.a):
                q_cur, q_prev = a * q_cur + q_prev, q_cur
                if 2 * self.err * q_cur * q_cur >= 1:
                    return
                yield a
            return
        # quadratic: bring (a + b*sqrt(disc))/1 to integer state
        #   x = (p + sqrt(D)) / q   with q | D - p^2
        bn, bd = self.b.numerator, self.b.denominator
        an, ad = self.a.numerator, self.a.denominator
        # scale so the sqrt has coefficient one: x = (an*bd + bn*ad*sqrt(disc)) / (ad*bd)
        p = an * bd
        c = bn * ad
        q = ad * bd
        if c < 0:
            p, c, q = -p, -c, -q
        D = c * c * self.disc
        if (D - p * p) % q != 0:
            p, D, q = p * abs(q), D * q * q, q * abs(q)
        while True:
            s = math.isqrt(D)
            if q > 0:
                a_i = (p + s) // q
            else:
                a_i = -((p + s) // (-q)) - 1
            yield a_i
            p = a_i * q - p
            q = (D - p * p) // q

    def convergents(self, count: int) -> list[Fraction]:
        """First ``count`` continued-fraction convergents p/q of the value."""
        out = []
        for conv in convergents_from_coeffs(self.cf_coefficients()):
            out.append(conv)
            if len(out) >= count:
                break
        return out


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _round_interval_out(iv: RatInterval, digits: int) -> RatInterval:
    scale = 10 ** digits
    lo = Fraction(_floor_frac(iv.lo * scale), scale)
    hi = Fraction(-_floor_frac(-iv.hi * scale), scale)
    return RatInterval(lo, hi)


def _sqrt_interval(iv: RatInterval, digits: int) -> RatInterval:
    if iv.lo < 0:
        raise ValueError("sqrt of an interval touching negatives")
    scale = 10 ** digits
    lo_scaled = (iv.lo.numerator * scale * scale) // iv.lo.denominator
    hi_scaled = -((-iv.hi.numerator * scale * scale) // iv.hi.denominator)
    lo = Fraction(math.isqrt(lo_scaled), scale)
    hi = Fraction(math.isqrt(hi_scaled) + 1, scale)
    return RatInterval(lo, hi)


def power_bounds(base: int, expo: Fraction, digits: int = 60) -> RatInterval:
    """Rigorous rational enclosure of base**expo for an integer base >= 1.

    Works bit by bit on the fractional exponent with interval square roots,
    so it stays fast even when the exponent denominator is enormous.
    """
    if base < 1:
        raise ValueError("base must be >= 1")
    expo = Fraction(expo)
    if base == 1:
        return RatInterval.point(1)
    m = _floor_frac(expo)
    frac = expo - m
    head = Fraction(base) ** m
    out = RatInterval.point(head)
    if frac:
        bits = 4 * digits + 16  # keeps the truncation slack below 10**-digits
        root = RatInterval.point(base)
        acc = RatInterval.point(1)
        for i in range(1, bits + 1):
            root = _sqrt_interval(root, digits + 10)
            if _floor_frac(frac * 2 ** i) & 1:
                acc = _round_interval_out(acc * root, digits + 10)
        # remaining exponent < 2**-bits; base**rem <= 1 + base * 2**(1-bits)
        slack = 1 + Fraction(base, 2 ** (bits - 1))
        out = out * RatInterval(acc.lo, acc.hi * slack)
    return _round_interval_out(out, digits) if expo != m else out


def nearest_int(iv: RatInterval) -> int:
    """Nearest integer to the midpoint of an interval (half rounds away from 0)."""
    m = iv.mid
    fl = m.numerator // m.denominator
    rem = m - fl
    if rem > Fraction(1, 2):
        return fl + 1
    if rem < Fraction(1, 2):
        return fl
    return fl + 1 if m >= 0 else fl


def floor_rational_power(base: int, num: int, den: int) -> int:
    """floor(base**(num/den)) for base >= 1, num >= 0, den >= 1, exactly."""
    if base < 1:
        raise ValueError("base must be >= 1")
    if num == 0 or base == 1:
        return 1
    target = base ** num
    k = int(round(base ** (num / den)))
    k = max(k, 1)
    while k ** den > target:
        k -= 1
    while (k + 1) ** den <= target:
        k += 1
    return k


def strict_floor_rational_power(base: int, num: int, den: int) -> int:
    """Largest integer strictly below base**(num/den)."""
    k = floor_rational_power(base, num, den)
    if k ** den == base ** num:
        return k - 1
    return k
