"""Exact real arithmetic: intervals, quadratic irrationals, sign decisions."""

import math
import random
from fractions import Fraction
from itertools import islice

import pytest

from shiftbands.exact import (ExactReal, RatInterval,
                              continued_fraction_of_rational,
                              convergents_from_coeffs, floor_rational_power,
                              nearest_int, power_bounds,
                              strict_floor_rational_power)

SEED = 20240811


def test_interval_arithmetic_contains_true_values():
    rng = random.Random(SEED)
    for _ in range(200):
        a = Fraction(rng.randint(-50, 50), rng.randint(1, 20))
        b = a + Fraction(rng.randint(0, 5), rng.randint(1, 20))
        c = Fraction(rng.randint(-50, 50), rng.randint(1, 20))
        iv = RatInterval(a, b)
        x = a + (b - a) / 3
        assert iv.lo <= x <= iv.hi
        assert (iv + c).lo <= x + c <= (iv + c).hi
        assert (iv * c).lo <= x * c <= (iv * c).hi
        e = rng.randint(0, 4)
        assert (iv ** e).lo <= x ** e <= (iv ** e).hi
        assert abs(iv).lo <= abs(x) <= abs(iv).hi


def test_interval_comparisons_are_tri_state():
    iv = RatInterval(Fraction(1), Fraction(2))
    assert iv.lt(3) is True
    assert iv.lt(0) is False
    assert iv.lt(Fraction(3, 2)) is None
    assert iv.gt(0) is True
    assert iv.le(2) is True


def test_constructor_validation():
    with pytest.raises(ValueError):
        ExactReal.quadratic(0, 1, 4)  # square discriminant
    with pytest.raises(ValueError):
        ExactReal.quadratic(1, 0, 2)  # no irrational part
    with pytest.raises(ValueError):
        ExactReal.decimal("1.25")  # too few digits to trust
    ExactReal.decimal("1.25", allow_low_precision=True)


def test_sqrt2_enclosure_against_integer_sqrt():
    # independent oracle: isqrt(2 * 10^160) brackets sqrt(2) * 10^80
    r2 = ExactReal.sqrt(2)
    iv = r2.enclosure(Fraction(1, 10 ** 70))
    root = math.isqrt(2 * 10 ** 160)
    lo = Fraction(root, 10 ** 80)
    hi = Fraction(root + 1, 10 ** 80)
    assert iv.lo <= hi and lo <= iv.hi
    assert iv.width <= Fraction(1, 10 ** 70)


def test_quadratic_ring_arithmetic_is_exact():
    r2 = ExactReal.sqrt(2)
    prod = (1 + r2) * (1 - r2)
    assert prod.kind == "rational" and prod.a == -1
    sq = r2 * r2
    assert sq.kind == "rational" and sq.a == 2
    mixed = r2 + ExactReal.sqrt(3)
    assert mixed.kind == "decimal"
    assert mixed.err <= Fraction(1, 10 ** 100)
    assert abs(float(mixed) - (math.sqrt(2) + math.sqrt(3))) < 1e-12


def test_poly_sign_decides_exactly():
    r2 = ExactReal.sqrt(2)
    assert r2.poly_sign([-2, 0, 1]) == 0          # x^2 - 2
    assert r2.poly_sign([Fraction(-201, 100), 0, 1]) == -1
    assert r2.poly_sign([Fraction(-199, 100), 0, 1]) == 1
    third = ExactReal.rational(Fraction(1, 3))
    assert third.poly_sign([-1, 3]) == 0
    dec = ExactReal.decimal("0." + "3" * 60)
    assert dec.poly_sign([-1, 3]) is None         # straddles within stated error
    assert dec.poly_sign([-2, 3]) == -1


def test_poly_sign_random_rational_oracle():
    rng = random.Random(SEED + 1)
    for _ in range(300):
        x = Fraction(rng.randint(-40, 40), rng.randint(1, 17))
        coeffs = [Fraction(rng.randint(-9, 9)) for _ in range(4)]
        value = sum(c * x ** i for i, c in enumerate(coeffs))
        expect = (value > 0) - (value < 0)
        assert ExactReal.rational(x).poly_sign(coeffs) == expect


def test_power_bounds_and_floors():
    iv = power_bounds(2, Fraction(1, 2))
    root = math.isqrt(2 * 10 ** 40)  # brackets sqrt(2) * 10^20
    assert iv.lo <= Fraction(root + 1, 10 ** 20)
    assert Fraction(root, 10 ** 20) <= iv.hi
    assert floor_rational_power(2, 10, 3) == 10   # 2^(10/3) = 10.079...
    assert floor_rational_power(2, 6, 3) == 4     # exact power
    assert strict_floor_rational_power(2, 6, 3) == 3
    rng = random.Random(SEED + 2)
    for _ in range(100):
        base = rng.randint(2, 9)
        num = rng.randint(1, 12)
        den = rng.randint(1, 6)
        got = floor_rational_power(base, num, den)
        # oracle: integer den-th root of base^num
        target = base ** num
        assert got ** den <= target < (got + 1) ** den


def test_nearest_int():
    assert nearest_int(RatInterval(Fraction(24, 10), Fraction(245, 100))) == 2
    assert nearest_int(RatInterval(Fraction(-31, 10), Fraction(-29, 10))) == -3


def test_continued_fractions_round_trip():
    coeffs = list(continued_fraction_of_rational(Fraction(355, 113)))
    assert coeffs == [3, 7, 16]
    back = list(convergents_from_coeffs(coeffs))[-1]
    assert back == Fraction(355, 113)
    rng = random.Random(SEED + 3)
    for _ in range(100):
        x = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 4))
        cs = list(continued_fraction_of_rational(x))
        assert list(convergents_from_coeffs(cs))[-1] == x


def test_sqrt2_convergents_match_pell_numbers():
    r2 = ExactReal.sqrt(2)
    assert list(islice(r2.cf_coefficients(), 5)) == [1, 2, 2, 2, 2]
    assert r2.convergents(4) == [Fraction(1), Fraction(3, 2), Fraction(7, 5),
                                 Fraction(17, 12)]
    # every convergent p/q of sqrt(2) satisfies |p^2 - 2 q^2| = 1
    for frac in r2.convergents(10):
        assert abs(frac.numerator ** 2 - 2 * frac.denominator ** 2) == 1


def test_abs_cmp_power():
    r2 = ExactReal.sqrt(2)
    assert r2.abs_cmp_power(2, Fraction(1, 2), strict=False) is True
    assert r2.abs_cmp_power(2, Fraction(1, 2), strict=True) is False
    assert (r2 * r2).abs_cmp_power(3, Fraction(1), strict=True) is True
