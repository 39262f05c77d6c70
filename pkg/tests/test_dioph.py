"""Rational approximation certificates and their consistency identities."""

import random
from dataclasses import replace
from fractions import Fraction

import pytest

from shiftbands.dioph import (AmbiguousCertificateError, BakerCertificate,
                              BirchCertificate, BudgetExceededError,
                              baker_search, birch_search, identity_checks,
                              omega_values, special_from_slices)
from shiftbands.exact import ExactReal
from shiftbands.forms import Form, FormSystem, taylor_shift

SEED = 90210

SQUARE = taylor_shift(FormSystem(forms=(Form(n=1, d=2, terms={(2,): 1}),),
                                 sigma=0))
PRODUCT = taylor_shift(FormSystem(forms=(Form(n=2, d=2, terms={(1, 1): 1}),),
                                  sigma=0))


def test_omega_values_hand_cases():
    r2 = ExactReal.sqrt(2)
    om = omega_values(SQUARE, (Fraction(1),), r2)
    two_r2 = r2 * 2
    assert (om[(1,)] - two_r2).sign() == 0
    assert (om[(2,)] - 1).sign() == 0
    zero = omega_values(SQUARE, (Fraction(0),), r2)
    assert all(v.sign() == 0 for v in zero.values())
    om2 = omega_values(PRODUCT, (Fraction(1, 2),), r2)
    half_r2 = r2 * Fraction(1, 2)
    assert (om2[(1, 0)] - half_r2).sign() == 0
    assert (om2[(0, 1)] - half_r2).sign() == 0
    assert (om2[(1, 1)] - Fraction(1, 2)).sign() == 0


def test_birch_search_hand_case():
    alpha = (Fraction(3, 7) + Fraction(1, 10 ** 9),)
    cert = birch_search(alpha, 100, Fraction(1, 2), 2)
    assert cert is not None
    assert cert.q == 7 and cert.numerators == (3,)


def test_birch_search_zero_and_absent():
    cert = birch_search((Fraction(0),), 64, Fraction(1, 4), 2)
    assert cert is not None and cert.q == 1 and cert.numerators == (0,)
    # sqrt(2) resists approximation in a tight window at small P
    none = birch_search((ExactReal.sqrt(2),), 16, Fraction(1, 8), 2)
    assert none is None


def test_birch_search_planted_recovery():
    rng = random.Random(SEED)
    found = 0
    for _ in range(60):
        q = rng.randint(2, 9)
        a = rng.randint(1, q - 1)
        while __import__("math").gcd(a, q) != 1:
            a = rng.randint(1, q - 1)
        eps = Fraction(rng.randint(-3, 3), 10 ** 10)
        alpha = (Fraction(a, q) + eps,)
        # window: cap >= 9 with threshold well under the competitor gap
        cert = birch_search(alpha, 6561, Fraction(1, 4), 2)
        if cert is None:
            continue
        found += 1
        assert cert.q == q and cert.numerators == (a,)
    assert found >= 55  # a few eps=0 repeats may reduce to smaller q


def test_baker_search_planted_rational():
    omega = {(1,): Fraction(5, 6), (2,): Fraction(1, 6)}
    cert = baker_search(omega, 4096, Fraction(22, 100))
    assert cert is not None
    assert cert.r == 6
    assert cert.numerators == {(1,): 5, (2,): 1}
    reduced = baker_search({(1,): Fraction(2, 6), (2,): Fraction(4, 6)},
                           4096, Fraction(22, 100))
    assert reduced is not None and reduced.r == 3
    assert reduced.numerators == {(1,): 1, (2,): 2}


def test_baker_search_zero_and_absent():
    cert = baker_search({(1,): Fraction(0), (2,): Fraction(0)}, 100,
                        Fraction(1, 4))
    assert cert is not None and cert.r == 1
    assert all(v == 0 for v in cert.numerators.values())
    none = baker_search({(1,): ExactReal.sqrt(2)}, 100, Fraction(1, 4))
    assert none is None


def test_budget_errors():
    with pytest.raises(BudgetExceededError):
        birch_search((Fraction(1, 3),), 10 ** 6, Fraction(3, 2), 2, budget=10)
    with pytest.raises(BudgetExceededError):
        baker_search({(1,): Fraction(1, 3)}, 10 ** 6, Fraction(3), budget=10)


def _planted_bundle():
    # alpha = 3/4 exactly, mu = 1/2 keeps every omega rational
    alpha = (Fraction(3, 4),)
    mu = ExactReal.rational(Fraction(1, 2))
    birch = birch_search(alpha, 256, Fraction(1, 4), 2)
    omega = omega_values(SQUARE, alpha, mu)
    baker = baker_search(omega, 256, Fraction(27, 100))
    assert birch is not None and baker is not None
    special = special_from_slices(SQUARE, baker)
    return birch, baker, special


def test_identity_checks_positive():
    birch, baker, special = _planted_bundle()
    assert birch.q == 4 and birch.numerators == (3,)
    assert baker.r == 4
    report = identity_checks(SQUARE, birch, baker, special)
    assert report.all_pass, report.details


def test_identity_checks_zero_alpha():
    birch = birch_search((Fraction(0),), 64, Fraction(1, 4), 2)
    omega = omega_values(SQUARE, (Fraction(0),), ExactReal.sqrt(2))
    baker = baker_search(omega, 64, Fraction(1, 4))
    special = special_from_slices(SQUARE, baker)
    report = identity_checks(SQUARE, birch, baker, special)
    assert report.all_pass, report.details


def test_identity_checks_negative_controls():
    birch, baker, special = _planted_bundle()

    bad_birch = replace(birch, numerators=(birch.numerators[0] + 1,))
    r1 = identity_checks(SQUARE, bad_birch, baker, special)
    assert not r1.all_pass and not r1.top_degree_match

    bad_nums = dict(baker.numerators)
    bad_nums[(2,)] += 1
    bad_baker = BakerCertificate(r=baker.r, numerators=bad_nums,
                                 delta=baker.delta, P=baker.P)
    r2 = identity_checks(SQUARE, birch, bad_baker, special)
    assert not r2.all_pass and not r2.top_degree_match

    top = special[SQUARE.d]
    bad_special = dict(special)
    bad_special[SQUARE.d] = replace(
        top, numerators=tuple(v + 1 for v in top.numerators))
    r3 = identity_checks(SQUARE, birch, baker, bad_special)
    assert not r3.all_pass and not r3.first_degree_match


def test_special_solution_canonical():
    _, baker, special = _planted_bundle()
    for sol in special.values():
        det, nums = sol.canonical()
        assert det > 0
        g = __import__("math").gcd(det, *(abs(v) for v in nums))
        assert g == 1
