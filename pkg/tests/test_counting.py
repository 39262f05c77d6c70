"""Band counts: generic enumeration vs meet-in-the-middle, exact boundaries."""

import random
from fractions import Fraction

import pytest

from shiftbands.counting import (CountSpec, count_diagonal_mitm, count_generic,
                                 count_points, count_series)
from shiftbands.exact import ExactReal
from shiftbands.forms import Form, FormSystem, diagonal_quadratic, taylor_shift

SEED = 2718

SQ1 = FormSystem(forms=(Form(n=1, d=2, terms={(2,): 1}),), sigma=0)
DIFF2 = FormSystem(forms=(Form(n=2, d=2, terms={(2, 0): 1, (0, 2): -1}),),
                   sigma=0)


def _spec(system, mu, tau, eta, P, method="auto"):
    return CountSpec(system=system, expansion=taylor_shift(system), mu=mu,
                     tau=tau, eta=eta, P=P, method=method)


def test_hand_example_two_points():
    spec = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(9, 4),),
                 Fraction(1, 10), 3)
    res = count_points(spec)
    assert res.count == 2
    assert res.boundary_flags == 0


def test_band_covering_everything():
    spec = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(0),),
                 Fraction(1000), 4)
    assert count_points(spec).count == 9


def test_unreachable_band_is_empty():
    spec = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(10 ** 6),),
                 Fraction(1, 2), 4)
    assert count_points(spec).count == 0


def test_ground_truth_series_both_methods():
    mu = ExactReal.sqrt(2)
    for P, want in ((3, 9), (5, 13), (8, 19)):
        for method in ("generic", "diagonal-mitm"):
            spec = _spec(DIFF2, mu, (Fraction(0),), Fraction(1, 2), P, method)
            res = count_points(spec)
            assert res.count == want, (P, method)
            assert res.boundary_flags == 0
            assert res.certified


def test_P_zero_single_point():
    # at P=0 only the origin is tested: value (0 + 1/2)^2 = 1/4
    inside = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(1, 4),),
                   Fraction(1, 10), 0)
    assert count_points(inside).count == 1
    outside = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(2),),
                    Fraction(1, 10), 0)
    assert count_points(outside).count == 0


def test_exact_boundary_points_are_excluded():
    # (1 + 1/2)^2 = 9/4 sits exactly at distance eta from tau: strict band
    spec = _spec(SQ1, ExactReal.rational(Fraction(1, 2)), (Fraction(1, 4),),
                 Fraction(2), 3)
    res = count_points(spec)
    direct = 0
    for x in range(-3, 4):
        v = (Fraction(x) + Fraction(1, 2)) ** 2
        direct += 1 if abs(v - Fraction(1, 4)) < 2 else 0
    assert res.count == direct
    assert res.boundary_flags == 0  # exact arithmetic decides the boundary


def test_undecidable_boundary_sets_flag():
    # decimal mu straddles the boundary at x = 1 within its stated error
    mu = ExactReal.decimal("0.5" + "0" * 59)
    spec = _spec(SQ1, mu, (Fraction(1, 4),), Fraction(2), 3)
    res = count_points(spec)
    assert res.boundary_flags > 0
    assert not res.certified


def test_mitm_equals_generic_random_instances():
    rng = random.Random(SEED)
    for _ in range(40):
        n = rng.randint(2, 3)
        signs = [rng.choice([1, -1]) * rng.randint(1, 3) for _ in range(n)]
        system = diagonal_quadratic(signs)
        kind = rng.random()
        if kind < 0.5:
            mu = ExactReal.rational(Fraction(rng.randint(-3, 3),
                                             rng.randint(1, 4)))
        else:
            mu = ExactReal.quadratic(Fraction(rng.randint(-2, 2)),
                                     Fraction(1, rng.randint(1, 3)),
                                     rng.choice([2, 3, 5]))
        tau = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)),)
        eta = Fraction(rng.randint(1, 8), rng.randint(1, 6))
        P = rng.randint(1, 6)
        generic = count_points(_spec(system, mu, tau, eta, P, "generic"))
        mitm = count_points(_spec(system, mu, tau, eta, P, "diagonal-mitm"))
        assert generic.count == mitm.count
        assert generic.boundary_flags == mitm.boundary_flags


def test_mitm_equals_generic_two_forms():
    rng = random.Random(SEED + 1)
    f1 = Form(n=4, d=2, terms={(2, 0, 0, 0): 1, (0, 2, 0, 0): -1})
    f2 = Form(n=4, d=2, terms={(0, 0, 2, 0): 1, (0, 0, 0, 2): -2})
    system = FormSystem(forms=(f1, f2), sigma=0)
    for _ in range(10):
        mu = ExactReal.sqrt(rng.choice([2, 3]))
        tau = (Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3)))
        eta = Fraction(rng.randint(1, 4), 2)
        P = rng.randint(1, 3)
        generic = count_points(_spec(system, mu, tau, eta, P, "generic"))
        mitm = count_points(_spec(system, mu, tau, eta, P, "diagonal-mitm"))
        assert generic.count == mitm.count


def test_auto_dispatch_prefers_mitm_on_diagonal():
    spec = _spec(DIFF2, ExactReal.sqrt(2), (Fraction(0),), Fraction(1, 2), 12)
    res = count_points(spec)
    assert res.method == "diagonal-mitm"
    dense = Form(n=2, d=2, terms={(2, 0): 1, (1, 1): 1, (0, 2): 1})
    spec2 = _spec(FormSystem(forms=(dense,), sigma=0), ExactReal.sqrt(2),
                  (Fraction(0),), Fraction(1, 2), 5)
    assert count_points(spec2).method == "generic"


def test_count_grows_with_eta():
    mu = ExactReal.sqrt(2)
    counts = []
    for eta in (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)):
        spec = _spec(DIFF2, mu, (Fraction(0),), eta, 6)
        counts.append(count_points(spec).count)
    assert counts == sorted(counts)


def test_count_series_ratio():
    mu = ExactReal.sqrt(2)
    spec = _spec(DIFF2, mu, (Fraction(0),), Fraction(1, 2), 8)
    rows = count_series(spec, (3, 5, 8), density_c=2.0)
    assert [r.count for r in rows] == [9, 13, 19]
    for r in rows:
        # R=1, d=2, n=2: target (2 eta) c P^(n-d) = 2.0 * P^0 * (2 * 1/2)
        assert r.target == pytest.approx(2.0)
        assert r.ratio == pytest.approx(r.count / 2.0)
    empty = count_series(spec, (3,), density_c=0.0)
    assert empty[0].ratio is None


def test_spec_validation():
    with pytest.raises(ValueError):
        _spec(SQ1, ExactReal.sqrt(2), (Fraction(0),), Fraction(0), 3)
    with pytest.raises(ValueError):
        _spec(SQ1, ExactReal.sqrt(2), (Fraction(0), Fraction(0)),
              Fraction(1), 3)
    with pytest.raises(ValueError):
        _spec(SQ1, ExactReal.sqrt(2), (Fraction(0),), Fraction(1), 3,
              method="quantum")
