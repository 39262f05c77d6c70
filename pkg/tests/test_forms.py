"""Integer form algebra and the shift expansion."""

import random
from fractions import Fraction

import pytest

from shiftbands.forms import (Form, FormError, FormSystem, check_hypotheses,
                              diagonal_quadratic, eval_form, gradient,
                              independent_degrees, monomials_of_degree,
                              rescale_to_dfactorial, system_from_document,
                              system_to_document, taylor_shift, terms_eval)

SEED = 812


def _random_form(rng, n, d, terms=4):
    monos = list(monomials_of_degree(n, d))
    rng.shuffle(monos)
    chosen = {}
    for e in monos[:terms]:
        c = rng.randint(-9, 9)
        if c:
            chosen[e] = c
    if not chosen:
        chosen[monos[0]] = 1
    return Form(n=n, d=d, terms=chosen)


def test_eval_hand_values():
    assert Form(n=1, d=2, terms={(2,): 1})((3,)) == 9
    assert Form(n=2, d=2, terms={(1, 1): 1})((2, 5)) == 10
    sig = diagonal_quadratic([1, 1, -1, -1, -1])
    assert sig.forms[0]((1, 1, 1, 1, 1)) == -1


def test_form_validation():
    with pytest.raises(FormError):
        Form(n=2, d=2, terms={(1, 0): 1})  # degree mismatch
    with pytest.raises(FormError):
        Form(n=2, d=2, terms={(2, 0, 0): 1})  # arity mismatch


def test_gradient_hand_values():
    assert gradient(Form(n=1, d=2, terms={(2,): 1})) == [{(1,): 2}]
    assert gradient(Form(n=2, d=2, terms={(1, 1): 1})) == [{(0, 1): 1},
                                                           {(1, 0): 1}]
    assert gradient(Form(n=1, d=3, terms={(3,): 1})) == [{(2,): 3}]


def test_rescale_to_dfactorial():
    one = FormSystem(forms=(Form(n=1, d=2, terms={(2,): 1}),), sigma=0)
    scaled, mult = rescale_to_dfactorial(one)
    assert scaled.forms[0].terms == {(2,): 2} and mult == [2]
    two = FormSystem(forms=(Form(n=1, d=2, terms={(2,): 2}),), sigma=0)
    scaled, mult = rescale_to_dfactorial(two)
    assert scaled.forms[0].terms == {(2,): 2} and mult == [1]
    cubic = FormSystem(forms=(Form(n=2, d=3, terms={(3, 0): 1, (0, 3): 1}),),
                       sigma=0)
    scaled, mult = rescale_to_dfactorial(cubic)
    assert scaled.forms[0].terms == {(3, 0): 6, (0, 3): 6} and mult == [6]


def test_taylor_shift_hand_slices():
    sq = taylor_shift(FormSystem(forms=(Form(n=1, d=2, terms={(2,): 1}),),
                                 sigma=0))
    assert sq.slice(0, 1) == {(1,): 2}
    assert sq.slice(0, 2) == {(2,): 1}
    assert sq.constant_term(0) == 1
    prod = taylor_shift(FormSystem(forms=(Form(n=2, d=2, terms={(1, 1): 1}),),
                                   sigma=0))
    assert prod.slice(0, 1) == {(1, 0): 1, (0, 1): 1}
    assert prod.slice(0, 2) == {(1, 1): 1}
    assert prod.constant_term(0) == 1


def test_taylor_shift_reconstruction_exact():
    # expansion at rational mu equals direct evaluation of f(x + mu*1)
    rng = random.Random(SEED)
    for _ in range(60):
        n = rng.randint(1, 3)
        d = rng.randint(2, 4)
        form = _random_form(rng, n, d)
        expansion = taylor_shift(FormSystem(forms=(form,), sigma=0))
        mu = Fraction(rng.randint(-6, 6), rng.randint(1, 6))
        x = [Fraction(rng.randint(-5, 5), rng.randint(1, 4))
             for _ in range(n)]
        shifted = [xi + mu for xi in x]
        assert expansion.eval_shifted(0, x, mu) == eval_form(form, shifted)


def test_gradient_slice_identity():
    # degree d-1 slice equals (1,...,1) . grad f, exactly
    rng = random.Random(SEED + 1)
    for _ in range(60):
        n = rng.randint(1, 3)
        d = rng.randint(2, 4)
        form = _random_form(rng, n, d)
        expansion = taylor_shift(FormSystem(forms=(form,), sigma=0))
        direct = {}
        for part in gradient(form):
            for e, c in part.items():
                direct[e] = direct.get(e, 0) + c
        direct = {e: c for e, c in direct.items() if c}
        assert expansion.slice(0, d - 1) == direct


def test_top_slice_is_original_form():
    rng = random.Random(SEED + 2)
    for _ in range(40):
        n = rng.randint(1, 3)
        d = rng.randint(2, 4)
        form = _random_form(rng, n, d)
        expansion = taylor_shift(FormSystem(forms=(form,), sigma=0))
        assert expansion.slice(0, d) == form.terms


def test_slice_matrix_hand_columns():
    system = FormSystem(forms=(Form(n=2, d=2, terms={(2, 0): 1, (0, 2): 1}),),
                        sigma=0)
    monos, mat = taylor_shift(system).slice_matrix(2)
    assert monos == ((2, 0), (1, 1), (0, 2))
    assert mat == [[1], [0], [1]]
    prod = FormSystem(forms=(Form(n=2, d=2, terms={(1, 1): 1}),), sigma=0)
    monos, mat = taylor_shift(prod).slice_matrix(1)
    assert mat == [[1], [1]]


def test_independent_degrees():
    five = diagonal_quadratic([1, 1, -1, -1, -1])
    assert independent_degrees(taylor_shift(five)) == {1, 2}
    # (x1-x2)^3 + (x3-x4)^3 kills the degree-2 slice
    terms = {(3, 0, 0, 0): 1, (2, 1, 0, 0): -3, (1, 2, 0, 0): 3,
             (0, 3, 0, 0): -1, (0, 0, 3, 0): 1, (0, 0, 2, 1): -3,
             (0, 0, 1, 2): 3, (0, 0, 0, 3): -1}
    cubic = FormSystem(forms=(Form(n=4, d=3, terms=terms),), sigma=0)
    degrees = independent_degrees(taylor_shift(cubic))
    assert 2 not in degrees and 3 in degrees


def test_check_hypotheses_pass_and_fail():
    five = diagonal_quadratic([1, 1, -1, -1, -1])
    report = check_hypotheses(five)
    assert report.all_pass
    assert report.variables_needed == 4
    assert report.kappa == Fraction(5, 2)
    four = diagonal_quadratic([1, 1, -1, -1])
    report4 = check_hypotheses(four)
    assert not report4.variables_sufficient
    assert not report4.all_pass
    assert any("numvars" in line and "FAIL" in line
               for line in report4.summary_lines())


def test_mu_polynomial_matches_eval():
    rng = random.Random(SEED + 3)
    for _ in range(40):
        n = rng.randint(1, 3)
        d = rng.randint(2, 3)
        form = _random_form(rng, n, d)
        expansion = taylor_shift(FormSystem(forms=(form,), sigma=0))
        x = [rng.randint(-4, 4) for _ in range(n)]
        coeffs = expansion.mu_polynomial(0, x)
        mu = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        direct = sum(c * mu ** i for i, c in enumerate(coeffs))
        assert direct == expansion.eval_shifted(0, x, mu)


def test_document_round_trip():
    five = diagonal_quadratic([1, 1, -1, -1, -1], sigma=0)
    doc = system_to_document(five)
    again = system_from_document(doc)
    assert again == five
    with pytest.raises((FormError, ValueError, KeyError, TypeError)):
        system_from_document({"n": "x"})
