"""Acceptance suite: one pass/fail line per criterion, run with -s to see all.

Every criterion is checked at its stated tolerance; nothing here is loosened
to accommodate slow hardware.  The two long-running criteria (the end-to-end
asymptotic and the integer sandwich) also assert their wall-clock budgets.
"""

import math
import random
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np

from shiftbands.counting import CountSpec, count_points
from shiftbands.density import density
from shiftbands.dioph import (BakerCertificate, baker_search, birch_search,
                              identity_checks, omega_values,
                              special_from_slices)
from shiftbands.dissection import r_plus_minus
from shiftbands.exact import ExactReal
from shiftbands.expsums import (OscIntegralSpec, WeylSumSpec, osc_integral,
                                shifted_S, weyl_g)
from shiftbands.forms import (Form, FormSystem, diagonal_quadratic, eval_form,
                              gradient, monomials_of_degree, taylor_shift)
from shiftbands.intlinalg import adjugate, mat_mul_int
from shiftbands.kernels import (kernel_ft, kernel_ft_quadrature,
                                sandwich_grid, sandwich_ok)
from shiftbands.vandermonde import build_family

SEED = 424242

FIVE = FormSystem(forms=(Form(n=5, d=2, terms={
    (2, 0, 0, 0, 0): 1, (0, 2, 0, 0, 0): 1, (0, 0, 2, 0, 0): -1,
    (0, 0, 0, 2, 0): -1, (0, 0, 0, 0, 2): -1}),), sigma=0)
FIVE_EXP = taylor_shift(FIVE)

DIFF2 = FormSystem(forms=(Form(n=2, d=2, terms={(2, 0): 1, (0, 2): -1}),),
                   sigma=0)
DIFF2_EXP = taylor_shift(DIFF2)

SQ1 = FormSystem(forms=(Form(n=1, d=2, terms={(2,): 1}),), sigma=0)
SQ1_EXP = taylor_shift(SQ1)


def _verdict(num: int, label: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num} ({label}): {status} [{detail}]", flush=True)
    assert ok, f"criterion {num} ({label}): {detail}"


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


def test_criterion_1_end_to_end_asymptotic():
    t0 = time.time()
    est = density(FIVE, samples=1 << 19, seed=3)
    se_ok = est.converged and est.std_error < 0.01 * est.c
    mu = ExactReal.sqrt(2)
    deviations = []
    flags = 0
    for P in (25, 50, 100, 200):
        spec = CountSpec(system=FIVE, expansion=FIVE_EXP, mu=mu,
                         tau=(Fraction(0),), eta=Fraction(1, 4), P=P,
                         method="diagonal-mitm")
        res = count_points(spec)
        flags += res.boundary_flags
        target = 0.5 * est.c * P ** 3
        deviations.append(abs(res.count / target - 1.0))
    elapsed = time.time() - t0
    final_ok = deviations[-1] <= 0.15
    # nonincreasing from P = 50 onward
    monotone_ok = all(deviations[i] >= deviations[i + 1]
                      for i in range(1, len(deviations) - 1))
    time_ok = elapsed < 300.0
    ok = se_ok and flags == 0 and final_ok and monotone_ok and time_ok
    _verdict(1, "end-to-end asymptotic", ok,
             f"c={est.c:.4f} se/c={est.std_error / est.c:.3%} "
             f"|ratio-1|={['%.4f' % v for v in deviations]} "
             f"flags={flags} elapsed={elapsed:.1f}s")


def test_criterion_2_unconditional_sandwich():
    t0 = time.time()
    mu = ExactReal.sqrt(2)
    exceptions = []
    counts = []
    for P in (3, 5, 8):
        spec = CountSpec(system=DIFF2, expansion=DIFF2_EXP, mu=mu,
                         tau=(Fraction(0),), eta=Fraction(1, 2), P=P,
                         method="generic")
        res = count_points(spec)
        sw = r_plus_minus(DIFF2, DIFF2_EXP, mu, (Fraction(0),),
                          Fraction(1, 2), P)
        counts.append(res.count)
        lower_ok = sw.r_minus - sw.tail_bound <= res.count
        upper_ok = res.count <= sw.r_plus + sw.tail_bound
        if not (res.certified and lower_ok and upper_ok and sw.converged):
            exceptions.append((P, res.count, sw.r_minus, sw.r_plus,
                               sw.tail_bound))
    elapsed = time.time() - t0
    ok = not exceptions and elapsed < 120.0
    _verdict(2, "unconditional sandwich", ok,
             f"N={counts} exceptions={exceptions} elapsed={elapsed:.1f}s")


def test_criterion_3_kernel_sandwich_grid():
    eta, rho = 0.25, 0.07
    ts = np.linspace(-2 * eta, 2 * eta, 201)
    worst = 0.0
    for sign in (-1, 1):
        closed = kernel_ft(sign, ts, eta, rho)
        quad = kernel_ft_quadrature(sign, ts, eta, rho)
        worst = max(worst, float(np.max(np.abs(closed - quad))))
    rows = sandwich_grid(eta, rho)
    ordered = len(rows) == 201 and sandwich_ok(rows)
    ok = worst <= 1e-6 and ordered
    _verdict(3, "kernel sandwich grid", ok,
             f"max|closed-quadrature|={worst:.3e} ordered={ordered}")


def test_criterion_4_exact_identities():
    rng = random.Random(SEED + 4)
    worst_residual = 0.0
    for _ in range(100):
        alpha = Fraction(rng.randint(-8, 8), rng.randint(1, 16))
        P = rng.randint(1, 8)
        mu = ExactReal.quadratic(Fraction(rng.randint(-2, 2)),
                                 Fraction(rng.randint(1, 3), 2), 2)
        res = shifted_S(SQ1, SQ1_EXP, mu, P, (alpha,))
        worst_residual = max(worst_residual, res.residual)
    factor_ok = worst_residual < 1e-10

    taylor_ok = slice_ok = top_ok = True
    for _ in range(100):
        n = rng.randint(1, 3)
        d = rng.randint(2, 4)
        form = _random_form(rng, n, d)
        expansion = taylor_shift(FormSystem(forms=(form,), sigma=0))
        mu_q = Fraction(rng.randint(-6, 6), rng.randint(1, 6))
        x = [Fraction(rng.randint(-5, 5), rng.randint(1, 4))
             for _ in range(n)]
        shifted = [xi + mu_q for xi in x]
        taylor_ok &= (expansion.eval_shifted(0, x, mu_q)
                      == eval_form(form, shifted))
        direct = {}
        for part in gradient(form):
            for e, c in part.items():
                direct[e] = direct.get(e, 0) + c
        direct = {e: c for e, c in direct.items() if c}
        slice_ok &= expansion.slice(0, d - 1) == direct
        top_ok &= expansion.slice(0, d) == form.terms
    ok = factor_ok and taylor_ok and slice_ok and top_ok
    _verdict(4, "exact identities x100", ok,
             f"factor_residual={worst_residual:.2e} taylor={taylor_ok} "
             f"grad_slice={slice_ok} top_slice={top_ok}")


def test_criterion_5_vandermonde_family():
    failures = []
    for n in range(1, 4):
        for d in range(2, 5):
            for j, mom in build_family(n, d).items():
                det = mom.determinant()
                if det == 0:
                    failures.append((n, d, j, "zero determinant"))
                    continue
                if det != mom.determinant_product_formula():
                    failures.append((n, d, j, "product formula mismatch"))
                adj = adjugate(mom.matrix)
                size = mom.size
                ident = [[det if r == c else 0 for c in range(size)]
                         for r in range(size)]
                if mat_mul_int(mom.matrix, adj) != ident:
                    failures.append((n, d, j, "adjugate not det inverse"))
    _verdict(5, "vandermonde family", not failures, f"failures={failures}")


def test_criterion_6_certificate_round_trips():
    rng = random.Random(SEED + 6)
    birch_hits = 0
    for _ in range(500):
        q = rng.randint(2, 9)
        a = rng.randint(1, q - 1)
        while math.gcd(a, q) != 1:
            a = rng.randint(1, q - 1)
        eps = Fraction(rng.randint(-3, 3), 10 ** 10)
        cert = birch_search((Fraction(a, q) + eps,), 6561, Fraction(1, 4), 2)
        if cert is not None and cert.q == q and cert.numerators == (a,):
            birch_hits += 1
    birch_ok = birch_hits == 500

    baker_hits = 0
    for _ in range(100):
        r = rng.randint(2, 6)
        while True:
            nums = {e: rng.randint(0, r - 1) for e in ((1,), (2,))}
            nonzero = [v for v in nums.values() if v]
            if nonzero and math.gcd(r, math.gcd(*nonzero, 0)) == 1:
                break
        omega = {e: Fraction(v, r) for e, v in nums.items()}
        cert = baker_search(omega, 4096, Fraction(22, 100))
        if cert is not None and cert.r == r and cert.numerators == nums:
            baker_hits += 1
    baker_ok = baker_hits == 100

    alpha = (Fraction(3, 4),)
    mu = ExactReal.rational(Fraction(1, 2))
    birch = birch_search(alpha, 256, Fraction(1, 4), 2)
    baker = baker_search(omega_values(SQ1_EXP, alpha, mu), 256,
                         Fraction(27, 100))
    special = special_from_slices(SQ1_EXP, baker)
    positive = identity_checks(SQ1_EXP, birch, baker, special).all_pass

    bad_birch = replace(birch, numerators=(birch.numerators[0] + 1,))
    neg1 = not identity_checks(SQ1_EXP, bad_birch, baker, special).all_pass
    bad_nums = dict(baker.numerators)
    bad_nums[(2,)] += 1
    bad_baker = BakerCertificate(r=baker.r, numerators=bad_nums,
                                 delta=baker.delta, P=baker.P)
    neg2 = not identity_checks(SQ1_EXP, birch, bad_baker, special).all_pass
    top = special[SQ1_EXP.d]
    bad_special = dict(special)
    bad_special[SQ1_EXP.d] = replace(
        top, numerators=tuple(v + 1 for v in top.numerators))
    neg3 = not identity_checks(SQ1_EXP, birch, baker, bad_special).all_pass

    ok = (birch_ok and baker_ok and positive and neg1 and neg2 and neg3)
    _verdict(6, "certificate round-trips", ok,
             f"birch={birch_hits}/500 baker={baker_hits}/100 "
             f"identities={positive} controls_fail={neg1, neg2, neg3}")


def test_criterion_7_oracle_equivalence():
    rng = random.Random(SEED + 7)
    mismatches = 0
    for i in range(200):
        if i % 10 == 9:
            f1 = Form(n=4, d=2, terms={(2, 0, 0, 0): rng.choice([1, -1]),
                                       (0, 2, 0, 0): rng.choice([1, -1])})
            f2 = Form(n=4, d=2, terms={(0, 0, 2, 0): rng.choice([1, -1]),
                                       (0, 0, 0, 2): rng.randint(-2, 2) or 1})
            system = FormSystem(forms=(f1, f2), sigma=0)
            tau = (Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3)))
            P = rng.randint(1, 3)
        elif i % 10 == 8:
            n = 2
            exps = [tuple(3 if k == v else 0 for k in range(n))
                    for v in range(n)]
            system = FormSystem(forms=(Form(n=n, d=3, terms={
                e: rng.choice([1, -1]) * rng.randint(1, 2)
                for e in exps}),), sigma=0)
            tau = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)),)
            P = rng.randint(1, 12)
        else:
            n = rng.randint(2, 3)
            signs = [rng.choice([1, -1]) * rng.randint(1, 3)
                     for _ in range(n)]
            system = diagonal_quadratic(signs)
            tau = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)),)
            P = rng.randint(1, 20 if n == 2 else 10)
        assert (2 * P + 1) ** system.n <= 10 ** 5
        if rng.random() < 0.5:
            mu = ExactReal.rational(Fraction(rng.randint(-3, 3),
                                             rng.randint(1, 4)))
        else:
            mu = ExactReal.quadratic(Fraction(rng.randint(-2, 2)),
                                     Fraction(1, rng.randint(1, 3)),
                                     rng.choice([2, 3, 5]))
        eta = Fraction(rng.randint(1, 8), rng.randint(1, 6))
        expansion = taylor_shift(system)
        base = CountSpec(system=system, expansion=expansion, mu=mu, tau=tau,
                         eta=eta, P=P, method="generic")
        generic = count_points(base)
        mitm = count_points(replace(base, method="diagonal-mitm"))
        if (generic.count, generic.boundary_flags) != (
                mitm.count, mitm.boundary_flags):
            mismatches += 1
    _verdict(7, "oracle equivalence", mismatches == 0,
             f"mismatches={mismatches}/200")


def test_criterion_8_residual_scaling():
    system = FormSystem(forms=(Form(n=2, d=2, terms={
        (2, 0): 1, (1, 1): 1, (0, 2): -1}),), sigma=0)
    expansion = taylor_shift(system)
    bundles = [
        (Fraction(1, 3), {(1, 0): Fraction(1, 5), (0, 1): Fraction(-1, 7)}),
        (Fraction(-2, 5), {(1, 0): Fraction(1, 2), (0, 1): Fraction(1, 3)}),
        (Fraction(1, 2), {(1, 0): Fraction(0), (0, 1): Fraction(2, 5)}),
    ]
    P_values = (4, 8, 16, 32)
    max_res = []
    for P in P_values:
        worst = 0.0
        for gamma, gdia in bundles:
            alpha = (gamma * Fraction(1, P ** 2),)
            omega = {e: g * Fraction(1, P ** sum(e))
                     for e, g in gdia.items()}
            g = weyl_g(WeylSumSpec(system=system, expansion=expansion, P=P,
                                   alpha=alpha, omega_diamond=omega))
            ispec = OscIntegralSpec(
                gamma=(float(gamma),),
                gamma_diamond={e: float(v) for e, v in gdia.items()})
            value = osc_integral(ispec, system).value
            worst = max(worst, abs(g - P ** 2 * value))
        max_res.append(worst)
    slope = float(np.polyfit(np.log(P_values), np.log(max_res), 1)[0])
    ok = slope <= 1.2
    _verdict(8, "residual scaling", ok,
             f"max_residuals={['%.3f' % v for v in max_res]} "
             f"slope={slope:.3f} (allowed 1.2)")
