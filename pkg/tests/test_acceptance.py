"""Exit criteria 1-8, each with its runtime budget.

Every test records one PASS/FAIL line, repeated in the terminal summary.
"""

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest

import oracles
from corrtrap.bounds import alexiewicz_norm, k_constant, lp_norm_estimate
from corrtrap.composite import CompositePlan, composite_apply, composite_bound, naive_apply
from corrtrap.exactness import (
    ExtremalSpec,
    alexiewicz_sharpness,
    build_extremal_lp,
    linf_sharpness,
    reference_moments,
    rule_error_on_monomial,
)
from corrtrap.expr import parse
from corrtrap.oracle import integrate_mp
from corrtrap.polynomials import (
    Polynomial,
    legendre_p,
    monic_on_interval,
    qnorm_on_reference,
    reference_monic,
    scale_to_interval,
)
from corrtrap.rules import apply, generic_rule, polynomial_jets, weight_coefficients, weights

pytestmark = pytest.mark.acceptance

FAMILIES = ("l1", "l2", "linf", "alex")
P_OF = {"l1": 1, "l2": 2, "linf": math.inf}


def _jets_of(poly: Polynomial, a, b, order):
    return polynomial_jets(poly, a, b, order)


def test_criterion_1_weight_tables(record):
    t0 = time.perf_counter()
    rng = random.Random(1)
    mismatches = []
    intervals = [(Fraction(0), Fraction(1)), (Fraction(-1), Fraction(1)), (Fraction(-3, 7), Fraction(5, 2))]
    for fam in FAMILIES:
        for n in range(1, 11):
            c, extra = weight_coefficients(fam, n)
            for a, b in intervals:
                h = b - a
                ow, oextra = oracles.closed_weights(fam, n, h)
                rw = weights(fam, n, a, b)
                if list(rw.w_exact) != ow or (rw.extra_exact or 0) != oextra:
                    mismatches.append((fam, n, a, b, "closed form"))
                # a random polynomial of degree n + 2 supplies the endpoint data
                poly = Polynomial(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n + 3)))
                jets = _jets_of(poly, a, b, n - 1)
                da, db = jets.at_a.derivatives(), jets.at_b.derivatives()
                lib_closed = apply(rw, jets)
                lib_generic = generic_rule(monic_on_interval(fam, n, a, b), jets)
                ref_ibp = oracles.ibp_rule(fam, n, a, b, da, db)
                ref_closed = oracles.closed_rule(fam, n, a, b, da, db)
                if not (lib_closed == lib_generic == ref_ibp == ref_closed):
                    mismatches.append((fam, n, a, b, "rule value"))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 1.0
    record(1, ok, f"mismatches={len(mismatches)} time={elapsed:.2f}s")
    assert not mismatches, mismatches[:5]
    assert elapsed < 1.0


def test_criterion_2_constants(record):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 11):
        for fam, p in P_OF.items():
            closed = oracles.sharp_constant(n, p)
            # library constant
            kc = k_constant(n, p)
            assert kc.exact
            worst = max(worst, abs(kc.value / closed - 1))
            # numerical kernel norm through the library and through mpmath
            q = 1.0 if math.isinf(p) else (math.inf if p == 1 else p / (p - 1))
            inv_q = 0.0 if math.isinf(q) else 1 / q
            lib_num = 2.0 ** (-n - inv_q) * qnorm_on_reference(reference_monic(fam, n), q) / math.factorial(n)
            worst = max(worst, abs(lib_num / closed - 1))
            worst = max(worst, abs(oracles.constant_by_quadrature(fam, n, q) / closed - 1))
    # n = 1: every monic kernel centred on the interval is x, so K(1, p) is explicit
    for p in (1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, math.inf):
        if p == 1:
            expect = 0.5
        elif math.isinf(p):
            expect = 0.25
        else:
            q = p / (p - 1)
            expect = 0.5 * (1 / (q + 1)) ** (1 / q)
        worst = max(worst, abs(k_constant(1, p).value / expect - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    record(2, ok, f"worst_rel={worst:.2e} time={elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_criterion_3_exactness(record):
    t0 = time.perf_counter()
    rng = random.Random(3)
    worst = 0.0
    failures = []
    for n in range(1, 9):
        for trial in range(20):
            a = Fraction(rng.randint(-20, 10), rng.randint(1, 4))
            b = a + Fraction(rng.randint(1, 20), rng.randint(1, 4))
            coeffs = tuple(Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(n)) + (Fraction(1),)
            # random monic reference kernel, carried onto [a, b]
            phi = scale_to_interval(Polynomial(coeffs), a, b)
            for deg in range(n):
                err = rule_error_on_monomial(phi, deg)
                scale = max(abs(a), abs(b), 1) ** deg * (b - a)
                rel = abs(float(err / scale))
                worst = max(worst, rel)
                if rel > 1e-11:
                    failures.append((n, trial, deg))
        for a, b in [(Fraction(0), Fraction(1)), (Fraction(-2), Fraction(3))]:
            phi = monic_on_interval("l2", n, a, b)
            for deg in range(2 * n):
                if rule_error_on_monomial(phi, deg) != 0:
                    failures.append(("l2", n, deg))
        moments = reference_moments(legendre_p(n), n)
        if any(mom != 0 for mom in moments):
            failures.append(("legendre", n))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 10.0
    record(3, ok, f"worst_scaled={worst:.1e} failures={len(failures)} time={elapsed:.2f}s")
    assert not failures, failures[:5]
    assert elapsed < 10.0


CORPUS = {
    "exp": lambda n: "exp(x)",
    "sin": lambda n: "sin(x)",
    "runge": lambda n: "1/(1+x^2)",
    "power": lambda n: f"x^{n + 3}",
}


def test_criterion_4_bounds(record):
    t0 = time.perf_counter()
    violations = []
    checked = 0
    tightest = 0.0
    for key, make in CORPUS.items():
        for a, b in [(0, 1), (-2, 3)]:
            for n in range(1, 7):
                e = parse(make(n))
                reference = integrate_mp(e, a, b, dps=40)
                for fam in FAMILIES:
                    if fam == "alex":
                        norm = alexiewicz_norm(e, n, a, b)
                        pnorm = "alexiewicz"
                    else:
                        norm = lp_norm_estimate(e, n, P_OF[fam], a, b)
                        pnorm = P_OF[fam]
                    for m in (1, 2, 4, 8, 16):
                        plan = CompositePlan(fam, n, m, a, b)
                        with mpmath.workdps(40):
                            err = abs(reference - composite_apply(plan, e, dps=40))
                        bound = composite_bound(plan, norm, pnorm)
                        checked += 1
                        if bound > 0:
                            tightest = max(tightest, float(err) / bound)
                        if err > bound:
                            violations.append((key, a, b, fam, n, m, float(err), bound))
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 60.0
    record(4, ok, f"cases={checked} violations={len(violations)} max_err/bound={tightest:.3f} time={elapsed:.1f}s")
    assert not violations, violations[:5]
    assert elapsed < 60.0


def test_criterion_5_sharpness(record):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 7):
        for a, b in [(0, 1), (-2, 3), (Fraction(1, 3), Fraction(7, 4))]:
            ratio = linf_sharpness(ExtremalSpec("linf", n, math.inf, a, b)).ratio
            worst = max(worst, abs(float(ratio) - 1))
    for n in range(1, 6):
        lp = build_extremal_lp(ExtremalSpec("l2", n, 2, 0, 1, d=Fraction(3, 2)))
        worst = max(worst, abs(float(lp.exact_ratio_squared()) - 1))
        worst = max(worst, abs(lp.sharpness_ratio() - 1))
    for n in (1, 2):
        for a, b in [(0, 1), (-2, 3)]:
            ratio = alexiewicz_sharpness(ExtremalSpec("alex", n, None, a, b, d=-2)).ratio
            worst = max(worst, abs(float(ratio) - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10.0
    record(5, ok, f"worst_rel={worst:.1e} time={elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 10.0


def test_criterion_6_convergence(record):
    t0 = time.perf_counter()
    e = parse("exp(x)")
    dps = 50
    exact = oracles.exp_integral(0, 1, dps)
    shortfalls = []
    summary = {}
    for fam in FAMILIES:
        need = (lambda n: n - 1.3) if fam == "alex" else (lambda n: n - 0.3)
        for n in range(1, 6):
            errs = []
            for m in (1, 2, 4, 8, 16, 32):
                with mpmath.workdps(dps):
                    errs.append(abs(exact - composite_apply(CompositePlan(fam, n, m, 0, 1), e, dps=dps)))
            with mpmath.workdps(dps):
                orders = [float(mpmath.log(errs[i] / errs[i + 1], 2)) for i in range(len(errs) - 1)]
            summary[(fam, n)] = min(orders)
            if min(orders) < need(n):
                shortfalls.append((fam, n, orders))
    elapsed = time.perf_counter() - t0
    ok = not shortfalls and elapsed < 30.0
    record(6, ok, f"shortfalls={len(shortfalls)} time={elapsed:.2f}s")
    assert not shortfalls, shortfalls
    assert elapsed < 30.0


def test_criterion_7_monotonicity(record):
    t0 = time.perf_counter()
    grid = (1, 1.25, 1.5, 2, 3, 5, 10, math.inf)
    bad = []
    for n in range(1, 9):
        vals = [k_constant(n, p).value for p in grid]
        for p0, p1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
            if v1 > v0 * (1 + 1e-12):
                bad.append((n, p0, p1, v0, v1))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 10.0
    record(7, ok, f"increases={len(bad)} time={elapsed:.2f}s")
    assert not bad, bad
    assert elapsed < 10.0


def test_criterion_8_telescoping(record):
    t0 = time.perf_counter()
    worst = 0.0
    for src in ("exp(x)", "sin(3*x) + x^2", "1/(1+x^2)"):
        e = parse(src)
        for fam in FAMILIES:
            for n in range(1, 7):
                for m in (1, 2, 3, 5, 8, 13, 16):
                    plan = CompositePlan(fam, n, m, -2, 3)
                    t = composite_apply(plan, e)
                    s = naive_apply(plan, e)
                    worst = max(worst, abs(t - s) / max(abs(s), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    record(8, ok, f"worst_rel={worst:.1e} time={elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 10.0
