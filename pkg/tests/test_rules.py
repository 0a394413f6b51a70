import csv
import io
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrtrap.bounds import alexiewicz_norm, lp_norm_estimate
from corrtrap.expr import Jet
from corrtrap.oracle import integrate, integrate_mp
from corrtrap.polynomials import Polynomial, RuleFamily, monic_on_interval, scale_to_interval
from corrtrap.rules import (
    EndpointJet,
    apply,
    endpoint_jets,
    estimate_error_term,
    generic_rule,
    polynomial_jets,
    weight_table,
    weight_table_csv,
    weights,
)

F = Fraction
FAMILIES = list(RuleFamily)


def _poly_rule(fam, n, a, b, coeffs):
    poly = Polynomial(tuple(F(c) for c in coeffs))
    return apply(weights(fam, n, a, b), polynomial_jets(poly, a, b, n - 1))


def test_weight_examples():
    a, b = F(-1, 3), F(5, 2)
    h = b - a
    assert weights("l2", 2, a, b).w_exact == (h / 2, h**2 / 12)
    for fam in ("l1", "l2", "linf"):
        assert weights(fam, 1, a, b).w_exact == (h / 2,)
    alex = weights("alex", 1, a, b)
    assert alex.w_exact == (0,) and alex.extra_exact == h
    assert weights("linf", 2, -1, 1).w_exact == (1, F(3, 8))


def test_alexiewicz_n1_is_left_endpoint_rule():
    assert _poly_rule("alex", 1, F(1), F(4), [3, 2]) == 5 * 3


def test_rule_examples():
    assert _poly_rule("l2", 2, 0, 1, [0, 0, 1]) == F(1, 3)
    assert _poly_rule("l2", 2, 0, 1, [0, 0, 0, 1]) == F(1, 4)
    for fam in ("l1", "l2", "linf"):
        assert _poly_rule(fam, 1, 0, 2, [1]) == 2


def test_generic_rule_examples():
    a, b = F(-2, 3), F(7, 5)
    f = Polynomial((F(3), F(-1), F(2), F(1, 2)))
    jets = polynomial_jets(f, a, b, 0)
    phi1 = scale_to_interval(Polynomial((F(0), F(1))), a, b)
    assert generic_rule(phi1, jets) == (b - a) * (f(a) + f(b)) / 2
    # phi_2 = (x - a)(x - b) on [0, 1] applied to f = x
    phi2 = scale_to_interval(Polynomial((F(-1), F(0), F(1))), 0, 1)
    assert phi2.poly == Polynomial((F(0), F(-1), F(1)))
    assert generic_rule(phi2, polynomial_jets(Polynomial((0, 1)), 0, 1, 1)) == F(1, 2)


def test_generic_rule_matches_l2_path():
    for n in range(1, 9):
        for a, b in [(0, 1), (F(-3, 2), F(2))]:
            jets = endpoint_jets("exp(x)*sin(x)", a, b, n - 1)
            got = generic_rule(monic_on_interval("l2", n, a, b), jets)
            want = apply(weights("l2", n, a, b), jets)
            assert got == pytest.approx(want, rel=1e-13)


jet_values = st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=20, max_size=20)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(min_value=1, max_value=10), jet_values,
       st.floats(min_value=-5, max_value=5), st.floats(min_value=0.1, max_value=4))
def test_two_paths_agree(fam, n, vals, a, width):
    b = a + width
    ja = Jet.from_derivatives(a, vals[:n])
    jb = Jet.from_derivatives(b, vals[10:10 + n])
    jets = EndpointJet(ja, jb)
    closed = apply(weights(fam, n, a, b), jets)
    generic = generic_rule(monic_on_interval(fam, n, a, b), jets)
    scale = sum(abs(v) for v in vals) * max(1.0, width) ** n + 1e-300
    assert abs(closed - generic) <= 1e-12 * max(abs(closed), scale * 1e-3)


def test_jets_must_reach_order():
    jets = endpoint_jets("exp(x)", 0, 1, 1)
    with pytest.raises(ValueError):
        apply(weights("l2", 3, 0, 1), jets)


def test_error_term_examples():
    # f = x^n: f^(n) = n! cancels 1/n!, leaving (-1)^n times the integral of phi
    for fam in FAMILIES:
        for n in (1, 3, 5):
            phi = monic_on_interval(fam, n, F(-1), F(2))
            poly = Polynomial.monomial(n)
            jets = polynomial_jets(poly, phi.a, phi.b, n - 1)
            exact = poly.integrate(phi.a, phi.b) - apply(weights(fam, n, phi.a, phi.b), jets)
            assert exact == (-1) ** n * phi.poly.integrate(phi.a, phi.b)
    phi = monic_on_interval("l2", 2, 0, 1)
    rule = apply(weights("l2", 2, 0, 1), endpoint_jets("exp(x)", 0, 1, 1))
    assert estimate_error_term(phi, "exp(x)") == pytest.approx((math.e - 1) - rule, rel=1e-10)


CORPUS = ["exp(x)", "sin(x)", "1/(1+x^2)", None]


@pytest.mark.parametrize("fam", FAMILIES)
@pytest.mark.parametrize("src", CORPUS)
def test_integral_equals_rule_plus_error(fam, src):
    dps = 40
    for n in range(1, 9):
        f = src or f"x^{n + 3}"
        for a, b in [(0, 1), (-2, 3)]:
            phi = monic_on_interval(fam, n, a, b)
            with mpmath.workdps(dps):
                whole = integrate_mp(f, a, b, dps=dps)
                rule = apply(weights(fam, n, a, b), endpoint_jets(f, a, b, n - 1, dps=dps))
                err = estimate_error_term(phi, f, dps=dps)
                lhs = whole - rule
                assert abs(lhs - err) <= 1e-8 * abs(err) + mpmath.mpf(10) ** (-dps + 8)


@pytest.mark.parametrize("fam", FAMILIES)
@pytest.mark.parametrize("src", CORPUS)
def test_single_interval_bound(fam, src):
    for n in range(1, 9):
        f = src or f"x^{n + 3}"
        for a, b in [(0, 1), (-2, 3)]:
            rw = weights(fam, n, a, b)
            with mpmath.workdps(40):
                err = abs(integrate_mp(f, a, b) - apply(rw, endpoint_jets(f, a, b, n - 1, dps=40)))
            if fam is RuleFamily.ALEXIEWICZ:
                norm = alexiewicz_norm(f, n, a, b)
            else:
                norm = lp_norm_estimate(f, n, fam.p, a, b)
            assert err <= rw.sharp_coeff * norm


@pytest.mark.parametrize("fam", FAMILIES)
def test_float_error_term_matches_oracle(fam):
    n = 3
    phi = monic_on_interval(fam, n, 0, 1)
    rule = apply(weights(fam, n, 0, 1), endpoint_jets("sin(x)", 0, 1, n - 1))
    whole = integrate("sin(x)", 0, 1).value
    assert estimate_error_term(phi, "sin(x)") == pytest.approx(whole - rule, rel=1e-8)


def test_weight_table_rows():
    rows = weight_table("l2", 2)
    assert [(r["k"], r["numerator"], r["denominator"], r["power_of_(b-a)"]) for r in rows] == [(0, 1, 2, 1), (1, 1, 12, 2)]
    rows = weight_table("linf", 1)
    assert [(r["numerator"], r["denominator"], r["power_of_(b-a)"]) for r in rows] == [(1, 2, 1)]
    rows = weight_table("alex", 3)
    assert [r["k"] for r in rows] == [0, 1, "extra"]
    assert (rows[-1]["numerator"], rows[-1]["denominator"], rows[-1]["power_of_(b-a)"]) == (1, 96, 3)
    even = weight_table("alex", 4)
    assert even[-1]["k"] == "extra" and even[-1]["numerator"] == 0
    with_interval = weight_table("l2", 2, 0, 2)
    assert [(r["numerator"], r["denominator"], r["power_of_(b-a)"]) for r in with_interval] == [(1, 1, 0), (1, 3, 0)]


def test_weight_table_csv_parses():
    text = weight_table_csv(weight_table("l1", 5))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 5
    assert set(rows[0]) == {"family", "n", "k", "numerator", "denominator", "power_of_(b-a)"}
