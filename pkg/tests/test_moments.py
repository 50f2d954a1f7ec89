import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as gamma_fn

from conftest import build
from oracles import dirichlet_moment, expectation, law_at
from polyaproc.errors import SmallProcess, SupportViolation, UnsupportedPower
from polyaproc.moments import (
    LOG_GAMMA_THRESHOLD,
    asymptotic_moment,
    designated_w_indices,
    exact_moment,
    expected_vector_asymptote,
    gamma_eval,
    gamma_product,
    gamma_quotient,
    gamma_ratio,
    limit_w_moment,
    moment_report,
)
from polyaproc.upoly import UPolynomial, indices_up_to


def test_gamma_polynomial_small_cases():
    assert gamma_eval(Fraction(2), 1, Fraction(3, 4)) == 1
    assert gamma_eval(Fraction(2), 2, Fraction(3, 4)) == 1 + Fraction(3, 4) / 2
    assert gamma_eval(Fraction(1), 5, Fraction(1)) == 5  # prod (1 + 1/k) telescopes to n


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 5.0), st.integers(LOG_GAMMA_THRESHOLD, 3000), st.floats(-0.9, 2.0))
def test_log_gamma_route_matches_product(tau1, n, z):
    prod = complex(gamma_product(tau1, n, z))
    quot = gamma_quotient(tau1, n, z)
    assert abs(quot - prod) <= 1e-10 * max(1.0, abs(prod))


def test_gamma_at_poles():
    # tau1 + z = 0: 1/Gamma(0) = 0, and the product contains the factor (1 + z/(k + tau1 - 1)) = 0 at k = 1
    assert gamma_eval(1.0, 5, -1.0) == 0.0
    assert gamma_ratio(1.0, -1.0) == 0
    assert gamma_eval(Fraction(1), 5, Fraction(-1)) == 0


def test_gamma_ratio_exact_and_float():
    assert gamma_ratio(Fraction(2), 3) == Fraction(1, 2 * 3 * 4)
    assert abs(complex(gamma_ratio(2.0, 0.75)) - gamma_fn(2.0) / gamma_fn(2.75)) < 1e-14


@pytest.mark.parametrize("name", ["triangular", "two-three-tree", "jordan-3d", "triangular-3d", "general-2d"])
def test_exact_moment_matches_enumerated_law(name):
    spec, sd, table = build(name)
    s = sd.dimension
    degree = 3 if s <= 2 else 2
    ns = [1, 2, 3, 5, 8]
    laws = {n: law_at(spec, n) for n in ns}
    for alpha in indices_up_to(tuple([0] * (s - 1) + [degree])):
        f = UPolynomial.monomial(alpha)
        vals = exact_moment(f, ns, table)
        for n, v in zip(ns, vals):
            expect = expectation(laws[n], lambda x: f.evaluate(sd.forms_at(x)))
            assert v == expect, (alpha, n)


def test_float_route_matches_exact_route():
    _, sd, table = build("jordan-3d")
    f = UPolynomial(3, {(0, 0, 2): Fraction(1), (0, 1, 1): Fraction(-2), (1, 0, 0): Fraction(1, 3)})
    ns = [1, 7, 50, 300]
    exact = exact_moment(f, ns, table, "exact")
    approx = exact_moment(f, ns, table, "float")
    for a, b in zip(exact, approx):
        assert abs(complex(a) - b) <= 1e-10 * max(1.0, abs(complex(a)))


@pytest.mark.parametrize("name", ["triangular", "two-three-tree", "cyclic", "bst-congruence"])
def test_first_form_grows_linearly(name):
    spec, sd, table = build(name)
    f = UPolynomial.variable(sd.dimension, 1, Fraction(1) if sd.exact else 1 + 0j)
    ns = [1, 4, 40, 400]
    for n, v in zip(ns, exact_moment(f, ns, table)):
        assert abs(complex(v) - (n + float(spec.tau1) - 1)) <= 1e-9 * n


def test_eigen_reduced_polynomial_moments():
    spec, sd, table = build("triangular-3d")
    x1 = sd.forms_at(spec.initial)
    ns = list(range(1, 60))
    for alpha in indices_up_to((0, 0, 3)):
        if table.nilpotence_by_iteration(alpha):
            continue
        Q = table.reduced(alpha)
        got = exact_moment(Q, ns, table)
        for n, v in zip(ns, got):
            assert v == gamma_eval(spec.tau1, n, sd.pairing(alpha)) * Q.evaluate(x1)


def test_dirichlet_limit_moments():
    _, sd, table = build("identity", s=3, x="1/2")
    params = [Fraction(1, 2)] * 3
    assert designated_w_indices(sd) == [1, 2, 3]
    forms = [list(r) for r in sd.forms]
    # u_k for k >= 2 are coordinate forms here, so W_k are Dirichlet coordinates
    coord = {k: forms[k].index(1) for k in (1, 2) if sorted(forms[k]) == [0, 0, 1]}
    assert len(coord) == 2
    for a in range(3):
        for b in range(3):
            alpha = (0, a, b)
            beta = [0, 0, 0]
            beta[coord[1]] += a
            beta[coord[2]] += b
            assert limit_w_moment(alpha, table) == dirichlet_moment(params, beta)


def test_triangular_limit_moments_closed_form():
    _, _, table = build("triangular")
    assert abs(limit_w_moment((0, 1), table) - 1 / gamma_fn(2.75)) < 1e-14
    expect = gamma_fn(2) / gamma_fn(3.5) * (1 * (1 + 0.75))
    assert abs(limit_w_moment((0, 2), table) - expect) < 1e-14


def test_limit_moment_errors():
    _, _, t = build("two-three-tree")
    with pytest.raises(SmallProcess):
        limit_w_moment((0, 1), t)
    _, sd, t = build("jordan-3d")
    assert designated_w_indices(sd) == [1, 2]
    with pytest.raises(SupportViolation):
        limit_w_moment((0, 0, 1), t)


def test_asymptotic_regimes():
    spec, sd, t = build("jordan-3d")
    semi = asymptotic_moment((0, 1, 0), t)
    assert semi.regime == "SemisimpleLargeExact" and semi.log_power == 0
    lead = asymptotic_moment((0, 0, 2), t)
    assert lead.regime == "LargeLeading" and lead.log_power == 2 and lead.exponent == Fraction(3, 2)
    _, _, small = build("two-three-tree")
    bound = asymptotic_moment((0, 2), small)
    assert bound.regime == "SmallBound" and bound.exponent == 1 and bound.constant is None
    _, _, mixed = build("triangular", l="1/4")
    with pytest.raises(UnsupportedPower):
        asymptotic_moment((1, 1), mixed)


def test_log_power_leading_term_trend():
    """E u3(X_n) behaves like c n^l log n; the scaled ratio approaches c."""
    spec, sd, t = build("jordan-3d")
    term = asymptotic_moment((0, 0, 1), t)
    f = UPolynomial.monomial((0, 0, 1))
    ns = [10 ** 3, 10 ** 5]
    vals = exact_moment(f, ns, t, "float")
    errs = [abs(complex(v) / (n ** 0.75 * math.log(n)) - term.constant) for n, v in zip(ns, vals)]
    assert errs[1] < errs[0]


def test_expected_vector_asymptote():
    spec, sd, _ = build("triangular")
    drift, tau = expected_vector_asymptote(spec, sd)
    assert drift == [2, 0] and tau == Fraction(3, 4)


def test_moment_report_contents():
    _, _, t = build("triangular")
    rep = moment_report((0, 1), [1, 2, 10], t)
    d = rep.to_dict()
    assert d["values"][0] == "1" and d["asymptotic"]["regime"] == "SemisimpleLargeExact"
    assert isinstance(d["limit_w_moment"], float)
