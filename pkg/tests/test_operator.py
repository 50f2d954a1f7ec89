from fractions import Fraction

import pytest

from conftest import build
from oracles import phi_direct, rational, stirling2_count, symbols, to_sympy
from polyaproc.errors import BasisCapExceeded, ResonanceAmbiguity
from polyaproc.fixtures import get_fixture
from polyaproc.operator import (
    PhiMatrix,
    ReducedTable,
    monogenic_nu,
    nilpotence_index,
    phi_apply,
    phi_partial_apply,
    rising_factorial_poly,
    stirling_inversion,
)
from polyaproc.process import ProcessSpec
from polyaproc.spectral import analyze
from polyaproc.upoly import UPolynomial, indices_up_to, order_key

EXACT_FIXTURES = ["triangular", "general-2d", "two-three-tree", "jordan-3d", "triangular-3d", "ycart-4d"]


@pytest.mark.parametrize("name", EXACT_FIXTURES)
def test_phi_matches_finite_difference_definition(name):
    spec, sd, table = build(name)
    s = sd.dimension
    xs = symbols(s)
    top = tuple([0] * (s - 1) + [3]) if s <= 3 else tuple([0] * (s - 1) + [2])
    for alpha in indices_up_to(top):
        mono = UPolynomial.monomial(alpha)
        got = to_sympy(phi_apply(mono, spec, sd), sd.forms, xs)
        expect = phi_direct(to_sympy(mono, sd.forms, xs), spec.replacement, xs)
        assert got == expect, alpha


@pytest.mark.parametrize("name", EXACT_FIXTURES)
def test_phi_on_linear_forms_is_composition_with_endomorphism(name):
    spec, sd, table = build(name)
    s = sd.dimension
    for k in range(1, s + 1):
        f = UPolynomial.variable(s, k)
        img = table.op.apply(f)
        expect = UPolynomial.variable(s, k, sd.eigenvalues[k - 1])
        if sd.eps[k - 1]:
            expect = expect + UPolynomial.variable(s, k - 1)
        assert img == expect
        assert phi_partial_apply(f, sd) == expect


def test_phi_partial_is_a_derivation():
    _, sd, _ = build("jordan-3d")
    f = UPolynomial.variable(3, 2) ** 2
    g = UPolynomial.variable(3, 3) + UPolynomial.variable(3, 1)
    lhs = phi_partial_apply(f * g, sd)
    rhs = phi_partial_apply(f, sd) * g + f * phi_partial_apply(g, sd)
    assert lhs == rhs
    assert phi_partial_apply(UPolynomial.variable(3, 3), sd) == (
        UPolynomial.variable(3, 3, Fraction(3, 4)) + UPolynomial.variable(3, 2))


def test_phi_matrix_is_triangular_with_pairing_diagonal():
    _, sd, table = build("triangular-3d")
    mat = PhiMatrix.build((0, 0, 3), table.op)
    assert mat.is_upper_triangular()
    assert mat.diagonal() == [sd.pairing(b) for b in mat.basis]
    small = PhiMatrix.build((1, 0, 0), table.op)
    assert small.basis == [(0, 0, 0), (1, 0, 0)] and small.diagonal() == [0, 1]


def test_basis_cap():
    _, _, table = build("triangular-3d")
    with pytest.raises(BasisCapExceeded):
        PhiMatrix.build((0, 0, 6), table.op, cap=50)
    with pytest.raises(BasisCapExceeded):
        ReducedTable(table.spec, table.spectral, cap=50).reduced((0, 0, 6))


@pytest.mark.parametrize("name", ["triangular", "two-three-tree", "triangular-3d"])
def test_q_p_delta1_closed_form(name):
    _, sd, table = build(name)
    s = sd.dimension
    for p in range(1, 7):
        alpha = tuple([p] + [0] * (s - 1))
        assert table.reduced(alpha) == rising_factorial_poly(s, 1, p)


@pytest.mark.parametrize("ell", [Fraction(3, 4), Fraction(11, 20), Fraction(-1, 2)])
def test_triangular_q_p_delta2(ell):
    _, _, table = build("triangular", l=ell)
    for p in range(1, 6):
        assert table.reduced((0, p)) == rising_factorial_poly(2, 2, p, ell)


@pytest.mark.parametrize("a, b", [(Fraction(1, 4), Fraction(1, 5)), (Fraction(9, 20), Fraction(11, 20)),
                                  (Fraction(1, 3), Fraction(1, 3))])
def test_general_urn_second_reduced_polynomial(a, b):
    _, sd, table = build("general-2d", a=a, b=b)
    assert list(sd.forms[1]) == [a, -b]
    Q = table.reduced((0, 2))
    u2sq = UPolynomial.monomial((0, 2))
    diff = u2sq - Q
    expect = (UPolynomial.variable(2, 2, -(a - b) * (1 - a - b))
              + UPolynomial.variable(2, 1, a * b * (1 - a - b) ** 2 / (2 * (a + b) - 1)))
    assert diff == expect


def test_conjugate_pair():
    _, _, t = build("conjugate-triangular")
    assert t.reduced((0, 2)) == UPolynomial.variable(2, 2) * (UPolynomial.variable(2, 2) + Fraction(11, 20))
    _, sd, t2 = build("conjugate-general")
    assert list(sd.forms[1]) == [Fraction(-1, 4), Fraction(1, 5)]
    expect = UPolynomial(2, {(0, 2): Fraction(1), (0, 1): Fraction(-11, 400), (1, 0): Fraction(121, 800)})
    assert t2.reduced((0, 2)) == expect


@pytest.mark.parametrize("name", ["triangular", "jordan-3d", "triangular-3d", "two-three-tree"])
def test_reduced_polynomials_are_generalized_eigenvectors_of_direct_phi(name):
    spec, sd, table = build(name)
    s = sd.dimension
    xs = symbols(s)
    for alpha in indices_up_to(tuple([0] * (s - 1) + [3])):
        z = sd.pairing(alpha)
        g = to_sympy(table.reduced(alpha), sd.forms, xs)
        for _ in range(s + 3):
            g = phi_direct(g, spec.replacement, xs) - rational(z) * g
            g = g.expand()
        assert g == 0, alpha


def test_items_one_and_four_and_five():
    _, sd, t = build("jordan-3d")
    assert t.reduced((0, 0, 0)) == UPolynomial.constant(3)
    for k in range(1, 4):
        e = tuple(int(i == k - 1) for i in range(3))
        assert t.reduced(e) == UPolynomial.monomial(e)
    t.reduced((0, 0, 4))
    for alpha in indices_up_to((0, 0, 4)):
        for beta in t.q[alpha]:
            assert not t.resonant(alpha, beta) and order_key(beta) < order_key(alpha)
        for beta in t.p[alpha]:
            assert t.resonant(alpha, beta) and order_key(beta) < order_key(alpha)


def test_nilpotence_examples_in_a_size_two_block():
    _, sd, t = build("jordan-3d")
    assert nilpotence_index((0, 1, 1), t) == monogenic_nu((0, 1, 1), sd) == 1
    assert nilpotence_index((0, 0, 2), t) == monogenic_nu((0, 0, 2), sd) == 2
    assert nilpotence_index((0, 1, 0), t) == 0
    # the two routes agree for every large power up to degree 4
    for alpha in indices_up_to((0, 0, 4)):
        if alpha[0] == 0 and any(alpha):
            assert t.nilpotence_by_iteration(alpha) == t.nilpotence_by_iteration(alpha, partial=True)


@pytest.mark.parametrize("p", range(1, 7))
def test_stirling_inversion(p):
    coeffs = stirling_inversion(p, 2)
    for (k, _), c in coeffs.items():
        assert c == (-1) ** (p - k) * stirling2_count(p, k)
    _, _, t = build("triangular")
    total = UPolynomial.zero(2)
    for alpha, c in coeffs.items():
        total = total + t.reduced(alpha) * c
    assert total == UPolynomial.monomial((p, 0))


def test_numeric_resonance_ambiguity():
    a, b = 0.25 + 5e-9, 0.5
    R = [[1.0, 0.0, 0.0], [1 - a, a, 0.0], [(1 - b) / 2, (1 - b) / 2, b]]
    spec = ProcessSpec(R, [1.0, 1.0, 1.0])
    sd = analyze(spec)
    t = ReducedTable(spec, sd)
    with pytest.raises(ResonanceAmbiguity):
        t.reduced((0, 0, 2) if abs(complex(sd.eigenvalues[2]) - a) < 1e-6 else (0, 2, 0))


def test_numeric_matches_exact_on_rational_fixture():
    spec, sd, t = build("jordan-3d")
    sdn = analyze(spec, mode="numeric")
    tn = ReducedTable(spec, sdn)
    assert not sdn.exact
    for alpha in indices_up_to((0, 0, 3)):
        assert t.reduced(alpha).to_complex().almost_equal(tn.reduced(alpha), 1e-8), alpha


def test_fixture_parameters_reach_the_operator():
    spec = get_fixture("triangular", l="1/2").spec
    assert spec.replacement[1] == (Fraction(1, 2), Fraction(1, 2))
