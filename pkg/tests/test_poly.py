from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratsos.poly import (
    Polynomial,
    PolynomialSyntaxError,
    SOSPoly,
    expand_sos,
    format_polynomial,
    grevlex_key,
    lex_key,
    monomials_of_degree,
    monomials_up_to,
    parse_polynomial,
    product,
    variables,
)

VARS = ("x", "y", "z")


@st.composite
def polys(draw, vars=VARS, maxdeg=3):
    mons = monomials_up_to(len(vars), maxdeg)
    terms = draw(st.dictionaries(st.sampled_from(mons),
                                 st.fractions(min_value=-10, max_value=10, max_denominator=12),
                                 max_size=6))
    return Polynomial(vars, terms)


def test_parse_and_print_canonical():
    x, y = variables("x,y")
    f = parse_polynomial("(x + y)^2", "x,y")
    assert f == x**2 + 2 * x * y + y**2
    assert str(f) == "x^2 + 2*x*y + y^2"
    assert str(parse_polynomial("10 - x^2 - y", "x,y")) == "-x^2 - y + 10"


def test_parse_operators():
    f = parse_polynomial("2*x**3/4 - (y - 1)*(y + 1) + 0.5", ("x", "y"))
    assert f.coefficient((3, 0)) == Fraction(1, 2)
    assert f.coefficient((0, 2)) == -1
    assert f.coefficient((0, 0)) == Fraction(3, 2)
    assert parse_polynomial("-x^2", "x") == -parse_polynomial("x^2", "x")


@pytest.mark.parametrize("text", ["x +", "x^y", "(x", "x)", "2*w", "x^-1", "x/y", "x $ 2"])
def test_parse_errors(text):
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse_polynomial(text, "x,y")
    assert exc.value.position >= 0


def test_ring_mismatch():
    x, = variables("x")
    y, = variables("y")
    with pytest.raises(ValueError):
        x + y


def test_degree_and_leading_terms():
    x, y, z = variables("x,y,z")
    f = x**2 * z + y**3 + x
    assert f.degree() == 3
    assert f.degree_in("x") == 2
    assert not f.is_homogeneous()
    assert f.leading_monomial("grevlex") == (0, 3, 0)
    assert f.leading_monomial("lex") == (2, 0, 1)
    assert (y**3 + x * y * z).leading_monomial("grevlex") == (0, 3, 0)
    assert (y**3 + x * y * z).leading_monomial("lex") == (1, 1, 1)
    assert f.variables_used() == {"x", "y", "z"}


def test_monomial_orders():
    mons = monomials_of_degree(3, 2)
    assert len(mons) == 6
    assert max(mons, key=grevlex_key) == (2, 0, 0)
    assert min(mons, key=grevlex_key) == (0, 0, 2)
    assert sorted(mons, key=lex_key)[-1] == (2, 0, 0)
    assert len(monomials_up_to(2, 2)) == 6
    assert monomials_up_to(2, 2)[0] == (0, 0)


def test_evaluate_and_substitute():
    x, y, z = variables("x,y,z")
    f = x**4 * y**2 + x**2 * y**4 - 3 * x**2 * y**2 * z**2 + z**6
    assert f.evaluate((1, 1, 1)) == 0
    assert f(Fraction(1, 2), 1, 2) == f.evaluate({"x": Fraction(1, 2), "y": 1, "z": 2})
    xz = variables("x,z")
    g = f.substitute({"x": xz[0], "y": 1, "z": xz[1]})
    assert g.vars == ("x", "z")
    assert g == xz[0]**4 + xz[0]**2 - 3 * xz[0]**2 * xz[1]**2 + xz[1]**6
    with pytest.raises(KeyError):
        f.substitute({"x": 1})


def test_sospoly_validation_and_expand():
    x, y = variables("x,y")
    s = SOSPoly([Fraction(9), Fraction(35, 36)], [1 - y / 18, y])
    assert expand_sos(s) == 9 - y + y**2
    assert str(s) == "coeffs: {9, 35/36}\ngens: {-1/18*y + 1, y}"
    with pytest.raises(ValueError):
        SOSPoly([Fraction(-1)], [x])
    with pytest.raises(ValueError):
        SOSPoly([Fraction(0)], [x])
    with pytest.raises(ValueError):
        SOSPoly([1, 2], [x])
    assert expand_sos(SOSPoly(), ("x", "y")).is_zero()


def test_product():
    x, y = variables("x,y")
    assert product([x, y, x + y], ("x", "y")) == x**2 * y + x * y**2
    assert product([], ("x", "y")) == Polynomial.constant(("x", "y"), 1)


def test_float_mirror():
    x, y = variables("x,y")
    f = x / 3 + y
    g = f.to_float()
    assert not g.is_exact()
    assert abs(g.coefficient((1, 0)) - 1 / 3) < 1e-15
    assert f.max_abs_coefficient() == 1


@given(polys(), polys(), polys())
@settings(max_examples=60, deadline=None)
def test_ring_laws(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert f * (g + h) == f * g + f * h
    assert (f + g) - g == f
    assert (f * g).is_zero() or (f * g).degree() == f.degree() + g.degree()


@given(polys())
@settings(max_examples=80, deadline=None)
def test_print_parse_round_trip(f):
    text = format_polynomial(f)
    assert parse_polynomial(text, VARS) == f
    assert str(parse_polynomial(text, VARS)) == text


@given(polys(maxdeg=2), st.tuples(*[st.fractions(-3, 3, max_denominator=5)] * 3))
@settings(max_examples=50, deadline=None)
def test_evaluation_is_a_homomorphism(f, pt):
    g = f * f - f
    assert g.evaluate(pt) == f.evaluate(pt) ** 2 - f.evaluate(pt)
