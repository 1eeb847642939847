from fractions import Fraction

import numpy as np
import pytest

from ratsos.formulate import (
    FormulationError,
    Multiplier,
    build_gram_problem,
    monomial_basis,
    newton_basis,
    newton_polytope_contains,
    split_parameters,
)
from ratsos.forms import named_form
from ratsos.groebner import buchberger
from ratsos.poly import Polynomial, monomials_up_to, parse_polynomial, variables


def test_newton_polytope_lp():
    square = [(0, 0), (2, 0), (0, 2), (2, 2)]
    assert newton_polytope_contains(square, (1, 1))
    assert newton_polytope_contains(square, (2, 0))
    assert not newton_polytope_contains(square, (3, 1))
    assert not newton_polytope_contains([], (0, 0))


def test_motzkin_basis_pruned():
    x, y, z = variables("x,y,z")
    f = named_form("Motzkin", (x, y, z))
    basis = monomial_basis(f)
    assert sorted(basis) == sorted([(2, 1, 0), (1, 2, 0), (1, 1, 1), (0, 0, 3)])
    assert len(monomial_basis(f, prune=False)) == 20


def test_quartic_basis():
    f = parse_polynomial("2*x^4+5*y^4-2*x^2*y^2+2*x^3*y", "x,y")
    assert sorted(monomial_basis(f)) == [(0, 2), (1, 1), (2, 0)]


def test_basis_with_ideal_uses_standard_monomials():
    x, y = variables("x,y")
    gb = buchberger([x**2 + y**2 - 1])
    assert sorted(monomial_basis(10 - x**2 - y, 2, gb)) == [(0, 0), (0, 1), (1, 0)]
    with pytest.raises(FormulationError):
        monomial_basis(10 - x**2 - y, None, gb)


def test_basis_degree_errors():
    x, = variables("x")
    with pytest.raises(FormulationError):
        monomial_basis(x**4, 3)
    with pytest.raises(FormulationError):
        monomial_basis(x**4, 2)


def test_newton_basis_empty_support():
    assert newton_basis([], 2, 2) == []


def test_split_parameters():
    f = parse_polynomial("x^2 + s*x + 2*t - 1", ("x", "s", "t"))
    f0, parts, xvars = split_parameters(f, ["s", "t"])
    x, = variables("x")
    assert xvars == ("x",)
    assert f0 == x**2 - 1
    assert parts == [x, Polynomial.constant(("x",), 2)]
    with pytest.raises(FormulationError):
        split_parameters(parse_polynomial("s^2*x", ("x", "s")), ["s"])
    with pytest.raises(FormulationError):
        split_parameters(f, ["u"])


def test_gram_system_matches_coefficients():
    f = parse_polynomial("2*x^4+5*y^4-2*x^2*y^2+2*x^3*y", "x,y")
    prob, inst = build_gram_problem(f)
    assert inst.block_sizes == [3]
    assert inst.m == 5                       # x^4, x^3y, x^2y^2, xy^3, y^4
    # any exact Gram matrix satisfies the equations
    Q = [[Fraction(2), Fraction(1), Fraction(-83, 40)],
         [Fraction(1), Fraction(43, 20), Fraction(0)],
         [Fraction(-83, 40), Fraction(0), Fraction(5)]]
    basis = prob.basis
    order = [basis.index(m) for m in [(2, 0), (1, 1), (0, 2)]]
    G = [[Q[order.index(i)][order.index(j)] for j in range(3)] for i in range(3)]
    X = [np.array([[float(v) for v in row] for row in G])]
    assert np.allclose(inst.apply(X), inst.b)


def test_unrepresentable_monomial():
    x, = variables("x")
    with pytest.raises(FormulationError, match="not representable"):
        build_gram_problem(x**3 + 1, [(0,), (1,)])


def test_parameters_and_objective_in_sdp():
    f = parse_polynomial("x^2 - t", ("x", "t"))
    prob, inst = build_gram_problem(f, params=["t"], objective={"t": -1})
    assert prob.params == ["t"]
    assert inst.block_sizes[-1] == -2          # t = t+ - t-
    assert inst.C[-1].tolist() == [-1.0, 1.0]
    with pytest.raises(FormulationError):
        build_gram_problem(f, params=["t"], objective={"u": 1})


def test_multipliers_add_blocks_and_free_slots():
    x, y = variables("x,y")
    h = x**2 + y**2 - 1
    prob, inst = build_gram_problem(Polynomial(("x", "y")), None,
                                    multipliers=[Multiplier(h, monomials_up_to(2, 0))],
                                    normalize_block=0, two_d=2)
    assert len(prob.free_slots) == 1
    assert inst.block_sizes[-1] == -2
    sos_mult = Multiplier(h, [(0, 0)], sos=True)
    prob, inst = build_gram_problem(10 - x**2 - y, None, multipliers=[sos_mult], two_d=2)
    assert len(prob.gram_sizes) == 2


def test_trace_objective():
    x, y = variables("x,y")
    gb = buchberger([x**2 + y**2 - 1])
    prob, inst = build_gram_problem(10 - x**2 - y, ideal=gb, trace_objective=True, two_d=2)
    assert np.array_equal(inst.C[0], np.eye(3))
