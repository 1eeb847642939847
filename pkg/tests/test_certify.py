import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratsos.applications import solve_sos
from ratsos.certify import (
    exact_ldlt,
    gram_to_sos,
    quadratic_form,
    rationalize,
    round_best,
    round_dyadic,
    verify_certificate,
)
from ratsos.formulate import build_gram_problem, decode_gram
from ratsos.groebner import buchberger
from ratsos.poly import SOSPoly, expand_sos, parse_polynomial, variables
from ratsos.sdp import solve

F = Fraction


def reconstruct(fact):
    n = len(fact.D)
    return [[sum(fact.L[i][k] * fact.D[k] * fact.L[j][k] for k in range(n)) for j in range(n)]
            for i in range(n)]


def permuted(Q, perm):
    return [[F(Q[perm[i]][perm[j]]) for j in range(len(Q))] for i in range(len(Q))]


def test_ldlt_of_printed_quartic_gram():
    Q = [[2, 1, F(-83, 40)], [1, F(43, 20), 0], [F(-83, 40), 0, 5]]
    fact = exact_ldlt(Q)
    assert fact.psd
    assert [d for d in fact.D if d] == [5, F(43, 20), F(231773, 344000)]
    assert reconstruct(fact) == permuted(Q, fact.perm)


def test_ldlt_witness_for_indefinite():
    fact = exact_ldlt([[0, 1], [1, 0]])
    assert not fact.psd
    w = fact.witness
    assert quadratic_form([[0, 1], [1, 0]], w) < 0
    assert [abs(v) for v in w] == [1, 1]
    fact = exact_ldlt([[1, 2], [2, 1]])
    assert quadratic_form([[1, 2], [2, 1]], fact.witness) < 0


def test_ldlt_rejects_bad_input():
    with pytest.raises(ValueError):
        exact_ldlt([[1, 2], [3, 1]])
    with pytest.raises(ValueError):
        exact_ldlt([[1, 2]])


def test_ldlt_semidefinite_with_zero_pivots():
    Q = [[1, 1, 0], [1, 1, 0], [0, 0, 0]]
    fact = exact_ldlt(Q)
    assert fact.psd
    assert sum(1 for d in fact.D if d) == 1
    assert reconstruct(fact) == permuted(Q, fact.perm)


def random_rational_psd(rng, n):
    r = rng.randint(1, n)
    M = [[F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)] for _ in range(r)]
    return [[sum(M[k][i] * M[k][j] for k in range(r)) for j in range(n)] for i in range(n)]


def test_ldlt_reconstructs_random_psd():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(1, 6)
        Q = random_rational_psd(rng, n)
        fact = exact_ldlt(Q)
        assert fact.psd
        assert all(d >= 0 for d in fact.D)
        assert reconstruct(fact) == permuted(Q, fact.perm)


@st.composite
def symmetric(draw):
    n = draw(st.integers(1, 5))
    vals = draw(st.lists(st.integers(-3, 3), min_size=n * n, max_size=n * n))
    A = [[F(vals[i * n + j]) for j in range(n)] for i in range(n)]
    return [[A[i][j] + A[j][i] if i != j else abs(A[i][i]) * 2 for j in range(n)]
            for i in range(n)]


@given(symmetric())
@settings(max_examples=150, deadline=None)
def test_ldlt_psd_or_witness(Q):
    fact = exact_ldlt(Q)
    if fact.psd:
        assert reconstruct(fact) == permuted(Q, fact.perm)
    else:
        assert quadratic_form(Q, fact.witness) < 0


def test_rounding_helpers():
    assert round_dyadic(0.3, 3) == F(2, 8)
    assert round_dyadic(-0.3, 3) == F(-2, 8)
    assert round_dyadic(0.5, 0) == 1
    assert round_best(1 / 3, 3) == F(1, 3)
    assert round_best(0.30000001, 10) == F(3, 10)


def test_gram_to_sos_matches_quadratic_form():
    Q = [[2, 1, F(-83, 40)], [1, F(43, 20), 0], [F(-83, 40), 0, 5]]
    basis = [(2, 0), (1, 1), (0, 2)]
    s = gram_to_sos(Q, basis, ("x", "y"))
    f = parse_polynomial("2*x^4+5*y^4-2*x^2*y^2+2*x^3*y", "x,y")
    assert expand_sos(s) == f
    assert verify_certificate(s, f)
    with pytest.raises(ValueError):
        gram_to_sos([[0, 1], [1, 0]], [(0, 0), (1, 0)], ("x", "y"))


def test_verify_certificate_negative_cases():
    x, y = variables("x,y")
    s = SOSPoly([F(9), F(35, 36)], [1 - y / 18, y])
    gb = buchberger([x**2 + y**2 - 1])
    assert verify_certificate(s, 10 - x**2 - y, gb)
    assert not verify_certificate(s, 10 - x**2 - y)
    assert not verify_certificate(SOSPoly([F(9), F(1)], [1 - y / 18, y]), 10 - x**2 - y, gb)
    assert verify_certificate(SOSPoly(), 0 * x)


def test_verify_with_multipliers():
    x, y = variables("x,y")
    h = x**2 + y**2 - 1
    s = SOSPoly([F(9), F(35, 36)], [1 - y / 18, y])
    # s = (10 - x^2 - y) + 1*h
    assert verify_certificate(s, 10 - x**2 - y, None, [(1 + 0 * x, h)])
    assert not verify_certificate(s, 10 - x**2 - y, None, [(2 + 0 * x, h)])


def test_rationalize_starts_at_round_tol():
    f = parse_polynomial("2*x^4+5*y^4-2*x^2*y^2+2*x^3*y", "x,y")
    prob, inst = build_gram_problem(f)
    res = decode_gram(prob, inst, solve(inst))
    for k in (3, 6, 10):
        rg = rationalize(prob, res, k)
        assert rg.precision >= k
        assert rg.residual_ok
        assert verify_certificate(gram_to_sos(rg.Q, rg.basis, prob.vars), f)


def test_rationalize_refuses_failed_solve():
    x, y, z = variables("x,y,z")
    from ratsos.forms import named_form
    res = solve_sos(named_form("Motzkin", (x, y, z)), round_tol=None)
    assert not res.ok
    with pytest.raises(Exception):
        rationalize(res.problem, res, 3)
