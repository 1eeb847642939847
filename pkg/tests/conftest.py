import random

import pytest

from ratsos.poly import Polynomial, monomials_up_to


def random_poly(rng: random.Random, vars, maxdeg: int, nterms: int, cmax: int = 5) -> Polynomial:
    mons = monomials_up_to(len(vars), maxdeg)
    terms = {}
    for _ in range(nterms):
        terms[rng.choice(mons)] = rng.randint(-cmax, cmax)
    return Polynomial(vars, terms)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
