import hashlib
from fractions import Fraction

import pytest

from formalgroupoid.graphs import classify, connected_factorization
from formalgroupoid.symbols import PoissonStructure, xpoly
from formalgroupoid.weights import WeightTable, literature_table, mc_estimator

MC_SAMPLES = 10 ** 6
MC_SEED = 20240611

ACCEPTANCE = []


def so3_coefficients():
    """alpha^{ij}_k = 1/2 eps_{ijk}."""
    c = [[[Fraction(0)] * 3 for _ in range(3)] for _ in range(3)]
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i][j][k] = Fraction(1, 2)
        c[j][i][k] = Fraction(-1, 2)
    return c


def heisenberg_coefficients():
    c = [[[Fraction(0)] * 3 for _ in range(3)] for _ in range(3)]
    c[0][1][2], c[1][0][2] = Fraction(1, 2), Fraction(-1, 2)
    return c


class HashWeights:
    """Arbitrary rational weights, multiplicative over connected factors.

    Purely combinatorial identities must hold for any such assignment.
    """

    def coefficient(self, g):
        if g.n == 0:
            return Fraction(1)
        if not classify(g).connected:
            out = Fraction(1)
            for f in connected_factorization(g).factors:
                out *= self.coefficient(f)
            return out
        h = int(hashlib.sha256(g.graph_id().encode()).hexdigest()[:8], 16)
        return Fraction(h % 97 - 48, 17)


@pytest.fixture(scope="session")
def lit():
    return literature_table()


@pytest.fixture(scope="session")
def mc_table():
    """Shared MC/quadrature weight table, filled on demand."""
    return WeightTable(estimator=mc_estimator(MC_SAMPLES, MC_SEED))


@pytest.fixture(scope="session")
def hash_weights():
    return HashWeights()


@pytest.fixture
def const2():
    return PoissonStructure.constant([[0, 1], [-1, 0]])


@pytest.fixture
def const3():
    return PoissonStructure.constant([[0, 2, Fraction(-1, 3)], [-2, 0, 5], [Fraction(1, 3), -5, 0]])


@pytest.fixture
def so3():
    return PoissonStructure.linear(so3_coefficients())


@pytest.fixture
def heis():
    return PoissonStructure.linear(heisenberg_coefficients())


@pytest.fixture
def quad2():
    """alpha^{12} = x1 x2 + x1^2 / 2 (every bivector in d = 2 is Poisson)."""
    return PoissonStructure(2, {(0, 1): xpoly(2, {(1, 1): Fraction(1), (2, 0): Fraction(1, 2)})})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line[1])
