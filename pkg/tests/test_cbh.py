from fractions import Fraction

import pytest
import sympy

from formalgroupoid.cbh import (LieAlgebra, cbh_series, cbh_terms, cbh_words, compare_with_genfun,
                                from_linear_poisson, momenta, strictly_upper_triangular)
from formalgroupoid.genfun import build_S
from formalgroupoid.symbols import PoissonStructure

from test_symbols import to_sympy


def E(size, i, j):
    m = [[0] * size for _ in range(size)]
    m[i][j] = 1
    return m


HEIS_BASIS = [E(3, 0, 1), E(3, 1, 2), E(3, 0, 2)]


def matrix_log_oracle(basis, N):
    """Components of log(exp X exp Y) in the basis, X = sum p1_i b_i, Y = sum p2_i b_i."""
    size = len(basis[0])
    d = len(basis)
    p1, p2 = sympy.symbols(f"p1_1:{d + 1}"), sympy.symbols(f"p2_1:{d + 1}")
    B = [sympy.Matrix(b) for b in basis]
    X = sum((p1[i] * B[i] for i in range(d)), sympy.zeros(size))
    Y = sum((p2[i] * B[i] for i in range(d)), sympy.zeros(size))

    def exp(A):
        out, term = sympy.eye(size), sympy.eye(size)
        for k in range(1, size):
            term = term * A / k
            out += term
        return out

    A = exp(X) * exp(Y) - sympy.eye(size)
    Z, power = sympy.zeros(size), sympy.eye(size)
    for k in range(1, size):
        power = power * A
        Z += sympy.Rational((-1) ** (k + 1), k) * power
    Z = Z.applyfunc(sympy.expand)
    # read off coordinates: basis matrices are elementary, one entry each
    out = []
    for b in basis:
        (i, j), = [(r, c) for r in range(size) for c in range(size) if b[r][c]]
        out.append(Z[i, j])
    # keep total degree <= N
    return [sympy.Add(*[t for t in sympy.Add.make_args(z) if sympy.Poly(t, *p1, *p2).total_degree() <= N])
            for z in out]


def test_from_linear_poisson(so3, heis, quad2):
    L = from_linear_poisson(so3)
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert L.c[i][j][k] == eps.get((i, j, k), 0)
    assert from_linear_poisson(heis).c == LieAlgebra.heisenberg().c
    assert not from_linear_poisson(PoissonStructure(2, {})).nonzero()
    with pytest.raises(ValueError):
        from_linear_poisson(quad2)


def test_lie_algebra_validation():
    c = [[[0] * 2 for _ in range(2)] for _ in range(2)]
    c[0][1][0] = 1
    with pytest.raises(ValueError):
        LieAlgebra(c)
    assert LieAlgebra.from_matrices(HEIS_BASIS).c == LieAlgebra.heisenberg().c


def test_low_order_words():
    w = cbh_words(3)
    assert w[(0,)] == w[(1,)] == 1
    assert w[(0, 1)] == Fraction(1, 2) and w[(1, 0)] == Fraction(-1, 2)
    assert w[(0, 0, 1)] == Fraction(1, 12)


def test_order_two_is_half_bracket(so3):
    L = from_linear_poisson(so3)
    u, v = momenta(3, 2, 0), momenta(3, 2, 1)
    t = cbh_terms(L, u, v, 2)
    half = [b.scale(Fraction(1, 2)) for b in L.bracket(u, v)]
    assert t[2] == half


def test_order_three_term(so3):
    """1/12 ([u,[u,v]] + [v,[v,u]]); the display with [p_2,p_2] in its first bracket vanishes."""
    L = from_linear_poisson(so3)
    u, v = momenta(3, 2, 0), momenta(3, 2, 1)
    br = L.bracket
    expected = [a.scale(Fraction(1, 12)) + b.scale(Fraction(1, 12))
                for a, b in zip(br(u, br(u, v)), br(v, br(v, u)))]
    assert cbh_terms(L, u, v, 3)[3] == expected
    assert all(c.is_zero() for c in br(u, br(v, v)))


def test_abelian():
    L = LieAlgebra([[[0] * 2 for _ in range(2)] for _ in range(2)])
    u, v = momenta(2, 2, 0), momenta(2, 2, 1)
    assert cbh_series(L, u, v, 5) == [a + b for a, b in zip(u, v)]


@pytest.mark.parametrize("basis", [HEIS_BASIS, strictly_upper_triangular(4), strictly_upper_triangular(5)],
                         ids=["heisenberg", "n4", "n5"])
def test_matrix_log_oracle(basis):
    L = LieAlgebra.from_matrices(basis)
    d = len(basis)
    series = cbh_series(L, momenta(d, 2, 0), momenta(d, 2, 1), 4)
    for ours, oracle in zip(series, matrix_log_oracle(basis, 4)):
        assert sympy.expand(to_sympy(ours) - oracle) == 0


@pytest.mark.parametrize("size", [3, 4, 5])
def test_associativity(size):
    L = LieAlgebra.from_matrices(strictly_upper_triangular(size))
    d = L.d
    a, b, c = (momenta(d, 3, k) for k in range(3))
    N = size - 1          # exact: longer brackets vanish
    lhs = cbh_series(L, a, cbh_series(L, b, c, N), N)
    rhs = cbh_series(L, cbh_series(L, a, b, N), c, N)
    assert lhs == rhs


def test_homogeneity(so3):
    L = from_linear_poisson(so3)
    u, v = momenta(3, 2, 0), momenta(3, 2, 1)
    t = cbh_terms(L, u, v, 4)
    ts = cbh_terms(L, [x.scale(3) for x in u], [x.scale(3) for x in v], 4)
    for n in range(1, 5):
        assert ts[n] == [x.scale(3 ** n) for x in t[n]]


def test_compare_with_genfun_exact(heis, so3, lit):
    for alpha in (heis, so3):
        rep = compare_with_genfun(build_S(alpha, 2, lit), from_linear_poisson(alpha), 2)
        assert [r["exact_zero"] for r in rep] == [True, True]


def test_compare_detects_wrong_weights(so3, hash_weights):
    rep = compare_with_genfun(build_S(so3, 2, hash_weights), from_linear_poisson(so3), 2)
    assert not rep[1]["exact_zero"] and rep[1]["max_residual"] > 0


def test_compare_abelian(hash_weights):
    zero = PoissonStructure(3, {})
    rep = compare_with_genfun(build_S(zero, 3, hash_weights), from_linear_poisson(zero), 3)
    assert all(r["exact_zero"] for r in rep)
