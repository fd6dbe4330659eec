import itertools
import json
import random
from fractions import Fraction

import pytest
import sympy

from formalgroupoid.errors import DegreeCapError, PoissonInputError
from formalgroupoid.graphs import KontsevichGraph, connected_factorization, enumerate_graphs, iter_graphs
from formalgroupoid.symbols import (PoissonStructure, Symbol, hat_B, load_poisson, parse_poisson,
                                    parse_polynomial, set_degree_cap, xpoly)

G = KontsevichGraph


def to_sympy(s):
    d, m = s.d, s.m
    names = [sympy.Symbol(f"p{b + 1}_{i + 1}") for b in range(m) for i in range(d)]
    names += [sympy.Symbol(f"x{i + 1}") for i in range(d)] + [sympy.Symbol("h")]
    expr = 0
    for k, c in s.terms.items():
        term = sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.Integer(c)
        for v, e in zip(names, k):
            term *= v ** e
        expr += term
    return sympy.expand(expr)


def random_alpha(d, seed, deg=2):
    rng = random.Random(seed)
    ent = {}
    for i, j in itertools.combinations(range(d), 2):
        terms = {}
        for _ in range(2):
            e = [0] * d
            for _ in range(rng.randint(0, deg)):
                e[rng.randrange(d)] += 1
            terms[tuple(e)] = Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 3))
        ent[(i, j)] = xpoly(d, terms)
    return PoissonStructure(d, ent, check_jacobi=False)


def exp_oracle(g, alpha):
    """B_Gamma(e^{p.x}, e^{q.x}) e^{-(p+q)x}, expanded with sympy derivatives."""
    d = alpha.d
    xs = sympy.symbols(f"x1:{d + 1}")
    P = [sympy.symbols(f"p{b + 1}_1:{d + 1}") for b in range(g.m)]
    exps = [sympy.exp(sum(P[b][i] * xs[i] for i in range(d))) for b in range(g.m)]
    A = [[to_sympy(alpha.alpha(i, j)) for j in range(d)] for i in range(d)]
    total = 0
    for I in itertools.product(range(d), repeat=2 * g.n):
        inc = {v: [] for v in g.vertices}
        for k, (a, b) in enumerate(g.targets):
            inc[a].append(I[2 * k])
            inc[b].append(I[2 * k + 1])
        term = 1
        for k in range(1, g.n + 1):
            f = A[I[2 * k - 2]][I[2 * k - 1]]
            for j in inc[k]:
                f = sympy.diff(f, xs[j])
            term *= f
        for b in range(1, g.m + 1):
            f = exps[b - 1]
            for j in inc[-b]:
                f = sympy.diff(f, xs[j])
            term *= f
        total += term
    return sympy.expand(sympy.simplify(total / sympy.prod(exps)))


# -- Poisson structures ---------------------------------------------------------------------


def test_parse_constant_and_linear():
    a = parse_poisson(json.dumps({"dim": 2, "entries": [{"i": 1, "j": 2, "poly": [{"coef": "1", "exp": [0, 0]}]}]}))
    assert a.is_constant() and a.is_poisson()
    doc = {"dim": 3, "entries": [{"i": i, "j": j, "poly": [{"coef": c, "exp": e}]}
                                 for i, j, c, e in ((1, 2, "1", [0, 0, 1]), (2, 3, "1", [1, 0, 0]),
                                                    (1, 3, "-1", [0, 1, 0]))]}
    a = parse_poisson(json.dumps(doc))
    assert a.is_linear() and a.is_poisson()


def test_antisymmetry_violation():
    doc = {"dim": 2, "entries": [{"i": 1, "j": 2, "poly": [{"coef": "1", "exp": [1, 0]}]},
                                 {"i": 2, "j": 1, "poly": [{"coef": "1", "exp": [1, 0]}]}]}
    with pytest.raises(PoissonInputError, match="antisymmetry"):
        parse_poisson(json.dumps(doc))


def test_jacobi_violation_and_bypass():
    # alpha^{12} = x3, alpha^{23} = x2 fails Jacobi
    doc = {"dim": 3, "entries": [{"i": 1, "j": 2, "poly": [{"coef": "1", "exp": [0, 0, 1]}]},
                                 {"i": 2, "j": 3, "poly": [{"coef": "1", "exp": [0, 1, 0]}]}]}
    with pytest.raises(PoissonInputError, match="Jacobi"):
        parse_poisson(json.dumps(doc))
    a = parse_poisson(json.dumps(doc), check_jacobi=False)
    assert not a.is_poisson()


def test_json_syntax_error_reports_line():
    text = '{\n "dim": 2,\n "entries": [\n  {"i": 1 "j": 2}\n ]\n}'
    with pytest.raises(PoissonInputError) as exc:
        parse_poisson(text)
    assert exc.value.line == 4 and "line 4" in str(exc.value)


def test_toml_roundtrip(tmp_path, so3):
    p = tmp_path / "so3.toml"
    rows = []
    for e in so3.to_document()["entries"]:
        polys = ", ".join(f'{{ coef = "{t["coef"]}", exp = {t["exp"]} }}' for t in e["poly"])
        rows.append(f"[[entries]]\ni = {e['i']}\nj = {e['j']}\npoly = [{polys}]\n")
    p.write_text("dim = 3\nlinear = true\n\n" + "\n".join(rows))
    a = load_poisson(p)
    assert a.entries == so3.entries


def test_linear_marker_rejects_quadratic():
    doc = {"dim": 2, "linear": True, "entries": [{"i": 1, "j": 2, "poly": [{"coef": "1", "exp": [1, 1]}]}]}
    with pytest.raises(PoissonInputError, match="linear"):
        parse_poisson(json.dumps(doc))


def test_jacobi_examples(const3, so3):
    assert all(r.is_zero() for r in const3.jacobi_residual())
    assert all(r.is_zero() for r in so3.jacobi_residual())
    a = PoissonStructure(2, {(0, 1): xpoly(2, {(1, 1): 1})})
    assert a.jacobi_residual() == []


# -- symbols ----------------------------------------------------------------------------------


def test_monomial_product():
    a = Symbol.monomial(2, 1, [[1, 0]], [0, 2], c=Fraction(1, 2))
    b = Symbol.monomial(2, 1, [[0, 1]], [1, 0], c=3)
    assert (a * b).terms == {(1, 1, 1, 2, 0): Fraction(3, 2)}


def test_x_derivative_finite_difference(quad2):
    rng = random.Random(3)
    a = quad2.alpha(0, 1)
    da = a.diff_x(0)
    for _ in range(5):
        x = [rng.uniform(-2, 2), rng.uniform(-2, 2)]
        eps = 1e-6
        fd = (float(a.evaluate([], [x[0] + eps, x[1]])) - float(a.evaluate([], [x[0] - eps, x[1]]))) / (2 * eps)
        assert abs(fd - float(da.evaluate([], x))) < 1e-6


def test_substitute_then_evaluate():
    rng = random.Random(5)
    f = Symbol(2, 2)
    for _ in range(6):
        f = f + Symbol.monomial(2, 2, [[rng.randint(0, 2), rng.randint(0, 1)], [rng.randint(0, 1), rng.randint(0, 2)]],
                                [rng.randint(0, 1), 0], c=rng.randint(-3, 3))
    g = f.sub_blocks(3, [[0, 1], [2]])
    p = [[Fraction(rng.randint(-5, 5), 3) for _ in range(2)] for _ in range(3)]
    x = [Fraction(2, 7), Fraction(-1, 2)]
    summed = [[p[0][i] + p[1][i] for i in range(2)], p[2]]
    assert g.evaluate(p, x) == f.evaluate(summed, x)


def test_degree_cap():
    x = Symbol.x(1, 0, 0)
    set_degree_cap(4)
    try:
        with pytest.raises(DegreeCapError):
            (x ** 3) * (x ** 2)
    finally:
        set_degree_cap(24)


def test_json_output_is_sorted_and_exact():
    s = Symbol.monomial(1, 1, [[1]], [0], c=Fraction(1, 3)) + Symbol.x(1, 1, 0)
    doc = s.to_json()
    assert {r["coef"] for r in doc["terms"]} == {"1/3", "1"}
    assert json.dumps(doc) == json.dumps(Symbol(1, 1, dict(reversed(list(s.terms.items())))).to_json())


def test_parse_polynomial():
    p = parse_polynomial("3/2*x1^2*x2 - x2 + 1", 2)
    assert p.terms == {(2, 1, 0): Fraction(3, 2), (0, 1, 0): -1, (0, 0, 0): 1}
    for bad in ("x1 + y", "1/x1", "x1^(", "sin(x1)"):
        with pytest.raises(ValueError):
            parse_polynomial(bad, 2)


# -- hat_B ---------------------------------------------------------------------------------------


def test_hat_B_wedge(so3):
    assert hat_B(G(1, 2, [(-1, -2)]), so3) == so3.bivector_symbol()


def test_hat_B_three_vertex_example():
    alpha = random_alpha(2, 11)
    g = G(3, 2, [(-2, 2), (-1, -2), (-2, 2)])
    d = 2
    xs = sympy.symbols("x1:3")
    p1, p2 = sympy.symbols("p1_1:3"), sympy.symbols("p2_1:3")
    A = [[to_sympy(alpha.alpha(i, j)) for j in range(d)] for i in range(d)]
    expected = 0
    for i, j, k, l, m, n in itertools.product(range(d), repeat=6):
        expected += A[i][j] * sympy.diff(A[k][l], xs[n], xs[j]) * A[m][n] * p1[k] * p2[i] * p2[l] * p2[m]
    assert sympy.expand(to_sympy(hat_B(g, alpha)) - expected) == 0


def test_hat_B_constant_vanishes(const3):
    for g in enumerate_graphs(2, 2):
        if g.aerial_edges():
            assert hat_B(g, const3).is_zero()


def test_hat_B_exponential_oracle():
    alpha = random_alpha(2, 7)
    for n in (1, 2):
        for g in enumerate_graphs(n, 2):
            assert sympy.expand(to_sympy(hat_B(g, alpha)) - exp_oracle(g, alpha)) == 0, g.graph_id()


def test_hat_B_slot_swap(quad2):
    alpha = random_alpha(3, 2)
    for g in enumerate_graphs(2, 2):
        for k in (1, 2):
            assert hat_B(g.swap_slots(k), alpha) == -hat_B(g, alpha)


def test_hat_B_factorization():
    alpha = random_alpha(2, 4)
    for g in iter_graphs(3, 2):
        fz = connected_factorization(g)
        prod = Symbol.const(2, 2, 1)
        for f in fz.factors:
            prod = prod * hat_B(f, alpha)
        assert prod == hat_B(g, alpha)
