"""Kontsevich star product on polynomials and its loop expansion.

The operator ``f*g = sum_n h^n/n! sum_{G_{n,2}} W B_Gamma(f, g)`` is kept as
its symbol, an m = 2 symbol with h, and applied to polynomials by reading
``p^1`` and ``p^2`` monomials as derivatives of f and g.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import classify, connected_factorization, enumerate_connected, enumerate_graphs
from .symbols import Symbol, hat_B
from .uncertainty import Measured


def _derivative(f, multi, cache):
    key = tuple(multi)
    v = cache.get(key)
    if v is None:
        v = f
        for i, e in enumerate(multi):
            for _ in range(e):
                v = v.diff_x(i)
        cache[key] = v
    return v


def apply_symbol(P, f, g, trunc=None):
    """Bidifferential operator with symbol P applied to XPolys f, g."""
    d = P.d
    cf, cg = {}, {}
    out = Symbol(d, 0)
    for k, c in P.terms.items():
        I, J, rest = k[:d], k[d:2 * d], k[2 * d:]
        df = _derivative(f, I, cf)
        if df.is_zero():
            continue
        dg = _derivative(g, J, cg)
        if dg.is_zero():
            continue
        coef = Symbol(d, 0, {rest: c})
        out = out + coef.mul(df, trunc).mul(dg, trunc)
    return out


def star_operator(alpha, N, weights):
    """Symbol sum_{n<=N} h^n/n! sum_{G_{n,2}} W_Gamma hat_B_Gamma (with n = 0 the identity)."""
    d = alpha.d
    P = Symbol.const(d, 2, 1)
    for n in range(1, N + 1):
        acc = Symbol(d, 2)
        for g in enumerate_graphs(n, 2):
            b = hat_B(g, alpha)
            if b.is_zero():
                continue
            acc = acc + b.scale(weights.coefficient(g))
        P = P + (acc / math.factorial(n)).hshift(n)
    return P


def star_product(f, g, alpha, N, weights):
    """f*g to order N, as an XPoly with h."""
    return apply_symbol(star_operator(alpha, N, weights), f, g, trunc=N)


def associativity_residual(f, g, k, alpha, N, weights):
    P = star_operator(alpha, N, weights)
    left = apply_symbol(P, apply_symbol(P, f, g, N), k, N)
    right = apply_symbol(P, f, apply_symbol(P, g, k, N), N)
    return (left - right).truncate(N)


@dataclass
class LoopGrading:
    d: int
    N: int
    parts: dict = field(default_factory=dict)      # (loops, n) -> sum W/n! hat_B over B^l_n
    loops: dict = field(default_factory=dict)      # graph id -> loop number

    def D(self, l):
        acc = Symbol(self.d, 2)
        for (ll, n), s in sorted(self.parts.items()):
            if ll == l:
                acc = acc + s
        return acc


def loop_grading(alpha, N, weights):
    """D^l = sum over connected graphs with l loops of W/|Gamma|! hat_B, |Gamma| <= N."""
    lg = LoopGrading(alpha.d, N)
    for n in range(1, N + 1):
        for g in enumerate_connected(n, 2):
            b_num = classify(g).loop_number
            if b_num < 0:
                raise AssertionError(f"negative loop number for {g.graph_id()}")
            lg.loops[g.graph_id()] = b_num
            b = hat_B(g, alpha)
            if b.is_zero():
                continue
            key = (b_num, n)
            part = lg.parts.get(key, Symbol(alpha.d, 2))
            lg.parts[key] = part + b.scale(weights.coefficient(g)) / math.factorial(n)
    return lg


def exponent_symbol(grading):
    """(1/h) sum_j h^j D^j(h p1, h p2, x), as a symbol with h."""
    out = Symbol(grading.d, 2)
    for (l, n), s in grading.parts.items():
        out = out + s.rescale_momenta(shift=l - 1)
    return out


def exp_truncated(E, N):
    """exp(E) for a symbol E without h^0 part, truncated at h^N."""
    d, m = E.d, E.m
    out = Symbol.const(d, m, 1)
    term = Symbol.const(d, m, 1)
    for k in range(1, N + 1):
        term = term.mul(E, N) / k
        if term.is_zero():
            break
        out = out + term
    return out.truncate(N)


def exp_formula_check(f, g, alpha, N, weights):
    """exp-formula product minus the graph-sum product, order by order."""
    lhs = apply_symbol(exp_truncated(exponent_symbol(loop_grading(alpha, N, weights)), N), f, g, N)
    return (lhs - star_product(f, g, alpha, N, weights)).truncate(N)


def semiclassical_extract(grading):
    """x(p1 + p2) + (1/h) D^0(h p1, h p2, x)."""
    from .genfun import s0
    out = s0(grading.d)
    for (l, n), s in grading.parts.items():
        if l == 0:
            out = out + s.rescale_momenta(shift=-1)
    return out


def rational_weights(weights):
    """View of a weight table whose estimates are replaced by the exact
    rationals of their floating values, so identities can be checked exactly.
    Disconnected graphs get the exact product over their factors."""

    class _View:
        def coefficient(self, g):
            if g.n and not classify(g).connected:
                return math.prod((self.coefficient(f) for f in connected_factorization(g).factors), start=Fraction(1))
            c = weights.coefficient(g)
            if isinstance(c, Measured):
                return Fraction(c.value)
            return Fraction(c)

    return _View()
