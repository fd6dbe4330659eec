"""The generating function S_h and its perturbative checks.

``S_h = x(p_1 + p_2) + sum_n h^n S_n``.  A :class:`GradedSeries` holds the
``S_n`` (m = 2 symbols without h).  The perturbative SGA machinery works with
``S = sum_n h^(n-1) S_n`` so that ``S_h = S_0 + h S``.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cayley import enumerate_labeled_trees, rooted_trees, symmetry_coefficient
from .graphs import cr_decomposition, enumerate_trees
from .symbols import Symbol, hat_B
from .uncertainty import Measured, stderr_of, value_of


class GradedSeries:
    """S_1..S_N as m = 2 symbols, keyed by order."""

    def __init__(self, d, orders=None, meta=None):
        self.d = d
        self.orders = dict(orders or {})
        self.meta = dict(meta or {})

    def __getitem__(self, n):
        return self.orders.get(n, Symbol(self.d, 2))

    @property
    def N(self):
        return max(self.orders, default=0)

    def perturbation(self, N=None):
        """sum_n h^(n-1) S_n."""
        N = self.N if N is None else N
        out = Symbol(self.d, 2)
        for n in range(1, N + 1):
            out = out + self[n].hshift(n - 1)
        return out

    def full(self, N=None):
        """S_0 + sum_n h^n S_n."""
        N = self.N if N is None else N
        out = s0(self.d)
        for n in range(1, N + 1):
            out = out + self[n].hshift(n)
        return out

    def to_json(self, numeric=False, precision=17):
        return {str(n): self.orders[n].to_json(numeric, precision) for n in sorted(self.orders)}

    @classmethod
    def from_json(cls, doc):
        orders = {}
        d = None
        for key, sym in doc.items():
            d = sym["d"]
            terms = {}
            for row in sym["terms"]:
                k = tuple(itertools.chain.from_iterable(row["p"])) + tuple(row["x"]) + (row["h"],)
                c = row["coef"]
                c = Fraction(c) if isinstance(c, str) else c
                if "stderr" in row:
                    c = Measured(c, {f"S{key}:{len(terms)}": row["stderr"]})
                terms[k] = c
            orders[int(key)] = Symbol(d, sym["m"], terms)
        return cls(d, orders)


def s0(d):
    out = Symbol(d, 2)
    for i in range(d):
        out = out + Symbol.p(d, 2, 0, i) * Symbol.x(d, 2, i) + Symbol.p(d, 2, 1, i) * Symbol.x(d, 2, i)
    return out


def tree_symbols(alpha, n):
    """[(graph, hat_B)] over trees of type (n, 2) with nonzero symbol."""
    out = []
    for g in enumerate_trees(n, 2):
        b = hat_B(g, alpha)
        if not b.is_zero():
            out.append((g, b))
    return out


def build_S(alpha, N, weights):
    """S_n = 1/n! sum over trees of type (n,2) of W * hat_B, for n = 1..N.

    Weights are only requested for trees whose symbol is nonzero.
    """
    orders = {}
    for n in range(1, N + 1):
        acc = Symbol(alpha.d, 2)
        for g, b in tree_symbols(alpha, n):
            acc = acc + b.scale(weights.coefficient(g))
        orders[n] = acc / math.factorial(n)
    return GradedSeries(alpha.d, orders)


# ---------------------------------------------------------------------------
# evaluation points of the tree calculus

# (block map f(p_a + ..., p_b + ...)) for colour and side
_POINTS = {
    (1, "b"): [[0, 1], [2]],     # (p1+p2, p3, x)
    (1, "w"): [[0], [1]],        # (p1, p2, x)
    (2, "b"): [[0], [1, 2]],     # (p1, p2+p3, x)
    (2, "w"): [[1], [2]],        # (p2, p3, x)
}


def _diff_var(s, side, colour, j):
    if colour == "b":
        return s.diff_p(side - 1, j)
    return s.diff_x(j)


class _DerivCache:
    """Derivatives of an m = 2 symbol along multi-indices, evaluated at a point."""

    def __init__(self, s, side):
        self.s = s
        self.side = side
        self.raw = {}
        self.evald = {}

    def get(self, colour, idx):
        key = (colour, tuple(sorted(idx)))
        v = self.evald.get(key)
        if v is None:
            r = self.s
            for j in key[1]:
                r = _diff_var(r, self.side, colour, j)
            v = r.sub_blocks(3, _POINTS[(self.side, colour)]) if not r.is_zero() else Symbol(r.d, 3)
            self.evald[key] = v
        return v


def C_t(i, t, args, trunc=None, caches=None):
    """C^i_t(args): sum over edge labelings of the product of vertex factors.

    Vertex v differentiates args[v-1] along the labels of its incident edges,
    in momentum slot i if black and in x if white, then evaluates at the
    side-i point of its colour.
    """
    if len(args) != t.n:
        raise ValueError(f"tree has {t.n} vertices but {len(args)} arguments were given")
    d = args[0].d
    edges = sorted(t.edges)
    caches = caches or [_DerivCache(a, i) for a in args]
    total = Symbol(d, 3)
    for beta in itertools.product(range(d), repeat=len(edges)):
        inc = {v: [] for v in range(1, t.n + 1)}
        for (a, b), j in zip(edges, beta):
            inc[a].append(j)
            inc[b].append(j)
        prod = None
        for v in range(1, t.n + 1):
            f = caches[v - 1].get(t.color(v), inc[v])
            if f.is_zero():
                prod = None
                break
            prod = f if prod is None else prod.mul(f, trunc)
        if prod is not None:
            total = total + prod
    return total


def compositions(n, k):
    """Ordered k-tuples of positive integers summing to n."""
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(1, n - k + 2):
        for rest in compositions(n - first, k - 1):
            yield (first,) + rest


def M_n(S, n, side):
    """sum_{|t|<=n} 1/|t|! sum_{n_1+..=n} C^side_t(S_{n_1}, ...)."""
    d = S.d
    total = Symbol(d, 3)
    cache = {}
    for size in range(1, n + 1):
        part = Symbol(d, 3)
        for t in enumerate_labeled_trees(size):
            for comp in compositions(n, size):
                args = [S[k] for k in comp]
                if any(a.is_zero() for a in args):
                    continue
                caches = []
                for k in comp:
                    if (k, side) not in cache:
                        cache[(k, side)] = _DerivCache(S[k], side)
                    caches.append(cache[(k, side)])
                part = part + C_t(side, t, args, caches=caches)
        total = total + part / math.factorial(size)
    return total


@dataclass
class SgaResidual:
    order: int
    symbol: Symbol
    max_residual: float
    max_ratio: float          # max |coef| / stderr over coefficients with stderr > 0
    exact_zero: bool

    def passes(self, k=5.0, floor=0.0):
        for c in self.symbol.terms.values():
            if abs(float(value_of(c))) > k * stderr_of(c) + floor:
                return False
        return True

    def to_json(self, k=5.0, floor=0.0):
        return {"order": self.order, "max_residual": self.max_residual,
                "max_ratio": self.max_ratio, "tolerance": f"{k} x propagated stderr + {floor}",
                "pass": self.passes(k, floor)}


def residual_summary(order, sym):
    ratios = []
    for c in sym.terms.values():
        se = stderr_of(c)
        if se > 0:
            ratios.append(abs(float(value_of(c))) / se)
        else:
            ratios.append(math.inf if abs(float(value_of(c))) > 0 else 0.0)
    return SgaResidual(order, sym, sym.max_abs(), max(ratios, default=0.0), sym.is_zero())


def sga_residual(S, n):
    """Order-n perturbative SGA residual M^1_n - M^2_n (m = 3 symbol)."""
    return residual_summary(n, M_n(S, n, 1) - M_n(S, n, 2))


# ---------------------------------------------------------------------------
# tree expansions of the stationary points


def _vec_x(d, m):
    return [Symbol.x(d, m, j) for j in range(d)]


def _vec_p(d, m, *blocks):
    return [sum((Symbol.p(d, m, b, j) for b in blocks), Symbol(d, m)) for j in range(d)]


def elementary_differentials(S, side, N):
    """{rooted tree: D^side S(t) as a d-vector of m = 3 symbols}, |t| <= N."""
    Sh = S.perturbation(N)
    cache = _DerivCache(Sh, side)
    d = S.d
    out = {}

    def D(t):
        if t in out:
            return out[t]
        kids = list(t.children)
        vecs = [D(ch) for ch in kids]
        comp = []
        for j in range(d):
            acc = Symbol(d, 3)
            for js in itertools.product(range(d), repeat=len(kids)):
                term = cache.get(t.color, (j,) + js)
                if term.is_zero():
                    continue
                for v, jj in zip(vecs, js):
                    term = term.mul(v[jj], N)
                    if term.is_zero():
                        break
                acc = acc + term
            comp.append(acc)
        out[t] = comp
        return comp

    for size in range(1, N + 1):
        for t in rooted_trees(size):
            D(t)
    return out


def tree_expand_barx(S, side, N):
    """(x-bar, p-bar) for side 1 or (x-tilde, p-tilde) for side 2, to order N."""
    d = S.d
    eds = elementary_differentials(S, side, N)
    xs = _vec_x(d, 3)
    ps = _vec_p(d, 3, 0, 1) if side == 1 else _vec_p(d, 3, 1, 2)
    for t, vec in eds.items():
        coef = Fraction(1, symmetry_coefficient(t))
        target = xs if t.color == "b" else ps
        for j in range(d):
            target[j] = target[j] + vec[j].hshift(t.size).scale(coef)
    return [v.truncate(N) for v in xs], [v.truncate(N) for v in ps]


def fixed_point_barx(S, side, N):
    """Same series by iterating the stationarity equations N times."""
    d = S.d
    Sh = S.perturbation(N)
    b = side - 1
    gp = [Sh.diff_p(b, j) for j in range(d)]
    gx = [Sh.diff_x(j) for j in range(d)]
    x0 = _vec_x(d, 3)
    if side == 1:
        p0 = _vec_p(d, 3, 0, 1)
        other_p, gx_blocks = _vec_p(d, 3, 2), (_vec_p(d, 3, 0), _vec_p(d, 3, 1))
    else:
        p0 = _vec_p(d, 3, 1, 2)
        other_p, gx_blocks = _vec_p(d, 3, 0), (_vec_p(d, 3, 1), _vec_p(d, 3, 2))
    xb, pb = list(x0), list(p0)
    for _ in range(N):
        imgs = [pb, other_p] if side == 1 else [other_p, pb]
        xb = [(x0[j] + g.compose(3, imgs, x0, trunc=N - 1).hshift(1)).truncate(N) for j, g in enumerate(gp)]
        pb = [(p0[j] + g.compose(3, list(gx_blocks), xb, trunc=N - 1).hshift(1)).truncate(N)
              for j, g in enumerate(gx)]
    return xb, pb


def sga_residual_direct(S, N):
    """LHS - RHS of the SGA equation at the stationary points, as a series in h.

    Its h^n coefficient is the order-n perturbative residual.
    """
    d = S.d
    Sfull = S.full(N)
    xb, pb = fixed_point_barx(S, 1, N)
    xt, pt = fixed_point_barx(S, 2, N)
    x0 = _vec_x(d, 3)
    P = lambda *bl: _vec_p(d, 3, *bl)

    def dotv(u, v):
        acc = Symbol(d, 3)
        for a, c in zip(u, v):
            acc = acc + a.mul(c, N)
        return acc
    lhs = (Sfull.compose(3, [pb, P(2)], x0, trunc=N) + Sfull.compose(3, [P(0), P(1)], xb, trunc=N)
           - dotv(pb, xb))
    rhs = (Sfull.compose(3, [P(0), pt], x0, trunc=N) + Sfull.compose(3, [P(1), P(2)], xt, trunc=N)
           - dotv(pt, xt))
    return (lhs - rhs).truncate(N)


# ---------------------------------------------------------------------------
# Hochschild differential, primitives, naturality


def hochschild_d(f):
    """(df)(p_1..p_{n+1}) = f(p_2..) - sum_i (-1)^(i+1) f(.., p_i + p_{i+1}, ..) + (-1)^(n+1) f(p_1..p_n)."""
    n = f.m
    out = f.sub_blocks(n + 1, [[k + 1] for k in range(n)])
    for i in range(1, n + 1):
        blocks = [[k] for k in range(i - 1)] + [[i - 1, i]] + [[k + 1] for k in range(i, n)]
        out = out - f.sub_blocks(n + 1, blocks).scale((-1) ** (i + 1))
    out = out + f.sub_blocks(n + 1, [[k] for k in range(n)]).scale((-1) ** (n + 1))
    return out


def _normalised_coefficients(K):
    """{(I, J, xkey): K^{I,J}} with K = sum K^{I,J} p1^I p2^J / (I! J!)."""
    d = K.d
    out = {}
    for k, c in K.terms.items():
        I, J, rest = k[:d], k[d:2 * d], k[2 * d:]
        fac = math.prod(math.factorial(e) for e in I + J)
        out[(I, J, rest)] = c * fac
    return out


def coefficient_identity_holds(K):
    """K^{I,J} depends only on I + J (both nonzero multi-indices)."""
    coeffs = _normalised_coefficients(K)
    groups = {}
    for (I, J, rest), c in coeffs.items():
        if any(I) and any(J):
            groups.setdefault((tuple(a + b for a, b in zip(I, J)), rest), set()).add((I, J))
    for (M, rest), seen in groups.items():
        vals = []
        # every split of M into two nonzero parts must carry the same value
        for I in itertools.product(*(range(e + 1) for e in M)):
            J = tuple(a - b for a, b in zip(M, I))
            if any(I) and any(J):
                vals.append(coeffs.get((I, J, rest), 0))
        if any(v != vals[0] for v in vals):
            return False
    return True


@dataclass
class Primitive:
    cochain: Symbol
    exact: bool                   # d(primitive) == K
    coefficient_identity: bool


def primitive(K, m=None):
    """k_m(p) = -1/(m+1) K^1_m(p, p) for a closed 2-cochain K.

    K^1 is the part of degree 1 in the first block.  With ``m=None`` each
    homogeneous momentum component is treated with its own order.
    """
    if K.m != 2:
        raise ValueError("primitive expects a 2-cochain")
    if not hochschild_d(K).is_zero():
        raise ValueError("K is not closed (dK != 0)")
    degs = K.momentum_degrees() if m is None else [m + 1]
    k = Symbol(K.d, 1)
    for deg in degs:
        Kd = Symbol(K.d, 2, {key: c for key, c in K.terms.items() if sum(key[:2 * K.d]) == deg})
        K1 = Kd.block_degree_part(0, 1)
        k = k + K1.sub_blocks(1, [[0], [0]]).scale(Fraction(-1, deg))
    return Primitive(k, hochschild_d(k) == K, coefficient_identity_holds(K))


@dataclass
class NaturalityReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"pass": self.ok, "violations": self.violations}


def naturality_check(S):
    rep = NaturalityReport()
    for n in sorted(S.orders):
        s = S[n]
        if s.hdegree() > 0:
            rep.violations.append({"order": n, "condition": 1, "detail": "depends on h"})
        degs = s.momentum_degrees()
        if degs and degs != [n + 1]:
            rep.violations.append({"order": n, "condition": 2, "detail": f"momentum degrees {degs}"})
        if not s.set_block_zero(1).is_zero() or not s.set_block_zero(0).is_zero():
            rep.violations.append({"order": n, "condition": 3, "detail": "nonzero with one momentum set to 0"})
        for i in s.block_degrees(0):
            diag = s.block_degree_part(0, i).sub_blocks(1, [[0], [0]])
            if not diag.is_zero():
                rep.violations.append({"order": n, "condition": 4, "detail": f"S^{i}(p,p) != 0"})
    return rep


# ---------------------------------------------------------------------------
# existence bookkeeping


def contraction_restriction_sum(alpha, n, weights, side):
    """1/n! sum over trees of type (n,3) of W_contraction W_restriction hat_B."""
    acc = Symbol(alpha.d, 3)
    for g in enumerate_trees(n, 3):
        b = hat_B(g, alpha)
        if b.is_zero():
            continue
        cr = cr_decomposition(g, side)
        w = weights.coefficient(cr.contraction.graph) * weights.coefficient(cr.restriction.graph)
        acc = acc + b.scale(w)
    return acc / math.factorial(n)
