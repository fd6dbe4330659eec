"""Structure maps of the formal symplectic groupoid and their axioms.

Maps on the groupoid are d-vectors of m = 1 symbols in (p, x, h).  Points of
the multiplication space are parametrised by (p_1, p_2, x):

    (p_1, A) . (p_2, B) = (C, x),   A = grad_{p_1} S_h, B = grad_{p_2} S_h, C = grad_x S_h

All identities are compared as series truncated at h^N.
"""

from dataclasses import dataclass

from .symbols import Symbol


def _xs(d, m):
    return [Symbol.x(d, m, j) for j in range(d)]


def _ps(d, m, b=0, c=1):
    return [Symbol.p(d, m, b, j).scale(c) for j in range(d)]


def _zeros(d, m):
    return [Symbol(d, m) for _ in range(d)]


@dataclass
class FormalMap:
    """d component series in one momentum block."""
    components: list
    N: int

    @property
    def d(self):
        return len(self.components)

    def __call__(self, p_images, x_images, m_new):
        """Compose: F(p <- p_images, x <- x_images)."""
        return [c.compose(m_new, [p_images], x_images, trunc=self.N) for c in self.components]

    def compose_with(self, other):
        """x -> self(p, other(p, x))."""
        d = self.d
        return FormalMap(self(_ps(d, 1), other.components, 1), self.N)

    def is_identity(self):
        d = self.d
        return all((c - Symbol.x(d, 1, j)).truncate(self.N).is_zero() for j, c in enumerate(self.components))

    def to_json(self):
        return [c.to_json() for c in self.components]


def _grads(S, N):
    Sh = S.full(N)
    d = S.d
    return ([Sh.diff_p(0, j) for j in range(d)], [Sh.diff_p(1, j) for j in range(d)],
            [Sh.diff_x(j) for j in range(d)])


def _at(vec, blocks, x_images, N, m_new=1):
    return [v.compose(m_new, blocks, x_images, trunc=N) for v in vec]


def structure_maps(S, N):
    """unit, inverse, source and target of the groupoid defined by S_h."""
    d = S.d
    A, B, _ = _grads(S, N)
    p, z, x = _ps(d, 1), _zeros(d, 1), _xs(d, 1)
    source = FormalMap(_at(B, [p, z], x, N), N)
    target = FormalMap(_at(A, [z, p], x, N), N)
    unit = {"p": _zeros(d, 0), "x": [Symbol.x(d, 0, j) for j in range(d)]}
    inverse = {"p": _ps(d, 1, 0, -1), "x": x}
    return {"unit": unit, "inverse": inverse, "source": source, "target": target}


def _diff_norm(u, v, N):
    return max(((a - b).truncate(N).max_abs() for a, b in zip(u, v)), default=0.0)


def _diff_terms(u, v, N):
    return [(a - b).truncate(N) for a, b in zip(u, v)]


@dataclass
class AxiomResult:
    name: str
    residual: list          # list of symbols

    @property
    def residual_norm(self):
        return max((r.max_abs() for r in self.residual), default=0.0)

    def passes(self, tol=0.0):
        return self.residual_norm <= tol

    def to_json(self, N, tol=0.0):
        return {"axiom": self.name, "order": N, "residual_norm": self.residual_norm, "pass": self.passes(tol)}


def axiom_check(S, N):
    """Residuals of the groupoid axioms (1)-(7) plus composability."""
    d = S.d
    A, B, C = _grads(S, N)
    maps = structure_maps(S, N)
    s, t = maps["source"], maps["target"]
    x2 = _xs(d, 2)
    p1, p2 = _ps(d, 2, 0), _ps(d, 2, 1)
    out = []
    # (1) t(gh) = t(g);  (2) s(gh) = s(h);  composability s(g) = t(h)
    out.append(AxiomResult("1: t(gh) = t(g)", _diff_terms(t(C, x2, 2), t(p1, A, 2), N)))
    out.append(AxiomResult("2: s(gh) = s(h)", _diff_terms(s(C, x2, 2), s(p2, B, 2), N)))
    out.append(AxiomResult("composable: s(g) = t(h)", _diff_terms(s(p1, A, 2), t(p2, B, 2), N)))
    p, z, x = _ps(d, 1), _zeros(d, 1), _xs(d, 1)
    mp = _ps(d, 1, 0, -1)
    # (3) eps(t(g)) g = g
    r3 = (_diff_terms(_at(B, [z, p], x, N), x, N) + _diff_terms(_at(C, [z, p], x, N), p, N)
          + _diff_terms(_at(A, [z, p], x, N), t.components, N))
    out.append(AxiomResult("3: eps(t(g)) g = g", r3))
    # (4) g eps(s(g)) = g
    r4 = (_diff_terms(_at(A, [p, z], x, N), x, N) + _diff_terms(_at(C, [p, z], x, N), p, N)
          + _diff_terms(_at(B, [p, z], x, N), s.components, N))
    out.append(AxiomResult("4: g eps(s(g)) = g", r4))
    # (5) s(i(g)) = t(g)
    out.append(AxiomResult("5: s(g^-1) = t(g)", _diff_terms(s(mp, x, 1), t.components, N)))
    # (6) g^-1 g = eps(s(g)), meeting point y = s(p, x)
    sy = s.components
    r6 = (_diff_terms(_at(C, [mp, p], sy, N), z, N) + _diff_terms(_at(B, [mp, p], sy, N), x, N)
          + _diff_terms(_at(A, [mp, p], sy, N), x, N))
    out.append(AxiomResult("6: g^-1 g = eps(s(g))", r6))
    # (7) g g^-1 = eps(t(g)), meeting point y = t(p, x)
    ty = t.components
    r7 = (_diff_terms(_at(C, [p, mp], ty, N), z, N) + _diff_terms(_at(A, [p, mp], ty, N), x, N)
          + _diff_terms(_at(B, [p, mp], ty, N), x, N))
    out.append(AxiomResult("7: g g^-1 = eps(t(g))", r7))
    return out


def invert_formal(F):
    """Compositional inverse in x of F(p, x) = x + O(h)."""
    d, N = F.d, F.N
    x = _xs(d, 1)
    for j, c in enumerate(F.components):
        if not (c.h_part(0) - x[j]).is_zero():
            raise ValueError("order-0 part of the map is not the identity")
    G = list(x)
    pert = [c - x[j] for j, c in enumerate(F.components)]
    for _ in range(N):
        G = [(x[j] - pc.compose(1, [_ps(d, 1)], G, trunc=N)).truncate(N) for j, pc in enumerate(pert)]
    return FormalMap(G, N)


def inversion_lemmas(S, N):
    """Residuals of F_p^-1 = grad_{p2} S_h(-p, p, .), G_p^-1 = grad_{p1} S_h(p, -p, .) and F_p = G_{-p}."""
    d = S.d
    A, B, _ = _grads(S, N)
    maps = structure_maps(S, N)
    F, G = maps["source"], maps["target"]
    p, x, mp = _ps(d, 1), _xs(d, 1), _ps(d, 1, 0, -1)
    Fbar = FormalMap(_at(B, [mp, p], x, N), N)
    Gbar = FormalMap(_at(A, [p, mp], x, N), N)
    res = []
    for name, a, b in (("Fbar o F = id", Fbar, F), ("F o Fbar = id", F, Fbar),
                       ("Gbar o G = id", Gbar, G), ("G o Gbar = id", G, Gbar)):
        comp = a.compose_with(b)
        res.append(AxiomResult(name, _diff_terms(comp.components, x, N)))
    Finv = invert_formal(F)
    res.append(AxiomResult("F^-1 = Fbar", _diff_terms(Finv.components, Fbar.components, N)))
    Ginv = invert_formal(G)
    res.append(AxiomResult("G^-1 = Gbar", _diff_terms(Ginv.components, Gbar.components, N)))
    res.append(AxiomResult("F_p = G_-p", _diff_terms(F.components, G(mp, x, 1), N)))
    return res


def poisson_map_residual(S, N):
    """Second-derivative identity behind the Poisson property of s_h.

    grad_{p1_k} grad_{p2_l} S_h(0, 0, s(p,x))
        = sum_i d_{x_i} d_{p2_k} S_h(p,0,x) d_{p1_i} d_{p2_l} S_h(p,0,x) - d_{p2_k} d_{p2_l} S_h(p,0,x)

    Returns the d x d matrix (flattened, row major) of left-minus-right.
    """
    d = S.d
    Sh = S.full(N)
    s = structure_maps(S, N)["source"].components
    p, z, x = _ps(d, 1), _zeros(d, 1), _xs(d, 1)
    at_p0 = lambda f: f.compose(1, [p, z], x, trunc=N)
    out = []
    for k in range(d):
        for l in range(d):
            lhs = Sh.diff_p(0, k).diff_p(1, l).compose(1, [z, z], s, trunc=N)
            rhs = Symbol(d, 1)
            for i in range(d):
                rhs = rhs + at_p0(Sh.diff_p(1, k).diff_x(i)).mul(at_p0(Sh.diff_p(0, i).diff_p(1, l)), N)
            rhs = rhs - at_p0(Sh.diff_p(1, k).diff_p(1, l))
            out.append((lhs - rhs).truncate(N))
    return out


def bracket_identity_residual(S, N):
    """d s^l/dp^k (0, s) - d s^k/dp^l (0, s) - sum_i (d_{x_i} s^k d_{p_i} s^l - d_{x_i} s^l d_{p_i} s^k)."""
    d = S.d
    s = structure_maps(S, N)["source"].components
    z = _zeros(d, 1)
    out = []
    for k in range(d):
        for l in range(d):
            lhs = (s[l].diff_p(0, k) - s[k].diff_p(0, l)).compose(1, [z], s, trunc=N)
            rhs = Symbol(d, 1)
            for i in range(d):
                rhs = rhs + s[k].diff_x(i).mul(s[l].diff_p(0, i), N) - s[l].diff_x(i).mul(s[k].diff_p(0, i), N)
            out.append((lhs - rhs).truncate(N))
    return out


def induced_bracket(S, f, g):
    """{f, g}(x) = 2h S_1(df, dg, x), returned as the h^1 coefficient (an XPoly)."""
    d = S.d
    S1 = S[1]
    acc = Symbol(d, 0)
    for k, c in S1.terms.items():
        # S_1 is bilinear in the momenta: p1_i p2_j coefficient
        i = k[:d].index(1)
        j = k[d:2 * d].index(1)
        coef = Symbol(d, 0, {k[2 * d:]: c})
        acc = acc + coef * f.diff_x(i) * g.diff_x(j)
    return acc.scale(2)
