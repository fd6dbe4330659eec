"""Campbell-Baker-Hausdorff series from structure constants.

``log(exp X exp Y)`` is expanded in the free associative algebra on two
letters, truncated at degree N, and projected onto Lie elements with the
Dynkin map ``w -> [w]/|w|`` (right-nested brackets).  Brackets are then
evaluated through the structure constants.
"""

import itertools
import math
from fractions import Fraction
from functools import lru_cache

from .symbols import Symbol
from .uncertainty import stderr_of, value_of


class LieAlgebra:
    """[e_i, e_j] = sum_k c[i][j][k] e_k (0-based indices)."""

    def __init__(self, c, check=True):
        self.d = len(c)
        self.c = [[[Fraction(v) for v in row] for row in mat] for mat in c]
        if check:
            self._validate()

    def _validate(self):
        d, c = self.d, self.c
        for i, j, k in itertools.product(range(d), repeat=3):
            if c[i][j][k] != -c[j][i][k]:
                raise ValueError("structure constants are not antisymmetric")
        # Jacobi: [e_i,[e_j,e_k]] + cyclic = 0
        for i, j, k, l in itertools.product(range(d), repeat=4):
            s = sum(c[j][k][m] * c[i][m][l] + c[k][i][m] * c[j][m][l] + c[i][j][m] * c[k][m][l]
                    for m in range(d))
            if s:
                raise ValueError("structure constants violate the Jacobi identity")

    def nonzero(self):
        d, c = self.d, self.c
        return [(i, j, k, c[i][j][k]) for i in range(d) for j in range(d) for k in range(d) if c[i][j][k]]

    def bracket(self, u, v, trunc=None):
        """Bracket of d-vectors of symbols."""
        d = self.d
        out = [Symbol(u[0].d, u[0].m) for _ in range(d)]
        for i, j, k, c in self._nz:
            out[k] = out[k] + u[i].mul(v[j], trunc).scale(c)
        return out

    @property
    def _nz(self):
        if not hasattr(self, "_nzc"):
            self._nzc = self.nonzero()
        return self._nzc

    @classmethod
    def heisenberg(cls):
        c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
        c[0][1][2], c[1][0][2] = 1, -1
        return cls(c)

    @classmethod
    def from_matrices(cls, basis):
        """Structure constants of the span of square matrices (lists of lists)."""
        import numpy as np
        B = [np.array(b, dtype=object) for b in basis]
        d = len(B)
        flat = np.array([b.flatten() for b in B], dtype=float).T
        c = [[[0] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            for j in range(d):
                comm = (B[i].dot(B[j]) - B[j].dot(B[i])).flatten().astype(float)
                coef, *_ = np.linalg.lstsq(flat, comm, rcond=None)
                if np.abs(flat @ coef - comm).max() > 1e-9:
                    raise ValueError("matrices do not span a Lie algebra")
                c[i][j] = [Fraction(round(v * 10 ** 6), 10 ** 6) for v in coef]
        return cls(c)


def strictly_upper_triangular(size):
    """Basis E_ij, i < j, of the nilpotent algebra of strictly upper triangular matrices."""
    basis = []
    for i in range(size):
        for j in range(i + 1, size):
            m = [[0] * size for _ in range(size)]
            m[i][j] = 1
            basis.append(m)
    return basis


def from_linear_poisson(alpha):
    """c^{ij}_k = 2 alpha^{ij}_k."""
    if alpha.entries and not alpha.is_linear():
        raise ValueError("Poisson structure is not homogeneous linear")
    d = alpha.d
    if not alpha.entries:
        return LieAlgebra([[[0] * d for _ in range(d)] for _ in range(d)])
    a = alpha.linear_coefficients()
    return LieAlgebra([[[2 * a[i][j][k] for k in range(d)] for j in range(d)] for i in range(d)])


# ---------------------------------------------------------------------------
# free associative algebra on letters 0 (X) and 1 (Y)


def _mul(a, b, N):
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) <= N:
                w = wa + wb
                out[w] = out.get(w, 0) + ca * cb
    return {w: c for w, c in out.items() if c}


def _exp(letter, N):
    out, term = {(): Fraction(1)}, {(): Fraction(1)}
    for k in range(1, N + 1):
        term = {w + (letter,): c / k for w, c in term.items()}
        out.update(term)
    return out


@lru_cache(maxsize=None)
def cbh_words(N):
    """Coefficients of log(exp X exp Y) as {word: coefficient}, words of length 1..N."""
    Z = _mul(_exp(0, N), _exp(1, N), N)
    Z.pop(())
    log = {}
    power = {(): Fraction(1)}
    for k in range(1, N + 1):
        power = _mul(power, Z, N)
        sign = Fraction((-1) ** (k + 1), k)
        for w, c in power.items():
            log[w] = log.get(w, 0) + sign * c
    return {w: c for w, c in sorted(log.items(), key=lambda t: (len(t[0]), t[0])) if c}


@lru_cache(maxsize=None)
def dynkin_terms(N):
    """{n: [(word, coefficient / n)]}: the degree-n Lie part of CBH."""
    out = {}
    for w, c in cbh_words(N).items():
        out.setdefault(len(w), []).append((w, c / len(w)))
    return out


def cbh_terms(L, u, v, N, trunc=None):
    """{n: d-vector} with the degree-n CBH term evaluated at vectors u, v."""
    cache = {}

    def nested(w):
        # right-nested [w_1, [w_2, ... w_n]]
        if w in cache:
            return cache[w]
        if len(w) == 1:
            r = u if w[0] == 0 else v
        else:
            r = L.bracket(u if w[0] == 0 else v, nested(w[1:]), trunc)
        cache[w] = r
        return r

    d = L.d
    out = {}
    for n, words in dynkin_terms(N).items():
        acc = [Symbol(u[0].d, u[0].m) for _ in range(d)]
        for w, c in words:
            val = nested(w)
            for k in range(d):
                acc[k] = acc[k] + val[k].scale(c)
        out[n] = acc
    return out


def cbh_series(L, u, v, N, trunc=None):
    """Sum of the CBH terms of degree <= N."""
    terms = cbh_terms(L, u, v, N, trunc)
    d = L.d
    out = [Symbol(u[0].d, u[0].m) for _ in range(d)]
    for n in sorted(terms):
        for k in range(d):
            out[k] = out[k] + terms[n][k]
    return out


def pair_with_x(vec, m):
    """<vec, x> for a d-vector of symbols with m blocks."""
    d = len(vec)
    acc = Symbol(vec[0].d, m)
    for k in range(d):
        acc = acc + vec[k] * Symbol.x(vec[0].d, m, k)
    return acc


def momenta(d, m, b):
    return [Symbol.p(d, m, b, i) for i in range(d)]


def compare_with_genfun(S, L, N):
    """Per order n: <CBH_{n+1}(p1, p2), x> - S_n."""
    d = S.d
    terms = cbh_terms(L, momenta(d, 2, 0), momenta(d, 2, 1), N + 1)
    report = []
    for n in range(1, N + 1):
        r = pair_with_x(terms[n + 1], 2) - S[n]
        ratios = [abs(float(value_of(c))) / stderr_of(c) if stderr_of(c) else
                  (math.inf if value_of(c) else 0.0) for c in r.terms.values()]
        report.append({"order": n, "residual": r, "max_residual": r.max_abs(),
                       "max_ratio": max(ratios, default=0.0), "exact_zero": r.is_zero()})
    return report
