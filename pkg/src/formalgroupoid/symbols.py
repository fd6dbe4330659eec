"""Sparse polynomials in momenta, base coordinates and the formal parameter.

A :class:`Symbol` of dimension ``d`` with ``m`` momentum blocks is a
polynomial in the variables

    p^0_0 .. p^0_{d-1}, ..., p^{m-1}_0 .. p^{m-1}_{d-1}, x_0 .. x_{d-1}, h

stored as a dict from exponent tuples to coefficients.  Indices are 0-based
throughout the Python API; documents and graph ids use 1-based labels.
Coefficients are exact (int/Fraction) by default but any number type with
ring operations works, in particular :class:`~formalgroupoid.uncertainty.Measured`.

``XPoly`` values are symbols with ``m = 0``.
"""

import itertools
import json
import operator
from fractions import Fraction

from .errors import DegreeCapError, PoissonInputError
from .uncertainty import Measured, value_of

DEGREE_CAP = 24


def set_degree_cap(cap):
    global DEGREE_CAP
    DEGREE_CAP = int(cap)


def _is_zero(c):
    return c == 0


def _addto(terms, key, c):
    v = terms.get(key)
    v = c if v is None else v + c
    if _is_zero(v):
        terms.pop(key, None)
    else:
        terms[key] = v


class Symbol:
    __slots__ = ("d", "m", "terms")

    def __init__(self, d, m, terms=None):
        self.d = d
        self.m = m
        self.terms = {}
        if terms:
            nv = self.nvars
            for k, c in terms.items():
                if len(k) != nv:
                    raise ValueError(f"exponent tuple of length {len(k)}, expected {nv}")
                if not _is_zero(c):
                    self.terms[k] = c

    # -- layout -----------------------------------------------------------
    @property
    def nvars(self):
        return (self.m + 1) * self.d + 1

    @property
    def hidx(self):
        return (self.m + 1) * self.d

    def pvar(self, b, i):
        return b * self.d + i

    def xvar(self, i):
        return self.m * self.d + i

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, d, m):
        return cls(d, m)

    @classmethod
    def const(cls, d, m, c):
        return cls(d, m, {(0,) * ((m + 1) * d + 1): c})

    @classmethod
    def _var(cls, d, m, idx, c=1):
        key = [0] * ((m + 1) * d + 1)
        key[idx] = 1
        return cls(d, m, {tuple(key): c})

    @classmethod
    def p(cls, d, m, b, i):
        return cls._var(d, m, b * d + i)

    @classmethod
    def x(cls, d, m, i):
        return cls._var(d, m, m * d + i)

    @classmethod
    def h(cls, d, m):
        return cls._var(d, m, (m + 1) * d)

    @classmethod
    def monomial(cls, d, m, pexps=None, xexp=None, hexp=0, c=1):
        key = []
        for b in range(m):
            key.extend(pexps[b] if pexps else [0] * d)
        key.extend(xexp if xexp else [0] * d)
        key.append(hexp)
        return cls(d, m, {tuple(key): c})

    def like(self, terms=None):
        return Symbol(self.d, self.m, terms)

    def copy(self):
        s = Symbol(self.d, self.m)
        s.terms = dict(self.terms)
        return s

    # -- basic queries ---------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, Symbol):
            return (self.d, self.m) == (other.d, other.m) and (self - other).is_zero()
        if _is_zero(other):
            return self.is_zero()
        return (self - other).is_zero()

    __hash__ = None

    def degree(self):
        """Total degree in p and x (h excluded)."""
        hi = self.hidx
        return max((sum(k[:hi]) for k in self.terms), default=-1)

    def hdegree(self):
        hi = self.hidx
        return max((k[hi] for k in self.terms), default=-1)

    def max_abs(self):
        return max((abs(float(value_of(c))) for c in self.terms.values()), default=0.0)

    def coefficients(self):
        return list(self.terms.values())

    def _check(self, other):
        if (self.d, self.m) != (other.d, other.m):
            raise ValueError(f"layout mismatch: (d={self.d}, m={self.m}) vs (d={other.d}, m={other.m})")

    # -- ring operations -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Symbol):
            return self + Symbol.const(self.d, self.m, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _addto(out, k, c)
        s = Symbol(self.d, self.m)
        s.terms = out
        return s

    __radd__ = __add__

    def __neg__(self):
        s = Symbol(self.d, self.m)
        s.terms = {k: -c for k, c in self.terms.items()}
        return s

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if _is_zero(c):
            return Symbol(self.d, self.m)
        return Symbol(self.d, self.m, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Symbol):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        if isinstance(c, int):
            c = Fraction(c)
        return Symbol(self.d, self.m, {k: v / c for k, v in self.terms.items()})

    def __pow__(self, k):
        out = Symbol.const(self.d, self.m, 1)
        for _ in range(k):
            out = out * self
        return out

    def mul(self, other, trunc=None):
        """Product, dropping terms of h-degree above ``trunc``."""
        self._check(other)
        hi = self.hidx
        out = {}
        if not self.terms or not other.terms:
            return Symbol(self.d, self.m)
        check = self.degree() + other.degree() > DEGREE_CAP
        add = operator.add
        for ka, ca in self.terms.items():
            ha = ka[hi]
            for kb, cb in other.terms.items():
                if trunc is not None and ha + kb[hi] > trunc:
                    continue
                k = tuple(map(add, ka, kb))
                if check and sum(k[:hi]) > DEGREE_CAP:
                    raise DegreeCapError(f"product exceeds total degree cap {DEGREE_CAP}")
                v = out.get(k)
                out[k] = ca * cb if v is None else v + ca * cb
        s = Symbol(self.d, self.m)
        s.terms = {k: v for k, v in out.items() if not _is_zero(v)}
        return s

    def map_coeffs(self, fn):
        return Symbol(self.d, self.m, {k: fn(c) for k, c in self.terms.items()})

    # -- calculus -----------------------------------------------------------------
    def diff(self, var):
        out = {}
        for k, c in self.terms.items():
            e = k[var]
            if e:
                nk = k[:var] + (e - 1,) + k[var + 1:]
                _addto(out, nk, c * e)
        s = Symbol(self.d, self.m)
        s.terms = out
        return s

    def diff_x(self, i):
        return self.diff(self.xvar(i))

    def diff_p(self, b, i):
        return self.diff(self.pvar(b, i))

    def grad_x(self):
        return [self.diff_x(i) for i in range(self.d)]

    def grad_p(self, b):
        return [self.diff_p(b, i) for i in range(self.d)]

    # -- h bookkeeping ---------------------------------------------------------------
    def truncate(self, N):
        hi = self.hidx
        return Symbol(self.d, self.m, {k: c for k, c in self.terms.items() if k[hi] <= N})

    def h_part(self, n):
        """Coefficient of h^n, as a symbol free of h."""
        hi = self.hidx
        return Symbol(self.d, self.m,
                      {k[:hi] + (0,): c for k, c in self.terms.items() if k[hi] == n})

    def hshift(self, n):
        hi = self.hidx
        return Symbol(self.d, self.m, {k[:hi] + (k[hi] + n,): c for k, c in self.terms.items()})

    def rescale_momenta(self, shift=0, trunc=None):
        """Multiply each monomial by h^(momentum degree + shift)."""
        pd = self.m * self.d
        hi = self.hidx
        out = {}
        for k, c in self.terms.items():
            e = k[hi] + sum(k[:pd]) + shift
            if e < 0:
                raise ValueError("negative power of h after rescaling")
            if trunc is not None and e > trunc:
                continue
            out[k[:hi] + (e,)] = c
        return Symbol(self.d, self.m, out)

    # -- gradings in momenta ------------------------------------------------------------
    def momentum_degrees(self):
        pd = self.m * self.d
        return sorted({sum(k[:pd]) for k in self.terms})

    def block_degree_part(self, b, deg):
        lo, hi = b * self.d, (b + 1) * self.d
        return Symbol(self.d, self.m,
                      {k: c for k, c in self.terms.items() if sum(k[lo:hi]) == deg})

    def block_degrees(self, b):
        lo, hi = b * self.d, (b + 1) * self.d
        return sorted({sum(k[lo:hi]) for k in self.terms})

    def x_coefficients(self):
        """Group by momentum (and h) exponents: {(pexp, h): XPoly}."""
        pd = self.m * self.d
        hi = self.hidx
        out = {}
        for k, c in self.terms.items():
            mk = (k[:pd], k[hi])
            out.setdefault(mk, {})[k[pd:hi] + (0,)] = c
        return {mk: Symbol(self.d, 0, t) for mk, t in sorted(out.items())}

    # -- substitution ----------------------------------------------------------------------
    def compose(self, m_new, p_images, x_images=None, trunc=None):
        """Substitute p^b_i <- p_images[b][i] and x_i <- x_images[i].

        Images are symbols with ``m = m_new``; ``h`` is kept.  Omitted
        ``x_images`` means x is left alone.
        """
        d = self.d
        if x_images is None:
            x_images = [Symbol.x(d, m_new, i) for i in range(d)]
        images = [p_images[b][i] for b in range(self.m) for i in range(d)] + list(x_images)
        nv = len(images)
        hi = self.hidx
        hsym = Symbol.h(d, m_new)
        powers = [[Symbol.const(d, m_new, 1)] for _ in range(nv + 1)]
        all_images = images + [hsym]

        def power(v, e):
            pw = powers[v]
            while len(pw) <= e:
                pw.append(pw[-1].mul(all_images[v], trunc))
            return pw[e]

        def rec(v, terms):
            if v == nv + 1:
                total = 0
                for _, c in terms:
                    total = total + c
                return Symbol.const(d, m_new, total)
            groups = {}
            for k, c in terms:
                groups.setdefault(k[v], []).append((k, c))
            acc = Symbol(d, m_new)
            for e in sorted(groups):
                inner = rec(v + 1, groups[e])
                if e:
                    inner = inner.mul(power(v, e), trunc)
                acc = acc + inner
            return acc

        if not self.terms:
            return Symbol(d, m_new)
        assert hi == nv
        out = rec(0, list(self.terms.items()))
        return out.truncate(trunc) if trunc is not None else out

    def sub_blocks(self, m_new, blocks):
        """Replace block b by the sum of new blocks ``blocks[b]``.

        ``blocks[b]`` is a list of new block indices, or of (coef, index)
        pairs.  Example: ``f.sub_blocks(3, [[0, 1], [2]])`` is f(p1+p2, p3).
        """
        d = self.d
        images = []
        for spec in blocks:
            row = []
            for i in range(d):
                s = Symbol(d, m_new)
                for item in spec:
                    c, nb = item if isinstance(item, tuple) else (1, item)
                    s = s + Symbol.p(d, m_new, nb, i).scale(c)
                row.append(s)
            images.append(row)
        return self.compose(m_new, images)

    def set_block_zero(self, b):
        lo, hi = b * self.d, (b + 1) * self.d
        return Symbol(self.d, self.m,
                      {k: c for k, c in self.terms.items() if not any(k[lo:hi])})

    def evaluate(self, ps, xs, h=0):
        """Numeric value at momenta ``ps[b][i]``, point ``xs`` and ``h``."""
        d = self.d
        vals = [ps[b][i] for b in range(self.m) for i in range(d)] + list(xs) + [h]
        total = 0
        for k, c in self.terms.items():
            t = c
            for v, e in enumerate(k):
                if e:
                    t = t * vals[v] ** e
            total = total + t
        return total

    # -- output --------------------------------------------------------------------------------
    def to_json(self, numeric=False, precision=17):
        d, m = self.d, self.m
        rows = []
        for k, c in self.items():
            row = {"p": [list(k[b * d:(b + 1) * d]) for b in range(m)],
                   "x": list(k[m * d:(m + 1) * d]),
                   "h": k[-1]}
            row.update(format_coefficient(c, numeric, precision))
            rows.append(row)
        return {"d": d, "m": m, "terms": rows}

    def __repr__(self):
        return f"Symbol(d={self.d}, m={self.m}, terms={len(self.terms)})"

    def pretty(self):
        d, m = self.d, self.m
        names = [f"p{b + 1}_{i + 1}" for b in range(m) for i in range(d)]
        names += [f"x{i + 1}" for i in range(d)] + ["h"]
        parts = []
        for k, c in self.items():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, k) if e)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts) if parts else "0"


def format_coefficient(c, numeric=False, precision=17):
    if isinstance(c, Measured):
        return {"coef": _fmt_number(c.value, True, precision), "stderr": _fmt_float(c.stderr, precision)}
    return {"coef": _fmt_number(c, numeric, precision)}


def _fmt_float(v, precision):
    return float(f"{float(v):.{precision}g}")


def _fmt_number(c, numeric, precision):
    if numeric or isinstance(c, float):
        return _fmt_float(c, precision)
    return str(Fraction(c))


def xpoly(d, terms):
    """XPoly from {exponent tuple of length d: coef}."""
    return Symbol(d, 0, {tuple(k) + (0,): c for k, c in terms.items()})


def xvar(d, i):
    return Symbol.x(d, 0, i)


def embed_x(poly, m, pexps=None):
    """Lift an XPoly (m=0) into m blocks, times the momentum monomial pexps."""
    d = poly.d
    pk = tuple(itertools.chain.from_iterable(pexps)) if pexps else (0,) * (m * d)
    return Symbol(d, m, {pk + k: c for k, c in poly.terms.items()})


def change_blocks(s, m_new):
    """Reinterpret s with more blocks (extra blocks absent)."""
    d = s.d
    pad = (0,) * ((m_new - s.m) * d)
    pd = s.m * d
    return Symbol(d, m_new, {k[:pd] + pad + k[pd:]: c for k, c in s.terms.items()})


def dot(u, v, trunc=None):
    """Sum_i u[i]*v[i] for lists of symbols."""
    acc = None
    for a, b in zip(u, v):
        t = a.mul(b, trunc)
        acc = t if acc is None else acc + t
    return acc


# ---------------------------------------------------------------------------
# Poisson structures


class PoissonStructure:
    """Antisymmetric matrix of XPolys, ``entries[(i, j)]`` for ``i < j``."""

    def __init__(self, d, entries=None, check_jacobi=True):
        self.d = d
        self.entries = {}
        for (i, j), poly in (entries or {}).items():
            if not (0 <= i < d and 0 <= j < d):
                raise PoissonInputError(f"index ({i + 1},{j + 1}) out of range for dim {d}")
            if i == j:
                if not poly.is_zero():
                    raise PoissonInputError(f"diagonal entry ({i + 1},{i + 1}) must vanish")
                continue
            if i > j:
                i, j, poly = j, i, -poly
            if (i, j) in self.entries:
                raise PoissonInputError(f"entry ({i + 1},{j + 1}) given twice")
            if not poly.is_zero():
                self.entries[(i, j)] = poly
        self._cache = {}
        if check_jacobi and not self.is_poisson():
            raise PoissonInputError("Jacobi identity fails")

    def alpha(self, i, j):
        if i == j:
            return Symbol(self.d, 0)
        if i < j:
            return self.entries.get((i, j), Symbol(self.d, 0))
        return -self.entries.get((j, i), Symbol(self.d, 0))

    def derivative(self, i, j, idx):
        """d/dx_{idx...} alpha^{ij}, cached."""
        key = (i, j, tuple(sorted(idx)))
        v = self._cache.get(key)
        if v is None:
            v = self.alpha(i, j)
            for a in key[2]:
                v = v.diff_x(a)
            self._cache[key] = v
        return v

    def jacobi_residual(self):
        d = self.d
        out = []
        for i, j, k in itertools.combinations(range(d), 3):
            r = Symbol(d, 0)
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                for l in range(d):
                    r = r + self.alpha(a, l) * self.alpha(b, c).diff_x(l)
            out.append(r)
        return out

    def is_poisson(self):
        return all(r.is_zero() for r in self.jacobi_residual())

    def degrees(self):
        return sorted({sum(k) for p in self.entries.values() for k in p.terms})

    def is_constant(self):
        return all(deg == 0 for deg in self.degrees())

    def is_linear(self):
        return all(deg == 1 for deg in self.degrees())

    def linear_coefficients(self):
        """a[i][j][k] with alpha^{ij}(x) = sum_k a[i][j][k] x_k."""
        if not self.is_linear():
            raise ValueError("Poisson structure is not homogeneous linear")
        d = self.d
        a = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            for j in range(d):
                for k, c in self.alpha(i, j).terms.items():
                    a[i][j][k.index(1)] = c
        return a

    def bivector_symbol(self, m=2, blocks=(0, 1)):
        """sum_ij alpha^{ij} p^a_i p^b_j in a symbol with m blocks."""
        d = self.d
        out = Symbol(d, m)
        for (i, j), poly in self.entries.items():
            for s, u, v in ((1, i, j), (-1, j, i)):
                pex = [[0] * d for _ in range(m)]
                pex[blocks[0]][u] += 1
                pex[blocks[1]][v] += 1
                out = out + embed_x(poly, m, pex).scale(s)
        return out

    def to_document(self):
        rows = []
        for (i, j), poly in sorted(self.entries.items()):
            rows.append({"i": i + 1, "j": j + 1,
                         "poly": [{"coef": str(Fraction(c)), "exp": list(k[:-1])}
                                  for k, c in poly.items()]})
        return {"dim": self.d, "entries": rows}

    @classmethod
    def constant(cls, matrix):
        d = len(matrix)
        ent = {}
        for i in range(d):
            for j in range(i + 1, d):
                if matrix[i][j]:
                    ent[(i, j)] = Symbol.const(d, 0, Fraction(matrix[i][j]))
            for j in range(d):
                if Fraction(matrix[i][j]) != -Fraction(matrix[j][i]):
                    raise PoissonInputError("constant matrix is not antisymmetric")
        return cls(d, ent)

    @classmethod
    def linear(cls, coeffs, check_jacobi=True):
        """From a[i][j][k]: alpha^{ij} = sum_k a[i][j][k] x_k."""
        d = len(coeffs)
        ent = {}
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    if Fraction(coeffs[i][j][k]) != -Fraction(coeffs[j][i][k]):
                        raise PoissonInputError("linear coefficients are not antisymmetric")
        for i in range(d):
            for j in range(i + 1, d):
                s = Symbol(d, 0)
                for k in range(d):
                    if coeffs[i][j][k]:
                        s = s + xvar(d, k).scale(Fraction(coeffs[i][j][k]))
                if not s.is_zero():
                    ent[(i, j)] = s
        return cls(d, ent, check_jacobi=check_jacobi)


def parse_poisson(text, fmt="json", check_jacobi=True):
    """Parse a Poisson document (JSON or TOML text)."""
    if fmt == "toml":
        try:
            import tomllib
        except ImportError:  # python < 3.11
            import tomli as tomllib
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise PoissonInputError(f"TOML syntax error: {exc}") from None
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PoissonInputError(f"JSON syntax error: {exc.msg} (column {exc.colno})", exc.lineno) from None
    return poisson_from_document(doc, check_jacobi=check_jacobi)


def _rational(s, where):
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError):
        raise PoissonInputError(f"{where}: bad rational coefficient {s!r}") from None


def poisson_from_document(doc, check_jacobi=True):
    if not isinstance(doc, dict) or "dim" not in doc:
        raise PoissonInputError("document must be a table with a 'dim' key")
    d = doc["dim"]
    if not isinstance(d, int) or d < 1:
        raise PoissonInputError(f"'dim' must be a positive integer, got {d!r}")
    given = {}
    for n, e in enumerate(doc.get("entries", [])):
        where = f"entry {n + 1}"
        try:
            i, j = int(e["i"]) - 1, int(e["j"]) - 1
            terms = e.get("poly", [])
        except (KeyError, TypeError, ValueError):
            raise PoissonInputError(f"{where}: needs integer 'i', 'j' and a 'poly' list") from None
        if not (0 <= i < d and 0 <= j < d):
            raise PoissonInputError(f"{where}: index ({i + 1},{j + 1}) out of range for dim {d}")
        poly = Symbol(d, 0)
        for t in terms:
            exp = t.get("exp")
            if not isinstance(exp, list) or len(exp) != d or any(not isinstance(x, int) or x < 0 for x in exp):
                raise PoissonInputError(f"{where}: exponent must be a list of {d} non-negative integers")
            poly = poly + xpoly(d, {tuple(exp): _rational(t.get("coef"), where)})
        if (i, j) in given:
            raise PoissonInputError(f"{where}: entry ({i + 1},{j + 1}) given twice")
        given[(i, j)] = poly
    entries = {}
    for (i, j), poly in given.items():
        if i == j:
            if not poly.is_zero():
                raise PoissonInputError(f"antisymmetry violated: diagonal entry ({i + 1},{i + 1}) is nonzero")
            continue
        if (j, i) in given:
            if not (poly + given[(j, i)]).is_zero():
                raise PoissonInputError(f"antisymmetry violated between ({i + 1},{j + 1}) and ({j + 1},{i + 1})")
            if i > j:
                continue
        key, val = ((i, j), poly) if i < j else ((j, i), -poly)
        entries[key] = val
    alpha = PoissonStructure(d, entries, check_jacobi=False)
    if doc.get("linear") and not alpha.is_linear() and alpha.entries:
        raise PoissonInputError("document is marked linear but has non-linear entries")
    if check_jacobi and not alpha.is_poisson():
        raise PoissonInputError("Jacobi identity fails (pass the bypass flag to accept anyway)")
    return alpha


def load_poisson(path, check_jacobi=True):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = "toml" if str(path).endswith(".toml") else "json"
    return parse_poisson(text, fmt, check_jacobi=check_jacobi)


# ---------------------------------------------------------------------------
# Symbols of graph operators


def hat_B(graph, alpha):
    """Symbol of the multidifferential operator attached to ``graph``.

    Sum over index maps I on the 2n edges: aerial vertex k carries
    alpha^{I(e_k^1) I(e_k^2)} differentiated along its incoming edges,
    ground vertex i carries the product of p^i_{I(e)} over incoming edges.
    """
    d, n, m = alpha.d, graph.n, graph.m
    incoming = {k: [] for k in range(1, n + 1)}
    ground_in = {i: [] for i in range(1, m + 1)}
    for k, pair in enumerate(graph.targets, start=1):
        for s, t in enumerate(pair):
            e = 2 * (k - 1) + s
            (incoming[t] if t > 0 else ground_in[-t]).append(e)
    out = {}
    one = Symbol.const(d, 0, 1)
    for I in itertools.product(range(d), repeat=2 * n):
        prod = one
        for k in range(1, n + 1):
            f = alpha.derivative(I[2 * k - 2], I[2 * k - 1], [I[e] for e in incoming[k]])
            if f.is_zero():
                prod = None
                break
            prod = prod * f
        if prod is None:
            continue
        pk = [0] * (m * d)
        for i in range(1, m + 1):
            for e in ground_in[i]:
                pk[(i - 1) * d + I[e]] += 1
        pk = tuple(pk)
        for k, c in prod.terms.items():
            _addto(out, pk + k, c)
    s = Symbol(d, m)
    s.terms = out
    return s


def parse_polynomial(text, d):
    """XPoly from an expression such as ``3/2*x1^2*x2 - x3 + 1`` in x1..xd."""
    import sympy
    from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
    from tokenize import TokenError

    names = {f"x{i + 1}": sympy.Symbol(f"x{i + 1}") for i in range(d)}
    try:
        expr = parse_expr(text, local_dict=names, transformations=standard_transformations + (convert_xor,),
                          evaluate=True)
    except (SyntaxError, TypeError, sympy.SympifyError, TokenError) as exc:
        raise ValueError(f"cannot parse polynomial {text!r}: {exc}") from None
    gens = list(names.values())
    extra = expr.free_symbols - set(gens)
    if extra:
        raise ValueError(f"unknown variables {sorted(map(str, extra))} (expected x1..x{d})")
    try:
        poly = sympy.Poly(expr, *gens, domain="QQ")
    except sympy.PolynomialError as exc:
        raise ValueError(f"not a polynomial: {text!r}: {exc}") from None
    terms = {}
    for exps, c in poly.terms():
        terms[tuple(exps)] = Fraction(int(c.p), int(c.q))
    return xpoly(d, terms)

