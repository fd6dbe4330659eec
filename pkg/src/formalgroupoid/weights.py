"""Kontsevich weights of graphs of type (n, 2).

The weight is ``(2 pi)^(-2n)`` times the integral over configurations of the
n aerial points in the upper half plane (ground vertices at 0 and 1) of the
Jacobian determinant of the 2n angle functions, rows ordered by vertex and
slot, columns ordered ``x_1, y_1, ..., x_n, y_n``.
"""

import cmath
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceededError, MissingWeightError, WeightTableError
from .graphs import (KontsevichGraph, classify, connected_factorization,
                     enumerate_connected, parse_graph_id)
from .uncertainty import Measured

GROUND = {-1: 0.0, -2: 1.0}
MC_MAX_N = 3
CHUNK = 1 << 16


def angle(p, q):
    """Hyperbolic angle at p from the vertical geodesic to the one towards q.

    ``q`` may be ``math.inf`` (the point at infinity).
    """
    p = complex(p)
    if p.imag <= 0:
        raise ValueError("p must lie in the upper half plane")
    if isinstance(q, float) and math.isinf(q):
        return 0.0
    q = complex(q)
    if q == p:
        raise ValueError("coincident points")
    a = cmath.phase((q - p) / (q - p.conjugate()))
    return math.pi if a == -math.pi else a      # range (-pi, pi]


def _angle_gradients(p, q):
    """Partial derivatives of arg((q-p)/(q-conj p)) in (Re p, Im p, Re q, Im q)."""
    a = 1.0 / (q - p)
    b = 1.0 / (q - np.conj(p))
    dpx = (-a).imag + b.imag
    dpy = (-1j * a).imag - (1j * b).imag
    dqx = a.imag - b.imag
    dqy = a.real - b.real
    return dpx, dpy, dqx, dqy


def jacobian_determinant(graph, z):
    """Integrand (before normalisation) at configurations z of shape (S, n)."""
    n = graph.n
    S = z.shape[0]
    J = np.zeros((S, 2 * n, 2 * n))
    for k, pair in enumerate(graph.targets):
        p = z[:, k]
        for s, t in enumerate(pair):
            row = 2 * k + s
            if t > 0:
                q = z[:, t - 1]
            else:
                q = np.full(S, GROUND[t], dtype=complex)
            dpx, dpy, dqx, dqy = _angle_gradients(p, q)
            J[:, row, 2 * k] += dpx
            J[:, row, 2 * k + 1] += dpy
            if t > 0:
                J[:, row, 2 * (t - 1)] += dqx
                J[:, row, 2 * (t - 1) + 1] += dqy
    return np.linalg.det(J)


@dataclass
class WeightEstimate:
    graph_id: str
    value: object                 # Fraction for table entries, float otherwise
    stderr: float = 0.0
    samples: int = 0
    method: str = "table"         # mc | quadrature | table
    seed: int = None
    source: str = ""

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if self.method not in ("mc", "quadrature", "table"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "table":
            if self.stderr:
                raise ValueError("table entries are exact")
            self.value = Fraction(self.value)

    @property
    def exact(self):
        return self.method == "table"

    def to_json(self):
        d = asdict(self)
        d["value"] = str(self.value) if self.exact else float(self.value)
        return d

    @classmethod
    def from_json(cls, d):
        try:
            method = d.get("method", "table")
            v = d["value"]
            if method == "table":
                value = Fraction(str(v))
            else:
                value = float(Fraction(v)) if isinstance(v, str) else float(v)
            parse_graph_id(d["graph_id"])
            return cls(d["graph_id"], value, float(d.get("stderr", 0.0)), int(d.get("samples", 0)),
                       method, d.get("seed"), d.get("source", ""))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise WeightTableError(f"malformed weight entry {d!r}: {exc}") from None


def _graph_key(graph_id):
    return int.from_bytes(hashlib.sha256(graph_id.encode()).digest()[:8], "little")


def _chunk_stats(graph, seed, gkey, idx, size):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(gkey, idx)))
    n = graph.n
    x = rng.standard_cauchy((size, n))
    y = np.abs(rng.standard_cauchy((size, n)))
    y[y == 0] = 1e-300
    dens = np.prod(1.0 / (math.pi * (1 + x * x)), axis=1) * np.prod(2.0 / (math.pi * (1 + y * y)), axis=1)
    vals = jacobian_determinant(graph, x + 1j * y) / dens
    mean = float(vals.mean())
    return size, mean, float(((vals - mean) ** 2).sum())


def weight_mc(graph, samples=10 ** 6, seed=0, threads=1, chunk=CHUNK, max_n=MC_MAX_N):
    """Monte Carlo estimate with Cauchy / half-Cauchy sampling.

    The stream is cut into fixed chunks with seeds derived from
    (seed, graph, chunk index) and reduced in chunk order, so the result does
    not depend on ``threads``.
    """
    if graph.m != 2:
        raise ValueError("weights are defined for graphs of type (n, 2)")
    gid = graph.graph_id()
    if graph.n == 0:
        return WeightEstimate(gid, Fraction(1), 0.0, 0, "table", None, "empty graph")
    if graph.n > max_n:
        raise CapExceededError(f"MC weights are capped at n <= {max_n}")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    gkey = _graph_key(gid)
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    jobs = list(enumerate(sizes))
    run = lambda job: _chunk_stats(graph, seed, gkey, job[0], job[1])
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            stats = list(pool.map(run, jobs))
    else:
        stats = [run(j) for j in jobs]
    # Chan et al. pairwise combination in chunk order
    count, mean, m2 = 0, 0.0, 0.0
    for c, mu, s2 in stats:
        delta = mu - mean
        tot = count + c
        mean += delta * c / tot
        m2 += s2 + delta * delta * count * c / tot
        count = tot
    norm = (2 * math.pi) ** (2 * graph.n)
    var = m2 / (count - 1)
    return WeightEstimate(gid, mean / norm, math.sqrt(var / count) / norm, samples, "mc", seed,
                          "monte carlo (cauchy/half-cauchy)")


def weight_quadrature_n1(graph, epsabs=1e-11):
    """Adaptive iterated quadrature for a single aerial vertex."""
    from scipy import integrate

    if graph.n != 1 or graph.m != 2:
        raise ValueError("quadrature oracle handles type (1, 2) only")

    (t1, t2), = graph.targets
    q1, q2 = GROUND[t1], GROUND[t2]

    def f(y, x):
        p = complex(x, y)
        a1, b1 = 1 / (q1 - p), 1 / (q1 - p.conjugate())
        a2, b2 = 1 / (q2 - p), 1 / (q2 - p.conjugate())
        r1 = (b1.imag - a1.imag, -a1.real - b1.real)
        r2 = (b2.imag - a2.imag, -a2.real - b2.real)
        return r1[0] * r2[1] - r1[1] * r2[0]

    def inner(x):
        v1, e1 = integrate.quad(f, 0, 1, args=(x,), epsabs=epsabs * 1e-2, limit=200)
        v2, e2 = integrate.quad(f, 1, np.inf, args=(x,), epsabs=epsabs * 1e-2, limit=200)
        inner.err = max(inner.err, e1 + e2)
        return v1 + v2
    inner.err = 0.0
    total, err = 0.0, 0.0
    for a, b in ((-np.inf, 0.0), (0.0, 1.0), (1.0, np.inf)):
        v, e = integrate.quad(inner, a, b, epsabs=epsabs, limit=200, points=None)
        total += v
        err += e
    norm = (2 * math.pi) ** 2
    err = err + inner.err * 3
    return WeightEstimate(graph.graph_id(), total / norm, err / norm, 0, "quadrature", None,
                          "iterated adaptive quadrature")


# ---------------------------------------------------------------------------
# symmetries and the literature table


def unused_ground(graph):
    hit = {t for _, t in graph.ground_edges()}
    return any(-i not in hit for i in range(1, graph.m + 1))


def _symmetry_moves(g):
    """(image, sign) pairs under the generators of the weight symmetries."""
    out = [(g.swap_slots(k), -1) for k in range(1, g.n + 1)]
    for k in range(1, g.n):
        perm = list(range(1, g.n + 1))
        perm[k - 1], perm[k] = perm[k], perm[k - 1]
        out.append((g.relabel(perm), 1))
    out.append((g.reflect_ground(), (-1) ** g.n))
    return out


def symmetry_orbit(g):
    """{graph: sign} with W(image) = sign * W(g)."""
    orbit = {g: 1}
    stack = [g]
    while stack:
        u = stack.pop()
        for v, s in _symmetry_moves(u):
            sv = orbit[u] * s
            if v in orbit:
                if orbit[v] != sv:
                    return None          # the weight is forced to vanish
                continue
            orbit[v] = sv
            stack.append(v)
    return orbit


LITERATURE_SOURCE = "literature (Kontsevich, second order): wedge 1/2, tree 1/12, 2-cycle 1/24; signs fixed by W(wedge) = +1/2"

LITERATURE_REFERENCES = {
    "K 1 2 :(g1,g2)": Fraction(1, 2),
    "K 2 2 :(2,g1)(g1,g2)": Fraction(-1, 12),
    "K 2 2 :(2,g1)(1,g2)": Fraction(-1, 24),
}


def literature_table():
    """Exact weights of every connected graph of type (n, 2), n <= 2."""
    table = WeightTable()
    values = {}
    for gid, w in LITERATURE_REFERENCES.items():
        orbit = symmetry_orbit(parse_graph_id(gid))
        if orbit is None:
            raise AssertionError(f"reference {gid} has a sign-reversing symmetry")
        for h, s in orbit.items():
            values[h] = s * w
    for n in (1, 2):
        for g in enumerate_connected(n, 2):
            if g in values:
                w = values[g]
            elif unused_ground(g) or symmetry_orbit(g) is None:
                w = Fraction(0)
            else:
                raise AssertionError(f"no literature value for {g.graph_id()}")
            table.add(WeightEstimate(g.graph_id(), w, 0.0, 0, "table", None, LITERATURE_SOURCE))
    return table


# ---------------------------------------------------------------------------
# weight tables


class WeightTable:
    """Weights keyed by graph id, with optional on-demand estimator.

    ``coefficient(graph)`` returns an exact Fraction for table entries and a
    :class:`Measured` for estimates.  Disconnected graphs use the product of
    their connected factors; the empty graph has weight 1.
    """

    def __init__(self, entries=None, estimator=None, numeric=False):
        self.entries = {}
        self.estimator = estimator
        self.numeric = numeric
        self.used = {}
        for e in entries or ():
            self.add(e)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, gid):
        return (gid.graph_id() if isinstance(gid, KontsevichGraph) else gid) in self.entries

    def add(self, est):
        cur = self.entries.get(est.graph_id)
        if cur is None:
            self.entries[est.graph_id] = est
        elif cur.exact and est.exact:
            if cur.value != est.value:
                raise WeightTableError(f"conflicting exact weights for {est.graph_id}: {cur.value} vs {est.value}")
        elif est.exact:
            self.entries[est.graph_id] = est
        elif not cur.exact and est.stderr < cur.stderr:
            self.entries[est.graph_id] = est

    def merge(self, other):
        for e in other.entries.values():
            self.add(e)
        return self

    def get(self, graph):
        gid = graph.graph_id() if isinstance(graph, KontsevichGraph) else graph
        return self.entries.get(gid)

    def estimate(self, graph):
        """Direct entry for a connected graph, estimating it if allowed."""
        e = self.get(graph)
        if e is None:
            if self.estimator is None:
                raise MissingWeightError(graph.graph_id())
            e = self.estimator(graph)
            self.add(e)
            e = self.get(graph)
        return e

    def coefficient(self, graph):
        if graph.n == 0:
            return Fraction(1)
        if not classify(graph).connected:
            out = Fraction(1)
            for f in connected_factorization(graph).factors:
                out = out * self.coefficient(f)
            return out
        e = self.estimate(graph)
        self.used[e.graph_id] = e.method
        if e.exact:
            return float(e.value) if self.numeric else e.value
        return Measured.source(e.graph_id, e.value, e.stderr)

    def provenance(self):
        """Summary of the entries consulted so far."""
        methods = sorted(set(self.used.values()))
        sources = sorted({self.entries[g].source for g in self.used if g in self.entries})
        return {"methods": methods, "sources": sources, "entries_used": len(self.used)}

    def mixed(self):
        methods = set(self.used.values())
        return "table" in methods and len(methods) > 1

    def to_json(self):
        return [self.entries[k].to_json() for k in sorted(self.entries)]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, rows, **kw):
        if not isinstance(rows, list):
            raise WeightTableError("weight table must be a JSON array")
        t = cls(**kw)
        for r in rows:
            if not isinstance(r, dict):
                raise WeightTableError(f"weight entry must be an object, got {r!r}")
            t.add(WeightEstimate.from_json(r))
        return t

    @classmethod
    def load(cls, path, **kw):
        try:
            with open(path, encoding="utf-8") as fh:
                rows = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WeightTableError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_json(rows, **kw)


def mc_estimator(samples=10 ** 6, seed=0, threads=1, quadrature_n1=True):
    """Estimator callback for :class:`WeightTable`."""
    def est(graph):
        if graph.n == 1 and quadrature_n1:
            return weight_quadrature_n1(graph)
        return weight_mc(graph, samples, seed, threads)
    return est
