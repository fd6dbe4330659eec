"""Kontsevich graphs of type (n, m) and their combinatorics.

Vertex references are integers: aerial vertices are ``1..n`` and ground
vertex i (written i-bar) is ``-i``.  Graphs are labeled objects; nothing here
quotients by isomorphism.
"""

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cayley import BipartiteTree
from .errors import CapExceededError

DEFAULT_CAP = 10 ** 7

_ID_RE = re.compile(r"^K (\d+) (\d+) :((?:\((?:g?\d+),(?:g?\d+)\))*)$")
_PAIR_RE = re.compile(r"\((g?\d+),(g?\d+)\)")


def ref_str(r):
    return str(r) if r > 0 else f"g{-r}"


def _ref_parse(s):
    return -int(s[1:]) if s.startswith("g") else int(s)


@dataclass(frozen=True)
class KontsevichGraph:
    n: int
    m: int
    targets: tuple

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(tuple(t) for t in self.targets))
        if len(self.targets) != self.n:
            raise ValueError(f"expected {self.n} target pairs, got {len(self.targets)}")
        for k, pair in enumerate(self.targets, start=1):
            if len(pair) != 2:
                raise ValueError(f"vertex {k}: target must be a pair")
            a, b = pair
            for r in pair:
                if not (1 <= r <= self.n or 1 <= -r <= self.m):
                    raise ValueError(f"vertex {k}: invalid target reference {r}")
                if r == k:
                    raise ValueError(f"vertex {k}: small loop")
            if a == b:
                raise ValueError(f"vertex {k}: double edge")

    # -- identity -----------------------------------------------------------
    def graph_id(self):
        body = "".join(f"({ref_str(a)},{ref_str(b)})" for a, b in self.targets)
        return f"K {self.n} {self.m} :{body}"

    __str__ = graph_id

    def sort_key(self):
        n = self.n
        return tuple(r if r > 0 else n - r for pair in self.targets for r in pair)

    def __lt__(self, other):
        return (self.n, self.m, self.sort_key()) < (other.n, other.m, other.sort_key())

    # -- structure -------------------------------------------------------------
    @property
    def vertices(self):
        return list(range(1, self.n + 1)) + [-i for i in range(1, self.m + 1)]

    def edges(self):
        """Directed edges (source, target) in slot order."""
        return [(k, t) for k, pair in enumerate(self.targets, start=1) for t in pair]

    def aerial_edges(self):
        return [(k, t) for k, t in self.edges() if t > 0]

    def ground_edges(self):
        return [(k, t) for k, t in self.edges() if t < 0]

    def swap_slots(self, k):
        t = list(self.targets)
        a, b = t[k - 1]
        t[k - 1] = (b, a)
        return KontsevichGraph(self.n, self.m, t)

    def relabel(self, perm):
        """Image under the aerial relabeling k -> perm[k] (dict or sequence)."""
        pm = perm if isinstance(perm, dict) else {k: perm[k - 1] for k in range(1, self.n + 1)}
        t = [None] * self.n
        for k, (a, b) in enumerate(self.targets, start=1):
            t[pm[k] - 1] = tuple(pm[r] if r > 0 else r for r in (a, b))
        return KontsevichGraph(self.n, self.m, t)

    def reflect_ground(self):
        """Reverse the order of ground vertices."""
        m = self.m
        f = lambda r: r if r > 0 else -(m + 1 + r)
        return KontsevichGraph(self.n, m, [(f(a), f(b)) for a, b in self.targets])


def parse_graph_id(s):
    mt = _ID_RE.match(s.strip())
    if not mt:
        raise ValueError(f"malformed graph id {s!r}")
    n, m = int(mt.group(1)), int(mt.group(2))
    pairs = [(_ref_parse(a), _ref_parse(b)) for a, b in _PAIR_RE.findall(mt.group(3))]
    return KontsevichGraph(n, m, pairs)


def graph_count(n, m):
    if n == 0:
        return 1
    return ((n + m - 1) * (n + m - 2)) ** n


def _pairs(k, n, m):
    refs = [r for r in range(1, n + 1) if r != k] + [-i for i in range(1, m + 1)]
    return [(a, b) for a in refs for b in refs if a != b]


def enumerate_graphs(n, m, cap=DEFAULT_CAP):
    """All graphs of type (n, m) in canonical order."""
    if n < 0 or m < 1:
        raise ValueError("need n >= 0 and m >= 1")
    if graph_count(n, m) > cap:
        raise CapExceededError(f"|G_{n},{m}| = {graph_count(n, m)} exceeds cap {cap}")
    return list(iter_graphs(n, m))


def iter_graphs(n, m):
    key = lambda r: r if r > 0 else n - r
    choices = [sorted(_pairs(k, n, m), key=lambda p: (key(p[0]), key(p[1])))
               for k in range(1, n + 1)]
    for t in itertools.product(*choices):
        yield KontsevichGraph(n, m, t)


# ---------------------------------------------------------------------------
# connectivity


class _DSU:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def aerial_skeleton(g):
    """Undirected multigraph on aerial vertices: (vertices, list of edges)."""
    return list(range(1, g.n + 1)), [tuple(sorted(e)) for e in g.aerial_edges()]


def aerial_components(g):
    dsu = _DSU(range(1, g.n + 1))
    for a, b in g.aerial_edges():
        dsu.union(a, b)
    comps = {}
    for v in range(1, g.n + 1):
        comps.setdefault(dsu.find(v), []).append(v)
    return sorted(comps.values())


@dataclass(frozen=True)
class Classification:
    connected: bool
    tree: bool
    loop_number: int
    aerial_edges: int
    ground_edges: int


def classify(g):
    dsu = _DSU(range(1, g.n + 1))
    acyclic = True
    for a, b in g.aerial_edges():
        if not dsu.union(a, b):
            acyclic = False
    roots = {dsu.find(v) for v in range(1, g.n + 1)}
    connected = len(roots) <= 1
    e_g = len(g.ground_edges())
    return Classification(connected, connected and acyclic, g.n - e_g + 1,
                          2 * g.n - e_g, e_g)


def is_tree(g):
    return classify(g).tree


def enumerate_trees(n, m, cap=DEFAULT_CAP):
    return [g for g in enumerate_graphs(n, m, cap) if is_tree(g)]


def enumerate_connected(n, m, cap=DEFAULT_CAP):
    return [g for g in enumerate_graphs(n, m, cap) if classify(g).connected]


# ---------------------------------------------------------------------------
# restriction and contraction


@dataclass(frozen=True)
class SubgraphResult:
    """Result of restricting or contracting; ``graph`` is set when valid."""
    vertices: tuple
    edges: tuple
    valid: bool
    graph: KontsevichGraph = None
    aerial_labels: tuple = ()     # original labels of the new aerial vertices 1..n'
    ground_labels: tuple = ()     # original refs (or "*") of new ground vertices


def _as_kontsevich(vertices, edges):
    """Relabel a directed graph whose vertices are original refs or '*'.

    Original aerial/ground status is kept; '*' is ground when flagged.  Returns
    (graph or None, aerial_labels, ground_labels).
    """
    aer = sorted(v for v, is_g in vertices if not is_g)
    gnd = [v for v, is_g in vertices if is_g]
    amap = {v: i + 1 for i, v in enumerate(aer)}
    gmap = {v: -(i + 1) for i, v in enumerate(gnd)}
    out = {v: [] for v, _ in vertices}
    for a, b in edges:
        out[a].append(b)
    for v in gnd:
        if out[v]:
            return None, tuple(aer), tuple(gnd)
    targets = []
    for v in aer:
        ts = out[v]
        if len(ts) != 2 or ts[0] == ts[1]:
            return None, tuple(aer), tuple(gnd)
        ref = lambda t: amap[t] if t in amap else gmap[t]
        targets.append((ref(ts[0]), ref(ts[1])))
    return KontsevichGraph(len(aer), len(gnd), targets), tuple(aer), tuple(gnd)


def _ground_order(v):
    return -v


def restrict(g, A):
    """Keep the vertices of A and the edges between them."""
    A = set(A)
    edges = tuple((a, b) for a, b in g.edges() if a in A and b in A)
    gnd = sorted((v for v in A if v < 0), key=_ground_order)
    verts = [(v, False) for v in sorted(v for v in A if v > 0)] + [(v, True) for v in gnd]
    kg, al, gl = _as_kontsevich(verts, edges)
    return SubgraphResult(tuple(v for v, _ in verts), edges, kg is not None, kg, al, gl)


def contract(g, A):
    """Collapse A to a single vertex '*' and delete the resulting loops.

    '*' is a ground vertex when A contains one, placed at the position of
    the smallest ground vertex of A; otherwise it is aerial.
    """
    A = set(A)
    star_ground = any(v < 0 for v in A)
    edges = []
    for a, b in g.edges():
        a2 = "*" if a in A else a
        b2 = "*" if b in A else b
        if a2 == b2 == "*":
            continue
        edges.append((a2, b2))
    rest = [v for v in g.vertices if v not in A]
    if star_ground:
        anchor = max(v for v in A if v < 0)          # smallest ground index
        gorder = sorted([v for v in rest if v < 0] + [anchor], key=_ground_order)
        gnd = ["*" if v == anchor else v for v in gorder]
        verts = [(v, False) for v in rest if v > 0] + [(v, True) for v in gnd]
        kg, al, gl = _as_kontsevich(verts, edges)
    else:
        # aerial star takes the smallest label of A
        anchor = min(A) if A else None
        key = lambda v: anchor if v == "*" else v
        aer = sorted([v for v in rest if v > 0] + (["*"] if A else []), key=key)
        verts = [(v, False) for v in aer] + [(v, True) for v in rest if v < 0]
        amap = {v: i + 1 for i, v in enumerate(aer)}
        kg = None
        out = {v: [] for v, _ in verts}
        for a, b in edges:
            out[a].append(b)
        ok = all(not out[v] for v, isg in verts if isg)
        targets = []
        if ok:
            gmap = {v: -(i + 1) for i, (v, isg) in enumerate(x for x in verts if x[1])}
            for v in aer:
                ts = out[v]
                if len(ts) != 2 or ts[0] == ts[1]:
                    ok = False
                    break
                targets.append(tuple(amap[t] if t in amap else gmap[t] for t in ts))
        if ok:
            kg = KontsevichGraph(len(aer), len(verts) - len(aer), targets)
        al, gl = tuple(aer), tuple(v for v, isg in verts if isg)
    return SubgraphResult(tuple(v for v, _ in verts), tuple(edges), kg is not None, kg, al, gl)


# ---------------------------------------------------------------------------
# reachability


def star_sets(g, v):
    """(star_in(v), star_out(v)): vertices with a path to v, reachable from v."""
    succ = {u: [] for u in g.vertices}
    pred = {u: [] for u in g.vertices}
    for a, b in g.edges():
        succ[a].append(b)
        pred[b].append(a)

    def closure(start, nbrs):
        seen, stack = set(), list(nbrs[start])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(nbrs[u])
        seen.discard(start)
        return seen

    return closure(v, pred), closure(v, succ)


def sub_sets(g, around):
    """Aerial subsets S with restriction and contraction of around+S both
    valid graphs of type (., 2)."""
    aer = list(range(1, g.n + 1))
    out = []
    for r in range(len(aer) + 1):
        for S in itertools.combinations(aer, r):
            A = set(S) | set(around)
            res, con = restrict(g, A), contract(g, A)
            if res.valid and con.valid and res.graph.m == 2 and con.graph.m == 2:
                out.append(frozenset(S))
    return out


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorization:
    factors: tuple          # connected KontsevichGraphs of type (n_i, m)
    labels: tuple           # original aerial labels of each factor, increasing
    n: int
    m: int

    def sizes(self):
        return tuple(f.n for f in self.factors)

    def ids(self):
        return tuple(f.graph_id() for f in self.factors)


def connected_factorization(g):
    comps = aerial_components(g)
    factors = []
    for comp in comps:
        res = restrict(g, set(comp) | {-i for i in range(1, g.m + 1)})
        factors.append(res.graph)
    return Factorization(tuple(factors), tuple(tuple(c) for c in comps), g.n, g.m)


def reassemble(fz):
    targets = [None] * fz.n
    for f, lab in zip(fz.factors, fz.labels):
        for k, (a, b) in enumerate(f.targets, start=1):
            targets[lab[k - 1] - 1] = tuple(lab[r - 1] if r > 0 else r for r in (a, b))
    return KontsevichGraph(fz.n, fz.m, targets)


def decomposition_coefficient(*sizes):
    sizes = sizes[0] if len(sizes) == 1 and not isinstance(sizes[0], int) else sizes
    n, k = sum(sizes), len(sizes)
    den = math.factorial(k)
    for s in sizes:
        if s < 1:
            raise ValueError("factor sizes must be positive")
        den *= math.factorial(s)
    return Fraction(math.factorial(n), den)


@lru_cache(maxsize=None)
def _fiber_table(n, m):
    c = Counter()
    for g in iter_graphs(n, m):
        c[connected_factorization(g).ids()] += 1
    return c


def count_fiber(*factors, cap=10 ** 6):
    """Number of graphs whose connected factorization is exactly ``factors``."""
    if not factors:
        return 1
    m = factors[0].m
    n = sum(f.n for f in factors)
    if graph_count(n, m) > cap:
        raise CapExceededError(f"fiber count needs |G_{n},{m}| = {graph_count(n, m)} > cap {cap}")
    if any(not classify(f).connected for f in factors):
        raise ValueError("fiber factors must be connected")
    return _fiber_table(n, m)[tuple(f.graph_id() for f in factors)]


# ---------------------------------------------------------------------------
# contraction/restriction decomposition of type (n, 3) trees


@dataclass(frozen=True)
class CRDecomposition:
    tree: BipartiteTree
    factors: tuple           # type (., 2) graphs, in tree-label order
    vertex_sets: tuple       # original aerial labels per tree vertex
    B: frozenset             # aerial vertices not reaching the special ground vertex
    N: frozenset
    restriction: SubgraphResult
    contraction: SubgraphResult


def cr_decomposition(g, side):
    """Split a tree of type (n, 3) around {1,2}+B_3 (side 1) or {2,3}+B_1 (side 2)."""
    if g.m != 3 or not is_tree(g):
        raise ValueError("cr_decomposition needs a Kontsevich tree of type (n, 3)")
    if side == 1:
        special, pair = -3, (-1, -2)
    elif side == 2:
        special, pair = -1, (-2, -3)
    else:
        raise ValueError("side must be 1 or 2")
    N = frozenset(v for v in star_sets(g, special)[0] if v > 0)
    B = frozenset(range(1, g.n + 1)) - N
    A = set(pair) | B
    res, con = restrict(g, A), contract(g, A)
    if not (res.valid and con.valid):
        raise AssertionError(f"invalid contraction/restriction for {g.graph_id()}")
    parts = []
    for sub, colour in ((res, "w"), (con, "b")):
        if sub.graph.n == 0:
            continue
        fz = connected_factorization(sub.graph)
        for f, lab in zip(fz.factors, fz.labels):
            orig = tuple(sub.aerial_labels[i - 1] for i in lab)
            parts.append((min(orig), orig, colour, f))
    parts.sort()
    where = {}
    for idx, (_, orig, _, _) in enumerate(parts, start=1):
        for v in orig:
            where[v] = idx
    tedges = set()
    for a, b in g.aerial_edges():
        ia, ib = where[a], where[b]
        if ia != ib:
            tedges.add((min(ia, ib), max(ia, ib)))
    tree = BipartiteTree(len(parts), "".join(p[2] for p in parts), frozenset(tedges))
    return CRDecomposition(tree, tuple(p[3] for p in parts), tuple(p[1] for p in parts),
                           B, N, res, con)
