"""Bipartite (Cayley) trees: labeled, rooted and topological.

Colours are the characters ``"w"`` (white) and ``"b"`` (black).  Labeled trees
have vertices ``1..n``.  Rooted topological trees are :class:`RTree` values in
canonical form: children are kept sorted, so equal trees are equal objects.
"""

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .errors import CapExceededError

COLORS = ("w", "b")


def other(c):
    return "b" if c == "w" else "w"


@dataclass(frozen=True)
class BipartiteTree:
    n: int
    colors: str                 # colors[v-1] is the colour of vertex v
    edges: frozenset            # pairs (a, b) with a < b

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(tuple(sorted(e)) for e in self.edges))
        if len(self.colors) != self.n or set(self.colors) - set(COLORS):
            raise ValueError("need one colour 'w'/'b' per vertex")
        if len(self.edges) != self.n - 1:
            raise ValueError("a tree on n vertices has n-1 edges")
        parent = list(range(self.n + 1))

        def find(v):
            while parent[v] != v:
                v = parent[v]
            return v
        for a, b in self.edges:
            if not (1 <= a <= self.n and 1 <= b <= self.n) or a == b:
                raise ValueError(f"bad edge {(a, b)}")
            if self.colors[a - 1] == self.colors[b - 1]:
                raise ValueError(f"edge {(a, b)} joins vertices of the same colour")
            ra, rb = find(a), find(b)
            if ra == rb:
                raise ValueError("edges contain a cycle")
            parent[ra] = rb

    def color(self, v):
        return self.colors[v - 1]

    def neighbours(self, v):
        return sorted(b if a == v else a for a, b in self.edges if v in (a, b))

    def adjacency(self):
        adj = {v: [] for v in range(1, self.n + 1)}
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def rooted(self, root):
        """Topological rooted tree obtained by rooting at ``root``."""
        adj = self.adjacency()

        def build(v, parent):
            return RTree(self.color(v), tuple(build(u, v) for u in adj[v] if u != parent))
        return build(root, None)

    def encode(self):
        es = ",".join(f"{a}-{b}" for a, b in sorted(self.edges))
        return f"{self.colors}:{es}"

    @classmethod
    def decode(cls, s):
        cols, _, es = s.partition(":")
        edges = [tuple(map(int, e.split("-"))) for e in es.split(",") if e]
        return cls(len(cols), cols, frozenset(edges))


class RTree:
    """Rooted topological bipartite tree ``[children]_colour``."""

    __slots__ = ("color", "children", "_key", "size")

    def __init__(self, color, children=()):
        if color not in COLORS:
            raise ValueError(f"bad colour {color!r}")
        for ch in children:
            if ch.color == color:
                raise ValueError("child has the same colour as its parent")
        self.color = color
        self.children = tuple(sorted(children, key=lambda t: t._key))
        self._key = (color, tuple(ch._key for ch in self.children))
        self.size = 1 + sum(ch.size for ch in self.children)

    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, RTree) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return (self.size, self._key) < (other.size, other._key)

    def __len__(self):
        return self.size

    def encode(self):
        if not self.children:
            return self.color
        return "[" + ",".join(ch.encode() for ch in self.children) + "]_" + self.color

    __str__ = encode

    def __repr__(self):
        return f"RTree({self.encode()})"

    def to_labeled(self):
        """(BipartiteTree, root label) with labels assigned in preorder."""
        colors, edges = [], []

        def walk(t, parent):
            colors.append(t.color)
            me = len(colors)
            if parent:
                edges.append((parent, me))
            for ch in t.children:
                walk(ch, me)
        walk(self, None)
        return BipartiteTree(len(colors), "".join(colors), frozenset(edges)), 1

    def multiplicities(self):
        return Counter(self.children)


_TOKEN = re.compile(r"\[|\]_[wb]|[wb]|,")


def parse_rtree(s):
    """Parse ``[w,[b]_w]_b`` style notation; a bare colour is a leaf."""
    tokens = _TOKEN.findall(s.replace(" ", ""))
    if "".join(tokens) != s.replace(" ", ""):
        raise ValueError(f"bad tree notation {s!r}")
    pos = 0

    def node():
        nonlocal pos
        tok = tokens[pos]
        if tok in COLORS:
            pos += 1
            return RTree(tok)
        if tok != "[":
            raise ValueError(f"unexpected {tok!r} in {s!r}")
        pos += 1
        kids = []
        while tokens[pos] != "]_w" and tokens[pos] != "]_b":
            kids.append(node())
            if tokens[pos] == ",":
                pos += 1
        col = tokens[pos][-1]
        pos += 1
        return RTree(col, kids)
    t = node()
    if pos != len(tokens):
        raise ValueError(f"trailing input in {s!r}")
    return t


# ---------------------------------------------------------------------------
# enumeration


def _prufer_trees(n):
    if n == 1:
        yield frozenset()
        return
    if n == 2:
        yield frozenset({(1, 2)})
        return
    for seq in itertools.product(range(1, n + 1), repeat=n - 2):
        degree = [1] * (n + 1)
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = min(u for u in range(1, n + 1) if degree[u] == 1)
            edges.append((min(leaf, v), max(leaf, v)))
            degree[leaf] -= 1
            degree[v] -= 1
        u, w = [x for x in range(1, n + 1) if degree[x] == 1]
        edges.append((u, w))
        yield frozenset(edges)


def _two_colorings(n, edges):
    adj = {v: [] for v in range(1, n + 1)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    col = {1: 0}
    stack = [1]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in col:
                col[u] = 1 - col[v]
                stack.append(u)
    base = "".join("wb"[col[v]] for v in range(1, n + 1))
    flip = "".join("bw"[col[v]] for v in range(1, n + 1))
    return [base, flip]


@lru_cache(maxsize=None)
def _labeled_trees(n):
    out = []
    for edges in _prufer_trees(n):
        for cols in _two_colorings(n, edges):
            out.append(BipartiteTree(n, cols, edges))
    out.sort(key=lambda t: (t.colors, sorted(t.edges)))
    return tuple(out)


def enumerate_labeled_trees(n, cap=10 ** 6):
    if n < 1:
        raise ValueError("n >= 1")
    count = 2 * n ** (n - 2) if n >= 2 else 2
    if count > cap:
        raise CapExceededError(f"{count} labeled bipartite trees exceed cap {cap}")
    return list(_labeled_trees(n))


@dataclass(frozen=True)
class TopologicalClass:
    rep: RTree
    automorphisms: int


@lru_cache(maxsize=None)
def _rooted_of_size(size, color):
    """All rooted topological trees of given size and root colour."""
    if size == 1:
        return (RTree(color),)
    child_col = other(color)
    out = set()
    # children: multiset of trees of total size size-1
    pool = [t for s in range(1, size) for t in _rooted_of_size(s, child_col)]
    pool.sort()

    def grow(start, remaining, acc):
        if remaining == 0:
            out.add(RTree(color, acc))
            return
        for idx in range(start, len(pool)):
            t = pool[idx]
            if t.size <= remaining:
                grow(idx, remaining - t.size, acc + [t])
    grow(0, size - 1, [])
    return tuple(sorted(out))


def enumerate_topological_rooted(n_max, cap=10 ** 5):
    out = []
    for s in range(1, n_max + 1):
        for c in COLORS:
            out.extend(_rooted_of_size(s, c))
            if len(out) > cap:
                raise CapExceededError(f"more than {cap} rooted trees")
    out.sort()
    return [TopologicalClass(t, symmetry_coefficient(t)) for t in out]


def rooted_trees(size, color=None):
    cols = COLORS if color is None else (color,)
    return sorted(t for c in cols for t in _rooted_of_size(size, c))


def symmetry_coefficient(t):
    """sigma(t) = prod mu_i! * prod sigma(t_i)^mu_i over distinct children."""
    s = 1
    for ch, mu in t.multiplicities().items():
        s *= math.factorial(mu) * symmetry_coefficient(ch) ** mu
    return s


def butcher_product(u, v):
    if u.color == v.color:
        raise ValueError("Butcher product needs roots of different colours")
    return RTree(u.color, u.children + (v,))


# ---------------------------------------------------------------------------
# unrooted classes


def centroids(tree):
    n = tree.n
    if n == 1:
        return [1]
    adj = tree.adjacency()
    best, cents = n + 1, []
    for v in range(1, n + 1):
        worst = 0
        for u in adj[v]:
            # size of the branch through u when v is removed
            seen, stack = {v, u}, [u]
            while stack:
                w = stack.pop()
                for z in adj[w]:
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
            worst = max(worst, len(seen) - 1)
        if worst < best:
            best, cents = worst, [v]
        elif worst == best:
            cents.append(v)
    return cents


def unrooted_key(tree):
    """Canonical key of the unrooted topological class (centroid rooting)."""
    return min(tree.rooted(c).key() for c in centroids(tree))


def root_equivalence_classes(n):
    """Rooted trees of size n grouped by their underlying unrooted tree."""
    groups = {}
    for t in rooted_trees(n):
        lab, _ = t.to_labeled()
        groups.setdefault(unrooted_key(lab), []).append(t)
    return [sorted(g) for _, g in sorted(groups.items())]


def topological_unrooted(n):
    """Distinct unrooted classes among labeled trees (brute force)."""
    reps = {}
    for t in enumerate_labeled_trees(n):
        reps.setdefault(unrooted_key(t), t)
    return [reps[k] for k in sorted(reps)]


# ---------------------------------------------------------------------------
# automorphisms and orbits


def automorphisms(tree, root=None):
    """All colour- and edge-preserving permutations (as dicts), optionally fixing root."""
    whites = [v for v in range(1, tree.n + 1) if tree.color(v) == "w"]
    blacks = [v for v in range(1, tree.n + 1) if tree.color(v) == "b"]
    out = []
    for pw in itertools.permutations(whites):
        for pb in itertools.permutations(blacks):
            perm = dict(zip(whites, pw))
            perm.update(zip(blacks, pb))
            if root is not None and perm[root] != root:
                continue
            if all(tuple(sorted((perm[a], perm[b]))) in tree.edges for a, b in tree.edges):
                out.append(perm)
    return out


def _edge_key(tree, e):
    a, b = e
    adj = tree.adjacency()

    def build(v, parent):
        return RTree(tree.color(v), tuple(build(u, v) for u in adj[v] if u != parent))
    ka, kb = build(a, b).key(), build(b, a).key()
    return tuple(sorted((ka, kb)))


@dataclass(frozen=True)
class OrbitCounts:
    vertex_orbit: dict        # v -> size of its orbit under sym(t)
    vertex_iso: dict          # v -> #{v' : t_v' ~ t_v}
    edge_orbit: dict
    edge_iso: dict
    sym: int
    sym_rooted: dict          # v -> |sym(t_v)|
    sym_edge: dict            # e -> |sym(t_e)|


def orbit_counts(tree):
    auts = automorphisms(tree)
    vorb = {v: len({p[v] for p in auts}) for v in range(1, tree.n + 1)}
    eorb = {e: len({tuple(sorted((p[e[0]], p[e[1]]))) for p in auts}) for e in tree.edges}
    rkeys = {v: tree.rooted(v).key() for v in range(1, tree.n + 1)}
    viso = {v: sum(1 for u in rkeys if rkeys[u] == rkeys[v]) for v in rkeys}
    ekeys = {e: _edge_key(tree, e) for e in tree.edges}
    eiso = {e: sum(1 for f in ekeys if ekeys[f] == ekeys[e]) for e in ekeys}
    srooted = {v: sum(1 for p in auts if p[v] == v) for v in range(1, tree.n + 1)}
    sedge = {e: sum(1 for p in auts if p[e[0]] == e[0] and p[e[1]] == e[1]) for e in tree.edges}
    return OrbitCounts(vorb, viso, eorb, eiso, len(auts), srooted, sedge)
