"""Marked graphs, graph self-maps and train tracks.

Oriented edges are signed integers: ``e > 0`` runs from ``ends[e-1][0]`` to
``ends[e-1][1]`` and ``-e`` is the reverse.  An edge path is a tuple of signed
edges; a *direction* at a vertex is the first edge of a path leaving it.
Edges print as letters, so on a rose an edge path reads like a word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx

from .automorphisms import Automorphism
from .errors import InvalidINP, InvalidSite, ParseError, Reducible, ZeroMatrix
from .words import ReducedWord, char_to_letter, free_reduce, letter_to_char


def tighten(path: Sequence[int]) -> tuple:
    return tuple(free_reduce(path))


def invert_path(path: Sequence[int]) -> tuple:
    return tuple(-e for e in reversed(path))


def cyclic_tighten(path: Sequence[int]) -> tuple:
    p = list(free_reduce(path))
    i, j = 0, len(p)
    while j - i >= 2 and p[i] == -p[j - 1]:
        i += 1
        j -= 1
    return tuple(p[i:j])


def path_to_str(path: Sequence[int]) -> str:
    return "".join(letter_to_char(e) for e in path) or "1"


def path_from_str(text: str) -> tuple:
    text = text.strip()
    if text in ("", "1"):
        return ()
    return tuple(char_to_letter(ch) for ch in text)


# -- graphs -----------------------------------------------------------------------

@dataclass(frozen=True)
class MarkedGraph:
    n_vertices: int
    ends: tuple  # ends[e-1] = (origin, terminus)
    marking: tuple  # one loop at ``base`` per generator
    base: int = 0

    @property
    def n_edges(self) -> int:
        return len(self.ends)

    def orig(self, e: int) -> int:
        u, v = self.ends[abs(e) - 1]
        return u if e > 0 else v

    def term(self, e: int) -> int:
        return self.orig(-e)

    def directions(self) -> list:
        return [d for e in range(1, self.n_edges + 1) for d in (e, -e)]

    def directions_at(self, v: int) -> list:
        return [d for d in self.directions() if self.orig(d) == v]

    @property
    def betti(self) -> int:
        return self.n_edges - self.n_vertices + 1

    def is_connected(self) -> bool:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.ends)
        return self.n_vertices > 0 and nx.is_connected(g)

    def is_path(self, path: Sequence[int]) -> bool:
        return all(self.term(x) == self.orig(y) for x, y in zip(path, path[1:]))

    def loop_of(self, w: ReducedWord) -> tuple:
        """Based loop representing ``w`` under the marking."""
        raw = []
        for x in w.letters:
            loop = self.marking[abs(x) - 1]
            raw.extend(loop if x > 0 else invert_path(loop))
        return tighten(raw)

    def class_loop(self, w: ReducedWord) -> tuple:
        """Cyclically tightened loop for the conjugacy class of ``w``."""
        return cyclic_tighten(self.loop_of(w))


@dataclass(frozen=True)
class GraphMap:
    graph: MarkedGraph
    vertex_images: tuple
    images: tuple  # images[e-1] is the tightened image path of edge e
    labels: tuple  # "top" or "zero" per edge
    shortcut: Optional[tuple] = None  # (zero edge, INP it retracts onto)

    def image(self, e: int) -> tuple:
        img = self.images[abs(e) - 1]
        return img if e > 0 else invert_path(img)

    def apply(self, path: Sequence[int]) -> tuple:
        raw = []
        for e in path:
            raw.extend(self.image(e))
        return tighten(raw)

    def top_edges(self) -> tuple:
        return tuple(e for e in range(1, self.graph.n_edges + 1) if self.labels[e - 1] == "top")

    def fixed_vertices(self) -> list:
        return [v for v in range(self.graph.n_vertices) if self.vertex_images[v] == v]

    def __str__(self) -> str:
        return format_graph_map(self)


def rose_from_automorphism(alpha) -> GraphMap:
    """Rose with one petal per generator; petal i maps to the path spelling alpha(a_i)."""
    k = alpha.rank
    g = MarkedGraph(1, tuple((0, 0) for _ in range(k)), tuple((i,) for i in range(1, k + 1)), 0)
    images = tuple(tuple(w.letters) for w in alpha.images)
    return GraphMap(g, (0,), images, ("top",) * k)


def map_path(f: GraphMap, path: Sequence[int], n: int = 1) -> tuple:
    """``f^n`` of a path, tightened after every step."""
    p = tighten(path)
    for _ in range(n):
        p = f.apply(p)
    return p


def map_loop(f: GraphMap, loop: Sequence[int], n: int = 1) -> tuple:
    p = cyclic_tighten(loop)
    for _ in range(n):
        p = cyclic_tighten(f.apply(p))
    return p


# -- transition matrices and Perron-Frobenius data ---------------------------------------

def transition_matrix(f: GraphMap, stratum: Optional[Sequence[int]] = None) -> list:
    """Rows are edges: entry (e, e') counts e' and its reverse in the image of e."""
    edges = list(stratum) if stratum is not None else list(range(1, f.graph.n_edges + 1))
    pos = {e: i for i, e in enumerate(edges)}
    M = [[0] * len(edges) for _ in edges]
    for e in edges:
        for x in f.images[e - 1]:
            j = pos.get(abs(x))
            if j is not None:
                M[pos[e]][j] += 1
    return M


@dataclass(frozen=True)
class PFData:
    stratum: tuple
    matrix: tuple
    lo: Fraction
    hi: Fraction
    edge_lengths: tuple  # floats, positive, summing to 1

    @property
    def lam(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> float:
        return float(self.hi - self.lo)

    def contains(self, x: float) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def length_of(self, e: int) -> float:
        try:
            return self.edge_lengths[self.stratum.index(abs(e))]
        except ValueError:
            return 0.0


def _digraph(M) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(M)))
    g.add_edges_from((i, j) for i, row in enumerate(M) for j, x in enumerate(row) if x)
    return g


def _collatz_wielandt(M, v) -> tuple:
    exact = [Fraction(x) for x in v]
    ratios = [sum(Fraction(m) * x for m, x in zip(row, exact)) / exact[i] for i, row in enumerate(M)]
    return min(ratios), max(ratios)


def pf_data(matrix, tol: float = 1e-10, stratum: Optional[Sequence[int]] = None, max_iter: int = 200000) -> PFData:
    """Perron-Frobenius eigenvalue with Collatz-Wielandt bounds and positive eigenvector.

    Power iteration runs on ``I + M``, which is primitive when M is
    irreducible; the bounds are evaluated in exact rational arithmetic.
    """
    M = [[int(x) for x in row] for row in matrix]
    n = len(M)
    if n == 0 or any(len(row) != n for row in M) or any(x < 0 for row in M for x in row):
        raise ValueError("need a square nonnegative integer matrix")
    if not any(any(row) for row in M):
        raise ZeroMatrix("transition matrix is zero")
    if n > 1 and not nx.is_strongly_connected(_digraph(M)):
        raise Reducible("matrix is not irreducible")
    v = [1.0 / n] * n
    lo, hi = _collatz_wielandt(M, v)
    it = stalled = 0
    while hi - lo > tol and it < max_iter and stalled < 8:
        for _ in range(16):
            w = [v[i] + sum(m * x for m, x in zip(M[i], v)) for i in range(n)]
            s = sum(w)
            v = [x / s for x in w]
        it += 16
        new = _collatz_wielandt(M, v)
        # the floating point floor shows up as a width that stops shrinking
        stalled = stalled + 1 if new[1] - new[0] >= hi - lo else 0
        lo, hi = max(lo, new[0]), min(hi, new[1])
    edges = tuple(stratum) if stratum is not None else tuple(range(1, n + 1))
    return PFData(edges, tuple(tuple(r) for r in M), lo, hi, tuple(v))


@dataclass(frozen=True)
class Stratum:
    edges: tuple
    kind: str  # exponential | polynomial | zero
    pf: Optional[PFData] = None


def strata(f: GraphMap, tol: float = 1e-10) -> list:
    """Strongly connected pieces of the edge transition digraph, lowest first."""
    edges = list(range(1, f.graph.n_edges + 1))
    M = transition_matrix(f)
    g = _digraph(M)
    cond = nx.condensation(g)
    order = list(reversed(list(nx.topological_sort(cond))))
    out = []
    for c in order:
        members = sorted(cond.nodes[c]["members"])
        block = [[M[i][j] for j in members] for i in members]
        stratum_edges = tuple(edges[i] for i in members)
        if len(members) == 1 and block[0][0] == 0:
            out.append(Stratum(stratum_edges, "zero"))
            continue
        pf = pf_data(block, tol, stratum_edges)
        kind = "polynomial" if _is_permutation(block) else "exponential"
        out.append(Stratum(stratum_edges, kind, pf))
    return out


def _is_permutation(block) -> bool:
    return all(sum(row) == 1 for row in block) and all(sum(col) == 1 for col in zip(*block))


def map_pf(f: GraphMap, tol: float = 1e-10) -> PFData:
    """PF data of the top (non-zero) edges; they must form one irreducible stratum."""
    top = f.top_edges()
    return pf_data(transition_matrix(f, top), tol, top)


def pf_length(pf: PFData, path: Iterable[int]) -> float:
    return sum(pf.length_of(e) for e in path)


def simplicial_length(path: Sequence[int]) -> int:
    return len(path)


# -- gates and illegal turns -------------------------------------------------------------

@dataclass(frozen=True)
class TurnStructure:
    gate_key: dict = field(hash=False)  # direction -> representative of its gate
    vertex_of: dict = field(hash=False)

    def gates(self) -> dict:
        out: dict = {}
        for d, k in self.gate_key.items():
            out.setdefault(self.vertex_of[d], {}).setdefault(k, set()).add(d)
        return {v: sorted((frozenset(s) for s in gs.values()), key=lambda s: sorted(s)) for v, gs in out.items()}

    def is_illegal(self, d1: int, d2: int) -> bool:
        return d1 == d2 or self.gate_key[d1] == self.gate_key[d2]

    def turns(self, path: Sequence[int], cyclic: bool = False) -> list:
        n = len(path)
        stop = n if cyclic and n > 1 else n - 1
        return [(-path[i], path[(i + 1) % n]) for i in range(stop)]

    def illegal_positions(self, path: Sequence[int], cyclic: bool = False) -> list:
        return [i for i, (d1, d2) in enumerate(self.turns(path, cyclic)) if self.is_illegal(d1, d2)]

    def ilt_count(self, path: Sequence[int], cyclic: bool = False) -> int:
        return len(self.illegal_positions(path, cyclic))


def derivative(f: GraphMap) -> dict:
    """First edge of the image of each direction (None when the image is trivial)."""
    out = {}
    for d in f.graph.directions():
        img = f.image(d)
        out[d] = img[0] if img else None
    return out


def gates(f: GraphMap, depth_budget: Optional[int] = None) -> TurnStructure:
    """Gates: directions identified by some iterate of the derivative map."""
    Df = derivative(f)
    dirs = f.graph.directions()
    limit = depth_budget or len(dirs) ** 2
    key = {d: d for d in dirs}
    part = None
    for _ in range(limit + 1):
        new_part = _partition(dirs, key, f.graph)
        if new_part == part:
            break
        part = new_part
        key = {d: (Df[k] if k is not None and Df[k] is not None else k) for d, k in key.items()}
    else:
        raise RuntimeError("gate partition did not stabilise")
    # key[d] is now an iterate of the derivative that identifies equivalent directions
    for _ in range(len(dirs)):
        key = {d: (Df[k] if k is not None and Df[k] is not None else k) for d, k in key.items()}
    vertex_of = {d: f.graph.orig(d) for d in dirs}
    return TurnStructure({d: (vertex_of[d], key[d]) for d in dirs}, vertex_of)


def _partition(dirs, key, graph) -> frozenset:
    groups: dict = {}
    for d in dirs:
        groups.setdefault((graph.orig(d), key[d]), set()).add(d)
    return frozenset(frozenset(s) for s in groups.values())


def is_illegal(ts: TurnStructure, turn: tuple) -> bool:
    return ts.is_illegal(*turn)


def ilt_count(ts: TurnStructure, path: Sequence[int], cyclic: bool = False) -> int:
    return ts.ilt_count(tighten(path) if not cyclic else cyclic_tighten(path), cyclic)


def is_train_track(f: GraphMap, n_check: int = 5, ts: Optional[TurnStructure] = None) -> bool:
    """Every iterate ``f^m(e)``, ``m <= n_check``, is legal and arises without cancellation."""
    ts = ts or gates(f)
    for e in range(1, f.graph.n_edges + 1):
        p = (e,)
        for _ in range(n_check):
            raw = [x for y in p for x in f.image(y)]
            p = tighten(raw)
            if len(p) != len(raw) or ts.ilt_count(p):
                return False
    return True


# -- elementary moves ---------------------------------------------------------------------

class _Work:
    """Mutable copy of a graph map used while applying moves."""

    def __init__(self, f: GraphMap):
        g = f.graph
        self.ends = [list(x) for x in g.ends]
        self.alive_v = [True] * g.n_vertices
        self.alive_e = [True] * g.n_edges
        self.vimg = list(f.vertex_images)
        self.img = [list(x) for x in f.images]
        self.labels = list(f.labels)
        self.marking = [list(x) for x in g.marking]
        self.base = g.base
        self.shortcut = f.shortcut

    # geometry
    def orig(self, d):
        u, v = self.ends[abs(d) - 1]
        return u if d > 0 else v

    def term(self, d):
        return self.orig(-d)

    def image(self, d):
        img = self.img[abs(d) - 1]
        return img if d > 0 else [-x for x in reversed(img)]

    def set_image(self, d, path):
        self.img[abs(d) - 1] = list(path) if d > 0 else [-x for x in reversed(path)]

    def edges(self):
        return [e for e in range(1, len(self.ends) + 1) if self.alive_e[e - 1]]

    def directions_at(self, v):
        return [d for e in self.edges() for d in (e, -e) if self.orig(d) == v]

    def all_paths(self):
        yield from self.img
        yield from self.marking

    def substitute(self, fn):
        """Rewrite every stored path with ``fn`` (a function of a path)."""
        self.img = [list(fn(p)) for p in self.img]
        self.marking = [list(fn(p)) for p in self.marking]

    def tighten_all(self):
        self.substitute(free_reduce)

    def new_vertex(self, image):
        self.alive_v.append(True)
        self.vimg.append(image)
        return len(self.alive_v) - 1

    def new_edge(self, u, v, image, label="top"):
        self.ends.append([u, v])
        self.alive_e.append(True)
        self.img.append(list(image))
        self.labels.append(label)
        return len(self.ends)

    def merge_vertex(self, u, w):
        """Identify vertex u with w (u disappears)."""
        if u == w:
            return
        for e in self.ends:
            for i in (0, 1):
                if e[i] == u:
                    e[i] = w
        self.vimg = [w if x == u else x for x in self.vimg]
        self.alive_v[u] = False
        if self.base == u:
            self.base = w

    def delete_edge(self, e):
        self.alive_e[abs(e) - 1] = False
        self.img[abs(e) - 1] = []

    # moves
    def subdivide(self, e, k):
        """Split edge e (>0) at the preimage of the vertex after k letters of its image."""
        old = list(self.img[e - 1])
        if not 0 < k < len(old):
            raise InvalidSite(f"cannot subdivide edge {letter_to_char(e)} at {k}")
        u, v = self.ends[e - 1]
        w = self.new_vertex(self._term_of(old[:k]))
        e2 = self.new_edge(w, v, [], self.labels[e - 1])
        self.ends[e - 1] = [u, w]

        def sub(p):
            out = []
            for x in p:
                if x == e:
                    out.extend((e, e2))
                elif x == -e:
                    out.extend((-e2, -e))
                else:
                    out.append(x)
            return out

        self.substitute(sub)
        self.img[e - 1] = sub(old[:k])
        self.img[e2 - 1] = sub(old[k:])
        return e2

    def _term_of(self, path):
        return self.term(path[-1])

    def split_initial(self, d, c):
        """Make the first ``c`` letters of the image of direction d the image of a whole edge."""
        n = len(self.image(d))
        if c == n:
            return d, None
        e = abs(d)
        if d > 0:
            e2 = self.subdivide(e, c)
            return e, (e, e2)
        e2 = self.subdivide(e, n - c)
        return -e2, (e, e2)

    def fold(self, d1, d2):
        if d1 == d2 or self.orig(d1) != self.orig(d2):
            raise InvalidSite("fold needs two distinct directions at one vertex")
        i1, i2 = self.image(d1), self.image(d2)
        c = 0
        while c < min(len(i1), len(i2)) and i1[c] == i2[c]:
            c += 1
        if c == 0:
            raise InvalidSite("directions have different images")
        d1, split = self.split_initial(d1, c)
        if split and d2 == -split[0]:
            d2 = -split[1]
        # the split rewrote every image, so measure the common part again
        common = self.image(d1)
        if self.image(d2)[: len(common)] != common:
            raise InvalidSite("fold site changed under subdivision")
        d2, split2 = self.split_initial(d2, len(common))
        if split2 and d1 == -split2[0]:
            d1 = -split2[1]
        if abs(d1) == abs(d2):
            raise InvalidSite("fold would identify an edge with its reverse")
        t1, t2 = self.term(d1), self.term(d2)
        if t1 == t2:
            raise InvalidSite("fold would kill a loop")
        keep, gone = d1, d2
        self.merge_vertex(t2, t1)

        def sub(p):
            return [keep if x == gone else -keep if x == -gone else x for x in p]

        self.delete_edge(gone)
        self.substitute(sub)
        self.tighten_all()

    def collapse(self, forest):
        forest = {abs(e) for e in forest}
        uf = nx.utils.UnionFind()
        for e in forest:
            u, v = self.ends[e - 1]
            if uf[u] == uf[v]:
                raise InvalidSite("collapsed edges contain a cycle")
            uf.union(u, v)
        for e in forest:
            if any(abs(x) not in forest for x in self.img[e - 1]):
                raise InvalidSite("collapsed forest is not invariant")
        for e in sorted(forest):
            u, v = self.ends[e - 1]
            self.delete_edge(e)
            self.merge_vertex(v, u)
        self.substitute(lambda p: [x for x in p if abs(x) not in forest])
        self.tighten_all()

    def remove_valence_one(self, v):
        ds = self.directions_at(v)
        if len(ds) != 1:
            raise InvalidSite("vertex does not have valence one")
        e = abs(ds[0])
        other = self.term(ds[0])
        self.delete_edge(e)
        self.merge_vertex(v, other)
        self.substitute(lambda p: [x for x in p if abs(x) != e])
        self.tighten_all()

    def remove_valence_two(self, v):
        ds = self.directions_at(v)
        if len(ds) != 2 or abs(ds[0]) == abs(ds[1]):
            raise InvalidSite("vertex does not have valence two")
        e_in, e_out = -ds[0], ds[1]
        w = self.term(e_out)
        for u in range(len(self.alive_v)):
            if u != v and self.alive_v[u] and self.vimg[u] == v:
                self._push_vertex_image(u, e_out)
        if self.base == v:
            self.marking = [[-e_out] + m + [e_out] for m in self.marking]
            self.base = w
        img_new = self.image(e_in) + self.image(e_out)
        E = self.new_edge(self.orig(e_in), w, [], self.labels[abs(e_in) - 1])

        def sub(p):
            out = []
            i = 0
            while i < len(p):
                if i + 1 < len(p) and p[i] == e_in and p[i + 1] == e_out:
                    out.append(E)
                    i += 2
                elif i + 1 < len(p) and p[i] == -e_out and p[i + 1] == -e_in:
                    out.append(-E)
                    i += 2
                elif abs(p[i]) in (abs(e_in), abs(e_out)):
                    raise InvalidSite("path ends at the valence-two vertex")
                else:
                    out.append(p[i])
                    i += 1
            return out

        self.img[E - 1] = list(free_reduce(img_new))
        self.delete_edge(e_in)
        self.delete_edge(e_out)
        self.alive_v[v] = False
        self.tighten_all()
        self.substitute(sub)

    def _push_vertex_image(self, u, e_out):
        # homotope f near u so that u maps to the far end of e_out
        self.vimg[u] = self.term(e_out)
        for e in self.edges():
            img = self.img[e - 1]
            if self.ends[e - 1][0] == u:
                img = [-e_out] + img
            if self.ends[e - 1][1] == u:
                img = img + [e_out]
            self.img[e - 1] = img

    def freeze(self) -> GraphMap:
        vmap = {}
        for v, alive in enumerate(self.alive_v):
            if alive:
                vmap[v] = len(vmap)
        emap = {}
        for e in range(1, len(self.ends) + 1):
            if self.alive_e[e - 1]:
                emap[e] = len(emap) + 1

        def rp(p):
            return tuple(emap[x] if x > 0 else -emap[-x] for x in p)

        ends = tuple((vmap[self.ends[e - 1][0]], vmap[self.ends[e - 1][1]]) for e in emap)
        g = MarkedGraph(len(vmap), ends, tuple(rp(m) for m in self.marking), vmap[self.base])
        vimg = tuple(vmap[self.vimg[v]] for v in vmap)
        shortcut = None
        if self.shortcut is not None:
            shortcut = (emap[self.shortcut[0]], rp(self.shortcut[1]))
        return GraphMap(g, vimg, tuple(rp(self.img[e - 1]) for e in emap),
                        tuple(self.labels[e - 1] for e in emap), shortcut)


MOVES = ("subdivide", "fold", "collapse-invariant-forest", "remove-valence-one", "remove-valence-two")


def bh_move(f: GraphMap, move: str, site) -> GraphMap:
    """Apply one elementary move; ``site`` depends on the move.

    subdivide: (edge, k); fold: (direction, direction);
    collapse-invariant-forest: iterable of edges; remove-valence-one/two: vertex.
    """
    w = _Work(f)
    if move == "subdivide":
        e, k = site
        if e < 0:
            e, k = -e, len(f.image(-e)) - k
        w.subdivide(e, k)
    elif move == "fold":
        w.fold(*site)
    elif move == "collapse-invariant-forest":
        w.collapse(site)
    elif move == "remove-valence-one":
        w.remove_valence_one(site)
    elif move == "remove-valence-two":
        w.remove_valence_two(site)
    else:
        raise InvalidSite(f"unknown move {move!r}")
    return w.freeze()


def _cleanup(f: GraphMap, trace: list) -> GraphMap:
    while True:
        trivial = [e for e in range(1, f.graph.n_edges + 1) if not f.images[e - 1]]
        if trivial:
            try:
                f = bh_move(f, "collapse-invariant-forest", trivial)
                trace.append(("collapse-invariant-forest", tuple(trivial)))
                continue
            except InvalidSite:
                pass
        done = True
        for v in range(f.graph.n_vertices):
            val = len(f.graph.directions_at(v))
            move = {1: "remove-valence-one", 2: "remove-valence-two"}.get(val)
            if move is None:
                continue
            try:
                f = bh_move(f, move, v)
            except InvalidSite:
                continue
            trace.append((move, v))
            done = False
            break
        if done:
            return f


@dataclass(frozen=True)
class Unresolved:
    reason: str
    trace: tuple
    last: GraphMap


def _offending_turn(f: GraphMap, ts: TurnStructure, n_check: int):
    for m in range(1, n_check + 1):
        cands = []
        for e in range(1, f.graph.n_edges + 1):
            raw: list = [e]
            p = (e,)
            for _ in range(m):
                raw = [x for y in p for x in f.image(y)]
                p = tighten(raw)
            if len(p) != len(raw):
                # cancellation: the illegal turn sits in the previous iterate
                q = map_path(f, (e,), m - 1)
                pos = ts.illegal_positions(q)
                if pos:
                    cands.append((len(q), e, q, pos[0]))
                continue
            pos = ts.illegal_positions(p)
            if pos:
                cands.append((len(p), e, p, pos[0]))
        if cands:
            _, _, p, i = min(cands)
            return -p[i], p[i + 1]
    return None


def try_make_train_track(f: GraphMap, budget: int = 100, n_check: int = 5):
    """Fold illegal turns until the map is a train track, within ``budget`` moves."""
    trace: list = []
    f = _cleanup(f, trace)
    for _ in range(budget):
        ts = gates(f)
        if is_train_track(f, n_check, ts):
            return f
        turn = _offending_turn(f, ts, n_check)
        if turn is None:
            return Unresolved("no foldable illegal turn found", tuple(trace), f)
        d1, d2 = turn
        Df = derivative(f)
        while d1 != d2 and Df[d1] != Df[d2]:
            d1, d2 = Df[d1], Df[d2]
        if d1 == d2 or Df[d1] is None:
            return Unresolved("degenerate fold site", tuple(trace), f)
        try:
            f = bh_move(f, "fold", (d1, d2))
        except InvalidSite as exc:
            return Unresolved(str(exc), tuple(trace), f)
        trace.append(("fold", (d1, d2)))
        f = _cleanup(f, trace)
    ts = gates(f)
    if is_train_track(f, n_check, ts):
        return f
    return Unresolved("move budget exhausted", tuple(trace), f)


# -- Nielsen paths -------------------------------------------------------------------------

def find_inps(f: GraphMap, len_budget: int = 12, ts: Optional[TurnStructure] = None) -> list:
    """Paths between fixed vertices with at most one illegal turn that f fixes rel endpoints.

    Exhaustive over tightened paths up to ``len_budget`` edges; both
    orientations of each path are reported.
    """
    ts = ts or gates(f)
    fixed = set(f.fixed_vertices())
    g = f.graph
    out = []
    path: list = []
    img: list = []  # tightened image of ``path``, maintained incrementally

    def push(d):
        popped = []
        added = 0
        for y in f.image(d):
            if img and img[-1] == -y:
                popped.append(img.pop())
            else:
                img.append(y)
                added += 1
        return added, popped

    def pop(added, popped):
        del img[len(img) - added:]
        img.extend(reversed(popped))

    def extend(illegal):
        if len(img) == len(path) and img == path and g.term(path[-1]) in fixed:
            out.append(tuple(path))
        if len(path) == len_budget:
            return
        for d in g.directions_at(g.term(path[-1])):
            if d == -path[-1]:
                continue
            bad = illegal + ts.is_illegal(-path[-1], d)
            if bad <= 1:
                path.append(d)
                undo = push(d)
                extend(bad)
                pop(*undo)
                path.pop()

    for v in sorted(fixed):
        for d in g.directions_at(v):
            path.append(d)
            undo = push(d)
            extend(0)
            pop(*undo)
            path.pop()
    return sorted(out, key=lambda p: (len(p), [(abs(x), x < 0) for x in p]))


def add_shortcut(f: GraphMap, inp: Optional[Sequence[int]], ts: Optional[TurnStructure] = None) -> GraphMap:
    """Add a zero edge with the endpoints of the INP, mapped to itself."""
    if inp is None:
        return f
    inp = tuple(inp)
    g = f.graph
    ts = ts or gates(f)
    if (not inp or not g.is_path(inp) or tighten(inp) != inp or ts.ilt_count(inp) != 1
            or f.apply(inp) != inp or f.vertex_images[g.orig(inp[0])] != g.orig(inp[0])):
        raise InvalidINP("path is not an indivisible Nielsen path of this map")
    w = _Work(f)
    e = w.new_edge(g.orig(inp[0]), g.term(inp[-1]), [], "zero")
    w.img[e - 1] = [e]
    w.shortcut = (e, list(inp))
    return w.freeze()


# -- text format -------------------------------------------------------------------------

def format_graph_map(f: GraphMap) -> str:
    g = f.graph
    lines = [f"vertices {g.n_vertices}"]
    for e, (u, v) in enumerate(g.ends, start=1):
        lines.append(f"edge {letter_to_char(e)}: {u} {v} stratum={f.labels[e - 1]}")
    for e in range(1, g.n_edges + 1):
        lines.append(f"image {letter_to_char(e)}: {path_to_str(f.images[e - 1])}")
    for v, w in enumerate(f.vertex_images):
        lines.append(f"vertex {v}: {w}")
    lines.append(f"base {g.base}")
    for i, m in enumerate(g.marking, start=1):
        lines.append(f"mark {letter_to_char(i)}: {path_to_str(m)}")
    if f.shortcut is not None:
        e, eta = f.shortcut
        lines.append(f"shortcut {letter_to_char(e)}: {path_to_str(eta)}")
    return "\n".join(lines) + "\n"


_LINE = re.compile(r"^(vertices|edge|image|vertex|base|mark|shortcut)\b\s*(.*)$")


def parse_graph_map(text: str) -> GraphMap:
    n = None
    ends: dict = {}
    labels: dict = {}
    images: dict = {}
    vimg: dict = {}
    marks: dict = {}
    base = 0
    shortcut = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ParseError(f"unrecognised line: {raw!r}", lineno)
        kw, rest = m.groups()
        try:
            if kw == "vertices":
                n = int(rest)
            elif kw == "base":
                base = int(rest)
            else:
                name, _, body = rest.partition(":")
                body = body.strip()
                if kw == "vertex":
                    vimg[int(name)] = int(body)
                    continue
                e = char_to_letter(name.strip())
                if kw == "edge":
                    u, v, st = body.split()
                    if not st.startswith("stratum=") or st[8:] not in ("top", "zero"):
                        raise ValueError(st)
                    ends[e] = (int(u), int(v))
                    labels[e] = st[8:]
                elif kw == "image":
                    images[e] = path_from_str(body)
                elif kw == "mark":
                    marks[e] = path_from_str(body)
                else:
                    shortcut = (e, path_from_str(body))
        except (ValueError, KeyError) as exc:
            raise ParseError(f"malformed line: {raw!r}", lineno) from exc
    if n is None:
        raise ParseError("missing 'vertices' header", 1)
    m_edges = len(ends)
    if sorted(ends) != list(range(1, m_edges + 1)) or sorted(images) != list(range(1, m_edges + 1)):
        raise ParseError("edges and images must be given for a, b, c, ... in full", 1)
    rank = m_edges - n + 1
    if not marks:
        if n != 1:
            raise ParseError("non-rose graphs need 'mark' lines", 1)
        marks = {i: (i,) for i in range(1, m_edges + 1)}
    if not vimg:
        vimg = {v: 0 for v in range(n)} if n == 1 else None
        if vimg is None:
            raise ParseError("non-rose graphs need 'vertex' lines", 1)
    g = MarkedGraph(n, tuple(ends[e] for e in range(1, m_edges + 1)),
                    tuple(marks[i] for i in range(1, len(marks) + 1)), base)
    f = GraphMap(g, tuple(vimg[v] for v in range(n)), tuple(images[e] for e in range(1, m_edges + 1)),
                 tuple(labels[e] for e in range(1, m_edges + 1)), shortcut)
    _check(f, rank)
    return f


def _check(f: GraphMap, rank: int) -> None:
    g = f.graph
    for e in range(1, g.n_edges + 1):
        img = f.images[e - 1]
        if not g.is_path(img):
            raise ParseError(f"image of {letter_to_char(e)} is not a path", 1)
        if img and (g.orig(img[0]) != f.vertex_images[g.orig(e)] or g.term(img[-1]) != f.vertex_images[g.term(e)]):
            raise ParseError(f"image of {letter_to_char(e)} has the wrong endpoints", 1)
    if f.shortcut is None and g.betti != rank:
        raise ParseError("inconsistent rank", 1)


def validate(f: GraphMap) -> None:
    """Raise ValueError if the graph map is inconsistent."""
    g = f.graph
    if not g.is_connected():
        raise ValueError("graph is not connected")
    for e in range(1, g.n_edges + 1):
        img = f.images[e - 1]
        if tighten(img) != img or not g.is_path(img):
            raise ValueError(f"image of edge {e} is not a tightened path")
        if img and (g.orig(img[0]) != f.vertex_images[g.orig(e)] or g.term(img[-1]) != f.vertex_images[g.term(e)]):
            raise ValueError(f"image of edge {e} has the wrong endpoints")
    for loop in g.marking:
        if loop and (g.orig(loop[0]) != g.base or g.term(loop[-1]) != g.base or not g.is_path(loop)):
            raise ValueError("marking loop is not based at the base vertex")


def represents(f: GraphMap, alpha: Automorphism, words: Iterable[ReducedWord]) -> bool:
    """Check ``f(loop(w)) ~ loop(alpha(w))`` up to cyclic rotation for the given words."""
    from .automorphisms import apply

    g = f.graph
    for w in words:
        lhs = cyclic_tighten(f.apply(g.loop_of(w)))
        rhs = g.class_loop(apply(alpha, w))
        if _loop_key(lhs) != _loop_key(rhs):
            return False
    return True


def _loop_key(loop: tuple) -> tuple:
    if not loop:
        return ()
    n = len(loop)
    return min(loop[i:] + loop[:i] for i in range(n))
