"""
Graphs, vertex min-cuts and closest cuts.

Directed and undirected graphs share one type: an undirected graph is a
``Digraph`` with ``directed=False`` whose arcs come in symmetric pairs.
Vertex cuts are computed on the split network (every vertex v becomes
in(v) -> out(v) with capacity 1, or "infinite" when v is undeletable) with
unit augmenting paths; cut values in this code base are small.

Cut conventions: an (S, T)-cut may contain vertices of S and T unless they
are marked undeletable.  The closest cut C(X) is the minimum (S, X)-cut whose
source-side region is smallest; it is read off the residual network of a
maximum flow.
"""
from __future__ import annotations

import logging
from collections import deque
from functools import cached_property
from typing import Callable, Iterable, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.errors import ContractError, UncuttableError, UnknownLabelError

logger = logging.getLogger(__name__)

VertexSet = frozenset[str]
Deletable = Union[None, Iterable[str], Callable[[str], bool]]


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class Digraph(BaseModel):
    """Vertex-labelled graph; vertex order doubles as the "lowest id" order."""

    model_config = ConfigDict(frozen=True)

    vertices: tuple[str, ...] = Field(..., description="Vertex labels in id order")
    arcs: tuple[tuple[str, str], ...] = Field(default=(), description="Ordered label pairs")
    directed: bool = Field(default=True, description="False: arcs are symmetric edge pairs")

    @model_validator(mode="after")
    def _check_endpoints(self) -> "Digraph":
        known = set(self.vertices)
        if len(known) != len(self.vertices):
            raise ValueError("vertex labels must be unique")
        for u, w in self.arcs:
            if u not in known or w not in known:
                raise ValueError(f"arc ({u}, {w}) has an unknown endpoint")
        if not self.directed:
            arcset = set(self.arcs)
            for u, w in arcset:
                if (w, u) not in arcset:
                    raise ValueError(f"undirected graph is missing the reverse of ({u}, {w})")
        return self

    @classmethod
    def from_arcs(cls, vertices: Iterable[str], arcs: Iterable[tuple[str, str]]) -> "Digraph":
        return cls(vertices=tuple(vertices), arcs=tuple(arcs), directed=True)

    @classmethod
    def undirected(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> "Digraph":
        arcs: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for u, w in edges:
            for a in ((u, w), (w, u)):
                if a not in seen:
                    seen.add(a)
                    arcs.append(a)
        return cls(vertices=tuple(vertices), arcs=tuple(arcs), directed=False)

    # -- derived adjacency -------------------------------------------------

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _adjacency(self) -> tuple[dict[str, tuple[str, ...]], dict[str, tuple[str, ...]]]:
        out: dict[str, dict[str, None]] = {v: {} for v in self.vertices}
        inc: dict[str, dict[str, None]] = {v: {} for v in self.vertices}
        for u, w in self.arcs:
            if u == w:
                continue
            out[u][w] = None
            inc[w][u] = None
        return ({v: tuple(n) for v, n in out.items()}, {v: tuple(n) for v, n in inc.items()})

    def out_neighbors(self, v: str) -> tuple[str, ...]:
        self._require(v)
        return self._adjacency[0][v]

    def in_neighbors(self, v: str) -> tuple[str, ...]:
        self._require(v)
        return self._adjacency[1][v]

    def neighbors(self, v: str) -> tuple[str, ...]:
        """Undirected neighbourhood (out and in neighbours merged)."""
        self._require(v)
        merged = dict.fromkeys(self._adjacency[0][v])
        merged.update(dict.fromkeys(self._adjacency[1][v]))
        return tuple(merged)

    def neighborhood(self, vertices: Iterable[str]) -> VertexSet:
        """Open neighbourhood N(X) = union of N(x) minus X."""
        xs = set(vertices)
        found: set[str] = set()
        for x in xs:
            found.update(self.neighbors(x))
        return frozenset(found - xs)

    def edges(self) -> list[tuple[str, str]]:
        """Each undirected edge once, endpoints in id order."""
        idx = self.index
        seen: dict[tuple[str, str], None] = {}
        for u, w in self.arcs:
            if u == w:
                continue
            key = (u, w) if idx[u] < idx[w] else (w, u)
            seen[key] = None
        return list(seen)

    def distinct_arcs(self) -> list[tuple[str, str]]:
        return list(dict.fromkeys(a for a in self.arcs if a[0] != a[1]))

    def has_vertex(self, v: str) -> bool:
        return v in self.index

    def _require(self, v: str) -> None:
        if v not in self.index:
            raise UnknownLabelError(f"unknown vertex {v!r}")

    # -- structural edits --------------------------------------------------

    def remove_vertices(self, drop: Iterable[str]) -> "Digraph":
        gone = set(drop)
        return Digraph(
            vertices=tuple(v for v in self.vertices if v not in gone),
            arcs=tuple(a for a in self.arcs if a[0] not in gone and a[1] not in gone),
            directed=self.directed,
        )

    def induced(self, keep: Iterable[str]) -> "Digraph":
        kept = set(keep)
        return self.remove_vertices(v for v in self.vertices if v not in kept)

    def extended(self, vertices: Iterable[str], arcs: Iterable[tuple[str, str]],
                 directed: Optional[bool] = None) -> "Digraph":
        return Digraph(
            vertices=self.vertices + tuple(vertices),
            arcs=self.arcs + tuple(arcs),
            directed=self.directed if directed is None else directed,
        )

    def as_directed(self) -> "Digraph":
        """Same arc set viewed as a digraph (undirected edges in both directions)."""
        return Digraph(vertices=self.vertices, arcs=self.arcs, directed=True)

    def reversed(self) -> "Digraph":
        return Digraph(vertices=self.vertices, arcs=tuple((w, u) for u, w in self.arcs),
                       directed=self.directed)

    def relabeled(self, mapping: dict[str, str]) -> "Digraph":
        return Digraph(
            vertices=tuple(mapping.get(v, v) for v in self.vertices),
            arcs=tuple((mapping.get(u, u), mapping.get(w, w)) for u, w in self.arcs),
            directed=self.directed,
        )


class CutQuery(BaseModel):
    """Sources, sinks and the deletable vertices (None: all of V)."""

    model_config = ConfigDict(frozen=True)

    sources: frozenset[str]
    sinks: frozenset[str]
    deletable: Optional[frozenset[str]] = None


# ---------------------------------------------------------------------------
# Copies, bypass, heaviness
# ---------------------------------------------------------------------------

def _check_subset(D: Digraph, X: Iterable[str]) -> list[str]:
    xs = list(dict.fromkeys(X))
    for x in xs:
        if not D.has_vertex(x):
            raise UnknownLabelError(f"unknown vertex {x!r}")
    return xs


def add_sink_only_copies(D: Digraph, X: Iterable[str], mark: str = "'") -> Digraph:
    """Add v+mark for v in X carrying only the in-arcs of v.

    Undirected input comes back directed, edges oriented into the copies.
    """
    xs = _check_subset(D, X)
    new_vertices = [f"{v}{mark}" for v in xs]
    new_arcs = [(u, f"{v}{mark}") for v in xs for u in D.in_neighbors(v)]
    return D.extended(new_vertices, new_arcs, directed=True)


def add_source_copies(D: Digraph, X: Iterable[str], mark: str = "-") -> Digraph:
    """Add v+mark for v in X carrying only the out-arcs of v."""
    xs = _check_subset(D, X)
    new_vertices = [f"{v}{mark}" for v in xs]
    new_arcs = [(f"{v}{mark}", w) for v in xs for w in D.out_neighbors(v)]
    return D.extended(new_vertices, new_arcs, directed=True)


def bypass_vertex(G: Digraph, v: str) -> Digraph:
    """Make ``v`` undeletable for cut purposes by shortcutting and removing it."""
    G._require(v)
    existing = set(G.arcs)
    added: list[tuple[str, str]] = []
    if G.directed:
        for u in G.in_neighbors(v):
            for w in G.out_neighbors(v):
                if u != w and (u, w) not in existing:
                    existing.add((u, w))
                    added.append((u, w))
    else:
        nbrs = [u for u in G.neighbors(v) if u != v]
        for i, u in enumerate(nbrs):
            for w in nbrs[i + 1:]:
                for a in ((u, w), (w, u)):
                    if a not in existing:
                        existing.add(a)
                        added.append(a)
    reduced = G.remove_vertices([v])
    logger.debug("bypassed %s (%d new arcs)", v, len(added))
    return Digraph(vertices=reduced.vertices, arcs=reduced.arcs + tuple(added),
                   directed=G.directed)


def twin_labels(v: str, k: int) -> list[str]:
    return [f"{v}#{i}" for i in range(1, k + 2)]


def make_heavy(G: Digraph, v: str, k: int) -> Digraph:
    """Replace ``v`` by k+1 mutually adjacent twins labelled v#1..v#(k+1)."""
    if k < 0:
        raise ContractError("k must be non-negative")
    G._require(v)
    twins = twin_labels(v, k)
    pos = G.index[v]
    vertices = G.vertices[:pos] + tuple(twins) + G.vertices[pos + 1:]
    arcs: list[tuple[str, str]] = [a for a in G.arcs if v not in a]
    for t in twins:
        arcs.extend((u, t) for u in G.in_neighbors(v))
        arcs.extend((t, w) for w in G.out_neighbors(v))
    for a in twins:
        for b in twins:
            if a != b:
                arcs.append((a, b))
    return Digraph(vertices=vertices, arcs=tuple(arcs), directed=G.directed)


# ---------------------------------------------------------------------------
# Flow on the split network
# ---------------------------------------------------------------------------

def _deletable_predicate(deletable: Deletable) -> Callable[[str], bool]:
    if deletable is None:
        return lambda v: True
    if callable(deletable):
        return deletable
    allowed = frozenset(deletable)
    return lambda v: v in allowed


class _SplitNetwork:
    """in(v) = 2i, out(v) = 2i+1, super source 2n, super sink 2n+1."""

    def __init__(self, D: Digraph, sources: Iterable[str], sinks: Iterable[str],
                 deletable: Deletable = None):
        self.D = D
        n = len(D.vertices)
        self.n = n
        self.inf = n + 1
        self.src, self.snk = 2 * n, 2 * n + 1
        self.cap: dict[int, dict[int, int]] = {i: {} for i in range(2 * n + 2)}
        can_delete = _deletable_predicate(deletable)
        idx = D.index
        for v, i in idx.items():
            self._edge(2 * i, 2 * i + 1, 1 if can_delete(v) else self.inf)
        for u, w in D.distinct_arcs():
            self._edge(2 * idx[u] + 1, 2 * idx[w], self.inf)
        for s in sources:
            self._edge(self.src, 2 * idx[s], self.inf)
        for t in sinks:
            self._edge(2 * idx[t] + 1, self.snk, self.inf)
        self.value = 0

    def _edge(self, a: int, b: int, c: int) -> None:
        self.cap[a][b] = self.cap[a].get(b, 0) + c
        self.cap[b].setdefault(a, 0)

    def _augmenting_path(self) -> Optional[list[int]]:
        parent = {self.src: self.src}
        queue = deque([self.src])
        while queue:
            a = queue.popleft()
            for b, c in self.cap[a].items():
                if c > 0 and b not in parent:
                    parent[b] = a
                    if b == self.snk:
                        path = [b]
                        while path[-1] != self.src:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    queue.append(b)
        return None

    def run(self) -> int:
        while self.value <= self.n:
            path = self._augmenting_path()
            if path is None:
                return self.value
            push = min(self.cap[a][b] for a, b in zip(path, path[1:]))
            for a, b in zip(path, path[1:]):
                self.cap[a][b] -= push
                self.cap[b][a] += push
            self.value += push
        raise UncuttableError("sources reach sinks through undeletable vertices only")

    def residual_reachable(self) -> set[int]:
        seen = {self.src}
        queue = deque([self.src])
        while queue:
            a = queue.popleft()
            for b, c in self.cap[a].items():
                if c > 0 and b not in seen:
                    seen.add(b)
                    queue.append(b)
        return seen

    def source_side_cut(self) -> VertexSet:
        seen = self.residual_reachable()
        return frozenset(
            v for v, i in self.D.index.items() if 2 * i in seen and 2 * i + 1 not in seen
        )


def _check_query(D: Digraph, *groups: Iterable[str]) -> None:
    for group in groups:
        for v in group:
            if not D.has_vertex(v):
                raise UnknownLabelError(f"unknown vertex {v!r}")


def min_vertex_cut(D: Digraph, q: CutQuery) -> VertexSet:
    """A minimum set of deletable vertices separating ``q.sources`` from ``q.sinks``.

    Raises UncuttableError when an S-T path uses undeletable vertices only.
    """
    _check_query(D, q.sources, q.sinks)
    net = _SplitNetwork(D, q.sources, q.sinks, q.deletable)
    net.run()
    return net.source_side_cut()


def max_disjoint_paths(D: Digraph, S: Iterable[str], T: Iterable[str],
                       deletable: Deletable = None) -> int:
    """Maximum number of vertex-disjoint S-T paths (equals the min cut size)."""
    S, T = list(S), list(T)
    _check_query(D, S, T)
    return _SplitNetwork(D, S, T, deletable).run()


def closest_cut(D: Digraph, S: Iterable[str], X: Iterable[str],
                deletable: Deletable = None) -> VertexSet:
    """C(X): the minimum (S, X)-cut with the inclusion-minimal source side."""
    S, X = list(S), list(X)
    _check_query(D, S, X)
    net = _SplitNetwork(D, S, X, deletable)
    net.run()
    return net.source_side_cut()


def is_closest(D: Digraph, S: Iterable[str], X: Iterable[str]) -> bool:
    xs = frozenset(X)
    return closest_cut(D, S, xs) == xs


def reachable_after(D: Digraph, S: Iterable[str], C: Iterable[str]) -> VertexSet:
    """Vertices reachable from S in D - C."""
    cut = set(C)
    start = [s for s in dict.fromkeys(S) if s not in cut]
    _check_query(D, start)
    seen = set(start)
    queue = deque(start)
    while queue:
        u = queue.popleft()
        for w in D.out_neighbors(u):
            if w not in seen and w not in cut:
                seen.add(w)
                queue.append(w)
    return frozenset(seen)
