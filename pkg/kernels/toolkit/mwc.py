"""
Multiway cut pipelines.

* ``half_integral_mwc_lp``: optimum of the vertex multiway-cut relaxation,
  half-integral, terminals undeletable.
* ``reduce_terminals``: LP support, region contraction (bypass when terminals
  are deletable) and the "two terminal neighbours" rule; leaves at most 2k
  terminals with disjoint neighbourhoods.
* ``kernelize_dtmwc``: deletable terminals, O(k^3) vertices via triples
  (v, v', v'') in the gammoid rooted at the terminals.
* ``kernelize_smwc``: at most s undeletable terminals, highly reachable
  candidates and one bypass per round.
* ``kernelize_multicut``: s pairs, heavy terminals and a multiway cover with
  ceil(sqrt(2s)) parts.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import linprog

from kernels.errors import ContractError, KernelsError
from kernels.toolkit.cutcover import SINK_MARK, multiway_cover
from kernels.toolkit.graphcut import (
    Digraph,
    add_sink_only_copies,
    bypass_vertex,
    make_heavy,
    reachable_after,
    twin_labels,
)
from kernels.toolkit.matroid import (
    MatroidContext,
    direct_sum,
    gammoid,
    layer_label,
    relabel,
    restrict,
    uniform_matroid,
)
from kernels.toolkit.repset import TupleFamily, representative_family

logger = logging.getLogger(__name__)

SUPER_MARK = "^"
SECOND_MARK = "''"
PENDANT_MARK = "*"
SEARCH_MAX_FREE = 22


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class MwcInstance(BaseModel):
    model_config = ConfigDict(frozen=True)

    G: Digraph
    terminals: tuple[str, ...]
    k: int = Field(..., ge=0)
    deletable_terminals: bool = False
    known_negative: bool = Field(default=False, description="Set on the dummy NO instance")

    @model_validator(mode="after")
    def _check_terminals(self) -> "MwcInstance":
        if self.G.directed:
            raise ValueError("multiway cut instances are undirected")
        if len(set(self.terminals)) != len(self.terminals):
            raise ValueError("duplicate terminal")
        for t in self.terminals:
            if not self.G.has_vertex(t):
                raise ValueError(f"terminal {t!r} is not a vertex")
        return self

    def terminal_neighborhood(self) -> list[str]:
        """N(T) in vertex order."""
        nt = self.G.neighborhood(self.terminals)
        return [v for v in self.G.vertices if v in nt]


class MulticutInstance(BaseModel):
    model_config = ConfigDict(frozen=True)

    G: Digraph
    pairs: tuple[tuple[str, str], ...]
    k: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _check_pairs(self) -> "MulticutInstance":
        for a, b in self.pairs:
            for v in (a, b):
                if not self.G.has_vertex(v):
                    raise ValueError(f"pair member {v!r} is not a vertex")
        return self


@dataclass(frozen=True)
class HalfIntegralLP:
    """Half-integral optimum of the relaxation; values only on non-terminals."""

    values: dict[str, Fraction]
    objective: Fraction
    method: str = "search"

    @property
    def support(self) -> frozenset[str]:
        return frozenset(v for v, x in self.values.items() if x > 0)


def dummy_negative(deletable: bool = False) -> MwcInstance:
    """Two adjacent terminals and no budget."""
    G = Digraph.undirected(["a", "b"], [("a", "b")])
    return MwcInstance(G=G, terminals=("a", "b"), k=0, deletable_terminals=deletable,
                       known_negative=True)


# ---------------------------------------------------------------------------
# Graph helpers
# ---------------------------------------------------------------------------

def attach_super_terminals(G: Digraph, T: Sequence[str]) -> tuple[Digraph, list[str]]:
    """Pendant t^ per terminal; with the t^ undeletable, cuts of the result are
    the deletable-terminal cuts of G."""
    supers = [f"{t}{SUPER_MARK}" for t in T]
    edges = G.edges() + [(t, f"{t}{SUPER_MARK}") for t in T]
    return Digraph.undirected(G.vertices + tuple(supers), edges), supers


def vertex_cover_as_dtmwc(G: Digraph, k: int) -> MwcInstance:
    """Pendant terminal v* on every vertex: multiway cuts are vertex covers."""
    pendants = [f"{v}{PENDANT_MARK}" for v in G.vertices]
    edges = G.edges() + [(v, f"{v}{PENDANT_MARK}") for v in G.vertices]
    H = Digraph.undirected(G.vertices + tuple(pendants), edges)
    return MwcInstance(G=H, terminals=tuple(pendants), k=k, deletable_terminals=True)


def _contract(G: Digraph, into: dict[str, str]) -> Digraph:
    """Merge each key vertex into its representative; loops and duplicates dropped."""
    vertices = [v for v in G.vertices if into.get(v, v) == v]
    edges = []
    for u, w in G.edges():
        a, b = into.get(u, u), into.get(w, w)
        if a != b:
            edges.append((a, b))
    return Digraph.undirected(vertices, edges)


def shortcut_through(G: Digraph, keep: Iterable[str]) -> Digraph:
    """Clique on the boundary of every component of G - keep, then delete those components."""
    kept = set(keep)
    nxg = nx.Graph()
    nxg.add_nodes_from(v for v in G.vertices if v not in kept)
    nxg.add_edges_from((u, w) for u, w in G.edges() if u not in kept and w not in kept)
    edges = [(u, w) for u, w in G.edges() if u in kept and w in kept]
    for comp in nx.connected_components(nxg):
        boundary = [v for v in G.neighborhood(comp) if v in kept]
        boundary.sort(key=G.index.__getitem__)
        edges += [(a, b) for i, a in enumerate(boundary) for b in boundary[i + 1:]]
    return Digraph.undirected([v for v in G.vertices if v in kept], edges)


# ---------------------------------------------------------------------------
# Half-integral relaxation
# ---------------------------------------------------------------------------

def _violated_path(G: Digraph, tset: set[str], y: dict[str, int]) -> Optional[list[str]]:
    """Internal vertices of a terminal-terminal path carrying < 2 halves, or None.

    An empty list means two terminals are adjacent.
    """
    for t in G.vertices:
        if t not in tset:
            continue
        dist = {t: 0}
        parent: dict[str, str] = {}
        heap = [(0, G.index[t], t)]
        while heap:
            d, _, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for w in G.neighbors(u):
                if w in tset:
                    if w == t:
                        continue
                    path = []
                    while u != t:
                        path.append(u)
                        u = parent[u]
                    return path
                nd = d + y[w]
                if nd < 2 and nd < dist.get(w, 2):
                    dist[w] = nd
                    parent[w] = u
                    heapq.heappush(heap, (nd, G.index[w], w))
    return None


def _search_at(G: Digraph, tset: set[str], free: Sequence[str], halves: int
               ) -> Optional[dict[str, int]]:
    """Feasible y with sum(y) <= halves, grown along violated paths."""
    y = {v: 0 for v in free}
    failed: set[tuple[int, ...]] = set()

    def dfs(remaining: int) -> bool:
        key = tuple(y[v] for v in free)
        if key in failed:
            return False
        path = _violated_path(G, tset, y)
        if path is None:
            return True
        if remaining > 0 and path:
            for v in path:
                if y[v] < 2:
                    y[v] += 1
                    if dfs(remaining - 1):
                        return True
                    y[v] -= 1
        failed.add(key)
        return False

    return dict(y) if dfs(halves) else None


def _lp_value(G: Digraph, T: Sequence[str], free: Sequence[str]) -> Optional[Fraction]:
    """Distance-potential formulation solved with HiGHS."""
    tset = set(T)
    m = len(free)
    if any(w in tset for t in T for w in G.neighbors(t)):
        return None
    if m == 0:
        return Fraction(0)
    col = {v: i for i, v in enumerate(free)}

    def d(ti: int, v: str) -> int:
        return m + ti * m + col[v]

    rows: list[dict[int, float]] = []
    rhs: list[float] = []
    for ti, t in enumerate(T):
        for w in G.neighbors(t):
            rows.append({d(ti, w): 1.0, col[w]: -1.0})
            rhs.append(0.0)
        for u, w in G.arcs:
            if u in tset or w in tset or u == w:
                continue
            rows.append({d(ti, w): 1.0, d(ti, u): -1.0, col[w]: -1.0})
            rhs.append(0.0)
        for other in T:
            if other == t:
                continue
            for u in G.neighbors(other):
                rows.append({d(ti, u): -1.0})
                rhs.append(-1.0)
    n_vars = m + len(T) * m
    A = np.zeros((len(rows), n_vars))
    for r, entries in enumerate(rows):
        for c, val in entries.items():
            A[r, c] += val
    c = np.concatenate([np.ones(m), np.zeros(n_vars - m)])
    bounds = [(0.0, 1.0)] * m + [(0.0, None)] * (n_vars - m)
    res = linprog(c, A_ub=A if rows else None, b_ub=np.array(rhs) if rows else None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return Fraction(round(2 * res.fun), 2)


def half_integral_mwc_lp(G: Digraph, T: Iterable[str], limit: Optional[Fraction] = None,
                         method: str = "auto") -> Optional[HalfIntegralLP]:
    """Half-integral optimum; None when infeasible (adjacent terminals) or above ``limit``."""
    T = list(dict.fromkeys(T))
    tset = set(T)
    free = [v for v in G.vertices if v not in tset]
    if method == "auto":
        method = "search" if len(free) <= SEARCH_MAX_FREE else "linprog"
    cap = 2 * len(free) if limit is None else min(2 * len(free), int(2 * limit))
    if method == "linprog":
        value = _lp_value(G, T, free)
        if value is None or value * 2 > cap:
            return None
        depths = [int(value * 2)]
    elif method == "search":
        depths = list(range(cap + 1))
    else:
        raise ContractError(f"unknown LP method {method!r}")
    for h in depths:
        y = _search_at(G, tset, free, h)
        if y is not None:
            values = {v: Fraction(y[v], 2) for v in free}
            lp = HalfIntegralLP(values=values, objective=Fraction(sum(y.values()), 2),
                                method=method)
            logger.debug("half-integral LP (%s): %s", method, lp.objective)
            return lp
    return None


# ---------------------------------------------------------------------------
# Terminal reduction
# ---------------------------------------------------------------------------

def reduce_terminals(inst: MwcInstance) -> MwcInstance:
    """At most 2k' terminals, pairwise disjoint neighbourhoods, k' <= k."""
    if inst.known_negative:
        return inst
    G, T, k = inst.G, list(inst.terminals), inst.k
    if inst.deletable_terminals:
        H, roots = attach_super_terminals(G, T)
    else:
        H, roots = G, T
    lp = half_integral_mwc_lp(H, roots, limit=Fraction(k))
    if lp is None:
        logger.info("reduce_terminals: LP value exceeds k=%d", k)
        return dummy_negative(inst.deletable_terminals)
    X = lp.support
    into: dict[str, str] = {}
    for t, root in zip(T, roots):
        if t in X:
            continue
        for v in reachable_after(H, [root], X):
            if v != root:
                into[v] = t
    if inst.deletable_terminals:
        # regions become undeletable; each terminal keeps its own vertex
        G1 = G
        for v in G.vertices:
            if into.get(v, v) != v:
                G1 = bypass_vertex(G1, v)
    else:
        G1 = _contract(G, into)
    terminals = list(T)

    def blob_count(x: str) -> int:
        hits = {w for w in G1.neighbors(x) if w in terminals and w not in X}
        return len(hits) + (1 if x in terminals else 0)

    removed: list[str] = []
    changed = True
    while changed:
        changed = False
        for x in G1.vertices:
            if x in X and blob_count(x) >= 2:
                G1 = G1.remove_vertices([x])
                if x in terminals:
                    terminals.remove(x)
                removed.append(x)
                k -= 1
                changed = True
                break
    if k < 0:
        return dummy_negative(inst.deletable_terminals)
    isolated = [t for t in terminals if not G1.neighbors(t)]
    G1 = G1.remove_vertices(isolated)
    terminals = [t for t in terminals if t not in isolated]
    out = MwcInstance(G=G1, terminals=tuple(terminals), k=k,
                      deletable_terminals=inst.deletable_terminals)
    _check_normal_form(out, X)
    logger.info("reduce_terminals: LP %s, |T| %d -> %d, k %d -> %d, removed %s",
                lp.objective, len(T), len(terminals), inst.k, k, removed)
    return out


def _check_normal_form(inst: MwcInstance, X: frozenset[str]) -> None:
    seen: dict[str, str] = {}
    for t in inst.terminals:
        if t in X:
            continue
        for w in inst.G.neighbors(t):
            if w not in X:
                raise KernelsError(f"terminal {t!r} has neighbour {w!r} outside the LP support")
            if w in seen and seen[w] != t:
                raise KernelsError(f"{w!r} neighbours terminals {seen[w]!r} and {t!r}")
            seen[w] = t


# ---------------------------------------------------------------------------
# Deletable terminals
# ---------------------------------------------------------------------------

def kernelize_dtmwc(inst: MwcInstance, ctx: MatroidContext) -> MwcInstance:
    """Vertices outside T and the representative triples are made undeletable by shortcutting."""
    if not inst.deletable_terminals:
        raise ContractError("kernelize_dtmwc needs deletable terminals")
    red = reduce_terminals(inst)
    if red.known_negative:
        return red
    T = list(red.terminals)
    tset = set(T)
    non = [v for v in red.G.vertices if v not in tset]
    representatives: frozenset[str] = frozenset()
    if len(T) >= 3 and non:
        H = add_sink_only_copies(red.G, non, SINK_MARK)
        H = add_sink_only_copies(H, non, SECOND_MARK)
        M = gammoid(H, T, ctx)
        labels = non + [f"{v}{SINK_MARK}" for v in non] + [f"{v}{SECOND_MARK}" for v in non]
        M = restrict(M, labels)
        entries = [(v, (v, f"{v}{SINK_MARK}", f"{v}{SECOND_MARK}")) for v in non]
        family = TupleFamily.build(M, entries)
        representatives = frozenset(representative_family(family).kept)
    reduced = shortcut_through(red.G, tset | representatives)
    logger.info("dtmwc kernel: %d -> %d vertices (|T|=%d, |V*|=%d, k=%d)",
                len(inst.G.vertices), len(reduced.vertices), len(T), len(representatives), red.k)
    return MwcInstance(G=reduced, terminals=tuple(T), k=red.k, deletable_terminals=True)


# ---------------------------------------------------------------------------
# Bounded terminals
# ---------------------------------------------------------------------------

def highly_reachable_candidates(inst: MwcInstance, s: int, ctx: MatroidContext) -> frozenset[str]:
    """Superset of the highly reachable vertices, of size at most k * |N(T)|^s."""
    T = list(inst.terminals)
    if len(T) > s:
        raise ContractError(f"{len(T)} terminals exceed s={s}")
    tset = set(T)
    non = [v for v in inst.G.vertices if v not in tset]
    nt = inst.terminal_neighborhood()
    if not non or not nt or inst.k == 0:
        return frozenset()
    H = add_sink_only_copies(inst.G, non, SINK_MARK)
    base = restrict(gammoid(H, nt, ctx), [f"{v}{SINK_MARK}" for v in non])
    layers = [uniform_matroid(len(non), min(inst.k, len(non)), ctx.field,
                              [layer_label(v, 0) for v in non])]
    for i in range(1, s + 1):
        layers.append(relabel(base, {f"{v}{SINK_MARK}": layer_label(v, i) for v in non}))
    M = direct_sum(layers)
    entries = [(v, tuple(layer_label(v, i) for i in range(s + 1))) for v in non]
    family = TupleFamily.build(M, entries, layered=True)
    return frozenset(representative_family(family).kept)


def kernelize_smwc(inst: MwcInstance, s: int, ctx: MatroidContext) -> MwcInstance:
    """Bypass one vertex outside T, N(T) and the candidates per round."""
    if inst.deletable_terminals:
        raise ContractError("kernelize_smwc expects undeletable terminals")
    if len(inst.terminals) > s:
        raise ContractError(f"{len(inst.terminals)} terminals exceed s={s}")
    red = reduce_terminals(inst)
    if red.known_negative:
        return red
    current = red
    order = inst.G.index
    rounds = 0
    while True:
        protected = set(current.terminals) | set(current.terminal_neighborhood())
        candidates = highly_reachable_candidates(current, s, ctx.fresh())
        loose = [v for v in current.G.vertices if v not in protected and v not in candidates]
        if not loose:
            break
        v = min(loose, key=lambda u: order.get(u, len(order)))
        current = current.model_copy(update={"G": bypass_vertex(current.G, v)})
        rounds += 1
    logger.info("smwc kernel: %d -> %d vertices in %d rounds (k=%d, s=%d)",
                len(inst.G.vertices), len(current.G.vertices), rounds, current.k, s)
    return current


# ---------------------------------------------------------------------------
# Multicut
# ---------------------------------------------------------------------------

def multicut_parts(pair_count: int) -> int:
    return max(1, math.ceil(math.sqrt(2 * pair_count)))


def kernelize_multicut(inst: MulticutInstance, ctx: MatroidContext) -> MulticutInstance:
    """Heavy terminals, a multiway cover over all twins, twins collapsed back."""
    terms = list(dict.fromkeys(v for p in inst.pairs for v in p))
    if not terms:
        return inst
    H = inst.G
    for t in terms:
        H = make_heavy(H, t, inst.k)
    twins = {t: twin_labels(t, inst.k) for t in terms}
    X = [x for t in terms for x in twins[t]]
    parts = multiway_cover(H, X, multicut_parts(len(inst.pairs)), ctx)
    into = {x: twins[t][0] for t in terms for x in twins[t][1:]}
    first = {twins[t][0]: t for t in terms}
    collapsed = _contract(parts.reduced_graph, into).relabeled(first)
    logger.info("multicut kernel: %d -> %d vertices (%d pairs, k=%d)",
                len(inst.G.vertices), len(collapsed.vertices), len(inst.pairs), inst.k)
    return MulticutInstance(G=collapsed, pairs=inst.pairs, k=inst.k)
