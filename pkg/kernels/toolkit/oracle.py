"""
Brute-force oracles: ground truth for every equivalence suite.

Nothing here touches the field, matroid or representative-family code:
linkage and cut values use networkx flows on a split graph built locally,
everything else is direct enumeration.  Hard caps refuse oversized inputs
with BudgetExceededError instead of truncating.

Witnesses are the lexicographically least (by vertex id order) among the
minimum-size candidates.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator, Optional, Sequence, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from kernels.errors import BudgetExceededError

if TYPE_CHECKING:
    from kernels.toolkit.graphcut import Digraph

logger = logging.getLogger(__name__)

_BIG = 10 ** 9


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class OracleBudget(BaseModel):
    """Hard caps; exceeding any of them is refused."""

    model_config = ConfigDict(frozen=True)

    max_vertices: int = Field(default=10, ge=1)
    max_k: int = Field(default=3, ge=0)
    max_candidates: int = Field(default=1 << 20, ge=1)

    @classmethod
    def from_settings(cls) -> "OracleBudget":
        from kernels.settings import get_settings

        cfg = get_settings()
        return cls(max_vertices=cfg.oracle_max_vertices, max_k=cfg.oracle_max_k,
                   max_candidates=cfg.oracle_max_candidates)

    def check(self, what: str, n: int, k: Optional[int] = None,
              candidates: Optional[int] = None) -> None:
        if n > self.max_vertices:
            raise BudgetExceededError(f"{what}: {n} elements exceeds cap {self.max_vertices}")
        if k is not None and k > self.max_k:
            raise BudgetExceededError(f"{what}: k={k} exceeds cap {self.max_k}")
        if candidates is not None and candidates > self.max_candidates:
            raise BudgetExceededError(
                f"{what}: {candidates} candidates exceeds cap {self.max_candidates}"
            )


DEFAULT_BUDGET = OracleBudget()


def _subsets_up_to(items: Sequence, k: int) -> Iterator[tuple]:
    for size in range(0, k + 1):
        yield from itertools.combinations(items, size)


def _count_up_to(n: int, k: int) -> int:
    return sum(math.comb(n, i) for i in range(0, min(n, k) + 1))


def _reach(adj: dict[str, set[str]], start: Iterable[str], blocked: set[str]) -> set[str]:
    seen = {v for v in start if v not in blocked}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen and w not in blocked:
                seen.add(w)
                queue.append(w)
    return seen


def _out_adjacency(D: "Digraph") -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {v: set() for v in D.vertices}
    for u, w in D.arcs:
        if u != w:
            adj[u].add(w)
    return adj


# ---------------------------------------------------------------------------
# Linkage and cut values (networkx flows)
# ---------------------------------------------------------------------------

def _split_flow(vertices: Iterable[str], arcs: Iterable[tuple[str, str]],
                sources: Iterable[str], sinks: Iterable[str],
                undeletable: Iterable[str] = (), source_cap: int = _BIG) -> int:
    H = nx.DiGraph()
    blocked = set(undeletable)
    for v in vertices:
        H.add_edge(("in", v), ("out", v), capacity=_BIG if v in blocked else 1)
    for u, w in arcs:
        if u != w:
            H.add_edge(("out", u), ("in", w), capacity=_BIG)
    H.add_node("SRC")
    H.add_node("SNK")
    for s in sources:
        H.add_edge("SRC", ("in", s), capacity=source_cap)
    for t in sinks:
        H.add_edge(("out", t), "SNK", capacity=_BIG)
    return int(nx.maximum_flow_value(H, "SRC", "SNK"))


def linkage_value(vertices: Iterable[str], arcs: Iterable[tuple[str, str]],
                  S: Iterable[str], T: Iterable[str]) -> int:
    return _split_flow(vertices, arcs, S, T)


def brute_linked(D: "Digraph", S: Iterable[str], T: Iterable[str],
                 budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff |T| vertex-disjoint S-T paths exist (zero-length paths allowed)."""
    targets = set(T)
    budget.check("brute_linked", len(D.vertices))
    if len(targets) > len(set(S)):
        return False
    return linkage_value(D.vertices, D.arcs, S, targets) == len(targets)


def linked_by_paths(D: "Digraph", S: Iterable[str], T: Iterable[str]) -> bool:
    """Exhaustive path packing; the second, flow-free linkage implementation."""
    sources = list(dict.fromkeys(S))
    targets = list(dict.fromkeys(T))
    adj = _out_adjacency(D)

    def simple_paths(src: str, dst: str, used: set[str]) -> Iterator[list[str]]:
        if src in used:
            return
        stack = [(src, [src])]
        while stack:
            node, path = stack.pop()
            if node == dst:
                yield path
                continue
            for w in sorted(adj[node]):
                if w not in used and w not in path:
                    stack.append((w, path + [w]))

    def assign(i: int, used: set[str]) -> bool:
        if i == len(targets):
            return True
        t = targets[i]
        for s in sources:
            for path in simple_paths(s, t, used):
                if assign(i + 1, used | set(path)):
                    return True
        return False

    return assign(0, set())


def brute_min_cut(D: "Digraph", A: Iterable[str], B: Iterable[str],
                  allowed: Optional[Iterable[str]] = None) -> Optional[int]:
    """Minimum (A, B)-vertex cut using only ``allowed`` vertices; None if impossible."""
    A, B = list(A), list(B)
    if not A or not B:
        return 0
    blocked = set(D.vertices) - set(allowed) if allowed is not None else set()
    value = _split_flow(D.vertices, D.arcs, A, B, undeletable=blocked)
    return None if value >= _BIG else value


def _separated_partition(adj: dict[str, set[str]], parts: Sequence[Sequence[str]],
                         cut: set[str]) -> bool:
    owner: dict[str, int] = {}
    for i, part in enumerate(parts):
        for v in part:
            if v not in cut:
                owner[v] = i
    for i, part in enumerate(parts):
        for v in _reach(adj, [x for x in part if x not in cut], cut):
            if owner.get(v, i) != i:
                return False
    return True


def brute_partition_cut(G: "Digraph", parts: Sequence[Sequence[str]],
                        allowed: Optional[Iterable[str]] = None,
                        limit: Optional[int] = None) -> Optional[int]:
    """Minimum multiway cut of a partition (may intersect the parts)."""
    adj = _out_adjacency(G)
    pool = [v for v in G.vertices if allowed is None or v in set(allowed)]
    top = len(pool) if limit is None else min(limit, len(pool))
    for C in _subsets_up_to(pool, top):
        if _separated_partition(adj, parts, set(C)):
            return len(C)
    return None


# ---------------------------------------------------------------------------
# Problem oracles
# ---------------------------------------------------------------------------

def brute_dpc(inst, budget: OracleBudget = DEFAULT_BUDGET) -> Optional[frozenset[str]]:
    """Least X within V - {s}, |X| <= k, leaving no tuple fully reachable from s."""
    D, s, k = inst.D, inst.s, inst.k
    pool = [v for v in D.vertices if v != s]
    budget.check("brute_dpc", len(D.vertices), k, _count_up_to(len(pool), k))
    adj = _out_adjacency(D)
    for X in _subsets_up_to(pool, k):
        reach = _reach(adj, [s], set(X))
        if not any(all(u in reach for u in p) for p in inst.pairs):
            return frozenset(X)
    return None


def _parts_of(terminals: Union[Iterable[str], Sequence[Sequence[str]]]) -> list[list[str]]:
    items = list(terminals)
    if items and not isinstance(items[0], str):
        return [list(part) for part in items]
    return [[t] for t in items]


def brute_multiway_cut(G: "Digraph", terminals, k: int, deletable: bool = False,
                       budget: OracleBudget = DEFAULT_BUDGET) -> Optional[frozenset[str]]:
    """Least multiway cut of size <= k; terminals deletable only when asked."""
    parts = _parts_of(terminals)
    term = {v for part in parts for v in part}
    pool = [v for v in G.vertices if deletable or v not in term]
    budget.check("brute_multiway_cut", len(G.vertices), k, _count_up_to(len(pool), k))
    adj = _out_adjacency(G)
    for C in _subsets_up_to(pool, k):
        if _separated_partition(adj, parts, set(C)):
            return frozenset(C)
    return None


def brute_multicut(G: "Digraph", pairs: Sequence[tuple[str, str]], k: int,
                   budget: OracleBudget = DEFAULT_BUDGET) -> Optional[frozenset[str]]:
    """Least X avoiding all pair members with no a_i - b_i path in G - X."""
    term = {v for p in pairs for v in p}
    pool = [v for v in G.vertices if v not in term]
    budget.check("brute_multicut", len(G.vertices), k, _count_up_to(len(pool), k))
    adj = _out_adjacency(G)
    for C in _subsets_up_to(pool, k):
        cut = set(C)
        if all(b not in _reach(adj, [a], cut) for a, b in pairs):
            return frozenset(C)
    return None


def _satisfiable_by_table(variables: Sequence[str], clauses) -> bool:
    names = list(variables)
    for bits in itertools.product((False, True), repeat=len(names)):
        value = dict(zip(names, bits))
        if all(any(value[l.var] == l.positive for l in clause) for clause in clauses):
            return True
    return False


def brute_a2sat(F, k: int, budget: OracleBudget = DEFAULT_BUDGET) -> Optional[frozenset[str]]:
    """Least variable deletion set of size <= k, checked by truth tables."""
    names = list(F.variables)
    budget.check("brute_a2sat", len(names), k, _count_up_to(len(names), k))
    for X in _subsets_up_to(names, k):
        gone = set(X)
        rest = [c for c in F.clauses if not any(l.var in gone for l in c)]
        used = sorted({l.var for c in rest for l in c}, key=names.index)
        if _satisfiable_by_table(used, rest):
            return frozenset(X)
    return None


def brute_clause_deletion(F, k: int,
                          budget: OracleBudget = DEFAULT_BUDGET) -> Optional[frozenset[int]]:
    """Least set of clause indices of size <= k whose removal leaves F satisfiable."""
    names = list(F.variables)
    m = len(F.clauses)
    budget.check("brute_clause_deletion", len(names), k, _count_up_to(m, k))
    for X in _subsets_up_to(range(m), k):
        gone = set(X)
        rest = [c for i, c in enumerate(F.clauses) if i not in gone]
        used = sorted({l.var for c in rest for l in c}, key=names.index)
        if _satisfiable_by_table(used, rest):
            return frozenset(X)
    return None


def brute_essential(D: "Digraph", S: Iterable[str], T: Iterable[str],
                    budget: OracleBudget = DEFAULT_BUDGET) -> frozenset[str]:
    """Vertices lying in every minimum (A, B)-cut for some A within S, B within T."""
    S, T = list(dict.fromkeys(S)), list(dict.fromkeys(T))
    budget.check("brute_essential", len(D.vertices))
    adj = _out_adjacency(D)
    essential: set[str] = set()
    for a in range(1, len(S) + 1):
        for A in itertools.combinations(S, a):
            for b in range(1, len(T) + 1):
                for B in itertools.combinations(T, b):
                    essential |= _common_to_min_cuts(D, adj, A, B)
    return frozenset(essential)


def _common_to_min_cuts(D: "Digraph", adj: dict[str, set[str]],
                        A: Sequence[str], B: Sequence[str]) -> set[str]:
    targets = set(B)
    common: Optional[set[str]] = None
    for size in range(0, len(D.vertices) + 1):
        for C in itertools.combinations(D.vertices, size):
            cut = set(C)
            if not (_reach(adj, A, cut) & targets):
                common = cut if common is None else common & cut
        if common is not None:
            return common
    return set()


def _terminal_neighbors(G: "Digraph", terminals: Iterable[str]) -> set[str]:
    term = set(terminals)
    adj = _out_adjacency(G)
    return {w for t in term for w in adj[t]} - term


def brute_highly_reachable(inst, budget: OracleBudget = DEFAULT_BUDGET) -> frozenset[str]:
    """Vertices v with a multiway cut X (|X| <= k, v in X) such that
    X + v' + N(t) is linked from N(T) in G' for every terminal t."""
    G, T, k = inst.G, list(inst.terminals), inst.k
    term = set(T)
    pool = [v for v in G.vertices if v not in term]
    budget.check("brute_highly_reachable", len(G.vertices), k, _count_up_to(len(pool), k))
    adj = _out_adjacency(G)
    N_T = _terminal_neighbors(G, T)
    copies = {v: f"{v}'" for v in pool}
    vertices = list(G.vertices) + list(copies.values())
    arcs = [a for a in G.arcs if a[0] != a[1]]
    arcs += [(u, copies[v]) for v in pool for u in G.vertices if v in adj[u]]
    parts = [[t] for t in T]
    found: set[str] = set()
    for X in _subsets_up_to(pool, k):
        if not X or not _separated_partition(adj, parts, set(X)):
            continue
        for v in X:
            if v in found:
                continue
            if all(_linked_set(vertices, arcs, N_T, set(X) | {copies[v]} | set(adj[t]))
                   for t in T):
                found.add(v)
    return frozenset(found)


def _linked_set(vertices, arcs, S, targets: set[str]) -> bool:
    if len(targets) > len(set(S)):
        return False
    return linkage_value(vertices, arcs, S, targets) == len(targets)


# ---------------------------------------------------------------------------
# Vertex cover, matching, half-integral relaxation
# ---------------------------------------------------------------------------

def brute_vertex_cover(G: "Digraph", max_vertices: int = 16) -> int:
    if len(G.vertices) > max_vertices:
        raise BudgetExceededError(f"brute_vertex_cover capped at {max_vertices} vertices")
    edges = [(u, w) for u, w in G.arcs if u != w]
    for size in range(len(G.vertices) + 1):
        for C in itertools.combinations(G.vertices, size):
            cs = set(C)
            if all(u in cs or w in cs for u, w in edges):
                return size
    return len(G.vertices)


def brute_max_matching(G: "Digraph", max_vertices: int = 16) -> int:
    if len(G.vertices) > max_vertices:
        raise BudgetExceededError(f"brute_max_matching capped at {max_vertices} vertices")
    edges = sorted({tuple(sorted((u, w))) for u, w in G.arcs if u != w})

    def best(i: int, used: frozenset[str]) -> int:
        if i == len(edges):
            return 0
        u, w = edges[i]
        skip = best(i + 1, used)
        if u in used or w in used:
            return skip
        return max(skip, 1 + best(i + 1, used | {u, w}))

    return best(0, frozenset())


def brute_half_integral_lp(G: "Digraph", terminals: Iterable[str],
                           max_free: int = 10) -> Optional[tuple[Fraction, dict[str, Fraction]]]:
    """Plain enumeration of {0, 1/2, 1} on non-terminals; None when infeasible."""
    term = list(dict.fromkeys(terminals))
    free = [v for v in G.vertices if v not in set(term)]
    if len(free) > max_free:
        raise BudgetExceededError(f"brute_half_integral_lp capped at {max_free} free vertices")
    adj = _out_adjacency(G)
    best: Optional[tuple[int, dict[str, int]]] = None
    for halves in itertools.product((0, 1, 2), repeat=len(free)):
        total = sum(halves)
        if best is not None and total >= best[0]:
            continue
        y = dict(zip(free, halves))
        if _half_feasible(adj, term, y):
            best = (total, y)
    if best is None:
        return None
    return Fraction(best[0], 2), {v: Fraction(h, 2) for v, h in best[1].items()}


def _half_feasible(adj: dict[str, set[str]], term: Sequence[str], y: dict[str, int]) -> bool:
    """Every terminal-terminal path carries >= 2 halves on its internal vertices."""
    tset = set(term)
    for t in term:
        dist = {t: 0}
        frontier = [(0, t)]
        while frontier:
            frontier.sort()
            d, u = frontier.pop(0)
            if d > dist.get(u, _BIG) or d >= 2:
                continue
            for w in adj[u]:
                if w in tset:
                    if w != t:
                        return False
                    continue
                nd = d + y[w]
                if nd < dist.get(w, _BIG) and nd < 2:
                    dist[w] = nd
                    frontier.append((nd, w))
    return True
