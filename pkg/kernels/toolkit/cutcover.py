"""
Cut-covering sets.

A vertex is essential for (S, T) when it lies in every minimum (A, B)-cut
for some A within S and B within T.  ``essential_cover_directed`` finds a
superset of the essential vertices with a three-layer representative
family; ``cut_covering_set`` bypasses one uncovered vertex at a time until
everything left is covered.  ``multiway_cover`` does the same for multiway
cuts of partitions of a terminal set.
"""
from __future__ import annotations

import logging
from typing import Callable, Iterable, Sequence

from pydantic import BaseModel, ConfigDict, Field

from kernels.errors import ContractError
from kernels.toolkit.graphcut import (
    Digraph,
    add_sink_only_copies,
    add_source_copies,
    bypass_vertex,
    max_disjoint_paths,
)
from kernels.toolkit.matroid import (
    MatroidContext,
    RepresentedMatroid,
    direct_sum,
    gammoid,
    layer_label,
    relabel,
    restrict,
    uniform_matroid,
)
from kernels.toolkit.repset import TupleFamily, representative_family

logger = logging.getLogger(__name__)

SINK_MARK = "'"
SOURCE_MARK = "-"
PREFIX = "^"
SUFFIX = "$"


class CoverResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    Z: frozenset[str]
    reduced_graph: Digraph = Field(..., description="Input with every vertex outside Z bypassed")
    failure_budget: float = 0.0
    iterations: int = 0


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

def _copy_layer(G: RepresentedMatroid, vertices: Sequence[str], layer: int) -> RepresentedMatroid:
    copies = restrict(G, [f"{v}{SINK_MARK}" for v in vertices])
    back = {f"{v}{SINK_MARK}": layer_label(v, layer) for v in vertices}
    return relabel(copies, back)


def _uniform_layer(vertices: Sequence[str], r: int, ctx: MatroidContext) -> RepresentedMatroid:
    labels = [layer_label(v, 0) for v in vertices]
    return uniform_matroid(len(vertices), min(r, len(vertices)), ctx.field, labels)


def _kept_vertices(layers: Sequence[RepresentedMatroid], vertices: Sequence[str]) -> frozenset[str]:
    M = direct_sum(layers)
    entries = [(v, tuple(layer_label(v, i) for i in range(len(layers)))) for v in vertices]
    family = TupleFamily.build(M, entries, layered=True)
    return frozenset(representative_family(family).kept)


# ---------------------------------------------------------------------------
# Essential vertices
# ---------------------------------------------------------------------------

def _with_terminal_ends(D: Digraph, S: Sequence[str], T: Sequence[str]
                        ) -> tuple[Digraph, list[str], list[str]]:
    """Prefix a private source before each s and a private sink after each t."""
    pre = [f"{PREFIX}{s}" for s in S]
    post = [f"{t}{SUFFIX}" for t in T]
    arcs = [(f"{PREFIX}{s}", s) for s in S] + [(t, f"{t}{SUFFIX}") for t in T]
    return D.as_directed().extended(pre + post, arcs, directed=True), pre, post


def essential_cover_directed(D: Digraph, S: Iterable[str], T: Iterable[str],
                             ctx: MatroidContext) -> frozenset[str]:
    """A superset of the essential vertices outside S and T, of size at most r*|S|*|T|."""
    S, T = list(dict.fromkeys(S)), list(dict.fromkeys(T))
    terminals = set(S) | set(T)
    candidates = [v for v in D.vertices if v not in terminals]
    if not candidates or not S or not T:
        return frozenset()
    G, pre, post = _with_terminal_ends(D, S, T)
    r = max_disjoint_paths(G, pre, post)
    if r == 0:
        return frozenset()
    forward = gammoid(add_sink_only_copies(G, candidates, SINK_MARK), pre, ctx)
    backward = gammoid(add_sink_only_copies(G.reversed(), candidates, SINK_MARK), post, ctx)
    layers = [
        _uniform_layer(candidates, r, ctx),
        _copy_layer(forward, candidates, 1),
        _copy_layer(backward, candidates, 2),
    ]
    kept = _kept_vertices(layers, candidates)
    logger.debug("essential cover: r=%d, %d of %d candidates", r, len(kept), len(candidates))
    return kept


# ---------------------------------------------------------------------------
# Bypass loop
# ---------------------------------------------------------------------------

def _cover_loop(D: Digraph, protected: set[str], ctx: MatroidContext,
                cover: Callable[[Digraph, MatroidContext], frozenset[str]]) -> CoverResult:
    order = D.index
    G = D
    iterations = 0
    while True:
        kept = cover(G, ctx.fresh())
        uncovered = [v for v in G.vertices if v not in kept and v not in protected]
        if not uncovered:
            break
        v = min(uncovered, key=lambda u: order.get(u, len(order)))
        G = bypass_vertex(G, v)
        iterations += 1
    logger.info("cut cover: %d -> %d vertices in %d iterations",
                len(D.vertices), len(G.vertices), iterations)
    return CoverResult(Z=frozenset(G.vertices), reduced_graph=G,
                       failure_budget=ctx.budget.total, iterations=iterations)


def cut_covering_set(D: Digraph, S: Iterable[str], T: Iterable[str],
                     ctx: MatroidContext) -> CoverResult:
    """Z containing a minimum (A, B)-vertex cut for every A within S, B within T."""
    S, T = list(dict.fromkeys(S)), list(dict.fromkeys(T))
    for v in S + T:
        D._require(v)
    return _cover_loop(D, set(S) | set(T), ctx,
                       lambda G, c: essential_cover_directed(G, S, T, c))


def terminal_cut_cover(G: Digraph, X: Iterable[str], ctx: MatroidContext) -> frozenset[str]:
    """Z such that for any S, T, R within X a minimum (S, T)-cut of G - R lies in Z."""
    xs = list(dict.fromkeys(X))
    if not xs:
        return frozenset()
    D = add_source_copies(G.as_directed(), xs, SOURCE_MARK)
    copies = [f"{x}{SOURCE_MARK}" for x in xs]
    result = cut_covering_set(D, copies, xs, ctx)
    return frozenset(v for v in result.Z if G.has_vertex(v))


def _multiway_essential(G: Digraph, X: Sequence[str], s: int,
                        ctx: MatroidContext) -> frozenset[str]:
    terminals = set(X)
    candidates = [v for v in G.vertices if v not in terminals]
    if not candidates or not X:
        return frozenset()
    D = add_source_copies(G.as_directed(), X, SOURCE_MARK)
    D = add_sink_only_copies(D, candidates, SINK_MARK)
    sources = [f"{x}{SOURCE_MARK}" for x in X]
    base = gammoid(D, sources, ctx)
    layers = [_uniform_layer(candidates, len(X), ctx)]
    layers += [_copy_layer(base, candidates, i) for i in range(1, s + 1)]
    return _kept_vertices(layers, candidates)


def multiway_cover(G: Digraph, X: Iterable[str], s: int, ctx: MatroidContext) -> CoverResult:
    """Z containing a minimum multiway cut of every partition of a subset of X
    into at most s parts."""
    if s < 1:
        raise ContractError(f"number of parts must be >= 1, got {s}")
    xs = list(dict.fromkeys(X))
    for x in xs:
        G._require(x)
    return _cover_loop(G, set(xs), ctx, lambda H, c: _multiway_essential(H, xs, s, c))


# ---------------------------------------------------------------------------
# Lower-bound construction
# ---------------------------------------------------------------------------

def tightness_instance(a: int, b: int) -> tuple[Digraph, list[str], list[str]]:
    """a x b connectors v_u_w with arcs from the twins of u and into the twins of w;
    every connector is essential."""
    if a < 1 or b < 1:
        raise ContractError("tightness_instance needs a, b >= 1")
    S = [f"u{i}#{j}" for i in range(a) for j in (1, 2)]
    T = [f"w{i}#{j}" for i in range(b) for j in (1, 2)]
    connectors = [f"v_{i}_{j}" for i in range(a) for j in range(b)]
    arcs = []
    for i in range(a):
        for j in range(b):
            c = f"v_{i}_{j}"
            arcs += [(f"u{i}#{t}", c) for t in (1, 2)]
            arcs += [(c, f"w{j}#{t}") for t in (1, 2)]
    return Digraph.from_arcs(S + connectors + T, arcs), S, T
