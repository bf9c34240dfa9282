"""
Digraph pair cut: find X within V - {s}, |X| <= k, such that no pair (more
generally, no q-tuple) has all of its members reachable from s in D - X.

* ``solve_dpc``: exact branching on closest cuts, at most q^k leaves.
* ``representative_tuples_q`` / ``representative_pairs``: shrink the tuple
  set to at most (k+1)^q tuples with a layered gammoid.
* ``compress_dpc`` / ``decide_compressed``: export the gammoid restricted to
  the source copies and tuple members; decide from rank queries alone.
* ``kernelize_dpc``: representative pairs plus a cut-covering set, everything
  else bypassed.

The source s is made undeletable by replacing it with k+1 copies that carry
its out-arcs; a cut of size <= k can never contain all of them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.errors import ContractError
from kernels.toolkit.cutcover import cut_covering_set
from kernels.toolkit.exactfield import MERSENNE_LADDER, FieldConfig, check_field_for
from kernels.toolkit.graphcut import Digraph, bypass_vertex, closest_cut, reachable_after
from kernels.toolkit.matroid import (
    FailureBudget,
    MatroidContext,
    RepresentedMatroid,
    direct_sum,
    gammoid,
    layer_label,
    ratio_bound,
    relabel,
    restrict,
    subset_rank,
)
from kernels.toolkit.repset import TupleFamily, representative_family

logger = logging.getLogger(__name__)

PairTuple = tuple[str, ...]


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class PairCutInstance(BaseModel):
    model_config = ConfigDict(frozen=True)

    D: Digraph
    s: str = Field(..., description="Source vertex")
    pairs: tuple[PairTuple, ...] = Field(default=(), description="Pairs, or q-tuples")
    k: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _check_members(self) -> "PairCutInstance":
        if not self.D.has_vertex(self.s):
            raise ValueError(f"source {self.s!r} is not a vertex")
        for p in self.pairs:
            if not p:
                raise ValueError("empty tuple")
            for u in p:
                if not self.D.has_vertex(u):
                    raise ValueError(f"tuple member {u!r} is not a vertex")
        return self

    @property
    def q(self) -> int:
        return max((len(p) for p in self.pairs), default=2)


class CompressedDPC(BaseModel):
    """Gammoid over the source copies and tuple members, plus the kept tuples."""

    model_config = ConfigDict(frozen=True)

    gammoid_rep: RepresentedMatroid
    pairs: tuple[PairTuple, ...]
    k: int = Field(..., ge=0)
    sources: tuple[str, ...] = Field(..., description="Ground labels of the source copies")
    failure_bound: float = 0.0
    bits: int = Field(default=0, description="rank * columns * ceil(log2 prime)")

    @model_validator(mode="after")
    def _check_members(self) -> "CompressedDPC":
        ground = set(self.gammoid_rep.ground)
        for label in self.sources:
            if label not in ground:
                raise ValueError(f"source {label!r} missing from the ground set")
        for p in self.pairs:
            for u in p:
                if u not in ground:
                    raise ValueError(f"pair member {u!r} missing from the ground set")
        return self


@dataclass
class SolverStats:
    """Branching instrumentation: leaves of the search tree and the largest cut seen."""

    leaves: int = 0
    nodes: int = 0
    max_lambda: int = 0


def dummy_yes_instance() -> PairCutInstance:
    return PairCutInstance(D=Digraph.from_arcs(["s"], []), s="s", pairs=(), k=0)


def dummy_no_instance() -> PairCutInstance:
    return PairCutInstance(D=Digraph.from_arcs(["s"], []), s="s", pairs=(("s", "s"),), k=0)


# ---------------------------------------------------------------------------
# Source copies
# ---------------------------------------------------------------------------

def _copy_labels(D: Digraph, s: str, k: int) -> list[str]:
    stem = f"{s}_"
    while any(D.has_vertex(f"{stem}{i}") for i in range(1, k + 2)):
        stem += "_"
    return [f"{stem}{i}" for i in range(1, k + 2)]


def split_source(D: Digraph, s: str, k: int) -> tuple[Digraph, tuple[str, ...]]:
    """Replace ``s`` by k+1 copies carrying its out-arcs; in-arcs of s are dropped."""
    copies = _copy_labels(D, s, k)
    outs = D.out_neighbors(s)
    rest = D.remove_vertices([s])
    arcs = [(c, w) for c in copies for w in outs]
    split = Digraph(vertices=tuple(copies) + rest.vertices, arcs=tuple(arcs) + rest.arcs,
                    directed=True)
    return split, tuple(copies)


def _strip_source(pairs: Sequence[PairTuple], s: str) -> list[tuple[int, PairTuple]]:
    """Tuples with s removed (s is always reachable), keeping input positions."""
    return [(i, tuple(u for u in p if u != s)) for i, p in enumerate(pairs)]


# ---------------------------------------------------------------------------
# Exact solver
# ---------------------------------------------------------------------------

def solve_dpc(inst: PairCutInstance, stats: Optional[SolverStats] = None) -> Optional[frozenset[str]]:
    """Closest-cut branching; returns the accepting branch's cut or None."""
    stats = stats if stats is not None else SolverStats()
    split, S = split_source(inst.D, inst.s, inst.k)
    tuples = _strip_source(inst.pairs, inst.s)
    if any(not p for _, p in tuples):
        stats.leaves += 1
        return None
    k = inst.k

    def branch(T: frozenset[str]) -> Optional[frozenset[str]]:
        stats.nodes += 1
        C = closest_cut(split, S, T) if T else frozenset()
        lam = len(C)
        stats.max_lambda = max(stats.max_lambda, lam)
        if lam > k:
            stats.leaves += 1
            return None
        reach = reachable_after(split, S, C)
        hit = next((p for _, p in tuples if all(u in reach for u in p)), None)
        if hit is None:
            stats.leaves += 1
            return C
        if lam == k:
            stats.leaves += 1
            return None
        for u in dict.fromkeys(hit):
            found = branch(T | {u})
            if found is not None:
                return found
        return None

    result = branch(frozenset())
    logger.debug("solve_dpc: %d nodes, %d leaves, answer=%s",
                 stats.nodes, stats.leaves, result is not None)
    return result


# ---------------------------------------------------------------------------
# Representative tuples
# ---------------------------------------------------------------------------

def _uniform_q(pairs: Sequence[PairTuple]) -> int:
    sizes = {len(p) for p in pairs}
    if len(sizes) > 1:
        raise ContractError(f"all tuples must have one size q, got {sorted(sizes)}")
    return sizes.pop() if sizes else 2


def _representatives_from(G: RepresentedMatroid, pairs: Sequence[PairTuple], q: int,
                          source_copy: dict[str, str]) -> list[int]:
    """Indices of the tuples kept by the layered (q-fold) gammoid family."""
    layers = [relabel(G, lambda g, i=i: layer_label(g, i)) for i in range(1, q + 1)]
    M = direct_sum(layers)
    entries = []
    for idx, p in enumerate(pairs):
        members = [source_copy.get(u, u) for u in p]
        entries.append((str(idx), tuple(layer_label(u, i + 1) for i, u in enumerate(members))))
    family = TupleFamily.build(M, entries, layered=True)
    rep = representative_family(family)
    return [int(label) for label in rep.kept]


def representative_tuples_q(inst: PairCutInstance, ctx: MatroidContext) -> list[PairTuple]:
    """At most (k+1)^q tuples with the same reachable-tuple answers under
    every closest X of size <= k."""
    if not inst.pairs:
        return []
    q = _uniform_q(inst.pairs)
    split, S = split_source(inst.D, inst.s, inst.k)
    check_field_for(len(split.vertices), ctx.field)
    G = gammoid(split, S, ctx)
    kept = _representatives_from(G, inst.pairs, q, {inst.s: S[0]})
    logger.info("representative tuples: %d of %d (q=%d, k=%d)",
                len(kept), len(inst.pairs), q, inst.k)
    return [inst.pairs[i] for i in kept]


def representative_pairs(inst: PairCutInstance, ctx: MatroidContext) -> list[PairTuple]:
    if inst.pairs and _uniform_q(inst.pairs) != 2:
        raise ContractError("representative_pairs needs pairs; use representative_tuples_q")
    return representative_tuples_q(inst, ctx)


# ---------------------------------------------------------------------------
# Compression
# ---------------------------------------------------------------------------

def _gammoid_bound(n: int, prime: int) -> float:
    return ratio_bound((1 << n) * max(n, 1), prime)


def choose_prime(n: int, epsilon: float, floor: int) -> int:
    """Smallest ladder prime >= floor whose gammoid failure bound is <= epsilon."""
    candidates = sorted({floor, *[p for p in MERSENNE_LADDER if p >= floor]})
    for p in candidates:
        if _gammoid_bound(n, p) <= epsilon:
            return p
    logger.warning("no ladder prime reaches epsilon=%g for n=%d; using the largest", epsilon, n)
    return candidates[-1]


def compress_dpc(inst: PairCutInstance, epsilon: float, ctx: MatroidContext) -> CompressedDPC:
    """Representative pairs plus the gammoid restricted to copies and members."""
    if not 0.0 < epsilon < 1.0:
        raise ContractError(f"epsilon must lie in (0, 1), got {epsilon}")
    split, S = split_source(inst.D, inst.s, inst.k)
    prime = choose_prime(len(split.vertices), epsilon, ctx.prime)
    work = MatroidContext(field=FieldConfig(prime=prime, seed=ctx.field.seed), rng=ctx.rng,
                          budget=FailureBudget())
    check_field_for(len(split.vertices), work.field)
    source_copy = {inst.s: S[0]}
    if inst.pairs:
        q = _uniform_q(inst.pairs)
        G = gammoid(split, S, work)
        kept = [inst.pairs[i] for i in _representatives_from(G, inst.pairs, q, source_copy)]
    else:
        G = gammoid(split, S, work)
        kept = []
    mapped = tuple(tuple(source_copy.get(u, u) for u in p) for p in kept)
    members = {u for p in mapped for u in p} - set(S)
    ground = list(S) + [v for v in split.vertices if v in members]
    export = restrict(G, ground)
    ctx.budget.merge(work.budget)
    bits = export.matrix.rows * len(ground) * work.field.bits
    logger.info("compressed: %d pairs, %d columns, prime 2^%d-ish, %d bits",
                len(mapped), len(ground), work.field.bits, bits)
    return CompressedDPC(gammoid_rep=export, pairs=mapped, k=inst.k, sources=tuple(S),
                         failure_bound=work.budget.total, bits=bits)


def decide_compressed(c: CompressedDPC, stats: Optional[SolverStats] = None) -> bool:
    """Closest-cut branching driven only by rank queries on the exported gammoid."""
    stats = stats if stats is not None else SolverStats()
    M = c.gammoid_rep
    sources = set(c.sources)
    k = c.k

    def basis_of(T: Sequence[str]) -> list[str]:
        B: list[str] = []
        for v in T:
            if subset_rank(M, B + [v]) == len(B) + 1:
                B.append(v)
        return B

    def branch(T: tuple[str, ...]) -> bool:
        stats.nodes += 1
        lam = subset_rank(M, T)
        stats.max_lambda = max(stats.max_lambda, lam)
        if lam > k:
            stats.leaves += 1
            return False
        B = basis_of(T)
        members = set(T)

        def reachable(v: str) -> bool:
            if v in sources:
                return True
            if v in members:
                return False
            return subset_rank(M, B + [v]) == len(B) + 1

        hit = next((p for p in c.pairs if all(reachable(u) for u in p)), None)
        if hit is None:
            stats.leaves += 1
            return True
        if lam == k:
            stats.leaves += 1
            return False
        for u in dict.fromkeys(hit):
            if u in sources:
                continue
            if branch(T + (u,)):
                return True
        return False

    return branch(())


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

def kernelize_dpc(inst: PairCutInstance, ctx: MatroidContext) -> PairCutInstance:
    """Representative pairs, a cut-covering set for (source copies, members),
    and every other vertex bypassed."""
    kept = representative_tuples_q(inst, ctx) if inst.pairs else []
    split, S = split_source(inst.D, inst.s, inst.k)
    members = [v for v in split.vertices if any(v in p for p in kept)]
    cover = cut_covering_set(split, S, members, ctx)
    keep = (set(cover.Z) - set(S)) | {inst.s} | {u for p in kept for u in p}
    reduced = inst.D
    for v in inst.D.vertices:
        if v not in keep:
            reduced = bypass_vertex(reduced, v)
    logger.info("dpc kernel: %d -> %d vertices, %d -> %d pairs",
                len(inst.D.vertices), len(reduced.vertices), len(inst.pairs), len(kept))
    return PairCutInstance(D=reduced, s=inst.s, pairs=tuple(kept), k=inst.k)
