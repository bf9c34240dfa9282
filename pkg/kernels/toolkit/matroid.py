"""
Represented matroids: uniform, random transversal, gammoid, dual, direct sum
and truncation.

A RepresentedMatroid is a matrix over GF(p) with one labelled column per
ground element; a set is independent iff its columns are linearly
independent.  Randomized constructions draw from a MatroidContext and record
an upper bound on their failure probability in its FailureBudget.

Gammoids are built through the duality between strict gammoids and
transversal matroids: for sources S the bipartite graph pairs every vertex u
with the "slot" of each v outside S such that u = v or u -> v is an arc; the
gammoid is the dual of the transversal matroid of that graph.  Which side of
an arc gives the slot is checked against a max-flow linkage test the first
time a gammoid is built.

Labels follow the copy notation used throughout: "v", "v'", "v''", "v(i)",
"x-".
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.errors import (
    ConfigurationError,
    ContractError,
    DegenerateRepresentationError,
    UnknownLabelError,
)
from kernels.toolkit.exactfield import (
    DEFAULT_PRIME,
    FieldConfig,
    FMatrix,
    column_rank_of_subset,
    rank as matrix_rank,
    standard_form,
)
from kernels.toolkit.graphcut import Digraph, max_disjoint_paths

logger = logging.getLogger(__name__)

MAX_RETRIES = 3


# ---------------------------------------------------------------------------
# Failure budget and randomness
# ---------------------------------------------------------------------------

def ratio_bound(numerator: int, prime: int) -> float:
    """min(1, numerator / prime) without float overflow."""
    if numerator >= prime:
        return 1.0
    return numerator / prime


@dataclass
class FailureBudget:
    """Summed upper bounds on the failure probability of random constructions."""

    entries: list[tuple[str, float]] = dc_field(default_factory=list)

    def add(self, what: str, bound: float) -> None:
        self.entries.append((what, min(1.0, bound)))

    @property
    def total(self) -> float:
        return min(1.0, sum(b for _, b in self.entries))

    def merge(self, other: "FailureBudget") -> None:
        self.entries.extend(other.entries)


@dataclass
class MatroidContext:
    """Field, random stream and budget threaded through every construction."""

    field: FieldConfig
    rng: np.random.Generator
    budget: FailureBudget = dc_field(default_factory=FailureBudget)

    @classmethod
    def from_seed(cls, seed: int = 0, prime: int = DEFAULT_PRIME) -> "MatroidContext":
        cfg = FieldConfig(prime=prime, seed=seed)
        return cls(field=cfg, rng=np.random.default_rng(seed))

    @property
    def prime(self) -> int:
        return self.field.prime

    def fresh(self) -> "MatroidContext":
        """Independent child stream sharing field and budget."""
        return MatroidContext(field=self.field, rng=self.rng.spawn(1)[0], budget=self.budget)

    def random_nonzero(self, count: int) -> list[int]:
        p = self.field.prime
        if count == 0:
            return []
        if p <= np.iinfo(np.int64).max:
            return [int(x) for x in self.rng.integers(1, p, size=count, dtype=np.int64)]
        width = (p.bit_length() + 64) // 8
        return [int.from_bytes(self.rng.bytes(width), "little") % (p - 1) + 1
                for _ in range(count)]


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class Block(BaseModel):
    """Column and row range of one direct-sum layer (half-open)."""

    model_config = ConfigDict(frozen=True)

    col_start: int
    col_end: int
    row_start: int
    row_end: int

    @property
    def rank(self) -> int:
        return self.row_end - self.row_start


class RepresentedMatroid(BaseModel):
    model_config = ConfigDict(frozen=True)

    matrix: FMatrix = Field(..., description="One column per ground element")
    ground: tuple[str, ...] = Field(..., description="Opaque element labels")
    blocks: Optional[tuple[Block, ...]] = Field(
        default=None, description="Direct-sum layers, present only when built by direct_sum"
    )

    @model_validator(mode="after")
    def _check_ground(self) -> "RepresentedMatroid":
        if self.matrix.cols != len(self.ground):
            raise ValueError(f"{len(self.ground)} labels for {self.matrix.cols} columns")
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("ground labels must be unique")
        return self

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: j for j, label in enumerate(self.ground)}

    @cached_property
    def rank(self) -> int:
        return matrix_rank(self.matrix)

    @property
    def prime(self) -> int:
        return self.matrix.prime

    def columns_of(self, subset: Iterable[str]) -> list[int]:
        cols = []
        for label in subset:
            j = self.index.get(label)
            if j is None:
                raise UnknownLabelError(f"{label!r} is not in the ground set")
            cols.append(j)
        return cols

    def block_of(self, label: str) -> int:
        if self.blocks is None:
            raise ContractError("matroid has no direct-sum blocks")
        j = self.columns_of([label])[0]
        for b, blk in enumerate(self.blocks):
            if blk.col_start <= j < blk.col_end:
                return b
        raise ContractError(f"column {j} lies in no block")


class BipartiteAdjacency(BaseModel):
    """Left elements (the ground set), right slots, and their adjacency."""

    model_config = ConfigDict(frozen=True)

    left: tuple[str, ...]
    right: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = Field(default_factory=frozenset,
                                              description="(left, right) pairs")


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

def subset_rank(M: RepresentedMatroid, subset: Iterable[str]) -> int:
    return column_rank_of_subset(M.matrix, M.columns_of(subset))


def is_independent(M: RepresentedMatroid, subset: Iterable[str]) -> bool:
    """True iff the columns of ``subset`` are linearly independent."""
    labels = list(subset)
    if len(set(labels)) != len(labels):
        return False
    cols = M.columns_of(labels)
    if len(cols) > M.matrix.rows:
        return False
    return column_rank_of_subset(M.matrix, cols) == len(cols)


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def uniform_matroid(n: int, r: int, field: Optional[FieldConfig] = None,
                    labels: Optional[Sequence[str]] = None) -> RepresentedMatroid:
    """Vandermonde representation of U(r, n) at the points 1..n."""
    if not 0 <= r <= n:
        raise ContractError(f"uniform matroid needs 0 <= r <= n, got r={r}, n={n}")
    p = (field or FieldConfig()).prime
    if p <= n:
        raise ConfigurationError(f"prime {p} must exceed n={n}")
    ground = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    if len(ground) != n:
        raise ContractError(f"{len(ground)} labels for n={n}")
    rows = [[pow(j + 1, i, p) for j in range(n)] for i in range(r)]
    return RepresentedMatroid(matrix=FMatrix.from_rows(rows, p, cols=n), ground=ground)


def transversal_random(bip: BipartiteAdjacency, ctx: MatroidContext) -> RepresentedMatroid:
    """|R| x |E| matrix with random nonzero entries on the adjacency pattern."""
    left_idx = {v: j for j, v in enumerate(bip.left)}
    right_idx = {v: i for i, v in enumerate(bip.right)}
    n_rows, n_cols = len(bip.right), len(bip.left)
    positions = sorted((right_idx[r], left_idx[l]) for l, r in bip.edges)
    values = ctx.random_nonzero(len(positions))
    flat = [0] * (n_rows * n_cols)
    for (i, j), x in zip(positions, values):
        flat[i * n_cols + j] = x
    e = n_cols
    ctx.budget.add(f"transversal |E|={e} |R|={n_rows}",
                   ratio_bound((1 << e) * max(1, min(e, n_rows)), ctx.prime))
    matrix = FMatrix(rows=n_rows, cols=n_cols, entries=tuple(flat), prime=ctx.prime)
    return RepresentedMatroid(matrix=matrix, ground=bip.left)


def _dual_from_standard(S: FMatrix, perm: Sequence[int], ground: tuple[str, ...],
                        p: int) -> RepresentedMatroid:
    r, n = S.rows, S.cols
    pivots, rest = list(perm[:r]), list(perm[r:])
    rows: list[list[int]] = []
    for t, col in enumerate(rest):
        row = [0] * n
        for i, piv in enumerate(pivots):
            row[piv] = (-S.at(i, col)) % p
        row[col] = 1
        rows.append(row)
    return RepresentedMatroid(matrix=FMatrix.from_rows(rows, p, cols=n), ground=ground)


def dual(M: RepresentedMatroid) -> RepresentedMatroid:
    """Same ground; bases are the complements of the bases of ``M``."""
    S, perm = standard_form(M.matrix)
    return _dual_from_standard(S, perm, M.ground, M.prime)


def _gammoid_bipartite(D: Digraph, sources: frozenset[str], convention: str) -> BipartiteAdjacency:
    right = tuple(v for v in D.vertices if v not in sources)
    slots = set(right)
    edges = {(v, v) for v in right}
    for u, w in D.distinct_arcs():
        if convention == "in" and w in slots:
            edges.add((u, w))
        elif convention == "out" and u in slots:
            edges.add((w, u))
    return BipartiteAdjacency(left=D.vertices, right=right, edges=frozenset(edges))


def _gammoid_with(D: Digraph, sources: frozenset[str], ctx: MatroidContext,
                  convention: str) -> RepresentedMatroid:
    bip = _gammoid_bipartite(D, sources, convention)
    for attempt in range(MAX_RETRIES + 1):
        T = transversal_random(bip, ctx)
        S, perm = standard_form(T.matrix)
        if S.rows == len(bip.right):
            return _dual_from_standard(S, perm, D.vertices, ctx.prime)
        logger.warning("gammoid transversal rank %d < %d, redrawing (attempt %d)",
                       S.rows, len(bip.right), attempt + 1)
    raise DegenerateRepresentationError(
        f"transversal matrix stayed rank-deficient after {MAX_RETRIES} retries"
    )


_CONVENTION: Optional[str] = None
_CALIBRATION_SEED = 0x9A3B0D
_CALIBRATION_TRIALS = 20


def _calibrate_convention() -> str:
    rng = np.random.default_rng(_CALIBRATION_SEED)
    graphs = []
    for _ in range(_CALIBRATION_TRIALS):
        n = int(rng.integers(3, 7))
        vertices = [str(i) for i in range(n)]
        arcs = [(u, w) for u in vertices for w in vertices
                if u != w and rng.random() < 0.35]
        sources = frozenset(str(i) for i in rng.choice(n, size=int(rng.integers(1, 3)),
                                                        replace=False))
        graphs.append((Digraph.from_arcs(vertices, arcs), sources))
    for convention in ("in", "out"):
        ctx = MatroidContext.from_seed(_CALIBRATION_SEED)
        if all(_agrees_with_flow(D, S, _gammoid_with(D, S, ctx, convention))
               for D, S in graphs):
            logger.debug("gammoid convention calibrated: %s", convention)
            return convention
    raise ConfigurationError("no gammoid orientation agrees with the linkage test")


def _agrees_with_flow(D: Digraph, S: frozenset[str], G: RepresentedMatroid) -> bool:
    for size in range(1, min(3, len(D.vertices)) + 1):
        for T in itertools.combinations(D.vertices, size):
            linked = max_disjoint_paths(D, S, T) == len(T)
            if linked != is_independent(G, T):
                return False
    return True


def gammoid_convention() -> str:
    global _CONVENTION
    if _CONVENTION is None:
        _CONVENTION = _calibrate_convention()
    return _CONVENTION


def gammoid(D: Digraph, S: Iterable[str], ctx: MatroidContext) -> RepresentedMatroid:
    """Strict gammoid on V(D): T is independent iff it is linked from S."""
    sources = frozenset(S)
    missing = [s for s in sources if not D.has_vertex(s)]
    if missing:
        raise ContractError(f"sources not in the graph: {sorted(missing)}")
    return _gammoid_with(D, sources, ctx, gammoid_convention())


def direct_sum(parts: Sequence[RepresentedMatroid]) -> RepresentedMatroid:
    """Block-diagonal sum; blocks record each part's row and column range."""
    if not parts:
        raise ContractError("direct sum of no matroids")
    p = parts[0].prime
    if any(m.prime != p for m in parts):
        raise ContractError("all parts must share one field")
    total_rows = sum(m.matrix.rows for m in parts)
    total_cols = sum(m.matrix.cols for m in parts)
    flat = [0] * (total_rows * total_cols)
    blocks: list[Block] = []
    r0 = c0 = 0
    for m in parts:
        for i in range(m.matrix.rows):
            base = (r0 + i) * total_cols + c0
            for j in range(m.matrix.cols):
                flat[base + j] = m.matrix.at(i, j)
        blocks.append(Block(col_start=c0, col_end=c0 + m.matrix.cols,
                            row_start=r0, row_end=r0 + m.matrix.rows))
        r0 += m.matrix.rows
        c0 += m.matrix.cols
    ground = tuple(label for m in parts for label in m.ground)
    matrix = FMatrix(rows=total_rows, cols=total_cols, entries=tuple(flat), prime=p)
    return RepresentedMatroid(matrix=matrix, ground=ground, blocks=tuple(blocks))


def truncate(M: RepresentedMatroid, r: int, ctx: MatroidContext) -> RepresentedMatroid:
    """Random r x rank projection: independent sets become those of size <= r."""
    S, _ = standard_form(M.matrix)
    if r > S.rows or r < 0:
        raise ContractError(f"cannot truncate rank {S.rows} matroid to {r}")
    R = FMatrix.from_rows([ctx.random_nonzero(S.rows) for _ in range(r)], M.prime, cols=S.rows)
    n = len(M.ground)
    ctx.budget.add(f"truncate n={n} r={r}", ratio_bound(math.comb(n, r) * max(r, 1), M.prime))
    if r == 0:
        return RepresentedMatroid(matrix=FMatrix.zeros(0, n, M.prime), ground=M.ground)
    return RepresentedMatroid(matrix=R.matmul(S), ground=M.ground)


def restrict(M: RepresentedMatroid, labels: Sequence[str]) -> RepresentedMatroid:
    """Keep only ``labels`` (in that order); rows are unchanged."""
    cols = M.columns_of(labels)
    return RepresentedMatroid(matrix=M.matrix.select_columns(cols), ground=tuple(labels))


def relabel(M: RepresentedMatroid,
            mapping: Union[dict[str, str], Callable[[str], str]]) -> RepresentedMatroid:
    if isinstance(mapping, dict):
        ground = tuple(mapping.get(g, g) for g in M.ground)
    else:
        ground = tuple(mapping(g) for g in M.ground)
    return RepresentedMatroid(matrix=M.matrix, ground=ground, blocks=M.blocks)


def layer_label(label: str, layer: int) -> str:
    return f"{label}({layer})"
