"""
Representative families of independent tuples.

Each s-tuple of ground elements is mapped to a vector: the s x s minors of
its column matrix (wedge mode), or, when the matroid is a direct sum and the
tuple takes one element per layer, the outer product of the per-layer
columns (tensor mode, the nonzero part of the wedge vector).  A greedy basis
of these vectors, in input order, is an r-representative subfamily for
r = rank - s.
"""
from __future__ import annotations

import itertools
import logging
import math
from typing import Iterable, Iterator, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.errors import BudgetExceededError, ContractError
from kernels.toolkit.exactfield import IncrementalBasis, determinant
from kernels.toolkit.matroid import RepresentedMatroid, is_independent

logger = logging.getLogger(__name__)

VERIFY_MAX_GROUND = 14
VERIFY_MAX_R = 6

LabeledTuple = tuple[str, tuple[str, ...]]


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class TupleFamily(BaseModel):
    model_config = ConfigDict(frozen=True)

    matroid: RepresentedMatroid
    tuples: tuple[LabeledTuple, ...] = Field(default=(), description="(label, elements) in input order")
    layered: bool = False

    @model_validator(mode="after")
    def _check_shape(self) -> "TupleFamily":
        sizes = {len(t) for _, t in self.tuples}
        if len(sizes) > 1:
            raise ValueError(f"tuples must share one size, got {sorted(sizes)}")
        labels = [label for label, _ in self.tuples]
        if len(set(labels)) != len(labels):
            raise ValueError("tuple labels must be unique")
        if self.layered:
            blocks = self.matroid.blocks
            if blocks is None:
                raise ValueError("layered family needs a direct-sum matroid")
            for label, elements in self.tuples:
                if len(elements) != len(blocks):
                    raise ValueError(f"tuple {label!r} must take one element per block")
                for b, e in enumerate(elements):
                    if self.matroid.block_of(e) != b:
                        raise ValueError(f"tuple {label!r} element {e!r} is not in block {b}")
        return self

    @property
    def s(self) -> int:
        return len(self.tuples[0][1]) if self.tuples else 0

    @classmethod
    def build(cls, matroid: RepresentedMatroid, tuples: Iterable[LabeledTuple],
              layered: bool = False) -> "TupleFamily":
        """Validate shape and drop dependent tuples (they extend nothing)."""
        candidate = cls(matroid=matroid, tuples=tuple((l, tuple(t)) for l, t in tuples),
                        layered=layered)
        kept = []
        for label, elements in candidate.tuples:
            if _tuple_independent(matroid, elements, layered):
                kept.append((label, elements))
            else:
                logger.warning("dropping dependent tuple %s %s", label, elements)
        return cls(matroid=matroid, tuples=tuple(kept), layered=layered)


class RepresentativeFamily(BaseModel):
    model_config = ConfigDict(frozen=True)

    kept: tuple[str, ...] = Field(..., description="Labels of the kept tuples, input order")
    r: int = Field(..., description="Representativity: rank - s")
    vector_dim: int = Field(..., ge=0)


def _tuple_independent(M: RepresentedMatroid, elements: Sequence[str], layered: bool) -> bool:
    if layered:
        return any(x for x in tensor_vector(M, elements))
    return is_independent(M, elements)


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------

def wedge_vector(M: RepresentedMatroid, elements: Sequence[str]) -> list[int]:
    """s x s minors over all row subsets, lexicographic row order."""
    cols = M.columns_of(elements)
    p = M.prime
    s = len(cols)
    colvecs = [M.matrix.column(j) for j in cols]
    out = []
    for rows in itertools.combinations(range(M.matrix.rows), s):
        square = [[colvecs[c][r] for c in range(s)] for r in rows]
        out.append(determinant(square, p) if s else 1)
    return out


def tensor_vector(M: RepresentedMatroid, elements: Sequence[str]) -> list[int]:
    """Outer product of per-block columns; first block is most significant."""
    blocks = M.blocks
    if blocks is None or len(elements) != len(blocks):
        raise ContractError("tensor_vector needs one element per direct-sum block")
    p = M.prime
    vec = [1]
    for b, (blk, e) in enumerate(zip(blocks, elements)):
        j = M.columns_of([e])[0]
        if not blk.col_start <= j < blk.col_end:
            raise ContractError(f"element {e!r} is not in block {b}")
        col = [M.matrix.at(i, j) for i in range(blk.row_start, blk.row_end)]
        vec = [a * c % p for a in vec for c in col]
    return vec


def vector_dimension(family: TupleFamily) -> int:
    M = family.matroid
    if family.layered and M.blocks is not None:
        dim = 1
        for blk in M.blocks:
            dim *= blk.rank
        return dim
    return math.comb(M.matrix.rows, family.s)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def representative_family(family: TupleFamily) -> RepresentativeFamily:
    """Greedy basis of tuple vectors in input order."""
    M = family.matroid
    dim = vector_dimension(family)
    basis = IncrementalBasis(M.prime)
    kept: list[str] = []
    for label, elements in family.tuples:
        if len(basis) == dim:
            break
        vec = tensor_vector(M, elements) if family.layered else wedge_vector(M, elements)
        if basis.add(vec):
            kept.append(label)
    logger.debug("representative family: kept %d of %d (dim %d)",
                 len(kept), len(family.tuples), dim)
    return RepresentativeFamily(kept=tuple(kept), r=max(0, M.rank - family.s), vector_dim=dim)


def _independent_subsets(M: RepresentedMatroid, r: int) -> Iterator[tuple[str, ...]]:
    ground = M.ground

    def grow(start: int, current: list[str]) -> Iterator[tuple[str, ...]]:
        yield tuple(current)
        if len(current) == r:
            return
        for i in range(start, len(ground)):
            current.append(ground[i])
            if is_independent(M, current):
                yield from grow(i + 1, current)
            current.pop()

    yield from grow(0, [])


def verify_representative(family: TupleFamily, kept: Iterable[str], r: int) -> bool:
    """Brute-force Definition check over every independent Y with |Y| <= r.

    Dependent Y extend nothing, so only independent Y are enumerated.
    """
    M = family.matroid
    if len(M.ground) > VERIFY_MAX_GROUND or r > VERIFY_MAX_R:
        raise BudgetExceededError(
            f"verify_representative is capped at ground <= {VERIFY_MAX_GROUND}, "
            f"r <= {VERIFY_MAX_R} (got {len(M.ground)}, {r})"
        )
    kept_set = set(kept)
    members = [(label, frozenset(t)) for label, t in family.tuples]
    kept_members = [m for m in members if m[0] in kept_set]

    def extends(Y: frozenset[str], T: frozenset[str]) -> bool:
        return T.isdisjoint(Y) and is_independent(M, list(Y) + sorted(T))

    for Y in _independent_subsets(M, r):
        ys = frozenset(Y)
        if any(extends(ys, t) for _, t in kept_members):
            continue
        witness: Optional[str] = next((l for l, t in members if extends(ys, t)), None)
        if witness is not None:
            logger.warning("not representative: Y=%s extended by %s only", sorted(ys), witness)
            return False
    return True
