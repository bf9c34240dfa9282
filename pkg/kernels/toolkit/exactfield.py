"""
Exact prime-field arithmetic and dense linear algebra.

Everything a represented matroid answers (independence, rank, minors,
dualization) reduces to Gaussian elimination over GF(p).  Entries are plain
Python ints reduced modulo ``prime`` so primes beyond 64 bits work without
special casing.

Elimination is deterministic: rows are scanned top-down and the first nonzero
entry in a column becomes the pivot.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kernels.errors import BoundsError, ConfigurationError, ContractError

logger = logging.getLogger(__name__)

DEFAULT_PRIME = (1 << 61) - 1
MIN_PRIME = 1 << 40

# Mersenne primes tried in order when a smaller failure probability is needed.
MERSENNE_LADDER = (
    (1 << 61) - 1,
    (1 << 89) - 1,
    (1 << 107) - 1,
    (1 << 127) - 1,
    (1 << 521) - 1,
)

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, overwhelming confidence above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class FieldConfig(BaseModel):
    """The prime field plus the seed that drives every random draw."""

    model_config = ConfigDict(frozen=True)

    prime: int = Field(default=DEFAULT_PRIME, description="Field characteristic")
    seed: int = Field(default=0, ge=0, lt=1 << 64, description="64-bit unsigned seed")

    @field_validator("prime")
    @classmethod
    def _prime_is_usable(cls, value: int) -> int:
        if value < MIN_PRIME:
            raise ValueError(f"prime must be at least 2^40, got {value}")
        if not is_probable_prime(value):
            raise ValueError(f"{value} is not prime")
        return value

    @property
    def bits(self) -> int:
        """Word size used for compressed-size accounting."""
        return math.ceil(math.log2(self.prime))


def check_field_for(n: int, field: FieldConfig) -> None:
    """Pipeline-entry check: the prime must exceed max(n^3, 2^40)."""
    threshold = max(n ** 3, MIN_PRIME)
    if field.prime <= threshold:
        raise ConfigurationError(
            f"prime {field.prime} too small for ground size {n} (needs > {threshold})"
        )


class FMatrix(BaseModel):
    """Dense row-major matrix over GF(prime)."""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(..., ge=0)
    cols: int = Field(..., ge=0)
    entries: tuple[int, ...] = Field(..., description="Row-major, reduced modulo prime")
    prime: int = Field(default=DEFAULT_PRIME)

    @model_validator(mode="after")
    def _check_shape(self) -> "FMatrix":
        if len(self.entries) != self.rows * self.cols:
            raise ContractError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )
        if any(e < 0 or e >= self.prime for e in self.entries):
            raise ContractError("entries must be reduced modulo the prime")
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], prime: int = DEFAULT_PRIME,
                  cols: Optional[int] = None) -> "FMatrix":
        """Build from nested rows, reducing every entry."""
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else (cols or 0)
        if cols is not None and rows and n_cols != cols:
            raise ContractError(f"expected {cols} columns, got {n_cols}")
        flat: list[int] = []
        for row in rows:
            if len(row) != n_cols:
                raise ContractError("ragged rows")
            flat.extend(int(x) % prime for x in row)
        return cls(rows=n_rows, cols=n_cols, entries=tuple(flat), prime=prime)

    @classmethod
    def zeros(cls, rows: int, cols: int, prime: int = DEFAULT_PRIME) -> "FMatrix":
        return cls(rows=rows, cols=cols, entries=(0,) * (rows * cols), prime=prime)

    @classmethod
    def identity(cls, n: int, prime: int = DEFAULT_PRIME) -> "FMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)],
                             prime, cols=n)

    def row_lists(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def at(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def column(self, j: int) -> list[int]:
        if not 0 <= j < self.cols:
            raise BoundsError(f"column {j} outside 0..{self.cols - 1}")
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def select_columns(self, cols: Sequence[int]) -> "FMatrix":
        for j in cols:
            if not 0 <= j < self.cols:
                raise BoundsError(f"column {j} outside 0..{self.cols - 1}")
        rows = [[self.entries[i * self.cols + j] for j in cols] for i in range(self.rows)]
        return FMatrix(rows=self.rows, cols=len(cols),
                       entries=tuple(x for r in rows for x in r), prime=self.prime)

    def matmul(self, other: "FMatrix") -> "FMatrix":
        if self.cols != other.rows:
            raise ContractError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        p = self.prime
        b_cols = [other.column(j) for j in range(other.cols)]
        out = [
            [sum(a * b for a, b in zip(row, col)) % p for col in b_cols]
            for row in self.row_lists()
        ]
        return FMatrix.from_rows(out, p, cols=other.cols)


# ---------------------------------------------------------------------------
# Scalar helpers
# ---------------------------------------------------------------------------

def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return pow(a, -1, p)


def reduce_rows(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form in place of a copy.

    Returns the nonzero rows (each with a leading 1 at its pivot) and the
    pivot column of every returned row, in increasing order.
    """
    work = [[x % p for x in row] for row in rows]
    n_cols = len(work[0]) if work else 0
    pivots: list[int] = []
    top = 0
    for col in range(n_cols):
        if top == len(work):
            break
        pick = next((i for i in range(top, len(work)) if work[i][col]), None)
        if pick is None:
            continue
        work[top], work[pick] = work[pick], work[top]
        lead = inv(work[top][col], p)
        pivot_row = [x * lead % p for x in work[top]]
        work[top] = pivot_row
        for i in range(len(work)):
            if i != top and work[i][col]:
                f = work[i][col]
                work[i] = [(x - f * y) % p for x, y in zip(work[i], pivot_row)]
        pivots.append(col)
        top += 1
    return work[:top], pivots


def _rank_of_rows(rows: list[list[int]], p: int) -> int:
    """Row-echelon rank without back-substitution."""
    work = [r[:] for r in rows if any(r)]
    if not work:
        return 0
    n_cols = len(work[0])
    rank = 0
    for col in range(n_cols):
        pick = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if pick is None:
            continue
        work[rank], work[pick] = work[pick], work[rank]
        lead = inv(work[rank][col], p)
        prow = work[rank]
        for i in range(rank + 1, len(work)):
            if work[i][col]:
                f = work[i][col] * lead % p
                work[i] = [(x - f * y) % p for x, y in zip(work[i], prow)]
        rank += 1
        if rank == len(work):
            break
    return rank


def determinant(square: list[list[int]], p: int) -> int:
    n = len(square)
    work = [[x % p for x in row] for row in square]
    det = 1
    for col in range(n):
        pick = next((i for i in range(col, n) if work[i][col]), None)
        if pick is None:
            return 0
        if pick != col:
            work[col], work[pick] = work[pick], work[col]
            det = -det
        det = det * work[col][col] % p
        lead = inv(work[col][col], p)
        for i in range(col + 1, n):
            if work[i][col]:
                f = work[i][col] * lead % p
                work[i] = [(x - f * y) % p for x, y in zip(work[i], work[col])]
    return det % p


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def rank(M: FMatrix) -> int:
    """Linear rank of ``M`` over its field."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return _rank_of_rows(M.row_lists(), M.prime)


def column_rank_of_subset(M: FMatrix, cols: Iterable[int]) -> int:
    """Rank of the submatrix formed by ``cols``; raises BoundsError on bad indices."""
    chosen = sorted(set(cols))
    if not chosen:
        return 0
    return rank(M.select_columns(chosen))


def minor(M: FMatrix, rowset: Iterable[int], colset: Iterable[int]) -> int:
    """Determinant of the square submatrix on ``rowset`` x ``colset``."""
    rs, cs = sorted(rowset), sorted(colset)
    if len(rs) != len(cs):
        raise ContractError(f"minor needs a square selection, got {len(rs)}x{len(cs)}")
    if not rs:
        return 1
    for i in rs:
        if not 0 <= i < M.rows:
            raise BoundsError(f"row {i} outside 0..{M.rows - 1}")
    for j in cs:
        if not 0 <= j < M.cols:
            raise BoundsError(f"column {j} outside 0..{M.cols - 1}")
    sub = [[M.at(i, j) for j in cs] for i in rs]
    return determinant(sub, M.prime)


def standard_form(M: FMatrix) -> tuple[FMatrix, tuple[int, ...]]:
    """Row-reduce to ``rank x cols`` with an identity on the pivot columns.

    The returned permutation lists original column indices: the first
    ``rank`` are the pivots, the rest follow in original order.  The returned
    matrix keeps original column order; ``permute_columns(S, perm)`` gives the
    ``[I | A]`` layout.
    """
    if M.rows == 0 or M.cols == 0:
        return FMatrix.zeros(0, M.cols, M.prime), tuple(range(M.cols))
    reduced, pivots = reduce_rows(M.row_lists(), M.prime)
    pivot_set = set(pivots)
    rest = [j for j in range(M.cols) if j not in pivot_set]
    perm = tuple(pivots + rest)
    if not reduced:
        return FMatrix.zeros(0, M.cols, M.prime), tuple(range(M.cols))
    return FMatrix.from_rows(reduced, M.prime, cols=M.cols), perm


def permute_columns(M: FMatrix, perm: Sequence[int]) -> FMatrix:
    return M.select_columns(list(perm))


# ---------------------------------------------------------------------------
# Incremental basis (greedy independence over a stream of vectors)
# ---------------------------------------------------------------------------

class IncrementalBasis:
    """Keeps a reduced basis; ``add`` reports whether a vector was independent."""

    def __init__(self, prime: int):
        self.prime = prime
        self._rows: list[tuple[int, list[int]]] = []

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, vector: Sequence[int]) -> list[int]:
        p = self.prime
        v = [x % p for x in vector]
        for pivot, row in self._rows:
            f = v[pivot]
            if f:
                v = [(a - f * b) % p for a, b in zip(v, row)]
        return v

    def add(self, vector: Sequence[int]) -> bool:
        v = self.reduce(vector)
        pivot = next((i for i, x in enumerate(v) if x), None)
        if pivot is None:
            return False
        lead = inv(v[pivot], self.prime)
        self._rows.append((pivot, [x * lead % self.prime for x in v]))
        return True
