"""
Tests for kernels/toolkit/exactfield.py.

Covers FieldConfig validation, FMatrix construction, rank, minors,
standard form and the incremental basis.
"""
import pytest
from pydantic import ValidationError

from kernels.errors import BoundsError, ConfigurationError, ContractError
from kernels.toolkit.exactfield import (
    DEFAULT_PRIME,
    MERSENNE_LADDER,
    FieldConfig,
    FMatrix,
    IncrementalBasis,
    check_field_for,
    column_rank_of_subset,
    is_probable_prime,
    minor,
    permute_columns,
    rank,
    standard_form,
)

P = DEFAULT_PRIME


# ---------------------------------------------------------------------------
# TestFieldConfig
# ---------------------------------------------------------------------------

class TestFieldConfig:
    def test_default_is_mersenne_61(self):
        assert FieldConfig().prime == (1 << 61) - 1

    def test_rejects_composite(self):
        with pytest.raises(ValidationError):
            FieldConfig(prime=(1 << 61) + 1)

    def test_rejects_small_prime(self):
        with pytest.raises(ValidationError):
            FieldConfig(prime=101)

    def test_seed_must_fit_64_bits(self):
        with pytest.raises(ValidationError):
            FieldConfig(seed=1 << 64)

    def test_ladder_is_prime_and_increasing(self):
        assert all(is_probable_prime(p) for p in MERSENNE_LADDER)
        assert list(MERSENNE_LADDER) == sorted(MERSENNE_LADDER)

    def test_bits(self):
        assert FieldConfig().bits == 61

    def test_check_field_for_small_ground(self):
        check_field_for(100, FieldConfig())

    def test_check_field_for_rejects_huge_ground(self):
        with pytest.raises(ConfigurationError):
            check_field_for(1 << 21, FieldConfig())


class TestPrimality:
    @pytest.mark.parametrize("n", [2, 3, 5, 7919, (1 << 31) - 1, (1 << 89) - 1])
    def test_primes(self, n):
        assert is_probable_prime(n)

    @pytest.mark.parametrize("n", [0, 1, 4, 561, 7917, (1 << 32) + 1])
    def test_composites(self, n):
        assert not is_probable_prime(n)


# ---------------------------------------------------------------------------
# TestFMatrix
# ---------------------------------------------------------------------------

class TestFMatrix:
    def test_from_rows_reduces_entries(self):
        M = FMatrix.from_rows([[-1, P + 2]], P)
        assert M.row_lists() == [[P - 1, 2]]

    def test_ragged_rows_rejected(self):
        with pytest.raises(ContractError):
            FMatrix.from_rows([[1, 2], [3]], P)

    def test_empty_with_cols(self):
        M = FMatrix.from_rows([], P, cols=4)
        assert (M.rows, M.cols) == (0, 4)

    def test_column_out_of_range(self):
        M = FMatrix.identity(2, P)
        with pytest.raises(BoundsError):
            M.column(2)

    def test_bounds_error_is_index_error(self):
        M = FMatrix.identity(2, P)
        with pytest.raises(IndexError):
            M.select_columns([5])

    def test_matmul_identity(self):
        A = FMatrix.from_rows([[1, 2, 3], [4, 5, 6]], P)
        assert FMatrix.identity(2, P).matmul(A) == A

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ContractError):
            FMatrix.identity(2, P).matmul(FMatrix.identity(3, P))


# ---------------------------------------------------------------------------
# TestRank
# ---------------------------------------------------------------------------

class TestRank:
    def test_identity(self):
        assert rank(FMatrix.identity(4, P)) == 4

    def test_zero_matrix(self):
        assert rank(FMatrix.zeros(3, 3, P)) == 0

    def test_dependent_rows(self):
        M = FMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 1, 1]], P)
        assert rank(M) == 2

    def test_rank_uses_modular_arithmetic(self):
        # 2 * (P+1)/2 == 1 mod P, so the rows are parallel
        half = (P + 1) // 2
        M = FMatrix.from_rows([[1, half], [2, 1]], P)
        assert rank(M) == 1

    def test_column_subset(self):
        M = FMatrix.from_rows([[1, 0, 1], [0, 1, 1]], P)
        assert column_rank_of_subset(M, [0, 2]) == 2
        assert column_rank_of_subset(M, []) == 0

    def test_column_subset_out_of_range(self):
        with pytest.raises(BoundsError):
            column_rank_of_subset(FMatrix.identity(2, P), [3])


class TestMinor:
    def test_two_by_two(self):
        M = FMatrix.from_rows([[1, 2], [3, 4]], P)
        assert minor(M, [0, 1], [0, 1]) == (-2) % P

    def test_empty_minor_is_one(self):
        assert minor(FMatrix.identity(2, P), [], []) == 1

    def test_non_square_rejected(self):
        with pytest.raises(ContractError):
            minor(FMatrix.identity(3, P), [0, 1], [0])

    def test_row_out_of_range(self):
        with pytest.raises(BoundsError):
            minor(FMatrix.identity(2, P), [0, 2], [0, 1])


class TestStandardForm:
    def test_identity_on_pivots(self):
        M = FMatrix.from_rows([[2, 4, 1], [1, 2, 1]], P)
        S, perm = standard_form(M)
        assert S.rows == 2
        head = permute_columns(S, perm).select_columns([0, 1])
        assert head == FMatrix.identity(2, P)

    def test_drops_zero_rows(self):
        M = FMatrix.from_rows([[1, 1], [2, 2]], P)
        S, _ = standard_form(M)
        assert S.rows == 1

    def test_preserves_row_space_rank(self):
        M = FMatrix.from_rows([[1, 2, 3, 4], [0, 0, 1, 1], [1, 2, 4, 5]], P)
        S, _ = standard_form(M)
        assert rank(S) == rank(M) == 2


class TestIncrementalBasis:
    def test_rejects_dependent_vector(self):
        B = IncrementalBasis(P)
        assert B.add([1, 0, 1])
        assert B.add([0, 1, 1])
        assert not B.add([2, 3, 5])
        assert len(B) == 2

    def test_rejects_zero_vector(self):
        assert not IncrementalBasis(P).add([0, 0])
