"""
Tests for kernels/toolkit/repset.py.

Wedge and tensor vectors, family validation, and representativity checked
against the brute-force definition.
"""
import itertools
import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from kernels import instances
from kernels.errors import BudgetExceededError, ContractError
from kernels.toolkit.matroid import MatroidContext, direct_sum, gammoid, uniform_matroid
from kernels.toolkit.repset import (
    TupleFamily,
    representative_family,
    tensor_vector,
    vector_dimension,
    verify_representative,
    wedge_vector,
)


def singles(labels):
    return [(label, (label,)) for label in labels]


def layered_sum():
    A = uniform_matroid(3, 2, labels=["a0", "a1", "a2"])
    B = uniform_matroid(3, 2, labels=["b0", "b1", "b2"])
    return direct_sum([A, B])


# ---------------------------------------------------------------------------
# TestVectors
# ---------------------------------------------------------------------------

class TestVectors:
    def test_wedge_length(self):
        U = uniform_matroid(5, 3)
        assert len(wedge_vector(U, ["0", "1"])) == math.comb(3, 2)

    def test_wedge_of_dependent_pair_is_zero(self):
        U = uniform_matroid(4, 1)
        assert not any(wedge_vector(U, ["0", "1"]))

    def test_wedge_is_alternating(self):
        U = uniform_matroid(4, 2)
        a = wedge_vector(U, ["0", "1"])
        b = wedge_vector(U, ["1", "0"])
        assert [(x + y) % U.prime for x, y in zip(a, b)] == [0] * len(a)

    def test_tensor_length_is_rank_product(self):
        M = layered_sum()
        assert len(tensor_vector(M, ["a0", "b2"])) == 4

    def test_tensor_needs_one_element_per_block(self):
        M = layered_sum()
        with pytest.raises(ContractError):
            tensor_vector(M, ["a0", "a1"])

    def test_tensor_without_blocks(self):
        with pytest.raises(ContractError):
            tensor_vector(uniform_matroid(3, 2), ["0", "1"])


# ---------------------------------------------------------------------------
# TestTupleFamily
# ---------------------------------------------------------------------------

class TestTupleFamily:
    def test_mixed_sizes_rejected(self):
        U = uniform_matroid(4, 2)
        with pytest.raises(ValidationError):
            TupleFamily(matroid=U, tuples=(("x", ("0",)), ("y", ("0", "1"))))

    def test_duplicate_labels_rejected(self):
        U = uniform_matroid(4, 2)
        with pytest.raises(ValidationError):
            TupleFamily(matroid=U, tuples=(("x", ("0",)), ("x", ("1",))))

    def test_layered_needs_blocks(self):
        with pytest.raises(ValidationError):
            TupleFamily(matroid=uniform_matroid(3, 2), tuples=(("x", ("0", "1")),), layered=True)

    def test_layered_element_in_wrong_block(self):
        with pytest.raises(ValidationError):
            TupleFamily(matroid=layered_sum(), tuples=(("x", ("b0", "a0")),), layered=True)

    def test_build_drops_dependent_tuples(self, caplog):
        U = uniform_matroid(4, 1)
        with caplog.at_level(logging.WARNING, logger="kernels.toolkit.repset"):
            F = TupleFamily.build(U, [("x", ("0", "1")), ("y", ("2",) * 2)])
        assert F.tuples == ()
        assert "dropping dependent tuple" in caplog.text

    def test_dimension(self):
        F = TupleFamily.build(uniform_matroid(5, 3), [("x", ("0", "1"))])
        assert vector_dimension(F) == 3
        L = TupleFamily.build(layered_sum(), [("x", ("a0", "b0"))], layered=True)
        assert vector_dimension(L) == 4


# ---------------------------------------------------------------------------
# TestRepresentativeFamily
# ---------------------------------------------------------------------------

class TestRepresentativeFamily:
    def test_uniform_singletons(self):
        U = uniform_matroid(6, 3)
        F = TupleFamily.build(U, singles(U.ground))
        rep = representative_family(F)
        assert len(rep.kept) == 3
        assert rep.r == 2
        assert verify_representative(F, rep.kept, rep.r)

    def test_keeps_input_order(self):
        U = uniform_matroid(4, 2)
        rep = representative_family(TupleFamily.build(U, singles(["3", "2", "1", "0"])))
        assert rep.kept == ("3", "2")

    def test_empty_family(self):
        rep = representative_family(TupleFamily.build(uniform_matroid(3, 2), []))
        assert rep.kept == ()

    def test_too_few_tuples_is_not_representative(self):
        U = uniform_matroid(4, 2)
        F = TupleFamily.build(U, singles(U.ground))
        assert not verify_representative(F, ["0"], 1)

    def test_layered_bound(self):
        M = layered_sum()
        tuples = [(f"{a}{b}", (a, b)) for a in ("a0", "a1", "a2") for b in ("b0", "b1", "b2")]
        F = TupleFamily.build(M, tuples, layered=True)
        rep = representative_family(F)
        assert len(rep.kept) <= 4
        assert verify_representative(F, rep.kept, rep.r)

    def test_idempotent(self):
        U = uniform_matroid(6, 4)
        tuples = [(f"{a}{b}", (a, b)) for a, b in itertools.combinations(U.ground, 2)]
        F = TupleFamily.build(U, tuples)
        kept = set(representative_family(F).kept)
        again = TupleFamily.build(U, [t for t in F.tuples if t[0] in kept])
        assert set(representative_family(again).kept) == kept

    def test_verify_refuses_large_ground(self):
        U = uniform_matroid(15, 2)
        F = TupleFamily.build(U, singles(U.ground))
        with pytest.raises(BudgetExceededError):
            verify_representative(F, [], 1)


# ---------------------------------------------------------------------------
# TestSweeps
# ---------------------------------------------------------------------------

def _sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(4, 11))
        D = instances.random_digraph(rng, n, float(rng.uniform(0.2, 0.5)))
        S = instances.pick(rng, list(D.vertices), int(rng.integers(2, 5)))
        M = gammoid(D, S, MatroidContext.from_seed(i))
        s = int(rng.integers(1, min(3, M.rank) + 1))
        combos = list(itertools.combinations(M.ground, s))
        chosen = rng.permutation(len(combos))[:12]
        F = TupleFamily.build(M, [(f"t{j}", combos[j]) for j in sorted(chosen.tolist())])
        rep = representative_family(F)
        assert len(rep.kept) <= math.comb(M.rank, s)
        assert verify_representative(F, rep.kept, rep.r)


def _layered_vs_wedge(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(count):
        ctx = MatroidContext.from_seed(i)
        parts = []
        for b in range(2):
            n = int(rng.integers(3, 6))
            D = instances.random_digraph(rng, n, 0.4)
            S = instances.pick(rng, list(D.vertices), 2)
            parts.append(gammoid(D.relabeled({v: f"{v}.{b}" for v in D.vertices}),
                                 [f"{v}.{b}" for v in S], ctx))
        M = direct_sum(parts)
        tuples = [(f"{x}|{y}", (x, y)) for x in parts[0].ground for y in parts[1].ground]
        layered = representative_family(TupleFamily.build(M, tuples, layered=True)).kept
        flat = representative_family(TupleFamily.build(M, tuples)).kept
        assert layered == flat


class TestSweeps:
    def test_soundness_quick(self):
        _sweep(25, 3)

    @pytest.mark.slow
    def test_soundness_full(self):
        _sweep(200, 4)

    def test_tensor_matches_wedge_quick(self):
        _layered_vs_wedge(10, 5)

    @pytest.mark.slow
    def test_tensor_matches_wedge_full(self):
        _layered_vs_wedge(100, 6)
