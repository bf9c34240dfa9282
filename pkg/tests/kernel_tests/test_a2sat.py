"""
Tests for kernels/toolkit/a2sat.py.

2-SAT, the pair-cut reduction and its lifting, the bootstrap, the kernel,
the clause/variable deletion transformations and the vertex cover
transformations.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from kernels import formats, instances
from kernels.errors import BudgetExceededError, ContractError
from kernels.toolkit.a2sat import (
    Cnf2,
    DeletionSet,
    Lit,
    bootstrap_deletion_set,
    clause_to_variable_deletion,
    dummy_no_formula,
    dummy_no_vc,
    encode_dpc_as_2cnf,
    is_satisfiable_2sat,
    kernelize_a2sat,
    lift_dpc_solution,
    literal_vertex,
    maximum_matching_size,
    reduce_to_dpc,
    reduce_vc_above_lp,
    reduce_vc_konig_deletion,
    variable_to_clause_deletion,
    vertex_cover_lp_halves,
)
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import MatroidContext
from kernels.toolkit.oracle import (
    OracleBudget,
    brute_a2sat,
    brute_clause_deletion,
    brute_dpc,
    brute_vertex_cover,
)
from kernels.toolkit.paircut import solve_dpc

KERNEL_BUDGET = OracleBudget(max_vertices=10, max_k=7, max_candidates=256)


@pytest.fixture
def contradiction(fixtures_dir):
    return formats.read_cnf2(str(fixtures_dir / "contradiction.cnf2"))


@pytest.fixture
def c5(fixtures_dir):
    return formats.read_graph(str(fixtures_dir / "c5.graph"))


def satisfies(F: Cnf2, assignment: dict) -> bool:
    return all(any(assignment[l.var] == l.positive for l in c) for c in F.clauses)


def vc_answer(inst) -> bool:
    if inst.known_positive:
        return True
    if inst.known_negative:
        return False
    return brute_vertex_cover(inst.G) <= inst.matching_size + inst.k


# ---------------------------------------------------------------------------
# TestFormula
# ---------------------------------------------------------------------------

class TestFormula:
    def test_unknown_variable_rejected(self):
        with pytest.raises(ValidationError):
            Cnf2.build(["x"], [[("y", True)]])

    def test_wide_clause_rejected(self):
        with pytest.raises(ValidationError):
            Cnf2.build(["x", "y", "z"], [[("x", True), ("y", True), ("z", True)]])

    def test_without_drops_clauses(self, contradiction):
        F = contradiction.without(["1"])
        assert len(F.clauses) == 1
        assert F.variables == contradiction.variables

    def test_restricted_to(self, contradiction):
        F = contradiction.restricted_to(["1"])
        assert F.variables == ("1",)
        assert len(F.clauses) == 2

    def test_lit_str(self):
        assert str(Lit(var="x", positive=False)) == "~x"

    def test_deletion_set(self, contradiction):
        assert DeletionSet(variables=frozenset({"1"})).is_valid_for(contradiction)
        assert not DeletionSet().is_valid_for(contradiction)


# ---------------------------------------------------------------------------
# Test2Sat
# ---------------------------------------------------------------------------

class Test2Sat:
    def test_contradiction(self, contradiction):
        assert is_satisfiable_2sat(contradiction) is None

    def test_unconstrained_defaults_false(self):
        assert is_satisfiable_2sat(Cnf2.build(["x"], [])) == {"x": False}

    def test_implication_chain(self):
        F = Cnf2.build(["a", "b", "c"], [[("a", True)], [("a", False), ("b", True)],
                                         [("b", False), ("c", True)]])
        assert is_satisfiable_2sat(F) == {"a": True, "b": True, "c": True}

    def test_matches_truth_tables(self):
        rng = np.random.default_rng(201)
        for _ in range(60):
            F = instances.random_cnf2(rng, int(rng.integers(1, 8)), int(rng.integers(1, 12)))
            found = is_satisfiable_2sat(F)
            assert (found is not None) == (brute_a2sat(F, 0) is not None)
            if found is not None:
                assert satisfies(F, found)


# ---------------------------------------------------------------------------
# TestReduction
# ---------------------------------------------------------------------------

class TestReduction:
    def test_contradiction_shape(self, contradiction):
        X = DeletionSet(variables=frozenset({"1"}))
        inst = reduce_to_dpc(contradiction, X, 0)
        assert inst.k == 1
        assert (literal_vertex("1", 0), literal_vertex("1", 1)) in inst.pairs
        assert solve_dpc(inst) is None
        assert solve_dpc(reduce_to_dpc(contradiction, X, 1)) is not None

    def test_invalid_deletion_set(self, contradiction):
        with pytest.raises(ContractError):
            reduce_to_dpc(contradiction, DeletionSet(), 1)

    def test_unknown_variable(self, contradiction):
        with pytest.raises(ContractError):
            reduce_to_dpc(contradiction, DeletionSet(variables=frozenset({"9"})), 1)

    def test_negative_budget(self, contradiction):
        with pytest.raises(ContractError):
            reduce_to_dpc(contradiction, DeletionSet(variables=frozenset({"1"})), -1)

    def test_shortcut(self, contradiction):
        X = DeletionSet(variables=frozenset({"1"}))
        inst = reduce_to_dpc(contradiction, X, 1, shortcut=True)
        assert inst.pairs == ()

    def test_source_label_avoids_variables(self):
        F = Cnf2.build(["s", "x"], [[("s", True), ("x", True)]])
        inst = reduce_to_dpc(F, DeletionSet(variables=frozenset({"s"})), 0)
        assert inst.s == "s_"


def _reduction_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for _ in range(count):
        F = instances.random_cnf2(rng, int(rng.integers(2, 8)), int(rng.integers(2, 12)))
        k = int(rng.integers(0, 3))
        X = bootstrap_deletion_set(F, k, compress_final=False)
        expected = brute_a2sat(F, k)
        if X is None:
            assert expected is None
            continue
        inst = reduce_to_dpc(F, X, k)
        Z = solve_dpc(inst)
        assert (Z is None) == (expected is None)
        if Z is not None:
            lifted = lift_dpc_solution(F, X, Z)
            assert len(lifted) <= k
            assert lifted.is_valid_for(F)


class TestReductionSweeps:
    def test_matches_oracle_quick(self):
        _reduction_sweep(30, 211)

    @pytest.mark.slow
    def test_matches_oracle_full(self):
        _reduction_sweep(300, 212)


# ---------------------------------------------------------------------------
# TestBootstrap
# ---------------------------------------------------------------------------

class TestBootstrap:
    def test_contradiction(self, contradiction):
        assert bootstrap_deletion_set(contradiction, 0) is None
        X = bootstrap_deletion_set(contradiction, 1)
        assert X.variables == frozenset({"1"})

    def test_uncompressed_final_step(self, contradiction):
        X = bootstrap_deletion_set(contradiction, 0, compress_final=False)
        assert X is None or len(X) <= 1

    def test_matches_oracle(self):
        rng = np.random.default_rng(221)
        for _ in range(40):
            F = instances.random_cnf2(rng, int(rng.integers(1, 8)), int(rng.integers(1, 14)))
            k = int(rng.integers(0, 3))
            X = bootstrap_deletion_set(F, k)
            assert (X is None) == (brute_a2sat(F, k) is None)
            if X is not None:
                assert len(X) <= k
                assert X.is_valid_for(F)


# ---------------------------------------------------------------------------
# TestEncoding
# ---------------------------------------------------------------------------

class TestEncoding:
    def test_star(self, fixtures_dir):
        from kernels.toolkit.paircut import PairCutInstance

        G = formats.read_graph(str(fixtures_dir / "dpc_star.graph"))
        pairs = tuple(formats.read_pairs(str(fixtures_dir / "dpc_star.pairs"), G))
        F, k = encode_dpc_as_2cnf(PairCutInstance(D=G, s="0", pairs=pairs, k=1))
        assert k == 1
        assert F.variables[:2] == ("0_1", "0_2")
        assert brute_a2sat(F, 1) == frozenset({"2"})
        assert brute_a2sat(F, 0) is None

    def test_triples_rejected(self):
        from kernels.toolkit.paircut import PairCutInstance

        D = Digraph.from_arcs(["s", "a", "b", "c"], [])
        with pytest.raises(ContractError):
            encode_dpc_as_2cnf(PairCutInstance(D=D, s="s", pairs=(("a", "b", "c"),), k=0))

    def test_matches_oracle(self):
        rng = np.random.default_rng(231)
        for _ in range(30):
            k = int(rng.integers(0, 3))
            inst = instances.random_dpc(rng, int(rng.integers(3, 7)), k,
                                        pair_count=int(rng.integers(1, 5)))
            F, k2 = encode_dpc_as_2cnf(inst)
            assert (brute_a2sat(F, k2) is None) == (brute_dpc(inst) is None)


# ---------------------------------------------------------------------------
# TestKernel
# ---------------------------------------------------------------------------

class TestKernel:
    def test_trivial_yes(self, ctx):
        F = Cnf2.build(["x", "y"], [[("x", True), ("y", False)]])
        K = kernelize_a2sat(F, 0, ctx)
        assert K.trivial is True
        assert K.formula.variables == ()

    def test_trivial_no(self, ctx, contradiction):
        K = kernelize_a2sat(contradiction, 0, ctx)
        assert K.trivial is False
        assert K.formula == dummy_no_formula()
        assert bootstrap_deletion_set(K.formula, K.k) is None

    def test_contradiction_budget_one(self, ctx, contradiction):
        assert kernelize_a2sat(contradiction, 1, ctx).trivial is True


def a2sat_kernel_bound(k: int) -> int:
    """Source copies plus the pair cut kernel bound 1 + m + (k+1)^2 m, m <= 2(k+1)^2."""
    m = 2 * (k + 1) ** 2
    return (k + 1) + m + (k + 1) ** 2 * m


def _kernel_answer(K) -> bool:
    try:
        return brute_a2sat(K.formula, K.k, KERNEL_BUDGET) is not None
    except BudgetExceededError:
        return bootstrap_deletion_set(K.formula, K.k) is not None


def _kernel_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, 11))
        F = instances.random_cnf2(rng, n, int(rng.integers(n, 2 * n + 4)))
        k = int(rng.integers(0, 4))
        K = kernelize_a2sat(F, k, MatroidContext.from_seed(i))
        expected = brute_a2sat(F, k) is not None
        if K.trivial is not None:
            assert K.trivial == expected
            continue
        # exact bootstrap: |X| = k + 1
        assert K.bootstrap_size == k + 1
        assert K.k == K.bootstrap_size + k
        assert len(K.formula.variables) <= a2sat_kernel_bound(K.k)
        assert (bootstrap_deletion_set(K.formula, K.k) is not None) == expected
        assert _kernel_answer(K) == expected


class TestKernelSweeps:
    def test_matches_oracle_quick(self):
        _kernel_sweep(20, 241)

    @pytest.mark.slow
    def test_matches_oracle_full(self):
        _kernel_sweep(300, 242)


# ---------------------------------------------------------------------------
# TestDeletionTransforms
# ---------------------------------------------------------------------------

class TestDeletionTransforms:
    def test_variable_to_clause_shape(self, contradiction):
        F, k = variable_to_clause_deletion(contradiction, 1)
        assert k == 1
        assert F.variables == ("p_1", "q_1", "p_2", "q_2")
        assert len(F.clauses) == 2 + 4 * 2

    def test_variable_to_clause_contradiction(self, contradiction):
        for k in (0, 1):
            F, _ = variable_to_clause_deletion(contradiction, k)
            expected = brute_a2sat(contradiction, k) is not None
            assert (brute_clause_deletion(F, k) is not None) == expected

    def test_clause_to_variable_contradiction(self, contradiction):
        for k in (0, 1):
            F, _ = clause_to_variable_deletion(contradiction, k)
            expected = brute_clause_deletion(contradiction, k) is not None
            assert (brute_a2sat(F, k) is not None) == expected

    def test_clause_to_variable_names(self, contradiction):
        F, _ = clause_to_variable_deletion(contradiction, 1)
        assert {"1@0", "1@1", "2@0", "2@1", "o0_0", "o2_1"} <= set(F.variables)

    def test_variable_to_clause_sweep(self):
        rng = np.random.default_rng(251)
        for _ in range(10):
            F = instances.random_cnf2(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
            k = int(rng.integers(0, 3))
            G, _ = variable_to_clause_deletion(F, k)
            assert ((brute_clause_deletion(G, k) is not None)
                    == (brute_a2sat(F, k) is not None))


# ---------------------------------------------------------------------------
# TestVertexCover
# ---------------------------------------------------------------------------

class TestVertexCover:
    def test_c5_numbers(self, c5):
        assert maximum_matching_size(c5) == 2
        assert vertex_cover_lp_halves(c5) == 5

    def test_c5_above_lp(self, c5):
        assert not vc_answer(reduce_vc_above_lp(c5, 0))
        assert vc_answer(reduce_vc_above_lp(c5, 1))

    def test_negative_k(self, c5):
        with pytest.raises(ContractError):
            reduce_vc_above_lp(c5, -1)

    def test_dummy(self):
        inst = dummy_no_vc()
        assert inst.known_negative
        assert brute_vertex_cover(inst.G) > inst.matching_size + inst.k

    def test_konig_deletion(self, c5):
        assert reduce_vc_konig_deletion(c5, ["0"], 3).known_positive
        inst = reduce_vc_konig_deletion(c5, ["0"], 2)
        assert inst.k == 0
        assert not vc_answer(inst)

    def test_konig_unknown_vertex(self, c5):
        with pytest.raises(ContractError):
            reduce_vc_konig_deletion(c5, ["9"], 2)

    def test_above_lp_sweep(self):
        rng = np.random.default_rng(261)
        for _ in range(25):
            G = instances.random_graph(rng, int(rng.integers(3, 11)), float(rng.uniform(0.2, 0.6)))
            lp_halves = vertex_cover_lp_halves(G)
            vc = brute_vertex_cover(G)
            for k in range(3):
                out = reduce_vc_above_lp(G, k)
                assert vc_answer(out) == (2 * vc <= lp_halves + 2 * k)
                if not out.known_negative:
                    assert out.k <= 3 * k + 1
