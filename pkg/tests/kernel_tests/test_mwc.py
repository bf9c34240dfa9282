"""
Tests for kernels/toolkit/mwc.py.

The half-integral relaxation, the terminal reduction and the three
multiway-cut style kernels, checked against the brute-force oracles.
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from kernels import formats, instances
from kernels.errors import ContractError
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import MatroidContext
from kernels.toolkit.mwc import (
    MulticutInstance,
    MwcInstance,
    attach_super_terminals,
    dummy_negative,
    half_integral_mwc_lp,
    highly_reachable_candidates,
    kernelize_dtmwc,
    kernelize_multicut,
    kernelize_smwc,
    multicut_parts,
    reduce_terminals,
    shortcut_through,
    vertex_cover_as_dtmwc,
)
from kernels.toolkit.oracle import (
    brute_half_integral_lp,
    brute_multicut,
    brute_multiway_cut,
    brute_vertex_cover,
)


@pytest.fixture
def mwc_path(fixtures_dir):
    G = formats.read_graph(str(fixtures_dir / "mwc_path.graph"))
    T = formats.read_vertex_set(str(fixtures_dir / "mwc_path.terminals"), G)
    return G, tuple(T)


@pytest.fixture
def half_triangle(fixtures_dir):
    G = formats.read_graph(str(fixtures_dir / "half_triangle.graph"))
    T = formats.read_vertex_set(str(fixtures_dir / "half_triangle.terminals"), G)
    return G, tuple(T)


def answer(inst: MwcInstance) -> bool:
    found = brute_multiway_cut(inst.G, inst.terminals, inst.k,
                               deletable=inst.deletable_terminals)
    return found is not None


# ---------------------------------------------------------------------------
# TestInstances
# ---------------------------------------------------------------------------

class TestInstances:
    def test_directed_graph_rejected(self):
        D = Digraph.from_arcs(["a", "b"], [("a", "b")])
        with pytest.raises(ValidationError):
            MwcInstance(G=D, terminals=("a",), k=0)

    def test_unknown_terminal(self, mwc_path):
        G, _ = mwc_path
        with pytest.raises(ValidationError):
            MwcInstance(G=G, terminals=("9",), k=0)

    def test_duplicate_terminal(self, mwc_path):
        G, _ = mwc_path
        with pytest.raises(ValidationError):
            MwcInstance(G=G, terminals=("0", "0"), k=0)

    def test_multicut_unknown_member(self, mwc_path):
        G, _ = mwc_path
        with pytest.raises(ValidationError):
            MulticutInstance(G=G, pairs=(("0", "9"),), k=1)

    def test_terminal_neighborhood(self, mwc_path):
        G, T = mwc_path
        assert MwcInstance(G=G, terminals=T, k=2).terminal_neighborhood() == ["1", "3"]

    def test_dummy_negative(self):
        for deletable in (False, True):
            inst = dummy_negative(deletable)
            assert inst.known_negative
            assert not answer(inst)


# ---------------------------------------------------------------------------
# TestGraphHelpers
# ---------------------------------------------------------------------------

class TestGraphHelpers:
    def test_super_terminals(self, mwc_path):
        G, T = mwc_path
        H, roots = attach_super_terminals(G, T)
        assert roots == ["0^", "2^", "4^"]
        assert H.neighbors("2^") == ("2",)

    def test_vertex_cover_reduction(self, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "c5.graph"))
        vc = brute_vertex_cover(G)
        assert answer(vertex_cover_as_dtmwc(G, vc))
        assert not answer(vertex_cover_as_dtmwc(G, vc - 1))

    def test_vertex_cover_pendants(self):
        G = Digraph.undirected(["a", "b"], [("a", "b")])
        inst = vertex_cover_as_dtmwc(G, 1)
        assert inst.terminals == ("a*", "b*")
        assert inst.deletable_terminals

    def test_shortcut_through(self):
        G = Digraph.undirected(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("b", "d")])
        H = shortcut_through(G, ["a", "c", "d"])
        assert H.vertices == ("a", "c", "d")
        assert set(H.edges()) == {("a", "c"), ("a", "d"), ("c", "d")}

    @pytest.mark.parametrize("pairs,parts", [(0, 1), (1, 2), (2, 2), (3, 3), (8, 4)])
    def test_multicut_parts(self, pairs, parts):
        assert multicut_parts(pairs) == parts


# ---------------------------------------------------------------------------
# TestRelaxation
# ---------------------------------------------------------------------------

class TestRelaxation:
    @pytest.mark.parametrize("method", ["search", "linprog", "auto"])
    def test_path(self, mwc_path, method):
        G, T = mwc_path
        lp = half_integral_mwc_lp(G, T, method=method)
        assert lp.objective == 2
        assert lp.support == frozenset({"1", "3"})

    @pytest.mark.parametrize("method", ["search", "linprog"])
    def test_triangle_is_half(self, half_triangle, method):
        G, T = half_triangle
        lp = half_integral_mwc_lp(G, T, method=method)
        assert lp.objective == Fraction(3, 2)
        assert lp.method == method

    def test_limit(self, mwc_path):
        G, T = mwc_path
        assert half_integral_mwc_lp(G, T, limit=Fraction(1)) is None
        assert half_integral_mwc_lp(G, T, limit=Fraction(2)).objective == 2

    def test_adjacent_terminals(self):
        G = Digraph.undirected(["a", "b", "c"], [("a", "b"), ("b", "c")])
        assert half_integral_mwc_lp(G, ["a", "b"]) is None
        assert half_integral_mwc_lp(G, ["a", "b"], method="linprog") is None

    def test_no_terminals(self, mwc_path):
        G, _ = mwc_path
        assert half_integral_mwc_lp(G, []).objective == 0

    def test_unknown_method(self, mwc_path):
        G, T = mwc_path
        with pytest.raises(ContractError):
            half_integral_mwc_lp(G, T, method="simplex")


def _relaxation_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for _ in range(count):
        inst = instances.random_mwc(rng, int(rng.integers(4, 10)), 0,
                                    terminals=int(rng.integers(2, 4)))
        expected = brute_half_integral_lp(inst.G, inst.terminals)
        for method in ("search", "linprog"):
            lp = half_integral_mwc_lp(inst.G, inst.terminals, method=method)
            if expected is None:
                assert lp is None
            else:
                assert lp.objective == expected[0]


class TestRelaxationSweeps:
    def test_matches_enumeration_quick(self):
        _relaxation_sweep(20, 111)

    @pytest.mark.slow
    def test_matches_enumeration_full(self):
        _relaxation_sweep(200, 112)


# ---------------------------------------------------------------------------
# TestReduceTerminals
# ---------------------------------------------------------------------------

class TestReduceTerminals:
    def test_path_budget_two(self, mwc_path):
        G, T = mwc_path
        out = reduce_terminals(MwcInstance(G=G, terminals=T, k=2))
        assert not out.known_negative
        assert out.k <= 2
        assert answer(out)

    def test_path_budget_one_is_negative(self, mwc_path):
        G, T = mwc_path
        assert reduce_terminals(MwcInstance(G=G, terminals=T, k=1)).known_negative

    def test_deletable_path(self, mwc_path):
        G, T = mwc_path
        out = reduce_terminals(MwcInstance(G=G, terminals=T, k=1, deletable_terminals=True))
        assert out.deletable_terminals
        assert answer(out)

    def test_known_negative_passes_through(self):
        inst = dummy_negative()
        assert reduce_terminals(inst) is inst

    def test_reduction_is_sound(self):
        rng = np.random.default_rng(121)
        for _ in range(30):
            deletable = bool(rng.random() < 0.5)
            inst = instances.random_mwc(rng, int(rng.integers(4, 11)), int(rng.integers(0, 4)),
                                        terminals=int(rng.integers(2, 5)), deletable=deletable)
            out = reduce_terminals(inst)
            assert out.k <= inst.k
            if out.known_negative:
                continue
            assert len(out.terminals) <= 2 * out.k
            if not deletable:
                assert len(out.terminal_neighborhood()) <= 2 * out.k
            if answer(out):
                assert answer(inst)

    def test_star_center_removed(self):
        G = Digraph.undirected(["p", "a", "b", "c"], [("p", "a"), ("a", "b"), ("a", "c")])
        out = reduce_terminals(MwcInstance(G=G, terminals=("a", "b", "c"), k=1,
                                           deletable_terminals=True))
        assert not out.known_negative
        assert out.k == 0
        assert out.terminals == ()


# ---------------------------------------------------------------------------
# TestKernels
# ---------------------------------------------------------------------------

class TestKernels:
    def test_dtmwc_needs_deletable(self, ctx, mwc_path):
        G, T = mwc_path
        with pytest.raises(ContractError):
            kernelize_dtmwc(MwcInstance(G=G, terminals=T, k=1), ctx)

    def test_smwc_needs_undeletable(self, ctx, mwc_path):
        G, T = mwc_path
        with pytest.raises(ContractError):
            kernelize_smwc(MwcInstance(G=G, terminals=T, k=1, deletable_terminals=True), 3, ctx)

    def test_smwc_terminal_cap(self, ctx, mwc_path):
        G, T = mwc_path
        with pytest.raises(ContractError):
            kernelize_smwc(MwcInstance(G=G, terminals=T, k=2), 2, ctx)

    def test_dtmwc_path(self, ctx, mwc_path):
        G, T = mwc_path
        K = kernelize_dtmwc(MwcInstance(G=G, terminals=T, k=1, deletable_terminals=True), ctx)
        assert answer(K)

    def test_smwc_path(self, ctx, mwc_path):
        G, T = mwc_path
        assert answer(kernelize_smwc(MwcInstance(G=G, terminals=T, k=2), 3, ctx))
        assert kernelize_smwc(MwcInstance(G=G, terminals=T, k=1), 3, ctx).known_negative

    def test_candidates_bound(self, ctx):
        rng = np.random.default_rng(131)
        for _ in range(10):
            inst = instances.random_mwc(rng, 8, 2, terminals=2)
            found = highly_reachable_candidates(inst, 2, ctx)
            assert len(found) <= inst.k * len(inst.terminal_neighborhood()) ** 2

    def test_multicut_path(self, ctx, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "multicut_path.graph"))
        pairs = formats.read_pairs(str(fixtures_dir / "multicut_path.pairs"), G)
        K = kernelize_multicut(MulticutInstance(G=G, pairs=tuple(pairs), k=1), ctx)
        assert set(K.G.vertices) >= {"0", "3"}
        assert brute_multicut(K.G, K.pairs, K.k) is not None

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_multicut_twins_collapse_to_terminals(self, ctx, k):
        G = Digraph.undirected(["a", "m", "b"], [("a", "m"), ("m", "b")])
        K = kernelize_multicut(MulticutInstance(G=G, pairs=(("a", "b"),), k=k), ctx)
        assert {"a", "b"} <= set(K.G.vertices)
        assert not any("#" in v for v in K.G.vertices)
        found = brute_multicut(K.G, K.pairs, K.k)
        if k == 0:
            assert found is None
        else:
            assert found == frozenset({"m"})

    def test_multicut_without_pairs(self, ctx, mwc_path):
        G, _ = mwc_path
        inst = MulticutInstance(G=G, pairs=(), k=0)
        assert kernelize_multicut(inst, ctx) is inst


def dtmwc_bound(K: MwcInstance) -> int:
    """Terminals plus one kept vertex per basis triple of the rank-|T| gammoid."""
    t = len(K.terminals)
    return t + math.comb(t, 3)


def smwc_bound(K: MwcInstance, s: int) -> int:
    """T, N(T) and at most k * |N(T)|^s highly reachable candidates."""
    nt = len(K.terminal_neighborhood())
    return len(K.terminals) + nt + K.k * nt ** s


def _dtmwc_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(count):
        inst = instances.random_mwc(rng, int(rng.integers(4, 11)), int(rng.integers(0, 4)),
                                    terminals=int(rng.integers(2, 5)), deletable=True)
        K = kernelize_dtmwc(inst, MatroidContext.from_seed(i))
        assert answer(K) == answer(inst)
        if not K.known_negative:
            assert len(K.terminals) <= 2 * K.k
            assert len(K.G.vertices) <= dtmwc_bound(K)
            assert len(K.G.vertices) <= 2 * K.k + math.comb(2 * K.k, 3)


def _smwc_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    s = 3
    for i in range(count):
        inst = instances.random_mwc(rng, int(rng.integers(4, 11)), int(rng.integers(0, 4)),
                                    terminals=int(rng.integers(2, s + 1)))
        K = kernelize_smwc(inst, s, MatroidContext.from_seed(i))
        assert answer(K) == answer(inst)
        if not K.known_negative:
            assert len(K.G.vertices) <= smwc_bound(K, s)
            assert len(K.G.vertices) <= 4 * K.k + K.k * (2 * K.k) ** s


def _multicut_sweep(count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(count):
        inst = instances.random_multicut(rng, int(rng.integers(4, 8)), int(rng.integers(0, 3)),
                                         pair_count=int(rng.integers(1, 3)))
        K = kernelize_multicut(inst, MatroidContext.from_seed(i))
        expected = brute_multicut(inst.G, inst.pairs, inst.k) is not None
        assert (brute_multicut(K.G, K.pairs, K.k) is not None) == expected


class TestKernelSweeps:
    def test_dtmwc_quick(self):
        _dtmwc_sweep(20, 141)

    @pytest.mark.slow
    def test_dtmwc_full(self):
        _dtmwc_sweep(300, 142)

    def test_smwc_quick(self):
        _smwc_sweep(15, 151)

    @pytest.mark.slow
    def test_smwc_full(self):
        _smwc_sweep(300, 152)

    def test_multicut_quick(self):
        _multicut_sweep(10, 161)

    @pytest.mark.slow
    def test_multicut_full(self):
        _multicut_sweep(300, 162)
