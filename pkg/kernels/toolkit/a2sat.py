"""
Almost 2-SAT.

A deletion set X is a set of variables such that dropping every clause that
mentions X leaves a satisfiable 2-CNF.  The compression form (given a
deletion set X, is there one of size <= k?) reduces to digraph pair cut with
budget |X| + k; with an iterative-compression bootstrap this gives the
kernel pipeline ``kernelize_a2sat``.

Also here: the implication-graph 2-SAT solver, the back-encoding of a pair
cut instance as a 2-CNF, the clause/variable deletion transformations, and
the vertex-cover-above-LP and Koenig-deletion-set transformations.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx
from networkx.algorithms import bipartite
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.errors import ContractError
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import MatroidContext
from kernels.toolkit.paircut import (
    PairCutInstance,
    dummy_yes_instance,
    kernelize_dpc,
    solve_dpc,
    split_source,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class Lit(BaseModel):
    model_config = ConfigDict(frozen=True)

    var: str
    positive: bool = True

    def negated(self) -> "Lit":
        return Lit(var=self.var, positive=not self.positive)

    def __str__(self) -> str:
        return self.var if self.positive else f"~{self.var}"


Clause = tuple[Lit, ...]


class Cnf2(BaseModel):
    model_config = ConfigDict(frozen=True)

    variables: tuple[str, ...]
    clauses: tuple[Clause, ...] = ()

    @model_validator(mode="after")
    def _check_clauses(self) -> "Cnf2":
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise ValueError("duplicate variable")
        for c in self.clauses:
            if not 1 <= len(c) <= 2:
                raise ValueError(f"clause of width {len(c)}")
            for lit in c:
                if lit.var not in known:
                    raise ValueError(f"clause mentions unknown variable {lit.var!r}")
        return self

    @classmethod
    def build(cls, variables: Iterable[str], clauses: Iterable[Iterable[tuple[str, bool]]]) -> "Cnf2":
        """From (variable, sign) pairs."""
        return cls(variables=tuple(variables),
                   clauses=tuple(tuple(Lit(var=v, positive=b) for v, b in c) for c in clauses))

    def without(self, X: Iterable[str]) -> "Cnf2":
        """Drop every clause incident to X (variables are kept)."""
        gone = set(X)
        return Cnf2(variables=self.variables,
                    clauses=tuple(c for c in self.clauses if not any(l.var in gone for l in c)))

    def restricted_to(self, keep: Iterable[str]) -> "Cnf2":
        """Clauses entirely inside ``keep``, over those variables only."""
        kept = set(keep)
        return Cnf2(variables=tuple(v for v in self.variables if v in kept),
                    clauses=tuple(c for c in self.clauses if all(l.var in kept for l in c)))


class DeletionSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    variables: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.variables)

    def is_valid_for(self, F: Cnf2) -> bool:
        return is_satisfiable_2sat(F.without(self.variables)) is not None


class A2satKernel(BaseModel):
    model_config = ConfigDict(frozen=True)

    formula: Cnf2
    k: int = Field(..., ge=0)
    bootstrap_size: int = Field(..., description="|X| of the deletion set the reduction started from")
    failure_bound: float = 0.0
    trivial: Optional[bool] = Field(default=None, description="Set when the answer was settled up front")


class VcAboveMatching(BaseModel):
    """Vertex cover of size at most matching_size + k?"""

    model_config = ConfigDict(frozen=True)

    G: Digraph
    k: int
    matching_size: int
    lp_halves: int = Field(default=0, description="2 * LP(G)")
    known_negative: bool = False
    known_positive: bool = False


# ---------------------------------------------------------------------------
# 2-SAT
# ---------------------------------------------------------------------------

def _implication_graph(F: Cnf2) -> nx.DiGraph:
    g = nx.DiGraph()
    for v in F.variables:
        g.add_node((v, True))
        g.add_node((v, False))
    for c in F.clauses:
        a, b = (c[0], c[0]) if len(c) == 1 else c
        g.add_edge((a.var, not a.positive), (b.var, b.positive))
        g.add_edge((b.var, not b.positive), (a.var, a.positive))
    return g


def is_satisfiable_2sat(F: Cnf2) -> Optional[dict[str, bool]]:
    """Satisfying assignment from the SCC condensation, or None.

    Unconstrained variables come out false.
    """
    g = _implication_graph(F)
    cond = nx.condensation(g)
    comp = cond.graph["mapping"]
    for v in F.variables:
        if comp[(v, True)] == comp[(v, False)]:
            return None

    def key(c: int) -> tuple[int, str]:
        members = cond.nodes[c]["members"]
        return (0 if any(pos for _, pos in members) else 1, min(str(m) for m in members))

    order = {c: i for i, c in enumerate(nx.lexicographical_topological_sort(cond, key=key))}
    return {v: order[comp[(v, True)]] > order[comp[(v, False)]] for v in F.variables}


# ---------------------------------------------------------------------------
# Reduction to digraph pair cut
# ---------------------------------------------------------------------------

def literal_vertex(x: str, value: int) -> str:
    """Vertex standing for "x may take ``value``"."""
    return f"{x}#{value}"


def _source_label(F: Cnf2) -> str:
    s = "s"
    names = set(F.variables)
    while s in names:
        s += "_"
    return s


def _zero_valid_flips(F: Cnf2, X: frozenset[str]) -> frozenset[str]:
    assignment = is_satisfiable_2sat(F.without(X))
    if assignment is None:
        raise ContractError("X is not a deletion set")
    return frozenset(v for v, val in assignment.items() if val and v not in X)


def reduce_to_dpc(F: Cnf2, X: DeletionSet, k: int, shortcut: bool = False) -> PairCutInstance:
    """Pair cut instance with budget |X| + k, positive iff F has a deletion set of size <= k."""
    if k < 0:
        raise ContractError("k must be non-negative")
    Xs = X.variables
    for x in Xs:
        if x not in F.variables:
            raise ContractError(f"deletion set mentions unknown variable {x!r}")
    flips = _zero_valid_flips(F, Xs)
    if shortcut and len(Xs) <= k:
        return dummy_yes_instance()
    s = _source_label(F)

    def falsifier(lit: Lit) -> tuple[str, bool]:
        """(vertex, reach_means_false): for X literals and negative residue
        literals the clause side is false when the vertex is reachable."""
        positive = lit.positive != (lit.var in flips)
        if lit.var in Xs:
            return literal_vertex(lit.var, 0 if positive else 1), True
        return lit.var, not positive

    xs = [v for v in F.variables if v in Xs]
    vertices = [s] + [v for v in F.variables if v not in Xs]
    vertices += [literal_vertex(x, i) for x in xs for i in (0, 1)]
    arcs: list[tuple[str, str]] = [(s, literal_vertex(x, i)) for x in xs for i in (0, 1)]
    pairs: list[tuple[str, ...]] = [(literal_vertex(x, 0), literal_vertex(x, 1)) for x in xs]
    for c in F.clauses:
        sides = [falsifier(l) for l in c]
        if len(sides) == 1:
            sides.append(sides[0])
        reach = [v for v, hot in sides if hot]
        cold = [v for v, hot in sides if not hot]
        if len(reach) == 2:
            pairs.append((reach[0], reach[1]) if reach[0] != reach[1] else (s, reach[0]))
        elif len(reach) == 1:
            arcs.append((reach[0], cold[0]))
        else:
            raise ContractError(f"clause {[str(l) for l in c]} is not zero-valid after flipping")
    inst = PairCutInstance(D=Digraph.from_arcs(vertices, arcs), s=s,
                           pairs=tuple(dict.fromkeys(pairs)), k=len(Xs) + k)
    logger.debug("reduce_to_dpc: |X|=%d, %d vertices, %d pairs, k'=%d",
                 len(Xs), len(vertices), len(inst.pairs), inst.k)
    return inst


def lift_dpc_solution(F: Cnf2, X: DeletionSet, Z: Iterable[str]) -> DeletionSet:
    """Deletion set from a pair cut solution of ``reduce_to_dpc(F, X, k)``."""
    cut = set(Z)
    both = {x for x in X.variables
            if literal_vertex(x, 0) in cut and literal_vertex(x, 1) in cut}
    rest = {v for v in F.variables if v not in X.variables and v in cut}
    return DeletionSet(variables=frozenset(both | rest))


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------

def bootstrap_deletion_set(F: Cnf2, k: int, compress_final: bool = True) -> Optional[DeletionSet]:
    """Iterative compression over the variable order; None is a definite NO.

    With ``compress_final=False`` the last step is not compressed, so the
    result may have size k+1.
    """
    X: frozenset[str] = frozenset()
    seen: list[str] = []
    n = len(F.variables)
    for i, v in enumerate(F.variables):
        seen.append(v)
        Fi = F.restricted_to(seen)
        if not DeletionSet(variables=X).is_valid_for(Fi):
            X = X | {v}
        if len(X) <= k or (i == n - 1 and not compress_final):
            continue
        inst = reduce_to_dpc(Fi, DeletionSet(variables=X), k)
        Z = solve_dpc(inst)
        if Z is None:
            logger.info("bootstrap: no deletion set of size %d after %d variables", k, i + 1)
            return None
        X = lift_dpc_solution(Fi, DeletionSet(variables=X), Z).variables
    return DeletionSet(variables=X)


# ---------------------------------------------------------------------------
# Back-encoding and kernel
# ---------------------------------------------------------------------------

def encode_dpc_as_2cnf(inst: PairCutInstance) -> tuple[Cnf2, int]:
    """Vertices become variables, s replicated k+1 times; arcs are implications,
    pairs negative clauses."""
    if inst.pairs and max(len(p) for p in inst.pairs) > 2:
        raise ContractError("only pairs and singletons encode as 2-CNF")
    _, copies = split_source(inst.D, inst.s, inst.k)
    others = [v for v in inst.D.vertices if v != inst.s]

    def sides(v: str) -> list[str]:
        return list(copies) if v == inst.s else [v]

    clauses: list[Clause] = [(Lit(var=c),) for c in copies]
    for u, w in inst.D.distinct_arcs():
        if w == inst.s:
            continue
        for a in sides(u):
            clauses.append((Lit(var=a, positive=False), Lit(var=w)))
    for p in inst.pairs:
        u, w = (p[0], p[0]) if len(p) == 1 else p
        for a in sides(u):
            for b in sides(w):
                if len(p) == 1 or a == b:
                    clauses.append((Lit(var=a, positive=False),))
                else:
                    clauses.append((Lit(var=a, positive=False), Lit(var=b, positive=False)))
    return Cnf2(variables=tuple(copies) + tuple(others), clauses=tuple(clauses)), inst.k


def dummy_no_formula() -> Cnf2:
    return Cnf2.build(["z"], [[("z", True)], [("z", False)]])


def kernelize_a2sat(F: Cnf2, k: int, ctx: MatroidContext) -> A2satKernel:
    """Bootstrap, reduce to pair cut, kernelize that, encode back."""
    X = bootstrap_deletion_set(F, k, compress_final=False)
    if X is None:
        return A2satKernel(formula=dummy_no_formula(), k=0, bootstrap_size=0, trivial=False)
    if len(X) <= k:
        return A2satKernel(formula=Cnf2(variables=()), k=0, bootstrap_size=len(X), trivial=True)
    inst = reduce_to_dpc(F, X, k)
    kernel = kernelize_dpc(inst, ctx)
    formula, k2 = encode_dpc_as_2cnf(kernel)
    logger.info("a2sat kernel: %d -> %d variables, k'=%d, bootstrap |X|=%d",
                len(F.variables), len(formula.variables), k2, len(X))
    return A2satKernel(formula=formula, k=k2, bootstrap_size=len(X),
                       failure_bound=ctx.budget.total)


# ---------------------------------------------------------------------------
# Clause deletion <-> variable deletion
# ---------------------------------------------------------------------------

def variable_to_clause_deletion(F: Cnf2, k: int) -> tuple[Cnf2, int]:
    """x -> p_x, ~x -> ~q_x, gate (~p_x | q_x); other clauses repeated k+1 times."""
    def p(x: str) -> str:
        return f"p_{x}"

    def q(x: str) -> str:
        return f"q_{x}"

    def rewrite(lit: Lit) -> Lit:
        return Lit(var=p(lit.var)) if lit.positive else Lit(var=q(lit.var), positive=False)

    variables = [name for x in F.variables for name in (p(x), q(x))]
    clauses: list[Clause] = [(Lit(var=p(x), positive=False), Lit(var=q(x))) for x in F.variables]
    for c in F.clauses:
        clauses.extend([tuple(rewrite(l) for l in c)] * (k + 1))
    return Cnf2(variables=tuple(variables), clauses=tuple(clauses)), k


def clause_to_variable_deletion(F: Cnf2, k: int) -> tuple[Cnf2, int]:
    """One occurrence variable per literal, k+1 copies per variable tied by equivalences."""
    variables: list[str] = [f"{x}@{c}" for x in F.variables for c in range(k + 1)]
    clauses: list[Clause] = []
    for j, c in enumerate(F.clauses):
        occ = []
        for i, lit in enumerate(c):
            o = f"o{j}_{i}"
            variables.append(o)
            occ.append(Lit(var=o, positive=lit.positive))
            for copy in range(k + 1):
                x = f"{lit.var}@{copy}"
                clauses.append((Lit(var=o, positive=False), Lit(var=x)))
                clauses.append((Lit(var=o), Lit(var=x, positive=False)))
        clauses.append(tuple(occ))
    return Cnf2(variables=tuple(variables), clauses=tuple(clauses)), k


# ---------------------------------------------------------------------------
# Vertex cover transformations
# ---------------------------------------------------------------------------

def _nx_graph(G: Digraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(G.vertices)
    g.add_edges_from(G.edges())
    return g


def maximum_matching_size(G: Digraph) -> int:
    return len(nx.max_weight_matching(_nx_graph(G), maxcardinality=True))


def vertex_cover_lp_halves(G: Digraph) -> int:
    """2 * LP(G): minimum vertex cover of the bipartite double cover (Koenig)."""
    B = nx.Graph()
    left = [(v, 0) for v in G.vertices]
    B.add_nodes_from(left, bipartite=0)
    B.add_nodes_from(((v, 1) for v in G.vertices), bipartite=1)
    for u, w in G.edges():
        B.add_edge((u, 0), (w, 1))
        B.add_edge((w, 0), (u, 1))
    matching = bipartite.hopcroft_karp_matching(B, top_nodes=left)
    cover = bipartite.to_vertex_cover(B, matching, top_nodes=left)
    return len(cover)


def dummy_no_vc() -> VcAboveMatching:
    triangle = Digraph.undirected(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])
    return VcAboveMatching(G=triangle, k=0, matching_size=1, lp_halves=3, known_negative=True)


def reduce_vc_above_lp(G: Digraph, k: int) -> VcAboveMatching:
    """Vertex cover above LP to vertex cover above maximum matching, k' <= 3k+1."""
    if k < 0:
        raise ContractError("k must be non-negative")
    halves = vertex_cover_lp_halves(G)
    m = maximum_matching_size(G)
    lp = Fraction(halves, 2)
    if m < lp - (2 * k + 1):
        logger.info("reduce_vc_above_lp: matching %d too small for LP %s at k=%d", m, lp, k)
        return dummy_no_vc()
    target = math.floor(lp + k)
    return VcAboveMatching(G=G, k=target - m, matching_size=m, lp_halves=halves)


def reduce_vc_konig_deletion(G: Digraph, X: Sequence[str], ell: int) -> VcAboveMatching:
    """Vertex cover of size ell, given X with G - X Koenig, as a matching-above instance."""
    for x in X:
        if not G.has_vertex(x):
            raise ContractError(f"unknown vertex {x!r}")
    rest = maximum_matching_size(G.remove_vertices(X))
    if ell >= rest + len(X):
        return VcAboveMatching(G=Digraph.undirected([], []), k=0, matching_size=0,
                               known_positive=True)
    m = maximum_matching_size(G)
    return VcAboveMatching(G=G, k=ell - m, matching_size=m, lp_halves=vertex_cover_lp_halves(G))
