"""Seeded random instances for sweeps (selftest and the test suites)."""
from __future__ import annotations

import numpy as np

from kernels.toolkit.a2sat import Cnf2, Lit
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.mwc import MulticutInstance, MwcInstance
from kernels.toolkit.paircut import PairCutInstance


def _labels(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def random_digraph(rng: np.random.Generator, n: int, density: float = 0.3) -> Digraph:
    vs = _labels(n)
    arcs = [(u, w) for u in vs for w in vs if u != w and rng.random() < density]
    return Digraph.from_arcs(vs, arcs)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.35) -> Digraph:
    vs = _labels(n)
    edges = [(vs[i], vs[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Digraph.undirected(vs, edges)


def pick(rng: np.random.Generator, items: list[str], count: int) -> list[str]:
    count = min(count, len(items))
    idx = sorted(rng.choice(len(items), size=count, replace=False).tolist())
    return [items[i] for i in idx]


def random_dpc(rng: np.random.Generator, n: int, k: int, pair_count: int = 4,
               q: int = 2, density: float = 0.3, source_rate: float = 0.0) -> PairCutInstance:
    """Source "0"; each tuple member becomes the source with probability ``source_rate``."""
    D = random_digraph(rng, n, density)
    s, others = D.vertices[0], list(D.vertices[1:])
    pairs = set()
    for _ in range(pair_count):
        p = pick(rng, others, q)
        if source_rate > 0:
            p = [s if rng.random() < source_rate else u for u in p]
        pairs.add(tuple(p))
    return PairCutInstance(D=D, s=s, pairs=tuple(sorted(pairs)), k=k)


def random_mwc(rng: np.random.Generator, n: int, k: int, terminals: int = 3,
               deletable: bool = False, density: float = 0.35) -> MwcInstance:
    G = random_graph(rng, n, density)
    T = pick(rng, list(G.vertices), terminals)
    if not deletable:
        # terminals pairwise non-adjacent
        edges = [e for e in G.edges() if not (e[0] in T and e[1] in T)]
        G = Digraph.undirected(G.vertices, edges)
    return MwcInstance(G=G, terminals=tuple(T), k=k, deletable_terminals=deletable)


def random_multicut(rng: np.random.Generator, n: int, k: int, pair_count: int = 2,
                    density: float = 0.35) -> MulticutInstance:
    G = random_graph(rng, n, density)
    members = pick(rng, list(G.vertices), 2 * pair_count)
    pairs = tuple((members[2 * i], members[2 * i + 1]) for i in range(len(members) // 2))
    edges = [e for e in G.edges() if not any(set(e) == set(p) for p in pairs)]
    return MulticutInstance(G=Digraph.undirected(G.vertices, edges), pairs=pairs, k=k)


def random_cnf2(rng: np.random.Generator, n: int, m: int, unit_rate: float = 0.15) -> Cnf2:
    vs = [f"x{i}" for i in range(n)]
    clauses = []
    for _ in range(m):
        width = 1 if rng.random() < unit_rate else 2
        chosen = pick(rng, vs, width)
        clauses.append(tuple(Lit(var=v, positive=bool(rng.random() < 0.5)) for v in chosen))
    return Cnf2(variables=tuple(vs), clauses=tuple(clauses))
