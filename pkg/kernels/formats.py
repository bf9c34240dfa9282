"""
Text file formats.

Graph:      ``digraph n m`` or ``graph n m``, then m lines ``u v`` with 0-based ids.
Vertex set: whitespace-separated ids, any number per line.
Pairs:      one tuple per line, usually ``u v``.
Matroid:    ``matroid <rank> <n> <prime>``, n ground-label lines, rank rows of n decimals.
Compressed pairs: ``dpc <k> <sources>``, one line of source labels, then tuples.
2-CNF:      ``p cnf2 n m``, m clause lines of one or two signed ids ending in 0.
Id map:     ``old new`` per line.

``#`` starts a comment everywhere.  Every parse error names the file and line.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterator, Optional, Sequence

from pydantic import ValidationError

from kernels.errors import FormatError
from kernels.toolkit.a2sat import Cnf2, Lit
from kernels.toolkit.exactfield import FMatrix
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import RepresentedMatroid


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    """(1-based line number, tokens) for non-blank, comment-stripped lines."""
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield number, body.split()


def _int(token: str, path: Optional[str], line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"{what} must be an integer, got {token!r}", path, line) from None


def read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

def parse_graph(text: str, path: Optional[str] = None) -> Digraph:
    rows = list(_lines(text))
    if not rows:
        raise FormatError("empty graph file", path, 1)
    line, head = rows[0]
    if len(head) != 3 or head[0] not in ("digraph", "graph"):
        raise FormatError("header must be 'digraph n m' or 'graph n m'", path, line)
    n = _int(head[1], path, line, "vertex count")
    m = _int(head[2], path, line, "arc count")
    if n < 0 or m < 0:
        raise FormatError("counts must be non-negative", path, line)
    body = rows[1:]
    if len(body) != m:
        where = body[-1][0] if body else line
        raise FormatError(f"expected {m} arc lines, found {len(body)}", path, where)
    pairs = []
    for number, tokens in body:
        if len(tokens) != 2:
            raise FormatError("arc line must be 'u v'", path, number)
        u, v = (_int(t, path, number, "vertex id") for t in tokens)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"vertex id out of range 0..{n - 1}", path, number)
        pairs.append((str(u), str(v)))
    vertices = [str(i) for i in range(n)]
    if head[0] == "graph":
        return Digraph.undirected(vertices, pairs)
    return Digraph.from_arcs(vertices, pairs)


def read_graph(path: str) -> Digraph:
    return parse_graph(read_text(path), path)


def renumber(labels: Sequence[str]) -> dict[str, int]:
    return {v: i for i, v in enumerate(labels)}


def write_graph(G: Digraph, mapping: Optional[dict[str, int]] = None) -> str:
    ids = mapping or renumber(G.vertices)
    if G.directed:
        arcs = G.distinct_arcs()
        head = "digraph"
    else:
        arcs = G.edges()
        head = "graph"
    lines = [f"{head} {len(G.vertices)} {len(arcs)}"]
    lines += [f"{ids[u]} {ids[w]}" for u, w in arcs]
    return "\n".join(lines) + "\n"


def write_id_map(mapping: dict[str, int]) -> str:
    return "".join(f"{old} {new}\n" for old, new in mapping.items())


# ---------------------------------------------------------------------------
# Vertex sets and pairs
# ---------------------------------------------------------------------------

def parse_vertex_set(text: str, path: Optional[str] = None,
                     G: Optional[Digraph] = None) -> list[str]:
    out: list[str] = []
    for number, tokens in _lines(text):
        for t in tokens:
            _int(t, path, number, "vertex id")
            if G is not None and not G.has_vertex(t):
                raise FormatError(f"vertex {t} is not in the graph", path, number)
            out.append(t)
    return list(dict.fromkeys(out))


def read_vertex_set(path: str, G: Optional[Digraph] = None) -> list[str]:
    return parse_vertex_set(read_text(path), path, G)


def parse_pairs(text: str, path: Optional[str] = None,
                G: Optional[Digraph] = None) -> list[tuple[str, ...]]:
    out: list[tuple[str, ...]] = []
    for number, tokens in _lines(text):
        for t in tokens:
            if G is None:
                _int(t, path, number, "vertex id")
            elif not G.has_vertex(t):
                raise FormatError(f"vertex {t} is not in the graph", path, number)
        out.append(tuple(tokens))
    return out


def read_pairs(path: str, G: Optional[Digraph] = None) -> list[tuple[str, ...]]:
    return parse_pairs(read_text(path), path, G)


def write_pairs(pairs: Sequence[Sequence[str]], mapping: Optional[dict[str, int]] = None) -> str:
    def name(v: str) -> str:
        return str(mapping[v]) if mapping is not None else v

    return "".join(" ".join(name(v) for v in p) + "\n" for p in pairs)


def write_vertex_set(vertices: Sequence[str], mapping: Optional[dict[str, int]] = None) -> str:
    names = [str(mapping[v]) if mapping is not None else v for v in vertices]
    return " ".join(names) + "\n"


# ---------------------------------------------------------------------------
# Matroid export
# ---------------------------------------------------------------------------

def write_matroid(M: RepresentedMatroid) -> str:
    rows, n = M.matrix.rows, M.matrix.cols
    lines = [f"matroid {rows} {n} {M.prime}"]
    lines += list(M.ground)
    lines += [" ".join(str(x) for x in row) for row in M.matrix.row_lists()]
    return "\n".join(lines) + "\n"


def parse_matroid(text: str, path: Optional[str] = None) -> RepresentedMatroid:
    rows = list(_lines(text))
    if not rows:
        raise FormatError("empty matroid file", path, 1)
    line, head = rows[0]
    if len(head) != 4 or head[0] != "matroid":
        raise FormatError("header must be 'matroid <rank> <n> <prime>'", path, line)
    r, n, p = (_int(t, path, line, "header field") for t in head[1:])
    if len(rows) != 1 + n + r:
        where = rows[-1][0]
        raise FormatError(f"expected {n} labels and {r} rows, found {len(rows) - 1} lines",
                          path, where)
    labels = []
    for number, tokens in rows[1:1 + n]:
        if len(tokens) != 1:
            raise FormatError("label lines hold exactly one label", path, number)
        labels.append(tokens[0])
    matrix = []
    for number, tokens in rows[1 + n:]:
        if len(tokens) != n:
            raise FormatError(f"matrix row must have {n} entries", path, number)
        values = [_int(t, path, number, "field element") for t in tokens]
        if any(not 0 <= x < p for x in values):
            raise FormatError(f"field element outside 0..{p - 1}", path, number)
        matrix.append(values)
    try:
        return RepresentedMatroid(matrix=FMatrix.from_rows(matrix, p, cols=n), ground=tuple(labels))
    except ValidationError as exc:
        raise FormatError(f"invalid matroid: {exc.errors()[0]['msg']}", path, line) from None


def read_matroid(path: str) -> RepresentedMatroid:
    return parse_matroid(read_text(path), path)


def write_compressed_pairs(k: int, sources: Sequence[str], pairs: Sequence[Sequence[str]]) -> str:
    return f"dpc {k} {len(sources)}\n" + " ".join(sources) + "\n" + write_pairs(pairs)


def parse_compressed_pairs(text: str, path: Optional[str] = None
                           ) -> tuple[int, list[str], list[tuple[str, ...]]]:
    rows = list(_lines(text))
    if len(rows) < 2:
        raise FormatError("expected a 'dpc <k> <sources>' header and a source line", path, 1)
    line, head = rows[0]
    if len(head) != 3 or head[0] != "dpc":
        raise FormatError("header must be 'dpc <k> <sources>'", path, line)
    k = _int(head[1], path, line, "k")
    count = _int(head[2], path, line, "source count")
    src_line, sources = rows[1]
    if len(sources) != count:
        raise FormatError(f"expected {count} source labels", path, src_line)
    return k, sources, [tuple(tokens) for _, tokens in rows[2:]]


def read_compressed_pairs(path: str) -> tuple[int, list[str], list[tuple[str, ...]]]:
    return parse_compressed_pairs(read_text(path), path)


# ---------------------------------------------------------------------------
# 2-CNF
# ---------------------------------------------------------------------------

def parse_cnf2(text: str, path: Optional[str] = None) -> Cnf2:
    rows = list(_lines(text))
    if not rows:
        raise FormatError("empty cnf2 file", path, 1)
    line, head = rows[0]
    if len(head) != 4 or head[:2] != ["p", "cnf2"]:
        raise FormatError("header must be 'p cnf2 n m'", path, line)
    n = _int(head[2], path, line, "variable count")
    m = _int(head[3], path, line, "clause count")
    body = rows[1:]
    if len(body) != m:
        where = body[-1][0] if body else line
        raise FormatError(f"expected {m} clause lines, found {len(body)}", path, where)
    clauses = []
    for number, tokens in body:
        values = [_int(t, path, number, "literal") for t in tokens]
        if not values or values[-1] != 0:
            raise FormatError("clause line must end with 0", path, number)
        lits = values[:-1]
        if not 1 <= len(lits) <= 2 or 0 in lits:
            raise FormatError("clause must hold one or two nonzero literals", path, number)
        if any(abs(x) > n for x in lits):
            raise FormatError(f"variable out of range 1..{n}", path, number)
        clauses.append(tuple(Lit(var=str(abs(x)), positive=x > 0) for x in lits))
    return Cnf2(variables=tuple(str(i) for i in range(1, n + 1)), clauses=tuple(clauses))


def read_cnf2(path: str) -> Cnf2:
    return parse_cnf2(read_text(path), path)


def write_cnf2(F: Cnf2) -> tuple[str, dict[str, int]]:
    """Variables renumbered 1..n in their order; returns the text and the map."""
    ids = {v: i for i, v in enumerate(F.variables, start=1)}
    lines = [f"p cnf2 {len(F.variables)} {len(F.clauses)}"]
    for c in F.clauses:
        lits = [str(ids[l.var] if l.positive else -ids[l.var]) for l in c]
        lines.append(" ".join(lits + ["0"]))
    return "\n".join(lines) + "\n", ids
