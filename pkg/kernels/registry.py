"""
Command registry: schema definitions and dispatcher.

Every CLI subcommand is registered here.  ``COMMAND_DEFINITIONS`` lists each
command with a description and a JSON input schema generated from its
pydantic input model; ``dispatch_command()`` validates a payload and runs the
handler, returning a ``CommandResult`` (stdout lines, the summary value,
the failure bound, and any artifacts keyed by file suffix).
"""
from __future__ import annotations

from typing import Any, Callable, Literal, Optional

from pydantic import BaseModel, Field, ValidationError

from kernels import formats
from kernels.errors import ConfigurationError, ContractError, FormatError
from kernels.settings import get_settings
from kernels.toolkit.a2sat import (
    clause_to_variable_deletion,
    is_satisfiable_2sat,
    kernelize_a2sat,
    reduce_vc_above_lp,
    variable_to_clause_deletion,
)
from kernels.toolkit.cutcover import cut_covering_set, multiway_cover, terminal_cut_cover
from kernels.toolkit.exactfield import FieldConfig
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import MatroidContext
from kernels.toolkit.mwc import (
    MulticutInstance,
    MwcInstance,
    kernelize_dtmwc,
    kernelize_multicut,
    kernelize_smwc,
)
from kernels.toolkit.oracle import (
    OracleBudget,
    brute_a2sat,
    brute_dpc,
    brute_multicut,
    brute_multiway_cut,
    brute_vertex_cover,
)
from kernels.toolkit.paircut import (
    CompressedDPC,
    PairCutInstance,
    SolverStats,
    compress_dpc,
    decide_compressed,
    kernelize_dpc,
    solve_dpc,
)


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

class CommandResult(BaseModel):
    answer: Optional[str] = Field(None, description="YES / NO style answer, when the command decides")
    size: Optional[int] = Field(None, description="Size figure, when the command shrinks or encodes")
    failprob: float = Field(0.0, description="Cumulative failure-probability upper bound")
    seed: int = 0
    lines: list[str] = Field(default_factory=list, description="Human-readable stdout lines")
    artifacts: dict[str, str] = Field(default_factory=dict, description="File suffix -> text")
    exit_code: int = 0

    def summary_line(self) -> str:
        value = self.answer if self.answer is not None else str(self.size)
        return f"RESULT {value} FAILPROB {self.failprob:.3e} SEED {self.seed}"


class RunOptions(BaseModel):
    seed: Optional[int] = Field(None, ge=0, lt=1 << 64, description="Overrides KERNELS_SEED")
    prime: Optional[int] = Field(None, description="Overrides KERNELS_PRIME")


class DpcInput(RunOptions):
    graph: str = Field(..., description="Digraph file")
    pairs: str = Field(..., description="Pairs file, one tuple per line")
    source: str = Field("0", description="Source vertex id")
    k: int = Field(..., ge=0)


class CompressInput(DpcInput):
    epsilon: Optional[float] = Field(None, gt=0.0, lt=1.0, description="Failure target")


class DecideInput(BaseModel):
    matroid: str = Field(..., description="Matroid export written by compress-dpc")
    pairs: str = Field(..., description="Compressed pairs file written by compress-dpc")


class CoverCutInput(RunOptions):
    graph: str
    sources: str = Field(..., description="Vertex-set file")
    sinks: str = Field(..., description="Vertex-set file")


class CoverTerminalInput(RunOptions):
    graph: str
    terminals: str = Field(..., description="Vertex-set file")


class CoverMultiwayInput(CoverTerminalInput):
    parts: int = Field(..., ge=1, description="Largest partition size s")


class MwcInput(RunOptions):
    graph: str = Field(..., description="Undirected graph file")
    terminals: str = Field(..., description="Vertex-set file")
    k: int = Field(..., ge=0)


class SmwcInput(MwcInput):
    parts: Optional[int] = Field(None, ge=1, description="Terminal bound s (default |T|)")


class MulticutInput(RunOptions):
    graph: str
    pairs: str
    k: int = Field(..., ge=0)


class A2satInput(RunOptions):
    cnf2: str
    k: int = Field(..., ge=0)
    clause_form: bool = Field(False, description="k counts deleted clauses instead of variables")


class VclpInput(BaseModel):
    graph: str
    k: int = Field(..., ge=0)


class Solve2satInput(BaseModel):
    cnf2: str


class OracleInput(BaseModel):
    problem: Literal["dpc", "mwc", "dtmwc", "multicut", "a2sat", "vc"]
    files: list[str] = Field(..., min_length=1)
    k: int = Field(0, ge=0)
    source: str = "0"


class SelftestInput(BaseModel):
    quick: bool = False
    seed: Optional[int] = Field(None, ge=0, lt=1 << 64)


def _pydantic_to_input_schema(model_cls) -> dict:
    """Convert a pydantic model to a JSON input_schema dict."""
    schema = model_cls.model_json_schema()
    return {
        "type": "object",
        "properties": schema.get("properties", {}),
        "required": schema.get("required", []),
    }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _seed(opts: BaseModel) -> int:
    """--seed when the command takes one, KERNELS_SEED otherwise."""
    override = getattr(opts, "seed", None)
    return get_settings().seed if override is None else override


def _context(opts: RunOptions) -> tuple[MatroidContext, int]:
    cfg = get_settings()
    seed = _seed(opts)
    prime = cfg.prime if opts.prime is None else opts.prime
    try:
        FieldConfig(prime=prime, seed=seed)
    except ValidationError as exc:
        raise ConfigurationError(f"unusable prime {prime}: {exc.errors()[0]['msg']}") from None
    return MatroidContext.from_seed(seed, prime), seed


def _build(model_cls, **values):
    """Instantiate a domain model, turning validation failures into contract errors."""
    try:
        return model_cls(**values)
    except ValidationError as exc:
        raise ContractError(f"{model_cls.__name__}: {exc.errors()[0]['msg']}") from None


def _ids(vertices, G: Digraph) -> list[str]:
    return sorted(vertices, key=lambda v: G.index.get(v, len(G.index)))


def _yes_no(flag: bool) -> str:
    return "YES" if flag else "NO"


def _kernel_graph_artifacts(G: Digraph) -> tuple[dict[str, int], dict[str, str]]:
    mapping = formats.renumber(G.vertices)
    return mapping, {".graph": formats.write_graph(G, mapping), ".map": formats.write_id_map(mapping)}


def _read_dpc(inp: DpcInput) -> PairCutInstance:
    G = formats.read_graph(inp.graph)
    pairs = formats.read_pairs(inp.pairs, G)
    return _build(PairCutInstance, D=G, s=inp.source, pairs=tuple(pairs), k=inp.k)


def _read_mwc(inp: MwcInput, deletable: bool) -> MwcInstance:
    G = formats.read_graph(inp.graph)
    T = formats.read_vertex_set(inp.terminals, G)
    return _build(MwcInstance, G=G, terminals=tuple(T), k=inp.k, deletable_terminals=deletable)


def _read_multicut(graph: str, pairs_path: str, k: int) -> MulticutInstance:
    G = formats.read_graph(graph)
    pairs = formats.read_pairs(pairs_path, G)
    if any(len(p) != 2 for p in pairs):
        raise FormatError("multicut pairs must have exactly two members", pairs_path)
    return _build(MulticutInstance, G=G, pairs=tuple(pairs), k=k)


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------

def _solve_dpc(inp: DpcInput) -> CommandResult:
    inst = _read_dpc(inp)
    stats = SolverStats()
    Z = solve_dpc(inst, stats)
    seed = _seed(inp)
    lines = [f"leaves {stats.leaves}"]
    artifacts = {}
    if Z is not None:
        witness = _ids(Z, inst.D)
        lines.append("witness " + " ".join(witness))
        artifacts[".witness"] = formats.write_vertex_set(witness)
    return CommandResult(answer=_yes_no(Z is not None), seed=seed, lines=lines, artifacts=artifacts)


def _kernel_dpc(inp: DpcInput) -> CommandResult:
    inst = _read_dpc(inp)
    ctx, seed = _context(inp)
    kern = kernelize_dpc(inst, ctx)
    mapping, artifacts = _kernel_graph_artifacts(kern.D)
    artifacts[".pairs"] = formats.write_pairs(kern.pairs, mapping)
    lines = [
        f"vertices {len(inst.D.vertices)} -> {len(kern.D.vertices)}",
        f"pairs {len(inst.pairs)} -> {len(kern.pairs)}",
        f"source {mapping[kern.s]}",
        f"k {kern.k}",
    ]
    return CommandResult(size=len(kern.D.vertices), failprob=ctx.budget.total, seed=seed,
                         lines=lines, artifacts=artifacts)


def _compress_dpc(inp: CompressInput) -> CommandResult:
    inst = _read_dpc(inp)
    ctx, seed = _context(inp)
    epsilon = get_settings().epsilon if inp.epsilon is None else inp.epsilon
    c = compress_dpc(inst, epsilon, ctx)
    artifacts = {
        ".matroid": formats.write_matroid(c.gammoid_rep),
        ".pairs": formats.write_compressed_pairs(c.k, c.sources, c.pairs),
    }
    lines = [
        f"columns {len(c.gammoid_rep.ground)}",
        f"rank {c.gammoid_rep.matrix.rows}",
        f"pairs {len(inst.pairs)} -> {len(c.pairs)}",
        f"prime {c.gammoid_rep.prime}",
        f"bits {c.bits}",
    ]
    return CommandResult(size=c.bits, failprob=c.failure_bound, seed=seed,
                         lines=lines, artifacts=artifacts)


def _decide_compressed(inp: DecideInput) -> CommandResult:
    M = formats.read_matroid(inp.matroid)
    k, sources, pairs = formats.read_compressed_pairs(inp.pairs)
    try:
        c = CompressedDPC(gammoid_rep=M, pairs=tuple(pairs), k=k, sources=tuple(sources))
    except ValidationError as exc:
        raise FormatError(f"pairs do not match the matroid: {exc.errors()[0]['msg']}",
                          inp.pairs) from None
    stats = SolverStats()
    answer = decide_compressed(c, stats)
    return CommandResult(answer=_yes_no(answer), seed=_seed(inp),
                         lines=[f"leaves {stats.leaves}"])


def _cover_cut(inp: CoverCutInput) -> CommandResult:
    G = formats.read_graph(inp.graph)
    S = formats.read_vertex_set(inp.sources, G)
    T = formats.read_vertex_set(inp.sinks, G)
    ctx, seed = _context(inp)
    res = cut_covering_set(G, S, T, ctx)
    _, artifacts = _kernel_graph_artifacts(res.reduced_graph)
    cover = _ids(res.Z, G)
    artifacts[".cover"] = formats.write_vertex_set(cover)
    lines = [f"Z {' '.join(cover)}", f"iterations {res.iterations}"]
    return CommandResult(size=len(res.Z), failprob=res.failure_budget, seed=seed,
                         lines=lines, artifacts=artifacts)


def _cover_terminal(inp: CoverTerminalInput) -> CommandResult:
    G = formats.read_graph(inp.graph)
    X = formats.read_vertex_set(inp.terminals, G)
    ctx, seed = _context(inp)
    Z = _ids(terminal_cut_cover(G, X, ctx), G)
    return CommandResult(size=len(Z), failprob=ctx.budget.total, seed=seed,
                         lines=[f"Z {' '.join(Z)}"],
                         artifacts={".cover": formats.write_vertex_set(Z)})


def _cover_multiway(inp: CoverMultiwayInput) -> CommandResult:
    G = formats.read_graph(inp.graph)
    X = formats.read_vertex_set(inp.terminals, G)
    ctx, seed = _context(inp)
    res = multiway_cover(G, X, inp.parts, ctx)
    _, artifacts = _kernel_graph_artifacts(res.reduced_graph)
    cover = _ids(res.Z, G)
    artifacts[".cover"] = formats.write_vertex_set(cover)
    lines = [f"Z {' '.join(cover)}", f"iterations {res.iterations}"]
    return CommandResult(size=len(res.Z), failprob=res.failure_budget, seed=seed,
                         lines=lines, artifacts=artifacts)


def _mwc_result(inst: MwcInstance, out: MwcInstance, ctx: MatroidContext, seed: int) -> CommandResult:
    if out.known_negative:
        return CommandResult(answer="NO", failprob=ctx.budget.total, seed=seed,
                             lines=["terminal reduction settled the instance"])
    mapping, artifacts = _kernel_graph_artifacts(out.G)
    artifacts[".terminals"] = formats.write_vertex_set(list(out.terminals), mapping)
    lines = [
        f"vertices {len(inst.G.vertices)} -> {len(out.G.vertices)}",
        f"terminals {len(inst.terminals)} -> {len(out.terminals)}",
        f"k {inst.k} -> {out.k}",
    ]
    return CommandResult(size=len(out.G.vertices), failprob=ctx.budget.total, seed=seed,
                         lines=lines, artifacts=artifacts)


def _kernel_dtmwc(inp: MwcInput) -> CommandResult:
    inst = _read_mwc(inp, deletable=True)
    ctx, seed = _context(inp)
    return _mwc_result(inst, kernelize_dtmwc(inst, ctx), ctx, seed)


def _kernel_smwc(inp: SmwcInput) -> CommandResult:
    inst = _read_mwc(inp, deletable=False)
    ctx, seed = _context(inp)
    s = inp.parts if inp.parts is not None else max(1, len(inst.terminals))
    return _mwc_result(inst, kernelize_smwc(inst, s, ctx), ctx, seed)


def _kernel_multicut(inp: MulticutInput) -> CommandResult:
    inst = _read_multicut(inp.graph, inp.pairs, inp.k)
    ctx, seed = _context(inp)
    out = kernelize_multicut(inst, ctx)
    mapping, artifacts = _kernel_graph_artifacts(out.G)
    artifacts[".pairs"] = formats.write_pairs(out.pairs, mapping)
    lines = [f"vertices {len(inst.G.vertices)} -> {len(out.G.vertices)}", f"k {out.k}"]
    return CommandResult(size=len(out.G.vertices), failprob=ctx.budget.total, seed=seed,
                         lines=lines, artifacts=artifacts)


def _kernel_a2sat(inp: A2satInput) -> CommandResult:
    F = formats.read_cnf2(inp.cnf2)
    ctx, seed = _context(inp)
    work, k = (clause_to_variable_deletion(F, inp.k) if inp.clause_form else (F, inp.k))
    kern = kernelize_a2sat(work, k, ctx)
    formula, k_out = kern.formula, kern.k
    if inp.clause_form:
        formula, k_out = variable_to_clause_deletion(formula, k_out)
    text, ids = formats.write_cnf2(formula)
    lines = [
        f"variables {len(F.variables)} -> {len(formula.variables)}",
        f"clauses {len(F.clauses)} -> {len(formula.clauses)}",
        f"k {k_out}",
        f"bootstrap {kern.bootstrap_size}",
    ]
    answer = None if kern.trivial is None else _yes_no(kern.trivial)
    return CommandResult(answer=answer, size=len(formula.variables), failprob=kern.failure_bound,
                         seed=seed, lines=lines,
                         artifacts={".cnf2": text, ".map": formats.write_id_map(ids)})


def _reduce_vclp(inp: VclpInput) -> CommandResult:
    G = formats.read_graph(inp.graph)
    out = reduce_vc_above_lp(G, inp.k)
    seed = _seed(inp)
    if out.known_negative:
        return CommandResult(answer="NO", seed=seed, lines=["matching too small for the LP value"])
    lines = [f"lp {out.lp_halves / 2:g}", f"matching {out.matching_size}", f"k {inp.k} -> {out.k}"]
    _, artifacts = _kernel_graph_artifacts(out.G)
    return CommandResult(size=out.k, seed=seed, lines=lines, artifacts=artifacts)


def _solve_2sat(inp: Solve2satInput) -> CommandResult:
    F = formats.read_cnf2(inp.cnf2)
    assignment = is_satisfiable_2sat(F)
    lines = []
    if assignment is not None:
        lits = [v if assignment[v] else f"-{v}" for v in F.variables]
        lines.append("v " + " ".join(lits + ["0"]))
    return CommandResult(answer=_yes_no(assignment is not None), seed=_seed(inp),
                         lines=lines)


def _oracle(inp: OracleInput) -> CommandResult:
    budget = OracleBudget.from_settings()
    need = {"dpc": 2, "mwc": 2, "dtmwc": 2, "multicut": 2, "a2sat": 1, "vc": 1}[inp.problem]
    if len(inp.files) != need:
        raise ContractError(f"oracle {inp.problem} takes {need} file(s)")
    witness: Optional[list[str]]
    if inp.problem == "dpc":
        dpc = _read_dpc(DpcInput(graph=inp.files[0], pairs=inp.files[1], source=inp.source, k=inp.k))
        found = brute_dpc(dpc, budget)
        witness = None if found is None else _ids(found, dpc.D)
    elif inp.problem in ("mwc", "dtmwc"):
        deletable = inp.problem == "dtmwc"
        mwc = _read_mwc(MwcInput(graph=inp.files[0], terminals=inp.files[1], k=inp.k), deletable)
        found = brute_multiway_cut(mwc.G, mwc.terminals, inp.k, deletable, budget)
        witness = None if found is None else _ids(found, mwc.G)
    elif inp.problem == "multicut":
        mc = _read_multicut(inp.files[0], inp.files[1], inp.k)
        found = brute_multicut(mc.G, mc.pairs, inp.k, budget)
        witness = None if found is None else _ids(found, mc.G)
    elif inp.problem == "a2sat":
        F = formats.read_cnf2(inp.files[0])
        found = brute_a2sat(F, inp.k, budget)
        witness = None if found is None else sorted(found, key=F.variables.index)
    else:
        G = formats.read_graph(inp.files[0])
        size = brute_vertex_cover(G)
        return CommandResult(answer=_yes_no(size <= inp.k), seed=_seed(inp),
                             lines=[f"vertex cover {size}"])
    lines = [] if witness is None else ["witness " + " ".join(witness)]
    return CommandResult(answer=_yes_no(witness is not None), seed=_seed(inp), lines=lines)


def _selftest(inp: SelftestInput) -> CommandResult:
    from kernels.selftest import render_report, run_checks

    seed = _seed(inp)
    runs = run_checks(quick=inp.quick, seed=seed)
    failed = [r for r in runs if r.status != "PASS"]
    return CommandResult(answer="FAIL" if failed else "PASS", seed=seed,
                         lines=render_report(runs).splitlines(),
                         exit_code=1 if failed else 0)


# ---------------------------------------------------------------------------
# Table
# ---------------------------------------------------------------------------

_COMMANDS: list[tuple[str, type[BaseModel], Callable[[Any], CommandResult], str]] = [
    ("solve-dpc", DpcInput, _solve_dpc,
     "Decide digraph pair cut exactly by closest-cut branching; writes the cut as a witness."),
    ("kernel-dpc", DpcInput, _kernel_dpc,
     "Shrink a pair cut instance to representative pairs plus a cut-covering vertex set."),
    ("compress-dpc", CompressInput, _compress_dpc,
     "Export representative pairs and the gammoid over source copies and pair members."),
    ("decide-compressed", DecideInput, _decide_compressed,
     "Decide a compressed pair cut instance from rank queries alone."),
    ("cover-cut", CoverCutInput, _cover_cut,
     "Vertex set containing a minimum (A, B)-cut for every A within sources, B within sinks."),
    ("cover-terminal", CoverTerminalInput, _cover_terminal,
     "Vertex set containing a minimum (S, T)-cut of G - R for all S, T, R within the terminals."),
    ("cover-multiway", CoverMultiwayInput, _cover_multiway,
     "Vertex set containing a minimum multiway cut for every partition into at most s parts."),
    ("kernel-dtmwc", MwcInput, _kernel_dtmwc,
     "Kernel for multiway cut with deletable terminals."),
    ("kernel-smwc", SmwcInput, _kernel_smwc,
     "Kernel for multiway cut with at most s undeletable terminals."),
    ("kernel-multicut", MulticutInput, _kernel_multicut,
     "Kernel for multicut with a bounded number of pairs."),
    ("kernel-a2sat", A2satInput, _kernel_a2sat,
     "Kernel for Almost 2-SAT, variable or clause deletion."),
    ("reduce-vclp", VclpInput, _reduce_vclp,
     "Vertex cover above LP to vertex cover above maximum matching."),
    ("solve-2sat", Solve2satInput, _solve_2sat,
     "Decide a 2-CNF and print a satisfying assignment."),
    ("oracle", OracleInput, _oracle,
     "Brute-force answer for a small instance."),
    ("selftest", SelftestInput, _selftest,
     "Run the seeded check suites and print a Markdown report."),
]

COMMAND_DEFINITIONS: list[dict] = [
    {"name": name, "description": desc, "input_schema": _pydantic_to_input_schema(model)}
    for name, model, _, desc in _COMMANDS
]

_DISPATCH_TABLE: dict[str, tuple[type[BaseModel], Callable[[Any], CommandResult]]] = {
    name: (model, handler) for name, model, handler, _ in _COMMANDS
}


def dispatch_command(name: str, payload: dict) -> CommandResult:
    """
    Execute a registered command by name.

    Args:
        name: Command name (must match an entry in COMMAND_DEFINITIONS).
        payload: Raw input dict; validated against the command's input model.

    Returns:
        The command's CommandResult.

    Raises:
        ValueError: If name is not registered.
        ContractError: If the payload does not validate.
    """
    if name not in _DISPATCH_TABLE:
        available = list(_DISPATCH_TABLE)
        raise ValueError(f"Unknown command: {name!r}. Available: {available}")
    model, handler = _DISPATCH_TABLE[name]
    return handler(_build(model, **payload))
