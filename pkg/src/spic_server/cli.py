"""
Command implementations behind the ``spic-mcp-server`` subcommands.

``run`` never raises for domain errors: it returns the exit status together
with the text to print, so the click layer stays a thin shell.
"""
import json
import logging
from typing import Any, Dict, List, Optional, Tuple

from attr import dataclass, field

from .config.config import DEFAULT_TOLERANCES, Tolerances
from .consts import consts
from .core.network.network import Network, parse_network
from .core.network.service import describe
from .core.oracle.check import CheckReport, run_check
from .core.oracle.generator import random_queries
from .core.query.engine import Query, QueryResult
from .core.query.render import (
    evidence_from_mapping,
    parse_evidence_text,
    parse_id_list,
    render_human,
    result_document,
)
from .core.query.session import Session
from .core.spi_tree.tree import TreeMode, build_forest, tree_report
from .errors import EXIT_OK, CheckFailure, QueryError, SpicError

logger = logging.getLogger(consts.LOGGER_NAME)

SUBCOMMANDS = ("validate", "tree", "query", "check", "bench")


@dataclass
class RunConfig:
    subcommand: str
    network: Optional[str] = None
    mode: str = consts.TREE_MODE_BUSHY
    targets: List[str] = field(factory=list)
    given: List[str] = field(factory=list)
    evidence: str = ""
    tolerances: Tolerances = DEFAULT_TOLERANCES
    check_tol: float = consts.CHECK_TOL
    fast_path: bool = True
    seeds: int = 100
    nodes: int = 12
    queries: int = 5
    seed: int = 0
    random: Optional[int] = None
    queries_file: Optional[str] = None
    workers: int = 4
    output_format: str = consts.OUTPUT_HUMAN

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise QueryError(f"unknown subcommand {self.subcommand!r}")
        if self.subcommand in ("validate", "tree", "query", "bench") and not self.network:
            raise QueryError(f"{self.subcommand} needs a network file")
        if self.subcommand == "query" and not self.targets:
            raise QueryError("query needs at least one --target")
        if self.subcommand == "bench" and (self.random is None) == (self.queries_file is None):
            raise QueryError("bench needs exactly one of --queries FILE or --random K")
        if not self.check_tol > 0:
            raise QueryError("--tol must be positive")
        if min(self.seeds, self.nodes, self.queries) < 1:
            raise QueryError("--seeds, --nodes and --queries must be positive")


@dataclass(frozen=True)
class RunOutcome:
    status: int
    document: str
    error: bool = False


def run(config: RunConfig) -> RunOutcome:
    try:
        config.validate()
        handler = _HANDLERS[config.subcommand]
        return RunOutcome(EXIT_OK, handler(config))
    except CheckFailure as e:
        return RunOutcome(e.exit_status, str(e))
    except SpicError as e:
        logger.debug(f"{config.subcommand} failed", exc_info=True)
        return RunOutcome(e.exit_status, f"error: {e.class_label()}: {e}", error=True)
    except OSError as e:
        return RunOutcome(1, f"error: IOError: {e}", error=True)


def _dumps(document: Any) -> str:
    return json.dumps(document, indent=2)


def _load_network(config: RunConfig) -> Network:
    with open(config.network, "rb") as f:
        return parse_network(f.read(), config.tolerances)


def emit_result(result: QueryResult, fmt: str = consts.OUTPUT_MACHINE) -> str:
    if fmt == consts.OUTPUT_MACHINE:
        return _dumps(result_document(result))
    return render_human(result)


def _validate(config: RunConfig) -> str:
    report = describe(_load_network(config))
    if config.output_format == consts.OUTPUT_MACHINE:
        return _dumps(report)
    lines = [
        f"valid network: {report['nodes']} nodes, total dimension {report['total_dim']}",
        f"order: {' '.join(report['order'])}",
        f"components: {len(report['components'])}",
    ]
    return "\n".join(lines)


def _tree(config: RunConfig) -> str:
    net = _load_network(config)
    report = tree_report(net, build_forest(net, TreeMode(config.mode)))
    if config.output_format == consts.OUTPUT_MACHINE:
        return _dumps(report)
    lines = [f"components: {report['components']}"]
    for tree in report["trees"]:
        mode = tree["mode"]
        if tree["requested_mode"] != mode:
            mode += f" (fallback from {tree['requested_mode']})"
        lines.append(f"root {tree['root']}  mode {mode}  constraint {'ok' if tree['constraint_ok'] else 'VIOLATED'}")
        lines.append("  mcs: " + " ".join(f"{s['id']}({s['visited_neighbours']})" for s in tree["mcs_order"]))
        for node, parent in tree["parent"].items():
            if parent is not None:
                lines.append(f"  {parent} -> {node}")
        for u, v in tree["violations"]:
            lines.append(f"  violation: {u} -> {v}")
    return "\n".join(lines)


def _query(config: RunConfig) -> str:
    net = _load_network(config)
    session = Session(net, TreeMode(config.mode), config.tolerances, config.fast_path)
    session.add_evidence(parse_evidence_text(config.evidence))
    result = session.ask(config.targets, config.given)
    return emit_result(result, config.output_format)


def _check(config: RunConfig) -> str:
    report = run_check(
        config.seeds,
        config.nodes,
        config.queries,
        check_tol=config.check_tol,
        workers=config.workers,
        mode=TreeMode(config.mode),
        tol=config.tolerances,
        fast_path=config.fast_path,
    )
    text = _dumps(report.as_dict()) if config.output_format == consts.OUTPUT_MACHINE else _check_summary(report)
    if not report.passed:
        raise CheckFailure(text)
    return text


def _check_summary(report: CheckReport) -> str:
    relation = "≤" if report.passed else ">"
    lines = [
        f"checked {len(report.outcomes)} queries on {report.seeds} networks of {report.nodes} nodes",
        f"max deviation {report.max_deviation:.3e} {relation} {report.tol:g}",
    ]
    for o in report.failures:
        lines.append(f"  FAIL seed {o.seed} query {o.query}: {o.error or f'deviation {o.deviation:.3e}'}")
    return "\n".join(lines)


def _bench_queries(config: RunConfig, net: Network) -> List[Query]:
    if config.random is not None:
        return random_queries(config.seed, net, config.random)
    with open(config.queries_file, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise QueryError(f"query file is not valid JSON: {e}") from e
    if not isinstance(raw, list):
        raise QueryError("query file must hold a JSON list of queries")
    out = []
    for item in raw:
        if not isinstance(item, dict) or "target" not in item:
            raise QueryError(f"query entry {item!r} has no target")
        target = item["target"]
        given = item.get("given", [])
        out.append(Query.create(
            parse_id_list(target) if isinstance(target, str) else target,
            parse_id_list(given) if isinstance(given, str) else given,
            evidence_from_mapping(item.get("evidence", {})),
        ))
    return out


def _bench(config: RunConfig) -> str:
    net = _load_network(config)
    session = Session(net, TreeMode(config.mode), config.tolerances, config.fast_path)
    rows: List[Dict[str, Any]] = []
    for i, query in enumerate(_bench_queries(config, net)):
        session.retract_evidence().add_evidence(query.evidence)
        diag = session.ask(query.targets, query.given).diagnostics
        rows.append({
            "query": i,
            "targets": list(query.targets),
            "given": list(query.given),
            "evidence": sorted(query.evidence),
            "multiplications": diag.multiplications,
            "integrations": diag.integrations,
            "cache_hits": diag.cache_hits,
            "requests": diag.requests,
            "cache_size": diag.cache_size,
        })
    if config.output_format == consts.OUTPUT_MACHINE:
        return _dumps({"queries": rows})
    headers = ["#", "targets", "mult", "integ", "hits", "requests", "cache"]
    table: List[Tuple[str, ...]] = [tuple(headers)]
    for row in rows:
        table.append((
            str(row["query"]), ",".join(row["targets"]), str(row["multiplications"]),
            str(row["integrations"]), str(row["cache_hits"]), str(row["requests"]), str(row["cache_size"]),
        ))
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in table)


_HANDLERS = {
    "validate": _validate,
    "tree": _tree,
    "query": _query,
    "check": _check,
    "bench": _bench,
}


__all__ = ["RunConfig", "RunOutcome", "run", "emit_result", "SUBCOMMANDS"]
