import functools
import logging
from typing import Any, Dict, List, Optional

import anyio
import numpy as np
from attr import dataclass

from .generator import random_network, random_queries
from .oracle import OracleAnswer, joint_moments, oracle_query
from ..query.engine import QueryResult
from ..query.session import Session
from ..spi_tree.tree import TreeMode
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import SpicError

logger = logging.getLogger(consts.LOGGER_NAME)


@dataclass(frozen=True)
class CaseOutcome:
    seed: int
    query: int
    deviation: float
    error: Optional[str] = None


@dataclass
class CheckReport:
    seeds: int
    nodes: int
    queries: int
    tol: float
    outcomes: List[CaseOutcome]

    @property
    def max_deviation(self) -> float:
        return max((o.deviation for o in self.outcomes if o.error is None), default=0.0)

    @property
    def failures(self) -> List[CaseOutcome]:
        return [o for o in self.outcomes if o.error is not None or not o.deviation <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> Dict[str, Any]:
        return {
            "seeds": self.seeds,
            "nodes": self.nodes,
            "queries": self.queries,
            "cases": len(self.outcomes),
            "tol": self.tol,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
            "failures": [
                {"seed": o.seed, "query": o.query, "deviation": o.deviation, "error": o.error}
                for o in self.failures
            ],
        }


def deviation(result: QueryResult, expected: OracleAnswer) -> float:
    """Largest absolute difference over mean, covariance and links."""
    pairs = [(result.mean, expected.mean), (result.cov, expected.cov)]
    for ext in result.links:
        pairs.append((ext.link, expected.links.get(ext.id, np.zeros_like(ext.link))))
    worst = 0.0
    for got, want in pairs:
        if want.size == 0:
            continue
        if got.shape != want.shape:
            return float("inf")
        worst = max(worst, float(np.max(np.abs(got - want))))
    return worst


def check_case(
        seed: int,
        nodes: int,
        queries: int,
        mode: TreeMode = TreeMode.BUSHY,
        tol: Tolerances = DEFAULT_TOLERANCES,
        fast_path: bool = True,
) -> List[CaseOutcome]:
    """One random network, ``queries`` random queries answered in a shared session."""
    net = random_network(seed, nodes)
    jm = joint_moments(net)
    session = Session(net, mode, tol, fast_path)
    outcomes = []
    for i, query in enumerate(random_queries(seed, net, queries)):
        try:
            session.retract_evidence().add_evidence(query.evidence)
            result = session.ask(query.targets, query.given)
            expected = oracle_query(jm, query.targets, query.given, query.evidence, tol)
            outcomes.append(CaseOutcome(seed, i, deviation(result, expected)))
        except SpicError as e:
            logger.error(f"Check case seed={seed} query={i} failed: {e}")
            outcomes.append(CaseOutcome(seed, i, float("inf"), f"{e.class_label()}: {e}"))
    return outcomes


async def check_async(
        seeds: int,
        nodes: int,
        queries: int,
        check_tol: float = consts.CHECK_TOL,
        workers: int = 4,
        mode: TreeMode = TreeMode.BUSHY,
        tol: Tolerances = DEFAULT_TOLERANCES,
        fast_path: bool = True,
) -> CheckReport:
    limiter = anyio.CapacityLimiter(max(1, workers))
    results: Dict[int, List[CaseOutcome]] = {}

    async def run_seed(seed: int):
        job = functools.partial(check_case, seed, nodes, queries, mode, tol, fast_path)
        results[seed] = await anyio.to_thread.run_sync(job, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for seed in range(seeds):
            tg.start_soon(run_seed, seed)

    outcomes = [o for seed in sorted(results) for o in results[seed]]
    report = CheckReport(seeds=seeds, nodes=nodes, queries=queries, tol=check_tol, outcomes=outcomes)
    logger.info(f"Checked {len(outcomes)} queries, max deviation {report.max_deviation:.3g}")
    return report


def run_check(seeds: int, nodes: int, queries: int, **kwargs) -> CheckReport:
    return anyio.run(functools.partial(check_async, seeds, nodes, queries, **kwargs))


__all__ = ["CaseOutcome", "CheckReport", "deviation", "check_case", "check_async", "run_check"]
