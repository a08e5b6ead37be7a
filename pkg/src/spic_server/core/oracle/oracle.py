"""
Dense reference engine: the full joint Gaussian of a network, built with
triangular solves, and plain Schur-complement conditioning on top of it.
"""
import logging
from types import MappingProxyType
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from attr import dataclass
from scipy import linalg

from ..gaussian.repr import Member
from ..gaussian.utils import frozen, is_positive_definite, symmetrize
from ..network.network import Network
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import DegenerateEvidence, ShapeError, UnknownNode

logger = logging.getLogger(consts.LOGGER_NAME)


@dataclass(frozen=True, eq=False)
class JointMoments:
    layout: Tuple[Member, ...]
    mean: np.ndarray
    cov: np.ndarray

    def offsets(self) -> Dict[str, slice]:
        out, start = {}, 0
        for m in self.layout:
            out[m.id] = slice(start, start + m.dim)
            start += m.dim
        return out

    def indices(self, ids: Iterable[str]) -> np.ndarray:
        offsets = self.offsets()
        parts = [np.arange(offsets[i].start, offsets[i].stop) for i in ids]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)


@dataclass(frozen=True, eq=False)
class OracleAnswer:
    targets: Tuple[str, ...]
    mean: np.ndarray
    cov: np.ndarray
    links: Mapping[str, np.ndarray]


def joint_moments(net: Network) -> JointMoments:
    """
    Stack all variables in topological order. With B the block link matrix
    (strictly lower-triangular in that order), mu solves (I - B) mu = w and
    Sigma = (I - B)^-1 blockdiag(Q) (I - B)^-T.
    """
    layout = tuple(Member(v, net.dim(v)) for v in net.order)
    n = net.total_dim
    if n == 0:
        return JointMoments(layout, frozen(np.zeros(0)), frozen(np.zeros((0, 0))))

    offsets, start = {}, 0
    for m in layout:
        offsets[m.id] = slice(start, start + m.dim)
        start += m.dim

    links = np.zeros((n, n))
    for v in net.order:
        for parent in net.node(v).parents:
            links[offsets[v], offsets[parent.id]] = parent.link
    system = np.eye(n) - links
    noise_mean = np.concatenate([net.node(v).mean for v in net.order])
    noise_cov = linalg.block_diag(*[net.node(v).noise_cov for v in net.order])

    mean = linalg.solve_triangular(system, noise_mean, lower=True, unit_diagonal=True)
    half = linalg.solve_triangular(system, noise_cov, lower=True, unit_diagonal=True)
    cov = linalg.solve_triangular(system, half.T, lower=True, unit_diagonal=True)
    return JointMoments(layout, frozen(mean), frozen(symmetrize(cov)))


def oracle_query(
        jm: JointMoments,
        targets: Sequence[str],
        given: Sequence[str] = (),
        evidence: Optional[Mapping[str, Any]] = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
) -> OracleAnswer:
    """
    Moments of X given observed E = e* and symbolic Y, in the form
    X = mean + sum_y K_y . y with the conditional covariance.
    """
    evidence = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in (evidence or {}).items()}
    known = {m.id for m in jm.layout}
    dims = {m.id: m.dim for m in jm.layout}
    unknown = (set(targets) | set(given) | set(evidence)) - known
    if unknown:
        raise UnknownNode(f"unknown node(s): {', '.join(sorted(unknown))}")
    for node_id, value in evidence.items():
        if value.shape != (dims[node_id],):
            raise ShapeError(f"evidence for {node_id!r} has length {value.shape[0]}, expected {dims[node_id]}")

    symbolic = [y for y in given if y not in evidence]
    cond_ids = list(evidence) + symbolic
    xi = jm.indices(targets)
    mu_x, s_xx = jm.mean[xi], jm.cov[np.ix_(xi, xi)]
    if not cond_ids:
        return OracleAnswer(tuple(targets), frozen(mu_x), frozen(s_xx), MappingProxyType({}))

    ci = jm.indices(cond_ids)
    s_cc = jm.cov[np.ix_(ci, ci)]
    if not is_positive_definite(s_cc, tol):
        raise DegenerateEvidence(f"joint covariance over {cond_ids} is singular within tolerance")
    s_xc = jm.cov[np.ix_(xi, ci)]
    gain = linalg.cho_solve(linalg.cho_factor(s_cc, lower=True), s_xc.T).T

    shift = -jm.mean[ci]
    links: Dict[str, np.ndarray] = {}
    col = 0
    for node_id in cond_ids:
        cols = slice(col, col + dims[node_id])
        if node_id in evidence:
            shift[cols] += evidence[node_id]
        else:
            links[node_id] = frozen(gain[:, cols])
        col += dims[node_id]

    return OracleAnswer(
        targets=tuple(targets),
        mean=frozen(mu_x + gain @ shift),
        cov=frozen(symmetrize(s_xx - gain @ s_xc.T)),
        links=MappingProxyType(links),
    )


__all__ = ["JointMoments", "OracleAnswer", "joint_moments", "oracle_query"]
