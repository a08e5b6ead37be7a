"""
Generalized distributions over stacked linear-Gaussian variables.

A CombinedRepr describes

    members = mean + sum_e K_e . e + w,    w ~ N(0, noise_cov)

where ``members`` is the stack of its member blocks and every ``e`` is an
external variable the distribution is conditioned on. The continuous SPI
operations (multiplication, integration, evidence substitution) and Gaussian
conditioning all map CombinedRepr values to new CombinedRepr values.
"""
import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from attr import dataclass
from scipy import linalg

from .utils import check_covariance, frozen, is_positive_definite, symmetrize
from ..network.network import NodeSpec
from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...consts import consts
from ...errors import (
    CombinabilityError,
    CovarianceError,
    DegenerateEvidence,
    ExternalsPresent,
    MemberClash,
    ShapeError,
    UnknownExternal,
    UnknownMember,
)

logger = logging.getLogger(consts.LOGGER_NAME)


@dataclass(frozen=True)
class Member:
    id: str
    dim: int


@dataclass(frozen=True, eq=False)
class External:
    id: str
    link: np.ndarray  # total member dim x external dim

    @property
    def dim(self) -> int:
        return self.link.shape[1]


@dataclass(frozen=True, eq=False)
class CombinedRepr:
    members: Tuple[Member, ...]
    mean: np.ndarray
    noise_cov: np.ndarray
    externals: Tuple[External, ...] = ()

    @classmethod
    def empty(cls) -> "CombinedRepr":
        return cls(members=(), mean=frozen(np.zeros(0)), noise_cov=frozen(np.zeros((0, 0))))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def is_empty(self) -> bool:
        return len(self.members) == 0

    @property
    def member_ids(self) -> Tuple[str, ...]:
        return tuple(m.id for m in self.members)

    @property
    def external_ids(self) -> Tuple[str, ...]:
        return tuple(e.id for e in self.externals)

    def offsets(self) -> Dict[str, slice]:
        out, start = {}, 0
        for m in self.members:
            out[m.id] = slice(start, start + m.dim)
            start += m.dim
        return out

    def block(self, member_id: str) -> slice:
        try:
            return self.offsets()[member_id]
        except KeyError:
            raise UnknownMember(f"{member_id!r} is not a member of {list(self.member_ids)}") from None

    def external(self, external_id: str) -> Optional[External]:
        for ext in self.externals:
            if ext.id == external_id:
                return ext
        return None

    def references(self, other: "CombinedRepr") -> bool:
        """True when one of our externals is a member of ``other``."""
        ids = set(other.member_ids)
        return any(e.id in ids for e in self.externals)

    def reorder(self, ids: Sequence[str]) -> "CombinedRepr":
        """Same distribution with members stacked in the order of ``ids``."""
        if sorted(ids) != sorted(self.member_ids):
            raise UnknownMember(f"reorder needs exactly the members {list(self.member_ids)}, got {list(ids)}")
        offsets = self.offsets()
        index = _indices(offsets, ids)
        by_id = {m.id: m for m in self.members}
        return CombinedRepr(
            members=tuple(by_id[i] for i in ids),
            mean=frozen(self.mean[index]),
            noise_cov=frozen(self.noise_cov[np.ix_(index, index)]),
            externals=tuple(External(e.id, frozen(e.link[index, :])) for e in self.externals),
        )

    def select(self, ids: Sequence[str]) -> "CombinedRepr":
        """Marginal over ``ids`` presented in that order."""
        victims = set(self.member_ids) - set(ids)
        return integrate_out(self, victims).reorder(ids)


def _indices(offsets: Mapping[str, slice], ids: Iterable[str]) -> np.ndarray:
    parts = [np.arange(offsets[i].start, offsets[i].stop) for i in ids]
    if not parts:
        return np.zeros(0, dtype=int)
    return np.concatenate(parts)


def lift(node: NodeSpec) -> CombinedRepr:
    """Single-member representation of one node: its noise mean and covariance, parent links as externals."""
    return CombinedRepr(
        members=(Member(node.id, node.dim),),
        mean=node.mean,
        noise_cov=node.noise_cov,
        externals=tuple(External(p.id, p.link) for p in node.parents),
    )


def multiply(
        upstream: CombinedRepr,
        incoming: CombinedRepr,
        tol: Tolerances = DEFAULT_TOLERANCES,
) -> CombinedRepr:
    """
    Combine two distributions into the joint of the stacked node [upstream; incoming].

    ``incoming`` may be conditioned on members of ``upstream`` but not the other
    way round. The implicit relation T collects incoming's links into the
    upstream members; because upstream members are themselves linear in
    upstream's externals, composing through T sums the contribution of every
    directed path.
    """
    clash = set(upstream.member_ids) & set(incoming.member_ids)
    if clash:
        raise MemberClash(f"members {sorted(clash)} appear on both sides of a multiplication")
    if upstream.references(incoming):
        back = sorted(set(upstream.external_ids) & set(incoming.member_ids))
        if incoming.references(upstream):
            raise CombinabilityError(
                f"bidirectional references between {list(upstream.member_ids)} and {list(incoming.member_ids)}"
            )
        raise CombinabilityError(
            f"upstream {list(upstream.member_ids)} is conditioned on incoming members {back}"
        )
    if incoming.is_empty:
        return upstream
    if upstream.is_empty:
        return incoming

    n_up, n_in = upstream.dim, incoming.dim
    offsets = upstream.offsets()
    t = np.zeros((n_in, n_up))
    for ext in incoming.externals:
        if ext.id in offsets:
            t[:, offsets[ext.id]] += ext.link

    tq = t @ upstream.noise_cov
    mean = np.concatenate([upstream.mean, t @ upstream.mean + incoming.mean])
    cov = np.block([
        [upstream.noise_cov, tq.T],
        [tq, symmetrize(tq @ t.T) + incoming.noise_cov],
    ])

    links: Dict[str, np.ndarray] = {}
    for ext in upstream.externals:
        links[ext.id] = np.vstack([ext.link, t @ ext.link])
    for ext in incoming.externals:
        if ext.id in offsets:
            continue
        stacked = np.vstack([np.zeros((n_up, ext.dim)), ext.link])
        if ext.id in links:
            if links[ext.id].shape != stacked.shape:
                raise ShapeError(f"external {ext.id!r} appears with inconsistent dimensions")
            links[ext.id] = links[ext.id] + stacked
        else:
            links[ext.id] = stacked

    result = CombinedRepr(
        members=upstream.members + incoming.members,
        mean=frozen(mean),
        noise_cov=frozen(cov),
        externals=tuple(External(k, frozen(v)) for k, v in links.items()),
    )
    try:
        check_covariance(result.noise_cov, f"product of {list(result.member_ids)}", tol)
    except CovarianceError:
        logger.error(f"Multiplication lost positive semidefiniteness for {list(result.member_ids)}")
        raise
    return result


def integrate_out(repr_: CombinedRepr, victims: Iterable[str]) -> CombinedRepr:
    """Marginalize ``victims`` away by dropping their slots."""
    victims = set(victims)
    unknown = victims - set(repr_.member_ids)
    if unknown:
        raise UnknownMember(f"cannot integrate out non-members {sorted(unknown)}")
    if not victims:
        return repr_
    keep_ids = [m.id for m in repr_.members if m.id not in victims]
    if not keep_ids:
        return CombinedRepr.empty()
    index = _indices(repr_.offsets(), keep_ids)
    return CombinedRepr(
        members=tuple(m for m in repr_.members if m.id not in victims),
        mean=frozen(repr_.mean[index]),
        noise_cov=frozen(repr_.noise_cov[np.ix_(index, index)]),
        externals=tuple(External(e.id, frozen(e.link[index, :])) for e in repr_.externals),
    )


def substitute_evidence(repr_: CombinedRepr, values: Mapping[str, np.ndarray]) -> CombinedRepr:
    """
    Fix observed values of externals: mean += K_E . E*, the link is dropped and
    the noise covariance is passed through untouched.
    """
    if not values:
        return repr_
    unknown = set(values) - set(repr_.external_ids)
    if unknown:
        raise UnknownExternal(f"{sorted(unknown)} are not externals of {list(repr_.member_ids)}")
    mean = np.array(repr_.mean, dtype=float)
    kept = []
    for ext in repr_.externals:
        if ext.id not in values:
            kept.append(ext)
            continue
        value = np.asarray(values[ext.id], dtype=float).reshape(-1)
        if value.shape != (ext.dim,):
            raise ShapeError(f"evidence for {ext.id!r} has length {value.shape[0]}, expected {ext.dim}")
        mean = mean + ext.link @ value
    return CombinedRepr(
        members=repr_.members,
        mean=frozen(mean),
        noise_cov=repr_.noise_cov,
        externals=tuple(kept),
    )


def condition(
        repr_: CombinedRepr,
        on: Iterable[str],
        values: Optional[Mapping[str, np.ndarray]] = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
) -> CombinedRepr:
    """
    Condition a fully resolved joint on some of its members (Schur complement).

    Members with a value in ``values`` are fixed; the rest of ``on`` become
    externals with K = S_XE S_EE^-1, giving the symbolic form X = X̄ + K_Y . Y.
    """
    on = list(dict.fromkeys(on))
    values = dict(values or {})
    if not on:
        return repr_
    if repr_.externals:
        raise ExternalsPresent(
            f"conditioning needs a fully resolved joint, found externals {list(repr_.external_ids)}"
        )
    unknown = (set(on) | set(values)) - set(repr_.member_ids)
    if unknown:
        raise UnknownMember(f"cannot condition on non-members {sorted(unknown)}")
    extra = set(values) - set(on)
    if extra:
        raise UnknownMember(f"values given for {sorted(extra)} which are not conditioned on")

    offsets = repr_.offsets()
    on_set = set(on)
    # observed blocks first, then symbolic ones, each in repr order
    observed = [m.id for m in repr_.members if m.id in values]
    symbolic = [m.id for m in repr_.members if m.id in on_set and m.id not in values]
    cond_ids = observed + symbolic
    rest = [m for m in repr_.members if m.id not in on_set]

    xi = _indices(offsets, [m.id for m in rest])
    ei = _indices(offsets, cond_ids)
    s_ee = repr_.noise_cov[np.ix_(ei, ei)]
    if not is_positive_definite(s_ee, tol):
        raise DegenerateEvidence(f"covariance over {cond_ids} is singular within tolerance")
    try:
        factor = linalg.cho_factor(s_ee, lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateEvidence(f"covariance over {cond_ids} is not positive definite") from e

    if not rest:
        return CombinedRepr.empty()

    s_xe = repr_.noise_cov[np.ix_(xi, ei)]
    gain = linalg.cho_solve(factor, s_xe.T).T  # S_XE S_EE^-1
    mu_x, mu_e = repr_.mean[xi], repr_.mean[ei]

    shift = np.zeros(len(ei))
    col, links = 0, []
    for cid in cond_ids:
        width = offsets[cid].stop - offsets[cid].start
        cols = slice(col, col + width)
        if cid in values:
            value = np.asarray(values[cid], dtype=float).reshape(-1)
            if value.shape != (width,):
                raise ShapeError(f"evidence for {cid!r} has length {value.shape[0]}, expected {width}")
            shift[cols] = value - mu_e[cols]
        else:
            shift[cols] = -mu_e[cols]
            links.append(External(cid, frozen(gain[:, cols])))
        col += width

    mean = mu_x + gain @ shift
    cov = symmetrize(repr_.noise_cov[np.ix_(xi, xi)] - gain @ s_xe.T)
    return CombinedRepr(
        members=tuple(rest),
        mean=frozen(mean),
        noise_cov=frozen(cov),
        externals=tuple(links),
    )


__all__ = [
    "Member",
    "External",
    "CombinedRepr",
    "lift",
    "multiply",
    "integrate_out",
    "substitute_evidence",
    "condition",
]
