import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from spic_server.core.gaussian.repr import (
    CombinedRepr,
    External,
    Member,
    condition,
    integrate_out,
    lift,
    multiply,
    substitute_evidence,
)
from spic_server.core.gaussian.utils import frozen
from spic_server.core.oracle.generator import random_network
from spic_server.core.oracle.oracle import joint_moments
from spic_server.errors import (
    CombinabilityError,
    DegenerateEvidence,
    ExternalsPresent,
    MemberClash,
    ShapeError,
    UnknownExternal,
    UnknownMember,
)

PROPERTY_SETTINGS = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


def _joint(mean, cov, ids=None):
    ids = ids or [f"v{i}" for i in range(len(mean))]
    return CombinedRepr(
        members=tuple(Member(i, 1) for i in ids),
        mean=frozen(mean),
        noise_cov=frozen(cov),
    )


def _fold(net, ids):
    acc = CombinedRepr.empty()
    for v in net.order:
        if v in ids:
            acc = multiply(acc, lift(net.node(v)))
    return acc


class TestLift:
    def test_root(self, desk):
        r = lift(desk.node("a1"))
        assert r.member_ids == ("a1",)
        assert r.mean.tolist() == [1.0]
        assert r.noise_cov.tolist() == [[1.0]]
        assert r.externals == ()

    def test_links_become_externals(self, desk):
        r = lift(desk.node("c2"))
        assert r.external_ids == ("c1", "a2")
        assert r.external("a2").link.tolist() == [[3.0]]
        assert r.external("c1").link.tolist() == [[1.0]]


class TestMultiply:
    def test_combined_node(self, desk):
        r = multiply(lift(desk.node("c1")), lift(desk.node("c2")))
        assert r.member_ids == ("c1", "c2")
        assert r.external("a1").link.tolist() == [[2.0], [2.0]]
        assert r.external("a2").link.tolist() == [[0.0], [3.0]]
        assert r.mean.tolist() == [0.0, 0.0]
        assert r.noise_cov.tolist() == [[0.5, 0.5], [0.5, 1.5]]
        assert r.external("c1") is None

    def test_root_with_child(self, desk):
        r = multiply(lift(desk.node("a1")), lift(desk.node("c1")))
        assert r.externals == ()
        np.testing.assert_allclose(r.mean, [1.0, 2.0])
        np.testing.assert_allclose(r.noise_cov, [[1.0, 2.0], [2.0, 4.5]])

    def test_empty_is_identity(self, desk):
        r = lift(desk.node("c2"))
        assert multiply(r, CombinedRepr.empty()) is r
        assert multiply(CombinedRepr.empty(), r) is r

    def test_wrong_orientation(self, desk):
        with pytest.raises(CombinabilityError):
            multiply(lift(desk.node("c2")), lift(desk.node("c1")))

    def test_bidirectional(self):
        a = CombinedRepr((Member("a", 1),), frozen([0.0]), frozen([[1.0]]), (External("b", frozen([[1.0]])),))
        b = CombinedRepr((Member("b", 1),), frozen([0.0]), frozen([[1.0]]), (External("a", frozen([[1.0]])),))
        with pytest.raises(CombinabilityError, match="bidirectional"):
            multiply(a, b)

    def test_member_clash(self, desk):
        with pytest.raises(MemberClash):
            multiply(lift(desk.node("a1")), lift(desk.node("a1")))

    def test_shared_external_links_add(self):
        # y = x + u, z = y + 2 u: u reaches z directly and through y
        y = CombinedRepr((Member("y", 1),), frozen([0.0]), frozen([[1.0]]), (External("u", frozen([[1.0]])),))
        z = CombinedRepr(
            (Member("z", 1),), frozen([0.0]), frozen([[1.0]]),
            (External("y", frozen([[1.0]])), External("u", frozen([[2.0]]))),
        )
        r = multiply(y, z)
        assert r.external("u").link.tolist() == [[1.0], [3.0]]

    def test_dimension_additivity(self):
        net = random_network(7, 6)
        r = _fold(net, set(net.order))
        assert r.dim == net.total_dim


class TestIntegrate:
    def test_eliminate_combined_node(self, desk):
        r = integrate_out(multiply(lift(desk.node("c1")), lift(desk.node("c2"))), {"c1"})
        assert r.member_ids == ("c2",)
        assert r.external("a1").link.tolist() == [[2.0]]
        assert r.external("a2").link.tolist() == [[3.0]]
        assert r.mean.tolist() == [0.0]
        assert r.noise_cov.tolist() == [[1.5]]

    def test_nothing_and_everything(self, desk):
        r = multiply(lift(desk.node("c1")), lift(desk.node("c2")))
        assert integrate_out(r, set()) is r
        gone = integrate_out(r, {"c1", "c2"})
        assert gone.dim == 0 and gone.is_empty and gone.externals == ()

    def test_unknown(self, desk):
        with pytest.raises(UnknownMember):
            integrate_out(lift(desk.node("c1")), {"c2"})

    def test_commutes(self):
        net = random_network(11, 7)
        r = _fold(net, set(net.order))
        u, v = net.order[1], net.order[4]
        a = integrate_out(integrate_out(r, {u}), {v})
        b = integrate_out(r, {u, v})
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.noise_cov, b.noise_cov)


class TestSubstitute:
    def _c2(self):
        return CombinedRepr((Member("c2", 1),), frozen([2.0]), frozen([[5.5]]), (External("a2", frozen([[3.0]])),))

    def test_root_evidence(self):
        r = self._c2()
        s = substitute_evidence(r, {"a2": [2.0]})
        assert s.mean.tolist() == [8.0]
        assert s.noise_cov is r.noise_cov
        assert s.externals == ()

    def test_zero_and_empty(self):
        r = self._c2()
        assert substitute_evidence(r, {}) is r
        s = substitute_evidence(r, {"a2": [0.0]})
        assert s.mean.tolist() == [2.0] and s.externals == ()

    def test_errors(self):
        with pytest.raises(UnknownExternal):
            substitute_evidence(self._c2(), {"a1": [1.0]})
        with pytest.raises(ShapeError):
            substitute_evidence(self._c2(), {"a2": [1.0, 2.0]})


class TestCondition:
    JOINT = _joint([1.0, 2.0], [[1.0, 2.0], [2.0, 4.5]], ["a1", "c1"])

    def test_observed(self):
        r = condition(self.JOINT, ["c1"], {"c1": [2.0]})
        assert r.member_ids == ("a1",)
        np.testing.assert_allclose(r.mean, [1.0], atol=1e-12)
        np.testing.assert_allclose(r.noise_cov, [[1 / 9]], atol=1e-12)

    def test_symbolic(self):
        r = condition(self.JOINT, ["c1"])
        np.testing.assert_allclose(r.external("c1").link, [[4 / 9]], atol=1e-12)
        np.testing.assert_allclose(r.mean, [1 / 9], atol=1e-12)
        np.testing.assert_allclose(r.noise_cov, [[1 / 9]], atol=1e-12)

    def test_nothing(self):
        assert condition(self.JOINT, []) is self.JOINT

    def test_degenerate(self):
        joint = _joint([0.0, 0.0, 0.0], [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(DegenerateEvidence):
            condition(joint, ["v0", "v1"], {"v0": [0.0], "v1": [0.0]})

    def test_externals_present(self, desk):
        with pytest.raises(ExternalsPresent):
            condition(lift(desk.node("c1")), ["c1"], {"c1": [0.0]})


def test_desk_joint_matches_oracle(desk):
    jm = joint_moments(desk)
    r = _fold(desk, set(desk.order))
    np.testing.assert_allclose(r.mean, jm.mean, atol=1e-12)
    np.testing.assert_allclose(r.noise_cov, jm.cov, atol=1e-12)


@PROPERTY_SETTINGS
@given(seed=st.integers(0, 10_000), n=st.integers(2, 9))
def test_fold_order_insensitive(seed, n):
    net = random_network(seed, n)
    rng = np.random.default_rng(seed)
    graph = nx.DiGraph(net.arcs)
    graph.add_nodes_from(net.order)
    # a random topological order: repeatedly pick any source
    order, remaining = [], graph.copy()
    while remaining:
        sources = sorted(v for v in remaining if remaining.in_degree(v) == 0)
        v = sources[int(rng.integers(len(sources)))]
        order.append(v)
        remaining.remove_node(v)
    acc = CombinedRepr.empty()
    for v in order:
        acc = multiply(acc, lift(net.node(v)))
    acc = acc.reorder(net.order)
    ref = _fold(net, set(net.order))
    scale = max(1.0, float(np.max(np.abs(ref.noise_cov))))
    np.testing.assert_allclose(acc.mean, ref.mean, atol=1e-9 * scale)
    np.testing.assert_allclose(acc.noise_cov, ref.noise_cov, atol=1e-9 * scale)


def _path_sum(net, source, target):
    total = np.zeros((net.dim(target), net.dim(source)))
    for path in nx.all_simple_paths(net.graph, source, target):
        product = np.eye(net.dim(source))
        for u, v in zip(path, path[1:]):
            link = next(p.link for p in net.node(v).parents if p.id == u)
            product = link @ product
        total += product
    return total


@PROPERTY_SETTINGS
@given(seed=st.integers(0, 10_000), n=st.integers(2, 7))
def test_folded_links_equal_path_sums(seed, n):
    net = random_network(seed, n)
    roots = [v for v in net.order if not net.parents(v)]
    non_roots = [v for v in net.order if net.parents(v)]
    folded = _fold(net, set(non_roots))
    offsets = folded.offsets()
    for r, m in itertools.product(roots, non_roots):
        ext = folded.external(r)
        got = ext.link[offsets[m]] if ext is not None else np.zeros((net.dim(m), net.dim(r)))
        want = _path_sum(net, r, m)
        np.testing.assert_allclose(got, want, atol=1e-10 * max(1.0, float(np.max(np.abs(want), initial=0.0))))


@PROPERTY_SETTINGS
@given(seed=st.integers(0, 10_000), n=st.integers(1, 8))
def test_fold_then_integrate_matches_oracle_marginal(seed, n):
    net = random_network(seed, n)
    rng = np.random.default_rng(seed)
    keep = [v for v in net.order if rng.random() < 0.5] or [net.order[-1]]
    closure = set(keep)
    for v in keep:
        closure |= net.ancestors(v)
    r = _fold(net, closure).select(keep)
    jm = joint_moments(net)
    idx = jm.indices(keep)
    scale = max(1.0, float(np.max(np.abs(jm.cov))))
    np.testing.assert_allclose(r.mean, jm.mean[idx], atol=1e-8 * scale)
    np.testing.assert_allclose(r.noise_cov, jm.cov[np.ix_(idx, idx)], atol=1e-8 * scale)


def test_reorder_and_select(desk):
    r = _fold(desk, set(desk.order))
    s = r.select(["c2", "a1"])
    assert s.member_ids == ("c2", "a1")
    np.testing.assert_allclose(s.mean, [2.0, 1.0])
    np.testing.assert_allclose(s.noise_cov, [[23.5, 2.0], [2.0, 1.0]])
    with pytest.raises(UnknownMember):
        r.reorder(["a1"])
