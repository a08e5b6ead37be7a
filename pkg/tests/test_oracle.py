import numpy as np
import pytest

from spic_server.core.gaussian.repr import External, Member
from spic_server.core.gaussian.utils import frozen
from spic_server.core.network.network import parse_network, serialize_network
from spic_server.core.oracle.check import check_case, deviation, run_check
from spic_server.core.oracle.generator import random_document, random_network, random_queries
from spic_server.core.oracle.oracle import OracleAnswer, joint_moments, oracle_query
from spic_server.core.query.engine import Diagnostics, QueryResult
from spic_server.errors import DegenerateEvidence, UnknownNode

from conftest import DESK_DOCUMENT, document


class TestJointMoments:
    def test_desk(self, desk):
        jm = joint_moments(desk)
        assert [m.id for m in jm.layout] == ["a1", "a2", "c1", "c2"]
        np.testing.assert_allclose(jm.mean, [1.0, 0.0, 2.0, 2.0], atol=1e-12)
        expected = [
            [1.0, 0.0, 2.0, 2.0],
            [0.0, 2.0, 0.0, 6.0],
            [2.0, 0.0, 4.5, 4.5],
            [2.0, 6.0, 4.5, 23.5],
        ]
        np.testing.assert_allclose(jm.cov, expected, atol=1e-12)

    def test_single_root(self):
        jm = joint_moments(parse_network({"nodes": [{"id": "a1", "dim": 1, "mean": [1], "cov": [[1]]}]}))
        assert jm.mean.tolist() == [1.0]
        assert jm.cov.tolist() == [[1.0]]

    def test_independent_roots(self, split):
        jm = joint_moments(split)
        idx_x, idx_z = jm.indices(["x"]), jm.indices(["z"])
        assert np.all(jm.cov[np.ix_(idx_x, idx_z)] == 0.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_roots_keep_their_prior(self, seed):
        net = random_network(seed, 10)
        jm = joint_moments(net)
        for v in net.order:
            idx = jm.indices([v])
            node = net.node(v)
            if not node.parents:
                assert np.array_equal(jm.mean[idx], node.mean)
                np.testing.assert_allclose(jm.cov[np.ix_(idx, idx)], node.noise_cov, atol=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_joint_is_psd_and_dominates_noise(self, seed):
        net = random_network(seed, 12)
        jm = joint_moments(net)
        assert np.array_equal(jm.cov, jm.cov.T)
        assert np.linalg.eigvalsh(jm.cov)[0] >= -1e-8 * (1 + np.trace(jm.cov) / len(jm.cov))
        noise_diag = np.concatenate([np.diag(net.node(v).noise_cov) for v in net.order])
        assert np.all(np.diag(jm.cov) >= noise_diag - 1e-9)


class TestOracleQuery:
    def test_root_evidence(self, desk):
        answer = oracle_query(joint_moments(desk), ["c2"], evidence={"a2": [2.0]})
        np.testing.assert_allclose(answer.mean, [8.0], atol=1e-12)
        np.testing.assert_allclose(answer.cov, [[5.5]], atol=1e-12)

    def test_symbolic(self, desk):
        answer = oracle_query(joint_moments(desk), ["a1"], given=["c1"])
        np.testing.assert_allclose(answer.links["c1"], [[4 / 9]], atol=1e-12)
        np.testing.assert_allclose(answer.mean, [1 / 9], atol=1e-12)
        np.testing.assert_allclose(answer.cov, [[1 / 9]], atol=1e-12)

    def test_selection(self, desk):
        jm = joint_moments(desk)
        answer = oracle_query(jm, ["a1", "a2", "c1", "c2"])
        assert np.array_equal(answer.mean, jm.mean)
        assert np.array_equal(answer.cov, jm.cov)

    def test_errors(self):
        net = parse_network(document(DESK_DOCUMENT, c1={"cov": [[0.0]]}))
        jm = joint_moments(net)
        with pytest.raises(DegenerateEvidence):
            oracle_query(jm, ["c2"], evidence={"a1": [1.0], "c1": [2.0]})
        with pytest.raises(UnknownNode):
            oracle_query(jm, ["zz"])


class TestGenerator:
    def test_single_node(self):
        net = random_network(0, 1)
        assert len(net) == 1

    @pytest.mark.parametrize("seed", range(10))
    def test_deterministic(self, seed):
        assert random_document(seed, 9) == random_document(seed, 9)
        a, b = random_network(seed, 9), random_network(seed, 9)
        assert serialize_network(a) == serialize_network(b)

    @pytest.mark.parametrize("seed", range(10))
    def test_limits(self, seed):
        net = random_network(seed, 12, max_parents=3, max_dim=3)
        for v in net.order:
            node = net.node(v)
            assert 1 <= node.dim <= 3
            assert len(node.parents) <= 3
            assert np.linalg.eigvalsh(node.noise_cov)[0] >= 0.1 - 1e-9
            assert np.all(np.abs(node.mean) <= 3.0)
            assert all(np.all(np.abs(p.link) <= 2.0) for p in node.parents)

    def test_queries_are_valid(self):
        net = random_network(4, 12)
        for query in random_queries(4, net, 20):
            query.validate(net)
            assert not set(query.targets) & set(query.evidence)


class TestCheck:
    def test_case(self):
        outcomes = check_case(3, 8, 4)
        assert len(outcomes) == 4
        assert all(o.error is None and o.deviation <= 1e-8 for o in outcomes)

    def test_run_check(self):
        report = run_check(6, 7, 3, workers=2)
        assert report.passed
        assert len(report.outcomes) == 18
        assert [o.seed for o in report.outcomes] == sorted(o.seed for o in report.outcomes)
        summary = report.as_dict()
        assert summary["cases"] == 18 and summary["failures"] == []


class TestDeviation:
    @staticmethod
    def _result(mean, cov, links=()):
        return QueryResult((Member("x", len(mean)),), frozen(mean), frozen(cov), tuple(links), Diagnostics())

    def test_is_absolute_regardless_of_scale(self):
        result = self._result([5e-7], [[100.0]])
        expected = OracleAnswer(("x",), frozen([0.0]), frozen([[100.0]]), {})
        assert deviation(result, expected) == pytest.approx(5e-7, rel=1e-12)
        assert deviation(result, expected) > 1e-8

    def test_covers_links(self):
        result = self._result([0.0], [[1.0]], [External("y", frozen([[0.5]]))])
        expected = OracleAnswer(("x",), frozen([0.0]), frozen([[1.0]]), {"y": frozen([[0.25]])})
        assert deviation(result, expected) == 0.25

    def test_shape_mismatch_is_infinite(self):
        result = self._result([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
        expected = OracleAnswer(("x",), frozen([0.0]), frozen([[1.0]]), {})
        assert deviation(result, expected) == float("inf")
