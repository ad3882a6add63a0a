import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankprobe import (
    HiddenPartition,
    InternalConsistencyError,
    InvariantViolation,
    RankOracle,
    components,
    find_partition,
    find_partition_run,
    merge,
)
from rankprobe.partition import RepForest
from rankprobe.regression import load_regression_config

from _bruteforce import canonical, enumerate_set_partitions, random_partition


def oracle(parts):
    return RankOracle(HiddenPartition(parts))


class TestMerge:
    def test_all_singletons(self):
        o = oracle([[0], [1], [2], [3]])
        out = merge(np.array([0, 1]), np.array([2, 3]), o)
        assert out.merged.tolist() == [0, 1, 2, 3]
        assert out.removed_with_reps == []
        assert o.ledger.rank_count == 1  # one root sum settles both directions
        assert "matching" not in o.ledger.per_phase

    def test_single_common_pair(self):
        o = oracle([[0, 2], [1], [3]])
        out = merge(np.array([0, 1]), np.array([2, 3]), o)
        assert out.merged.tolist() == [1, 2, 3]
        assert out.removed_with_reps == [(0, 2)]

    def test_matching_skipped_when_com_empty(self):
        o = oracle([[0], [1], [2], [3], [4], [5]])
        merge(np.array([0, 1, 2]), np.array([3, 4, 5]), o)
        assert o.ledger.per_phase.get("matching", 0) == 0

    def test_lying_oracle_detected(self):
        from rankprobe import DecodeFailure, ProtocolError, QueryLedger

        class Lying:
            n = 4

            def __init__(self):
                self.ledger = QueryLedger()

            def rank(self, s):
                self.ledger.charge_rank()
                return 0  # every sum query reports everything common

        with pytest.raises((InternalConsistencyError, DecodeFailure, ProtocolError)):
            merge(np.array([0]), np.array([1, 2, 3]), Lying())


class TestFindPartition:
    def test_n0(self):
        assert find_partition(0, oracle([[0]])) == []

    def test_n1_zero_queries(self):
        o = oracle([[0]])
        parts = find_partition(1, o)
        assert canonical(parts) == ((0,),)
        assert o.ledger.rank_count == 0

    def test_small_example_query_bound(self):
        o = oracle([[0, 1], [2]])
        parts = find_partition(3, o)
        assert canonical(parts) == ((0, 1), (2,))
        assert o.ledger.rank_count <= 20

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_exhaustive_small(self, n):
        for parts in enumerate_set_partitions(n):
            target = canonical(parts)
            got = find_partition(n, oracle(parts))
            assert canonical(got) == target

    def test_medium_random(self):
        parts = random_partition(300, 60, seed=5)
        got = find_partition(300, oracle(parts))
        assert canonical(got) == canonical(parts)

    def test_dense_regime_within_frozen_bound(self):
        n = 2**14
        limit = load_regression_config().value("C_total")
        parts = random_partition(n, n // 4, seed=0)
        o = oracle(parts)
        got = find_partition(n, o)
        assert canonical(got) == canonical(parts)
        assert o.ledger.rank_count <= limit * n

    def test_phase_records(self):
        o = oracle(random_partition(128, 16, seed=2))
        run = find_partition_run(128, o)
        phases = [r.phase for r in run.phase_records]
        assert phases == ["pairwise-merge", "final-fold"]
        assert sum(r.rank_queries for r in run.phase_records) == o.ledger.rank_count
        assert run.survivors_after_phase1 <= math.floor(math.log2(128)) + 1

    def test_determinism(self):
        def snapshot():
            o = oracle(random_partition(200, 40, seed=9))
            parts = find_partition(200, o)
            return canonical(parts), o.ledger.snapshot()

        assert snapshot() == snapshot()

    def test_audit_mode_isolated(self):
        parts = random_partition(100, 25, seed=3)
        plain = RankOracle(HiddenPartition(parts))
        audited = RankOracle(HiddenPartition(parts))
        p1 = find_partition(100, plain)
        p2 = find_partition(100, audited, audit=True)
        assert canonical(p1) == canonical(p2)
        assert plain.ledger.rank_count == audited.ledger.rank_count
        assert plain.ledger.audit_count == 0
        assert audited.ledger.audit_count > 0

    def test_thick_thin_accounting(self):
        config = load_regression_config()
        c_thick = config.value("c_thick")
        c_thin = config.value("c_thin")
        for n, k, seed in ((512, 128, 0), (2048, 512, 1), (2048, 64, 2)):
            o = oracle(random_partition(n, k, seed=seed))
            run = find_partition_run(n, o)
            thin_by_class = {}
            for s in run.merge_stats:
                if s.phase != "pairwise-merge":
                    continue
                if s.thick and s.d:
                    assert s.rank_queries <= c_thick * s.d
                elif not s.thick:
                    thin_by_class[s.size_class] = (
                        thin_by_class.get(s.size_class, 0) + s.rank_queries
                    )
            for total in thin_by_class.values():
                assert total <= c_thin * n

    def test_all_one_part(self):
        n = 256
        parts = [list(range(n))]
        o = oracle(parts)
        assert canonical(find_partition(n, o)) == canonical(parts)

    def test_all_singletons(self):
        n = 256
        parts = [[e] for e in range(n)]
        o = oracle(parts)
        assert canonical(find_partition(n, o)) == canonical(parts)

    def test_two_even_parts(self):
        n = 1024
        parts = [list(range(0, n, 2)), list(range(1, n, 2))]
        o = oracle(parts)
        assert canonical(find_partition(n, o)) == canonical(parts)

    @settings(max_examples=25, derandomize=True)
    @given(st.integers(min_value=1, max_value=48), st.data())
    def test_random_partitions_exact(self, n, data):
        labels = data.draw(st.lists(st.integers(0, 7), min_size=n, max_size=n))
        grouped = {}
        for e, lab in enumerate(labels):
            grouped.setdefault(lab, []).append(e)
        parts = list(grouped.values())
        got = find_partition(n, oracle(parts))
        assert canonical(got) == canonical(parts)


class TestComponents:
    def test_no_edges(self):
        forest = RepForest.from_edges(3, [], [0, 1, 2])
        assert canonical(components(forest)) == ((0,), (1,), (2,))

    def test_star(self):
        forest = RepForest.from_edges(3, [(0, 2), (1, 2)], [2])
        assert canonical(components(forest)) == ((0, 1, 2),)

    def test_chain(self):
        forest = RepForest.from_edges(3, [(0, 1), (1, 2)], [2])
        assert canonical(components(forest)) == ((0, 1, 2),)

    def test_two_outgoing_edges_rejected(self):
        with pytest.raises(InvariantViolation):
            RepForest.from_edges(3, [(0, 1), (0, 2)], [1, 2])

    def test_forest_matches_hidden_parts(self):
        parts = random_partition(96, 12, seed=11)
        o = oracle(parts)
        run = find_partition_run(96, o)
        assert canonical(components(run.forest)) == canonical(parts)
        non_roots = np.flatnonzero(run.forest.parent >= 0)
        assert non_roots.size + run.forest.roots.size == 96
