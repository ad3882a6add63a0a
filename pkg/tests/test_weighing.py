import math
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankprobe import (
    DecodeFailure,
    ProtocolError,
    UsageError,
    build_detecting_matrix,
    recover_matching,
    recover_sparse,
)
from rankprobe.regression import load_regression_config
from rankprobe.weighing import _A2, _A3, _B16


def row_budget(n):
    return max(n, math.ceil(4 * n / math.log2(n))) if n >= 2 else n


class TestFrozenBases:
    def test_b16_binary_detecting_exhaustive(self):
        x = ((np.arange(1 << 16)[:, None] >> np.arange(16)[None, :]) & 1).astype(np.int64)
        meas = x @ _B16.T
        assert len(np.unique(meas, axis=0)) == 1 << 16
        assert int(_B16.sum(axis=1).max()) <= 5

    def test_a2_5ary_detecting_mitm(self):
        # exact check: the only vector in {-5..5}^10 with zero measurement is 0
        t = 5
        m, u = _A2.shape
        h = u // 2
        vals = np.arange(-t, t + 1, dtype=np.int64)
        left = np.array(list(product(vals, repeat=h)), dtype=np.int64)
        right = np.array(list(product(vals, repeat=u - h)), dtype=np.int64)
        ls = left @ _A2[:, :h].T
        rs = right @ _A2[:, h:].T
        base = np.int64(2 * t * 5 + 3)  # per-row sums bounded by t * row weight
        shift = t * 5 + 1
        pw = base ** np.arange(m, dtype=np.int64)
        lcode = (ls + shift) @ pw
        rcode = (-rs + shift) @ pw
        lsort = np.sort(lcode)
        lo = np.searchsorted(lsort, rcode, side="left")
        hi = np.searchsorted(lsort, rcode, side="right")
        assert int((hi - lo).sum()) == 1  # the trivial pairing only
        assert int(_A2.sum(axis=1).max()) <= 5

    def test_a3_25ary_detecting_via_kernel(self):
        # rank 8 with a single integer kernel generator of gcd 1 whose largest
        # entry exceeds the alphabet bound 25, so no two vectors in {0..25}^9
        # share measurements
        g = []
        for j in range(9):
            sub = np.delete(_A3, j, axis=1).astype(np.float64)
            d = int(round(np.linalg.det(sub)))
            g.append(d if j % 2 == 0 else -d)
        g = np.array(g, dtype=np.int64)
        assert np.all(_A3 @ g == 0)
        assert np.linalg.matrix_rank(_A3.astype(np.float64)) == 8
        assert math.gcd(*[abs(int(v)) for v in g if v]) == 1
        assert int(np.abs(g).max()) > 25


class TestBuild:
    def test_n1_single_row(self):
        m = build_detecting_matrix(1)
        assert [r.tolist() for r in m.rows] == [[0]]

    def test_n2_identity(self):
        m = build_detecting_matrix(2)
        assert [r.tolist() for r in m.rows] == [[0], [1]]

    def test_n12_exhaustive_injectivity(self):
        m = build_detecting_matrix(12)
        dense = m.as_dense()
        x = ((np.arange(1 << 12)[:, None] >> np.arange(12)[None, :]) & 1).astype(np.int64)
        meas = x @ dense.T
        assert len(np.unique(meas, axis=0)) == 1 << 12

    @pytest.mark.parametrize("n", [1, 2, 7, 16, 17, 100, 160, 512, 1440, 1500, 4096])
    def test_row_budget(self, n):
        m = build_detecting_matrix(n)
        assert m.n_rows <= row_budget(n)
        covered = np.zeros(n, dtype=bool)
        for r in m.rows:
            covered[r] = True
        assert covered.all()

    def test_sublinear_at_scale(self):
        assert build_detecting_matrix(4096).n_rows < 0.5 * 4096

    def test_deterministic(self):
        a = build_detecting_matrix(100)
        b = build_detecting_matrix(100)
        assert a is b or [r.tolist() for r in a.rows] == [r.tolist() for r in b.rows]


class TestDecode:
    def test_all_zero(self):
        m = build_detecting_matrix(40)
        assert m.decode(np.zeros(m.n_rows, dtype=np.int64)).tolist() == [0] * 40

    def test_all_ones(self):
        m = build_detecting_matrix(40)
        sizes = np.array([len(r) for r in m.rows])
        assert m.decode(sizes).tolist() == [1] * 40

    @pytest.mark.parametrize("n", [16, 31, 160, 200, 1440, 1600])
    def test_round_trips(self, n):
        m = build_detecting_matrix(n)
        dense = m.as_dense()
        rng = np.random.default_rng(n)
        for _ in range(60):
            x = (rng.random(n) < rng.random()).astype(np.int64)
            assert np.array_equal(m.decode(dense @ x), x)

    def test_inconsistent_measurements_fail(self):
        m = build_detecting_matrix(64)
        bad = np.full(m.n_rows, 10**6, dtype=np.int64)
        with pytest.raises(DecodeFailure):
            m.decode(bad)

    def test_wrong_length_fails(self):
        m = build_detecting_matrix(64)
        with pytest.raises(DecodeFailure):
            m.decode(np.zeros(3, dtype=np.int64))

    @settings(max_examples=40, derandomize=True)
    @given(st.integers(min_value=1, max_value=220), st.integers(0, 2**31))
    def test_round_trip_random_sizes(self, n, seed):
        m = build_detecting_matrix(n)
        x = (np.random.default_rng(seed).random(n) < 0.4).astype(np.int64)
        assert np.array_equal(m.decode(m.measure(x)), x)


def counting_oracle(support, counter=None):
    sup = set(int(v) for v in support)

    def ask(indices):
        return sum(1 for i in np.asarray(indices).tolist() if i in sup)

    return ask


class TestRecoverSparse:
    def test_zero_vector_one_query(self):
        rec = recover_sparse(100, counting_oracle([]))
        assert rec.support.tolist() == []
        assert rec.queries_used == 1

    def test_single_element_binary_descent(self):
        rec = recover_sparse(8, counting_oracle([3]))
        assert rec.support.tolist() == [3]
        assert rec.queries_used <= 1 + 3
        assert rec.strategy == "binary-split"

    def test_exhaustive_small_universes(self):
        for n in range(1, 11):
            for code in range(2**n):
                support = [e for e in range(n) if (code >> e) & 1]
                rec = recover_sparse(n, counting_oracle(support))
                assert rec.support.tolist() == support

    def test_random_instances(self):
        rng = np.random.default_rng(0)
        for trial in range(10_000):
            n = int(rng.integers(1, 120))
            d = int(rng.integers(0, n + 1))
            support = sorted(rng.choice(n, size=d, replace=False).tolist())
            rec = recover_sparse(n, counting_oracle(support))
            assert rec.support.tolist() == support

    def test_frozen_budgets(self):
        config = load_regression_config()
        for n, d in ((4096, 64), (1024, 32), (256, 16)):
            budget = config.sparse_budget(n, d)
            for seed in range(10):
                rng = np.random.default_rng(seed)
                support = rng.choice(n, size=d, replace=False)
                rec = recover_sparse(n, counting_oracle(support))
                assert sorted(rec.support.tolist()) == sorted(support.tolist())
                assert rec.queries_used <= budget

    def test_known_total_skips_root(self):
        rec = recover_sparse(64, counting_oracle([5]), known_total=1)
        assert rec.support.tolist() == [5]
        assert rec.queries_used <= 6

    def test_query_count_monotone_in_d(self):
        n = 1024
        ds = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
        means = []
        for d in ds:
            samples = []
            for seed in range(8):
                rng = np.random.default_rng(seed * 1000 + d)
                support = rng.choice(n, size=d, replace=False)
                samples.append(recover_sparse(n, counting_oracle(support)).queries_used)
            means.append(np.mean(samples))
        # Spearman rank correlation between d and mean query count
        xr = np.argsort(np.argsort(ds)).astype(float)
        yr = np.argsort(np.argsort(means)).astype(float)
        rho = np.corrcoef(xr, yr)[0, 1]
        assert rho > 0.9


def matching_oracle(partner):
    def add(subset):
        ss = set(int(v) for v in np.asarray(subset).tolist())
        return sum(1 for a, b in partner.items() if a in ss and b in ss)

    return add


class TestRecoverMatching:
    def test_single_pair_zero_queries(self):
        res = recover_matching([4], [9], matching_oracle({4: 9}))
        assert res.pairs == {4: 9}
        assert res.queries_used == 0

    def test_two_pairs_one_query(self):
        partner = {0: 2, 1: 3}
        res = recover_matching([0, 1], [2, 3], matching_oracle(partner))
        assert res.pairs == partner
        assert res.queries_used == 1

    def test_exhaustive_up_to_4(self):
        for d in range(1, 5):
            xs = list(range(d))
            ys = list(range(d, 2 * d))
            for perm in permutations(range(d)):
                partner = {xs[perm[j]]: ys[j] for j in range(d)}
                res = recover_matching(xs, ys, matching_oracle(partner))
                assert res.pairs == partner

    @pytest.mark.parametrize("d", [32, 256, 1024])
    def test_large_random_within_budget(self, d):
        limit = load_regression_config().value("c_match") * d
        for seed in range(3):
            rng = np.random.default_rng(seed)
            xs = np.arange(d)
            ys = np.arange(d, 2 * d)
            perm = rng.permutation(d)
            partner = {int(xs[perm[j]]): int(ys[j]) for j in range(d)}
            pair_arr = np.full(2 * d, -1, dtype=np.int64)
            for a, b in partner.items():
                pair_arr[a] = b
                pair_arr[b] = a

            def add(subset):
                arr = np.asarray(subset, dtype=np.int64)
                mask = np.zeros(2 * d, dtype=bool)
                mask[arr] = True
                return int(np.count_nonzero(mask[arr] & mask[pair_arr[arr]])) // 2

            res = recover_matching(xs, ys, add)
            assert res.pairs == partner
            assert res.queries_used <= limit

    def test_mid_sizes_random(self):
        for d in (5, 12, 31, 33, 100, 513):
            rng = np.random.default_rng(d)
            xs = np.arange(d)
            ys = np.arange(d, 2 * d)
            perm = rng.permutation(d)
            partner = {int(xs[perm[j]]): int(ys[j]) for j in range(d)}
            res = recover_matching(xs, ys, matching_oracle(partner))
            assert res.pairs == partner

    def test_not_a_matching_raises(self):
        # everyone claims the same partner: bit planes cannot form a bijection
        def add(subset):
            ss = set(int(v) for v in np.asarray(subset).tolist())
            return sum(1 for y in range(40, 80) if y in ss and 0 in ss)

        with pytest.raises(ProtocolError):
            recover_matching(list(range(40)), list(range(40, 80)), add)

    def test_size_mismatch(self):
        with pytest.raises(UsageError):
            recover_matching([0, 1], [2], lambda s: 0)

    def test_overlap_rejected(self):
        with pytest.raises(UsageError):
            recover_matching([0, 1], [1, 2], lambda s: 0)
