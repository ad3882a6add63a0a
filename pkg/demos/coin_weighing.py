"""The coin-weighing primitives underneath the learners.

A detecting design recovers any binary vector from one round of subset sums
using noticeably fewer sums than coordinates; adaptive splitting finds small
supports quickly; and a hidden perfect matching is reconstructed from
counting queries.
"""

import numpy as np

from rankprobe import build_detecting_matrix, recover_matching, recover_sparse

# --- full vector recovery from non-adaptive subset sums ---
N = 1440
design = build_detecting_matrix(N)
print(f"detecting design: {N} columns, {design.n_rows} rows ({design.n_rows / N:.3f} per column)")

rng = np.random.default_rng(11)
x = (rng.random(N) < 0.37).astype(np.int64)
measurements = design.measure(x)
recovered = design.decode(measurements)
print(f"decode round trip exact: {np.array_equal(recovered, x)} (|x| = {int(x.sum())})")

# --- adaptive sparse recovery from a sum-query callback ---
support = set(rng.choice(4096, size=64, replace=False).tolist())
calls = {"n": 0}


def sum_oracle(indices):
    calls["n"] += 1
    return sum(1 for i in np.asarray(indices).tolist() if i in support)


result = recover_sparse(4096, sum_oracle)
print(
    f"sparse recovery: found {result.support.size} of 64 ones in 4096 columns "
    f"using {result.queries_used} sum queries ({result.strategy})"
)
assert set(result.support.tolist()) == support

# --- hidden perfect matching from additive queries ---
d = 512
xs = np.arange(d)
ys = np.arange(d, 2 * d)
perm = rng.permutation(d)
partner = {int(xs[perm[j]]): int(ys[j]) for j in range(d)}
pair_arr = np.full(2 * d, -1, dtype=np.int64)
for a, b in partner.items():
    pair_arr[a] = b
    pair_arr[b] = a


def add_oracle(subset):
    arr = np.asarray(subset, dtype=np.int64)
    mask = np.zeros(2 * d, dtype=bool)
    mask[arr] = True
    return int(np.count_nonzero(mask[arr] & mask[pair_arr[arr]])) // 2


match = recover_matching(xs, ys, add_oracle)
print(
    f"matching reconstruction: {d} pairs from {match.queries_used} add queries "
    f"({match.queries_used / d:.2f} per pair), exact: {match.pairs == partner}"
)
