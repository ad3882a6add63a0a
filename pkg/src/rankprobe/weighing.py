"""Coin-weighing primitives.

Three capabilities back the partition learners:

* non-adaptive detecting designs with a constructive decoder — full recovery
  of a binary vector from subset-sum measurements;
* adaptive recovery of a sparse binary vector from a sum-query callback;
* reconstruction of a hidden perfect matching from an additive-query callback.

Detecting designs
-----------------
A design is *B-ary detecting* if x -> (row sums of x) is injective on
{0..B}^n; binary detecting is the B = 1 case.  Large designs are built as
Kronecker towers over three small frozen bases, using the composition rule

    outer B-ary detecting with max row weight w  (+)  inner (B*w)-ary
    detecting   =>   Kronecker product is B-ary detecting,

proved by peeling: each outer row group measures the inner design applied to
a nonnegative combination of at most w columns-slices (entries <= B*w), which
the inner design decodes; the outer design then decodes each column slice.

The frozen bases (re-verified by the test suite):

* ``_B16``  10x16 binary detecting, row weight <= 5  (exhaustive check);
* ``_A2``   8x10  5-ary detecting, row weight <= 5   (meet-in-the-middle
  check over {-5..5}^10);
* ``_A3``   8x9   25-ary detecting: its integer kernel is spanned by a
  single vector with an entry of magnitude 38 > 25, so no two vectors in
  {0..25}^9 can share measurements.

Tiers: T1 = B16 (16 cols, 10 rows), T2 = B16 (x) A2 (160 cols, 80 rows),
T3 = B16 (x) A2 (x) A3 (1440 cols, 640 rows).  A design for N columns packs
the largest tiers first and finishes with identity columns, so the row count
stays well under N once N reaches a few hundred (about 0.46*N at N = 4096).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DecodeFailure, ProtocolError, UsageError

__all__ = [
    "DetectingMatrix",
    "build_detecting_matrix",
    "SparseRecovery",
    "recover_sparse",
    "MatchingResult",
    "recover_matching",
    "SPLIT_THRESHOLD",
    "MATRIX_MIN_SIZE",
    "MATCHING_SEARCH_CUTOFF",
]

# Below this size an identity design is used: the smallest base only pays off
# once it replaces 16 columns.
MATRIX_MIN_SIZE = 16

# recover_sparse switches from halving to a detecting design once the
# sub-universe holds at most SPLIT_THRESHOLD times as many columns as
# remaining ones.
SPLIT_THRESHOLD = 4

# recover_matching uses per-element binary search below this size.
MATCHING_SEARCH_CUTOFF = 32

_B16 = np.array(
    [
        [0, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 1],
        [1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1],
        [0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 1],
        [0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0],
        [0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0],
        [0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0],
        [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1],
        [1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0],
        [0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0],
    ],
    dtype=np.int64,
)

_A2 = np.array(
    [
        [0, 1, 1, 0, 1, 0, 0, 0, 0, 1],
        [1, 0, 1, 0, 1, 1, 0, 1, 0, 0],
        [0, 0, 1, 1, 1, 0, 1, 0, 1, 0],
        [0, 0, 0, 1, 0, 1, 0, 1, 0, 1],
        [1, 1, 0, 1, 1, 1, 0, 0, 0, 0],
        [1, 0, 0, 0, 1, 1, 0, 0, 1, 1],
        [0, 1, 0, 0, 0, 0, 0, 1, 1, 1],
        [1, 1, 1, 1, 0, 1, 0, 0, 0, 0],
    ],
    dtype=np.int64,
)

_A3 = np.array(
    [
        [0, 1, 1, 1, 1, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 1, 1, 0, 1],
        [1, 0, 1, 0, 1, 1, 1, 1, 0],
        [1, 0, 0, 1, 1, 0, 0, 1, 1],
        [1, 1, 1, 0, 0, 1, 0, 0, 1],
        [0, 1, 0, 1, 0, 1, 0, 1, 0],
        [1, 1, 1, 1, 0, 0, 1, 1, 0],
    ],
    dtype=np.int64,
)

# Alphabet each lattice base must decode: A2 sees sums of <=5 binary column
# slices (B16 row weight), A3 sees sums of <=5 A2-alphabet slices.
_A2_BOX = 5
_A3_BOX = 25


class _LatticeBase:
    """Decoder for a frozen m x u 0/1 base with u - m in {1, 2}.

    Fixing the free coordinates (chosen so the remaining square submatrix is
    invertible) determines the rest linearly; decoding enumerates the at most
    (box+1)^(u-m) choices and keeps the unique exact integer solution in the
    box.
    """

    def __init__(self, matrix, box):
        self.matrix = matrix
        self.box = int(box)
        m, u = matrix.shape
        self.free = self._pick_free(matrix, u - m)
        self.pinned = [j for j in range(u) if j not in self.free]
        square = matrix[:, self.pinned].astype(np.float64)
        self._inv = np.linalg.inv(square)
        vals = np.arange(self.box + 1, dtype=np.int64)
        grids = np.meshgrid(*([vals] * len(self.free)), indexing="ij")
        self._free_choices = np.stack([g.ravel() for g in grids], axis=1)
        self._free_cols = matrix[:, self.free].astype(np.float64)

    @staticmethod
    def _pick_free(matrix, s):
        from itertools import combinations

        m, u = matrix.shape
        for free in combinations(range(u), s):
            pinned = [j for j in range(u) if j not in free]
            if abs(np.linalg.det(matrix[:, pinned].astype(np.float64))) > 0.5:
                return list(free)
        raise RuntimeError("no invertible pinned submatrix; bad base")

    def decode(self, meas):
        """Unique y in {0..box}^u with matrix @ y == meas; DecodeFailure otherwise."""
        meas = np.asarray(meas, dtype=np.int64)
        rhs = meas[None, :] - self._free_choices @ self._free_cols.T
        pinned_vals = rhs @ self._inv.T
        cand = np.rint(pinned_vals).astype(np.int64)
        ok = np.abs(pinned_vals - cand) < 1e-6
        ok = ok.all(axis=1) & (cand >= 0).all(axis=1) & (cand <= self.box).all(axis=1)
        hits = np.flatnonzero(ok)
        for h in hits:
            y = np.empty(self.matrix.shape[1], dtype=np.int64)
            y[self.free] = self._free_choices[h]
            y[self.pinned] = cand[h]
            if np.array_equal(self.matrix @ y, meas):
                return y
        raise DecodeFailure("no vector in the box matches the measurements")


_lattice_a2 = None
_lattice_a3 = None
_b16_table = None


def _lattice_bases():
    global _lattice_a2, _lattice_a3
    if _lattice_a2 is None:
        _lattice_a2 = _LatticeBase(_A2, _A2_BOX)
        _lattice_a3 = _LatticeBase(_A3, _A3_BOX)
    return _lattice_a2, _lattice_a3


def _b16_decode_table():
    """Measurement-code -> 16-bit pattern for the binary base (lazy, built once)."""
    global _b16_table
    if _b16_table is None:
        x = ((np.arange(1 << 16)[:, None] >> np.arange(16)[None, :]) & 1).astype(np.int64)
        codes = (x @ _B16.T) @ (6 ** np.arange(10, dtype=np.int64))
        order = np.argsort(codes, kind="stable")
        _b16_table = (codes[order], np.arange(1 << 16, dtype=np.int64)[order])
    return _b16_table


def _b16_decode(meas_rows):
    """Decode a batch of B16 measurement vectors (k x 10) to 16-bit patterns."""
    codes, patterns = _b16_decode_table()
    if np.any(meas_rows < 0) or np.any(meas_rows > 5):
        raise DecodeFailure("binary-base measurements out of range")
    keys = meas_rows @ (6 ** np.arange(10, dtype=np.int64))
    idx = np.searchsorted(codes, keys)
    idx = np.clip(idx, 0, codes.size - 1)
    if np.any(codes[idx] != keys):
        raise DecodeFailure("no binary vector matches the measurements")
    return patterns[idx]


def _kron_rows(outer, inner_rows, inner_cols):
    """Rows of outer (x) inner, outer-row-major, as column index arrays."""
    rows = []
    for orow in outer:
        groups = np.flatnonzero(orow)
        for irow in inner_rows:
            cols = (groups[:, None] * inner_cols + irow[None, :]).ravel()
            rows.append(np.sort(cols))
    return rows


class _Tier:
    def __init__(self, name, n_cols, rows, decode):
        self.name = name
        self.n_cols = n_cols
        self.rows = rows
        self.decode = decode


_tiers = None


def _decode_t1(meas):
    bits = _b16_decode(np.asarray(meas, dtype=np.int64)[None, :])[0]
    return (bits >> np.arange(16, dtype=np.int64)) & 1


def _decode_t2(meas):
    a2, _ = _lattice_bases()
    meas = np.asarray(meas, dtype=np.int64).reshape(10, 8)
    y = np.empty((10, 10), dtype=np.int64)  # y[rho] = A2-decoded slice sums
    for rho in range(10):
        y[rho] = a2.decode(meas[rho])
    bits = _b16_decode(y.T.copy())  # one B16 decode per inner column
    out = np.empty(160, dtype=np.int64)
    for i in range(10):
        out[np.arange(16) * 10 + i] = (bits[i] >> np.arange(16)) & 1
    return out


def _decode_t3(meas):
    a2, a3 = _lattice_bases()
    meas = np.asarray(meas, dtype=np.int64).reshape(10, 8, 8)
    out = np.empty(1440, dtype=np.int64)
    y = np.empty((10, 10, 9), dtype=np.int64)
    for rho in range(10):
        z = np.empty((8, 9), dtype=np.int64)
        for a in range(8):
            z[a] = a3.decode(meas[rho, a])
        for j in range(9):
            y[rho, :, j] = a2.decode(z[:, j])
    for i in range(10):
        for j in range(9):
            bits = _b16_decode(y[:, i, j][None, :])[0]
            cols = np.arange(16) * 90 + (i * 9 + j)
            out[cols] = (bits >> np.arange(16)) & 1
    return out


def _build_tiers():
    global _tiers
    if _tiers is None:
        b16_rows = [np.flatnonzero(r).astype(np.int64) for r in _B16]
        a2_rows = [np.flatnonzero(r).astype(np.int64) for r in _A2]
        a3_rows = [np.flatnonzero(r).astype(np.int64) for r in _A3]
        t2_inner = _kron_rows(_A2, a3_rows, 9)  # A2 (x) A3 rows, for reuse below
        t1 = _Tier("t1", 16, b16_rows, _decode_t1)
        t2 = _Tier("t2", 160, _kron_rows(_B16, a2_rows, 10), _decode_t2)
        t3 = _Tier("t3", 1440, _kron_rows(_B16, t2_inner, 90), _decode_t3)
        _tiers = [t3, t2, t1]
    return _tiers


@dataclass
class DetectingMatrix:
    """A binary query design whose measurement map is injective on {0,1}^n_cols."""

    n_cols: int
    rows: list = field(repr=False)
    _blocks: list = field(default=None, repr=False)

    @property
    def n_rows(self):
        return len(self.rows)

    def as_dense(self):
        m = np.zeros((len(self.rows), self.n_cols), dtype=np.int64)
        for i, r in enumerate(self.rows):
            m[i, r] = 1
        return m

    def measure(self, x):
        """Forward map: one subset sum per row (the test-side oracle)."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.n_cols,):
            raise UsageError(f"expected a vector of length {self.n_cols}")
        return np.array([int(x[r].sum()) for r in self.rows], dtype=np.int64)

    def decode(self, measurements):
        """Invert the measurement map; raises DecodeFailure on inconsistent input."""
        meas = np.asarray(measurements, dtype=np.int64)
        if meas.shape != (len(self.rows),):
            raise DecodeFailure(f"expected {len(self.rows)} measurements, got {meas.shape}")
        out = np.zeros(self.n_cols, dtype=np.int64)
        pos = 0
        for tier, col_off in self._blocks:
            if tier is None:  # identity tail
                tail = meas[pos:]
                if np.any((tail < 0) | (tail > 1)):
                    raise DecodeFailure("identity-tail measurements must be 0/1")
                out[col_off:] = tail
                pos = len(self.rows)
                break
            n_rows = len(tier.rows)
            out[col_off : col_off + tier.n_cols] = tier.decode(meas[pos : pos + n_rows])
            pos += n_rows
        return out


_matrix_cache = {}


def build_detecting_matrix(N):
    """Deterministic detecting design for N columns.

    Packs the largest Kronecker tiers first (1440, 160, then 16 columns) and
    finishes with identity rows for the remainder or for any N below
    MATRIX_MIN_SIZE.  Row count is at most N, and o(N) once tiers dominate.
    """
    if N < 1:
        raise UsageError("need at least one column")
    cached = _matrix_cache.get(N)
    if cached is not None:
        return cached
    rows = []
    blocks = []
    offset = 0
    remaining = N
    for tier in _build_tiers():
        while remaining >= tier.n_cols:
            rows.extend(offset + r for r in tier.rows)
            blocks.append((tier, offset))
            offset += tier.n_cols
            remaining -= tier.n_cols
    if remaining:
        blocks.append((None, offset))
        rows.extend(np.array([j], dtype=np.int64) for j in range(offset, N))
    matrix = DetectingMatrix(N, rows, blocks)
    _matrix_cache[N] = matrix
    return matrix


@dataclass
class SparseRecovery:
    """Result of recover_sparse: the support plus the sum-query budget it used."""

    support: np.ndarray
    queries_used: int
    strategy: str


def recover_sparse(N, sum_oracle, *, split_threshold=SPLIT_THRESHOLD, known_total=None):
    """Recover the support of an unknown x in {0,1}^N from a sum-query callback.

    Adaptive halving (lower-index half first, odd splits give the extra
    element to the lower half) with a switch to detecting-design recovery on
    any sub-universe of size s <= split_threshold * (ones remaining in it),
    provided s is large enough for a non-identity design to pay off.

    ``known_total`` skips the root query when the caller already knows the
    number of ones; the public contract with d unknown always spends the root
    query, so x = 0 costs exactly one query.
    """
    state = {"queries": 0, "matrix_used": False}

    def ask(indices):
        state["queries"] += 1
        return int(sum_oracle(indices))

    support = []

    def solve(lo, hi, ones):
        size = hi - lo
        if ones < 0 or ones > size:
            raise DecodeFailure(
                f"sum oracle reported {ones} ones in a sub-universe of size {size}"
            )
        if ones == 0:
            return
        if ones == size:
            support.extend(range(lo, hi))
            return
        if size >= MATRIX_MIN_SIZE and size <= split_threshold * ones:
            state["matrix_used"] = True
            matrix = build_detecting_matrix(size)
            meas = [ask(lo + row) for row in matrix.rows]
            bits = matrix.decode(meas)
            if int(bits.sum()) != ones:
                raise DecodeFailure("decoded weight disagrees with the known sub-universe sum")
            support.extend((lo + np.flatnonzero(bits)).tolist())
            return
        mid = lo + (size + 1) // 2
        left = ask(np.arange(lo, mid, dtype=np.int64))
        solve(lo, mid, left)
        solve(mid, hi, ones - left)

    if N < 0:
        raise UsageError("N must be nonnegative")
    if N == 0:
        total = 0 if known_total is None else int(known_total)
    elif known_total is None:
        total = ask(np.arange(N, dtype=np.int64))
    else:
        total = int(known_total)
    solve(0, N, total)
    strategy = "hybrid" if state["matrix_used"] else "binary-split"
    return SparseRecovery(np.asarray(support, dtype=np.int64), state["queries"], strategy)


@dataclass
class MatchingResult:
    """A learned perfect matching, as a map from X-elements to Y-elements."""

    pairs: dict
    queries_used: int


def recover_matching(x_side, y_side, add_oracle):
    """Learn the hidden perfect matching between X and Y from an add-query callback.

    For small d a per-element binary search over the remaining candidates is
    used (at most ceil(log2 d) add queries each).  For d >= 32 each X-element
    gets a ceil(log2 d)-bit id and, per bit plane b, the indicator over Y of
    "my partner's bit b is set" is recovered as a sparse-recovery instance
    with known total (the number of ids with bit b set), one add query per
    sum query.  A decode failure or a non-bijective result means the matching
    precondition was violated.
    """
    xs = np.asarray(sorted(int(e) for e in x_side), dtype=np.int64)
    ys = np.asarray(sorted(int(e) for e in y_side), dtype=np.int64)
    if xs.size != ys.size:
        raise UsageError("matching sides must have equal size")
    if np.intersect1d(xs, ys).size:
        raise UsageError("matching sides must be disjoint")
    d = int(xs.size)
    if d == 0:
        return MatchingResult({}, 0)
    if d == 1:
        return MatchingResult({int(xs[0]): int(ys[0])}, 0)

    state = {"queries": 0}

    def ask(subset):
        state["queries"] += 1
        return int(add_oracle(subset))

    pairs = {}
    if d < MATCHING_SEARCH_CUTOFF:
        pool = ys.tolist()
        for x in xs.tolist():
            if len(pool) == 1:
                pairs[x] = pool[0]
                break
            cands = pool
            while len(cands) > 1:
                half = cands[: (len(cands) + 1) // 2]
                inside = ask(np.asarray([x] + half, dtype=np.int64))
                cands = half if inside else cands[len(half) :]
            pairs[x] = cands[0]
            pool.remove(cands[0])
        return MatchingResult(pairs, state["queries"])

    planes = max(1, math.ceil(math.log2(d)))
    ids = np.arange(d, dtype=np.int64)
    partner_id = np.zeros(d, dtype=np.int64)
    for b in range(planes):
        x_b = xs[(ids >> b) & 1 == 1]
        count_b = int(((ids >> b) & 1).sum())
        try:
            rec = recover_sparse(
                d,
                lambda idx: ask(np.concatenate((ys[idx], x_b))),
                known_total=count_b,
            )
        except DecodeFailure as exc:
            raise ProtocolError(f"bit-plane {b} decode failed: {exc}") from exc
        indicator = np.zeros(d, dtype=np.int64)
        indicator[rec.support] = 1
        partner_id += indicator << b
    if not np.array_equal(np.sort(partner_id), ids):
        raise ProtocolError("decoded partner ids are not a bijection")
    for j in range(d):
        pairs[int(xs[partner_id[j]])] = int(ys[j])
    return MatchingResult(pairs, state["queries"])
