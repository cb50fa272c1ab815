"""Counter-based random streams (Philox4x64-10).

Every uniform consumed anywhere in the package is addressed by
(seed, purpose, trial, word): a 4x64 Philox block cipher is applied to
the counter (word//4, trial, purpose, 0) under the key (seed, 0), and
word%4 selects the lane. Streams are therefore random-access: any
worker can generate any trial's draws without sequential state, and
results do not depend on how trials are partitioned.

The constants match numpy's Philox implementation, so the block
function can be cross-checked against `numpy.random.Philox` (which
pre-increments its counter before each block; see tests).

Purpose tags: 0 = rule init samples, 1 = trial values, 2 = rule
internal randomness, 3 = auxiliary experiments.
"""

import numpy as np

PHILOX_M0 = 0xD2E7470EE14C6C93
PHILOX_M1 = 0xCA5A826395121157
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B

_MASK64 = (1 << 64) - 1
_LO32 = 0xFFFFFFFF

PURPOSE_SAMPLES = 0
PURPOSE_VALUES = 1
PURPOSE_RULE = 2
PURPOSE_AUX = 3

# (word >> 11) * 2**-53: exact, matches numpy's uint64 -> double conversion
_U01_SCALE = 2.0 ** -53


def _mulhilo_vec(m, x):
    """(high, low) words of m * x for scalar m and uint64 array x."""
    m_hi = m >> 32
    m_lo = m & _LO32
    x_hi = x >> np.uint64(32)
    x_lo = x & np.uint64(_LO32)
    lo = x * np.uint64(m)
    t0 = x_lo * np.uint64(m_lo)
    t1 = x_lo * np.uint64(m_hi)
    t2 = x_hi * np.uint64(m_lo)
    mid = (t0 >> np.uint64(32)) + (t1 & np.uint64(_LO32)) + (t2 & np.uint64(_LO32))
    hi = (x_hi * np.uint64(m_hi)) + (t1 >> np.uint64(32)) + (t2 >> np.uint64(32)) \
        + (mid >> np.uint64(32))
    return hi, lo


def philox_block_vec(c0, c1, c2, c3, key0, key1):
    """Vectorized Philox4x64-10: four uint64 output lanes per counter."""
    # key schedule on Python ints; numpy scalar adds would warn on wrap
    keys = [(np.uint64((key0 + r * PHILOX_W0) & _MASK64),
             np.uint64((key1 + r * PHILOX_W1) & _MASK64))
            for r in range(10)]
    for k0, k1 in keys:
        hi0, lo0 = _mulhilo_vec(PHILOX_M0, c0)
        hi1, lo1 = _mulhilo_vec(PHILOX_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def philox_block(c0, c1, c2, c3, key0, key1):
    """Scalar Philox4x64-10 on Python ints; reference for the vector path."""
    k0, k1 = key0, key1
    for _ in range(10):
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        hi0, lo0 = (p0 >> 64) & _MASK64, p0 & _MASK64
        hi1, lo1 = (p1 >> 64) & _MASK64, p1 & _MASK64
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + PHILOX_W0) & _MASK64
        k1 = (k1 + PHILOX_W1) & _MASK64
    return c0, c1, c2, c3


def block_uniforms(seed, purpose, trial0, ntrials, nwords):
    """Uniforms in [0, 1) for trials trial0..trial0+ntrials-1.

    Returns an (ntrials, nwords) float64 array; row t holds words
    0..nwords-1 of the (seed, purpose, trial0 + t) stream.
    """
    if nwords == 0:
        return np.empty((ntrials, 0), dtype=np.float64)
    nblocks = (nwords + 3) // 4
    c0 = np.broadcast_to(
        np.arange(nblocks, dtype=np.uint64), (ntrials, nblocks)).ravel()
    c1 = np.repeat(
        np.arange(trial0, trial0 + ntrials, dtype=np.uint64), nblocks)
    c2 = np.full(ntrials * nblocks, purpose, dtype=np.uint64)
    c3 = np.zeros(ntrials * nblocks, dtype=np.uint64)
    x0, x1, x2, x3 = philox_block_vec(c0, c1, c2, c3, seed & _MASK64, 0)
    words = np.empty((ntrials * nblocks, 4), dtype=np.uint64)
    words[:, 0] = x0
    words[:, 1] = x1
    words[:, 2] = x2
    words[:, 3] = x3
    words = words.reshape(ntrials, nblocks * 4)[:, :nwords]
    return (words >> np.uint64(11)).astype(np.float64) * _U01_SCALE


class Stream:
    """Sequential view of one (seed, purpose, trial) stream.

    Rules consume internal randomness through this interface one
    uniform at a time; word order matches `block_uniforms` exactly.
    """

    def __init__(self, seed, purpose, trial):
        self._seed = seed & _MASK64
        self._purpose = purpose
        self._trial = trial & _MASK64
        self._word = 0
        self._buf = ()

    def next_uniform(self):
        lane = self._word & 3
        if lane == 0:
            self._buf = philox_block(
                self._word >> 2, self._trial, self._purpose, 0,
                self._seed, 0)
        self._word += 1
        return (self._buf[lane] >> 11) * _U01_SCALE

    def uniforms(self, count):
        """The next `count` uniforms as a float64 array."""
        if count < 64:
            return np.array([self.next_uniform() for _ in range(count)])
        b0 = self._word >> 2
        b1 = (self._word + count - 1) >> 2
        nblocks = b1 - b0 + 1
        c0 = np.arange(b0, b1 + 1, dtype=np.uint64)
        c1 = np.full(nblocks, self._trial, dtype=np.uint64)
        c2 = np.full(nblocks, self._purpose, dtype=np.uint64)
        c3 = np.zeros(nblocks, dtype=np.uint64)
        x0, x1, x2, x3 = philox_block_vec(c0, c1, c2, c3, self._seed, 0)
        words = np.empty((nblocks, 4), dtype=np.uint64)
        words[:, 0] = x0
        words[:, 1] = x1
        words[:, 2] = x2
        words[:, 3] = x3
        flat = words.ravel()
        lo = self._word - 4 * b0
        out = (flat[lo:lo + count] >> np.uint64(11)).astype(np.float64) * _U01_SCALE
        self._word += count
        if self._word & 3:
            blk = philox_block(self._word >> 2, self._trial, self._purpose,
                               0, self._seed, 0)
            self._buf = blk
        return out
