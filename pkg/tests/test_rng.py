"""Counter-based RNG: cross-checks against numpy's Philox and the
stream/block addressing contract."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.random import Philox

from stopsim._philox import (PURPOSE_AUX, PURPOSE_RULE, PURPOSE_SAMPLES,
                             PURPOSE_VALUES, Stream, block_uniforms,
                             philox_block, philox_block_vec)

MASK64 = (1 << 64) - 1


def numpy_raw_block(seed, purpose, trial, block):
    """The four raw words numpy's Philox emits for our counter.

    numpy increments its 256-bit counter before generating each block,
    so ask it to start one below (with borrow across words).
    """
    want = block | (trial << 64) | (purpose << 128)
    start = (want - 1) % (1 << 256)
    counter = [(start >> (64 * i)) & MASK64 for i in range(4)]
    bg = Philox(key=np.array([seed, 0], dtype=np.uint64),
                counter=np.array(counter, dtype=np.uint64))
    return list(bg.random_raw(4))


@pytest.mark.parametrize("seed,purpose,trial,block", [
    (0, 0, 0, 0),
    (0, 0, 0, 1),
    (12345, PURPOSE_VALUES, 7, 3),
    (2**63 + 11, PURPOSE_RULE, 2**40, 0),
    (42, PURPOSE_AUX, 0, 0),          # borrow propagates past trial word
    (42, PURPOSE_SAMPLES, 5, 2**32),
])
def test_scalar_block_matches_numpy(seed, purpose, trial, block):
    mine = philox_block(block, trial, purpose, 0, seed, 0)
    assert list(mine) == numpy_raw_block(seed, purpose, trial, block)


def test_vector_block_matches_scalar():
    blocks = np.arange(50, dtype=np.uint64)
    c1 = np.full(50, 9, dtype=np.uint64)
    c2 = np.full(50, PURPOSE_VALUES, dtype=np.uint64)
    c3 = np.zeros(50, dtype=np.uint64)
    vec = philox_block_vec(blocks, c1, c2, c3, 77, 0)
    for b in range(50):
        scalar = philox_block(b, 9, PURPOSE_VALUES, 0, 77, 0)
        assert [int(w[b]) for w in vec] == list(scalar)


def test_block_uniforms_layout():
    # trial-major: row t is the word sequence of trial t0 + t
    arr = block_uniforms(5, PURPOSE_SAMPLES, 100, 4, 11)
    assert arr.shape == (4, 11)
    for t in range(4):
        row = block_uniforms(5, PURPOSE_SAMPLES, 100 + t, 1, 11)[0]
        assert np.array_equal(arr[t], row)


def test_stream_matches_block_uniforms():
    ref = block_uniforms(31, PURPOSE_RULE, 6, 1, 40)[0]
    s = Stream(31, PURPOSE_RULE, 6)
    seq = np.array([s.next_uniform() for _ in range(40)])
    assert np.array_equal(seq, ref)


def test_stream_bulk_matches_scalar_interleaved():
    a = Stream(8, PURPOSE_VALUES, 0)
    b = Stream(8, PURPOSE_VALUES, 0)
    got = []
    got.extend(a.uniforms(3))
    got.append(a.next_uniform())
    got.extend(a.uniforms(70))
    got.extend(a.uniforms(2))
    want = [b.next_uniform() for _ in range(76)]
    assert got == pytest.approx(want, abs=0)


def test_purposes_and_trials_are_distinct_streams():
    base = block_uniforms(1, PURPOSE_SAMPLES, 0, 1, 16)[0]
    assert not np.array_equal(base, block_uniforms(1, PURPOSE_VALUES, 0, 1, 16)[0])
    assert not np.array_equal(base, block_uniforms(1, PURPOSE_SAMPLES, 1, 1, 16)[0])
    assert not np.array_equal(base, block_uniforms(2, PURPOSE_SAMPLES, 0, 1, 16)[0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, MASK64), purpose=st.integers(0, 3),
       trial=st.integers(0, 2**62), count=st.integers(1, 70))
def test_uniform_range_and_determinism(seed, purpose, trial, count):
    u = block_uniforms(seed, purpose, trial, 1, count)[0]
    again = block_uniforms(seed, purpose, trial, 1, count)[0]
    assert np.array_equal(u, again)
    assert np.all(u >= 0.0)
    assert np.all(u <= 1.0 - 2.0**-53)


def test_uniforms_are_53_bit_multiples():
    u = block_uniforms(3, 0, 0, 1, 64)[0]
    scaled = u * 2.0**53
    assert np.array_equal(scaled, np.floor(scaled))


def test_mean_is_plausibly_uniform():
    u = block_uniforms(17, PURPOSE_AUX, 0, 2000, 8).ravel()
    assert abs(u.mean() - 0.5) < 4 * (1 / np.sqrt(12 * u.size))
