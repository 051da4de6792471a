"""Stream determinism, splitting, and basic output quality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statforge.rng import RandomStream, stream_split


def test_same_key_bit_identical():
    a = RandomStream(123, 5).uniforms(1000)
    b = RandomStream(123, 5).uniforms(1000)
    assert np.array_equal(a, b)


def test_counter_continuation_matches_one_shot():
    s = RandomStream(9)
    first = s.uniforms(100)
    second = s.uniforms(100)
    merged = RandomStream(9).uniforms(200)
    assert np.array_equal(np.concatenate([first, second]), merged)


def test_split_is_stable_and_children_differ():
    root = RandomStream(77)
    assert np.array_equal(root.split(0).uniforms(100), root.split(0).uniforms(100))
    assert not np.array_equal(root.split(0).uniforms(100), root.split(1).uniforms(100))


def test_split_does_not_advance_parent():
    root = RandomStream(5)
    before = root.counter
    root.split(3)
    assert root.counter == before


def test_nested_splits_do_not_collide_with_flat_splits():
    root = RandomStream(31)
    flat = stream_split(root, 1).uniforms(64)
    nested = stream_split(stream_split(root, 0), 1).uniforms(64)
    assert not np.array_equal(flat, nested)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), sid=st.integers(0, 2**64 - 1))
def test_uniforms_always_in_unit_interval(seed, sid):
    u = RandomStream(seed, sid).uniforms(64)
    assert np.all((0.0 <= u) & (u < 1.0))
    v = RandomStream(seed, sid).uniforms_open(64)
    assert np.all((0.0 < v) & (v <= 1.0))


def test_uniform_moments():
    u = RandomStream(2).uniforms(1_000_000)
    assert abs(u.mean() - 0.5) < 4.0 / np.sqrt(12e6)
    assert abs(u.var() - 1.0 / 12.0) < 5e-4


def test_normals_standard_moments():
    z = RandomStream(3).normals(1_000_000)
    n = z.size
    assert abs(z.mean()) < 4.0 / np.sqrt(n)
    assert abs(z.var() - 1.0) < 4.0 * np.sqrt(2.0 / n)
    # symmetry of third moment
    assert abs((z**3).mean()) < 4.0 * np.sqrt(15.0 / n)


def test_lag_one_autocorrelation_small():
    u = RandomStream(11).uniforms(500_000) - 0.5
    corr = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(corr) < 4.0 / np.sqrt(u.size)


def test_raw_draws_negative_count_rejected():
    with pytest.raises(ValueError):
        RandomStream(1).raw(-1)


def test_odd_normal_count():
    z = RandomStream(4).normals(7)
    assert z.shape == (7,)
