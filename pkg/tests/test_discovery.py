import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from acmix.discovery import DiscoveryConfig, LagSet, discover, parse_lags, rank_lags, serialize_lags
from acmix.errors import InvalidArgument, MalformedHeader
from acmix.spectrum import autocorrelation_direct


def test_rank_orders_by_score_then_lag():
    values = np.array([100.0, 5.0, 9.0, 9.0, 1.0, 9.0, 7.0])
    assert rank_lags(values, DiscoveryConfig(n=4)).lags == (2, 3, 5, 6)


def test_rank_excludes_zero_lag():
    values = np.array([1e9, 1.0, 2.0])
    assert rank_lags(values, DiscoveryConfig(n=5)).lags == (2, 1)


def test_rank_bounds():
    values = np.arange(20, 0, -1, dtype=float)
    assert rank_lags(values, DiscoveryConfig(n=3, min_lag=5, max_lag=9)).lags == (5, 6, 7)
    assert rank_lags(values, DiscoveryConfig(n=3, min_lag=25)).lags == ()


def test_rank_scores_are_profile_values():
    values = np.array([10.0, 3.0, 8.0, -2.0])
    ls = rank_lags(values, DiscoveryConfig(n=3))
    assert ls.scores == (8.0, 3.0, -2.0)


def test_exclusion_replace_and_shrink():
    values = np.array([50.0, 9.0, 8.0, 7.0, 6.0])
    replace = DiscoveryConfig(n=2, exclude=frozenset({1}))
    shrink = DiscoveryConfig(n=2, exclude=frozenset({1}), replace_excluded=False)
    assert rank_lags(values, replace).lags == (2, 3)
    assert rank_lags(values, shrink).lags == (2,)


def test_near_ties_do_not_flip_on_rounding_noise():
    values = np.array([4.0, 1.0, 1.0 + 1e-15, 1.0 - 1e-15])
    assert rank_lags(values, DiscoveryConfig(n=3)).lags == (1, 2, 3)


@pytest.mark.parametrize("period", [5, 7, 13, 100])
def test_discover_finds_period(period):
    rng = np.random.default_rng(period)
    x = np.resize(rng.integers(0, 256, period, dtype=np.uint8), 40 * period)
    assert discover(x, DiscoveryConfig(n=1)).lags == (period,)


def test_discover_window_cap():
    rng = np.random.default_rng(0)
    head = np.resize(rng.integers(0, 256, 9, dtype=np.uint8), 900)
    tail = np.resize(rng.integers(0, 256, 31, dtype=np.uint8), 30000)
    x = np.concatenate([head, tail])
    assert discover(x, DiscoveryConfig(n=1, window_cap=900)).lags == (9,)


def test_config_validation():
    for kwargs in ({"n": 0}, {"n": 256}, {"min_lag": 0}, {"min_lag": 5, "max_lag": 4}, {"window_cap": 0}):
        with pytest.raises(InvalidArgument):
            DiscoveryConfig(**kwargs)


def test_lagset_validation():
    with pytest.raises(InvalidArgument):
        LagSet((3, 3))
    with pytest.raises(InvalidArgument):
        LagSet((0,))
    with pytest.raises(InvalidArgument):
        LagSet((1 << 32,))


def test_serialization_layout():
    assert serialize_lags(LagSet((1, 768, 0x01020304))) == bytes.fromhex("01000000" "00030000" "04030201")


@given(st.lists(st.integers(1, (1 << 32) - 1), max_size=20, unique=True))
def test_serialization_round_trip(lags):
    ls = LagSet(tuple(lags))
    blob = serialize_lags(ls)
    assert len(blob) == 4 * len(lags)
    assert parse_lags(blob, len(lags)) == ls


@pytest.mark.parametrize("blob,count", [(b"\x01\x00\x00", 1), (bytes(4), 1), (bytes.fromhex("0200000002000000"), 2)])
def test_parse_rejects(blob, count):
    with pytest.raises(MalformedHeader):
        parse_lags(blob, count)


@given(arrays(np.uint8, st.integers(2, 300)), st.integers(1, 12))
def test_rank_matches_oracle_sort(x, n):
    prof = autocorrelation_direct(x)
    ls = rank_lags(prof, DiscoveryConfig(n=n))
    v = prof.values
    assert len(ls) == min(n, x.size - 1)
    assert all(1 <= lag < x.size for lag in ls)
    # every unselected lag scores no higher than the last selected one
    last = v[ls.lags[-1]]
    others = np.delete(v[1:], [lag - 1 for lag in ls])
    assert np.all(others <= last + 1e-9 * max(1.0, abs(v).max()))
    scores = [v[lag] for lag in ls]
    assert all(a >= b - 1e-9 * max(1.0, abs(v).max()) for a, b in zip(scores, scores[1:]))


def test_hand_ranked_example():
    assert rank_lags(np.array([10.0, 3, 7, 7, 1]), DiscoveryConfig(n=2)).lags == (2, 3)


def test_saturation():
    ls = rank_lags(np.array([10.0, 3, 7, 7, 1]), DiscoveryConfig(n=50))
    assert ls.lags == (2, 3, 1, 4)


def test_single_sample_has_no_lags():
    assert discover(b"x").lags == ()


def test_constant_file_still_discovers_something_harmless():
    ls = discover(bytes(500), DiscoveryConfig(n=3))
    assert ls.lags == (1, 2, 3)


def test_period_13_example():
    rng = np.random.default_rng(13)
    x = np.resize(rng.integers(0, 256, 13, dtype=np.uint8), 4096)
    assert discover(x, DiscoveryConfig(n=1)).lags == (13,)
    assert rank_lags(autocorrelation_direct(x), DiscoveryConfig(n=1)).lags == (13,)


def test_serialize_examples():
    assert serialize_lags(LagSet((7,))) == bytes([7, 0, 0, 0])
    assert len(serialize_lags(LagSet(tuple(range(1, 11))))) == 40


@given(arrays(np.uint8, st.integers(2, 500)))
def test_discover_matches_direct_ranking(x):
    cfg = DiscoveryConfig(n=5)
    assert discover(x, cfg) == rank_lags(autocorrelation_direct(x), cfg)


@given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-1e6, 1e6)),
       st.floats(1e-3, 1e3), st.integers(1, 20))
def test_scale_invariance(values, c, n):
    cfg = DiscoveryConfig(n=n)
    assert rank_lags(values * c, cfg).lags == rank_lags(values, cfg).lags


@given(arrays(np.float64, st.integers(2, 200), elements=st.sampled_from([0.0, 1.0, 2.0, 5.0])), st.integers(1, 20))
def test_total_order_with_ties(values, n):
    ls = rank_lags(values, DiscoveryConfig(n=n))
    keys = [(-values[lag], lag) for lag in ls]
    assert keys == sorted(keys)
