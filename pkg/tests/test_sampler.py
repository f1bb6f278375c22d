import numpy as np
import pytest
from scipy import stats

from core.sampler import CoefficientSampler, sampler_from_config, spawn_seeds, spawn_streams, truncated_pareto_cdf


def test_same_seed_same_stream():
    a = CoefficientSampler(kind="cauchy", seed=42).sample_many(100)
    b = CoefficientSampler(kind="cauchy", seed=42).sample_many(100)
    assert np.array_equal(a, b)


def test_with_seed_restarts_the_stream():
    sampler = CoefficientSampler(kind="pareto", alpha=1.5, seed=1)
    first = sampler.sample_many(10)
    again = sampler.with_seed(1).sample_many(10)
    assert np.array_equal(first, again)


@pytest.mark.parametrize("kwargs", [
    {"kind": "cauchy", "truncation": 3.0},
    {"kind": "pareto", "alpha": 1.5, "truncation": 5.0},
    {"kind": "pareto", "alpha": 2.0},
])
def test_single_draws_follow_the_batch_stream(kwargs):
    singles = CoefficientSampler(seed=11, **kwargs)
    one_by_one = [singles.sample() for _ in range(600)]
    batched = CoefficientSampler(seed=11, **kwargs).sample_many(600)
    assert np.array_equal(one_by_one, batched)


def test_mixed_draw_sizes_share_one_stream():
    mixed = CoefficientSampler(kind="cauchy", truncation=2.0, seed=8)
    values = np.concatenate([mixed.sample_many(5), [mixed.sample()], mixed.sample_many(300)])
    assert np.array_equal(values, CoefficientSampler(kind="cauchy", truncation=2.0, seed=8).sample_many(306))


def test_truncation_bound_respected():
    values = CoefficientSampler(kind="cauchy", truncation=3.0, seed=5).sample_many(5000)
    assert values.shape == (5000,)
    assert np.all(np.abs(values) <= 3.0)


def test_pareto_magnitudes_at_least_one_and_signed():
    values = CoefficientSampler(kind="pareto", alpha=2.0, seed=9).sample_many(4000)
    assert np.all(np.abs(values) >= 1.0)
    assert 0.4 < np.mean(values > 0) < 0.6


def test_truncated_pareto_matches_cdf():
    bound = 10.0
    values = CoefficientSampler(kind="pareto", alpha=1.2, truncation=bound, seed=17).sample_many(5000)
    result = stats.kstest(np.abs(values), lambda x: truncated_pareto_cdf(x, 1.2, bound))
    assert result.pvalue > 1e-3


def test_cdf_endpoints():
    assert truncated_pareto_cdf(1.0, 2.0, 5.0) == pytest.approx(0.0)
    assert truncated_pareto_cdf(5.0, 2.0, 5.0) == pytest.approx(1.0)
    assert truncated_pareto_cdf(0.5, 2.0, None) == 0.0


def test_cauchy_median_magnitude():
    # |standard Cauchy| has median 1
    values = CoefficientSampler(kind="cauchy", seed=3).sample_many(20000)
    assert np.median(np.abs(values)) == pytest.approx(1.0, abs=0.05)


def test_constant():
    sampler = CoefficientSampler(kind="constant", value=-2.5)
    assert np.all(sampler.sample_many(7) == -2.5)
    assert sampler.config()["value"] == -2.5


@pytest.mark.parametrize("kwargs", [
    {"kind": "gaussian"},
    {"kind": "pareto", "alpha": 0.0},
    {"kind": "cauchy", "truncation": -1.0},
    {"kind": "pareto", "truncation": 0.5},
])
def test_invalid_parameters(kwargs):
    with pytest.raises(ValueError):
        CoefficientSampler(**kwargs)


def test_empty_draw():
    assert CoefficientSampler(seed=0).sample_many(0).shape == (0,)


def test_spawned_seeds_are_stable_and_distinct():
    seeds = spawn_seeds(2024, 8)
    assert seeds == spawn_seeds(2024, 8)
    assert len(set(seeds)) == 8


def test_spawned_streams_differ():
    a, b = spawn_streams(7, 2)
    assert not np.array_equal(a.random(5), b.random(5))


def test_config_round_trip():
    sampler = CoefficientSampler(kind="pareto", alpha=1.5, truncation=20.0, seed=4)
    rebuilt = sampler_from_config(sampler.config())
    assert np.array_equal(rebuilt.sample_many(10), sampler.with_seed(4).sample_many(10))
