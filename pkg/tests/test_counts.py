import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from svymix.adjust import AdjustedState
from svymix.counts import (
    INTEGER_CUTPOINTS,
    LOG_CUTPOINTS,
    CutpointScheme,
    count_interval,
    log_transform_competitor,
    pmf_from_normal,
    pmf_from_state,
    pmf_from_weights,
    rounded_kernel_sweep,
    sample_latents,
    tail_mass,
)
from svymix.dpmm import DpmmPriors, MixtureState
from svymix.samplers import RngStream


def make_state(weights, means, variances, alloc, alpha=1.0):
    weights = np.asarray(weights, dtype=float)
    return MixtureState(
        sticks=np.ones_like(weights),
        weights=weights,
        means=np.asarray(means, dtype=float),
        variances=np.asarray(variances, dtype=float),
        alloc=np.asarray(alloc, dtype=np.int64),
        alpha=alpha,
    )


class TestCutpoints:
    def test_integer_zero_cell(self):
        assert count_interval(0, INTEGER_CUTPOINTS) == (-np.inf, 1.0)

    def test_integer_general_cell(self):
        assert count_interval(5, INTEGER_CUTPOINTS) == (5.0, 6.0)

    def test_log_cell(self):
        lo, hi = count_interval(3, LOG_CUTPOINTS)
        assert lo == pytest.approx(math.log(3), rel=1e-12)
        assert hi == pytest.approx(math.log(4), rel=1e-12)
        assert (lo, hi) == pytest.approx((1.0986, 1.3863), abs=1e-4)

    def test_log_zero_cell(self):
        assert count_interval(0, LOG_CUTPOINTS) == (-np.inf, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            count_interval(-1, INTEGER_CUTPOINTS)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            CutpointScheme("quadratic")

    @given(st.integers(0, 500))
    @settings(max_examples=50)
    def test_strictly_increasing(self, k):
        for scheme in (INTEGER_CUTPOINTS, LOG_CUTPOINTS):
            lo, hi = count_interval(k, scheme)
            assert lo < hi

    def test_proxy_interior(self):
        counts = np.arange(0, 40)
        for scheme in (INTEGER_CUTPOINTS, LOG_CUTPOINTS):
            proxy = scheme.latent_proxy(counts)
            edges = scheme.edges(39)
            assert np.all(proxy > edges[counts])
            assert np.all(proxy < edges[counts + 1])


class TestLatents:
    def test_log_zero_cell_half_normal(self):
        state = make_state([1.0], [0.0], [1.0], np.zeros(100_000, dtype=int))
        counts = np.zeros(100_000, dtype=int)
        latents = sample_latents(counts, state, LOG_CUTPOINTS, RngStream(0))
        assert np.all(latents < 0)
        assert abs(latents.mean() + math.sqrt(2 / math.pi)) < 0.01

    def test_degenerate_component(self):
        state = make_state([1.0], [5.4], [1e-18], np.zeros(50, dtype=int))
        counts = np.full(50, 5, dtype=int)
        latents = sample_latents(counts, state, INTEGER_CUTPOINTS, RngStream(1))
        assert np.allclose(latents, 5.4, atol=1e-6)

    def test_latents_respect_cells(self):
        gen = RngStream(2).gen
        counts = gen.poisson(6.0, size=100_000)
        alloc = gen.integers(0, 3, size=100_000)
        state = make_state([0.4, 0.3, 0.3], [2.0, 6.0, 15.0], [4.0, 9.0, 16.0], alloc)
        for scheme in (INTEGER_CUTPOINTS, LOG_CUTPOINTS):
            latents = sample_latents(counts, state, scheme, RngStream(3))
            edges = scheme.edges(int(counts.max()))
            assert np.all(latents >= edges[counts])
            assert np.all(latents < edges[counts + 1])


class TestPmf:
    def test_log_scheme_standard_normal_zero(self):
        state = make_state([1.0], [0.0], [1.0], [0])
        pmf = pmf_from_weights(np.array([1.0]), state, LOG_CUTPOINTS, 10)
        assert pmf[0] == pytest.approx(0.5, rel=1e-12)

    def test_integer_scheme_standard_normal_zero(self):
        state = make_state([1.0], [0.0], [1.0], [0])
        pmf = pmf_from_weights(np.array([1.0]), state, INTEGER_CUTPOINTS, 10)
        assert pmf[0] == pytest.approx(stats.norm.cdf(1.0), rel=1e-12)
        assert pmf[0] == pytest.approx(0.8413, abs=5e-5)

    def test_total_mass_with_tail(self):
        state = make_state([0.6, 0.4], [1.2, 2.8], [0.8, 2.5], [0, 1])
        for scheme in (INTEGER_CUTPOINTS, LOG_CUTPOINTS):
            for k_max in (0, 3, 50):
                pmf = pmf_from_weights(state.weights, state, scheme, k_max)
                tail = tail_mass(state, state.weights, scheme, k_max)
                assert np.all(pmf >= 0)
                assert abs(pmf.sum() + tail - 1.0) < 1e-10

    def test_adjusted_weights_used(self):
        state = make_state([0.5, 0.5], [0.0, 3.0], [1.0, 1.0], [0, 1])
        adj = AdjustedState(weights=np.array([1.0, 0.0]))
        pmf = pmf_from_state(state, adj, INTEGER_CUTPOINTS, 5)
        single = make_state([1.0], [0.0], [1.0], [0])
        expected = pmf_from_weights(np.array([1.0]), single, INTEGER_CUTPOINTS, 5)
        assert np.allclose(pmf, expected, rtol=1e-12)

    def test_raw_state_weights_when_unadjusted(self):
        state = make_state([0.3, 0.7], [1.0, 6.0], [1.0, 4.0], [0, 1])
        pmf = pmf_from_state(state, None, INTEGER_CUTPOINTS, 8)
        manual = pmf_from_weights(state.weights, state, INTEGER_CUTPOINTS, 8)
        assert np.array_equal(pmf, manual)


class TestLogTransform:
    def test_values(self):
        out = log_transform_competitor(np.array([0, 1]))
        assert out[0] == pytest.approx(math.log(0.5), rel=1e-12)
        assert out[1] == pytest.approx(math.log(1.5), rel=1e-12)
        assert out[0] == pytest.approx(-0.6931, abs=5e-5)
        assert out[1] == pytest.approx(0.4055, abs=5e-5)

    @given(st.lists(st.integers(0, 10_000), min_size=2, max_size=50))
    @settings(max_examples=50)
    def test_strictly_increasing(self, counts):
        counts = np.array(sorted(set(counts)))
        out = log_transform_competitor(counts)
        assert np.all(np.diff(out) > 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            log_transform_competitor(np.array([-1]))


class TestPmfFromNormal:
    def test_matches_manual_cdf_differences(self):
        mean = np.array([0.5, 2.0])
        sd = np.array([1.0, 0.7])
        k_max = 6
        pmf = pmf_from_normal(mean, sd, k_max)
        ks = np.arange(k_max + 1)
        for i in range(2):
            upper = stats.norm.cdf(np.log(ks + 1.0), mean[i], sd[i])
            lower = stats.norm.cdf(
                np.where(ks == 0, -np.inf, np.log(np.maximum(ks, 1))), mean[i], sd[i]
            )
            assert np.allclose(pmf[i], upper - lower, rtol=1e-10)


class TestAugmentationConsistency:
    def test_latent_cell_frequencies_match_pmf(self):
        # one fixed component: counts generated by rounding its normal draws
        # must land in each cell at the model pmf rate
        mu, sd = 1.3, 0.9
        gen = RngStream(4).gen
        latent = gen.normal(mu, sd, size=200_000)
        edges = INTEGER_CUTPOINTS.edges(60)
        counts = np.clip(np.searchsorted(edges, latent, side="right") - 1, 0, None)
        state = make_state([1.0], [mu], [sd**2], np.zeros(len(counts), dtype=int))
        pmf = pmf_from_weights(np.array([1.0]), state, INTEGER_CUTPOINTS, 10)
        freq = np.bincount(np.minimum(counts, 10), minlength=11) / len(counts)
        tail = tail_mass(state, np.array([1.0]), INTEGER_CUTPOINTS, 10)
        freq[10] -= tail  # everything over 10 collapsed into the last bin
        assert np.allclose(freq[:10], pmf[:10], atol=0.004)

    def test_sweep_returns_consistent_latents(self):
        gen = RngStream(5).gen
        counts = gen.poisson(4.0, size=300)
        proxy = INTEGER_CUTPOINTS.latent_proxy(counts)
        priors = DpmmPriors.from_data(proxy, trunc=8)
        from svymix.dpmm import init_state_from_size

        rng = RngStream(6)
        state = init_state_from_size(len(counts), priors, rng)
        for _ in range(30):
            latents, state = rounded_kernel_sweep(
                counts, state, INTEGER_CUTPOINTS, priors, rng
            )
        edges = INTEGER_CUTPOINTS.edges(int(counts.max()))
        assert np.all(latents >= edges[counts])
        assert np.all(latents < edges[counts + 1])
        assert abs(state.weights.sum() - 1.0) < 1e-12
