import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from svymix.harness import builtin_scenario
from svymix.survey import (
    NormalMixture,
    PoissonMixture,
    Population,
    PopulationSpec,
    StratumSpec,
    SurveySample,
    draw_stratified_sample,
    effective_c,
    generate_population,
    load_population_spec,
    load_sample,
    normalize_weights,
    save_sample,
)


def case1_spec():
    return builtin_scenario("case1").population


class TestDensitySpecs:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            NormalMixture(((0.5, 0.0, 1.0), (0.4, 1.0, 1.0)))

    def test_sd_positive(self):
        with pytest.raises(ValueError):
            NormalMixture(((1.0, 0.0, 0.0),))

    def test_rate_positive(self):
        with pytest.raises(ValueError):
            PoissonMixture(((1.0, -3.0),))

    def test_normal_moments(self):
        d = NormalMixture(((0.2, -2.0, 1.0), (0.8, 2.0, 0.8)))
        assert d.mean() == pytest.approx(0.2 * -2 + 0.8 * 2)
        grid = np.linspace(-10, 10, 5)
        manual = 0.2 * stats.norm.pdf(grid, -2, 1) + 0.8 * stats.norm.pdf(grid, 2, 0.8)
        assert np.allclose(d.pdf(grid), manual, rtol=1e-12)

    def test_poisson_pmf_matches_scipy(self):
        d = PoissonMixture(((0.2, 15.0), (0.8, 4.0)))
        ks = np.arange(30)
        manual = 0.2 * stats.poisson.pmf(ks, 15) + 0.8 * stats.poisson.pmf(ks, 4)
        assert np.allclose(d.pmf(ks), manual, rtol=1e-10)


class TestGeneratePopulation:
    def test_case1_sizes(self):
        pop = generate_population(case1_spec(), seed=0)
        sizes = {m: len(v) for m, v in pop.values.items()}
        assert sizes == {1: 650_000, 2: 300_000, 3: 50_000}
        assert sum(sizes.values()) == 1_000_000

    def test_standard_normal_stratum_mean(self):
        spec = PopulationSpec.from_strata(
            [StratumSpec(1, 1000, 10, NormalMixture(((1.0, 0.0, 1.0),)))]
        )
        pop = generate_population(spec, seed=3)
        assert abs(pop.values[1].mean()) < 4 / np.sqrt(1000)

    def test_poisson_mixture_frequency(self):
        spec = PopulationSpec.from_strata(
            [StratumSpec(1, 1_000_000, 10, PoissonMixture(((0.2, 15.0), (0.8, 4.0))))]
        )
        pop = generate_population(spec, seed=4)
        freq4 = (pop.values[1] == 4).mean()
        oracle = 0.2 * stats.poisson.pmf(4, 15) + 0.8 * stats.poisson.pmf(4, 4)
        assert abs(freq4 - oracle) < 0.003

    def test_stratum_means_converge(self):
        # 5-sigma band at each stratum's own size
        spec = case1_spec()
        pop = generate_population(spec, seed=5)
        for stratum in spec.strata:
            values = pop.values[stratum.id]
            mu = stratum.density.mean()
            sd = np.sqrt(stratum.density.variance())
            assert abs(values.mean() - mu) < 5 * sd / np.sqrt(stratum.population_size)

    def test_deterministic(self):
        a = generate_population(case1_spec(), seed=6)
        b = generate_population(case1_spec(), seed=6)
        assert all(np.array_equal(a.values[m], b.values[m]) for m in a.values)


class TestDrawSample:
    def test_case1_design(self):
        spec = case1_spec()
        pop = generate_population(spec, seed=0)
        sample = draw_stratified_sample(pop, spec, seed=0)
        assert len(sample) == 1500
        assert sorted(set(sample.weights)) == [100.0, 600.0, 1300.0]
        assert np.bincount(sample.strata)[1:].tolist() == [500, 500, 500]

    def test_census_is_permutation(self):
        spec = PopulationSpec.from_strata(
            [StratumSpec(1, 200, 200, NormalMixture(((1.0, 0.0, 1.0),)))]
        )
        pop = generate_population(spec, seed=1)
        sample = draw_stratified_sample(pop, spec, seed=1)
        assert np.array_equal(np.sort(sample.values), np.sort(pop.values[1]))
        assert np.all(sample.weights == 1.0)

    def test_case4_weights(self):
        spec = builtin_scenario("case4").population
        pop = generate_population(spec, seed=2)
        sample = draw_stratified_sample(pop, spec, seed=2)
        assert len(sample) == 2000
        for m in (1, 37, 100):
            w = sample.weights[sample.strata == m]
            assert np.all(w == 50.0 * m)

    def test_oversampling_rejected(self):
        with pytest.raises(ValueError):
            StratumSpec(1, 10, 11, NormalMixture(((1.0, 0.0, 1.0),)))

    def test_sample_larger_than_pool(self):
        spec = PopulationSpec.from_strata(
            [StratumSpec(1, 100, 50, NormalMixture(((1.0, 0.0, 1.0),)))]
        )
        pop = Population(spec=spec, values={1: np.zeros(10)})
        with pytest.raises(ValueError, match="stratum 1"):
            draw_stratified_sample(pop, spec, seed=0)

    def test_weight_sum_identity(self):
        # weights N_m/n_m with full quotas reproduce the population size
        spec = case1_spec()
        pop = generate_population(spec, seed=3)
        sample = draw_stratified_sample(pop, spec, seed=3)
        assert sample.weights.sum() == spec.total_size


class TestWeights:
    def make(self, weights):
        n = len(weights)
        return SurveySample(
            values=np.zeros(n),
            strata=np.zeros(n, dtype=int),
            weights=np.asarray(weights, dtype=float),
            population_size=1000,
        )

    def test_case1_effective_c_is_one(self):
        spec = case1_spec()
        pop = generate_population(spec, seed=4)
        sample = draw_stratified_sample(pop, spec, seed=4)
        assert effective_c(sample) == 1.0

    def test_self_weighting(self):
        sample = self.make([250.0] * 4)
        assert effective_c(sample) == 1.0

    def test_linearity(self):
        a = self.make([100.0, 300.0])
        b = self.make([200.0, 600.0])
        assert effective_c(b) == 2 * effective_c(a)

    def test_equal_weights_normalize(self):
        assert np.allclose(normalize_weights(self.make([7.0] * 4)), 0.25)

    def test_design_weights_normalize(self):
        w = normalize_weights(self.make([1300.0, 600.0, 100.0]))
        assert np.allclose(w, [0.65, 0.30, 0.05])

    @given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=20),
           st.floats(0.5, 100.0))
    @settings(max_examples=50)
    def test_scale_invariance(self, weights, k):
        a = normalize_weights(self.make(weights))
        b = normalize_weights(self.make([w * k for w in weights]))
        assert np.allclose(a, b, rtol=1e-9)
        assert abs(a.sum() - 1.0) < 1e-12

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError):
            self.make([1.0, 0.0])


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        spec = case1_spec()
        pop = generate_population(spec, seed=5)
        sample = draw_stratified_sample(pop, spec, seed=5)
        path = tmp_path / "sample.csv"
        save_sample(path, sample, population_spec=spec)
        assert load_sample(path) == sample
        assert load_population_spec(path) == spec

    def test_count_sample_round_trip(self, tmp_path):
        spec = builtin_scenario("case3").population
        pop = generate_population(spec, seed=5)
        sample = draw_stratified_sample(pop, spec, seed=5)
        path = tmp_path / "counts.csv"
        save_sample(path, sample, population_spec=spec)
        loaded = load_sample(path)
        assert loaded == sample
        assert loaded.space == "count"

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("y,stratum,weight\n")
        path.with_suffix(".meta.json").write_text('{"population_size": 10}')
        with pytest.raises(ValueError, match="no records"):
            load_sample(path)

    def test_negative_weight_rejected_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,stratum,weight\n1.0,1,5.0\n2.0,1,-3.0\n")
        path.with_suffix(".meta.json").write_text('{"population_size": 10}')
        with pytest.raises(ValueError, match="line 3"):
            load_sample(path)

    def test_malformed_line_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,stratum,weight\n1.0,1\n")
        path.with_suffix(".meta.json").write_text('{"population_size": 10}')
        with pytest.raises(ValueError, match="line 2"):
            load_sample(path)


class TestSpecValidation:
    def test_total_size_must_match(self):
        with pytest.raises(ValueError):
            PopulationSpec(
                (StratumSpec(1, 100, 10, NormalMixture(((1.0, 0.0, 1.0),))),),
                total_size=99,
            )

    def test_duplicate_ids_rejected(self):
        s = StratumSpec(1, 100, 10, NormalMixture(((1.0, 0.0, 1.0),)))
        with pytest.raises(ValueError):
            PopulationSpec.from_strata([s, s])

    def test_mixed_spaces_rejected(self):
        with pytest.raises(ValueError):
            PopulationSpec.from_strata(
                [
                    StratumSpec(1, 100, 10, NormalMixture(((1.0, 0.0, 1.0),))),
                    StratumSpec(2, 100, 10, PoissonMixture(((1.0, 4.0),))),
                ]
            )

    def test_dict_round_trip(self):
        spec = builtin_scenario("case3").population
        assert PopulationSpec.from_dict(spec.to_dict()) == spec
