import math
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from ratemse import (
    BAND1,
    BAND2,
    Constellation,
    InputDesign,
    SimConfig,
    StatePrior,
    TwoBandModel,
    convergence_study,
    empirical_mse,
    generate_ccc,
    map_estimate,
    ml_estimate,
    simulate_observations,
    trial_rng,
)
from ratemse import CCCodeword
from ratemse.errors import SimulationError
from ratemse.montecarlo import paired_estimates


class TestGenerateCcc:
    def test_exact_rounding(self, model):
        design = model.design(0.6)
        cw = generate_ccc(design, 10, seed=1)
        by_band = Counter(band for band, _ in cw.symbols)
        assert by_band[BAND1] == 6 and by_band[BAND2] == 4

    def test_tie_rule(self):
        design = InputDesign(labels=("a", "b"), pmf=(0.5, 0.5))
        cw = generate_ccc(design, 7, seed=3)
        # equal remainders 0.5: larger remainder first, then label order -> "a"
        assert cw.composition == {"a": 4, "b": 3}

    def test_composition_matches_type(self, model):
        design = model.design(0.37)
        cw = generate_ccc(design, 101, seed=9)
        assert Counter(cw.symbols) == cw.composition
        for x, p in zip(design.labels, design.pmf):
            assert abs(cw.composition.get(x, 0) - 101 * p) < 1.0

    def test_deterministic_given_seed(self, model):
        design = model.design(0.42)
        a = generate_ccc(design, 64, seed=5)
        b = generate_ccc(design, 64, seed=5)
        c = generate_ccc(design, 64, seed=6)
        assert a.symbols == b.symbols
        assert a.symbols != c.symbols
        assert a.composition == c.composition


class TestSimulateObservations:
    def test_band1_sample_variance(self, model):
        design = model.design(1.0)
        cw = generate_ccc(design, 50_000, seed=2)
        y = simulate_observations(model.channel, cw, 0.5, trial_rng(2, 50_000, 0))
        amps = np.asarray([amp for _, amp in cw.symbols])
        assert np.var(y - amps) == pytest.approx(model.sigma2, rel=0.03)

    def test_band2_sample_variance_tracks_state(self, model):
        design = model.design(0.0)
        cw = generate_ccc(design, 50_000, seed=2)
        for s in (0.2, 0.9):
            y = simulate_observations(model.channel, cw, s, trial_rng(3, 50_000, 1))
            amps = np.asarray([amp for _, amp in cw.symbols])
            assert np.var(y - amps) == pytest.approx(s + model.sigma2, rel=0.03)


class TestMlEstimate:
    def _codeword(self, model, n2=5):
        amp = model.constellation.points[0]
        symbols = tuple([(BAND2, amp)] * n2)
        return CCCodeword(symbols=symbols, composition={(BAND2, amp): n2})

    def test_stationary_point(self, model):
        cw = self._codeword(model)
        amp = model.constellation.points[0]
        # arrange observations with T / n2 = 1.2  ->  estimate 0.7
        obs = np.full(5, amp + math.sqrt(1.2))
        assert ml_estimate(model, cw, obs) == pytest.approx(0.7, rel=1e-12)

    def test_clipping_low_and_high(self, model):
        cw = self._codeword(model)
        amp = model.constellation.points[0]
        assert ml_estimate(model, cw, np.full(5, amp + math.sqrt(0.3))) == 0.0
        assert ml_estimate(model, cw, np.full(5, amp + math.sqrt(1.6))) == 1.0

    def test_unidentifiable_codeword(self, model):
        amp = model.constellation.points[0]
        cw = CCCodeword(symbols=((BAND1, amp),) * 4, composition={(BAND1, amp): 4})
        with pytest.raises(SimulationError, match="unidentifiable"):
            ml_estimate(model, cw, np.zeros(4))


class TestMapEstimate:
    def test_flat_prior_matches_ml_when_interior(self, model):
        flat_model = TwoBandModel(
            sigma2=model.sigma2, constellation=model.constellation, prior=StatePrior.beta(1, 1)
        )
        design = flat_model.design(0.0)
        cw = generate_ccc(design, 400, seed=11)
        y = simulate_observations(flat_model.channel, cw, 0.5, trial_rng(11, 400, 0))
        ml = ml_estimate(flat_model, cw, y)
        mp = map_estimate(flat_model.prior, flat_model, cw, y)
        assert 0.0 < ml < 1.0
        assert mp == pytest.approx(ml, abs=1e-8)

    def test_consistency_at_large_n(self, model):
        design = model.design(0.0)
        n = 100_000
        cw = generate_ccc(design, n, seed=4)
        rng = trial_rng(4, n, 0)
        s = float(model.prior.sample(rng))
        y = simulate_observations(model.channel, cw, s, rng)
        assert abs(map_estimate(model.prior, model, cw, y) - s) < 0.05

    def test_prior_pulls_toward_center(self, model):
        # paired trials: the symmetric prior moves the estimate toward 1/2
        # relative to ML in a decisive majority of trials
        base = SimConfig(model=model, t1=0.0, n_list=(50,), trials=1000, seed=17)
        states, est_map = paired_estimates(replace(base, estimator="map"), 50)
        _, est_ml = paired_estimates(replace(base, estimator="ml"), 50)
        moved = est_map - est_ml
        pulls = np.sign(0.5 - est_ml) * np.sign(moved)
        assert np.mean(pulls[np.abs(moved) > 1e-9] > 0) > 0.95

    def test_estimates_stay_in_support(self, model):
        cfg = SimConfig(model=model, t1=0.0, estimator="map", n_list=(100,), trials=500, seed=23)
        _, est = paired_estimates(cfg, 100)
        assert np.all((est >= 0.0) & (est <= 1.0))


class TestFastPathFidelity:
    def test_ks_distance_small(self, model):
        base = SimConfig(model=model, t1=0.0, estimator="map", n_list=(100,), trials=10_000, seed=31)
        _, fast = paired_estimates(replace(base, fast_path=True), 100)
        _, slow = paired_estimates(replace(base, fast_path=False), 100)
        ks = stats.ks_2samp(fast, slow).statistic
        assert ks < 0.02

    def test_confidence_intervals_overlap(self, model):
        base = SimConfig(model=model, t1=0.0, estimator="map", n_list=(100,), trials=10_000, seed=31)
        rows = [
            empirical_mse(replace(base, fast_path=fp)).rows[0] for fp in (True, False)
        ]
        lo = max(r.mse - 1.96 * r.stderr for r in rows)
        hi = min(r.mse + 1.96 * r.stderr for r in rows)
        assert lo <= hi


class TestEmpiricalMse:
    def test_report_shape_and_invariants(self, model):
        cfg = SimConfig(model=model, t1=0.0, estimator="map", n_list=(100, 400), trials=800, seed=7)
        report = empirical_mse(cfg)
        assert [r.n for r in report.rows] == [100, 400]
        for r in report.rows:
            assert r.n_mse > 0
            assert r.n_mse == pytest.approx(r.n * r.mse)
            assert r.alpha_bcrb < r.alpha_atbcrb
            assert r.trials == 800

    def test_reproducible_across_worker_counts(self, model):
        cfg = SimConfig(model=model, t1=0.0, estimator="map", n_list=(100,), trials=5000, seed=13)
        rows = [empirical_mse(cfg, workers=w).rows[0] for w in (1, 4, 8)]
        assert rows[0] == rows[1] == rows[2]

    def test_mixed_design_runs(self, model):
        cfg = SimConfig(model=model, t1=0.5, estimator="ml", n_list=(200,), trials=400, seed=3)
        report = empirical_mse(cfg)
        assert report.rows[0].n_mse > 0

    def test_band1_only_rejected(self, model):
        with pytest.raises(SimulationError):
            SimConfig(model=model, t1=1.0, n_list=(100,), trials=10, seed=1)


class TestConvergenceStudy:
    def test_ratios_and_ordering(self, model):
        cfg = SimConfig(
            model=model, t1=0.0, estimator="map", n_list=(100, 1000), trials=4000, seed=19
        )
        report = convergence_study(cfg)
        (pair,) = [r for r in report.meta["mse_decay_ratios"]]
        assert pair[0] == 100 and pair[1] == 1000
        assert 5.0 < pair[2] < 15.0  # roughly 1/n decay even at these sizes
        for r in report.rows:
            assert r.alpha_bcrb < r.alpha_atbcrb

    def test_requires_increasing_n_list(self, model):
        cfg = SimConfig(model=model, t1=0.0, n_list=(1000, 100), trials=10, seed=1)
        with pytest.raises(SimulationError, match="increasing"):
            convergence_study(cfg)
