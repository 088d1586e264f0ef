from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from omegastop.errors import InadmissibleParameterError
from omegastop.model import GainSpec, make_model
from omegastop.simulate import (
    PathConfig,
    PhiloxStream,
    censor_path,
    dump_paths_csv,
    estimate_killing_probability,
    estimate_policy_value,
    estimate_sup_moment,
    sample_stable_increment,
    simulate_frozen_kill_times,
    simulate_omega_killed_path,
)
from omegastop.simulate.rng import philox4x32, split_seed
from omegastop.simulate.stable import rho_to_skewness, skewness_to_rho

U = np.uint64


class TestPhilox:
    @pytest.mark.parametrize("ctr, key, expect", [
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
        ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
         (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
    ])
    def test_known_answers(self, ctr, key, expect):
        out = philox4x32(*(U(c) for c in ctr), *(U(k) for k in key))
        assert tuple(int(v) for v in out) == expect

    def test_streams_are_reproducible_and_distinct(self):
        a = PhiloxStream(5, 0).random(1000)
        b = PhiloxStream(5, 0).random(1000)
        c = PhiloxStream(5, 1).random(1000)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert np.all((a > 0) & (a < 1))

    def test_seed_range(self):
        with pytest.raises(ValueError):
            split_seed(-1)
        with pytest.raises(ValueError):
            split_seed(2 ** 64)


class TestStableSampler:
    def test_skewness_round_trip(self):
        for a, rho in ((0.7, 0.3), (1.5, 0.55), (1.2, 0.4)):
            m = make_model(a, rho, 1.0)
            assert skewness_to_rho(a, rho_to_skewness(m.params)) == pytest.approx(rho, abs=1e-13)

    @pytest.mark.parametrize("a, rho", [(0.7, 0.3), (1.5, 0.55), (1.0, 0.5)])
    def test_positivity(self, a, rho):
        m = make_model(a, rho, 1.0)
        n = 1_000_000
        x = sample_stable_increment(PhiloxStream(11), 1.0, m.params, size=n)
        frac = np.mean(x >= 0)
        se = math.sqrt(rho * (1 - rho) / n)
        assert abs(frac - rho) <= 3 * se

    @pytest.mark.parametrize("a, rho", [(0.7, 0.3), (1.5, 0.55)])
    def test_tail_count_matches_levy_measure(self, a, rho):
        # over a short time h, P(X_h > x) ~ h c_plus x^{-alpha} / alpha for x >> h^{1/alpha}
        m = make_model(a, rho, 1.0)
        h, n = 1e-3, 1_000_000
        x = sample_stable_increment(PhiloxStream(12), h, m.params, size=n)
        level = 20.0 * h ** (1 / a)
        expect = h * m.c_plus * level ** -a / a
        count = np.sum(x > level)
        assert abs(count - n * expect) <= 4 * math.sqrt(n * expect) + 0.05 * n * expect


class TestKilling:
    def test_frozen_kill_times_are_exponential(self, fixture_model):
        dt = 1e-3
        times = simulate_frozen_kill_times(fixture_model, -1.0, dt, 4000, seed=3)
        rate = fixture_model.k
        # per-step killing gives a geometric law on the grid; centre it on the interval
        stat = stats.kstest(times - 0.5 * dt, "expon", args=(0, 1.0 / rate))
        assert stat.pvalue > 1e-3

    def test_no_killing_without_clock(self):
        m = make_model(1.0, 0.5, 0.0)
        cfg = PathConfig(dt=1e-2, horizon=20.0, seed=1)
        for pid in range(20):
            s = simulate_omega_killed_path(cfg, m, 1.0, pid)
            assert not s.killed
            assert s.clock_value[-1] == 0.0
        with pytest.raises(InadmissibleParameterError):
            estimate_killing_probability(cfg, m)

    def test_clock_only_grows_below_zero(self, fixture_model):
        s = simulate_omega_killed_path(PathConfig(dt=1e-3, horizon=50.0, seed=4), fixture_model, 1.0, 3)
        da = np.diff(s.clock_value)
        both_positive = (s.states[:-1] >= 0) & (s.states[1:] >= 0)
        assert np.all(da[both_positive] == 0.0)
        assert np.all(da >= 0.0)

    def test_censoring_erases_negative_steps(self, fixture_model):
        s = simulate_omega_killed_path(PathConfig(dt=1e-3, horizon=50.0, seed=4), fixture_model, 1.0, 3)
        t, y = censor_path(s)
        assert np.all(y >= 0)
        assert np.all(np.diff(t) >= 0)
        assert len(y) == int(np.sum(s.states >= 0))


class TestEstimators:
    def test_thread_count_and_rerun_determinism(self, fixture_model):
        cfg1 = PathConfig(dt=1e-3, n_paths=400, seed=9, threads=1)
        cfg0 = PathConfig(dt=1e-3, n_paths=400, seed=9, threads=0)
        a = estimate_killing_probability(cfg1, fixture_model)
        b = estimate_killing_probability(cfg0, fixture_model)
        c = estimate_killing_probability(cfg0, fixture_model)
        assert a.estimate == b.estimate == c.estimate

    def test_killing_probability_small_sample(self, fixture_model):
        rep = estimate_killing_probability(PathConfig(dt=1e-3, n_paths=4000, seed=21), fixture_model)
        assert abs(rep.z_score(fixture_model.p)) <= 4.0

    def test_policy_starting_in_stopping_set_pays_immediately(self, fixture_model):
        gain = GainSpec(0.1, 1.0)
        rep = estimate_policy_value(PathConfig(n_paths=50, seed=1), fixture_model, gain, 2.0, "up-cross", 5.0)
        assert rep.estimate == pytest.approx(5.0 ** 0.1 - 1.0)
        assert rep.std_error == 0.0

    def test_horizon_censoring_is_reported(self, fixture_model):
        cfg = PathConfig(dt=1e-3, n_paths=500, seed=2, horizon=0.5)
        rep = estimate_sup_moment(cfg, fixture_model, 0.1)
        assert rep.n_censored > 0
        assert "censored" in rep.bias_notes
        assert len(rep.censored_positions) == rep.n_censored

    def test_gluing_mode_kills_only_at_excursion_start(self, fixture_model):
        cfg = PathConfig(dt=1e-3, n_paths=4000, seed=21, killing="gluing")
        rep = estimate_killing_probability(cfg, fixture_model)
        assert abs(rep.z_score(fixture_model.p)) <= 4.0

    def test_config_validation(self):
        with pytest.raises(InadmissibleParameterError):
            PathConfig(dt=0.0)
        with pytest.raises(InadmissibleParameterError):
            PathConfig(stepping="adaptive")
        with pytest.raises(InadmissibleParameterError):
            PathConfig(killing="never")

    def test_dump_csv(self, tmp_path, fixture_model):
        out = tmp_path / "paths.csv"
        rows = dump_paths_csv(str(out), PathConfig(dt=1e-2, horizon=2.0, seed=3), fixture_model, 1.0, 3)
        lines = out.read_text().splitlines()
        assert lines[0] == "path_id,t,x,a,alive"
        assert len(lines) == rows + 1


@pytest.mark.slow
def test_excursion_level_killing_reproduces_formulas(fixture_model):
    """With killing decided once per excursion, independently of its path,
    the simulation matches the analytic value and supremum moment."""
    from omegastop.stopping import mgf_sup, solve

    cfg = PathConfig(dt=1e-3, n_paths=20_000, seed=11, horizon=math.inf, killing="gluing")
    gain = GainSpec(0.1, 1.0)
    sol = solve(fixture_model, gain)
    value = estimate_policy_value(cfg, fixture_model, gain, sol.b_star, "up-cross", 1.0)
    sup = estimate_sup_moment(cfg, fixture_model, 0.1)
    assert abs(value.z_score(sol(1.0))) <= 3.0
    assert abs(sup.z_score(mgf_sup(0.1, fixture_model))) <= 3.0
