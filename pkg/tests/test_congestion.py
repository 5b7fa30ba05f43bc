import math

import numpy as np
import pytest

from prbdim import (CompoundSpec, DomainError, GeometryParams,
                    InterferenceModel, LinkBudget, RoadRealization, Scenario,
                    Service, averaged_congestion, ccdf_bell, chord_mass,
                    conditional_congestion, expected_load, indoor_masses,
                    ppp_equivalent)
from prbdim.congestion import conditional_spec, road_set
from prbdim.simulate import gamma_samples

EXPECTED_LOAD_OUTDOOR = 221.67077763729581  # lambda=9, delta=6, R=0.7, one level


def make_scenario(lam=0.0, delta=0.0, kappa=0.0, margins=None, seed=0, mc=10,
                  n_max=256, region=None):
    lb = LinkBudget(tx_power_dbm=60.0, noise_power_dbm=-93.0, prop_const_db=130.0,
                    prop_const_indoor_db=166.0, path_loss_exp=3.5, tx_antennas=8,
                    rx_antennas=2, prb_bandwidth_hz=180e3, cell_radius_km=0.7,
                    max_user_prbs=n_max)
    im = (InterferenceModel.noise_limited() if margins is None
          else InterferenceModel.three_region(*margins, cell_radius_km=0.7))
    gp = GeometryParams(road_intensity=lam, user_intensity_linear=delta,
                        user_intensity_area=kappa)
    return Scenario(link_budget=lb, interference=im, service=Service(rate_bps=500e3),
                    geometry=gp, seed=seed, mc_realizations=mc, region_km=region)


class TestConditional:
    def test_empty_cell(self):
        scn = make_scenario(lam=9.0, delta=6.0)
        empty = RoadRealization(chord_distances=np.array([]))
        assert conditional_congestion(scn, empty, 0) == 1.0
        assert conditional_congestion(scn, empty, 1) == 0.0
        assert conditional_congestion(scn, empty, 5) == 0.0

    def test_single_diameter_road_is_poisson(self):
        scn = make_scenario(lam=1.0, delta=6.0)
        road = RoadRealization(chord_distances=np.array([0.0]))
        lam = 2 * 6.0 * 0.7  # full chord mass, single demand level
        from scipy.stats import poisson
        for m in (1, 5, 12):
            assert conditional_congestion(scn, road, m) == pytest.approx(
                poisson.sf(m - 1, lam), rel=1e-10)

    def test_indoor_only_road_independent(self):
        scn = make_scenario(kappa=20.0)
        a = RoadRealization(chord_distances=np.array([]))
        b = RoadRealization(chord_distances=np.array([0.1, 0.5]))
        spec = conditional_spec(scn, a)
        for m in (0, 3, 17):
            assert conditional_congestion(scn, a, m) == conditional_congestion(scn, b, m)
            assert conditional_congestion(scn, a, m) == ccdf_bell(spec, m)

    def test_levels_align_by_prb_count(self):
        scn = make_scenario(lam=9.0, delta=6.0, kappa=20.0)
        road = RoadRealization(chord_distances=np.array([0.2]))
        spec = conditional_spec(scn, road)
        prof_out, prof_in = scn.profiles
        assert spec.n_levels == max(prof_out.n_levels, prof_in.n_levels) == 6
        w_in = indoor_masses(prof_in, 20.0)
        assert spec.weights[0] == pytest.approx(
            w_in[0] + chord_mass(road, prof_out.rings[1][0], 6.0), rel=1e-12)
        np.testing.assert_allclose(spec.weights[1:], w_in[1:], rtol=1e-12)


class TestAveraged:
    def test_indoor_only_zero_stderr(self):
        scn = make_scenario(kappa=20.0, mc=7)
        curve = averaged_congestion(scn, np.arange(0, 40))
        single = conditional_spec(scn, RoadRealization(np.array([])))
        expected = [ccdf_bell(single, int(m)) for m in range(40)]
        np.testing.assert_allclose(curve.pi, expected, atol=1e-13)
        assert curve.stderr.max() == 0.0
        assert curve.pi[0] == 1.0

    def test_monotone_nonincreasing(self):
        scn = make_scenario(lam=9.0, delta=2.0, kappa=10.0, mc=25, seed=3)
        curve = averaged_congestion(scn, np.arange(0, 200))
        assert np.all(np.diff(curve.pi) <= 0)

    def test_seed_prefix_stability(self):
        # growing the realization count keeps the earlier road draws
        short = make_scenario(lam=5.0, delta=3.0, mc=6, seed=11)
        long = make_scenario(lam=5.0, delta=3.0, mc=12, seed=11)
        roads_short = road_set(short)
        roads_long = road_set(long)
        for a, b in zip(roads_short, roads_long):
            np.testing.assert_array_equal(a.chord_distances, b.chord_distances)

    def test_deterministic_across_worker_counts(self, monkeypatch):
        scn = make_scenario(lam=7.0, delta=2.5, kappa=5.0, mc=16, seed=4)
        ms = np.arange(0, 120)
        monkeypatch.setenv("PRBDIM_THREADS", "1")
        serial = averaged_congestion(scn, ms)
        monkeypatch.setenv("PRBDIM_THREADS", "4")
        threaded = averaged_congestion(scn, ms)
        np.testing.assert_array_equal(serial.pi, threaded.pi)
        np.testing.assert_array_equal(serial.stderr, threaded.stderr)

    def test_stochastic_monotonicity_in_intensities(self):
        ms = np.arange(0, 150)
        base = averaged_congestion(make_scenario(lam=9.0, delta=2.0, kappa=5.0,
                                                 mc=40, seed=9), ms)
        more_delta = averaged_congestion(make_scenario(lam=9.0, delta=3.0, kappa=5.0,
                                                       mc=40, seed=9), ms)
        more_kappa = averaged_congestion(make_scenario(lam=9.0, delta=2.0, kappa=9.0,
                                                       mc=40, seed=9), ms)
        assert np.all(more_delta.pi >= base.pi - 1e-12)
        assert np.all(more_kappa.pi >= base.pi - 1e-12)

    def test_margins_raise_congestion(self):
        ms = np.arange(0, 260)
        base = averaged_congestion(make_scenario(kappa=20.0, mc=1, n_max=6), ms)
        with_im = averaged_congestion(make_scenario(kappa=20.0, mc=1, n_max=6,
                                                    margins=(1.0, 8.0, 15.0)), ms)
        assert np.all(with_im.pi >= base.pi - 1e-12)

    def test_rejects_empty_thresholds(self):
        with pytest.raises(DomainError):
            averaged_congestion(make_scenario(kappa=1.0), np.array([], dtype=int))


class TestExpectedLoad:
    def test_indoor_only_reduces_to_area_sum(self):
        scn = make_scenario(kappa=20.0)
        prof_in = scn.profiles[1]
        w = indoor_masses(prof_in, 20.0)
        expected = sum(n * w[n - 1] for n in range(1, 7))
        assert expected_load(scn) == pytest.approx(expected, rel=1e-12)

    def test_single_level_outdoor_closed_form(self):
        scn = make_scenario(lam=9.0, delta=6.0)
        assert expected_load(scn) == pytest.approx(EXPECTED_LOAD_OUTDOOR, rel=1e-12)

    def test_equals_mean_of_average_spec(self):
        scn = make_scenario(lam=6.0, delta=2.0, kappa=8.0, mc=4000, seed=13)
        specs = [conditional_spec(scn, road) for road in road_set(scn)]
        mc_mean = float(np.mean([s.mean for s in specs]))
        assert expected_load(scn) == pytest.approx(mc_mean, rel=0.01)

    def test_matches_simulation(self):
        scn = make_scenario(lam=9.0, delta=6.0, seed=21)
        gammas, _, _ = gamma_samples(scn, 30_000)
        assert float(gammas.mean()) == pytest.approx(expected_load(scn), rel=0.01)

    def test_equals_ccdf_sum(self):
        # mean equals the summed tail probabilities
        scn = make_scenario(kappa=15.0, mc=1)
        curve = averaged_congestion(scn, np.arange(1, 400))
        assert curve.pi.sum() == pytest.approx(expected_load(scn), rel=1e-9)

    def test_region_split_adds_up(self):
        whole = make_scenario(lam=9.0, delta=2.0, kappa=10.0, margins=(1.0, 8.0, 15.0),
                              n_max=6)
        parts = [make_scenario(lam=9.0, delta=2.0, kappa=10.0, margins=(1.0, 8.0, 15.0),
                               n_max=6, region=reg)
                 for reg in ((0.0, 0.7 / 3), (0.7 / 3, 1.4 / 3), (1.4 / 3, 0.7))]
        assert sum(expected_load(p) for p in parts) == pytest.approx(
            expected_load(whole), rel=1e-12)


class TestPppEquivalent:
    def test_swaps_road_process_for_area_process(self):
        cox = make_scenario(lam=9.0, delta=6.0)
        ppp = ppp_equivalent(cox)
        assert ppp.geometry.road_intensity == 0.0
        assert ppp.geometry.user_intensity_area == pytest.approx(54.0)
        # outdoor propagation drives the profile
        assert ppp.link_budget.prop_const_indoor_db == cox.link_budget.prop_const_db
        assert ppp.mean_users == pytest.approx(cox.mean_users, rel=1e-12)

    def test_single_level_ppp_tail_is_poisson(self):
        ppp = ppp_equivalent(make_scenario(lam=9.0, delta=6.0))
        curve = averaged_congestion(ppp, np.arange(0, 3))
        from scipy.stats import poisson
        lam = 54.0 * math.pi * 0.49
        assert curve.pi[1] == pytest.approx(poisson.sf(0, lam), rel=1e-9)
        assert curve.stderr.max() == 0.0


class TestScenarioValidation:
    def test_mix_must_be_fraction(self):
        with pytest.raises(DomainError):
            Scenario(link_budget=make_scenario().link_budget,
                     interference=InterferenceModel.noise_limited(),
                     service=Service(rate_bps=1e5),
                     geometry=GeometryParams(1.0, 1.0, 1.0),
                     outdoor_fraction=1.2)

    def test_region_inside_cell(self):
        with pytest.raises(DomainError):
            make_scenario(kappa=1.0, region=(0.5, 0.9))

    def test_derived_mix(self):
        scn = make_scenario(lam=9.0, delta=6.0, kappa=54.0)
        assert scn.outdoor_fraction == pytest.approx(0.5)
        assert make_scenario(kappa=5.0).outdoor_fraction == 0.0
