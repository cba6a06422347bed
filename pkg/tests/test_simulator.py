import math

import numpy as np
import pytest

from spatialp2p import rates
from spatialp2p.analytic import RateModel, SystemParams, fluid_metrics, scenario_from_dimensionless
from spatialp2p.geometry import Torus
from spatialp2p.simulator import (
    ACCUMULATE,
    HAZARD,
    K_NEAREST,
    PopulationCapError,
    SimConfig,
    SimState,
    SimulationError,
    Snapshot,
    estimate_M,
    latency_ecdf,
    line_flux_estimate,
    nn_distance_stats,
    repulsion_estimates,
    run,
    step,
    take_snapshot,
)


def closed_config(rate, side=1.0, tau=1.0, **kw):
    """No-arrival configuration for hand-built populations."""
    p = SystemParams(lam=0.0, F=kw.pop("F", 1.0), rate=rate)
    return SimConfig(
        params=p,
        torus=Torus(side),
        tau=tau,
        warmup=kw.pop("warmup", 1.0),
        measure=kw.pop("measure", 1.0),
        seed=kw.pop("seed", 0),
        **kw,
    )


def inject(state, positions, sizes, t=0.0):
    state.add_peers(np.asarray(positions, dtype=float), np.asarray(sizes, dtype=float), t, tracked=False)
    state.n_arrivals -= len(positions)  # hand-built peers are not Poisson arrivals


class TestStepBasics:
    def test_no_arrivals_stays_empty(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.1))
        state = SimState()
        rng = np.random.default_rng(0)
        for _ in range(50):
            step(state, cfg, rng)
        assert len(state) == 0
        assert state.n_arrivals == state.n_exits == state.n_abandons == 0

    def test_lone_leecher_never_departs(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.1))
        state = SimState()
        inject(state, [[0.5, 0.5]], [3.0])
        rng = np.random.default_rng(0)
        for _ in range(200):
            step(state, cfg, rng)
        assert len(state) == 1
        assert state.remaining[0] == 3.0

    def test_accumulate_depletion_deterministic(self):
        # two peers at r=0.5 with C=1, R=1: each receives 2 bits/s
        cfg = closed_config(RateModel.tcp(1.0, 1.0), side=2.0, tau=0.25)
        state = SimState()
        inject(state, [[0.5, 1.0], [1.0, 1.0]], [1.0, 2.5])
        rng = np.random.default_rng(0)
        ev1 = step(state, cfg, rng)
        assert ev1.completions == 0 and len(state) == 2
        ev2 = step(state, cfg, rng)
        assert ev2.completions == 1 and len(state) == 1
        assert state.remaining[0] == pytest.approx(2.5 - 1.0)
        # survivor is alone now: rate zero forever
        for _ in range(20):
            step(state, cfg, rng)
        assert len(state) == 1

    def test_population_cap_aborts(self):
        p = SystemParams(lam=1000.0, F=1.0, rate=RateModel.tcp(1.0, 0.1))
        cfg = SimConfig(params=p, torus=Torus(1.0), tau=1.0, warmup=1.0,
                        measure=1.0, max_population=50)
        state = SimState()
        rng = np.random.default_rng(1)
        with pytest.raises(PopulationCapError):
            for _ in range(10):
                step(state, cfg, rng)

    def test_out_of_range_pair_no_progress(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.1))
        state = SimState()
        inject(state, [[0.2, 0.5], [0.8, 0.5]], [1.0, 1.0])  # distance 0.4 > R
        rng = np.random.default_rng(0)
        for _ in range(30):
            step(state, cfg, rng)
        assert len(state) == 2
        assert np.all(state.remaining == 1.0)


class TestHazardRace:
    def test_two_peer_race_mean(self):
        # 10^4 independent pairs on one big torus, mutually out of range
        r, C, F, tau, R = 0.05, 1.0, 1.0, 0.001, 0.1
        n_pairs, spacing = 10_000, 0.5
        grid = 100
        side = grid * spacing
        cfg = closed_config(RateModel.tcp(C, R), side=side, tau=tau, F=F,
                            service_mode=HAZARD)
        base = np.stack(np.meshgrid(np.arange(grid), np.arange(grid)), axis=-1).reshape(-1, 2)
        base = base * spacing + 0.2
        pos = np.concatenate([base, base + np.array([r, 0.0])])
        state = SimState()
        inject(state, pos, np.ones(2 * n_pairs))
        rng = np.random.default_rng(2024)

        def pair_ids():
            cells = np.floor(state.pos / spacing).astype(int)
            return cells[:, 0] * grid + cells[:, 1]

        first_time = np.full(n_pairs, np.nan)
        for k in range(5000):
            step(state, cfg, rng)
            counts = np.bincount(pair_ids(), minlength=n_pairs)
            newly = np.isnan(first_time) & (counts <= 1)
            first_time[newly] = state.t
            if not np.any(counts >= 2):
                break
        assert not np.any(np.isnan(first_time))

        mu = C / r
        p_step = -math.expm1(-mu * tau / F)
        q = 1.0 - (1.0 - p_step) ** 2
        discrete_mean = tau / q
        se = tau * math.sqrt(1.0 - q) / q / math.sqrt(n_pairs)
        assert abs(first_time.mean() - discrete_mean) < 3 * se
        # ties to the continuous-time race mean r*F/(2*C) as tau -> 0
        assert discrete_mean == pytest.approx(r * F / (2 * C), rel=0.03)


class TestExtensionsMechanics:
    def test_seeder_lifecycle(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.2), tau=0.01, T_S=0.05)
        state = SimState()
        inject(state, [[0.5, 0.5], [0.55, 0.5]], [0.1, 0.99])  # distance 0.05, rate 20
        rng = np.random.default_rng(0)
        step(state, cfg, rng)  # A completes (0.2 >= 0.1), becomes seeder
        assert len(state) == 2 and state.seeder.sum() == 1
        for _ in range(4):  # B keeps downloading from the seeder
            step(state, cfg, rng)
        # B completed at t=0.05 and is seeding; A expires at t=0.06
        assert state.seeder.sum() == 2
        step(state, cfg, rng)
        assert len(state) == 1  # A left at 0.06
        for _ in range(10):
            step(state, cfg, rng)
        assert len(state) == 0  # B left at 0.10
        assert state.n_exits == 2

    def test_server_rate_share(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.1), tau=0.5, U_C=2.0)
        state = SimState()
        inject(state, [[0.5, 0.5]], [1.7])  # isolated: only the server feeds it
        rng = np.random.default_rng(0)
        step(state, cfg, rng)
        assert state.remaining[0] == pytest.approx(1.7 - 2.0 * 1.0 * 0.5)
        ev = step(state, cfg, rng)
        assert ev.completions == 1 and len(state) == 0

    def test_abandonment_counts_and_rate(self):
        cfg = closed_config(RateModel.tcp(1.0, 0.001), side=40.0, tau=1.0, a=0.1)
        state = SimState()
        rng_pos = np.random.default_rng(5)
        n0 = 1000
        inject(state, rng_pos.uniform(1, 39, size=(n0, 2)), np.ones(n0))
        rng = np.random.default_rng(6)
        k = 10
        for _ in range(k):
            step(state, cfg, rng)
        p_gone = 1 - math.exp(-0.1 * k)
        expect = n0 * p_gone
        sd = math.sqrt(n0 * p_gone * (1 - p_gone))
        assert abs(state.n_abandons - expect) < 4 * sd
        assert state.n_abandons + len(state) == n0
        assert state.n_exits == 0


class TestKNearest:
    def oracle_rates(self, pos, m, L, side):
        n = len(pos)
        diff = np.abs(pos[:, None, :] - pos[None, :, :])
        diff = np.minimum(diff, side - diff)
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, np.inf)
        out = np.zeros(n)
        for i in range(n):
            nearest = np.sort(d[i])[: min(L, n - 1)]
            out[i] = sum(m.C / di for di in nearest)
        return out

    def test_exact_contributor_count(self):
        m = RateModel.tcp(1.0, 0.1)
        rng = np.random.default_rng(12)
        pos = rng.uniform(0, 1, size=(6, 2))
        for L in (3, 10):
            cfg = closed_config(m, tau=0.5, neighbor_rule=K_NEAREST, L=L)
            state = SimState()
            inject(state, pos, np.full(6, 1e5))
            step(state, cfg, np.random.default_rng(0))
            got = (1e5 - state.remaining) / 0.5
            want = self.oracle_rates(pos, m, L, 1.0)
            assert np.allclose(got, want, rtol=1e-9)


def small_config(seed=7, **kw):
    sc = scenario_from_dimensionless(8.0, 100.0, 0.1, 1.0, rates.TCP)
    p = sc.params()
    return SimConfig(
        params=p, torus=Torus(1.0), tau=1.0,
        warmup=kw.pop("warmup", 900.0), measure=kw.pop("measure", 500.0),
        seed=seed, snapshot_every=kw.pop("snapshot_every", 5.0), **kw,
    )


@pytest.fixture(scope="module")
def base_stats():
    cfg = small_config(seed=9)
    return cfg, run(cfg)


class TestRunProtocol:
    def test_determinism_bit_identical(self, base_stats):
        cfg, s1 = base_stats
        s2 = run(cfg)
        assert np.array_equal(s1.latency_samples, s2.latency_samples)
        assert np.array_equal(s1.density_trace, s2.density_trace)
        assert s1.n_arrivals == s2.n_arrivals
        assert len(s1.snapshots) == len(s2.snapshots)
        for a, b in zip(s1.snapshots, s2.snapshots):
            assert np.array_equal(a.positions, b.positions)
            assert a.stationary_mean == b.stationary_mean
            assert a.flux_estimate == b.flux_estimate

    def test_conservation_exact(self, base_stats):
        _, stats = base_stats
        assert stats.n_arrivals - stats.n_exits - stats.n_abandons == stats.final_population

    def test_little_law_and_m(self, base_stats):
        cfg, stats = base_stats
        assert stats.censored == 0
        assert stats.latency_samples.size > 1000
        est = estimate_M(stats, cfg.params)
        area = cfg.torus.area
        little = stats.avg_leecher_population / (cfg.params.lam * area * est.mean_latency)
        assert abs(little - 1.0) < 0.03
        assert est.m_sim >= 1.0 - 3 * est.stderr

    def test_hazard_accumulate_compatible(self, base_stats):
        cfg, s_acc = base_stats
        c_haz = small_config(seed=11, service_mode=HAZARD)
        e1 = estimate_M(s_acc, cfg.params)
        e2 = estimate_M(run(c_haz), c_haz.params)
        width = 2.0 * math.hypot(e1.stderr, e2.stderr)
        assert abs(e1.m_sim - e2.m_sim) <= width + 0.02

    def test_latency_ecdf_shape(self, base_stats):
        _, stats = base_stats
        t, q = latency_ecdf(stats)
        assert np.all(np.diff(t) >= 0)
        assert q[-1] == pytest.approx(1.0)
        assert np.all((q > 0) & (q <= 1))

    def test_nn_stats_fields(self, base_stats):
        cfg, stats = base_stats
        nn = nn_distance_stats(stats, cfg.params)
        assert 0 < nn.mean < cfg.torus.side
        assert 0 <= nn.p_within_range <= 1
        assert nn.measured_density > 0
        assert nn.poisson_reference_mean == pytest.approx(
            1 / (2 * math.sqrt(nn.measured_density))
        )

    def test_low_sample_warning(self):
        sc = scenario_from_dimensionless(8.0, 100.0, 0.1, 1.0, rates.TCP)
        cfg = SimConfig(params=sc.params(), torus=Torus(1.0), tau=1.0,
                        warmup=5.0, measure=5.0, seed=3, snapshot_every=5.0,
                        drain=40.0)
        with pytest.warns(UserWarning):
            stats = run(cfg)
        assert stats.low_sample_warning


class TestSnapshotObservables:
    def snap_of(self, positions, rate, side=1.0, n_probes=500):
        cfg = closed_config(rate, side=side, n_probes=n_probes)
        state = SimState()
        inject(state, positions, np.ones(len(positions)))
        return take_snapshot(state, cfg, np.random.default_rng(42)), cfg

    def test_flux_single_crossing_pair(self):
        # straddles exactly one of the 8 cut lines (x = 0.5625)
        m = RateModel.tcp(1.0, 0.2)
        snap, cfg = self.snap_of([[0.5, 0.5], [0.625, 0.5]], m)
        want = 2.0 * (1.0 / 0.125) / 8.0
        assert snap.flux_estimate == pytest.approx(want, rel=1e-12)
        assert line_flux_estimate(snap, cfg) == pytest.approx(want, rel=1e-12)

    def test_flux_same_side_no_crossing(self):
        m = RateModel.tcp(1.0, 0.2)
        snap, _ = self.snap_of([[0.30, 0.5], [0.305, 0.5]], m)
        assert snap.flux_estimate == 0.0

    def test_flux_wraparound_crossing(self):
        m = RateModel.tcp(1.0, 0.2)
        snap, _ = self.snap_of([[0.90, 0.5], [0.01, 0.5]], m)
        want = 2.0 * (1.0 / 0.11) / 8.0
        assert snap.flux_estimate == pytest.approx(want, rel=1e-9)

    def test_repulsion_estimator_campbell(self):
        # Poisson configuration: probe average approximates density * gamma
        rng = np.random.default_rng(3)
        n, side = 4000, 1.0
        m = RateModel.tcp(1.0, 0.05)
        snap, cfg = self.snap_of(rng.uniform(0, side, (n, 2)), m, n_probes=4000)
        est = repulsion_estimates(snap, cfg, rng=np.random.default_rng(9))
        expected = n / side**2 * rates.gamma(m)
        assert est.stationary_mean == pytest.approx(expected, rel=0.05)
        # for a Poisson (non-interacting) cloud both views agree statistically
        assert est.palm_mean == pytest.approx(est.stationary_mean, rel=0.05)

    def test_nn_distance_exact_small_case(self):
        m = RateModel.tcp(1.0, 0.3)
        snap, _ = self.snap_of([[0.1, 0.1], [0.2, 0.1], [0.9, 0.9]], m)
        # wrap makes (0.9,0.9) closest to (0.1,0.1) at hypot(0.2, 0.2)
        want = [0.1, 0.1, math.hypot(0.2, 0.2)]
        assert np.allclose(np.sort(snap.nn_distances), np.sort(want))


class TestConfigValidation:
    def test_side_below_twice_range(self):
        p = SystemParams(lam=1.0, F=1.0, rate=RateModel.tcp(1.0, 0.6))
        with pytest.raises(SimulationError):
            SimConfig(params=p, torus=Torus(1.0), warmup=1.0, measure=1.0)

    def test_k_nearest_needs_L(self):
        p = SystemParams(lam=1.0, F=1.0, rate=RateModel.tcp(1.0, 0.1))
        with pytest.raises(SimulationError):
            SimConfig(params=p, torus=Torus(1.0), warmup=1.0, measure=1.0,
                      neighbor_rule=K_NEAREST)

    def test_infinite_range_rejected(self):
        p = SystemParams(lam=1.0, F=1.0, rate=RateModel.snr(1.0, alpha=4.0))
        with pytest.raises(SimulationError):
            SimConfig(params=p, torus=Torus(1.0), warmup=1.0, measure=1.0)
