"""Discrete-time spatial birth-and-death engine with statistics collection.

Peers arrive as a Poisson rain on the torus with exponential service
requirements, download from in-range peers at the pairwise rate, and leave
on completion (optionally seeding for a while, abandoning at some rate, or
being helped by permanent servers). Each step freezes the rates at its
start and fires all transitions together at its end.

Measurement protocol: latencies are recorded for every peer arriving
inside the measurement window, and the run keeps stepping (arrivals
included, so the environment stays stationary) until each of those peers
has left. Truncating instead at the window end would bias the mean low by
roughly W/measure, which is visible at the default sample targets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree

from .analytic import SystemParams, fluid_metrics
from .geometry import Torus
from .rates import bare_rate, pair_rate

ACCUMULATE = "accumulate"
HAZARD = "hazard"
FIXED_RANGE = "fixed_range"
K_NEAREST = "k_nearest"

# below this population the vectorized all-pairs scan beats the kd-tree
_BRUTE_FORCE_MAX = 350


class SimulationError(RuntimeError):
    pass


class PopulationCapError(SimulationError):
    """Population exceeded the configured hard cap (runaway configuration)."""


@dataclass
class SimConfig:
    params: SystemParams
    torus: Torus
    tau: float = 1.0
    warmup: float = 100.0
    measure: float = 100.0
    seed: int = 0
    service_mode: str = ACCUMULATE
    neighbor_rule: str = FIXED_RANGE
    L: int = 0                      # neighbor count for k_nearest
    snapshot_every: float = 0.0     # 0 -> max(tau, W_f/20)
    T_S: float = 0.0                # seeding duration after completion
    U_C: float = 0.0                # permanent server rate density
    a: float = 0.0                  # abandonment rate
    n_probes: int = 1000
    flux_lines: int = 8
    max_population: int = 1_000_000
    drain: Optional[float] = None   # extra time allowed to flush tracked peers

    def __post_init__(self):
        if self.tau <= 0:
            raise SimulationError("tau must be positive")
        if self.warmup <= 0 or self.measure <= 0:
            raise SimulationError("warmup and measure must be positive")
        if self.service_mode not in (ACCUMULATE, HAZARD):
            raise SimulationError(f"unknown service_mode {self.service_mode!r}")
        if self.neighbor_rule not in (FIXED_RANGE, K_NEAREST):
            raise SimulationError(f"unknown neighbor_rule {self.neighbor_rule!r}")
        if self.neighbor_rule == K_NEAREST and self.L < 1:
            raise SimulationError("k_nearest requires L >= 1")
        if not self.params.rate.finite_range:
            raise SimulationError("simulation needs a finite range (snapshots use it)")
        if self.neighbor_rule == FIXED_RANGE and self.torus.side < 2.0 * self.params.rate.R:
            raise SimulationError(
                f"torus side {self.torus.side} below twice the range "
                f"{self.params.rate.R}: minimal-image distances would be ambiguous"
            )
        if self.T_S < 0 or self.U_C < 0 or self.a < 0:
            raise SimulationError("extension parameters must be non-negative")

    def resolved_snapshot_every(self) -> float:
        if self.snapshot_every > 0:
            return self.snapshot_every
        if self.params.lam <= 0:
            return self.tau
        w_f = fluid_metrics(self.params).W_f
        return max(self.tau, w_f / 20.0)

    def resolved_drain(self) -> float:
        # generous completion allowance for the tracked stragglers
        return self.drain if self.drain is not None else 5.0 * self.warmup + 10.0 * self.tau


@dataclass
class SimState:
    """Mutable peer population. Arrays share the insertion order."""

    t: float = 0.0
    next_id: int = 0
    pos: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    arrival: np.ndarray = field(default_factory=lambda: np.empty(0))
    remaining: np.ndarray = field(default_factory=lambda: np.empty(0))
    seeder: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    seed_until: np.ndarray = field(default_factory=lambda: np.empty(0))
    tracked: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    track_lo: float = math.inf
    track_hi: float = -math.inf
    n_arrivals: int = 0
    n_exits: int = 0        # non-abandon departures from the system
    n_abandons: int = 0

    def __len__(self) -> int:
        return self.pos.shape[0]

    @property
    def n_leechers(self) -> int:
        return int(np.count_nonzero(~self.seeder))

    def add_peers(self, pos: np.ndarray, sizes: np.ndarray, t: float, tracked: bool) -> None:
        n = pos.shape[0]
        if n == 0:
            return
        self.pos = np.vstack([self.pos, pos])
        self.arrival = np.append(self.arrival, np.full(n, t))
        self.remaining = np.append(self.remaining, sizes)
        self.seeder = np.append(self.seeder, np.zeros(n, dtype=bool))
        self.seed_until = np.append(self.seed_until, np.full(n, math.inf))
        self.tracked = np.append(self.tracked, np.full(n, tracked))
        self.next_id += n
        self.n_arrivals += n

    def compress(self, keep: np.ndarray) -> None:
        self.pos = self.pos[keep]
        self.arrival = self.arrival[keep]
        self.remaining = self.remaining[keep]
        self.seeder = self.seeder[keep]
        self.seed_until = self.seed_until[keep]
        self.tracked = self.tracked[keep]


@dataclass
class StepEvents:
    arrivals: int = 0
    completions: int = 0
    abandons: int = 0
    exits: int = 0
    tracked_latencies: np.ndarray = field(default_factory=lambda: np.empty(0))
    tracked_abandons: int = 0


def _pairs_within(pos: np.ndarray, radius: float, side: float):
    """All unordered index pairs at torus distance <= radius, with distances."""
    n = pos.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.intp), np.empty(0)
    if n <= _BRUTE_FORCE_MAX:
        diff = np.abs(pos[:, None, :] - pos[None, :, :])
        diff = np.minimum(diff, side - diff)
        d = np.hypot(diff[..., 0], diff[..., 1])
        iu, ju = np.triu_indices(n, 1)
        mask = d[iu, ju] <= radius
        pairs = np.stack([iu[mask], ju[mask]], axis=1)
        return pairs, d[pairs[:, 0], pairs[:, 1]]
    tree = cKDTree(pos, boxsize=side)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.intp), np.empty(0)
    diff = np.abs(pos[pairs[:, 0]] - pos[pairs[:, 1]])
    diff = np.minimum(diff, side - diff)
    return pairs, np.hypot(diff[:, 0], diff[:, 1])


def _download_rates(state: SimState, cfg: SimConfig) -> np.ndarray:
    """Per-peer rate from the neighbor rule; servers handled by the caller."""
    n = len(state)
    mu = np.zeros(n)
    if n < 2:
        return mu
    m = cfg.params.rate
    if cfg.neighbor_rule == FIXED_RANGE:
        pairs, d = _pairs_within(state.pos, m.R, cfg.torus.side)
        if pairs.shape[0]:
            w = pair_rate(m, d)
            both = np.concatenate([pairs[:, 0], pairs[:, 1]])
            mu = np.bincount(both, weights=np.concatenate([w, w]), minlength=n)
        return mu
    # k_nearest: a peer downloads from its own L closest peers, range ignored
    k_eff = min(cfg.L + 1, n)
    if n <= _BRUTE_FORCE_MAX:
        diff = np.abs(state.pos[:, None, :] - state.pos[None, :, :])
        diff = np.minimum(diff, cfg.torus.side - diff)
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, math.inf)
        part = np.sort(d, axis=1)[:, : k_eff - 1]
        return bare_rate(m, part).sum(axis=1)
    tree = cKDTree(state.pos, boxsize=cfg.torus.side)
    dist, idx = tree.query(state.pos, k=k_eff)
    neigh = dist[:, 1:]  # drop self at distance 0
    return bare_rate(m, neigh).sum(axis=1)


def step(state: SimState, cfg: SimConfig, rng: np.random.Generator) -> StepEvents:
    """Advance the population by one time step tau.

    Order inside the step: arrivals enter; rates freeze; downloads progress
    (or fire, in hazard mode); abandonments strike uncompleted leechers;
    completions become seeders or leave; expired seeders leave. All
    transitions take effect together at the step end.
    """
    tau = cfg.tau
    p = cfg.params
    t = state.t
    ev = StepEvents()

    n_new = int(rng.poisson(p.lam * cfg.torus.area * tau))
    if n_new:
        pos = np.mod(rng.uniform(0.0, cfg.torus.side, size=(n_new, 2)), cfg.torus.side)
        sizes = rng.exponential(p.F, size=n_new)
        state.add_peers(pos, sizes, t, tracked=state.track_lo <= t < state.track_hi)
        ev.arrivals = n_new
    n = len(state)
    if n > cfg.max_population:
        raise PopulationCapError(
            f"population {n} exceeded the cap {cfg.max_population} at t={t}; "
            "the configuration is likely unstable or mis-scaled"
        )

    mu = _download_rates(state, cfg)
    leech = ~state.seeder
    if cfg.U_C > 0.0 and n > 0:
        mu = mu + np.where(leech, cfg.U_C * cfg.torus.area / n, 0.0)

    completed = np.zeros(n, dtype=bool)
    if cfg.service_mode == ACCUMULATE:
        state.remaining[leech] -= mu[leech] * tau
        completed = leech & (state.remaining <= 0.0)
    else:
        n_leech = int(np.count_nonzero(leech))
        if n_leech:
            p_dep = -np.expm1(-mu[leech] * tau / p.F)
            fire = rng.random(n_leech) < p_dep
            completed[np.nonzero(leech)[0][fire]] = True

    abandoned = np.zeros(n, dtype=bool)
    if cfg.a > 0.0:
        n_leech = int(np.count_nonzero(leech))
        if n_leech:
            p_ab = -math.expm1(-cfg.a * tau)
            hit = rng.random(n_leech) < p_ab
            abandoned[np.nonzero(leech)[0][hit]] = True
        abandoned &= ~completed  # completion wins inside a step

    t_new = t + tau
    if np.any(completed):
        lat = t_new - state.arrival[completed]
        ev.completions = int(np.count_nonzero(completed))
        ev.tracked_latencies = lat[state.tracked[completed]]
    ev.abandons = int(np.count_nonzero(abandoned))
    ev.tracked_abandons = int(np.count_nonzero(abandoned & state.tracked))

    if cfg.T_S > 0.0:
        state.seeder[completed] = True
        state.seed_until[completed] = t_new + cfg.T_S
        state.tracked[completed] = False  # latency already recorded
        # eps absorbs accumulated-time rounding at the expiry boundary
        expired = state.seeder & (state.seed_until <= t_new + 1e-9 * tau)
        leave = expired | abandoned
        ev.exits = int(np.count_nonzero(expired))
    else:
        leave = completed | abandoned
        ev.exits = ev.completions

    state.n_exits += ev.exits
    state.n_abandons += ev.abandons
    if np.any(leave):
        state.compress(~leave)
    state.t = t_new
    return ev


# -- observation ------------------------------------------------------------


@dataclass
class Snapshot:
    time: float
    positions: np.ndarray
    is_seeder: np.ndarray
    per_peer_rates: np.ndarray
    nn_distances: np.ndarray
    in_range_counts: np.ndarray
    palm_mean: float
    stationary_mean: float
    flux_estimate: float


def _probe_rates(pos: np.ndarray, probes: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Rate a non-peer observer at each probe location would collect."""
    m = cfg.params.rate
    side = cfg.torus.side
    n = pos.shape[0]
    if n == 0:
        return np.zeros(probes.shape[0])
    if n <= _BRUTE_FORCE_MAX:
        diff = np.abs(probes[:, None, :] - pos[None, :, :])
        diff = np.minimum(diff, side - diff)
        d = np.hypot(diff[..., 0], diff[..., 1])
        return pair_rate(m, d).sum(axis=1)
    tree = cKDTree(pos, boxsize=side)
    hits = tree.query_ball_point(probes, m.R)
    counts = np.fromiter((len(h) for h in hits), dtype=np.intp, count=len(hits))
    if counts.sum() == 0:
        return np.zeros(probes.shape[0])
    idx = np.concatenate([np.asarray(h, dtype=np.intp) for h in hits if h])
    owner = np.repeat(np.arange(len(hits)), counts)
    diff = np.abs(pos[idx] - probes[owner])
    diff = np.minimum(diff, side - diff)
    w = pair_rate(m, np.hypot(diff[:, 0], diff[:, 1]))
    return np.bincount(owner, weights=w, minlength=probes.shape[0])


def _nearest_neighbor_distances(pos: np.ndarray, side: float) -> np.ndarray:
    n = pos.shape[0]
    if n < 2:
        return np.empty(0)
    if n <= _BRUTE_FORCE_MAX:
        diff = np.abs(pos[:, None, :] - pos[None, :, :])
        diff = np.minimum(diff, side - diff)
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, math.inf)
        return d.min(axis=1)
    tree = cKDTree(pos, boxsize=side)
    dist, _ = tree.query(pos, k=2)
    return dist[:, 1]


def _line_flux(pos: np.ndarray, cfg: SimConfig) -> float:
    """Mean over vertical cut circles of the rate crossing per unit length."""
    m = cfg.params.rate
    side = cfg.torus.side
    pairs, d = _pairs_within(pos, m.R, side)
    if pairs.shape[0] == 0:
        return 0.0
    w = pair_rate(m, d)
    xi = pos[pairs[:, 0], 0]
    dx = pos[pairs[:, 1], 0] - xi
    dx -= side * np.round(dx / side)  # minimal-image x displacement
    lines = (np.arange(cfg.flux_lines) + 0.5) * side / cfg.flux_lines
    total = 0.0
    for x0 in lines:
        fwd = np.mod(x0 - xi, side)
        bwd = np.mod(xi - x0, side)
        crossing = np.where(dx >= 0, (fwd > 0) & (fwd <= dx), (bwd > 0) & (bwd <= -dx))
        total += 2.0 * float(w[crossing].sum()) / side
    return total / cfg.flux_lines


def take_snapshot(state: SimState, cfg: SimConfig, rng: np.random.Generator) -> Snapshot:
    """Freeze the peer configuration and its observables at the current time."""
    pos = state.pos.copy()
    n = pos.shape[0]
    m = cfg.params.rate
    pairs, d = _pairs_within(pos, m.R, cfg.torus.side)
    rates_per_peer = np.zeros(n)
    counts = np.zeros(n, dtype=np.intp)
    if pairs.shape[0]:
        w = pair_rate(m, d)
        both = np.concatenate([pairs[:, 0], pairs[:, 1]])
        rates_per_peer = np.bincount(both, weights=np.concatenate([w, w]), minlength=n)
        counts = np.bincount(both, minlength=n)
    probes = rng.uniform(0.0, cfg.torus.side, size=(cfg.n_probes, 2))
    probe_mu = _probe_rates(pos, probes, cfg)
    return Snapshot(
        time=state.t,
        positions=pos,
        is_seeder=state.seeder.copy(),
        per_peer_rates=rates_per_peer,
        nn_distances=_nearest_neighbor_distances(pos, cfg.torus.side),
        in_range_counts=counts,
        palm_mean=float(rates_per_peer.mean()) if n else math.nan,
        stationary_mean=float(probe_mu.mean()),
        flux_estimate=_line_flux(pos, cfg),
    )


@dataclass
class SimStats:
    config: SimConfig
    latency_samples: np.ndarray
    abandon_count: int
    tracked_abandons: int
    censored: int
    n_arrivals: int
    n_exits: int
    n_abandons: int
    final_population: int
    avg_leecher_population: float
    avg_population: float
    measure_steps: int
    density_trace: np.ndarray          # columns: time, leechers, seeders
    snapshots: List[Snapshot]
    low_sample_warning: bool
    total_time: float


def run(cfg: SimConfig) -> SimStats:
    """Warm up, measure, then drain: see the module docstring for the
    recording protocol. Deterministic given (config, seed); observation
    draws use a separate stream so cadence changes cannot perturb the
    dynamics."""
    seq = np.random.SeedSequence(cfg.seed)
    child_dyn, child_obs = seq.spawn(2)
    rng_dyn = np.random.default_rng(child_dyn)
    rng_obs = np.random.default_rng(child_obs)

    state = SimState()
    state.track_lo = cfg.warmup
    state.track_hi = cfg.warmup + cfg.measure
    end_measure = cfg.warmup + cfg.measure
    deadline = end_measure + cfg.resolved_drain()
    snap_every = cfg.resolved_snapshot_every()
    eps = 1e-9 * cfg.tau

    latencies: list = []
    snapshots: List[Snapshot] = []
    trace: list = []
    next_snap = cfg.warmup
    outstanding = 0
    tracked_abandons = 0
    abandons_total = 0
    leech_sum = 0
    pop_sum = 0
    steps_in_window = 0
    censored = 0

    while True:
        t = state.t
        if t >= end_measure - eps and outstanding == 0:
            break
        if t >= deadline - eps:
            censored = outstanding
            break
        if cfg.warmup - eps <= t < end_measure - eps:
            if next_snap < end_measure - eps and t >= next_snap - eps:
                if len(state) >= 2:
                    snapshots.append(take_snapshot(state, cfg, rng_obs))
                trace.append((t, state.n_leechers, len(state) - state.n_leechers))
                while next_snap <= t + eps:
                    next_snap += snap_every
            leech_sum += state.n_leechers
            pop_sum += len(state)
            steps_in_window += 1
        ev = step(state, cfg, rng_dyn)
        outstanding += _tracked_arrivals(ev, state, t, cfg)
        if ev.tracked_latencies.size:
            latencies.extend(ev.tracked_latencies.tolist())
            outstanding -= ev.tracked_latencies.size
        outstanding -= ev.tracked_abandons
        tracked_abandons += ev.tracked_abandons
        abandons_total += ev.abandons

    lat = np.asarray(latencies)
    low = lat.size < 100
    if low:
        warnings.warn(
            f"only {lat.size} recorded departures; estimates will be noisy",
            stacklevel=2,
        )
    return SimStats(
        config=cfg,
        latency_samples=lat,
        abandon_count=abandons_total,
        tracked_abandons=tracked_abandons,
        censored=censored,
        n_arrivals=state.n_arrivals,
        n_exits=state.n_exits,
        n_abandons=state.n_abandons,
        final_population=len(state),
        avg_leecher_population=leech_sum / max(steps_in_window, 1),
        avg_population=pop_sum / max(steps_in_window, 1),
        measure_steps=steps_in_window,
        density_trace=np.asarray(trace) if trace else np.empty((0, 3)),
        snapshots=snapshots,
        low_sample_warning=low,
        total_time=state.t,
    )


def _tracked_arrivals(ev: StepEvents, state: SimState, t: float, cfg: SimConfig) -> int:
    if ev.arrivals and state.track_lo <= t < state.track_hi:
        return ev.arrivals
    return 0


# -- estimators --------------------------------------------------------------


@dataclass(frozen=True)
class MEstimate:
    m_sim: float
    stderr: float
    n_samples: int
    mean_latency: float


def estimate_M(stats: SimStats, p: SystemParams) -> MEstimate:
    """Observed mean latency over the fluid prediction, with standard error."""
    lat = stats.latency_samples
    if lat.size == 0:
        raise SimulationError("no recorded latencies")
    if lat.size < 100:
        warnings.warn(f"only {lat.size} latency samples", stacklevel=2)
    w_f = fluid_metrics(p).W_f
    mean = float(lat.mean())
    se = float(lat.std(ddof=1) / math.sqrt(lat.size)) if lat.size > 1 else math.inf
    return MEstimate(
        m_sim=mean / w_f, stderr=se / w_f, n_samples=int(lat.size), mean_latency=mean
    )


def latency_ecdf(stats: SimStats):
    """Right-continuous empirical CDF at the sorted sample points."""
    lat = np.sort(stats.latency_samples)
    if lat.size == 0:
        raise SimulationError("no recorded latencies")
    return lat, np.arange(1, lat.size + 1) / lat.size


@dataclass(frozen=True)
class NnStats:
    values: np.ndarray            # pooled nearest-neighbor distances <= R, sorted
    ecdf: np.ndarray
    mean: float                   # raw mean, untruncated
    p_within_range: float
    measured_density: float
    poisson_reference_mean: float


def nn_distance_stats(stats: SimStats, p: SystemParams) -> NnStats:
    """Pooled nearest-neighbor distances over snapshots, with the Poisson
    process of the measured density as reference. The ECDF support is
    truncated at the range (a peer sees nothing beyond R); the mean is raw."""
    if not stats.snapshots:
        raise SimulationError("no snapshots recorded")
    pooled = np.concatenate([s.nn_distances for s in stats.snapshots])
    if pooled.size == 0:
        raise SimulationError("snapshots contain no neighbor distances")
    beta = float(
        np.mean([s.positions.shape[0] for s in stats.snapshots]) / stats.config.torus.area
    )
    R = p.rate.R
    inside = np.sort(pooled[pooled <= R])
    return NnStats(
        values=inside,
        ecdf=np.arange(1, inside.size + 1) / pooled.size,
        mean=float(pooled.mean()),
        p_within_range=inside.size / pooled.size,
        measured_density=beta,
        poisson_reference_mean=1.0 / (2.0 * math.sqrt(beta)),
    )


def poisson_nn_cdf(d, beta: float):
    """Nearest-neighbor distance CDF of a Poisson process of density beta."""
    arr = np.asarray(d, dtype=float)
    out = -np.expm1(-beta * math.pi * arr**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RepulsionEstimates:
    palm_mean: float         # rate averaged over peers
    stationary_mean: float   # rate averaged over uniform probe locations


def repulsion_estimates(
    snapshot: Snapshot,
    cfg: SimConfig,
    rng: Optional[np.random.Generator] = None,
) -> RepulsionEstimates:
    """Both sides of the repulsion comparison on one snapshot.

    A typical peer should collect at most what a typical location sees,
    because nearby peers speed each other's departures.
    """
    if snapshot.positions.shape[0] < 2:
        raise SimulationError("repulsion estimate needs at least two peers")
    rng = rng if rng is not None else np.random.default_rng(0)
    probes = rng.uniform(0.0, cfg.torus.side, size=(cfg.n_probes, 2))
    probe_mu = _probe_rates(snapshot.positions, probes, cfg)
    return RepulsionEstimates(
        palm_mean=float(snapshot.per_peer_rates.mean()),
        stationary_mean=float(probe_mu.mean()),
    )


def line_flux_estimate(snapshot: Snapshot, cfg: SimConfig) -> float:
    """Rate crossing a unit-length vertical cut, averaged over several cuts."""
    return _line_flux(snapshot.positions, cfg)
