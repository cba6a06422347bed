"""Spatial birth-and-death peer swarms: simulator plus closed-form laws.

Peers arrive as a space-time Poisson rain on a flat torus, exchange a file
at distance-dependent pairwise rates, and leave when the download
completes. The package provides the discrete-time simulator for that
process together with every closed-form equilibrium law it can be checked
against: fluid and hard-core limits, the interpolating fixed-point
approximation, the complete-graph birth-death chain, capacity/feasibility
conditions for the underlying network, and extensions (seeders, servers,
abandonment, adaptive range, uplink caps).
"""

from .analytic import (
    AnalyticError,
    FluidMetrics,
    HardCoreMetrics,
    Scenario,
    SystemParams,
    abandonment_metrics,
    adaptive_range_metrics,
    bessel_i,
    fluid_metrics,
    fluid_ode_run,
    hardcore_latency_cdf,
    hardcore_metrics,
    heuristic_m,
    latency_law,
    mixed_seeder_uplink,
    per_peer_range,
    scenario_from_dimensionless,
    seeder_latency,
    server_latency,
    toy_bessel_mean,
    toy_chain_mean,
)
from .capacity import NetworkModel, feasibility, line_flux, linear_capacity, min_dimensioning
from .experiments import SweepSpec, build_scenario, emit_csv, emit_json, run_sweep
from .geometry import CellGrid, Torus, poisson_count, torus_distance, uniform_point
from .rates import (
    RateModel,
    RateModelError,
    bare_rate,
    gamma,
    gamma_quadrature,
    pair_rate,
    partial_gamma,
    second_moment,
    typical_range,
)
from .simulator import (
    SimConfig,
    SimState,
    SimStats,
    estimate_M,
    latency_ecdf,
    line_flux_estimate,
    nn_distance_stats,
    repulsion_estimates,
    run,
    step,
)

__version__ = "0.1.0"
