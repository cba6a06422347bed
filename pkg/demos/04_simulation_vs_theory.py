"""Run the spatial simulator at one working point and compare every
measurement against its closed-form prediction.

Takes ~20 s: one N_f = 8 run with a few thousand recorded departures.
"""

import math

import numpy as np

from spatialp2p import estimate_M, fluid_metrics, heuristic_m, nn_distance_stats, run
from spatialp2p.capacity import line_flux
from spatialp2p.experiments import build_scenario

cfg = build_scenario(n_f=8.0, W_f=100.0, R=0.1, C=1.0, target_departures=3000, seed=12)
p = cfg.params
fm = fluid_metrics(p)
print(f"scenario: N_f = {fm.N_f:.1f}, lambda = {p.lam:.4f}, F = {p.F:.0f}, "
      f"W_f = {fm.W_f:.0f}")
print(f"simulating warmup {cfg.warmup:.0f} s + measurement {cfg.measure:.0f} s ...")

stats = run(cfg)
est = estimate_M(stats, p)
m_hat = heuristic_m("tcp", fm.N_f)

print()
print(f"{'quantity':<28} {'simulated':>12} {'predicted':>12}")
print(f"{'mean latency':<28} {est.mean_latency:>12.2f} {m_hat * fm.W_f:>12.2f}")
print(f"{'slowdown M':<28} {est.m_sim:>12.4f} {m_hat:>12.4f}")
print(f"{'peer density':<28} {stats.avg_leecher_population:>12.1f} "
      f"{fm.beta_f * m_hat:>12.1f}")

nn = nn_distance_stats(stats, p)
print(f"{'nearest-neighbor mean':<28} {nn.mean:>12.5f} "
      f"{nn.poisson_reference_mean:>12.5f}")

palm = float(np.mean([s.palm_mean for s in stats.snapshots]))
stationary = float(np.mean([s.stationary_mean for s in stats.snapshots]))
print(f"{'rate seen by a peer':<28} {palm:>12.1f} {'(palm view)':>12}")
print(f"{'rate at a random point':<28} {stationary:>12.1f} "
      f"{nn.measured_density * fm.gamma:>12.1f}")

flux = float(np.mean([s.flux_estimate for s in stats.snapshots]))
print(f"{'flux through a unit cut':<28} {flux:>12.1f} {line_flux(p):>12.1f}")

little = stats.avg_leecher_population / (p.lam * est.mean_latency)
print()
print(f"Little's law check: population / (lambda * mean latency) = {little:.4f}")
print("the peer view collects slightly less than the random-point view:")
print(f"repulsion ratio = {stationary / palm:.4f} (>= 1, shrinking as N_f grows)")
