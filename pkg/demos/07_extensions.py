"""Extension laws: seeding, permanent servers, abandonment, uplink caps,
and density-coupled ranges.

All of them are small perturbations of the same two balance identities
(beta * mu = lam * F and Little's law), so each comes out as the positive
root of a quadratic or a power law in lambda.
"""

from spatialp2p import (
    RateModel,
    SystemParams,
    abandonment_metrics,
    adaptive_range_metrics,
    fluid_metrics,
    mixed_seeder_uplink,
    per_peer_range,
    scenario_from_dimensionless,
    seeder_latency,
    server_latency,
)

p = scenario_from_dimensionless(64.0, 100.0, 0.1, 1.0, "tcp").params()
fm = fluid_metrics(p)
print(f"base point: W_f = {fm.W_f:.0f} s, mu_f = {fm.mu_f:.0f} bits/s")
print()

print("seeding after completion (duration T_S):")
for ts in (0.0, 10.0, 100.0, 1000.0):
    print(f"  T_S = {ts:>6}: download latency {seeder_latency(fm.W_f, ts):>8.2f} s")
print("  long seeding collapses the latency like W_f^2 / T_S.")
print()

print("permanent servers of rate density U_C:")
for chi in (0.0, 0.19, 0.75):
    sm = server_latency(p, chi * p.lam * p.F)
    w = f"{sm.W_fluid_assisted:.2f}" if sm.W_fluid_assisted is not None else "n/a"
    print(f"  chi_C = {chi:>5}: fluid-assisted W = {w:>8} s, "
          f"server-dominated W = {sm.W_server_dominated:.2f} s")
print()

print("abandonment at rate a:")
for a in (0.0, 0.001, 0.01):
    am = abandonment_metrics(p, a)
    print(f"  a = {a:>6}: mu_f = {am.mu_f:>8.1f}, abandoned fraction "
          f"{am.abandonment_ratio:.3f}")
print()

u = 2000.0
r_star = per_peer_range(p.lam, p.F, 1.0, u)
print(f"uplink budget {u:.0f} bits/s is exactly used at range R = {r_star:.4f} m")
print()

print("density-coupled range R = kappa * beta^-alpha under growing load:")
for alpha, label in ((0.0, "constant radius"), (0.5, "fixed neighbor count"),
                     (3.0, "strongly shrinking")):
    am = adaptive_range_metrics(p.lam, p.F, 1.0, kappa=0.1, alpha=alpha)
    print(f"  alpha = {alpha}: latency ~ lambda^{am.l:+.2f}, density ~ "
          f"lambda^{am.d:+.2f}  [{am.regime}] ({label})")
print()

pc = SystemParams(lam=p.lam, F=p.F, rate=RateModel.per_flow_cap(1.0, U=2000.0, R=0.1))
for ts in (1.0, 100.0):
    ms = mixed_seeder_uplink(pc, ts)
    print(f"capped flows + seeding T_S = {ts:>5}: beta_f = {ms.beta_f:>8.1f}, "
          f"W_f = {ms.W_f:>7.2f} s")
