"""The three equilibrium descriptions and where each one applies.

Fluid limit: density spatially uniform, latency W_f = sqrt(F/(lam*gamma));
a lower bound, tight as the neighbor count N_f grows. Hard-core limit:
peers exclude each other within the range, latency W_h = W_f / N_f; the
N_f -> 0 behavior. The fixed-point approximation interpolates.

Super-scalability: W_f decreases like 1/sqrt(lam), so adding load makes
everyone faster.
"""

from spatialp2p import (
    SystemParams,
    fluid_metrics,
    hardcore_metrics,
    heuristic_m,
    latency_law,
    scenario_from_dimensionless,
)

print("slowdown M = W/W_f across the dimensionless neighbor count N_f (tcp):")
print(f"{'N_f':>10} {'M fluid':>9} {'M fixed-point':>14} {'M hardcore':>11}")
for k in range(-5, 7):
    n_f = 2.0**k
    m_hat = heuristic_m("tcp", n_f)
    print(f"{n_f:>10.5g} {1.0:>9.3f} {m_hat:>14.4f} {1.0 / n_f:>11.4f}")

print()
print("the fixed point tracks the hard-core branch for small N_f and the")
print("fluid branch for large N_f, staying >= 1 everywhere (repulsion).")
print()

print("super-scalability: predicted latency vs arrival intensity")
base = scenario_from_dimensionless(4.0, 100.0, 0.1, 1.0, "tcp")
print(f"{'lambda':>12} {'W_f':>10} {'W predicted':>12}")
for mult in (1, 4, 16, 64):
    p = SystemParams(lam=base.lam * mult, F=base.F, rate=base.params().rate)
    fm = fluid_metrics(p)
    print(f"{p.lam:>12.4f} {fm.W_f:>10.3f} {latency_law(p):>12.3f}")
print()
print("quadrupling the arrival rate halves the fluid latency, and the")
print("slowdown factor shrinks toward 1 at the same time.")

p = scenario_from_dimensionless(1 / 32, 100.0, 0.1, 1.0, "tcp").params()
hc = hardcore_metrics(p)
print()
print(f"hard-core floor at N_f=1/32: beta_h = {hc.beta_h:.4f} peers/m^2, "
      f"W_h = {hc.W_h:.0f} s (vs W_f = 100 s)")
