"""What the swarm costs the underlying transport network.

The flux through any unit-length line is Psi = (2/pi) lam F R_tilde,
independent of the speed constant C for protocol-like rates: speeding up
individual transfers shortens sojourns by exactly the factor that keeps
the traffic crossing the network the same. The network is feasible while
Psi stays below the linear capacity Xi = 2 sqrt(theta) K.
"""

from spatialp2p import NetworkModel, SystemParams, RateModel, fluid_metrics
from spatialp2p.capacity import feasibility, line_flux, linear_capacity, min_dimensioning

lam, F, R = 20.37, 128000.0, 0.1
for C in (1.0, 10.0, 100.0):
    p = SystemParams(lam=lam, F=F, rate=RateModel.tcp(C, R))
    print(f"C = {C:>5}: flux Psi = {line_flux(p):>10.1f} bits/s/m, "
          f"W_f = {fluid_metrics(p).W_f:>7.2f} s")
print("-> same network burden, ten times the speed; only N_f shrinks.")
print()

p = SystemParams(lam=lam, F=F, rate=RateModel.tcp(1.0, R))
net = NetworkModel(theta=1e4, K=5e4)
rep = feasibility(p, net)
print(f"router density {net.theta}/m^2, link capacity {net.K} bits/s:")
print(f"  Psi = {rep.psi:.1f}, Xi = {rep.xi:.1f}, network_ok = {rep.network_ok}")
print(f"  per-peer access must carry mu_f = {rep.access_threshold:.1f} bits/s")
print()

k_needed = min_dimensioning(p, theta=net.theta)
theta_needed = min_dimensioning(p, K=net.K)
print(f"dimensioning to the boundary Xi = Psi:")
print(f"  at theta = {net.theta}: need K >= {k_needed:.1f}")
print(f"  at K = {net.K}: need theta >= {theta_needed:.4f}")
check = feasibility(p, NetworkModel(theta=net.theta, K=k_needed))
print(f"  check: Xi/Psi at the boundary = {check.xi / check.psi:.12f}")
