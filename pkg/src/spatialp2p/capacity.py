"""Load on the underlying transport network and dimensioning rules.

With routers of density theta and per-link capacity K, a straight line of
the plane crosses links at intensity 2*sqrt(theta), giving a linear
capacity Xi = 2*sqrt(theta)*K (bits/s per meter of cut). The swarm in its
uniform-density equilibrium pushes a flux Psi = (2/pi)*lam*F*typical_range
through any unit-length cut; feasibility requires Psi <= Xi, and the access
links must individually carry mu_f = sqrt(lam*F*gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import AnalyticError, SystemParams
from .rates import gamma, typical_range


@dataclass(frozen=True)
class NetworkModel:
    theta: float   # router density, m^-2
    K: float       # link capacity, bits/s

    def __post_init__(self):
        if not (self.theta > 0):
            raise AnalyticError(f"theta must be positive, got {self.theta}")
        if not (self.K > 0):
            raise AnalyticError(f"K must be positive, got {self.K}")


@dataclass(frozen=True)
class FeasibilityReport:
    psi: float                 # swarm flux per unit length, bits/s/m
    xi: float                  # linear network capacity, bits/s/m
    network_ok: bool           # necessary condition psi <= xi
    access_threshold: float    # required per-peer access rate, = mu_f


def linear_capacity(n: NetworkModel) -> float:
    """Total transport capacity crossing a unit-length line: 2*sqrt(theta)*K."""
    return 2.0 * math.sqrt(n.theta) * n.K


def line_flux(p: SystemParams) -> float:
    """Peer traffic crossing a unit-length line in equilibrium.

    Equals (2/pi)*lam*F*typical_range; for the inverse-distance kind this
    is lam*F*R/pi and for the constant kind 4*lam*F*R/(3*pi). Independent
    of the speed constant whenever the rate is linear in C.
    """
    return (2.0 / math.pi) * p.lam * p.F * typical_range(p.rate)


def feasibility(p: SystemParams, n: NetworkModel) -> FeasibilityReport:
    """Necessary conditions for the network and the access to carry the swarm."""
    psi = line_flux(p)
    xi = linear_capacity(n)
    mu_f = math.sqrt(p.lam * p.F * gamma(p.rate))
    return FeasibilityReport(psi=psi, xi=xi, network_ok=psi <= xi, access_threshold=mu_f)


def min_dimensioning(p: SystemParams, theta: float | None = None, K: float | None = None) -> float:
    """Smallest missing network parameter putting Xi = Psi.

    Fix exactly one of theta (returns the required K) or K (returns the
    required theta).
    """
    if (theta is None) == (K is None):
        raise AnalyticError("fix exactly one of theta or K")
    psi = line_flux(p)
    if theta is not None:
        if not (theta > 0):
            raise AnalyticError(f"theta must be positive, got {theta}")
        return psi / (2.0 * math.sqrt(theta))
    if not (K > 0):
        raise AnalyticError(f"K must be positive, got {K}")
    return (psi / (2.0 * K)) ** 2
