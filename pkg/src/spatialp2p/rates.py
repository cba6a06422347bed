"""Pairwise bit-rate functions f(r) = g(r)·1{r <= R} and their integral summaries.

Seven catalogued shapes: inverse-distance ("tcp"), constant ("udp"), affine
round-trip ("affine_rtt"), overhead-corrected ("overhead"), capped
("per_flow_cap") and Shannon-type SNR rates with finite or infinite range.

Two scalar summaries drive every equilibrium law downstream:

    gamma         = 2*pi * integral of r*f(r) dr      (rate-area, bits/s*m^2)
    typical_range = integral r^2 f / integral r f     (length)

``gamma`` uses closed forms; ``gamma_quadrature`` is an independent
adaptive-Simpson evaluation kept deliberately separate so the two can
cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import hyp2f1

TCP = "tcp"
UDP = "udp"
AFFINE_RTT = "affine_rtt"
OVERHEAD = "overhead"
PER_FLOW_CAP = "per_flow_cap"
SNR_RANGE = "snr_range"
SNR_INFINITE = "snr_infinite"

KINDS = (TCP, UDP, AFFINE_RTT, OVERHEAD, PER_FLOW_CAP, SNR_RANGE, SNR_INFINITE)

# kinds whose rate diverges as r -> 0 and needs the evaluation clamp
_SINGULAR_AT_ZERO = (TCP, OVERHEAD, PER_FLOW_CAP, SNR_RANGE, SNR_INFINITE)
# kinds with gamma linear in C
LINEAR_IN_C = (TCP, UDP, AFFINE_RTT)


class RateModelError(ValueError):
    pass


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class RateModel:
    """One pairwise rate shape with its parameters.

    C is the speed constant (units depend on kind: bits/s*m for tcp and
    affine_rtt, bits/s for udp/overhead/per_flow_cap, dimensionless
    SNR-at-1m for the snr kinds). R is the peering range in meters,
    infinite only for snr_infinite.
    """

    kind: str
    C: float
    R: float
    q: float = 0.0       # affine_rtt RTT offset, meters
    c: float = 0.0       # overhead cost, bits/s
    U: float = 0.0       # per-flow cap, bits/s
    alpha: float = 0.0   # snr path-loss exponent

    def __post_init__(self):
        k = self.kind
        if k not in KINDS:
            raise RateModelError(f"unknown rate kind {k!r}")
        if not (self.C > 0):
            raise RateModelError(f"C must be positive, got {self.C}")
        if k == SNR_INFINITE:
            if not math.isinf(self.R):
                raise RateModelError("snr_infinite requires R = inf")
        elif not (0 < self.R < math.inf):
            raise RateModelError(f"{k} requires a finite positive range, got R={self.R}")
        if k == AFFINE_RTT and not (self.q > 0):
            raise RateModelError(f"affine_rtt requires q > 0, got {self.q}")
        if k == OVERHEAD:
            if not (self.c > 0):
                raise RateModelError(f"overhead requires c > 0, got {self.c}")
            if self.R > self.C / self.c:
                raise RateModelError(
                    f"overhead range R={self.R} exceeds C/c={self.C / self.c}: "
                    "the rate would be negative inside the range"
                )
        if k == PER_FLOW_CAP and not (self.U > 0):
            raise RateModelError(f"per_flow_cap requires U > 0, got {self.U}")
        if k in (SNR_RANGE, SNR_INFINITE) and not (self.alpha > 2):
            raise RateModelError(f"snr kinds require alpha > 2, got {self.alpha}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def tcp(C: float, R: float) -> "RateModel":
        return RateModel(TCP, C=C, R=R)

    @staticmethod
    def udp(C: float, R: float) -> "RateModel":
        return RateModel(UDP, C=C, R=R)

    @staticmethod
    def affine_rtt(C: float, q: float, R: float) -> "RateModel":
        return RateModel(AFFINE_RTT, C=C, R=R, q=q)

    @staticmethod
    def overhead(C: float, c: float, R: float) -> "RateModel":
        return RateModel(OVERHEAD, C=C, R=R, c=c)

    @staticmethod
    def per_flow_cap(C: float, U: float, R: float) -> "RateModel":
        return RateModel(PER_FLOW_CAP, C=C, R=R, U=U)

    @staticmethod
    def snr(C: float, alpha: float, R: float = math.inf) -> "RateModel":
        kind = SNR_INFINITE if math.isinf(R) else SNR_RANGE
        return RateModel(kind, C=C, R=R, alpha=alpha)

    @property
    def finite_range(self) -> bool:
        return math.isfinite(self.R)

    @property
    def clamp_radius(self) -> float:
        """Evaluation floor for the r -> 0 singularity (coincident peers)."""
        if self.kind not in _SINGULAR_AT_ZERO:
            return 0.0
        scale = self.R if self.finite_range else self.C ** (1.0 / self.alpha)
        return 1e-9 * scale


def bare_rate(m: RateModel, r):
    """g(r) without the range indicator; used by the nearest-peers rule.

    Evaluates at max(r, clamp) so coincident points stay finite.
    """
    r = np.maximum(np.asarray(r, dtype=float), m.clamp_radius)
    k = m.kind
    if k == TCP:
        out = m.C / r
    elif k == UDP:
        out = np.full_like(r, m.C)
    elif k == AFFINE_RTT:
        out = m.C / (r + m.q)
    elif k == OVERHEAD:
        out = np.maximum(m.C / r - m.c, 0.0)
    elif k == PER_FLOW_CAP:
        out = np.minimum(m.C / r, m.U)
    else:  # snr kinds
        out = 0.5 * np.log1p(m.C / r**m.alpha)
    return out if out.ndim else float(out)


def pair_rate(m: RateModel, r):
    """Bit rate between two peers at distance r: g(r) inside the closed
    ball of radius R, zero beyond. Accepts scalars or arrays."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise RateModelError("distance must be non-negative")
    out = np.where(arr <= m.R, bare_rate(m, arr), 0.0)
    return out if out.ndim else float(out)


# -- closed-form summaries -------------------------------------------------


def _snr_gamma_truncated(C: float, alpha: float, Rt: float) -> float:
    # 2*pi * int_0^Rt r * (1/2) ln(1 + C r^-alpha) dr, via integration by
    # parts and the incomplete-beta/hypergeometric form of the remainder.
    if Rt == 0.0:
        return 0.0
    x = Rt**alpha / C
    b = 2.0 / alpha
    return math.pi * (Rt**2 / 2.0) * (math.log1p(1.0 / x) + (alpha / 2.0) * hyp2f1(1.0, b, 1.0 + b, -x))


def _snr4_gamma(C: float, R: float) -> float:
    # explicit antiderivative for alpha = 4
    return math.pi * (0.5 * R**2 * math.log1p(C / R**4) + math.sqrt(C) * math.atan(R**2 / math.sqrt(C)))


def gamma(m: RateModel) -> float:
    """Rate-area 2*pi * integral_0^R r f(r) dr, closed form per kind."""
    k, C, R = m.kind, m.C, m.R
    if k == TCP:
        return 2.0 * math.pi * C * R
    if k == UDP:
        return math.pi * C * R**2
    if k == AFFINE_RTT:
        return 2.0 * math.pi * C * (R - m.q * math.log1p(R / m.q))
    if k == OVERHEAD:
        return 2.0 * math.pi * (R * C - R**2 * m.c / 2.0)
    if k == PER_FLOW_CAP:
        if C >= m.U * R:
            return math.pi * m.U * R**2
        return math.pi * (2.0 * C * R - C**2 / m.U)
    if k == SNR_RANGE:
        if m.alpha == 4.0:
            return _snr4_gamma(C, R)
        return _snr_gamma_truncated(C, m.alpha, R)
    # snr_infinite
    a = m.alpha
    return math.pi**2 * C ** (2.0 / a) / (2.0 * math.sin(2.0 * math.pi / a))


def partial_gamma(m: RateModel, radius: float) -> float:
    """2*pi * integral_0^min(radius, R) r g(r) dr.

    The integral of the rate over a disk of the given radius; finite for
    every kind because r*g(r) is integrable at the origin.
    """
    if radius < 0:
        raise RateModelError("radius must be non-negative")
    a = min(radius, m.R)
    if a == 0.0:
        return 0.0
    k, C = m.kind, m.C
    if k == TCP:
        return 2.0 * math.pi * C * a
    if k == UDP:
        return math.pi * C * a**2
    if k == AFFINE_RTT:
        return 2.0 * math.pi * C * (a - m.q * math.log1p(a / m.q))
    if k == OVERHEAD:
        return 2.0 * math.pi * (a * C - a**2 * m.c / 2.0)
    if k == PER_FLOW_CAP:
        if C >= m.U * a:
            return math.pi * m.U * a**2
        return math.pi * (2.0 * C * a - C**2 / m.U)
    return _snr_gamma_truncated(C, m.alpha, a)


def second_moment(m: RateModel) -> float:
    """integral_0^R r^2 f(r) dr (no angular factor); the line-flux moment."""
    k, C, R = m.kind, m.C, m.R
    if k == TCP:
        return C * R**2 / 2.0
    if k == UDP:
        return C * R**3 / 3.0
    if k == AFFINE_RTT:
        q = m.q
        return C * (R**2 / 2.0 - q * R + q**2 * math.log1p(R / q))
    if k == OVERHEAD:
        return C * R**2 / 2.0 - m.c * R**3 / 3.0
    if k == PER_FLOW_CAP:
        r0 = C / m.U
        if R <= r0:
            return m.U * R**3 / 3.0
        return m.U * r0**3 / 3.0 + C * (R**2 - r0**2) / 2.0
    if k == SNR_RANGE:
        return _quad_moment(m, power=2, rel_tol=1e-12)
    # snr_infinite: finite only for alpha > 3
    if m.alpha <= 3.0:
        raise RateModelError(
            f"second moment diverges for infinite-range snr with alpha={m.alpha} <= 3"
        )
    return _quad_moment(m, power=2, rel_tol=1e-12)


def typical_range(m: RateModel) -> float:
    """Mean interaction distance weighted by transported bits:
    integral r^2 f / integral r f."""
    first = gamma(m) / (2.0 * math.pi)
    return second_moment(m) / first


# -- independent quadrature oracle -----------------------------------------


def _adaptive_simpson(fun, a: float, b: float, abs_tol: float, max_depth: int = 60) -> float:
    """Adaptive Simpson with interval bisection and the 1/15 error rule."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = fun(a), fun(b)
    m0 = 0.5 * (a + b)
    fm = fun(m0)
    whole = simpson(fa, fm, fb, b - a)
    stack = [(a, b, fa, fm, fb, whole, abs_tol, 0)]
    total = 0.0
    while stack:
        a0, b0, f0, f1, f2, s, tol, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm, frm = fun(lm), fun(rm)
        left = simpson(f0, flm, f1, m0 - a0)
        right = simpson(f1, frm, f2, b0 - m0)
        err = left + right - s
        if abs(err) <= 15.0 * tol or (b0 - a0) < 1e-15 * (abs(a0) + abs(b0)):
            total += left + right + err / 15.0
        elif depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{a0}, {b0}] at depth {depth}"
            )
        else:
            stack.append((a0, m0, f0, flm, f1, left, tol / 2.0, depth + 1))
            stack.append((m0, b0, f1, frm, f2, right, tol / 2.0, depth + 1))
    return total


def _rg_integrand(m: RateModel, power: int):
    """r^power * g(r) with the exact analytic limit at r = 0 (no clamp)."""
    k, C = m.kind, m.C

    def g(r: float) -> float:
        if k == TCP:
            return C / r
        if k == UDP:
            return C
        if k == AFFINE_RTT:
            return C / (r + m.q)
        if k == OVERHEAD:
            return max(C / r - m.c, 0.0)
        if k == PER_FLOW_CAP:
            return min(C / r, m.U)
        return 0.5 * math.log1p(C / r**m.alpha)

    if power == 1 and k in (TCP, OVERHEAD):
        limit0 = C  # r * C/r
    else:
        limit0 = 0.0

    def h(r: float) -> float:
        if r == 0.0:
            return limit0
        return r**power * g(r)

    return h


def _kink_points(m: RateModel) -> list:
    pts = []
    if m.kind == PER_FLOW_CAP:
        r0 = m.C / m.U
        if 0.0 < r0 < m.R:
            pts.append(r0)
    return pts


def _quad_on(fun, pieces, rel_tol: float) -> float:
    # rough composite pass fixes the absolute tolerance for the adaptive pass
    rough = 0.0
    for a, b in pieces:
        xs = np.linspace(a, b, 257)
        ys = np.array([fun(x) for x in xs])
        rough += float(np.sum((ys[:-1] + ys[1:]) * 0.5 * np.diff(xs)))
    scale = max(abs(rough), 1e-300)
    abs_tol = rel_tol * scale
    return sum(_adaptive_simpson(fun, a, b, abs_tol / len(pieces)) for a, b in pieces)


def _snr_tail(C: float, alpha: float, cut: float, power: int) -> float:
    """integral_cut^inf r^power * (1/2) ln(1 + C r^-alpha) dr.

    Termwise integration of the alternating log series; needs
    C * cut^-alpha <= 1/2 and alpha > power + 1 (convergence of the k=1
    term). The truncation error is below the first omitted term.
    """
    x = C * cut ** (-alpha)
    if x > 0.5:
        raise QuadratureError("tail cutoff too small for the series expansion")
    if alpha <= power + 1:
        raise RateModelError("moment diverges for this alpha")
    total = 0.0
    xk = 1.0
    for k in range(1, 500):
        xk *= x
        term = ((-1) ** (k + 1) / k) * xk * cut ** (power + 1) / (k * alpha - power - 1)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return 0.5 * total
    raise QuadratureError("tail series did not converge")


def _quad_moment(m: RateModel, power: int, rel_tol: float) -> float:
    fun = _rg_integrand(m, power)
    if m.finite_range:
        cuts = [0.0] + _kink_points(m) + [m.R]
        pieces = list(zip(cuts[:-1], cuts[1:]))
        return _quad_on(fun, pieces, rel_tol)
    # infinite range (snr only): quadrature to a cutoff plus the analytic tail
    a, C = m.alpha, m.C
    cut = 8.0 * C ** (1.0 / a)
    body = _quad_on(fun, [(0.0, cut)], rel_tol)
    return body + _snr_tail(C, a, cut, power)


def gamma_quadrature(m: RateModel, rel_tol: float = 1e-9) -> float:
    """Adaptive-quadrature value of 2*pi * integral r f(r) dr.

    Independent of the closed forms in :func:`gamma`; rel_tol must be in
    (0, 1e-4].
    """
    if not (0.0 < rel_tol <= 1e-4):
        raise RateModelError(f"rel_tol must be in (0, 1e-4], got {rel_tol}")
    return 2.0 * math.pi * _quad_moment(m, power=1, rel_tol=rel_tol)


def second_moment_quadrature(m: RateModel, rel_tol: float = 1e-9) -> float:
    """Quadrature cross-check for integral r^2 f(r) dr."""
    if not (0.0 < rel_tol <= 1e-4):
        raise RateModelError(f"rel_tol must be in (0, 1e-4], got {rel_tol}")
    if m.kind == SNR_INFINITE and m.alpha <= 3.0:
        raise RateModelError("second moment diverges for alpha <= 3")
    return _quad_moment(m, power=2, rel_tol=rel_tol)
