"""Shared randomized-model generator for property and acceptance tests."""

import numpy as np

from spatialp2p.rates import RateModel


def random_model(rng) -> RateModel:
    kind = rng.choice(7)
    C = float(rng.uniform(0.2, 5.0))
    R = float(rng.uniform(0.05, 3.0))
    if kind == 0:
        return RateModel.tcp(C, R)
    if kind == 1:
        return RateModel.udp(C, R)
    if kind == 2:
        return RateModel.affine_rtt(C, q=float(rng.uniform(0.01, 2.0)), R=R)
    if kind == 3:
        c = float(rng.uniform(0.1, 2.0))
        return RateModel.overhead(C, c=c, R=min(R, 0.9 * C / c))
    if kind == 4:
        return RateModel.per_flow_cap(C, U=float(rng.uniform(0.2, 8.0)), R=R)
    if kind == 5:
        return RateModel.snr(C, alpha=float(rng.uniform(2.2, 7.0)), R=R)
    return RateModel.snr(C, alpha=float(rng.uniform(2.2, 7.0)))
