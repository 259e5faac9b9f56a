"""Sweep of the input design tracing the rate vs MSE-decay boundary, with the
classical-bound outer curve alongside, plus extraction of the
communication-optimal and estimation-optimal operating points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds
from .errors import RateMseError
from .model import TwoBandModel
from .rate import two_band_rate


@dataclass(frozen=True)
class RegionPoint:
    t1: float
    t2: float
    rate_bits: float
    alpha_atbcrb: Optional[float]  # None flags an unbounded limit point
    alpha_bcrb: Optional[float]


@dataclass
class RegionCurve:
    points: list[RegionPoint]
    metadata: dict = field(default_factory=dict)


def sweep_tradeoff(
    model: TwoBandModel,
    t_min: float = 0.01,
    t_max: float = 0.99,
    steps: int = 101,
) -> RegionCurve:
    """Evaluate rate and both asymptotic MSE-decay constants on a t1 grid.

    Each grid point is a vertex of the achievable boundary for its design;
    the sweep stays strictly inside (0, 1) where both constants are finite.
    """
    if not 0.0 < t_min < t_max < 1.0:
        raise RateMseError("sweep range must satisfy 0 < t_min < t_max < 1")
    if steps < 2:
        raise RateMseError("sweep needs at least 2 steps")
    channel, prior = model.channel, model.prior
    points = []
    for t1 in np.linspace(t_min, t_max, steps):
        design = model.design(float(t1))
        breakdown = two_band_rate(model, float(t1))
        points.append(
            RegionPoint(
                t1=float(t1),
                t2=float(1.0 - t1),
                rate_bits=breakdown.total,
                alpha_atbcrb=bounds.alpha_atbcrb(channel, design, prior),
                alpha_bcrb=bounds.alpha_bcrb(channel, design, prior),
            )
        )
    metadata = {
        "sigma2": model.sigma2,
        "modulation": model.constellation.kind,
        "power": model.constellation.power,
        "prior": {"kind": model.prior.kind, "a": model.prior.a, "b": model.prior.b},
        "t_min": t_min,
        "t_max": t_max,
        "steps": steps,
    }
    return RegionCurve(points=points, metadata=metadata)


def operating_points(curve: RegionCurve) -> tuple[RegionPoint, RegionPoint]:
    """(communication-optimal, estimation-optimal) points of a swept curve.

    Communication-optimal maximizes the rate; estimation-optimal minimizes
    the achievable decay constant.  Ties break toward smaller alpha, then
    smaller t1.
    """
    if not curve.points:
        raise RateMseError("region curve is empty")
    finite = [p for p in curve.points if p.alpha_atbcrb is not None]
    if not finite:
        raise RateMseError("region curve has no finite-alpha points")
    comm = min(finite, key=lambda p: (-p.rate_bits, p.alpha_atbcrb, p.t1))
    est = min(finite, key=lambda p: (p.alpha_atbcrb, p.t1))
    return comm, est
