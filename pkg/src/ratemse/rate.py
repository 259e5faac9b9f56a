"""Mutual information for discrete-input continuous-output channels at fixed
state, the worst-case (compound) rate over the state, and the two-band
time-sharing rate.

Entropies are integrated in nats and converted to bits at the boundary.
Labels that transmit on disjoint output components (e.g. different frequency
bands) decompose the mutual information as H(component) plus the
component-conditional terms, which is exactly how the selection fraction
itself carries information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.optimize import minimize_scalar

from .errors import RateError
from .model import ChannelModel, InputDesign, TwoBandModel

_LN2 = math.log(2.0)
_MI_SLACK = 1e-7


def binary_entropy(t: float) -> float:
    """Binary entropy in bits, with the 0 * log 0 = 0 convention."""
    if not 0.0 <= t <= 1.0:
        raise RateError("binary entropy argument must lie in [0, 1]")
    if t in (0.0, 1.0):
        return 0.0
    return -(t * math.log2(t) + (1.0 - t) * math.log2(1.0 - t))


def _gaussian_entropy_nats(variance: float) -> float:
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def _entropy_quad_nats(logpdf, lo: float, hi: float, interior_points=None) -> float:
    def integrand(y):
        lf = logpdf(y)
        if lf < -700.0:
            return 0.0
        f = math.exp(lf)
        return -f * lf

    kwargs = {"epsabs": 1e-12, "epsrel": 1e-10, "limit": 300, "full_output": 1}
    if interior_points is not None:
        pts = sorted(p for p in interior_points if lo < p < hi)
        if pts:
            kwargs["points"] = pts
    res = integrate.quad(integrand, lo, hi, **kwargs)
    val, err = res[0], res[1]
    if not math.isfinite(val) or (len(res) > 3 and err > max(1e-8, 1e-6 * abs(val))):
        raise RateError(f"entropy quadrature did not converge (achieved {err:.3g})")
    return val


def gaussian_mixture_entropy(weights, means, variance: float) -> float:
    """Differential entropy in bits of sum_k w_k N(mu_k, variance).

    Adaptive quadrature of -f log f over the truncated support
    [min(means) - 10 sd, max(means) + 10 sd]; the discarded tail mass is
    far below the quadrature tolerance.
    """
    w = np.asarray(weights, dtype=float)
    mu = np.asarray(means, dtype=float)
    if variance <= 0.0:
        raise RateError("mixture variance must be positive")
    if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-9:
        raise RateError("mixture weights must form a probability vector")
    sd = math.sqrt(variance)
    lo, hi = float(mu.min() - 10.0 * sd), float(mu.max() + 10.0 * sd)
    log_norm = -0.5 * math.log(2.0 * math.pi * variance)
    logw = np.where(w > 0.0, np.log(np.maximum(w, 1e-300)), -np.inf)

    def logpdf(y):
        z = logw + log_norm - (y - mu) ** 2 / (2.0 * variance)
        m = np.max(z)
        return float(m + np.log(np.sum(np.exp(z - m))))

    return _entropy_quad_nats(logpdf, lo, hi, interior_points=mu) / _LN2


def _component_mi_nats(channel, labels, weights, s) -> float:
    """I(X; Y) in nats within one output component (shared output space)."""
    params = [channel.gaussian_params(x, s) for x in labels]
    if all(p is not None for p in params):
        variances = {p[1] for p in params}
        if len(variances) == 1:
            var = variances.pop()
            means = [p[0] for p in params]
            h_mix = gaussian_mixture_entropy(weights, means, var) * _LN2
            return h_mix - _gaussian_entropy_nats(var)

    intervals = [channel.output_interval(x, s) for x in labels]
    lo = min(iv[0] for iv in intervals)
    hi = max(iv[1] for iv in intervals)
    logw = np.log(np.asarray(weights, dtype=float))

    def log_mix(y):
        z = logw + np.asarray([channel.log_density(y, x, s) for x in labels])
        m = np.max(z)
        return float(m + np.log(np.sum(np.exp(z - m))))

    h_mix = _entropy_quad_nats(log_mix, lo, hi)
    h_cond = 0.0
    for x, w, p, iv in zip(labels, weights, params, intervals):
        if p is not None:
            h_cond += w * _gaussian_entropy_nats(p[1])
        else:
            h_cond += w * _entropy_quad_nats(lambda y: float(channel.log_density(y, x, s)), *iv)
    return h_mix - h_cond


def mi_discrete_input(channel: ChannelModel, design: InputDesign, s) -> float:
    """I(X; Y) in bits at fixed state s for a finite-alphabet input design."""
    groups: dict[int, list[int]] = {}
    for i, (x, p) in enumerate(zip(design.labels, design.pmf)):
        if p == 0.0:
            continue
        groups.setdefault(channel.output_component(x), []).append(i)

    total_nats = 0.0
    for idx in groups.values():
        q = sum(design.pmf[i] for i in idx)
        labels = [design.labels[i] for i in idx]
        weights = [design.pmf[i] / q for i in idx]
        total_nats += -q * math.log(q)  # component-selection entropy
        total_nats += q * _component_mi_nats(channel, labels, weights, s)

    mi_bits = total_nats / _LN2
    cap = math.log2(sum(1 for p in design.pmf if p > 0.0))
    if mi_bits < -_MI_SLACK or mi_bits > cap + _MI_SLACK:
        raise RateError(f"mutual information {mi_bits!r} outside [0, {cap!r}]")
    return min(max(mi_bits, 0.0), cap)


def worst_case_rate(channel: ChannelModel, design: InputDesign, support, grid_points: int = 64) -> float:
    """min over the state of I(X; Y): grid scan plus golden-section refinement.

    No monotonicity in s is assumed, so user channels need no structure.
    """
    lo, hi = support
    grid = np.linspace(lo, hi, grid_points)
    values = [mi_discrete_input(channel, design, s) for s in grid]
    k = int(np.argmin(values))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid_points - 1)]
    res = minimize_scalar(
        lambda s: mi_discrete_input(channel, design, s),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-9},
    )
    return min(float(res.fun), values[k])


@lru_cache(maxsize=256)
def _awgn_capacity_bits(points: tuple, variance: float) -> float:
    """Capacity in bits of a uniform constellation over AWGN of the given
    variance (uniform inputs: optimal for symmetric BPSK)."""
    m = len(points)
    h_mix = gaussian_mixture_entropy([1.0 / m] * m, list(points), variance)
    return h_mix - _gaussian_entropy_nats(variance) / _LN2


@dataclass(frozen=True)
class RateBreakdown:
    """Time-sharing rate at band-1 fraction t1, with its three pieces."""

    t1: float
    h2: float
    c1: float
    c2_worst: float

    @property
    def total(self) -> float:
        return self.h2 + self.t1 * self.c1 + (1.0 - self.t1) * self.c2_worst


def two_band_rate(model: TwoBandModel, t1: float) -> RateBreakdown:
    """Worst-state time-sharing rate H2(t1) + t1 C1 + (1 - t1) C2(s_max).

    The band-2 capacity is evaluated at the top of the state support, where
    interference is largest and the compound rate is attained.
    """
    if not 0.0 <= t1 <= 1.0:
        raise RateError("band fraction t1 must lie in [0, 1]")
    points = model.constellation.points
    c1 = _awgn_capacity_bits(points, model.sigma2)
    s_hi = model.prior.support[1]
    c2 = _awgn_capacity_bits(points, s_hi + model.sigma2)
    return RateBreakdown(t1=float(t1), h2=binary_entropy(t1), c1=c1, c2_worst=c2)
