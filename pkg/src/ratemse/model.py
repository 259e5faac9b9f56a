"""Scalar-state priors, input designs, and per-symbol channel families.

The state is a scalar random parameter on a closed interval, drawn once and
held fixed over a transmission block.  Channels are per-symbol conditional
densities d(y | x, s) over a continuous real output, with hooks for the
first and second log-density derivatives in s (analytic where available,
central finite differences otherwise).

All types are immutable after construction and safe to share across
concurrent workers; randomness enters only through explicitly passed
``numpy.random.Generator`` instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import ModelError, SupportError

BAND1 = "b1"
BAND2 = "b2"

#: states closer than this to a support endpoint are rejected where the
#: prior score is involved (it diverges there); never silently clamped.
BOUNDARY_TOL = 1e-9

_NORMALIZATION_TOL = 1e-9


def beta_density(s, a: float, b: float):
    """Beta(a, b) density on the open interval (0, 1).

    Evaluated through log-gamma for stability at large shape parameters.
    Raises :class:`SupportError` for states outside the open support.
    """
    if a <= 0 or b <= 0:
        raise ModelError("beta shape parameters must be positive")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0) or np.any(s_arr >= 1.0):
        raise SupportError("state outside prior support")
    log_norm = gammaln(a + b) - gammaln(a) - gammaln(b)
    out = np.exp(log_norm + (a - 1.0) * np.log(s_arr) + (b - 1.0) * np.log1p(-s_arr))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StatePrior:
    """Continuous prior on a closed scalar interval.

    Built-in kind ``"beta"`` lives on [0, 1] with closed-form score and
    derivatives; ``"custom"`` wraps a user density (and optionally a score)
    with finite-difference fallbacks.  Custom densities must accept numpy
    arrays if they are to be used with vectorized callers.
    """

    kind: str
    support: tuple[float, float]
    a: Optional[float] = None
    b: Optional[float] = None
    density_fn: Optional[Callable] = None
    score_fn: Optional[Callable] = None

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise ModelError("prior support must be a nondegenerate interval")
        total, _ = integrate.quad(self.density, lo, hi, limit=200)
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ModelError(
                f"prior density integrates to {total!r}, not 1 within {_NORMALIZATION_TOL:g}"
            )

    @classmethod
    def beta(cls, a: float, b: float) -> "StatePrior":
        if a <= 0 or b <= 0:
            raise ModelError("beta shape parameters must be positive")
        return cls(kind="beta", support=(0.0, 1.0), a=float(a), b=float(b))

    @classmethod
    def from_density(
        cls,
        density: Callable,
        support: tuple[float, float],
        score: Optional[Callable] = None,
    ) -> "StatePrior":
        return cls(
            kind="custom",
            support=(float(support[0]), float(support[1])),
            density_fn=density,
            score_fn=score,
        )

    # -- densities ---------------------------------------------------------

    def density(self, s):
        if self.kind == "beta":
            return beta_density(s, self.a, self.b)
        self._check_in_support(s)
        return self.density_fn(s)

    def log_density(self, s):
        if self.kind == "beta":
            s_arr = np.asarray(s, dtype=float)
            if np.any(s_arr <= 0.0) or np.any(s_arr >= 1.0):
                raise SupportError("state outside prior support")
            log_norm = gammaln(self.a + self.b) - gammaln(self.a) - gammaln(self.b)
            out = log_norm + (self.a - 1.0) * np.log(s_arr) + (self.b - 1.0) * np.log1p(-s_arr)
            return out if out.ndim else float(out)
        return np.log(self.density(s))

    # -- score and its state derivatives ------------------------------------

    def score(self, s):
        """d/ds log p(s); singular at the support boundary."""
        self._check_interior(s)
        if self.kind == "beta":
            s_arr = np.asarray(s, dtype=float)
            out = (self.a - 1.0) / s_arr - (self.b - 1.0) / (1.0 - s_arr)
            return out if out.ndim else float(out)
        if self.score_fn is not None:
            return self.score_fn(s)
        return self._fd_log_density(s, order=1)

    def score_ds(self, s):
        self._check_interior(s)
        if self.kind == "beta":
            s_arr = np.asarray(s, dtype=float)
            out = -(self.a - 1.0) / s_arr**2 - (self.b - 1.0) / (1.0 - s_arr) ** 2
            return out if out.ndim else float(out)
        return self._fd_score(s, order=1)

    def score_ds2(self, s):
        self._check_interior(s)
        if self.kind == "beta":
            s_arr = np.asarray(s, dtype=float)
            out = 2.0 * (self.a - 1.0) / s_arr**3 - 2.0 * (self.b - 1.0) / (1.0 - s_arr) ** 3
            return out if out.ndim else float(out)
        return self._fd_score(s, order=2)

    def _fd_log_density(self, s, order: int):
        h = self._fd_step(s)
        f = self.log_density
        if order == 1:
            return (f(s + h) - f(s - h)) / (2.0 * h)
        return (f(s + h) - 2.0 * f(s) + f(s - h)) / h**2

    def _fd_score(self, s, order: int):
        h = self._fd_step(s)
        g = self.score
        if order == 1:
            return (g(s + h) - g(s - h)) / (2.0 * h)
        return (g(s + h) - 2.0 * g(s) + g(s - h)) / h**2

    def _fd_step(self, s) -> float:
        lo, hi = self.support
        margin = min(np.min(np.asarray(s) - lo), np.min(hi - np.asarray(s)))
        return min(max(1e-6, 1e-5 * (hi - lo)), 0.5 * float(margin))

    # -- sampling ------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the prior; beta priors use the two-gamma ratio."""
        if self.kind == "beta":
            g1 = rng.gamma(self.a, 1.0, size=size)
            g2 = rng.gamma(self.b, 1.0, size=size)
            return g1 / (g1 + g2)
        cdf_grid, s_grid = self._inverse_cdf_table
        u = rng.uniform(0.0, 1.0, size=size)
        return np.interp(u, cdf_grid, s_grid)

    @cached_property
    def _inverse_cdf_table(self):
        lo, hi = self.support
        s_grid = np.linspace(lo, hi, 4097)[1:-1]
        pdf = np.asarray([self.density(s) for s in s_grid], dtype=float)
        cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(s_grid))])
        cdf /= cdf[-1]
        return cdf, s_grid

    # -- quadrature ----------------------------------------------------------

    def expect(self, fn: Callable, rtol: float = 1e-9, limit: int = 300) -> float:
        """E[fn(S)] by adaptive quadrature over the open support."""
        lo, hi = self.support
        val, err = integrate.quad(
            lambda s: self.density(s) * fn(s), lo, hi, epsabs=1e-13, epsrel=rtol, limit=limit
        )
        if not math.isfinite(val):
            raise ModelError("prior expectation diverged")
        return val

    # -- regularity gate -------------------------------------------------------

    @property
    def bounds_regular(self) -> bool:
        """Whether the estimation-bound machinery may be applied.

        Beta priors qualify with a = b > 2 (square-integrable score against
        the prior) or a = b = 1 (flat prior: the score vanishes identically).
        Custom priors are taken at the caller's word.
        """
        if self.kind != "beta":
            return True
        if self.a != self.b:
            return False
        return self.a > 2.0 or self.a == 1.0

    def require_regularity(self):
        if not self.bounds_regular:
            raise ModelError(
                "prior fails the regularity conditions for estimation bounds "
                "(beta priors need a = b > 2, or a = b = 1 for a flat prior)"
            )

    # -- helpers ---------------------------------------------------------------

    def _check_in_support(self, s):
        lo, hi = self.support
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < lo) or np.any(s_arr > hi):
            raise SupportError("state outside prior support")

    def _check_interior(self, s):
        lo, hi = self.support
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr - lo < BOUNDARY_TOL) or np.any(hi - s_arr < BOUNDARY_TOL):
            raise SupportError("score singular at support boundary")

    def contains(self, s, strict: bool = False) -> bool:
        lo, hi = self.support
        if strict:
            return lo < s < hi
        return lo <= s <= hi


@dataclass(frozen=True)
class Constellation:
    """Finite real input constellation under a symbol energy budget P."""

    kind: str
    power: float
    points: tuple[float, ...]

    @classmethod
    def bpsk(cls, power: float) -> "Constellation":
        if power <= 0:
            raise ModelError("constellation power must be positive")
        r = math.sqrt(power)
        return cls(kind="bpsk", power=float(power), points=(r, -r))

    @classmethod
    def pam4(cls, power: float) -> "Constellation":
        if power <= 0:
            raise ModelError("constellation power must be positive")
        c = math.sqrt(power / 5.0)
        return cls(kind="4pam", power=float(power), points=(3.0 * c, c, -c, -3.0 * c))

    @classmethod
    def from_name(cls, name: str, power: float) -> "Constellation":
        if name == "bpsk":
            return cls.bpsk(power)
        if name == "4pam":
            return cls.pam4(power)
        raise ModelError(f"unknown modulation {name!r}")

    @property
    def mean_energy(self) -> float:
        # uniform weights and the {±√P} / {±3√(P/5), ±√(P/5)} geometry give
        # mean energy P as an algebraic identity for both kinds
        return self.power

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self.points), 1.0 / len(self.points))


@dataclass(frozen=True)
class InputDesign:
    """Finite input alphabet with a pmf; two-band designs carry t1.

    ``labels`` are arbitrary hashables; two-band labels are (band, amplitude)
    pairs.  The pmf must be a probability vector; for two-band designs the
    band-1 fraction t1 lies strictly inside (0, 1) (the degenerate endpoints
    are expressed as single-band designs instead).
    """

    labels: tuple
    pmf: tuple[float, ...]
    t1: Optional[float] = None

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if len(p) != len(self.labels):
            raise ModelError("pmf length does not match the alphabet")
        if np.any(p < 0.0):
            raise ModelError("pmf entries must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ModelError(f"pmf sums to {p.sum()!r}, not 1 within 1e-12")
        if self.t1 is not None and not 0.0 < self.t1 < 1.0:
            raise ModelError("band fraction t1 must lie strictly inside (0, 1)")

    @classmethod
    def uniform(cls, labels: Sequence) -> "InputDesign":
        m = len(labels)
        return cls(labels=tuple(labels), pmf=tuple([1.0 / m] * m))

    @classmethod
    def two_band(cls, t1: float, constellation: Constellation) -> "InputDesign":
        if not 0.0 < t1 < 1.0:
            raise ModelError("band fraction t1 must lie strictly inside (0, 1)")
        m = len(constellation.points)
        labels = tuple((BAND1, x) for x in constellation.points) + tuple(
            (BAND2, x) for x in constellation.points
        )
        pmf = tuple([t1 / m] * m + [(1.0 - t1) / m] * m)
        return cls(labels=labels, pmf=pmf, t1=float(t1))

    @classmethod
    def single_band(cls, band: str, constellation: Constellation) -> "InputDesign":
        if band not in (BAND1, BAND2):
            raise ModelError(f"unknown band {band!r}")
        return cls.uniform([(band, x) for x in constellation.points])

    @property
    def t2(self) -> Optional[float]:
        return None if self.t1 is None else 1.0 - self.t1

    @property
    def pmf_array(self) -> np.ndarray:
        return np.asarray(self.pmf, dtype=float)


def _fd_step_state(s: float) -> float:
    # two-sided finite differences on the log density; the step follows the
    # curvature recipe max(1e-5, 1e-4 * (1 + |s|))
    return max(1e-5, 1e-4 * (1.0 + abs(s)))


class ChannelModel:
    """Per-symbol conditional density d(y | x, s) with state-derivative hooks.

    Subclasses must implement :meth:`log_density` and :meth:`output_interval`.
    Analytic derivative / Fisher hooks return ``None`` when unavailable, in
    which case callers fall back to finite differences and quadrature.
    """

    def log_density(self, y, x, s):
        raise NotImplementedError

    def density(self, y, x, s):
        return np.exp(self.log_density(y, x, s))

    def dlogd_ds(self, y, x, s):
        h = _fd_step_state(s)
        return (self.log_density(y, x, s + h) - self.log_density(y, x, s - h)) / (2.0 * h)

    def d2logd_ds2(self, y, x, s):
        h = _fd_step_state(s)
        return (
            self.log_density(y, x, s + h)
            - 2.0 * self.log_density(y, x, s)
            + self.log_density(y, x, s - h)
        ) / h**2

    def output_interval(self, x, s) -> tuple[float, float]:
        """Truncation interval carrying all but ~1e-22 of the output mass."""
        raise NotImplementedError

    def output_component(self, x) -> int:
        """Index of the disjoint output space the label transmits on."""
        return 0

    def gaussian_params(self, x, s):
        """(mean, variance) when d(.|x, s) is Gaussian, else None."""
        return None

    def fisher(self, x, s):
        """Analytic per-symbol Fisher information, or None."""
        return None

    def fisher_ds(self, x, s):
        return None

    def fisher_ds2(self, x, s):
        return None

    def sample(self, x, s, rng: np.random.Generator, size=None):
        raise NotImplementedError


class GaussianMeanShift(ChannelModel):
    """Y = x + Z with Z ~ N(0, sigma2); carries no state information."""

    def __init__(self, sigma2: float):
        if sigma2 <= 0:
            raise ModelError("noise variance must be positive")
        self.sigma2 = float(sigma2)

    def log_density(self, y, x, s):
        v = self.sigma2
        return -0.5 * math.log(2.0 * math.pi * v) - (np.asarray(y) - x) ** 2 / (2.0 * v)

    def dlogd_ds(self, y, x, s):
        return np.zeros_like(np.asarray(y, dtype=float))

    def d2logd_ds2(self, y, x, s):
        return np.zeros_like(np.asarray(y, dtype=float))

    def output_interval(self, x, s):
        w = 10.0 * math.sqrt(self.sigma2)
        return (x - w, x + w)

    def gaussian_params(self, x, s):
        return (float(x), self.sigma2)

    def fisher(self, x, s):
        return 0.0

    def fisher_ds(self, x, s):
        return 0.0

    def fisher_ds2(self, x, s):
        return 0.0

    def sample(self, x, s, rng, size=None):
        return x + rng.normal(0.0, math.sqrt(self.sigma2), size=size)


class GaussianStateVariance(ChannelModel):
    """Y = x + V + Z with V ~ N(0, s) and Z ~ N(0, sigma2): variance s + sigma2."""

    def __init__(self, sigma2: float):
        if sigma2 <= 0:
            raise ModelError("noise variance must be positive")
        self.sigma2 = float(sigma2)

    def _var(self, s):
        v = s + self.sigma2
        if np.any(np.asarray(v) <= 0.0):
            raise ModelError("total variance s + sigma2 must stay positive")
        return v

    def log_density(self, y, x, s):
        v = self._var(s)
        return -0.5 * np.log(2.0 * math.pi * v) - (np.asarray(y) - x) ** 2 / (2.0 * v)

    def dlogd_ds(self, y, x, s):
        v = self._var(s)
        return -0.5 / v + (np.asarray(y) - x) ** 2 / (2.0 * v**2)

    def d2logd_ds2(self, y, x, s):
        v = self._var(s)
        return 0.5 / v**2 - (np.asarray(y) - x) ** 2 / v**3

    def output_interval(self, x, s):
        w = 10.0 * math.sqrt(self._var(s))
        return (x - w, x + w)

    def gaussian_params(self, x, s):
        return (float(x), float(self._var(s)))

    def fisher(self, x, s):
        return 1.0 / (2.0 * self._var(s) ** 2)

    def fisher_ds(self, x, s):
        return -1.0 / self._var(s) ** 3

    def fisher_ds2(self, x, s):
        return 3.0 / self._var(s) ** 4

    def sample(self, x, s, rng, size=None):
        return x + rng.normal(0.0, math.sqrt(self._var(s)), size=size)


class CustomChannel(ChannelModel):
    """User-supplied channel from callables, with numeric fallbacks.

    Only ``log_density(y, x, s)`` and ``output_interval(x, s)`` are required.
    """

    def __init__(
        self,
        log_density: Callable,
        output_interval: Callable,
        dlogd_ds: Optional[Callable] = None,
        d2logd_ds2: Optional[Callable] = None,
        fisher: Optional[Callable] = None,
        fisher_ds: Optional[Callable] = None,
        fisher_ds2: Optional[Callable] = None,
        sampler: Optional[Callable] = None,
        gaussian_params: Optional[Callable] = None,
        output_component: Optional[Callable] = None,
    ):
        self._log_density = log_density
        self._output_interval = output_interval
        self._dlogd_ds = dlogd_ds
        self._d2logd_ds2 = d2logd_ds2
        self._fisher = fisher
        self._fisher_ds = fisher_ds
        self._fisher_ds2 = fisher_ds2
        self._sampler = sampler
        self._gaussian_params = gaussian_params
        self._output_component = output_component

    def log_density(self, y, x, s):
        return self._log_density(y, x, s)

    def output_interval(self, x, s):
        return self._output_interval(x, s)

    def dlogd_ds(self, y, x, s):
        if self._dlogd_ds is not None:
            return self._dlogd_ds(y, x, s)
        return super().dlogd_ds(y, x, s)

    def d2logd_ds2(self, y, x, s):
        if self._d2logd_ds2 is not None:
            return self._d2logd_ds2(y, x, s)
        return super().d2logd_ds2(y, x, s)

    def fisher(self, x, s):
        return None if self._fisher is None else self._fisher(x, s)

    def fisher_ds(self, x, s):
        return None if self._fisher_ds is None else self._fisher_ds(x, s)

    def fisher_ds2(self, x, s):
        return None if self._fisher_ds2 is None else self._fisher_ds2(x, s)

    def gaussian_params(self, x, s):
        return None if self._gaussian_params is None else self._gaussian_params(x, s)

    def output_component(self, x):
        return 0 if self._output_component is None else self._output_component(x)

    def sample(self, x, s, rng, size=None):
        if self._sampler is None:
            raise ModelError("custom channel has no sampler")
        return self._sampler(x, s, rng, size)


class TwoBandChannel(ChannelModel):
    """Two disjoint AWGN bands addressed through (band, amplitude) labels.

    Band 1 output is N(x, sigma2) and carries no state information; band 2
    output is N(x, s + sigma2), so the state enters as extra variance.
    """

    def __init__(self, sigma2: float):
        self.sigma2 = float(sigma2)
        self._band1 = GaussianMeanShift(sigma2)
        self._band2 = GaussianStateVariance(sigma2)

    def _sub(self, x):
        band, amp = x
        if band == BAND1:
            return self._band1, float(amp)
        if band == BAND2:
            return self._band2, float(amp)
        raise ModelError(f"unknown band {band!r}")

    def log_density(self, y, x, s):
        ch, amp = self._sub(x)
        return ch.log_density(y, amp, s)

    def dlogd_ds(self, y, x, s):
        ch, amp = self._sub(x)
        return ch.dlogd_ds(y, amp, s)

    def d2logd_ds2(self, y, x, s):
        ch, amp = self._sub(x)
        return ch.d2logd_ds2(y, amp, s)

    def output_interval(self, x, s):
        ch, amp = self._sub(x)
        return ch.output_interval(amp, s)

    def output_component(self, x):
        return 0 if x[0] == BAND1 else 1

    def gaussian_params(self, x, s):
        ch, amp = self._sub(x)
        return ch.gaussian_params(amp, s)

    def fisher(self, x, s):
        ch, amp = self._sub(x)
        return ch.fisher(amp, s)

    def fisher_ds(self, x, s):
        ch, amp = self._sub(x)
        return ch.fisher_ds(amp, s)

    def fisher_ds2(self, x, s):
        ch, amp = self._sub(x)
        return ch.fisher_ds2(amp, s)

    def sample(self, x, s, rng, size=None):
        ch, amp = self._sub(x)
        return ch.sample(amp, s, rng, size)


@dataclass(frozen=True)
class TwoBandModel:
    """The two-band spectrum-sensing model: AWGN everywhere, state = extra
    variance on band 2, beta-distributed on [0, 1]."""

    sigma2: float
    constellation: Constellation
    prior: StatePrior

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ModelError("sigma2 must be positive")
        lo, _ = self.prior.support
        if lo + self.sigma2 <= 0:
            raise ModelError("band-2 variance s + sigma2 must be positive on the support")

    @classmethod
    def default(
        cls,
        a: float = 3.0,
        b: float = 3.0,
        power: float = 2.0,
        sigma2: float = 0.5,
        modulation: str = "bpsk",
    ) -> "TwoBandModel":
        return cls(
            sigma2=float(sigma2),
            constellation=Constellation.from_name(modulation, power),
            prior=StatePrior.beta(a, b),
        )

    @cached_property
    def channel(self) -> TwoBandChannel:
        return TwoBandChannel(self.sigma2)

    def design(self, t1: float) -> InputDesign:
        """Input design at band-1 fraction t1; endpoints become single-band."""
        if t1 == 0.0:
            return InputDesign.single_band(BAND2, self.constellation)
        if t1 == 1.0:
            return InputDesign.single_band(BAND1, self.constellation)
        return InputDesign.two_band(t1, self.constellation)
