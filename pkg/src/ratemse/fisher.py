"""Fisher information: per symbol, mixed over the input design, per codeword,
and the prior's squared-score term.

The per-symbol quantity is the expected negative curvature of the
log-likelihood in the state, E[-d2/ds2 log d(Y | x, s)].  Over a memoryless
block it is additive, so a codeword contributes through its composition
alone; the mixture over a design is the pmf-weighted finite sum.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import FisherError
from .model import ChannelModel, InputDesign, StatePrior


def per_symbol_fisher(channel: ChannelModel, x, s, *, force_numeric: bool = False) -> float:
    """Fisher information for the state from one observation under label x.

    Uses the channel's analytic curvature when available; otherwise computes
    the output-space quadrature of -d2/ds2 log d(y|x, s) weighted by the
    density (finite differences on the log density where the channel has no
    analytic derivative).
    """
    if not force_numeric:
        j = channel.fisher(x, s)
        if j is not None:
            return float(j)
    lo, hi = channel.output_interval(x, s)

    def integrand(y):
        return -channel.d2logd_ds2(y, x, s) * channel.density(y, x, s)

    val, err = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-9, limit=300)
    if not math.isfinite(val):
        raise FisherError("Fisher integral diverged")
    return val


def mixture_fisher(channel: ChannelModel, design: InputDesign, s) -> float:
    """pmf-weighted per-symbol Fisher information, sum over the alphabet."""
    total = 0.0
    for x, p in zip(design.labels, design.pmf):
        if p == 0.0:
            continue
        total += p * per_symbol_fisher(channel, x, s)
    return total


def codeword_fisher(channel: ChannelModel, codeword, s) -> float:
    """Fisher information of a whole codeword: additive over symbols, hence a
    function of the empirical composition only."""
    symbols = getattr(codeword, "symbols", codeword)
    if len(symbols) == 0:
        raise FisherError("codeword is empty")
    counts = Counter(symbols)
    return sum(n_x * per_symbol_fisher(channel, x, s) for x, n_x in counts.items())


def prior_fisher_term(prior: StatePrior, s) -> float:
    """Squared prior score (d/ds log p(s))^2; singular at the boundary."""
    sc = prior.score(s)
    return float(np.asarray(sc) ** 2) if np.ndim(sc) == 0 else np.asarray(sc) ** 2


@dataclass
class FisherProfile:
    """Bundles the Fisher quantities of one (channel, design, prior) triple.

    Values are memoized per (label, state) because region sweeps and the
    bound quadratures revisit the same state nodes heavily.  Instances are
    cheap; use one per worker rather than sharing across processes.
    """

    channel: ChannelModel
    design: InputDesign
    prior: StatePrior
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def per_symbol(self, x, s) -> float:
        key = (x, float(s))
        if key not in self._memo:
            self._memo[key] = per_symbol_fisher(self.channel, x, s)
        return self._memo[key]

    def mixture(self, s) -> float:
        return sum(
            p * self.per_symbol(x, s) for x, p in zip(self.design.labels, self.design.pmf) if p
        )

    def prior_term(self, s) -> float:
        return prior_fisher_term(self.prior, s)

    def combined(self, s, n: int) -> float:
        """Total (data + prior) Fisher information at block length n."""
        return n * self.mixture(s) + self.prior_term(s)
