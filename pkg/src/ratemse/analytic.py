"""Closed-form reference expressions for the two-band Gaussian example.

These duplicate, in closed form, quantities the rest of the package computes
numerically; they ship in the library (not just the tests) so the CLI can put
analytic and numeric columns side by side.
"""

from __future__ import annotations

from .errors import BoundsError, ModelError


def closed_form_alpha(t2: float, a: float, sigma2: float) -> float:
    """Asymptotic n * MSE constant (2/t2) * ((a+1)/(2(2a+1)) + s2 + s2^2)
    for a symmetric beta(a, a) state prior and band-2 fraction t2."""
    if t2 == 0.0:
        raise BoundsError("no sensing use")
    if not 0.0 < t2 <= 1.0:
        raise ModelError("band-2 fraction t2 must lie in (0, 1]")
    if a <= 2.0:
        raise ModelError("shape parameter must exceed 2 for regularity")
    if sigma2 <= 0.0:
        raise ModelError("sigma2 must be positive")
    return (2.0 / t2) * ((a + 1.0) / (2.0 * (2.0 * a + 1.0)) + sigma2 + sigma2**2)


def closed_form_mixture_fisher(t2: float, s: float, sigma2: float) -> float:
    """Design-averaged per-symbol Fisher information t2 / (2 (s + sigma2)^2)."""
    return t2 / (2.0 * (s + sigma2) ** 2)


def closed_form_prior_score(a: float, s: float) -> float:
    """Score of the symmetric beta(a, a) prior: (a - 1) (1/s - 1/(1 - s))."""
    return (a - 1.0) * (1.0 / s - 1.0 / (1.0 - s))


def ml_stationary(T: float, n2: int, sigma2: float) -> float:
    """Unclipped ML stationary point T / n2 - sigma2 of the variance family."""
    return T / n2 - sigma2
