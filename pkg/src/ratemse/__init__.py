"""Rate vs MSE-decay tradeoff toolkit for joint communication and scalar
state estimation: Fisher-information machinery, Bayesian MSE lower bounds
(classical and asymptotically tight), compound-channel rates, the tradeoff
region sweep, and a reproducible Monte Carlo validation harness."""

from .bounds import (
    BoundReport,
    alpha_atbcrb,
    alpha_bcrb,
    atbcrb_finite,
    bayesian_fisher,
    bcrb_finite,
    bound_report,
)
from .fisher import (
    FisherProfile,
    codeword_fisher,
    mixture_fisher,
    per_symbol_fisher,
    prior_fisher_term,
)
from .model import (
    BAND1,
    BAND2,
    ChannelModel,
    Constellation,
    CustomChannel,
    GaussianMeanShift,
    GaussianStateVariance,
    InputDesign,
    StatePrior,
    TwoBandChannel,
    TwoBandModel,
    beta_density,
)
from .montecarlo import (
    CCCodeword,
    SimConfig,
    SimReport,
    SimRow,
    convergence_study,
    empirical_mse,
    generate_ccc,
    map_estimate,
    ml_estimate,
    simulate_observations,
    trial_rng,
)
from .rate import (
    RateBreakdown,
    binary_entropy,
    gaussian_mixture_entropy,
    mi_discrete_input,
    two_band_rate,
    worst_case_rate,
)
from .region import RegionCurve, RegionPoint, operating_points, sweep_tradeoff

__version__ = "0.1.0"

__all__ = [
    "BAND1",
    "BAND2",
    "BoundReport",
    "CCCodeword",
    "ChannelModel",
    "Constellation",
    "CustomChannel",
    "FisherProfile",
    "GaussianMeanShift",
    "GaussianStateVariance",
    "InputDesign",
    "RateBreakdown",
    "RegionCurve",
    "RegionPoint",
    "SimConfig",
    "SimReport",
    "SimRow",
    "StatePrior",
    "TwoBandChannel",
    "TwoBandModel",
    "alpha_atbcrb",
    "alpha_bcrb",
    "atbcrb_finite",
    "bayesian_fisher",
    "bcrb_finite",
    "beta_density",
    "binary_entropy",
    "bound_report",
    "codeword_fisher",
    "convergence_study",
    "empirical_mse",
    "gaussian_mixture_entropy",
    "generate_ccc",
    "map_estimate",
    "mi_discrete_input",
    "mixture_fisher",
    "ml_estimate",
    "operating_points",
    "per_symbol_fisher",
    "prior_fisher_term",
    "simulate_observations",
    "sweep_tradeoff",
    "trial_rng",
    "two_band_rate",
    "worst_case_rate",
]
