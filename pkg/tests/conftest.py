import math

import numpy as np
import pytest

from ratemse import ChannelModel, TwoBandModel


class StateMeanChannel(ChannelModel):
    """y ~ N(x + s, sigma2): per-symbol Fisher information 1/sigma2, constant
    in s.  Used to exercise the Jensen-equality case of the bounds."""

    def __init__(self, sigma2: float):
        self.sigma2 = float(sigma2)

    def log_density(self, y, x, s):
        v = self.sigma2
        return -0.5 * math.log(2.0 * math.pi * v) - (np.asarray(y) - x - s) ** 2 / (2.0 * v)

    def dlogd_ds(self, y, x, s):
        return (np.asarray(y) - x - s) / self.sigma2

    def d2logd_ds2(self, y, x, s):
        return -np.ones_like(np.asarray(y, dtype=float)) / self.sigma2

    def output_interval(self, x, s):
        w = 10.0 * math.sqrt(self.sigma2)
        return (x + s - w, x + s + w)

    def gaussian_params(self, x, s):
        return (float(x + s), self.sigma2)

    def fisher(self, x, s):
        return 1.0 / self.sigma2

    def fisher_ds(self, x, s):
        return 0.0

    def fisher_ds2(self, x, s):
        return 0.0

    def sample(self, x, s, rng, size=None):
        return x + s + rng.normal(0.0, math.sqrt(self.sigma2), size=size)


@pytest.fixture(scope="session")
def model() -> TwoBandModel:
    """The default two-band model: beta(3, 3) prior, P = 2, sigma2 = 0.5."""
    return TwoBandModel.default()


@pytest.fixture(scope="session")
def sensing_design(model):
    """All symbols on band 2 (t2 = 1): the estimation-optimal endpoint."""
    return model.design(0.0)
