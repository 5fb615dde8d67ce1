import math

import numpy as np
import pytest

from mlqm.constants import PLANCK_MASS_GEV
from mlqm.deformation import DeformationModel
from mlqm.hilbert import MomentumDistribution

M_P = PLANCK_MASS_GEV


@pytest.fixture
def rng():
    return np.random.default_rng(20230426)


def random_model(rng) -> DeformationModel:
    """Linear, quadratic or custom model with non-negative coefficients."""
    choice = rng.integers(3)
    if choice == 0:
        return DeformationModel.linear(float(rng.uniform(0.1, 5.0)))
    if choice == 1:
        return DeformationModel.quadratic(float(rng.uniform(0.1, 5.0)))
    order = int(rng.integers(1, 5))
    coeffs = [1.0, *rng.uniform(0.0, 1.0, order)]
    return DeformationModel.custom(coeffs, half_power=float(rng.uniform(0.0, 0.5)))


def random_distribution(rng, model: DeformationModel, n: int = 64) -> MomentumDistribution:
    """Random magnitudes with ``u`` well inside the validity domain."""
    u_cap = 0.9 * min(model.u_max, 1.0)
    u = rng.uniform(0.0, u_cap, n)
    w = rng.uniform(0.0, 1.0, n)
    w = w / math.fsum(w)
    return MomentumDistribution(M_P * np.sqrt(u), w)
