"""Shared fixtures for the estimator tests."""

import numpy as np
import pytest

from gl_conditional_density.marginal import MarginalEstimate
from gl_conditional_density.sampling import ExampleId, ObservationSet


@pytest.fixture
def constant_marginal():
    """Factory for a design density estimate that is constant everywhere."""

    def build(value=1.0, floor=1e-3):
        return MarginalEstimate(
            density=lambda t: np.full(np.shape(t), value, dtype=float),
            delta_hat=value,
            sup_hat=value,
            floor=floor,
        )

    return build


@pytest.fixture
def make_observations():
    """Factory for hand-made observation sets."""

    def build(xs, ys, example=ExampleId.EX1):
        xs = np.asarray(xs, dtype=float)
        return ObservationSet(x=xs, y=np.asarray(ys, dtype=float), marginal_x=xs, seed=0, example=example)

    return build
