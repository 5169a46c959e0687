import os

import hypothesis
import numpy as np
import pytest

from hardnesslab.models.label_cover import Hyperedge, LabelCoverInstance
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.services.labelcover import build_planted_instance

np.seterr(all="warn")

hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def single_edge_instance(projections, k=1, M=4, m=4, d=1):
    """One edge over vertices 0..2k-1; e_X is the first half."""
    vertices = tuple(range(2 * k))
    edge = Hyperedge(vertices, vertices[:k], vertices[k:], tuple(tuple(p) for p in projections))
    return LabelCoverInstance(k, M, m, d, 2 * k, (edge,))


@pytest.fixture
def planted():
    """16 vertices, 8 edges, k=2, M=8, m=4, d=2."""
    return build_planted_instance(16, 8, 2, 8, 4, 2, seed=0)


@pytest.fixture
def clamped_params():
    return GadgetParams(zeta=0.25, d=2, k=2, t=1, Q=8, tau=0.1, K=4, clamp_acceptance=True)


@pytest.fixture
def bijective():
    """k=8 with d=1, so every projection is a bijection [16] -> [16]."""
    return build_planted_instance(20, 2, 8, 16, 16, 1, seed=3)


@pytest.fixture
def matched_params():
    """1/(zeta(1-zeta)t) = 8/9, so class marginals coincide."""
    return GadgetParams(zeta=0.25, d=1, k=8, t=6, Q=4, tau=0.3, K=4)
