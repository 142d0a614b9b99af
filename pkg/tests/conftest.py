"""Shared seeded configurations."""

import pytest

from modules import gtensor, scene


@pytest.fixture
def cfg_three():
    """n=3, m=(2,2,2): the trifocal shape."""
    return scene.random_config(3, (2, 2, 2), seed=1)


@pytest.fixture
def profile_three():
    return gtensor.Profile(alpha=(2, 1, 1), n=3, m=(2, 2, 2))


@pytest.fixture
def cfg_pair():
    """n=3, m=(2,2): the fundamental-matrix shape."""
    return scene.random_config(3, (2, 2), seed=2)


@pytest.fixture
def profile_pair():
    return gtensor.Profile(alpha=(2, 2), n=3, m=(2, 2))


@pytest.fixture(params=[2, 3])
def cfg_lines(request):
    """m = (1^{n+1}) for n = 2 and n = 3."""
    n = request.param
    return scene.random_config(n, (1,) * (n + 1), seed=10 + n)


def ones_profile(cfg):
    return gtensor.Profile(alpha=(1,) * cfg.r, n=cfg.n, m=cfg.m)
