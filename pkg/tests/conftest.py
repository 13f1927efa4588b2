import numpy as np
import pytest

from pinchsim import ChannelSample, PinchingLayout, SystemConfig, draw_users
from pinchsim.checks import random_feasible_layout, random_feasible_precoder


@pytest.fixture
def cfg():
    return SystemConfig()


@pytest.fixture
def small_cfg():
    return SystemConfig(users=2, waveguides=2, pas_per_guide=3)


def rng_of(seed):
    return np.random.default_rng(seed)


def random_instance(cfg, seed):
    """One (layout, sample, effective channel) draw for solver tests."""
    from pinchsim import effective_channel

    rng = rng_of(seed)
    layout = random_feasible_layout(cfg, rng)
    sample = ChannelSample(draw_users(cfg, rng, 1)[0])
    h_eff = effective_channel(cfg, layout, sample)
    return layout, sample, h_eff


def grid_instance(cfg, seed):
    from pinchsim import effective_channel

    layout = PinchingLayout.grid(cfg)
    sample = ChannelSample(draw_users(cfg, rng_of(seed), 1)[0])
    return layout, sample, effective_channel(cfg, layout, sample)
