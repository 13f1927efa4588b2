"""Comparison systems: fixed-precoder position optimization and a
conventional fixed uniform linear array."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSample
from .config import SystemConfig
from .longterm import StepSchedule, run_long_term
from .precoding import wmmse_solve
from .rates import sinr_and_rate


@dataclass(frozen=True)
class UlaConfig:
    """Half-wavelength uniform linear array at the region center."""

    x: np.ndarray       # (N,) fixed element x-positions
    y: float
    height: float

    @classmethod
    def from_scenario(cls, cfg: SystemConfig) -> "UlaConfig":
        n = cfg.waveguides
        spacing = cfg.wavelength / 2.0
        x = cfg.region_x / 2.0 + (np.arange(n) - (n - 1) / 2.0) * spacing
        return cls(x=x, y=cfg.region_y / 2.0, height=cfg.height)


def ula_channel(cfg: SystemConfig, ula: UlaConfig, sample: ChannelSample) -> np.ndarray:
    """Row k is user k's conjugated LoS channel to the fixed array, (K, N).

    Same free-space amplitude model as the waveguide-fed elements, with no
    feed factor: each element has its own RF chain.
    """
    users = np.asarray(sample.user_pos, dtype=float)
    dx = ula.x[None, :] - users[:, 0][:, None]
    dy = ula.y - users[:, 1][:, None]
    r = np.sqrt(dx ** 2 + dy ** 2 + ula.height ** 2)
    amp = cfg.beta if cfg.friis_squared else np.sqrt(cfg.beta)
    return amp * np.exp(-1j * cfg.wavenumber * r) / r


def mimo_baseline(cfg: SystemConfig, samples) -> np.ndarray:
    """Per-sample WMMSE sum rates of the conventional array, shape (S,)."""
    ula = UlaConfig.from_scenario(cfg)
    rates = []
    for sample in samples:
        h_eff = ula_channel(cfg, ula, sample)
        st = wmmse_solve(h_eff, cfg)
        rates.append(sinr_and_rate(h_eff, st.w, cfg.noise_w).sum_rate)
    return np.asarray(rates)


def ssca_thp_run(cfg: SystemConfig, schedule: StepSchedule = None, t_f: int = 100,
                 n_s: int = 10, seed: int = 1, tau: float = None):
    """Position optimization with the short-term map fixed to RZF.

    Identical loop to the full method, but no inner precoder optimization:
    gradients are taken at the RZF precoder of the current layout with the
    implicit term omitted.
    """
    kwargs = dict(schedule=schedule, t_f=t_f, n_s=n_s, seed=seed,
                  solver="rzf", grad_mode="omit")
    if tau is not None:
        kwargs["tau"] = tau
    return run_long_term(cfg, **kwargs)
