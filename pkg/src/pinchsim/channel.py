"""Line-of-sight channel synthesis through pinched waveguide feeds.

Conventions: a channel column ``h_k`` is stored un-conjugated, so that the
row vector appearing in the receive model is its conjugate transpose.  All
phases are carried explicitly; no narrowband approximations beyond the
single-carrier model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


@dataclass
class PinchingLayout:
    """x-positions of the radiating elements, one row per waveguide."""

    x: np.ndarray  # (N, L), meters

    @classmethod
    def grid(cls, cfg: SystemConfig) -> "PinchingLayout":
        """Uniform feasible layout: element l at (l + 1/2) * region_x / L."""
        l = cfg.pas_per_guide
        row = (np.arange(l) + 0.5) * cfg.region_x / l
        return cls(np.tile(row, (cfg.waveguides, 1)))

    def validate(self, cfg: SystemConfig, atol: float = 1e-12):
        """Raise if spacing or box constraints are violated.

        ``atol`` (meters) absorbs floating-point rounding; the constraints
        hold exactly in real arithmetic.
        """
        x = np.asarray(self.x, dtype=float)
        if x.shape != (cfg.waveguides, cfg.pas_per_guide):
            raise ValueError(
                f"layout shape {x.shape} does not match "
                f"({cfg.waveguides}, {cfg.pas_per_guide})"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("layout contains non-finite positions")
        if x.min() < -atol or x.max() > cfg.region_x + atol:
            raise ValueError("element positions outside [0, region_x]")
        if x.shape[1] > 1:
            gaps = np.diff(x, axis=1)
            if gaps.min() < cfg.min_spacing - atol:
                raise ValueError("adjacent elements closer than min_spacing")

    def is_feasible(self, cfg: SystemConfig, atol: float = 1e-12) -> bool:
        try:
            self.validate(cfg, atol=atol)
        except ValueError:
            return False
        return True


@dataclass
class ChannelSample:
    """One channel realization: the positions of all users on the ground."""

    user_pos: np.ndarray  # (K, 2), meters

    def validate(self, cfg: SystemConfig):
        p = np.asarray(self.user_pos, dtype=float)
        if p.shape != (cfg.users, 2):
            raise ValueError(f"user_pos shape {p.shape} != ({cfg.users}, 2)")
        if p[:, 0].min() < 0 or p[:, 0].max() > cfg.region_x:
            raise ValueError("user x outside region")
        if p[:, 1].min() < 0 or p[:, 1].max() > cfg.region_y:
            raise ValueError("user y outside region")


def draw_users(cfg: SystemConfig, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """Uniform user drops over the service rectangle, shape (count, K, 2)."""
    u = rng.random((count, cfg.users, 2))
    u[:, :, 0] *= cfg.region_x
    u[:, :, 1] *= cfg.region_y
    return u


def _amplitude(cfg: SystemConfig) -> float:
    # Field amplitude numerator: the as-modeled sqrt(beta), or the classical
    # Friis beta when the squared-path-loss variant is requested.
    return cfg.beta if cfg.friis_squared else np.sqrt(cfg.beta)


def waveguide_response(cfg: SystemConfig, layout: PinchingLayout, check: bool = True) -> np.ndarray:
    """Block-diagonal feed response G, shape (N*L, N).

    Block n holds the guided-phase vector of waveguide n: element l is
    exp(-j 2 pi x[n,l] / guide_wavelength) / sqrt(L).
    """
    if check:
        layout.validate(cfg)
    n, l = cfg.waveguides, cfg.pas_per_guide
    g = np.zeros((n * l, n), dtype=complex)
    phase = 2.0 * np.pi * np.asarray(layout.x, dtype=float) / cfg.guide_wavelength
    blocks = np.exp(-1j * phase) / np.sqrt(l)
    for i in range(n):
        g[i * l:(i + 1) * l, i] = blocks[i]
    return g


def _pa_user_distances(cfg: SystemConfig, x: np.ndarray, user_pos: np.ndarray):
    """Distances r[k, n, l] and x-offsets (pa_x - user_x)[k, n, l]."""
    ux = user_pos[:, 0][:, None, None]
    uy = user_pos[:, 1][:, None, None]
    gy = np.asarray(cfg.guide_y)[None, :, None]
    dx = x[None, :, :] - ux
    r = np.sqrt(dx ** 2 + (gy - uy) ** 2 + cfg.height ** 2)
    return r, dx


def user_channel(cfg: SystemConfig, layout: PinchingLayout, user_pos, check: bool = True) -> np.ndarray:
    """Un-conjugated channel column of one user, shape (N*L,).

    Entry (n, l) is amp * exp(+j kappa r) / r for the element-to-user
    distance r; its conjugate is the free-space LoS response amp *
    exp(-j kappa r) / r.
    """
    p = np.asarray(user_pos, dtype=float).reshape(1, 2)
    if check:
        layout.validate(cfg)
        ChannelSample(np.tile(p, (cfg.users, 1))).validate(cfg)
    x = np.asarray(layout.x, dtype=float)
    r, _ = _pa_user_distances(cfg, x, p)
    r = r[0]  # (N, L)
    if r.min() < cfg.height * (1.0 - 1e-12):
        raise ValueError("element-user distance below mounting height")
    h = _amplitude(cfg) * np.exp(1j * cfg.wavenumber * r) / r
    return h.reshape(-1)


def channel_matrix(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                   check: bool = True) -> np.ndarray:
    """Stacked user channels H, shape (N*L, K); column k is user k."""
    if check:
        layout.validate(cfg)
        sample.validate(cfg)
    cols = [user_channel(cfg, layout, p, check=False) for p in np.asarray(sample.user_pos)]
    return np.stack(cols, axis=1)


def effective_entry_terms(cfg: SystemConfig, x: np.ndarray, user_pos: np.ndarray):
    """Per-element contributions T[k, n, l] to the effective channel.

    Entry (k, n) of the effective channel is sum_l T[k, n, l] with
    T = amp / sqrt(L) * exp(-j (kappa r + 2 pi x / guide_wavelength)) / r.
    Also returns r and the x-offsets used, for derivative work.
    """
    r, dx = _pa_user_distances(cfg, x, user_pos)
    phase = cfg.wavenumber * r + (2.0 * np.pi / cfg.guide_wavelength) * x[None, :, :]
    t = (_amplitude(cfg) / np.sqrt(cfg.pas_per_guide)) * np.exp(-1j * phase) / r
    return t, r, dx


def effective_channel(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                      check: bool = True) -> np.ndarray:
    """Effective user-to-waveguide channel, shape (K, N).

    Row k is the conjugated user channel composed with the feed response;
    the block structure of the feed means entry (k, n) only involves
    waveguide n's elements.
    """
    if check:
        layout.validate(cfg)
        sample.validate(cfg)
    x = np.asarray(layout.x, dtype=float)
    t, _, _ = effective_entry_terms(cfg, x, np.asarray(sample.user_pos, dtype=float))
    return t.sum(axis=2)
