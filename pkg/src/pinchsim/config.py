"""Scenario configuration and derived RF constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

C_LIGHT = 299_792_458.0  # speed of light, m/s


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm level to watts (20 dBm -> 0.1 W)."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError("power must be positive")
    return 30.0 + 10.0 * math.log10(watts)


@dataclass(frozen=True)
class SystemConfig:
    """Deployment scenario for a waveguide-fed downlink.

    ``waveguides`` parallel dielectric waveguides run along the x-axis at
    height ``height``; each carries ``pas_per_guide`` radiating elements
    whose x-positions are adjustable.  Single-antenna users live on the
    ground plane inside the ``region_x`` x ``region_y`` rectangle.  The
    number of waveguides equals the number of users (one RF chain each).
    """

    users: int = 4
    waveguides: int = 4
    pas_per_guide: int = 8
    region_x: float = 20.0
    region_y: float = 10.0
    height: float = 3.0
    carrier_hz: float = 28e9
    n_eff: float = 1.4            # effective refractive index of the guide
    noise_w: float = 1e-12        # -90 dBm
    p_max_w: float = 0.1          # 20 dBm
    min_spacing: float = -1.0     # <0: default to half a carrier wavelength
    guide_y: tuple = ()           # y-coordinate per waveguide; () -> evenly spread
    friis_squared: bool = False   # amplitude beta/r instead of sqrt(beta)/r
    strict_paper_mse: bool = False  # receiver-noise MSE term |u|^2 instead of sigma^2*|u|^2

    def __post_init__(self):
        if self.users < 1:
            raise ValueError("users must be >= 1")
        if self.waveguides != self.users:
            raise ValueError("waveguides must equal users (one RF chain per user)")
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be positive")
        if self.min_spacing < 0:
            object.__setattr__(self, "min_spacing", self.wavelength / 2.0)
        if not self.guide_y:
            step = self.region_y / self.waveguides
            ys = tuple((n + 0.5) * step for n in range(self.waveguides))
            object.__setattr__(self, "guide_y", ys)
        else:
            object.__setattr__(self, "guide_y", tuple(float(y) for y in self.guide_y))
        self._validate()

    def _validate(self):
        if self.users < 1:
            raise ValueError("users must be >= 1")
        if self.waveguides != self.users:
            raise ValueError("waveguides must equal users (one RF chain per user)")
        if self.pas_per_guide < 1:
            raise ValueError("pas_per_guide must be >= 1")
        for name in ("region_x", "region_y", "height", "carrier_hz", "noise_w", "p_max_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_eff < 1.0:
            raise ValueError("n_eff must be >= 1")
        if self.min_spacing < 0:
            raise ValueError("min_spacing must be >= 0")
        if (self.pas_per_guide - 1) * self.min_spacing > self.region_x:
            raise ValueError("no feasible layout: (L-1)*min_spacing exceeds region_x")
        if len(self.guide_y) != self.waveguides:
            raise ValueError("guide_y must list one y-coordinate per waveguide")
        for y in self.guide_y:
            if not 0.0 <= y <= self.region_y:
                raise ValueError("guide_y entries must lie inside the region")

    # -- derived constants ------------------------------------------------

    @property
    def wavelength(self) -> float:
        """Free-space carrier wavelength."""
        return C_LIGHT / self.carrier_hz

    @property
    def guide_wavelength(self) -> float:
        """Wavelength inside the dielectric guide."""
        return self.wavelength / self.n_eff

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def beta(self) -> float:
        """Free-space amplitude constant c / (4 pi f_c)."""
        return C_LIGHT / (4.0 * math.pi * self.carrier_hz)

    @property
    def total_pas(self) -> int:
        return self.waveguides * self.pas_per_guide

    def at_power(self, p_max_w: float) -> "SystemConfig":
        return replace(self, p_max_w=p_max_w)
