"""Derivatives of the negative sum rate with respect to element positions.

All values are in bits per meter.  The analytic path differentiates through
both the guided phase (linear in x) and the element-user distance (phase
and 1/r amplitude), with the precoder held fixed.  A central-difference
oracle over the same forward model verifies it; perturbed layouts are
evaluated without feasibility checks since the objective is defined for
any positions.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSample, PinchingLayout, effective_channel, effective_entry_terms
from .config import SystemConfig
from .rates import LN2, sinr_and_rate


def neg_sum_rate(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                 w: np.ndarray, check: bool = False) -> float:
    """Per-sample objective g = -(sum of user rates), in bits."""
    h_eff = effective_channel(cfg, layout, sample, check=check)
    return -sinr_and_rate(h_eff, w, cfg.noise_w).sum_rate


def grad_x_fixed_w(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                   w: np.ndarray) -> np.ndarray:
    """Exact gradient of g w.r.t. every element position, precoder fixed."""
    x = np.asarray(layout.x, dtype=float)
    users = np.asarray(sample.user_pos, dtype=float)
    t, r, dx = effective_entry_terms(cfg, x, users)   # (K, N, L)
    h_eff = t.sum(axis=2)
    k = h_eff.shape[0]

    a = h_eff @ w                                     # (K, K)
    p = np.abs(a) ** 2
    sig = np.diagonal(p).copy()
    denom = p.sum(axis=1) - sig + cfg.noise_w
    sinr = sig / denom

    drdx = dx / r
    dt = t * (-(drdx / r) - 1j * (cfg.wavenumber * drdx + 2.0 * np.pi / cfg.guide_wavelength))
    # da[k, i, n, l] = dT[k, n, l] * w[n, i]
    da = dt[:, None, :, :] * w.T[None, :, :, None]
    cross = 2.0 * np.real(np.conj(a)[:, :, None, None] * da)   # d|a_ki|^2
    idx = np.arange(k)
    d_sig = cross[idx, idx]                                     # (K, N, L)
    d_den = cross.sum(axis=1) - d_sig
    d_sinr = (d_sig * denom[:, None, None] - sig[:, None, None] * d_den) / denom[:, None, None] ** 2
    return -(d_sinr / (1.0 + sinr)[:, None, None]).sum(axis=0) / LN2


def grad_fd_oracle(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                   w: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of g, coordinate by coordinate."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(layout.x, dtype=float)
    grad = np.zeros_like(x)
    for n in range(x.shape[0]):
        for l in range(x.shape[1]):
            plus = x.copy(); plus[n, l] += step
            minus = x.copy(); minus[n, l] -= step
            gp = neg_sum_rate(cfg, PinchingLayout(plus), sample, w, check=False)
            gm = neg_sum_rate(cfg, PinchingLayout(minus), sample, w, check=False)
            grad[n, l] = (gp - gm) / (2.0 * step)
    return grad


def total_grad_term(cfg: SystemConfig, layout: PinchingLayout, sample: ChannelSample,
                    solver, mode: str = "omit", step: float = 1e-5,
                    rng: np.random.Generator = None) -> np.ndarray:
    """Implicit gradient term from the solved precoder's dependence on x.

    ``solver`` maps (cfg, h_eff) -> precoder and must be deterministic.
    mode 'omit' returns zeros (the default long-term loop drops this
    higher-order term); 'fd' isolates it as central differences of the
    composite map x -> g(x, solver(x)) minus the fixed-precoder gradient;
    'spsa' is a two-point simultaneous-perturbation estimate of the same
    quantity (requires ``rng``).
    """
    if mode not in ("omit", "fd", "spsa"):
        raise ValueError(f"unknown mode {mode!r}")
    x = np.asarray(layout.x, dtype=float)
    if mode == "omit":
        return np.zeros_like(x)

    def solve_at(xs):
        lay = PinchingLayout(xs)
        h_eff = effective_channel(cfg, lay, sample, check=False)
        return lay, solver(cfg, h_eff)

    base_lay, base_w = solve_at(x)
    base_grad = grad_x_fixed_w(cfg, base_lay, sample, base_w)

    if mode == "fd":
        comp = np.zeros_like(x)
        for n in range(x.shape[0]):
            for l in range(x.shape[1]):
                plus = x.copy(); plus[n, l] += step
                minus = x.copy(); minus[n, l] -= step
                lp, wp = solve_at(plus)
                lm, wm = solve_at(minus)
                gp = neg_sum_rate(cfg, lp, sample, wp, check=False)
                gm = neg_sum_rate(cfg, lm, sample, wm, check=False)
                comp[n, l] = (gp - gm) / (2.0 * step)
        return comp - base_grad
    if rng is None:
        raise ValueError("spsa mode needs an rng")
    delta = rng.integers(0, 2, size=x.shape) * 2.0 - 1.0
    lp, wp = solve_at(x + step * delta)
    lm, wm = solve_at(x - step * delta)
    gp = neg_sum_rate(cfg, lp, sample, wp, check=False)
    gm = neg_sum_rate(cfg, lm, sample, wm, check=False)
    return (gp - gm) / (2.0 * step) * delta - base_grad
