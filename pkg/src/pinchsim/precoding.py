"""Short-term transmit beamforming for a fixed antenna layout.

Solvers operating on one effective channel realization: block-coordinate
weighted-MMSE descent, the regularized zero-forcing reference, and a
low-dimensional precoder parameterized by 2K nonnegative scalars (per-user
power coefficients and dual variables) fitted by projected gradient ascent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .rates import mmse_receiver, mse_terms, sum_rate, total_power


@dataclass
class WmmseState:
    w: np.ndarray                  # (N, K) precoder
    u: np.ndarray                  # (K,) receive coefficients
    m: np.ndarray                  # (K,) positive MSE weights
    objective_trace: list = field(default_factory=list)
    converged: bool = True
    iterations: int = 0


@dataclass
class DualParams:
    """Per-user power coefficients and duals of the structured precoder."""

    rho: np.ndarray  # (K,) nonnegative
    lam: np.ndarray  # (K,) nonnegative

    def validate(self):
        if np.any(self.rho < 0) or np.any(self.lam < 0):
            raise ValueError("dual parameters must be nonnegative")


@dataclass
class KktFitResult:
    duals: DualParams
    w: np.ndarray
    sum_rate: float
    wmmse_sum_rate: float
    gap: float
    within_gap: bool
    steps: int = 0


def rescale_to_power(w: np.ndarray, p_max: float) -> np.ndarray:
    """Common column scaling to total power exactly p_max (zero stays zero)."""
    p = total_power(w)
    if p == 0.0:
        return w
    return w * math.sqrt(p_max / p)


def mrt_equal_power(h_eff: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Matched filter columns with an equal split of the power budget."""
    k = h_eff.shape[0]
    cols = h_eff.conj().T
    norms = np.linalg.norm(cols, axis=0)
    norms[norms == 0] = 1.0
    return cols / norms * math.sqrt(cfg.p_max_w / k)


def rzf_precoder(h_eff: np.ndarray, cfg: SystemConfig, alpha: float = None) -> np.ndarray:
    """Regularized zero-forcing, scaled to the full power budget.

    alpha defaults to sigma2 * K / P_max.
    """
    k = h_eff.shape[0]
    if alpha is None:
        alpha = cfg.noise_w * k / cfg.p_max_w
    gram = h_eff @ h_eff.conj().T + alpha * np.eye(k)
    w = h_eff.conj().T @ np.linalg.inv(gram)
    return rescale_to_power(w, cfg.p_max_w)


def _power_constrained_w(h_eff: np.ndarray, u: np.ndarray, m: np.ndarray, p_max: float):
    """Quadratic precoder block update under the total power constraint.

    Minimizes sum_k m_k E_k over W; the unconstrained stationary system is
    regularized by mu >= 0 chosen so the power budget binds, found by
    bisection (power is strictly decreasing in mu) plus a Newton polish
    from the feasible side.
    """
    hh = h_eff.conj().T                                   # columns are h_k
    c = hh * (m * np.conj(u))[None, :]                    # rhs columns
    a0 = (hh * (m * np.abs(u) ** 2)[None, :]) @ h_eff     # sum m|u|^2 h h^H
    a0 = 0.5 * (a0 + a0.conj().T)
    s, v = np.linalg.eigh(a0)
    s = np.clip(s, 0.0, None)
    b = v.conj().T @ c
    load = (np.abs(b) ** 2).sum(axis=1)                   # per eigendirection

    if load.sum() == 0.0:
        return np.zeros_like(c), 0.0

    def power(mu):
        return float((load / (s + mu) ** 2).sum())

    if s[0] > 0 and power(0.0) <= p_max:
        mu = 0.0
    else:
        hi = math.sqrt(load.sum() / p_max)                # power(hi) <= p_max
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if power(mid) > p_max:
                lo = mid
            else:
                hi = mid
        mu = hi                                           # feasible side
        for _ in range(8):                                # Newton polish
            f = power(mu) - p_max
            fp = float((-2.0 * load / (s + mu) ** 3).sum())
            if fp == 0.0:
                break
            nxt = mu - f / fp
            if not (lo < nxt <= hi * (1 + 1e-12)):
                break
            mu = nxt
        if power(mu) > p_max:
            mu = np.nextafter(mu, math.inf)
            while power(mu) > p_max:
                mu = np.nextafter(mu, math.inf)
    w = v @ (b / (s + mu)[:, None])
    return w, mu


def wmmse_solve(h_eff: np.ndarray, cfg: SystemConfig, max_iter: int = 200,
                tol: float = 1e-6, w0: np.ndarray = None) -> WmmseState:
    """Block-coordinate weighted-MMSE ascent of the sum rate.

    Alternates closed-form receiver, weight and precoder blocks; each block
    update cannot increase the weighted-MSE objective, so the recorded
    objective trace is non-increasing.  Starts from the regularized
    zero-forcing precoder unless ``w0`` is given.
    """
    sigma2 = cfg.noise_w
    w = rzf_precoder(h_eff, cfg) if w0 is None else w0
    u = mmse_receiver(h_eff, w, sigma2)
    e = mse_terms(h_eff, w, u, sigma2)
    m = 1.0 / e
    obj = float(np.sum(1.0 + np.log(e)))
    trace = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w_new, _ = _power_constrained_w(h_eff, u, m, cfg.p_max_w)
        # Bisection noise on mu can yield a non-improving precoder right at
        # convergence; keeping the previous iterate preserves block descent.
        if np.sum(m * mse_terms(h_eff, w_new, u, sigma2)) <= np.sum(m * e):
            w = w_new
        u = mmse_receiver(h_eff, w, sigma2)
        e = mse_terms(h_eff, w, u, sigma2)
        m = 1.0 / e
        new_obj = float(np.sum(1.0 + np.log(e)))
        trace.append(new_obj)
        if abs(new_obj - obj) <= tol * max(1.0, abs(new_obj)):
            converged = True
            obj = new_obj
            break
        obj = new_obj
    if not converged and len(trace) >= 2:
        converged = abs(trace[-1] - trace[-2]) <= 100.0 * tol * max(1.0, abs(trace[-1]))
    return WmmseState(w=w, u=u, m=m, objective_trace=trace,
                      converged=converged, iterations=it)


def kkt_reconstruct(h_eff: np.ndarray, duals: DualParams) -> np.ndarray:
    """Precoder from the structured regularized-inverse form.

    Column k is rho_k (I + sum_i lam_i h_i h_i^H)^{-1} h_k with h_k the
    conjugated k-th row of the effective channel.  Equivalent, row-wise, to
    diag(rho) (I + H_eff H_eff^H diag(lam))^{-1} H_eff by the push-through
    identity.
    """
    duals.validate()
    k, n = h_eff.shape
    if duals.rho.shape != (k,) or duals.lam.shape != (k,):
        raise ValueError("duals must hold one (rho, lam) pair per user")
    m = np.eye(n) + h_eff.conj().T @ (duals.lam[:, None] * h_eff)
    w = np.linalg.solve(m, h_eff.conj().T)
    return w * duals.rho[None, :]


def rzf_equivalent_duals(h_eff: np.ndarray, cfg: SystemConfig) -> DualParams:
    """Duals whose reconstruction reproduces the RZF precoder exactly.

    Uniform lam = P_max / (sigma2 K) inverts the RZF regularizer; rho
    matches per-column norms.
    """
    k = h_eff.shape[0]
    lam = np.full(k, cfg.p_max_w / (cfg.noise_w * k))
    base = kkt_reconstruct(h_eff, DualParams(rho=np.ones(k), lam=lam))
    w_rzf = rzf_precoder(h_eff, cfg)
    norms = np.linalg.norm(base, axis=0)
    norms[norms == 0] = 1.0
    rho = np.linalg.norm(w_rzf, axis=0) / norms
    return DualParams(rho=rho, lam=lam)


def kkt_fit(h_eff: np.ndarray, cfg: SystemConfig, max_steps: int = 80,
            fd_step: float = 1e-6, gap: float = 0.1,
            wmmse_rate: float = None) -> KktFitResult:
    """Fit the 2K structured-precoder parameters to one realization.

    Projected gradient ascent on the sum rate over (rho, lam), nonnegative,
    with the precoder rescaled to the full power budget inside the
    objective.  Gradients are central finite differences on variables
    normalized by their initialization scale (documented choice; no
    analytic chain rule).  Starts from the RZF-equivalent duals, so the
    achieved rate never falls below RZF.
    """
    k = h_eff.shape[0]
    p_max, sigma2 = cfg.p_max_w, cfg.noise_w
    init = rzf_equivalent_duals(h_eff, cfg)
    s_rho = max(float(init.rho.max()), 1e-30)
    s_lam = max(float(init.lam.max()), 1e-30)
    theta = np.concatenate([init.rho / s_rho, init.lam / s_lam])

    def build(th):
        d = DualParams(rho=np.clip(th[:k], 0.0, None) * s_rho,
                       lam=np.clip(th[k:], 0.0, None) * s_lam)
        return rescale_to_power(kkt_reconstruct(h_eff, d), p_max), d

    def score(th):
        w, _ = build(th)
        return sum_rate(h_eff, w, sigma2)

    best = score(theta)
    alpha = 1.0
    steps = 0
    for steps in range(1, max_steps + 1):
        grad = np.empty_like(theta)
        for i in range(theta.size):
            h = fd_step * max(1.0, abs(theta[i]))
            up = theta.copy(); up[i] += h
            dn = theta.copy(); dn[i] -= h
            grad[i] = (score(up) - score(dn)) / (2.0 * h)
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        alpha = min(alpha * 2.0, 1e3)
        improved = False
        while alpha > 1e-12:
            cand = np.clip(theta + alpha * grad / gnorm, 0.0, None)
            val = score(cand)
            if val > best + 1e-12:
                theta, best, improved = cand, val, True
                break
            alpha *= 0.5
        if not improved:
            break

    w, duals = build(theta)
    if wmmse_rate is None:
        wmmse_rate = sum_rate(h_eff, wmmse_solve(h_eff, cfg).w, sigma2)
    achieved_gap = wmmse_rate - best
    return KktFitResult(duals=duals, w=w, sum_rate=best, wmmse_sum_rate=wmmse_rate,
                        gap=achieved_gap, within_gap=achieved_gap <= gap, steps=steps)
