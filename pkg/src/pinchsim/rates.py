"""SINR, per-user rates and the weighted-MSE objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))


@dataclass
class RateReport:
    sinr: np.ndarray      # (K,)
    rate: np.ndarray      # (K,) bits/s/Hz
    sum_rate: float


def total_power(w: np.ndarray) -> float:
    return float(np.sum(np.abs(w) ** 2))


def check_power(w: np.ndarray, p_max: float, slack: float = 1e-9) -> bool:
    return total_power(w) <= p_max * (1.0 + slack)


def stream_gains(h_eff: np.ndarray, w: np.ndarray) -> np.ndarray:
    """a[k, i] = (row k of the effective channel) @ w_i."""
    return h_eff @ w


def sinr_and_rate(h_eff: np.ndarray, w: np.ndarray, sigma2: float) -> RateReport:
    """Per-user SINR and log2 rates for a fixed precoder."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    a = stream_gains(h_eff, w)
    p = np.abs(a) ** 2
    sig = np.diagonal(p).copy()
    interference = p.sum(axis=1) - sig
    sinr = sig / (interference + sigma2)
    rate = np.log2(1.0 + sinr)
    return RateReport(sinr=sinr, rate=rate, sum_rate=float(rate.sum()))


def sum_rate(h_eff: np.ndarray, w: np.ndarray, sigma2: float) -> float:
    return sinr_and_rate(h_eff, w, sigma2).sum_rate


def mmse_receiver(h_eff: np.ndarray, w: np.ndarray, sigma2: float) -> np.ndarray:
    """Scalar receive coefficients minimizing each user's estimation error."""
    a = stream_gains(h_eff, w)
    denom = (np.abs(a) ** 2).sum(axis=1) + sigma2
    return np.conj(np.diagonal(a)) / denom


def mse_terms(h_eff: np.ndarray, w: np.ndarray, u: np.ndarray, sigma2: float,
              strict_paper: bool = False) -> np.ndarray:
    """Per-user mean-square estimation error for receive coefficients u.

    E_k = |u_k a_kk - 1|^2 + sum_{i != k} |u_k a_ki|^2 + sigma2 |u_k|^2.
    ``strict_paper`` drops the sigma2 scaling on the noise term (a printed
    unit-noise variant; it breaks the rate equivalence unless sigma2 == 1).
    """
    a = stream_gains(h_eff, w)
    ua = u[:, None] * a
    diag = np.diagonal(ua)
    err = np.abs(diag - 1.0) ** 2
    cross = (np.abs(ua) ** 2).sum(axis=1) - np.abs(diag) ** 2
    noise = np.abs(u) ** 2 if strict_paper else sigma2 * np.abs(u) ** 2
    return err + cross + noise


def wmmse_objective(h_eff: np.ndarray, w: np.ndarray, u: np.ndarray, m: np.ndarray,
                    sigma2: float, strict_paper: bool = False) -> float:
    """Weighted-MSE objective sum_k (m_k E_k - ln m_k); m must be positive."""
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise ValueError("MSE weights must be positive")
    e = mse_terms(h_eff, w, u, sigma2, strict_paper=strict_paper)
    return float(np.sum(m * e - np.log(m)))
