"""Self-contained correctness checks exposed to the CLI and service.

The projection oracle solves the tiny constrained least-squares problem by
enumerating active sets, independently of the pool-adjacent-violators
path it verifies.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSample, PinchingLayout
from .config import SystemConfig
from .gradients import grad_fd_oracle, grad_x_fixed_w
from .isotonic import project_row
from .precoding import rescale_to_power

#: Scenario for randomized gradient checks.  A sub-6 GHz carrier keeps the
#: central-difference truncation error of a 1e-5 m step well below the
#: 1e-5 relative gate (phase rates scale with carrier frequency; the
#: default mmWave carrier needs a smaller step).  The noise floor sits at
#: the typical stream-gain power so SINR denominators stay regular: with a
#: vanishing floor, near-cancelling interference sums blow up the
#: oracle's truncation error without touching the analytic path.
GRADCHECK_SCENARIO = SystemConfig(users=2, waveguides=2, pas_per_guide=3,
                                  carrier_hz=2.8e9, noise_w=6e-6)


@dataclass
class GradCheckReport:
    max_rel_err: float
    rel_errs: list
    passed: bool
    instances: int
    step: float
    tol: float
    elapsed_s: float


@dataclass
class ProjCheckReport:
    max_abs_err: float
    errs: list
    passed: bool
    cases: int
    tol: float
    elapsed_s: float


def random_feasible_layout(cfg: SystemConfig, rng: np.random.Generator) -> PinchingLayout:
    """Feasible layout draw: sorted uniforms in the spacing-shifted domain."""
    n, l = cfg.waveguides, cfg.pas_per_guide
    upper = cfg.region_x - (l - 1) * cfg.min_spacing
    y = np.sort(rng.random((n, l)) * upper, axis=1)
    return PinchingLayout(y + cfg.min_spacing * np.arange(l)[None, :])


def random_feasible_precoder(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    w = rng.standard_normal((cfg.waveguides, cfg.users)) \
        + 1j * rng.standard_normal((cfg.waveguides, cfg.users))
    return rescale_to_power(w, cfg.p_max_w)


def gradient_check(cfg: SystemConfig = None, instances: int = 20, step: float = 1e-5,
                   tol: float = 1e-5, seed: int = 0) -> GradCheckReport:
    """Analytic position gradient vs central differences on random instances.

    Per instance, the error is the largest entrywise |analytic - fd|
    normalized by the oracle gradient's largest magnitude.
    """
    cfg = cfg or GRADCHECK_SCENARIO
    t0 = time.perf_counter()
    errs = []
    for i in range(instances):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 903, i])))
        layout = random_feasible_layout(cfg, rng)
        sample = ChannelSample(np.column_stack([
            rng.random(cfg.users) * cfg.region_x,
            rng.random(cfg.users) * cfg.region_y,
        ]))
        w = random_feasible_precoder(cfg, rng)
        g_exact = grad_x_fixed_w(cfg, layout, sample, w)
        g_fd = grad_fd_oracle(cfg, layout, sample, w, step=step)
        scale = max(float(np.abs(g_fd).max()), 1e-30)
        errs.append(float(np.abs(g_exact - g_fd).max() / scale))
    elapsed = time.perf_counter() - t0
    worst = max(errs) if errs else 0.0
    return GradCheckReport(max_rel_err=worst, rel_errs=errs, passed=worst < tol,
                           instances=instances, step=step, tol=tol, elapsed_s=elapsed)


def projection_oracle(target: np.ndarray, spacing: float, region_x: float) -> np.ndarray:
    """Exact projection by brute force over active constraint sets.

    Constraints (as a x >= b): x_0 >= 0; x_l - x_{l-1} >= spacing;
    -x_{L-1} >= -region_x.  Every subset's equality-restricted minimizer
    is computed from the KKT linear system; the feasible candidate with
    the smallest distance to the target is the projection.
    """
    target = np.asarray(target, dtype=float)
    l = target.size
    a_rows = []
    b_vals = []
    e = np.eye(l)
    a_rows.append(e[0]); b_vals.append(0.0)
    for i in range(1, l):
        a_rows.append(e[i] - e[i - 1]); b_vals.append(spacing)
    a_rows.append(-e[l - 1]); b_vals.append(-region_x)
    a_all = np.asarray(a_rows)
    b_all = np.asarray(b_vals)
    m = len(b_vals)

    def feasible(x):
        return np.all(a_all @ x - b_all >= -1e-10)

    best, best_obj = None, np.inf
    for r in range(m + 1):
        for subset in itertools.combinations(range(m), r):
            if not subset:
                cand = target
            else:
                a_s = a_all[list(subset)]
                b_s = b_all[list(subset)]
                gram = a_s @ a_s.T
                rhs = b_s - a_s @ target
                nu, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
                cand = target + a_s.T @ nu
                if np.abs(a_s @ cand - b_s).max() > 1e-9:
                    continue
            if feasible(cand):
                obj = float(np.sum((cand - target) ** 2))
                if obj < best_obj - 1e-15:
                    best, best_obj = cand, obj
    return best


def projection_check(cases: int = 200, tol: float = 1e-8, seed: int = 0) -> ProjCheckReport:
    """Spacing-shift/PAVA projection vs the active-set oracle."""
    t0 = time.perf_counter()
    errs = []
    for i in range(cases):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 905, i])))
        l = int(rng.integers(2, 5))
        region_x = float(rng.uniform(2.0, 30.0))
        spacing = float(rng.uniform(0.0, region_x / (l - 1)))
        target = rng.uniform(-0.5 * region_x, 1.5 * region_x, size=l)
        fast = project_row(target, spacing, region_x)
        slow = projection_oracle(target, spacing, region_x)
        errs.append(float(np.abs(fast - slow).max()))
    elapsed = time.perf_counter() - t0
    worst = max(errs) if errs else 0.0
    return ProjCheckReport(max_abs_err=worst, errs=errs, passed=worst < tol,
                           cases=cases, tol=tol, elapsed_s=elapsed)
