"""Experiment orchestration: power sweeps, dataset export and duals scoring.

Reproducibility contract: all randomness flows through Philox generators
keyed by SeedSequence([seed, stream, index]) with fixed stream tags
(evaluation drops 901, training mini-batches 902, dataset records 904), so
identical specs and seeds give byte-identical CSV output.  Wall times are
reported alongside results but kept out of the CSV for that reason.
"""

from __future__ import annotations

import configparser
import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import UlaConfig, mimo_baseline, ssca_thp_run, ula_channel
from .channel import ChannelSample, PinchingLayout, draw_users, effective_channel
from .config import SystemConfig, dbm_to_watts
from .longterm import DEFAULT_TAU, run_long_term, short_term_solver, trace_to_csv
from .precoding import DualParams, kkt_fit, kkt_reconstruct, rescale_to_power, wmmse_solve
from .rates import sinr_and_rate

METHODS = ("proposed", "ssca_thp", "mimo")
SHORT_SOLVERS = ("wmmse", "kkt_fit", "duals_file")
DATASET_SCHEMA = "pass-kdl/1"

CSV_COLUMNS = ("method", "p_max_dbm", "seed", "t_f", "mean_sum_rate", "std_sum_rate")


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: SystemConfig = field(default_factory=SystemConfig)
    seed: int = 1
    t_f: int = 100
    n_s: int = 10
    eval_samples: int = 100
    p_max_dbm: tuple = (12.0, 16.0, 20.0, 24.0, 28.0)
    methods: tuple = METHODS
    grad_mode: str = "omit"
    short_solver: str = "wmmse"
    tau: float = DEFAULT_TAU
    duals_path: Optional[str] = None

    def __post_init__(self):
        if self.t_f < 1 or self.n_s < 1 or self.eval_samples < 1:
            raise ValueError("t_f, n_s and eval_samples must be positive")
        if not self.p_max_dbm or not all(np.isfinite(self.p_max_dbm)):
            raise ValueError("p_max_dbm sweep must be non-empty and finite")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.short_solver not in SHORT_SOLVERS:
            raise ValueError(f"unknown short_solver {self.short_solver!r}")
        if self.grad_mode not in ("omit", "fd", "spsa"):
            raise ValueError(f"unknown grad_mode {self.grad_mode!r}")


@dataclass
class ResultRow:
    method: str
    p_max_dbm: float
    seed: int
    mean_sum_rate: float
    std_sum_rate: float
    t_f: int
    wall_time_s: float = 0.0


def eval_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 901])))


def record_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 904, index])))


def eval_user_drops(spec: ExperimentSpec) -> np.ndarray:
    """The paired evaluation set: one draw shared by every method and power."""
    return draw_users(spec.scenario, eval_rng(spec.seed), spec.eval_samples)


def _eval_layout(cfg: SystemConfig, layout: PinchingLayout, drops: np.ndarray,
                 solver_name: str) -> np.ndarray:
    solve = short_term_solver(solver_name)
    rates = np.empty(len(drops))
    for j, users in enumerate(drops):
        sample = ChannelSample(users)
        h_eff = effective_channel(cfg, layout, sample, check=False)
        w, _ = solve(cfg, h_eff)
        rates[j] = sinr_and_rate(h_eff, w, cfg.noise_w).sum_rate
    return rates


def run_experiment(spec: ExperimentSpec, collect_traces: bool = False):
    """Run every (method, power) grid point; returns (rows, traces).

    The long-term phase is rerun per power level (the short-term solutions
    depend on the budget); evaluation then freezes the optimized layout on
    the shared evaluation set.  Rows come back sorted by method and power.
    """
    if spec.short_solver == "duals_file":
        if not spec.duals_path:
            raise ValueError("short_solver=duals_file needs duals_path")
        with open(spec.duals_path, "r", encoding="utf-8") as fh:
            rows, _, _ = eval_duals(fh.read())
        return rows, {}

    drops = eval_user_drops(spec)
    rows = []
    traces = {}
    for method in spec.methods:
        for p_dbm in spec.p_max_dbm:
            t0 = time.perf_counter()
            cfg_p = spec.scenario.at_power(dbm_to_watts(p_dbm))
            if method == "proposed":
                layout, trace = run_long_term(
                    cfg_p, t_f=spec.t_f, n_s=spec.n_s, seed=spec.seed,
                    solver=spec.short_solver, grad_mode=spec.grad_mode, tau=spec.tau)
                rates = _eval_layout(cfg_p, layout, drops, spec.short_solver)
                t_f_used = spec.t_f
            elif method == "ssca_thp":
                layout, trace = ssca_thp_run(cfg_p, t_f=spec.t_f, n_s=spec.n_s,
                                             seed=spec.seed, tau=spec.tau)
                rates = _eval_layout(cfg_p, layout, drops, "rzf")
                t_f_used = spec.t_f
            else:  # mimo
                trace = []
                rates = mimo_baseline(cfg_p, [ChannelSample(u) for u in drops])
                t_f_used = 0
            rows.append(ResultRow(
                method=method, p_max_dbm=float(p_dbm), seed=spec.seed,
                mean_sum_rate=float(rates.mean()), std_sum_rate=float(rates.std()),
                t_f=t_f_used, wall_time_s=time.perf_counter() - t0))
            if collect_traces and trace:
                traces[(method, float(p_dbm))] = trace
    rows.sort(key=lambda r: (r.method, r.p_max_dbm))
    return rows, traces


def rows_to_csv(rows) -> str:
    """Deterministic CSV text (header mandatory, shortest-roundtrip floats)."""
    lines = [",".join(CSV_COLUMNS)]
    for r in sorted(rows, key=lambda r: (r.method, r.p_max_dbm)):
        lines.append(",".join([
            r.method, repr(float(r.p_max_dbm)), repr(int(r.seed)), repr(int(r.t_f)),
            repr(float(r.mean_sum_rate)), repr(float(r.std_sum_rate)),
        ]))
    return "\n".join(lines) + "\n"


# -- dataset export / scoring ---------------------------------------------


def _scenario_to_dict(cfg: SystemConfig) -> dict:
    return {
        "users": cfg.users, "waveguides": cfg.waveguides,
        "pas_per_guide": cfg.pas_per_guide, "region_x": cfg.region_x,
        "region_y": cfg.region_y, "height": cfg.height,
        "carrier_hz": cfg.carrier_hz, "n_eff": cfg.n_eff,
        "noise_w": cfg.noise_w, "p_max_w": cfg.p_max_w,
        "min_spacing": cfg.min_spacing, "guide_y": list(cfg.guide_y),
        "friis_squared": cfg.friis_squared, "strict_paper_mse": cfg.strict_paper_mse,
    }


def scenario_from_dict(d: dict) -> SystemConfig:
    return SystemConfig(**{**d, "guide_y": tuple(d.get("guide_y", ()))})


def export_training_set(spec: ExperimentSpec, count: int, optimize: bool = False) -> str:
    """JSON-lines training data for the amortized duals predictor.

    First line is a versioned header record carrying the scenario and the
    layout; each following line holds one user drop with fitted duals, the
    sum rate they reconstruct to, and the per-sample WMMSE reference rate.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    cfg = spec.scenario
    if optimize:
        layout, _ = run_long_term(cfg, t_f=spec.t_f, n_s=spec.n_s, seed=spec.seed,
                                  solver="wmmse", grad_mode=spec.grad_mode, tau=spec.tau)
    else:
        layout = PinchingLayout.grid(cfg)
    header = {
        "schema": DATASET_SCHEMA,
        "scenario": _scenario_to_dict(cfg),
        "layout": np.asarray(layout.x).tolist(),
        "count": count,
        "seed": spec.seed,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for i in range(count):
        rng = record_rng(spec.seed, i)
        users = draw_users(cfg, rng, 1)[0]
        sample = ChannelSample(users)
        h_eff = effective_channel(cfg, layout, sample, check=False)
        wst = wmmse_solve(h_eff, cfg)
        wmmse_rate = sinr_and_rate(h_eff, wst.w, cfg.noise_w).sum_rate
        fit = kkt_fit(h_eff, cfg, wmmse_rate=wmmse_rate)
        lines.append(json.dumps({
            "user_positions": users.tolist(),
            "pa_positions": np.asarray(layout.x).tolist(),
            "rho": fit.duals.rho.tolist(),
            "lam": fit.duals.lam.tolist(),
            "sum_rate": fit.sum_rate,
            "wmmse_sum_rate": wmmse_rate,
        }, sort_keys=True))
    return "\n".join(lines) + "\n"


def score_duals_record(cfg: SystemConfig, record: dict) -> float:
    """Sum rate of a record's duals after the common full-power rescale."""
    layout = PinchingLayout(np.asarray(record["pa_positions"], dtype=float))
    sample = ChannelSample(np.asarray(record["user_positions"], dtype=float))
    h_eff = effective_channel(cfg, layout, sample, check=False)
    duals = DualParams(rho=np.asarray(record["rho"], dtype=float),
                       lam=np.asarray(record["lam"], dtype=float))
    w = rescale_to_power(kkt_reconstruct(h_eff, duals), cfg.p_max_w)
    return sinr_and_rate(h_eff, w, cfg.noise_w).sum_rate


def eval_duals(jsonl_text: str):
    """Score an exported/predicted duals file with the reference pipeline.

    Returns (rows, per_record, skipped): one aggregate row over the valid
    records, the per-record sum rates, and the count of malformed records
    skipped with a warning.
    """
    lines = [ln for ln in jsonl_text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty duals file")
    header = json.loads(lines[0])
    if header.get("schema") != DATASET_SCHEMA:
        raise ValueError(f"unsupported schema {header.get('schema')!r}")
    cfg = scenario_from_dict(header["scenario"])
    per_record = []
    skipped = 0
    for ln in lines[1:]:
        try:
            record = json.loads(ln)
            rate = score_duals_record(cfg, record)
        except (ValueError, KeyError, TypeError):
            skipped += 1
            continue
        per_record.append(rate)
    rates = np.asarray(per_record)
    rows = [ResultRow(
        method="duals_file",
        p_max_dbm=30.0 + 10.0 * np.log10(cfg.p_max_w),
        seed=int(header.get("seed", 0)),
        mean_sum_rate=float(rates.mean()) if rates.size else 0.0,
        std_sum_rate=float(rates.std()) if rates.size else 0.0,
        t_f=0)]
    return rows, per_record, skipped


# -- flat config-file parsing ----------------------------------------------

_SCENARIO_FLOATS = ("region_x", "region_y", "height", "carrier_hz", "n_eff",
                    "noise_w", "p_max_w", "min_spacing")
_SCENARIO_INTS = ("users", "waveguides", "pas_per_guide")
_SCENARIO_BOOLS = ("friis_squared", "strict_paper_mse")


def parse_experiment_config(text: str) -> ExperimentSpec:
    """Parse the documented key=value config format (INI sections)."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"config parse error: {exc}") from exc

    scen_kwargs = {}
    if parser.has_section("scenario"):
        sect = parser["scenario"]
        for key in sect:
            if key in _SCENARIO_INTS:
                scen_kwargs[key] = sect.getint(key)
            elif key in _SCENARIO_FLOATS:
                scen_kwargs[key] = sect.getfloat(key)
            elif key in _SCENARIO_BOOLS:
                scen_kwargs[key] = sect.getboolean(key)
            elif key == "noise_dbm":
                scen_kwargs["noise_w"] = dbm_to_watts(sect.getfloat(key))
            elif key == "p_max_dbm":
                scen_kwargs["p_max_w"] = dbm_to_watts(sect.getfloat(key))
            elif key == "guide_y":
                scen_kwargs["guide_y"] = tuple(
                    float(v) for v in sect.get(key).split(","))
            else:
                raise ValueError(f"unknown scenario key {key!r}")
    scenario = SystemConfig(**scen_kwargs)

    exp_kwargs = {"scenario": scenario}
    if parser.has_section("experiment"):
        sect = parser["experiment"]
        for key in sect:
            if key in ("seed", "t_f", "n_s", "eval_samples"):
                exp_kwargs[key] = sect.getint(key)
            elif key == "p_max_dbm":
                exp_kwargs[key] = tuple(float(v) for v in sect.get(key).split(","))
            elif key == "methods":
                exp_kwargs[key] = tuple(v.strip() for v in sect.get(key).split(","))
            elif key in ("grad_mode", "short_solver", "duals_path"):
                exp_kwargs[key] = sect.get(key)
            elif key == "tau":
                exp_kwargs[key] = sect.getfloat(key)
            else:
                raise ValueError(f"unknown experiment key {key!r}")
    return ExperimentSpec(**exp_kwargs)
