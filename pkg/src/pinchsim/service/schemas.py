"""Request/response models for the simulation service."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from ..config import SystemConfig
from ..experiments import ExperimentSpec
from ..longterm import DEFAULT_TAU


class ScenarioModel(BaseModel):
    users: int = 4
    waveguides: int = 4
    pas_per_guide: int = 8
    region_x: float = 20.0
    region_y: float = 10.0
    height: float = 3.0
    carrier_hz: float = 28e9
    n_eff: float = 1.4
    noise_w: float = 1e-12
    p_max_w: float = 0.1
    min_spacing: float = -1.0
    guide_y: List[float] = Field(default_factory=list)
    friis_squared: bool = False
    strict_paper_mse: bool = False

    def to_config(self) -> SystemConfig:
        return SystemConfig(**{**self.model_dump(), "guide_y": tuple(self.guide_y)})

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "ScenarioModel":
        return cls(users=cfg.users, waveguides=cfg.waveguides,
                   pas_per_guide=cfg.pas_per_guide, region_x=cfg.region_x,
                   region_y=cfg.region_y, height=cfg.height,
                   carrier_hz=cfg.carrier_hz, n_eff=cfg.n_eff,
                   noise_w=cfg.noise_w, p_max_w=cfg.p_max_w,
                   min_spacing=cfg.min_spacing, guide_y=list(cfg.guide_y),
                   friis_squared=cfg.friis_squared,
                   strict_paper_mse=cfg.strict_paper_mse)


class ExperimentRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    seed: int = 1
    t_f: int = 100
    n_s: int = 10
    eval_samples: int = 100
    p_max_dbm: List[float] = Field(default_factory=lambda: [12.0, 16.0, 20.0, 24.0, 28.0])
    methods: List[str] = Field(default_factory=lambda: ["proposed", "ssca_thp", "mimo"])
    grad_mode: str = "omit"
    short_solver: str = "wmmse"
    tau: float = DEFAULT_TAU
    duals_path: Optional[str] = None
    include_traces: bool = False

    def to_spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            scenario=self.scenario.to_config(), seed=self.seed, t_f=self.t_f,
            n_s=self.n_s, eval_samples=self.eval_samples,
            p_max_dbm=tuple(self.p_max_dbm), methods=tuple(self.methods),
            grad_mode=self.grad_mode, short_solver=self.short_solver,
            tau=self.tau, duals_path=self.duals_path)


class ResultRowModel(BaseModel):
    method: str
    p_max_dbm: float
    seed: int
    mean_sum_rate: float
    std_sum_rate: float
    t_f: int
    wall_time_s: float


class TraceRowModel(BaseModel):
    t: int
    f_t: float
    gamma_t: float
    rho_t: float
    eval_sum_rate: float


class ExperimentResponse(BaseModel):
    rows: List[ResultRowModel]
    csv_text: str
    traces: Dict[str, List[TraceRowModel]] = Field(default_factory=dict)


class ExportRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    seed: int = 1
    count: int = 100
    optimize: bool = False
    t_f: int = 100
    n_s: int = 10
    tau: float = DEFAULT_TAU


class ExportResponse(BaseModel):
    jsonl_text: str
    n_records: int


class EvalDualsRequest(BaseModel):
    jsonl_text: str


class EvalDualsResponse(BaseModel):
    rows: List[ResultRowModel]
    per_record: List[float]
    skipped: int
    csv_text: str


class GradCheckRequest(BaseModel):
    scenario: Optional[ScenarioModel] = None
    instances: int = 20
    step: float = 1e-5
    tol: float = 1e-5
    seed: int = 0


class GradCheckResponse(BaseModel):
    passed: bool
    max_rel_err: float
    rel_errs: List[float]
    instances: int
    step: float
    tol: float
    elapsed_s: float


class ProjCheckRequest(BaseModel):
    cases: int = 200
    tol: float = 1e-8
    seed: int = 0


class ProjCheckResponse(BaseModel):
    passed: bool
    max_abs_err: float
    cases: int
    tol: float
    elapsed_s: float


class HealthResponse(BaseModel):
    status: str
    version: str
