"""Service operations, shared by the HTTP routes and the local CLI client."""

from __future__ import annotations

from dataclasses import replace

from .. import __version__
from ..checks import gradient_check, projection_check
from ..experiments import eval_duals, export_training_set, rows_to_csv, run_experiment
from . import schemas


def _row_models(rows):
    return [schemas.ResultRowModel(
        method=r.method, p_max_dbm=r.p_max_dbm, seed=r.seed,
        mean_sum_rate=r.mean_sum_rate, std_sum_rate=r.std_sum_rate,
        t_f=r.t_f, wall_time_s=r.wall_time_s) for r in rows]


def handle_experiment(req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
    spec = req.to_spec()
    rows, traces = run_experiment(spec, collect_traces=req.include_traces)
    trace_models = {}
    for (method, p_dbm), trace in traces.items():
        trace_models[f"{method}@{p_dbm:g}dBm"] = [
            schemas.TraceRowModel(t=row.t, f_t=row.f, gamma_t=row.gamma,
                                  rho_t=row.rho, eval_sum_rate=row.batch_sum_rate)
            for row in trace]
    return schemas.ExperimentResponse(rows=_row_models(rows),
                                      csv_text=rows_to_csv(rows),
                                      traces=trace_models)


def handle_export(req: schemas.ExportRequest) -> schemas.ExportResponse:
    from ..experiments import ExperimentSpec
    spec = ExperimentSpec(scenario=req.scenario.to_config(), seed=req.seed,
                          t_f=req.t_f, n_s=req.n_s, tau=req.tau)
    text = export_training_set(spec, req.count, optimize=req.optimize)
    return schemas.ExportResponse(jsonl_text=text, n_records=req.count)


def handle_eval_duals(req: schemas.EvalDualsRequest) -> schemas.EvalDualsResponse:
    rows, per_record, skipped = eval_duals(req.jsonl_text)
    return schemas.EvalDualsResponse(rows=_row_models(rows), per_record=per_record,
                                     skipped=skipped, csv_text=rows_to_csv(rows))


def handle_gradcheck(req: schemas.GradCheckRequest) -> schemas.GradCheckResponse:
    cfg = req.scenario.to_config() if req.scenario is not None else None
    rep = gradient_check(cfg=cfg, instances=req.instances, step=req.step,
                         tol=req.tol, seed=req.seed)
    return schemas.GradCheckResponse(passed=rep.passed, max_rel_err=rep.max_rel_err,
                                     rel_errs=rep.rel_errs, instances=rep.instances,
                                     step=rep.step, tol=rep.tol, elapsed_s=rep.elapsed_s)


def handle_projcheck(req: schemas.ProjCheckRequest) -> schemas.ProjCheckResponse:
    rep = projection_check(cases=req.cases, tol=req.tol, seed=req.seed)
    return schemas.ProjCheckResponse(passed=rep.passed, max_abs_err=rep.max_abs_err,
                                     cases=rep.cases, tol=rep.tol,
                                     elapsed_s=rep.elapsed_s)


def handle_health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)
