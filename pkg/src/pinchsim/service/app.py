"""FastAPI application exposing the simulator."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(title="pinchsim", description="Two-timescale transmit and "
                  "pinching beamforming simulation service")

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return handlers.handle_health()

    @app.post("/experiment/run", response_model=schemas.ExperimentResponse)
    def experiment_run(req: schemas.ExperimentRequest):
        try:
            return handlers.handle_experiment(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/dataset/export", response_model=schemas.ExportResponse)
    def dataset_export(req: schemas.ExportRequest):
        try:
            return handlers.handle_export(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/dataset/eval", response_model=schemas.EvalDualsResponse)
    def dataset_eval(req: schemas.EvalDualsRequest):
        try:
            return handlers.handle_eval_duals(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/checks/gradient", response_model=schemas.GradCheckResponse)
    def checks_gradient(req: schemas.GradCheckRequest):
        return handlers.handle_gradcheck(req)

    @app.post("/checks/projection", response_model=schemas.ProjCheckResponse)
    def checks_projection(req: schemas.ProjCheckRequest):
        return handlers.handle_projcheck(req)

    return app


app = create_app()
