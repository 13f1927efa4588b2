"""Thin command-line client for the simulation service.

Every subcommand builds a request model and dispatches it either to the
in-process handlers (default) or to a running service via --server; the
client only marshals requests and writes response payloads to disk.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import parse_experiment_config
from .service import handlers, schemas


class LocalClient:
    def post(self, path, req):
        route = {
            "/experiment/run": handlers.handle_experiment,
            "/dataset/export": handlers.handle_export,
            "/dataset/eval": handlers.handle_eval_duals,
            "/checks/gradient": handlers.handle_gradcheck,
            "/checks/projection": handlers.handle_projcheck,
        }[path]
        return route(req)


class HttpClient:
    def __init__(self, base_url):
        self.base_url = base_url.rstrip("/")

    def post(self, path, req):
        import httpx

        model = {
            "/experiment/run": schemas.ExperimentResponse,
            "/dataset/export": schemas.ExportResponse,
            "/dataset/eval": schemas.EvalDualsResponse,
            "/checks/gradient": schemas.GradCheckResponse,
            "/checks/projection": schemas.ProjCheckResponse,
        }[path]
        resp = httpx.post(self.base_url + path, json=req.model_dump(), timeout=None)
        resp.raise_for_status()
        return model.model_validate(resp.json())


def _client(args):
    return HttpClient(args.server) if args.server else LocalClient()


def _load_request(args) -> schemas.ExperimentRequest:
    if args.config:
        spec = parse_experiment_config(Path(args.config).read_text(encoding="utf-8"))
        req = schemas.ExperimentRequest(
            scenario=schemas.ScenarioModel.from_config(spec.scenario),
            seed=spec.seed, t_f=spec.t_f, n_s=spec.n_s,
            eval_samples=spec.eval_samples, p_max_dbm=list(spec.p_max_dbm),
            methods=list(spec.methods), grad_mode=spec.grad_mode,
            short_solver=spec.short_solver, tau=spec.tau, duals_path=spec.duals_path)
    else:
        req = schemas.ExperimentRequest()
    if args.seed is not None:
        req.seed = args.seed
    if args.methods:
        req.methods = [m.strip() for m in args.methods.split(",")]
    if args.grad_mode:
        req.grad_mode = args.grad_mode
    if getattr(args, "p_max_dbm", None):
        req.p_max_dbm = [float(v) for v in args.p_max_dbm.split(",")]
    if getattr(args, "t_f", None) is not None:
        req.t_f = args.t_f
    return req


def cmd_run(args) -> int:
    req = _load_request(args)
    req.include_traces = bool(args.traces)
    resp = _client(args).post("/experiment/run", req)
    if args.out:
        Path(args.out).write_text(resp.csv_text, encoding="utf-8")

    else:
        sys.stdout.write(resp.csv_text)
    if args.traces:
        trace_dir = Path(args.traces)
        trace_dir.mkdir(parents=True, exist_ok=True)
        from .longterm import TRACE_COLUMNS
        for name, trace in resp.traces.items():
            lines = [",".join(TRACE_COLUMNS)]
            for row in trace:
                lines.append(",".join(repr(v) for v in (
                    row.t, row.f_t, row.gamma_t, row.rho_t, row.eval_sum_rate)))
            safe = name.replace("@", "_").replace(".", "p")
            (trace_dir / f"trace_{safe}.csv").write_text("\n".join(lines) + "\n",
                                                         encoding="utf-8")
    for row in resp.rows:
        print(f"{row.method:9s} {row.p_max_dbm:6.1f} dBm  "
              f"mean {row.mean_sum_rate:8.3f}  std {row.std_sum_rate:7.3f}  "
              f"[{row.wall_time_s:.1f}s]", file=sys.stderr)
    return 0


def cmd_gradcheck(args) -> int:
    req = schemas.GradCheckRequest(instances=args.instances, step=args.step,
                                   tol=args.tol, seed=args.seed or 0)
    resp = _client(args).post("/checks/gradient", req)
    status = "PASS" if resp.passed else "FAIL"
    print(f"{status}: gradient check, max relative error {resp.max_rel_err:.3e} "
          f"(tol {resp.tol:g}, {resp.instances} instances, step {resp.step:g}, "
          f"{resp.elapsed_s:.2f}s)")
    return 0 if resp.passed else 1


def cmd_projcheck(args) -> int:
    req = schemas.ProjCheckRequest(cases=args.cases, tol=args.tol, seed=args.seed or 0)
    resp = _client(args).post("/checks/projection", req)
    status = "PASS" if resp.passed else "FAIL"
    print(f"{status}: projection check, max abs error {resp.max_abs_err:.3e} "
          f"(tol {resp.tol:g}, {resp.cases} cases, {resp.elapsed_s:.2f}s)")
    return 0 if resp.passed else 1


def cmd_export_data(args) -> int:
    scenario = schemas.ScenarioModel()
    if args.config:
        spec = parse_experiment_config(Path(args.config).read_text(encoding="utf-8"))
        scenario = schemas.ScenarioModel.from_config(spec.scenario)
    req = schemas.ExportRequest(scenario=scenario, seed=args.seed or 1,
                                count=args.count, optimize=args.optimize)
    resp = _client(args).post("/dataset/export", req)
    Path(args.out).write_text(resp.jsonl_text, encoding="utf-8")
    print(f"wrote {resp.n_records} records to {args.out}", file=sys.stderr)
    return 0


def cmd_eval_duals(args) -> int:
    text = Path(args.data).read_text(encoding="utf-8")
    resp = _client(args).post("/dataset/eval", schemas.EvalDualsRequest(jsonl_text=text))
    if args.out:
        Path(args.out).write_text(resp.csv_text, encoding="utf-8")
    else:
        sys.stdout.write(resp.csv_text)
    if args.per_record:
        lines = [json.dumps({"index": i, "sum_rate": r})
                 for i, r in enumerate(resp.per_record)]
        Path(args.per_record).write_text("\n".join(lines) + "\n", encoding="utf-8")
    row = resp.rows[0]
    print(f"scored {len(resp.per_record)} records "
          f"(skipped {resp.skipped}): mean {row.mean_sum_rate:.4f} "
          f"std {row.std_sum_rate:.4f}", file=sys.stderr)
    return 1 if resp.skipped else 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("pinchsim.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchsim")
    parser.add_argument("--server", help="base URL of a running service; "
                        "default is in-process execution")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid")
    p.add_argument("--config", help="experiment config file (INI key=value)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="results CSV path (stdout if omitted)")
    p.add_argument("--methods", help="comma list: proposed,ssca_thp,mimo")
    p.add_argument("--grad-mode", dest="grad_mode", choices=["omit", "fd", "spsa"])
    p.add_argument("--p-max-dbm", dest="p_max_dbm", help="comma list of dBm values")
    p.add_argument("--t-f", dest="t_f", type=int, help="long-term iterations")
    p.add_argument("--traces", help="directory for per-run trace CSVs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gradcheck", help="analytic-vs-FD gradient check")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("projcheck", help="projection-vs-QP-oracle check")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_projcheck)

    p = sub.add_parser("export-data", help="export a duals training set (JSONL)")
    p.add_argument("--config")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--optimize", action="store_true",
                   help="optimize the layout before exporting")
    p.set_defaults(func=cmd_export_data)

    p = sub.add_parser("eval-duals", help="score a duals file")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--per-record", dest="per_record",
                   help="JSONL path for per-record sum rates")
    p.set_defaults(func=cmd_eval_duals)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
