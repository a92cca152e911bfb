"""HTTP API consumed by the web explorer (and anything else).

Runs execute on a small worker pool; the registry holds status, the stats
report and the retirement traces for each run id. All payloads are JSON and
the config format is byte-for-byte the CLI's.
"""

from __future__ import annotations

import concurrent.futures
import threading
import uuid

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from ..golden import SimError, trace_text
from ..vmh import VmhError, parse_vmh
from .benchmarks import BENCHMARKS, benchmark_names, build_benchmark
from .build import build_system
from .config import CONFIG_SCHEMA, normalize, validate_config
from .run import STATS_SCHEMA, run


class RunRegistry:
    def __init__(self, workers=2):
        self.lock = threading.Lock()
        self.runs = {}
        self.pool = concurrent.futures.ThreadPoolExecutor(max_workers=workers)

    def submit(self, cfg, image, trace):
        run_id = uuid.uuid4().hex[:12]
        entry = {"id": run_id, "status": "queued", "report": None,
                 "error": None, "traces": None, "config": cfg}
        with self.lock:
            self.runs[run_id] = entry
        self.pool.submit(self._execute, run_id, cfg, image, trace)
        return run_id

    def _execute(self, run_id, cfg, image, trace):
        with self.lock:
            self.runs[run_id]["status"] = "running"
        try:
            inst = build_system(cfg, image)
            report, traces = run(inst, collect_trace=trace)
            with self.lock:
                entry = self.runs[run_id]
                entry["status"] = report["status"]
                entry["report"] = report.to_dict()
                entry["traces"] = traces
        except (SimError, Exception) as e:
            with self.lock:
                entry = self.runs[run_id]
                entry["status"] = "error"
                entry["error"] = f"{type(e).__name__}: {e}"

    def get(self, run_id):
        with self.lock:
            return self.runs.get(run_id)

    def list(self):
        with self.lock:
            return [
                {"id": e["id"], "status": e["status"],
                 "name": e["config"].get("name", ""),
                 "cycles": e["report"]["cycles"] if e["report"] else None}
                for e in self.runs.values()
            ]


def _resolve_image(body):
    program = body.get("program")
    vmh = body.get("vmh")
    if vmh is not None:
        try:
            return parse_vmh(vmh)
        except VmhError as e:
            raise HTTPException(400, f"bad vmh payload: {e}")
    if isinstance(program, str) and program.startswith("bench:"):
        name = program.split(":", 1)[1]
        harts = len(body.get("config", {}).get("cores", [])) or 1
        if name not in BENCHMARKS:
            raise HTTPException(404, f"unknown benchmark {name!r}")
        if name != "prime-parallel" and harts > 1:
            raise HTTPException(400, f"benchmark {name} is single-hart")
        return build_benchmark(name, harts=harts)
    raise HTTPException(400, "request needs 'vmh' text or a bench: program")


def create_app(static_dir=None):
    app = FastAPI(title="rvsim explorer API")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    registry = RunRegistry()
    app.state.registry = registry

    @app.get("/api/schema")
    def get_schema():
        return {"config_schema": CONFIG_SCHEMA, "stats_schema": STATS_SCHEMA,
                "version": 1}

    @app.post("/api/validate")
    def post_validate(cfg: dict):
        ok, errors, warnings = validate_config(cfg)
        resolved, _, _ = normalize(cfg)
        return {"ok": ok, "errors": errors, "warnings": warnings,
                "resolved": resolved}

    @app.get("/api/benchmarks")
    def get_benchmarks():
        return [{"name": n, "description": BENCHMARKS[n]}
                for n in benchmark_names()]

    @app.post("/api/runs")
    def post_run(body: dict):
        cfg = body.get("config")
        if not isinstance(cfg, dict):
            raise HTTPException(400, "body needs a 'config' object")
        ok, errors, _ = validate_config(cfg)
        if not ok:
            raise HTTPException(422, "; ".join(errors))
        resolved, _, _ = normalize(cfg)
        image = _resolve_image(body)
        run_id = registry.submit(resolved, image,
                                 bool(body.get("trace", True)))
        return {"id": run_id}

    @app.get("/api/runs")
    def list_runs():
        return registry.list()

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        entry = registry.get(run_id)
        if entry is None:
            raise HTTPException(404, "no such run")
        return {"id": entry["id"], "status": entry["status"],
                "error": entry["error"], "report": entry["report"]}

    @app.get("/api/runs/{run_id}/trace")
    def get_trace(run_id: str, hart: int = 0, start: int = 0,
                  count: int = 100, fmt: str = "json",
                  from_: int | None = Query(default=None, alias="from")):
        entry = registry.get(run_id)
        if entry is None:
            raise HTTPException(404, "no such run")
        traces = entry["traces"]
        if traces is None:
            raise HTTPException(409, "run has no trace (pending or disabled)")
        if not 0 <= hart < len(traces):
            raise HTTPException(404, "no such hart")
        if from_ is not None:
            start = from_
        window = traces[hart][start:start + count]
        if fmt == "text":
            return {"hart": hart, "start": start, "text": trace_text(window)}
        return {"hart": hart, "start": start,
                "total": len(traces[hart]),
                "records": [r.to_dict() for r in window]}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")
    return app


def serve(port=8000, host="127.0.0.1", static_dir=None):
    import uvicorn
    uvicorn.run(create_app(static_dir), host=host, port=port, log_level="info")
