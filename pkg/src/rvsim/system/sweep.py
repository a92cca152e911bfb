"""Parameter sweeps: a base config crossed with a grid of overrides."""

from __future__ import annotations

import concurrent.futures
import copy
import csv
import io
import json
import os

from ..golden import SimError
from ..vmh import read_vmh
from .build import build_system
from .config import normalize
from .run import run

MAX_GRID_POINTS = 4096


class SweepError(Exception):
    pass


def set_path(cfg, path, value):
    """Assign into a nested dict/list via a dotted path like caches.l1d.ways."""
    parts = path.split(".")
    node = cfg
    for part in parts[:-1]:
        key = int(part) if isinstance(node, list) else part
        try:
            nxt = node[key]
        except (KeyError, IndexError, TypeError):
            raise SweepError(f"grid path {path!r}: {part!r} not found")
        if nxt is None:
            nxt = node[key] = {}
        node = nxt
    key = parts[-1]
    key = int(key) if isinstance(node, list) else key
    node[key] = value


def expand_grid(base, grid):
    """Cartesian product of grid values applied over the base config."""
    paths = sorted(grid)
    points = [{}]
    for path in paths:
        values = grid[path]
        if not isinstance(values, list) or not values:
            raise SweepError(f"grid entry {path!r} must be a non-empty list")
        points = [dict(p, **{path: v}) for p in points for v in values]
        if len(points) > MAX_GRID_POINTS:
            raise SweepError(f"grid exceeds {MAX_GRID_POINTS} points")
    out = []
    for point in points:
        cfg = copy.deepcopy(base)
        for path, value in point.items():
            set_path(cfg, path, value)
        out.append((point, cfg))
    return out


def _run_point(args):
    point, cfg, program_path, max_cycles = args
    try:
        image = read_vmh(program_path)
        resolved, errors, _ = normalize(cfg)
        if errors:
            return point, None, "; ".join(errors)
        inst = build_system(resolved, image)
        report, _ = run(inst, max_cycles=max_cycles)
        return point, report.to_dict(), None
    except (SimError, Exception) as e:  # per-point failures never stop a sweep
        return point, None, f"{type(e).__name__}: {e}"


def run_sweep(spec, out_dir=None, jobs=1):
    """Execute a sweep spec: {"base": cfg, "grid": {...}, "sort_by": metric}.

    Returns {"points": [...], "table": [...]}; each point records its grid
    assignment plus either a report or an error string.
    """
    base = spec.get("base")
    if not isinstance(base, dict):
        raise SweepError("sweep spec needs a 'base' config object")
    grid = spec.get("grid") or {}
    program = spec.get("program") or base.get("program")
    if not program:
        raise SweepError("sweep spec needs a program (.vmh path)")
    max_cycles = spec.get("max_cycles")
    combos = expand_grid(base, grid)
    work = [(point, cfg, program, max_cycles) for point, cfg in combos]
    results = []
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, work))
    else:
        results = [_run_point(w) for w in work]
    points = []
    for point, report, error in results:
        entry = {"grid": point}
        if error is not None:
            entry["error"] = error
        else:
            entry["report"] = report
        points.append(entry)
    table = comparison_table(points, sort_by=spec.get("sort_by", "cycles"))
    out = {"points": points, "table": table}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.json"), "w") as f:
            json.dump(out, f, indent=2)
        with open(os.path.join(out_dir, "table.csv"), "w") as f:
            f.write(table_csv(table))
    return out


def comparison_table(points, sort_by="cycles"):
    """One row per grid point with headline metrics, sorted by a metric."""
    rows = []
    for entry in points:
        row = dict(entry["grid"])
        if "error" in entry:
            row.update(cycles=None, status="error", error=entry["error"])
        else:
            rep = entry["report"]
            row.update(
                cycles=rep["cycles"],
                status=rep["status"],
                total_retired=rep["derived"]["total_retired"],
                global_ipc=rep["derived"]["global_ipc"],
            )
            for name, rate in rep["derived"]["miss_rates"].items():
                row[f"miss:{name}"] = rate
        rows.append(row)
    def key(row):
        v = row.get(sort_by)
        return (v is None, v)
    return sorted(rows, key=key)


def table_csv(table):
    if not table:
        return ""
    fields = sorted({k for row in table for k in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    writer.writerows(table)
    return buf.getvalue()
