"""Deterministic global cycle loop and the statistics report."""

from __future__ import annotations

import random
import time

from ..golden import SimError

STATS_VERSION = 1


class StatsReport:
    """Run outcome: counters per component plus derived metrics.

    canonical() strips the meta block (wall clock and the like), which is
    the part excluded from determinism comparisons.
    """

    def __init__(self, payload):
        self.payload = payload

    def __getitem__(self, key):
        return self.payload[key]

    def canonical(self):
        return {k: v for k, v in self.payload.items() if k != "meta"}

    def to_dict(self):
        return self.payload


def run(instance, max_cycles=None, on_retire=None, collect_trace=False,
        tick_permutation=None, stats_interval=None, baseline=None):
    """Advance the global clock until every hart halts.

    on_retire(hart, record) observes retirements in commit order per core;
    collect_trace returns full per-core retirement lists in the report pair.
    stats_interval=N adds a cumulative counter snapshot every N cycles;
    baseline (another report) adds a speedup figure to the derived metrics.
    Returns (StatsReport, traces). A cycle-limit run returns partial stats
    with status "cycle-limit" rather than raising.
    """
    cfg = instance.cfg
    limit = max_cycles if max_cycles is not None else cfg["max_cycles"]
    traces = [[] for _ in instance.cores] if collect_trace else None
    intervals = [] if stats_interval else None
    for i, core in enumerate(instance.cores):
        sinks = []
        if collect_trace:
            sinks.append(traces[i].append)
        if on_retire is not None:
            hart = i
            sinks.append(lambda rec, hart=hart: on_retire(hart, rec))
        if sinks:
            if len(sinks) == 1:
                core.on_retire = sinks[0]
            else:
                def fanout(rec, sinks=tuple(sinks)):
                    for s in sinks:
                        s(rec)
                core.on_retire = fanout
    perm = random.Random(tick_permutation) if tick_permutation is not None else None
    started = time.monotonic()
    status = "completed"
    cycle = 0
    try:
        while True:
            if all(core.halted for core in instance.cores):
                break
            if cycle >= limit:
                status = "cycle-limit"
                break
            cycle += 1
            instance.tick_components(perm)
            for core in instance.cores:
                core.tick()
            instance.latch_all()
            if intervals is not None and cycle % stats_interval == 0:
                intervals.append({
                    "cycle": cycle,
                    "retired": [c.stats.retired for c in instance.cores],
                })
    except SimError as e:
        raise SimError(f"{e} (cycle {cycle})") from e
    instance.cycle = cycle
    report = build_report(instance, status, cycle,
                          time.monotonic() - started,
                          intervals=intervals, baseline=baseline)
    return report, traces


def build_report(instance, status, cycles, wall_clock, intervals=None,
                 baseline=None):
    cores = [core.stats.to_dict() for core in instance.cores]
    caches = []
    bus = None
    if instance.hierarchy is not None:
        caches = instance.hierarchy.stats_dicts()
        bus = instance.hierarchy.controller.stats.to_dict()
    noc = None
    if instance.network is not None:
        noc = instance.network.finalize_stats().to_dict()
    total_retired = sum(c["retired"] for c in cores)
    derived = {
        "total_retired": total_retired,
        "global_ipc": round(total_retired / cycles, 6) if cycles else 0.0,
        "final_a0": [core.regs[10] for core in instance.cores],
        "miss_rates": {c["name"]: c["miss_rate"] for c in caches},
    }
    if baseline is not None:
        base = baseline.payload if isinstance(baseline, StatsReport) else baseline
        derived["baseline"] = base["config"].get("name", "baseline")
        derived["speedup_vs_baseline"] = (
            round(base["cycles"] / cycles, 6) if cycles else 0.0)
    payload = {
        "stats_version": STATS_VERSION,
        "status": status,
        "cycles": cycles,
        "seed": instance.cfg["seed"],
        "config": instance.cfg,
        "cores": cores,
        "caches": caches,
        "bus": bus,
        "noc": noc,
        "derived": derived,
        "meta": {"wall_clock_sec": round(wall_clock, 6)},
    }
    if intervals is not None:
        payload["intervals"] = intervals
    return StatsReport(payload)


STATS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "StatsReport",
    "type": "object",
    "required": ["stats_version", "status", "cycles", "config", "cores",
                 "derived"],
    "properties": {
        "stats_version": {"const": STATS_VERSION},
        "status": {"enum": ["completed", "cycle-limit"]},
        "cycles": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "cores": {"type": "array", "items": {"type": "object"}},
        "caches": {"type": "array", "items": {"type": "object"}},
        "bus": {"type": ["object", "null"]},
        "noc": {"type": ["object", "null"]},
        "derived": {"type": "object"},
        "meta": {"type": "object"},
    },
}
