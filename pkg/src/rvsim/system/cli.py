"""Command line interface: asm, validate, run, sweep, serve.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 cycle limit.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..asm import AsmError, assemble
from ..golden import SimError, trace_jsonl, trace_text
from ..kernel import KernelError, KernelParams, wrap_kernel
from ..vmh import VmhError, emit_vmh, read_vmh
from .build import build_system
from .config import normalize
from .run import run
from .sweep import SweepError, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_CYCLE_LIMIT = 0, 1, 2, 3


def _cmd_asm(args):
    try:
        with open(args.source) as f:
            text = f.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if args.bare:
            image = assemble(text)
        else:
            params = KernelParams(stack_pointer=args.stack_pointer,
                                  stack_size=args.stack_size, harts=args.harts)
            image = assemble(wrap_kernel(text, params))
    except (AsmError, KernelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    out = args.output or (args.source.rsplit(".", 1)[0] + ".vmh")
    with open(out, "w") as f:
        f.write(emit_vmh(image))
    print(f"wrote {out} ({len(image.words)} words, entry 0x{image.entry:x})")
    return EXIT_OK


def _load_config(path):
    with open(path) as f:
        return json.load(f)


def _cmd_validate(args):
    try:
        cfg = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    resolved, errors, warnings = normalize(cfg)
    for w in warnings:
        print(f"warning: {w}")
    for e in errors:
        print(f"error: {e}")
    if errors:
        return EXIT_VALIDATION
    print("configuration ok")
    if args.print_resolved:
        print(json.dumps(resolved, indent=2))
    return EXIT_OK


def _cmd_run(args):
    try:
        cfg = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        cfg["seed"] = args.seed
    program = args.program or cfg.get("program")
    if not program:
        print("error: no program (.vmh) given", file=sys.stderr)
        return EXIT_VALIDATION
    resolved, errors, warnings = normalize(cfg)
    for w in warnings:
        print(f"warning: {w}")
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        image = read_vmh(program)
    except (OSError, VmhError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    baseline = None
    if args.baseline:
        try:
            with open(args.baseline) as f:
                baseline = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
    try:
        inst = build_system(resolved, image)
        report, traces = run(inst, max_cycles=args.max_cycles,
                             collect_trace=bool(args.trace),
                             stats_interval=args.stats_interval,
                             baseline=baseline)
    except SimError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    payload = report.to_dict()
    print(f"status: {payload['status']}")
    print(f"cycles: {payload['cycles']}")
    for core in payload["cores"]:
        print(f"  {core['name']}: retired={core['retired']} "
              f"ipc={core['ipc']}")
    print(f"final a0: {payload['derived']['final_a0']}")
    if args.stats:
        with open(args.stats, "w") as f:
            json.dump(payload, f, indent=2)
        print(f"stats written to {args.stats}")
    if args.trace:
        with open(args.trace, "w") as f:
            for hart, t in enumerate(traces):
                f.write(f"# hart {hart}\n")
                f.write(trace_jsonl(t) if args.trace.endswith(".jsonl")
                        else trace_text(t))
        print(f"trace written to {args.trace}")
    return EXIT_CYCLE_LIMIT if payload["status"] == "cycle-limit" else EXIT_OK


def _cmd_sweep(args):
    try:
        with open(args.spec) as f:
            spec = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        out = run_sweep(spec, out_dir=args.out, jobs=args.jobs)
    except SweepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    failed = [p for p in out["points"] if "error" in p]
    print(f"{len(out['points'])} points, {len(failed)} failed")
    for row in out["table"]:
        print("  " + json.dumps(row))
    return EXIT_OK if not failed else EXIT_RUNTIME


def _cmd_serve(args):
    from .server import serve
    serve(port=args.port, host=args.host, static_dir=args.static)
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rvsim",
        description="Cycle-level multi-core RV32I design space explorer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble a program to a .vmh image")
    p.add_argument("source")
    p.add_argument("-o", "--output")
    p.add_argument("--stack-pointer", type=lambda s: int(s, 0), default=0x7FC)
    p.add_argument("--stack-size", type=lambda s: int(s, 0), default=512)
    p.add_argument("--harts", type=int, default=1)
    p.add_argument("--bare", action="store_true",
                   help="skip the kernel wrapper")
    p.set_defaults(func=_cmd_asm)

    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("--config", required=True)
    p.add_argument("--print-resolved", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="run a program on a configured system")
    p.add_argument("--config", required=True)
    p.add_argument("--program", help=".vmh image (overrides config.program)")
    p.add_argument("--max-cycles", type=int)
    p.add_argument("--stats", help="write the stats report JSON here")
    p.add_argument("--trace", help="write retirement traces here")
    p.add_argument("--seed", type=int)
    p.add_argument("--stats-interval", type=int,
                   help="record a counter snapshot every N cycles")
    p.add_argument("--baseline",
                   help="stats JSON to compute speedup against")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", help="directory for sweep.json and table.csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("serve", help="start the HTTP API / explorer server")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="serve this directory at / (explorer UI)")
    p.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
