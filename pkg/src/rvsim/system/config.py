"""System configuration: normalization, validation and the published schema.

Configurations travel as plain JSON objects so the CLI, the HTTP API and the
web explorer share one format verbatim. normalize() fills defaults and
returns (resolved config, errors, warnings); build only proceeds on a clean
error list.
"""

from __future__ import annotations

import copy

VARIANTS = ("single-cycle", "five-stage-stall", "five-stage-bypass",
            "seven-stage", "ooo")
MEMORY_KINDS = ("asynchronous", "synchronous", "off-chip")
INTERCONNECTS = ("none", "shared-bus", "noc")
REPLACEMENTS = ("lru", "random")

DEFAULT_CACHE = {"l1i": {"index_bits": 6, "offset_bits": 2, "ways": 4,
                         "replacement": "lru"},
                 "l1d": {"index_bits": 6, "offset_bits": 2, "ways": 4,
                         "replacement": "lru"},
                 "l2": {"index_bits": 7, "offset_bits": 2, "ways": 4,
                        "replacement": "lru"}}

MAX_ADDRESS_BITS = 24


def default_config():
    return {
        "name": "system",
        "seed": 0,
        "cores": [{"variant": "single-cycle"}],
        "memory": {"kind": "asynchronous", "layout": "separate"},
        "caches": None,
        "interconnect": {"kind": "none"},
        "program": None,
        "max_cycles": 50_000_000,
    }


def _norm_cache(entry, defaults, errors, path):
    out = dict(defaults)
    if entry:
        out.update(entry)
    for field in ("index_bits", "offset_bits"):
        v = out.get(field, 0)
        if not isinstance(v, int) or v < 0:
            errors.append(f"{path}.{field} must be >= 0")
    ways = out.get("ways", 1)
    if not isinstance(ways, int) or ways < 1:
        errors.append(f"{path}.ways must be >= 1")
    if out.get("replacement", "lru") not in REPLACEMENTS:
        errors.append(f"{path}.replacement must be one of {REPLACEMENTS}")
    out.setdefault("replacement", "lru")
    return out


def normalize(cfg):
    """Fill defaults and check the configuration.

    Returns (resolved, errors, warnings); resolved is complete even when
    errors exist (fields that failed keep their raw values).
    """
    errors, warnings = [], []
    if not isinstance(cfg, dict):
        return default_config(), ["configuration must be a JSON object"], []
    out = default_config()
    known = set(out)
    for key in cfg:
        if key not in known:
            warnings.append(f"unknown field {key!r} ignored")
    for key in known:
        if key in cfg and cfg[key] is not None or key in cfg:
            out[key] = copy.deepcopy(cfg[key])

    # cores
    cores = out.get("cores")
    if not isinstance(cores, list) or not cores:
        errors.append("cores must be a non-empty list")
        cores = out["cores"] = [{"variant": "single-cycle"}]
    norm_cores = []
    for i, c in enumerate(cores):
        if not isinstance(c, dict):
            errors.append(f"cores[{i}] must be an object")
            c = {}
        variant = c.get("variant", "single-cycle")
        if variant not in VARIANTS:
            errors.append(f"cores[{i}].variant must be one of {VARIANTS}")
        entry = {"variant": variant,
                 "queue_length": c.get("queue_length", 8),
                 "alu_latencies": list(c.get("alu_latencies", [1]))}
        if variant != "ooo" and ("queue_length" in c or "alu_latencies" in c):
            warnings.append(f"cores[{i}]: scheduler parameters only apply to "
                            "the ooo variant")
        if entry["queue_length"] < 1:
            errors.append(f"cores[{i}].queue_length must be >= 1")
        if not entry["alu_latencies"] or any(
                not isinstance(l, int) or l < 1 for l in entry["alu_latencies"]):
            errors.append(f"cores[{i}].alu_latencies must be positive integers")
        norm_cores.append(entry)
    out["cores"] = norm_cores

    # memory
    mem = out.get("memory") or {}
    kind = mem.get("kind", "asynchronous")
    if kind not in MEMORY_KINDS:
        errors.append(f"memory.kind must be one of {MEMORY_KINDS}")
        kind = "asynchronous"
    default_lat = {"asynchronous": 0, "synchronous": 1, "off-chip": 4}[kind]
    latency = mem.get("latency", default_lat)
    if kind == "asynchronous" and latency != 0:
        errors.append("asynchronous memory has latency 0")
    if kind == "synchronous" and latency != 1:
        errors.append("synchronous memory has latency 1")
    if kind == "off-chip" and (not isinstance(latency, int) or latency < 2):
        errors.append("off-chip memory latency must be >= 2")
    address_bits = mem.get("address_bits", 16)
    if not isinstance(address_bits, int) or not 4 <= address_bits <= MAX_ADDRESS_BITS:
        errors.append(f"memory.address_bits must be in 4..{MAX_ADDRESS_BITS}")
        address_bits = 16
    layout = mem.get("layout", "separate")
    if layout not in ("unified", "separate"):
        errors.append("memory.layout must be 'unified' or 'separate'")
        layout = "separate"
    out["memory"] = {"kind": kind, "latency": latency,
                     "address_bits": address_bits, "layout": layout}

    # caches
    caches = out.get("caches")
    if caches is not None:
        if not isinstance(caches, dict):
            errors.append("caches must be an object or null")
            caches = {}
        norm = {}
        for level in ("l1i", "l1d", "l2"):
            norm[level] = _norm_cache(caches.get(level), DEFAULT_CACHE[level],
                                      errors, f"caches.{level}")
        per_core = caches.get("per_core") or {}
        norm_pc = {}
        for key, override in per_core.items():
            try:
                idx = int(key)
            except (TypeError, ValueError):
                errors.append(f"caches.per_core key {key!r} is not a core index")
                continue
            if not 0 <= idx < len(norm_cores):
                errors.append(f"caches.per_core[{key}] out of range")
                continue
            entry = {}
            for level in ("l1i", "l1d"):
                if level in override:
                    entry[level] = _norm_cache(override[level], norm[level],
                                               errors,
                                               f"caches.per_core.{key}.{level}")
            norm_pc[str(idx)] = entry
        if norm_pc:
            norm["per_core"] = norm_pc
        out["caches"] = norm
        if not errors:
            l2_words = 1 << norm["l2"]["offset_bits"]
            l1_capacity = 0
            for idx in range(len(norm_cores)):
                for level in ("l1i", "l1d"):
                    p = norm.get("per_core", {}).get(str(idx), {}).get(level) \
                        or norm[level]
                    l1_words = 1 << p["offset_bits"]
                    if l1_words > l2_words or l2_words % l1_words:
                        errors.append(
                            "caches.l2 line width must be a multiple of every "
                            f"L1 line width (core {idx} {level})")
                    l1_capacity += (1 << p["index_bits"]) * p["ways"] * 4 \
                        * l1_words
            l2_capacity = (1 << norm["l2"]["index_bits"]) * norm["l2"]["ways"] \
                * 4 * l2_words
            if l2_capacity < l1_capacity:
                warnings.append("L2 capacity below the combined L1 capacity; "
                                "inclusion back-invalidations will thrash")

    # interconnect
    inter = out.get("interconnect") or {"kind": "none"}
    ikind = inter.get("kind", "none")
    if ikind not in INTERCONNECTS:
        errors.append(f"interconnect.kind must be one of {INTERCONNECTS}")
        ikind = "none"
    norm_inter = {"kind": ikind}
    if ikind == "noc":
        norm_inter.update({
            "topology": inter.get("topology", "mesh"),
            "width": inter.get("width", 2),
            "height": inter.get("height", 2),
            "virtual_channels": inter.get("virtual_channels", 2),
            "vc_depth": inter.get("vc_depth", 4),
            "router": inter.get("router", "single-cycle"),
            "router_stages": inter.get("router_stages", 4),
            "routing": inter.get("routing", "dor"),
            "llc_node": inter.get("llc_node", 0),
        })
        if norm_inter["topology"] != "mesh":
            errors.append("distributed memory interconnect supports mesh "
                          "topologies")
        if norm_inter["routing"] == "dor" and norm_inter["topology"] != "mesh":
            errors.append("dimension-order routing requires a mesh")
        if norm_inter["router"] not in ("single-cycle", "pipelined"):
            errors.append("interconnect.router must be single-cycle or pipelined")
        w, h = norm_inter["width"], norm_inter["height"]
        if not (isinstance(w, int) and isinstance(h, int) and w >= 1 and h >= 1):
            errors.append("interconnect mesh width/height must be >= 1")
        elif not 0 <= norm_inter["llc_node"] < w * h:
            errors.append("interconnect.llc_node out of range")
        if norm_inter["virtual_channels"] < 1 or norm_inter["vc_depth"] < 1:
            errors.append("virtual_channels and vc_depth must be >= 1")
        if out["caches"] is None:
            errors.append("a NoC-attached memory system requires caches")
    out["interconnect"] = norm_inter

    # cross checks
    n = len(norm_cores)
    if n > 1:
        if out["caches"] is None:
            errors.append("multi-core systems share memory through the cache "
                          "hierarchy; caches are required")
        if ikind == "none":
            errors.append("multi-core systems need interconnect shared-bus "
                          "or noc")
    if out["caches"] is not None and ikind == "none":
        # single core with caches still uses the coherent hierarchy
        norm_inter["kind"] = "shared-bus"
        warnings.append("caches configured: interconnect promoted to "
                        "shared-bus")
    for c in norm_cores:
        if c["variant"] == "single-cycle" and kind != "asynchronous" \
                and out["caches"] is None:
            warnings.append("single-cycle core with synchronous or off-chip "
                            "memory inserts a bubble for every memory access")
            break
    if not isinstance(out.get("seed"), int):
        errors.append("seed must be an integer")
        out["seed"] = 0
    if not isinstance(out.get("max_cycles"), int) or out["max_cycles"] < 1:
        errors.append("max_cycles must be a positive integer")
        out["max_cycles"] = 50_000_000
    return out, errors, warnings


def validate_config(cfg):
    """(ok, errors, warnings) without building anything."""
    _, errors, warnings = normalize(cfg)
    return not errors, errors, warnings


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "SystemConfig",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "cores": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "variant": {"enum": list(VARIANTS)},
                    "queue_length": {"type": "integer", "minimum": 1},
                    "alu_latencies": {"type": "array",
                                      "items": {"type": "integer",
                                                "minimum": 1}},
                },
                "required": ["variant"],
            },
        },
        "memory": {
            "type": "object",
            "properties": {
                "kind": {"enum": list(MEMORY_KINDS)},
                "latency": {"type": "integer", "minimum": 0},
                "address_bits": {"type": "integer", "minimum": 4,
                                 "maximum": MAX_ADDRESS_BITS},
                "layout": {"enum": ["unified", "separate"]},
            },
        },
        "caches": {
            "type": ["object", "null"],
            "properties": {
                "l1i": {"$ref": "#/$defs/cache"},
                "l1d": {"$ref": "#/$defs/cache"},
                "l2": {"$ref": "#/$defs/cache"},
                "per_core": {"type": "object"},
            },
        },
        "interconnect": {
            "type": "object",
            "properties": {
                "kind": {"enum": list(INTERCONNECTS)},
                "topology": {"enum": ["mesh"]},
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
                "virtual_channels": {"type": "integer", "minimum": 1},
                "vc_depth": {"type": "integer", "minimum": 1},
                "router": {"enum": ["single-cycle", "pipelined"]},
                "router_stages": {"type": "integer", "minimum": 1},
                "routing": {"enum": ["dor", "table"]},
                "llc_node": {"type": "integer", "minimum": 0},
            },
        },
        "program": {"type": ["string", "null"]},
        "max_cycles": {"type": "integer", "minimum": 1},
    },
    "$defs": {
        "cache": {
            "type": "object",
            "properties": {
                "index_bits": {"type": "integer", "minimum": 0},
                "offset_bits": {"type": "integer", "minimum": 0},
                "ways": {"type": "integer", "minimum": 1},
                "replacement": {"enum": list(REPLACEMENTS)},
                "seed": {"type": "integer"},
            },
        },
    },
}
