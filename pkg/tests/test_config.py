"""Configuration validation rules."""

from rvsim.system.config import normalize, validate_config


def test_minimal_single_cycle_async_ok():
    ok, errors, warnings = validate_config({
        "cores": [{"variant": "single-cycle"}],
        "memory": {"kind": "asynchronous"},
    })
    assert ok and not errors


def test_negative_offset_bits_rejected():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "seven-stage"}],
        "caches": {"l1d": {"offset_bits": -1}},
    })
    assert not ok
    assert any("offset_bits" in e for e in errors)


def test_multicore_without_caches_rejected():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "seven-stage"}] * 4,
        "interconnect": {"kind": "shared-bus"},
    })
    assert not ok
    assert any("caches are required" in e for e in errors)


def test_multicore_without_interconnect_rejected():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "seven-stage"}] * 2,
        "caches": {},
        "interconnect": {"kind": "none"},
    })
    assert not ok


def test_single_cycle_sync_warns_about_nops():
    ok, errors, warnings = validate_config({
        "cores": [{"variant": "single-cycle"}],
        "memory": {"kind": "synchronous"},
    })
    assert ok
    assert any("bubble" in w for w in warnings)


def test_memory_latency_must_match_kind():
    for kind, bad in (("asynchronous", 1), ("synchronous", 0), ("off-chip", 1)):
        ok, errors, _ = validate_config({
            "cores": [{"variant": "single-cycle"}],
            "memory": {"kind": kind, "latency": bad},
        })
        assert not ok, kind


def test_l2_line_width_must_cover_l1():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "seven-stage"}],
        "caches": {"l1d": {"offset_bits": 3}, "l2": {"offset_bits": 2}},
    })
    assert not ok
    assert any("multiple" in e for e in errors)


def test_caches_promote_interconnect_to_shared_bus():
    resolved, errors, warnings = normalize({
        "cores": [{"variant": "seven-stage"}],
        "caches": {},
    })
    assert not errors
    assert resolved["interconnect"]["kind"] == "shared-bus"


def test_noc_requires_caches():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "seven-stage"}],
        "interconnect": {"kind": "noc", "width": 2, "height": 2},
    })
    assert not ok


def test_unknown_fields_warn_not_fail():
    ok, errors, warnings = validate_config({
        "cores": [{"variant": "single-cycle"}],
        "wibble": 3,
    })
    assert ok
    assert any("wibble" in w for w in warnings)


def test_ooo_params_validated():
    ok, errors, _ = validate_config({
        "cores": [{"variant": "ooo", "queue_length": 0}],
    })
    assert not ok


def test_per_core_cache_overrides():
    resolved, errors, _ = normalize({
        "cores": [{"variant": "seven-stage"}, {"variant": "seven-stage"}],
        "caches": {"per_core": {"1": {"l1d": {"ways": 8}}}},
        "interconnect": {"kind": "shared-bus"},
    })
    assert not errors
    assert resolved["caches"]["per_core"]["1"]["l1d"]["ways"] == 8
    assert resolved["caches"]["l1d"]["ways"] == 4
