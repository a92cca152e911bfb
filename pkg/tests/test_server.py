"""HTTP API behavior via the in-process test client."""

import time

import pytest
from fastapi.testclient import TestClient

from rvsim.system.server import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


CFG = {
    "cores": [{"variant": "five-stage-bypass"}],
    "memory": {"kind": "asynchronous", "address_bits": 17},
    "seed": 3,
}


def _wait_run(client, run_id, timeout=60):
    deadline = time.time() + timeout
    while time.time() < deadline:
        r = client.get(f"/api/runs/{run_id}").json()
        if r["status"] not in ("queued", "running"):
            return r
        time.sleep(0.05)
    raise AssertionError("run did not finish")


def test_schema_endpoint(client):
    r = client.get("/api/schema")
    assert r.status_code == 200
    body = r.json()
    assert "config_schema" in body and "stats_schema" in body
    assert body["config_schema"]["title"] == "SystemConfig"


def test_validate_endpoint(client):
    r = client.post("/api/validate", json=CFG)
    assert r.status_code == 200 and r.json()["ok"]
    bad = client.post("/api/validate", json={"cores": []})
    assert bad.status_code == 200 and not bad.json()["ok"]
    assert bad.json()["errors"]


def test_benchmarks_endpoint(client):
    names = [b["name"] for b in client.get("/api/benchmarks").json()]
    assert "factorial" in names and "prime" in names


def test_run_lifecycle_with_benchmark(client):
    r = client.post("/api/runs", json={"config": CFG, "program": "bench:factorial"})
    assert r.status_code == 200
    run_id = r.json()["id"]
    final = _wait_run(client, run_id)
    assert final["status"] == "completed"
    assert final["report"]["derived"]["final_a0"] == [3628800]
    assert final["report"]["stats_version"] == 1
    listing = client.get("/api/runs").json()
    assert any(e["id"] == run_id for e in listing)


def test_trace_pagination(client):
    r = client.post("/api/runs", json={"config": CFG, "program": "bench:factorial"})
    run_id = r.json()["id"]
    _wait_run(client, run_id)
    page = client.get(f"/api/runs/{run_id}/trace",
                      params={"start": 0, "count": 5}).json()
    assert len(page["records"]) == 5
    assert page["records"][0]["pc"] == 0
    text = client.get(f"/api/runs/{run_id}/trace",
                      params={"start": 0, "count": 2, "fmt": "text"}).json()
    assert text["text"].startswith("pc=00000000")


def test_invalid_config_rejected(client):
    r = client.post("/api/runs", json={"config": {"cores": []},
                                       "program": "bench:factorial"})
    assert r.status_code == 422


def test_unknown_run_404(client):
    assert client.get("/api/runs/doesnotexist").status_code == 404


def test_uploaded_vmh(client):
    from rvsim.system.benchmarks import build_benchmark
    from rvsim.vmh import emit_vmh
    vmh = emit_vmh(build_benchmark("prime"))
    r = client.post("/api/runs", json={"config": CFG, "vmh": vmh})
    run_id = r.json()["id"]
    final = _wait_run(client, run_id)
    assert final["report"]["derived"]["final_a0"] == [25]


def test_deterministic_reruns_same_metrics(client):
    ids = []
    for _ in range(2):
        r = client.post("/api/runs",
                        json={"config": CFG, "program": "bench:prime"})
        ids.append(r.json()["id"])
    reports = [_wait_run(client, i)["report"] for i in ids]
    for rep in reports:
        rep.pop("meta", None)
    assert reports[0] == reports[1]


def test_trace_from_alias(client):
    r = client.post("/api/runs", json={"config": CFG, "program": "bench:factorial"})
    run_id = r.json()["id"]
    _wait_run(client, run_id)
    a = client.get(f"/api/runs/{run_id}/trace", params={"from": 10, "count": 3}).json()
    b = client.get(f"/api/runs/{run_id}/trace", params={"start": 10, "count": 3}).json()
    assert a["records"] == b["records"] and len(a["records"]) == 3
