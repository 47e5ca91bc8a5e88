#!/usr/bin/env python3
"""Record real API payloads as fixtures for the dashboard contract tests.

Run from the repository root (the aitotal package must be installed):

    python3 frontend/scripts/record_fixtures.py

Regenerates frontend/tests/fixtures/*.json from a seeded scenario served
by the actual backend, so the contract tests exercise genuine payloads.
"""
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from aitotal.config import ServiceConfig
from aitotal.core import ArtifactKind
from aitotal.service import create_app
from aitotal.simgen import FaultKind, FaultSpec, ScenarioSpec, generate, standard_engines

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

QUERY = {
    "source_feeds": [],
    "time_from": "2020-07-01",
    "time_to": "2020-07-30",
    "model_type": "Office",
    "model_versions": ["OFFICE_20200915"],
    "vendor_ids": ["vendor-alpha", "vendor-bravo", "vendor-charlie",
                   "vendor-delta", "vendor-echo", "rep-internal"],
    "threshold": None,
    "file_types_include": [],
    "scored_by_model_only": False,
    "min_coverage_pct": 0,
}


def main() -> None:
    spec = ScenarioSpec(
        seed=20200920, days=30, base_daily_volume=120, engines=standard_engines(),
        faults=[FaultSpec(FaultKind.VOLUME_SPIKE, 20, 29, 1.5,
                          target="Excel-OPC", target_kind=ArtifactKind.OFFICE)])
    lines, _ = generate(spec, "fixture-surge")

    with tempfile.TemporaryDirectory() as data_dir:
        config = ServiceConfig(data_dir=Path(data_dir), engines=spec.engines)
        with TestClient(create_app(config)) as client:
            ingest = client.post("/api/v1/ingest", content="\n".join(lines).encode())
            assert ingest.json()["rejected"] == 0

            fixtures = {
                "meta.json": client.get("/api/v1/meta"),
                "metrics.json": client.post("/api/v1/query/metrics", json=QUERY),
                "metrics_empty.json": client.post(
                    "/api/v1/query/metrics",
                    json=dict(QUERY, time_from="2031-01-01", time_to="2031-01-02")),
                "quality.json": client.post("/api/v1/query/quality", json=QUERY),
                "breakdown_family.json": client.post(
                    "/api/v1/query/breakdown",
                    json=dict(QUERY, group_by="family", sort_key="missed", descending=True)),
                "breakdown_filetype.json": client.post(
                    "/api/v1/query/breakdown",
                    json=dict(QUERY, group_by="filetype", sort_key="missed", descending=True)),
                "details.json": client.post(
                    "/api/v1/query/details",
                    json=dict(QUERY, element={"engine_id": "OFFICE_20200915", "metric": "FN"},
                              page=0, page_size=10)),
            }
            FIXTURES.mkdir(parents=True, exist_ok=True)
            for name, response in fixtures.items():
                assert response.status_code == 200, (name, response.text)
                (FIXTURES / name).write_text(
                    json.dumps(response.json(), indent=1, sort_keys=False) + "\n")
                print(f"wrote {name}")

            metrics = fixtures["metrics.json"].json()
            warnings = {e["engine_id"]: e["low_coverage_warning"] for e in metrics["engines"]}
            assert warnings["OFFICE_20200915"] is True, "fixture must carry a red-border case"
            assert not all(warnings.values()), "fixture must carry a no-warning case too"


if __name__ == "__main__":
    main()
