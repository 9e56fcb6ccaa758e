"""HTTP service tests over the in-process test client."""
import pytest
from fastapi.testclient import TestClient

from test_config import MINIMAL_GAUSSIAN, discrete_config_dict, simulate_config_dict
from twdp.service import app

client = TestClient(app, raise_server_exceptions=False)


class TestHealth:
    def test_healthz(self):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"


class TestGaussianEndpoint:
    def test_symmetric_unit_rates(self):
        resp = client.post("/gaussian", json={"config": MINIMAL_GAUSSIAN})
        assert resp.status_code == 200
        body = resp.json()
        assert body["gp_rate"]["r1"] == pytest.approx(0.5, abs=1e-9)
        assert body["gp_rate"]["r2"] == pytest.approx(0.5, abs=1e-9)
        assert body["capacity_gap"] < 1e-9

    def test_invalid_config_maps_to_400_exit_1(self):
        bad = dict(MINIMAL_GAUSSIAN, rho_s=1.5)
        resp = client.post("/gaussian", json={"config": bad})
        assert resp.status_code == 400
        detail = resp.json()["detail"]
        assert detail["exit_code"] == 1
        assert "rho_s" in detail["error"]

    def test_kind_mismatch_rejected(self):
        resp = client.post("/gaussian", json={"config": discrete_config_dict()})
        assert resp.status_code == 400
        assert resp.json()["detail"]["exit_code"] == 1


class TestRegionEndpoint:
    def test_region_with_overrides(self):
        resp = client.post("/region", json={
            "config": discrete_config_dict(),
            "grid_step": 0.5,
            "convexify": True,
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["num_points"] == len(body["points"])
        best = max(p["r1"] for p in body["frontier"])
        assert best == pytest.approx(1.0, abs=1e-9)
        assert body["convex_hull"] is not None

    def test_hull_omitted_without_flag(self):
        resp = client.post("/region", json={"config": discrete_config_dict()})
        assert resp.status_code == 200
        assert "convex_hull" not in resp.json()

    def test_budget_cap_maps_to_400(self):
        resp = client.post("/region", json={
            "config": discrete_config_dict(),
            "grid_step": 0.05,
            "max_pairs": 10,
        })
        assert resp.status_code == 400
        assert "policy pairs" in resp.json()["detail"]["error"]


class TestSimulateEndpoint:
    def test_simulate_report(self):
        resp = client.post("/simulate", json={"config": simulate_config_dict()})
        assert resp.status_code == 200
        body = resp.json()
        assert [run["n"] for run in body["runs"]] == [8, 12]
        for run in body["runs"]:
            assert 0.0 <= run["p_err1"] <= 1.0

    def test_trials_override_zero_rejected(self):
        resp = client.post("/simulate", json={
            "config": simulate_config_dict(),
            "trials": 0,
        })
        assert resp.status_code == 400
        assert resp.json()["detail"]["exit_code"] == 1

    def test_seed_override_changes_echo(self):
        resp = client.post("/simulate", json={
            "config": simulate_config_dict(),
            "seed": 1234,
        })
        assert resp.status_code == 200
        assert resp.json()["seed"] == 1234


class TestVerifyEndpoint:
    def test_gaussian_properties_all_pass(self):
        resp = client.post("/verify", json={"config": MINIMAL_GAUSSIAN})
        assert resp.status_code == 200
        body = resp.json()
        assert body["all_passed"] is True
        names = {prop["name"] for prop in body["properties"]}
        assert "entropy_identity" in names
        assert "dirty_paper_equivalence" in names

    def test_discrete_properties_all_pass(self):
        resp = client.post("/verify", json={"config": discrete_config_dict()})
        assert resp.status_code == 200
        assert resp.json()["all_passed"] is True

    def test_simulate_properties_all_pass(self):
        resp = client.post("/verify", json={"config": simulate_config_dict()})
        assert resp.status_code == 200
        assert resp.json()["all_passed"] is True
