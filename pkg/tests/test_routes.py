import os
import sqlite3

import pytest
from fastapi.testclient import TestClient

from app import app
from routes.instances import ground_state_cache

TRACE = os.path.join(os.path.dirname(__file__), "fixtures", "cplex_n156_i0_trace.csv")


@pytest.fixture
def client(queue):
    ground_state_cache.clear()
    return TestClient(app)


@pytest.fixture
def generated(client):
    response = client.post("/api/instances/generate", json={"num_qubits": 8, "seed": 1})
    assert response.status_code == 200
    return response.json()


def test_health(client):
    assert client.get("/").json() == {"status": "HUBO Toolkit API is running"}


class TestInstances:
    def test_generate(self, generated):
        assert generated["instance"]["num_vars"] == 8
        assert generated["terms"]["linear"] == 8
        assert len(generated["digest"]) == 16
        assert generated["layout"]["num_qubits"] == 8

    def test_ground_state_is_cached(self, client, generated):
        first = client.post("/api/instances/ground_state", json={"instance": generated["instance"]}).json()
        second = client.post("/api/instances/ground_state", json={"instance": generated["instance"]}).json()
        assert first == second
        assert first["digest"] == generated["digest"]
        assert ground_state_cache.hits >= 1

    def test_ground_state_capacity(self, client):
        response = client.post("/api/instances/ground_state", json={"instance": {"num_vars": 40}})
        assert response.status_code == 413

    def test_energy(self, client):
        instance = {"num_vars": 2, "linear": [[0, 1.0]], "quadratic": [[0, 1, -2.0]]}
        response = client.post("/api/instances/energy", json={"instance": instance, "bitstring": "10"})
        assert response.status_code == 200
        # s = (-1, 1): -1 + 2
        assert response.json()["energy"] == pytest.approx(1.0)

    def test_energy_needs_exactly_one_configuration(self, client):
        instance = {"num_vars": 1}
        response = client.post("/api/instances/energy", json={"instance": instance, "bitstring": "1", "spins": [1]})
        assert response.status_code == 422

    def test_energy_dimension_error(self, client):
        response = client.post("/api/instances/energy", json={"instance": {"num_vars": 3}, "spins": [1, -1]})
        assert response.status_code == 400

    def test_malformed_instance(self, client):
        response = client.post("/api/instances/ground_state", json={"instance": {"linear": []}})
        assert response.status_code == 400


class TestSolvers:
    def test_sa(self, client, generated):
        response = client.post("/api/sa/solve", json={
            "instance": generated["instance"], "config": {"n_sweep": 50, "n_runs": 4, "seed": 0}})
        assert response.status_code == 200
        assert len(response.json()["per_run"]) == 4

    def test_bfdcqo_uses_layout_from_metadata(self, client, generated):
        config = {"n_iter": 1, "n_shots": 200, "n_cvar": 20, "n_sweep_pre": 10, "n_runs_pre": 2,
                  "n_sweep_post": 2, "seed": 3}
        response = client.post("/api/bfdcqo/run", json={"instance": generated["instance"], "config": config})
        assert response.status_code == 200
        body = response.json()
        assert len(body["iterations"]) == 2
        assert body["program"]["gates"] > 0

    def test_runtime(self, client):
        body = client.post("/api/bfdcqo/runtime", json={}).json()
        assert body["cpu_seconds"] == pytest.approx(0.612)
        assert body["qpu_seconds"] == pytest.approx(0.4)

    def test_invalid_config(self, client, generated):
        response = client.post("/api/bfdcqo/run", json={"instance": generated["instance"],
                                                        "config": {"n_shots": 10, "n_cvar": 50}})
        assert response.status_code == 422


class TestMip:
    def test_linearize(self, client, generated):
        body = client.post("/api/mip/linearize", json={"instance": generated["instance"]}).json()
        assert body["stats"]["originals"] == 8
        assert body["lp"].startswith("\\*")

    def test_tt_r_from_trace(self, client):
        with open(TRACE, encoding="utf-8") as f:
            text = f.read()
        body = client.post("/api/mip/tt_r", json={"trace": text, "e_ref": -454.0458, "poll_interval": 0.5}).json()
        assert body["seconds"] == pytest.approx(17.5)
        assert body["reached"]

    def test_tt_r_bad_trace(self, client):
        response = client.post("/api/mip/tt_r", json={"trace": "2.0,-1.0\n1.0,-2.0", "e_ref": -2.0})
        assert response.status_code == 400


class TestBench:
    def test_job_lifecycle(self, client, tmp_path):
        config = {"name": "route", "sizes": [6], "sa": {"n_sweep": 10, "n_runs": 2}, "reference_solver": "sa"}
        job = client.post("/api/bench/jobs", json={"config": config, "out_dir": str(tmp_path / "o")}).json()
        assert job["status"] == "queued"

        status = client.get("/api/bench/jobs/status").json()
        assert status["summary"]["queued"] == 1
        assert status["worker_mode"] == "running"
        assert client.get(f"/api/bench/jobs/{job['job_id']}").json()["suite"] == "route"
        assert client.get("/api/bench/jobs/9999").status_code == 404
        assert client.get("/api/bench/jobs/failures").json() == {"failures": []}

    def test_queue_errors_become_responses(self, client, queue, monkeypatch):
        def locked(*args, **kwargs):
            raise sqlite3.OperationalError("database is locked")

        monkeypatch.setattr(queue, "enqueue_suite", locked)
        monkeypatch.setattr(queue, "get_job", locked)
        config = {"name": "route", "sizes": [6], "reference_solver": "sa"}
        response = client.post("/api/bench/jobs", json={"config": config})
        assert response.status_code == 500
        assert response.json() == {"detail": "Internal server error."}
        assert client.get("/api/bench/jobs/1").status_code == 500

    def test_worker_mode(self, client):
        assert client.post("/api/bench/worker/mode", json={"mode": "draining", "reason": "deploy"}).json() == {
            "worker_mode": "draining"}
        body = client.get("/api/bench/worker/mode").json()
        assert body["worker_mode"] == "draining"
        assert body["last_mode_change"]["reason"] == "deploy"
        assert client.post("/api/bench/worker/mode", json={"mode": "sprinting"}).status_code == 422

    def test_hardness(self, client):
        body = client.post("/api/bench/hardness", json={
            "num_qubits": 6, "n_instances": 2, "sa": {"n_sweep": 50, "n_runs": 3}}).json()
        assert body["n_instances"] == 2
        assert set(body["bands"]) == {"0.99", "0.995", "0.999", "1"}
