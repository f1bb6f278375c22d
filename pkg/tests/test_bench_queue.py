import asyncio

from schemas.annealing import SaConfig
from schemas.bench import SuiteConfig
from services.bench_queue import (MAX_ATTEMPTS, bench_worker_loop, get_worker_mode, process_next_job,
                                  set_worker_mode)
from settings import BENCH_OUTPUT_DIR


def _tiny_suite(name: str = "tiny") -> SuiteConfig:
    return SuiteConfig(name=name, sizes=[6], solvers=["sa"], reference_solver="sa",
                       sa=SaConfig(n_sweep=20, n_runs=2), artifacts=False)


class TestJobs:
    def test_enqueue_and_claim(self, queue, tmp_path):
        job = queue.enqueue_suite(_tiny_suite(), str(tmp_path / "out"))
        assert job["status"] == "queued"
        claimed = queue.claim_jobs(limit=5)
        assert [c["id"] for c in claimed] == [job["job_id"]]
        assert claimed[0]["config"]["name"] == "tiny"
        assert queue.claim_jobs() == []
        assert queue.get_status_summary()["in_progress"] == 1

    def test_default_output_directory(self, queue):
        job = queue.enqueue_suite(_tiny_suite("desk"))
        assert job["out_dir"].startswith(BENCH_OUTPUT_DIR)
        assert job["out_dir"].endswith(f"desk_{job['job_id']}")

    def test_completion_is_recorded(self, queue, tmp_path):
        job_id = queue.enqueue_suite(_tiny_suite(), str(tmp_path / "out"))["job_id"]
        queue.claim_jobs()
        queue.mark_completed(job_id, {"records": 1})
        job = queue.get_job(job_id)
        assert job["status"] == "completed"
        assert job["result"] == {"records": 1}
        assert queue.get_job(job_id + 100) is None

    def test_requeued_job_waits(self, queue, tmp_path):
        job_id = queue.enqueue_suite(_tiny_suite(), str(tmp_path / "out"))["job_id"]
        queue.claim_jobs()
        queue.requeue_with_delay(job_id, attempts=1, error="boom", delay_seconds=60)
        assert queue.claim_jobs() == []
        assert queue.get_job(job_id)["attempts"] == 1

    def test_failures_listed(self, queue, tmp_path):
        job_id = queue.enqueue_suite(_tiny_suite(), str(tmp_path / "out"))["job_id"]
        queue.mark_failed(job_id, "bad trace")
        failures = queue.get_recent_jobs_by_status("failed")
        assert failures[0]["id"] == job_id and failures[0]["error"] == "bad trace"
        assert queue.get_recent_jobs_by_status("unknown") == []

    def test_purge_completed(self, queue, tmp_path):
        job_id = queue.enqueue_suite(_tiny_suite(), str(tmp_path / "out"))["job_id"]
        queue.mark_completed(job_id)
        assert queue.purge_completed_jobs(older_than_hours=0)["deleted"] == 1
        assert queue.get_status_summary()["total"] == 0


class TestWorkerMode:
    def test_default_and_audit(self, queue):
        assert get_worker_mode(queue) == "running"
        assert set_worker_mode("paused", actor="test", reason="maintenance", queue=queue) == "paused"
        assert get_worker_mode(queue) == "paused"
        last = queue.get_last_worker_mode_change()
        assert last["previous_mode"] == "running" and last["actor"] == "test"

    def test_unknown_mode_falls_back_to_running(self, queue):
        set_worker_mode("paused", queue=queue)
        assert set_worker_mode("sprinting", queue=queue) == "running"
        assert get_worker_mode(queue) == "running"


class TestProcessing:
    def test_runs_a_suite(self, queue, tmp_path):
        out = tmp_path / "out"
        job_id = queue.enqueue_suite(_tiny_suite(), str(out))["job_id"]
        assert asyncio.run(process_next_job(queue)) == job_id
        job = queue.get_job(job_id)
        assert job["status"] == "completed"
        assert job["result"]["records"] == 1
        assert (out / "records.csv").exists()
        assert job["result"]["out_dir"] == str(out)
        assert all(path.startswith(str(out)) for path in job["result"]["files"])
        assert not (tmp_path / "out.partial").exists()

    def test_timeout_never_publishes_output(self, queue, tmp_path):
        out = tmp_path / "out"
        job_id = queue.enqueue_suite(_tiny_suite(), str(out))["job_id"]
        assert asyncio.run(process_next_job(queue, timeout_seconds=0)) == job_id
        job = queue.get_job(job_id)
        assert job["status"] == "failed"
        assert "timeout" in job["error"]
        assert not out.exists()

    def test_nothing_queued(self, queue):
        assert asyncio.run(process_next_job(queue)) is None

    def test_error_requeues_then_fails(self, queue, tmp_path):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("")
        job_id = queue.enqueue_suite(_tiny_suite(), str(blocker))["job_id"]
        asyncio.run(process_next_job(queue))
        job = queue.get_job(job_id)
        assert job["status"] == "queued" and job["attempts"] == 1

        queue.requeue_with_delay(job_id, attempts=MAX_ATTEMPTS - 1, delay_seconds=1)
        with queue._connect() as conn:
            conn.execute("UPDATE bench_jobs SET available_at = '2000-01-01T00:00:00' WHERE id = ?", (job_id,))
            conn.commit()
        asyncio.run(process_next_job(queue))
        assert queue.get_job(job_id)["status"] == "failed"

    def test_draining_worker_pauses_when_idle(self, queue):
        set_worker_mode("draining", queue=queue)

        async def scenario():
            stop = asyncio.Event()
            task = asyncio.create_task(bench_worker_loop(stop, queue, idle_seconds=0.1))
            await asyncio.sleep(0.2)
            stop.set()
            await task

        asyncio.run(scenario())
        assert get_worker_mode(queue) == "paused"
