import asyncio
import json
import logging
import os
import shutil
import sqlite3
from datetime import datetime, timedelta
from threading import Lock
from typing import Any, Dict, List, Optional, Sequence

from schemas.bench import SuiteConfig
from services.bench import run_suite
from settings import BENCH_OUTPUT_DIR, BENCH_QUEUE_PATH, BENCH_TASK_TIMEOUT_SECONDS

MAX_ATTEMPTS = 3
WORKER_MODES = ("running", "draining", "paused")
JOB_STATUSES = ("queued", "in_progress", "completed", "failed")

_SCHEMA = (
    """CREATE TABLE IF NOT EXISTS bench_jobs (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        suite_name TEXT NOT NULL,
        config_json TEXT NOT NULL,
        out_dir TEXT,
        source TEXT,
        status TEXT NOT NULL,
        attempts INTEGER NOT NULL DEFAULT 0,
        last_error TEXT,
        result_json TEXT,
        available_at TEXT NOT NULL,
        created_at TEXT NOT NULL,
        updated_at TEXT NOT NULL)""",
    "CREATE INDEX IF NOT EXISTS idx_bench_jobs_pick ON bench_jobs(status, available_at, updated_at)",
    """CREATE TABLE IF NOT EXISTS worker_mode_audit (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        previous_mode TEXT,
        new_mode TEXT NOT NULL,
        actor TEXT,
        reason TEXT,
        changed_at TEXT NOT NULL)""",
)

_AUDIT_KEYS = ("previous_mode", "new_mode", "actor", "reason", "changed_at")


def _utc_iso(offset_seconds: float = 0.0) -> str:
    return (datetime.utcnow() + timedelta(seconds=offset_seconds)).isoformat()


def _clip(text: Optional[str], limit: int = 2000) -> str:
    return (text or "")[:limit]


class BenchJobQueue:
    """
    Durable queue of benchmark suites in a WAL-mode sqlite file.

    A job moves queued -> in_progress -> completed | failed; a failed attempt
    goes back to queued with a later `available_at`. The worker-mode audit
    table lives in the same file so the API and worker processes share it.
    """

    def __init__(self, db_path: str):
        self.db_path = db_path
        os.makedirs(os.path.dirname(db_path) or ".", exist_ok=True)
        with self._connect() as conn:
            for statement in _SCHEMA:
                conn.execute(statement)
            conn.commit()

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        conn.execute("PRAGMA journal_mode=WAL;")
        conn.execute("PRAGMA busy_timeout=5000;")
        return conn

    def _write(self, sql: str, params: Sequence[Any]) -> sqlite3.Cursor:
        with self._connect() as conn:
            cursor = conn.execute(sql, tuple(params))
            conn.commit()
        return cursor

    def _read(self, sql: str, params: Sequence[Any] = ()) -> List[sqlite3.Row]:
        with self._connect() as conn:
            return conn.execute(sql, tuple(params)).fetchall()

    # --- Jobs ---

    def enqueue_suite(self, config: SuiteConfig, out_dir: Optional[str] = None, source: str = "api") -> Dict[str, Any]:
        now = _utc_iso()
        cursor = self._write(
            "INSERT INTO bench_jobs (suite_name, config_json, out_dir, source, status, attempts, "
            "available_at, created_at, updated_at) VALUES (?, ?, ?, ?, 'queued', 0, ?, ?, ?)",
            (config.name, config.model_dump_json(), out_dir, source, now, now, now),
        )
        job_id = int(cursor.lastrowid)
        if out_dir is None:
            out_dir = os.path.join(BENCH_OUTPUT_DIR, f"{config.name}_{job_id}")
            self._write("UPDATE bench_jobs SET out_dir = ? WHERE id = ?", (out_dir, job_id))
        logging.info(f"Queued suite '{config.name}' as job {job_id} -> {out_dir}")
        return {"job_id": job_id, "status": "queued", "out_dir": out_dir}

    def claim_jobs(self, limit: int = 1) -> List[Dict[str, Any]]:
        """Moves up to `limit` due jobs to in_progress, oldest first."""
        now = _utc_iso()
        with self._connect() as conn:
            conn.execute("BEGIN IMMEDIATE")
            rows = conn.execute(
                "SELECT id, config_json, out_dir, attempts FROM bench_jobs "
                "WHERE status = 'queued' AND available_at <= ? ORDER BY updated_at ASC, id ASC LIMIT ?",
                (now, max(1, limit)),
            ).fetchall()
            ids = [int(row["id"]) for row in rows]
            conn.executemany("UPDATE bench_jobs SET status = 'in_progress', updated_at = ? WHERE id = ?",
                             [(now, job_id) for job_id in ids])
            conn.commit()
        return [{"id": int(row["id"]), "config": json.loads(row["config_json"]), "out_dir": row["out_dir"],
                 "attempts": int(row["attempts"])} for row in rows]

    def mark_completed(self, job_id: int, result: Optional[Dict[str, Any]] = None) -> None:
        self._write("UPDATE bench_jobs SET status = 'completed', updated_at = ?, last_error = NULL, result_json = ? "
                    "WHERE id = ?", (_utc_iso(), json.dumps(result or {}), int(job_id)))

    def mark_failed(self, job_id: int, error: str) -> None:
        self._write("UPDATE bench_jobs SET status = 'failed', updated_at = ?, last_error = ? WHERE id = ?",
                    (_utc_iso(), _clip(error), int(job_id)))

    def requeue_with_delay(self, job_id: int, attempts: int, error: str = "", delay_seconds: int = 20) -> None:
        self._write(
            "UPDATE bench_jobs SET status = 'queued', attempts = ?, available_at = ?, updated_at = ?, last_error = ? "
            "WHERE id = ?",
            (max(0, int(attempts)), _utc_iso(max(1, delay_seconds)), _utc_iso(), _clip(error), int(job_id)),
        )

    def get_job(self, job_id: int) -> Optional[Dict[str, Any]]:
        rows = self._read("SELECT id, suite_name, out_dir, status, attempts, last_error, result_json, updated_at "
                          "FROM bench_jobs WHERE id = ?", (int(job_id),))
        if not rows:
            return None
        row = rows[0]
        return {
            "id": int(row["id"]),
            "suite": row["suite_name"],
            "out_dir": row["out_dir"],
            "status": row["status"],
            "attempts": int(row["attempts"]),
            "error": row["last_error"] or "",
            "result": json.loads(row["result_json"]) if row["result_json"] else None,
            "updated_at": row["updated_at"] or "",
        }

    def get_status_summary(self) -> Dict[str, int]:
        counts = {row["status"]: int(row["n"]) for row in
                  self._read("SELECT status, COUNT(*) AS n FROM bench_jobs GROUP BY status")}
        summary = {status: counts.get(status, 0) for status in JOB_STATUSES}
        summary["total"] = sum(counts.values())
        return summary

    def get_recent_jobs_by_status(self, status: str, limit: int = 10) -> List[Dict[str, Any]]:
        wanted = str(status or "").strip().lower()
        if wanted not in JOB_STATUSES:
            return []
        rows = self._read("SELECT id, suite_name, attempts, last_error, updated_at FROM bench_jobs WHERE status = ? "
                          "ORDER BY updated_at DESC, id DESC LIMIT ?", (wanted, max(1, min(50, int(limit)))))
        return [{"id": int(row["id"]), "suite": row["suite_name"], "attempts": int(row["attempts"]),
                 "error": row["last_error"] or "", "updated_at": row["updated_at"] or "", "status": wanted}
                for row in rows]

    def purge_completed_jobs(self, older_than_hours: int = 24) -> Dict[str, int]:
        hours = max(0, int(older_than_hours))
        cursor = self._write("DELETE FROM bench_jobs WHERE status = 'completed' AND updated_at <= ?",
                             (_utc_iso(-hours * 3600),))
        return {"deleted": int(cursor.rowcount), "older_than_hours": hours}

    # --- Worker mode ---

    def insert_worker_mode_audit(self, previous_mode: str, new_mode: str, actor: str = "system", reason: str = "") -> None:
        self._write("INSERT INTO worker_mode_audit (previous_mode, new_mode, actor, reason, changed_at) "
                    "VALUES (?, ?, ?, ?, ?)",
                    (previous_mode or None, new_mode, _clip(actor or "system", 120), _clip(reason, 500), _utc_iso()))

    def get_last_worker_mode_change(self) -> Dict[str, str]:
        rows = self._read(f"SELECT {', '.join(_AUDIT_KEYS)} FROM worker_mode_audit ORDER BY id DESC LIMIT 1")
        return {key: str(rows[0][key] or "") for key in _AUDIT_KEYS} if rows else {}


_queue: Optional[BenchJobQueue] = None
_queue_lock = Lock()
_worker_state_lock = Lock()


def get_bench_queue() -> BenchJobQueue:
    global _queue
    with _queue_lock:
        if _queue is None:
            _queue = BenchJobQueue(BENCH_QUEUE_PATH)
        return _queue


def use_bench_queue(queue: Optional[BenchJobQueue]) -> None:
    global _queue
    with _queue_lock:
        _queue = queue


def get_worker_mode(queue: Optional[BenchJobQueue] = None) -> str:
    last = (queue or get_bench_queue()).get_last_worker_mode_change()
    return last.get("new_mode") or "running"


def set_worker_mode(new_mode: str, actor: str = "system", reason: str = "",
                    queue: Optional[BenchJobQueue] = None) -> str:
    queue = queue or get_bench_queue()
    normalized_mode = str(new_mode or "running").strip().lower()
    if normalized_mode not in WORKER_MODES:
        normalized_mode = "running"

    with _worker_state_lock:
        previous_mode = get_worker_mode(queue)
        if previous_mode != normalized_mode:
            queue.insert_worker_mode_audit(previous_mode, normalized_mode, actor=actor, reason=reason)
    return normalized_mode


def _staging_dir(out_dir: str) -> str:
    return out_dir.rstrip(os.sep) + ".partial"


def _publish(staging: str, out_dir: str, result: Dict[str, Any]) -> Dict[str, Any]:
    """Moves a finished suite from its staging directory to `out_dir`."""
    if os.path.isdir(out_dir):
        shutil.rmtree(out_dir)
    os.replace(staging, out_dir)
    files = [os.path.join(out_dir, os.path.relpath(path, staging)) for path in result.get("files", [])]
    return {**result, "out_dir": out_dir, "files": files}


async def process_next_job(queue: BenchJobQueue, timeout_seconds: int = BENCH_TASK_TIMEOUT_SECONDS) -> Optional[int]:
    """
    Claims and runs one suite; returns its job id, or None when nothing was queued.

    The suite writes into `<out_dir>.partial` and is renamed to `out_dir` only
    on success. A timed-out run keeps writing into the staging directory.
    """
    claimed = queue.claim_jobs(limit=1)
    if not claimed:
        return None
    job = claimed[0]
    job_id = job["id"]
    staging = _staging_dir(job["out_dir"])
    try:
        config = SuiteConfig.model_validate(job["config"])
        shutil.rmtree(staging, ignore_errors=True)
        result = await asyncio.wait_for(
            asyncio.to_thread(run_suite, config, staging),
            timeout=timeout_seconds,
        )
        result = _publish(staging, job["out_dir"], result)
    except asyncio.TimeoutError:
        logging.warning(f"Bench job {job_id} TIMEOUT after {timeout_seconds}s")
        queue.mark_failed(job_id, f"Task timeout after {timeout_seconds} seconds; partial output left in {staging}")
        return job_id
    except Exception as task_error:
        logging.error(f"Bench job {job_id} ERROR: {task_error}", exc_info=True)
        attempts = job["attempts"] + 1
        if attempts >= MAX_ATTEMPTS:
            queue.mark_failed(job_id, str(task_error))
        else:
            queue.requeue_with_delay(job_id, attempts=attempts, error=str(task_error)[:200], delay_seconds=20)
        return job_id

    queue.mark_completed(job_id, result)
    logging.info(f"Bench job {job_id} completed: {result.get('records', 0)} records in {job['out_dir']}")
    return job_id


async def bench_worker_loop(stop_event: asyncio.Event, queue: Optional[BenchJobQueue] = None,
                            idle_seconds: float = 2.0):
    """Claims queued suites one at a time until `stop_event` is set."""
    queue = queue or get_bench_queue()
    while not stop_event.is_set():
        try:
            mode = get_worker_mode(queue)

            if mode == "paused":
                await asyncio.sleep(1)
                continue

            if mode == "draining":
                # Graceful drain: no new claims; pause once nothing is in progress.
                if int(queue.get_status_summary().get("in_progress", 0)) <= 0:
                    set_worker_mode("paused", actor="system", reason="drain completed", queue=queue)
                await asyncio.sleep(1)
                continue

            if await process_next_job(queue) is None:
                await asyncio.sleep(idle_seconds)

        except Exception as e:
            logging.error(f"Bench queue worker error: {e}", exc_info=True)
            await asyncio.sleep(3)
