from fastapi import APIRouter, HTTPException

from schemas.bench import BenchJobRequest, HardnessRequest, WorkerModeRequest
from services.bench import hardness_screen
from services.bench_queue import get_bench_queue, get_worker_mode, set_worker_mode
from utils.common import run_operation

router = APIRouter()


@router.post('/api/bench/jobs')
async def api_enqueue_suite(data: BenchJobRequest):
    return await run_operation(get_bench_queue().enqueue_suite, data.config, data.out_dir)


@router.get('/api/bench/jobs/status')
async def api_bench_status():
    queue = get_bench_queue()
    return {
        "summary": queue.get_status_summary(),
        "worker_mode": get_worker_mode(queue),
        "last_mode_change": queue.get_last_worker_mode_change(),
    }


@router.get('/api/bench/jobs/failures')
async def api_bench_failures(limit: int = 10):
    return {"failures": get_bench_queue().get_recent_jobs_by_status("failed", limit=limit)}


@router.get('/api/bench/jobs/{job_id}')
async def api_bench_job(job_id: int):
    job = await run_operation(get_bench_queue().get_job, job_id)
    if job is None:
        raise HTTPException(status_code=404, detail="Job not found.")
    return job


@router.get('/api/bench/worker/mode')
async def api_get_worker_mode():
    queue = get_bench_queue()
    return {"worker_mode": get_worker_mode(queue), "last_mode_change": queue.get_last_worker_mode_change()}


@router.post('/api/bench/worker/mode')
async def api_set_worker_mode(data: WorkerModeRequest):
    mode = await run_operation(set_worker_mode, data.mode, actor="api", reason=data.reason or "")
    return {"worker_mode": mode}


@router.post('/api/bench/hardness')
async def api_hardness(data: HardnessRequest):
    report = await run_operation(hardness_screen, data.generator, data.n_instances, data.sa, data.num_qubits,
                                 data.seed)
    return report.to_dict()
