from fastapi import APIRouter, Request
from slowapi import Limiter
from slowapi.util import get_remote_address

from core.hubo import instance_from_dict
from core.topology import layout_for_instance, layout_from_dict
from schemas.annealing import SaResultSchema
from schemas.bfdcqo import BfDcqoConfig, BfDcqoResultSchema, BfDcqoRunRequest, RuntimeEstimate
from schemas.instances import SaSolveRequest
from services.annealing import anneal
from services.bfdcqo import run_bfdcqo, runtime_model
from settings import SOLVER_RATE_LIMIT
from utils.common import run_operation

router = APIRouter()
limiter = Limiter(key_func=get_remote_address)


def _solve_sa(data: SaSolveRequest) -> dict:
    return anneal(instance_from_dict(data.instance), data.config).to_dict()


def _run_bfdcqo(data: BfDcqoRunRequest) -> dict:
    inst = instance_from_dict(data.instance)
    layout = layout_from_dict(data.layout) if data.layout else layout_for_instance(inst)
    return run_bfdcqo(inst, layout, data.config).to_dict()


@router.post('/api/sa/solve', response_model=SaResultSchema)
@limiter.limit(SOLVER_RATE_LIMIT)
async def api_solve_sa(request: Request, data: SaSolveRequest):
    return await run_operation(_solve_sa, data)


@router.post('/api/bfdcqo/run', response_model=BfDcqoResultSchema)
@limiter.limit(SOLVER_RATE_LIMIT)
async def api_run_bfdcqo(request: Request, data: BfDcqoRunRequest):
    return await run_operation(_run_bfdcqo, data)


@router.post('/api/bfdcqo/runtime', response_model=RuntimeEstimate)
async def api_bfdcqo_runtime(cfg: BfDcqoConfig):
    """Modeled CPU and QPU seconds for a configuration."""
    t_cpu, t_qpu, total = runtime_model(cfg)
    return RuntimeEstimate(cpu_seconds=t_cpu, qpu_seconds=t_qpu, total_seconds=total)
