from fastapi import APIRouter

from core.hubo import instance_from_dict
from schemas.mip import LinearizeRequest, TtrRequest
from services.bench import tt_r
from services.mip_bridge import first_time_at_or_below, linearize, lp_text, model_stats, parse_trace, resample_trace
from utils.common import run_operation

router = APIRouter()


def _linearize(data: LinearizeRequest) -> dict:
    model = linearize(instance_from_dict(data.instance), data.aux_policy)
    result = {"stats": model_stats(model), "variables": model.variables}
    if data.include_lp:
        result["lp"] = lp_text(model)
    return result


def _tt_r(data: TtrRequest) -> dict:
    trace = parse_trace(data.trace.splitlines())
    points = resample_trace(trace.points, data.poll_interval) if data.poll_interval else trace.points
    if data.e_ref is not None:
        seconds = first_time_at_or_below(points, data.e_ref)
    else:
        seconds = tt_r(points, data.target_ratio, data.e_gs)
    return {"seconds": seconds, "reached": seconds is not None, "proven_optimal": trace.proven_optimal,
            "points": len(points)}


@router.post('/api/mip/linearize')
async def api_linearize(data: LinearizeRequest):
    return await run_operation(_linearize, data)


@router.post('/api/mip/tt_r')
async def api_tt_r(data: TtrRequest):
    """Time to reach an energy level (or ratio target) in an uploaded incumbent trace."""
    return await run_operation(_tt_r, data)
