from fastapi import APIRouter

from core.hubo import (as_spins, bitstring, brute_force_ground_state, energy, instance_digest, instance_from_dict,
                       instance_to_dict, spins_from_bitstring)
from core.topology import layout_to_dict, term_counts
from schemas.instances import EnergyRequest, GenerateRequest, InstanceRequest
from services.bench import generate_instance
from utils.common import run_operation
from utils.ttl_cache import TTLCache

router = APIRouter()

ground_state_cache = TTLCache(default_ttl_seconds=3600, max_items=128)


def _generate(data: GenerateRequest) -> dict:
    inst, layout = generate_instance(data.generator, data.num_qubits, data.seed)
    return {
        "instance": instance_to_dict(inst),
        "layout": layout_to_dict(layout),
        "digest": instance_digest(inst),
        "terms": term_counts(inst),
    }


def _ground_state(instance: dict) -> dict:
    inst = instance_from_dict(instance)

    def compute():
        spins, value = brute_force_ground_state(inst)
        return {"energy": value, "bitstring": bitstring(spins)}

    digest = instance_digest(inst)
    return {"digest": digest, **ground_state_cache.get_or_compute(digest, compute)}


def _energy(data: EnergyRequest) -> dict:
    inst = instance_from_dict(data.instance)
    spins = spins_from_bitstring(data.bitstring) if data.bitstring is not None else as_spins(data.spins, inst.num_vars)
    return {"energy": energy(inst, spins), "bitstring": bitstring(spins)}


@router.post('/api/instances/generate')
async def api_generate_instance(data: GenerateRequest):
    """Heavy-hex layout plus sampled coefficients."""
    return await run_operation(_generate, data)


@router.post('/api/instances/ground_state')
async def api_ground_state(data: InstanceRequest):
    return await run_operation(_ground_state, data.instance)


@router.post('/api/instances/energy')
async def api_energy(data: EnergyRequest):
    return await run_operation(_energy, data)
