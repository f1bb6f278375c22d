"""
Benchmark harness: approximation ratios, time-to-ratio bookkeeping, SA
hardness screens and suite runs that emit record tables and artifacts.
"""
import logging
import os
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from core.hubo import (HuboInstance, approximation_ratio, bitstring, brute_force_ground_state, instance_digest,
                       instance_from_dict, instance_to_dict, is_comparable, save_instance, spins_from_bitstring)
from core.sampler import CoefficientSampler, spawn_seeds
from core.topology import (CouplingMap, LayoutPlan, generate_layout, heavy_hex, heavy_hex_patch, heron_r2,
                           instantiate, layout_from_dict, layout_to_dict, save_layout, term_counts)
from schemas.annealing import SaConfig
from schemas.bench import GeneratorConfig, SuiteConfig
from schemas.bfdcqo import BfDcqoConfig
from services.annealing import anneal
from services.bfdcqo import run_bfdcqo
from services.mip_bridge import (export_lp, export_warm_start, first_time_at_or_below, linearize, read_trace,
                                 resample_trace, write_trace)
from settings import BRUTE_FORCE_MAX_VARS
from utils.tables import ensure_dir, write_csv, write_json

HARDNESS_BANDS = (0.99, 0.995, 0.999, 1.0)
_RATIO_TOLERANCE = 1e-12
_ENERGY_TOLERANCE = 1e-9

Trace = Sequence[Tuple[float, float]]


# --- Metrics ---


def tt_r(trace: Trace, target_r: float, e_gs: float) -> Optional[float]:
    """Earliest trace time with E/E_GS >= target_r; None when never reached."""
    for t, e in trace:
        if approximation_ratio(e, e_gs) >= target_r - _RATIO_TOLERANCE:
            return float(t)
    return None


def time_to_energy(trace: Trace, e_ref: float) -> Optional[float]:
    return first_time_at_or_below(trace, e_ref)


def enhancement_factor(tt_reference: Optional[float], tt_subject: Optional[float]) -> Optional[float]:
    if tt_reference is None or tt_subject is None:
        return None
    if tt_subject <= 0.0:
        raise ValueError(f"Subject time must be positive, got {tt_subject}")
    return tt_reference / tt_subject


# --- Instance generation ---

def coupling_map_for(gen: GeneratorConfig, num_qubits: int) -> CouplingMap:
    if gen.topology == "patch":
        return heavy_hex_patch(num_qubits)
    if gen.topology == "heron":
        return heron_r2()
    return heavy_hex(gen.rows, gen.cols, gen.full_lines)


def generate_instance(gen: GeneratorConfig, num_qubits: int, seed: Optional[int]) -> Tuple[HuboInstance, LayoutPlan]:
    layout = generate_layout(coupling_map_for(gen, num_qubits), gen.n, gen.s2q, gen.s3q)
    sampler = CoefficientSampler(kind=gen.distribution, alpha=gen.alpha, truncation=gen.truncation,
                                 seed=seed, value=gen.value)
    return instantiate(layout, sampler, seed), layout


# --- Hardness screening ---

@dataclass
class HardnessReport:
    n_instances: int
    bands: Dict[str, int]
    failed: int
    ratios: List[Optional[float]] = field(default_factory=list)
    skipped: int = 0
    generator: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_instances": self.n_instances,
            "bands": self.bands,
            "failed": self.failed,
            "skipped": self.skipped,
            "ratios": self.ratios,
            "generator": self.generator,
        }


def _band_label(band: float) -> str:
    return "1" if band == 1.0 else f"{band:g}"


def hardness_screen(generator: GeneratorConfig, n_instances: int, sa_cfg: SaConfig, num_qubits: int = 16,
                    seed: int = 0) -> HardnessReport:
    """
    SA at a fixed sweep count against the brute-force optimum. An instance is in
    the =1 band when at least one run reaches E_GS; lower bands are nested.
    """
    bands = {_band_label(b): 0 for b in HARDNESS_BANDS}
    ratios: List[Optional[float]] = []
    failed = skipped = 0
    for k, inst_seed in enumerate(spawn_seeds(seed, n_instances)):
        inst, _ = generate_instance(generator, num_qubits, inst_seed)
        if inst.num_vars > BRUTE_FORCE_MAX_VARS:
            logging.warning(f"Hardness screen: instance {k} has {inst.num_vars} variables, no oracle; skipping")
            skipped += 1
            ratios.append(None)
            continue
        _, e_gs = brute_force_ground_state(inst)
        result = anneal(inst, sa_cfg.model_copy(update={"seed": inst_seed}))
        reached = result.best_energy <= e_gs + _ENERGY_TOLERANCE * max(1.0, abs(e_gs))
        ratio = approximation_ratio(result.best_energy, e_gs) if e_gs != 0.0 else (1.0 if reached else None)
        ratios.append(ratio)
        for b in HARDNESS_BANDS:
            if reached or (b < 1.0 and ratio is not None and ratio >= b - _RATIO_TOLERANCE):
                bands[_band_label(b)] += 1
        failed += not reached

    report = HardnessReport(n_instances, bands, failed, ratios, skipped, generator.model_dump())
    logging.info(f"Hardness screen ({generator.distribution}, N={num_qubits}, {n_instances} instances, "
                 f"{sa_cfg.n_sweep} sweeps): bands {bands}, failed {failed}")
    return report


def hardness_sweep(generator: GeneratorConfig, alphas: Sequence[float], n_instances: int, sa_cfg: SaConfig,
                   num_qubits: int = 16, seed: int = 0) -> List[Dict[str, Any]]:
    """Pareto tail-exponent sweep of the hardness screen."""
    rows = []
    for alpha in alphas:
        gen = generator.model_copy(update={"distribution": "pareto", "alpha": float(alpha)})
        report = hardness_screen(gen, n_instances, sa_cfg, num_qubits, seed)
        rows.append({"alpha": float(alpha), **report.to_dict()})
    return rows


# --- Suites ---

def load_suite_config(path: str) -> SuiteConfig:
    with open(path, 'rb') as f:
        return SuiteConfig.model_validate(tomllib.load(f))


def _ingested_outcome(path: Optional[str], poll_interval: Optional[float]) -> Dict[str, Any]:
    if not path:
        return {"status": "missing", "error": "no incumbent trace configured"}
    trace = read_trace(path)
    points = resample_trace(trace.points, poll_interval) if poll_interval else trace.points
    if not points:
        return {"status": "missing", "error": f"empty trace {path}"}
    last_t, last_e = points[-1]
    return {"status": "done", "best_energy": last_e, "cpu_seconds": last_t, "qpu_seconds": 0.0,
            "total_seconds": last_t, "measured_seconds": 0.0, "trace": [list(p) for p in points],
            "proven_optimal": trace.proven_optimal}


def _run_solver(job: Dict[str, Any]) -> Dict[str, Any]:
    solver = job["solver"]
    try:
        if solver in ("cplex", "sa_cplex"):
            return {"solver": solver, **_ingested_outcome(job.get("trace_path"), job.get("poll_interval"))}

        inst = instance_from_dict(job["instance"])
        if solver == "sa":
            cfg = SaConfig.model_validate(job["sa"]).model_copy(update={"seed": job["seed"]})
            result = anneal(inst, cfg)
            return {"solver": solver, "status": "done", "best_energy": result.best_energy,
                    "best_bitstring": bitstring(result.best_spin), "cpu_seconds": result.modeled_cpu_seconds,
                    "qpu_seconds": 0.0, "total_seconds": result.modeled_cpu_seconds,
                    "measured_seconds": result.measured_seconds, "trace": [list(p) for p in result.trace()]}

        cfg = BfDcqoConfig.model_validate(job["bfdcqo"]).model_copy(update={"seed": job["seed"]})
        layout = layout_from_dict(job["layout"]) if job.get("layout") else None
        result = run_bfdcqo(inst, layout, cfg)
        return {"solver": solver, "status": "done", "best_energy": result.best_energy,
                "best_bitstring": bitstring(result.best_spin), "n_iter": cfg.n_iter,
                "cpu_seconds": result.modeled_cpu_seconds, "qpu_seconds": result.modeled_qpu_seconds,
                "total_seconds": result.modeled_total_seconds, "measured_seconds": result.measured_seconds,
                "trace": [list(p) for p in result.trace()]}
    except Exception as e:
        logging.error(f"Suite job {job.get('instance_id')}/{solver} failed: {e}", exc_info=True)
        return {"solver": solver, "status": "failed", "error": str(e)}


def _ground_state(inst: HuboInstance, instance_id: str, cfg: SuiteConfig,
                  outcomes: List[Dict[str, Any]]) -> Tuple[Optional[float], str]:
    if inst.num_vars <= BRUTE_FORCE_MAX_VARS:
        return brute_force_ground_state(inst)[1], "brute_force"
    if instance_id in cfg.optima:
        return float(cfg.optima[instance_id]), "ingested"
    proven = [o for o in outcomes if o.get("status") == "done" and o.get("proven_optimal")]
    if proven:
        return float(proven[0]["best_energy"]), "ingested"
    done = [o["best_energy"] for o in outcomes if o.get("status") == "done"]
    if done:
        logging.warning(f"No provable optimum for {instance_id}; using best known energy")
        return float(min(done)), "best_known"
    logging.warning(f"No ground-state reference for {instance_id}")
    return None, "missing"


def record_columns(cfg: SuiteConfig) -> List[str]:
    return (["instance", "N", "seed", "solver", "status", "n_iter", "e_gs", "e_gs_source", "best_energy",
             "ratio", "comparable", "cpu_seconds", "qpu_seconds", "total_seconds"]
            + [f"tt_r_{t:g}" for t in cfg.targets]
            + ["tt_subject_seconds", "tt_reference_seconds", "enhancement_factor"])


def _record(instance_id: str, inst: HuboInstance, seed: int, outcome: Dict[str, Any], e_gs: Optional[float],
            source: str, reference: Optional[Dict[str, Any]], cfg: SuiteConfig) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "instance": instance_id, "N": inst.num_vars, "seed": seed, "solver": outcome["solver"],
        "status": outcome["status"], "n_iter": outcome.get("n_iter"), "e_gs": e_gs, "e_gs_source": source,
        "best_energy": outcome.get("best_energy"), "cpu_seconds": outcome.get("cpu_seconds"),
        "qpu_seconds": outcome.get("qpu_seconds"), "total_seconds": outcome.get("total_seconds"),
        "measured_seconds": outcome.get("measured_seconds"), "error": outcome.get("error"),
    }
    energy = outcome.get("best_energy")
    trace = outcome.get("trace") or []
    if energy is None:
        return row
    if e_gs is not None and e_gs != 0.0:
        row["ratio"] = approximation_ratio(energy, e_gs)
        row["comparable"] = is_comparable(energy, e_gs)
        for t in cfg.targets:
            row[f"tt_r_{t:g}"] = tt_r(trace, t, e_gs)
    row["tt_subject_seconds"] = time_to_energy(trace, energy)
    if reference is not None and reference.get("status") == "done":
        row["tt_reference_seconds"] = time_to_energy(reference.get("trace") or [], energy)
        if row["tt_subject_seconds"]:
            row["enhancement_factor"] = enhancement_factor(row["tt_reference_seconds"], row["tt_subject_seconds"])
    return row


def _write_artifacts(directory: str, inst: HuboInstance, layout: LayoutPlan,
                     outcomes: List[Dict[str, Any]]) -> None:
    ensure_dir(directory)
    save_instance(inst, os.path.join(directory, "instance.json"))
    save_layout(layout, os.path.join(directory, "layout.json"))
    model = linearize(inst)
    export_lp(model, os.path.join(directory, "model.lp"), name=os.path.basename(directory))
    for o in outcomes:
        if o.get("status") != "done" or o["solver"] not in ("sa", "bfdcqo"):
            continue
        write_trace(o["trace"], os.path.join(directory, f"{o['solver']}_trace.csv"))
        if o["solver"] == "sa":
            export_warm_start(model, spins_from_bitstring(o["best_bitstring"]),
                              os.path.join(directory, "warm_start.txt"))


def run_suite(config: Union[SuiteConfig, str], out_dir: str) -> Dict[str, Any]:
    """
    Every instance x solver job, reduced in (instance, solver) order.
    records.csv carries only modeled columns; measured wall times go to
    timings.csv and records.json.
    """
    cfg = load_suite_config(config) if isinstance(config, str) else config
    ensure_dir(out_dir)

    instances: List[Tuple[str, HuboInstance, LayoutPlan, int]] = []
    seeds = spawn_seeds(cfg.master_seed, len(cfg.sizes) * cfg.instances_per_size)
    for s, num_qubits in enumerate(cfg.sizes):
        for k in range(cfg.instances_per_size):
            seed = seeds[s * cfg.instances_per_size + k]
            inst, layout = generate_instance(cfg.generator, num_qubits, seed)
            instances.append((f"N{inst.num_vars}_i{k}", inst, layout, seed))

    pooled = cfg.workers > 1
    jobs = []
    for instance_id, inst, layout, seed in instances:
        solver_seeds = dict(zip(("sa", "bfdcqo"), spawn_seeds(seed, 2)))
        for solver in cfg.solvers:
            jobs.append({
                "instance_id": instance_id, "solver": solver, "seed": solver_seeds.get(solver),
                "instance": instance_to_dict(inst), "layout": layout_to_dict(layout),
                "sa": cfg.sa.model_dump() | ({"workers": 1} if pooled else {}),
                "bfdcqo": cfg.bfdcqo.model_dump() | ({"workers": 1} if pooled else {}),
                "trace_path": (cfg.cplex_traces if solver == "cplex" else cfg.sa_cplex_traces).get(instance_id),
                "poll_interval": cfg.poll_interval,
            })

    started = time.perf_counter()
    if pooled and jobs:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_solver, jobs))
    else:
        outcomes = [_run_solver(job) for job in jobs]

    records: List[Dict[str, Any]] = []
    summaries: List[Dict[str, Any]] = []
    per_instance = len(cfg.solvers)
    for k, (instance_id, inst, layout, seed) in enumerate(instances):
        mine = outcomes[k * per_instance:(k + 1) * per_instance]
        e_gs, source = _ground_state(inst, instance_id, cfg, mine)
        reference = next((o for o in mine if o["solver"] == cfg.reference_solver), None)
        records.extend(_record(instance_id, inst, seed, o, e_gs, source, reference, cfg) for o in mine)
        summaries.append({"instance": instance_id, "N": inst.num_vars, "seed": seed, "e_gs": e_gs,
                          "e_gs_source": source, "digest": instance_digest(inst), "terms": term_counts(inst)})
        if cfg.artifacts:
            _write_artifacts(os.path.join(out_dir, "artifacts", instance_id), inst, layout, mine)

    files = [
        write_csv(os.path.join(out_dir, "records.csv"), record_columns(cfg), records),
        write_csv(os.path.join(out_dir, "timings.csv"), ["instance", "solver", "measured_seconds"], records),
        write_json(os.path.join(out_dir, "records.json"),
                   {"suite": cfg.name, "config": cfg.model_dump(), "instances": summaries, "records": records}),
    ]
    failed = sum(1 for r in records if r["status"] == "failed")
    logging.info(f"Suite {cfg.name}: {len(records)} records ({failed} failed) in "
                 f"{time.perf_counter() - started:.2f}s -> {out_dir}")
    return {"status": "done", "records": len(records), "failed": failed, "out_dir": out_dir, "files": files}