"""
Bias-field digitized counterdiabatic optimization loop.

Each iteration prepares the mixer ground state, applies the counterdiabatic
program, samples shots, keeps the n_cvar lowest-energy outcomes, polishes them
with zero-temperature descent and feeds their mean spin back as the next bias
field.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.hubo import HuboInstance, approximation_ratio, bitstring, brute_force_ground_state, is_comparable
from core.sampler import spawn_seeds
from core.topology import LayoutPlan
from schemas.annealing import SaConfig
from schemas.bfdcqo import BfDcqoConfig
from services.annealing import anneal, descend
from services.statevector import (MixerField, ShotSet, build_cd_program, log_program, prepare_state,
                                  sample_shots, simulate)
from settings import SHOT_TIME_SECONDS, SWEEP_TIME_SECONDS


@dataclass
class Ensemble:
    spins: np.ndarray
    energies: np.ndarray

    @property
    def size(self) -> int:
        return int(self.spins.shape[0])

    def mean_energy(self) -> float:
        return float(self.energies.mean())

    def min_energy(self) -> float:
        return float(self.energies.min())

    def best(self) -> Tuple[np.ndarray, float]:
        k = int(np.argmin(self.energies))
        return self.spins[k].copy(), float(self.energies[k])


# --- Feedback stages ---

def cvar_reduce(shots: ShotSet, inst: HuboInstance, n_cvar: int) -> Ensemble:
    """Lowest n_cvar shot entries by energy (multiplicities repeat; ties by bitstring)."""
    if n_cvar > shots.total:
        raise ValueError(f"n_cvar ({n_cvar}) exceeds the number of shots ({shots.total})")
    shots.with_energies(inst)
    keys = shots.bitstrings()
    order = sorted(range(len(keys)), key=lambda k: (shots.energies[k], keys[k]))
    rows: List[int] = []
    for k in order:
        take = min(int(shots.counts[k]), n_cvar - len(rows))
        rows.extend([k] * take)
        if len(rows) == n_cvar:
            break
    idx = np.array(rows, dtype=np.int64)
    return Ensemble(shots.spins[idx].copy(), shots.energies[idx].copy())


def update_bias(ensemble: Ensemble, sign: int = -1) -> np.ndarray:
    """h^b_i = sign * <s_i> over the ensemble."""
    if ensemble.size == 0:
        raise ValueError("Cannot update the bias from an empty ensemble")
    return sign * ensemble.spins.mean(axis=0).astype(np.float64)


def post_process(ensemble: Ensemble, inst: HuboInstance, n_sweep_post: int, seed: Optional[int] = None,
                 workers: int = 1) -> Ensemble:
    spins, values = descend(inst, ensemble.spins, n_sweep_post, seed=seed, workers=workers)
    return Ensemble(np.asarray(spins, dtype=np.int64), np.asarray(values, dtype=np.float64))


# --- Runtime model ---

def runtime_model(cfg: BfDcqoConfig, t_sweep: float = SWEEP_TIME_SECONDS,
                  t_shot: float = SHOT_TIME_SECONDS) -> Tuple[float, float, float]:
    """(T_CPU, T_QPU, total) for the modeled sweep and shot rates."""
    rounds = cfg.n_iter + 1
    t_cpu = (cfg.n_sweep_pre * cfg.n_runs_pre + cfg.n_cvar * rounds * cfg.n_sweep_post) * t_sweep
    t_qpu = rounds * cfg.n_shots * t_shot
    return t_cpu, t_qpu, t_cpu + t_qpu


# --- Loop ---

@dataclass
class IterationRecord:
    iteration: int
    best_energy: float
    iteration_best: float
    bias_field: List[float]
    shot_summary: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "best_energy": self.best_energy,
            "iteration_best": self.iteration_best,
            "bias_field": self.bias_field,
            "shot_summary": self.shot_summary,
        }


@dataclass
class BfDcqoResult:
    best_spin: np.ndarray
    best_energy: float
    iterations: List[IterationRecord]
    config: BfDcqoConfig
    pre_energy: Optional[float] = None
    pre_spin: Optional[np.ndarray] = None
    modeled_cpu_seconds: float = 0.0
    modeled_qpu_seconds: float = 0.0
    measured_seconds: float = 0.0
    program_stats: Dict[str, int] = field(default_factory=dict)

    @property
    def modeled_total_seconds(self) -> float:
        return self.modeled_cpu_seconds + self.modeled_qpu_seconds

    def best_so_far(self) -> List[float]:
        return [it.best_energy for it in self.iterations]

    def trace(self, t_sweep: float = SWEEP_TIME_SECONDS, t_shot: float = SHOT_TIME_SECONDS) -> List[Tuple[float, float]]:
        """Best-so-far energy at the modeled end of every improving iteration."""
        cfg = self.config
        elapsed = cfg.n_sweep_pre * cfg.n_runs_pre * t_sweep
        per_round = cfg.n_shots * t_shot + cfg.n_cvar * cfg.n_sweep_post * t_sweep
        events: List[Tuple[float, float]] = []
        for it in self.iterations:
            elapsed += per_round
            if not events or it.best_energy < events[-1][1]:
                events.append((elapsed, it.best_energy))
        return events

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_energy": self.best_energy,
            "best_bitstring": bitstring(self.best_spin),
            "pre_energy": self.pre_energy,
            "iterations": [it.to_dict() for it in self.iterations],
            "modeled_cpu_seconds": self.modeled_cpu_seconds,
            "modeled_qpu_seconds": self.modeled_qpu_seconds,
            "modeled_total_seconds": self.modeled_total_seconds,
            "measured_seconds": self.measured_seconds,
            "program": self.program_stats,
            "config": self.config.model_dump(),
        }


def run_bfdcqo(inst: HuboInstance, layout: Optional[LayoutPlan], cfg: BfDcqoConfig) -> BfDcqoResult:
    started = time.perf_counter()
    n = inst.num_vars
    rounds = cfg.n_iter + 1
    seeds = spawn_seeds(cfg.seed, 1 + 2 * rounds)
    hx = np.full(n, cfg.transverse_field)

    pre_energy, pre_spin = None, None
    if cfg.n_sweep_pre > 0:
        pre = anneal(inst, SaConfig(n_sweep=cfg.n_sweep_pre, n_runs=cfg.n_runs_pre, seed=seeds[0],
                                    workers=cfg.workers))
        pre_energy, pre_spin = pre.best_energy, pre.best_spin.copy()
        hb = cfg.bias_sign * pre_spin.astype(np.float64)
    else:
        hb = np.zeros(n)

    best_spin: Optional[np.ndarray] = None
    best_energy = np.inf
    records: List[IterationRecord] = []
    program_stats: Dict[str, int] = {}

    for it in range(rounds):
        mixer = MixerField(hx, hb)
        program = build_cd_program(inst, mixer, layout, cfg.effective_angle / cfg.n_trot)
        if it == 0:
            log_program(program)
            program_stats = {"gates": program.gate_count(), "depth": program.depth}
        psi = simulate(program, prepare_state(mixer), repeats=cfg.n_trot)
        shots = sample_shots(psi, cfg.n_shots, seed=seeds[1 + 2 * it], bitflip_prob=cfg.bitflip_prob,
                             noisy_layers=program.depth * cfg.n_trot)
        reduced = cvar_reduce(shots, inst, cfg.n_cvar)
        improved = post_process(reduced, inst, cfg.n_sweep_post, seed=seeds[2 + 2 * it], workers=cfg.workers)

        spin, energy = improved.best()
        if energy < best_energy:
            best_spin, best_energy = spin, energy
        hb = update_bias(improved, cfg.bias_sign)

        summary = shots.summary()
        summary.update({"reduced_mean_energy": reduced.mean_energy(), "reduced_min_energy": reduced.min_energy(),
                        "post_mean_energy": improved.mean_energy()})
        records.append(IterationRecord(it, float(best_energy), energy, [float(v) for v in hb], summary))
        logging.info(f"BF-DCQO iteration {it}: iteration best {energy:.6f}, best so far {best_energy:.6f}")

    t_cpu, t_qpu, _ = runtime_model(cfg)
    return BfDcqoResult(
        best_spin=best_spin,
        best_energy=float(best_energy),
        iterations=records,
        config=cfg,
        pre_energy=pre_energy,
        pre_spin=pre_spin,
        modeled_cpu_seconds=t_cpu,
        modeled_qpu_seconds=t_qpu,
        measured_seconds=time.perf_counter() - started,
        program_stats=program_stats,
    )


def effective_angle_scan(instances: Sequence[Tuple[HuboInstance, Optional[LayoutPlan]]], gammas: Sequence[float],
                         cfg: BfDcqoConfig) -> Dict[str, Any]:
    """
    Mean approximation ratio against brute force for every gamma; reports the best gamma.

    Instances whose best energy differs in sign from the ground state are left
    out of the mean; a gamma with no comparable instance scores NaN.
    """
    references = [brute_force_ground_state(inst)[1] for inst, _ in instances]
    means: List[float] = []
    for gamma in gammas:
        run_cfg = cfg.model_copy(update={"effective_angle": float(gamma)})
        ratios = []
        for (inst, layout), e_gs in zip(instances, references):
            best_energy = run_bfdcqo(inst, layout, run_cfg).best_energy
            if is_comparable(best_energy, e_gs):
                ratios.append(approximation_ratio(best_energy, e_gs))
        means.append(float(np.mean(ratios)) if ratios else float("nan"))
        logging.info(f"gamma={gamma}: mean ratio {means[-1]:.4f}")
    best = int(np.nanargmax(means)) if means and not np.all(np.isnan(means)) else None
    return {
        "gammas": [float(g) for g in gammas],
        "mean_ratio": means,
        "best_gamma": None if best is None else float(gammas[best]),
    }
