"""
Simulated annealing on spin-form HUBO instances.

Each run starts from uniformly random spins (or a given state), and every
sweep visits the spins in a fresh random permutation and applies the
Metropolis criterion to the exact flip energy change. The schedule is
geometric from T_init = max_i dE_i^max down to t_final_ratio * T_init.

Chains run in numba kernels. Every run is reseeded from a per-run seed
derived from the master seed, and chunks of runs are reduced in run order,
so results do not depend on the worker count.
"""
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numba
import numpy as np
from scipy import stats

from core.errors import FitError
from core.hubo import HuboInstance, as_spins, bitstring, energies, max_flip_bounds
from core.sampler import spawn_seeds
from schemas.annealing import SaConfig
from settings import SA_DEBUG_CHECK_EVERY, SWEEP_TIME_SECONDS

DRIFT_TOLERANCE = 1e-9


# --- Kernels ---

@numba.njit(cache=True)
def _local_field(i, spins, h, pair_ptr, pair_nbr, pair_coef, tri_ptr, tri_a, tri_b, tri_coef):
    value = h[i]
    for k in range(pair_ptr[i], pair_ptr[i + 1]):
        value += pair_coef[k] * spins[pair_nbr[k]]
    for k in range(tri_ptr[i], tri_ptr[i + 1]):
        value += tri_coef[k] * spins[tri_a[k]] * spins[tri_b[k]]
    return value


@numba.njit(cache=True)
def _full_energy(spins, h, pair_i, pair_j, pair_c, tri_p, tri_q, tri_r, tri_c, offset):
    e = offset
    for i in range(h.shape[0]):
        e += h[i] * spins[i]
    for k in range(pair_c.shape[0]):
        e += pair_c[k] * spins[pair_i[k]] * spins[pair_j[k]]
    for k in range(tri_c.shape[0]):
        e += tri_c[k] * spins[tri_p[k]] * spins[tri_q[k]] * spins[tri_r[k]]
    return e


@numba.njit(cache=True)
def _anneal_chains(h, pair_ptr, pair_nbr, pair_coef, tri_ptr, tri_a, tri_b, tri_coef,
                   pair_i, pair_j, pair_c, tri_p, tri_q, tri_r, tri_c, offset,
                   temperatures, seeds, init, use_init, zero_temperature, check_every):
    n_runs = seeds.shape[0]
    n = h.shape[0]
    n_sweep = temperatures.shape[0]

    best_spins = np.empty((n_runs, n), dtype=np.int8)
    final_spins = np.empty((n_runs, n), dtype=np.int8)
    best_energy = np.empty(n_runs, dtype=np.float64)
    best_sweep = np.zeros(n_runs, dtype=np.int64)
    accepted = np.zeros(n_runs, dtype=np.int64)
    max_drift = 0.0

    spins = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)

    for run in range(n_runs):
        np.random.seed(seeds[run])
        for i in range(n):
            order[i] = i
            if use_init:
                spins[i] = init[run, i]
            elif np.random.random() < 0.5:
                spins[i] = 1.0
            else:
                spins[i] = -1.0

        e = _full_energy(spins, h, pair_i, pair_j, pair_c, tri_p, tri_q, tri_r, tri_c, offset)
        best_e = e
        for i in range(n):
            best_spins[run, i] = np.int8(spins[i])
        flips = 0

        for sweep in range(n_sweep):
            t = temperatures[sweep]
            np.random.shuffle(order)
            for idx in range(n):
                i = order[idx]
                d = -2.0 * spins[i] * _local_field(i, spins, h, pair_ptr, pair_nbr, pair_coef,
                                                   tri_ptr, tri_a, tri_b, tri_coef)
                if zero_temperature:
                    accept = d < 0.0
                elif d <= 0.0:
                    accept = True
                else:
                    accept = np.random.random() < np.exp(-d / t)
                if not accept:
                    continue

                spins[i] = -spins[i]
                e += d
                accepted[run] += 1
                if check_every > 0:
                    flips += 1
                    if flips % check_every == 0:
                        exact = _full_energy(spins, h, pair_i, pair_j, pair_c, tri_p, tri_q, tri_r, tri_c, offset)
                        max_drift = max(max_drift, abs(exact - e))
                if e < best_e:
                    best_e = e
                    best_sweep[run] = sweep + 1
                    for k in range(n):
                        best_spins[run, k] = np.int8(spins[k])

        best_energy[run] = best_e
        for i in range(n):
            final_spins[run, i] = np.int8(spins[i])

    return best_spins, final_spins, best_energy, best_sweep, accepted, max_drift


# --- Problem arrays ---

def _problem_arrays(inst: HuboInstance) -> Tuple[np.ndarray, ...]:
    """CSR neighbour lists per spin plus flat term arrays, in kernel argument order."""
    n = inst.num_vars
    pair_rows: List[List[Tuple[int, float]]] = [[] for _ in range(n)]
    tri_rows: List[List[Tuple[int, int, float]]] = [[] for _ in range(n)]
    for i, (pairs, triples) in enumerate(inst.neighbours):
        pair_rows[i] = pairs
        tri_rows[i] = triples

    pair_ptr = np.zeros(n + 1, dtype=np.int64)
    tri_ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        pair_ptr[i + 1] = pair_ptr[i] + len(pair_rows[i])
        tri_ptr[i + 1] = tri_ptr[i] + len(tri_rows[i])
    pair_nbr = np.array([j for row in pair_rows for j, _ in row], dtype=np.int64)
    pair_coef = np.array([c for row in pair_rows for _, c in row], dtype=np.float64)
    tri_a = np.array([q for row in tri_rows for q, _, _ in row], dtype=np.int64)
    tri_b = np.array([r for row in tri_rows for _, r, _ in row], dtype=np.int64)
    tri_coef = np.array([c for row in tri_rows for _, _, c in row], dtype=np.float64)

    pidx, tidx = inst.pair_index, inst.triple_index
    return (
        inst.h.astype(np.float64), pair_ptr, pair_nbr, pair_coef, tri_ptr, tri_a, tri_b, tri_coef,
        np.ascontiguousarray(pidx[:, 0]), np.ascontiguousarray(pidx[:, 1]), inst.pair_coef.astype(np.float64),
        np.ascontiguousarray(tidx[:, 0]), np.ascontiguousarray(tidx[:, 1]), np.ascontiguousarray(tidx[:, 2]),
        inst.triple_coef.astype(np.float64), float(inst.offset),
    )


def _run_chunk(args):
    problem, temperatures, seeds, init, use_init, zero_temperature, check_every = args
    return _anneal_chains(*problem, temperatures, seeds, init, use_init, zero_temperature, check_every)


# --- Results ---

@dataclass
class ChainBatch:
    best_spins: np.ndarray
    final_spins: np.ndarray
    best_energy: np.ndarray
    best_sweep: np.ndarray
    accepted: np.ndarray
    max_drift: float
    n_sweep: int

    @property
    def acceptance_rate(self) -> float:
        visits = self.n_sweep * self.best_spins.shape[1] * self.best_spins.shape[0]
        return float(self.accepted.sum()) / visits if visits else 0.0


@dataclass
class SaResult:
    best_spin: np.ndarray
    best_energy: float
    per_run_best: List[Tuple[float, np.ndarray]]
    sweep_count_executed: int
    n_sweep: int
    n_runs: int
    per_run_best_sweep: List[int] = field(default_factory=list)
    acceptance_rate: float = 0.0
    measured_seconds: float = 0.0
    modeled_cpu_seconds: float = 0.0

    def trace(self, t_sweep: float = SWEEP_TIME_SECONDS) -> List[Tuple[float, float]]:
        """
        Best-so-far energy in modeled time, runs taken back to back; one event
        per run at the sweep where that run first reached its best.
        """
        events: List[Tuple[float, float]] = []
        best = np.inf
        for run, ((e, _), sweep) in enumerate(zip(self.per_run_best, self.per_run_best_sweep)):
            if e < best:
                best = e
                events.append(((run * self.n_sweep + sweep) * t_sweep, float(e)))
        return events

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_energy": self.best_energy,
            "best_bitstring": bitstring(self.best_spin),
            "per_run": [
                {"energy": e, "bitstring": bitstring(s), "best_sweep": int(sweep)}
                for (e, s), sweep in zip(self.per_run_best, self.per_run_best_sweep)
            ],
            "acceptance_rate": self.acceptance_rate,
            "sweep_count_executed": self.sweep_count_executed,
            "modeled_cpu_seconds": self.modeled_cpu_seconds,
            "measured_seconds": self.measured_seconds,
        }


# --- Schedule ---

def initial_temperature(inst: HuboInstance) -> float:
    """Upper bound on the energy change of any single spin flip; 0 for an all-zero instance."""
    bounds = max_flip_bounds(inst)
    return float(bounds.max()) if bounds.size else 0.0


def geometric_schedule(t_init: float, t_final: float, n_sweep: int) -> np.ndarray:
    if n_sweep < 1:
        raise ValueError(f"n_sweep must be >= 1, got {n_sweep}")
    if not (t_init >= t_final > 0):
        raise ValueError(f"Need t_init >= t_final > 0, got {t_init}, {t_final}")
    if n_sweep == 1:
        return np.array([float(t_init)])
    return np.geomspace(t_init, t_final, n_sweep)


def cpu_time_model(n_sweep: int, n_runs: int, t_sweep: float = SWEEP_TIME_SECONDS) -> float:
    return n_sweep * n_runs * t_sweep


# --- Runs ---

def run_chains(inst: HuboInstance, temperatures: Sequence[float], n_runs: int, seed: Optional[int] = None,
               initial_states: Optional[np.ndarray] = None, zero_temperature: bool = False,
               workers: int = 1, check_every: Optional[int] = None) -> ChainBatch:
    """
    Runs `n_runs` chains over an explicit temperature list (one per sweep).
    initial_states: (N,) shared start or (n_runs, N) per-run starts.
    """
    temps = np.asarray(temperatures, dtype=np.float64)
    if temps.ndim != 1 or temps.size < 1:
        raise ValueError("temperatures must be a non-empty 1-D sequence")
    n = inst.num_vars
    seeds = np.array(spawn_seeds(seed, n_runs), dtype=np.uint32)

    use_init = initial_states is not None
    if use_init:
        init = np.asarray(initial_states, dtype=np.float64)
        if init.ndim == 1:
            init = np.tile(as_spins(init, n).astype(np.float64), (n_runs, 1))
        elif init.shape != (n_runs, n):
            raise ValueError(f"initial_states must have shape ({n},) or ({n_runs}, {n}), got {init.shape}")
    else:
        init = np.zeros((n_runs, n), dtype=np.float64)

    check = SA_DEBUG_CHECK_EVERY if check_every is None else int(check_every)
    problem = _problem_arrays(inst)

    workers = max(1, min(int(workers), n_runs))
    bounds = np.linspace(0, n_runs, workers + 1).astype(int)
    chunks = [
        (problem, temps, seeds[lo:hi], init[lo:hi], use_init, bool(zero_temperature), check)
        for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo
    ]
    if len(chunks) == 1:
        parts = [_run_chunk(chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_chunk, chunks))

    batch = ChainBatch(
        best_spins=np.concatenate([p[0] for p in parts]).astype(np.int64),
        final_spins=np.concatenate([p[1] for p in parts]).astype(np.int64),
        best_energy=np.concatenate([p[2] for p in parts]),
        best_sweep=np.concatenate([p[3] for p in parts]),
        accepted=np.concatenate([p[4] for p in parts]),
        max_drift=max(p[5] for p in parts),
        n_sweep=temps.size,
    )
    if check > 0 and batch.max_drift > DRIFT_TOLERANCE:
        raise AssertionError(f"Incremental energy drifted by {batch.max_drift:.3e} from full re-evaluation")
    return batch


def anneal(inst: HuboInstance, cfg: SaConfig) -> SaResult:
    started = time.perf_counter()
    t_init = initial_temperature(inst)
    if t_init <= 0.0:
        logging.warning("All-zero instance: substituting T_init = 1")
        t_init = 1.0
    temps = geometric_schedule(t_init, cfg.t_final_ratio * t_init, cfg.n_sweep)

    batch = run_chains(
        inst, temps, cfg.n_runs, seed=cfg.seed,
        initial_states=np.asarray(cfg.initial_state) if cfg.initial_state is not None else None,
        zero_temperature=cfg.zero_temperature, workers=cfg.workers,
    )

    # Exact energies of the recorded configurations; incremental sums only rank them.
    exact = energies(inst, batch.best_spins)
    per_run = [(float(exact[r]), batch.best_spins[r].copy()) for r in range(cfg.n_runs)]
    best_run = int(np.argmin(exact))
    result = SaResult(
        best_spin=batch.best_spins[best_run].copy(),
        best_energy=float(exact[best_run]),
        per_run_best=per_run,
        sweep_count_executed=cfg.n_sweep * cfg.n_runs,
        n_sweep=cfg.n_sweep,
        n_runs=cfg.n_runs,
        per_run_best_sweep=[int(s) for s in batch.best_sweep],
        acceptance_rate=batch.acceptance_rate,
        measured_seconds=time.perf_counter() - started,
        modeled_cpu_seconds=cpu_time_model(cfg.n_sweep, cfg.n_runs),
    )
    logging.info(f"SA N={inst.num_vars} sweeps={cfg.n_sweep} runs={cfg.n_runs}: best {result.best_energy:.6f} "
                 f"(acceptance {result.acceptance_rate:.3f}, {result.measured_seconds:.2f}s)")
    return result


def descend(inst: HuboInstance, starts: np.ndarray, n_sweep: int, seed: Optional[int] = None,
            workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-temperature sweeps from every row of `starts`; returns (spins, energies)."""
    starts = np.asarray(starts, dtype=np.int64)
    if starts.ndim != 2 or starts.shape[0] == 0:
        raise ValueError("starts must be a non-empty (M, N) spin matrix")
    if n_sweep < 1:
        return starts.copy(), energies(inst, starts)
    batch = run_chains(inst, np.ones(n_sweep), starts.shape[0], seed=seed,
                       initial_states=starts, zero_temperature=True, workers=workers)
    return batch.final_spins, energies(inst, batch.final_spins)


# --- Sweep-time calibration ---

@dataclass
class Calibration:
    t_sweep: float
    t_offset: float
    r_squared: float
    points: List[Tuple[int, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {"t_sweep": self.t_sweep, "t_offset": self.t_offset, "r_squared": self.r_squared,
                "points": [[int(n), float(t)] for n, t in self.points]}

    def save(self, path: str) -> str:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)
        return path


def fit_sweep_time(points: Sequence[Tuple[float, float]]) -> Calibration:
    """Least-squares fit T_avg = t_sweep * n_sweep + t_offset."""
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.unique(xs).size < 2:
        raise FitError("Calibration needs at least two distinct sweep counts")
    fit = stats.linregress(xs, ys)
    return Calibration(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2),
                       [(int(x), float(y)) for x, y in zip(xs, ys)])


def calibrate_sweep_time(inst: HuboInstance, sweep_grid: Sequence[int], runs_per_point: int,
                         repeats: int = 1, seed: int = 0, workers: int = 1) -> Calibration:
    """Times anneal() over the grid; the slope is the wall time per sweep of a single run."""
    grid = sorted(set(int(n) for n in sweep_grid))
    if len(grid) < 2:
        raise FitError("Calibration needs at least two distinct sweep counts")
    if grid[-1] < 100 * grid[0]:
        logging.warning(f"Sweep grid {grid[0]}..{grid[-1]} spans less than two decades")

    # Compile the kernels before timing.
    anneal(inst, SaConfig(n_sweep=1, n_runs=1, seed=seed))

    points: List[Tuple[int, float]] = []
    for n_sweep in grid:
        for rep in range(max(1, repeats)):
            cfg = SaConfig(n_sweep=n_sweep, n_runs=runs_per_point, seed=seed + rep, workers=workers)
            started = time.perf_counter()
            anneal(inst, cfg)
            points.append((n_sweep, (time.perf_counter() - started) / runs_per_point))

    calibration = fit_sweep_time(points)
    logging.info(f"Sweep calibration: t_sweep={calibration.t_sweep:.3e}s t_offset={calibration.t_offset:.3e}s "
                 f"R^2={calibration.r_squared:.4f}")
    return calibration
