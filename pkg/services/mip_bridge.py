"""
HUBO -> MIP linearization, LP/warm-start export and incumbent-trace ingestion.

Variable names: x{i} for originals, a{i}_{j} for a quadratic product,
a{p}_{q}_{r} / b{p}_{q}_{r} for the two stages of a cubic product
(a = x_p x_q, b = a x_r). Under the termwise policy the pair products that a
triple term expands into are named a{i}_{j}__{p}_{q}_{r}.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import TraceParseError
from core.hubo import BinaryPolynomial, HuboInstance, as_spins, spins_to_bits, to_binary
from schemas.annealing import SaConfig
from services.annealing import anneal
from settings import BENCH_POLL_INTERVAL_SECONDS

AuxPolicy = Literal["termwise", "shared"]

_TERMS_PER_LINE = 8
_FEASIBILITY_TOLERANCE = 1e-9


# --- Model ---

@dataclass
class Constraint:
    name: str
    coefs: Dict[str, float]
    sense: Literal["<=", ">="]
    rhs: float


@dataclass
class MipModel:
    variables: List[str]
    objective: Dict[str, float]
    constant: float
    constraints: List[Constraint]
    products: Dict[str, Tuple[str, str]]
    num_originals: int
    policy: str = "termwise"
    quadratic_aux: int = 0
    cubic_aux: int = 0

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)


class _ModelBuilder:
    def __init__(self, num_vars: int, policy: str):
        self.variables = [f"x{i}" for i in range(num_vars)]
        self.objective: Dict[str, float] = {}
        self.constant = 0.0
        self.constraints: List[Constraint] = []
        self.products: Dict[str, Tuple[str, str]] = {}
        self.policy = policy
        self.quadratic: List[str] = []
        self.cubic: List[str] = []

    def add_objective(self, name: str, coef: float) -> None:
        self.objective[name] = self.objective.get(name, 0.0) + coef

    def product(self, name: str, left: str, right: str, cubic: bool = False) -> str:
        """Auxiliary `name` = left * right with the three standard constraints."""
        if name in self.products:
            return name
        self.products[name] = (left, right)
        (self.cubic if cubic else self.quadratic).append(name)
        self.constraints.append(Constraint(f"c_{name}_1", {name: 1.0, left: -1.0}, "<=", 0.0))
        self.constraints.append(Constraint(f"c_{name}_2", {name: 1.0, right: -1.0}, "<=", 0.0))
        self.constraints.append(Constraint(f"c_{name}_3", {name: 1.0, left: -1.0, right: -1.0}, ">=", -1.0))
        return name

    def cubic_product(self, p: int, q: int, r: int, stage_one: Optional[str] = None) -> str:
        if stage_one is None:
            stage_one = self.product(f"a{p}_{q}_{r}", f"x{p}", f"x{q}", cubic=True)
        return self.product(f"b{p}_{q}_{r}", stage_one, f"x{r}", cubic=True)

    def build(self) -> MipModel:
        # Originals, then quadratic auxiliaries, then cubic auxiliaries.
        variables = self.variables + self.quadratic + self.cubic
        return MipModel(
            variables=variables,
            objective={name: self.objective.get(name, 0.0) for name in variables if name in self.objective},
            constant=self.constant,
            constraints=self.constraints,
            products=self.products,
            num_originals=len(self.variables),
            policy=self.policy,
            quadratic_aux=len(self.quadratic),
            cubic_aux=len(self.cubic),
        )


def _linearize_spin_termwise(inst: HuboInstance) -> MipModel:
    b = _ModelBuilder(inst.num_vars, "termwise")
    b.constant = inst.offset
    for i, h in inst.linear.items():
        b.constant += h
        b.add_objective(f"x{i}", -2.0 * h)
    for (m, n), J in inst.quadratic.items():
        b.constant += J
        b.add_objective(f"x{m}", -2.0 * J)
        b.add_objective(f"x{n}", -2.0 * J)
        b.add_objective(b.product(f"a{m}_{n}", f"x{m}", f"x{n}"), 4.0 * J)
    for (p, q, r), K in inst.cubic.items():
        b.constant += K
        for i in (p, q, r):
            b.add_objective(f"x{i}", -2.0 * K)
        for i, j in ((p, q), (p, r), (q, r)):
            b.add_objective(b.product(f"a{i}_{j}__{p}_{q}_{r}", f"x{i}", f"x{j}"), 4.0 * K)
    for (p, q, r), K in inst.cubic.items():
        b.add_objective(b.cubic_product(p, q, r), -8.0 * K)
    return b.build()


def _linearize_binary(poly: BinaryPolynomial, share: bool) -> MipModel:
    b = _ModelBuilder(poly.num_vars, "shared" if share else "termwise")
    b.constant = poly.offset
    for i, c in poly.linear.items():
        b.add_objective(f"x{i}", c)
    for (i, j), c in poly.quadratic.items():
        b.add_objective(b.product(f"a{i}_{j}", f"x{i}", f"x{j}"), c)
    for (p, q, r), c in poly.cubic.items():
        # Stage one pairs the two lowest indices.
        reuse = f"a{p}_{q}" if share and f"a{p}_{q}" in b.products else None
        b.add_objective(b.cubic_product(p, q, r, reuse), c)
    return b.build()


def linearize(inst: Union[HuboInstance, BinaryPolynomial], aux_policy: AuxPolicy = "termwise") -> MipModel:
    """
    termwise (default): every term is linearized on its own (a spin pair gives
    one product, a spin triple gives three pair products and one cubic
    product), so the model holds exactly N + Q + 2C variables and 3Q + 6C
    constraints for Q pairs and C triples. Pair products of a triple are not
    merged with the standalone a{i}_{j}.
    shared: binary monomials are merged first; a cubic stage-one product
    reuses the quadratic auxiliary of its two lowest indices when present.
    """
    if aux_policy not in ("termwise", "shared"):
        raise ValueError(f"Unknown auxiliary policy: {aux_policy}")
    if isinstance(inst, BinaryPolynomial):
        model = _linearize_binary(inst, share=aux_policy == "shared")
    elif aux_policy == "termwise":
        model = _linearize_spin_termwise(inst)
    else:
        model = _linearize_binary(to_binary(inst), share=True)
    logging.info(f"Linearized ({model.policy}): {model.num_variables} variables, {model.num_constraints} constraints")
    return model


def model_stats(m: MipModel) -> Dict[str, Any]:
    return {
        "policy": m.policy,
        "variables": m.num_variables,
        "constraints": m.num_constraints,
        "originals": m.num_originals,
        "quadratic_aux": m.quadratic_aux,
        "cubic_aux": m.cubic_aux,
    }


# --- Assignments ---

def complete_assignment(m: MipModel, x: Sequence[int]) -> Dict[str, int]:
    """Originals from `x`; every auxiliary forced to the product it represents."""
    bits = [int(v) for v in x]
    if len(bits) != m.num_originals:
        raise ValueError(f"Assignment has {len(bits)} values, model has {m.num_originals} originals")
    values = {f"x{i}": bits[i] for i in range(m.num_originals)}
    for name in m.variables[m.num_originals:]:
        left, right = m.products[name]
        values[name] = values[left] * values[right]
    return values


def objective_value(m: MipModel, assignment: Dict[str, float]) -> float:
    return m.constant + sum(coef * assignment[name] for name, coef in m.objective.items())


def check_feasible(m: MipModel, assignment: Dict[str, float]) -> List[str]:
    """Names of violated constraints (empty when feasible); non-binary values count as violations."""
    violated = [f"binary_{name}" for name in m.variables if assignment.get(name) not in (0, 1)]
    for c in m.constraints:
        lhs = sum(coef * assignment.get(name, 0) for name, coef in c.coefs.items())
        if c.sense == "<=" and lhs > c.rhs + _FEASIBILITY_TOLERANCE:
            violated.append(c.name)
        elif c.sense == ">=" and lhs < c.rhs - _FEASIBILITY_TOLERANCE:
            violated.append(c.name)
    return violated


# --- LP / warm-start files ---

def _format_number(value: float) -> str:
    return f"{value:.17g}"


def _linear_expression(coefs: Sequence[Tuple[str, float]]) -> List[str]:
    tokens = []
    for k, (name, coef) in enumerate(coefs):
        if k == 0:
            tokens.append(f"{'-' if coef < 0 else ''}{_format_number(abs(coef))} {name}")
        else:
            tokens.append(f"{'-' if coef < 0 else '+'} {_format_number(abs(coef))} {name}")
    return tokens


def _wrap(prefix: str, tokens: List[str]) -> List[str]:
    lines = []
    for k in range(0, max(1, len(tokens)), _TERMS_PER_LINE):
        chunk = ' '.join(tokens[k:k + _TERMS_PER_LINE])
        lines.append(f"{prefix}{chunk}" if k == 0 else f"   {chunk}")
    return lines


def lp_text(m: MipModel, name: str = "hubo") -> str:
    objective = [(v, m.objective[v]) for v in m.variables if v in m.objective and m.objective[v] != 0.0]
    tokens = _linear_expression(objective)
    if m.constant != 0.0 or not tokens:
        sign = '-' if m.constant < 0 else '+'
        tokens.append(f"{sign} {_format_number(abs(m.constant))}" if tokens else _format_number(m.constant))

    lines = [f"\\* {name}: {m.num_variables} variables, {m.num_constraints} constraints ({m.policy}) *\\",
             "Minimize"]
    lines.extend(_wrap(" obj: ", tokens))
    lines.append("Subject To")
    for c in m.constraints:
        body = _linear_expression(list(c.coefs.items()))
        body[-1] = f"{body[-1]} {c.sense} {_format_number(c.rhs)}"
        lines.extend(_wrap(f" {c.name}: ", body))
    lines.append("Binaries")
    for k in range(0, len(m.variables), _TERMS_PER_LINE * 2):
        lines.append(" " + ' '.join(m.variables[k:k + _TERMS_PER_LINE * 2]))
    lines.append("End")
    return '\n'.join(lines) + '\n'


def export_lp(m: MipModel, path: str, name: str = "hubo") -> str:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(lp_text(m, name))
    logging.info(f"Wrote LP model ({m.num_variables} vars, {m.num_constraints} constraints) to {path}")
    return path


def export_warm_start(m: MipModel, s: Sequence[int], path: str) -> str:
    """One `name value` line per variable, auxiliaries set to their implied products."""
    spins = as_spins(s, m.num_originals)
    assignment = complete_assignment(m, spins_to_bits(spins))
    violated = check_feasible(m, assignment)
    if violated:
        raise AssertionError(f"Warm start violates {len(violated)} constraints, first {violated[0]}")
    with open(path, 'w', encoding='utf-8') as f:
        for name in m.variables:
            f.write(f"{name} {assignment[name]}\n")
    return path


def read_warm_start(path: str) -> Dict[str, int]:
    values = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if line.strip():
                name, value = line.split()
                values[name] = int(value)
    return values


# --- Incumbent traces ---

@dataclass
class IncumbentTrace:
    points: List[Tuple[float, float]] = field(default_factory=list)
    proven_optimal: bool = False


def parse_trace(lines: Sequence[str]) -> IncumbentTrace:
    """
    CSV `seconds,objective` rows (an optional header row and `#` comments are
    skipped) with an optional final `optimal` line.
    """
    trace = IncumbentTrace()
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if trace.proven_optimal:
            raise TraceParseError(number, "content after the 'optimal' marker")
        if line.lower() == "optimal":
            trace.proven_optimal = True
            continue
        parts = [p.strip() for p in line.split(',')]
        if len(parts) != 2:
            raise TraceParseError(number, f"expected 'seconds,objective', got {line!r}")
        try:
            t, obj = float(parts[0]), float(parts[1])
        except ValueError:
            if not trace.points and parts[0].lower() == "seconds":
                continue
            raise TraceParseError(number, f"non-numeric value in {line!r}")
        if not (math.isfinite(t) and math.isfinite(obj)):
            raise TraceParseError(number, "non-finite value")
        if trace.points:
            last_t, last_obj = trace.points[-1]
            if t <= last_t:
                raise TraceParseError(number, f"time {t} does not increase past {last_t}")
            if obj > last_obj:
                raise TraceParseError(number, f"objective {obj} increases past {last_obj}")
        trace.points.append((t, obj))
    return trace


def read_trace(path: str) -> IncumbentTrace:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_trace(f.readlines())


def write_trace(points: Sequence[Tuple[float, float]], path: str, proven_optimal: bool = False) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        f.write("seconds,objective\n")
        for t, obj in points:
            f.write(f"{_format_number(t)},{_format_number(obj)}\n")
        if proven_optimal:
            f.write("optimal\n")
    return path


def resample_trace(points: Sequence[Tuple[float, float]],
                   interval: float = BENCH_POLL_INTERVAL_SECONDS) -> List[Tuple[float, float]]:
    """Best objective known at every multiple of `interval`, up to the last event."""
    if not points:
        return []
    polled = []
    k = max(1, math.ceil(points[0][0] / interval - 1e-12))
    last = points[-1][0]
    idx = 0
    best = None
    while True:
        t = k * interval
        while idx < len(points) and points[idx][0] <= t + 1e-12:
            best = points[idx][1]
            idx += 1
        if best is not None:
            polled.append((t, best))
        if t >= last - 1e-12:
            break
        k += 1
    return polled


def first_time_at_or_below(points: Sequence[Tuple[float, float]], e_ref: float) -> Optional[float]:
    for t, obj in points:
        if obj <= e_ref + _FEASIBILITY_TOLERANCE:
            return t
    return None


def ingest_trace(path: str, e_ref: float, poll_interval: Optional[float] = None) -> Optional[float]:
    """Earliest time with objective <= e_ref; None when never reached."""
    trace = read_trace(path)
    points = resample_trace(trace.points, poll_interval) if poll_interval else trace.points
    reached = first_time_at_or_below(points, e_ref)
    if reached is None:
        logging.info(f"Trace {path} never reaches {e_ref}")
    return reached


def warm_start_from_sa(inst: HuboInstance, m: MipModel, path: str, n_sweep: int = 10, n_runs: int = 1,
                       seed: Optional[int] = None) -> Tuple[str, float]:
    """Minimal SA run whose best bitstring becomes the warm start; returns (path, energy)."""
    result = anneal(inst, SaConfig(n_sweep=n_sweep, n_runs=n_runs, seed=seed))
    export_warm_start(m, result.best_spin, path)
    return path, result.best_energy


def forced_objective(m: MipModel, x: Sequence[int]) -> float:
    return objective_value(m, complete_assignment(m, x))


def spins_objective(m: MipModel, s: Sequence[int]) -> float:
    return forced_objective(m, spins_to_bits(np.asarray(s)))
