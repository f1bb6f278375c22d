"""
HUBO instances in spin (p-spin Ising) and binary form.

Spin form:   E(s) = sum h_i s_i + sum J_mn s_m s_n + sum K_pqr s_p s_q s_r + offset
Binary form: F(x) = sum T_i x_i + sum T_ij x_i x_j + sum T_ijk x_i x_j x_k + offset
linked by x_i = (1 - s_i) / 2, so s = +1 <-> x = 0.

Bitstrings are written qubit 0 first; the lexicographically smallest
bitstring is the tie-break for degenerate minima.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.errors import CapacityError, DimensionError, InstanceFormatError, UndefinedRatioError
from settings import BRUTE_FORCE_MAX_VARS

Pair = Tuple[int, int]
Triple = Tuple[int, int, int]

ENERGY_TOLERANCE = 1e-9
_BRUTE_FORCE_BLOCK_BITS = 16


# --- Key canonicalization ---

def _canonical_key(indices: Iterable[int], num_vars: int, arity: int) -> Tuple[int, ...]:
    key = tuple(sorted(int(i) for i in indices))
    if len(key) != arity:
        raise InstanceFormatError(f"Expected {arity} indices, got {len(key)}: {key}")
    if len(set(key)) != arity:
        raise InstanceFormatError(f"Repeated index in term {key}")
    if key[0] < 0 or key[-1] >= num_vars:
        raise InstanceFormatError(f"Index out of range [0, {num_vars}) in term {key}")
    return key


def _accumulate(terms: Iterable[Tuple[Sequence[int], float]], num_vars: int, arity: int) -> Dict[tuple, float]:
    """Sums coefficients of duplicate hyperedges under their sorted key."""
    out: Dict[tuple, float] = {}
    for indices, coef in terms:
        value = float(coef)
        if not np.isfinite(value):
            raise InstanceFormatError(f"Non-finite coefficient {coef} on term {tuple(indices)}")
        key = _canonical_key(indices, num_vars, arity)
        out[key] = out.get(key, 0.0) + value
    return out


def _items(terms: Any) -> Iterable[Tuple[Sequence[int], float]]:
    if terms is None:
        return []
    if isinstance(terms, Mapping):
        return [((k,) if isinstance(k, (int, np.integer)) else k, v) for k, v in terms.items()]
    return [(row[:-1], row[-1]) for row in terms]


# --- Domain types ---

@dataclass(frozen=True)
class HuboInstance:
    """Spin-form instance. Immutable after construction; share freely between workers."""
    num_vars: int
    linear: Dict[int, float]
    quadratic: Dict[Pair, float]
    cubic: Dict[Triple, float]
    offset: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, num_vars: int, linear: Any = None, quadratic: Any = None, cubic: Any = None,
              offset: float = 0.0, metadata: Optional[Dict[str, Any]] = None) -> "HuboInstance":
        """
        Canonical constructor. Terms may be given as mappings (index or index
        tuple -> coefficient) or as rows [i.., coef]. Duplicate hyperedges
        accumulate.
        """
        if int(num_vars) < 1:
            raise InstanceFormatError(f"num_vars must be >= 1, got {num_vars}")
        n = int(num_vars)
        lin = {k[0]: v for k, v in _accumulate(_items(linear), n, 1).items()}
        if not np.isfinite(float(offset)):
            raise InstanceFormatError("Offset must be finite")
        return cls(
            num_vars=n,
            linear=dict(sorted(lin.items())),
            quadratic=dict(sorted(_accumulate(_items(quadratic), n, 2).items())),
            cubic=dict(sorted(_accumulate(_items(cubic), n, 3).items())),
            offset=float(offset),
            metadata=dict(metadata or {}),
        )

    # Flat arrays for vectorized evaluation.
    @cached_property
    def h(self) -> np.ndarray:
        h = np.zeros(self.num_vars, dtype=np.float64)
        for i, v in self.linear.items():
            h[i] = v
        return h

    @cached_property
    def pair_index(self) -> np.ndarray:
        return np.array(list(self.quadratic.keys()), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def pair_coef(self) -> np.ndarray:
        return np.array(list(self.quadratic.values()), dtype=np.float64)

    @cached_property
    def triple_index(self) -> np.ndarray:
        return np.array(list(self.cubic.keys()), dtype=np.int64).reshape(-1, 3)

    @cached_property
    def triple_coef(self) -> np.ndarray:
        return np.array(list(self.cubic.values()), dtype=np.float64)

    @cached_property
    def neighbours(self) -> List[Tuple[List[Tuple[int, float]], List[Tuple[int, int, float]]]]:
        """Per spin: pair partners (j, J) and triple partners (q, r, K)."""
        table = [([], []) for _ in range(self.num_vars)]
        for (m, n), coef in self.quadratic.items():
            table[m][0].append((n, coef))
            table[n][0].append((m, coef))
        for (p, q, r), coef in self.cubic.items():
            table[p][1].append((q, r, coef))
            table[q][1].append((p, r, coef))
            table[r][1].append((p, q, coef))
        return table

    @property
    def num_terms(self) -> int:
        return len(self.linear) + len(self.quadratic) + len(self.cubic)

    def is_zero(self) -> bool:
        return not any(self.linear.values()) and not any(self.quadratic.values()) and not any(self.cubic.values())


@dataclass(frozen=True)
class BinaryPolynomial:
    """Binary-form cost F(x): coefficients over sorted index subsets plus offset."""
    num_vars: int
    linear: Dict[int, float]
    quadratic: Dict[Pair, float]
    cubic: Dict[Triple, float]
    offset: float = 0.0

    @classmethod
    def build(cls, num_vars: int, linear: Any = None, quadratic: Any = None, cubic: Any = None,
              offset: float = 0.0) -> "BinaryPolynomial":
        inst = HuboInstance.build(num_vars, linear, quadratic, cubic, offset)
        return cls(inst.num_vars, inst.linear, inst.quadratic, inst.cubic, inst.offset)


# --- Spin / bit helpers ---

def as_spins(s: Any, num_vars: int) -> np.ndarray:
    spins = np.asarray(s, dtype=np.int64).reshape(-1)
    if spins.shape[0] != num_vars:
        raise DimensionError(f"Spin configuration has length {spins.shape[0]}, instance has {num_vars} variables")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("Spin values must be +1 or -1")
    return spins


def spins_to_bits(s: Any) -> np.ndarray:
    return ((1 - np.asarray(s, dtype=np.int64)) // 2).astype(np.int64)


def bits_to_spins(x: Any) -> np.ndarray:
    return (1 - 2 * np.asarray(x, dtype=np.int64)).astype(np.int64)


def bitstring(s: Any) -> str:
    return ''.join(str(int(b)) for b in spins_to_bits(s))


def spins_from_bitstring(text: str) -> np.ndarray:
    text = text.strip()
    if not text or set(text) - {'0', '1'}:
        raise InstanceFormatError(f"Not a bitstring: {text[:40]!r}")
    return bits_to_spins([int(c) for c in text])


# --- Energy ---

def energy(inst: HuboInstance, s: Any) -> float:
    """Spin-form energy of a single configuration."""
    spins = as_spins(s, inst.num_vars)
    return float(energies(inst, spins.reshape(1, -1))[0])


def energies(inst: HuboInstance, spins: np.ndarray) -> np.ndarray:
    """Energies of the configurations in the rows of `spins`."""
    S = np.asarray(spins, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] != inst.num_vars:
        raise DimensionError(f"Expected an (M, {inst.num_vars}) spin matrix, got shape {S.shape}")
    total = S @ inst.h + inst.offset
    if len(inst.quadratic):
        idx = inst.pair_index
        total += (S[:, idx[:, 0]] * S[:, idx[:, 1]]) @ inst.pair_coef
    if len(inst.cubic):
        idx = inst.triple_index
        total += (S[:, idx[:, 0]] * S[:, idx[:, 1]] * S[:, idx[:, 2]]) @ inst.triple_coef
    return total


def local_field(inst: HuboInstance, s: Any, i: int) -> float:
    spins = as_spins(s, inst.num_vars)
    pairs, triples = inst.neighbours[i]
    value = inst.linear.get(i, 0.0)
    for j, coef in pairs:
        value += coef * spins[j]
    for q, r, coef in triples:
        value += coef * spins[q] * spins[r]
    return float(value)


def flip_delta(inst: HuboInstance, s: Any, i: int) -> float:
    """energy(flip(s, i)) - energy(s)."""
    spins = as_spins(s, inst.num_vars)
    return -2.0 * spins[i] * local_field(inst, spins, i)


def max_flip_bounds(inst: HuboInstance) -> np.ndarray:
    """Per-spin upper bound 2(|h_i| + sum |J| + sum |K|) on the flip energy change."""
    bound = np.abs(inst.h).copy()
    if len(inst.quadratic):
        np.add.at(bound, inst.pair_index.reshape(-1), np.repeat(np.abs(inst.pair_coef), 2))
    if len(inst.cubic):
        np.add.at(bound, inst.triple_index.reshape(-1), np.repeat(np.abs(inst.triple_coef), 3))
    return 2.0 * bound


# --- Binary <-> spin conversion ---

def to_binary(inst: HuboInstance) -> BinaryPolynomial:
    """Substitutes s_i = 1 - 2 x_i and collects monomials."""
    lin: Dict[int, float] = {}
    quad: Dict[Pair, float] = {}
    cub: Dict[Triple, float] = {}
    offset = inst.offset

    def add(store, key, value):
        store[key] = store.get(key, 0.0) + value

    for i, h in inst.linear.items():
        offset += h
        add(lin, i, -2.0 * h)
    for (m, n), J in inst.quadratic.items():
        offset += J
        add(lin, m, -2.0 * J)
        add(lin, n, -2.0 * J)
        add(quad, (m, n), 4.0 * J)
    for (p, q, r), K in inst.cubic.items():
        offset += K
        for i in (p, q, r):
            add(lin, i, -2.0 * K)
        for pair in ((p, q), (p, r), (q, r)):
            add(quad, pair, 4.0 * K)
        add(cub, (p, q, r), -8.0 * K)

    return BinaryPolynomial(
        num_vars=inst.num_vars,
        linear=dict(sorted(lin.items())),
        quadratic=dict(sorted(quad.items())),
        cubic=dict(sorted(cub.items())),
        offset=offset,
    )


def to_spin(poly: BinaryPolynomial, metadata: Optional[Dict[str, Any]] = None) -> HuboInstance:
    """Substitutes x_i = (1 - s_i) / 2; inverse of to_binary."""
    lin: Dict[int, float] = {}
    quad: Dict[Pair, float] = {}
    cub: Dict[Triple, float] = {}
    offset = poly.offset

    def add(store, key, value):
        store[key] = store.get(key, 0.0) + value

    for i, c in poly.linear.items():
        offset += c / 2.0
        add(lin, i, -c / 2.0)
    for (i, j), c in poly.quadratic.items():
        offset += c / 4.0
        add(lin, i, -c / 4.0)
        add(lin, j, -c / 4.0)
        add(quad, (i, j), c / 4.0)
    for (p, q, r), c in poly.cubic.items():
        offset += c / 8.0
        for i in (p, q, r):
            add(lin, i, -c / 8.0)
        for pair in ((p, q), (p, r), (q, r)):
            add(quad, pair, c / 8.0)
        add(cub, (p, q, r), -c / 8.0)

    return HuboInstance.build(poly.num_vars, lin, quad, cub, offset, metadata)


def evaluate(poly: BinaryPolynomial, x: Any) -> float:
    """F(x) for a single 0/1 assignment."""
    bits = np.asarray(x, dtype=np.float64).reshape(-1)
    if bits.shape[0] != poly.num_vars:
        raise DimensionError(f"Assignment has length {bits.shape[0]}, polynomial has {poly.num_vars} variables")
    value = poly.offset
    for i, c in poly.linear.items():
        value += c * bits[i]
    for (i, j), c in poly.quadratic.items():
        value += c * bits[i] * bits[j]
    for (p, q, r), c in poly.cubic.items():
        value += c * bits[p] * bits[q] * bits[r]
    return float(value)


# --- Exact oracle ---

def _block_spins(start: int, count: int, num_vars: int) -> np.ndarray:
    # Qubit 0 is the most significant bit of the scan code, so increasing
    # codes enumerate bitstrings in lexicographic order.
    codes = np.arange(start, start + count, dtype=np.int64)
    shifts = np.arange(num_vars - 1, -1, -1, dtype=np.int64)
    bits = (codes[:, None] >> shifts[None, :]) & 1
    return 1 - 2 * bits


def brute_force_ground_state(inst: HuboInstance, max_vars: Optional[int] = None) -> Tuple[np.ndarray, float]:
    """
    Exhaustive minimum over all 2^N configurations.

    Returns (spins, energy). Among configurations within ENERGY_TOLERANCE of the
    minimum, the lexicographically smallest bitstring wins.
    """
    cap = BRUTE_FORCE_MAX_VARS if max_vars is None else int(max_vars)
    n = inst.num_vars
    if n > cap:
        raise CapacityError(f"Brute force is capped at {cap} variables, instance has {n}")

    total = 1 << n
    block = 1 << min(n, _BRUTE_FORCE_BLOCK_BITS)
    best_code, best_energy = -1, np.inf
    for start in range(0, total, block):
        values = energies(inst, _block_spins(start, block, n))
        block_min = float(values.min())
        if block_min < best_energy - ENERGY_TOLERANCE:
            first = int(np.flatnonzero(values <= block_min + ENERGY_TOLERANCE)[0])
            best_code, best_energy = start + first, float(values[first])

    spins = _block_spins(best_code, 1, n)[0]
    return spins, best_energy


def approximation_ratio(e: float, e_gs: float) -> float:
    if e_gs == 0.0:
        raise UndefinedRatioError("Approximation ratio is undefined for a zero ground-state energy")
    return e / e_gs


def is_comparable(e: float, e_gs: float) -> bool:
    """False when E and E_GS differ in sign; the ratio is then reported but not comparable."""
    return e_gs != 0.0 and (e > 0) == (e_gs > 0) and (e < 0) == (e_gs < 0)


# --- Random instances (tests and desk-scale screening) ---

def random_instance(num_vars: int, seed: int, pair_density: float = 0.5, triple_density: float = 0.1,
                    sampler: Any = None) -> HuboInstance:
    """
    Dense random 1/2/3-body instance. Coefficients come from `sampler`
    (a CoefficientSampler) when given, else from a standard normal.
    """
    rng = np.random.default_rng(seed)
    pairs = [p for p in combinations(range(num_vars), 2) if rng.random() < pair_density]
    triples = [t for t in combinations(range(num_vars), 3) if rng.random() < triple_density]
    count = num_vars + len(pairs) + len(triples)
    if sampler is not None:
        coefs = sampler.with_seed(int(rng.integers(2**32))).sample_many(count)
    else:
        coefs = rng.standard_normal(count)
    lin = {i: coefs[i] for i in range(num_vars)}
    quad = {p: coefs[num_vars + k] for k, p in enumerate(pairs)}
    cub = {t: coefs[num_vars + len(pairs) + k] for k, t in enumerate(triples)}
    return HuboInstance.build(num_vars, lin, quad, cub, metadata={"generator": "random", "seed": seed})


# --- JSON interchange ---

def instance_to_dict(inst: HuboInstance) -> Dict[str, Any]:
    return {
        "num_vars": inst.num_vars,
        "linear": [[i, h] for i, h in inst.linear.items()],
        "quadratic": [[m, n, J] for (m, n), J in inst.quadratic.items()],
        "cubic": [[p, q, r, K] for (p, q, r), K in inst.cubic.items()],
        "offset": inst.offset,
        "metadata": inst.metadata,
    }


def instance_from_dict(data: Mapping[str, Any]) -> HuboInstance:
    try:
        return HuboInstance.build(
            int(data["num_vars"]),
            linear=[tuple(row) for row in data.get("linear", [])],
            quadratic=[tuple(row) for row in data.get("quadratic", [])],
            cubic=[tuple(row) for row in data.get("cubic", [])],
            offset=float(data.get("offset", 0.0)),
            metadata=data.get("metadata") or {},
        )
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise InstanceFormatError(f"Malformed instance document: {e}") from e


def dumps_instance(inst: HuboInstance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, indent=1)


def instance_digest(inst: HuboInstance) -> str:
    return hashlib.sha256(dumps_instance(inst).encode('utf-8')).hexdigest()[:16]


def save_instance(inst: HuboInstance, path: str) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps_instance(inst))
        f.write('\n')
    logging.info(f"Wrote instance N={inst.num_vars} terms={inst.num_terms} to {path}")
    return path


def load_instance(path: str) -> HuboInstance:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path} is not valid JSON: {e}") from e
    return instance_from_dict(data)
