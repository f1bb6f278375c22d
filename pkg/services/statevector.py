"""
Counterdiabatic program construction and exact statevector simulation.

Conventions:
  * amplitude index bit q is qubit q (qubit 0 = least significant bit);
  * bitstrings list qubit 0 first, '0' <-> spin +1;
  * a gate (P, angle) applies exp(-i * angle * P / 2).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import CapacityError, DegenerateMixerError, DimensionError
from core.hubo import HuboInstance, bitstring, energies
from core.sampler import make_rng
from core.topology import LayoutPlan, check_routable
from settings import DEFAULT_TRANSVERSE_FIELD, SIMULATOR_MAX_QUBITS

LAYER_KINDS = ("single", "three_body", "two_body", "swap")
THREE_BODY_PATTERNS = ("YZZ", "ZYZ", "ZZY")
TWO_BODY_PATTERNS = ("YZ", "ZY")


# --- Mixer ---

@dataclass
class MixerField:
    hx: np.ndarray
    hb: np.ndarray

    def __post_init__(self):
        self.hx = np.asarray(self.hx, dtype=np.float64)
        self.hb = np.asarray(self.hb, dtype=np.float64)
        if self.hx.shape != self.hb.shape or self.hx.ndim != 1:
            raise DimensionError(f"hx and hb must be equal-length vectors, got {self.hx.shape} and {self.hb.shape}")

    @property
    def num_qubits(self) -> int:
        return int(self.hx.shape[0])

    @classmethod
    def uniform(cls, num_qubits: int, hx: float = DEFAULT_TRANSVERSE_FIELD,
                hb: Optional[Sequence[float]] = None) -> "MixerField":
        bias = np.zeros(num_qubits) if hb is None else np.asarray(hb, dtype=np.float64)
        return cls(np.full(num_qubits, float(hx)), bias)

    def energy(self) -> float:
        """Ground energy of sum_i hx_i X_i + hb_i Z_i."""
        return float(-np.sqrt(self.hx ** 2 + self.hb ** 2).sum())


def prep_angles(f: MixerField) -> np.ndarray:
    """
    R_y angles whose product state is the ground state of the mixer:
    cos(theta/2)|0> + sin(theta/2)|1> is the lowest eigenvector of
    [[hb, hx], [hx, -hb]].
    """
    hx, hb = f.hx, f.hb
    degenerate = np.flatnonzero((hx == 0.0) & (hb == 0.0))
    if degenerate.size:
        raise DegenerateMixerError(f"Both mixer fields vanish on qubit {int(degenerate[0])}")
    r = np.sqrt(hx ** 2 + hb ** 2)
    theta = np.empty_like(hx)
    zero_x = hx == 0.0
    theta[zero_x] = np.where(hb[zero_x] > 0.0, math.pi, 0.0)
    nz = ~zero_x
    theta[nz] = 2.0 * np.arctan(-(r[nz] + hb[nz]) / hx[nz])
    return theta


def prepare_state(f: MixerField) -> np.ndarray:
    _check_capacity(f.num_qubits)
    theta = prep_angles(f)
    factors = [np.array([math.cos(t / 2.0), math.sin(t / 2.0)], dtype=np.complex128) for t in theta]
    # kron(v_{N-1}, ..., v_0) puts qubit 0 on the least significant bit.
    return reduce(np.kron, reversed(factors), np.ones(1, dtype=np.complex128))


def basis_state(num_qubits: int, bits: Optional[str] = None) -> np.ndarray:
    _check_capacity(num_qubits)
    psi = np.zeros(1 << num_qubits, dtype=np.complex128)
    code = 0 if bits is None else sum(1 << q for q, ch in enumerate(bits) if ch == '1')
    psi[code] = 1.0
    return psi


# --- Programs ---

@dataclass(frozen=True)
class Gate:
    pauli: str
    qubits: Tuple[int, ...]
    angle: float


@dataclass
class ProgramLayer:
    kind: str
    index: int
    gates: List[Gate] = field(default_factory=list)


@dataclass
class CdProgram:
    num_qubits: int
    layers: List[ProgramLayer] = field(default_factory=list)

    @property
    def gates(self) -> List[Gate]:
        return [g for layer in self.layers for g in layer.gates]

    def gate_count(self, kind: Optional[str] = None) -> int:
        return sum(len(l.gates) for l in self.layers if kind is None or l.kind == kind)

    @property
    def depth(self) -> int:
        return sum(1 for l in self.layers if l.gates)

    def scaled(self, factor: float) -> "CdProgram":
        return CdProgram(self.num_qubits, [
            ProgramLayer(l.kind, l.index, [Gate(g.pauli, g.qubits, g.angle * factor) for g in l.gates])
            for l in self.layers
        ])


def _three_body_layers(inst: HuboInstance, f: MixerField, gamma: float, groups: Sequence[Sequence[tuple]],
                       emitted: set, layer_index: int) -> List[ProgramLayer]:
    layers = []
    for group in groups:
        keys = []
        for path in group:
            key = tuple(sorted(int(v) for v in path))
            if key not in emitted:
                emitted.add(key)
                keys.append(key)
        for pattern in THREE_BODY_PATTERNS:
            y = pattern.index('Y')
            gates = [Gate(pattern, key, gamma * inst.cubic.get(key, 0.0) * f.hx[key[y]]) for key in keys]
            layers.append(ProgramLayer("three_body", layer_index, gates))
    return layers


def _two_body_layers(inst: HuboInstance, f: MixerField, gamma: float, groups: Sequence[Sequence[tuple]],
                     emitted: set, layer_index: int) -> List[ProgramLayer]:
    layers = []
    for group in groups:
        keys = []
        for pair in group:
            key = tuple(sorted(int(v) for v in pair))
            if key not in emitted:
                emitted.add(key)
                keys.append(key)
        for pattern in TWO_BODY_PATTERNS:
            y = pattern.index('Y')
            gates = [Gate(pattern, key, gamma * inst.quadratic.get(key, 0.0) * f.hx[key[y]]) for key in keys]
            layers.append(ProgramLayer("two_body", layer_index, gates))
    return layers


def _single_layer(inst: HuboInstance, f: MixerField, gamma: float) -> ProgramLayer:
    return ProgramLayer("single", 0, [
        Gate("Y", (i,), gamma * f.hx[i] * inst.linear.get(i, 0.0)) for i in range(inst.num_vars)
    ])


def _disjoint_groups(keys: Sequence[tuple]) -> List[List[tuple]]:
    """First-fit grouping of terms into qubit-disjoint sets, in key order."""
    groups: List[List[tuple]] = []
    used: List[set] = []
    for key in keys:
        for g, qubits in zip(groups, used):
            if qubits.isdisjoint(key):
                g.append(key)
                qubits.update(key)
                break
        else:
            groups.append([key])
            used.append(set(key))
    return groups


def build_cd_program(inst: HuboInstance, f: MixerField, layout: Optional[LayoutPlan], gamma: float) -> CdProgram:
    """
    First-order counterdiabatic program. Per layout layer: single-qubit gates
    (first layer only), three-body sublayers (one per chosen set and Y
    position), two-body sublayers, then the SWAP layer. A term selected in more
    than one layer is emitted once, at its first selection.

    Without a layout the instance terms are grouped into qubit-disjoint
    sublayers directly (all-to-all connectivity).
    """
    if f.num_qubits != inst.num_vars:
        raise DimensionError(f"Mixer has {f.num_qubits} qubits, instance has {inst.num_vars} variables")
    program = CdProgram(inst.num_vars)
    program.layers.append(_single_layer(inst, f, gamma))
    emitted3: set = set()
    emitted2: set = set()

    if layout is None:
        program.layers += _three_body_layers(inst, f, gamma, _disjoint_groups(sorted(inst.cubic)), emitted3, 0)
        program.layers += _two_body_layers(inst, f, gamma, _disjoint_groups(sorted(inst.quadratic)), emitted2, 0)
        return program

    check_routable(layout, inst)
    for layer in range(layout.num_layers):
        program.layers += _three_body_layers(inst, f, gamma, layout.chosen_three_body[layer], emitted3, layer)
        program.layers += _two_body_layers(inst, f, gamma, layout.chosen_two_body[layer], emitted2, layer)
        if layer < len(layout.swap_layers):
            program.layers.append(ProgramLayer("swap", layer, [
                Gate("SWAP", (int(a), int(b)), 0.0) for a, b in layout.swap_layers[layer]
            ]))
    return program


def dump_program(p: CdProgram, path: str) -> str:
    """One gate per line: layer_kind layer_index pauli qubits angle."""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"# qubits {p.num_qubits}\n")
        for layer in p.layers:
            if not layer.gates:
                f.write(f"{layer.kind} {layer.index} - - 0\n")
            for g in layer.gates:
                f.write(f"{layer.kind} {layer.index} {g.pauli} {','.join(str(q) for q in g.qubits)} {float(g.angle)!r}\n")
    return path


def load_program(path: str) -> CdProgram:
    program: Optional[CdProgram] = None
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == '#':
                program = CdProgram(int(parts[2]))
                continue
            kind, index, pauli, qubits, angle = parts
            if program is None:
                raise ValueError(f"{path} has no qubit-count header")
            last = program.layers[-1] if program.layers else None
            # A new sublayer starts at every empty marker or kind/index/pattern change.
            if pauli == '-':
                program.layers.append(ProgramLayer(kind, int(index)))
                continue
            gate = Gate(pauli, tuple(int(q) for q in qubits.split(',')), float(angle))
            if last is None or last.kind != kind or last.index != int(index) or not last.gates \
                    or last.gates[-1].pauli != pauli:
                program.layers.append(ProgramLayer(kind, int(index), [gate]))
            else:
                last.gates.append(gate)
    if program is None:
        raise ValueError(f"{path} is empty")
    return program


# --- Simulation ---

def _check_capacity(num_qubits: int) -> None:
    if num_qubits > SIMULATOR_MAX_QUBITS:
        raise CapacityError(f"{num_qubits} qubits exceeds the simulator cap of {SIMULATOR_MAX_QUBITS}")


def apply_pauli(psi: np.ndarray, pauli: str, qubits: Sequence[int]) -> np.ndarray:
    """P|psi> for a Pauli string over the listed qubits."""
    xmask = zmask = 0
    n_y = 0
    for ch, q in zip(pauli, qubits):
        bit = 1 << int(q)
        if ch in ('X', 'Y'):
            xmask |= bit
        if ch in ('Z', 'Y'):
            zmask |= bit
        n_y += ch == 'Y'
    idx = np.arange(psi.shape[0], dtype=np.int64)
    src = idx ^ xmask
    sign = 1 - 2 * (np.bitwise_count(src & zmask) & 1).astype(np.int64)
    return (1j ** n_y) * sign * psi[src]


def apply_pauli_rotation(psi: np.ndarray, pauli: str, qubits: Sequence[int], angle: float) -> np.ndarray:
    if angle == 0.0:
        return psi
    return math.cos(angle / 2.0) * psi - 1j * math.sin(angle / 2.0) * apply_pauli(psi, pauli, qubits)


def simulate(p: CdProgram, init: np.ndarray, repeats: int = 1) -> np.ndarray:
    """Applies every gate in program order; SWAP gates act on physical positions and are identity here."""
    _check_capacity(p.num_qubits)
    psi = np.asarray(init, dtype=np.complex128)
    if psi.shape != (1 << p.num_qubits,):
        raise DimensionError(f"State has {psi.shape[0]} amplitudes, program needs {1 << p.num_qubits}")
    psi = psi.copy()
    for _ in range(repeats):
        for layer in p.layers:
            if layer.kind == "swap":
                continue
            for g in layer.gates:
                psi = apply_pauli_rotation(psi, g.pauli, g.qubits, g.angle)
    return psi


# --- Shots ---

@dataclass
class ShotSet:
    """Distinct outcomes (spin rows) with multiplicities and cached energies."""
    spins: np.ndarray
    counts: np.ndarray
    energies: Optional[np.ndarray] = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def bitstrings(self) -> List[str]:
        return [bitstring(row) for row in self.spins]

    def pairs(self) -> List[Tuple[str, int]]:
        return list(zip(self.bitstrings(), (int(c) for c in self.counts)))

    def with_energies(self, inst: HuboInstance) -> "ShotSet":
        if self.energies is None:
            self.energies = energies(inst, self.spins)
        return self

    def summary(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"distinct": int(self.spins.shape[0]), "shots": self.total}
        if self.energies is not None and self.energies.size:
            data["min_energy"] = float(self.energies.min())
            data["mean_energy"] = float((self.energies * self.counts).sum() / self.total)
        return data


def _codes_to_spins(codes: np.ndarray, num_qubits: int) -> np.ndarray:
    bits = (codes[:, None] >> np.arange(num_qubits, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int64)


def _from_codes(codes: np.ndarray, num_qubits: int) -> ShotSet:
    distinct, counts = np.unique(codes, return_counts=True)
    return ShotSet(_codes_to_spins(distinct, num_qubits), counts.astype(np.int64))


def sample_shots(sv: np.ndarray, n_shots: int, seed: Optional[int] = None, bitflip_prob: float = 0.0,
                 noisy_layers: int = 1) -> ShotSet:
    """
    Multinomial sampling from |amplitude|^2. With bitflip_prob > 0 every
    shot bit is flipped independently once per noisy layer.
    """
    probs = np.abs(np.asarray(sv)) ** 2
    probs = probs / probs.sum()
    num_qubits = int(probs.shape[0]).bit_length() - 1
    rng = make_rng(seed)
    counts = rng.multinomial(int(n_shots), probs)
    codes = np.flatnonzero(counts).astype(np.int64)
    if bitflip_prob <= 0.0:
        return ShotSet(_codes_to_spins(codes, num_qubits), counts[codes].astype(np.int64))

    # L binary symmetric channels compose to one with (1 - (1 - 2p)^L) / 2.
    flip = (1.0 - (1.0 - 2.0 * bitflip_prob) ** max(1, noisy_layers)) / 2.0
    expanded = np.repeat(codes, counts[codes])
    mask = rng.random((expanded.shape[0], num_qubits)) < flip
    weights = (1 << np.arange(num_qubits, dtype=np.int64))
    expanded = expanded ^ (mask.astype(np.int64) @ weights)
    return _from_codes(expanded, num_qubits)


def statevector_norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(psi))


def log_program(p: CdProgram) -> None:
    logging.info(f"CD program on {p.num_qubits} qubits: {p.gate_count('single')} single, "
                 f"{p.gate_count('three_body')} three-body, {p.gate_count('two_body')} two-body gates, "
                 f"depth {p.depth}")
