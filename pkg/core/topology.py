"""
Coupling maps, parallel interaction sets and SWAP-layer instance layouts.

Qubit labels in a LayoutPlan are LOGICAL labels. Layer 0 uses the identity
placement; every SWAP layer exchanges the physical positions of the qubits
in each swapped pair. A pair (a, b) selected at layer l is executable when
(positions[l][a], positions[l][b]) is an edge of the initial map.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from core.errors import InstanceFormatError, InvalidMatchingError, RoutingError
from core.hubo import HuboInstance, to_binary
from core.sampler import CoefficientSampler, make_rng
from settings import HERON_LAYOUT_PATH

Pair = Tuple[int, int]
Path3 = Tuple[int, int, int]

# heavy_hex(HERON_ROWS, HERON_COLS, full_lines=True) is the 156-qubit device layout.
HERON_ROWS = 7
HERON_COLS = 3


# --- Coupling maps ---

@dataclass(frozen=True)
class CouplingMap:
    num_qubits: int
    edges: Tuple[Pair, ...]
    name: str = ""

    @classmethod
    def build(cls, num_qubits: int, edges: Iterable[Sequence[int]], name: str = "") -> "CouplingMap":
        canonical = set()
        for edge in edges:
            a, b = (int(v) for v in edge)
            if a == b:
                raise InstanceFormatError(f"Self-loop on qubit {a}")
            if not (0 <= a < num_qubits and 0 <= b < num_qubits):
                raise InstanceFormatError(f"Edge {(a, b)} outside [0, {num_qubits})")
            canonical.add((min(a, b), max(a, b)))
        return cls(int(num_qubits), tuple(sorted(canonical)), name)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edge_set

    @property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def to_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_qubits))
        g.add_edges_from(self.edges)
        return g

    def degree_sequence(self) -> List[int]:
        degree = [0] * self.num_qubits
        for a, b in self.edges:
            degree[a] += 1
            degree[b] += 1
        return degree

    def paths(self) -> List[Path3]:
        """Every length-2 path as (p, q, r) with center q and p < r, sorted."""
        adjacency: Dict[int, List[int]] = {q: [] for q in range(self.num_qubits)}
        for a, b in self.edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        found = []
        for q, nbrs in adjacency.items():
            nbrs = sorted(nbrs)
            for i, p in enumerate(nbrs):
                for r in nbrs[i + 1:]:
                    found.append((p, q, r))
        return sorted(found)


def coupling_map_to_dict(c: CouplingMap) -> Dict[str, Any]:
    data: Dict[str, Any] = {"num_qubits": c.num_qubits, "edges": [list(e) for e in c.edges]}
    if c.name:
        data["name"] = c.name
    return data


def coupling_map_from_dict(data: Mapping[str, Any]) -> CouplingMap:
    try:
        return CouplingMap.build(int(data["num_qubits"]), data["edges"], str(data.get("name", "")))
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceFormatError(f"Malformed coupling map document: {e}") from e


def save_coupling_map(c: CouplingMap, path: str) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(coupling_map_to_dict(c), f, indent=1)
    return path


def load_coupling_map(path: str) -> CouplingMap:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return coupling_map_from_dict(json.load(f))
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path} is not valid JSON: {e}") from e


# --- Heavy-hex lattices ---

def heavy_hex(rows: int, cols: int, full_lines: bool = False) -> CouplingMap:
    """
    Heavy-hex lattice of `rows` x `cols` hexagonal cells.

    Qubits sit on rows + 1 horizontal lines joined by bridge qubits every four
    columns; consecutive gaps stagger their bridges by two columns. Lines are
    numbered first, each followed by the bridges below it.

    full_lines=False trims every line to the columns its cells use (1 x 1 is a
    single 12-cycle). full_lines=True pads every line to 4(cols + 1) qubits
    with the device bridge offsets; heavy_hex(7, 3, True) has 156 qubits.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got {rows} x {cols}")

    def gap_offset(g: int) -> int:
        if full_lines:
            return 3 if g % 2 == 0 else 1
        return 0 if g % 2 == 0 else 2

    bridge_cols = [[gap_offset(g) + 4 * k for k in range(cols + 1)] for g in range(rows)]

    line_span: List[Tuple[int, int]] = []
    for r in range(rows + 1):
        if full_lines:
            line_span.append((0, 4 * (cols + 1) - 1))
            continue
        adjacent = [g for g in (r - 1, r) if 0 <= g < rows]
        line_span.append((min(bridge_cols[g][0] for g in adjacent), max(bridge_cols[g][-1] for g in adjacent)))

    line_start: List[int] = []
    bridge_start: List[int] = []
    index = 0
    for r in range(rows + 1):
        line_start.append(index)
        index += line_span[r][1] - line_span[r][0] + 1
        if r < rows:
            bridge_start.append(index)
            index += cols + 1

    def line_qubit(r: int, col: int) -> int:
        return line_start[r] + col - line_span[r][0]

    edges: List[Pair] = []
    for r in range(rows + 1):
        lo, hi = line_span[r]
        edges.extend((line_qubit(r, c), line_qubit(r, c + 1)) for c in range(lo, hi))
    for g in range(rows):
        for k, col in enumerate(bridge_cols[g]):
            bridge = bridge_start[g] + k
            edges.append((line_qubit(g, col), bridge))
            edges.append((bridge, line_qubit(g + 1, col)))

    name = f"heavy_hex_{rows}x{cols}" + ("_full" if full_lines else "")
    return CouplingMap.build(index, edges, name)


def heron_r2(path: Optional[str] = None) -> CouplingMap:
    """The 156-qubit preset shipped in data/heron_r2_156.json."""
    return load_coupling_map(path or HERON_LAYOUT_PATH)


def _lattice_candidates(max_side: int = 12) -> List[Tuple[int, int, int]]:
    sizes = []
    for r in range(1, max_side + 1):
        for c in range(1, max_side + 1):
            sizes.append((heavy_hex(r, c).num_qubits, r, c))
    return sorted(sizes)


def heavy_hex_patch(num_qubits: int) -> CouplingMap:
    """
    Connected desk-scale patch: the first `num_qubits` vertices, by BFS
    distance from qubit 0 then by index, of the smallest trimmed lattice
    holding them, relabeled in that order.
    """
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    for size, r, c in _lattice_candidates():
        if size >= num_qubits:
            lattice = heavy_hex(r, c)
            break
    else:
        raise ValueError(f"No trimmed lattice up to 12 x 12 holds {num_qubits} qubits")

    distance = nx.single_source_shortest_path_length(lattice.to_graph(), 0)
    chosen = sorted(distance, key=lambda q: (distance[q], q))[:num_qubits]
    relabel = {q: i for i, q in enumerate(chosen)}
    edges = [(relabel[a], relabel[b]) for a, b in lattice.edges if a in relabel and b in relabel]
    return CouplingMap.build(num_qubits, edges, f"heavy_hex_patch_{num_qubits}")


# --- Parallel interaction sets ---

@dataclass(frozen=True)
class ParallelSets:
    """Edge coloring (two_body) and length-2-path coloring (three_body), ordered by color index."""
    two_body: Tuple[Tuple[Pair, ...], ...]
    three_body: Tuple[Tuple[Path3, ...], ...]

    @property
    def m2(self) -> int:
        return len(self.two_body)

    @property
    def m3(self) -> int:
        return len(self.three_body)


def _conflict_graph(items: Sequence[tuple]) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(items)
    by_qubit: Dict[int, List[tuple]] = {}
    for item in items:
        for q in item:
            by_qubit.setdefault(q, []).append(item)
    for sharing in by_qubit.values():
        for i, a in enumerate(sharing):
            for b in sharing[i + 1:]:
                g.add_edge(a, b)
    return g


def _greedy_sets(items: List[tuple], order: List[tuple]) -> Tuple[Tuple[tuple, ...], ...]:
    if not items:
        return ()
    colors = nx.greedy_color(_conflict_graph(items), strategy=lambda g, c: iter(order))
    sets: Dict[int, List[tuple]] = {}
    for item, color in colors.items():
        sets.setdefault(color, []).append(item)
    return tuple(tuple(sorted(sets[k])) for k in sorted(sets))


def graph_coloring(c: CouplingMap, seed: Optional[int] = None) -> ParallelSets:
    """
    Greedy coloring: visit edges (paths) in sorted order, or in a seed-permuted
    order, and put each into the first set with no qubit conflict.
    """
    edges = list(c.edges)
    paths = c.paths()
    if seed is None:
        edge_order, path_order = edges, paths
    else:
        rng = make_rng(seed)
        edge_order = [edges[i] for i in rng.permutation(len(edges))]
        path_order = [paths[i] for i in rng.permutation(len(paths))]
    return ParallelSets(_greedy_sets(edges, edge_order), _greedy_sets(paths, path_order))


def swap_register(c: CouplingMap, swaps: Iterable[Sequence[int]]) -> CouplingMap:
    """Relabels vertices by the transpositions in `swaps` (a matching over edges of `c`)."""
    perm = list(range(c.num_qubits))
    seen = set()
    for pair in swaps:
        a, b = (int(v) for v in pair)
        if a == b or a in seen or b in seen:
            raise InvalidMatchingError(f"Swap pair {(a, b)} overlaps another pair")
        if not c.has_edge(a, b):
            raise InvalidMatchingError(f"Swap pair {(a, b)} is not an edge of the coupling map")
        seen.update((a, b))
        perm[a], perm[b] = b, a
    return CouplingMap.build(c.num_qubits, ((perm[a], perm[b]) for a, b in c.edges), c.name)


def _select_largest(sets: Sequence[tuple], count: int, label: str) -> List[int]:
    if count > len(sets):
        logging.warning(f"Requested {count} {label} sets but only {len(sets)} exist; clamping to {len(sets)}")
        count = len(sets)
    ranked = sorted(range(len(sets)), key=lambda k: (-len(sets[k]), k))
    return ranked[:count]


# --- Layout plans ---

@dataclass
class LayoutPlan:
    num_qubits: int
    coupling_edges: List[Pair]
    chosen_two_body: List[List[List[Pair]]]
    chosen_three_body: List[List[List[Path3]]]
    swap_layers: List[List[Pair]]
    positions: List[List[int]]
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def num_layers(self) -> int:
        return len(self.chosen_two_body)

    def pairs(self) -> List[Pair]:
        """Selected pairs in layer/set order, first occurrence only."""
        seen, out = set(), []
        for layer in self.chosen_two_body:
            for group in layer:
                for pair in group:
                    if pair not in seen:
                        seen.add(pair)
                        out.append(pair)
        return out

    def triples(self) -> List[Path3]:
        """Selected paths (p, q, r) with center q, first occurrence of each sorted triple only."""
        seen, out = set(), []
        for layer in self.chosen_three_body:
            for group in layer:
                for path in group:
                    key = tuple(sorted(path))
                    if key not in seen:
                        seen.add(key)
                        out.append(path)
        return out


def generate_layout(c0: CouplingMap, n: int, s2: int, s3: int, seed: Optional[int] = None) -> LayoutPlan:
    """
    Per layer: recolor the current (logical) map, keep the s2 largest pair sets
    and s3 largest path sets, then, unless this is the last layer, swap along
    the first pair set.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s2 < 0 or s3 < 0:
        raise ValueError("S_2q and S_3q must be >= 0")

    current = c0
    positions = list(range(c0.num_qubits))
    chosen2: List[List[List[Pair]]] = []
    chosen3: List[List[List[Path3]]] = []
    swap_layers: List[List[Pair]] = []
    layer_positions: List[List[int]] = []
    available: List[Dict[str, int]] = []

    for layer in range(n):
        layer_seed = None if seed is None else seed + layer
        sets = graph_coloring(current, layer_seed)
        available.append({"m2": sets.m2, "m3": sets.m3})
        chosen2.append([list(sets.two_body[k]) for k in _select_largest(sets.two_body, s2, "two-body")])
        chosen3.append([list(sets.three_body[k]) for k in _select_largest(sets.three_body, s3, "three-body")])
        layer_positions.append(list(positions))

        if layer < n - 1:
            swaps = list(sets.two_body[0]) if sets.two_body else []
            current = swap_register(current, swaps)
            for a, b in swaps:
                positions[a], positions[b] = positions[b], positions[a]
            swap_layers.append(swaps)

    plan = LayoutPlan(
        num_qubits=c0.num_qubits,
        coupling_edges=list(c0.edges),
        chosen_two_body=chosen2,
        chosen_three_body=chosen3,
        swap_layers=swap_layers,
        positions=layer_positions,
        params={"n": n, "s2q": s2, "s3q": s3, "seed": seed, "coupling_map": c0.name, "available_sets": available},
    )
    logging.info(f"Layout on {c0.name or 'map'} (N={c0.num_qubits}, n={n}, S2={s2}, S3={s3}): "
                 f"{len(plan.pairs())} pairs, {len(plan.triples())} triples")
    return plan


def layout_to_dict(layout: LayoutPlan) -> Dict[str, Any]:
    return {
        "num_qubits": layout.num_qubits,
        "coupling_edges": [list(e) for e in layout.coupling_edges],
        "chosen_two_body": [[[list(p) for p in group] for group in layer] for layer in layout.chosen_two_body],
        "chosen_three_body": [[[list(t) for t in group] for group in layer] for layer in layout.chosen_three_body],
        "swap_layers": [[list(p) for p in layer] for layer in layout.swap_layers],
        "positions": layout.positions,
        "params": layout.params,
    }


def layout_from_dict(data: Mapping[str, Any]) -> LayoutPlan:
    try:
        return LayoutPlan(
            num_qubits=int(data["num_qubits"]),
            coupling_edges=[tuple(e) for e in data["coupling_edges"]],
            chosen_two_body=[[[tuple(p) for p in group] for group in layer] for layer in data["chosen_two_body"]],
            chosen_three_body=[[[tuple(t) for t in group] for group in layer] for layer in data["chosen_three_body"]],
            swap_layers=[[tuple(p) for p in layer] for layer in data["swap_layers"]],
            positions=[list(layer) for layer in data["positions"]],
            params=dict(data.get("params") or {}),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceFormatError(f"Malformed layout document: {e}") from e


def save_layout(layout: LayoutPlan, path: str) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(layout_to_dict(layout), f, indent=1, sort_keys=True)
    return path


def load_layout(path: str) -> LayoutPlan:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return layout_from_dict(json.load(f))
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path} is not valid JSON: {e}") from e


def layout_for_instance(inst: HuboInstance) -> Optional[LayoutPlan]:
    data = inst.metadata.get("layout")
    return layout_from_dict(data) if data else None


# --- Routing checks ---

def check_routable(layout: LayoutPlan, inst: Optional[HuboInstance] = None) -> None:
    """
    Raises RoutingError unless every selected interaction sits on initial-map
    edges at its layer and, when `inst` is given, every instance hyperedge is
    one of the selected interactions.
    """
    c0 = set(tuple(e) for e in layout.coupling_edges)

    def adjacent(pos, a, b):
        pa, pb = pos[a], pos[b]
        return (min(pa, pb), max(pa, pb)) in c0

    for layer, pos in enumerate(layout.positions):
        for group in layout.chosen_two_body[layer]:
            for a, b in group:
                if not adjacent(pos, a, b):
                    raise RoutingError(f"Pair {(a, b)} is not adjacent at layer {layer}")
        for group in layout.chosen_three_body[layer]:
            for p, q, r in group:
                if not (adjacent(pos, p, q) and adjacent(pos, q, r)):
                    raise RoutingError(f"Path {(p, q, r)} is not a length-2 path at layer {layer}")

    if inst is None:
        return
    if inst.num_vars != layout.num_qubits:
        raise RoutingError(f"Instance has {inst.num_vars} variables, layout has {layout.num_qubits} qubits")
    pairs = set(layout.pairs())
    triples = set(tuple(sorted(t)) for t in layout.triples())
    for key in inst.quadratic:
        if key not in pairs:
            raise RoutingError(f"Pair term {key} is not selected by the layout")
    for key in inst.cubic:
        if key not in triples:
            raise RoutingError(f"Triple term {key} is not selected by the layout")


def is_routable(layout: LayoutPlan, inst: Optional[HuboInstance] = None) -> bool:
    try:
        check_routable(layout, inst)
    except RoutingError:
        return False
    return True


# --- Instances from layouts ---

def instantiate(layout: LayoutPlan, sampler: CoefficientSampler, seed: Optional[int] = None) -> HuboInstance:
    """
    One sampled coefficient per qubit, then per selected pair, then per selected
    path, in layout order. Interactions selected in more than one layer
    accumulate.
    """
    stream = sampler.with_seed(seed if seed is not None else sampler.seed)
    pair_rows = [pair for layer in layout.chosen_two_body for group in layer for pair in group]
    path_rows = [path for layer in layout.chosen_three_body for group in layer for path in group]
    n = layout.num_qubits
    coefs = stream.sample_many(n + len(pair_rows) + len(path_rows))

    linear = [(i, coefs[i]) for i in range(n)]
    quadratic = [(*pair, coefs[n + k]) for k, pair in enumerate(pair_rows)]
    cubic = [(*path, coefs[n + len(pair_rows) + k]) for k, path in enumerate(path_rows)]

    metadata = {
        "generator": "heavy_hex_layout",
        "distribution": sampler.kind,
        "sampler": stream.config(),
        "seed": seed,
        "s2q": layout.params.get("s2q"),
        "s3q": layout.params.get("s3q"),
        "n": layout.params.get("n"),
        "coupling_map": layout.params.get("coupling_map"),
        "duplicate_pairs": len(pair_rows) - len(set(pair_rows)),
        "duplicate_triples": len(path_rows) - len(set(tuple(sorted(p)) for p in path_rows)),
        "layout": layout_to_dict(layout),
    }
    if metadata["duplicate_pairs"] or metadata["duplicate_triples"]:
        logging.info(f"Accumulated {metadata['duplicate_pairs']} duplicate pairs and "
                     f"{metadata['duplicate_triples']} duplicate triples across SWAP layers")
    return HuboInstance.build(n, linear, quadratic, cubic, 0.0, metadata)


def term_counts(inst: HuboInstance) -> Dict[str, int]:
    """
    Spin-form term counts plus `binary_terms`, the number of distinct monomials
    of the binary-form expansion (a path contributes its two edges, its end
    pair and its triple).
    """
    binary = to_binary(inst)
    return {
        "linear": len(inst.linear),
        "pairs": len(inst.quadratic),
        "triples": len(inst.cubic),
        "spin_terms": inst.num_terms,
        "binary_terms": len(binary.linear) + len(binary.quadratic) + len(binary.cubic),
    }
