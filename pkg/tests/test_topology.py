import logging

import networkx as nx
import pytest

from core.errors import InvalidMatchingError, RoutingError
from core.hubo import HuboInstance
from core.sampler import CoefficientSampler
from core.topology import (CouplingMap, check_routable, generate_layout, graph_coloring, heavy_hex, heavy_hex_patch,
                           heron_r2, instantiate, is_routable, layout_for_instance, layout_from_dict, layout_to_dict,
                           swap_register, term_counts)


def _assert_partition(sets, items):
    flat = [item for group in sets for item in group]
    assert sorted(flat) == sorted(items)
    for group in sets:
        qubits = [q for item in group for q in item]
        assert len(qubits) == len(set(qubits))


class TestLattices:
    def test_single_cell_is_a_twelve_cycle(self):
        c = heavy_hex(1, 1)
        assert c.num_qubits == 12
        assert len(c.edges) == 12
        assert set(c.degree_sequence()) == {2}

    def test_device_size_lattice(self):
        c = heavy_hex(7, 3, full_lines=True)
        assert c.num_qubits == 156
        assert len(c.edges) == 176
        assert max(c.degree_sequence()) == 3
        assert nx.is_connected(c.to_graph())

    def test_heron_preset_matches_generator(self):
        assert heron_r2().edges == heavy_hex(7, 3, full_lines=True).edges

    @pytest.mark.parametrize("n", [5, 12, 14, 16, 20])
    def test_patch_is_connected_heavy_hex(self, n):
        c = heavy_hex_patch(n)
        assert c.num_qubits == n
        assert nx.is_connected(c.to_graph())
        assert max(c.degree_sequence()) <= 3

    def test_paths_have_center_in_middle(self):
        c = CouplingMap.build(4, [(0, 1), (1, 2), (1, 3)])
        assert c.paths() == [(0, 1, 2), (0, 1, 3), (2, 1, 3)]


class TestColoring:
    def test_sets_are_disjoint_partitions(self):
        c = heavy_hex_patch(16)
        sets = graph_coloring(c)
        _assert_partition(sets.two_body, list(c.edges))
        _assert_partition(sets.three_body, c.paths())

    def test_heron_set_counts(self):
        sets = graph_coloring(heron_r2())
        assert sets.m2 == 3
        assert sets.m3 == 6

    def test_seeded_order_is_deterministic(self):
        c = heavy_hex_patch(14)
        assert graph_coloring(c, seed=5) == graph_coloring(c, seed=5)


class TestSwaps:
    def test_swap_relabels_edges(self):
        c = CouplingMap.build(3, [(0, 1), (1, 2)])
        assert swap_register(c, [(0, 1)]).edges == ((0, 1), (0, 2))

    def test_overlapping_pairs_rejected(self):
        c = CouplingMap.build(3, [(0, 1), (1, 2)])
        with pytest.raises(InvalidMatchingError):
            swap_register(c, [(0, 1), (1, 2)])

    def test_non_edge_rejected(self):
        c = CouplingMap.build(3, [(0, 1), (1, 2)])
        with pytest.raises(InvalidMatchingError):
            swap_register(c, [(0, 2)])


class TestLayouts:
    def test_layer_structure(self):
        layout = generate_layout(heavy_hex_patch(14), n=3, s2=1, s3=2)
        assert layout.num_layers == 3
        assert len(layout.swap_layers) == 2
        assert all(len(layer) == 1 for layer in layout.chosen_two_body)
        assert all(len(layer) == 2 for layer in layout.chosen_three_body)
        check_routable(layout)

    def test_no_selection(self):
        layout = generate_layout(heavy_hex_patch(12), n=1, s2=0, s3=0)
        inst = instantiate(layout, CoefficientSampler(seed=1), seed=1)
        assert inst.quadratic == {} and inst.cubic == {}
        assert len(inst.linear) == 12

    def test_clamps_with_warning(self, caplog):
        c = heavy_hex(1, 1)
        with caplog.at_level(logging.WARNING):
            layout = generate_layout(c, n=1, s2=10, s3=10)
        assert "clamping" in caplog.text
        assert len(layout.chosen_two_body[0]) == graph_coloring(c).m2

    def test_instances_are_routable(self):
        layout = generate_layout(heavy_hex_patch(16), n=2, s2=2, s3=3)
        inst = instantiate(layout, CoefficientSampler(kind="cauchy"), seed=8)
        check_routable(layout, inst)
        assert layout_for_instance(inst).pairs() == layout.pairs()

    def test_foreign_term_is_not_routable(self):
        layout = generate_layout(heavy_hex_patch(12), n=1, s2=1, s3=1)
        selected = set(layout.pairs())
        foreign = next((a, b) for a in range(12) for b in range(a + 1, 12) if (a, b) not in selected)
        inst = HuboInstance.build(12, quadratic={foreign: 1.0})
        assert not is_routable(layout, inst)
        with pytest.raises(RoutingError):
            check_routable(layout, inst)

    def test_document_round_trip(self):
        layout = generate_layout(heavy_hex_patch(14), n=2, s2=1, s3=1)
        assert layout_from_dict(layout_to_dict(layout)).triples() == layout.triples()

    def test_term_counts_monotone_in_set_counts(self):
        c = heavy_hex_patch(20)
        sampler = CoefficientSampler(seed=0)
        totals = [term_counts(instantiate(generate_layout(c, 1, s2, s3), sampler, 0))["spin_terms"]
                  for s2, s3 in [(0, 0), (1, 1), (2, 1), (2, 3), (3, 4)]]
        assert totals == sorted(totals)


class TestHeronScale:
    @pytest.mark.parametrize("s2, s3, expected", [(1, 1, 373), (3, 6, 820)])
    def test_binary_term_counts(self, s2, s3, expected):
        layout = generate_layout(heron_r2(), n=1, s2=s2, s3=s3)
        inst = instantiate(layout, CoefficientSampler(seed=0), seed=0)
        counts = term_counts(inst)
        assert counts["binary_terms"] == expected
        assert 250 <= counts["binary_terms"] <= 900
