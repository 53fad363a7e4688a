"""
Test script for graph_distil (n,k)-graphs, labelings, canonical forms and LC orbits
"""

import random

import networkx as nx
import pytest

from graph_distil.exceptions import InvalidCodeError, ParseError, SizeLimitError
from graph_distil.fixtures import code_422_graph, shared_inputs_graph, four_two_graph, four_two_lc_graph, five_qubit_wheel
from graph_distil import graph_code
from graph_distil.graph_code import (
    ExtensionKind,
    Labeling,
    NKGraph,
    apply_nk_permutation,
    canonical_form,
    clear_orbit_cache,
    codeword_generators,
    connected_lc_classes,
    disjoint_union,
    edge_flip,
    extend,
    find_valid_labeling,
    graph_from_graph6,
    graph_from_json,
    is_valid_code,
    is_valid_labeling,
    lc_classes,
    local_complement,
    orbit_canonical_form,
    with_inputs,
)


def random_graph(n_out: int, k_in: int, rng: random.Random) -> NKGraph:
    size = n_out + k_in
    edges = [(u, v) for u in range(size) for v in range(u + 1, size) if rng.random() < 0.5]
    return NKGraph.from_edges(n_out, k_in, edges)


def shuffled(graph: NKGraph, rng: random.Random) -> NKGraph:
    outputs = list(graph.outputs)
    inputs = list(graph.inputs)
    pi_out = dict(zip(outputs, rng.sample(outputs, len(outputs))))
    pi_in = dict(zip(inputs, rng.sample(inputs, len(inputs))))
    return apply_nk_permutation(graph, pi_in, pi_out)


def test_graph_construction():
    """Test edge lists, default inputs and validation"""
    g = NKGraph.from_edges(2, 1, [(0, 1), (1, 2)])
    assert g.inputs == (2,)
    assert g.outputs == (0, 1)
    assert g.edges() == [(0, 1), (1, 2)]
    assert g.neighbors(1) == [0, 2]
    with pytest.raises(ValueError):
        NKGraph.from_edges(2, 0, [(1, 1)])
    with pytest.raises(ValueError):
        NKGraph(2, 0, (0b10, 0b00), ())


def test_local_complement():
    """Test LC toggles edges among neighbours and is an involution"""
    path = NKGraph.from_edges(3, 0, [(0, 1), (1, 2)])
    triangle = local_complement(path, 1)
    assert triangle.has_edge(0, 2)
    assert local_complement(triangle, 1) == path
    assert local_complement(four_two_graph(), 1) == four_two_lc_graph()
    with pytest.raises(IndexError):
        local_complement(path, 5)


def test_edge_flip_only_between_inputs():
    """Test edge flips are restricted to input vertices"""
    g = four_two_graph()
    flipped = edge_flip(g, 4, 5)
    assert flipped.has_edge(4, 5)
    assert edge_flip(flipped, 4, 5) == g
    with pytest.raises(ValueError):
        edge_flip(g, 0, 4)


def test_graph6_envelope():
    """Test the JSON envelope preserves inputs"""
    g = four_two_graph()
    assert graph_from_json(g.to_json()) == g
    assert graph_from_graph6(">>graph6<<" + g.to_graph6(), g.inputs) == g
    with pytest.raises(ParseError):
        graph_from_graph6("D")
    with pytest.raises(ParseError):
        graph_from_json({"inputs": [0]})


def test_codeword_generators():
    """Test codeword generators of the 4->2 graph"""
    rows = codeword_generators(four_two_graph()).rows
    # Z1Z3Z4 and Z2Z3 with outputs numbered from zero
    assert rows == (0b1101, 0b0110)


def test_code_validity():
    """Test rank checks and labeling search"""
    assert is_valid_code(code_422_graph())
    assert is_valid_code(four_two_graph())
    assert not is_valid_code(shared_inputs_graph())
    with pytest.raises(InvalidCodeError):
        find_valid_labeling(shared_inputs_graph())
    g = four_two_graph()
    labeling = find_valid_labeling(g)
    assert is_valid_labeling(g, labeling)
    # Z2Z3 has no support on outputs 0 and 3
    assert not is_valid_labeling(g, Labeling((0, 3, 1, 2), 2))


def test_canonical_form_matches_isomorphism():
    """Test canonical keys agree with partition-preserving isomorphism"""
    rng = random.Random(2)
    match = nx.algorithms.isomorphism.categorical_node_match("role", None)
    for _ in range(60):
        n_out, k_in = rng.choice([(3, 1), (4, 1), (3, 2), (4, 2)])
        a = random_graph(n_out, k_in, rng)
        b = random_graph(n_out, k_in, rng) if rng.random() < 0.5 else shuffled(a, rng)
        same_key = canonical_form(a).key == canonical_form(b).key
        assert same_key == nx.is_isomorphic(a.to_networkx(), b.to_networkx(), node_match=match)


def test_canonical_form_invariant_under_permutation():
    """Test keys are stable under (n,k)-permutations"""
    rng = random.Random(9)
    for _ in range(30):
        g = random_graph(4, 2, rng)
        assert canonical_form(shuffled(g, rng)).key == canonical_form(g).key


def test_orbit_canonical_form():
    """Test orbit keys are invariant under LC and input edge flips"""
    base = orbit_canonical_form(four_two_graph())
    assert orbit_canonical_form(four_two_lc_graph()).key == base.key
    g = four_two_graph()
    rng = random.Random(4)
    for _ in range(10):
        if rng.random() < 0.3:
            g = edge_flip(g, 4, 5)
        else:
            g = local_complement(g, rng.randrange(g.num_vertices))
        assert orbit_canonical_form(g).key == base.key
    assert canonical_form(four_two_graph()).key in base.members
    assert base.orbit_size == len(base.members)
    assert orbit_canonical_form(five_qubit_wheel()).key != base.key


def test_orbit_size_limit():
    """Test oversized orbit requests are refused"""
    big = NKGraph.from_edges(13, 0, [(i, i + 1) for i in range(12)])
    with pytest.raises(SizeLimitError):
        orbit_canonical_form(big)


def test_orbit_cache_is_bounded(monkeypatch):
    """Test the orbit member cache keeps at most its limit and can be cleared"""
    clear_orbit_cache()
    monkeypatch.setattr(graph_code, "_ORBIT_SEED_LIMIT", 3)
    base = orbit_canonical_form(four_two_graph())
    wheel = orbit_canonical_form(five_qubit_wheel())
    assert len(graph_code._orbit_seed) <= 3
    assert orbit_canonical_form(four_two_lc_graph()).key == base.key
    assert orbit_canonical_form(five_qubit_wheel()).key == wheel.key
    assert len(graph_code._orbit_seed) <= 3
    clear_orbit_cache()
    assert not graph_code._orbit_seed
    assert graph_code._orbit_of_key.cache_info().currsize == 0


@pytest.mark.parametrize("num_vertices,count", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 4), (6, 11)])
def test_connected_lc_class_counts(num_vertices, count):
    """Test the number of connected LC classes"""
    classes = connected_lc_classes(num_vertices)
    assert len(classes) == count
    assert all(g.is_connected() for g in classes)


@pytest.mark.slow
def test_connected_lc_class_count_seven():
    """Test the seven-vertex class count"""
    assert len(connected_lc_classes(7)) == 26


def test_extensions():
    """Test output and input extension counts"""
    g = NKGraph.from_edges(2, 1, [(0, 1), (1, 2)])
    outputs = extend(g, ExtensionKind.OUTPUT)
    assert len(outputs) == 7
    assert all(h.n_out == 3 and h.k_in == 1 for h in outputs)
    inputs = extend(g, ExtensionKind.INPUT)
    assert len(inputs) == 3
    assert all(h.k_in == 2 and h.inputs == (2, 3) for h in inputs)


def test_disconnected_classes():
    """Test disconnected classes are multisets of connected ones"""
    assert len(lc_classes(3, include_disconnected=True)) == 3
    assert len(lc_classes(4, include_disconnected=True)) == 2 + 1 + 1 + 1 + 1
    union = disjoint_union([NKGraph(1, 0, (0,), ()), NKGraph.from_edges(2, 0, [(0, 1)])])
    assert union.num_vertices == 3
    assert union.edges() == [(1, 2)]


def test_with_inputs_moves_inputs_last():
    """Test input designation reorders vertices"""
    star = NKGraph.from_edges(4, 0, [(0, 1), (0, 2), (0, 3)])
    g = with_inputs(star, [0])
    assert g.inputs == (3,)
    assert sorted(g.neighbors(3)) == [0, 1, 2]
