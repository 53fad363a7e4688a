"""
Test script for graph_distil built-in graphs and circuits
"""

import pytest

from graph_distil.bell_sim import evaluate_fixture
from graph_distil.enumerator import dedup, enumerate_graphs
from graph_distil.exceptions import FixtureError
from graph_distil.fixtures import CIRCUITS, GRAPHS, NOISY_CIRCUIT_IDS, get_circuit, get_graph, list_fixtures
from graph_distil.graph_code import is_valid_code
from graph_distil.protocol_stats import full_statistics
from graph_distil.symplectic import GateKind, circuit_to_symplectic


def test_listing_covers_every_fixture():
    """Test list_fixtures reports graphs and circuits"""
    infos = list_fixtures()
    assert {i.fixture_id for i in infos if i.kind == "graph"} == set(GRAPHS)
    assert {i.fixture_id for i in infos if i.kind == "circuit"} == set(CIRCUITS)
    assert all(i.description for i in infos)


def test_unknown_fixture():
    """Test unknown ids raise FixtureError, which is also a KeyError"""
    with pytest.raises(FixtureError):
        get_graph("missing")
    with pytest.raises(KeyError):
        get_circuit("missing")


@pytest.mark.parametrize("fixture_id", sorted(set(GRAPHS) - {"shared-inputs"}))
def test_graph_fixtures_are_valid_codes(fixture_id):
    """Test every graph fixture except the shared-input example encodes k qubits"""
    assert is_valid_code(get_graph(fixture_id))


def test_graph_sizes():
    """Test the vertex partition of each graph"""
    assert (get_graph("ten-seven").n_out, get_graph("ten-seven").k_in) == (10, 7)
    assert (get_graph("fivequbit").n_out, get_graph("fivequbit").k_in) == (5, 1)
    assert not is_valid_code(get_graph("shared-inputs"))


@pytest.mark.parametrize("fixture_id", sorted(CIRCUITS))
def test_circuit_fixtures_measure_every_discarded_pair(fixture_id):
    """Test fixture circuits keep the first pairs and measure the rest"""
    circuit = get_circuit(fixture_id)
    assert circuit.kept == tuple(range(circuit.keep))
    assert circuit.measured == tuple(range(circuit.keep, circuit.n))


@pytest.mark.parametrize("fixture_id", NOISY_CIRCUIT_IDS)
def test_noisy_circuits_evaluate_by_id(fixture_id):
    """Test the n->1 circuits evaluate consistently by id"""
    circuit = get_circuit(fixture_id)
    assert circuit.keep == 1
    assert sum(g.kind in (GateKind.CZ, GateKind.CNOT) for g in circuit.gates) >= circuit.n - 1
    stats = full_statistics(circuit_to_symplectic(circuit), circuit.n, 1, "trivial")
    assert evaluate_fixture(fixture_id, 0.9) == pytest.approx(stats.fidelity(0.9, 0))


def test_four_to_one_circuit_detects_single_errors():
    """Test the 4->1 circuit has distance two and improves a Werner pair"""
    stats = full_statistics(circuit_to_symplectic(get_circuit("noisy-n4")), 4, 1, "trivial")
    assert stats.normalizer_enumerator().counts[1] == 0
    assert stats.fidelity(0.9, 0) > 0.9


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_noisy_circuits_reach_enumerated_optimum(n):
    """Test each n->1 circuit matches the best b=0 fidelity over all n->1 protocols without noise"""
    transversal = dedup(enumerate_graphs(n, 1, include_disconnected=True))
    optimum = max(r.statistics("trivial").fidelity(0.7, 0) for r in transversal)
    assert evaluate_fixture(f"noisy-n{n}", 0.7) == pytest.approx(optimum, abs=1e-9)
