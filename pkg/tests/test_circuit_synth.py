"""
Test script for graph_distil circuit synthesis, rewriting and metrics
"""

import pytest

from graph_distil.circuit_synth import (
    Circuit,
    Objective,
    RewriteDirection,
    chromatic_index,
    exact_depth,
    gates_commute,
    heuristic_search,
    insert_meas_cnot,
    list_schedule_depth,
    metrics,
    misra_gries_colouring,
    objective_key,
    relocate_cz,
    rewrite_commute,
    synthesize,
)
from graph_distil.exceptions import InvalidCodeError, ParseError, UnsupportedGateError
from graph_distil.fixtures import shared_inputs_graph, four_two_graph, five_qubit_labeled, five_qubit_wheel, get_circuit
from graph_distil.graph_code import find_valid_labeling
from graph_distil.protocol_stats import full_statistics
from graph_distil.symplectic import CNOT, CZ, MZ, GateKind, H, S, circuit_to_symplectic


def werner_profile(circuit: Circuit, fidelity: float = 0.8):
    """Sorted (p, coefficient multiset) over syndromes"""
    stats = full_statistics(circuit_to_symplectic(circuit), circuit.n, circuit.keep)
    return profile_of(stats, fidelity)


def profile_of(stats, fidelity: float = 0.8):
    rows = []
    for _, p, coeffs in stats.branches(fidelity):
        rows.append((round(p, 9),) + tuple(sorted(round(float(c), 9) for c in coeffs)))
    return sorted(rows)


def two_qubit_pairs(circuit: Circuit, kind: GateKind):
    return [g.qubits for g in circuit.gates if g.kind is kind]


def test_synthesize_matches_fixture():
    """Test direct synthesis of the 4->2 graph"""
    circuit = synthesize(four_two_graph())
    fixture = get_circuit("four-two")
    assert circuit.n == 4 and circuit.keep == 2
    assert set(two_qubit_pairs(circuit, GateKind.CZ)) == set(two_qubit_pairs(fixture, GateKind.CZ))
    assert two_qubit_pairs(circuit, GateKind.CNOT) == two_qubit_pairs(fixture, GateKind.CNOT)
    assert circuit.measured == (2, 3)
    assert circuit.kept == (0, 1)


def test_synthesize_rejects_invalid_codes():
    """Test synthesis needs a valid labeling"""
    with pytest.raises(InvalidCodeError):
        synthesize(shared_inputs_graph())


def test_synthesized_circuit_has_graph_statistics():
    """Test the synthesized circuit and the graph matrix give the same Werner profile"""
    from graph_distil.symplectic import build_from_graph

    graph = five_qubit_wheel()
    circuit = synthesize(graph)
    stats = full_statistics(build_from_graph(graph, find_valid_labeling(graph)), 5, 1)
    assert werner_profile(circuit) == profile_of(stats)


def test_circuit_validation():
    """Test gates after a measurement are rejected"""
    with pytest.raises(ValueError):
        Circuit(2, 1, (MZ(1), CNOT(0, 1)))
    with pytest.raises(ValueError):
        Circuit(2, 1, (CNOT(0, 2),))


def test_circuit_json(tmp_path):
    """Test circuits survive save/load"""
    circuit = get_circuit("fivequbit-c1")
    path = tmp_path / "c1.json"
    circuit.save(path)
    assert Circuit.load(path) == circuit
    with pytest.raises(ParseError):
        Circuit.from_json({"n": 2})
    with pytest.raises(UnsupportedGateError):
        Circuit.from_json({"n": 1, "keep": 1, "gates": [{"type": "T", "q": [0]}]})


def test_gate_commutation():
    """Test the CZ/CNOT commutation rules"""
    assert gates_commute(CZ(0, 1), CZ(1, 2))
    assert gates_commute(CZ(0, 1), CNOT(0, 2))
    assert not gates_commute(CZ(0, 1), CNOT(2, 1))
    assert gates_commute(CNOT(0, 1), CNOT(0, 2))
    assert gates_commute(CNOT(0, 2), CNOT(1, 2))
    assert not gates_commute(CNOT(0, 1), CNOT(1, 2))
    assert gates_commute(H(0), CZ(1, 2))
    assert not gates_commute(H(0), CZ(0, 1))


def test_insert_meas_cnot_reproduces_depth_reduced_circuit():
    """Test inserting CNOT(3,2) before measurement turns c1 into c3"""
    c1 = get_circuit("fivequbit-c1")
    c3 = get_circuit("fivequbit-c3")
    rewritten = insert_meas_cnot(c1, 2, 3)
    assert two_qubit_pairs(rewritten, GateKind.CNOT) == two_qubit_pairs(c3, GateKind.CNOT)
    assert set(two_qubit_pairs(rewritten, GateKind.CZ)) == set(two_qubit_pairs(c3, GateKind.CZ))
    assert rewritten.measured == c3.measured
    assert werner_profile(rewritten) == werner_profile(c1)
    with pytest.raises(ValueError):
        insert_meas_cnot(c1, 0, 3)


def test_rewrites_preserve_statistics():
    """Test both rewrite directions and CZ relocation keep the Werner profile"""
    c1 = get_circuit("fivequbit-c1")
    profile = werner_profile(c1)
    for direction in RewriteDirection:
        assert werner_profile(rewrite_commute(c1, direction)) == profile
    cz_first = rewrite_commute(c1, RewriteDirection.CZ_FIRST)
    first_cz = next(g for g in cz_first.gates if g.kind is GateKind.CZ)
    assert werner_profile(relocate_cz(c1, first_cz.qubits, after=True)) == profile
    cnot_first = rewrite_commute(c1, RewriteDirection.CNOT_FIRST)
    last_cz = [g for g in cnot_first.gates if g.kind is GateKind.CZ][-1]
    assert werner_profile(relocate_cz(c1, last_cz.qubits, after=False)) == profile


def test_rewrite_rejects_single_qubit_gates_in_body():
    """Test rewriting needs a CZ/CNOT body"""
    circuit = Circuit(2, 1, (S(0), CNOT(0, 1), H(1), MZ(1)))
    with pytest.raises(UnsupportedGateError):
        rewrite_commute(circuit)


def test_large_fixture_metrics():
    """Test the 10->7 circuit counts 15 two-qubit gates at depth 6"""
    m = metrics(get_circuit("ten-seven"))
    assert m.two_qubit_count == 15
    assert m.depth == 6
    assert m.depth_exact
    assert m.to_json()["depth_kind"] == "exact"


def test_depth_helpers():
    """Test exact and list-schedule depth on small sequences"""
    gates = [CZ(0, 1), CZ(2, 3), CZ(1, 2)]
    assert exact_depth(gates) == 2
    assert list_schedule_depth(gates) == 2
    # commuting CZs may be reordered
    assert exact_depth([CZ(0, 1), CZ(1, 2), CZ(0, 2), CZ(3, 4)]) == 3
    assert exact_depth([]) == 0


def test_edge_colouring():
    """Test Vizing bounds and exact chromatic index"""
    triangle = [(0, 1), (1, 2), (0, 2)]
    assert chromatic_index(triangle) == (3, True)
    star = [(0, 1), (0, 2), (0, 3)]
    assert chromatic_index(star) == (3, True)
    cycle = [(i, (i + 1) % 6) for i in range(6)]
    assert chromatic_index(cycle) == (2, True)
    colouring = misra_gries_colouring(cycle + [(0, 3)])
    for a in colouring:
        for b in colouring:
            if a != b and a & b:
                assert colouring[a] != colouring[b]
    assert len(set(colouring.values())) <= 4


def test_heuristic_search():
    """Test the search never worsens the objective and keeps the Werner profile"""
    graph = five_qubit_labeled()
    direct = synthesize(graph)
    assert heuristic_search(graph, budget=0) == direct
    found = heuristic_search(graph, Objective.TWO_QUBIT, budget=8, seed=1)
    assert objective_key(found, Objective.TWO_QUBIT) <= objective_key(direct, Objective.TWO_QUBIT)
    assert werner_profile(found) == werner_profile(direct)
    longer = heuristic_search(graph, Objective.TWO_QUBIT, budget=16, seed=1)
    assert objective_key(longer, Objective.TWO_QUBIT) <= objective_key(found, Objective.TWO_QUBIT)
