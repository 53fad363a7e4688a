"""
Test script for graph_distil downstream evaluations: key rates, DEJMPS and Steane teleportation
"""

import pytest

from graph_distil.applications import (
    average_state,
    average_state_strategy,
    bb84_rate,
    binned_key_rate,
    dejmps_resource_cost,
    dejmps_rounds,
    dejmps_step,
    qber,
    resource_cost,
    steane_fixture,
    teleport_steane,
    teleportation_comparison,
    werner_pair,
    werner_threshold,
)
from graph_distil.circuit_synth import Circuit
from graph_distil.enumerator import dedup, enumerate_normal_forms
from graph_distil.fixtures import five_qubit_wheel, get_graph
from graph_distil.protocol_stats import full_statistics
from graph_distil.symplectic import CNOT, MZ, build_from_graph, circuit_to_symplectic


def bcnot_stats(syndromes: str = "all"):
    return full_statistics(circuit_to_symplectic(Circuit(2, 1, (CNOT(0, 1), MZ(1)))), 2, 1, syndromes)


def test_werner_threshold():
    """Test the Werner fidelity where the BB84 rate vanishes"""
    assert werner_threshold() == pytest.approx(0.835, abs=1e-3)
    assert bb84_rate(werner_pair(0.8)) == 0.0
    assert bb84_rate(werner_pair(0.9)) > 0.0
    assert bb84_rate((1.0, 0.0, 0.0, 0.0)) == pytest.approx(1.0)


def test_qber():
    """Test bit and phase error rates from Pauli coefficients"""
    e_x, e_z = qber((0.7, 0.1, 0.05, 0.15))
    assert e_x == pytest.approx(0.2)
    assert e_z == pytest.approx(0.15)


def test_binned_key_rate():
    """Test binning never loses against keeping only the trivial syndrome"""
    stats = full_statistics(build_from_graph(five_qubit_wheel()), 5, 1)
    for result in binned_key_rate(stats, [0.85, 0.9, 0.95]):
        assert result.binned_rate >= result.detection_rate - 1e-12
        assert sum(s.probability for s in result.per_syndrome) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        binned_key_rate(full_statistics(circuit_to_symplectic(Circuit(2, 2, ())), 2, 2), [0.9])


def test_average_state():
    """Test the averaged state is normalized and needs every syndrome"""
    stats = bcnot_stats()
    mixture = average_state(stats, 0.8)
    assert mixture.sum() == pytest.approx(1.0)
    assert average_state_strategy(stats, 0.8) == pytest.approx(mixture[0])
    with pytest.raises(ValueError):
        average_state(bcnot_stats("trivial"), 0.8)


def test_dejmps_step():
    """Test one DEJMPS round on Werner and on asymmetric pairs"""
    p, out = dejmps_step(werner_pair(0.7), werner_pair(0.7))
    assert p == pytest.approx(0.68)
    assert out[0] == pytest.approx(0.5 / 0.68)
    assert sum(out) == pytest.approx(1.0)
    # (p_I, p_X, p_Y, p_Z)
    pair = (0.7, 0.1, 0.15, 0.05)
    p, out = dejmps_step(pair, pair)
    norm = (0.7 + 0.15) ** 2 + (0.1 + 0.05) ** 2
    assert p == pytest.approx(norm)
    assert out[0] == pytest.approx((0.7 ** 2 + 0.15 ** 2) / norm)


def test_dejmps_rounds_improve_fidelity():
    """Test recursive rounds keep raising fidelity above one half"""
    history = dejmps_rounds(werner_pair(0.75), 3)
    assert len(history) == 3
    fids = [0.75] + [state[0] for _, state in history]
    assert fids == sorted(fids)


def test_steane_decoder():
    """Test single-qubit errors are corrected and weight-two errors are not"""
    steane = steane_fixture()
    for q in range(7):
        x, z = 1 << q, 1 << (q + 7)
        for label in (x, z, x | z):
            assert steane.decode(label) == 0
            assert not steane.is_logical_error(label)
    assert steane.is_logical_error(steane.logical_x)
    assert steane.is_logical_error(steane.logical_z)
    # qubits 0, 1 and 2 form a weight-three codeword
    assert steane.syndrome(0b0000111) == 0
    assert steane.is_logical_error(0b0000111)
    assert steane.is_logical_error(0b0000011)


def test_teleport_steane():
    """Test logical infidelity for perfect, Werner and malformed inputs"""
    assert teleport_steane([(1.0, 0.0, 0.0, 0.0)] * 7) == 0.0
    infidelity = teleport_steane([werner_pair(0.99)] * 7)
    assert 0.0 < infidelity < 0.01
    assert teleport_steane([werner_pair(0.9)] * 7) > infidelity
    with pytest.raises(ValueError):
        teleport_steane([(1.0, 0.0, 0.0, 0.0)] * 6)
    with pytest.raises(ValueError):
        teleport_steane([(0.5, 0.0, 0.0, 0.0)] * 7)


def test_resource_costs():
    """Test expected raw pairs per delivered output"""
    assert resource_cost(bcnot_stats("trivial"), 0.7) == pytest.approx(2 / 0.68)
    cost = dejmps_resource_cost(0.7)
    assert cost.success_probability == pytest.approx(0.68)
    assert cost.independent == pytest.approx(14 / 0.68)
    assert cost.joint == pytest.approx(14 / 0.68 ** 7)


def test_teleportation_comparison():
    """Test the baseline rows for each fidelity"""
    rows = teleportation_comparison(None, [0.9, 0.95])
    assert len(rows) == 6
    assert {r.strategy for r in rows} == {"none", "dejmps-independent", "dejmps-joint"}
    by_key = {(r.f_in, r.strategy): r for r in rows}
    assert by_key[(0.9, "none")].expected_pairs == 7.0
    assert by_key[(0.9, "dejmps-independent")].infidelity < by_key[(0.9, "none")].infidelity
    assert by_key[(0.9, "dejmps-joint")].expected_pairs > by_key[(0.9, "dejmps-independent")].expected_pairs
    with pytest.raises(ValueError):
        teleportation_comparison(bcnot_stats(), [0.9])


def per_pair_rate_envelope(max_n: int, f_grid):
    """Best key rate per raw pair over all n->1 protocols with n <= max_n, binned and b=0 only"""
    binned = {f: bb84_rate(werner_pair(f)) for f in f_grid}
    detection = dict(binned)
    for n in range(2, max_n + 1):
        for record in dedup(enumerate_normal_forms(n, 1)):
            for result in binned_key_rate(record.statistics("all"), f_grid):
                binned[result.f_in] = max(binned[result.f_in], result.binned_rate / n)
                detection[result.f_in] = max(detection[result.f_in], result.detection_rate / n)
    return binned, detection


@pytest.mark.slow
def test_binning_leaves_key_rate_envelope_unchanged():
    """Test binned and b=0-only key-rate envelopes coincide for up to five pairs"""
    grid = [0.8, 0.85, 0.9, 0.95]
    binned, detection = per_pair_rate_envelope(5, grid)
    for f in grid:
        assert binned[f] == pytest.approx(detection[f], abs=1e-6)


@pytest.mark.slow
def test_ten_seven_teleportation_crossovers():
    """Test where the 10->7 code beats DEJMPS in infidelity and in raw pairs"""
    stats = full_statistics(build_from_graph(get_graph("ten-seven")), 10, 7, "trivial")
    grid = [round(0.80 + 0.01 * i, 2) for i in range(20)]
    rows = {(r.f_in, r.strategy): r for r in teleportation_comparison(stats, grid)}
    better = [f for f in grid if rows[(f, "10to7")].infidelity < rows[(f, "dejmps-independent")].infidelity]
    assert better and 0.83 <= better[0] <= 0.87
    cheaper = [f for f in grid if rows[(f, "10to7")].expected_pairs < rows[(f, "dejmps-independent")].expected_pairs]
    assert cheaper and 0.93 <= cheaper[0] <= 0.97
