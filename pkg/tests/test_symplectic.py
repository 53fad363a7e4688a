"""
Test script for graph_distil symplectic representation
"""

import random

import numpy as np
import pytest

from graph_distil.circuit_synth import Circuit
from graph_distil.exceptions import NotSymplecticError, UnsupportedGateError
from graph_distil.symplectic import (
    CNOT,
    CZ,
    MZ,
    Gate,
    H,
    PauliVector,
    S,
    SubgroupKind,
    SubgroupSpec,
    SymplecticMatrix,
    assemble_protocol_matrix,
    build_from_graph,
    circuit_to_symplectic,
    gate_generator,
    gf2_inv,
    gf2_rank,
    invert,
    is_symplectic,
    pauli_label,
    popcount,
    random_symplectic,
    span_array,
    symplectic_form,
    weight,
    weights_array,
)
from graph_distil.fixtures import four_two_graph, five_qubit_wheel


def test_pauli_labels():
    """Test label parsing, weight and commutation"""
    v = PauliVector.from_label("XIZY")
    assert v.label() == "XIZY"
    assert v.weight == 3
    assert pauli_label(v.bits, 4) == "XIZY"
    x = PauliVector.from_label("X")
    z = PauliVector.from_label("Z")
    assert not x.commutes_with(z)
    assert PauliVector.from_label("XX").commutes_with(PauliVector.from_label("ZZ"))
    assert (x + z).label() == "Y"
    with pytest.raises(ValueError):
        PauliVector.from_label("XQ")


def test_vectorized_weights_match_scalar():
    """Test popcount and weights_array against the scalar helpers"""
    rng = np.random.default_rng(3)
    values = rng.integers(0, 1 << 12, size=200, dtype=np.uint64)
    assert popcount(values).tolist() == [bin(int(v)).count("1") for v in values]
    assert weights_array(values, 6).tolist() == [weight(int(v), 6) for v in values]


def test_span_array_lists_the_coset():
    """Test span enumeration with a shift"""
    assert sorted(span_array([1, 2], shift=4).tolist()) == [4, 5, 6, 7]
    assert span_array([], shift=9).tolist() == [9]


def test_gate_generators():
    """Test the conjugation action of each generator"""
    # H swaps X and Z
    assert gate_generator(H(0), 1).apply(0b01) == 0b10
    # S maps X to Y
    assert gate_generator(S(0), 1).apply(0b01) == 0b11
    # CNOT: X_c -> X_c X_t, Z_t -> Z_c Z_t
    cnot = gate_generator(CNOT(0, 1), 2)
    assert cnot.apply(0b0001) == 0b0011
    assert cnot.apply(0b1000) == 0b1100
    assert cnot.apply(0b0010) == 0b0010
    # CZ: X_i -> X_i Z_j
    cz = gate_generator(CZ(0, 1), 2)
    assert cz.apply(0b0001) == 0b1001
    assert cz.apply(0b0010) == 0b0110
    for gate in (H(1), S(2), CNOT(2, 0), CZ(1, 2)):
        assert is_symplectic(gate_generator(gate, 3).bits)


def test_gate_validation():
    """Test malformed gates are rejected"""
    with pytest.raises(ValueError):
        CNOT(1, 1)
    with pytest.raises(UnsupportedGateError):
        Gate.from_dict({"type": "T", "q": [0]})
    with pytest.raises(UnsupportedGateError):
        gate_generator(MZ(0), 1)
    with pytest.raises(IndexError):
        gate_generator(H(3), 2)
    assert Gate.from_dict(CNOT(2, 0).to_dict()) == CNOT(2, 0)


def test_random_symplectic_preserves_form():
    """Test random matrices preserve the symplectic form and invert correctly"""
    rng = random.Random(11)
    for n in range(1, 5):
        m = random_symplectic(n, rng)
        assert is_symplectic(m.bits)
        assert (m @ invert(m)).is_identity()
        assert (invert(m) @ m).is_identity()
        for _ in range(20):
            v = rng.randrange(1 << (2 * n))
            w = rng.randrange(1 << (2 * n))
            assert symplectic_form(m.apply(v), m.apply(w), n) == symplectic_form(v, w, n)


def test_apply_array_matches_apply():
    """Test vectorized application"""
    m = random_symplectic(3, random.Random(5))
    labels = np.arange(64, dtype=np.uint64)
    assert m.apply_array(labels).tolist() == [m.apply(v) for v in range(64)]


def test_non_symplectic_rejected():
    """Test from_array validation"""
    with pytest.raises(NotSymplecticError):
        SymplecticMatrix.from_array(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        is_symplectic(np.eye(3))


def test_gf2_helpers():
    """Test GF(2) rank and inverse"""
    a = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert gf2_rank(a) == 2
    with pytest.raises(ValueError):
        gf2_inv(a)
    b = np.array([[1, 1], [0, 1]])
    assert np.array_equal((b @ gf2_inv(b)) % 2, np.eye(2))


def test_circuit_product_order():
    """Test later gates multiply on the left"""
    circuit = Circuit(2, 2, (CNOT(0, 1), H(0)))
    expected = gate_generator(H(0), 2) @ gate_generator(CNOT(0, 1), 2)
    assert circuit_to_symplectic(circuit) == expected
    with_measurement = Circuit(2, 1, (CNOT(0, 1), MZ(1)))
    assert circuit_to_symplectic(with_measurement) == gate_generator(CNOT(0, 1), 2)


def test_subgroup_sizes():
    """Test PkSpan and BkSpan sizes"""
    assert SubgroupSpec(SubgroupKind.PK_SPAN, 3, 1).size == 16
    assert SubgroupSpec(SubgroupKind.BK_SPAN, 3, 1).size == 4
    assert SubgroupSpec(SubgroupKind.BK_SPAN, 2, 2).size == 1
    with pytest.raises(ValueError):
        SubgroupSpec(SubgroupKind.PK_SPAN, 2, 3)


def test_assemble_protocol_matrix():
    """Test the normal-form assembly is symplectic and validates S"""
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, k = 5, 2
        m = n - k
        T = rng.integers(0, 2, size=(m, k))
        R = rng.integers(0, 2, size=(m, k))
        upper = np.triu(rng.integers(0, 2, size=(m, m)), 1)
        matrix = assemble_protocol_matrix(n, k, T, R, upper + upper.T)
        assert is_symplectic(matrix.bits)
        _, _, lower_left, _ = matrix.blocks()
        assert not lower_left.any()
    with pytest.raises(ValueError):
        assemble_protocol_matrix(2, 1, [[1]], [[0]], [[1]])


def test_build_from_graph():
    """Test graph matrices are symplectic with and without normalization"""
    for graph in (four_two_graph(), five_qubit_wheel()):
        for normalize in (False, True):
            matrix = build_from_graph(graph, normalize=normalize)
            assert matrix.n == graph.n_out
            assert is_symplectic(matrix.bits)
