"""
Test script for graph_distil distillation statistics
"""

import random
from fractions import Fraction

import numpy as np
import pytest

from graph_distil.circuit_synth import Circuit
from graph_distil.exceptions import SizeLimitError
from graph_distil.fixtures import five_qubit_wheel
from graph_distil.protocol_stats import (
    BellDiagonalInput,
    Syndrome,
    WeightEnumerator,
    best_corrected_coefficients,
    code_distance,
    coset_weight_enumerator,
    dedup_key,
    evaluate_werner,
    full_statistics,
    label_group,
    leading_order_fidelity,
    macwilliams_transform,
    output_coefficient,
    output_coefficients,
    success_probability,
)
from graph_distil.symplectic import (
    CNOT,
    MZ,
    H,
    S,
    SubgroupKind,
    SubgroupSpec,
    build_from_graph,
    circuit_to_symplectic,
    gate_generator,
    random_symplectic,
)


def bcnot_matrix():
    return circuit_to_symplectic(Circuit(2, 1, (CNOT(0, 1), MZ(1))))


def test_two_to_one_werner():
    """Test the bilateral CNOT protocol at F=0.7"""
    M = bcnot_matrix()
    assert success_probability(M, 0, 0.7, 1) == pytest.approx(0.68)
    assert output_coefficient(M, 0, "I", 0.7, 1) == pytest.approx(0.5 / 0.68)
    p, coeffs = output_coefficients(M, 0, 0.7, 1)
    assert p == pytest.approx(0.68)
    assert coeffs.sum() == pytest.approx(1.0)


def test_werner_and_general_paths_agree():
    """Test the enumerator polynomial path against the product-distribution path"""
    M = random_symplectic(4, random.Random(8))
    for b in range(1 << 3):
        werner = BellDiagonalInput.werner(0.83, 4)
        assert success_probability(M, b, 0.83, 1) == pytest.approx(success_probability(M, b, werner, 1))


def test_bcnot_enumerators():
    """Test stabilizer and normalizer enumerators of the bilateral CNOT"""
    stats = full_statistics(bcnot_matrix(), 2, 1)
    assert stats.stabilizer_enumerator().counts == (1, 0, 1)
    assert stats.normalizer_enumerator().counts == (1, 2, 5)
    assert code_distance(stats.stabilizer_enumerator(), stats.normalizer_enumerator()) == 1
    assert stats.fidelity(0.7, 0) == pytest.approx(0.5 / 0.68)


def test_five_qubit_code():
    """Test enumerators, distance and leading-order coefficient of the five-qubit code"""
    stats = full_statistics(build_from_graph(five_qubit_wheel()), 5, 1, "trivial")
    e_b = stats.stabilizer_enumerator()
    e_p = stats.normalizer_enumerator()
    assert e_b.counts == (1, 0, 0, 0, 15, 0)
    assert e_p.counts == (1, 0, 0, 30, 15, 18)
    assert code_distance(e_b, e_p) == 3
    assert leading_order_fidelity(e_b, e_p, 3) == Fraction(30, 27)
    summary = evaluate_werner(stats, [0.9, 0.99])
    assert summary.distance == 3
    assert summary.leading_order == "10/9"
    # 1 - F_out ~ c (1 - F)^3 near F = 1
    eps = 1e-3
    assert 1.0 - stats.fidelity(1.0 - eps) == pytest.approx(float(Fraction(10, 9)) * eps ** 3, rel=0.05)


def test_macwilliams_identity_on_random_protocols():
    """Test MacWilliams transform against direct normalizer enumeration"""
    rng = random.Random(1)
    for _ in range(100):
        n = rng.randint(1, 6)
        k = rng.randint(0, n)
        M = random_symplectic(n, rng)
        e_b = coset_weight_enumerator(M, SubgroupSpec(SubgroupKind.BK_SPAN, n, k))
        e_p = coset_weight_enumerator(M, SubgroupSpec(SubgroupKind.PK_SPAN, n, k))
        assert macwilliams_transform(e_b, n, k) == e_p


def test_macwilliams_rejects_wrong_totals():
    """Test inconsistent inputs are refused"""
    with pytest.raises(ValueError):
        macwilliams_transform([1, 1, 1], 2, 1)


def test_statistics_sum_to_one():
    """Test syndrome probabilities sum to one and rows sum to denominators"""
    rng = random.Random(3)
    M = random_symplectic(4, rng)
    stats = full_statistics(M, 4, 2)
    assert len(stats.syndromes) == 4
    total = sum(p for _, p, _ in stats.branches(0.8))
    assert total == pytest.approx(1.0)
    for b in stats.syndromes:
        assert sum(stats.numerator(b, label).total for label in range(16)) == stats.denominator(b).total


def test_statistics_match_general_inputs():
    """Test Werner statistics against output_coefficients"""
    M = random_symplectic(3, random.Random(6))
    stats = full_statistics(M, 3, 1)
    for b, p, coeffs in stats.branches(0.75):
        if p > 0:
            p_direct, coeffs_direct = output_coefficients(M, b, 0.75, 1)
            assert p == pytest.approx(p_direct)
            assert np.allclose(coeffs, coeffs_direct)


def test_size_limits():
    """Test statistics refuse oversized requests"""
    M = random_symplectic(7, random.Random(0), depth=10)
    with pytest.raises(SizeLimitError):
        full_statistics(M, 7, 6, "all")
    with pytest.raises(ValueError):
        full_statistics(M, 7, 1, "some")


def test_syndrome_strings():
    """Test syndrome bit order"""
    s = Syndrome.from_string("100")
    assert s.value == 1
    assert str(Syndrome(6, 3)) == "011"
    with pytest.raises(ValueError):
        Syndrome(8, 3)


def test_bell_diagonal_input_validation():
    """Test coefficient validation"""
    with pytest.raises(ValueError):
        BellDiagonalInput(((0.5, 0.5, 0.5, 0.0),))
    pairs = BellDiagonalInput.werner(0.7, 2)
    assert pairs.joint_distribution().sum() == pytest.approx(1.0)


def test_label_groups():
    """Test the size of the local label groups"""
    # |Sp(2, F2)| = 6, |Sp(4, F2)| = 720
    assert len(label_group(1)) == 6
    assert len(label_group(2)) == 720
    # S3 x S3 x S2
    assert len(label_group(2, "pairwise")) == 72


def test_dedup_key_ignores_local_relabelling():
    """Test keys are unchanged by a Clifford on the kept pair"""
    M = random_symplectic(3, random.Random(12))
    local = gate_generator(S(0), 3) @ gate_generator(H(0), 3)
    a = full_statistics(M, 3, 1)
    b = full_statistics(local @ M, 3, 1)
    assert dedup_key(a) == dedup_key(b)


def test_best_corrected_coefficients():
    """Test the correction moves the largest coefficient to the identity"""
    corrected, correction = best_corrected_coefficients(np.array([0.1, 0.6, 0.2, 0.1]))
    assert correction == 1
    assert corrected.tolist() == [0.6, 0.1, 0.1, 0.2]


def test_weight_enumerator_evaluation():
    """Test the Werner polynomial"""
    e = WeightEnumerator((1, 2, 5))
    assert e.werner(0.7) == pytest.approx(0.68)
    with pytest.raises(ValueError):
        WeightEnumerator((1, -1))
