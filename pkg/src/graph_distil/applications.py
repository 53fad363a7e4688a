"""
graph_distil 应用评估模块
处理BB84密钥率（含症状分箱）、DEJMPS基线、Steane码编码态隐形传态以及资源开销
"""

import logging
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .protocol_stats import (
    PAIR_TABLE_ORDER,
    BellDiagonalInput,
    DistillationStatistics,
    best_corrected_coefficients,
    output_coefficients,
)
from .symplectic import CNOT, MZ, circuit_to_symplectic

logger = logging.getLogger(__name__)

STEANE_QUBITS = 7

# (p_I, p_X, p_Y, p_Z)
PauliVector4 = Tuple[float, float, float, float]


def to_pauli_order(coeffs: Sequence[float]) -> PauliVector4:
    """把按标签 x | z<<1 排列的单对系数转成 (p_I, p_X, p_Y, p_Z)"""
    if len(coeffs) != 4:
        raise ValueError(f"Expected 4 single-pair coefficients, got {len(coeffs)}")
    return tuple(float(coeffs[i]) for i in PAIR_TABLE_ORDER)


def binary_entropy(p: float) -> float:
    p = min(max(float(p), 0.0), 1.0)
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def qber(pauli: Sequence[float]) -> Tuple[float, float]:
    """(e_x, e_z)：e_z = p_X + p_Y，e_x = p_Z + p_Y"""
    _, p_x, p_y, p_z = pauli
    return p_z + p_y, p_x + p_y


def _raw_rate(pauli: Sequence[float]) -> float:
    e_x, e_z = qber(pauli)
    return 1.0 - binary_entropy(e_x) - binary_entropy(e_z)


def bb84_rate(pauli: Sequence[float]) -> float:
    """渐近非对称BB84密钥率 max(0, 1 − h(e_x) − h(e_z))"""
    return max(0.0, _raw_rate(pauli))


def werner_pair(fidelity: float) -> PauliVector4:
    return BellDiagonalInput.werner(fidelity, 1).pairs[0]


def werner_threshold(tol: float = 1e-10) -> float:
    """Werner对BB84零密钥率的保真度阈值（二分法）"""
    lo, hi = 0.5, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _raw_rate(werner_pair(mid)) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class SyndromeRate:
    syndrome: int
    probability: float
    qber_x: float
    qber_z: float
    rate: float


@dataclass
class KeyRateResult:
    """每个症状单独做BB84后处理后的密钥率（按蒸馏出的对计）"""
    f_in: float
    per_syndrome: List[SyndromeRate]
    binned_rate: float
    detection_rate: float

    def to_json(self) -> dict:
        return asdict(self)


def _require_single_pair(stats: DistillationStatistics):
    if stats.k != 1:
        raise ValueError(f"Key-rate evaluation needs k=1, got k={stats.k}")


def binned_key_rate(stats: DistillationStatistics, f_grid: Sequence[float]) -> List[KeyRateResult]:
    """
    对每个输入保真度，逐症状取最佳局部修正后的态计算密钥率；分箱率为按概率加权之和，
    仅检测率只用 b=0。

    异常:
        ValueError: k ≠ 1。
    """
    _require_single_pair(stats)
    results = []
    for fidelity in f_grid:
        per_syndrome = []
        for b, p, coeffs in stats.branches(fidelity):
            if p <= 0.0:
                per_syndrome.append(SyndromeRate(b, 0.0, 0.0, 0.0, 0.0))
                continue
            corrected, _ = best_corrected_coefficients(coeffs)
            pauli = to_pauli_order(corrected)
            e_x, e_z = qber(pauli)
            per_syndrome.append(SyndromeRate(b, p, e_x, e_z, bb84_rate(pauli)))
        binned = sum(s.probability * s.rate for s in per_syndrome)
        detection = next((s.probability * s.rate for s in per_syndrome if s.syndrome == 0), 0.0)
        results.append(KeyRateResult(float(fidelity), per_syndrome, binned, detection))
    return results


def average_state(stats: DistillationStatistics, fidelity: float) -> np.ndarray:
    """
    各症状经最佳局部修正后的态按概率混合（标签顺序）。

    异常:
        ValueError: k ≠ 1，或统计量没有覆盖全部症状。
    """
    _require_single_pair(stats)
    mixture = np.zeros(4)
    total = 0.0
    for _, p, coeffs in stats.branches(fidelity):
        if p > 0.0:
            corrected, _ = best_corrected_coefficients(coeffs)
            mixture += p * corrected
            total += p
    if abs(total - 1.0) > 1e-9:
        raise ValueError("Average-state strategy needs statistics over all syndromes")
    return mixture


def average_state_strategy(stats: DistillationStatistics, fidelity: float) -> float:
    return float(average_state(stats, fidelity)[0])


# ---------------------------------------------------------------------------
# DEJMPS

@lru_cache(maxsize=1)
def _bcnot_matrix():
    from .circuit_synth import Circuit

    return circuit_to_symplectic(Circuit(2, 1, (CNOT(0, 1), MZ(1))))


def dejmps_rotate(pauli: Sequence[float]) -> PauliVector4:
    """DEJMPS的局部旋转：交换 Y 与 Z 系数"""
    p_i, p_x, p_y, p_z = pauli
    return (p_i, p_x, p_z, p_y)


def dejmps_step(pair_a: Sequence[float], pair_b: Sequence[float]) -> Tuple[float, PauliVector4]:
    """
    一步DEJMPS：两对先做局部旋转，再做双边CNOT并在符合结果上后选择。

    返回:
        (成功概率, 输出 (p_I, p_X, p_Y, p_Z))
    """
    value = BellDiagonalInput((dejmps_rotate(pair_a), dejmps_rotate(pair_b)))
    p, coeffs = output_coefficients(_bcnot_matrix(), 0, value, 1)
    return p, to_pauli_order(coeffs)


def dejmps_rounds(pair: Sequence[float], rounds: int) -> List[Tuple[float, PauliVector4]]:
    """递归DEJMPS：每一轮都以上一轮的两份输出作为输入"""
    history = []
    current = tuple(float(c) for c in pair)
    for _ in range(rounds):
        p, current = dejmps_step(current, current)
        history.append((p, current))
    return history


# ---------------------------------------------------------------------------
# Steane teleportation

@dataclass(frozen=True)
class SteaneFixture:
    """
    [[7,1,3]] Steane 码：校验矩阵第 j 列为 j+1 的二进制表示；X、Z 各自独立按查表译码。
    lookup[s_x | s_z<<3] 是修正标签 x | z<<7。
    """
    checks: Tuple[int, ...]
    lookup: Tuple[int, ...]
    logical_x: int
    logical_z: int

    def syndrome(self, label: int) -> int:
        x = label & 0x7F
        z = label >> STEANE_QUBITS
        return _hamming_syndrome(self.checks, x) | (_hamming_syndrome(self.checks, z) << 3)

    def decode(self, label: int) -> int:
        """修正后的残余Pauli标签"""
        return label ^ self.lookup[self.syndrome(label)]

    def is_logical_error(self, label: int) -> bool:
        residual = self.decode(label)
        x = residual & 0x7F
        z = residual >> STEANE_QUBITS
        return bool(bin(x).count("1") % 2 or bin(z).count("1") % 2)


def _hamming_syndrome(checks: Sequence[int], bits: int) -> int:
    return sum((bin(check & bits).count("1") & 1) << row for row, check in enumerate(checks))


@lru_cache(maxsize=1)
def steane_fixture() -> SteaneFixture:
    # row r selects qubits j with bit r of j+1 set
    checks = tuple(sum(1 << j for j in range(STEANE_QUBITS) if ((j + 1) >> r) & 1) for r in range(3))
    single = [0] * 8
    for j in range(STEANE_QUBITS):
        single[_hamming_syndrome(checks, 1 << j)] = 1 << j
    lookup = tuple(single[s & 7] | (single[s >> 3] << STEANE_QUBITS) for s in range(64))
    all_ones = (1 << STEANE_QUBITS) - 1
    return SteaneFixture(checks, lookup, all_ones, all_ones << STEANE_QUBITS)


@lru_cache(maxsize=1)
def _logical_failures() -> np.ndarray:
    fixture = steane_fixture()
    return np.array([fixture.is_logical_error(v) for v in range(1 << (2 * STEANE_QUBITS))], dtype=bool)


def teleport_steane(pair_states: Union[np.ndarray, Sequence[Sequence[float]]]) -> float:
    """
    用七个（可能关联的）Bell对传送编码态一半后的逻辑不保真度。

    参数:
        pair_states: 长度 4^7 的联合系数表（标签 x | z<<7），或七个 (p_I, p_X, p_Y, p_Z)。

    异常:
        ValueError: 表的形状或归一化不对。
    """
    table = np.asarray(pair_states, dtype=float)
    if table.shape == (STEANE_QUBITS, 4):
        table = BellDiagonalInput(tuple(map(tuple, table))).joint_distribution()
    if table.shape != (1 << (2 * STEANE_QUBITS),):
        raise ValueError(f"Expected 7 pair vectors or a table of {1 << (2 * STEANE_QUBITS)} coefficients")
    if table.min() < -1e-12 or abs(table.sum() - 1.0) > 1e-9:
        raise ValueError("Coefficient table must be a probability distribution")
    return float(table[_logical_failures()].sum())


# ---------------------------------------------------------------------------
# Resource cost

def resource_cost(stats: DistillationStatistics, fidelity: float) -> float:
    """
    每交付一组 k 对所需的期望原始对数 n / p_succ(b=0)。

    异常:
        ValueError: 成功概率为零。
    """
    p = stats.success_probability(fidelity, 0)
    if p <= 0.0:
        raise ValueError(f"Protocol never succeeds at F={fidelity}")
    return stats.n / p


@dataclass
class DejmpsCost:
    """两种记账方式：各对独立重试，或全部对同时成功"""
    success_probability: float
    independent: float
    joint: float


def dejmps_resource_cost(fidelity: float, pairs: int = STEANE_QUBITS) -> DejmpsCost:
    pair = werner_pair(fidelity)
    p, _ = dejmps_step(pair, pair)
    if p <= 0.0:
        raise ValueError(f"DEJMPS never succeeds at F={fidelity}")
    return DejmpsCost(p, 2.0 * pairs / p, 2.0 * pairs / p ** pairs)


@dataclass
class TeleportationRow:
    f_in: float
    strategy: str
    infidelity: float
    expected_pairs: float


def teleportation_comparison(
    stats: Optional[DistillationStatistics],
    f_grid: Sequence[float],
) -> List[TeleportationRow]:
    """
    每个保真度下比较：不蒸馏、7×DEJMPS（两种记账）以及给定的 n→7 协议（b=0）。
    """
    if stats is not None and stats.k != STEANE_QUBITS:
        raise ValueError(f"Teleportation needs a protocol with k={STEANE_QUBITS}, got k={stats.k}")
    rows = []
    for fidelity in f_grid:
        fidelity = float(fidelity)
        raw = werner_pair(fidelity)
        rows.append(TeleportationRow(fidelity, "none", teleport_steane([raw] * STEANE_QUBITS), float(STEANE_QUBITS)))
        cost = dejmps_resource_cost(fidelity)
        _, distilled = dejmps_step(raw, raw)
        infidelity = teleport_steane([distilled] * STEANE_QUBITS)
        rows.append(TeleportationRow(fidelity, "dejmps-independent", infidelity, cost.independent))
        rows.append(TeleportationRow(fidelity, "dejmps-joint", infidelity, cost.joint))
        if stats is not None:
            coeffs = stats.coefficients(fidelity, 0)
            rows.append(
                TeleportationRow(fidelity, f"{stats.n}to{stats.k}", teleport_steane(coeffs), resource_cost(stats, fidelity))
            )
    logger.debug("teleportation comparison over %d fidelities", len(f_grid))
    return rows
