"""
graph_distil 辛表示模块
处理无相位Pauli串的GF(2)向量表示、辛形式、辛矩阵、门生成元以及由图构造协议矩阵

约定: n 量子比特的Pauli串编码为 2n 位整数，第 i 位是 x_i，第 n+i 位是 z_i（量子比特从0开始）。
"""

import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import NotSymplecticError, UnsupportedGateError

logger = logging.getLogger(__name__)

MAX_QUBITS = 32

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


class GateKind(str, Enum):
    """电路中允许出现的门类型"""
    H = "H"
    S = "S"
    CNOT = "CNOT"
    CZ = "CZ"
    MZ = "MZ"


TWO_QUBIT_KINDS = frozenset({GateKind.CNOT, GateKind.CZ})


@dataclass(frozen=True)
class Gate:
    """
    单个门。CNOT 的 qubits 为 (control, target)；CZ 对称；H、S、MZ 只作用一个量子比特。
    """
    kind: GateKind
    qubits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind.value} needs two distinct qubits, got {self.qubits}")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def to_dict(self) -> dict:
        return {"type": self.kind.value, "q": list(self.qubits)}

    @classmethod
    def from_dict(cls, data: dict) -> "Gate":
        try:
            kind = GateKind(data["type"])
        except ValueError as e:
            raise UnsupportedGateError(f"Unknown gate type: {data.get('type')!r}") from e
        return cls(kind, tuple(data["q"]))

    def __str__(self) -> str:
        return f"{self.kind.value}({','.join(str(q) for q in self.qubits)})"


def H(i: int) -> Gate:
    return Gate(GateKind.H, (i,))


def S(i: int) -> Gate:
    return Gate(GateKind.S, (i,))


def CNOT(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def CZ(i: int, j: int) -> Gate:
    return Gate(GateKind.CZ, (i, j))


def MZ(i: int) -> Gate:
    return Gate(GateKind.MZ, (i,))


# ---------------------------------------------------------------------------
# Pauli vectors

def weight(v: int, n: int) -> int:
    """非单位张量因子的个数"""
    mask = (1 << n) - 1
    return bin((v | (v >> n)) & mask).count("1")


def symplectic_form(v: int, w: int, n: int) -> int:
    """
    计算 ω(v, w) = x_v·z_w + z_v·x_w (mod 2)。返回0当且仅当两个Pauli串对易。
    """
    mask = (1 << n) - 1
    vx, vz = v & mask, v >> n
    wx, wz = w & mask, w >> n
    return bin((vx & wz) ^ (vz & wx)).count("1") & 1


@dataclass(frozen=True)
class PauliVector:
    """
    无相位Pauli串，布局为 [x | z]。加法即按位异或，对应模相位的Pauli乘法。
    """
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0 or self.n > MAX_QUBITS:
            raise ValueError(f"Qubit count {self.n} outside 0..{MAX_QUBITS}")
        if self.bits < 0 or self.bits >> (2 * self.n):
            raise ValueError(f"Bits {self.bits:#x} do not fit {self.n} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliVector":
        """从 'IXYZ' 形式的标签构造，第一个字符对应量子比特0"""
        n = len(label)
        bits = 0
        for i, ch in enumerate(label.upper()):
            if ch not in "IXYZ":
                raise ValueError(f"Invalid Pauli character {ch!r} in {label!r}")
            if ch in "XY":
                bits |= 1 << i
            if ch in "ZY":
                bits |= 1 << (n + i)
        return cls(n, bits)

    @property
    def x_part(self) -> int:
        return self.bits & ((1 << self.n) - 1)

    @property
    def z_part(self) -> int:
        return self.bits >> self.n

    @property
    def weight(self) -> int:
        return weight(self.bits, self.n)

    def label(self) -> str:
        return pauli_label(self.bits, self.n)

    def __add__(self, other: "PauliVector") -> "PauliVector":
        if other.n != self.n:
            raise ValueError(f"Dimension mismatch: {self.n} vs {other.n}")
        return PauliVector(self.n, self.bits ^ other.bits)

    def commutes_with(self, other: "PauliVector") -> bool:
        if other.n != self.n:
            raise ValueError(f"Dimension mismatch: {self.n} vs {other.n}")
        return symplectic_form(self.bits, other.bits, self.n) == 0


def pauli_label(bits: int, n: int) -> str:
    chars = []
    for i in range(n):
        x = (bits >> i) & 1
        z = (bits >> (n + i)) & 1
        chars.append("IXZY"[x | (z << 1)])
    return "".join(chars)


def popcount(values: np.ndarray) -> np.ndarray:
    """uint64 数组逐元素的1的个数"""
    values = np.ascontiguousarray(values, dtype=np.uint64)
    return _POPCOUNT8[values.view(np.uint8)].reshape(values.shape + (8,)).sum(axis=-1)


def weights_array(values: np.ndarray, n: int) -> np.ndarray:
    """向量化的 weight"""
    values = np.asarray(values, dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    return popcount((values | (values >> np.uint64(n))) & mask)


def span_array(generators: Sequence[int], shift: int = 0) -> np.ndarray:
    """
    以倍增方式列出 shift + span(generators) 的全部元素。
    下标的第 i 位对应是否包含第 i 个生成元。
    """
    out = np.array([shift], dtype=np.uint64)
    for g in generators:
        out = np.concatenate([out, out ^ np.uint64(g)])
    return out


# ---------------------------------------------------------------------------
# GF(2) linear algebra

def gf2_rref(matrix) -> Tuple[np.ndarray, List[int]]:
    """
    GF(2)上的简化行阶梯形。

    返回:
        (rref, pivots): 简化后的矩阵与主元列下标（升序）。
    """
    a = np.array(matrix, dtype=np.uint8) % 2
    if a.ndim != 2:
        raise ValueError("gf2_rref expects a 2-D matrix")
    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nonzero = np.nonzero(a[r:, c])[0]
        if nonzero.size == 0:
            continue
        p = r + int(nonzero[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        for o in np.nonzero(a[:, c])[0]:
            if o != r:
                a[o] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(matrix) -> int:
    return len(gf2_rref(matrix)[1])


def gf2_inv(matrix) -> np.ndarray:
    a = np.array(matrix, dtype=np.uint8) % 2
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("gf2_inv expects a square matrix")
    reduced, pivots = gf2_rref(np.hstack([a, np.eye(n, dtype=np.uint8)]))
    if pivots[:n] != list(range(n)):
        raise ValueError("Matrix is singular over GF(2)")
    return reduced[:, n:]


def omega(n: int) -> np.ndarray:
    """辛形式 Ω = [[0, I], [I, 0]]"""
    nn = 2 * n
    form = np.zeros((nn, nn), dtype=np.uint8)
    form[:n, n:] = np.eye(n, dtype=np.uint8)
    form[n:, :n] = np.eye(n, dtype=np.uint8)
    return form


def is_symplectic(matrix) -> bool:
    """
    判断 MᵀΩM = Ω 是否成立。

    异常:
        ValueError: 矩阵不是方阵或维数为奇数。
    """
    m = np.asarray(matrix, dtype=np.int64) % 2
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2:
        raise ValueError(f"Symplectic matrices have even dimension, got {m.shape[0]}")
    form = omega(m.shape[0] // 2).astype(np.int64)
    return bool(np.array_equal((m.T @ form @ m) % 2, form))


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """
    2n×2n 的GF(2)辛矩阵，作用于列向量 v ↦ Mv。构造后不可变，可在线程间共享。
    """
    n: int
    bits: np.ndarray = field(repr=False)
    _columns: Tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.uint8) % 2
        if arr.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"Expected shape {(2 * self.n, 2 * self.n)}, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)
        columns = tuple(
            int(sum(int(b) << i for i, b in enumerate(arr[:, j])))
            for j in range(2 * self.n)
        )
        object.__setattr__(self, "_columns", columns)

    @classmethod
    def from_array(cls, matrix, check: bool = True) -> "SymplecticMatrix":
        arr = np.asarray(matrix) % 2
        if check and not is_symplectic(arr):
            raise NotSymplecticError("Matrix does not preserve the symplectic form")
        return cls(arr.shape[0] // 2, arr)

    @classmethod
    def identity(cls, n: int) -> "SymplecticMatrix":
        return cls(n, np.eye(2 * n, dtype=np.uint8))

    def apply(self, v: int) -> int:
        out = 0
        j = 0
        while v:
            if v & 1:
                out ^= self._columns[j]
            v >>= 1
            j += 1
        return out

    def apply_array(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.asarray(vectors, dtype=np.uint64)
        out = np.zeros_like(vectors)
        one = np.uint64(1)
        for j, col in enumerate(self._columns):
            if col:
                out ^= ((vectors >> np.uint64(j)) & one) * np.uint64(col)
        return out

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if other.n != self.n:
            raise ValueError(f"Dimension mismatch: {self.n} vs {other.n}")
        product = (self.bits.astype(np.int64) @ other.bits.astype(np.int64)) % 2
        return SymplecticMatrix(self.n, product)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymplecticMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.n, self._columns))

    def inverse(self) -> "SymplecticMatrix":
        return invert(self)

    def is_identity(self) -> bool:
        return np.array_equal(self.bits, np.eye(2 * self.n, dtype=np.uint8))

    def blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """返回 (左上, 右上, 左下, 右下) 四个 n×n 块"""
        n = self.n
        b = self.bits
        return b[:n, :n], b[:n, n:], b[n:, :n], b[n:, n:]

    def to_list(self) -> List[List[int]]:
        return self.bits.astype(int).tolist()


def invert(matrix: SymplecticMatrix) -> SymplecticMatrix:
    """
    辛矩阵的逆，按 Ω Mᵀ Ω 计算（在GF(2)上成立）。

    异常:
        NotSymplecticError: 输入不是辛矩阵。
    """
    if not is_symplectic(matrix.bits):
        raise NotSymplecticError("Cannot invert a non-symplectic matrix this way")
    form = omega(matrix.n).astype(np.int64)
    inv = (form @ matrix.bits.T.astype(np.int64) @ form) % 2
    return SymplecticMatrix(matrix.n, inv)


def gate_generator(gate: Gate, n: int) -> SymplecticMatrix:
    """
    门共轭作用对应的辛矩阵。

    参数:
        gate (Gate): H、S、CNOT 或 CZ。
        n (int): 量子比特总数。

    返回:
        SymplecticMatrix: 满足 P_{Mv} ∝ U P_v U† 的矩阵。
    """
    for q in gate.qubits:
        if not 0 <= q < n:
            raise IndexError(f"Qubit {q} out of range for {n} qubits")
    m = np.eye(2 * n, dtype=np.uint8)
    if gate.kind is GateKind.H:
        i = gate.qubits[0]
        m[i, i] = m[n + i, n + i] = 0
        m[i, n + i] = m[n + i, i] = 1
    elif gate.kind is GateKind.S:
        i = gate.qubits[0]
        m[n + i, i] = 1
    elif gate.kind is GateKind.CNOT:
        c, t = gate.qubits
        m[t, c] = 1
        m[n + c, n + t] = 1
    elif gate.kind is GateKind.CZ:
        i, j = gate.qubits
        m[n + j, i] = 1
        m[n + i, j] = 1
    else:
        raise UnsupportedGateError(f"{gate.kind.value} has no symplectic generator")
    return SymplecticMatrix(n, m)


def circuit_to_symplectic(circuit) -> SymplecticMatrix:
    """
    电路中各门生成元的有序乘积；测量被忽略。

    参数:
        circuit: 具有 n 与 gates 属性的对象（如 circuit_synth.Circuit）。
    """
    n = circuit.n
    result = SymplecticMatrix.identity(n)
    for gate in circuit.gates:
        if gate.kind is GateKind.MZ:
            continue
        result = gate_generator(gate, n) @ result
    return result


def random_symplectic(n: int, rng: random.Random, depth: Optional[int] = None) -> SymplecticMatrix:
    """随机门序列的辛矩阵；depth 默认为 8n²+4"""
    depth = depth if depth is not None else 8 * n * n + 4
    result = SymplecticMatrix.identity(n)
    for _ in range(depth):
        choice = rng.randrange(3) if n > 1 else rng.randrange(2)
        if choice == 0:
            gate = H(rng.randrange(n))
        elif choice == 1:
            gate = S(rng.randrange(n))
        else:
            c, t = rng.sample(range(n), 2)
            gate = CNOT(c, t)
        result = gate_generator(gate, n) @ result
    return result


# ---------------------------------------------------------------------------
# Protocol subgroups

class SubgroupKind(str, Enum):
    PK_SPAN = "PkSpan"
    BK_SPAN = "BkSpan"


@dataclass(frozen=True)
class SubgroupSpec:
    """
    𝒫_k：前k个量子比特任意、其余为I/Z，共 2^(n+k) 个元素；
    ℬ_k：仅在后 n−k 个量子比特上的Z串，共 2^(n−k) 个元素。
    """
    kind: SubgroupKind
    n: int
    k: int

    def __post_init__(self):
        object.__setattr__(self, "kind", SubgroupKind(self.kind))
        if not 0 <= self.k <= self.n:
            raise ValueError(f"Need 0 <= k <= n, got n={self.n}, k={self.k}")

    def generators(self) -> List[int]:
        n, k = self.n, self.k
        measured = [1 << (n + j) for j in range(k, n)]
        if self.kind is SubgroupKind.BK_SPAN:
            return measured
        kept = [1 << i for i in range(k)] + [1 << (n + i) for i in range(k)]
        return kept + measured

    @property
    def size(self) -> int:
        return 1 << len(self.generators())


def kept_label_vector(label: int, n: int, k: int) -> int:
    """k 比特标签（x | z<<k）嵌入 n 比特Pauli向量"""
    mask = (1 << k) - 1
    return (label & mask) | ((label >> k) << n)


def syndrome_vector(value: int, n: int, k: int) -> int:
    """症状第 j 位对应被测量子比特 k+j 的 X 分量"""
    return value << k


# ---------------------------------------------------------------------------
# Graph to matrix

def assemble_protocol_matrix(
    n: int,
    k: int,
    T: np.ndarray,
    R: np.ndarray,
    S_block: np.ndarray,
    Q: Optional[np.ndarray] = None,
) -> SymplecticMatrix:
    """
    组装 [[A, A·Adj], [0, Aᵀ]]，其中 A = [[I_k, 0], [T, I]]，Adj = [[Q, Rᵀ], [R, S]]。

    参数:
        T, R: (n−k)×k 的比特矩阵。
        S_block: (n−k)×(n−k) 对称零对角比特矩阵。
        Q: k×k 对称零对角比特矩阵，默认为零。
    """
    m = n - k
    T = np.asarray(T, dtype=np.int64).reshape(m, k) % 2
    R = np.asarray(R, dtype=np.int64).reshape(m, k) % 2
    S_block = np.asarray(S_block, dtype=np.int64).reshape(m, m) % 2
    Q = np.zeros((k, k), dtype=np.int64) if Q is None else np.asarray(Q, dtype=np.int64) % 2
    if not np.array_equal(S_block, S_block.T) or S_block.diagonal().any():
        raise ValueError("S must be symmetric with zero diagonal")
    if not np.array_equal(Q, Q.T) or Q.diagonal().any():
        raise ValueError("Q must be symmetric with zero diagonal")

    A = np.eye(n, dtype=np.int64)
    A[k:, :k] = T
    adjacency = np.zeros((n, n), dtype=np.int64)
    adjacency[:k, :k] = Q
    adjacency[k:, :k] = R
    adjacency[:k, k:] = R.T
    adjacency[k:, k:] = S_block
    full = np.zeros((2 * n, 2 * n), dtype=np.int64)
    full[:n, :n] = A
    full[:n, n:] = (A @ adjacency) % 2
    full[n:, n:] = A.T
    return SymplecticMatrix(n, full)


def normalize_keep_edges(T: np.ndarray, R: np.ndarray, S_block: np.ndarray, Q: np.ndarray):
    """
    把 Q 消为零：R ← R + TQ，S ← S + TQTᵀ。等价于左乘保留对上的CZ层。

    返回:
        (R', S') 新的块。
    """
    T = np.asarray(T, dtype=np.int64)
    Q = np.asarray(Q, dtype=np.int64)
    R_new = (np.asarray(R, dtype=np.int64) + T @ Q) % 2
    S_new = (np.asarray(S_block, dtype=np.int64) + T @ Q @ T.T) % 2
    return R_new, S_new


def build_from_graph(graph, labeling=None, normalize: bool = False) -> SymplecticMatrix:
    """
    由 (n,k)-图和有效标记构造协议的辛矩阵。

    参数:
        graph (NKGraph): 输入图。
        labeling (Labeling): 有效标记；None 时使用 find_valid_labeling 的结果。
        normalize (bool): 是否化为 Q=0 的正规形式。

    返回:
        SymplecticMatrix: [[A, B'], [0, Aᵀ]]。

    异常:
        InvalidCodeError: 标记无效或码无效。
    """
    from .graph_code import codeword_generators, find_valid_labeling, require_valid_labeling

    if labeling is None:
        labeling = find_valid_labeling(graph)
    require_valid_labeling(graph, labeling)
    n, k = graph.n_out, graph.k_in
    rref, _ = gf2_rref(codeword_generators(graph, labeling).to_array())
    T = rref[:k, k:].T if k else np.zeros((n - k, 0), dtype=np.uint8)

    adjacency = graph.output_adjacency(labeling.output_order)
    Q = adjacency[:k, :k]
    R = adjacency[k:, :k]
    S_block = adjacency[k:, k:]
    if normalize:
        R, S_block = normalize_keep_edges(T, R, S_block, Q)
        Q = None
    logger.debug("build_from_graph n=%d k=%d normalize=%s", n, k, normalize)
    return assemble_protocol_matrix(n, k, T, R, S_block, Q)


def iter_bits(value: int) -> Iterable[int]:
    """依次给出 value 中为1的位下标"""
    index = 0
    while value:
        if value & 1:
            yield index
        value >>= 1
        index += 1
