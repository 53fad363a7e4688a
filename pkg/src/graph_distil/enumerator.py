"""
graph_distil 枚举模块
处理两种枚举策略（图轨道与辛正规形式）、按去重键生成横截集、检查点、帕累托包络以及轨道数据库
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, islice, product
from math import comb
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .exceptions import ParseError, SizeLimitError
from .graph_code import (
    MAX_CLASS_VERTICES,
    MAX_ORBIT_VERTICES,
    NKGraph,
    canonical_form,
    connected_lc_classes,
    graph_from_graph6,
    graph_from_json,
    is_valid_code,
    lc_classes,
    with_inputs,
)
from .protocol_stats import (
    DistillationStatistics,
    best_corrected_coefficients,
    dedup_key,
    full_statistics,
)
from .symplectic import SymplecticMatrix, assemble_protocol_matrix, build_from_graph

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
MAX_S_CATALOG = 8
MAX_EXHAUSTIVE_SYNDROMES = 16
MAX_ENVELOPE_MEASURED = 5
AUTO_SYMMETRY_BREAKING_ABOVE = 6


# ---------------------------------------------------------------------------
# Normal forms

@dataclass(frozen=True)
class NormalForm:
    """
    Q=0 正规形式的块 (T, R, S)。t_cols[i]、r_cols[i] 为第 i 列（第 r 位对应被测比特 k+r），
    s_rows 为 S 的邻接位掩码。
    """
    n: int
    k: int
    t_cols: Tuple[int, ...]
    r_cols: Tuple[int, ...]
    s_rows: Tuple[int, ...]

    def __post_init__(self):
        m = self.n - self.k
        if len(self.t_cols) != self.k or len(self.r_cols) != self.k or len(self.s_rows) != m:
            raise ValueError("Normal form blocks do not match (n, k)")

    def _columns(self, cols: Sequence[int]) -> np.ndarray:
        m = self.n - self.k
        mat = np.zeros((m, self.k), dtype=np.uint8)
        for i, col in enumerate(cols):
            for r in range(m):
                mat[r, i] = (col >> r) & 1
        return mat

    @property
    def T(self) -> np.ndarray:
        return self._columns(self.t_cols)

    @property
    def R(self) -> np.ndarray:
        return self._columns(self.r_cols)

    @property
    def S(self) -> np.ndarray:
        m = self.n - self.k
        return np.array([[(row >> c) & 1 for c in range(m)] for row in self.s_rows], dtype=np.uint8).reshape(m, m)

    def matrix(self) -> SymplecticMatrix:
        return assemble_protocol_matrix(self.n, self.k, self.T, self.R, self.S)

    def descriptor(self) -> dict:
        return {
            "kind": "normal_form",
            "n": self.n,
            "k": self.k,
            "T": list(self.t_cols),
            "R": list(self.r_cols),
            "S": list(self.s_rows),
        }


def column_pair_allowed(t: int, r: int) -> bool:
    """列约束 t ≤ r ≤ t⊕r（按整数比较）"""
    return t <= r <= (t ^ r)


@lru_cache(maxsize=None)
def allowed_column_pairs(m: int, symmetry_breaking: bool) -> Tuple[Tuple[int, int], ...]:
    values = range(1 << m)
    pairs = [(t, r) for t in values for r in values]
    if symmetry_breaking:
        pairs = [(t, r) for t, r in pairs if column_pair_allowed(t, r)]
    return tuple(pairs)


def _adjacency_rows(graph: NKGraph) -> Tuple[int, ...]:
    return tuple(graph.adjacency)


@lru_cache(maxsize=None)
def graph_isomorphism_classes(m: int) -> Tuple[Tuple[int, ...], ...]:
    """
    m 个顶点的简单图的同构类代表（邻接位掩码）。m ≤ 7 取自 networkx 图谱，m = 8 由 7 顶点代表扩展得到。

    异常:
        SizeLimitError: m > 8。
    """
    if m > MAX_S_CATALOG:
        raise SizeLimitError(f"S isomorphism catalogue limited to {MAX_S_CATALOG} vertices, got {m}")
    reps: Dict[Tuple, Tuple[int, ...]] = {}
    if m == 0:
        return ((),)
    if m <= 7:
        sources = (g for g in nx.graph_atlas_g() if g.number_of_nodes() == m)
        for g in sources:
            graph = NKGraph.from_networkx(g)
            form = canonical_form(graph)
            reps.setdefault(form.key, _adjacency_rows(form.graph))
    else:
        for rows in graph_isomorphism_classes(m - 1):
            for mask in range(1 << (m - 1)):
                extended = [row | (((mask >> v) & 1) << (m - 1)) for v, row in enumerate(rows)] + [mask]
                form = canonical_form(NKGraph(m, 0, tuple(extended), ()))
                reps.setdefault(form.key, _adjacency_rows(form.graph))
    logger.debug("%d isomorphism classes of graphs on %d vertices", len(reps), m)
    return tuple(reps[key] for key in sorted(reps))


def labelled_graphs(m: int) -> Iterator[Tuple[int, ...]]:
    """m 个顶点上的全部带标号简单图"""
    slots = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for mask in range(1 << len(slots)):
        rows = [0] * m
        for bit, (i, j) in enumerate(slots):
            if (mask >> bit) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        yield tuple(rows)


def resolve_symmetry_breaking(n: int, k: int, symmetry_breaking: Optional[bool]) -> bool:
    if symmetry_breaking is None:
        return n + k > AUTO_SYMMETRY_BREAKING_ABOVE
    return bool(symmetry_breaking)


def resolve_s_catalog(symmetry_breaking: bool, s_catalog: Optional[str]) -> str:
    if s_catalog is None:
        return "labelled" if symmetry_breaking else "isomorphism"
    if s_catalog not in ("labelled", "isomorphism"):
        raise ValueError(f"Unknown S catalogue {s_catalog!r}")
    return s_catalog


def _column_choices(m: int, k: int, symmetry_breaking: bool) -> Iterator[Tuple[Tuple[int, int], ...]]:
    pairs = allowed_column_pairs(m, symmetry_breaking)
    if symmetry_breaking:
        return combinations_with_replacement(pairs, k)
    return product(pairs, repeat=k)


def iteration_space_size(
    n: int,
    k: int,
    symmetry_breaking: Optional[bool] = None,
    s_catalog: Optional[str] = None,
) -> int:
    """正规形式迭代空间的大小（不做遍历）"""
    m = n - k
    sb = resolve_symmetry_breaking(n, k, symmetry_breaking)
    catalogue = resolve_s_catalog(sb, s_catalog)
    pairs = len(allowed_column_pairs(m, sb))
    columns = comb(pairs + k - 1, k) if sb else pairs ** k
    if catalogue == "labelled":
        s_count = 1 << (m * (m - 1) // 2)
    else:
        s_count = len(graph_isomorphism_classes(m))
    return columns * s_count


def iter_normal_forms(
    n: int,
    k: int,
    symmetry_breaking: Optional[bool] = None,
    s_catalog: Optional[str] = None,
) -> Iterator[NormalForm]:
    """
    惰性遍历 (T, R, S)。对称性破缺开启时每列取 t ≤ r ≤ t⊕r 且列按非降序排列，S 默认取全部带标号图；
    关闭时 (T, R) 取全部，S 取同构类代表。
    """
    if not 0 <= k <= n:
        raise ValueError(f"Need 0 <= k <= n, got n={n}, k={k}")
    m = n - k
    sb = resolve_symmetry_breaking(n, k, symmetry_breaking)
    catalogue = resolve_s_catalog(sb, s_catalog)
    s_list: Iterable[Tuple[int, ...]]
    if catalogue == "labelled":
        s_list = list(labelled_graphs(m))
    else:
        s_list = graph_isomorphism_classes(m)
    for columns in _column_choices(m, k, sb):
        t_cols = tuple(t for t, _ in columns)
        r_cols = tuple(r for _, r in columns)
        for s_rows in s_list:
            yield NormalForm(n, k, t_cols, r_cols, tuple(s_rows))


# ---------------------------------------------------------------------------
# Records

@dataclass
class ProtocolRecord:
    """一个协议：来源（图或正规形式）、矩阵与 b=0 去重键"""
    source: Union[NKGraph, NormalForm]
    matrix: SymplecticMatrix = field(repr=False)
    key: Tuple = field(repr=False)
    n: int
    k: int

    @property
    def kind(self) -> str:
        return "graph" if isinstance(self.source, NKGraph) else "normal_form"

    def descriptor(self) -> dict:
        if isinstance(self.source, NKGraph):
            data = {"kind": "graph", "n": self.n, "k": self.k}
            data.update(self.source.to_json())
            return data
        return self.source.descriptor()

    def statistics(self, syndromes: str = "all") -> DistillationStatistics:
        return full_statistics(self.matrix, self.n, self.k, syndromes)

    def samples(self, f_grid: Sequence[float]) -> List[Tuple[float, float]]:
        """Werner输入下 b=0 的 (p_succ, F_out)"""
        stats = self.statistics("trivial")
        out = []
        for fidelity in f_grid:
            p = stats.success_probability(fidelity, 0)
            out.append((p, stats.fidelity(fidelity, 0) if p > 0 else 0.0))
        return out


@dataclass(frozen=True)
class KeySettings:
    group: str = "symplectic"
    exact: bool = False


def record_key(matrix: SymplecticMatrix, n: int, k: int, settings: KeySettings) -> Tuple:
    stats = full_statistics(matrix, n, k, "trivial")
    return dedup_key(stats, 0, settings.group, settings.exact)


def record_from_graph(graph: NKGraph, settings: KeySettings = KeySettings()) -> ProtocolRecord:
    matrix = build_from_graph(graph, normalize=True)
    return ProtocolRecord(graph, matrix, record_key(matrix, graph.n_out, graph.k_in, settings), graph.n_out, graph.k_in)


def record_from_normal_form(form: NormalForm, settings: KeySettings = KeySettings()) -> ProtocolRecord:
    matrix = form.matrix()
    return ProtocolRecord(form, matrix, record_key(matrix, form.n, form.k, settings), form.n, form.k)


def record_from_descriptor(data: dict, settings: KeySettings = KeySettings()) -> ProtocolRecord:
    """
    由 descriptor() 的输出重建记录。

    异常:
        ParseError: 描述符格式错误。
    """
    kind = data.get("kind")
    if kind == "graph":
        return record_from_graph(graph_from_json(data), settings)
    if kind == "normal_form":
        try:
            form = NormalForm(
                int(data["n"]), int(data["k"]), tuple(data["T"]), tuple(data["R"]), tuple(data["S"])
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed normal-form descriptor: {e}") from e
        return record_from_normal_form(form, settings)
    raise ParseError(f"Unknown record kind {kind!r}")


def _ordered_map(func, items: Iterable, workers: int) -> Iterator:
    if workers <= 1:
        yield from map(func, items)
        return
    with ThreadPoolExecutor(max_workers=workers) as executor:
        iterator = iter(items)
        while True:
            chunk = list(islice(iterator, 256 * workers))
            if not chunk:
                return
            yield from executor.map(func, chunk)


# ---------------------------------------------------------------------------
# Orbit database

class OrbitDatabase:
    """
    缓存目录下的局部补类代表：每个顶点数一个换行分隔的 graph6 文件 lc_classes_{N}.g6。
    N ≤ 9 时按需自行生成。
    """

    def __init__(self, cache_dir: Union[str, Path]):
        self.cache_dir = Path(cache_dir).expanduser()

    def path(self, num_vertices: int) -> Path:
        return self.cache_dir / f"lc_classes_{num_vertices}.g6"

    def has(self, num_vertices: int) -> bool:
        return self.path(num_vertices).exists()

    def connected_classes(self, num_vertices: int) -> Tuple[NKGraph, ...]:
        """
        读取（必要时生成并写入）N 个顶点连通图的类代表。

        异常:
            SizeLimitError: 文件不存在且 N > 9。
        """
        path = self.path(num_vertices)
        if path.exists():
            return self._read(path)
        if num_vertices > MAX_CLASS_VERTICES:
            raise SizeLimitError(
                f"No class file {path} and self-generation is limited to {MAX_CLASS_VERTICES} vertices"
            )
        classes = connected_lc_classes(num_vertices)
        self._write(path, classes)
        return classes

    def build(self, max_vertices: int) -> Dict[int, int]:
        """生成 1..max_vertices 的类文件，返回每个顶点数的类数"""
        return {N: len(self.connected_classes(N)) for N in range(1, max_vertices + 1)}

    def _read(self, path: Path) -> Tuple[NKGraph, ...]:
        graphs = []
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                line = line.strip()
                if line:
                    graphs.append(graph_from_graph6(line))
        return tuple(graphs)

    def _write(self, path: Path, classes: Sequence[NKGraph]):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            for graph in classes:
                f.write(graph.to_graph6() + "\n")
        logger.info("wrote %d classes to %s", len(classes), path)


# ---------------------------------------------------------------------------
# Strategies

def enumerate_graphs(
    n: int,
    k: int,
    orbit_db: Optional[OrbitDatabase] = None,
    include_disconnected: bool = False,
    settings: KeySettings = KeySettings(),
    workers: int = 1,
) -> Iterator[ProtocolRecord]:
    """
    图策略：对 n+k 顶点的每个局部补类代表和每个 k 元顶点子集（按类的对称性去重）作为输入，
    生成有效协议；rank(𝐀) < k 的跳过。

    异常:
        SizeLimitError: 无数据库时 n+k > 9，或 n+k > 12。
    """
    if not 0 <= k <= n:
        raise ValueError(f"Need 0 <= k <= n, got n={n}, k={k}")
    total = n + k
    if total > MAX_ORBIT_VERTICES:
        raise SizeLimitError(f"Graph enumeration limited to n+k <= {MAX_ORBIT_VERTICES}, got {total}")
    if orbit_db is None and total > MAX_CLASS_VERTICES:
        raise SizeLimitError(f"Without an orbit database graph enumeration is limited to n+k <= {MAX_CLASS_VERTICES}")
    source = orbit_db.connected_classes if orbit_db is not None else connected_lc_classes
    classes = lc_classes(total, include_disconnected, class_source=source)
    logger.info("graph strategy (%d,%d): %d classes", n, k, len(classes))

    def graphs() -> Iterator[NKGraph]:
        for rep in classes:
            seen = set()
            for inputs in combinations(range(total), k):
                graph = with_inputs(rep, inputs)
                key = canonical_form(graph).key
                if key in seen:
                    continue
                seen.add(key)
                if is_valid_code(graph):
                    yield graph

    yield from _ordered_map(lambda g: record_from_graph(g, settings), graphs(), workers)


def enumerate_normal_forms(
    n: int,
    k: int,
    symmetry_breaking: Optional[bool] = None,
    s_catalog: Optional[str] = None,
    settings: KeySettings = KeySettings(),
    workers: int = 1,
) -> Iterator[ProtocolRecord]:
    """
    正规形式策略：遍历 iter_normal_forms 并为每个 (T, R, S) 计算去重键。
    """
    forms = iter_normal_forms(n, k, symmetry_breaking, s_catalog)
    yield from _ordered_map(lambda f: record_from_normal_form(f, settings), forms, workers)


def dedup(
    stream: Iterable[ProtocolRecord],
    checkpoint_path: Optional[Path] = None,
    checkpoint_every: int = 100000,
    settings: KeySettings = KeySettings(),
) -> List[ProtocolRecord]:
    """
    每个去重键保留第一次出现的记录。给定 checkpoint_path 时，每处理 checkpoint_every 条记录追加一行检查点，
    并在再次运行时从最后一行恢复。
    """
    transversal: List[ProtocolRecord] = []
    seen = set()
    processed = 0
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        state = load_checkpoint(Path(checkpoint_path))
        if state is not None:
            processed = state["processed"]
            for descriptor in state["transversal"]:
                record = record_from_descriptor(descriptor, settings)
                seen.add(record.key)
                transversal.append(record)
            logger.info("resuming after %d records with %d classes", processed, len(transversal))
    iterator = iter(stream)
    for _ in islice(iterator, processed):
        pass
    for record in iterator:
        processed += 1
        if record.key not in seen:
            seen.add(record.key)
            transversal.append(record)
        if checkpoint_path is not None and processed % checkpoint_every == 0:
            write_checkpoint(Path(checkpoint_path), processed, transversal)
    if checkpoint_path is not None:
        write_checkpoint(Path(checkpoint_path), processed, transversal)
    return transversal


def write_checkpoint(path: Path, processed: int, transversal: Sequence[ProtocolRecord]):
    path.parent.mkdir(parents=True, exist_ok=True)
    line = {
        "version": CHECKPOINT_VERSION,
        "processed": processed,
        "transversal": [record.descriptor() for record in transversal],
    }
    with open(path, 'a', encoding='utf-8') as f:
        f.write(json.dumps(line, sort_keys=True) + "\n")


def load_checkpoint(path: Path) -> Optional[dict]:
    """
    读取检查点文件的最后一行。

    异常:
        ParseError: 版本不符或格式错误。
    """
    last = None
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if line.strip():
                last = line
    if last is None:
        return None
    try:
        state = json.loads(last)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: corrupt checkpoint line: {e}") from e
    if state.get("version") != CHECKPOINT_VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {state.get('version')!r}")
    return state


# ---------------------------------------------------------------------------
# Pareto envelopes

class SyndromePolicy(str, Enum):
    TRIVIAL_ONLY = "TrivialOnly"
    ALL_SYNDROME_SETS = "AllSyndromeSets"


@dataclass
class EnvelopeRow:
    f_in: float
    p_succ: float
    f_out: float
    on_hull: bool


@dataclass
class EnvelopeTable:
    """
    每个输入保真度下的帕累托点（按 p_succ 升序）。hull_only 时只保留凸包顶点，
    阶梯包络不精确，value() 拒绝查询。
    """
    policy: str
    rows: List[EnvelopeRow]
    hull_only: bool = False

    def points(self, f_in: float) -> List[Tuple[float, float]]:
        return [(r.p_succ, r.f_out) for r in self.rows if r.f_in == f_in]

    def value(self, f_in: float, p: float) -> Optional[float]:
        """
        阶梯包络：p_succ ≥ p 的点中的最大 F_out

        异常:
            ValueError: 表只含凸包顶点。
        """
        if self.hull_only:
            raise ValueError("Staircase values are not exact for this table; use hull_value")
        candidates = [f for q, f in self.points(f_in) if q >= p - 1e-15]
        return max(candidates) if candidates else None

    def hull_value(self, f_in: float, p: float) -> Optional[float]:
        """(p, p·F) 坐标下上凸包在 p 处对应的保真度"""
        hull = [(r.p_succ, r.p_succ * r.f_out) for r in self.rows if r.f_in == f_in and r.on_hull]
        hull.sort()
        if not hull or p > hull[-1][0] + 1e-15:
            return None
        if p <= hull[0][0]:
            return hull[0][1] / hull[0][0] if hull[0][0] > 0 else None
        for (p0, y0), (p1, y1) in zip(hull, hull[1:]):
            if p0 <= p <= p1:
                y = y0 + (y1 - y0) * (p - p0) / (p1 - p0) if p1 > p0 else max(y0, y1)
                return y / p
        return hull[-1][1] / hull[-1][0]

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "hull_only": self.hull_only,
            "rows": [r.__dict__ for r in self.rows],
        }


def _pareto(points: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    front: List[Tuple[float, float]] = []
    best = -1.0
    for p, f in sorted(points, key=lambda x: (-x[0], -x[1])):
        if f > best + 1e-15:
            front.append((p, f))
            best = f
    return sorted(front)


def _upper_hull(points: List[Tuple[float, float]]) -> set:
    """(p, p·F) 坐标下从原点出发的上凸包顶点"""
    coords = sorted({(p, p * f) for p, f in points} | {(0.0, 0.0)})
    hull: List[Tuple[float, float]] = []
    for point in coords:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (point[1] - y1) - (y2 - y1) * (point[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(point)
    return {pt for pt in hull if pt != (0.0, 0.0)}


def _syndrome_set_points(stats: DistillationStatistics, fidelity: float) -> Tuple[List[Tuple[float, float]], bool]:
    """被接受症状集合的 (p, F) 点；第二个返回值表示是否遍历了全部子集"""
    probs, fids = [], []
    for _, p, coeffs in stats.branches(fidelity):
        if p <= 0:
            continue
        corrected, _ = best_corrected_coefficients(coeffs)
        probs.append(p)
        fids.append(float(corrected[0]))
    probs_arr = np.array(probs)
    mass = probs_arr * np.array(fids)
    count = len(probs)
    if count <= MAX_EXHAUSTIVE_SYNDROMES:
        masks = np.arange(1, 1 << count, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(count)) & 1).astype(float)
        p_sets = bits @ probs_arr
        f_sets = (bits @ mass) / p_sets
        return list(zip(p_sets.tolist(), f_sets.tolist())), True
    # prefix sets by decreasing corrected fidelity realise the upper hull only
    order = np.argsort(-np.array(fids), kind="stable")
    p_cum = np.cumsum(probs_arr[order])
    m_cum = np.cumsum(mass[order])
    return list(zip(p_cum.tolist(), (m_cum / p_cum).tolist())), False


def pareto_envelope(
    transversal: Sequence[ProtocolRecord],
    f_grid: Sequence[float],
    policy: SyndromePolicy = SyndromePolicy.TRIVIAL_ONLY,
) -> EnvelopeTable:
    """
    每个输入保真度下 (p_succ, F_out) 点的帕累托上包络。AllSyndromeSets 时还遍历被接受的症状集合，
    集合的统计是各症状最佳局部修正态按概率的混合。两种策略都包含不蒸馏的点 (1, F^k)。

    症状数超过 MAX_EXHAUSTIVE_SYNDROMES 时只用前缀集合，表标记为 hull_only 并只保留凸包顶点。

    异常:
        SizeLimitError: AllSyndromeSets 且 n−k > 5。
        ValueError: 横截集中的 k 不一致。
    """
    policy = SyndromePolicy(policy)
    ks = {record.k for record in transversal}
    if len(ks) > 1:
        raise ValueError(f"Envelope needs a common k, got {sorted(ks)}")
    stats_list = []
    for record in transversal:
        if policy is SyndromePolicy.ALL_SYNDROME_SETS:
            if record.n - record.k > MAX_ENVELOPE_MEASURED:
                raise SizeLimitError(f"Syndrome-set envelopes limited to n-k <= {MAX_ENVELOPE_MEASURED}")
            stats_list.append(record.statistics("all"))
        else:
            stats_list.append(record.statistics("trivial"))
    hull_only = False
    rows: List[EnvelopeRow] = []
    for fidelity in f_grid:
        points: List[Tuple[float, float]] = []
        if ks:
            points.append((1.0, float(fidelity) ** next(iter(ks))))
        for stats in stats_list:
            if policy is SyndromePolicy.ALL_SYNDROME_SETS:
                set_points, exact = _syndrome_set_points(stats, fidelity)
                points.extend(set_points)
                hull_only = hull_only or not exact
            else:
                p = stats.success_probability(fidelity, 0)
                if p > 0:
                    points.append((p, stats.fidelity(fidelity, 0)))
        front = _pareto(points)
        hull = _upper_hull(front)
        for p, f in front:
            rows.append(EnvelopeRow(float(fidelity), p, f, (p, p * f) in hull))
    if hull_only:
        rows = [r for r in rows if r.on_hull]
        logger.info("syndrome-set envelope keeps hull vertices only")
    return EnvelopeTable(policy.value, rows, hull_only)
