#!/usr/bin/env python3
"""
graph_distil CLI - 图码纠缠蒸馏工具包的主要入口点
"""

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import typer

from . import __version__
from .applications import binned_key_rate, teleportation_comparison, werner_threshold
from .bell_sim import NoiseModel, simulate as run_simulation
from .circuit_synth import Circuit, heuristic_search, metrics
from .config import DistilConfig, create_default_config, load_config
from .enumerator import (
    KeySettings,
    OrbitDatabase,
    SyndromePolicy,
    dedup,
    enumerate_graphs,
    enumerate_normal_forms,
    pareto_envelope,
)
from .exceptions import DistilError, SizeLimitError
from .evolver import evolve, genome_to_circuit
from .fixtures import get_circuit, get_graph
from .graph_code import MAX_ORBIT_VERTICES, NKGraph, graph_from_graph6, graph_from_json
from .protocol_stats import evaluate_werner, full_statistics, syndrome_string
from .symplectic import SymplecticMatrix, build_from_graph, circuit_to_symplectic, pauli_label

app = typer.Typer(help="graph_distil - enumerate, analyse and compile n->k entanglement distillation protocols")

USER_ERRORS = (DistilError, ValueError, KeyError, OSError)
MAX_COEFFICIENT_COLUMNS_K = 2


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="输出调试日志")):
    """配置日志级别"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _fail(e: Exception):
    """内部限制退出码 1，用户错误退出码 2"""
    typer.echo(f"Error: {e}")
    raise typer.Exit(1 if isinstance(e, SizeLimitError) else 2)


def _sha256(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def _metadata(command: str, params: dict, config: DistilConfig, input_hash: Optional[str]) -> List[str]:
    run_config = {"command": command, "params": params, "config": config.model_dump()}
    return [
        f"graph_distil {__version__}",
        f"run_config: {json.dumps(run_config, sort_keys=True)}",
        f"input_sha256: {input_hash or 'none'}",
    ]


def _write_csv(output: Optional[str], metadata: Sequence[str], header: Sequence[str], rows: Iterable[Sequence]):
    buffer = io.StringIO()
    for line in metadata:
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buffer.getvalue(), encoding="utf-8")
        typer.echo(f"Wrote {path}")
    else:
        typer.echo(buffer.getvalue(), nl=False)


def _parse_grid(text: Optional[str], default: Sequence[float]) -> List[float]:
    if not text:
        return [float(f) for f in default]
    try:
        grid = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"Fidelity grid must be comma-separated numbers, got {text!r}") from None
    for f in grid:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"Fidelity {f} outside [0, 1]")
    return grid


def _load_source(
    path: Optional[str],
    fixture: Optional[str] = None,
    circuit_fixture: Optional[str] = None,
) -> Tuple[Union[NKGraph, Circuit], str]:
    """读取图或电路（文件或夹具），同时返回输入哈希"""
    if fixture:
        return get_graph(fixture), _sha256(f"fixture:graph:{fixture}")
    if circuit_fixture:
        return get_circuit(circuit_fixture), _sha256(f"fixture:circuit:{circuit_fixture}")
    if not path:
        raise ValueError("Give an input file or a fixture id")
    raw = Path(path).read_bytes()
    text = raw.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return graph_from_graph6(text), _sha256(raw)
    if isinstance(data, dict) and "gates" in data:
        return Circuit.from_json(data), _sha256(raw)
    return graph_from_json(data), _sha256(raw)


def _protocol(source: Union[NKGraph, Circuit]) -> Tuple[SymplecticMatrix, int, int]:
    if isinstance(source, NKGraph):
        return build_from_graph(source), source.n_out, source.k_in
    if source.kept != tuple(range(source.keep)):
        raise ValueError(f"Circuit keeps qubits {source.kept}; statistics need the first {source.keep} kept")
    return circuit_to_symplectic(source), source.n, source.keep


def _coefficient_header(k: int) -> List[str]:
    if k > MAX_COEFFICIENT_COLUMNS_K:
        return []
    return [f"c_{pauli_label(label, k)}" for label in range(1 << (2 * k))]


def _coefficient_cells(coeffs, k: int) -> List[float]:
    if k > MAX_COEFFICIENT_COLUMNS_K:
        return []
    return [float(c) for c in coeffs]


@app.command("enumerate")
def enumerate_cmd(
    n: int = typer.Option(..., "-n", help="输入对数 n"),
    k: int = typer.Option(..., "-k", help="输出对数 k"),
    strategy: str = typer.Option("graphs", "--strategy", "-s", help="graphs、normal 或 both"),
    output_dir: Optional[str] = typer.Option(None, "--output", "-o", help="横截集CSV的输出目录"),
    include_disconnected: Optional[bool] = typer.Option(
        None, "--disconnected/--connected-only", help="图策略是否包含非连通图"
    ),
    symmetry_breaking: Optional[bool] = typer.Option(
        None, "--symmetry-breaking/--no-symmetry-breaking", help="正规形式的列约束（默认自动）"
    ),
    checkpoint: Optional[str] = typer.Option(None, "--checkpoint", help="检查点文件（JSON行）"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="工作线程数"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    枚举 n→k 协议并按去重键输出横截集
    """
    try:
        config = load_config(config_file)
        if strategy not in ("graphs", "normal", "both"):
            raise ValueError(f"Unknown strategy {strategy!r}; use graphs, normal or both")
        if n + k > MAX_ORBIT_VERTICES:
            raise SizeLimitError(f"Enumeration limited to n+k <= {MAX_ORBIT_VERTICES}, got {n + k}")
        enum_cfg = config.enumeration
        if include_disconnected is None:
            # 正规形式策略总是包含非连通码
            include_disconnected = True if strategy == "both" else enum_cfg.include_disconnected
        if symmetry_breaking is None:
            symmetry_breaking = enum_cfg.symmetry_breaking
        workers = workers or config.workers
        settings = KeySettings(enum_cfg.dedup_group, enum_cfg.exact_keys)
        params = {
            "n": n, "k": k, "strategy": strategy,
            "include_disconnected": include_disconnected, "symmetry_breaking": symmetry_breaking,
        }
        metadata = _metadata("enumerate", params, config, None)

        chosen = ["graphs", "normal"] if strategy == "both" else [strategy]
        key_sets = {}
        for name in chosen:
            if name == "graphs":
                orbit_db = OrbitDatabase(config.cache_dir) if n + k > 9 else None
                stream = enumerate_graphs(n, k, orbit_db, include_disconnected, settings, workers)
            else:
                stream = enumerate_normal_forms(n, k, symmetry_breaking, None, settings, workers)
            checkpoint_path = Path(f"{checkpoint}.{name}") if checkpoint and strategy == "both" else checkpoint
            transversal = dedup(
                stream,
                Path(checkpoint_path) if checkpoint_path else None,
                enum_cfg.checkpoint_every,
                settings,
            )
            key_sets[name] = {record.key for record in transversal}
            typer.echo(f"{name}: {len(transversal)} distillation classes for ({n},{k})")
            if output_dir:
                rows = []
                for record in transversal:
                    stats = record.statistics("trivial")
                    rows.append([
                        _sha256(repr(record.key))[:16],
                        record.kind,
                        json.dumps(record.descriptor(), sort_keys=True),
                        " ".join(str(c) for c in stats.stabilizer_enumerator().counts),
                        " ".join(str(c) for c in stats.normalizer_enumerator().counts),
                    ])
                _write_csv(
                    str(Path(output_dir) / f"transversal_{name}_{n}_{k}.csv"),
                    metadata,
                    ["key", "kind", "descriptor", "stabilizer_enumerator", "normalizer_enumerator"],
                    rows,
                )
        if strategy == "both":
            same = key_sets["graphs"] == key_sets["normal"]
            typer.echo(f"key sets identical: {'yes' if same else 'no'}")
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def stats(
    source: Optional[str] = typer.Argument(None, help="图（JSON/graph6）或电路JSON文件"),
    fixture: Optional[str] = typer.Option(None, "--fixture", help="图夹具标识"),
    circuit_fixture: Optional[str] = typer.Option(None, "--circuit-fixture", help="电路夹具标识"),
    f_grid: Optional[str] = typer.Option(None, "--f-grid", "-F", help="逗号分隔的Werner保真度"),
    syndromes: Optional[str] = typer.Option(None, "--syndromes", help="all 或 trivial"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="CSV输出路径"),
    table: Optional[str] = typer.Option(None, "--table", help="权重计数表CSV输出路径"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    计算协议在Werner输入下每个症状的成功概率与输出系数
    """
    try:
        config = load_config(config_file)
        grid = _parse_grid(f_grid, config.statistics.f_grid)
        mode = syndromes or config.statistics.syndromes
        protocol, input_hash = _load_source(source, fixture, circuit_fixture)
        matrix, n, k = _protocol(protocol)
        result = full_statistics(matrix, n, k, mode)
        summary = evaluate_werner(result, [])
        typer.echo(f"n={n} k={k} distance={summary.distance} leading_order={summary.leading_order}")
        metadata = _metadata("stats", {"source": source or fixture or circuit_fixture, "f_grid": grid, "syndromes": mode}, config, input_hash)
        rows = []
        for fidelity in grid:
            for b, p, coeffs in result.branches(fidelity):
                f_out = float(coeffs[0]) if p > 0 else ""
                rows.append([fidelity, syndrome_string(b, n - k), p, f_out] + _coefficient_cells(coeffs, k))
        _write_csv(output, metadata, ["F_in", "syndrome", "p_succ", "F_out"] + _coefficient_header(k), rows)
        if table:
            header = ["syndrome", "pauli_label"] + [f"E_{w}" for w in range(n + 1)]
            _write_csv(table, metadata, header, result.rows())
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def synth(
    source: Optional[str] = typer.Argument(None, help="图文件（JSON/graph6）"),
    fixture: Optional[str] = typer.Option(None, "--fixture", help="图夹具标识"),
    objective: Optional[str] = typer.Option(None, "--objective", help="two_qubit、depth 或 keep_gates"),
    budget: Optional[int] = typer.Option(None, "--budget", help="随机游走步数；0 表示直接综合"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="电路JSON输出路径"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    由图综合电路，并用启发式搜索减少门数或深度
    """
    try:
        config = load_config(config_file)
        graph, _ = _load_source(source, fixture)
        if not isinstance(graph, NKGraph):
            raise ValueError("synth needs a graph, not a circuit")
        cfg = config.synthesis
        circuit = heuristic_search(
            graph,
            objective or cfg.objective,
            cfg.budget if budget is None else budget,
            config.seed if seed is None else seed,
            cfg.search_labelings,
            cfg.exact_depth_limit,
        )
        report = metrics(circuit, cfg.exact_depth_limit)
        typer.echo(json.dumps(report.to_json(), sort_keys=True))
        if output:
            circuit.save(Path(output))
            typer.echo(f"Wrote {output}")
        else:
            typer.echo(json.dumps(circuit.to_json(), ensure_ascii=False, indent=2))
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def simulate(
    source: Optional[str] = typer.Argument(None, help="电路JSON文件"),
    fixture: Optional[str] = typer.Option(None, "--fixture", help="电路夹具标识"),
    fidelity: float = typer.Option(..., "--fidelity", "-F", help="Werner输入保真度"),
    p_g: Optional[float] = typer.Option(None, "--p-g", help="双比特门去极化概率"),
    p_m: Optional[float] = typer.Option(None, "--p-m", help="测量翻转概率"),
    measurement_mode: Optional[str] = typer.Option(None, "--measurement-mode", help="parity 或 per_party"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="CSV输出路径"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    在门噪声和测量噪声下模拟电路，按症状输出结果
    """
    try:
        config = load_config(config_file)
        circuit, input_hash = _load_source(source, circuit_fixture=fixture)
        if not isinstance(circuit, Circuit):
            raise ValueError("simulate needs a circuit JSON file")
        sim = config.simulation
        noise = NoiseModel(
            sim.p_g if p_g is None else p_g,
            sim.p_m if p_m is None else p_m,
            measurement_mode or sim.measurement_mode,
        )
        result = run_simulation(circuit, fidelity, noise)
        params = {
            "source": source or fixture, "fidelity": fidelity,
            "p_g": noise.p_g, "p_m": noise.p_m, "measurement_mode": noise.measurement_mode,
        }
        k = result.k
        rows = []
        for b in sorted(result.branches):
            p, coeffs = result.branches[b]
            f_out = float(coeffs[0]) if p > 0 else ""
            rows.append([syndrome_string(b, len(result.measured)), p, f_out] + _coefficient_cells(coeffs, k))
        _write_csv(
            output,
            _metadata("simulate", params, config, input_hash),
            ["syndrome", "p_succ", "F_out"] + _coefficient_header(k),
            rows,
        )
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def ga(
    n: int = typer.Option(..., "-n", help="原始对预算 n"),
    k: int = typer.Option(1, "-k", help="保留对数 k"),
    fidelity: float = typer.Option(..., "--fidelity", "-F", help="Werner输入保真度"),
    p_g: Optional[float] = typer.Option(None, "--p-g", help="双比特门去极化概率"),
    p_m: Optional[float] = typer.Option(None, "--p-m", help="测量翻转概率"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子（覆盖配置）"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="运行清单JSON输出路径"),
    circuit_output: Optional[str] = typer.Option(None, "--circuit", help="把最优基因组导出为电路JSON"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="工作线程数"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    用遗传算法搜索带噪电路
    """
    try:
        config = load_config(config_file)
        ga_cfg = config.ga if seed is None else config.ga.model_copy(update={"seed": seed})
        sim = config.simulation
        noise = NoiseModel(
            sim.p_g if p_g is None else p_g,
            sim.p_m if p_m is None else p_m,
            sim.measurement_mode,
        )
        result = evolve(n, k, fidelity, noise, ga_cfg, workers=workers or config.workers)
        typer.echo(f"best fitness {result.best_fitness:.12f} after {result.generations} generations ({result.stop_reason})")
        typer.echo(f"best genome: {result.best.encoding()}")
        manifest = result.to_manifest(n, fidelity, noise, ga_cfg)
        if output:
            result.save_manifest(Path(output), n, fidelity, noise, ga_cfg)
            typer.echo(f"Wrote {output}")
        else:
            typer.echo(json.dumps(manifest, ensure_ascii=False, indent=2))
        if circuit_output:
            try:
                genome_to_circuit(result.best).save(Path(circuit_output))
                typer.echo(f"Wrote {circuit_output}")
            except ValueError as e:
                typer.echo(f"Warning: best genome has no circuit form: {e}")
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def apps(
    task: str = typer.Argument(..., help="qkd 或 teleport"),
    source: Optional[str] = typer.Option(None, "--input", "-i", help="协议的图或电路文件"),
    fixture: Optional[str] = typer.Option(None, "--fixture", help="图夹具标识"),
    f_grid: Optional[str] = typer.Option(None, "--f-grid", "-F", help="逗号分隔的输入保真度"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="CSV输出路径"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    评估下游任务：QKD密钥率或Steane码隐形传态
    """
    try:
        config = load_config(config_file)
        grid = _parse_grid(f_grid, config.applications.f_grid)
        protocol, input_hash = (None, None)
        if source or fixture:
            protocol, input_hash = _load_source(source, fixture)
        params = {"task": task, "source": source or fixture, "f_grid": grid}
        metadata = _metadata("apps", params, config, input_hash)
        if task == "qkd":
            typer.echo(f"Werner BB84 threshold: {werner_threshold():.6f}")
            if protocol is None:
                raise ValueError("qkd needs a k=1 protocol (--input or --fixture)")
            matrix, n, k = _protocol(protocol)
            result = full_statistics(matrix, n, k, "all")
            rows = [[r.f_in, n, r.binned_rate / n, r.detection_rate / n] for r in binned_key_rate(result, grid)]
            _write_csv(output, metadata, ["F_in", "n", "binned_rate", "detection_rate"], rows)
        elif task == "teleport":
            result = None
            if protocol is not None:
                matrix, n, k = _protocol(protocol)
                result = full_statistics(matrix, n, k, "trivial")
            rows = [
                [r.f_in, r.strategy, r.infidelity, r.expected_pairs]
                for r in teleportation_comparison(result, grid)
            ]
            _write_csv(output, metadata, ["F_in", "strategy", "infidelity", "expected_pairs"], rows)
        else:
            raise ValueError(f"Unknown task {task!r}; use qkd or teleport")
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def envelope(
    n: int = typer.Option(..., "-n", help="输入对数 n"),
    k: int = typer.Option(1, "-k", help="输出对数 k"),
    policy: str = typer.Option("TrivialOnly", "--policy", help="TrivialOnly 或 AllSyndromeSets"),
    f_grid: Optional[str] = typer.Option(None, "--f-grid", "-F", help="逗号分隔的输入保真度"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="JSON输出路径"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    计算 n→k 协议的帕累托包络
    """
    try:
        config = load_config(config_file)
        grid = _parse_grid(f_grid, config.statistics.f_grid)
        if n + k > MAX_ORBIT_VERTICES:
            raise SizeLimitError(f"Enumeration limited to n+k <= {MAX_ORBIT_VERTICES}, got {n + k}")
        enum_cfg = config.enumeration
        settings = KeySettings(enum_cfg.dedup_group, enum_cfg.exact_keys)
        transversal = dedup(enumerate_normal_forms(n, k, enum_cfg.symmetry_breaking, settings=settings))
        table = pareto_envelope(transversal, grid, SyndromePolicy(policy))
        data = table.to_json()
        data["meta"] = _metadata("envelope", {"n": n, "k": k, "policy": policy, "f_grid": grid}, config, None)
        if output:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
            typer.echo(f"Wrote {path}")
        else:
            typer.echo(json.dumps(data, ensure_ascii=False, indent=2))
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def orbits(
    max_vertices: int = typer.Option(7, "--max-vertices", "-N", help="最大顶点数"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir", help="轨道数据库目录（默认 DISTIL_CACHE_DIR）"),
    config_file: Optional[str] = typer.Option(None, "--config", "-c", help="配置文件路径"),
):
    """
    生成连通图局部补类代表的数据库
    """
    try:
        config = load_config(config_file)
        database = OrbitDatabase(cache_dir or config.cache_dir)
        for size, count in database.build(max_vertices).items():
            typer.echo(f"N={size}: {count} classes")
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def init_config(
    path: str = typer.Argument("config.yaml", help="要写入的配置文件路径"),
):
    """写出默认配置文件"""
    try:
        create_default_config(Path(path))
        typer.echo(f"Wrote default configuration to {path}")
    except USER_ERRORS as e:
        _fail(e)


@app.command()
def version():
    """显示graph_distil的版本"""
    typer.echo(f"graph_distil v{__version__}")


if __name__ == "__main__":
    app()
