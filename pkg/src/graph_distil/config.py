"""
graph_distil 配置模块
处理枚举、统计、电路综合、模拟、遗传算法和应用评估的配置设置
"""

import os
from pathlib import Path
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError

from .exceptions import ConfigError


def _default_cache_dir() -> str:
    return os.environ.get("DISTIL_CACHE_DIR", str(Path.home() / ".cache" / "graph_distil"))


def _default_f_grid() -> List[float]:
    return [0.6, 0.7, 0.8, 0.85, 0.9, 0.95, 0.99]


class EnumerationConfig(BaseModel):
    """协议枚举的配置"""
    symmetry_breaking: Optional[bool] = Field(
        None, description="列约束 t ≤ r ≤ t⊕r；None 表示自动（n+k ≤ 6 关闭，其余开启）"
    )
    include_disconnected: bool = Field(False, description="图策略是否包含非连通图")
    dedup_group: Literal["symplectic", "pairwise"] = Field(
        "symplectic", description="去重群：完整辛群 Sp(2k) 或逐对 S3^k × S_k"
    )
    exact_keys: bool = Field(False, description="关闭规范化，直接使用原始分子表作为键")
    checkpoint_every: int = Field(100000, gt=0, description="每处理多少条记录写一次检查点")


class StatisticsConfig(BaseModel):
    """蒸馏统计量的配置"""
    f_grid: List[float] = Field(default_factory=_default_f_grid, description="Werner输入保真度网格")
    syndromes: Literal["all", "trivial"] = Field("all", description="计算全部症状还是仅 b=0")


class SynthesisConfig(BaseModel):
    """电路综合与启发式搜索的配置"""
    objective: Literal["two_qubit", "depth", "keep_gates"] = Field(
        "two_qubit", description="优化目标"
    )
    budget: int = Field(200, ge=0, description="随机轨道游走的迭代次数")
    search_labelings: bool = Field(False, description="是否在有效标记之间搜索（默认关闭）")
    exact_depth_limit: int = Field(20, ge=0, description="精确深度计算的双量子比特门数上限")


class SimulationConfig(BaseModel):
    """Bell对角噪声模拟的配置"""
    p_g: float = Field(0.0, ge=0.0, le=1.0, description="双量子比特门去极化概率")
    p_m: float = Field(0.0, ge=0.0, le=1.0, description="测量翻转概率")
    measurement_mode: Literal["parity", "per_party"] = Field(
        "parity", description="测量噪声作用在奇偶校验位上还是每一方各自翻转"
    )


class GAConfig(BaseModel):
    """遗传算法的配置"""
    population: int = Field(300, gt=0, description="种群大小")
    parent_pairs: int = Field(20, gt=0, description="每代随机选取的父母对数")
    children_per_pair: int = Field(100, gt=0, description="每对父母产生的子代数")
    mutants_per_type: int = Field(2, gt=0, description="每种突变类型产生的突变体数")
    mutation_types: int = Field(4, gt=0, le=4, description="启用的突变类型数")
    max_generations: int = Field(100, gt=0, description="最大代数")
    convergence_generations: int = Field(15, gt=0, description="最优适应度连续不变多少代后停止")
    max_genome_length: int = Field(40, gt=0, description="基因组长度上限")
    wallclock_budget: Optional[float] = Field(None, gt=0, description="墙钟时间预算（秒），None 表示不限")
    seed: int = Field(0, description="随机种子")


class ApplicationsConfig(BaseModel):
    """下游应用评估的配置"""
    f_grid: List[float] = Field(default_factory=_default_f_grid, description="输入保真度网格")


class DistilConfig(BaseModel):
    """主配置模型"""
    enumeration: EnumerationConfig = Field(default_factory=EnumerationConfig)
    statistics: StatisticsConfig = Field(default_factory=StatisticsConfig)
    synthesis: SynthesisConfig = Field(default_factory=SynthesisConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    ga: GAConfig = Field(default_factory=GAConfig)
    applications: ApplicationsConfig = Field(default_factory=ApplicationsConfig)
    seed: int = Field(0, description="全局随机种子")
    workers: int = Field(1, gt=0, description="并行工作线程数（结果与之无关）")
    cache_dir: str = Field(default_factory=_default_cache_dir, description="轨道数据库和检查点目录")


def load_config(config_file: Optional[str] = None) -> DistilConfig:
    """
    从文件加载配置或使用默认配置。

    参数:
        config_file (Optional[str]): 配置文件的路径。如果为 None 或文件不存在，则使用默认配置。

    返回:
        DistilConfig: 加载的配置对象。

    异常:
        ConfigError: 文件存在但不是合法的YAML或未通过校验。
    """
    if config_file:
        config_path = Path(config_file)
        if config_path.exists():
            try:
                with open(config_path, 'r', encoding='utf-8') as f:
                    config_data = yaml.safe_load(f) or {}
                if not isinstance(config_data, dict):
                    raise ConfigError(f"{config_file}: top level must be a mapping")
                return DistilConfig(**config_data)
            except (yaml.YAMLError, ValidationError, TypeError) as e:
                raise ConfigError(f"Could not load config file {config_file}: {e}") from e

    return DistilConfig()


def create_default_config(config_path: Path):
    """
    在指定路径创建默认配置文件。

    参数:
        config_path (Path): 默认配置文件应创建的路径。
    """
    default_config = DistilConfig()
    config_data = default_config.model_dump()

    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.dump(config_data, f, allow_unicode=True, sort_keys=False)
