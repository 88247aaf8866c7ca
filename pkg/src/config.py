"""
腔 QED 平均场模拟系统配置文件
"""
import os
import json
import logging
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass, field, asdict, replace, fields

from src.data_models import (
    SystemParams, IntegrationConfig, ModelKind, DissipatorMode, GridSpec,
    MIN_AVERAGING_PERIODS,
)
from src.errors import ConfigError, ParameterError

PROJECT_ROOT = Path(__file__).resolve().parent.parent


@dataclass
class ThresholdConfig:
    """相分类阈值"""
    eps_order: float = 0.01
    eps_sigma: float = 0.005


@dataclass
class GridConfig:
    """相图网格范围"""
    g_min: float = 0.0
    g_max: float = 1.2
    g_steps: int = 30
    xi_min: float = 0.0
    xi_max: float = 1.0
    xi_steps: int = 30

    def validate(self):
        """范围与步数的基本检查"""
        for name in ("g_steps", "xi_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"grid.{name} 必须为正整数: {value}")
        if not (0 <= self.g_min <= self.g_max and 0 <= self.xi_min <= self.xi_max):
            raise ConfigError("grid 范围要求 0 ≤ min ≤ max")


def _in_output_dir(name: str) -> str:
    return os.path.join(Config.OUTPUT_DIR, name)


@dataclass
class OutputConfig:
    """输出路径，默认位于 Config.OUTPUT_DIR 下"""
    trajectory: str = field(default_factory=lambda: _in_output_dir("trajectory.csv"))
    sweep: str = field(default_factory=lambda: _in_output_dir("sweep.csv"))
    report: Optional[str] = None


def _check_keys(section: str, data: Any, allowed) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"配置段 {section} 必须是 JSON 对象")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"配置段 {section} 含未知字段: {', '.join(unknown)}")
    return data


def _field_names(cls):
    return [f.name for f in fields(cls)]


@dataclass
class RunConfig:
    """一次运行的完整配置（对应 --config JSON 文档）"""
    model: ModelKind = ModelKind.DICKE
    mode: DissipatorMode = DissipatorMode.DRESSED
    branch: int = 1
    params: SystemParams = field(default_factory=SystemParams)
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self):
        """重新校验所有模块级不变量"""
        try:
            if self.branch not in (1, -1):
                raise ConfigError(f"branch 只能为 ±1: {self.branch}")
            if self.thresholds.eps_order <= 0 or self.thresholds.eps_sigma <= 0:
                raise ConfigError("分类阈值必须为正")
            self.integration.validate(self.params.omega_e)
            self.grid.validate()
            if self.mode is DissipatorMode.EFFECTIVE_SPIN and self.model is ModelKind.TAVIS_CUMMINGS:
                raise ConfigError("有效自旋模式只适用于 Dicke 模型")
        except ParameterError as e:
            raise ConfigError(str(e)) from e

    def check_averaging_window(self):
        """保留段须覆盖足够多的驱动周期"""
        retained = (1.0 - self.integration.discard_fraction) * self.integration.t_end
        if retained < (MIN_AVERAGING_PERIODS + 1) * self.params.drive_period:
            raise ConfigError(
                f"丢弃暂态后只剩 {retained / self.params.drive_period:.1f} 个周期，"
                f"至少需要 {MIN_AVERAGING_PERIODS + 1} 个"
            )

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式；dt 写出解析后的数值"""
        integration = self.integration.resolve(self.params.omega_e)
        return {
            "model": self.model.value,
            "mode": self.mode.value,
            "branch": self.branch,
            "params": self.params.to_dict(),
            "integration": integration.to_dict(),
            "thresholds": asdict(self.thresholds),
            "grid": asdict(self.grid),
            "output": asdict(self.output),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """从字典创建配置，未知字段一律拒绝"""
        data = _check_keys("<root>", data, _field_names(cls))
        try:
            config = cls()
            if "model" in data:
                config.model = ModelKind.parse(data["model"])
            if "mode" in data:
                config.mode = DissipatorMode.parse(data["mode"])
            if "branch" in data:
                branch = data["branch"]
                if isinstance(branch, bool) or branch not in (1, -1):
                    raise ConfigError(f"branch 只能为 ±1: {branch!r}")
                config.branch = int(branch)
            if "params" in data:
                section = _check_keys("params", data["params"], _field_names(SystemParams))
                config.params = SystemParams.from_dict({**config.params.to_dict(), **section})
            if "integration" in data:
                section = _check_keys("integration", data["integration"], _field_names(IntegrationConfig))
                config.integration = IntegrationConfig.from_dict(section)
            if "thresholds" in data:
                section = _check_keys("thresholds", data["thresholds"], _field_names(ThresholdConfig))
                config.thresholds = ThresholdConfig(**{k: float(v) for k, v in section.items()})
            if "grid" in data:
                section = _check_keys("grid", data["grid"], _field_names(GridConfig))
                config.grid = replace(config.grid, **section)
            if "output" in data:
                section = _check_keys("output", data["output"], _field_names(OutputConfig))
                config.output = replace(config.output, **section)
            config.validate()
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"配置解析失败: {e}") from e
        return config

    @staticmethod
    def read_document(path: str) -> Dict[str, Any]:
        """读取 JSON 配置文档（未解析）"""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"配置文件不存在: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"配置文件不是合法 JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("配置文件顶层必须是 JSON 对象")
        return data

    @classmethod
    def load(cls, path: str) -> 'RunConfig':
        """从 JSON 文件加载"""
        return cls.from_dict(cls.read_document(path))

    def dump(self, path: Optional[str] = None) -> str:
        """序列化为 JSON，可选写入文件"""
        text = json.dumps(self.to_dict(), ensure_ascii=False, indent=2)
        if path:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text + "\n")
        return text

    def to_grid_spec(self) -> GridSpec:
        """构造扫描网格"""
        grid = self.grid
        try:
            return GridSpec(
                g_min=float(grid.g_min), g_max=float(grid.g_max), g_steps=int(grid.g_steps),
                xi_min=float(grid.xi_min), xi_max=float(grid.xi_max), xi_steps=int(grid.xi_steps),
                template=self.params,
                model=self.model,
                mode=self.mode,
                integration=self.integration.resolve(self.params.omega_e),
                eps_order=self.thresholds.eps_order,
                eps_sigma=self.thresholds.eps_sigma,
                branch=self.branch,
            )
        except ParameterError as e:
            raise ConfigError(str(e)) from e


class Config:
    """主配置类"""

    # 文件路径配置
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")
    LOG_DIR = os.getenv("LOG_DIR", "logs")
    TEMPLATE_DIR = str(PROJECT_ROOT / "templates")

    # 日志配置
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # 扫描并行度
    SWEEP_WORKERS = os.cpu_count() or 1

    @classmethod
    def load_from_env(cls) -> 'Config':
        """从环境变量加载配置"""
        workers = os.getenv("SWEEP_WORKERS")
        if workers:
            try:
                cls.SWEEP_WORKERS = max(1, int(workers))
            except ValueError as e:
                raise ConfigError(f"SWEEP_WORKERS 必须为整数: {workers}") from e
        cls.OUTPUT_DIR = os.getenv("OUTPUT_DIR", cls.OUTPUT_DIR)
        os.makedirs(cls.OUTPUT_DIR, exist_ok=True)
        cls.LOG_LEVEL = os.getenv("LOG_LEVEL", cls.LOG_LEVEL).upper()
        level = getattr(logging, cls.LOG_LEVEL, None)
        if not isinstance(level, int):
            raise ConfigError(f"LOG_LEVEL 无法识别: {cls.LOG_LEVEL}")
        # 各模块的 basicConfig 都挂在根 logger 上
        logging.getLogger().setLevel(level)
        return cls


# 创建必要的目录
os.makedirs(Config.OUTPUT_DIR, exist_ok=True)
os.makedirs(Config.LOG_DIR, exist_ok=True)
