"""
数据模型定义
物理参数、平均场状态、缀饰坐标系、积分配置、轨迹与扫描记录
"""
import math
from dataclasses import dataclass, field, replace, asdict
from typing import List, Optional, Dict, Any, Tuple
from enum import Enum

import numpy as np
import pandas as pd

from src.errors import ParameterError

# 自旋 1/2 算符 S = σ/2，基矢顺序 (|+⟩, |−⟩)
SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
S_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
S_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9

# 每个驱动周期的默认步数 / 最少步数
DEFAULT_STEPS_PER_PERIOD = 1000
MIN_STEPS_PER_PERIOD = 100
MIN_INTEGRATION_PERIODS = 10
# 计算 σ_α 所需的最少周期数
MIN_AVERAGING_PERIODS = 16


class ModelKind(Enum):
    """腔模型类型"""
    DICKE = "dicke"
    TAVIS_CUMMINGS = "tc"

    @classmethod
    def parse(cls, text: str) -> 'ModelKind':
        """从命令行/配置文本解析"""
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        if key == "dicke":
            return cls.DICKE
        if key in ("tc", "taviscummings"):
            return cls.TAVIS_CUMMINGS
        raise ParameterError(f"未知模型: {text}")


class DissipatorMode(Enum):
    """耗散项形式"""
    DRESSED = "dressed"
    BARE = "bare"
    EFFECTIVE_SPIN = "effective"

    @classmethod
    def parse(cls, text: str) -> 'DissipatorMode':
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        for mode in cls:
            if key == mode.value:
                return mode
        if key == "effectivespin":
            return cls.EFFECTIVE_SPIN
        raise ParameterError(f"未知耗散模式: {text}")


class PhaseLabel(Enum):
    """非平衡定态的相"""
    REGULAR_OSCILLATING = "regular"
    ORDERED = "ordered"
    NON_PERIODIC = "nonperiodic"


class RowStatus(Enum):
    """扫描点状态"""
    OK = "ok"
    NUMERICAL_FAILURE = "numerical-failure"


def _require_finite(name: str, value: float):
    if not math.isfinite(float(value)):
        raise ParameterError(f"{name} 必须为有限值: {value}")


@dataclass(frozen=True)
class SystemParams:
    """一次模拟的全部物理常数（ħ=1）"""
    omega_p: float = 1.0
    omega_a: float = 1.0
    omega_e: float = 1.0
    g: float = 0.0
    xi: float = 0.0
    kappa: float = 0.1
    gamma_l: float = 0.1
    gamma_g: float = 0.0

    def __post_init__(self):
        for name in ("omega_p", "omega_a", "omega_e", "g", "xi", "kappa", "gamma_l", "gamma_g"):
            _require_finite(name, getattr(self, name))
        for name in ("omega_p", "omega_a", "omega_e"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} 必须为正: {getattr(self, name)}")
        for name in ("g", "xi", "kappa", "gamma_l", "gamma_g"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} 不能为负: {getattr(self, name)}")

    @property
    def drive_period(self) -> float:
        """驱动周期 T_e = 2π/ω_e"""
        return 2.0 * math.pi / self.omega_e

    def with_changes(self, **changes) -> 'SystemParams':
        """返回替换部分字段后的新参数"""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SystemParams':
        """从字典创建参数对象"""
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True, eq=False)
class AtomState:
    """单个原子的 2×2 密度矩阵"""
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex).reshape(2, 2)
        if not np.all(np.isfinite(rho)):
            raise ParameterError("密度矩阵含有非有限值")
        # 构造时强制厄米
        rho = 0.5 * (rho + rho.conj().T)
        object.__setattr__(self, "rho", rho)

        trace = rho.trace().real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ParameterError(f"密度矩阵迹不为 1: {trace}")
        if self.min_eigenvalue() < -POSITIVITY_TOL:
            raise ParameterError(f"密度矩阵非正定: 最小本征值 {self.min_eigenvalue()}")

    def bloch(self) -> np.ndarray:
        """Bloch 矢量 m^a = Tr(S^a ρ)"""
        return np.array([
            np.trace(SX @ self.rho).real,
            np.trace(SY @ self.rho).real,
            np.trace(SZ @ self.rho).real,
        ])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])

    @classmethod
    def from_bloch(cls, m) -> 'AtomState':
        """由 Bloch 矢量构造 ρ = 1/2 + m·σ"""
        mx, my, mz = (float(v) for v in m)
        rho = 0.5 * IDENTITY + 2.0 * (mx * SX + my * SY + mz * SZ)
        return cls(rho)

    @classmethod
    def ground(cls) -> 'AtomState':
        """裸基态 |−⟩⟨−|"""
        return cls.from_bloch((0.0, 0.0, -0.5))

    def to_dict(self) -> Dict[str, Any]:
        return {"bloch": self.bloch().tolist()}


@dataclass(frozen=True, eq=False)
class MeanFieldState:
    """平均场状态：标度光子振幅 α、单原子态与时间"""
    alpha: complex
    atom: AtomState
    t: float = 0.0

    def __post_init__(self):
        alpha = complex(self.alpha)
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
            raise ParameterError(f"光子振幅非有限: {alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "t", float(self.t))

    def bloch(self) -> np.ndarray:
        return self.atom.bloch()

    def to_vector(self) -> np.ndarray:
        """展平为复向量 (α, ρ00, ρ01, ρ10, ρ11)；其 float64 视图即实向量"""
        return np.concatenate(([self.alpha], self.atom.rho.ravel()))

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float = 0.0) -> 'MeanFieldState':
        return cls(alpha=complex(y[0]), atom=AtomState(np.asarray(y[1:5]).reshape(2, 2)), t=t)

    @classmethod
    def from_bloch(cls, alpha: complex, m, t: float = 0.0) -> 'MeanFieldState':
        return cls(alpha=alpha, atom=AtomState.from_bloch(m), t=t)

    def to_dict(self) -> Dict[str, Any]:
        mx, my, mz = self.bloch()
        return {
            "t": self.t,
            "alpha_re": self.alpha.real,
            "alpha_im": self.alpha.imag,
            "mx": mx,
            "my": my,
            "mz": mz,
        }


@dataclass(frozen=True, eq=False)
class StateDerivative:
    """状态的时间导数 (dα/dt, dρ/dt)"""
    dalpha: complex
    drho: np.ndarray

    def bloch(self) -> np.ndarray:
        """dm/dt = Tr(S dρ/dt)"""
        return np.array([
            np.trace(SX @ self.drho).real,
            np.trace(SY @ self.drho).real,
            np.trace(SZ @ self.drho).real,
        ])

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.dalpha], np.asarray(self.drho).ravel()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_vector()))


@dataclass(frozen=True, eq=False)
class DressedFrame:
    """瞬时缀饰原子坐标系及含时耗散率"""
    sigma: float
    ground_ket: np.ndarray
    excited_ket: np.ndarray
    sx_element_sq: float
    rate_l: float
    rate_g: float

    def lowering(self) -> np.ndarray:
        """缀饰降算符 S̃⁻ = |−̃⟩⟨+̃|"""
        return np.outer(self.ground_ket, self.excited_ket.conj())


@dataclass(frozen=True)
class IntegrationConfig:
    """定步长 RK4 积分配置；dt=None 表示 T_e/1000"""
    dt: Optional[float] = None
    t_end: float = 10000.0 * math.pi
    sample_stride: int = 10
    discard_fraction: float = 0.8
    perturbation: float = 0.0

    def resolve(self, omega_e: float) -> 'IntegrationConfig':
        """填入默认步长"""
        if self.dt is not None:
            return self
        return replace(self, dt=2.0 * math.pi / omega_e / DEFAULT_STEPS_PER_PERIOD)

    def validate(self, omega_e: float):
        """校验积分配置，不合法时抛出 ParameterError"""
        period = 2.0 * math.pi / omega_e
        resolved = self.resolve(omega_e)
        _require_finite("dt", resolved.dt)
        _require_finite("t_end", self.t_end)
        _require_finite("perturbation", self.perturbation)
        if resolved.dt <= 0:
            raise ParameterError(f"dt 必须为正: {resolved.dt}")
        if not resolved.dt < period / MIN_STEPS_PER_PERIOD:
            raise ParameterError(f"dt={resolved.dt} 过大，每个驱动周期至少需要 {MIN_STEPS_PER_PERIOD} 步")
        if self.t_end < MIN_INTEGRATION_PERIODS * period:
            raise ParameterError(f"t_end={self.t_end} 少于 {MIN_INTEGRATION_PERIODS} 个驱动周期")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ParameterError(f"sample_stride 必须为正整数: {self.sample_stride}")
        if not 0.0 <= self.discard_fraction < 1.0:
            raise ParameterError(f"discard_fraction 必须在 [0, 1) 内: {self.discard_fraction}")

    def n_steps(self, omega_e: float) -> int:
        resolved = self.resolve(omega_e)
        return int(round(self.t_end / resolved.dt))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'IntegrationConfig':
        values = dict(data)
        if values.get("dt") is not None:
            values["dt"] = float(values["dt"])
        if "sample_stride" in values:
            stride = values["sample_stride"]
            if isinstance(stride, float) and stride.is_integer():
                stride = int(stride)
            if not isinstance(stride, int) or isinstance(stride, bool):
                raise ParameterError(f"sample_stride 必须为正整数: {stride}")
            values["sample_stride"] = stride
        for key in ("t_end", "discard_fraction", "perturbation"):
            if key in values:
                values[key] = float(values[key])
        return cls(**values)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """一次积分的时间采样观测量"""
    t: np.ndarray
    alpha: np.ndarray
    m: np.ndarray
    sigma: np.ndarray
    rate_l: np.ndarray
    params: SystemParams
    config: IntegrationConfig
    model: ModelKind = ModelKind.DICKE
    mode: DissipatorMode = DissipatorMode.DRESSED
    max_renorm_correction: float = 0.0
    min_eigenvalue: float = 0.0

    def __post_init__(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ParameterError("轨迹时间必须严格递增")

    def __len__(self) -> int:
        return len(self.t)

    def bloch_norms(self) -> np.ndarray:
        return np.linalg.norm(self.m, axis=1)

    @property
    def final_alpha(self) -> complex:
        return complex(self.alpha[-1])

    def to_dataframe(self) -> pd.DataFrame:
        """转换为 DataFrame，列顺序与轨迹 CSV 一致"""
        return pd.DataFrame({
            "t": self.t,
            "alpha_re": self.alpha.real,
            "alpha_im": self.alpha.imag,
            "mx": self.m[:, 0],
            "my": self.m[:, 1],
            "mz": self.m[:, 2],
            "sigma": self.sigma,
            "rate_l": self.rate_l,
        })


@dataclass(frozen=True, eq=False)
class PeriodAverages:
    """逐驱动周期的 α 时间平均序列 {α_j}"""
    values: np.ndarray
    t_e: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size == 0:
            raise ParameterError("周期平均序列为空")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class OrderParameters:
    """序参量 α_order 与涨落 σ_α"""
    alpha_order: complex
    sigma_alpha: float

    @property
    def alpha_order_abs(self) -> float:
        return abs(self.alpha_order)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha_order_re": self.alpha_order.real,
            "alpha_order_im": self.alpha_order.imag,
            "alpha_order_abs": self.alpha_order_abs,
            "sigma_alpha": self.sigma_alpha,
        }


@dataclass(frozen=True)
class GridSpec:
    """(g, ξ) 相图网格"""
    g_min: float
    g_max: float
    g_steps: int
    xi_min: float
    xi_max: float
    xi_steps: int
    template: SystemParams = field(default_factory=SystemParams)
    model: ModelKind = ModelKind.DICKE
    mode: DissipatorMode = DissipatorMode.DRESSED
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    eps_order: float = 0.01
    eps_sigma: float = 0.005
    branch: int = 1

    def __post_init__(self):
        for name in ("g_steps", "xi_steps"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ParameterError(f"{name} 必须为正整数")
        if self.g_min > self.g_max or self.xi_min > self.xi_max:
            raise ParameterError("网格范围要求 min ≤ max")
        if self.g_min < 0 or self.xi_min < 0:
            raise ParameterError("g 与 ξ 不能为负")
        if self.eps_order <= 0 or self.eps_sigma <= 0:
            raise ParameterError("分类阈值必须为正")
        if self.branch not in (1, -1):
            raise ParameterError(f"branch 只能为 ±1: {self.branch}")
        self.integration.validate(self.template.omega_e)
        retained = (1.0 - self.integration.discard_fraction) * self.integration.t_end
        if retained < (MIN_AVERAGING_PERIODS + 1) * self.template.drive_period:
            raise ParameterError(f"保留段不足 {MIN_AVERAGING_PERIODS} 个完整驱动周期")

    def g_values(self) -> np.ndarray:
        return np.linspace(self.g_min, self.g_max, int(self.g_steps))

    def xi_values(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, int(self.xi_steps))

    def points(self) -> List[Tuple[float, float]]:
        """按 (g, ξ) 字典序列出全部网格点"""
        return [(float(g), float(xi)) for g in self.g_values() for xi in self.xi_values()]

    def params_at(self, g: float, xi: float) -> SystemParams:
        return self.template.with_changes(g=g, xi=xi)


SWEEP_COLUMNS = [
    "g", "xi", "alpha_order_re", "alpha_order_im", "alpha_order_abs",
    "sigma_alpha", "phase", "status",
]
SWEEP_CSV_HEADER = ",".join(SWEEP_COLUMNS)


def format_real(value: float) -> str:
    """9 位有效数字"""
    return f"{float(value):.9g}"


@dataclass(frozen=True)
class SweepRow:
    """相图中一个点的结果"""
    g: float
    xi: float
    alpha_order: complex
    sigma_alpha: float
    phase: PhaseLabel
    status: RowStatus = RowStatus.OK

    @property
    def alpha_order_abs(self) -> float:
        return abs(self.alpha_order)

    def key(self) -> Tuple[str, str]:
        """断点续算的键：格式化后的 (g, ξ)"""
        return format_real(self.g), format_real(self.xi)

    def to_csv_line(self) -> str:
        return ",".join([
            format_real(self.g),
            format_real(self.xi),
            format_real(self.alpha_order.real),
            format_real(self.alpha_order.imag),
            format_real(self.alpha_order_abs),
            format_real(self.sigma_alpha),
            self.phase.value,
            self.status.value,
        ]) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "g": self.g,
            "xi": self.xi,
            "alpha_order_re": self.alpha_order.real,
            "alpha_order_im": self.alpha_order.imag,
            "alpha_order_abs": self.alpha_order_abs,
            "sigma_alpha": self.sigma_alpha,
            "phase": self.phase.value,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepRow':
        """从字典（或 CSV 记录）创建"""
        return cls(
            g=float(data["g"]),
            xi=float(data["xi"]),
            alpha_order=complex(float(data["alpha_order_re"]), float(data["alpha_order_im"])),
            sigma_alpha=float(data["sigma_alpha"]),
            phase=PhaseLabel(data["phase"]),
            status=RowStatus(data["status"]),
        )


@dataclass
class SweepSummary:
    """扫描汇总"""
    new_rows: int = 0
    total_rows: int = 0
    counts: Dict[str, int] = field(default_factory=dict)
    failures: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "new_rows": self.new_rows,
            "total_rows": self.total_rows,
            "counts": dict(self.counts),
            "failures": self.failures,
        }
