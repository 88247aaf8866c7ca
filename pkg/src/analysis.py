"""
分析模块
由轨迹计算逐周期平均、序参量与相标签，并由 J_0 零点给出 CDT 驱动振幅
"""
import math
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import bisect

from src.config import Config
from src.data_models import (
    Trajectory, PeriodAverages, OrderParameters, PhaseLabel, SystemParams,
    MIN_AVERAGING_PERIODS,
)
from src.errors import ParameterError, TrajectoryTooShort

# 配置日志
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format=Config.LOG_FORMAT,
    handlers=[
        logging.FileHandler(f'{Config.LOG_DIR}/analysis.log', encoding='utf-8'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

BESSEL_SERIES_LIMIT = 8.0
BESSEL_DOMAIN_LIMIT = 1e4
ZERO_BRACKET_STEP = 0.25
ZERO_XTOL = 1e-13
_RESCALE_THRESHOLD = 1e250


def period_averages(traj: Trajectory, discard_fraction: float) -> PeriodAverages:
    """
    逐驱动周期的 α 时间平均

    先丢弃前 discard_fraction 的时间段，窗口起点取保留段起点向上取整到 T_e 的整数倍，
    在每个完整窗口 [jT_e, (j+1)T_e] 上用梯形公式积分。

    Args:
        traj: 采样轨迹（时间均匀）
        discard_fraction: 视为暂态的比例

    Returns:
        PeriodAverages: {α_j}

    Raises:
        TrajectoryTooShort: 完整窗口少于 16 个
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise ParameterError(f"discard_fraction 必须在 [0, 1) 内: {discard_fraction}")
    t = np.asarray(traj.t, dtype=float)
    if len(t) < 2:
        raise TrajectoryTooShort("轨迹采样点不足")
    spacing = np.diff(t)
    if not np.allclose(spacing, spacing[0], rtol=1e-6, atol=0.0):
        raise ParameterError("周期平均要求等间距采样")

    t_e = traj.params.drive_period
    t_keep = t[0] + discard_fraction * (t[-1] - t[0])
    first_edge = math.ceil(t_keep / t_e - 1e-9) * t_e
    n_windows = int(math.floor((t[-1] - first_edge) / t_e + 1e-9))
    if n_windows < MIN_AVERAGING_PERIODS:
        raise TrajectoryTooShort(
            f"保留段只有 {max(n_windows, 0)} 个完整周期，至少需要 {MIN_AVERAGING_PERIODS} 个"
        )

    alpha = np.asarray(traj.alpha, dtype=complex)
    cumulative = cumulative_trapezoid(alpha, t, initial=0)
    edges = np.minimum(first_edge + t_e * np.arange(n_windows + 1), t[-1])
    integral = np.interp(edges, t, cumulative.real) + 1j * np.interp(edges, t, cumulative.imag)
    return PeriodAverages(values=np.diff(integral) / t_e, t_e=t_e)


def order_parameters(pa: PeriodAverages) -> OrderParameters:
    """α_order = mean(α_j)，σ_α = sqrt(mean |α_j − α_order|²)"""
    values = pa.values
    alpha_order = complex(np.mean(values))
    sigma_alpha = float(np.sqrt(np.mean(np.abs(values - alpha_order) ** 2)))
    return OrderParameters(alpha_order=alpha_order, sigma_alpha=sigma_alpha)


def classify(op: OrderParameters, eps_order: float, eps_sigma: float) -> PhaseLabel:
    """
    相分类

    σ_α ≥ eps_sigma → 非周期；否则 |α_order| ≥ eps_order → 有序；否则规则振荡
    """
    if eps_order <= 0 or eps_sigma <= 0:
        raise ParameterError("分类阈值必须为正")
    if not math.isfinite(op.sigma_alpha) or op.sigma_alpha >= eps_sigma:
        return PhaseLabel.NON_PERIODIC
    if op.alpha_order_abs >= eps_order:
        return PhaseLabel.ORDERED
    return PhaseLabel.REGULAR_OSCILLATING


def analyze(traj: Trajectory, discard_fraction: Optional[float] = None,
            eps_order: float = 0.01, eps_sigma: float = 0.005
            ) -> Tuple[PeriodAverages, OrderParameters, PhaseLabel]:
    """周期平均 → 序参量 → 相标签；discard_fraction 默认取轨迹的积分配置"""
    if discard_fraction is None:
        discard_fraction = traj.config.discard_fraction
    pa = period_averages(traj, discard_fraction)
    op = order_parameters(pa)
    label = classify(op, eps_order, eps_sigma)
    logger.info(
        f"分析完成: 周期数={len(pa)}, |α_order|={op.alpha_order_abs:.6g}, "
        f"σ_α={op.sigma_alpha:.3g}, 相={label.value}"
    )
    return pa, op, label


def _bessel_j0_series(x: float) -> float:
    # Σ (−x²/4)^k / (k!)²
    quarter = -0.25 * x * x
    term = 1.0
    terms = [term]
    k = 0
    while True:
        k += 1
        term *= quarter / (k * k)
        terms.append(term)
        if abs(term) < 1e-17 and k > 2:
            break
    return math.fsum(terms)


def _bessel_j0_miller(x: float) -> float:
    # 向下递推 J_{k−1} = (2k/x)J_k − J_{k+1}，用 J_0 + 2ΣJ_{2k} = 1 归一
    ax = abs(x)
    start = int(ax + 20.0 * ax ** (1.0 / 3.0) + 40.0)
    if start % 2:
        start += 1
    upper, current = 0.0, 1e-30
    total = 2.0 * current
    for k in range(start, 0, -1):
        lower = (2.0 * k / ax) * current - upper
        upper, current = current, lower
        index = k - 1
        if index == 0:
            total += current
        elif index % 2 == 0:
            total += 2.0 * current
        if abs(current) > _RESCALE_THRESHOLD:
            upper /= _RESCALE_THRESHOLD
            current /= _RESCALE_THRESHOLD
            total /= _RESCALE_THRESHOLD
    return current / total


def bessel_j0(x: float) -> float:
    """
    第一类零阶 Bessel 函数 J_0(x)

    |x| ≤ 8 用幂级数，8 < |x| < 1e4 用 Miller 向下递推

    Raises:
        ParameterError: |x| ≥ 1e4 或 x 非有限
    """
    x = float(x)
    if not math.isfinite(x) or abs(x) >= BESSEL_DOMAIN_LIMIT:
        raise ParameterError(f"bessel_j0 的定义域为 |x| < {BESSEL_DOMAIN_LIMIT:g}: {x}")
    if abs(x) <= BESSEL_SERIES_LIMIT:
        return _bessel_j0_series(x)
    return _bessel_j0_miller(x)


def bessel_j0_zeros(n: int) -> List[float]:
    """J_0 的前 n 个正零点：步长 0.25 找变号区间，再二分"""
    if int(n) != n or n < 1:
        raise ParameterError(f"零点个数必须为正整数: {n}")
    zeros: List[float] = []
    left, f_left = 0.0, 1.0
    while len(zeros) < n:
        right = left + ZERO_BRACKET_STEP
        f_right = bessel_j0(right)
        if f_left * f_right < 0:
            zeros.append(bisect(bessel_j0, left, right, xtol=ZERO_XTOL))
        left, f_left = right, f_right
    return zeros


def cdt_amplitudes(params: SystemParams, n: int) -> List[float]:
    """
    相干隧穿破坏 (CDT) 的驱动振幅

    J_0(4gξ/κω_e) = 0 ⇒ ξ_k = j_{0,k}·κ·ω_e/(4g)

    Args:
        params: 物理参数（使用 g, kappa, omega_e）
        n: 个数

    Returns:
        List[float]: ξ_1 < ξ_2 < ...
    """
    if params.g <= 0:
        raise ParameterError("CDT 振幅要求 g>0")
    if params.kappa <= 0:
        raise ParameterError("CDT 振幅要求 kappa>0")
    scale = params.kappa * params.omega_e / (4.0 * params.g)
    return [j * scale for j in bessel_j0_zeros(n)]


def effective_tunneling_frequency(params: SystemParams) -> float:
    """强驱动下 m^x 的重整化进动频率 ω_a·J_0(4gξ/κω_e)"""
    if params.kappa <= 0:
        raise ParameterError("有效隧穿频率要求 kappa>0")
    return params.omega_a * bessel_j0(4.0 * params.g * params.xi / (params.kappa * params.omega_e))
