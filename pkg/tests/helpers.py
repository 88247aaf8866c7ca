"""
测试辅助函数
"""
import math

import numpy as np

from src.data_models import IntegrationConfig, MeanFieldState, SystemParams, Trajectory

TWO_PI = 2.0 * math.pi


def random_state(rng: np.random.Generator, t: float = None) -> MeanFieldState:
    """Bloch 球内均匀分布的随机态"""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    radius = 0.5 * rng.uniform() ** (1.0 / 3.0)
    alpha = complex(rng.normal(), rng.normal()) * 0.5
    if t is None:
        t = rng.uniform(0.0, 10.0)
    return MeanFieldState.from_bloch(alpha, radius * direction, t)


def synthetic_trajectory(alpha_fn, periods: int = 20, points_per_period: int = 100,
                         params: SystemParams = None, discard: float = 0.0) -> Trajectory:
    """按解析 α(t) 构造等间距采样轨迹"""
    params = params or SystemParams()
    step = params.drive_period / points_per_period
    t = np.arange(periods * points_per_period + 1) * step
    n = len(t)
    return Trajectory(
        t=t,
        alpha=np.asarray(alpha_fn(t), dtype=complex) * np.ones(n),
        m=np.zeros((n, 3)),
        sigma=np.zeros(n),
        rate_l=np.zeros(n),
        params=params,
        config=IntegrationConfig(dt=step, t_end=float(t[-1]), sample_stride=1, discard_fraction=discard),
    )


def short_integration(periods: int = 20, steps_per_period: int = 200, stride: int = 10,
                      discard: float = 0.0, perturbation: float = 0.0) -> IntegrationConfig:
    """短积分配置"""
    return IntegrationConfig(
        dt=TWO_PI / steps_per_period,
        t_end=periods * TWO_PI,
        sample_stride=stride,
        discard_fraction=discard,
        perturbation=perturbation,
    )


def bare_fixed_point(g: float, rate: float, branch: int = 1):
    """
    裸 Lindblad 方程在 ξ=0、κ=γ_L=rate、ω_p=ω_a=1 时的超辐射定态

    Returns:
        (α, m)
    """
    c = 8.0 * g * g / (1.0 + rate * rate)
    mz = -(1.0 + rate * rate) / c
    mx = -branch * math.sqrt((1.0 + 2.0 * mz) / c)
    m = np.array([mx, -rate * mx, mz])
    alpha = -2.0 * g * mx * complex(1.0, rate) / (1.0 + rate * rate)
    return alpha, m
