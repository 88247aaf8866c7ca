"""
动力学模块
组装三种耗散形式（缀饰 / 裸 / 有效自旋）下的平均场运动方程，并用定步长 RK4 积分
"""
import math
import logging
from typing import Callable, Tuple

import numpy as np

from src.config import Config
from src.data_models import (
    ModelKind, DissipatorMode, SystemParams, MeanFieldState, StateDerivative,
    IntegrationConfig, Trajectory, TRACE_TOL, SX, SY, SZ, S_MINUS,
)
from src.errors import NumericalFailure, ParameterError
from src.model_core import mf_atom_field, atom_hamiltonian, frame_from_field, bloch_from_rho

# 配置日志
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format=Config.LOG_FORMAT,
    handlers=[
        logging.FileHandler(f'{Config.LOG_DIR}/dynamics.log', encoding='utf-8'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

RhsFunction = Callable[[float, np.ndarray], np.ndarray]


def _atom_derivative(field: np.ndarray, rho: np.ndarray, lowering: np.ndarray,
                     rate_l: float, rate_g: float) -> np.ndarray:
    """
    dρ/dt = −i[H, ρ] + rate_l(2LρL† − {L†L, ρ}) + rate_g(⟨L⟩[ρ, L†] + ⟨L†⟩[L, ρ])
    """
    hamiltonian = atom_hamiltonian(field)
    drho = -1j * (hamiltonian @ rho - rho @ hamiltonian)

    raising = lowering.conj().T
    if rate_l:
        number = raising @ lowering
        drho += rate_l * (2.0 * lowering @ rho @ raising - number @ rho - rho @ number)
    if rate_g:
        mean_lowering = np.trace(rho @ lowering)
        drho += rate_g * (
            mean_lowering * (rho @ raising - raising @ rho)
            + mean_lowering.conjugate() * (lowering @ rho - rho @ lowering)
        )
    return drho


def _photon_dressed(model: ModelKind, params: SystemParams, alpha: complex,
                    mx: float, my: float, t: float) -> complex:
    drive = params.xi * math.cos(params.omega_e * t)
    prefactor = complex(-params.kappa, -params.omega_p)
    if model is ModelKind.DICKE:
        return prefactor * (alpha + (2.0 / params.omega_p) * (params.g * mx + drive))
    return prefactor * (alpha + (params.g * complex(mx, -my) + 2.0 * drive) / params.omega_p)


def _photon_bare(model: ModelKind, params: SystemParams, alpha: complex,
                 mx: float, my: float, t: float) -> complex:
    drive = params.xi * math.cos(params.omega_e * t)
    damped = complex(-params.kappa, -params.omega_p) * alpha
    if model is ModelKind.DICKE:
        return damped - 2j * (params.g * mx + drive)
    return damped - 1j * params.g * complex(mx, -my) - 2j * drive


def _pack(dalpha: complex, drho: np.ndarray) -> np.ndarray:
    out = np.empty(5, dtype=complex)
    out[0] = dalpha
    out[1:] = drho.ravel()
    return out


def _dressed_vector(model: ModelKind, params: SystemParams, t: float, y: np.ndarray) -> np.ndarray:
    alpha = complex(y[0])
    rho = y[1:5].reshape(2, 2)
    mx, my, _ = bloch_from_rho(rho)
    field = mf_atom_field(model, params, alpha)
    # 每个 RK4 子步都重新计算瞬时缀饰坐标系
    frame = frame_from_field(field, params)
    drho = _atom_derivative(field, rho, frame.lowering(), frame.rate_l, frame.rate_g)
    return _pack(_photon_dressed(model, params, alpha, mx, my, t), drho)


def _bare_vector(model: ModelKind, params: SystemParams, t: float, y: np.ndarray) -> np.ndarray:
    alpha = complex(y[0])
    rho = y[1:5].reshape(2, 2)
    mx, my, _ = bloch_from_rho(rho)
    field = mf_atom_field(model, params, alpha)
    drho = _atom_derivative(field, rho, S_MINUS, params.gamma_l, params.gamma_g)
    return _pack(_photon_bare(model, params, alpha, mx, my, t), drho)


def _check_finite(values: np.ndarray, t: float, what: str = "右端项"):
    if not np.all(np.isfinite(values)):
        raise NumericalFailure(f"{what}出现 NaN/∞", t)


def _to_derivative(dy: np.ndarray) -> StateDerivative:
    return StateDerivative(dalpha=complex(dy[0]), drho=dy[1:5].reshape(2, 2).copy())


def rhs_dressed(model: ModelKind, params: SystemParams, state: MeanFieldState) -> StateDerivative:
    """
    缀饰 Lindblad 方程的右端项

    光子部分按缀饰光子算符的衰减写出，原子部分的跃迁算符取瞬时缀饰坐标系的 S̃⁻，
    耗散率随 σ(t) 变化。

    Args:
        model: 模型类型
        params: 物理参数
        state: 当前状态（含时间 t）

    Returns:
        StateDerivative: (dα/dt, dρ/dt)，dρ/dt 厄米且无迹
    """
    dy = _dressed_vector(model, params, state.t, state.to_vector())
    _check_finite(dy, state.t)
    return _to_derivative(dy)


def rhs_bare(model: ModelKind, params: SystemParams, state: MeanFieldState) -> StateDerivative:
    """裸 Lindblad 方程：常数耗散率 γ_L, γ_G，跃迁算符为实验室系 S⁻"""
    dy = _bare_vector(model, params, state.t, state.to_vector())
    _check_finite(dy, state.t)
    return _to_derivative(dy)


def _require_effective(params: SystemParams, model: ModelKind):
    if model is not ModelKind.DICKE:
        raise ParameterError("有效自旋模型只适用于 Dicke 模型")
    if params.xi > 0 and params.kappa <= 0:
        raise ParameterError("有效自旋模型在 xi>0 时要求 kappa>0")


def effective_field(params: SystemParams, m, t: float) -> np.ndarray:
    """B_eff = (−(4gξ/κ) sin ω_e t − (8g²/ω_p) m^x, 0, ω_a)"""
    drive = 0.0
    if params.xi:
        drive = -(4.0 * params.g * params.xi / params.kappa) * math.sin(params.omega_e * t)
    interaction = -(8.0 * params.g * params.g / params.omega_p) * float(m[0])
    return np.array([drive + interaction, 0.0, params.omega_a])


def rhs_effective_spin(params: SystemParams, m, t: float,
                       model: ModelKind = ModelKind.DICKE) -> np.ndarray:
    """
    强驱动下消去光子后的有效自旋模型（无耗散）

    dm/dt = B_eff × m，因此 |m| 守恒
    """
    _require_effective(params, model)
    m = np.asarray(m, dtype=float)
    dm = np.cross(effective_field(params, m, t), m)
    _check_finite(dm, t)
    return dm


def effective_photon(params: SystemParams, m, t: float) -> complex:
    """有效模型中的光子振幅 α ≈ −i(ξ/κ)e^{−iω_e t} − (2g/ω_p) m^x"""
    alpha = -(2.0 * params.g / params.omega_p) * float(m[0])
    if params.xi:
        alpha += -1j * (params.xi / params.kappa) * np.exp(-1j * params.omega_e * t)
    return complex(alpha)


def _effective_derivative(params: SystemParams, state: MeanFieldState) -> StateDerivative:
    m = state.bloch()
    dm = rhs_effective_spin(params, m, state.t)
    dalpha = -(2.0 * params.g / params.omega_p) * dm[0]
    if params.xi:
        dalpha += -(params.xi / params.kappa) * params.omega_e * np.exp(-1j * params.omega_e * state.t)
    # ρ = 1/2 + 2 m·S
    drho = 2.0 * (dm[0] * SX + dm[1] * SY + dm[2] * SZ)
    return StateDerivative(dalpha=complex(dalpha), drho=drho)


def rhs(model: ModelKind, mode: DissipatorMode, params: SystemParams,
        state: MeanFieldState) -> StateDerivative:
    """按耗散形式分派右端项"""
    if mode is DissipatorMode.DRESSED:
        return rhs_dressed(model, params, state)
    if mode is DissipatorMode.BARE:
        return rhs_bare(model, params, state)
    _require_effective(params, model)
    return _effective_derivative(params, state)


def photon_zeroth_order(params: SystemParams, t: float) -> complex:
    """共振、κ≪ω_p 时 g=0 光子方程的长时近似 α₀ = −i(ξ/κ)e^{−iω_e t}"""
    if params.kappa <= 0:
        raise ParameterError("α₀ 需要 kappa>0")
    return complex(-1j * (params.xi / params.kappa) * np.exp(-1j * params.omega_e * t))


def photon_linear_response(params: SystemParams, mode: DissipatorMode, t) -> np.ndarray:
    """
    g=0 光子方程 dα/dt = −(κ+iω_p)α + s·cos ω_e t 的精确长时解

    同时包含共转和反转分量：α = A₋e^{−iω_e t} + A₊e^{iω_e t}，
    A∓ = (s/2)/(κ + i(ω_p ∓ ω_e))

    Args:
        params: 物理参数（g 被忽略）
        mode: 决定驱动项 s 的形式，有效自旋模式按裸方程处理
        t: 时间（标量或数组）

    Returns:
        np.ndarray: α(t)
    """
    if mode is DissipatorMode.DRESSED:
        source = complex(-params.kappa, -params.omega_p) * 2.0 * params.xi / params.omega_p
    else:
        source = -2j * params.xi
    lower = complex(params.kappa, params.omega_p - params.omega_e)
    upper = complex(params.kappa, params.omega_p + params.omega_e)
    if lower == 0:
        raise ParameterError("κ=0 且共振驱动时不存在定态响应")
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * params.omega_e * t)
    return 0.5 * source * (phase / lower + phase.conj() / upper)


def step_rk4(rhs_fn: RhsFunction, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    """
    经典四阶 Runge–Kutta 单步

    Args:
        rhs_fn: f(t, y)
        y: 当前状态向量（实数或复数）
        t: 当前时间
        dt: 步长（≥0）

    Returns:
        np.ndarray: t+dt 时刻的状态
    """
    if dt < 0:
        raise ParameterError(f"dt 不能为负: {dt}")
    half = 0.5 * dt
    k1 = rhs_fn(t, y)
    k2 = rhs_fn(t + half, y + half * k1)
    k3 = rhs_fn(t + half, y + half * k2)
    k4 = rhs_fn(t + dt, y + dt * k3)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(y_next, t + dt, "积分状态")
    return y_next


def renormalize_atom(y: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    ρ ← (ρ+ρ†)/2 后按迹归一

    Returns:
        (新状态向量, 修正量)，修正量取迹偏差与反厄米部分的较大者
    """
    rho = y[1:5].reshape(2, 2)
    hermitian = 0.5 * (rho + rho.conj().T)
    trace = hermitian[0, 0].real + hermitian[1, 1].real
    correction = max(abs(trace - 1.0), float(np.max(np.abs(rho - hermitian))))
    out = y.copy()
    out[1:5] = (hermitian / trace).ravel()
    return out, correction


def renormalize_bloch(m: np.ndarray, norm: float) -> Tuple[np.ndarray, float]:
    """有效自旋模式：把 m 拉回初始长度，返回 (新 m, |Δ|m||)"""
    current = float(np.linalg.norm(m))
    if current == 0.0 or norm == 0.0:
        return m, current
    return m * (norm / current), abs(current - norm)


def _rho_min_eigenvalue(y: np.ndarray) -> float:
    half_diff = 0.5 * (y[1] - y[4]).real
    return 0.5 - math.hypot(half_diff, abs(y[2]))


def _perturbed_bloch(initial: MeanFieldState, epsilon: float) -> np.ndarray:
    m = initial.bloch()
    m[0] += epsilon
    norm = float(np.linalg.norm(m))
    if norm > 0.5:
        # 拉回 Bloch 球面，保持 ρ 半正定
        m *= 0.5 / norm
    return m


class _Recorder:
    """按 sample_stride 记录采样点"""

    def __init__(self, n_samples: int):
        self.t = np.empty(n_samples)
        self.alpha = np.empty(n_samples, dtype=complex)
        self.m = np.empty((n_samples, 3))
        self.sigma = np.empty(n_samples)
        self.rate_l = np.empty(n_samples)
        self.count = 0

    def record(self, t: float, alpha: complex, m, sigma: float, rate_l: float):
        i = self.count
        self.t[i] = t
        self.alpha[i] = alpha
        self.m[i] = m
        self.sigma[i] = sigma
        self.rate_l[i] = rate_l
        self.count += 1

    def build(self, params, config, model, mode, max_correction, min_eigenvalue) -> Trajectory:
        n = self.count
        return Trajectory(
            t=self.t[:n].copy(),
            alpha=self.alpha[:n].copy(),
            m=self.m[:n].copy(),
            sigma=self.sigma[:n].copy(),
            rate_l=self.rate_l[:n].copy(),
            params=params,
            config=config,
            model=model,
            mode=mode,
            max_renorm_correction=max_correction,
            min_eigenvalue=min_eigenvalue,
        )


def _sample_full(model: ModelKind, mode: DissipatorMode, params: SystemParams,
                 y: np.ndarray) -> Tuple[complex, tuple, float, float]:
    alpha = complex(y[0])
    m = bloch_from_rho(y[1:5].reshape(2, 2))
    frame = frame_from_field(mf_atom_field(model, params, alpha), params)
    rate_l = frame.rate_l if mode is DissipatorMode.DRESSED else params.gamma_l
    return alpha, m, frame.sigma, rate_l


def integrate(model: ModelKind, mode: DissipatorMode, params: SystemParams,
              initial: MeanFieldState, config: IntegrationConfig) -> Trajectory:
    """
    从 initial 出发积分到 t_end

    先对 m^x 施加一次扰动 ε，再以 RK4 定步长推进，每 sample_stride 步记录一次
    （含初始时刻）。有效自旋模式只演化 m，α 由有效光子公式重建，初态的 α 不参与。

    Args:
        model: 模型类型
        mode: 耗散形式
        params: 物理参数
        initial: 初态
        config: 积分配置

    Returns:
        Trajectory: 采样轨迹

    Raises:
        NumericalFailure: 出现 NaN/∞ 时抛出，partial 为已记录的部分轨迹
    """
    config.validate(params.omega_e)
    config = config.resolve(params.omega_e)
    if mode is DissipatorMode.EFFECTIVE_SPIN:
        _require_effective(params, model)

    dt = config.dt
    n_steps = config.n_steps(params.omega_e)
    stride = int(config.sample_stride)
    t0 = initial.t
    recorder = _Recorder(n_steps // stride + 1)

    logger.info(
        f"开始积分: model={model.value}, mode={mode.value}, g={params.g}, xi={params.xi}, "
        f"dt={dt:.6g}, 步数={n_steps}"
    )

    m0 = _perturbed_bloch(initial, config.perturbation)
    if mode is DissipatorMode.EFFECTIVE_SPIN:
        y = m0.copy()

        def rhs_fn(t, v):
            return np.cross(effective_field(params, v, t), v)

        def sample(t, v):
            field = effective_field(params, v, t)
            return effective_photon(params, v, t), v, 0.5 * float(np.linalg.norm(field)), 0.0

        def min_eig(v):
            return 0.5 - float(np.linalg.norm(v))

        norm0 = float(np.linalg.norm(m0))

        def project(v):
            return renormalize_bloch(v, norm0)
    else:
        y = MeanFieldState.from_bloch(initial.alpha, m0, t0).to_vector()
        vector_rhs = _dressed_vector if mode is DissipatorMode.DRESSED else _bare_vector

        def rhs_fn(t, v):
            return vector_rhs(model, params, t, v)

        def sample(t, v):
            return _sample_full(model, mode, params, v)

        min_eig = _rho_min_eigenvalue
        project = renormalize_atom

    max_correction = 0.0
    min_eigenvalue = min_eig(y)
    warned = False
    recorder.record(t0, *sample(t0, y))
    progress_every = max(1, n_steps // 10)

    t = t0
    for step in range(1, n_steps + 1):
        try:
            y = step_rk4(rhs_fn, y, t, dt)
        except NumericalFailure as e:
            logger.error(f"积分失败: {e}")
            partial = recorder.build(params, config, model, mode, max_correction, min_eigenvalue)
            raise NumericalFailure("积分状态出现 NaN/∞", e.t, partial) from e
        t = t0 + step * dt

        y, correction = project(y)
        if correction > max_correction:
            max_correction = correction
        if correction > TRACE_TOL and not warned:
            logger.warning(f"t={t:.6g} 时归一化修正 {correction:.3e} 超过 {TRACE_TOL:g}")
            warned = True
        min_eigenvalue = min(min_eigenvalue, min_eig(y))

        if step % stride == 0:
            recorder.record(t, *sample(t, y))
        if step % progress_every == 0:
            logger.debug(f"积分进度 {100 * step // n_steps}%")

    trajectory = recorder.build(params, config, model, mode, max_correction, min_eigenvalue)
    logger.info(
        f"积分完成: 采样点={len(trajectory)}, 最大归一化修正={max_correction:.3e}, "
        f"最小本征值={min_eigenvalue:.3e}"
    )
    return trajectory
