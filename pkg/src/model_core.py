"""
模型核心
平均场原子场、瞬时缀饰坐标系、ξ=0 定态（基态）以及对称变换
"""
import math
import logging
from typing import Tuple

import numpy as np

from src.data_models import (
    ModelKind, SystemParams, AtomState, MeanFieldState, DressedFrame, StateDerivative,
    SX, SY, SZ,
)
from src.errors import ParameterError

logger = logging.getLogger(__name__)

# 绕 z 轴转 π：ρ → Z ρ Z 翻转 m^x, m^y
_Z2 = np.diag([1.0, -1.0]).astype(complex)


def mf_atom_field(model: ModelKind, params: SystemParams, alpha: complex) -> np.ndarray:
    """
    单原子平均场哈密顿量 H_a^MF = B·S 中的场矢量 B

    Args:
        model: 模型类型
        params: 物理参数
        alpha: 标度光子振幅

    Returns:
        np.ndarray: (B_x, B_y, B_z)
    """
    alpha = complex(alpha)
    if model is ModelKind.DICKE:
        return np.array([4.0 * params.g * alpha.real, 0.0, params.omega_a])
    return np.array([2.0 * params.g * alpha.real, -2.0 * params.g * alpha.imag, params.omega_a])


def atom_hamiltonian(field: np.ndarray) -> np.ndarray:
    """由场矢量构造 2×2 矩阵 B·S"""
    return field[0] * SX + field[1] * SY + field[2] * SZ


def _fix_phase(ket: np.ndarray) -> np.ndarray:
    # 第一个非零分量取为非负实数
    for component in ket:
        size = abs(component)
        if size > 1e-15:
            return ket * (component.conjugate() / size)
    return ket


def frame_from_field(field: np.ndarray, params: SystemParams) -> DressedFrame:
    """对 B·S 解析对角化，给出缀饰坐标系和耗散率"""
    bx, by, bz = (float(v) for v in field)
    transverse = math.hypot(bx, by)
    norm = math.hypot(transverse, bz)
    half_theta = 0.5 * math.atan2(transverse, bz)
    phi = math.atan2(by, bx)
    phase = complex(math.cos(phi), math.sin(phi))
    cos_half, sin_half = math.cos(half_theta), math.sin(half_theta)

    excited = _fix_phase(np.array([cos_half, phase * sin_half], dtype=complex))
    ground = _fix_phase(np.array([sin_half, -phase * cos_half], dtype=complex))

    element = np.vdot(ground, SX @ excited)
    sx_element_sq = min(max(abs(element) ** 2, 0.0), 0.25)
    return DressedFrame(
        sigma=0.5 * norm,
        ground_ket=ground,
        excited_ket=excited,
        sx_element_sq=sx_element_sq,
        rate_l=4.0 * sx_element_sq * params.gamma_l,
        rate_g=4.0 * sx_element_sq * params.gamma_g,
    )


def dressed_frame(model: ModelKind, params: SystemParams, alpha: complex) -> DressedFrame:
    """
    瞬时缀饰坐标系

    σ = |B|/2，含时耗散率 γ(t) = 4|⟨−̃|S^x|+̃⟩|² γ
    """
    return frame_from_field(mf_atom_field(model, params, alpha), params)


def critical_coupling(model: ModelKind, params: SystemParams) -> float:
    """Dicke 相变临界耦合"""
    root = math.sqrt(params.omega_a * params.omega_p)
    if model is ModelKind.DICKE:
        return 0.5 * root
    return root


def superradiant_amplitude(model: ModelKind, params: SystemParams) -> float:
    """ξ=0 基态的 |α|；临界点及以下为 0"""
    g = params.g
    if g <= critical_coupling(model, params):
        return 0.0
    if model is ModelKind.DICKE:
        return 0.5 * math.sqrt(4.0 * g * g / params.omega_p ** 2 - params.omega_a ** 2 / (4.0 * g * g))
    return 0.5 * math.sqrt(g * g / params.omega_p ** 2 - params.omega_a ** 2 / (g * g))


def ground_state(model: ModelKind, params: SystemParams, branch: int = 1) -> MeanFieldState:
    """
    无驱动场时的自洽平均场基态，作为所有模拟的初态

    Args:
        model: 模型类型
        params: 物理参数（要求 xi=0）
        branch: 超辐射分支，+1 取 α>0，-1 取 α<0

    Returns:
        MeanFieldState: t=0 的基态
    """
    if params.xi != 0:
        raise ParameterError(f"基态只在 xi=0 时定义，当前 xi={params.xi}")
    if branch not in (1, -1):
        raise ParameterError(f"branch 只能为 ±1: {branch}")

    if params.g <= critical_coupling(model, params):
        return MeanFieldState.from_bloch(0.0, (0.0, 0.0, -0.5))

    g = params.g
    if model is ModelKind.DICKE:
        mz = -params.omega_a * params.omega_p / (8.0 * g * g)
        mx = -branch * math.sqrt(0.25 - mz * mz)
        alpha = -2.0 * g * mx / params.omega_p
    else:
        mz = -params.omega_a * params.omega_p / (2.0 * g * g)
        mx = -branch * math.sqrt(0.25 - mz * mz)
        alpha = -g * mx / params.omega_p
    logger.debug(f"超辐射基态: model={model.value}, g={g}, alpha={alpha:.9g}, branch={branch}")
    return MeanFieldState.from_bloch(alpha, (mx, 0.0, mz))


def z2_map(state: MeanFieldState) -> MeanFieldState:
    """U 变换：α → −α，m^x → −m^x，m^y → −m^y"""
    rho = _Z2 @ state.atom.rho @ _Z2
    return MeanFieldState(alpha=-state.alpha, atom=AtomState(rho), t=state.t)


def z2_map_tangent(derivative: StateDerivative) -> StateDerivative:
    """与 z2_map 相同的符号翻转作用于导数"""
    return StateDerivative(dalpha=-derivative.dalpha, drho=_Z2 @ derivative.drho @ _Z2)


def _u1_matrix(phi: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])


def u1_rotate(state: MeanFieldState, phi: float) -> MeanFieldState:
    """
    Tavis–Cummings 的 U(1) 变换

    α → e^{iφ}α，m⁻ = m^x − i m^y → e^{iφ} m⁻（与 S⁺a 不变一致）
    """
    rotation = _u1_matrix(phi)
    rho = rotation @ state.atom.rho @ rotation.conj().T
    return MeanFieldState(alpha=state.alpha * np.exp(1j * phi), atom=AtomState(rho), t=state.t)


def u1_rotate_tangent(derivative: StateDerivative, phi: float) -> StateDerivative:
    rotation = _u1_matrix(phi)
    return StateDerivative(
        dalpha=derivative.dalpha * np.exp(1j * phi),
        drho=rotation @ derivative.drho @ rotation.conj().T,
    )


def bloch_from_rho(rho: np.ndarray) -> Tuple[float, float, float]:
    """由 ρ = 1/2 + m·σ 直接读出 Bloch 分量"""
    mx = 0.5 * (rho[0, 1] + rho[1, 0]).real
    my = 0.5 * (rho[1, 0] - rho[0, 1]).imag
    mz = 0.5 * (rho[0, 0] - rho[1, 1]).real
    return mx, my, mz
