#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
非光滑环节
齿隙（位置钳位的 play 算子和速度门控形式）、死区、齿隙描述函数及其分区波形
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BacklashState:
    """
    齿隙状态

    Parameters:
        gap: 间隙半宽 θ_b（弧度，>= 0）
        driven_angle: 从动侧角度 θ_d（弧度）
        motor_angle: 最近一次输入的电机侧角度 θ_m（弧度），速度门控形式需要它计算 z
    """
    gap: float = 0.0
    driven_angle: float = 0.0
    motor_angle: float = 0.0

    def __post_init__(self):
        if self.gap < 0:
            raise ParameterError(f"齿隙半宽不能为负: {self.gap}")


@dataclass(frozen=True)
class DeadZoneSpec:
    """死区宽度（弧度），0 表示直通"""
    width: float = 0.0

    def __post_init__(self):
        if self.width < 0:
            raise ParameterError(f"死区宽度不能为负: {self.width}")


@dataclass(frozen=True)
class DescribingFunctionPoint:
    """描述函数取值点：χ = θ_b/Θ_m, γ = asin(1 - 2χ), value = N(χ)"""
    chi: float
    gamma: float
    value: complex


def play_clamp(driven_angle, motor_angle, gap):
    """play 算子核心：θ_d 钳位到 [θ_m - θ_b, θ_m + θ_b]"""
    return min(max(driven_angle, motor_angle - gap), motor_angle + gap)


def backlash_update(st, theta_m):
    """
    位置形式的齿隙更新

    参数:
    - st: BacklashState
    - theta_m: float, 新的电机侧角度（弧度）

    返回:
    - tuple: (新状态, θ_d)
    """
    theta_d = play_clamp(st.driven_angle, theta_m, st.gap)
    return replace(st, driven_angle=theta_d, motor_angle=theta_m), theta_d


def backlash_velocity_step(st, omega_m, dt):
    """
    速度门控形式的显式欧拉一步

    σ = sign(ω_m)，当 (σ>0 且 z>=θ_b) 或 (σ<0 且 z<=-θ_b) 时啮合，ω_d = ω_m，否则 ω_d = 0；
    z = θ_m - θ_d 取步初值

    返回:
    - tuple: (新状态, ω_d)
    """
    if not dt > 0:
        raise DomainError(f"步长必须为正: {dt}")
    z = st.motor_angle - st.driven_angle
    sigma = np.sign(omega_m)
    engaged = (sigma > 0 and z >= st.gap) or (sigma < 0 and z <= -st.gap)
    omega_d = float(omega_m) if engaged else 0.0
    new_state = replace(
        st,
        motor_angle=st.motor_angle + omega_m * dt,
        driven_angle=st.driven_angle + omega_d * dt,
    )
    return new_state, omega_d


def dead_zone(e, dz):
    """减法型死区 sign(e)·max(0, |e| - θ_dz)，支持数组"""
    width = dz.width if isinstance(dz, DeadZoneSpec) else float(dz)
    if width == 0.0:
        return e
    return np.sign(e) * np.maximum(0.0, np.abs(e) - width)


def _df_closed_form(chi):
    gamma = np.arcsin(1.0 - 2.0 * chi)
    real = (np.pi / 2.0 + gamma + 2.0 * (1.0 - 2.0 * chi) * np.sqrt(chi * (1.0 - chi))) / np.pi
    imag = 4.0 / np.pi * chi * (chi - 1.0)
    return gamma, real + 1j * imag


def describing_function(chi):
    """
    齿隙描述函数闭式解

    参数:
    - chi: float, χ = θ_b/Θ_m ∈ [0, 1]，端点返回极限值 1 和 0

    返回:
    - DescribingFunctionPoint
    """
    chi = float(chi)
    if not 0.0 <= chi <= 1.0:
        raise DomainError(f"χ 必须位于 [0, 1]，实际为 {chi}（Θ_m < θ_b 时从动侧不动）")
    if chi == 0.0:
        return DescribingFunctionPoint(0.0, np.pi / 2.0, 1.0 + 0.0j)
    if chi == 1.0:
        return DescribingFunctionPoint(1.0, -np.pi / 2.0, 0.0 + 0.0j)
    gamma, value = _df_closed_form(chi)
    return DescribingFunctionPoint(chi, float(gamma), complex(value))


def describing_function_values(chi_grid):
    """χ 网格上的 N(χ) 数组，用于轨迹计算"""
    chi = np.asarray(chi_grid, dtype=float)
    if np.any(chi < 0.0) or np.any(chi > 1.0):
        raise DomainError("χ 网格必须位于 [0, 1]")
    _, value = _df_closed_form(chi)
    return value


def df_fourier_coeffs(Theta_m, theta_b):
    """
    齿隙输出一次谐波系数

    参数:
    - Theta_m: float, 输入正弦幅值（弧度）
    - theta_b: float, 间隙半宽（弧度），0 <= θ_b < Θ_m

    返回:
    - tuple: (a1, b1)，满足 N = (b1 + i·a1)/Θ_m
    """
    if theta_b < 0 or not Theta_m > theta_b:
        raise DomainError(f"需要 Θ_m > θ_b >= 0，实际 Θ_m={Theta_m}, θ_b={theta_b}")
    chi = theta_b / Theta_m
    a1 = 4.0 * theta_b / np.pi * (chi - 1.0)
    b1 = Theta_m * describing_function(chi).value.real
    return a1, b1


def backlash_zone_waveform(tau, chi):
    """
    稳态正弦输入 θ_m = Θ_m sin τ 下的归一化从动侧波形 θ_d/Θ_m

    τ ∈ [π/2, 5π/2) 分四段：
    I   [π/2, π-γ]      1 - χ
    II  [π-γ, 3π/2]     sin τ + χ
    III [3π/2, 2π-γ]    χ - 1
    IV  [2π-γ, 5π/2)    sin τ - χ
    """
    tau = np.asarray(tau, dtype=float)
    gamma = np.arcsin(1.0 - 2.0 * chi)
    out = np.where(tau <= np.pi - gamma, 1.0 - chi, np.sin(tau) + chi)
    out = np.where(tau > 1.5 * np.pi, chi - 1.0, out)
    out = np.where(tau > 2.0 * np.pi - gamma, np.sin(tau) - chi, out)
    return out if out.ndim else float(out)


def df_fourier_numeric(chi, n_points=2001):
    """
    对分区波形逐段做 Simpson 积分得到归一化傅里叶系数

    返回:
    - tuple: (a0, a1, b1)，均已除以 Θ_m
    """
    gamma = np.arcsin(1.0 - 2.0 * chi)
    zones = [
        (np.pi / 2.0, np.pi - gamma, lambda t: np.full_like(t, 1.0 - chi)),
        (np.pi - gamma, 1.5 * np.pi, lambda t: np.sin(t) + chi),
        (1.5 * np.pi, 2.0 * np.pi - gamma, lambda t: np.full_like(t, chi - 1.0)),
        (2.0 * np.pi - gamma, 2.5 * np.pi, lambda t: np.sin(t) - chi),
    ]
    a0 = a1 = b1 = 0.0
    for lo, hi, shape in zones:
        if hi <= lo:
            continue
        tau = np.linspace(lo, hi, n_points)
        theta_d = shape(tau)
        a0 += simpson(theta_d, x=tau) / np.pi
        a1 += simpson(theta_d * np.cos(tau), x=tau) / np.pi
        b1 += simpson(theta_d * np.sin(tau), x=tau) / np.pi
    return a0, a1, b1
