#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
残余振动单模态衰减拟合
η(t) = A·exp(-2πfζ(t-t_s))·sin(2πf·sqrt(1-ζ²)(t-t_s) + φ) [+ 偏置]
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import hilbert

from common.errors import FitFailureError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayFit:
    """
    衰减拟合结果

    Parameters:
        A_res: 残余振动幅值（米，>= 0）
        f_r: 振动频率（Hz）
        zeta_r: 阻尼比
        phi: 相位（弧度）
        t_s: 拟合起点（秒）
        r_squared: 决定系数
        offset: 常值偏置（未拟合时为 0）
        degenerate: 信号恒为零等无法拟合的情况
    """
    A_res: float
    f_r: float
    zeta_r: float
    phi: float
    t_s: float
    r_squared: float = float('nan')
    offset: float = 0.0
    degenerate: bool = False


def decay_model(t, A, f, zeta, phi, t_s, offset=0.0):
    """单模态衰减振动模型"""
    tau = np.asarray(t, dtype=float) - t_s
    wn = 2.0 * np.pi * f
    wd = wn * np.sqrt(max(1.0 - zeta * zeta, 0.0))
    return A * np.exp(-wn * zeta * tau) * np.sin(wd * tau + phi) + offset


def dominant_frequency(x, dt, pad_factor=16):
    """
    主频估计：Hann 窗、补零 FFT 取峰值后做抛物线插值

    参数:
    - x: 信号
    - dt: float, 采样间隔
    - pad_factor: int, 补零倍数

    返回:
    - float: 频率（Hz）
    """
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    n_fft = int(pad_factor * x.size)
    spectrum = np.abs(np.fft.rfft(x * np.hanning(x.size), n=n_fft))
    spectrum[0] = 0.0
    k = int(np.argmax(spectrum))
    if 0 < k < spectrum.size - 1:
        a, b, c = np.log(spectrum[k - 1:k + 2] + 1e-300)
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    return (k + shift) / (n_fft * dt)


def initial_guess(eta, t, t_s):
    """主频来自 FFT 峰值，ζ = 0.005，φ 来自 t_s 处解析信号相位"""
    dt = float(np.median(np.diff(t)))
    f = dominant_frequency(eta, dt)
    analytic = hilbert(eta - eta.mean())
    phi = float(np.angle(analytic[0]) + np.pi / 2.0)
    period = max(int(round(1.0 / (f * dt))), 1)
    amp = float(np.max(np.abs(eta[:period])))
    return DecayFit(amp, f, 0.005, phi, t_s)


def _wrap(angle):
    return float((angle + np.pi) % (2.0 * np.pi) - np.pi)


def fit_decay(eta, t, t_s, init=None, fit_offset=False, min_cycles=5, max_nfev=5000):
    """
    Levenberg-Marquardt 拟合衰减振动

    参数:
    - eta: 残余信号（输出减指令）
    - t: 时间序列（秒）
    - t_s: float, 拟合起点，之前的样本被丢弃
    - init: DecayFit, 初值，None 时自动估计
    - fit_offset: bool, 是否同时拟合常值偏置
    - min_cycles: int, 记录至少包含的周期数

    返回:
    - DecayFit
    """
    eta = np.asarray(eta, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    keep = t >= t_s
    eta, t = eta[keep], t[keep]
    if t.size < 8:
        raise ParameterError(f"t_s = {t_s} 之后的样本太少")

    scale = float(np.max(np.abs(eta)))
    if scale == 0.0:
        logger.warning("残余信号恒为零，衰减拟合退化")
        return DecayFit(0.0, float('nan'), float('nan'), float('nan'), t_s, float('nan'), degenerate=True)
    y = eta / scale

    guess = init if init is not None else initial_guess(y, t, t_s)
    if (t[-1] - t_s) * guess.f_r < min_cycles:
        raise ParameterError(f"记录不足 {min_cycles} 个周期（初始频率 {guess.f_r:.4g} Hz）")

    a0 = guess.A_res / scale if init is not None else guess.A_res
    x0 = [a0, guess.f_r, np.sqrt(max(guess.zeta_r, 0.0)), guess.phi]
    if fit_offset:
        x0.append(0.0)
    trace = []

    def residual(x):
        offset = x[4] if fit_offset else 0.0
        r = decay_model(t, x[0], x[1], x[2] ** 2, x[3], t_s, offset) - y
        trace.append(0.5 * float(r @ r) * scale ** 2)
        return r

    result = least_squares(residual, x0, method='lm', xtol=1e-12, ftol=1e-12, max_nfev=max_nfev)
    if not result.success:
        raise FitFailureError(f"衰减拟合未收敛: {result.message}", last_iterate=result.x, cost_trace=trace)

    A, f, s, phi = result.x[:4]
    if A < 0:
        A, phi = -A, phi + np.pi
    offset = float(result.x[4]) * scale if fit_offset else 0.0
    ss_res = float(result.fun @ result.fun)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else float('nan')

    fit = DecayFit(float(A) * scale, float(f), float(s * s), _wrap(phi), t_s, r_squared, offset)
    logger.debug(f"衰减拟合: A={fit.A_res:.3e}, f={fit.f_r:.4f} Hz, ζ={fit.zeta_r:.5f}, R²={r_squared:.4f}")
    return fit
