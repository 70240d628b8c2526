#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
谐波最小二乘拟合
y(t) ≈ Σ a_k cos(kω0t) + b_k sin(kω0t) + a0，用 QR 分解求解
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from common.errors import ConditioningError, DivisionGuardError, ParameterError

logger = logging.getLogger(__name__)

# R 对角元相对最大值低于该比例视为秩亏
RANK_RTOL = 1e-10
# 输入基波系数模值下限
INPUT_COEFF_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class HarmonicFit:
    """
    谐波拟合结果

    Parameters:
        f0: 基频（Hz）
        n_harmonics: 谐波个数 N
        a_c: 余弦系数 [a1..aN]
        b_s: 正弦系数 [b1..bN]
        a0: 直流分量
    """
    f0: float
    n_harmonics: int
    a_c: np.ndarray
    b_s: np.ndarray
    a0: float

    @property
    def coefficients(self):
        """与 design_matrix 列顺序一致的系数向量"""
        return np.concatenate([self.a_c, self.b_s, [self.a0]])

    def reconstruct(self, t):
        return design_matrix(t, self.f0, self.n_harmonics) @ self.coefficients


def design_matrix(t, f0, N):
    """
    设计矩阵 [cos(ω0t)..cos(Nω0t), sin(ω0t)..sin(Nω0t), 1]

    参数:
    - t: 时间序列（秒）
    - f0: float, 基频（Hz）
    - N: int, 谐波个数

    返回:
    - np.ndarray: len(t) × (2N+1)
    """
    if int(N) != N or N < 1:
        raise ParameterError(f"谐波个数必须为正整数: {N}")
    if not f0 > 0:
        raise ParameterError(f"基频必须为正: {f0}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phase = 2.0 * np.pi * f0 * np.outer(t, np.arange(1, int(N) + 1))
    return np.hstack([np.cos(phase), np.sin(phase), np.ones((t.size, 1))])


def _column_harmonic(j, N):
    if j < N:
        return j + 1
    if j < 2 * N:
        return j - N + 1
    return 0


def harmonic_fit(y, t, f0, N=3):
    """
    谐波系数的最小二乘解

    参数:
    - y: 测量序列
    - t: 时间序列，长度与 y 相同
    - f0: float, 基频（Hz）
    - N: int, 谐波个数

    返回:
    - HarmonicFit
    """
    y = np.asarray(y, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    if y.size != t.size:
        raise ParameterError(f"y 与 t 长度不一致: {y.size} vs {t.size}")
    A = design_matrix(t, f0, N)
    N = int(N)
    if t.size < 2 * N + 1:
        raise ConditioningError(f"样本数 {t.size} 少于未知数 {2 * N + 1}")
    step = np.median(np.diff(t)) if t.size > 1 else 0.0
    if (t[-1] - t[0] + 1.5 * step) * f0 < 1.0 - 1e-9:
        raise ConditioningError(f"记录长度不足一个周期（{1.0 / f0:.6g} s）")

    Q, R = qr(A, mode='economic')
    diag = np.abs(np.diag(R))
    weak = np.flatnonzero(diag < RANK_RTOL * diag.max())
    if weak.size:
        harmonic = _column_harmonic(int(weak[0]), N)
        raise ConditioningError(f"设计矩阵秩亏，第 {harmonic} 次谐波无法辨识", harmonic=harmonic)
    coeffs = solve_triangular(R, Q.T @ y)
    return HarmonicFit(float(f0), N, coeffs[:N], coeffs[N:2 * N], float(coeffs[-1]))


def fourier_coeff(fit):
    """基波复系数 c = (a1 - i·b1)/2"""
    return complex(fit.a_c[0], -fit.b_s[0]) / 2.0


def frf_point(u_fit, y_fit, p=1.0):
    """
    单频点频响 G(f0) = c_y/(c_u·p)

    参数:
    - u_fit: HarmonicFit, 输入（电机角）拟合
    - y_fit: HarmonicFit, 输出拟合
    - p: float, 输入换算系数（丝杠导程 m/rad）

    返回:
    - complex
    """
    if not np.isclose(u_fit.f0, y_fit.f0, rtol=1e-12, atol=0.0):
        raise ParameterError(f"输入输出拟合的基频不同: {u_fit.f0} vs {y_fit.f0}")
    c_u = fourier_coeff(u_fit)
    if abs(c_u) <= INPUT_COEFF_FLOOR:
        raise DivisionGuardError(f"{u_fit.f0:.6g} Hz 处输入基波系数为零，无法计算频响")
    return fourier_coeff(y_fit) / (c_u * p)
