#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
有理传递函数频响拟合（Levy 线性最小二乘）
B(s) - G·(A(s) - s^n) = G·s^n，分母首一，在 σ = s/ω_max 下求解以改善条件数
"""

import logging

import numpy as np
from scipy.linalg import qr, solve_triangular

from common.errors import ConditioningError, ParameterError
from common.lti import Polynomial, RationalTF

logger = logging.getLogger(__name__)


def fit_rational_frf(frf, n_poles=4, n_zeros=3, weights=None):
    """
    Levy 法拟合 n_poles 极点 / n_zeros 零点模型，不施加稳定性或最小相位约束

    参数:
    - frf: FrfDataset
    - n_poles: int, 分母阶次
    - n_zeros: int, 分子阶次，必须小于 n_poles
    - weights: 每个频率点的权重，默认全 1

    返回:
    - RationalTF
    """
    if n_zeros >= n_poles:
        raise ParameterError(f"要求严格真模型: n_zeros={n_zeros} 必须小于 n_poles={n_poles}")
    freqs = frf.freqs
    if freqs.size < n_poles + n_zeros + 1:
        raise ParameterError(f"频率点数 {freqs.size} 少于 {n_poles + n_zeros + 1}")

    w_max = 2.0 * np.pi * freqs.max()
    sigma = 1j * 2.0 * np.pi * freqs / w_max
    G = frf.response
    wts = np.ones(freqs.size) if weights is None else np.asarray(weights, dtype=float)

    # 未知数 [b_0..b_m, a_0..a_{n-1}]
    num_cols = sigma[:, None] ** np.arange(n_zeros + 1)
    den_cols = -G[:, None] * sigma[:, None] ** np.arange(n_poles)
    A_c = np.hstack([num_cols, den_cols]) * wts[:, None]
    rhs_c = G * sigma ** n_poles * wts
    A = np.vstack([A_c.real, A_c.imag])
    rhs = np.concatenate([rhs_c.real, rhs_c.imag])

    Q, R = qr(A, mode='economic')
    diag = np.abs(np.diag(R))
    weak = np.flatnonzero(diag < 1e-12 * diag.max())
    if weak.size:
        raise ConditioningError(f"Levy 方程秩亏（第 {int(weak[0])} 个系数）", harmonic=int(weak[0]))
    x = solve_triangular(R, Q.T @ rhs)

    # σ 域系数换回 s 域，并保持分母首一
    b_sigma = x[: n_zeros + 1]
    a_sigma = np.concatenate([x[n_zeros + 1:], [1.0]])
    num = b_sigma * w_max ** (n_poles - np.arange(n_zeros + 1))
    den = a_sigma * w_max ** (n_poles - np.arange(n_poles + 1))
    g = RationalTF(Polynomial(num), Polynomial(den))

    rhp = [z for z in g.zeros() if z.real > 0]
    if rhp:
        logger.warning(f"拟合模型含右半平面零点: {[complex(round(z.real, 4), round(z.imag, 4)) for z in rhp]}")
    logger.info(f"有理模型拟合完成: {n_poles} 极点 / {n_zeros} 零点, {freqs.size} 个频率点")
    return g
