#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
鲁棒性指标
互补灵敏度 T_0 = G_r·G_θ、乘性不确定性 Δ = G2/Ĝ2 - 1、小增益鲁棒稳定裕度和灵敏度 |S|
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from common.errors import DegenerateInputError, ParameterError, PoleProximityError, StabilityError
from common.lti import freq_response, tf_connect

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UncertaintyBound:
    """
    频率采样的不确定性半径 |Δ(f)|

    Parameters:
        freqs: 频率（Hz）
        radii: 非负半径
    """
    freqs: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).ravel()
        radii = np.asarray(self.radii, dtype=float).ravel()
        if freqs.shape != radii.shape:
            raise ParameterError(f"频率与半径长度不一致: {freqs.size} vs {radii.size}")
        if np.any(radii < 0):
            raise ParameterError("不确定性半径不能为负")
        object.__setattr__(self, 'freqs', freqs)
        object.__setattr__(self, 'radii', radii)


def complementary_sensitivity(Gr, G_theta):
    """T_0 = G_r·G_θ，两个因子都必须稳定"""
    for name, g in (('G_r', Gr), ('G_θ', G_theta)):
        if not g.is_stable():
            raise StabilityError(f"{name} 不稳定", poles=g.poles())
    return tf_connect(Gr, G_theta, 'series')


def delta_from_plants(G2_alt, G2_hat, freqs):
    """乘性不确定性 Δ(f) = G2_alt(f)/Ĝ2(f) - 1"""
    return freq_response(G2_alt, freqs) / freq_response(G2_hat, freqs) - 1.0


def uncertainty_from_plants(G2_alt, G2_hat, freqs):
    """由两个对象模型构造 UncertaintyBound"""
    freqs = np.asarray(freqs, dtype=float)
    return UncertaintyBound(freqs, np.abs(delta_from_plants(G2_alt, G2_hat, freqs)))


def robust_stability_margin(T0, ub):
    """
    小增益条件 |T_0|·|Δ| < 1 的裕度

    参数:
    - T0: RationalTF
    - ub: UncertaintyBound

    返回:
    - tuple: (margin, worst_f)，margin = min 1/(|T_0|·|Δ|)，|Δ| 恒为零时返回 (inf, nan)
    """
    if ub.freqs.size == 0:
        raise DegenerateInputError("不确定性界为空")
    product = np.abs(freq_response(T0, ub.freqs)) * ub.radii
    if not np.any(product > 0):
        return float('inf'), float('nan')
    worst = int(np.argmax(product))
    return float(1.0 / product[worst]), float(ub.freqs[worst])


def sensitivity_magnitude(Gr, G_theta, G_theta_hat, freqs, delta=None):
    """
    |S| = |(1 - G_rG_θ)/(1 + G_rĜ_θΔ)|

    参数:
    - delta: 每个频率的复数 Δ，None 表示名义情况

    返回:
    - np.ndarray
    """
    freqs = np.asarray(freqs, dtype=float)
    gr = freq_response(Gr, freqs)
    num = 1.0 - gr * freq_response(G_theta, freqs)
    if delta is None:
        return np.abs(num)
    den = 1.0 + gr * freq_response(G_theta_hat, freqs) * np.asarray(delta, dtype=complex)
    singular = np.abs(den) < 1e-12
    if np.any(singular):
        raise PoleProximityError(float(freqs[singular][0]), "灵敏度分母在该频率处为零")
    return np.abs(num / den)


def frequency_table(Gr, G_theta, freqs, G_theta_hat=None, delta=None):
    """
    T_0 与 S 的幅值表

    返回:
    - pd.DataFrame: freq_hz, T0_mag, S_mag，给出 delta 时追加 delta_mag, S_perturbed_mag
    """
    freqs = np.asarray(freqs, dtype=float)
    T0 = complementary_sensitivity(Gr, G_theta)
    table = pd.DataFrame({
        'freq_hz': freqs,
        'T0_mag': np.abs(freq_response(T0, freqs)),
        'S_mag': sensitivity_magnitude(Gr, G_theta, G_theta_hat, freqs),
    })
    if delta is not None:
        g_hat = G_theta if G_theta_hat is None else G_theta_hat
        table['delta_mag'] = np.abs(delta)
        table['S_perturbed_mag'] = sensitivity_magnitude(Gr, G_theta, g_hat, freqs, delta)
    return table
