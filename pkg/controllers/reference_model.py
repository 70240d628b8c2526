#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
参考模型
G_r = (1/((τ_r/τ_0)s + 1))²，τ_r 控制调节时间
"""

from dataclasses import dataclass

import numpy as np

from common.errors import ParameterError
from common.lti import tf

# 归一化参数，使 τ_r 对应 2% 调节时间
TAU_0 = 6.6385


@dataclass(frozen=True)
class ReferenceModel:
    """调节时间参数 τ_r（秒）与归一化参数 τ_0"""
    tau_r: float = 1.1379
    tau_0: float = TAU_0

    def __post_init__(self):
        if not self.tau_r > 0 or not self.tau_0 > 0:
            raise ParameterError(f"τ_r 和 τ_0 必须为正: τ_r={self.tau_r}, τ_0={self.tau_0}")

    @property
    def pole(self):
        """双重实极点的模值 τ_0/τ_r（rad/s）"""
        return self.tau_0 / self.tau_r


def reference_model_tf(rm):
    """双重极点 -τ_0/τ_r，直流增益为 1"""
    a = rm.pole
    return tf([a * a], [a * a, 2.0 * a, 1.0])


def bandwidth_hz(rm):
    """-3 dB 带宽 f_b = τ_0·sqrt(sqrt(2) - 1)/(2π τ_r)"""
    return rm.tau_0 * np.sqrt(np.sqrt(2.0) - 1.0) / (2.0 * np.pi * rm.tau_r)
