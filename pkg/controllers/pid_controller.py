#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
带微分滤波的并联 PID 控制器
"""

from dataclasses import dataclass

from common.errors import ParameterError
from common.lti import DiscreteBlock, realize_discrete, tf


@dataclass(frozen=True)
class PidParams:
    """
    PID 参数

    Parameters:
        Kp, Ki, Kd: 比例/积分/微分增益
        Tf: 微分滤波时间常数（秒）
        error_scale: 跟踪误差换算系数，默认把米换成毫米
    """
    Kp: float = 1.59
    Ki: float = 1.01
    Kd: float = -0.56
    Tf: float = 0.35
    error_scale: float = 1e3

    def __post_init__(self):
        if self.Kd != 0 and not self.Tf > 0:
            raise ParameterError(f"Kd 非零时 Tf 必须为正: Tf={self.Tf}")
        if not self.error_scale > 0:
            raise ParameterError(f"误差换算系数必须为正: {self.error_scale}")


def pid_tf(p):
    """
    Kp + Ki/s + Kd·s/(Tf·s + 1) 合并为一个有理传递函数

    Kd = 0 时退化为 PI: (Kp·s + Ki)/s
    """
    if p.Kd == 0:
        return tf([p.Ki, p.Kp], [0.0, 1.0])
    num = [p.Ki, p.Kp + p.Ki * p.Tf, p.Kp * p.Tf + p.Kd]
    den = [0.0, 1.0, p.Tf]
    return tf(num, den)


class DiscretePid(DiscreteBlock):
    """按控制周期零阶保持离散化的 PID，输入为以米计的跟踪误差"""

    def __init__(self, params, dt):
        super().__init__(realize_discrete(pid_tf(params), dt))
        self.params = params

    def update(self, error_m):
        return self.step(error_m * self.params.error_scale)
