#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
虚拟直流电机与步进电机积分器
"""

from dataclasses import dataclass

from common.errors import ParameterError
from common.lti import tf, tf_connect


@dataclass(frozen=True)
class VirtualMotorParams:
    """
    虚拟直流电机参数

    Parameters:
        J_v: 转动惯量（kg·m²）
        L: 电感（H）
        R: 电阻（Ω）
        k_t: 转矩常数（N·m/A）
        k_b: 反电动势常数（V·s/rad）
    """
    J_v: float = 5e-6
    L: float = 0.01
    R: float = 44.72
    k_t: float = 0.5
    k_b: float = 0.5

    def __post_init__(self):
        bad = [name for name in ('J_v', 'L', 'R', 'k_t', 'k_b') if not getattr(self, name) > 0]
        if bad:
            raise ParameterError(f"电机参数必须为正: {', '.join(bad)}")


def build_virtual_motor(vp):
    """电压到角速度: k_t/(J_v L s² + J_v R s + k_b k_t)"""
    return tf([vp.k_t], [vp.k_b * vp.k_t, vp.J_v * vp.R, vp.J_v * vp.L])


def stepper_integrator(K_m):
    """步进电机视为带增益的纯积分 K_m/s"""
    if not K_m > 0:
        raise ParameterError(f"步进积分增益必须为正: {K_m}")
    return tf([K_m], [0.0, 1.0])


def build_motor_chain(vp, K_m=1.0):
    """
    电压到电机角的三阶链 Ĝ1 = G_v·K_m/s

    参数:
    - vp: VirtualMotorParams, 为 None 时只保留积分器
    - K_m: float, 步进积分增益（rad/s 每单位）

    返回:
    - RationalTF
    """
    integrator = stepper_integrator(K_m)
    if vp is None:
        return integrator
    return tf_connect(build_virtual_motor(vp), integrator, 'series')
