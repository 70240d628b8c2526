#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
单位换算工具
配置文件边界使用 度/毫米/N/mm，内部统一使用国际单位制
"""

import numpy as np


def deg_to_rad(value):
    """角度转弧度，支持标量和数组"""
    return np.deg2rad(value)


def rad_to_deg(value):
    """弧度转角度，支持标量和数组"""
    return np.rad2deg(value)


def mm_to_m(value):
    return value * 1e-3


def m_to_mm(value):
    return value * 1e3


def n_per_mm_to_n_per_m(value):
    """刚度 N/mm 转 N/m（43.57 N/mm -> 43570 N/m）"""
    return float(value) * 1e3


def n_s_per_mm_to_n_s_per_m(value):
    """阻尼 N·s/mm 转 N·s/m（0.012 N·s/mm -> 12 N·s/m）"""
    return float(value) * 1e3


def pitch_mm_per_rev_to_m_per_rad(value):
    """
    丝杠导程换算

    参数:
    - value: float, 每转导程（毫米）

    返回:
    - float: 每弧度位移（米）
    """
    return float(value) * 1e-3 / (2.0 * np.pi)
