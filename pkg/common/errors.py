#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
异常定义
工具包内所有模块抛出的异常都继承自 BacklashImcError，
输入类错误同时继承 ValueError，便于调用方按需捕获
"""


class BacklashImcError(Exception):
    """工具包异常基类"""


class DegenerateInputError(BacklashImcError, ValueError):
    """退化输入（例如零多项式）"""


class NotOscillatoryError(BacklashImcError, ValueError):
    """实根无法换算为振动模态"""


class PoleProximityError(BacklashImcError, ArithmeticError):
    """在极点附近求值"""

    def __init__(self, frequency_hz, message=None):
        self.frequency_hz = frequency_hz
        super().__init__(message or f"在 {frequency_hz:.6g} Hz 处分母趋于零（靠近极点）")


class CompositionError(BacklashImcError, ValueError):
    """传递函数连接时域或采样时间不一致"""


class DomainError(BacklashImcError, ValueError):
    """连续/离散域误用，或参数超出定义域"""


class ProperError(BacklashImcError, ValueError):
    """传递函数非真（分子阶次高于分母）"""


class ShapeError(BacklashImcError, ValueError):
    """矩阵/向量维度不匹配"""


class ParameterError(BacklashImcError, ValueError):
    """物理参数非法"""


class DesignError(BacklashImcError, ValueError):
    """控制器设计失败，zeros 为导致失败的零点"""

    def __init__(self, message, zeros=()):
        self.zeros = list(zeros)
        super().__init__(message)


class PoleExcessError(DesignError):
    """参考模型的相对阶不足，预滤波器非真"""


class DegenerateDesignError(BacklashImcError, ValueError):
    """开环传递函数分母恒为零"""


class StabilityError(BacklashImcError):
    """闭环或因子不稳定，poles 为不稳定极点列表"""

    def __init__(self, message, poles=()):
        self.poles = list(poles)
        super().__init__(message)


class ConditioningError(BacklashImcError, ValueError):
    """最小二乘系统秩亏，harmonic 为出问题的谐波/系数序号"""

    def __init__(self, message, harmonic=None):
        self.harmonic = harmonic
        super().__init__(message)


class DivisionGuardError(BacklashImcError, ZeroDivisionError):
    """输入傅里叶系数过小，无法做比值"""


class FitFailureError(BacklashImcError):
    """非线性拟合未收敛"""

    def __init__(self, message, last_iterate=None, cost_trace=()):
        self.last_iterate = last_iterate
        self.cost_trace = list(cost_trace)
        super().__init__(message)


class InstabilityError(BacklashImcError):
    """扫频仿真发散"""

    def __init__(self, frequency_hz, message=None):
        self.frequency_hz = frequency_hz
        super().__init__(message or f"扫频仿真在 {frequency_hz:.6g} Hz 处发散")


class SimulationDivergenceError(BacklashImcError):
    """闭环仿真超出保护界限，trace 为截断后的记录"""

    def __init__(self, time_s, trace=None, message=None):
        self.time_s = time_s
        self.trace = trace
        super().__init__(message or f"仿真在 t = {time_s:.4f} s 处发散")


class ConfigError(BacklashImcError, ValueError):
    """配置文件校验失败，problems 为全部问题列表"""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("配置校验失败:\n- " + "\n- ".join(self.problems))
