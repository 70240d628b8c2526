#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
集中参数拟合
在对数参数空间里用 Levenberg-Marquardt 最小化 Σ(ln|G_model| - ln|G_meas|)²，
相位只用于校验
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from common.errors import BacklashImcError, FitFailureError, ParameterError
from common.lti import freq_response
from plants.transmission import LumpedParams, build_g2

logger = logging.getLogger(__name__)

FIT_NAMES = ('m', 'm_m', 'c', 'k')
INVALID_RESIDUAL = 1e3


@dataclass(frozen=True)
class LumpedFitResult:
    """
    拟合结果

    Parameters:
        params: 拟合得到的 LumpedParams
        cost: 最终代价 Σ 残差²
        iterations: 残差函数调用次数
        cost_trace: 每次残差计算的代价
        phase_rms_deg: 模型与测量相位差的均方根（度）
    """
    params: LumpedParams
    cost: float
    iterations: int
    cost_trace: tuple
    phase_rms_deg: float


def _with_values(base, names, log_values):
    return replace(base, **{name: float(np.exp(v)) for name, v in zip(names, log_values)})


def log_magnitude_residual(params, frf):
    """ln|G2_model(f)| - ln|G_meas(f)|"""
    model = freq_response(build_g2(params), frf.freqs)
    return np.log(np.abs(model)) - np.log(np.abs(frf.response))


def _safe_residual(base, names, theta, frf):
    try:
        r = log_magnitude_residual(_with_values(base, names, theta), frf)
    except (BacklashImcError, OverflowError, FloatingPointError):
        return None
    return r if np.all(np.isfinite(r)) else None


def phase_rms_deg(params, frf):
    """模型与测量的相位差均方根（度），差值折叠到 (-180, 180]"""
    model = freq_response(build_g2(params), frf.freqs)
    diff = np.angle(model / frf.response, deg=True)
    return float(np.sqrt(np.mean(diff ** 2)))


def fit_lumped_params(frf, init, fixed=('m_m',), max_nfev=2000, xtol=1e-12, ftol=1e-14, min_points=8):
    """
    拟合 (m, m_m, c, k)

    G2 对 (m, m_m, c, k) 的整体缩放不变，因此默认固定 m_m。
    在对数参数上调用 scipy 的 Levenberg-Marquardt（MINPACK lmdif），参数始终为正

    参数:
    - frf: FrfDataset
    - init: LumpedParams, 初值（p 不参与拟合）
    - fixed: 保持初值不变的参数名
    - max_nfev: int, 残差函数最大调用次数
    - xtol, ftol: float, 参数和代价的相对收敛阈值

    返回:
    - LumpedFitResult
    """
    if frf.freqs.size < min_points:
        raise ParameterError(f"集中参数拟合至少需要 {min_points} 个频率点，实际 {frf.freqs.size}")
    unknown = set(fixed) - set(FIT_NAMES)
    if unknown:
        raise ParameterError(f"未知的固定参数: {sorted(unknown)}")
    names = tuple(n for n in FIT_NAMES if n not in fixed)
    zero = [n for n in names if getattr(init, n) <= 0.0]
    if zero:
        raise ParameterError(f"被拟合参数的初值必须为正: {zero}")
    theta0 = np.log([getattr(init, n) for n in names])

    r0 = _safe_residual(init, names, theta0, frf)
    if r0 is None:
        raise FitFailureError("初值下模型无效", last_iterate=init)
    trace = []

    def residual(theta):
        r = _safe_residual(init, names, theta, frf)
        if r is None:
            r = np.full(r0.size, INVALID_RESIDUAL)
        trace.append(float(r @ r))
        return r

    result = least_squares(residual, theta0, method='lm', xtol=xtol, ftol=ftol, gtol=1e-15, max_nfev=max_nfev)
    params = _with_values(init, names, result.x)
    if not result.success:
        raise FitFailureError(f"集中参数拟合未收敛: {result.message}", last_iterate=params, cost_trace=trace)

    cost = float(result.fun @ result.fun)
    fit = LumpedFitResult(params, cost, int(result.nfev), tuple(trace), phase_rms_deg(params, frf))
    logger.info(f"集中参数拟合收敛: {fit.iterations} 次残差计算, cost={cost:.3e}, 相位 RMS {fit.phase_rms_deg:.2f}°")
    return fit
