#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
仿真记录指标
调节时间、超调、残余振动衰减拟合、正弦跟踪基波相位、控制信号峰值和 L2 范数、电机角漂移
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from common.errors import BacklashImcError, ConditioningError
from identification.decay_fit import DecayFit, dominant_frequency, fit_decay
from identification.harmonic_fit import fourier_coeff, harmonic_fit

logger = logging.getLogger(__name__)

SETTLING_BAND = 0.02
DRIFT_WINDOW_S = 5.0


@dataclass(frozen=True)
class TraceMetrics:
    """
    单次仿真的指标

    Parameters:
        settling_time_2pct: 最后一次指令跳变后进入 ±2% 带的时间（秒）
        settled: 记录结束前是否进入并保持在带内
        overshoot_pct: 相对阶跃量的超调（%）
        residual: 残余振动拟合，失败时为 None
        residual_error: 拟合失败原因
        control_peak: max|u|
        control_l2: sqrt(dt·Σu²)
        fundamental_phase_deg: 正弦指令下输出相对指令的基波相位（度）
        motor_drift: 最后 5 秒电机角峰峰值（弧度）
    """
    settling_time_2pct: float
    settled: bool
    overshoot_pct: float
    residual: Optional[DecayFit]
    residual_error: str
    control_peak: float
    control_l2: float
    fundamental_phase_deg: float
    motor_drift: float

    def to_dict(self):
        """扁平字典，残余振动拟合字段直接展开"""
        out = {k: v for k, v in asdict(self).items() if k != 'residual'}
        fit = self.residual
        for name in ('A_res', 'f_r', 'zeta_r', 'phi', 'r_squared', 'offset'):
            out[name] = getattr(fit, name) if fit is not None else float('nan')
        out['residual_degenerate'] = bool(fit.degenerate) if fit is not None else False
        return out


def _last_step(r):
    changes = np.flatnonzero(np.diff(r) != 0)
    start = int(changes[-1]) + 1 if changes.size else 0
    r_prev = float(r[start - 1]) if start > 0 else 0.0
    return start, r_prev, float(r[-1])


def step_metrics(t, y, r, band=SETTLING_BAND):
    """
    最后一次指令跳变的调节时间和超调

    返回:
    - tuple: (settling_time, settled, overshoot_pct)
    """
    start, r_prev, r_final = _last_step(r)
    step = r_final - r_prev
    if step == 0.0:
        return float('nan'), False, float('nan')
    seg_t, seg_y = t[start:], y[start:]
    outside = np.flatnonzero(np.abs(seg_y - r_final) > band * abs(step))
    if outside.size == 0:
        settling, settled = 0.0, True
    elif outside[-1] + 1 < seg_t.size:
        settling, settled = float(seg_t[outside[-1] + 1] - seg_t[0]), True
    else:
        settling, settled = float('nan'), False
    overshoot = max(0.0, float(np.max((seg_y - r_final) * np.sign(step))) / abs(step) * 100.0)
    return settling, settled, overshoot


def _cycle_windows(t, freq, t_start):
    """
    整周期窗口的样本下标区间 [i0, i1)

    每个窗口 round(1/(f·dt)) 个样本，周期不是 dt 整数倍时窗口长度与周期相差不到半个样本
    """
    dt = float(np.median(np.diff(t)))
    n = int(round(1.0 / (freq * dt)))
    period = 1.0 / freq
    first = np.ceil((t_start - t[0]) / period - 1e-9) * period + t[0]
    i0 = int(np.searchsorted(t, first - 0.5 * dt))
    return [(i, i + n) for i in range(i0, t.size - n + 1, n)]


def per_cycle_phase_deg(t, y, r, freq, t_start=0.0):
    """每个完整指令周期内输出相对指令的基波相位（度，滞后为负）"""
    phases = []
    for i0, i1 in _cycle_windows(t, freq, t_start):
        c_r = fourier_coeff(harmonic_fit(r[i0:i1], t[i0:i1], freq, 1))
        c_y = fourier_coeff(harmonic_fit(y[i0:i1], t[i0:i1], freq, 1))
        phases.append(np.rad2deg(np.angle(c_y / c_r)))
    return np.asarray(phases)


def per_cycle_control_peak(t, u, freq, t_start=0.0):
    """每个完整指令周期内 max|u|"""
    return np.asarray([np.max(np.abs(u[i0:i1])) for i0, i1 in _cycle_windows(t, freq, t_start)])


def fundamental_phase_deg(t, y, r, freq, t_start=0.0):
    """t_start 之后整周期记录上的基波相位（度）"""
    cycles = _cycle_windows(t, freq, t_start)
    if not cycles:
        return float('nan')
    sel = slice(cycles[0][0], cycles[-1][1])
    c_r = fourier_coeff(harmonic_fit(r[sel], t[sel], freq, 3))
    c_y = fourier_coeff(harmonic_fit(y[sel], t[sel], freq, 3))
    return float(np.rad2deg(np.angle(c_y / c_r)))


def compute_metrics(trace, t_s=None, fit_offset=False):
    """
    计算单次仿真指标，残余振动拟合失败只记录不抛出

    参数:
    - trace: SimTrace
    - t_s: float, 衰减拟合起点，默认最后一次指令跳变后 2 秒
    - fit_offset: bool, 衰减拟合是否带常值偏置

    返回:
    - TraceMetrics
    """
    t, y, r, u = trace.t, trace.y, trace.r, trace.u
    dt = float(t[1] - t[0]) if t.size > 1 else 0.0
    command = getattr(trace, 'command', None)
    is_sine = command is not None and command.kind == 'sine'

    if is_sine:
        settling, settled, overshoot = float('nan'), False, float('nan')
    else:
        settling, settled, overshoot = step_metrics(t, y, r)

    if t_s is None:
        start, _, _ = _last_step(r)
        t_s = float(t[start]) + 2.0

    residual, residual_error = None, ''
    try:
        residual = fit_decay(y - r, t, t_s, fit_offset=fit_offset)
    except (BacklashImcError, ValueError) as exc:
        residual_error = str(exc)
        logger.warning(f"残余振动拟合失败: {exc}")

    phase = float('nan')
    if is_sine:
        try:
            phase = fundamental_phase_deg(t, y, r, command.freq, t_start=min(t_s, t[-1]))
        except ConditioningError as exc:
            logger.warning(f"基波相位计算失败: {exc}")

    drift_window = t >= t[-1] - DRIFT_WINDOW_S
    return TraceMetrics(
        settling_time_2pct=settling,
        settled=settled,
        overshoot_pct=overshoot,
        residual=residual,
        residual_error=residual_error,
        control_peak=float(np.max(np.abs(u))) if u.size else 0.0,
        control_l2=float(np.sqrt(dt * np.sum(u ** 2))),
        fundamental_phase_deg=phase,
        motor_drift=float(np.ptp(trace.theta_m[drift_window])),
    )


def oscillation_summary(t, y, t_start):
    """
    持续振荡的主频和一次谐波幅值

    返回:
    - tuple: (频率 Hz, 一次谐波幅值)
    """
    win = t >= t_start
    dt = float(t[1] - t[0])
    freq = dominant_frequency(y[win], dt)
    cycles = _cycle_windows(t, freq, t_start)
    sel = slice(cycles[0][0], cycles[-1][1])
    fit = harmonic_fit(y[sel], t[sel], freq, 3)
    return freq, 2.0 * abs(fourier_coeff(fit))
