#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
步进正弦频响辨识
逐个频率激励电机角，等待稳态后对最后一段记录做谐波拟合，得到 FRF 点
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from common.errors import InstabilityError, ParameterError
from common.lti import realize_discrete, ss_simulate
from common.nonlinearities import play_clamp
from plants.transmission import LumpedParams, build_g2
from .harmonic_fit import frf_point, harmonic_fit

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FrfDataset:
    """
    频响数据集

    Parameters:
        freqs: 频率（Hz），严格递增且为正
        response: 复数频响
        amplitude: 激励幅值（弧度）
        settle_s: 每个频率的稳定时长（秒）
        record_s: 每个频率的记录时长（秒）
    """
    freqs: np.ndarray
    response: np.ndarray
    amplitude: float = float('nan')
    settle_s: float = float('nan')
    record_s: float = float('nan')

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).ravel()
        response = np.asarray(self.response, dtype=complex).ravel()
        if freqs.size != response.size:
            raise ParameterError(f"频率与频响长度不一致: {freqs.size} vs {response.size}")
        if freqs.size and (freqs[0] <= 0 or np.any(np.diff(freqs) <= 0)):
            raise ParameterError("频率必须为正且严格递增")
        object.__setattr__(self, 'freqs', freqs)
        object.__setattr__(self, 'response', response)

    @property
    def magnitude(self):
        return np.abs(self.response)

    @property
    def phase_deg(self):
        return np.rad2deg(np.unwrap(np.angle(self.response)))

    def to_frame(self):
        return pd.DataFrame({'freq_hz': self.freqs, 're': self.response.real, 'im': self.response.imag})

    def to_csv(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    @classmethod
    def from_csv(cls, path, **metadata):
        if not os.path.exists(path):
            raise FileNotFoundError(f"找不到频响文件: {path}")
        df = pd.read_csv(path)
        return cls(df['freq_hz'].to_numpy(), df['re'].to_numpy() + 1j * df['im'].to_numpy(), **metadata)


@dataclass(frozen=True, eq=False)
class LinearTfSystem:
    """把连续传递函数包装成可仿真系统，输入直接进入 g，pitch 为 1"""
    g: object
    pitch: float = 1.0

    def respond(self, u, dt):
        y, _ = ss_simulate(realize_discrete(self.g, dt), u)
        return y


@dataclass(frozen=True, eq=False)
class TransmissionSystem:
    """
    电机角 → 齿隙 → 丝杠 → G2 → 顶平台位移

    Parameters:
        params: LumpedParams
        gap: 齿隙半宽（弧度），0 表示无齿隙
    """
    params: LumpedParams = field(default_factory=LumpedParams)
    gap: float = 0.0

    @property
    def pitch(self):
        return self.params.p

    def respond(self, theta_m, dt):
        theta_d = np.asarray(theta_m, dtype=float)
        if self.gap > 0:
            theta_d = np.empty_like(theta_d)
            held = 0.0
            for i, value in enumerate(theta_m):
                held = play_clamp(held, value, self.gap)
                theta_d[i] = held
        y, _ = ss_simulate(realize_discrete(build_g2(self.params), dt), self.params.p * theta_d)
        return y


def excitation(freq, amp, duration, dt, ramp_s=2.0):
    """
    正弦激励

    返回:
    - tuple: (t, u_drive, u_measured)，u_drive 取采样区间中点值，使零阶保持后的基波相位与 u_measured 对齐；
      前 ramp_s 秒用升余弦包络平滑起振
    """
    n = int(round(duration / dt))
    t = np.arange(n) * dt
    mid = t + 0.5 * dt
    envelope = np.where(mid < ramp_s, 0.5 * (1.0 - np.cos(np.pi * mid / max(ramp_s, dt))), 1.0)
    u_drive = amp * envelope * np.sin(2.0 * np.pi * freq * mid)
    u_measured = amp * np.sin(2.0 * np.pi * freq * t)
    return t, u_drive, u_measured


def measure_frequency(system, freq, amp, settle_s=20.0, record_s=10.0, dt=1e-4, n_harmonics=3, guard=1.0):
    """
    单个频率的仿真和谐波拟合

    返回:
    - complex: FRF 点
    """
    t, u_drive, u_measured = excitation(freq, amp, settle_s + record_s, dt)
    y = system.respond(u_drive, dt)
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > guard:
        raise InstabilityError(freq)
    window = t >= settle_s
    u_fit = harmonic_fit(u_measured[window], t[window], freq, n_harmonics)
    y_fit = harmonic_fit(y[window], t[window], freq, n_harmonics)
    return frf_point(u_fit, y_fit, system.pitch)


def stepped_sine_frf(system, freqs, amp=0.5, settle_s=20.0, record_s=10.0, dt=1e-4,
                     n_harmonics=3, guard=1.0, max_workers=1):
    """
    步进正弦 FRF

    参数:
    - system: 带 respond(u, dt) 和 pitch 的可仿真系统
    - freqs: 频率列表（Hz）
    - amp: float, 电机角激励幅值（弧度）
    - settle_s, record_s: float, 稳定时长和记录时长（秒）
    - dt: float, 仿真步长
    - n_harmonics: int, 拟合谐波个数
    - guard: float, 输出发散界限（米）
    - max_workers: int, 大于 1 时按频率并行

    返回:
    - FrfDataset
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0):
        raise ParameterError("频率列表必须非空且为正")
    if np.any(np.diff(freqs) <= 0):
        raise ParameterError(f"频率列表必须严格递增，不能有重复: {freqs.tolist()}")
    kwargs = dict(settle_s=settle_s, record_s=record_s, dt=dt, n_harmonics=n_harmonics, guard=guard)
    response = np.empty(freqs.size, dtype=complex)

    if max_workers <= 1:
        for i, f in enumerate(tqdm(freqs, desc="步进正弦", disable=freqs.size < 2)):
            response[i] = measure_frequency(system, f, amp, **kwargs)
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(measure_frequency, system, f, amp, **kwargs): i
                       for i, f in enumerate(freqs)}
            for future in tqdm(as_completed(futures), total=len(futures), desc="步进正弦"):
                response[futures[future]] = future.result()

    logger.info(f"步进正弦完成: {freqs.size} 个频率, {freqs[0]:.3g}-{freqs[-1]:.3g} Hz")
    return FrfDataset(freqs, response, amp, settle_s, record_s)
