#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
测试仿真记录指标和结果文件读写
"""

import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

# 添加项目根目录到系统路径
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from analysis import ReportGenerator, compute_metrics, per_cycle_control_peak, per_cycle_phase_deg, to_jsonable
from analysis.trace_metrics import oscillation_summary, step_metrics
from identification import decay_model
from simulation_engine import CommandSpec, SimTrace

AMP = 1e-3


def _trace(t, r, y, u=None, theta_m=None, command=None):
    zeros = np.zeros_like(t)
    return SimTrace(t, r, y, zeros, zeros, zeros if u is None else u, zeros if theta_m is None else theta_m,
                    zeros, zeros, command=command, architecture='imc_linear')


def test_step_metrics_first_order():
    tau = 0.5
    t = np.arange(0, 10.0, 1e-3)
    r = np.full_like(t, AMP)
    y = AMP * (1 - np.exp(-t / tau))
    settling, settled, overshoot = step_metrics(t, y, r)
    assert settled
    assert settling == pytest.approx(tau * np.log(50.0), abs=2e-3)
    assert overshoot == 0.0


def test_step_metrics_second_order_overshoot():
    zeta, wn = 0.5, 2 * np.pi
    t = np.arange(0, 10.0, 1e-4)
    wd = wn * np.sqrt(1 - zeta ** 2)
    y = AMP * (1 - np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta / np.sqrt(1 - zeta ** 2) * np.sin(wd * t)))
    _, _, overshoot = step_metrics(t, y, np.full_like(t, AMP))
    assert overshoot == pytest.approx(100 * np.exp(-np.pi * zeta / np.sqrt(1 - zeta ** 2)), rel=1e-3)


def test_step_metrics_uses_last_transition():
    t = np.arange(0, 20.0, 1e-3)
    r = np.where(t < 10.0, AMP, -AMP)
    y = r.copy()
    settling, settled, overshoot = step_metrics(t, y, r)
    assert settled and settling == 0.0 and overshoot == 0.0


def test_step_metrics_never_settles():
    t = np.arange(0, 5.0, 1e-3)
    r = np.full_like(t, AMP)
    settling, settled, _ = step_metrics(t, 0.5 * r, r)
    assert not settled and np.isnan(settling)


def test_compute_metrics_residual_vibration():
    t = np.arange(0, 20.0, 1e-3)
    r = np.full_like(t, AMP)
    y = r + decay_model(t, 2e-5, 4.4, 0.004, 0.3, 1.0)
    u = np.sin(t)
    metrics = compute_metrics(_trace(t, r, y, u=u), t_s=1.0)
    assert metrics.residual is not None
    assert metrics.residual.A_res == pytest.approx(2e-5, rel=1e-3)
    assert metrics.residual.f_r == pytest.approx(4.4, rel=1e-4)
    assert metrics.control_peak == pytest.approx(1.0, abs=1e-6)
    assert metrics.control_l2 == pytest.approx(np.sqrt(1e-3 * np.sum(u ** 2)))
    flat = metrics.to_dict()
    assert flat['A_res'] == metrics.residual.A_res
    assert not flat['residual_degenerate']
    assert 'residual' not in flat


def test_compute_metrics_records_fit_failure():
    t = np.arange(0, 3.0, 1e-3)
    r = np.full_like(t, AMP)
    metrics = compute_metrics(_trace(t, r, r.copy()), t_s=10.0)
    assert metrics.residual is None
    assert metrics.residual_error
    assert np.isnan(metrics.to_dict()['A_res'])


def test_motor_drift_uses_last_window():
    t = np.arange(0, 20.0, 1e-3)
    theta_m = np.where(t < 10.0, 5.0 * t, 50.0) + np.where(t > 16.0, 0.1, 0.0)
    r = np.full_like(t, AMP)
    metrics = compute_metrics(_trace(t, r, r.copy(), theta_m=theta_m), t_s=1.0)
    assert metrics.motor_drift == pytest.approx(0.1)


def test_sine_phase_metrics():
    freq = 0.5
    t = np.arange(0, 10.0, 1e-3)
    r = AMP * np.sin(2 * np.pi * freq * t)
    y = 0.9 * AMP * np.sin(2 * np.pi * freq * t - np.deg2rad(30.0))
    phases = per_cycle_phase_deg(t, y, r, freq)
    assert phases.size == 5
    assert np.allclose(phases, -30.0, atol=1e-6)
    metrics = compute_metrics(_trace(t, r, y, command=CommandSpec('sine', amp=AMP, freq=freq)), t_s=2.0)
    assert metrics.fundamental_phase_deg == pytest.approx(-30.0, abs=1e-6)
    assert np.isnan(metrics.settling_time_2pct)


def test_per_cycle_phase_when_period_is_not_whole_samples():
    # 0.03 Hz 周期 33.333... s，不是 1e-4 s 的整数倍
    freq = 0.03
    t = np.arange(0, 100.0, 1e-4)
    r = np.sin(2 * np.pi * freq * t)
    y = np.sin(2 * np.pi * freq * t - 0.1)
    phases = per_cycle_phase_deg(t, y, r, freq)
    assert phases.size == 3
    assert np.allclose(phases, np.rad2deg(-0.1), atol=1e-6)
    peaks = per_cycle_control_peak(t, r, freq)
    assert peaks == pytest.approx([1.0, 1.0, 1.0], rel=1e-6)


def test_per_cycle_control_peak():
    t = np.arange(0, 4.0, 1e-3)
    u = np.sin(2 * np.pi * t) * (1 + np.floor(t))
    peaks = per_cycle_control_peak(t, u, 1.0)
    assert peaks == pytest.approx([1.0, 2.0, 3.0, 4.0], rel=1e-5)


def test_oscillation_summary():
    t = np.arange(0, 100.0, 1e-3)
    y = 3e-4 * np.sin(2 * np.pi * 0.13 * t + 0.2)
    freq, amp = oscillation_summary(t, y, 5.0)
    assert freq == pytest.approx(0.13, rel=1e-2)
    assert amp == pytest.approx(3e-4, rel=1e-2)


def test_to_jsonable():
    data = to_jsonable({'z': 1 + 2j, 'arr': np.array([1.0, np.nan]), 'n': np.int64(3), 'flag': np.bool_(True)})
    assert data == {'z': {'re': 1.0, 'im': 2.0}, 'arr': [1.0, None], 'n': 3, 'flag': True}
    json.dumps(data)


def test_report_generator_files(tmp_path):
    report = ReportGenerator(str(tmp_path / 'out'))
    frame = pd.DataFrame({'a': [0.1, 1 / 3], 'b': [1.0, 2.0]})
    path = report.save_frame(frame, 'table.csv')
    loaded = report.load_results(path)
    assert loaded['a'].tolist() == frame['a'].tolist()
    json_path = report.save_json({'x': 0.1 + 0.2, 'y': float('inf')}, 'data.json')
    assert report.load_json(json_path) == {'x': 0.1 + 0.2, 'y': None}
    with pytest.raises(FileNotFoundError):
        report.load_results(str(tmp_path / 'missing.csv'))


def test_sweep_summary_and_pivot(tmp_path):
    report = ReportGenerator(str(tmp_path))
    df = pd.DataFrame({
        'backlash': [0.0, 0.0, 0.5, 0.5],
        'dead_zone': [0.0, 0.01, 0.0, 0.01],
        'A_res': [1.0, 2.0, 3.0, 4.0],
        'error': ['', '', '', ''],
        'extra': [0, 0, 0, 0],
    })
    summary = report.generate_sweep_summary(df, ['backlash', 'dead_zone'])
    assert list(summary.columns) == ['backlash', 'dead_zone', 'A_res', 'error']
    pivot = report.pivot_metric(df, 'A_res', 'backlash', 'dead_zone')
    assert pivot.loc[0.5, 0.01] == 4.0
    with pytest.raises(KeyError):
        report.pivot_metric(df, 'missing', 'backlash', 'dead_zone')
