#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
测试闭环仿真引擎：指令、齿隙规律、场景校验、与采样数据参考回路的一致性、发散检测和参数扫描
"""

import os
import sys
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import linregress

# 添加项目根目录到系统路径
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from analysis.limit_cycle import find_limit_cycle, open_loop_pid, with_amplitude
from analysis.trace_metrics import (
    compute_metrics,
    oscillation_summary,
    per_cycle_control_peak,
    per_cycle_phase_deg,
    step_metrics,
)
from common.errors import ParameterError, SimulationDivergenceError
from common.lti import DiscreteBlock, realize_discrete, step_response, tf_connect, tf_scale
from controllers import PidParams
from plants import LumpedParams, build_g2, build_motor_chain, denominator_modes
from simulation_engine import (
    BacklashSchedule,
    CommandSpec,
    ImcSettings,
    Scenario,
    apply_axis,
    backlash_schedule_value,
    build_design,
    command_signal,
    run_scenario,
    sweep,
)

DEG = np.pi / 180.0
AMP = 1e-3


@pytest.fixture(scope='module')
def linear_trace():
    return run_scenario(Scenario(architecture='imc_linear', duration=5.0))


@pytest.fixture(scope='module')
def pid_backlash_trace():
    sc = Scenario(architecture='pid', backlash=BacklashSchedule(gap=50 * DEG), duration=80.0, trace_decimation=10)
    return sc, run_scenario(sc)


def test_command_signal():
    step = CommandSpec('step', amp=AMP)
    assert command_signal(step, 0.0) == AMP
    assert command_signal(step, -0.1) == 0.0
    square = CommandSpec('square', amp=AMP, period=60.0)
    assert command_signal(square, 0.0) == AMP
    assert command_signal(square, 45.0) == -AMP
    sine = CommandSpec('sine', amp=AMP, freq=0.5)
    assert command_signal(sine, 0.5) == pytest.approx(AMP)
    assert command_signal(step, np.array([0.0, 1.0])).tolist() == [AMP, AMP]
    with pytest.raises(ParameterError):
        CommandSpec('ramp')
    with pytest.raises(ParameterError):
        CommandSpec('square', period=0.0)


def test_backlash_staircase():
    sched = BacklashSchedule('staircase', step=10 * DEG, interval=30.0, max_gap=200 * DEG, phase=15.0)
    assert backlash_schedule_value(sched, 10.0) == 0.0
    assert backlash_schedule_value(sched, 15.0) == pytest.approx(10 * DEG)
    assert backlash_schedule_value(sched, 44.9) == pytest.approx(10 * DEG)
    assert backlash_schedule_value(sched, 45.0) == pytest.approx(20 * DEG)
    assert backlash_schedule_value(sched, 1e5) == pytest.approx(200 * DEG)
    assert backlash_schedule_value(BacklashSchedule(gap=0.3), 7.0) == 0.3
    with pytest.raises(ParameterError):
        BacklashSchedule('staircase', interval=0.0)
    with pytest.raises(ParameterError):
        BacklashSchedule(gap=-0.1)


def test_scenario_validation():
    with pytest.raises(ParameterError):
        Scenario(architecture='lqr')
    with pytest.raises(ParameterError):
        Scenario(controller_rate_hz=3e3)
    with pytest.raises(ParameterError):
        Scenario(duration=0.0)
    with pytest.raises(ParameterError):
        Scenario(trace_decimation=0)
    sc = Scenario()
    assert sc.substeps == 10
    assert sc.dt_controller == pytest.approx(1e-3)


def test_build_design_follows_architecture():
    imc = ImcSettings(dead_zone=0.9 * DEG, estimator_gap=50 * DEG)
    linear = build_design(Scenario(architecture='imc_linear', imc=imc))
    assert linear.dead_zone.width == 0.0 and linear.estimator_gap == 0.0
    dz = build_design(Scenario(architecture='imc_dz', imc=imc))
    assert dz.dead_zone.width == pytest.approx(0.9 * DEG) and dz.estimator_gap == 0.0
    est = build_design(Scenario(architecture='imc_dz_estimator', imc=imc))
    assert est.estimator_gap == pytest.approx(50 * DEG)
    assert est.pitch == LumpedParams().p


def test_trace_shape_and_frame(linear_trace):
    assert len(linear_trace) == 50000
    assert linear_trace.t[1] == pytest.approx(1e-4)
    frame = linear_trace.to_frame()
    assert list(frame.columns) == ['t', 'r', 'y', 'y_hat', 'eps_hat', 'u', 'theta_m_deg', 'theta_d_deg', 'theta_b_deg']


def test_exact_model_has_zero_model_error(linear_trace):
    assert np.all(linear_trace.eps_hat == 0.0)
    assert np.array_equal(linear_trace.theta_m, linear_trace.theta_d)


def test_linear_imc_matches_sampled_data_loop(linear_trace):
    sc = Scenario(architecture='imc_linear', duration=5.0)
    d = build_design(sc)
    dt_c = sc.dt_controller
    G1 = build_motor_chain(sc.motor, sc.K_m)
    m1 = realize_discrete(G1, dt_c)
    m12 = realize_discrete(tf_connect(tf_scale(G1, d.pitch), build_g2(sc.plant), 'series'), dt_c)
    W = DiscreteBlock.from_tf(d.W, dt_c)
    x1 = np.zeros(m1.n_states)
    x12 = np.zeros(m12.n_states)
    y_ref = []
    for _ in range(5000):
        theta = float(m1.C[0] @ x1)
        y_ref.append(float(m12.C[0] @ x12))
        u = d.K_theta * (W.step(AMP) / d.pitch - theta)
        x1 = m1.A @ x1 + m1.B[:, 0] * u
        x12 = m12.A @ x12 + m12.B[:, 0] * u
    assert np.max(np.abs(linear_trace.y[::10] - np.asarray(y_ref))) < 1e-3 * AMP


def test_linear_imc_tracks_reference_model(linear_trace):
    d = build_design(Scenario(architecture='imc_linear'))
    _, y_ideal = step_response(tf_connect(d.Gr, d.G_theta_hat, 'series'), 1e-3, 5000)
    assert np.max(np.abs(linear_trace.y[::10] - AMP * y_ideal)) < 5e-3 * AMP
    assert linear_trace.y[-1] == pytest.approx(AMP, rel=2e-2)


def test_linear_imc_step_settles_quickly(linear_trace):
    settling, settled, overshoot = step_metrics(linear_trace.t, linear_trace.y, linear_trace.r)
    assert settled
    assert 0.9 < settling < 1.2
    assert overshoot < 0.5


def test_zero_gap_equals_bypass():
    base = Scenario(architecture='imc_dz', duration=1.0)
    a = run_scenario(replace(base, backlash=BacklashSchedule(gap=0.0)))
    b = run_scenario(replace(base, bypass_backlash=True, backlash=BacklashSchedule(gap=50 * DEG)))
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.u, b.u)


def test_backlash_bounds_driven_angle():
    trace = run_scenario(Scenario(architecture='imc_dz', backlash=BacklashSchedule(gap=50 * DEG), duration=3.0))
    assert np.all(np.abs(trace.theta_m - trace.theta_d) <= 50 * DEG + 1e-12)
    assert np.allclose(trace.theta_b, 50 * DEG)
    assert np.any(trace.eps_hat != 0.0)


def test_decimation_keeps_every_nth_sample(linear_trace):
    coarse = run_scenario(Scenario(architecture='imc_linear', duration=5.0, trace_decimation=10))
    assert len(coarse) == 5000
    assert np.array_equal(coarse.y, linear_trace.y[::10])
    assert coarse.t[1] == pytest.approx(1e-3)


def test_plant_rate_consistency(linear_trace):
    fine = run_scenario(Scenario(architecture='imc_linear', duration=5.0, plant_rate_hz=2e4))
    assert np.max(np.abs(fine.y[::20] - linear_trace.y[::10])) < 5e-4 * AMP


def test_noise_is_seeded():
    base = Scenario(architecture='imc_linear', duration=0.5, noise_std=1e-6)
    a = run_scenario(base)
    b = run_scenario(base)
    c = run_scenario(replace(base, seed=1))
    assert np.array_equal(a.y, b.y)
    assert not np.array_equal(a.y, c.y)


def test_encoder_quantization_changes_control():
    base = Scenario(architecture='imc_linear', duration=0.5)
    plain = run_scenario(base)
    quantized = run_scenario(replace(base, encoder_ppr=4000))
    assert np.all(np.isfinite(quantized.y))
    assert not np.array_equal(plain.u, quantized.u)


def test_divergence_returns_truncated_trace():
    sc = Scenario(architecture='pid', pid=PidParams(Kp=-5.0, Ki=0.0, Kd=0.0), duration=5.0, guard=0.05)
    with pytest.raises(SimulationDivergenceError) as info:
        run_scenario(sc)
    exc = info.value
    assert exc.time_s < 5.0
    assert 0 < len(exc.trace) < 50000
    assert exc.trace.architecture == 'pid'


def test_pid_limit_cycle_matches_describing_function(pid_backlash_trace):
    sc, trace = pid_backlash_trace
    G1 = build_motor_chain(sc.motor, sc.K_m)
    G2 = build_g2(sc.plant)
    gap = 50 * DEG
    pred = find_limit_cycle(open_loop_pid(sc.pid, G1, G2, pitch=sc.plant.p), (0.01, 15.0), gap=gap).prediction
    assert pred is not None
    pred = with_amplitude(pred, G2, sc.plant.p, gap)

    freq, amp = oscillation_summary(trace.t, trace.y - trace.r, 30.0)
    assert freq == pytest.approx(pred.f_l, rel=0.10)
    assert amp == pytest.approx(pred.A_l, rel=0.25)


@pytest.fixture(scope='module')
def residual_traces():
    traces = {}
    for arch in ('imc_linear', 'imc_dz'):
        for gap_deg in (50.0, 100.0):
            sc = Scenario(architecture=arch, backlash=BacklashSchedule(gap=gap_deg * DEG), duration=10.0,
                          trace_decimation=10)
            traces[arch, gap_deg] = run_scenario(sc)
    return traces


def test_square_wave_with_growing_backlash_converges():
    # 齿隙每 30 s 增加 40°，135 s 后保持 200°
    sc = Scenario(
        architecture='imc_linear',
        command=CommandSpec('square', amp=AMP, period=60.0),
        backlash=BacklashSchedule('staircase', step=40 * DEG, interval=30.0, max_gap=200 * DEG, phase=15.0),
        duration=180.0,
        trace_decimation=10,
    )
    trace = run_scenario(sc)
    assert trace.theta_b[-1] == pytest.approx(200 * DEG)
    for k, t_end in enumerate(np.arange(30.0, 181.0, 30.0)):
        step = AMP if k == 0 else 2 * AMP
        window = (trace.t >= t_end - 0.5) & (trace.t < t_end)
        assert np.max(np.abs(trace.y[window] - trace.r[window])) < 0.05 * step


def test_sine_phase_lag_grows_linearly_with_gap():
    freq = 0.03
    gaps_deg = np.array([0.0, 50.0, 100.0, 150.0, 200.0])
    lags, peaks = [], []
    for gap_deg in gaps_deg:
        sc = Scenario(architecture='imc_linear', command=CommandSpec('sine', amp=AMP, freq=freq),
                      backlash=BacklashSchedule(gap=gap_deg * DEG), duration=67.0, trace_decimation=10)
        trace = run_scenario(sc)
        # 第一个周期是启动过渡
        phase = per_cycle_phase_deg(trace.t, trace.y, trace.r, freq, t_start=1.0 / freq)
        peak = per_cycle_control_peak(trace.t, trace.u, freq, t_start=1.0 / freq)
        assert phase.size == 1 and peak.size == 1
        lags.append(-phase[0])
        peaks.append(peak[0])
    fit = linregress(gaps_deg, lags)
    assert fit.slope > 0.0
    assert fit.rvalue ** 2 > 0.95
    assert np.all(np.diff(peaks) >= -1e-6 * max(peaks))


def test_residual_vibration_is_first_mode(residual_traces):
    metrics = compute_metrics(residual_traces['imc_linear', 50.0], t_s=2.0)
    assert metrics.residual is not None
    mode1 = denominator_modes(build_g2(LumpedParams()))[0]
    assert metrics.residual.f_r == pytest.approx(mode1.natural_frequency_hz, rel=0.01)
    assert 0.5 * mode1.damping_ratio < metrics.residual.zeta_r < 2.0 * mode1.damping_ratio


@pytest.mark.parametrize('gap_deg', [50.0, 100.0])
def test_dead_zone_reduces_residual_and_drift(residual_traces, gap_deg):
    linear = compute_metrics(residual_traces['imc_linear', gap_deg], t_s=2.0)
    dz = compute_metrics(residual_traces['imc_dz', gap_deg], t_s=2.0)
    assert linear.residual is not None and dz.residual is not None
    assert dz.residual.A_res < linear.residual.A_res
    assert dz.motor_drift < 0.9 * DEG


def test_slower_reference_model_reduces_residual():
    base = Scenario(architecture='imc_linear', backlash=BacklashSchedule(gap=50 * DEG), duration=10.0,
                    trace_decimation=10)
    table = sweep(base, 'tau_r', [0.75, 1.1379, 1.5, 2.0], t_s=3.0, fit_offset=True)
    assert table['error'].tolist() == ['', '', '', '']
    a_res = table['A_res'].to_numpy()
    assert np.all(np.diff(a_res) <= 0.0)


@pytest.mark.parametrize('gap_deg', [0.0, 50.0])
def test_mismatch_grid_stays_stable(gap_deg):
    base = Scenario(architecture='imc_linear', backlash=BacklashSchedule(gap=gap_deg * DEG), duration=5.0,
                    trace_decimation=10)
    table = sweep(base, 'mass_mismatch', [-10.0, 0.0, 10.0], 'stiffness_mismatch', [-11000.0, 0.0, 11000.0])
    assert len(table) == 9
    assert table['error'].tolist() == [''] * 9
    assert np.all(np.isfinite(table['control_peak']))


def test_apply_axis():
    sc = Scenario()
    assert apply_axis(sc, 'tau_r', 2.0).imc.tau_r == 2.0
    assert apply_axis(sc, 'backlash', 0.5).backlash.gap == 0.5
    assert apply_axis(sc, 'mass_mismatch', 5.0).model_params.m == pytest.approx(sc.plant.m + 5.0)
    assert apply_axis(sc, 'stiffness_mismatch', -5500.0).model_params.k == pytest.approx(sc.plant.k - 5500.0)
    assert apply_axis(sc, 'dead_zone', 0.01).imc.dead_zone == 0.01
    with pytest.raises(ParameterError):
        apply_axis(sc, 'gain', 1.0)


def test_sweep_records_failures_in_error_column():
    base = Scenario(architecture='imc_linear', duration=1.0)
    table = sweep(base, 'tau_r', [1.1379, -1.0])
    assert table['tau_r'].tolist() == [1.1379, -1.0]
    assert table['error'].iloc[0] == ''
    assert 'ParameterError' in table['error'].iloc[1]
    assert 'control_peak' in table.columns


def test_two_axis_sweep_grid():
    base = Scenario(architecture='imc_dz', duration=0.5)
    table = sweep(base, 'backlash', [0.0, 0.5], 'dead_zone', [0.0, 0.01, 0.02])
    assert len(table) == 6
    assert table[['backlash', 'dead_zone']].values.tolist()[:3] == [[0.0, 0.0], [0.0, 0.01], [0.0, 0.02]]
    with pytest.raises(ParameterError):
        sweep(base, 'unknown', [1.0])
