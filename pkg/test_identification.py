#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
测试系统辨识：谐波拟合、步进正弦 FRF、集中参数拟合、有理模型拟合和衰减拟合
"""

import os
import sys
from dataclasses import replace

import numpy as np
import pytest

# 添加项目根目录到系统路径
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from common.errors import ConditioningError, DivisionGuardError, InstabilityError, ParameterError
from common.lti import freq_response, tf, tf_eval
from identification import (
    FrfDataset,
    LinearTfSystem,
    TransmissionSystem,
    decay_model,
    design_matrix,
    dominant_frequency,
    fit_decay,
    fit_lumped_params,
    fit_rational_frf,
    fourier_coeff,
    frf_point,
    harmonic_fit,
    stepped_sine_frf,
)
from plants import LumpedParams, build_g2


def _second_order(f_n=2.0, zeta=0.1):
    wn = 2 * np.pi * f_n
    return tf([wn ** 2], [wn ** 2, 2 * zeta * wn, 1.0])


def _exact_frf(params, freqs):
    return FrfDataset(freqs, freq_response(build_g2(params), freqs))


def test_design_matrix_columns():
    A = design_matrix([0.0, 0.25], 1.0, 2)
    assert A.shape == (2, 5)
    assert A[0].tolist() == pytest.approx([1.0, 1.0, 0.0, 0.0, 1.0])
    assert A[1, 2] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        design_matrix([0.0], 1.0, 0)
    with pytest.raises(ParameterError):
        design_matrix([0.0], -1.0, 1)


def test_harmonic_fit_exact_signal():
    f0 = 2.5
    t = np.arange(0, 3 / f0, 1e-3)
    w = 2 * np.pi * f0
    y = 0.3 + 1.2 * np.cos(w * t) - 0.7 * np.sin(w * t) + 0.1 * np.cos(2 * w * t) + 0.05 * np.sin(3 * w * t)
    fit = harmonic_fit(y, t, f0, 3)
    assert fit.a0 == pytest.approx(0.3, abs=1e-10)
    assert fit.a_c.tolist() == pytest.approx([1.2, 0.1, 0.0], abs=1e-10)
    assert fit.b_s.tolist() == pytest.approx([-0.7, 0.0, 0.05], abs=1e-10)
    assert np.allclose(fit.reconstruct(t), y, atol=1e-10)
    assert fourier_coeff(fit) == pytest.approx(complex(1.2, 0.7) / 2)


def test_harmonic_fit_conditioning():
    with pytest.raises(ConditioningError):
        harmonic_fit(np.zeros(4), np.arange(4) * 0.5, 1.0, 3)
    with pytest.raises(ConditioningError):
        t = np.linspace(0, 0.5, 100)
        harmonic_fit(np.sin(2 * np.pi * t), t, 1.0, 1)
    # 每个周期只采一个点，正弦列全为零
    t = np.arange(10) * 1.0
    with pytest.raises(ConditioningError) as info:
        harmonic_fit(np.ones(10), t, 1.0, 1)
    assert info.value.harmonic == 1


def test_frf_point_gain_and_phase():
    f0 = 3.0
    t = np.arange(0, 2.0, 1e-3)
    u = np.sin(2 * np.pi * f0 * t)
    y = 2.0 * np.sin(2 * np.pi * f0 * t + 0.4)
    g = frf_point(harmonic_fit(u, t, f0, 1), harmonic_fit(y, t, f0, 1), p=0.5)
    assert abs(g) == pytest.approx(4.0, rel=1e-9)
    assert np.angle(g) == pytest.approx(0.4, abs=1e-9)


def test_frf_point_guards():
    t = np.arange(0, 2.0, 1e-3)
    y_fit = harmonic_fit(np.sin(2 * np.pi * t), t, 1.0, 1)
    with pytest.raises(DivisionGuardError):
        frf_point(harmonic_fit(np.zeros_like(t), t, 1.0, 1), y_fit)
    with pytest.raises(ParameterError):
        frf_point(harmonic_fit(np.sin(4 * np.pi * t), t, 2.0, 1), y_fit)


def test_frf_dataset_validation_and_csv(tmp_path):
    with pytest.raises(ParameterError):
        FrfDataset([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(ParameterError):
        FrfDataset([1.0, 2.0], [1.0])
    frf = FrfDataset([1.0, 2.0, 3.0], [1 + 1j, 0.5 - 0.2j, -0.1j])
    path = tmp_path / 'frf.csv'
    frf.to_csv(str(path))
    loaded = FrfDataset.from_csv(str(path))
    assert np.array_equal(loaded.response, frf.response)
    with pytest.raises(FileNotFoundError):
        FrfDataset.from_csv(str(tmp_path / 'missing.csv'))


def test_stepped_sine_matches_linear_model():
    g = _second_order()
    freqs = np.array([1.0, 2.0, 3.0])
    frf = stepped_sine_frf(LinearTfSystem(g), freqs, amp=0.5, settle_s=10.0, record_s=5.0, dt=1e-3, guard=10.0)
    expected = np.array([tf_eval(g, f) for f in freqs])
    assert np.allclose(frf.magnitude, np.abs(expected), rtol=1e-2)
    assert np.allclose(np.angle(frf.response, deg=True), np.angle(expected, deg=True), atol=1.0)


def test_stepped_sine_transmission_without_backlash():
    params = LumpedParams()
    freqs = np.array([2.0, 6.0])
    frf = stepped_sine_frf(TransmissionSystem(params), freqs, amp=0.5, settle_s=60.0, record_s=10.0, dt=1e-3)
    expected = freq_response(build_g2(params), freqs)
    assert np.allclose(frf.magnitude, np.abs(expected), rtol=1e-2)
    assert np.allclose(np.angle(frf.response, deg=True), np.angle(expected, deg=True), atol=1.0)


def test_stepped_sine_detects_instability():
    with pytest.raises(InstabilityError):
        stepped_sine_frf(LinearTfSystem(tf([1.0], [-1.0, 1.0])), [1.0], settle_s=20.0, record_s=5.0, dt=1e-3)
    with pytest.raises(ParameterError):
        stepped_sine_frf(LinearTfSystem(_second_order()), [])


def test_stepped_sine_rejects_unordered_frequencies():
    system = LinearTfSystem(_second_order())
    with pytest.raises(ParameterError):
        stepped_sine_frf(system, [2.0, 2.0])
    with pytest.raises(ParameterError):
        stepped_sine_frf(system, [3.0, 1.0], max_workers=2)


def test_lumped_fit_recovers_parameters():
    truth = LumpedParams()
    frf = _exact_frf(truth, np.linspace(0.5, 15.0, 60))
    init = replace(truth, m=truth.m * 1.1, c=truth.c * 1.1, k=truth.k * 1.1)
    fit = fit_lumped_params(frf, init)
    assert fit.params.k == pytest.approx(truth.k, rel=1e-3)
    assert fit.params.m == pytest.approx(truth.m, rel=1e-3)
    assert fit.params.c == pytest.approx(truth.c, rel=1e-2)
    assert fit.params.m_m == init.m_m
    assert fit.cost <= fit.cost_trace[0]
    assert fit.phase_rms_deg < 1.0


def test_lumped_fit_from_twenty_percent_off():
    truth = LumpedParams()
    frf = _exact_frf(truth, np.linspace(0.5, 15.0, 60))
    init = replace(truth, m=truth.m * 1.2, c=truth.c * 0.8, k=truth.k * 0.8)
    fit = fit_lumped_params(frf, init)
    assert fit.params.k == pytest.approx(truth.k, rel=5e-3)
    assert fit.params.m == pytest.approx(truth.m, rel=5e-3)
    assert fit.params.c == pytest.approx(truth.c, rel=5e-3)
    assert fit.cost < 1e-6 * fit.cost_trace[0]


def test_lumped_fit_rejects_bad_input():
    frf = _exact_frf(LumpedParams(), np.linspace(1.0, 10.0, 5))
    with pytest.raises(ParameterError):
        fit_lumped_params(frf, LumpedParams())
    frf = _exact_frf(LumpedParams(), np.linspace(1.0, 10.0, 20))
    with pytest.raises(ParameterError):
        fit_lumped_params(frf, LumpedParams(), fixed=('mass',))
    # 阻尼可以为 0，但拟合参数的初值必须为正
    with pytest.raises(ParameterError):
        fit_lumped_params(frf, LumpedParams(c=0.0))


def test_rational_fit_reproduces_g2():
    freqs = np.linspace(0.5, 15.0, 80)
    frf = _exact_frf(LumpedParams(), freqs)
    g = fit_rational_frf(frf, n_poles=4, n_zeros=3)
    assert g.den.degree == 4
    assert np.allclose(freq_response(g, freqs), frf.response, rtol=1e-5)
    with pytest.raises(ParameterError):
        fit_rational_frf(frf, n_poles=3, n_zeros=3)


def test_dominant_frequency():
    dt = 1e-3
    t = np.arange(0, 10.0, dt)
    assert dominant_frequency(np.sin(2 * np.pi * 3.3 * t), dt) == pytest.approx(3.3, abs=1e-2)


def test_decay_fit_recovers_mode():
    t = np.arange(0, 20.0, 1e-3)
    eta = decay_model(t, 2e-5, 4.4, 0.004, 0.3, 1.0)
    fit = fit_decay(eta, t, 1.0)
    assert fit.A_res == pytest.approx(2e-5, rel=1e-3)
    assert fit.f_r == pytest.approx(4.4, rel=1e-4)
    assert fit.zeta_r == pytest.approx(0.004, rel=1e-2)
    assert fit.phi == pytest.approx(0.3, abs=1e-3)
    assert fit.r_squared > 0.999


def test_decay_fit_with_offset():
    t = np.arange(0, 20.0, 1e-3)
    eta = decay_model(t, 2e-5, 4.4, 0.004, 0.3, 1.0, offset=3e-6)
    fit = fit_decay(eta, t, 1.0, fit_offset=True)
    assert fit.offset == pytest.approx(3e-6, rel=1e-2)
    assert fit.A_res == pytest.approx(2e-5, rel=1e-2)


def test_decay_fit_degenerate_and_short():
    t = np.arange(0, 10.0, 1e-3)
    fit = fit_decay(np.zeros_like(t), t, 1.0)
    assert fit.degenerate and fit.A_res == 0.0
    short = np.arange(0, 1.5, 1e-3)
    with pytest.raises(ParameterError):
        fit_decay(decay_model(short, 1.0, 0.5, 0.01, 0.0, 1.0), short, 1.0)
