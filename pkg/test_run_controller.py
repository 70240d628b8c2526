#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
测试配置校验、单位换算和命令行入口的输出文件与退出码
"""

import copy
import glob
import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

# 添加项目根目录到系统路径
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

import run_controller
from common.config import load_config, parse_config, validate_config
from common.errors import ConfigError

ROOT = os.path.abspath(os.path.dirname(__file__))
DEG = np.pi / 180.0

BASE = {
    'controller': {'kind': 'imc', 'architecture': 'imc_linear'},
    'scenario': {'command': {'kind': 'step', 'amp_mm': 1.0}, 'duration_s': 0.5},
}


@pytest.fixture(autouse=True)
def _no_log_files(monkeypatch):
    monkeypatch.delenv('IMC_LOG_DIR', raising=False)


def _write(tmp_path, data, name='config.json'):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


def _config(**sections):
    data = copy.deepcopy(BASE)
    for key, value in sections.items():
        data[key] = value
    return data


def test_validate_collects_all_problems():
    problems = validate_config({
        'plant': {'mass': 1.0},
        'scenario': {'duration_s': '5'},
        'controller': {'architecture': 'lqr'},
    })
    assert len(problems) == 3
    assert any('plant.mass' in p and '未知配置项' in p for p in problems)
    assert any(p.startswith('scenario.duration_s') for p in problems)
    assert any('controller.architecture' in p for p in problems)
    assert validate_config(BASE) == []
    assert validate_config([1, 2]) == ["配置顶层必须是 JSON 对象"]


def test_validate_sweep_pairs():
    assert any('axis 和 values' in p for p in validate_config({'sweep': {'axis': 'tau_r'}}))
    problems = validate_config({'sweep': {'axis': 'tau_r', 'values': [1.0], 'axis2': 'backlash'}})
    assert any('axis2' in p for p in problems)
    assert validate_config({'scenario': {'seed': True}})


def test_parse_config_converts_units():
    config = parse_config({
        'plant': {'k_n_per_mm': 43.57, 'c_n_s_per_mm': 0.012, 'pitch_mm_per_rev': 2.54, 'dm3_kg': 5.0},
        'controller': {'kind': 'imc', 'architecture': 'imc_dz', 'dead_zone_deg': 0.9},
        'scenario': {'command': {'kind': 'step', 'amp_mm': 2.0}, 'noise_std_um': 3.0,
                     'backlash': {'kind': 'constant', 'gap_deg': 50.0}},
        'stability': {'backlash_deg': 40.0},
        'sweep': {'axis': 'stiffness_mismatch', 'values': [-5.5, 5.5], 'axis2': 'dead_zone', 'values2': [1.0]},
    })
    sc = config.scenario
    assert sc.plant.k == pytest.approx(43570.0)
    assert sc.plant.c == pytest.approx(12.0)
    assert sc.plant.p == pytest.approx(2.54e-3 / (2 * np.pi))
    assert sc.perturbation.dm3 == 5.0
    assert sc.imc.dead_zone == pytest.approx(0.9 * DEG)
    assert sc.command.amp == pytest.approx(2e-3)
    assert sc.noise_std == pytest.approx(3e-6)
    assert sc.backlash.gap == pytest.approx(50 * DEG)
    assert config.stability['backlash'] == pytest.approx(40 * DEG)
    assert config.sweep.values == pytest.approx((-5500.0, 5500.0))
    assert config.sweep.values2 == pytest.approx((DEG,))


def test_parse_config_pid_kind():
    config = parse_config({'controller': {'kind': 'pid', 'Kp': 2.0}})
    assert config.controller_kind == 'pid'
    assert config.scenario.architecture == 'pid'
    assert config.scenario.pid.Kp == 2.0
    assert config.t_s is None


def test_parse_config_wraps_physical_errors():
    with pytest.raises(ConfigError) as info:
        parse_config({'plant': {'m_kg': -1.0}})
    assert 'ParameterError' in info.value.problems[0]


def test_output_dir_from_environment(monkeypatch):
    monkeypatch.setenv('IMC_OUTPUT_DIR', 'somewhere')
    assert parse_config({}).output_dir == 'somewhere'
    assert parse_config({'output_dir': 'here'}).output_dir == 'here'


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / 'missing.json'))
    bad = tmp_path / 'bad.json'
    bad.write_text('{"plant": ', encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        load_config(str(bad))
    assert 'JSON' in info.value.problems[0]


@pytest.mark.parametrize('path', sorted(glob.glob(os.path.join(ROOT, 'data', 'json', '*_config.json'))))
def test_shipped_configs_are_valid(path):
    config = load_config(path)
    assert config.output_dir.startswith('reports/')


def test_main_rejects_unknown_key(tmp_path):
    out = tmp_path / 'out'
    path = _write(tmp_path, _config(plant={'mass_kg': 1.0}))
    assert run_controller.main(['design', '--config', path, '--out', str(out)]) == run_controller.EXIT_CONFIG
    assert not out.exists()


def test_main_design_writes_outputs(tmp_path):
    out = tmp_path / 'design'
    data = _config(design={'n_freqs': 60, 'alternate': {'dm3_kg': 5.0}})
    path = _write(tmp_path, data)
    assert run_controller.main(['design', '--config', path, '--out', str(out)]) == run_controller.EXIT_OK
    with open(out / 'design.json', encoding='utf-8') as f:
        summary = json.load(f)
    assert summary['robust_margin'] > 1.0
    assert summary['bandwidth_hz'] == pytest.approx(0.5976, abs=1e-4)
    table = pd.read_csv(out / 'frequency_table.csv')
    assert len(table) == 60
    assert {'freq_hz', 'T0_mag', 'S_mag', 'delta_mag'} <= set(table.columns)


def test_main_design_rejects_nonminimum_phase_model(tmp_path):
    data = _config()
    data['controller']['G2_hat'] = {'num': [1.0, -1.0], 'den': [1.0, 2.0, 1.0]}
    path = _write(tmp_path, data)
    code = run_controller.main(['design', '--config', path, '--out', str(tmp_path / 'out')])
    assert code == run_controller.EXIT_CONFIG


def test_main_simulate_with_seed_override(tmp_path):
    data = _config()
    data['scenario']['noise_std_um'] = 1.0
    data['scenario']['trace_decimation'] = 10
    path = _write(tmp_path, data)
    frames = []
    for name, seed in (('a', '3'), ('b', '3'), ('c', '4')):
        out = tmp_path / name
        assert run_controller.main(['simulate', '--config', path, '--out', str(out), '--seed', seed]) == 0
        frames.append(pd.read_csv(out / 'trace.csv'))
        with open(out / 'metrics.json', encoding='utf-8') as f:
            metrics = json.load(f)
        assert metrics['diverged'] is False
        assert metrics['architecture'] == 'imc_linear'
    assert len(frames[0]) == 500
    assert frames[0]['y'].equals(frames[1]['y'])
    assert not frames[0]['y'].equals(frames[2]['y'])


def test_main_simulate_divergence(tmp_path):
    data = _config(controller={'kind': 'pid', 'Kp': -5.0, 'Ki': 0.0, 'Kd': 0.0})
    data['scenario'].update({'duration_s': 5.0, 'guard_m': 0.05})
    path = _write(tmp_path, data)
    out = tmp_path / 'out'
    assert run_controller.main(['simulate', '--config', path, '--out', str(out)]) == run_controller.EXIT_DIVERGED
    with open(out / 'metrics.json', encoding='utf-8') as f:
        metrics = json.load(f)
    assert metrics['diverged'] is True
    assert metrics['time_s'] < 5.0
    assert (out / 'trace.csv').exists()


def test_main_sweep(tmp_path):
    path = _write(tmp_path, _config())
    assert run_controller.main(['sweep', '--config', path, '--out', str(tmp_path / 'a')]) == run_controller.EXIT_CONFIG

    path = _write(tmp_path, _config(sweep={'axis': 'tau_r', 'values': [1.1379, 1.5]}), 'sweep.json')
    out = tmp_path / 'b'
    assert run_controller.main(['sweep', '--config', path, '--out', str(out)]) == run_controller.EXIT_OK
    table = pd.read_csv(out / 'sweep.csv', keep_default_na=False)
    assert table['tau_r'].tolist() == [1.1379, 1.5]
    assert table['error'].tolist() == ['', '']


def test_main_stability(tmp_path):
    data = _config(stability={'backlash_deg': 40.0})
    path = _write(tmp_path, data)
    out = tmp_path / 'out'
    assert run_controller.main(['stability', '--config', path, '--out', str(out)]) == run_controller.EXIT_OK
    with open(out / 'stability.json', encoding='utf-8') as f:
        result = json.load(f)
    assert result['backlash_deg'] == pytest.approx(40.0)
    assert 0.08 < result['pid']['prediction']['f_l'] < 0.2
    assert result['pid']['prediction']['A_l'] > 0.0
    assert result['imc']['prediction'] is None
    for name in ('locus_neg_inv_df.csv', 'locus_pid.csv', 'locus_imc.csv'):
        assert (out / name).exists()


def test_main_frf(tmp_path):
    data = _config(frf={'freqs_hz': [2.0, 6.0], 'settle_s': 30.0, 'record_s': 5.0, 'dt': 0.001})
    path = _write(tmp_path, data)
    out = tmp_path / 'out'
    assert run_controller.main(['frf', '--config', path, '--out', str(out)]) == run_controller.EXIT_OK
    frame = pd.read_csv(out / 'frf.csv')
    assert len(frame) == 2
    with open(out / 'frf_fit.json', encoding='utf-8') as f:
        assert json.load(f)['peak_hz'] in (2.0, 6.0)
