#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
运行配置
读取 JSON 配置，按键表校验（未知键直接拒绝，所有问题一次性汇总），
在边界处把 度/毫米/N/mm 换算成国际单位，并组装成场景和各命令的参数
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import BacklashImcError, ConfigError
from .lti import tf
from .units import (
    deg_to_rad,
    mm_to_m,
    n_per_mm_to_n_per_m,
    n_s_per_mm_to_n_s_per_m,
    pitch_mm_per_rev_to_m_per_rad,
)

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = 'reports'

NUMBER = 'number'
INTEGER = 'integer'
BOOLEAN = 'boolean'
STRING = 'string'
NUMBER_LIST = 'number_list'

# 集中参数（实际对象和内部模型共用）
LUMPED_KEYS = {
    'm_kg': NUMBER,
    'm_m_kg': NUMBER,
    'c_n_s_per_mm': NUMBER,
    'k_n_per_mm': NUMBER,
    'pitch_mm_per_rev': NUMBER,
}

TF_KEYS = {'num': NUMBER_LIST, 'den': NUMBER_LIST}

SCHEMA = {
    'output_dir': STRING,
    'plant': dict(LUMPED_KEYS, dm2_kg=NUMBER, dm3_kg=NUMBER),
    'motor': {'J_v': NUMBER, 'L': NUMBER, 'R': NUMBER, 'k_t': NUMBER, 'k_b': NUMBER, 'K_m': NUMBER},
    'controller': {
        'kind': STRING,
        'architecture': STRING,
        'tau_r_s': NUMBER,
        'K_theta': NUMBER,
        'dead_zone_deg': NUMBER,
        'estimator_gap_deg': NUMBER,
        'estimator_in_feedback': BOOLEAN,
        'estimator_in_model': BOOLEAN,
        'Kp': NUMBER,
        'Ki': NUMBER,
        'Kd': NUMBER,
        'Tf': NUMBER,
        'error_scale': NUMBER,
        'G2_hat': TF_KEYS,
        'model': dict(LUMPED_KEYS),
    },
    'scenario': {
        'command': {'kind': STRING, 'amp_mm': NUMBER, 'period_s': NUMBER, 'freq_hz': NUMBER},
        'backlash': {
            'kind': STRING, 'gap_deg': NUMBER, 'step_deg': NUMBER, 'interval_s': NUMBER,
            'max_deg': NUMBER, 'phase_s': NUMBER,
        },
        'duration_s': NUMBER,
        'plant_rate_hz': NUMBER,
        'controller_rate_hz': NUMBER,
        'noise_std_um': NUMBER,
        'seed': INTEGER,
        'encoder_ppr': INTEGER,
        'trace_decimation': INTEGER,
        'guard_m': NUMBER,
        't_s': NUMBER,
        'fit_offset': BOOLEAN,
    },
    'sweep': {'axis': STRING, 'values': NUMBER_LIST, 'axis2': STRING, 'values2': NUMBER_LIST},
    'stability': {
        'tol': NUMBER, 'chi_points': INTEGER, 'f_min_hz': NUMBER, 'f_max_hz': NUMBER,
        'n_freq': INTEGER, 'backlash_deg': NUMBER, 'normalize': BOOLEAN,
    },
    'frf': {
        'f_min_hz': NUMBER, 'f_max_hz': NUMBER, 'n_freqs': INTEGER, 'freqs_hz': NUMBER_LIST,
        'amp_deg': NUMBER, 'settle_s': NUMBER, 'record_s': NUMBER, 'dt': NUMBER,
        'n_harmonics': INTEGER, 'backlash_deg': NUMBER, 'fit_lumped': BOOLEAN,
        'fit_init_scale': NUMBER, 'fit_rational': BOOLEAN, 'n_poles': INTEGER, 'n_zeros': INTEGER,
    },
    'design': {
        'f_min_hz': NUMBER, 'f_max_hz': NUMBER, 'n_freqs': INTEGER,
        'alternate': {'dm2_kg': NUMBER, 'dm3_kg': NUMBER},
    },
}

CHOICES = {
    'controller.kind': ('imc', 'pid'),
    'controller.architecture': ('imc_linear', 'imc_dz', 'imc_dz_estimator'),
    'scenario.command.kind': ('step', 'square', 'sine'),
    'scenario.backlash.kind': ('constant', 'staircase'),
    'sweep.axis': ('dead_zone', 'estimator_gap', 'tau_r', 'backlash', 'mass_mismatch', 'stiffness_mismatch'),
    'sweep.axis2': ('dead_zone', 'estimator_gap', 'tau_r', 'backlash', 'mass_mismatch', 'stiffness_mismatch'),
}

# 扫描轴在配置中的单位换算到国际单位
SWEEP_UNITS = {
    'dead_zone': lambda v: float(deg_to_rad(v)),
    'estimator_gap': lambda v: float(deg_to_rad(v)),
    'backlash': lambda v: float(deg_to_rad(v)),
    'tau_r': float,
    'mass_mismatch': float,
    'stiffness_mismatch': n_per_mm_to_n_per_m,
}


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(value, kind, path, problems):
    if isinstance(kind, dict):
        if not isinstance(value, dict):
            problems.append(f"{path}: 应为对象")
        else:
            _validate(value, kind, path, problems)
        return
    ok = {
        NUMBER: _is_number(value),
        INTEGER: isinstance(value, int) and not isinstance(value, bool),
        BOOLEAN: isinstance(value, bool),
        STRING: isinstance(value, str),
        NUMBER_LIST: isinstance(value, list) and all(_is_number(v) for v in value),
    }[kind]
    if not ok:
        problems.append(f"{path}: 类型应为 {kind}，实际为 {value!r}")
    elif path in CHOICES and value not in CHOICES[path]:
        problems.append(f"{path}: 取值 {value!r} 不在 {CHOICES[path]} 中")


def _validate(data, schema, prefix, problems):
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in schema:
            problems.append(f"{path}: 未知配置项")
            continue
        _check_value(value, schema[key], path, problems)


def validate_config(data):
    """
    按键表校验配置字典

    返回:
    - list: 问题列表，空列表表示通过
    """
    problems = []
    if not isinstance(data, dict):
        return ["配置顶层必须是 JSON 对象"]
    _validate(data, SCHEMA, '', problems)
    sweep = data.get('sweep')
    if isinstance(sweep, dict):
        if 'axis' not in sweep or 'values' not in sweep:
            problems.append("sweep: 需要 axis 和 values")
        if ('axis2' in sweep) != ('values2' in sweep):
            problems.append("sweep: axis2 和 values2 必须同时给出")
    return problems


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """扫描设置，取值已换算成国际单位"""
    axis: str
    values: tuple
    axis2: Optional[str] = None
    values2: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class RunConfig:
    """
    校验并换算后的运行配置

    Parameters:
        scenario: 由 plant/motor/controller/scenario 组装的 Scenario
        controller_kind: 'imc' | 'pid'
        t_s: 衰减拟合起点（秒），None 表示按指令自动选取
        fit_offset: 衰减拟合是否带偏置
        sweep: SweepSpec 或 None
        stability, frf, design: 各命令的参数（国际单位）
        output_dir: 输出目录
        raw: 原始配置字典
    """
    scenario: object
    controller_kind: str = 'imc'
    t_s: Optional[float] = None
    fit_offset: bool = False
    sweep: Optional[SweepSpec] = None
    stability: dict = field(default_factory=dict)
    frf: dict = field(default_factory=dict)
    design: dict = field(default_factory=dict)
    output_dir: str = DEFAULT_OUTPUT_DIR
    raw: dict = field(default_factory=dict)


def _lumped(section, base):
    """LUMPED_KEYS 中给出的项覆盖 base"""
    updates = {}
    if 'm_kg' in section:
        updates['m'] = float(section['m_kg'])
    if 'm_m_kg' in section:
        updates['m_m'] = float(section['m_m_kg'])
    if 'c_n_s_per_mm' in section:
        updates['c'] = n_s_per_mm_to_n_s_per_m(section['c_n_s_per_mm'])
    if 'k_n_per_mm' in section:
        updates['k'] = n_per_mm_to_n_per_m(section['k_n_per_mm'])
    if 'pitch_mm_per_rev' in section:
        updates['p'] = pitch_mm_per_rev_to_m_per_rad(section['pitch_mm_per_rev'])
    return replace(base, **updates)


def _build(data):
    # 延迟导入，common 包本身不依赖上层模块
    from controllers.pid_controller import PidParams
    from plants.transmission import LumpedParams, MassPerturbation
    from plants.virtual_motor import VirtualMotorParams
    from simulation_engine import BacklashSchedule, CommandSpec, ImcSettings, Scenario

    plant_cfg = data.get('plant', {})
    plant = _lumped(plant_cfg, LumpedParams())
    perturbation = MassPerturbation(float(plant_cfg.get('dm2_kg', 0.0)), float(plant_cfg.get('dm3_kg', 0.0)))

    motor_cfg = dict(data.get('motor', {}))
    K_m = float(motor_cfg.pop('K_m', 1.0))
    motor = VirtualMotorParams(**{k: float(v) for k, v in motor_cfg.items()})

    ctl = data.get('controller', {})
    kind = ctl.get('kind', 'imc')
    architecture = 'pid' if kind == 'pid' else ctl.get('architecture', 'imc_linear')
    defaults = ImcSettings()
    imc = ImcSettings(
        tau_r=float(ctl.get('tau_r_s', defaults.tau_r)),
        K_theta=float(ctl.get('K_theta', defaults.K_theta)),
        dead_zone=float(deg_to_rad(ctl['dead_zone_deg'])) if 'dead_zone_deg' in ctl else defaults.dead_zone,
        estimator_gap=float(deg_to_rad(ctl.get('estimator_gap_deg', 0.0))),
        estimator_in_feedback=ctl.get('estimator_in_feedback', True),
        estimator_in_model=ctl.get('estimator_in_model', True),
    )
    pid = PidParams(**{k: float(ctl[k]) for k in ('Kp', 'Ki', 'Kd', 'Tf', 'error_scale') if k in ctl})
    model = _lumped(ctl['model'], plant) if 'model' in ctl else None
    G2_hat = tf(ctl['G2_hat']['num'], ctl['G2_hat']['den']) if 'G2_hat' in ctl else None

    sc_cfg = data.get('scenario', {})
    cmd_cfg = sc_cfg.get('command', {})
    command = CommandSpec(
        kind=cmd_cfg.get('kind', 'step'),
        amp=mm_to_m(float(cmd_cfg.get('amp_mm', 1.0))),
        period=float(cmd_cfg.get('period_s', 60.0)),
        freq=float(cmd_cfg.get('freq_hz', 0.03)),
    )
    bl_cfg = sc_cfg.get('backlash', {})
    bl_defaults = BacklashSchedule()
    backlash = BacklashSchedule(
        kind=bl_cfg.get('kind', 'constant'),
        gap=float(deg_to_rad(bl_cfg.get('gap_deg', 0.0))),
        step=float(deg_to_rad(bl_cfg['step_deg'])) if 'step_deg' in bl_cfg else bl_defaults.step,
        interval=float(bl_cfg.get('interval_s', bl_defaults.interval)),
        max_gap=float(deg_to_rad(bl_cfg['max_deg'])) if 'max_deg' in bl_cfg else bl_defaults.max_gap,
        phase=float(bl_cfg.get('phase_s', bl_defaults.phase)),
    )
    scenario = Scenario(
        architecture=architecture,
        command=command,
        backlash=backlash,
        duration=float(sc_cfg.get('duration_s', 5.0)),
        plant_rate_hz=float(sc_cfg.get('plant_rate_hz', 1e4)),
        controller_rate_hz=float(sc_cfg.get('controller_rate_hz', 1e3)),
        plant=plant,
        motor=motor,
        K_m=K_m,
        perturbation=perturbation,
        model=model,
        imc=imc,
        pid=pid,
        noise_std=float(sc_cfg.get('noise_std_um', 0.0)) * 1e-6,
        seed=int(sc_cfg.get('seed', 0)),
        encoder_ppr=int(sc_cfg.get('encoder_ppr', 0)),
        trace_decimation=int(sc_cfg.get('trace_decimation', 1)),
        guard=float(sc_cfg.get('guard_m', 1.0)),
        G2_hat=G2_hat,
    )

    sweep = None
    if 'sweep' in data:
        sw = data['sweep']
        axis2 = sw.get('axis2')
        sweep = SweepSpec(
            axis=sw['axis'],
            values=tuple(SWEEP_UNITS[sw['axis']](v) for v in sw['values']),
            axis2=axis2,
            values2=tuple(SWEEP_UNITS[axis2](v) for v in sw['values2']) if axis2 else None,
        )

    stability = dict(data.get('stability', {}))
    if 'backlash_deg' in stability:
        stability['backlash'] = float(deg_to_rad(stability.pop('backlash_deg')))
    frf = dict(data.get('frf', {}))
    for key in ('amp_deg', 'backlash_deg'):
        if key in frf:
            frf[key[:-4]] = float(deg_to_rad(frf.pop(key)))
    design = dict(data.get('design', {}))
    if 'alternate' in design:
        alt = design.pop('alternate')
        design['alternate'] = MassPerturbation(float(alt.get('dm2_kg', 0.0)), float(alt.get('dm3_kg', 0.0)))

    return RunConfig(
        scenario=scenario,
        controller_kind=kind,
        t_s=float(sc_cfg['t_s']) if 't_s' in sc_cfg else None,
        fit_offset=bool(sc_cfg.get('fit_offset', False)),
        sweep=sweep,
        stability=stability,
        frf=frf,
        design=design,
        output_dir=data.get('output_dir', os.getenv('IMC_OUTPUT_DIR', DEFAULT_OUTPUT_DIR)),
        raw=data,
    )


def parse_config(data):
    """
    校验并组装配置

    参数:
    - data: dict, JSON 解析结果

    返回:
    - RunConfig

    异常:
    - ConfigError: 键表校验失败或物理参数非法，problems 列出全部问题
    """
    problems = validate_config(data)
    if problems:
        raise ConfigError(problems)
    try:
        config = _build(data)
    except BacklashImcError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([f"{type(exc).__name__}: {exc}"]) from exc
    logger.info(f"配置校验通过: {config.scenario.architecture}, 输出目录 {config.output_dir}")
    return config


def load_config(path):
    """读取 JSON 配置文件并校验"""
    if not os.path.exists(path):
        raise ConfigError([f"找不到配置文件: {path}"])
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: JSON 解析失败: {exc}"]) from exc
    return parse_config(data)
