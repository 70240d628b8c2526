#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
闭环仿真引擎
多速率定步长仿真：对象（虚拟电机、齿隙、传动）按 1e4 Hz 推进，控制器（PID 或内模控制器）按 1e3 Hz 更新，
两者之间零阶保持；提供指令信号、齿隙变化规律、单次仿真和参数扫描
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from analysis.trace_metrics import compute_metrics
from common.errors import BacklashImcError, ParameterError, SimulationDivergenceError
from common.lti import DiscreteBlock, lift_ss, realize_discrete
from common.nonlinearities import dead_zone, play_clamp
from common.units import deg_to_rad, rad_to_deg
from controllers.imc_controller import ImcDesign, build_imc_design
from controllers.pid_controller import DiscretePid, PidParams
from plants.transmission import LumpedParams, MassPerturbation, build_g2
from plants.virtual_motor import VirtualMotorParams, build_motor_chain

logger = logging.getLogger(__name__)

ARCHITECTURES = ('pid', 'imc_linear', 'imc_dz', 'imc_dz_estimator')
SWEEP_AXES = ('dead_zone', 'estimator_gap', 'tau_r', 'backlash', 'mass_mismatch', 'stiffness_mismatch')


@dataclass(frozen=True)
class CommandSpec:
    """
    指令信号

    Parameters:
        kind: 'step' | 'square' | 'sine'
        amp: 幅值（米）
        period: 方波周期（秒）
        freq: 正弦频率（Hz）
    """
    kind: str = 'step'
    amp: float = 1e-3
    period: float = 60.0
    freq: float = 0.03

    def __post_init__(self):
        if self.kind not in ('step', 'square', 'sine'):
            raise ParameterError(f"未知指令类型: {self.kind}")
        if self.kind == 'square' and not self.period > 0:
            raise ParameterError(f"方波周期必须为正: {self.period}")
        if self.kind == 'sine' and not self.freq > 0:
            raise ParameterError(f"正弦频率必须为正: {self.freq}")


def command_signal(cmd, t):
    """
    指令值

    step: amp·1(t>=0); square: amp·sgn(sin(2πt/period))，sin = 0 处取 +amp; sine: amp·sin(2πft)
    """
    t = np.asarray(t, dtype=float)
    if cmd.kind == 'step':
        out = np.where(t >= 0.0, cmd.amp, 0.0)
    elif cmd.kind == 'square':
        out = np.where(np.sin(2.0 * np.pi * t / cmd.period) >= 0.0, cmd.amp, -cmd.amp)
    else:
        out = cmd.amp * np.sin(2.0 * np.pi * cmd.freq * t)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BacklashSchedule:
    """
    齿隙半宽随时间的变化规律

    Parameters:
        kind: 'constant' | 'staircase'
        gap: 常值齿隙（弧度）
        step: 阶梯增量（弧度）
        interval: 阶梯间隔（秒）
        max_gap: 上限（弧度）
        phase: 第一次增量的时刻（秒）
    """
    kind: str = 'constant'
    gap: float = 0.0
    step: float = float(deg_to_rad(10.0))
    interval: float = 30.0
    max_gap: float = float(deg_to_rad(200.0))
    phase: float = 15.0

    def __post_init__(self):
        if self.kind not in ('constant', 'staircase'):
            raise ParameterError(f"未知齿隙规律: {self.kind}")
        if self.gap < 0 or self.step < 0 or self.max_gap < 0:
            raise ParameterError("齿隙参数不能为负")
        if self.kind == 'staircase' and not self.interval > 0:
            raise ParameterError(f"阶梯间隔必须为正: {self.interval}")


def backlash_schedule_value(schedule, t):
    """
    t 时刻的齿隙半宽

    staircase: t < phase 时为 0，之后为 min(max_gap, (floor((t - phase)/interval) + 1)·step)
    """
    t = np.asarray(t, dtype=float)
    if schedule.kind == 'constant':
        out = np.full(t.shape, schedule.gap)
    else:
        count = np.floor((t - schedule.phase) / schedule.interval) + 1.0
        out = np.where(t < schedule.phase, 0.0, np.minimum(schedule.max_gap, count * schedule.step))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ImcSettings:
    """内模控制器调节参数（角度为弧度）"""
    tau_r: float = 1.1379
    K_theta: float = 10.0
    dead_zone: float = float(deg_to_rad(0.9))
    estimator_gap: float = 0.0
    estimator_in_feedback: bool = True
    estimator_in_model: bool = True


@dataclass(frozen=True)
class Scenario:
    """
    仿真场景

    Parameters:
        architecture: 'pid' | 'imc_linear' | 'imc_dz' | 'imc_dz_estimator'
        command: 指令
        backlash: 齿隙规律
        duration: 仿真时长（秒）
        plant_rate_hz: 对象步进频率
        controller_rate_hz: 控制器更新频率，必须整除对象频率
        plant: 实际对象参数
        motor: 虚拟电机参数
        K_m: 步进积分增益
        perturbation: 实际对象的附加质量
        model: 内模使用的集中参数，None 表示与 plant 相同（不含附加质量）
        imc: 内模调节参数
        pid: PID 参数
        noise_std: 位移测量噪声标准差（米）
        seed: 噪声随机种子
        encoder_ppr: 电机角编码器每转脉冲数，0 表示不量化
        trace_decimation: 记录抽取倍数
        guard: 发散判定界限（米）
        bypass_backlash: 完全跳过齿隙环节
        design: 直接给定的 ImcDesign，优先于 imc/model
        G2_hat: 直接给定的 Ĝ2，优先于 model
    """
    architecture: str = 'imc_linear'
    command: CommandSpec = field(default_factory=CommandSpec)
    backlash: BacklashSchedule = field(default_factory=BacklashSchedule)
    duration: float = 5.0
    plant_rate_hz: float = 1e4
    controller_rate_hz: float = 1e3
    plant: LumpedParams = field(default_factory=LumpedParams)
    motor: VirtualMotorParams = field(default_factory=VirtualMotorParams)
    K_m: float = 1.0
    perturbation: MassPerturbation = field(default_factory=MassPerturbation)
    model: Optional[LumpedParams] = None
    imc: ImcSettings = field(default_factory=ImcSettings)
    pid: PidParams = field(default_factory=PidParams)
    noise_std: float = 0.0
    seed: int = 0
    encoder_ppr: int = 0
    trace_decimation: int = 1
    guard: float = 1.0
    bypass_backlash: bool = False
    design: Optional[ImcDesign] = None
    G2_hat: Optional[object] = None

    def __post_init__(self):
        problems = []
        if self.architecture not in ARCHITECTURES:
            problems.append(f"未知控制结构: {self.architecture}")
        if not self.duration > 0:
            problems.append(f"仿真时长必须为正: {self.duration}")
        if not (self.plant_rate_hz > 0 and self.controller_rate_hz > 0):
            problems.append("步进频率必须为正")
        else:
            ratio = self.plant_rate_hz / self.controller_rate_hz
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                problems.append(f"控制器频率 {self.controller_rate_hz} 必须整除对象频率 {self.plant_rate_hz}")
        if self.noise_std < 0 or self.encoder_ppr < 0 or self.trace_decimation < 1 or not self.guard > 0:
            problems.append("噪声、编码器、抽取倍数或发散界限取值非法")
        if problems:
            raise ParameterError('; '.join(problems))

    @property
    def substeps(self):
        return int(round(self.plant_rate_hz / self.controller_rate_hz))

    @property
    def dt_plant(self):
        return 1.0 / self.plant_rate_hz

    @property
    def dt_controller(self):
        return 1.0 / self.controller_rate_hz

    @property
    def model_params(self):
        return self.model if self.model is not None else self.plant


@dataclass(frozen=True, eq=False)
class SimTrace:
    """
    仿真记录（按对象频率等间隔，可抽取）

    Parameters:
        t: 时间（秒）
        r, y, y_hat, eps_hat: 指令、输出、内模输出、模型误差（米）
        u: 控制信号
        theta_m, theta_d, theta_b: 电机角、从动角、当前齿隙半宽（弧度）
    """
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    eps_hat: np.ndarray
    u: np.ndarray
    theta_m: np.ndarray
    theta_d: np.ndarray
    theta_b: np.ndarray
    command: Optional[CommandSpec] = None
    architecture: str = ''

    def __len__(self):
        return self.t.size

    def to_frame(self):
        return pd.DataFrame({
            't': self.t,
            'r': self.r,
            'y': self.y,
            'y_hat': self.y_hat,
            'eps_hat': self.eps_hat,
            'u': self.u,
            'theta_m_deg': rad_to_deg(self.theta_m),
            'theta_d_deg': rad_to_deg(self.theta_d),
            'theta_b_deg': rad_to_deg(self.theta_b),
        })


def build_design(sc):
    """场景对应的内模设计，结构决定死区和估计器是否启用"""
    if sc.design is not None:
        return sc.design
    settings = sc.imc
    dead_zone = settings.dead_zone if sc.architecture in ('imc_dz', 'imc_dz_estimator') else 0.0
    estimator_gap = settings.estimator_gap if sc.architecture == 'imc_dz_estimator' else 0.0
    model = sc.model_params
    G2_hat = sc.G2_hat if sc.G2_hat is not None else build_g2(model)
    return build_imc_design(
        build_motor_chain(sc.motor, sc.K_m), G2_hat,
        tau_r=settings.tau_r, K_theta=settings.K_theta, dead_zone=dead_zone,
        estimator_gap=estimator_gap, pitch=model.p,
        estimator_in_feedback=settings.estimator_in_feedback,
        estimator_in_model=settings.estimator_in_model,
    )


def _play_block(theta_block, held, gap):
    """块内逐点 play 算子，返回 (θ_d 块, 末值)"""
    out = []
    for value in theta_block:
        held = play_clamp(held, value, gap)
        out.append(held)
    return np.asarray(out), held


class _Recorder:
    """按抽取倍数把块数据写进预分配数组"""

    FIELDS = ('r', 'y', 'y_hat', 'eps_hat', 'u', 'theta_m', 'theta_d', 'theta_b')

    def __init__(self, total, substeps, decimation, dt):
        self.n = substeps
        self.d = decimation
        size = (total + decimation - 1) // decimation
        self.t = np.arange(size) * dt * decimation
        self.data = {name: np.zeros(size) for name in self.FIELDS}
        self.count = 0

    def write(self, k, **blocks):
        start = k * self.n
        offset = (-start) % self.d
        sel = np.arange(offset, self.n, self.d)
        if sel.size == 0:
            return
        pos = (start + sel) // self.d
        for name, values in blocks.items():
            self.data[name][pos] = values[sel] if np.ndim(values) else values
        self.count = int(pos[-1]) + 1

    def trace(self, command, architecture, length=None):
        length = self.count if length is None else length
        return SimTrace(self.t[:length].copy(), *(self.data[name][:length].copy() for name in self.FIELDS),
                        command=command, architecture=architecture)


def run_scenario(sc):
    """
    单次闭环仿真

    每个控制周期：测量 θ_m 和 y（可加噪声/量化），控制器算出 u 并保持一个周期；
    对象在周期内按提升后的块映射推进电机链，逐点过齿隙，再推进传动模型

    参数:
    - sc: Scenario

    返回:
    - SimTrace
    """
    n = sc.substeps
    dt = sc.dt_plant
    n_ticks = int(round(sc.duration * sc.controller_rate_hz))
    is_pid = sc.architecture == 'pid'
    rng = np.random.default_rng(sc.seed)
    quantum = 2.0 * np.pi / sc.encoder_ppr if sc.encoder_ppr else 0.0

    G1 = build_motor_chain(sc.motor, sc.K_m)
    G2 = build_g2(sc.plant, sc.perturbation)
    motor = lift_ss(realize_discrete(G1, dt), n)
    trans = lift_ss(realize_discrete(G2, dt), n)
    x1 = np.zeros(motor.a_n.shape[0])
    x2 = np.zeros(trans.a_n.shape[0])
    pitch = sc.plant.p

    if is_pid:
        pid = DiscretePid(sc.pid, sc.dt_controller)
    else:
        design = build_design(sc)
        W = DiscreteBlock.from_tf(design.W, sc.dt_controller)
        motor_hat = lift_ss(realize_discrete(design.G1_hat, dt), n)
        trans_hat = lift_ss(realize_discrete(design.G2_hat, dt), n)
        x1h = np.zeros(motor_hat.a_n.shape[0])
        x2h = np.zeros(trans_hat.a_n.shape[0])
        dz = design.dead_zone.width
        est_gap = design.estimator_gap
        use_est_fb = est_gap > 0 and design.estimator_in_feedback
        use_est_model = est_gap > 0 and design.estimator_in_model
        est_fb_plant = est_fb_model = est_model = 0.0

    rec = _Recorder(n_ticks * n, n, sc.trace_decimation, dt)
    held_d = 0.0
    offsets = np.arange(n) * dt

    for k in range(n_ticks):
        t_k = k * sc.dt_controller
        r_k = command_signal(sc.command, t_k)
        gap = 0.0 if sc.bypass_backlash else backlash_schedule_value(sc.backlash, t_k)

        theta_meas = float(motor.obs[0] @ x1)
        if quantum:
            theta_meas = quantum * np.round(theta_meas / quantum)
        y_meas = float(trans.obs[0] @ x2)
        if sc.noise_std:
            y_meas += sc.noise_std * rng.standard_normal()

        if is_pid:
            u = pid.update(r_k - y_meas)
            y_hat_block = 0.0
        else:
            # 内模分支
            y_hat = float(trans_hat.obs[0] @ x2h)
            eps_hat = y_meas - y_hat
            theta_r = W.step(r_k - eps_hat) / design.pitch

            fb = theta_meas
            theta_hat = float(motor_hat.obs[0] @ x1h)
            fb_model = theta_hat
            if use_est_fb:
                est_fb_plant = play_clamp(est_fb_plant, theta_meas, est_gap)
                est_fb_model = play_clamp(est_fb_model, theta_hat, est_gap)
                fb, fb_model = est_fb_plant, est_fb_model
            u = design.K_theta * dead_zone(theta_r - fb, dz)
            u_hat = design.K_theta * dead_zone(theta_r - fb_model, dz)

            theta_hat_block, x1h = motor_hat.run_const(x1h, u_hat)
            if use_est_model:
                theta_hat_d, est_model = _play_block(theta_hat_block.tolist(), est_model, est_gap)
            else:
                theta_hat_d = theta_hat_block
            y_hat_block, x2h = trans_hat.run(x2h, design.pitch * theta_hat_d)

        # 对象块
        theta_block, x1 = motor.run_const(x1, u)
        if gap > 0.0:
            theta_d_block, held_d = _play_block(theta_block.tolist(), held_d, gap)
        else:
            theta_d_block = theta_block
            held_d = float(theta_block[-1])
        y_block, x2 = trans.run(x2, pitch * theta_d_block)

        rec.write(
            k,
            r=command_signal(sc.command, t_k + offsets), y=y_block, y_hat=y_hat_block,
            eps_hat=(y_block - y_hat_block) if not is_pid else 0.0, u=u,
            theta_m=theta_block, theta_d=theta_d_block, theta_b=gap,
        )

        if not np.all(np.isfinite(y_block)) or np.max(np.abs(y_block)) > sc.guard:
            trace = rec.trace(sc.command, sc.architecture)
            logger.warning(f"仿真在 t = {t_k:.4f} s 发散")
            raise SimulationDivergenceError(t_k, trace=trace)

    logger.info(f"仿真完成: {sc.architecture}, {sc.duration} s, {n_ticks} 个控制周期")
    return rec.trace(sc.command, sc.architecture)


def apply_axis(sc, axis, value):
    """
    把扫描轴的取值写进场景

    参数:
    - sc: Scenario
    - axis: str, 见 SWEEP_AXES，角度为弧度，质量 kg，刚度 N/m
    - value: float

    返回:
    - Scenario
    """
    value = float(value)
    if axis == 'dead_zone':
        return replace(sc, imc=replace(sc.imc, dead_zone=value))
    if axis == 'estimator_gap':
        return replace(sc, imc=replace(sc.imc, estimator_gap=value))
    if axis == 'tau_r':
        return replace(sc, imc=replace(sc.imc, tau_r=value))
    if axis == 'backlash':
        return replace(sc, backlash=BacklashSchedule('constant', gap=value))
    if axis == 'mass_mismatch':
        model = sc.model_params
        return replace(sc, model=replace(model, m=model.m + value))
    if axis == 'stiffness_mismatch':
        model = sc.model_params
        return replace(sc, model=replace(model, k=model.k + value))
    raise ParameterError(f"未知扫描轴: {axis}，可选 {', '.join(SWEEP_AXES)}")


def _run_cell(index, sc, cell, t_s, fit_offset):
    """单个扫描格点，发散等错误记录在 error 列"""
    row = dict(cell)
    try:
        trace = run_scenario(sc)
        row.update(compute_metrics(trace, t_s, fit_offset=fit_offset).to_dict())
        row['error'] = ''
    except (BacklashImcError, ValueError) as exc:
        row['error'] = f"{type(exc).__name__}: {exc}"
    return index, row


def sweep(base, axis, values, axis2=None, values2=None, t_s=None, fit_offset=False, max_workers=1):
    """
    参数扫描（单轴或两轴网格）

    参数:
    - base: Scenario
    - axis, values: 第一扫描轴及其取值
    - axis2, values2: 可选的第二扫描轴
    - t_s: float, 衰减拟合起点
    - fit_offset: bool, 衰减拟合是否带偏置
    - max_workers: int, 大于 1 时多进程并行

    返回:
    - pd.DataFrame: 每个格点一行，按输入顺序排列，失败格点 error 列非空
    """
    for name in (axis, axis2):
        if name is not None and name not in SWEEP_AXES:
            raise ParameterError(f"未知扫描轴: {name}，可选 {', '.join(SWEEP_AXES)}")
    grid = list(product(values, values2)) if axis2 is not None else [(v,) for v in values]

    jobs = []
    for index, combo in enumerate(grid):
        sc = apply_axis(base, axis, combo[0])
        cell = {axis: float(combo[0])}
        if axis2 is not None:
            sc = apply_axis(sc, axis2, combo[1])
            cell[axis2] = float(combo[1])
        jobs.append((index, sc, cell))

    rows = [None] * len(jobs)
    if max_workers <= 1:
        for index, sc, cell in tqdm(jobs, desc=f"扫描 {axis}"):
            rows[index] = _run_cell(index, sc, cell, t_s, fit_offset)[1]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            futures = [executor.submit(_run_cell, index, sc, cell, t_s, fit_offset) for index, sc, cell in jobs]
            for future in tqdm(as_completed(futures), total=len(futures), desc=f"扫描 {axis}"):
                index, row = future.result()
                rows[index] = row

    failed = sum(1 for row in rows if row['error'])
    if failed:
        logger.warning(f"{failed}/{len(rows)} 个扫描格点失败")
    return pd.DataFrame(rows)


__all__ = [
    'ARCHITECTURES',
    'SWEEP_AXES',
    'CommandSpec',
    'command_signal',
    'BacklashSchedule',
    'backlash_schedule_value',
    'ImcSettings',
    'Scenario',
    'SimTrace',
    'build_design',
    'run_scenario',
    'compute_metrics',
    'apply_axis',
    'sweep',
]
