#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
运行控制器设计、仿真和分析
所有结果写成 CSV/JSON，供外部绘图工具使用
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np
from dotenv import load_dotenv

from analysis import (
    ReportGenerator,
    compute_metrics,
    find_limit_cycle,
    loop_margins,
    neg_inv_df_locus,
    nyquist_locus,
    open_loop_imc,
    open_loop_pid,
    with_amplitude,
)
from common.config import load_config
from common.errors import (
    ConfigError,
    DegenerateDesignError,
    DesignError,
    InstabilityError,
    SimulationDivergenceError,
    StabilityError,
)
from common.log_utils import setup_logger
from controllers import (
    ReferenceModel,
    bandwidth_hz,
    complementary_sensitivity,
    delta_from_plants,
    design_to_dict,
    frequency_table,
    robust_stability_margin,
    uncertainty_from_plants,
)
from identification import TransmissionSystem, fit_lumped_params, fit_rational_frf, stepped_sine_frf
from plants import build_g2, build_motor_chain
from simulation_engine import build_design, run_scenario, sweep

# 加载环境变量
load_dotenv()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def parse_args(argv=None):
    """解析命令行参数"""
    parser = argparse.ArgumentParser(description='带夹层齿隙的定位系统内模控制工具')
    parser.add_argument('command', choices=['design', 'simulate', 'stability', 'frf', 'sweep'], help='要执行的命令')
    parser.add_argument('--config', type=str, default='data/json/default_config.json', help='JSON 配置文件路径')
    parser.add_argument('--out', type=str, default=None, help='输出目录，覆盖配置中的 output_dir')
    parser.add_argument('--workers', type=int, default=int(os.getenv('IMC_MAX_WORKERS', '1')), help='并行进程数')
    parser.add_argument('--seed', type=int, default=None, help='测量噪声随机种子，覆盖配置')
    return parser.parse_args(argv)


def _tf_summary(g):
    return {
        'num': g.num.coeffs.tolist(),
        'den': g.den.coeffs.tolist(),
        'poles': [complex(p) for p in g.poles()],
        'zeros': [complex(z) for z in g.zeros()],
    }


def _design_freqs(settings, f_min=0.1, f_max=50.0, n=200):
    return np.logspace(np.log10(settings.get('f_min_hz', f_min)), np.log10(settings.get('f_max_hz', f_max)),
                       int(settings.get('n_freqs', n)))


def cmd_design(config, report):
    """内模设计：设计 JSON、T_0/S 频率表，给出备选对象时附带鲁棒稳定裕度"""
    sc = replace(config.scenario, architecture='imc_linear') if config.scenario.architecture == 'pid' \
        else config.scenario
    design = build_design(sc)
    freqs = _design_freqs(config.design)
    G_theta = design.G_theta_hat
    summary = {
        'design': design_to_dict(design),
        'Gr_poles': [complex(p) for p in design.Gr.poles()],
        'bandwidth_hz': bandwidth_hz(ReferenceModel(design.tau_r)),
        'W': _tf_summary(design.W),
    }

    delta = None
    if 'alternate' in config.design:
        G2_alt = build_g2(sc.plant, config.design['alternate'])
        delta = delta_from_plants(G2_alt, design.G2_hat, freqs)
        T0 = complementary_sensitivity(design.Gr, G_theta)
        margin, worst_f = robust_stability_margin(T0, uncertainty_from_plants(G2_alt, design.G2_hat, freqs))
        summary['robust_margin'] = margin
        summary['robust_worst_hz'] = worst_f
        print(f"鲁棒稳定裕度: {margin:.4g}（最差频率 {worst_f:.4g} Hz）")

    table = frequency_table(design.Gr, G_theta, freqs, G_theta_hat=G_theta, delta=delta)
    report.save_frame(table, 'frequency_table.csv')
    report.save_json(summary, 'design.json')
    print(f"参考模型极点: {design.Gr.poles()[0].real:.4f}（二重），带宽 {summary['bandwidth_hz']:.4f} Hz")
    return summary


def cmd_simulate(config, report):
    """单次仿真：trace.csv 和 metrics.json，发散时仍写出截断记录"""
    try:
        trace = run_scenario(config.scenario)
    except SimulationDivergenceError as exc:
        if exc.trace is not None:
            report.save_frame(exc.trace.to_frame(), 'trace.csv')
        report.save_json({'diverged': True, 'time_s': exc.time_s}, 'metrics.json')
        raise
    metrics = compute_metrics(trace, config.t_s, fit_offset=config.fit_offset)
    report.save_frame(trace.to_frame(), 'trace.csv')
    result = dict(metrics.to_dict(), diverged=False, architecture=trace.architecture)
    report.save_json(result, 'metrics.json')
    print(f"仿真完成: 2% 调节时间 {metrics.settling_time_2pct:.4g} s, 超调 {metrics.overshoot_pct:.4g}%")
    return result


def _search_summary(search, g2, pitch, gap):
    pred = search.prediction
    return {
        'prediction': with_amplitude(pred, g2, pitch, gap) if pred is not None else None,
        'min_distance': search.min_distance,
        'f_at_min': search.f_at_min,
        'chi_at_min': search.chi_at_min,
        'normalized_distance': search.normalized_distance,
    }


def cmd_stability(config, report):
    """描述函数稳定性分析：PID 和内模回路的 Nyquist 轨迹、-1/N 轨迹和极限环预测"""
    sc = config.scenario
    settings = config.stability
    gap = settings.get('backlash', float(np.deg2rad(50.0)))
    f_range = (settings.get('f_min_hz', 0.01), settings.get('f_max_hz', 15.0))
    chi_grid = np.linspace(0.001, 0.999, int(settings.get('chi_points', 500)))
    G1 = build_motor_chain(sc.motor, sc.K_m)
    G2 = build_g2(sc.plant, sc.perturbation)

    imc_sc = replace(sc, architecture='imc_linear') if sc.architecture == 'pid' else sc
    loops = {
        'pid': open_loop_pid(sc.pid, G1, G2, pitch=sc.plant.p),
        'imc': open_loop_imc(build_design(imc_sc), G1, G2),
    }

    nyquist_freqs = np.logspace(np.log10(f_range[0]), np.log10(f_range[1]), 2000)
    report.save_frame(neg_inv_df_locus(chi_grid).to_frame(), 'locus_neg_inv_df.csv')
    result = {'backlash_deg': float(np.rad2deg(gap))}
    for name, g_ol in loops.items():
        report.save_frame(nyquist_locus(g_ol, nyquist_freqs).to_frame(), f'locus_{name}.csv')
        search = find_limit_cycle(g_ol, f_range, chi_grid, tol=settings.get('tol', 1e-2),
                                  n_freq=int(settings.get('n_freq', 2000)), gap=gap,
                                  normalize=settings.get('normalize', False))
        result[name] = _search_summary(search, G2, sc.plant.p, gap)
        result[name]['margins'] = loop_margins(g_ol, nyquist_freqs)
        status = f"f_l = {search.prediction.f_l:.4f} Hz" if search.prediction else "无交点"
        print(f"{name.upper()} 回路: {status}（最小残差 {search.min_distance:.3e}）")
    report.save_json(result, 'stability.json')
    return result


def cmd_frf(config, report, workers=1):
    """步进正弦辨识：frf.csv，按配置附带集中参数拟合和有理模型拟合"""
    sc = config.scenario
    settings = config.frf
    if 'freqs_hz' in settings:
        freqs = np.asarray(settings['freqs_hz'], dtype=float)
    else:
        freqs = np.linspace(settings.get('f_min_hz', 0.5), settings.get('f_max_hz', 15.0),
                            int(settings.get('n_freqs', 60)))
    system = TransmissionSystem(sc.plant, gap=settings.get('backlash', 0.0))
    frf = stepped_sine_frf(
        system, freqs, amp=settings.get('amp', 0.5), settle_s=settings.get('settle_s', 20.0),
        record_s=settings.get('record_s', 10.0), dt=settings.get('dt', 1e-4),
        n_harmonics=int(settings.get('n_harmonics', 3)), max_workers=workers,
    )
    report.save_frame(frf.to_frame(), 'frf.csv')
    peak = float(frf.freqs[int(np.argmax(frf.magnitude))])
    result = {'peak_hz': peak}
    print(f"FRF 完成: {freqs.size} 个频率，峰值位于 {peak:.4f} Hz")

    if settings.get('fit_lumped', False):
        scale = settings.get('fit_init_scale', 1.1)
        init = replace(sc.plant, m=sc.plant.m * scale, c=sc.plant.c * scale, k=sc.plant.k * scale)
        fit = fit_lumped_params(frf, init)
        result['lumped'] = {
            'params': fit.params, 'cost': fit.cost, 'iterations': fit.iterations,
            'phase_rms_deg': fit.phase_rms_deg,
        }
        print(f"集中参数拟合: k = {fit.params.k:.6g} N/m, m = {fit.params.m:.6g} kg")
    if settings.get('fit_rational', False):
        g = fit_rational_frf(frf, int(settings.get('n_poles', 4)), int(settings.get('n_zeros', 3)))
        result['rational'] = _tf_summary(g)
    report.save_json(result, 'frf_fit.json')
    return result


def cmd_sweep(config, report, workers=1):
    """参数扫描：每个格点一行，失败格点写入 error 列"""
    spec = config.sweep
    if spec is None:
        raise ConfigError(["sweep 命令需要配置 sweep 段"])
    table = sweep(config.scenario, spec.axis, spec.values, spec.axis2, spec.values2,
                  t_s=config.t_s, fit_offset=config.fit_offset, max_workers=workers)
    report.save_frame(table, 'sweep.csv')
    axes = [spec.axis] + ([spec.axis2] if spec.axis2 else [])
    print(report.generate_sweep_summary(table, axes).to_string(index=False))
    return table


def main(argv=None):
    """命令行入口，返回退出码"""
    args = parse_args(argv)
    setup_logger(None, log_dir=os.getenv('IMC_LOG_DIR'))

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, scenario=replace(config.scenario, seed=args.seed))
        output_dir = args.out or config.output_dir
        # 校验通过后才创建输出目录
        report = ReportGenerator(output_dir)
        print(f"执行 {args.command}，配置 {args.config}，输出到 {output_dir}")

        if args.command == 'design':
            cmd_design(config, report)
        elif args.command == 'simulate':
            cmd_simulate(config, report)
        elif args.command == 'stability':
            cmd_stability(config, report)
        elif args.command == 'frf':
            cmd_frf(config, report, workers=args.workers)
        else:
            cmd_sweep(config, report, workers=args.workers)
    except (ConfigError, DesignError, DegenerateDesignError, StabilityError) as exc:
        print(f"错误: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationDivergenceError, InstabilityError) as exc:
        print(f"发散: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
