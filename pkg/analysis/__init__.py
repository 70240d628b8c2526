#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
结果分析模块
描述函数稳定性分析、仿真记录指标和结果文件输出
"""

from .limit_cycle import (
    LocusCurve,
    LimitCyclePrediction,
    LimitCycleSearch,
    open_loop_imc,
    open_loop_pid,
    neg_inv_df_locus,
    nyquist_locus,
    find_limit_cycle,
    predict_output_amplitude,
    with_amplitude,
    loop_margins,
)
from .trace_metrics import TraceMetrics, compute_metrics, per_cycle_phase_deg, per_cycle_control_peak
from .report_generator import ReportGenerator, to_jsonable

__all__ = [
    'LocusCurve',
    'LimitCyclePrediction',
    'LimitCycleSearch',
    'open_loop_imc',
    'open_loop_pid',
    'neg_inv_df_locus',
    'nyquist_locus',
    'find_limit_cycle',
    'predict_output_amplitude',
    'with_amplitude',
    'loop_margins',
    'TraceMetrics',
    'compute_metrics',
    'per_cycle_phase_deg',
    'per_cycle_control_peak',
    'ReportGenerator',
    'to_jsonable',
]
