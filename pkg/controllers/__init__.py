#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
控制器综合
参考模型、PID、内模控制器设计和鲁棒性指标
"""

from .reference_model import TAU_0, ReferenceModel, reference_model_tf, bandwidth_hz
from .pid_controller import PidParams, pid_tf, DiscretePid
from .imc_controller import (
    ImcDesign,
    check_minimum_phase,
    design_prefilter,
    inner_loop_tf,
    equivalent_controller,
    build_imc_design,
    design_to_dict,
    design_from_dict,
)
from .robustness import (
    UncertaintyBound,
    complementary_sensitivity,
    delta_from_plants,
    uncertainty_from_plants,
    robust_stability_margin,
    sensitivity_magnitude,
    frequency_table,
)

__all__ = [
    'TAU_0',
    'ReferenceModel',
    'reference_model_tf',
    'bandwidth_hz',
    'PidParams',
    'pid_tf',
    'DiscretePid',
    'ImcDesign',
    'check_minimum_phase',
    'design_prefilter',
    'inner_loop_tf',
    'equivalent_controller',
    'build_imc_design',
    'design_to_dict',
    'design_from_dict',
    'UncertaintyBound',
    'complementary_sensitivity',
    'delta_from_plants',
    'uncertainty_from_plants',
    'robust_stability_margin',
    'sensitivity_magnitude',
    'frequency_table',
]
