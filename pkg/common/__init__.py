#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
公共工具模块
线性系统运算、非光滑环节、单位换算、异常和日志
"""

from .errors import (
    BacklashImcError,
    ConfigError,
    DesignError,
    SimulationDivergenceError,
    InstabilityError,
)
from .lti import (
    Polynomial,
    RationalTF,
    StateSpaceModel,
    ModeEstimate,
    tf,
    poly_roots,
    mode_of_root_pair,
    tf_eval,
    freq_response,
    tf_connect,
    tf_to_ss,
    discretize_zoh,
    ss_step,
)
from .nonlinearities import (
    BacklashState,
    DeadZoneSpec,
    DescribingFunctionPoint,
    backlash_update,
    backlash_velocity_step,
    dead_zone,
    describing_function,
    df_fourier_coeffs,
    backlash_zone_waveform,
)
from .log_utils import setup_logger

__all__ = [
    'BacklashImcError',
    'ConfigError',
    'DesignError',
    'SimulationDivergenceError',
    'InstabilityError',
    'Polynomial',
    'RationalTF',
    'StateSpaceModel',
    'ModeEstimate',
    'tf',
    'poly_roots',
    'mode_of_root_pair',
    'tf_eval',
    'freq_response',
    'tf_connect',
    'tf_to_ss',
    'discretize_zoh',
    'ss_step',
    'BacklashState',
    'DeadZoneSpec',
    'DescribingFunctionPoint',
    'backlash_update',
    'backlash_velocity_step',
    'dead_zone',
    'describing_function',
    'df_fourier_coeffs',
    'backlash_zone_waveform',
    'setup_logger',
]
