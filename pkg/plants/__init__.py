#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
被控对象模型
包含三平台传动系统和虚拟电机链
"""

from .transmission import (
    LumpedParams,
    MassPerturbation,
    ReducedMatrices,
    build_reduced_matrices,
    characteristic_polynomial,
    build_g2,
    build_g2_mid,
    build_g2_from_matrices,
    build_g2_mid_from_matrices,
    denominator_modes,
    perturbed_modes,
)
from .virtual_motor import (
    VirtualMotorParams,
    build_virtual_motor,
    stepper_integrator,
    build_motor_chain,
)

__all__ = [
    'LumpedParams',
    'MassPerturbation',
    'ReducedMatrices',
    'build_reduced_matrices',
    'characteristic_polynomial',
    'build_g2',
    'build_g2_mid',
    'build_g2_from_matrices',
    'build_g2_mid_from_matrices',
    'denominator_modes',
    'perturbed_modes',
    'VirtualMotorParams',
    'build_virtual_motor',
    'stepper_integrator',
    'build_motor_chain',
]
