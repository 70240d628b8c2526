#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
系统辨识
谐波拟合、步进正弦 FRF、集中参数和有理模型拟合、残余振动衰减拟合
"""

from .harmonic_fit import HarmonicFit, design_matrix, harmonic_fit, fourier_coeff, frf_point
from .stepped_sine import (
    FrfDataset,
    LinearTfSystem,
    TransmissionSystem,
    excitation,
    measure_frequency,
    stepped_sine_frf,
)
from .lumped_fit import LumpedFitResult, log_magnitude_residual, phase_rms_deg, fit_lumped_params
from .rational_fit import fit_rational_frf
from .decay_fit import DecayFit, decay_model, dominant_frequency, initial_guess, fit_decay

__all__ = [
    'HarmonicFit',
    'design_matrix',
    'harmonic_fit',
    'fourier_coeff',
    'frf_point',
    'FrfDataset',
    'LinearTfSystem',
    'TransmissionSystem',
    'excitation',
    'measure_frequency',
    'stepped_sine_frf',
    'LumpedFitResult',
    'log_magnitude_residual',
    'phase_rms_deg',
    'fit_lumped_params',
    'fit_rational_frf',
    'DecayFit',
    'decay_model',
    'dominant_frequency',
    'initial_guess',
    'fit_decay',
]
