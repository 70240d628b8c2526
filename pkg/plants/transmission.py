#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
三平台传动系统的集中参数模型
约简后的两自由度质量/阻尼/刚度矩阵、丝杠位移到中/顶平台的传递函数以及附加质量下的模态分析
"""

import logging
from dataclasses import dataclass

import numpy as np

from common.errors import ParameterError
from common.lti import Polynomial, RationalTF, ModeEstimate, mode_of_root_pair, poly_roots

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LumpedParams:
    """
    集中参数（国际单位制）

    Parameters:
        m: 单块平台质量（kg）
        m_m: 电机质量（kg）
        c: 阻尼（N·s/m）
        k: 梁总刚度（N/m）
        p: 丝杠导程（m/rad）
    """
    m: float = 16.06
    m_m: float = 2.4
    c: float = 12.0
    k: float = 43570.0
    p: float = 2.54e-3 / (2.0 * np.pi)

    def __post_init__(self):
        bad = [name for name in ('m', 'm_m', 'k', 'p') if not getattr(self, name) > 0]
        if self.c < 0:
            bad.append('c')
        if bad:
            raise ParameterError(f"集中参数非法（c 可为 0，其余必须为正）: {', '.join(bad)}")


@dataclass(frozen=True)
class MassPerturbation:
    """中平台（dm2）与顶平台（dm3）附加质量（kg）"""
    dm2: float = 0.0
    dm3: float = 0.0


@dataclass(frozen=True, eq=False)
class ReducedMatrices:
    """
    约简两自由度模型 M q'' + C q' + K q = f_acc v'' + f_vel v' + f_pos v

    q[0] 为中平台位移，q[1] 为顶平台位移，v 为丝杠输出位移
    """
    M: np.ndarray
    C_mat: np.ndarray
    K_mat: np.ndarray
    f_acc: np.ndarray
    f_vel: np.ndarray
    f_pos: np.ndarray


def build_reduced_matrices(lp, pert=None):
    """
    构建约简矩阵，中平台附加质量进入 (0,0) 元素，驱动侧激励保持名义的 m + m_m

    参数:
    - lp: LumpedParams
    - pert: MassPerturbation, 默认无附加质量

    返回:
    - ReducedMatrices
    """
    pert = pert or MassPerturbation()
    m_mid = lp.m + pert.dm2
    m_top = lp.m + pert.dm3
    if m_mid <= 0 or m_top <= 0:
        raise ParameterError(f"附加质量后的平台质量必须为正: 中平台 {m_mid}, 顶平台 {m_top}")

    M = np.diag([m_mid + lp.m + lp.m_m, m_top])
    C_mat = np.array([[2.0 * lp.c, -lp.c], [-lp.c, lp.c]])
    K_mat = np.array([[2.0 * lp.k, -lp.k], [-lp.k, lp.k]])
    return ReducedMatrices(
        M=M,
        C_mat=C_mat,
        K_mat=K_mat,
        f_acc=np.array([lp.m + lp.m_m, 0.0]),
        f_vel=np.array([lp.c, 0.0]),
        f_pos=np.array([lp.k, 0.0]),
    )


def _impedance(rm):
    """Z(s) = M s² + C s + K 的多项式矩阵与激励多项式"""
    Z = [[Polynomial([rm.K_mat[i, j], rm.C_mat[i, j], rm.M[i, j]]) for j in range(2)] for i in range(2)]
    f = [Polynomial([rm.f_pos[i], rm.f_vel[i], rm.f_acc[i]]) for i in range(2)]
    return Z, f


def characteristic_polynomial(rm):
    """det(M s² + C s + K)"""
    Z, _ = _impedance(rm)
    return Z[0][0] * Z[1][1] - Z[0][1] * Z[1][0]


def build_g2_from_matrices(rm):
    """丝杠位移 v 到顶平台位移的传递函数（伴随矩阵解）"""
    Z, f = _impedance(rm)
    num = -Z[1][0] * f[0] + Z[0][0] * f[1]
    return RationalTF(num, characteristic_polynomial(rm))


def build_g2_mid_from_matrices(rm):
    """丝杠位移 v 到中平台位移的传递函数"""
    Z, f = _impedance(rm)
    num = Z[1][1] * f[0] - Z[0][1] * f[1]
    return RationalTF(num, characteristic_polynomial(rm))


def build_g2(lp, pert=None):
    """
    G2: 丝杠位移到顶平台位移

    参数:
    - lp: LumpedParams
    - pert: MassPerturbation, 可选

    返回:
    - RationalTF: 分子 ((m+m_m)s²+cs+k)(cs+k)，分母 4 阶，直流增益 1
    """
    return build_g2_from_matrices(build_reduced_matrices(lp, pert))


def build_g2_mid(lp, pert=None):
    """丝杠位移到中平台位移，双真，直流增益 1"""
    return build_g2_mid_from_matrices(build_reduced_matrices(lp, pert))


def denominator_modes(g):
    """传递函数分母的全部振动模态，按频率升序，实极点忽略"""
    roots = poly_roots(g.den)
    modes = [mode_of_root_pair(r) for r in roots if r.imag > 0]
    return sorted(modes, key=lambda md: md.natural_frequency_hz)


def perturbed_modes(rm):
    """
    两自由度广义特征值问题 (K - ω²M)φ = 0 的闭式解

    ω² 为 det(M)λ² - (K00 M11 + K11 M00 - 2 K01 M01)λ + det(K) = 0 的两根，
    振型按 φᵀMφ = 1 归一化，阻尼比 ζ = φᵀCφ/(2ω)

    参数:
    - rm: ReducedMatrices

    返回:
    - tuple[ModeEstimate, ModeEstimate]: 按频率升序
    """
    M, C, K = rm.M, rm.C_mat, rm.K_mat
    det_m = np.linalg.det(M)
    if M[0, 0] <= 0 or det_m <= 0:
        raise ParameterError(f"质量矩阵不是正定的: {M.tolist()}")
    if not (np.allclose(K, K.T) and np.allclose(C, C.T)):
        raise ParameterError("刚度矩阵和阻尼矩阵必须对称")

    a = det_m
    b = -(K[0, 0] * M[1, 1] + K[1, 1] * M[0, 0] - 2.0 * K[0, 1] * M[0, 1])
    c = np.linalg.det(K)
    disc = b * b - 4.0 * a * c
    if disc < 0 or c <= 0:
        raise ParameterError("广义特征值不是正实数，检查刚度矩阵是否正定")
    # 数值稳定的二次求根
    q = -0.5 * (b + np.copysign(np.sqrt(disc), b))
    lambdas = sorted([q / a, c / q])

    modes = []
    for lam in lambdas:
        phi = np.array([-(K[0, 1] - lam * M[0, 1]), K[0, 0] - lam * M[0, 0]])
        phi = phi / np.sqrt(phi @ M @ phi)
        omega = np.sqrt(lam)
        zeta = float(phi @ C @ phi) / (2.0 * omega)
        modes.append(ModeEstimate(omega / (2.0 * np.pi), zeta))
    logger.debug(f"模态: {[(round(md.natural_frequency_hz, 4), round(md.damping_ratio, 6)) for md in modes]}")
    return tuple(modes)
