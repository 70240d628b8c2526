#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
内模控制器设计
预滤波器 W = G_r·Ĝ2⁻¹、内环 G_θ = K_θG1/(1 + K_θG1)、等效控制器 C_e，
以及带死区和齿隙估计器的非线性内模设计的序列化
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from common.errors import DesignError, PoleExcessError, StabilityError
from common.lti import RationalTF, Polynomial, tf_connect, tf_inverse, tf_scale
from common.nonlinearities import DeadZoneSpec
from common.units import deg_to_rad, rad_to_deg
from .reference_model import ReferenceModel, reference_model_tf

logger = logging.getLogger(__name__)

# 实部大于该值的零点按右半平面处理
MIN_PHASE_TOL = -1e-9


@dataclass(frozen=True, eq=False)
class ImcDesign:
    """
    内模控制器设计结果

    Parameters:
        Gr: 参考模型
        W: 预滤波器
        K_theta: 内环角度增益
        G1_hat: 电机链模型（电压到电机角）
        G2_hat: 传动模型（丝杠位移到顶平台位移）
        dead_zone: 内环角度误差死区
        estimator_gap: 齿隙估计值 θ̂_b（弧度），0 表示不用估计器
        pitch: 丝杠导程（m/rad），θ_r = W 输出/p
        tau_r: 参考模型调节时间参数
        estimator_in_feedback: 估计器是否作用于内环反馈
        estimator_in_model: 估计器是否作用于内模分支
    """
    Gr: RationalTF
    W: RationalTF
    K_theta: float
    G1_hat: RationalTF
    G2_hat: RationalTF
    dead_zone: DeadZoneSpec = field(default_factory=DeadZoneSpec)
    estimator_gap: float = 0.0
    pitch: float = 2.54e-3 / (2.0 * np.pi)
    tau_r: float = 1.1379
    estimator_in_feedback: bool = True
    estimator_in_model: bool = True

    @property
    def is_linear(self):
        return self.dead_zone.width == 0.0 and self.estimator_gap == 0.0

    @property
    def G_theta_hat(self):
        return inner_loop_tf(self.K_theta, self.G1_hat)


def check_minimum_phase(g2_hat):
    """所有零点实部必须小于 -1e-9，否则抛出 DesignError 并列出零点"""
    bad = [z for z in g2_hat.zeros() if z.real > MIN_PHASE_TOL]
    if bad:
        listing = ', '.join(f"{z.real:.6g}{z.imag:+.6g}j" for z in bad)
        raise DesignError(f"Ĝ2 非最小相位，不能直接求逆，右半平面零点: {listing}", zeros=bad)


def design_prefilter(Gr, G2_hat):
    """
    W = G_r·den(Ĝ2)/num(Ĝ2)，不做零极点对消

    参数:
    - Gr: RationalTF, 参考模型
    - G2_hat: RationalTF, 稳定且最小相位

    返回:
    - RationalTF
    """
    if not G2_hat.is_stable():
        raise StabilityError("Ĝ2 不稳定，不能作为内模", poles=G2_hat.poles())
    check_minimum_phase(G2_hat)
    if Gr.relative_degree < G2_hat.relative_degree:
        raise PoleExcessError(
            f"参考模型相对阶 {Gr.relative_degree} 小于 Ĝ2 相对阶 {G2_hat.relative_degree}，W 非真"
        )
    return tf_connect(Gr, tf_inverse(G2_hat), 'series')


def inner_loop_tf(K_theta, G1):
    """
    角度内环闭环 K_θG1/(1 + K_θG1)

    闭环极点不全在左半平面时抛出 StabilityError
    """
    g_theta = tf_connect(tf_scale(G1, K_theta), 1.0, 'negative_feedback')
    if not g_theta.is_stable():
        unstable = [p for p in g_theta.poles() if p.real >= 0]
        raise StabilityError(f"K_θ = {K_theta} 时内环不稳定", poles=unstable)
    return g_theta


def equivalent_controller(d):
    """
    从跟踪误差 r - y 到 θ_r 的等效控制器 C_e = W/(1 - W·Ĝ_θ·Ĝ2)

    只使用设计的线性部分，死区和估计器被忽略
    """
    if not d.is_linear:
        logger.warning("等效控制器忽略死区和齿隙估计器，只对线性部分成立")
    loop = tf_connect(d.G_theta_hat, d.G2_hat, 'series')
    return tf_connect(d.W, tf_scale(loop, -1.0), 'negative_feedback')


def build_imc_design(G1_hat, G2_hat, tau_r=1.1379, K_theta=10.0, dead_zone=0.0,
                     estimator_gap=0.0, pitch=2.54e-3 / (2.0 * np.pi),
                     estimator_in_feedback=True, estimator_in_model=True):
    """
    由模型和调节参数构造完整内模设计

    参数:
    - G1_hat, G2_hat: RationalTF, 内部模型
    - tau_r: float, 参考模型调节时间参数（秒）
    - K_theta: float, 内环增益
    - dead_zone: float, 死区宽度（弧度）
    - estimator_gap: float, 齿隙估计值（弧度）
    - pitch: float, 丝杠导程（m/rad）

    返回:
    - ImcDesign
    """
    Gr = reference_model_tf(ReferenceModel(tau_r))
    W = design_prefilter(Gr, G2_hat)
    inner_loop_tf(K_theta, G1_hat)
    design = ImcDesign(
        Gr=Gr, W=W, K_theta=float(K_theta), G1_hat=G1_hat, G2_hat=G2_hat,
        dead_zone=DeadZoneSpec(dead_zone), estimator_gap=float(estimator_gap), pitch=float(pitch),
        tau_r=float(tau_r), estimator_in_feedback=estimator_in_feedback,
        estimator_in_model=estimator_in_model,
    )
    logger.info(f"内模设计完成: τ_r={tau_r}, K_θ={K_theta}, W 为 {W.num.degree}/{W.den.degree} 阶")
    return design


def _tf_dict(g):
    return {'num': g.num.coeffs.tolist(), 'den': g.den.coeffs.tolist()}


def _tf_from_dict(data):
    return RationalTF(Polynomial(data['num']), Polynomial(data['den']))


def design_to_dict(d):
    """设计序列化为 JSON 友好的字典，系数按升幂排列，浮点保持全精度"""
    return {
        'tau_r': d.tau_r,
        'K_theta': d.K_theta,
        'dead_zone_deg': float(rad_to_deg(d.dead_zone.width)),
        'estimator_gap_deg': float(rad_to_deg(d.estimator_gap)),
        'dead_zone_rad': d.dead_zone.width,
        'estimator_gap_rad': d.estimator_gap,
        'pitch_m_per_rad': d.pitch,
        'estimator_in_feedback': d.estimator_in_feedback,
        'estimator_in_model': d.estimator_in_model,
        'Gr': _tf_dict(d.Gr),
        'W': _tf_dict(d.W),
        'G1_hat': _tf_dict(d.G1_hat),
        'G2_hat': _tf_dict(d.G2_hat),
    }


def design_from_dict(data):
    """从 design_to_dict 的输出还原设计，系数不重新综合"""
    dead_zone = data.get('dead_zone_rad', deg_to_rad(data.get('dead_zone_deg', 0.0)))
    gap = data.get('estimator_gap_rad', deg_to_rad(data.get('estimator_gap_deg', 0.0)))
    return ImcDesign(
        Gr=_tf_from_dict(data['Gr']),
        W=_tf_from_dict(data['W']),
        K_theta=float(data['K_theta']),
        G1_hat=_tf_from_dict(data['G1_hat']),
        G2_hat=_tf_from_dict(data['G2_hat']),
        dead_zone=DeadZoneSpec(float(dead_zone)),
        estimator_gap=float(gap),
        pitch=float(data['pitch_m_per_rad']),
        tau_r=float(data['tau_r']),
        estimator_in_feedback=bool(data.get('estimator_in_feedback', True)),
        estimator_in_model=bool(data.get('estimator_in_model', True)),
    )
