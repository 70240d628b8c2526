#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
描述函数稳定性分析
开环传递函数构造、-1/N(χ) 轨迹、谐波平衡方程 1 + N(χ)G_OL(i2πf) = 0 的求解和极限环幅值预测
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from scipy.optimize import least_squares, minimize_scalar

from common.errors import BacklashImcError, DegenerateDesignError, DegenerateInputError
from common.lti import freq_response_finite, tf_connect, tf_eval, tf_scale
from common.nonlinearities import describing_function, describing_function_values
from controllers.imc_controller import equivalent_controller, inner_loop_tf
from controllers.pid_controller import pid_tf

logger = logging.getLogger(__name__)

DEFAULT_F_RANGE = (0.5, 15.0)


@dataclass(frozen=True, eq=False)
class LocusCurve:
    """
    复平面轨迹

    Parameters:
        params: 参数（Nyquist 分支为频率 Hz，描述函数分支为 χ），严格递增
        points: 复数点
        label: 分支名称
    """
    params: np.ndarray
    points: np.ndarray
    label: str = ''

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float).ravel()
        points = np.asarray(self.points, dtype=complex).ravel()
        if params.size != points.size:
            raise DegenerateInputError(f"轨迹参数与点数不一致: {params.size} vs {points.size}")
        if np.any(np.diff(params) <= 0):
            raise DegenerateInputError("轨迹参数必须严格递增")
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'points', points)

    def to_frame(self):
        return pd.DataFrame({'param': self.params, 're': self.points.real, 'im': self.points.imag})


@dataclass(frozen=True)
class LimitCyclePrediction:
    """
    极限环预测

    Parameters:
        f_l: 频率（Hz）
        chi_l: 幅值比 χ = θ_b/Θ_m
        Theta_m: 电机角幅值（弧度），未给齿隙时为 nan
        A_l: 输出一次谐波幅值（米），计算前为 nan
        gap_distance: 轨迹距离 |G_OL + 1/N|
        normalized_distance: 轨迹距离除以网格上的 max|G_OL|
    """
    f_l: float
    chi_l: float
    Theta_m: float = float('nan')
    A_l: float = float('nan')
    gap_distance: float = float('nan')
    normalized_distance: float = float('nan')


@dataclass(frozen=True)
class LimitCycleSearch:
    """搜索结果：prediction 为 None 表示无交点，min_distance 为达到的最小 |G_OL + 1/N|"""
    prediction: object
    min_distance: float
    f_at_min: float
    chi_at_min: float
    normalized_distance: float


def open_loop_imc(d, G1, G2):
    """
    内模回路开环 G_OL = W/(1 - WĜ_θĜ2)·G_θ·G2

    参数:
    - d: ImcDesign
    - G1, G2: RationalTF, 实际对象

    返回:
    - RationalTF
    """
    try:
        c_e = equivalent_controller(d)
    except DegenerateInputError as exc:
        raise DegenerateDesignError(f"1 - WĜ_θĜ2 恒为零: {exc}") from exc
    g_theta = inner_loop_tf(d.K_theta, G1)
    return tf_connect(tf_connect(c_e, g_theta, 'series'), G2, 'series')


def open_loop_pid(pid, G1, G2, pitch=1.0):
    """
    PID 回路开环 C_PID·error_scale·p·G1·G2

    error_scale 把米换成 PID 使用的误差单位，pitch 把电机角换成丝杠位移
    """
    c = tf_scale(pid_tf(pid), pid.error_scale * pitch)
    return tf_connect(tf_connect(c, G1, 'series'), G2, 'series')


def neg_inv_df_locus(chi_grid):
    """
    -1/N(χ) 轨迹，χ = 1 处 N = 0 对应无穷远点，被丢弃并记录日志

    返回:
    - LocusCurve
    """
    chi = np.sort(np.asarray(chi_grid, dtype=float))
    keep = chi < 1.0
    if not np.all(keep):
        logger.info(f"-1/N 轨迹丢弃 {int(np.sum(~keep))} 个 χ = 1 的点")
    chi = chi[keep]
    return LocusCurve(chi, -1.0 / describing_function_values(chi), 'neg_inv_df')


def nyquist_locus(g_ol, freqs):
    """开环频率响应轨迹，靠近极点的频率被丢弃"""
    kept, values = freq_response_finite(g_ol, freqs)
    return LocusCurve(kept, values, 'nyquist')


def _distance(g_ol, f, chi):
    try:
        g = tf_eval(g_ol, f)
    except BacklashImcError:
        return np.inf
    return abs(g + 1.0 / describing_function(chi).value)


def find_limit_cycle(g_ol, f_range=DEFAULT_F_RANGE, chi_grid=None, tol=1e-2, n_freq=2000, gap=None,
                     normalize=True):
    """
    在 (f, χ) 平面上搜索谐波平衡解

    先在对数频率网格和 χ 网格上粗扫两条轨迹的距离 D(f, χ) = |G_OL(i2πf) + 1/N(χ)|，再在最优网格点邻域内交替做一维有界搜索，
    最后用带界最小二乘对 G_OL + 1/N = 0 精修；只接受使距离下降的结果

    参数:
    - g_ol: RationalTF, 开环传递函数
    - f_range: tuple, 频率范围（Hz）
    - chi_grid: χ 网格，默认 (0.001, 0.999) 上 500 个均匀点
    - tol: float, 判定交点的距离阈值
    - n_freq: int, 频率网格点数
    - gap: float, 齿隙半宽（弧度），给出时计算 Θ_m = θ_b/χ
    - normalize: bool, 为 True 时用 D / max|G_OL| 与 tol 比较，为 False 时直接用 D

    返回:
    - LimitCycleSearch
    """
    f_lo, f_hi = f_range
    if not 0 < f_lo < f_hi:
        raise DegenerateInputError(f"频率范围无效: {f_range}")
    chi = np.linspace(0.001, 0.999, 500) if chi_grid is None else np.sort(np.asarray(chi_grid, dtype=float))
    chi = chi[(chi > 0.0) & (chi < 1.0)]
    if chi.size < 2:
        raise DegenerateInputError("χ 网格至少需要两个 (0, 1) 内的点")

    freqs, G = freq_response_finite(g_ol, np.logspace(np.log10(f_lo), np.log10(f_hi), n_freq))
    N = describing_function_values(chi)
    D = np.abs(G[:, None] + 1.0 / N[None, :])
    scale = float(np.max(np.abs(G)))
    i, j = np.unravel_index(int(np.argmin(D)), D.shape)
    best_f, best_chi, best_d = freqs[i], chi[j], float(D[i, j])

    # 邻域：相邻网格点之间
    lf_lo = np.log(freqs[max(i - 1, 0)])
    lf_hi = np.log(freqs[min(i + 1, freqs.size - 1)])
    c_lo = chi[max(j - 1, 0)]
    c_hi = chi[min(j + 1, chi.size - 1)]

    for _ in range(40):
        previous = best_d
        res = minimize_scalar(lambda lf: _distance(g_ol, np.exp(lf), best_chi),
                              bounds=(lf_lo, lf_hi), method='bounded', options={'xatol': 1e-12})
        if res.fun < best_d:
            best_f, best_d = float(np.exp(res.x)), float(res.fun)
        res = minimize_scalar(lambda c: _distance(g_ol, best_f, c),
                              bounds=(c_lo, c_hi), method='bounded', options={'xatol': 1e-12})
        if res.fun < best_d:
            best_chi, best_d = float(res.x), float(res.fun)
        if previous - best_d <= 1e-15:
            break

    def balance(x):
        try:
            value = tf_eval(g_ol, np.exp(x[0])) + 1.0 / describing_function(x[1]).value
        except BacklashImcError:
            return np.array([1e6, 1e6])
        return np.array([value.real, value.imag])

    x0 = np.clip([np.log(best_f), best_chi], [lf_lo, c_lo], [lf_hi, c_hi])
    lower, upper = [lf_lo, c_lo], [lf_hi, c_hi]
    if np.all(np.less(lower, upper)):
        polish = least_squares(balance, x0, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        polished = float(np.hypot(*polish.fun))
        if polished < best_d:
            best_f, best_chi, best_d = float(np.exp(polish.x[0])), float(polish.x[1]), polished

    normalized = best_d / scale
    logger.debug(f"轨迹最小距离 {best_d:.3e} 位于 f={best_f:.4f} Hz, χ={best_chi:.4f}")
    prediction = None
    if (normalized if normalize else best_d) < tol:
        theta_m = gap / best_chi if gap is not None else float('nan')
        prediction = LimitCyclePrediction(best_f, best_chi, theta_m, float('nan'), best_d, normalized)
        logger.info(f"预测极限环: f_l={best_f:.4f} Hz, χ_l={best_chi:.4f}")
    return LimitCycleSearch(prediction, best_d, best_f, best_chi, normalized)


def predict_output_amplitude(g2, pred, p, gap=None):
    """
    输出一次谐波幅值 A_l = |G2(f_l)|·|N(χ_l)|·Θ_m·p

    参数:
    - g2: RationalTF
    - pred: LimitCyclePrediction
    - p: float, 丝杠导程（m/rad）
    - gap: float, 齿隙半宽，prediction 未带 Θ_m 时使用

    返回:
    - float: 米
    """
    theta_m = pred.Theta_m if gap is None else gap / pred.chi_l
    if not np.isfinite(theta_m):
        raise DegenerateInputError("需要齿隙半宽才能计算 Θ_m")
    n = describing_function(pred.chi_l).value
    return abs(tf_eval(g2, pred.f_l)) * abs(n) * theta_m * p


def with_amplitude(pred, g2, p, gap=None):
    """返回填好 Θ_m 和 A_l 的预测"""
    theta_m = pred.Theta_m if gap is None else gap / pred.chi_l
    return replace(pred, Theta_m=theta_m, A_l=predict_output_amplitude(g2, pred, p, gap))


def _first_crossing(x, y, level):
    """y 从上到下或从下到上第一次穿过 level 的插值位置"""
    s = np.sign(y - level)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    if idx.size == 0:
        return None
    k = idx[0]
    w = (level - y[k]) / (y[k + 1] - y[k])
    return k, w, x[k] + w * (x[k + 1] - x[k])


def loop_margins(g_ol, freqs):
    """
    线性回路（不含齿隙）的增益裕度和相位裕度

    返回:
    - dict: gain_margin, phase_crossover_hz, phase_margin_deg, gain_crossover_hz，无穿越时为 inf/nan
    """
    f, L = freq_response_finite(g_ol, freqs)
    mag_db = 20.0 * np.log10(np.abs(L))
    phase = np.rad2deg(np.unwrap(np.angle(L)))
    lf = np.log(f)
    margins = {'gain_margin': float('inf'), 'phase_crossover_hz': float('nan'),
               'phase_margin_deg': float('inf'), 'gain_crossover_hz': float('nan')}

    gc = _first_crossing(lf, mag_db, 0.0)
    if gc is not None:
        k, w, x = gc
        ph = phase[k] + w * (phase[k + 1] - phase[k])
        margins['gain_crossover_hz'] = float(np.exp(x))
        margins['phase_margin_deg'] = float(180.0 + ph - 360.0 * np.round((180.0 + ph) / 360.0))

    # 相位穿越 -180° 的奇数倍
    wraps = np.floor((phase + 180.0) / 360.0)
    idx = np.flatnonzero(np.diff(wraps) != 0)
    if idx.size:
        k = int(idx[0])
        level = 360.0 * max(wraps[k], wraps[k + 1]) - 180.0
        w = (level - phase[k]) / (phase[k + 1] - phase[k])
        x = lf[k] + w * (lf[k + 1] - lf[k])
        m = mag_db[k] + w * (mag_db[k + 1] - mag_db[k])
        margins['phase_crossover_hz'] = float(np.exp(x))
        margins['gain_margin'] = float(10.0 ** (-m / 20.0))
    return margins
