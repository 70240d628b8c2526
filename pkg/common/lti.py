#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
线性时不变系统工具
提供多项式/有理传递函数运算、可控标准型状态空间实现、零阶保持离散化、
频率响应求值和多项式求根，是其它所有模块的基础
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import expm, matrix_balance

from .errors import (
    CompositionError,
    DegenerateInputError,
    DomainError,
    NotOscillatoryError,
    ParameterError,
    PoleProximityError,
    ProperError,
    ShapeError,
)

logger = logging.getLogger(__name__)

# 分母模值相对于各项模值之和低于该比例时视为在极点上求值
POLE_RTOL = 1e-13


def _trim(coeffs):
    """去掉最高次的零系数，零多项式保留为 [0.0]"""
    c = np.array(np.atleast_1d(coeffs), dtype=float).ravel()
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """
    实系数多项式，系数按幂次升序排列

    Parameters:
        coeffs: 升序系数，构造时自动去掉最高次零系数
    """
    coeffs: np.ndarray

    def __post_init__(self):
        c = _trim(self.coeffs)
        c.flags.writeable = False
        object.__setattr__(self, 'coeffs', c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return float(self.coeffs[-1])

    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, x):
        return P.polyval(x, self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(P.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return Polynomial(P.polyadd(self.coeffs, _as_poly(other).coeffs))

    def __sub__(self, other):
        return Polynomial(P.polysub(self.coeffs, _as_poly(other).coeffs))

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def same_as(self, other):
        return self.degree == other.degree and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"


def _as_poly(p):
    return p if isinstance(p, Polynomial) else Polynomial(p)


@dataclass(frozen=True, eq=False)
class RationalTF:
    """
    有理传递函数 num/den

    Parameters:
        num: 分子多项式（或升序系数序列）
        den: 分母多项式（或升序系数序列），不能为零多项式
        sample_time: 离散域采样时间（秒），None 表示连续域

    构造后分母首一化，分子同比例缩放
    """
    num: Polynomial
    den: Polynomial
    sample_time: Optional[float] = None

    def __post_init__(self):
        num = _as_poly(self.num)
        den = _as_poly(self.den)
        if den.is_zero():
            raise DegenerateInputError("传递函数分母不能为零多项式")
        if self.sample_time is not None and not self.sample_time > 0:
            raise DomainError(f"离散传递函数的采样时间必须为正: {self.sample_time}")
        lead = den.leading
        object.__setattr__(self, 'num', Polynomial(num.coeffs / lead))
        object.__setattr__(self, 'den', Polynomial(den.coeffs / lead))

    @property
    def is_discrete(self):
        return self.sample_time is not None

    @property
    def domain(self):
        return 'discrete' if self.is_discrete else 'continuous'

    @property
    def relative_degree(self):
        return self.den.degree - self.num.degree

    @property
    def is_proper(self):
        return self.num.degree <= self.den.degree

    def poles(self):
        return poly_roots(self.den) if self.den.degree > 0 else []

    def zeros(self):
        if self.num.is_zero() or self.num.degree == 0:
            return []
        return poly_roots(self.num)

    def is_stable(self):
        poles = np.asarray(self.poles(), dtype=complex)
        if poles.size == 0:
            return True
        if self.is_discrete:
            return bool(np.all(np.abs(poles) < 1.0))
        return bool(np.all(poles.real < 0.0))

    def __call__(self, x):
        """在复数点（数组）上直接求值，不做极点检查"""
        return self.num(x) / self.den(x)

    def __mul__(self, other):
        return tf_connect(self, other, 'series')

    __rmul__ = __mul__

    def __neg__(self):
        return tf_scale(self, -1.0)

    def __repr__(self):
        dom = 'continuous' if not self.is_discrete else f'discrete(T={self.sample_time})'
        return f"RationalTF(num={self.num.coeffs.tolist()}, den={self.den.coeffs.tolist()}, {dom})"


def tf(num, den, sample_time=None):
    """按升序系数构造传递函数"""
    return RationalTF(Polynomial(num), Polynomial(den), sample_time)


def _as_tf(g, sample_time=None):
    if isinstance(g, RationalTF):
        return g
    return RationalTF(Polynomial([float(g)]), Polynomial([1.0]), sample_time)


@dataclass(frozen=True)
class ModeEstimate:
    """振动模态估计：固有频率（Hz）和阻尼比"""
    natural_frequency_hz: float
    damping_ratio: float

    def __post_init__(self):
        if not self.natural_frequency_hz > 0:
            raise ParameterError(f"固有频率必须为正: {self.natural_frequency_hz}")

    @property
    def omega(self):
        return 2.0 * np.pi * self.natural_frequency_hz


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """
    状态空间模型 x' = Ax + Bu, y = Cx + Du

    Parameters:
        A, B, C, D: 二维实矩阵
        sample_time: 离散域采样时间，None 表示连续域
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sample_time: Optional[float] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.size == 0:
            A = np.zeros((0, 0))
            n = 0
        B = B.reshape(n, -1) if B.size else np.zeros((n, D.shape[1]))
        C = C.reshape(-1, n) if C.size else np.zeros((D.shape[0], n))
        if A.shape != (n, n):
            raise ShapeError(f"A 必须为方阵，实际形状 {A.shape}")
        if B.shape[1] != D.shape[1] or C.shape[0] != D.shape[0]:
            raise ShapeError(f"B/C/D 维度不一致: B{B.shape}, C{C.shape}, D{D.shape}")
        for name, value in (('A', A), ('B', B), ('C', C), ('D', D)):
            object.__setattr__(self, name, value)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_outputs(self):
        return self.C.shape[0]

    @property
    def is_discrete(self):
        return self.sample_time is not None

    def dc_gain(self):
        """稳定系统的直流增益矩阵"""
        n = self.n_states
        if n == 0:
            return self.D.copy()
        if self.is_discrete:
            return self.C @ np.linalg.solve(np.eye(n) - self.A, self.B) + self.D
        return -self.C @ np.linalg.solve(self.A, self.B) + self.D


# ---------------------------------------------------------------------------
# 求根
# ---------------------------------------------------------------------------

def poly_roots(p):
    """
    用平衡后的友矩阵特征值求多项式全部根

    参数:
    - p: Polynomial 或升序系数序列

    返回:
    - list[complex]: 按模值升序排列，共轭根相邻（虚部为正的在前）
    """
    p = _as_poly(p)
    if p.is_zero():
        raise DegenerateInputError("零多项式没有确定的根")
    n = p.degree
    if n == 0:
        return []
    c = p.coeffs[:-1] / p.leading
    companion = np.zeros((n, n))
    if n > 1:
        companion[1:, :-1] = np.eye(n - 1)
    companion[:, -1] = -c
    balanced, _ = matrix_balance(companion, permute=False)
    roots = np.linalg.eigvals(balanced)
    return _pair_conjugates(roots)


def _pair_conjugates(roots):
    groups = []
    for r in roots:
        if r.imag == 0.0:
            groups.append((abs(r), r.real, [complex(r.real, 0.0)]))
        elif r.imag > 0.0:
            groups.append((abs(r), r.real, [complex(r), complex(r).conjugate()]))
    groups.sort(key=lambda g: (g[0], g[1]))
    return [z for _, _, pair in groups for z in pair]


def mode_of_root_pair(root):
    """
    共轭根 σ ± iω_d 换算为模态

    参数:
    - root: complex, 虚部非零

    返回:
    - ModeEstimate: f_n = |root|/2π, ζ = -Re(root)/|root|
    """
    root = complex(root)
    if root.imag == 0.0:
        raise NotOscillatoryError(f"实根 {root.real:.6g} 不对应振动模态")
    wn = abs(root)
    return ModeEstimate(wn / (2.0 * np.pi), -root.real / wn)


# ---------------------------------------------------------------------------
# 频率响应
# ---------------------------------------------------------------------------

def _eval_points(g, freqs):
    freqs = np.asarray(freqs, dtype=float)
    if g.is_discrete:
        nyquist = 0.5 / g.sample_time
        if np.any(freqs > nyquist * (1 + 1e-12)):
            raise DomainError(f"离散系统只能在奈奎斯特频率 {nyquist:.6g} Hz 以下求值")
        return np.exp(1j * 2.0 * np.pi * freqs * g.sample_time)
    return 1j * 2.0 * np.pi * freqs


def _den_ok(g, x):
    den = g.den(x)
    powers = np.abs(x)[..., None] ** np.arange(len(g.den.coeffs))
    scale = powers @ np.abs(g.den.coeffs)
    return den, np.abs(den) > POLE_RTOL * scale


def tf_eval(g, f):
    """
    频率 f（Hz）处的复增益

    连续域在 s = i2πf 处求值，离散域在 z = exp(i2πfT) 处求值；
    分母相对模值过小时抛出 PoleProximityError
    """
    x = _eval_points(g, f)
    den, ok = _den_ok(g, x)
    if not ok:
        raise PoleProximityError(float(f))
    return complex(g.num(x) / den)


def freq_response(g, freqs):
    """频率网格上的复增益数组，任何一点靠近极点都抛出异常"""
    freqs = np.asarray(freqs, dtype=float)
    x = _eval_points(g, freqs)
    den, ok = _den_ok(g, x)
    if not np.all(ok):
        raise PoleProximityError(float(freqs[~ok][0]))
    return g.num(x) / den


def freq_response_finite(g, freqs):
    """
    频率网格上的复增益，靠近极点的点被丢弃并记录日志

    返回:
    - tuple: (保留的频率数组, 复增益数组)
    """
    freqs = np.asarray(freqs, dtype=float)
    x = _eval_points(g, freqs)
    den, ok = _den_ok(g, x)
    if not np.all(ok):
        logger.warning(f"丢弃 {int(np.sum(~ok))} 个靠近极点的频率点，首个位于 {freqs[~ok][0]:.6g} Hz")
    return freqs[ok], g.num(x[ok]) / den[ok]


def dc_gain(g):
    """直流增益（连续域 s=0，离散域 z=1）"""
    x = 1.0 if g.is_discrete else 0.0
    den = g.den(x)
    if den == 0.0:
        raise PoleProximityError(0.0)
    return float(g.num(x) / den)


# ---------------------------------------------------------------------------
# 传递函数连接
# ---------------------------------------------------------------------------

def _check_domains(a, b):
    if a.is_discrete != b.is_discrete:
        raise CompositionError(f"不能连接 {a.domain} 与 {b.domain} 传递函数")
    if a.is_discrete and not np.isclose(a.sample_time, b.sample_time, rtol=1e-12, atol=0.0):
        raise CompositionError(f"采样时间不一致: {a.sample_time} 与 {b.sample_time}")


def tf_connect(a, b, mode='series'):
    """
    连接两个传递函数

    参数:
    - a, b: RationalTF 或标量增益
    - mode: 'series' 串联 | 'parallel' 并联 | 'negative_feedback' 负反馈 a/(1+ab)

    返回:
    - RationalTF: 分母首一，不做零极点对消
    """
    if not isinstance(a, RationalTF) and not isinstance(b, RationalTF):
        raise CompositionError("至少需要一个传递函数参与连接")
    a = _as_tf(a, b.sample_time if isinstance(b, RationalTF) else None)
    b = _as_tf(b, a.sample_time)
    _check_domains(a, b)

    if mode == 'series':
        num, den = a.num * b.num, a.den * b.den
    elif mode == 'parallel':
        if a.den.same_as(b.den):
            num, den = a.num + b.num, a.den
        else:
            num, den = a.num * b.den + b.num * a.den, a.den * b.den
    elif mode == 'negative_feedback':
        num, den = a.num * b.den, a.den * b.den + a.num * b.num
    else:
        raise ValueError(f"未知连接方式: {mode}")

    if den.is_zero():
        raise DegenerateInputError(f"{mode} 连接后分母恒为零")
    return RationalTF(num, den, a.sample_time)


def tf_scale(g, k):
    """增益缩放"""
    return RationalTF(g.num * float(k), g.den, g.sample_time)


def tf_inverse(g):
    """交换分子分母"""
    if g.num.is_zero():
        raise DegenerateInputError("零传递函数不可求逆")
    return RationalTF(g.den, g.num, g.sample_time)


def tf_cancel(g, tol=1e-8):
    """
    显式零极点对消

    参数:
    - g: RationalTF
    - tol: float, 相对根距离阈值 |z - p| <= tol * max(1, |p|)

    返回:
    - RationalTF: 对消后的传递函数，增益保持不变
    """
    zeros = list(g.zeros())
    poles = list(g.poles())
    kept_zeros = []
    for z in zeros:
        match = next((i for i, p in enumerate(poles) if abs(z - p) <= tol * max(1.0, abs(p))), None)
        if match is None:
            kept_zeros.append(z)
        else:
            poles.pop(match)
    if len(kept_zeros) == len(zeros):
        return g
    gain = g.num.leading
    num = np.real(P.polyfromroots(kept_zeros)) * gain if kept_zeros else np.array([gain])
    den = np.real(P.polyfromroots(poles)) if poles else np.array([1.0])
    logger.debug(f"对消了 {len(zeros) - len(kept_zeros)} 对零极点")
    return RationalTF(Polynomial(num), Polynomial(den), g.sample_time)


# ---------------------------------------------------------------------------
# 状态空间
# ---------------------------------------------------------------------------

def tf_to_ss(g):
    """
    可控标准型实现

    参数:
    - g: RationalTF, 必须为真（deg num <= deg den）

    返回:
    - StateSpaceModel: n = deg den，D 仅在双真时非零
    """
    if not g.is_proper:
        raise ProperError(f"传递函数非真: 分子 {g.num.degree} 阶, 分母 {g.den.degree} 阶")
    a = g.den.coeffs
    n = g.den.degree
    b = np.zeros(n + 1)
    b[: len(g.num.coeffs)] = g.num.coeffs

    if n == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                               [[b[0] / a[0]]], g.sample_time)

    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a[:n]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = (b[:n] - b[n] * a[:n]).reshape(1, n)
    D = [[b[n]]]
    return StateSpaceModel(A, B, C, D, g.sample_time)


def discretize_zoh(m, dt):
    """
    零阶保持离散化

    对增广矩阵 [[A, B], [0, 0]]·dt 求矩阵指数（Padé 缩放平方法），
    计算前对 A 做对角平衡，结果再变换回原坐标，C、D 不变

    参数:
    - m: StateSpaceModel, 连续域
    - dt: float, 采样时间（秒）

    返回:
    - StateSpaceModel: 离散域
    """
    if m.is_discrete:
        raise DomainError("输入已经是离散模型")
    if not dt > 0:
        raise DomainError(f"采样时间必须为正: {dt}")
    n, k = m.n_states, m.n_inputs
    if n == 0:
        return StateSpaceModel(m.A, m.B, m.C, m.D, dt)

    balanced, T = matrix_balance(m.A, permute=False)
    t = np.diag(T)
    aug = np.zeros((n + k, n + k))
    aug[:n, :n] = balanced * dt
    aug[:n, n:] = (m.B / t[:, None]) * dt
    E = expm(aug)
    A_d = (t[:, None] * E[:n, :n]) / t[None, :]
    B_d = t[:, None] * E[:n, n:]
    return StateSpaceModel(A_d, B_d, m.C, m.D, dt)


def realize_discrete(g, dt):
    """连续传递函数直接得到零阶保持离散状态空间"""
    return discretize_zoh(tf_to_ss(g), dt)


def ss_step(m, state, u):
    """
    离散状态空间单步推进

    返回:
    - tuple: (next_state, y)，y = Cx + Du，next_state = Ax + Bu
    """
    if not m.is_discrete:
        raise DomainError("ss_step 只接受离散模型")
    x = np.asarray(state, dtype=float).reshape(-1)
    u = np.atleast_1d(np.asarray(u, dtype=float)).reshape(-1)
    if x.size != m.n_states or u.size != m.n_inputs:
        raise ShapeError(f"状态维数 {x.size}/{m.n_states} 或输入维数 {u.size}/{m.n_inputs} 不匹配")
    y = m.C @ x + m.D @ u
    return m.A @ x + m.B @ u, y


@dataclass(frozen=True, eq=False)
class LiftedBlock:
    """
    离散单输入单输出模型的 n 步块映射

    y_blk = obs·x + toe·u_blk,  x_next = a_n·x + ctl·u_blk
    """
    a_n: np.ndarray
    ctl: np.ndarray
    obs: np.ndarray
    toe: np.ndarray
    ctl_ones: np.ndarray
    toe_ones: np.ndarray

    @property
    def length(self):
        return self.toe.shape[0]

    def run(self, x, u_block):
        return self.obs @ x + self.toe @ u_block, self.a_n @ x + self.ctl @ u_block

    def run_const(self, x, u):
        """块内输入保持常数"""
        return self.obs @ x + self.toe_ones * u, self.a_n @ x + self.ctl_ones * u


def lift_ss(m, n):
    """
    构造离散单输入单输出模型的 n 步块映射

    参数:
    - m: StateSpaceModel, 离散域
    - n: int, 块长度

    返回:
    - LiftedBlock
    """
    if not m.is_discrete:
        raise DomainError("lift_ss 只接受离散模型")
    if m.n_inputs != 1 or m.n_outputs != 1:
        raise ShapeError("lift_ss 只支持单输入单输出模型")
    nx = m.n_states
    powers = [np.eye(nx)]
    for _ in range(n):
        powers.append(m.A @ powers[-1])
    c = m.C[0]
    b = m.B[:, 0]
    d = float(m.D[0, 0])

    obs = np.array([c @ powers[j] for j in range(n)]).reshape(n, nx)
    markov = np.array([c @ powers[j] @ b for j in range(n)])
    toe = np.zeros((n, n))
    for j in range(n):
        toe[j, j] = d
        toe[j, :j] = markov[:j][::-1]
    ctl = np.array([powers[n - 1 - i] @ b for i in range(n)]).T.reshape(nx, n)
    return LiftedBlock(powers[n], ctl, obs, toe, ctl.sum(axis=1), toe.sum(axis=1))


def ss_simulate(m, u, x0=None, block=128):
    """
    离散单输入单输出模型的整段仿真（按块推进）

    参数:
    - m: StateSpaceModel, 离散域
    - u: 输入序列
    - x0: 初始状态，默认为零
    - block: int, 块长度

    返回:
    - tuple: (y 序列, 末状态)
    """
    u = np.asarray(u, dtype=float).ravel()
    x = np.zeros(m.n_states) if x0 is None else np.asarray(x0, dtype=float).ravel()
    y = np.empty_like(u)
    total = u.size
    lifted = lift_ss(m, block) if total >= block else None
    k = 0
    while total - k >= block:
        y[k:k + block], x = lifted.run(x, u[k:k + block])
        k += block
    if k < total:
        tail = lift_ss(m, total - k)
        y[k:], x = tail.run(x, u[k:])
    return y, x


def step_response(g, dt, n_samples):
    """
    单位阶跃响应在 t = k·dt 处的采样值（零阶保持对阶跃输入是精确的）

    参数:
    - g: RationalTF, 连续域且为真
    - dt: float, 采样间隔
    - n_samples: int

    返回:
    - tuple: (t, y)
    """
    m = realize_discrete(g, dt)
    y, _ = ss_simulate(m, np.ones(int(n_samples)))
    return np.arange(int(n_samples)) * dt, y


class DiscreteBlock:
    """
    持有自身状态的离散单输入单输出块，供控制器逐拍调用

    Parameters:
        model: StateSpaceModel, 离散域
    """

    def __init__(self, model):
        if not model.is_discrete:
            raise DomainError("DiscreteBlock 只接受离散模型")
        if model.n_inputs != 1 or model.n_outputs != 1:
            raise ShapeError("DiscreteBlock 只支持单输入单输出模型")
        self.model = model
        self._A = model.A
        self._B = model.B[:, 0]
        self._C = model.C[0]
        self._D = float(model.D[0, 0])
        self.state = np.zeros(model.n_states)

    @classmethod
    def from_tf(cls, g, dt):
        return cls(realize_discrete(g, dt))

    def reset(self):
        self.state = np.zeros(self.model.n_states)

    def step(self, u):
        y = float(self._C @ self.state) + self._D * u
        self.state = self._A @ self.state + self._B * u
        return y
