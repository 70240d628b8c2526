#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
结果文件读写和汇总模块
所有时间/频率序列写成 CSV，设计、指标和预测写成 JSON
"""

import json
import math
import os
from dataclasses import asdict, is_dataclass

import numpy as np
import pandas as pd

# 汇总表默认展示的指标列
SUMMARY_METRICS = [
    'A_res',
    'f_r',
    'zeta_r',
    'r_squared',
    'settling_time_2pct',
    'overshoot_pct',
    'control_peak',
    'control_l2',
    'fundamental_phase_deg',
    'motor_drift',
    'error',
]


def to_jsonable(value):
    """numpy 标量/数组、复数、数据类转成可写 JSON 的对象，非有限浮点写成 null"""
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': to_jsonable(value.real), 'im': to_jsonable(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class ReportGenerator:
    """结果文件写出和汇总类"""

    def __init__(self, output_dir='reports'):
        """
        初始化报表生成器

        Parameters:
            output_dir (str): 输出目录
        """
        self.output_dir = output_dir

        # 确保输出目录存在
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.output_dir, name)

    def load_results(self, file_path):
        """
        加载 CSV 结果文件

        Parameters:
            file_path (str): CSV 文件路径

        Returns:
            pd.DataFrame: 结果数据
        """
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"找不到结果文件: {file_path}")

        return pd.read_csv(file_path)

    def load_json(self, file_path):
        """
        加载 JSON 结果文件

        Parameters:
            file_path (str): JSON 文件路径

        Returns:
            dict: 文件内容
        """
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"找不到结果文件: {file_path}")

        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)

    def save_frame(self, df, name):
        """
        DataFrame 写成 CSV，浮点保留 17 位有效数字

        Returns:
            str: 文件路径
        """
        file_path = self.path(name)
        df.to_csv(file_path, index=False, float_format='%.17g')
        return file_path

    def save_json(self, data, name):
        """
        写 JSON，浮点使用 repr 保证往返不丢精度

        Returns:
            str: 文件路径
        """
        file_path = self.path(name)
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(to_jsonable(data), f, ensure_ascii=False, indent=2)
        return file_path

    def generate_sweep_summary(self, sweep_df, axes, title="扫描结果汇总"):
        """
        生成扫描汇总表格

        Parameters:
            sweep_df (pd.DataFrame): sweep 输出
            axes (list): 扫描轴列名
            title (str): 表格标题

        Returns:
            pd.DataFrame: 汇总表格
        """
        # 筛选存在的指标
        available_metrics = [m for m in SUMMARY_METRICS if m in sweep_df.columns]
        summary = sweep_df[list(axes) + available_metrics].copy()
        summary.columns.name = title
        return summary

    def pivot_metric(self, sweep_df, metric, axis, axis2):
        """
        二维扫描的某个指标整理成矩阵（行 axis，列 axis2）

        Returns:
            pd.DataFrame
        """
        if metric not in sweep_df.columns:
            raise KeyError(f"扫描结果中没有指标列: {metric}")
        return sweep_df.pivot_table(index=axis, columns=axis2, values=metric, aggfunc='first')
