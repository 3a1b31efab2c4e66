#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
数据加载模块
实例规格、实例文件（矩阵或线路格式）、真值见证和报告的读写
"""

import json
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.gates import Gate, circuit_unitary, gates_from_dicts, gates_from_text
from src.core.quantum_sim import DenseUnitary
from src.data.instance_generator import Instance
from src.utils.exceptions import ValidationError
from src.utils.logger import get_logger
from src.utils.standardized_interface import SCHEMA_VERSION, LearnReport, WitnessInfo

LOG_NAME = 'data_loader'

WITNESS_SUFFIX = '.witness.json'


def encode_matrix(M: np.ndarray) -> List[List[List[float]]]:
    """
    复矩阵编码为 [[[re, im], ...], ...]
    """
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M)]


def decode_matrix(rows: Any) -> np.ndarray:
    """
    解码 encode_matrix 的输出；每行也可以是展平的 [re, im, re, im, ...]
    """
    try:
        M = np.array([[complex(entry[0], entry[1]) for entry in _pairs(row)] for row in rows], dtype=complex)
    except (TypeError, IndexError, ValueError) as e:
        raise ValidationError("矩阵元素必须是 [实部, 虚部] 对", field='rows', cause=e)
    if M.ndim != 2:
        raise ValidationError("矩阵必须是二维的", field='rows')
    return M


def _pairs(row: Any) -> List[Any]:
    if len(row) and all(isinstance(v, (int, float)) for v in row):
        if len(row) % 2:
            raise ValueError(f"展平的行长度 {len(row)} 不是偶数")
        return [row[i:i + 2] for i in range(0, len(row), 2)]
    return list(row)


def witness_path(instance_path: str) -> str:
    """
    见证文件与实例文件同目录，文件名为 <实例名>.witness.json
    """
    root, _ = os.path.splitext(instance_path)
    return root + WITNESS_SUFFIX


class DataLoader:
    """
    数据加载器类，负责实例、见证与报告文件的读写
    所有格式错误统一抛出 ValidationError
    """

    def __init__(self, config_manager=None):
        """
        :param config_manager: 配置管理器实例，可选
        """
        self.config_manager = config_manager
        self.logger = get_logger()

    def load_json(self, file_path: str) -> Any:
        """
        读取 JSON 文件

        :raises ValidationError: 文件不存在或格式错误
        """
        if not os.path.exists(file_path):
            self.logger.error(f"文件不存在: {file_path}", LOG_NAME, exc_info=False)
            raise ValidationError(f"文件不存在: {file_path}", field='path')
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            self.logger.error(f"文件格式错误: {file_path}, 错误: {str(e)}", LOG_NAME, exc_info=False)
            raise ValidationError(f"文件格式错误: {file_path}, 错误: {str(e)}", field='path', cause=e)
        self.logger.debug(f"成功读取文件: {file_path}", LOG_NAME)
        return data

    def save_json(self, data: Any, file_path: str, sort_keys: bool = False) -> str:
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=sort_keys, default=float)
            f.write('\n')
        self.logger.info(f"已写入: {file_path}", LOG_NAME)
        return file_path

    def load_spec(self, file_path: str) -> Tuple[str, Dict[str, Any]]:
        """
        读取实例规格 {"kind": ..., "n": ..., ...}

        :return: (kind, spec)
        """
        spec = self.load_json(file_path)
        if not isinstance(spec, dict):
            raise ValidationError("实例规格必须是 JSON 对象", field='spec')
        if 'kind' not in spec:
            raise ValidationError("实例规格缺少 kind 字段", field='kind')
        return str(spec['kind']), spec

    def save_instance(self, instance: Instance, file_path: str) -> Tuple[str, str]:
        """
        写入实例文件和见证文件；有门序列时按线路格式保存，否则按矩阵保存

        :return: (实例路径, 见证路径)
        """
        data: Dict[str, Any] = {'schema': SCHEMA_VERSION, 'kind': instance.kind, 'n': instance.n}
        if instance.gates:
            data['format'] = 'circuit'
            data['gates'] = [g.to_dict() for g in instance.gates]
        else:
            data['format'] = 'matrix'
            data['rows'] = encode_matrix(instance.matrix)
        self.save_json(data, file_path)
        w_path = witness_path(file_path)
        self.save_json(dict(instance.witness), w_path, sort_keys=True)
        return file_path, w_path

    def load_instance(self, file_path: str) -> Tuple[DenseUnitary, Optional[WitnessInfo]]:
        """
        读取实例；同名见证文件存在时一并读取

        :return: (稠密酉矩阵, 见证或 None)
        :raises ValidationError: 格式错误或矩阵非酉
        """
        data = self.load_json(file_path)
        if not isinstance(data, dict):
            raise ValidationError("实例文件必须是 JSON 对象", field='instance')
        fmt = data.get('format', 'circuit' if 'gates' in data else 'matrix')
        if fmt == 'circuit':
            n = data.get('n')
            if not isinstance(n, int) or n < 1:
                raise ValidationError("线路格式的实例需要正整数 n", field='n')
            if 'gates' not in data:
                raise ValidationError("线路格式的实例缺少 gates", field='gates')
            gates = data['gates']
            parsed: List[Gate] = gates_from_text(gates) if isinstance(gates, str) else gates_from_dicts(gates)
            unitary = DenseUnitary(n, circuit_unitary(n, parsed))
        elif fmt == 'matrix':
            if 'rows' not in data:
                raise ValidationError("矩阵格式的实例缺少 rows", field='rows')
            unitary = DenseUnitary.from_matrix(decode_matrix(data['rows']))
            if 'n' in data and data['n'] != unitary.n:
                raise ValidationError(f"n={data['n']} 与矩阵维度不符", field='n')
        else:
            raise ValidationError(f"未知的实例格式: {fmt}", field='format')

        witness = None
        w_path = witness_path(file_path)
        if os.path.exists(w_path):
            witness = self.load_json(w_path)
            self.logger.info(f"找到真值见证: {w_path}", LOG_NAME)
        return unitary, witness

    def save_report(self, report: LearnReport, file_path: str) -> str:
        """
        报告按 sort_keys 写出，同一输入逐字节一致
        """
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(report.to_json())
            f.write('\n')
        self.logger.info(f"报告已写入: {file_path}", LOG_NAME)
        return file_path
