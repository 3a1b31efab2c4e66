#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
基本门与线路格式
门集合 {H, S, T, X, Y, Z, CNOT, CZ, U1(θ), U2(单比特 2×2 矩阵)}
外部格式（JSON/文本）中比特从 1 开始编号，内部从 0 开始
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.utils.exceptions import ValidationError

SQRT_HALF = 1.0 / np.sqrt(2.0)

_FIXED = {
    'I': np.eye(2, dtype=complex),
    'H': np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    'S': np.diag([1, 1j]).astype(complex),
    'SDG': np.diag([1, -1j]).astype(complex),
    'T': np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.diag([1, -1]).astype(complex),
    'CNOT': np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    'CZ': np.diag([1, 1, 1, -1]).astype(complex),
}
ARITY = {'I': 1, 'H': 1, 'S': 1, 'SDG': 1, 'T': 1, 'X': 1, 'Y': 1, 'Z': 1,
         'U1': 1, 'U2': 1, 'CNOT': 2, 'CZ': 2}
CLIFFORD_GATES = ('H', 'S', 'CNOT', 'CZ', 'X', 'Z')


@dataclass(frozen=True)
class Gate:
    """
    线路中的一个门，qubits 从 0 开始
    """
    name: str
    qubits: Tuple[int, ...]
    params: Tuple[complex, ...] = field(default=())

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def to_text(self) -> str:
        return ' '.join([self.name] + [str(q + 1) for q in self.qubits])

    def to_dict(self) -> Dict[str, Any]:
        params: List[float] = []
        for p in self.params:
            if self.name == 'U2':
                params.extend([float(np.real(p)), float(np.imag(p))])
            else:
                params.append(float(np.real(p)))
        return {'name': self.name, 'qubits': [q + 1 for q in self.qubits], 'params': params}


def gate_matrix(g: Gate) -> np.ndarray:
    """
    门的稠密矩阵（作用在 g.qubits 上，第一个比特为最高位）
    """
    if g.name in _FIXED:
        return _FIXED[g.name]
    if g.name == 'U1':
        return np.diag([1.0, np.exp(1j * float(np.real(g.params[0])))]).astype(complex)
    if g.name == 'U2':
        return np.array(g.params, dtype=complex).reshape(2, 2)
    raise ValidationError(f"未知的门: {g.name}", field='name')


def make_gate(name: str, qubits: Sequence[int], params: Sequence[Any] = ()) -> Gate:
    """
    构造并校验一个门（qubits 从 0 开始）
    """
    name = name.upper()
    if name not in ARITY:
        raise ValidationError(f"未知的门: {name}", field='name')
    if len(qubits) != ARITY[name] or len(set(qubits)) != len(qubits):
        raise ValidationError(f"门 {name} 的作用比特非法: {list(qubits)}", field='qubits')
    if name == 'U1' and len(params) != 1:
        raise ValidationError("U1 需要一个角度参数", field='params')
    if name == 'U2':
        if len(params) == 8:
            params = [complex(params[2 * k], params[2 * k + 1]) for k in range(4)]
        elif len(params) == 4 and all(isinstance(p, (list, tuple)) for p in params):
            params = [complex(p[0], p[1]) for p in params]
        if len(params) != 4:
            raise ValidationError("U2 需要 4 个复数元素", field='params')
        M = np.array(params, dtype=complex).reshape(2, 2)
        if np.linalg.norm(M.conj().T @ M - np.eye(2)) > 1e-8:
            raise ValidationError("U2 矩阵不是酉矩阵", field='params')
    return Gate(name, tuple(int(q) for q in qubits), tuple(complex(p) for p in params))


def apply_gate_tensor(T: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """
    把 k 比特门作用到张量 T 的前若干个比特轴上（其余轴原样保留）

    :param T: 形状为 [2]*n + 其他 的张量
    :param matrix: 2^k×2^k 门矩阵
    :param qubits: 作用的比特轴
    """
    k = len(qubits)
    G = matrix.reshape([2] * (2 * k))
    out = np.tensordot(G, T, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


def apply_gate_matrix(M: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """
    左乘门：返回 G·M
    """
    d = 1 << n
    T = np.asarray(M, dtype=complex).reshape([2] * n + [M.shape[1]])
    return apply_gate_tensor(T, gate_matrix(g), g.qubits).reshape(d, M.shape[1])


def circuit_unitary(n: int, gates: Sequence[Gate]) -> np.ndarray:
    """
    线路的稠密酉矩阵，按列表顺序依次作用
    """
    U = np.eye(1 << n, dtype=complex)
    for g in gates:
        for q in g.qubits:
            if not 0 <= q < n:
                raise ValidationError(f"比特下标 {q + 1} 超出 n={n}", field='qubits')
        U = apply_gate_matrix(U, g, n)
    return U


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def gates_from_dicts(items: Sequence[Dict[str, Any]]) -> List[Gate]:
    """
    解析 JSON 线路格式 [{"name": ..., "qubits": [...], "params": [...]}]，qubits 从 1 开始
    """
    gates = []
    for item in items:
        if not isinstance(item, dict) or 'name' not in item or 'qubits' not in item:
            raise ValidationError(f"非法的门描述: {item}", field='gates')
        gates.append(make_gate(item['name'], [int(q) - 1 for q in item['qubits']], item.get('params', [])))
    return gates


def gates_to_text(gates: Sequence[Gate]) -> str:
    return '\n'.join(g.to_text() for g in gates)


def gates_from_text(text: str) -> List[Gate]:
    """
    解析逐行文本格式，例如 "H 3"、"CNOT 1 4"
    """
    gates = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith('#'):
            continue
        try:
            qubits = [int(p) - 1 for p in parts[1:]]
        except ValueError as e:
            raise ValidationError(f"非法的门行: {line}", field='gates', cause=e)
        gates.append(make_gate(parts[0], qubits))
    return gates
