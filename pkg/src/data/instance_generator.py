#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
实例生成器
按规格生成带真值见证的测试酉矩阵：junta、k 维（Clifford 共轭的块对角）、浅层线路 ∘ 掺杂 Clifford
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.core.blockdiag_learner import BlockDiagUnitary
from src.core.clifford import CliffordOp, canonicalize_subgroup, conjugated_span, random_clifford
from src.core.f2symplectic import canonical_subspace, symplectic_gram_schmidt
from src.core.gates import Gate, apply_gate_tensor, circuit_unitary, make_gate
from src.core.pauli_algebra import ensure_dense
from src.core.quantum_sim import DenseUnitary
from src.utils.exceptions import ValidationError
from src.utils.logger import info
from src.utils.standardized_interface import WitnessInfo

LOG_NAME = 'instance_generator'


@dataclass
class Instance:
    """
    生成的实例；gates 非空时实例可以按线路格式保存
    """
    kind: str
    unitary: DenseUnitary
    witness: WitnessInfo = field(default_factory=dict)
    gates: List[Gate] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.unitary.n

    @property
    def matrix(self) -> np.ndarray:
        return self.unitary.matrix


Generator = Callable[[Mapping[str, Any], np.random.Generator], Instance]
GENERATORS: Dict[str, Generator] = {}


def register_generator(kind: str):
    """
    注册新的实例类型
    """
    def decorator(func: Generator) -> Generator:
        GENERATORS[kind] = func
        return func
    return decorator


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """
    Ginibre 矩阵 QR 分解后按 R 的对角相位修正，得到 Haar 分布
    """
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def _int_field(spec: Mapping[str, Any], name: str, minimum: int = 0, default: Optional[int] = None) -> int:
    value = spec.get(name, default)
    if value is None:
        raise ValidationError(f"实例规格缺少字段 {name}", field=name)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"字段 {name}={value!r} 必须是不小于 {minimum} 的整数", field=name)
    return value


def _qubit_count(spec: Mapping[str, Any]) -> int:
    n = _int_field(spec, 'n', minimum=1)
    ensure_dense(n)
    return n


def embed(local: np.ndarray, qubits: List[int], n: int) -> np.ndarray:
    """
    把作用在 qubits（从 0 开始）上的局部酉矩阵嵌入 n 比特，其余比特为恒等
    """
    d = 1 << n
    T = np.eye(d, dtype=complex).reshape([2] * n + [d])
    return apply_gate_tensor(T, local, qubits).reshape(d, d)


@register_generator('junta')
def _gen_junta(spec: Mapping[str, Any], rng: np.random.Generator) -> Instance:
    n = _qubit_count(spec)
    k = _int_field(spec, 'k', minimum=0, default=len(spec.get('qubits', [])) or None)
    if k > n:
        raise ValidationError(f"k={k} 超过 n={n}", field='k')
    if 'qubits' in spec:
        qubits = sorted(int(q) - 1 for q in spec['qubits'])
        if len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
            raise ValidationError(f"qubits={spec['qubits']} 与 n={n}, k={k} 不相容", field='qubits')
    else:
        qubits = sorted(int(q) for q in rng.choice(n, size=k, replace=False))
    U = embed(haar_unitary(1 << k, rng), qubits, n) if k else np.eye(1 << n, dtype=complex)
    witness: WitnessInfo = {'kind': 'junta', 'n': n, 'junta_qubits': [q + 1 for q in qubits]}
    return Instance('junta', DenseUnitary(n, U), witness)


@register_generator('kdim')
def _gen_kdim(spec: Mapping[str, Any], rng: np.random.Generator) -> Instance:
    """
    U = C† (I ⊗ ⊕_y A_y) C，A_y 为 Haar 随机块；支撑为 C† W_{a,b} C
    """
    n = _qubit_count(spec)
    a = _int_field(spec, 'a')
    b = _int_field(spec, 'b')
    if a + b > n:
        raise ValidationError(f"(a,b)=({a},{b}) 与 n={n} 不相容", field='a,b')
    if 'k' in spec and spec['k'] != 2 * a + b:
        raise ValidationError(f"k={spec['k']} 与 2a+b={2 * a + b} 不一致", field='k')
    depth = spec.get('clifford_depth')
    C = random_clifford(n, rng, depth) if spec.get('conjugate', True) else CliffordOp.identity(n)
    block = BlockDiagUnitary(n, a, b, [haar_unitary(1 << a, rng) for _ in range(1 << b)])
    Cm = C.to_matrix()
    U = Cm.conj().T @ block.to_matrix() @ Cm
    support = conjugated_span(C.inverse(), canonical_subspace(n, a, b))
    # 由支撑重新综合一条标准化线路作为见证，与生成时的 C 可以不同
    basis, _ = symplectic_gram_schmidt(support, support)
    witness: WitnessInfo = {
        'kind': 'kdim', 'n': n, 'a': a, 'b': b,
        'support': [v.to_label() for v in support.basis],
        'clifford': [g.to_dict() for g in canonicalize_subgroup(basis).gates],
    }
    return Instance('kdim', DenseUnitary(n, U), witness)


def _q_layers(n: int, depth: int, rng: np.random.Generator) -> List[Gate]:
    """
    每层：每个比特一个 Haar 单比特门，再在随机不相交的比特对上放 CZ；层内双比特门互不重叠
    """
    gates: List[Gate] = []
    for _ in range(depth):
        for q in range(n):
            u = haar_unitary(2, rng).reshape(-1)
            gates.append(make_gate('U2', (q,), [complex(v) for v in u]))
        order = [int(q) for q in rng.permutation(n)]
        for i in range(0, n - 1, 2):
            gates.append(make_gate('CZ', (order[i], order[i + 1])))
    return gates


def _doped_clifford(n: int, t: int, rng: np.random.Generator) -> Tuple[List[Gate], List[int]]:
    gates = list(random_clifford(n, rng).gates)
    positions: List[int] = []
    for _ in range(t):
        q = int(rng.integers(n))
        gates.append(make_gate('T', (q,)))
        positions.append(q + 1)
        gates.extend(random_clifford(n, rng).gates)
    return gates, positions


@register_generator('shallow_doped')
def _gen_shallow_doped(spec: Mapping[str, Any], rng: np.random.Generator) -> Instance:
    """
    U = Q·C：C 为随机 Clifford 中插入 t 个 T 门，Q 为 d 层浅层线路；C 先作用
    direction = 'CQ' 时 U = C·Q
    """
    n = _qubit_count(spec)
    d = _int_field(spec, 'd')
    t = _int_field(spec, 't')
    direction = spec.get('direction', 'QC')
    if direction not in ('QC', 'CQ'):
        raise ValidationError(f"未知的方向: {direction}", field='direction')
    c_gates, positions = _doped_clifford(n, t, rng)
    q_gates = _q_layers(n, d, rng)
    gates = c_gates + q_gates if direction == 'QC' else q_gates + c_gates
    witness: WitnessInfo = {
        'kind': 'shallow_doped', 'n': n, 'depth': d, 't': t, 't_positions': positions, 'direction': direction,
        'layers': {'Q': [g.to_dict() for g in q_gates], 'C': [g.to_dict() for g in c_gates]},
    }
    return Instance('shallow_doped', DenseUnitary(n, circuit_unitary(n, gates)), witness, gates)


def gen_instance(kind: str, spec: Mapping[str, Any], rng: np.random.Generator) -> Instance:
    """
    按类型生成实例

    :param kind: junta / kdim / shallow_doped，或经 register_generator 注册的类型
    :param spec: 实例规格（比特从 1 开始编号）
    :param rng: 随机数生成器
    :raises ValidationError: 规格不一致或类型未知
    :raises DenseCapError: n 超出稠密上限
    """
    if kind not in GENERATORS:
        raise ValidationError(f"未知的实例类型: {kind}，可选 {', '.join(sorted(GENERATORS))}", field='kind')
    if not isinstance(spec, Mapping):
        raise ValidationError("实例规格必须是 JSON 对象", field='spec')
    instance = GENERATORS[kind](spec, rng)
    info(f"生成实例: kind={kind}, n={instance.n}", LOG_NAME)
    return instance
