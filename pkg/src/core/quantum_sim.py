#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
稠密态矢量/酉矩阵模拟
带查询计数的黑盒预言机、Choi 态 Bell 采样、LCU 后选择模拟、定点振幅放大的保证级模拟
"""

import math
import threading
from dataclasses import dataclass
from collections.abc import Sequence
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from src.config.config_manager import get_config_manager
from src.core.clifford import CliffordOp
from src.core.f2symplectic import PauliVec, Subspace, symplectic_complement
from src.core.gates import SQRT_HALF, apply_gate_tensor, kron_all
from src.core.pauli_algebra import (
    PauliExpansion, PauliOperator, _index_tables, ensure_dense, membership_mask,
    num_qubits, pauli_coefficients, pauli_project, weyl_matrix
)
from src.utils.exceptions import DenseCapError, OracleAccessError, PostselectionError, ValidationError
from src.utils.logger import debug

LOG_NAME = 'quantum_sim'

KINDS = ('forward', 'inverse', 'controlled_fwd', 'controlled_inv')


@dataclass(frozen=True)
class DenseUnitary:
    """
    n 比特稠密酉矩阵，构造时校验 ‖U†U − I‖_op ≤ 1e-9
    """
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        if num_qubits(self.matrix) != self.n:
            raise ValidationError(f"矩阵维度与 n={self.n} 不符", field='matrix')
        ensure_dense(self.n)
        d = 1 << self.n
        defect = np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(d), 2)
        if defect > 1e-9:
            raise ValidationError(f"矩阵不是酉矩阵 (‖U†U−I‖={defect:.2e})", field='matrix')

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'DenseUnitary':
        M = np.asarray(matrix, dtype=complex)
        return cls(num_qubits(M), M)

    @property
    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T


@dataclass(frozen=True)
class StateVector:
    """
    n 比特纯态，normalized=False 标记未归一化的中间态
    """
    n: int
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n,):
            raise ValidationError(f"振幅长度与 n={self.n} 不符", field='amplitudes')
        if self.normalized and abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-9:
            raise ValidationError("态矢量未归一化", field='amplitudes')

    @classmethod
    def from_array(cls, amplitudes: np.ndarray, normalize: bool = True) -> 'StateVector':
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = vec.shape[0].bit_length() - 1
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValidationError("零向量无法归一化", field='amplitudes')
            vec = vec / norm
        return cls(n, vec, normalize)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> 'StateVector':
        vec = np.zeros(1 << n, dtype=complex)
        vec[index] = 1.0
        return cls(n, vec)

    def fidelity(self, other: 'StateVector') -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


class CopyBatch(Sequence):
    """
    同一纯态的 d 个副本；每次取出都复制振幅，修改一个副本不影响其余副本
    """

    def __init__(self, state: StateVector, count: int):
        if count < 0:
            raise ValidationError("副本数不能为负", field='count')
        self._n = state.n
        self._amplitudes = state.amplitudes.copy()
        self._normalized = state.normalized
        self._count = count

    def __len__(self) -> int:
        return self._count

    def __getitem__(self, index: Union[int, slice]) -> Union[StateVector, List[StateVector]]:
        if isinstance(index, slice):
            return [self._fresh() for _ in range(*index.indices(self._count))]
        if index < 0:
            index += self._count
        if not 0 <= index < self._count:
            raise IndexError(f"副本下标 {index} 超出范围 [0, {self._count})")
        return self._fresh()

    def _fresh(self) -> StateVector:
        return StateVector(self._n, self._amplitudes.copy(), self._normalized)

    def truncated(self, size: int) -> 'CopyBatch':
        """
        只保留前 size 个振幅（重新归一化），副本数不变
        """
        return CopyBatch(StateVector.from_array(self._amplitudes[:size]), self._count)


class QueryOracle:
    """
    黑盒预言机：包装目标酉矩阵，按类型记录查询次数
    派生预言机（共轭、右乘、幂、Heisenberg 演化）通过 charge_map 把每次查询折算到父预言机上
    """

    def __init__(self, target, allow_inverse: bool = True, parent: Optional['QueryOracle'] = None,
                 charge_map: Optional[Mapping[str, Mapping[str, int]]] = None, name: str = 'U'):
        """
        :param target: DenseUnitary 或 2^n×2^n 矩阵
        :param allow_inverse: 是否允许 U† 查询
        :param parent: 父预言机
        :param charge_map: {本预言机查询类型: {父查询类型: 次数}}
        :param name: 名称，用于日志
        """
        self.target = target if isinstance(target, DenseUnitary) else DenseUnitary.from_matrix(target)
        self.allow_inverse = allow_inverse
        self.parent = parent
        self.charge_map = {k: dict(v) for k, v in (charge_map or {}).items()}
        self.name = name
        self.counters: Dict[str, int] = {kind: 0 for kind in KINDS}
        self._lock = threading.Lock()
        self._expansion: Optional[PauliExpansion] = None
        self._projected: Dict[Subspace, np.ndarray] = {}

    @property
    def n(self) -> int:
        return self.target.n

    @property
    def matrix(self) -> np.ndarray:
        return self.target.matrix

    def charge(self, kind: str, count: int = 1) -> None:
        """
        记录 count 次 kind 类型查询，并按 charge_map 折算到父预言机

        :param kind: forward / inverse / controlled_fwd / controlled_inv
        :param count: 次数
        """
        if kind not in KINDS:
            raise ValidationError(f"未知的查询类型: {kind}", field='kind')
        if kind in ('inverse', 'controlled_inv') and not self.allow_inverse:
            raise OracleAccessError(f"预言机 {self.name} 不允许逆查询", kind=kind)
        if count <= 0:
            return
        with self._lock:
            self.counters[kind] += count
        if self.parent is not None:
            for parent_kind, multiplier in self.charge_map.get(kind, {}).items():
                self.parent.charge(parent_kind, multiplier * count)

    def queries(self) -> Dict[str, int]:
        with self._lock:
            return dict(self.counters)

    def total_queries(self) -> int:
        return sum(self.queries().values())

    def apply(self, kind: str, psi: StateVector) -> StateVector:
        """
        作用 U 或 U†，对应计数加一
        """
        if psi.n != self.n:
            raise ValidationError("态矢量比特数与预言机不同", field='psi')
        self.charge(kind)
        if kind == 'forward':
            out = self.matrix @ psi.amplitudes
        elif kind == 'inverse':
            out = self.target.dagger @ psi.amplitudes
        else:
            raise ValidationError(f"apply 只接受 forward/inverse，收到 {kind}", field='kind')
        return StateVector(self.n, out, psi.normalized)

    def apply_controlled(self, kind: str, psi: StateVector) -> StateVector:
        """
        受控 U / U†，控制比特为第 1 个比特
        """
        if psi.n != self.n + 1:
            raise ValidationError("受控作用需要 n+1 比特的态", field='psi')
        base = {'controlled_fwd': self.matrix, 'controlled_inv': self.target.dagger}.get(kind)
        if base is None:
            raise ValidationError(f"apply_controlled 只接受 controlled_fwd/controlled_inv，收到 {kind}", field='kind')
        self.charge(kind)
        d = 1 << self.n
        out = psi.amplitudes.copy()
        out[d:] = base @ out[d:]
        return StateVector(psi.n, out, psi.normalized)

    def expansion(self) -> PauliExpansion:
        """
        目标的 Pauli 展开（模拟器内部使用，不计查询）
        """
        if self._expansion is None:
            threshold = get_config_manager().get_pauli_config()['threshold']
            self._expansion = PauliExpansion(self.n, pauli_coefficients(self.matrix), threshold)
        return self._expansion

    def projected(self, S: Subspace) -> np.ndarray:
        """
        Π_S(U) 的缓存（模拟器内部使用，不计查询）
        """
        if S not in self._projected:
            self._projected[S] = pauli_project(self.matrix, S)
        return self._projected[S]

    def derive(self, matrix: np.ndarray, charge_map: Mapping[str, Mapping[str, int]],
               allow_inverse: Optional[bool] = None, name: str = 'derived') -> 'QueryOracle':
        return QueryOracle(matrix, self.allow_inverse if allow_inverse is None else allow_inverse,
                           parent=self, charge_map=charge_map, name=name)


def apply(oracle: QueryOracle, kind: str, psi: StateVector) -> StateVector:
    return oracle.apply(kind, psi)


def conjugated_oracle(oracle: QueryOracle, C: CliffordOp) -> QueryOracle:
    """
    C U C†，每次查询折算为一次对 U 的同类查询
    """
    Cm = C.to_matrix()
    matrix = Cm @ oracle.matrix @ Cm.conj().T
    return oracle.derive(matrix, {'forward': {'forward': 1}, 'inverse': {'inverse': 1}}, name=f"C{oracle.name}C†")


def right_hadamard_oracle(oracle: QueryOracle, a: int) -> QueryOracle:
    """
    U (I ⊗ H^{⊗a})，H 作用在最后 a 个比特上
    """
    n = oracle.n
    Hm = kron_all([np.eye(1 << (n - a), dtype=complex)] + [np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF] * a)
    return oracle.derive(oracle.matrix @ Hm, {'forward': {'forward': 1}, 'inverse': {'inverse': 1}}, name=f"{oracle.name}H")


def power_oracle(oracle: QueryOracle, W_dag: np.ndarray, p: int) -> QueryOracle:
    """
    (U W†)^p，W† 为经典已知矩阵，每次查询折算为 p 次对 U 的查询
    """
    if p < 1:
        raise ValidationError(f"幂次必须为正整数，收到 {p}", field='p')
    step = oracle.matrix @ W_dag
    matrix = np.linalg.matrix_power(step, p)
    return oracle.derive(matrix, {'forward': {'forward': p}, 'inverse': {'inverse': p}}, name=f"({oracle.name}W†)^{p}")


def choi_state(U: np.ndarray) -> StateVector:
    """
    |Φ_U⟩ = (U⊗I)|Φ⁺⟩，前 n 个比特为系统，后 n 个为辅助；系统比特 q 与辅助比特 n+q 成对
    """
    U = np.asarray(U, dtype=complex)
    n = num_qubits(U)
    # (U⊗I) Σ_i |i⟩|i⟩/√d 在下标 (j, i) 处的振幅为 U[j, i]/√d
    return StateVector(2 * n, U.reshape(-1) / math.sqrt(U.shape[0]))


def bell_measure_probabilities(state: StateVector) -> np.ndarray:
    """
    对每对 (q, n+q) 做 Bell 测量：CNOT q→n+q，再对 q 作用 H，最后按计算基测量
    系统比特读出 z_q、辅助比特读出 x_q；返回按打包下标 x | z<<n 排列的概率

    :param state: 2n 比特态
    """
    if state.n % 2:
        raise ValidationError("Bell 测量需要偶数个比特", field='state')
    n = state.n // 2
    psi = state.amplitudes.reshape((2,) * state.n).copy()
    for q in range(n):
        # 控制位为 1 的切片去掉了第 q 轴，辅助比特轴左移一位
        ones = [slice(None)] * state.n
        ones[q] = 1
        ones = tuple(ones)
        psi[ones] = np.flip(psi[ones], axis=n + q - 1).copy()
        low, high = psi.take(0, axis=q), psi.take(1, axis=q)
        psi = np.stack([(low + high) * SQRT_HALF, (low - high) * SQRT_HALF], axis=q)
    # 展平时第一根轴是最高位：重排为 z_{n-1} … z_0 x_{n-1} … x_0
    order = list(range(n - 1, -1, -1)) + list(range(2 * n - 1, n - 1, -1))
    return np.abs(psi.transpose(order).reshape(-1)) ** 2


def bell_sample_choi(oracle: QueryOracle, m: int, rng: np.random.Generator,
                     choi_cap: Optional[int] = None) -> List[PauliVec]:
    """
    制备 m 份 Choi 态 (U⊗I)|Φ⁺⟩ 并逐份做 Bell 基测量，结果 x 的概率为 |α_x|²，每份计一次正向查询
    n 超过 choi_cap 时不再显式构造 2n 比特的态，直接按 Pauli 展开采样

    :param oracle: 预言机
    :param m: 样本数
    :param rng: 随机数生成器
    :param choi_cap: 显式构造 2n 比特 Choi 态的上限，None 时读取配置 dense.choi_cap
    :return: 样本列表
    """
    if m < 1:
        raise ValidationError("样本数必须至少为 1", field='m')
    n = oracle.n
    if choi_cap is None:
        choi_cap = get_config_manager().get_dense_config()['choi_cap']
    if n <= choi_cap:
        probs = bell_measure_probabilities(choi_state(oracle.matrix))
        threshold = get_config_manager().get_pauli_config()['threshold']
        probs[np.sqrt(probs) <= threshold] = 0.0
        index = np.arange(probs.shape[0])
    else:
        probs = oracle.expansion().probabilities()
        index, _ = _index_tables(n)
    probs = probs / probs.sum()
    oracle.charge('forward', m)
    draws = rng.choice(probs.shape[0], size=m, p=probs)
    return [PauliVec.from_packed(n, int(index[K])) for K in draws]


def _lcu_exact_branch(U: np.ndarray, S: Subspace, psi: np.ndarray, cap: int) -> Tuple[float, np.ndarray]:
    """
    显式构造 PREP†·SEL·PREP：辅助比特在 H^m 之后控制 W_q†，中间作用一次 U，再控制 W_q，最后 H^m 并后选择全零
    """
    n = S.n
    complement = symplectic_complement(S).basis
    m = len(complement)
    if n + m > cap:
        raise DenseCapError(f"精确 LCU 需要 n+dim S^⊥={n + m} 个比特，超出上限", n=n + m, cap=cap)
    d = 1 << n
    H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF
    state = np.zeros([2] * m + [d], dtype=complex)
    state[(0,) * m] = psi
    for i in range(m):
        state = apply_gate_tensor(state, H, [i])
    Ws = [weyl_matrix(PauliOperator(c)) for c in complement]

    def controlled(T: np.ndarray, i: int, M: np.ndarray) -> np.ndarray:
        T = T.copy()
        idx = [slice(None)] * m + [slice(None)]
        idx[i] = 1
        T[tuple(idx)] = T[tuple(idx)] @ M.T
        return T

    for i in reversed(range(m)):
        state = controlled(state, i, Ws[i].conj().T)
    state = state @ U.T
    for i in range(m):
        state = controlled(state, i, Ws[i])
    for i in range(m):
        state = apply_gate_tensor(state, H, [i])
    branch = state[(0,) * m]
    return float(np.vdot(branch, branch).real), branch


def projected_branch(oracle: QueryOracle, S: Subspace, psi: StateVector,
                     circuit_exact: bool = False) -> Tuple[float, Optional[np.ndarray]]:
    """
    一次后选择的接受概率与接受后的（归一化）态，不计查询

    :return: (概率, 态或 None)
    """
    if circuit_exact:
        cap = get_config_manager().get_pauli_config()['lcu_exact_cap']
        prob, phi = _lcu_exact_branch(oracle.matrix, S, psi.amplitudes, cap)
    else:
        phi = oracle.projected(S) @ psi.amplitudes
        prob = float(np.vdot(phi, phi).real)
    if prob <= 1e-300:
        return 0.0, None
    return min(prob, 1.0), phi / np.sqrt(prob)


def lcu_project_apply(oracle: QueryOracle, S: Subspace, psi: StateVector, rng: np.random.Generator,
                      circuit_exact: bool = False) -> Optional[StateVector]:
    """
    模拟一次 LCU 块编码的后选择：以 ‖Π_S(U)ψ‖² 的概率接受并返回归一化态，否则返回 None
    每次尝试计一次正向查询
    """
    if S.n != oracle.n:
        raise ValidationError("子空间与预言机比特数不同", field='S')
    oracle.charge('forward')
    prob, phi = projected_branch(oracle, S, psi, circuit_exact)
    if phi is None or rng.random() >= prob:
        return None
    return StateVector(oracle.n, phi)


def collect_projected_copies(oracle: QueryOracle, S: Subspace, psi: StateVector, d: int,
                             max_attempts: int, rng: np.random.Generator,
                             circuit_exact: bool = False) -> 'CopyBatch':
    """
    重复后选择直到得到 d 个副本；失败次数服从负二项分布，总尝试次数即正向查询数

    :param d: 需要的副本数
    :param max_attempts: 尝试上限，超出时计满上限并抛出 PostselectionError
    """
    prob, phi = projected_branch(oracle, S, psi, circuit_exact)
    if phi is None or prob <= 0.0:
        oracle.charge('forward', max_attempts)
        raise PostselectionError("接受概率为零，后选择失败", attempts=max_attempts)
    failures = int(rng.negative_binomial(d, prob)) if prob < 1.0 else 0
    attempts = d + failures
    if attempts > max_attempts:
        oracle.charge('forward', max_attempts)
        raise PostselectionError(f"{max_attempts} 次尝试内未得到 {d} 个副本 (p={prob:.3g})", attempts=max_attempts)
    oracle.charge('forward', attempts)
    debug(f"后选择: 副本={d}, 尝试={attempts}, p={prob:.4f}", LOG_NAME)
    return CopyBatch(StateVector(oracle.n, phi), d)


def amplification_queries(alpha: float, delta: float, amp_const: float) -> int:
    return int(math.ceil(amp_const * math.log(1.0 / delta) / math.sqrt(alpha)))


def amplified_support_sample(oracle: QueryOracle, A: Subspace, alpha: float, delta: float,
                             rng: np.random.Generator, amp_const: Optional[float] = None) -> Optional[PauliVec]:
    """
    定点振幅放大的保证级模拟
    A 之外的 Bell 质量 ≥ alpha 时以 1−delta 的概率返回 A 之外按条件分布抽取的向量；
    质量较小时按比例降低成功率；从不返回零质量的向量

    :param alpha: 质量阈值 (0, 1]
    :param delta: 失败概率
    :param amp_const: 查询常数，None 时读取配置 learner.amp_query_const
    """
    if not oracle.allow_inverse:
        raise OracleAccessError("振幅放大需要逆查询", kind='inverse')
    if not 0 < alpha <= 1:
        raise ValidationError(f"alpha={alpha} 超出 (0, 1]", field='alpha')
    if amp_const is None:
        amp_const = get_config_manager().get_learner_config()['amp_query_const']
    Q = amplification_queries(alpha, delta, amp_const)
    oracle.charge('forward', Q // 2 + Q % 2)
    oracle.charge('inverse', Q // 2)

    probs = oracle.expansion().probabilities()
    outside = ~membership_mask(A)
    weights = np.where(outside, probs, 0.0)
    mass = float(weights.sum())
    if mass <= 0.0:
        return None
    success = (1.0 - delta) if mass >= alpha else (1.0 - delta) * mass / alpha
    if rng.random() >= success:
        return None
    packed, _ = _index_tables(oracle.n)
    K = rng.choice(weights.shape[0], p=weights / mass)
    return PauliVec.from_packed(oracle.n, int(packed[K]))
