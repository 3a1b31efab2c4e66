#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
近似 (a,b) 块对角酉矩阵的学习
对每个 z 制备 |0⟩|+⟩^{⊗b}|z⟩，经 Pauli 投影后做列层析，按 y 切片拼成 A_y，极分解取整，
再在 U·(I ⊗ H^{⊗a}) 上重复一次，用两次结果对齐列相位
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from src.config.config_manager import ConfigManager, get_config_manager
from src.core.f2symplectic import canonical_subspace
from src.core.pauli_algebra import num_qubits
from src.core.quantum_sim import (
    QueryOracle, StateVector, collect_projected_copies, right_hadamard_oracle
)
from src.core.state_tomography import copies_needed, internal_failure, run_tomography
from src.utils.exceptions import (
    DegenerateInputError, DimensionError, PhaseAlignmentError, ValidationError
)
from src.utils.logger import debug, info, warning
from src.utils.standardized_interface import LearnReport, query_delta

LOG_NAME = 'blockdiag_learner'


@dataclass
class LearnParams:
    """
    学习器参数：精度、失败概率以及各常数
    """
    eps: float
    delta: float
    c_tomo: float = 4.0
    c_emp: float = 6.0
    tomo_backend: str = 'model'
    amp_query_const: float = 3.0
    eps_cap: float = 8.0
    c_out: float = 8.0
    bootstrap_rep_const: float = 18.0
    base_accuracy: float = 0.125
    parallel_threshold: int = 8
    max_workers: int = 4
    degenerate_retries: int = 1
    circuit_exact: bool = False

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValidationError(f"eps={self.eps} 必须在 (0, 1) 内", field='eps')
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta={self.delta} 必须在 (0, 1) 内", field='delta')

    @classmethod
    def from_config(cls, manager: Optional[ConfigManager] = None, eps: Optional[float] = None,
                    delta: Optional[float] = None) -> 'LearnParams':
        """
        由配置管理器构造；eps/delta 缺省时取 run 节
        """
        manager = manager or get_config_manager()
        run = manager.get_run_config()
        learner = manager.get_learner_config()
        known = {k: v for k, v in learner.items() if k in cls.__dataclass_fields__}
        return cls(eps=run['eps'] if eps is None else eps,
                   delta=run['delta'] if delta is None else delta, **known)

    def with_accuracy(self, eps: Optional[float] = None, delta: Optional[float] = None) -> 'LearnParams':
        return replace(self, eps=self.eps if eps is None else eps, delta=self.delta if delta is None else delta)

    @property
    def effective_eps(self) -> float:
        """
        精度上限 1/eps_cap 处截断
        """
        return min(self.eps, 1.0 / self.eps_cap)


@dataclass
class DiagPhase:
    """
    对角相位矩阵 diag(phases)
    """
    dim: int
    phases: np.ndarray

    def __post_init__(self):
        if self.phases.shape != (self.dim,):
            raise DimensionError("相位个数与维数不符", expected=self.dim, actual=self.phases.shape)
        if np.max(np.abs(np.abs(self.phases) - 1.0)) > 1e-12:
            raise ValidationError("相位必须是单位模复数", field='phases')

    def matrix(self) -> np.ndarray:
        return np.diag(self.phases)


def _check_unitary(M: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]), 2) <= tol)


@dataclass
class BlockDiagUnitary:
    """
    I^{⊗(n−a−b)} ⊗ ⊕_y A_y，y 取最后 a+b 个比特中的前 b 个，块作用在最后 a 个比特上
    """
    n: int
    a: int
    b: int
    blocks: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b > self.n:
            raise ValidationError(f"(a,b)=({self.a},{self.b}) 与 n={self.n} 不相容", field='a,b')
        if len(self.blocks) != 1 << self.b:
            raise DimensionError("块的个数必须是 2^b", expected=1 << self.b, actual=len(self.blocks))
        for y, block in enumerate(self.blocks):
            if block.shape != (1 << self.a, 1 << self.a):
                raise DimensionError(f"第 {y} 块维度错误", expected=(1 << self.a,) * 2, actual=block.shape)
            if not _check_unitary(block):
                raise ValidationError(f"第 {y} 块不是酉矩阵", field='blocks')

    @classmethod
    def from_matrix(cls, U: np.ndarray, a: int, b: int, rounding: bool = False) -> 'BlockDiagUnitary':
        """
        由稠密矩阵提取各块：对前 n−a−b 个比特求归一化偏迹，再取对角块；结果即 Π_{W_{a,b}}(U) 的各块

        :param rounding: 是否把每块极分解取整为酉矩阵
        """
        n = num_qubits(U)
        m = a + b
        rest, inner = 1 << (n - m), 1 << m
        reduced = np.einsum('iaib->ab', U.reshape(rest, inner, rest, inner)) / rest
        size = 1 << a
        blocks = [reduced[y * size:(y + 1) * size, y * size:(y + 1) * size] for y in range(1 << b)]
        if rounding:
            blocks = [polar_round(B) for B in blocks]
        return cls(n, a, b, blocks)

    def to_matrix(self) -> np.ndarray:
        return np.kron(np.eye(1 << (self.n - self.a - self.b), dtype=complex), block_diag(*self.blocks))

    def right_multiply(self, D: DiagPhase) -> 'BlockDiagUnitary':
        Dm = D.matrix()
        return BlockDiagUnitary(self.n, self.a, self.b, [B @ Dm for B in self.blocks])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n, 'a': self.a, 'b': self.b,
            'blocks': [[[[float(v.real), float(v.imag)] for v in row] for row in B] for B in self.blocks],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'BlockDiagUnitary':
        blocks = [np.array([[complex(re, im) for re, im in row] for row in B], dtype=complex)
                  for B in data['blocks']]
        return cls(int(data['n']), int(data['a']), int(data['b']), blocks)


def collate_columns(estimates: Mapping[int, Union[StateVector, np.ndarray]], a: int, b: int) -> Dict[int, np.ndarray]:
    """
    A_y 的第 z 列为 √(2^b)·(⟨y| ⊗ I)|ψ̂_z⟩

    :param estimates: z -> a+b 比特的估计态
    :return: y -> 2^a×2^a 矩阵
    """
    size, m = 1 << a, a + b
    A = {y: np.zeros((size, size), dtype=complex) for y in range(1 << b)}
    scale = math.sqrt(1 << b)
    for z in range(size):
        if z not in estimates:
            raise ValidationError(f"缺少第 {z} 列的估计", field='estimates')
        est = estimates[z]
        vec = est.amplitudes if isinstance(est, StateVector) else np.asarray(est, dtype=complex)
        if vec.shape != (1 << m,):
            raise DimensionError(f"第 {z} 列的估计长度错误", expected=1 << m, actual=vec.shape)
        for y in A:
            A[y][:, z] = scale * vec[y * size:(y + 1) * size]
    return A


def polar_round(A: np.ndarray) -> np.ndarray:
    """
    最近酉矩阵 L·R†（A = L Σ R†）

    :raises DegenerateInputError: 最小奇异值低于 1e-12
    """
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError("极分解需要方阵", actual=A.shape)
    L, s, Rh = np.linalg.svd(A)
    if s[-1] < 1e-12:
        raise DegenerateInputError(f"最小奇异值 {s[-1]:.2e} 过小，无法取整为酉矩阵",
                                   details={'sigma_min': float(s[-1])})
    return L @ Rh


def align_phases(V0: np.ndarray, V0p: np.ndarray) -> DiagPhase:
    """
    由 M = V0†·V0' 的第 0 列恢复 Φ†（相差一个全局相位）
    H^{⊗a} 的第 0 列元素全为 2^{−a/2}，因此 M_{j0} ≈ φ_j*·2^{−a/2}·φ'_0

    :raises PhaseAlignmentError: 某个 |M_{j0}| < 2^{−a/2}/4
    """
    if V0.shape != V0p.shape:
        raise DimensionError("两组估计维度不同", expected=V0.shape, actual=V0p.shape)
    dim = V0.shape[0]
    column = (V0.conj().T @ V0p)[:, 0]
    floor = 1.0 / math.sqrt(dim) / 4.0
    weak = np.nonzero(np.abs(column) < floor)[0]
    if weak.size:
        raise PhaseAlignmentError(f"相位对齐退化：第 {int(weak[0])} 项模长 {abs(column[weak[0]]):.3g} < {floor:.3g}",
                                  details={'entries': [int(j) for j in weak]})
    return DiagPhase(dim, column / np.abs(column))


def _column_input(n: int, a: int, b: int, z: int, y: Optional[int] = None) -> StateVector:
    """
    |0^{n−a−b}⟩|+⟩^{⊗b}|z⟩，给定 y 时为 |0⟩|y⟩|z⟩
    """
    vec = np.zeros(1 << n, dtype=complex)
    if y is None:
        for yy in range(1 << b):
            vec[(yy << a) | z] = 1.0 / math.sqrt(1 << b)
    else:
        vec[(y << a) | z] = 1.0
    return StateVector(n, vec)


class _ColumnLearner:
    """
    单列学习：后选择收集副本，然后在最后 a+b 个比特上做层析
    """

    def __init__(self, oracle: QueryOracle, a: int, b: int, params: LearnParams, eps: float, delta_tomo: float):
        self.oracle = oracle
        self.a, self.b = a, b
        self.m = a + b
        self.params = params
        self.eps = eps
        self.delta_tomo = delta_tomo
        self.S = canonical_subspace(oracle.n, a, b)
        self.copies = copies_needed(params.tomo_backend, self.m, eps, delta_tomo, params.c_tomo, params.c_emp)
        p_floor = max(1.0 - 2.0 * eps, 0.5)
        self.max_attempts = int(math.ceil(2.0 / p_floor * (self.copies + math.log(1.0 / delta_tomo))))
        if not params.circuit_exact:
            oracle.projected(self.S)

    def __call__(self, psi: StateVector, rng: np.random.Generator) -> np.ndarray:
        copies = collect_projected_copies(self.oracle, self.S, psi, self.copies, self.max_attempts, rng,
                                          self.params.circuit_exact)
        size = 1 << self.m
        # Π_{W_{a,b}}(U) 在前 n−a−b 个比特上是恒等，接受态的振幅全部落在前 2^{a+b} 个下标
        reduced = copies.truncated(size)
        result = run_tomography(self.params.tomo_backend, reduced, self.m, self.eps, self.delta_tomo, rng,
                                self.params.c_tomo, self.params.c_emp)
        return result.estimate.amplitudes


def _map_columns(learner: _ColumnLearner, inputs: Sequence[StateVector], rngs: Sequence[np.random.Generator],
                 workers: int) -> List[np.ndarray]:
    if workers > 1 and len(inputs) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(inputs))) as pool:
            return list(pool.map(learner, inputs, rngs))
    return [learner(psi, r) for psi, r in zip(inputs, rngs)]


def _learn_parallel(oracle: QueryOracle, a: int, b: int, params: LearnParams, eps: float,
                    rng: np.random.Generator) -> BlockDiagUnitary:
    n, size = oracle.n, 1 << a
    delta_tomo = internal_failure(a + b, params.delta / (2 * size))
    inputs = [_column_input(n, a, b, z) for z in range(size)]

    def run(target: QueryOracle, stream: np.random.Generator) -> List[np.ndarray]:
        learner = _ColumnLearner(target, a, b, params, eps, delta_tomo)
        columns = _map_columns(learner, inputs, stream.spawn(size), params.max_workers)
        debug(f"列层析完成: 列数={size}, 每列副本={learner.copies}", LOG_NAME)
        A = collate_columns(dict(enumerate(columns)), a, b)
        return [polar_round(A[y]) for y in range(1 << b)]

    first, second = rng.spawn(2)
    V = run(oracle, first)
    Vp = run(right_hadamard_oracle(oracle, a), second)
    D = align_phases(V[0], Vp[0])
    return BlockDiagUnitary(n, a, b, V).right_multiply(D)


def _learn_sequential(oracle: QueryOracle, a: int, b: int, params: LearnParams, eps: float,
                      rng: np.random.Generator) -> BlockDiagUnitary:
    """
    a+b 较小时逐块学习，每块失败概率 δ/2^b；最后用一列 |+⟩^{⊗b}|0⟩ 把各块的相对相位绑定
    """
    n, size = oracle.n, 1 << a
    delta_tomo = internal_failure(a + b, params.delta / ((2 * size + 1) << b))
    hadamard = right_hadamard_oracle(oracle, a)
    learner = _ColumnLearner(oracle, a, b, params, eps, delta_tomo)
    learner_p = _ColumnLearner(hadamard, a, b, params, eps, delta_tomo)
    block_streams = rng.spawn((1 << b) + 1)
    blocks = []
    for y in range(1 << b):
        inputs = [_column_input(n, a, b, z, y) for z in range(size)]
        first, second = block_streams[y].spawn(2)
        cols = _map_columns(learner, inputs, first.spawn(size), params.max_workers)
        cols_p = _map_columns(learner_p, inputs, second.spawn(size), params.max_workers)
        V = polar_round(np.stack([c[y * size:(y + 1) * size] for c in cols], axis=1))
        Vp = polar_round(np.stack([c[y * size:(y + 1) * size] for c in cols_p], axis=1))
        blocks.append(V @ align_phases(V, Vp).matrix())
    if b > 0:
        tie = learner(_column_input(n, a, b, 0), block_streams[-1])
        slices = collate_columns({z: tie if z == 0 else np.zeros_like(tie) for z in range(size)}, a, b)
        for y in range(1 << b):
            overlap = np.vdot(blocks[y][:, 0], slices[y][:, 0])
            if abs(overlap) < 0.25:
                raise PhaseAlignmentError(f"第 {y} 块的相对相位退化 (|c|={abs(overlap):.3g})",
                                          details={'block': y})
            blocks[y] = blocks[y] * (overlap / abs(overlap))
    return BlockDiagUnitary(n, a, b, blocks)


def learn_block_diag(oracle: QueryOracle, a: int, b: int, params: LearnParams,
                     rng: np.random.Generator) -> Tuple[BlockDiagUnitary, LearnReport]:
    """
    学习 (a,b,ε) 近似块对角的酉矩阵

    :param oracle: 目标预言机
    :param a: 辛对数（块大小 2^a）
    :param b: 迷向维数（块个数 2^b）
    :param params: 学习参数，精度在 1/eps_cap 处截断
    :param rng: 随机数生成器
    :return: (块对角估计, 报告)
    """
    n = oracle.n
    if a < 0 or b < 0 or a + b > n:
        raise ValidationError(f"(a,b)=({a},{b}) 与 n={n} 不相容", field='a,b')
    eps = params.effective_eps
    sequential = (1 << (a + b)) < params.parallel_threshold
    mode = 'sequential' if sequential else 'parallel'
    before = oracle.queries()
    info(f"块对角学习开始: n={n}, (a,b)=({a},{b}), eps={eps:.4g}, 模式={mode}", LOG_NAME)

    attempts = 1 + params.degenerate_retries
    streams = rng.spawn(attempts)
    estimate = None
    for attempt, stream in enumerate(streams):
        try:
            learn = _learn_sequential if sequential else _learn_parallel
            estimate = learn(oracle, a, b, params, eps, stream)
            break
        except PhaseAlignmentError as e:
            if attempt == attempts - 1:
                raise
            warning(f"相位对齐退化，换新随机数重试: {e.message}", LOG_NAME)

    report = LearnReport(
        learner='blockdiag',
        queries=query_delta(before, oracle.queries()),
        a=a, b=b,
        support=[v.to_label() for v in canonical_subspace(n, a, b).basis],
        blocks=estimate.to_dict()['blocks'],
        details={'mode': mode, 'eps_effective': eps, 'attempts': attempt + 1},
    )
    info(f"块对角学习完成: 正向查询={report.queries.get('forward', 0)}", LOG_NAME)
    return estimate, report
