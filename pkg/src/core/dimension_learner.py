#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
k-Pauli 维酉矩阵的学习流程
支撑学习（有/无逆查询）→ Clifford 化为块对角 → 块对角学习 → 倍增自举到 1/ε 标度；以及 junta 特例
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag, schur

from src.core.blockdiag_learner import BlockDiagUnitary, LearnParams, learn_block_diag, polar_round
from src.core.clifford import CliffordOp, clifford_to_block, permutation_clifford
from src.core.f2symplectic import PauliVec, Subspace, decompose_subspace, span
from src.core.metrics import dist_phaseop
from src.core.quantum_sim import (
    QueryOracle, amplified_support_sample, bell_sample_choi, conjugated_oracle, power_oracle
)
from src.utils.exceptions import BootstrapError, OracleAccessError, ValidationError
from src.utils.logger import debug, info, warning
from src.utils.standardized_interface import LearnReport, query_delta

LOG_NAME = 'dimension_learner'

BRANCH_GUARD = 0.2
BASE_DELTA = 0.25

# (块坐标系下的预言机, a, b, 精度, 失败概率, rng) -> 块对角估计
BaseLearner = Callable[[QueryOracle, int, int, float, float, np.random.Generator], BlockDiagUnitary]


@dataclass
class SupportEstimate:
    """
    学到的支撑子空间
    """
    subspace: Subspace
    queries_charged: int
    mode: str
    samples: int = 0
    topped_up: bool = False


@dataclass
class StructuredEstimate:
    """
    Û = C̃† (I ⊗ ⊕_y A_y) C̃
    """
    clifford: CliffordOp
    block: BlockDiagUnitary
    support: Subspace

    @property
    def n(self) -> int:
        return self.block.n

    def to_matrix(self) -> np.ndarray:
        C = self.clifford.to_matrix()
        return C.conj().T @ self.block.to_matrix() @ C

    def to_dict(self) -> Dict[str, Any]:
        data = self.block.to_dict()
        data['gates'] = [g.to_dict() for g in self.clifford.gates]
        data['support'] = [v.to_label() for v in self.support.basis]
        return data


@dataclass
class BootstrapState:
    """
    自举的当前状态，估计始终保持在 G 的块结构内（块坐标系）
    """
    round: int
    current_estimate: BlockDiagUnitary
    residual_error_target: float
    powers: List[int] = field(default_factory=list)


def support_samples(k_bound: int, eps_sup: float, delta: float) -> int:
    """
    m = ⌈2(k_bound + log(1/δ))/eps_sup⌉
    """
    return int(math.ceil(2.0 * (k_bound + math.log(1.0 / delta)) / eps_sup))


def learn_support_forward(oracle: QueryOracle, k_bound: int, eps_sup: float, delta: float,
                          rng: np.random.Generator, start: Optional[Subspace] = None,
                          already: int = 0) -> SupportEstimate:
    """
    只用正向查询：Bell 采样 m 次，取样本张成

    :param k_bound: 维数上界
    :param eps_sup: 允许遗漏的 Pauli 质量
    :param start: 已有子空间（补采样时使用）
    :param already: 已经采过的样本数
    """
    if not 0 < eps_sup <= 1:
        raise ValidationError(f"eps_sup={eps_sup} 超出 (0, 1]", field='eps_sup')
    m = max(support_samples(k_bound, eps_sup, delta) - already, 0)
    found = list(start.basis) if start is not None else []
    if m:
        found += bell_sample_choi(oracle, m, rng)
    subspace = span(found, oracle.n)
    debug(f"正向支撑学习: 样本={m}, 维数={subspace.dim}", LOG_NAME)
    return SupportEstimate(subspace, m, 'forward_only', samples=already + m)


def learn_support_inverse(oracle: QueryOracle, k_bound: int, eps_sup: float, delta: float,
                          rng: np.random.Generator, amp_const: Optional[float] = None,
                          start: Optional[Subspace] = None) -> SupportEstimate:
    """
    子空间增长：每轮在当前子空间之外做放大采样，返回 None 或满 k_bound 轮时停止
    """
    if not oracle.allow_inverse:
        raise OracleAccessError("带逆查询的支撑学习需要 U†", kind='inverse')
    before = oracle.queries()
    A = start if start is not None else Subspace.zero(oracle.n)
    rounds = 0
    while rounds < k_bound and A.dim < 2 * oracle.n:
        x = amplified_support_sample(oracle, A, eps_sup, delta / max(k_bound, 1), rng, amp_const)
        rounds += 1
        if x is None:
            break
        A = A.extend([x])
    spent = query_delta(before, oracle.queries())
    debug(f"带逆支撑学习: 轮数={rounds}, 维数={A.dim}", LOG_NAME)
    return SupportEstimate(A, sum(spent.values()), 'with_inverse', samples=rounds)


def _ab_exponent(T: Subspace) -> int:
    a, b = decompose_subspace(T)
    return a + b


def _junta_exponent(T: Subspace) -> int:
    return len(T.qubit_support())


def learn_support(oracle: QueryOracle, k_bound: int, eps: float, params: LearnParams, rng: np.random.Generator,
                  inverse: bool, exponent: Callable[[Subspace], int] = _ab_exponent) -> SupportEstimate:
    """
    eps_sup = eps/(K·2^{a+b})；真实 (a+b) 事先未知，先按 ⌈k_bound/2⌉ 估计预算，
    分解得到的子空间后如果精度不够则补采样一次
    """
    guess = (k_bound + 1) // 2
    eps_sup = eps / (params.eps_cap * (1 << guess))
    half = params.delta / 2
    if inverse:
        first = learn_support_inverse(oracle, k_bound, eps_sup, half, rng, params.amp_query_const)
    else:
        first = learn_support_forward(oracle, k_bound, eps_sup, half, rng)
    need = eps / (params.eps_cap * (1 << exponent(first.subspace)))
    if need >= eps_sup:
        return first
    warning(f"支撑子空间维数 {first.subspace.dim} 超出预算估计，补采样 (eps_sup {eps_sup:.3g} -> {need:.3g})", LOG_NAME)
    if inverse:
        more = learn_support_inverse(oracle, k_bound, need, half, rng, params.amp_query_const, start=first.subspace)
    else:
        more = learn_support_forward(oracle, k_bound, need, half, rng, start=first.subspace, already=first.samples)
    return SupportEstimate(more.subspace, first.queries_charged + more.queries_charged, first.mode,
                           samples=first.samples + more.samples, topped_up=True)


def _support_report(report: LearnReport, support: SupportEstimate) -> None:
    report.support = [v.to_label() for v in support.subspace.basis]
    report.details.update({
        'support_dim': support.subspace.dim,
        'support_mode': support.mode,
        'support_queries': support.queries_charged,
        'support_samples': support.samples,
        'support_topped_up': support.topped_up,
    })


def learn_kdim_base(oracle: QueryOracle, k_bound: int, params: LearnParams, rng: np.random.Generator,
                    inverse: bool = True) -> Tuple[StructuredEstimate, LearnReport]:
    """
    不自举的基础学习器：支撑学习 → C̃ → 在 C̃UC̃† 上做块对角学习 → 反共轭
    输出支撑包含于学到的子群
    """
    before = oracle.queries()
    support_rng, learn_rng = rng.spawn(2)
    support = learn_support(oracle, k_bound, params.eps, params, support_rng, inverse)
    C, a, b = clifford_to_block(support.subspace)
    info(f"支撑维数={support.subspace.dim}, 标准化类型 (a,b)=({a},{b})", LOG_NAME)
    block, _ = learn_block_diag(conjugated_oracle(oracle, C), a, b, params, learn_rng)
    estimate = StructuredEstimate(C, block, support.subspace)

    report = LearnReport(learner='kdim-base', queries=query_delta(before, oracle.queries()), a=a, b=b,
                         blocks=estimate.to_dict()['blocks'], gates=[g.to_dict() for g in C.gates])
    _support_report(report, support)
    return estimate, report


def block_base_learner(params: LearnParams) -> BaseLearner:
    """
    自举用的基础学习器：块对角学习，输入精度 η/C_out，使其输出误差不超过 η
    """
    def learner(target: QueryOracle, a: int, b: int, eta: float, delta: float,
                rng: np.random.Generator) -> BlockDiagUnitary:
        block, _ = learn_block_diag(target, a, b, params.with_accuracy(eta / params.c_out, delta), rng)
        return block
    return learner


def _compact(block: BlockDiagUnitary) -> np.ndarray:
    return block_diag(*block.blocks)


def _from_compact(M: np.ndarray, like: BlockDiagUnitary) -> BlockDiagUnitary:
    """
    投影到块结构并逐块取整
    """
    size = 1 << like.a
    blocks = [polar_round(M[y * size:(y + 1) * size, y * size:(y + 1) * size]) for y in range(1 << like.b)]
    return BlockDiagUnitary(like.n, like.a, like.b, blocks)


def principal_root(R: np.ndarray, p: int) -> np.ndarray:
    """
    去掉全局相位后取主 p 次根；本征相位必须落在 (−π+0.2, π−0.2)

    :raises BootstrapError: 分支不确定
    """
    overlap = np.trace(R)
    if abs(overlap) > 1e-12:
        R = R * np.exp(-1j * np.angle(overlap))
    T, Z = schur(R, output='complex')
    phases = np.angle(np.diag(T))
    limit = np.pi - BRANCH_GUARD
    if np.any(np.abs(phases) >= limit):
        raise BootstrapError(f"残差本征相位 {float(np.max(np.abs(phases))):.3f} 接近 ±π，主根不确定",
                             details={'max_phase': float(np.max(np.abs(phases)))})
    return Z @ np.diag(np.exp(1j * phases / p)) @ Z.conj().T


def _repetitions(delta: float, params: LearnParams) -> int:
    """
    R = ⌈c·ln(1/δ)⌉，整个自举只按总 δ 算一次，与轮数无关
    """
    return max(1, int(math.ceil(params.bootstrap_rep_const * math.log(1.0 / delta))))


def bootstrap_powers(eta: float, eps: float) -> List[int]:
    """
    每轮的幂次：p_0 = 1，之后 p_r = 2^r 倍增，最后一轮截为 ⌈η/eps⌉，
    使末轮目标残差 η/p 刚好不超过 eps，总幂次和约为 2η/eps
    """
    last = max(1, int(math.ceil(eta / eps - 1e-12)))
    powers = [1]
    while powers[-1] < last:
        powers.append(min(2 * powers[-1], last))
    return powers


def _amplified_base(base_learner: BaseLearner, target: QueryOracle, a: int, b: int, eta: float, R: int,
                    rng: np.random.Generator) -> BlockDiagUnitary:
    """
    运行 R 次基础学习器，取到其余估计的 dist_phaseop 中位数最小者
    """
    streams = rng.spawn(R)
    estimates = [base_learner(target, a, b, eta, BASE_DELTA, s) for s in streams]
    if R == 1:
        return estimates[0]
    compact = [_compact(e) for e in estimates]
    dist = np.zeros((R, R))
    for i in range(R):
        for j in range(i + 1, R):
            dist[i, j] = dist[j, i] = dist_phaseop(compact[i], compact[j])
    medians = [float(np.median(np.delete(dist[i], i))) for i in range(R)]
    best = int(np.argmin(medians))
    if medians[best] > 2 * eta:
        raise BootstrapError(f"基础估计过于分散：最小中位距离 {medians[best]:.3g} > 2η",
                             details={'median': medians[best], 'eta': eta})
    return estimates[best]


def bootstrap(oracle: QueryOracle, base_learner: BaseLearner, G: Subspace, eps: float, delta: float,
              rng: np.random.Generator, params: Optional[LearnParams] = None,
              frame: Optional[Tuple[CliffordOp, int, int]] = None) -> Tuple[StructuredEstimate, LearnReport]:
    """
    倍增自举：第 0 轮学 U 到常数精度 η，之后第 r 轮学 (U W_r†)^{p_r}，取主根更新 W_{r+1} = root·W_r，
    每轮后投影并取整回 G 的块结构

    幂次 p_r = 2^r（p_1 = 2），最后一轮取 ⌈η/eps⌉，见 bootstrap_powers；
    每轮重复 R = ⌈c·ln(1/δ)⌉ 次，总查询约为 R·Q_base·2η/eps

    :param base_learner: 块坐标系下的基础学习器
    :param G: 目标支撑所在的子群
    :param frame: (C̃, a, b)，缺省时由 clifford_to_block(G) 得到
    """
    params = params or LearnParams.from_config(eps=eps, delta=delta)
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValidationError("eps 与 delta 必须在 (0, 1) 内", field='eps,delta')
    C, a, b = frame if frame is not None else clifford_to_block(G)
    eta = params.base_accuracy
    powers = bootstrap_powers(eta, eps)
    rounds = len(powers) - 1
    R = _repetitions(delta, params)
    before = oracle.queries()
    framed = conjugated_oracle(oracle, C)
    streams = rng.spawn(rounds + 1)
    info(f"自举开始: (a,b)=({a},{b}), η={eta}, 幂次={powers}, 每轮重复={R}", LOG_NAME)

    W = _amplified_base(base_learner, framed, a, b, eta, R, streams[0])
    state = BootstrapState(0, W, eta, [1])
    per_round = [query_delta(before, oracle.queries())]
    for r in range(1, rounds + 1):
        p = powers[r]
        mark = oracle.queries()
        derived = power_oracle(framed, state.current_estimate.to_matrix().conj().T, p)
        residual = _amplified_base(base_learner, derived, a, b, eta, R, streams[r])
        root = principal_root(_compact(residual), p)
        W = _from_compact(root @ _compact(state.current_estimate), state.current_estimate)
        state = BootstrapState(r, W, eta / p, state.powers + [p])
        per_round.append(query_delta(mark, oracle.queries()))
        info(f"自举第 {r} 轮: p={p}, 目标残差={eta / p:.4g}, 正向查询={per_round[-1].get('forward', 0)}", LOG_NAME)

    estimate = StructuredEstimate(C, state.current_estimate, G)
    report = LearnReport(learner='bootstrap', queries=query_delta(before, oracle.queries()), a=a, b=b,
                         support=[v.to_label() for v in G.basis], blocks=estimate.to_dict()['blocks'],
                         gates=[g.to_dict() for g in C.gates],
                         details={'rounds': rounds, 'powers': state.powers, 'repetitions': R,
                                  'base_accuracy': eta, 'round_queries': per_round})
    return estimate, report


def learn_kdim(oracle: QueryOracle, k_bound: int, params: LearnParams, rng: np.random.Generator,
               inverse: bool = True) -> Tuple[StructuredEstimate, LearnReport]:
    """
    完整的 k 维学习器：支撑学习（正向或带逆）后以学到的子群为 G 自举
    """
    before = oracle.queries()
    support_rng, boot_rng = rng.spawn(2)
    support = learn_support(oracle, k_bound, params.eps, params, support_rng, inverse)
    if support.subspace.dim > k_bound:
        warning(f"学到的支撑维数 {support.subspace.dim} 超过上界 {k_bound}", LOG_NAME)
    estimate, boot_report = bootstrap(oracle, block_base_learner(params), support.subspace, params.eps,
                                      params.delta / 2, boot_rng, params)
    report = LearnReport(learner='kdim-inv' if inverse else 'kdim-fwd',
                         queries=query_delta(before, oracle.queries()),
                         a=boot_report.a, b=boot_report.b, blocks=boot_report.blocks, gates=boot_report.gates,
                         details=dict(boot_report.details))
    _support_report(report, support)
    return estimate, report


def learn_junta(oracle: QueryOracle, k: int, params: LearnParams,
                rng: np.random.Generator) -> Tuple[StructuredEstimate, LearnReport]:
    """
    junta 学习：只用正向查询，支撑的比特集合 J 经置换移到最后 |J| 个比特，按 (a,b) = (|J|, 0) 自举
    """
    before = oracle.queries()
    support_rng, boot_rng = rng.spawn(2)
    support = learn_support(oracle, 2 * k, params.eps, params, support_rng, inverse=False,
                            exponent=_junta_exponent)
    qubits = support.subspace.qubit_support()
    if len(qubits) > k:
        warning(f"学到的 junta 比特数 {len(qubits)} 超过 k={k}", LOG_NAME)
    n = oracle.n
    C = permutation_clifford(n, qubits)
    local = span([PauliVec.single(n, q, letter) for q in qubits for letter in 'XZ'], n)
    info(f"junta 比特 = {[q + 1 for q in qubits]}", LOG_NAME)
    estimate, boot_report = bootstrap(oracle, block_base_learner(params), local, params.eps, params.delta / 2,
                                      boot_rng, params, frame=(C, len(qubits), 0))
    report = LearnReport(learner='junta', queries=query_delta(before, oracle.queries()),
                         a=len(qubits), b=0, blocks=boot_report.blocks, gates=boot_report.gates,
                         details=dict(boot_report.details, junta_qubits=[q + 1 for q in qubits]))
    _support_report(report, support)
    return estimate, report


def run_learner(name: str, oracle: QueryOracle, params: LearnParams, rng: np.random.Generator,
                k_bound: int) -> Tuple[StructuredEstimate, LearnReport]:
    """
    按名称分派 k 维 / junta 学习器
    """
    if name == 'kdim-fwd':
        return learn_kdim(oracle, k_bound, params, rng, inverse=False)
    if name == 'kdim-inv':
        return learn_kdim(oracle, k_bound, params, rng, inverse=True)
    if name == 'kdim-base':
        return learn_kdim_base(oracle, k_bound, params, rng, inverse=oracle.allow_inverse)
    if name == 'junta':
        return learn_junta(oracle, k_bound, params, rng)
    raise ValidationError(f"未知的学习器: {name}", field='learner')
