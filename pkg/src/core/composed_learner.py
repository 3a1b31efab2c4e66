#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
浅层线路与低 Clifford 零化度酉矩阵复合的学习
U†⊗U = [∏_i (U†⊗I)·SWAP_i·(U⊗I)]·SWAP，每个因子由 3 个 Heisenberg 演化的单比特 Pauli 组装
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.blockdiag_learner import LearnParams, polar_round
from src.core.dimension_learner import learn_kdim
from src.core.f2symplectic import PauliVec, Subspace, span
from src.core.pauli_algebra import PauliOperator, ensure_dense, num_qubits, pauli_coefficients, weyl_matrix, _index_tables
from src.core.quantum_sim import QueryOracle
from src.utils.exceptions import BaseError, DenseCapError, LearnerFailure, OracleAccessError, ValidationError
from src.utils.logger import debug, info, warning
from src.utils.standardized_interface import LearnReport, query_delta

LOG_NAME = 'composed_learner'

DIRECTIONS = ('QC', 'CQ')
LETTERS = ('X', 'Y', 'Z')
NULLITY_MAX_N = 6
SIGN_SHOTS_CONST = 8.0


def heisenberg_target(U: np.ndarray, P: PauliOperator, direction: str = 'QC') -> np.ndarray:
    """
    QC 方向为 U†PU，CQ 方向为 UPU†
    """
    Pm = weyl_matrix(P)
    if direction == 'QC':
        return U.conj().T @ Pm @ U
    if direction == 'CQ':
        return U @ Pm @ U.conj().T
    raise ValidationError(f"未知的方向: {direction}", field='direction')


def heisenberg_pauli_oracle(oracle: QueryOracle, P: PauliOperator, direction: str = 'QC') -> QueryOracle:
    """
    派生预言机 U†PU（或 UPU†）；每次作用计一次 U 与一次 U†，目标自逆，因此逆查询计费相同

    :raises OracleAccessError: 基预言机不允许逆查询
    """
    if not oracle.allow_inverse:
        raise OracleAccessError("Heisenberg 演化需要 U†", kind='inverse')
    if P.vec.weight != 1 or P.phase != 0:
        raise ValidationError(f"需要无相位的单比特 Pauli，收到 {P.to_label()}", field='P')
    both = {'forward': 1, 'inverse': 1}
    return oracle.derive(heisenberg_target(oracle.matrix, P, direction),
                         {'forward': both, 'inverse': both}, allow_inverse=True,
                         name=f"H[{P.to_label()}]")


def swap_layer(n: int) -> np.ndarray:
    """
    交换两个 n 比特寄存器的置换矩阵
    """
    d = 1 << n
    perm = np.arange(d * d).reshape(d, d).T.reshape(-1)
    return np.eye(d * d, dtype=complex)[perm]


def _local_pauli(n: int, qubit: int, letter: str) -> np.ndarray:
    return weyl_matrix(PauliOperator(PauliVec.single(n, qubit, letter)))


def assemble_factor(terms: Dict[str, np.ndarray], n: int, qubit: int) -> np.ndarray:
    """
    ½(I⊗I + Σ_P Ŝ_P ⊗ P_i)，再极分解取整
    """
    d = 1 << n
    F = np.eye(d * d, dtype=complex)
    for letter in LETTERS:
        F = F + np.kron(terms[letter], _local_pauli(n, qubit, letter))
    return polar_round(F / 2)


@dataclass
class ComposedEstimate:
    """
    因子形式的估计：QC 方向近似 U†⊗U，CQ 方向近似 U⊗U†
    terms[(i, P)] 为学到的 Heisenberg 演化 Pauli，factors[i] 为组装后的 2n 比特酉因子
    """
    n: int
    direction: str = 'QC'
    terms: Dict[Tuple[int, str], np.ndarray] = field(default_factory=dict)
    factors: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValidationError(f"未知的方向: {self.direction}", field='direction')
        for i, F in enumerate(self.factors):
            if np.linalg.norm(F.conj().T @ F - np.eye(F.shape[0]), 2) > 1e-9:
                raise ValidationError(f"第 {i + 1} 个因子不是酉矩阵", field='factors')

    @classmethod
    def from_terms(cls, n: int, terms: Dict[Tuple[int, str], np.ndarray], direction: str = 'QC') -> 'ComposedEstimate':
        ensure_dense(2 * n)
        factors = [assemble_factor({P: terms[(i, P)] for P in LETTERS}, n, i) for i in range(n)]
        return cls(n, direction, dict(terms), factors)

    def to_matrix(self) -> np.ndarray:
        """
        稠密实现 F_1·F_2·…·F_n·SWAP
        """
        ensure_dense(2 * self.n)
        out = np.eye(1 << (2 * self.n), dtype=complex)
        for F in self.factors:
            out = out @ F
        return out @ swap_layer(self.n)

    def to_dict(self) -> Dict[str, Any]:
        def encode(M: np.ndarray) -> List[List[List[float]]]:
            return [[[float(v.real), float(v.imag)] for v in row] for row in M]
        return {
            'n': self.n,
            'direction': self.direction,
            'terms': [{'qubit': i + 1, 'pauli': P, 'rows': encode(M)} for (i, P), M in sorted(self.terms.items())],
        }


def target_double(U: np.ndarray, direction: str = 'QC') -> np.ndarray:
    """
    QC: U†⊗U；CQ: U⊗U†
    """
    if direction == 'QC':
        return np.kron(U.conj().T, U)
    return np.kron(U, U.conj().T)


def exact_factors(U: np.ndarray, direction: str = 'QC') -> ComposedEstimate:
    """
    由真值直接组装因子，用于校验分解恒等式
    """
    n = num_qubits(U)
    terms = {(i, P): heisenberg_target(U, PauliOperator(PauliVec.single(n, i, P)), direction)
             for i in range(n) for P in LETTERS}
    return ComposedEstimate.from_terms(n, terms, direction)


def hermitian_involution(S_hat: np.ndarray) -> np.ndarray:
    """
    去掉全局相位后取最近的 Hermite 自逆矩阵 V·sign(Λ)·V†
    Ŝ ≈ e^{iθ}S 且 S² = I，故 θ 由 tr(Ŝ²) 的辐角的一半确定（相差 π，由符号探测解决）
    """
    theta = 0.5 * np.angle(np.trace(S_hat @ S_hat))
    H = np.exp(-1j * theta) * S_hat
    H = (H + H.conj().T) / 2
    values, vectors = np.linalg.eigh(H)
    signs = np.where(values >= 0, 1.0, -1.0)
    return (vectors * signs) @ vectors.conj().T


def sign_shots(delta: float) -> int:
    return max(1, int(math.ceil(SIGN_SHOTS_CONST * math.log(1.0 / delta))))


def sign_probe(oracle: QueryOracle, P: PauliOperator, S_fixed: np.ndarray, shots: int,
               rng: np.random.Generator, direction: str = 'QC') -> int:
    """
    信道访问只能确定 Ŝ 到 ±1；取 Ŝ 的 +1 本征态 |ψ⟩，在 U|ψ⟩（CQ 方向为 U†|ψ⟩）上测 P，多数表决定符号
    每次测量计一次查询
    """
    values, vectors = np.linalg.eigh(S_fixed)
    psi = vectors[:, int(np.argmax(values))]
    kind = 'forward' if direction == 'QC' else 'inverse'
    evolved = oracle.matrix @ psi if direction == 'QC' else oracle.matrix.conj().T @ psi
    oracle.charge(kind, shots)
    expectation = float(np.real(np.vdot(evolved, weyl_matrix(P) @ evolved)))
    p_plus = min(max((1.0 + expectation) / 2.0, 0.0), 1.0)
    plus = int(rng.binomial(shots, p_plus))
    return 1 if 2 * plus >= shots else -1


def learn_composed(oracle: QueryOracle, d_bound: int, t_bound: int, params: LearnParams,
                   rng: np.random.Generator, direction: str = 'QC') -> Tuple[ComposedEstimate, LearnReport]:
    """
    对每个比特 i 与 P ∈ {X, Y, Z}，用 k 维学习器（k_bound = 2^{d+1} + t）把 U†PU 学到 eps/(6n)，
    失败概率 δ/(3n)；组装因子并极分解取整

    :param d_bound: 浅层部分的深度上界
    :param t_bound: Clifford 零化度上界
    :param direction: 'QC'（U = QC）或 'CQ'
    :raises LearnerFailure: 任一项失败，term 字段标明 (i, P)
    """
    if direction not in DIRECTIONS:
        raise ValidationError(f"未知的方向: {direction}", field='direction')
    if not oracle.allow_inverse:
        raise OracleAccessError("组合学习器需要逆查询", kind='inverse')
    n = oracle.n
    ensure_dense(2 * n)
    k_bound = (1 << (d_bound + 1)) + t_bound
    term_params = params.with_accuracy(params.eps / (6 * n), params.delta / (3 * n))
    shots = sign_shots(params.delta / (3 * n))
    before = oracle.queries()
    info(f"组合学习开始: n={n}, d={d_bound}, t={t_bound}, k_bound={k_bound}, 方向={direction}", LOG_NAME)

    streams = rng.spawn(3 * n)
    terms: Dict[Tuple[int, str], np.ndarray] = {}
    term_info: Dict[str, Dict[str, Any]] = {}
    for idx, (i, letter) in enumerate((i, P) for i in range(n) for P in LETTERS):
        P = PauliOperator(PauliVec.single(n, i, letter))
        label = f"{letter}{i + 1}"
        mark = oracle.queries()
        try:
            derived = heisenberg_pauli_oracle(oracle, P, direction)
            learn_rng, sign_rng = streams[idx].spawn(2)
            estimate, report = learn_kdim(derived, k_bound, term_params, learn_rng, inverse=True)
            S_fixed = hermitian_involution(estimate.to_matrix())
            sign = sign_probe(oracle, P, S_fixed, shots, sign_rng, direction)
        except BaseError as e:
            raise LearnerFailure(f"{label} 项学习失败: {e.message}", stage='composed_term', term=label, cause=e)
        terms[(i, letter)] = sign * S_fixed
        term_info[label] = {
            'support_dim': report.details.get('support_dim'),
            'a': report.a, 'b': report.b,
            'sign': sign,
            'queries': query_delta(mark, oracle.queries()),
        }
        if report.details.get('support_dim', 0) > k_bound:
            warning(f"{label} 的支撑维数 {report.details['support_dim']} 超过 k_bound={k_bound}", LOG_NAME)
        debug(f"{label}: 支撑维数={report.details.get('support_dim')}, 符号={sign:+d}", LOG_NAME)

    estimate = ComposedEstimate.from_terms(n, terms, direction)
    report = LearnReport(learner='composed', queries=query_delta(before, oracle.queries()),
                         details={'direction': direction, 'k_bound': k_bound, 'd_bound': d_bound,
                                  't_bound': t_bound, 'term_eps': term_params.eps, 'sign_shots': shots,
                                  'terms': term_info})
    info(f"组合学习完成: 正向={report.queries.get('forward', 0)}, 逆={report.queries.get('inverse', 0)}", LOG_NAME)
    return estimate, report


@dataclass
class NullityWitness:
    """
    U† W_x U 为带符号 Weyl 算符的最大子空间 S，以及余维数 t
    """
    normalized_subspace: Subspace
    t: int
    images: Dict[PauliVec, Tuple[PauliVec, complex]] = field(default_factory=dict)

    def verify(self, U: np.ndarray, tol: float = 1e-9) -> bool:
        for x in self.normalized_subspace.basis:
            if _single_weyl(U, x, tol) is None:
                return False
        return True


def _single_weyl(U: np.ndarray, x: PauliVec, tol: float) -> Optional[Tuple[PauliVec, complex]]:
    """
    U†W_xU 的 Pauli 质量是否集中在单项上；是则返回 (y, 系数)
    """
    coeffs = pauli_coefficients(U.conj().T @ weyl_matrix(PauliOperator(x)) @ U)
    K = int(np.argmax(np.abs(coeffs)))
    if abs(coeffs[K]) ** 2 < 1.0 - tol:
        return None
    packed, _ = _index_tables(x.n)
    return PauliVec.from_packed(x.n, int(packed[K])), complex(coeffs[K])


def clifford_nullity(U: np.ndarray, tol: float = 1e-9) -> NullityWitness:
    """
    穷举 F₂^{2n}，找出共轭后仍为带符号 Weyl 算符的 x；这些 x 构成子空间，t 为其余维数

    :raises DenseCapError: n > 6
    """
    n = num_qubits(U)
    if n > NULLITY_MAX_N:
        raise DenseCapError(f"零化度穷举只支持 n ≤ {NULLITY_MAX_N}", n=n, cap=NULLITY_MAX_N)
    good: List[PauliVec] = []
    images: Dict[PauliVec, Tuple[PauliVec, complex]] = {}
    for packed in range(1, 1 << (2 * n)):
        x = PauliVec.from_packed(n, packed)
        image = _single_weyl(U, x, tol)
        if image is not None:
            good.append(x)
            images[x] = image
    S = span(good, n)
    return NullityWitness(S, 2 * n - S.dim, {x: images[x] for x in S.basis if x in images})
