#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
带符号 Weyl 算符、任意算符的 Pauli 展开、支撑与精确 Pauli 投影
约定 W_x = i^{a·b} ⊗_j X^{a_j} Z^{b_j}，稠密矩阵中第 1 个比特为最高位
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from src.config.config_manager import get_config_manager
from src.core.f2symplectic import PauliVec, Subspace, canonical_subspace, symplectic_complement, _insert
from src.utils.exceptions import DenseCapError, DimensionError

# P4[k] = X^a Z^b，k = 2a + b，不含 i^{ab} 相位
P4 = np.array([
    [[1, 0], [0, 1]],
    [[1, 0], [0, -1]],
    [[0, 1], [1, 0]],
    [[0, -1], [1, 0]],
], dtype=complex)
# P4T[r, c, k] = P4[k, c, r]，前向展开中与 (r_j, c_j) 轴缩并
P4T = np.transpose(P4, (2, 1, 0))
I_POWERS = np.array([1, 1j, -1, -1j], dtype=complex)


def ensure_dense(n: int, cap: Optional[int] = None) -> None:
    """
    检查比特数不超过稠密模拟上限

    :param n: 量子比特数
    :param cap: 上限，None 时读取配置 dense.cap
    """
    if cap is None:
        cap = get_config_manager().get_dense_config()['cap']
    if n > cap:
        raise DenseCapError(f"n={n} 超出稠密上限 {cap}", n=n, cap=cap)


def num_qubits(A: np.ndarray) -> int:
    """
    由 2^n×2^n 方阵推出 n
    """
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError("需要方阵", expected='square', actual=A.shape)
    d = A.shape[0]
    n = d.bit_length() - 1
    if d < 1 or (1 << n) != d:
        raise DimensionError("矩阵维度不是 2 的幂", expected='2^n', actual=d)
    return n


def _index_mask(mask: int, n: int) -> int:
    # 比特 j（从 0 开始）对应计算基下标的第 n-1-j 位
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


def weyl_product_phase(x: PauliVec, y: PauliVec) -> int:
    """
    W_x W_y = i^e W_{x+y} 中的指数 e（模 4）
    """
    a1, b1, a2, b2 = x.x, x.z, y.x, y.z
    a3, b3 = a1 ^ a2, b1 ^ b2
    e = (a1 & b1).bit_count() + (a2 & b2).bit_count() + 2 * (b1 & a2).bit_count() - (a3 & b3).bit_count()
    return e % 4


@dataclass(frozen=True)
class PauliOperator:
    """
    带相位的 Weyl 算符 i^phase · W_vec
    """
    vec: PauliVec
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'phase', self.phase % 4)

    @property
    def n(self) -> int:
        return self.vec.n

    @classmethod
    def from_label(cls, label: str) -> 'PauliOperator':
        vec, phase = PauliVec.from_label(label)
        return cls(vec, phase)

    @classmethod
    def identity(cls, n: int) -> 'PauliOperator':
        return cls(PauliVec.zero(n), 0)

    def __mul__(self, other: 'PauliOperator') -> 'PauliOperator':
        return PauliOperator(self.vec + other.vec, self.phase + other.phase + weyl_product_phase(self.vec, other.vec))

    def __neg__(self) -> 'PauliOperator':
        return PauliOperator(self.vec, self.phase + 2)

    @property
    def sign(self) -> complex:
        return complex(I_POWERS[self.phase])

    def dagger(self) -> 'PauliOperator':
        # W_x 是 Hermite 的，只需共轭相位
        return PauliOperator(self.vec, -self.phase)

    def matrix(self, dense_cap: Optional[int] = None) -> np.ndarray:
        return weyl_matrix(self, dense_cap)

    def to_label(self) -> str:
        return self.vec.to_label(self.phase)

    def __str__(self) -> str:
        return self.to_label()


def weyl_matrix(p: PauliOperator, dense_cap: Optional[int] = None) -> np.ndarray:
    """
    Weyl 算符的稠密矩阵
    单项式矩阵：第 c 列只有 (c ⊕ a) 行非零，值为相位 · (-1)^{b·c}

    :param p: 带相位的 Weyl 算符
    :param dense_cap: 稠密上限
    :return: 2^n×2^n 复矩阵
    """
    n = p.n
    ensure_dense(n, dense_cap)
    d = 1 << n
    xm = _index_mask(p.vec.x, n)
    zm = _index_mask(p.vec.z, n)
    cols = np.arange(d)
    rows = cols ^ xm
    parity = np.zeros(d, dtype=np.int64)
    t = cols & zm
    while np.any(t):
        parity ^= t & 1
        t = t >> 1
    values = I_POWERS[(p.phase + (p.vec.x & p.vec.z).bit_count()) % 4] * (1 - 2 * parity)
    W = np.zeros((d, d), dtype=complex)
    W[rows, cols] = values
    return W


@lru_cache(maxsize=16)
def _index_tables(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    系数数组下标 K 与打包向量、a·b 的对应表
    K = Σ_j k_j 4^{n-1-j}，k_j = 2a_j + b_j
    """
    K = np.arange(4 ** n, dtype=np.int64)
    packed = np.zeros_like(K)
    ab = np.zeros_like(K)
    for j in range(n):
        k = (K >> (2 * (n - 1 - j))) & 3
        a, b = k >> 1, k & 1
        packed |= (a << j) | (b << (n + j))
        ab += a & b
    packed.setflags(write=False)
    ab.setflags(write=False)
    return packed, ab


def _coefficient_index(v: PauliVec) -> int:
    K = 0
    for j in range(v.n):
        K = 4 * K + 2 * ((v.x >> j) & 1) + ((v.z >> j) & 1)
    return K


def _parity(values: np.ndarray) -> np.ndarray:
    t = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        t ^= t >> shift
    return t & 1


def membership_mask(S: Subspace) -> np.ndarray:
    """
    长度 4^n 的布尔数组，标记系数下标对应的向量是否属于 S
    通过与 S^⊥ 基的辛内积全为 0 判断
    """
    n = S.n
    packed, _ = _index_tables(n)
    mask = (1 << n) - 1
    xs, zs = packed & mask, packed >> n
    inside = np.ones(packed.shape, dtype=bool)
    for c in symplectic_complement(S).basis:
        inside &= _parity((xs & c.z) ^ (zs & c.x)) == 0
    return inside


@dataclass
class PauliExpansion:
    """
    Pauli 展开 α_x = tr(A W_x)/2^n
    coeffs 为按下标 K 排列的稠密数组，terms() 给出阈值以上的稀疏映射
    """
    n: int
    coeffs: np.ndarray
    threshold: float = 1e-12

    def coefficient(self, v: PauliVec) -> complex:
        return complex(self.coeffs[_coefficient_index(v)])

    def terms(self) -> Dict[PauliVec, complex]:
        packed, _ = _index_tables(self.n)
        keep = np.nonzero(np.abs(self.coeffs) > self.threshold)[0]
        return {PauliVec.from_packed(self.n, int(packed[K])): complex(self.coeffs[K]) for K in keep}

    def support(self) -> list:
        return list(self.terms().keys())

    def probabilities(self) -> np.ndarray:
        """
        Bell 采样分布 |α_x|²，阈值以下置零
        """
        probs = np.abs(self.coeffs) ** 2
        probs[np.abs(self.coeffs) <= self.threshold] = 0.0
        return probs

    def mass(self, S: Subspace) -> float:
        return float(np.sum(np.abs(self.coeffs[membership_mask(S)]) ** 2))

    def reconstruct(self) -> np.ndarray:
        return pauli_reconstruct(self.coeffs, self.n)

    def to_dict(self) -> Dict:
        terms = []
        for v, value in sorted(self.terms().items()):
            terms.append({'pauli': v.to_label(), 're': float(value.real), 'im': float(value.imag)})
        return {'n': self.n, 'terms': terms}


def _default_threshold() -> float:
    return get_config_manager().get_pauli_config()['threshold']


def pauli_coefficients(A: np.ndarray) -> np.ndarray:
    """
    张量递推计算全部 4^n 个系数，O(n·4^n)
    """
    n = num_qubits(A)
    T = np.asarray(A, dtype=complex).reshape([2] * (2 * n))
    order = [ax for j in range(n) for ax in (j, n + j)]
    T = np.transpose(T, order)
    for _ in range(n):
        T = np.tensordot(T, P4T, axes=([0, 1], [0, 1]))
    _, ab = _index_tables(n)
    return T.reshape(-1) * I_POWERS[ab % 4] / (1 << n)


def pauli_reconstruct(coeffs: np.ndarray, n: int) -> np.ndarray:
    """
    由系数重建算符 Σ α_x W_x
    """
    _, ab = _index_tables(n)
    T = (np.asarray(coeffs, dtype=complex) * I_POWERS[ab % 4]).reshape([4] * n)
    for _ in range(n):
        T = np.tensordot(T, P4, axes=([0], [0]))
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    d = 1 << n
    return np.transpose(T, order).reshape(d, d)


def pauli_expand(A: np.ndarray, threshold: Optional[float] = None) -> PauliExpansion:
    """
    Pauli 展开

    :param A: 2^n×2^n 矩阵
    :param threshold: 视为零的系数模长阈值
    :return: PauliExpansion
    """
    n = num_qubits(A)
    ensure_dense(n)
    return PauliExpansion(n, pauli_coefficients(A), _default_threshold() if threshold is None else threshold)


def pauli_expand_direct(A: np.ndarray) -> np.ndarray:
    """
    逐个求迹的 4^n 路径，仅用于交叉校验
    """
    n = num_qubits(A)
    packed, _ = _index_tables(n)
    out = np.empty(4 ** n, dtype=complex)
    for K, p in enumerate(packed):
        W = weyl_matrix(PauliOperator(PauliVec.from_packed(n, int(p))))
        out[K] = np.trace(A @ W) / (1 << n)
    return out


def support_span(A: np.ndarray, threshold: Optional[float] = None) -> Subspace:
    """
    Pauli 支撑的线性张成，维数即 Pauli 维数

    :param A: 矩阵
    :param threshold: 阈值 τ
    :return: 子空间
    """
    expansion = pauli_expand(A, threshold)
    packed, _ = _index_tables(expansion.n)
    rows: list = []
    for K in np.nonzero(np.abs(expansion.coeffs) > expansion.threshold)[0]:
        _insert(rows, int(packed[K]))
        if len(rows) == 2 * expansion.n:
            break
    return Subspace(expansion.n, tuple(rows))


def pauli_project(A: np.ndarray, S: Subspace) -> np.ndarray:
    """
    Pauli 投影 Π_S(A)：把 S 之外的 Pauli 系数清零
    """
    n = num_qubits(A)
    if S.n != n:
        raise DimensionError("子空间与矩阵比特数不同", expected=n, actual=S.n)
    ensure_dense(n)
    coeffs = pauli_coefficients(A)
    coeffs[~membership_mask(S)] = 0.0
    return pauli_reconstruct(coeffs, n)


def pauli_twirl(A: np.ndarray, S: Subspace, cap: Optional[int] = None) -> np.ndarray:
    """
    对 S^⊥ 全体元素的 Pauli 扭转 E_q[W_q A W_q†]，应与 pauli_project 相同

    :param A: 矩阵
    :param S: 子空间
    :param cap: dim S^⊥ 的上限，None 时读取配置 pauli.twirl_cap
    """
    n = num_qubits(A)
    complement = symplectic_complement(S)
    if cap is None:
        cap = get_config_manager().get_pauli_config()['twirl_cap']
    if complement.dim > cap:
        raise DenseCapError(f"dim S^⊥={complement.dim} 超出精确扭转上限，请改用 pauli_project", n=complement.dim, cap=cap)
    total = np.zeros_like(A, dtype=complex)
    for q in complement.elements():
        W = weyl_matrix(PauliOperator(q))
        total += W @ A @ W.conj().T
    return total / (1 << complement.dim)


def captured_mass(U: np.ndarray, A: Subspace) -> float:
    """
    U 落在子空间 A 内的 Pauli 质量 Σ_{x∈A} |α_x|²
    """
    return pauli_expand(U, threshold=0.0).mass(A)


def approx_block_distance(U: np.ndarray, a: int, b: int) -> float:
    """
    ‖U − Π_{W_{a,b}}(U)‖_op，用于判断 U 是否 (a,b,ε) 近似块对角
    """
    n = num_qubits(U)
    return float(np.linalg.norm(U - pauli_project(U, canonical_subspace(n, a, b)), 2))


def pauli_dimension(A: np.ndarray, threshold: Optional[float] = None) -> int:
    return support_span(A, threshold).dim
