#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Clifford 算符的表格（tableau）表示与标准化线路综合
表格存储每个 X_j、Z_j 在共轭下的像（带符号的 Weyl 算符），同时保留门序列
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.f2symplectic import (
    PauliVec, Subspace, SymplecticBasis, canonical_subspace, span, symplectic_gram_schmidt
)
from src.core.gates import Gate, circuit_unitary, gates_from_text, gates_to_text, make_gate
from src.core.pauli_algebra import PauliOperator
from src.utils.exceptions import DimensionError, SubspaceError, ValidationError
from src.utils.logger import debug

LOG_NAME = 'clifford'


def _flip(p: PauliOperator, flip: int) -> PauliOperator:
    return PauliOperator(p.vec, p.phase + 2 * flip) if flip else p


def conjugate_by_gate(p: PauliOperator, g: Gate) -> PauliOperator:
    """
    单个 Clifford 门的共轭 G p G†

    :param p: 带符号 Weyl 算符
    :param g: H / S / SDG / CNOT / CZ / X / Y / Z / I
    :return: 新的带符号 Weyl 算符
    """
    n = p.n
    x, z = p.vec.x, p.vec.z
    name = g.name
    if name == 'I':
        return p
    if name == 'H':
        j = g.qubits[0]
        a, b = (x >> j) & 1, (z >> j) & 1
        x = (x & ~(1 << j)) | (b << j)
        z = (z & ~(1 << j)) | (a << j)
        return _flip(PauliOperator(PauliVec(n, x, z), p.phase), a & b)
    if name == 'S':
        j = g.qubits[0]
        a, b = (x >> j) & 1, (z >> j) & 1
        z ^= a << j
        return _flip(PauliOperator(PauliVec(n, x, z), p.phase), a & b)
    if name == 'SDG':
        q = p
        for _ in range(3):
            q = conjugate_by_gate(q, Gate('S', g.qubits))
        return q
    if name == 'CNOT':
        c, t = g.qubits
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        flip = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
        return _flip(PauliOperator(PauliVec(n, x, z), p.phase), flip)
    if name == 'CZ':
        c, t = g.qubits
        q = conjugate_by_gate(p, Gate('H', (t,)))
        q = conjugate_by_gate(q, Gate('CNOT', (c, t)))
        return conjugate_by_gate(q, Gate('H', (t,)))
    if name == 'X':
        return _flip(p, (z >> g.qubits[0]) & 1)
    if name == 'Z':
        return _flip(p, (x >> g.qubits[0]) & 1)
    if name == 'Y':
        j = g.qubits[0]
        return _flip(p, ((x >> j) ^ (z >> j)) & 1)
    raise ValidationError(f"门 {name} 不是 Clifford 门", field='gate')


_INVERSE = {'S': 'SDG', 'SDG': 'S'}


@dataclass(frozen=True)
class CliffordOp:
    """
    Clifford 算符
    images[j] 为 C X_j C†，images[n + j] 为 C Z_j C†；gates 为可重放的门序列
    """
    n: int
    images: Tuple[PauliOperator, ...]
    gates: Tuple[Gate, ...] = field(default=())

    @classmethod
    def identity(cls, n: int) -> 'CliffordOp':
        images = [PauliOperator(PauliVec.single(n, j, 'X')) for j in range(n)]
        images += [PauliOperator(PauliVec.single(n, j, 'Z')) for j in range(n)]
        return cls(n, tuple(images), ())

    @classmethod
    def from_gates(cls, n: int, gates: Sequence[Gate]) -> 'CliffordOp':
        C = cls.identity(n)
        for g in gates:
            C = C.then(g)
        return C

    @classmethod
    def from_text(cls, n: int, text: str) -> 'CliffordOp':
        return cls.from_gates(n, gates_from_text(text))

    def then(self, g: Gate) -> 'CliffordOp':
        """
        在当前线路之后追加一个门
        """
        for q in g.qubits:
            if not 0 <= q < self.n:
                raise ValidationError(f"比特下标 {q + 1} 超出 n={self.n}", field='qubits')
        images = tuple(conjugate_by_gate(p, g) for p in self.images)
        return CliffordOp(self.n, images, self.gates + (g,))

    @property
    def symplectic_matrix(self) -> np.ndarray:
        """
        2n×2n 的 F₂ 矩阵，第 k 列为第 k 个生成元像的 (a|b) 位
        """
        M = np.zeros((2 * self.n, 2 * self.n), dtype=np.uint8)
        for k, p in enumerate(self.images):
            M[:, k] = p.vec.a_bits() + p.vec.b_bits()
        return M

    @property
    def sign_bits(self) -> List[int]:
        return [p.phase // 2 for p in self.images]

    def is_symplectic(self) -> bool:
        M = self.symplectic_matrix.astype(np.int64)
        n = self.n
        Omega = np.block([[np.zeros((n, n), dtype=np.int64), np.eye(n, dtype=np.int64)],
                          [np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64)]])
        return bool(np.array_equal((M.T @ Omega @ M) % 2, Omega))

    def inverse(self) -> 'CliffordOp':
        gates = []
        for g in reversed(self.gates):
            gates.append(Gate(_INVERSE.get(g.name, g.name), g.qubits, g.params))
        return CliffordOp.from_gates(self.n, gates)

    def to_matrix(self) -> np.ndarray:
        return circuit_unitary(self.n, self.gates)

    def to_text(self) -> str:
        return gates_to_text(self.gates)

    def gate_count(self) -> int:
        return len(self.gates)


def conjugate_pauli(C: CliffordOp, p: PauliOperator) -> PauliOperator:
    """
    C W_p C†，由生成元像按相位规则相乘

    :param C: Clifford 算符
    :param p: 带符号 Weyl 算符
    :return: 带符号 Weyl 算符
    """
    if C.n != p.n:
        raise DimensionError("Clifford 与 Pauli 的比特数不同", expected=C.n, actual=p.n)
    n = C.n
    x, z = p.vec.x, p.vec.z
    result = PauliOperator.identity(n)
    for j in range(n):
        if (x >> j) & 1:
            result = result * C.images[j]
    for j in range(n):
        if (z >> j) & 1:
            result = result * C.images[n + j]
    # W_x = i^{a·b} (Π X_j^{a_j})(Π Z_j^{b_j})
    return PauliOperator(result.vec, result.phase + p.phase + (x & z).bit_count())


def compose(C1: CliffordOp, C2: CliffordOp) -> CliffordOp:
    """
    C1 ∘ C2（先作用 C2）
    """
    if C1.n != C2.n:
        raise DimensionError("Clifford 比特数不同", expected=C1.n, actual=C2.n)
    images = tuple(conjugate_pauli(C1, p) for p in C2.images)
    return CliffordOp(C1.n, images, C2.gates + C1.gates)


@dataclass(frozen=True)
class CanonicalTarget:
    """
    标准形 W_{a,b}：I^{⊗(n−a−b)} ⊗ {I,Z}^{⊗b} ⊗ {I,X,Y,Z}^{⊗a}
    """
    n: int
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or 2 * self.a + self.b > 2 * self.n or self.a + self.b > self.n:
            raise ValidationError(f"非法的标准形参数 (a, b)=({self.a}, {self.b})", field='a,b')

    def subspace(self) -> Subspace:
        return canonical_subspace(self.n, self.a, self.b)

    def pair_slot(self, i: int) -> int:
        return self.n - self.a + i

    def isotropic_slot(self, j: int) -> int:
        return self.n - self.a - self.b + j


class _Synthesizer:
    """
    贪心表格约化：逐个把生成元映到标准槽位，门只作用在仍然空闲的比特上
    """

    def __init__(self, n: int, generators: List[PauliOperator]):
        self.n = n
        self.current = list(generators)
        self.gates: List[Gate] = []
        self.free = set(range(n))

    def push(self, name: str, *qubits: int) -> None:
        g = make_gate(name, qubits)
        self.gates.append(g)
        self.current = [conjugate_by_gate(p, g) for p in self.current]

    def _letter(self, idx: int, q: int) -> str:
        return self.current[idx].vec.letter(q)

    def reduce_to_x(self, idx: int, q: int) -> None:
        """
        把第 idx 个生成元在空闲比特上的部分约化为 X_q
        """
        for j in sorted(self.free):
            letter = self._letter(idx, j)
            if letter == 'Z':
                self.push('H', j)
            elif letter == 'Y':
                self.push('S', j)
        J = [j for j in sorted(self.free) if self._letter(idx, j) == 'X']
        if not J:
            raise SubspaceError("生成元在空闲比特上为平凡，基线性相关")
        if q not in J:
            self.push('CNOT', J[0], q)
        for j in J:
            if j != q:
                self.push('CNOT', q, j)

    def reduce_partner(self, idx: int, q: int) -> None:
        """
        在保持 X_q 不变的前提下把辛伙伴约化为 Z_q
        """
        for j in sorted(self.free - {q}):
            letter = self._letter(idx, j)
            if letter == 'X':
                self.push('H', j)
            elif letter == 'Y':
                self.push('S', j)
                self.push('H', j)
        for j in sorted(self.free - {q}):
            if self._letter(idx, j) == 'Z':
                self.push('CNOT', j, q)
        if self._letter(idx, q) == 'Y':
            self.push('H', q)
            self.push('S', q)
            self.push('H', q)
        if self._letter(idx, q) != 'Z':
            raise SubspaceError("辛伙伴与 X 生成元不反对易")


def canonicalize_subgroup(B: SymplecticBasis) -> CliffordOp:
    """
    综合 Clifford 线路 C，使辛对映到最后 a 个比特上的 (X, Z)，迷向生成元映到其前 b 个比特上的 Z
    即 C T C† = W_{a,b}；符号只记录不强制

    :param B: 满足全部辛关系的基
    :return: CliffordOp
    """
    problems = B.relation_violations()
    if problems:
        raise SubspaceError("辛基关系不成立", details={'violations': problems[:10]})
    n = B.n
    target = CanonicalTarget(n, B.a, B.b)
    generators = []
    for x, z in B.pairs:
        generators.extend([PauliOperator(x), PauliOperator(z)])
    generators.extend(PauliOperator(g) for g in B.isotropic)

    synth = _Synthesizer(n, generators)
    for i in range(B.a):
        q = target.pair_slot(i)
        synth.reduce_to_x(2 * i, q)
        synth.reduce_partner(2 * i + 1, q)
        synth.free.discard(q)

    done: List[int] = []
    for j in range(B.b):
        r = target.isotropic_slot(j)
        idx = 2 * B.a + j
        synth.reduce_to_x(idx, r)
        synth.push('H', r)
        for r_prev in done:
            if synth._letter(idx, r_prev) == 'Z':
                synth.push('CNOT', r_prev, r)
        synth.free.discard(r)
        done.append(r)

    C = CliffordOp.from_gates(n, synth.gates)
    debug(f"标准化线路: n={n}, (a,b)=({B.a},{B.b}), 门数={len(synth.gates)}", LOG_NAME)
    return C


def clifford_to_block(T_hat: Subspace) -> Tuple[CliffordOp, int, int]:
    """
    由学到的支撑子空间构造 C̃，使 C̃ T̂ C̃† = W_{a',b'}

    :param T_hat: 子空间
    :return: (C̃, a', b')
    """
    basis, _ = symplectic_gram_schmidt(T_hat, T_hat)
    return canonicalize_subgroup(basis), basis.a, basis.b


def conjugated_span(C: CliffordOp, S: Subspace) -> Subspace:
    """
    span{C g C† : g ∈ S 的基}
    """
    return span([conjugate_pauli(C, PauliOperator(g)).vec for g in S.basis], S.n)


def permutation_clifford(n: int, qubits: Sequence[int]) -> CliffordOp:
    """
    由 SWAP（三个 CNOT）组成的线路，把给定比特依次移到最后 len(qubits) 个位置

    :param n: 量子比特数
    :param qubits: 比特下标（从 0 开始）
    """
    ordered = sorted(set(qubits))
    k = len(ordered)
    where = list(range(n))      # 逻辑比特 -> 当前位置
    occupant = list(range(n))   # 位置 -> 逻辑比特
    gates: List[Gate] = []
    for idx, q in enumerate(ordered):
        slot = n - k + idx
        src = where[q]
        if src == slot:
            continue
        for c, t in ((src, slot), (slot, src), (src, slot)):
            gates.append(make_gate('CNOT', (c, t)))
        other = occupant[slot]
        occupant[slot], occupant[src] = q, other
        where[q], where[other] = slot, src
    return CliffordOp.from_gates(n, gates)


def random_clifford(n: int, rng: np.random.Generator, depth: Optional[int] = None) -> CliffordOp:
    """
    随机 Clifford 线路（H / S / CNOT / CZ 的随机序列，不是均匀分布）

    :param n: 量子比特数
    :param rng: 随机数生成器
    :param depth: 门数，默认 4n+4
    """
    depth = 4 * n + 4 if depth is None else depth
    gates = []
    for _ in range(depth):
        kind = rng.integers(0, 4) if n > 1 else rng.integers(0, 2)
        if kind == 0:
            gates.append(make_gate('H', (int(rng.integers(n)),)))
        elif kind == 1:
            gates.append(make_gate('S', (int(rng.integers(n)),)))
        else:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(make_gate('CNOT' if kind == 2 else 'CZ', (int(c), int(t))))
    return CliffordOp.from_gates(n, gates)
