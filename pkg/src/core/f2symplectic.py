#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
F₂^{2n} 上的辛线性代数
PauliVec 以两个整数位掩码 (x, z) 存储，第 j 位对应第 j+1 个量子比特
子空间以约化行阶梯形存储，打包列顺序为 x 位在低位、z 位在高位 (packed = x | z << n)
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.exceptions import DimensionError, SubspaceError, ValidationError

_LETTER = {(0, 0): 'I', (1, 0): 'X', (0, 1): 'Z', (1, 1): 'Y'}
_BITS = {'I': (0, 0), 'X': (1, 0), 'Z': (0, 1), 'Y': (1, 1)}


@dataclass(frozen=True, order=True)
class PauliVec:
    """
    F₂^{2n} 中的向量 (a|b)，对应 Weyl 算符 W_x
    """
    n: int
    x: int
    z: int

    def __post_init__(self):
        limit = 1 << self.n
        if self.n < 0 or not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValidationError(f"PauliVec 位宽超出 n={self.n}", field='bits')

    @classmethod
    def zero(cls, n: int) -> 'PauliVec':
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> 'PauliVec':
        """
        单比特 Pauli

        :param n: 量子比特数
        :param qubit: 比特下标（从 0 开始）
        :param letter: 'I' / 'X' / 'Y' / 'Z'
        """
        a, b = _BITS[letter.upper()]
        return cls(n, a << qubit, b << qubit)

    @classmethod
    def from_packed(cls, n: int, packed: int) -> 'PauliVec':
        mask = (1 << n) - 1
        return cls(n, packed & mask, (packed >> n) & mask)

    @classmethod
    def from_bits(cls, a: Sequence[int], b: Sequence[int]) -> 'PauliVec':
        """
        由 x 部分 a 与 z 部分 b 的 0/1 序列构造，a[0] 对应第 1 个比特
        """
        if len(a) != len(b):
            raise DimensionError("x 部分与 z 部分长度不同", expected=len(a), actual=len(b))
        x = sum(1 << j for j, bit in enumerate(a) if bit & 1)
        z = sum(1 << j for j, bit in enumerate(b) if bit & 1)
        return cls(len(a), x, z)

    @classmethod
    def from_label(cls, label: str) -> Tuple['PauliVec', int]:
        """
        解析带符号的 Pauli 串，例如 "+XIZ"、"-iY"

        :param label: Pauli 串，第一个字母作用在第 1 个比特上
        :return: (向量, 相位指数 k，表示 i^k)
        """
        text = label.strip()
        phase = 0
        if text.startswith('+'):
            text = text[1:]
        elif text.startswith('-'):
            phase = 2
            text = text[1:]
        if text.startswith('i'):
            phase = (phase + 1) % 4
            text = text[1:]
        if any(ch not in _BITS for ch in text):
            raise ValidationError(f"非法的 Pauli 串: {label}", field='pauli')
        x = z = 0
        for j, ch in enumerate(text):
            a, b = _BITS[ch]
            x |= a << j
            z |= b << j
        return cls(len(text), x, z), phase

    @property
    def packed(self) -> int:
        return self.x | (self.z << self.n)

    def __add__(self, other: 'PauliVec') -> 'PauliVec':
        _check_n(self.n, other.n)
        return PauliVec(self.n, self.x ^ other.x, self.z ^ other.z)

    def is_zero(self) -> bool:
        return self.x == 0 and self.z == 0

    def a_bits(self) -> List[int]:
        return [(self.x >> j) & 1 for j in range(self.n)]

    def b_bits(self) -> List[int]:
        return [(self.z >> j) & 1 for j in range(self.n)]

    def letter(self, qubit: int) -> str:
        return _LETTER[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def qubit_support(self) -> List[int]:
        """
        非平凡作用的比特下标（从 0 开始）
        """
        mask = self.x | self.z
        return [j for j in range(self.n) if (mask >> j) & 1]

    def to_label(self, phase: int = 0) -> str:
        sign = {0: '+', 1: '+i', 2: '-', 3: '-i'}[phase % 4]
        return sign + ''.join(self.letter(j) for j in range(self.n))

    def __str__(self) -> str:
        return self.to_label()


def _check_n(n1: int, n2: int) -> None:
    if n1 != n2:
        raise DimensionError("量子比特数不匹配", expected=n1, actual=n2)


def symplectic_product(x: PauliVec, y: PauliVec) -> int:
    """
    辛内积 [x, y]，0 表示对应的 Weyl 算符对易

    :param x: 向量
    :param y: 向量
    :return: 0 或 1
    """
    _check_n(x.n, y.n)
    return ((x.x & y.z) ^ (x.z & y.x)).bit_count() & 1


def _swap_halves(packed: int, n: int) -> int:
    # (a|b) -> (b|a)，使辛内积化为普通内积
    mask = (1 << n) - 1
    return ((packed >> n) & mask) | ((packed & mask) << n)


def _reduce(rows: Sequence[int], v: int) -> int:
    for r in rows:
        if v ^ r < v:
            v ^= r
    return v


def _insert(rows: List[int], v: int) -> bool:
    """
    向完全约化的行集合插入一个向量，保持主元降序
    主元取最高位

    :return: 是否增加了维数
    """
    v = _reduce(rows, v)
    if v == 0:
        return False
    pivot = v.bit_length() - 1
    for i, r in enumerate(rows):
        if (r >> pivot) & 1:
            rows[i] = r ^ v
    rows.append(v)
    rows.sort(reverse=True)
    return True


@dataclass(frozen=True)
class Subspace:
    """
    F₂^{2n} 的线性子空间，basis 为唯一的约化行阶梯形
    """
    n: int
    rows: Tuple[int, ...] = field(default=())

    @property
    def basis(self) -> List[PauliVec]:
        return [PauliVec.from_packed(self.n, r) for r in self.rows]

    @property
    def dim(self) -> int:
        return len(self.rows)

    @classmethod
    def zero(cls, n: int) -> 'Subspace':
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> 'Subspace':
        return cls(n, tuple(sorted((1 << k for k in range(2 * n)), reverse=True)))

    def __contains__(self, v: PauliVec) -> bool:
        return contains(self, v)

    def elements(self) -> Iterator[PauliVec]:
        """
        逐个枚举子空间中的全部 2^dim 个元素（格雷码顺序）
        """
        current = 0
        yield PauliVec.from_packed(self.n, 0)
        for k in range(1, 1 << self.dim):
            flip = (k & -k).bit_length() - 1
            current ^= self.rows[flip]
            yield PauliVec.from_packed(self.n, current)

    def packed_elements(self) -> np.ndarray:
        """
        所有元素的打包整数，按二进制计数顺序
        """
        values = np.zeros(1, dtype=np.int64)
        for r in self.rows:
            values = np.concatenate([values, values ^ r])
        return values

    def is_subspace_of(self, other: 'Subspace') -> bool:
        _check_n(self.n, other.n)
        return all(_reduce(other.rows, r) == 0 for r in self.rows)

    def extend(self, vectors: Iterable[PauliVec]) -> 'Subspace':
        return span(list(self.basis) + list(vectors), self.n)

    def qubit_support(self) -> List[int]:
        """
        子空间中任一元素非平凡作用过的比特集合
        """
        mask = 0
        for v in self.basis:
            mask |= v.x | v.z
        return [j for j in range(self.n) if (mask >> j) & 1]

    def to_text(self) -> str:
        return '\n'.join(v.to_label() for v in self.basis)

    @classmethod
    def from_text(cls, text: str, n: Optional[int] = None) -> 'Subspace':
        vectors = [PauliVec.from_label(line)[0] for line in text.splitlines() if line.strip()]
        if n is None:
            if not vectors:
                raise ValidationError("空文本无法推断量子比特数", field='n')
            n = vectors[0].n
        return span(vectors, n)


def span(vectors: Sequence[PauliVec], n: Optional[int] = None) -> Subspace:
    """
    线性张成，返回约化行阶梯形基

    :param vectors: 向量列表，可以为空
    :param n: 量子比特数，vectors 为空时必须提供
    :return: 子空间
    """
    if n is None:
        if not vectors:
            raise ValidationError("空向量列表需要显式给出 n", field='n')
        n = vectors[0].n
    rows: List[int] = []
    for v in vectors:
        _check_n(n, v.n)
        _insert(rows, v.packed)
    return Subspace(n, tuple(rows))


def contains(S: Subspace, x: PauliVec) -> bool:
    """
    判断 x 是否属于 S
    """
    _check_n(S.n, x.n)
    return _reduce(S.rows, x.packed) == 0


def _kernel(rows: Sequence[int], width: int) -> List[int]:
    """
    完全约化行集合的零空间基（普通点积）
    每个自由列 f 给出 1<<f 加上所有含第 f 位的行的主元位
    """
    pivots = {r.bit_length() - 1: r for r in rows}
    kernel = []
    for f in range(width):
        if f in pivots:
            continue
        v = 1 << f
        for p, r in pivots.items():
            if (r >> f) & 1:
                v |= 1 << p
        kernel.append(v)
    return kernel


def symplectic_complement(S: Subspace) -> Subspace:
    """
    辛补空间 S^⊥ = {x : 对所有 y∈S, [x,y]=0}

    :param S: 子空间
    :return: S^⊥，dim(S) + dim(S^⊥) = 2n
    """
    swapped: List[int] = []
    for r in S.rows:
        _insert(swapped, _swap_halves(r, S.n))
    kernel = _kernel(swapped, 2 * S.n)
    rows: List[int] = []
    for v in kernel:
        _insert(rows, v)
    return Subspace(S.n, tuple(rows))


@dataclass
class SymplecticBasis:
    """
    辛基：a 个辛对 (x_i, z_i) 与 b 个迷向生成元
    ell 记录第二阶段中由 T 的迷向生成元与 S 的生成元配成的对数
    """
    n: int
    pairs: List[Tuple[PauliVec, PauliVec]] = field(default_factory=list)
    isotropic: List[PauliVec] = field(default_factory=list)
    ell: int = 0

    @property
    def a(self) -> int:
        return len(self.pairs)

    @property
    def b(self) -> int:
        return len(self.isotropic)

    def vectors(self) -> List[PauliVec]:
        out: List[PauliVec] = []
        for x, z in self.pairs:
            out.extend((x, z))
        out.extend(self.isotropic)
        return out

    def subspace(self) -> Subspace:
        return span(self.vectors(), self.n)

    def relation_violations(self) -> List[str]:
        """
        检查全部辛关系，返回违反项的描述（空列表表示合法）
        """
        problems = []
        xs = [x for x, _ in self.pairs]
        zs = [z for _, z in self.pairs]
        for i, xi in enumerate(xs):
            for j, zj in enumerate(zs):
                if symplectic_product(xi, zj) != (1 if i == j else 0):
                    problems.append(f"[x{i}, z{j}] 错误")
            for j in range(i + 1, len(xs)):
                if symplectic_product(xi, xs[j]):
                    problems.append(f"[x{i}, x{j}] != 0")
                if symplectic_product(zs[i], zs[j]):
                    problems.append(f"[z{i}, z{j}] != 0")
        everything = self.vectors()
        for k, g in enumerate(self.isotropic):
            if any(symplectic_product(g, v) for v in everything):
                problems.append(f"迷向生成元 {k} 与基中元素反对易")
        if span(everything, self.n).dim != len(everything):
            problems.append("基向量线性相关")
        return problems


def _fix(v: PauliVec, x: PauliVec, z: PauliVec) -> PauliVec:
    # 使 v 与辛对 (x, z) 都对易
    if symplectic_product(x, v):
        v = v + z
    if symplectic_product(z, v):
        v = v + x
    return v


def _first_partner(v: PauliVec, pool: List[PauliVec]) -> Optional[int]:
    for idx, w in enumerate(pool):
        if symplectic_product(v, w):
            return idx
    return None


def symplectic_gram_schmidt(T: Subspace, S: Subspace) -> Tuple[SymplecticBasis, SymplecticBasis]:
    """
    嵌套子空间 T ⊆ S 的辛 Gram-Schmidt 分解，分三个阶段：
    一、T 的生成元之间配对；二、剩余的 T 迷向生成元与 S 的扩充生成元配对（共 ell 对）；
    三、S 剩余扩充生成元之间配对。"任取一个元素" 统一取当前列表的第一个

    :param T: 子空间
    :param S: 包含 T 的子空间
    :return: (T 的辛基, S 的辛基)
    """
    _check_n(T.n, S.n)
    if not T.is_subspace_of(S):
        raise SubspaceError("T 不包含于 S", details={'dim_T': T.dim, 'dim_S': S.dim})
    n = T.n

    G: List[PauliVec] = T.basis
    rows = list(T.rows)
    H: List[PauliVec] = []
    for s in S.basis:
        if _insert(rows, s.packed):
            H.append(s)

    pairs1: List[Tuple[PauliVec, PauliVec]] = []
    A: List[PauliVec] = []
    # 第一阶段
    while G:
        t_i = G.pop(0)
        j = _first_partner(t_i, G)
        if j is None:
            A.append(t_i)
            continue
        x_l, z_l = G.pop(j), t_i
        pairs1.append((x_l, z_l))
        G = [_fix(t, x_l, z_l) for t in G]
        H = [_fix(s, x_l, z_l) for s in H]

    pairs2: List[Tuple[PauliVec, PauliVec]] = []
    # 第二阶段，此时 G 已清空
    while A:
        t_i = A.pop(0)
        j = _first_partner(t_i, H)
        if j is None:
            G.append(t_i)
            continue
        x_l, z_l = H.pop(j), t_i
        pairs2.append((x_l, z_l))
        A = [t + z_l if symplectic_product(x_l, t) else t for t in A]
        H = [_fix(s, x_l, z_l) for s in H]

    pairs3: List[Tuple[PauliVec, PauliVec]] = []
    # 第三阶段，此时 A 已清空
    while H:
        s_i = H.pop(0)
        j = _first_partner(s_i, H)
        if j is None:
            A.append(s_i)
            continue
        x_l, z_l = H.pop(j), s_i
        pairs3.append((x_l, z_l))
        H = [_fix(s, x_l, z_l) for s in H]

    ell = len(pairs2)
    t_basis = SymplecticBasis(n, list(pairs1), [z for _, z in pairs2] + list(G), ell)
    s_basis = SymplecticBasis(n, pairs1 + pairs2 + pairs3, list(G) + list(A), ell)
    return t_basis, s_basis


def decompose_subspace(S: Subspace) -> Tuple[int, int]:
    """
    子空间的辛类型 (a, b)，2a + b = dim S
    """
    basis, _ = symplectic_gram_schmidt(S, S)
    return basis.a, basis.b


def canonical_subspace(n: int, a: int, b: int) -> Subspace:
    """
    标准子群 W_{a,b}：最后 a 个比特上完整的 Pauli 群，之前 b 个比特上的 {I, Z}

    :param n: 量子比特数
    :param a: 辛对数
    :param b: 迷向生成元数
    """
    if a < 0 or b < 0 or a + b > n:
        raise ValidationError(f"非法的 (a, b)=({a}, {b})，n={n}", field='a,b')
    vectors = []
    for q in range(n - a, n):
        vectors.append(PauliVec.single(n, q, 'X'))
        vectors.append(PauliVec.single(n, q, 'Z'))
    for q in range(n - a - b, n - a):
        vectors.append(PauliVec.single(n, q, 'Z'))
    return span(vectors, n)


def random_subspace(n: int, dim: int, rng: np.random.Generator) -> Subspace:
    """
    均匀随机抽取向量直至达到给定维数

    :param n: 量子比特数
    :param dim: 目标维数，不超过 2n
    :param rng: 随机数生成器
    """
    if not 0 <= dim <= 2 * n:
        raise ValidationError(f"维数 {dim} 超出范围 [0, {2 * n}]", field='dim')
    rows: List[int] = []
    while len(rows) < dim:
        _insert(rows, int(rng.integers(1, 1 << (2 * n))))
    return Subspace(n, tuple(rows))


def random_nested_pair(n: int, dim_t: int, dim_s: int, rng: np.random.Generator) -> Tuple[Subspace, Subspace]:
    """
    随机嵌套子空间 T ⊆ S
    """
    T = random_subspace(n, dim_t, rng)
    rows = list(T.rows)
    while len(rows) < dim_s:
        _insert(rows, int(rng.integers(1, 1 << (2 * n))))
    return T, Subspace(n, tuple(rows))
