#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
纯态层析
model 后端按保证直接采样输出 φ√(1−ε̂²)|ψ⟩ + ε̂|w⟩；empirical 后端在 Haar 随机基下测量副本并线性反演
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from src.config.config_manager import get_config_manager
from src.core.quantum_sim import StateVector
from src.utils.exceptions import TomographyError, ValidationError
from src.utils.logger import debug

LOG_NAME = 'state_tomography'

BACKENDS = ('model', 'empirical')


@dataclass
class TomoResult:
    """
    层析结果
    eps_hat 仅 model 后端给出，为实际误差分量的大小
    """
    estimate: StateVector
    copies_charged: int
    backend: str
    eps_hat: Optional[float] = None
    failed: bool = False


def _check_eps(eps: float, delta: float) -> None:
    if not 0 < eps < 1:
        raise ValidationError(f"eps={eps} 必须在 (0, 1) 内", field='eps')
    if not 0 < delta < 1:
        raise ValidationError(f"delta={delta} 必须在 (0, 1) 内", field='delta')


def tomo_copies(m: int, eps: float, delta: float, const: float) -> int:
    """
    ⌈c·(2^m + log(1/δ))/ε²⌉
    """
    return int(math.ceil(const * ((1 << m) + math.log(1.0 / delta)) / eps ** 2))


def internal_failure(m: int, delta: float) -> float:
    """
    层析内部失败概率 min(exp(−5·2^m), δ)
    """
    return max(min(math.exp(-5.0 * (1 << m)), delta), 1e-300)


def _haar_orthogonal(psi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal(psi.shape[0]) + 1j * rng.standard_normal(psi.shape[0])
    g = g - np.vdot(psi, g) * psi
    return g / np.linalg.norm(g)


def tomo_model(target: StateVector, eps: float, delta: float, rng: np.random.Generator,
               c_tomo: Optional[float] = None) -> TomoResult:
    """
    按层析保证采样：以 1−δ 的概率 ε̂ ~ U[0, eps]，否则 ε̂ ~ U(eps, 2eps]；
    |w⟩ 为 |ψ⟩ 正交补上的 Haar 随机态，全局相位 φ 均匀

    :param target: 目标态
    :param eps: 精度
    :param delta: 失败概率
    :param rng: 随机数生成器
    :param c_tomo: 副本数常数，None 时读取配置 learner.c_tomo
    """
    _check_eps(eps, delta)
    if c_tomo is None:
        c_tomo = get_config_manager().get_learner_config()['c_tomo']
    psi = target.amplitudes
    failed = bool(rng.random() < delta)
    eps_hat = float(rng.uniform(eps, min(2 * eps, 1.0))) if failed else float(rng.uniform(0.0, eps))
    phase = np.exp(2j * np.pi * rng.random())
    if psi.shape[0] == 1:
        out, eps_hat = psi * phase, 0.0
    else:
        w = _haar_orthogonal(psi, rng)
        out = phase * (np.sqrt(1.0 - eps_hat ** 2) * psi + eps_hat * w)
    copies = tomo_copies(target.n, eps, delta, c_tomo)
    return TomoResult(StateVector.from_array(out), copies, 'model', eps_hat, failed)


def tomo_empirical(copies_provider: Iterable[StateVector], m: int, eps: float, delta: float,
                   rng: np.random.Generator, c_emp: Optional[float] = None) -> TomoResult:
    """
    每个副本在独立的 Haar 随机基下做投影测量，线性反演 ρ̂ = E[(d+1)|v⟩⟨v| − I]，取最大特征向量

    :param copies_provider: 可迭代的副本来源
    :param m: 比特数
    :param c_emp: 副本数常数，None 时读取配置 learner.c_emp
    """
    _check_eps(eps, delta)
    if c_emp is None:
        c_emp = get_config_manager().get_learner_config()['c_emp']
    N = tomo_copies(m, eps, delta, c_emp)
    d = 1 << m
    source = iter(copies_provider)
    psis = np.empty((N, d), dtype=complex)
    for i in range(N):
        try:
            psis[i] = next(source).amplitudes
        except StopIteration:
            raise TomographyError(f"副本不足：需要 {N} 个，只得到 {i} 个")
    if d == 1:
        return TomoResult(StateVector.from_array(psis[0]), N, 'empirical')

    bases = np.asarray(unitary_group.rvs(d, size=N, random_state=rng)).reshape(N, d, d)
    # 结果 j 的概率 |⟨v_j|ψ⟩|²，v_j 为基矩阵的第 j 列
    amps = np.einsum('nij,ni->nj', bases.conj(), psis)
    probs = np.abs(amps) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    outcomes = (probs.cumsum(axis=1) < rng.random((N, 1))).sum(axis=1)
    outcomes = np.minimum(outcomes, d - 1)
    vs = bases[np.arange(N), :, outcomes]
    rho = (d + 1) * np.einsum('ni,nj->ij', vs, vs.conj()) / N - np.eye(d)
    rho = (rho + rho.conj().T) / 2
    _, vecs = np.linalg.eigh(rho)
    debug(f"经验层析: m={m}, 副本={N}", LOG_NAME)
    return TomoResult(StateVector.from_array(vecs[:, -1]), N, 'empirical')


def copies_needed(backend: str, m: int, eps: float, delta: float, c_tomo: Optional[float] = None,
                  c_emp: Optional[float] = None) -> int:
    """
    指定后端在给定精度下需要的副本数，常数缺省时读取配置
    """
    cfg = get_config_manager().get_learner_config()
    if backend == 'model':
        return tomo_copies(m, eps, delta, cfg['c_tomo'] if c_tomo is None else c_tomo)
    if backend == 'empirical':
        return tomo_copies(m, eps, delta, cfg['c_emp'] if c_emp is None else c_emp)
    raise ValidationError(f"未知的层析后端: {backend}", field='tomo_backend')


def run_tomography(backend: str, copies: Sequence[StateVector], m: int, eps: float, delta: float,
                   rng: np.random.Generator, c_tomo: Optional[float] = None,
                   c_emp: Optional[float] = None) -> TomoResult:
    """
    按后端分派；copies 为调用方已经收集好的副本
    """
    if backend == 'model':
        if not copies:
            raise TomographyError("model 后端至少需要一个副本")
        return tomo_model(copies[0], eps, delta, rng, c_tomo)
    if backend == 'empirical':
        return tomo_empirical(copies, m, eps, delta, rng, c_emp)
    raise ValidationError(f"未知的层析后端: {backend}", field='tomo_backend')
