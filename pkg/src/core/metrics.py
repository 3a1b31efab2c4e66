#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
距离与范数
相位对齐算子距离、菱形距离上界 2·dist_phaseop、相位对齐归一化 Frobenius 距离
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import svds

from src.utils.exceptions import DimensionError

GRID_POINTS = 64
SVDS_THRESHOLD = 2048


def _check_same_shape(U: np.ndarray, V: np.ndarray) -> None:
    if U.shape != V.shape:
        raise DimensionError("矩阵维度不同", expected=U.shape, actual=V.shape)


def op_norm(A: np.ndarray) -> float:
    """
    算子范数（最大奇异值），大矩阵用截断 SVD
    """
    if A.shape[0] >= SVDS_THRESHOLD:
        return float(svds(A, k=1, return_singular_vectors=False)[0])
    return float(np.linalg.norm(A, 2))


def dist_phaseop(U: np.ndarray, V: np.ndarray) -> float:
    """
    min_θ ‖e^{iθ}U − V‖_op
    64 点粗网格加上 θ0 = −arg tr(V†U) 作为种子，再在最优点附近做有界一维极小化

    :param U: 酉矩阵
    :param V: 酉矩阵
    :return: 相位对齐算子距离
    """
    _check_same_shape(U, V)

    def objective(theta: float) -> float:
        return op_norm(np.exp(1j * theta) * U - V)

    overlap = np.trace(V.conj().T @ U)
    candidates = list(np.linspace(0.0, 2 * np.pi, GRID_POINTS, endpoint=False))
    if abs(overlap) > 1e-14:
        candidates.append(float(-np.angle(overlap)) % (2 * np.pi))
    values = [objective(t) for t in candidates]
    best = int(np.argmin(values))
    theta_star, value_star = candidates[best], values[best]

    width = 2 * np.pi / GRID_POINTS
    result = minimize_scalar(objective, bounds=(theta_star - width, theta_star + width),
                             method='bounded', options={'xatol': 1e-10})
    if result.success and result.fun < value_star:
        value_star = float(result.fun)
    return max(0.0, float(value_star))


def dist_phaseF(U: np.ndarray, V: np.ndarray) -> float:
    """
    min_θ (1/√d)‖e^{iθ}U − V‖_F = √(2 − 2|tr(V†U)|/d)
    """
    _check_same_shape(U, V)
    d = U.shape[0]
    value = 2.0 - 2.0 * abs(np.trace(V.conj().T @ U)) / d
    return float(np.sqrt(max(0.0, value)))


def diamond_upper(U: np.ndarray, V: np.ndarray) -> float:
    return 2.0 * dist_phaseop(U, V)


@dataclass
class DistanceReport:
    """
    一组距离，diamond_upper = 2·phaseop
    """
    op: float
    phaseop: float
    diamond_upper: float
    frob_normalized: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def distance_report(U: np.ndarray, V: np.ndarray) -> DistanceReport:
    """
    计算 U 与 V 之间的全部距离

    :param U: 真值
    :param V: 估计
    """
    _check_same_shape(U, V)
    phaseop = dist_phaseop(U, V)
    return DistanceReport(
        op=op_norm(U - V),
        phaseop=phaseop,
        diamond_upper=2.0 * phaseop,
        frob_normalized=dist_phaseF(U, V),
    )


def norm_chain_check(A: np.ndarray, tol: float = 1e-9) -> Dict[str, Any]:
    """
    Schatten 范数链：‖A‖_op ≤ ‖A‖_F ≤ ‖A‖_tr，且 ‖A‖_F ≤ √r‖A‖_op，‖A‖_tr ≤ √r‖A‖_F

    :param A: 任意矩阵
    :param tol: 容差
    :return: 各范数、秩以及每条不等式是否成立
    """
    s = np.linalg.svd(A, compute_uv=False)
    op = float(s[0]) if s.size else 0.0
    fro = float(np.sqrt(np.sum(s ** 2)))
    tr = float(np.sum(s))
    rank = int(np.sum(s > tol * max(1.0, op)))
    root_r = np.sqrt(rank)
    checks = {
        'op_le_frob': op <= fro + tol,
        'frob_le_trace': fro <= tr + tol,
        'frob_le_sqrt_rank_op': fro <= root_r * op + tol,
        'trace_le_sqrt_rank_frob': tr <= root_r * fro + tol,
        'trace_le_rank_op': tr <= rank * op + tol,
    }
    return {'op': op, 'frob': fro, 'trace': tr, 'rank': rank, 'checks': checks, 'holds': all(checks.values())}
