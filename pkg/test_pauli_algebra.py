#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：Weyl 算符与 Pauli 展开

覆盖：
1. Weyl 矩阵的相位约定与比特顺序
2. 带符号 Weyl 算符的乘法
3. 张量递推展开与逐项求迹一致、Parseval 等式
4. Pauli 投影等于 Pauli 扭转，支撑与 Pauli 维数
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.f2symplectic import PauliVec, canonical_subspace, random_subspace, span
from src.core.pauli_algebra import (
    PauliOperator, approx_block_distance, captured_mass, ensure_dense, num_qubits, pauli_coefficients,
    pauli_dimension, pauli_expand, pauli_expand_direct, pauli_project, pauli_reconstruct, pauli_twirl,
    support_span, weyl_matrix
)
from src.utils.exceptions import DenseCapError, DimensionError

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _random_matrix(n, rng):
    d = 1 << n
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def _random_unitary(n, rng):
    Q, R = np.linalg.qr(_random_matrix(n, rng))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_weyl_phase_convention():
    assert np.allclose(weyl_matrix(PauliOperator.from_label('Y')), Y)
    assert np.allclose(weyl_matrix(PauliOperator.from_label('XZ')), np.kron(X, Z))
    assert np.allclose(weyl_matrix(PauliOperator.from_label('-iZY')), -1j * np.kron(Z, Y))
    W = weyl_matrix(PauliOperator.from_label('YXZ'))
    assert np.allclose(W, W.conj().T)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(min_value=1, max_value=3))
def test_product_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    p = PauliOperator(PauliVec.from_packed(n, int(rng.integers(0, 1 << (2 * n)))), int(rng.integers(4)))
    q = PauliOperator(PauliVec.from_packed(n, int(rng.integers(0, 1 << (2 * n)))), int(rng.integers(4)))
    assert np.allclose((p * q).matrix(), p.matrix() @ q.matrix())
    assert np.allclose(p.dagger().matrix(), p.matrix().conj().T)
    assert np.allclose((-p).matrix(), -p.matrix())


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(min_value=1, max_value=3))
def test_fast_expansion_matches_direct(seed, n):
    A = _random_matrix(n, np.random.default_rng(seed))
    assert np.allclose(pauli_coefficients(A), pauli_expand_direct(A), atol=1e-12)
    assert np.allclose(pauli_reconstruct(pauli_coefficients(A), n), A, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(min_value=1, max_value=4))
def test_parseval(seed, n):
    A = _random_matrix(n, np.random.default_rng(seed))
    alpha = pauli_coefficients(A)
    assert np.isclose(np.linalg.norm(A) ** 2, (1 << n) * np.sum(np.abs(alpha) ** 2))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(min_value=1, max_value=3))
def test_projection_equals_twirl(seed, n):
    rng = np.random.default_rng(seed)
    U = _random_unitary(n, rng)
    S = random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
    P = pauli_project(U, S)
    assert np.linalg.norm(P - pauli_twirl(U, S)) <= 1e-10
    assert np.linalg.norm(P, 2) <= 1 + 1e-9
    # 投影是幂等的
    assert np.allclose(pauli_project(P, S), P)


def test_twirl_cap():
    U = np.eye(8, dtype=complex)
    with pytest.raises(DenseCapError):
        pauli_twirl(U, canonical_subspace(3, 0, 0), cap=2)


def test_cnot_dimension():
    # CNOT = ½(II + ZI + IX − ZX)
    expansion = pauli_expand(CNOT)
    labels = {v.to_label(): value for v, value in expansion.terms().items()}
    assert set(labels) == {'+II', '+ZI', '+IX', '+ZX'}
    assert np.isclose(labels['+ZX'], -0.5)
    assert pauli_dimension(CNOT) == 2
    assert support_span(CNOT) == span([PauliVec.from_label('ZI')[0], PauliVec.from_label('IX')[0]])


def test_local_gate_support():
    U = np.kron(np.eye(2), H)
    S = support_span(U)
    assert S.qubit_support() == [1]
    assert S.dim == 2
    assert np.isclose(captured_mass(U, S), 1.0)
    assert np.isclose(captured_mass(U, canonical_subspace(2, 0, 0)), 0.0)


def test_block_distance():
    block = np.kron(np.eye(2), np.kron(np.diag([1, 1j]), H))
    # W_{1,1}：第 2 个比特上 {I,Z}，第 3 个比特上完整 Pauli 群
    assert approx_block_distance(block, 1, 1) <= 1e-10
    assert approx_block_distance(np.kron(H, np.eye(4)), 1, 1) > 0.5


def test_dimension_checks():
    with pytest.raises(DimensionError):
        num_qubits(np.eye(3))
    with pytest.raises(DimensionError):
        num_qubits(np.ones((2, 4)))
    with pytest.raises(DenseCapError):
        ensure_dense(5, cap=4)
    ensure_dense(4, cap=4)


def test_expansion_serialization():
    data = pauli_expand(Z).to_dict()
    assert data['n'] == 1
    assert data['terms'] == [{'pauli': '+Z', 're': 1.0, 'im': 0.0}]


if __name__ == "__main__":
    tests = [
        test_weyl_phase_convention,
        test_product_matches_dense,
        test_fast_expansion_matches_direct,
        test_parseval,
        test_projection_equals_twirl,
        test_twirl_cap,
        test_cnot_dimension,
        test_local_gate_support,
        test_block_distance,
        test_dimension_checks,
        test_expansion_serialization,
    ]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"✅ {test.__name__}")
        except Exception as e:
            print(f"❌ {test.__name__}: {e}")
    print(f"\n总体结果: {passed}/{len(tests)} 测试通过")
    sys.exit(0 if passed == len(tests) else 1)
