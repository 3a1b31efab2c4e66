#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：组合学习器与 Clifford 零化度
"""

import os
import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.blockdiag_learner import LearnParams
from src.core.composed_learner import (
    clifford_nullity, exact_factors, heisenberg_pauli_oracle, hermitian_involution, learn_composed, sign_shots,
    swap_layer, target_double
)
from src.core.experiment_runner import LearnBounds
from src.core.metrics import diamond_upper, dist_phaseop
from src.core.pauli_algebra import PauliOperator
from src.core.quantum_sim import QueryOracle
from src.data.instance_generator import gen_instance
from src.utils.exceptions import DenseCapError, OracleAccessError, ValidationError

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _check_exact_factorization(direction):
    U = unitary_group.rvs(4, random_state=1)
    estimate = exact_factors(U, direction)
    assert len(estimate.factors) == 2
    assert np.allclose(estimate.to_matrix(), target_double(U, direction), atol=1e-9)
    data = estimate.to_dict()
    assert data['direction'] == direction
    assert len(data['terms']) == 6


def test_exact_factorization_qc():
    _check_exact_factorization('QC')


def test_exact_factorization_cq():
    _check_exact_factorization('CQ')


def test_swap_layer_is_involution():
    S = swap_layer(2)
    assert np.allclose(S @ S, np.eye(16))
    a, b = np.zeros(4), np.zeros(4)
    a[1], b[2] = 1, 1
    assert np.allclose(S @ np.kron(a, b), np.kron(b, a))


def test_hermitian_involution():
    S = np.kron(np.diag([1, -1]), np.array([[0, 1], [1, 0]])).astype(complex)
    noisy = np.exp(0.7j) * (S + 0.01 * np.ones((4, 4)))
    fixed = hermitian_involution(noisy)
    assert np.allclose(fixed @ fixed, np.eye(4))
    assert np.allclose(fixed, fixed.conj().T)
    assert min(np.linalg.norm(fixed - S), np.linalg.norm(fixed + S)) < 0.1


def test_heisenberg_oracle_rejections():
    with pytest.raises(OracleAccessError):
        heisenberg_pauli_oracle(QueryOracle(CNOT, allow_inverse=False), PauliOperator.from_label('XI'))
    oracle = QueryOracle(CNOT)
    with pytest.raises(ValidationError):
        heisenberg_pauli_oracle(oracle, PauliOperator.from_label('-XI'))
    with pytest.raises(ValidationError):
        heisenberg_pauli_oracle(oracle, PauliOperator.from_label('XX'))
    derived = heisenberg_pauli_oracle(oracle, PauliOperator.from_label('XI'))
    # CNOT (X⊗I) CNOT = X⊗X
    assert np.allclose(derived.matrix, np.kron(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]])))
    derived.charge('forward')
    assert oracle.queries() == {'forward': 1, 'inverse': 1, 'controlled_fwd': 0, 'controlled_inv': 0}


def test_learn_composed_single_qubit():
    params = LearnParams(eps=0.1, delta=0.1, c_tomo=4.0, tomo_backend='model', bootstrap_rep_const=1.0,
                         max_workers=1)
    oracle = QueryOracle(T)
    estimate, report = learn_composed(oracle, 0, 1, params, np.random.default_rng(2))
    assert report.details['k_bound'] == 3
    assert set(report.details['terms']) == {'X1', 'Y1', 'Z1'}
    assert report.details['sign_shots'] == sign_shots(0.1 / 3)
    assert dist_phaseop(estimate.to_matrix(), target_double(T)) <= 0.5
    assert report.queries['inverse'] > 0
    with pytest.raises(OracleAccessError):
        learn_composed(QueryOracle(T, allow_inverse=False), 0, 1, params, np.random.default_rng(2))
    with pytest.raises(ValidationError):
        learn_composed(oracle, 0, 1, params, np.random.default_rng(2), direction='CC')


def _check_doped_learning(direction):
    params = LearnParams(eps=0.3, delta=0.1, c_tomo=4.0, tomo_backend='model', bootstrap_rep_const=1.0,
                         max_workers=1)
    rng = np.random.default_rng(31)
    good = 0
    for _ in range(10):
        instance = gen_instance('shallow_doped', {'n': 3, 'd': 1, 't': 1, 'direction': direction}, rng)
        bounds = LearnBounds.from_witness(instance.witness)
        assert (bounds.d_bound, bounds.t_bound) == (1, 2)
        estimate, report = learn_composed(QueryOracle(instance.unitary), bounds.d_bound, bounds.t_bound, params,
                                          rng, direction)
        assert report.details['k_bound'] == 6
        assert all(term['support_dim'] <= 6 for term in report.details['terms'].values())
        if diamond_upper(target_double(instance.matrix, direction), estimate.to_matrix()) <= 0.3:
            good += 1
    assert good >= 8


def test_doped_learning_qc():
    _check_doped_learning('QC')


def test_doped_learning_cq():
    _check_doped_learning('CQ')


def test_clifford_nullity():
    clifford = CNOT @ np.kron(H, np.eye(2))
    assert clifford_nullity(clifford).t == 0
    witness = clifford_nullity(T)
    assert witness.t == 1
    assert witness.verify(T)
    assert witness.normalized_subspace.dim == 1
    with pytest.raises(DenseCapError):
        clifford_nullity(np.eye(1 << 7, dtype=complex))


if __name__ == "__main__":
    tests = [
        test_exact_factorization_qc,
        test_exact_factorization_cq,
        test_swap_layer_is_involution,
        test_hermitian_involution,
        test_heisenberg_oracle_rejections,
        test_learn_composed_single_qubit,
        test_doped_learning_qc,
        test_doped_learning_cq,
        test_clifford_nullity,
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
