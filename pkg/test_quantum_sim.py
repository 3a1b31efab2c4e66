#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：稠密模拟与查询计数预言机
"""

import os
import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.clifford import CliffordOp
from src.core.f2symplectic import PauliVec, Subspace, canonical_subspace, contains, span
from src.core.pauli_algebra import _index_tables, pauli_coefficients, support_span
from src.core.quantum_sim import (
    DenseUnitary, QueryOracle, StateVector, amplification_queries, amplified_support_sample, apply,
    bell_measure_probabilities, bell_sample_choi, choi_state, collect_projected_copies, conjugated_oracle,
    lcu_project_apply, power_oracle, projected_branch, right_hadamard_oracle
)
from src.utils.exceptions import OracleAccessError, PostselectionError, ValidationError

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def test_dense_unitary_validation():
    assert DenseUnitary.from_matrix(H).n == 1
    with pytest.raises(ValidationError):
        DenseUnitary.from_matrix(np.diag([1.0, 0.5]))
    with pytest.raises(ValidationError):
        StateVector(1, np.array([1.0, 1.0], dtype=complex))
    psi = StateVector.from_array([1, 1])
    assert np.isclose(psi.fidelity(StateVector.basis(1, 0)), 0.5)


def test_query_counters():
    oracle = QueryOracle(X)
    out = apply(oracle, 'forward', StateVector.basis(1, 0))
    assert np.isclose(out.fidelity(StateVector.basis(1, 1)), 1.0)
    oracle.apply('inverse', out)
    control = StateVector.basis(2, 2)  # |1⟩|0⟩
    flipped = oracle.apply_controlled('controlled_fwd', control)
    assert np.isclose(flipped.fidelity(StateVector.basis(2, 3)), 1.0)
    idle = oracle.apply_controlled('controlled_inv', StateVector.basis(2, 0))
    assert np.isclose(idle.fidelity(StateVector.basis(2, 0)), 1.0)
    assert oracle.queries() == {'forward': 1, 'inverse': 1, 'controlled_fwd': 1, 'controlled_inv': 1}
    assert oracle.total_queries() == 4


def test_inverse_access_denied():
    oracle = QueryOracle(X, allow_inverse=False)
    with pytest.raises(OracleAccessError):
        oracle.apply('inverse', StateVector.basis(1, 0))
    with pytest.raises(OracleAccessError):
        amplified_support_sample(oracle, Subspace.zero(1), 0.5, 0.1, np.random.default_rng(0))
    assert oracle.queries()['inverse'] == 0


def test_derived_oracles_charge_parent():
    oracle = QueryOracle(CNOT)
    C = CliffordOp.from_text(2, "H 1")
    conj = conjugated_oracle(oracle, C)
    assert np.allclose(conj.matrix, C.to_matrix() @ CNOT @ C.to_matrix().conj().T)
    conj.charge('forward', 2)
    conj.charge('inverse')
    assert oracle.queries()['forward'] == 2
    assert oracle.queries()['inverse'] == 1

    right = right_hadamard_oracle(oracle, 1)
    assert np.allclose(right.matrix, CNOT @ np.kron(np.eye(2), H))

    powered = power_oracle(oracle, np.eye(4, dtype=complex), 3)
    powered.charge('forward')
    assert oracle.queries()['forward'] == 5
    assert np.allclose(powered.matrix, CNOT)  # CNOT³ = CNOT
    with pytest.raises(ValidationError):
        power_oracle(oracle, np.eye(4, dtype=complex), 0)


def _check_bell_samples(choi_cap):
    oracle = QueryOracle(CNOT)
    samples = bell_sample_choi(oracle, 200, np.random.default_rng(1), choi_cap=choi_cap)
    S = support_span(CNOT)
    assert all(contains(S, v) for v in samples)
    # 四个支撑元素的概率均为 1/4
    assert len({v.packed for v in samples}) == 4
    assert oracle.queries()['forward'] == 200


def test_bell_samples_dense_choi():
    _check_bell_samples(10)


def test_bell_samples_from_expansion():
    _check_bell_samples(0)


def test_full_subspace_always_accepts():
    oracle = QueryOracle(CNOT)
    full = Subspace.full(2)
    copies = collect_projected_copies(oracle, full, StateVector.basis(2, 0), 3, 10, np.random.default_rng(2))
    assert len(copies) == 3
    assert oracle.queries()['forward'] == 3
    assert lcu_project_apply(oracle, full, StateVector.basis(2, 1), np.random.default_rng(3)) is not None


def test_zero_projection_fails_postselection():
    oracle = QueryOracle(X)
    with pytest.raises(PostselectionError):
        collect_projected_copies(oracle, Subspace.zero(1), StateVector.basis(1, 0), 2, 7, np.random.default_rng(4))
    assert oracle.queries()['forward'] == 7


def test_exact_lcu_matches_projection():
    oracle = QueryOracle(CNOT)
    S = span([PauliVec.from_label('ZI')[0]], 2)
    psi = StateVector.from_array([1, 1, 1, 1])
    p_model, phi_model = projected_branch(oracle, S, psi)
    p_exact, phi_exact = projected_branch(oracle, S, psi, circuit_exact=True)
    # Π_S(CNOT) = ½(II + ZI) = |0⟩⟨0| ⊗ I
    assert np.isclose(p_model, 0.5)
    assert np.isclose(p_exact, p_model)
    assert np.isclose(abs(np.vdot(phi_model, phi_exact)), 1.0)


def test_amplified_sampling():
    oracle = QueryOracle(CNOT)
    rng = np.random.default_rng(5)
    A = span([PauliVec.from_label('ZI')[0]], 2)
    v = amplified_support_sample(oracle, A, 0.25, 0.01, rng, amp_const=3.0)
    if v is not None:
        assert not contains(A, v)
        assert contains(support_span(CNOT), v)
    Q = amplification_queries(0.25, 0.01, 3.0)
    assert oracle.queries()['forward'] + oracle.queries()['inverse'] == Q
    assert amplified_support_sample(oracle, Subspace.full(2), 0.25, 0.01, rng, amp_const=3.0) is None
    with pytest.raises(ValidationError):
        amplified_support_sample(oracle, canonical_subspace(2, 0, 0), 0.0, 0.01, rng)


def test_choi_state_layout():
    phi_plus = np.eye(4, dtype=complex).reshape(-1) / 2.0
    psi = choi_state(CNOT)
    assert psi.n == 4
    assert np.allclose(psi.amplitudes, np.kron(CNOT, np.eye(4)) @ phi_plus)


def test_bell_measurement_single_qubit():
    Z = np.diag([1.0, -1.0]).astype(complex)
    # 打包下标 x | z<<1：X → 1，Z → 2，H = (X+Z)/√2 → 1 与 2 各一半
    assert np.allclose(bell_measure_probabilities(choi_state(X)), [0, 1, 0, 0])
    assert np.allclose(bell_measure_probabilities(choi_state(Z)), [0, 0, 1, 0])
    assert np.allclose(bell_measure_probabilities(choi_state(H)), [0, 0.5, 0.5, 0])
    with pytest.raises(ValidationError):
        bell_measure_probabilities(StateVector.basis(3, 0))


def test_bell_measurement_matches_pauli_weights():
    U = unitary_group.rvs(8, random_state=6)
    probs = bell_measure_probabilities(choi_state(U))
    packed, _ = _index_tables(3)
    weights = np.abs(pauli_coefficients(U)) ** 2
    assert np.isclose(probs.sum(), 1.0)
    assert np.allclose(probs[packed], weights, atol=1e-12)


def test_projected_copies_are_independent():
    oracle = QueryOracle(CNOT)
    copies = collect_projected_copies(oracle, Subspace.full(2), StateVector.basis(2, 0), 3, 10,
                                      np.random.default_rng(2))
    first, second = copies[0], copies[1]
    assert first is not second
    first.amplitudes[:] = 0.0
    assert np.isclose(copies[1].amplitudes[0], 1.0)
    assert np.isclose(copies[-1].amplitudes[0], 1.0)
    assert len(copies[0:2]) == 2
    with pytest.raises(IndexError):
        copies[3]


if __name__ == "__main__":
    tests = [
        test_dense_unitary_validation,
        test_query_counters,
        test_inverse_access_denied,
        test_derived_oracles_charge_parent,
        test_bell_samples_dense_choi,
        test_bell_samples_from_expansion,
        test_full_subspace_always_accepts,
        test_zero_projection_fails_postselection,
        test_exact_lcu_matches_projection,
        test_amplified_sampling,
        test_choi_state_layout,
        test_bell_measurement_single_qubit,
        test_bell_measurement_matches_pauli_weights,
        test_projected_copies_are_independent,
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
