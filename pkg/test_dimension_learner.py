#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：支撑学习、倍增自举与 k 维 / junta 学习器
"""

import os
import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.blockdiag_learner import BlockDiagUnitary, LearnParams
from src.core.dimension_learner import (
    _amplified_base, bootstrap, bootstrap_powers, learn_kdim, learn_junta, learn_support_forward,
    learn_support_inverse, principal_root, run_learner, support_samples
)
from src.core.metrics import dist_phaseop
from src.core.pauli_algebra import captured_mass, support_span
from src.core.quantum_sim import QueryOracle
from src.data.instance_generator import gen_instance
from src.utils.exceptions import BootstrapError, OracleAccessError, ValidationError

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _params(**overrides):
    values = dict(eps=0.1, delta=0.1, c_tomo=4.0, tomo_backend='model', eps_cap=8.0, c_out=8.0,
                  bootstrap_rep_const=1.0, base_accuracy=0.125, max_workers=1)
    values.update(overrides)
    return LearnParams(**values)


def test_support_sample_count():
    # ⌈2·(2 + ln 10)/0.5⌉
    assert support_samples(2, 0.5, 0.1) == 18


def test_forward_support_inside_true_support():
    oracle = QueryOracle(CNOT)
    estimate = learn_support_forward(oracle, 2, 0.05, 0.1, np.random.default_rng(1))
    assert estimate.subspace.is_subspace_of(support_span(CNOT))
    assert estimate.queries_charged == support_samples(2, 0.05, 0.1)
    assert oracle.queries()['forward'] == estimate.queries_charged
    assert estimate.mode == 'forward_only'


def test_inverse_support():
    oracle = QueryOracle(CNOT)
    estimate = learn_support_inverse(oracle, 2, 0.1, 0.01, np.random.default_rng(2), amp_const=3.0)
    assert estimate.subspace.is_subspace_of(support_span(CNOT))
    assert estimate.samples <= 2
    assert oracle.queries()['inverse'] > 0
    with pytest.raises(OracleAccessError):
        learn_support_inverse(QueryOracle(CNOT, allow_inverse=False), 2, 0.1, 0.01, np.random.default_rng(2))


def test_principal_root():
    R = np.diag(np.exp(1j * np.array([0.1, -0.2])))
    R4 = np.linalg.matrix_power(R, 4)
    root = principal_root(R4, 4)
    assert dist_phaseop(root, R) <= 1e-10
    assert dist_phaseop(np.linalg.matrix_power(root, 4), R4) <= 1e-10
    with pytest.raises(BootstrapError):
        principal_root(np.diag([1.0, -1.0]).astype(complex), 2)


def test_learn_kdim_forward():
    U = np.kron(np.eye(2), unitary_group.rvs(2, random_state=3))
    oracle = QueryOracle(U, allow_inverse=False)
    estimate, report = learn_kdim(oracle, 2, _params(), np.random.default_rng(3), inverse=False)
    assert report.learner == 'kdim-fwd'
    assert report.details['rounds'] == 1
    assert report.details['powers'] == [1, 2]
    assert dist_phaseop(estimate.to_matrix(), U) <= 0.3
    assert estimate.support.is_subspace_of(support_span(U))
    assert oracle.queries()['inverse'] == 0


def test_learn_kdim_base_dispatch():
    oracle = QueryOracle(CNOT, allow_inverse=False)
    estimate, report = run_learner('kdim-base', oracle, _params(), np.random.default_rng(4), 2)
    assert report.learner == 'kdim-base'
    assert report.details['support_mode'] == 'forward_only'
    assert dist_phaseop(estimate.to_matrix(), CNOT) <= 0.75


def test_learn_junta():
    U = np.kron(np.eye(2), np.kron(H, np.eye(2)))
    oracle = QueryOracle(U, allow_inverse=False)
    estimate, report = learn_junta(oracle, 1, _params(), np.random.default_rng(5))
    assert report.details['junta_qubits'] == [2]
    assert (report.a, report.b) == (1, 0)
    assert dist_phaseop(estimate.to_matrix(), U) <= 0.3


def _exact_base(charge=100, error=None):
    """
    完美的基础学习器：直接读出目标的块，按固定次数计正向查询；error 给定时每块右乘该误差
    """
    def learner(target, a, b, eta, delta, rng):
        target.charge('forward', charge)
        block = BlockDiagUnitary.from_matrix(target.matrix, a, b, rounding=True)
        if error is not None:
            block = BlockDiagUnitary(block.n, a, b, [A @ error for A in block.blocks])
        return block
    return learner


def test_bootstrap_powers():
    assert bootstrap_powers(0.125, 0.2) == [1]
    assert bootstrap_powers(0.125, 0.1) == [1, 2]
    assert bootstrap_powers(0.125, 0.05) == [1, 2, 3]
    assert bootstrap_powers(0.125, 0.025) == [1, 2, 4, 5]
    powers = bootstrap_powers(0.125, 0.001)
    assert powers[-1] == 125
    assert all(q <= 2 * p for p, q in zip(powers, powers[1:]))


def test_bootstrap_exact_recovery():
    U = np.kron(np.eye(2), unitary_group.rvs(2, random_state=11))
    oracle = QueryOracle(U)
    estimate, report = bootstrap(oracle, _exact_base(), support_span(U), 0.025, 0.1,
                                 np.random.default_rng(11), _params())
    assert dist_phaseop(estimate.to_matrix(), U) <= 1e-9
    assert report.details['powers'] == [1, 2, 4, 5]
    # R = ⌈ln 10⌉ = 3，每次基础学习 100 次，幂次和 12
    assert report.details['repetitions'] == 3
    assert oracle.queries()['forward'] == 100 * 3 * 12
    assert oracle.queries()['inverse'] == 0


def test_bootstrap_root_shrinks_error():
    U = np.kron(np.eye(2), unitary_group.rvs(2, random_state=12))
    theta = 0.05
    E = np.diag(np.exp(1j * np.array([theta, -theta])))
    oracle = QueryOracle(U)
    base_only, _ = bootstrap(QueryOracle(U), _exact_base(error=E), support_span(U), 0.2, 0.1,
                             np.random.default_rng(12), _params())
    estimate, _ = bootstrap(oracle, _exact_base(error=E), support_span(U), 0.025, 0.1,
                                 np.random.default_rng(12), _params())
    before = dist_phaseop(base_only.to_matrix(), U)
    after = dist_phaseop(estimate.to_matrix(), U)
    assert before >= theta / 2
    assert after <= before / 2


def test_bootstrap_query_slope():
    U = np.kron(np.eye(2), unitary_group.rvs(2, random_state=13))
    eps_grid = [0.2, 0.1, 0.05, 0.025]
    totals = []
    for eps in eps_grid:
        oracle = QueryOracle(U)
        _, report = bootstrap(oracle, _exact_base(), support_span(U), eps, 0.1, np.random.default_rng(13), _params())
        assert report.details['repetitions'] == 3
        totals.append(oracle.total_queries())
    slope = np.polyfit(np.log(1.0 / np.array(eps_grid)), np.log(totals), 1)[0]
    assert abs(slope - 1.0) <= 0.3


def test_amplified_base_rejects_outlier():
    U = np.kron(np.eye(2), unitary_group.rvs(2, random_state=14))
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    calls = []

    def learner(target, a, b, eta, delta, rng):
        calls.append(1)
        block = BlockDiagUnitary.from_matrix(target.matrix, a, b, rounding=True)
        if len(calls) == 1:
            return BlockDiagUnitary(block.n, a, b, [A @ X for A in block.blocks])
        return block

    framed = QueryOracle(U)
    chosen = _amplified_base(learner, framed, 1, 0, 0.125, 5, np.random.default_rng(14))
    assert len(calls) == 5
    assert dist_phaseop(chosen.to_matrix(), U) <= 1e-9


def test_amplified_base_scattered():
    def learner(target, a, b, eta, delta, rng):
        return BlockDiagUnitary(target.n, a, b, [unitary_group.rvs(1 << a, random_state=rng)])

    with pytest.raises(BootstrapError):
        _amplified_base(learner, QueryOracle(CNOT), 2, 0, 0.125, 5, np.random.default_rng(15))


def test_forward_support_captures_mass():
    rng = np.random.default_rng(21)
    captured = 0
    for _ in range(200):
        a = int(rng.integers(0, 3))
        instance = gen_instance('kdim', {'n': 4, 'a': a, 'b': 4 - 2 * a}, rng)
        support = learn_support_forward(QueryOracle(instance.unitary), 4, 0.1, 0.1, rng)
        assert support.subspace.is_subspace_of(support_span(instance.matrix))
        captured += captured_mass(instance.matrix, support.subspace) >= 0.9
    assert captured >= 174


def test_junta_recovery_rate():
    rng = np.random.default_rng(22)
    recovered = 0
    for _ in range(20):
        instance = gen_instance('junta', {'n': 8, 'k': 2}, rng)
        oracle = QueryOracle(instance.unitary, allow_inverse=False)
        estimate, report = learn_junta(oracle, 2, _params(eps=0.1), rng)
        assert oracle.queries()['inverse'] == 0
        if (report.details['junta_qubits'] == instance.witness['junta_qubits']
                and dist_phaseop(estimate.to_matrix(), instance.matrix) <= 0.8):
            recovered += 1
    assert recovered >= 18


def test_unknown_learner():
    with pytest.raises(ValidationError):
        run_learner('kdim-magic', QueryOracle(CNOT), _params(), np.random.default_rng(0), 2)


if __name__ == "__main__":
    tests = [
        test_support_sample_count,
        test_forward_support_inside_true_support,
        test_inverse_support,
        test_principal_root,
        test_learn_kdim_forward,
        test_learn_kdim_base_dispatch,
        test_learn_junta,
        test_bootstrap_powers,
        test_bootstrap_exact_recovery,
        test_bootstrap_root_shrinks_error,
        test_bootstrap_query_slope,
        test_amplified_base_rejects_outlier,
        test_amplified_base_scattered,
        test_forward_support_captures_mass,
        test_junta_recovery_rate,
        test_unknown_learner,
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
