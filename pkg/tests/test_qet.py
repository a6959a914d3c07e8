import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplizer_lab.ensembles import random_density_matrix
from samplizer_lab.polyapprox import (Region, build_log, build_negative_power, constant_polynomial,
                                      linear_polynomial)
from samplizer_lab.qcore import DensityMatrix, dilate_to_unitary, matrix_function, operator_norm
from samplizer_lab.qet import (TransformError, block_encode_hermitian, eigen_transform, hadamard_probability,
                               hadamard_test, hamiltonian_simulation)
from samplizer_lab.qcore import BlockEncoding


def _random_hermitian(n, rng, radius=1.0):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (g + g.conj().T) / 2
    return radius * h / operator_norm(h)


def test_linear_polynomial_corner():
    a = np.diag([0.4, -0.2])
    res = eigen_transform(block_encode_hermitian(a), linear_polynomial(0.5))
    assert np.allclose(res.encoding.corner(), a / 2, atol=1e-10)
    assert res.added_ancillas == 2 and res.encoding.ancilla_qubits == 3
    assert res.query_count == 1


def test_log_polynomial_on_half_identity():
    p = build_log(0.1, 0.01, normalization=4)
    rho = DensityMatrix.maximally_mixed(2)
    res = eigen_transform(block_encode_hermitian(rho.data / 2), p, delta=0.001)
    target = math.log(4) / (4 * math.log(20))
    eig = np.linalg.eigvalsh(res.encoding.corner())
    assert np.all(np.abs(eig - target) <= 0.01 + 0.001)


def test_zero_polynomial():
    zero = constant_polynomial(0.0, (Region((-1.0, 1.0), "abs_le", 0.5),))
    res = eigen_transform(block_encode_hermitian(np.diag([0.3, -0.1])), zero)
    assert np.allclose(res.encoding.corner(), 0, atol=1e-12)


def test_rejects_unscaled_or_uncertified():
    with pytest.raises(TransformError):
        eigen_transform(block_encode_hermitian(np.eye(2) * 0.5), build_log(0.1, 0.01))
    bad = constant_polynomial(0.6, (Region((-1.0, 1.0), "abs_le", 0.5),))
    with pytest.raises(TransformError):
        eigen_transform(block_encode_hermitian(np.eye(2) * 0.5), bad)


def test_rejects_non_hermitian():
    a = np.array([[0, 0.5], [0, 0]], dtype=complex)
    u = BlockEncoding(dilate_to_unitary(a), 1, 1, 1.0, 0.0, a)
    with pytest.raises(TransformError):
        eigen_transform(u, linear_polynomial(0.5))


@pytest.mark.parametrize("a, expected", [(np.eye(2), 1.0), (np.zeros((2, 2)), 0.5),
                                         (np.diag([0.5, -0.5]), 0.5)])
def test_hadamard_examples(a, expected):
    rho = DensityMatrix.maximally_mixed(2)
    assert hadamard_test(block_encode_hermitian(a), rho).p_one == pytest.approx(expected, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 16), part=st.sampled_from(["real", "imag"]))
def test_hadamard_matches_closed_form(seed, part):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([2, 4]))
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = 0.9 * g / operator_norm(g)
    u = BlockEncoding(dilate_to_unitary(a), int(math.log2(n)), 1, 1.0, 0.0, a)
    rho = random_density_matrix(n, int(rng.integers(1, n + 1)), rng)
    res = hadamard_test(u, rho, part)
    assert 0 <= res.p_one <= 1
    assert res.p_one == pytest.approx(hadamard_probability(a, rho, part), abs=1e-10)


def test_hamiltonian_simulation_examples():
    eps = 1e-3
    h = np.diag([0.3, -0.3])
    u = block_encode_hermitian(h)
    assert np.allclose(hamiltonian_simulation(u, 0.0, eps).corner(), np.eye(2), atol=eps)
    fwd = hamiltonian_simulation(u, math.pi, eps)
    assert np.allclose(np.diag(fwd.corner()), np.exp([-0.3j * math.pi, 0.3j * math.pi]), atol=eps)
    back = hamiltonian_simulation(u, -math.pi, eps)
    assert np.allclose(back.corner() @ fwd.corner(), np.eye(2), atol=2 * eps)
    assert fwd.query_count == math.ceil(math.pi + math.log(1 / eps))
    with pytest.raises(TransformError):
        hamiltonian_simulation(u, 51.0, eps)


def test_realized_bound_on_random_pairs():
    rng = np.random.default_rng(7)
    polys = [linear_polynomial(0.5), build_log(0.1, 0.02, normalization=4),
             build_negative_power(0.5, 0.2, 0.02).scaled(0.5)]
    for _ in range(200):
        n = int(rng.choice([2, 4]))
        a = _random_hermitian(n, rng, rng.uniform(0.1, 1.0))
        scale = float(rng.uniform(1.0, 2.0))
        p = polys[int(rng.integers(len(polys)))]
        res = eigen_transform(block_encode_hermitian(a * scale, scale), p)
        err = operator_norm(res.encoding.corner() - matrix_function(a, p))
        assert err <= res.error_bound + 1e-9


def test_error_propagates_from_noisy_input():
    a = np.diag([0.6, 0.2])
    noisy = np.diag([0.6 + 1e-4, 0.2])
    u = BlockEncoding(dilate_to_unitary(noisy), 1, 1, 1.0, 1e-4, a)
    res = eigen_transform(u, linear_polynomial(0.5), delta=0.0)
    assert res.realized_error == pytest.approx(0.5e-4, rel=1e-6)
    assert res.error_bound == pytest.approx(4 * 1 * math.sqrt(1e-4))


def test_query_count_additive():
    p1 = linear_polynomial(0.5)
    p2 = build_log(0.1, 0.05, normalization=4)
    first = eigen_transform(block_encode_hermitian(np.diag([0.5, 0.1])), p1)
    second = eigen_transform(first.encoding, p2)
    assert second.query_count == p1.degree + p2.degree
    assert second.encoding.ancilla_qubits == 1 + 2 + 2
