import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from samplizer_lab.bounds import (_tensor_power_diag, helstrom_bound_check, log_eq_lhs, make_mixedness_instance, mixedness_pair,
                                  perturbed_uniform, renyi_lt1_pair, verify_alpha_ordering, verify_log_eq,
                                  verify_mixedness_entropy, verify_moment_range, verify_p_alpha_beta,
                                  product_half_trace_distance, verify_renyi_lt1_ineq)
from samplizer_lab.ensembles import random_density_matrix, random_distribution
from samplizer_lab.qcore import DensityMatrix, renyi_entropy, trace_norm, von_neumann_entropy


def test_mixedness_instance_examples():
    assert np.allclose(make_mixedness_instance(4, 0.0, 0.5).data, np.eye(4) / 4)
    rho = make_mixedness_instance(4, 0.2, 0.5)
    assert np.allclose(np.sort(rho.spectrum), [0.15, 0.15, 0.35, 0.35])
    assert von_neumann_entropy(rho) <= np.log(4) - 0.04


@given(n=st.integers(2, 12), data=st.data())
def test_mixedness_trace_distance(n, data):
    s = data.draw(st.integers(1, n - 1))
    z = s / n
    eps = data.draw(st.floats(1e-3, 0.999)) * min(1 - z, 1.0)
    if eps / (n - 1) > z:
        return
    rho = make_mixedness_instance(n, eps, z)
    assert 0.5 * trace_norm(rho.data - np.eye(n) / n) == pytest.approx(eps, abs=1e-10)
    assert von_neumann_entropy(rho) <= np.log(n) - eps ** 2 + 1e-12
    assert mixedness_pair(n, eps, z).analytic_gap == eps


def test_mixedness_range_errors():
    with pytest.raises(ValueError):
        make_mixedness_instance(4, 0.2, 0.3)
    with pytest.raises(ValueError):
        make_mixedness_instance(4, 0.9, 0.5)


def test_log_eq_small_eps_and_boundary():
    assert log_eq_lhs(1e-8, 0.3) == pytest.approx(0.0, abs=1e-12)
    z = 0.7
    eps = 1 - z
    assert log_eq_lhs(eps, z) == pytest.approx(np.log(1 / z))
    assert np.log(1 / z) - (1 - z) ** 2 >= 0


def test_log_eq_grid():
    rep = verify_log_eq()
    assert rep.n_checked == 10 ** 4 and rep.min_margin > 0 and rep.passed


def test_renyi_lt1_examples():
    uniform = verify_renyi_lt1_ineq([np.full(5, 0.2)], 0.5)
    assert uniform.min_margin == pytest.approx(0.0, abs=1e-12) and uniform.passed
    point = verify_renyi_lt1_ineq([np.array([1.0, 0, 0, 0])], 0.5)
    assert point.min_margin == pytest.approx((1 - 0.25 * 0.75 ** 2) * 2 - 1)
    rng = np.random.default_rng(0)
    rep = verify_renyi_lt1_ineq([perturbed_uniform(int(rng.integers(2, 10)), rng) for _ in range(500)], 0.3)
    assert rep.passed and rep.n_checked == 500


def test_p_alpha_beta():
    rng = np.random.default_rng(1)
    dists = [random_distribution(int(rng.integers(2, 10)), rng) for _ in range(100)]
    assert verify_p_alpha_beta(dists, [(0.5, 2.0), (1.2, 3.0), (0.1, 0.9)]).passed


def test_alpha_ordering_and_moments():
    rng = np.random.default_rng(2)
    states = [random_density_matrix(n, int(rng.integers(1, n + 1)), rng) for n in (2, 3, 4) for _ in range(10)]
    assert verify_alpha_ordering(states, [0.5, 1.5, 2.0, 4.0]).passed
    assert verify_moment_range(states, [0.3, 0.5, 1.5, 2.0, 4.0]).passed
    mm = DensityMatrix.maximally_mixed(4)
    for a in (0.5, 2.0, 4.0):
        assert renyi_entropy(mm, a) == pytest.approx(np.log(4))
    rep = verify_alpha_ordering([mm, DensityMatrix.from_pure(np.array([1.0, 0]))], [1.5, 2.0])
    assert rep.min_margin == pytest.approx(0.0, abs=1e-10)


def test_mixedness_entropy_sweep():
    rep = verify_mixedness_entropy([(n, e, 0.5) for n in (2, 4, 8) for e in (0.05, 0.2, 0.4)])
    assert rep.passed and rep.extra["max_trace_distance_error"] < 1e-10


def test_renyi_pair_gap_matches_oracle():
    pair, d = renyi_lt1_pair(4, 0.5, 0.3)
    assert d == pytest.approx((0.6 / math.sqrt(3)) ** 2)
    assert pair.analytic_gap == pytest.approx(renyi_entropy(pair.rho0, 0.5) - renyi_entropy(pair.rho1, 0.5),
                                              abs=1e-9)
    assert pair.analytic_gap >= 0.3 / 2


def test_helstrom_identical_and_orthogonal():
    rho = random_density_matrix(2, 2, np.random.default_rng(3))
    same = helstrom_bound_check(rho, rho, 2, trials=2000)
    assert same.optimal_success == pytest.approx(0.5) and same.passed
    a = DensityMatrix.from_pure(np.array([1.0, 0]))
    b = DensityMatrix.from_pure(np.array([0, 1.0]))
    ortho = helstrom_bound_check(a, b, 1, trials=2000)
    assert ortho.helstrom_bound == pytest.approx(1.0) and ortho.empirical_success == 1.0


def test_helstrom_renyi_pair():
    pair, d = renyi_lt1_pair(4, 0.5, 0.3)
    rep = helstrom_bound_check(pair.rho0, pair.rho1, math.ceil(1 / d), seed=4)
    assert rep.passed
    assert rep.half_trace_distance == pytest.approx(1 - (1 - d) ** math.ceil(1 / d))


def test_helstrom_dense_path_matches_analytic():
    rng = np.random.default_rng(5)
    a, b = random_density_matrix(2, 2, rng), random_density_matrix(2, 1, rng)
    rep = helstrom_bound_check(a, b, 2)
    ra, rb = np.kron(a.data, a.data), np.kron(b.data, b.data)
    assert rep.optimal_success == pytest.approx(0.5 * (1 + 0.5 * trace_norm(ra - rb)), abs=1e-10)
    assert rep.passed


@given(seed=st.integers(0, 2 ** 16), n=st.integers(2, 4), copies=st.integers(1, 6), ties=st.booleans())
def test_product_distance_matches_explicit_product(seed, n, copies, ties):
    rng = np.random.default_rng(seed)
    p, q = random_distribution(n, rng), random_distribution(n, rng)
    if ties:
        p, q = np.full(n, 1 / n), np.r_[q[:1], np.full(n - 1, (1 - q[0]) / (n - 1))]
    dense = 0.5 * np.abs(_tensor_power_diag(p, copies) - _tensor_power_diag(q, copies)).sum()
    assert product_half_trace_distance(p, q, copies) == pytest.approx(dense, abs=1e-12)


def test_product_distance_many_copies():
    d = 0.01
    p = np.array([1 - d] + [d / 15] * 15)
    q = np.r_[1.0, np.zeros(15)]
    assert product_half_trace_distance(p, q, 300) == pytest.approx(1 - (1 - d) ** 300, rel=1e-12)
