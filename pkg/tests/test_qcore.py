import numpy as np
import pytest
from hypothesis import given, strategies as st

from samplizer_lab import qcore as q
from samplizer_lab.ensembles import haar_unitary, random_channel, random_density_matrix


def test_tensor_identity_and_basis():
    assert np.allclose(q.tensor(np.eye(2), np.eye(2)), np.eye(4))
    m = q.tensor(q.projector(0, 2), q.projector(1, 2))
    assert m[1, 1] == 1 and np.sum(np.abs(m)) == 1


@given(st.integers(0, 2 ** 32 - 1))
def test_tensor_trace_multiplicative(seed):
    r = np.random.default_rng(seed)
    a = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
    b = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
    assert np.isclose(np.trace(q.tensor(a, b)), np.trace(a) * np.trace(b))


def test_tensor_dimension_cap(monkeypatch):
    monkeypatch.setenv("SAMPLIZER_LAB_MAX_DIM", "8")
    with pytest.raises(q.DimensionError):
        q.tensor(np.eye(4), np.eye(4))


def test_partial_trace_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(bell, bell)
    assert np.allclose(q.partial_trace(rho, [0], [2, 2]), np.eye(2) / 2)
    assert np.allclose(q.partial_trace(rho, [1], [2, 2]), np.eye(2) / 2)


@given(st.integers(0, 2 ** 32 - 1))
def test_partial_trace_retracts_tensor(seed):
    r = np.random.default_rng(seed)
    a = random_density_matrix(2, 2, r)
    b = random_density_matrix(3, 2, r)
    joint = q.DensityMatrix(q.tensor(a, b))
    assert np.max(np.abs(q.partial_trace(joint, [0], [2, 3]) - a.data)) < 1e-12
    assert np.max(np.abs(q.partial_trace(joint, [1], [2, 3]) - b.data)) < 1e-12
    assert np.isclose(np.trace(q.partial_trace(joint, [0], [2, 3])), 1)
    assert np.allclose(q.partial_trace(joint, [0, 1], [2, 3]), joint.data)


def test_partial_trace_bad_dims():
    with pytest.raises(q.DimensionError):
        q.partial_trace(np.eye(4) / 4, [0], [2, 3])


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        q.DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        q.DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        q.DensityMatrix(np.diag([0.5, 0.5]), rank_hint=1)
    with pytest.raises(ValueError):
        q.UnitaryMatrix(np.diag([1.0, 0.5]))
    with pytest.raises(ValueError):
        q.PureState(np.array([1.0, 1.0]))


def test_state_distances():
    z0 = q.DensityMatrix.from_pure([1, 0])
    z1 = q.DensityMatrix.from_pure([0, 1])
    assert q.trace_norm_distance_states(z0, z0) == 0
    assert np.isclose(q.trace_norm_distance_states(z0, z1), 2)
    rho = q.DensityMatrix(np.diag([0.9, 0.1]))
    assert np.isclose(q.trace_norm_distance_states(rho, z0), 0.2)


def test_channel_trace_distance_identity_vs_depolarizing():
    est = q.channel_trace_distance(q.identity_channel(2), q.depolarizing_channel(2, 1.0))
    assert abs(est.value - 1) < 1e-9
    assert q.channel_trace_distance(q.identity_channel(2), q.identity_channel(2)).value < 1e-12


def test_channel_trace_distance_unitaries_against_sampling(rng):
    u, v = haar_unitary(2, rng), haar_unitary(2, rng)
    est = q.channel_trace_distance(q.unitary_channel(u), q.unitary_channel(v))
    best = 0.0
    for _ in range(4000):
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi /= np.linalg.norm(psi)
        a, b = u @ psi, v @ psi
        best = max(best, q.trace_norm(np.outer(a, a.conj()) - np.outer(b, b.conj())))
    assert best <= est.value + 1e-9
    assert est.value - best < 1e-2


def test_diamond_phase_flip():
    br = q.diamond_distance(q.identity_channel(2), q.pauli_channel(pz=0.5))
    assert br.lower <= 1 + 1e-6 and br.upper >= 1 - 1e-6
    assert br.width <= 1e-6
    # Pauli channels: diamond distance to identity is 2 * (1 - p_I), read off the Choi matrix
    choi = q.pauli_channel(pz=0.5).choi
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    p_identity = np.real(bell @ choi @ bell) / 2
    assert np.isclose(2 * (1 - p_identity), 1.0)


def test_diamond_equal_channels():
    ch = q.depolarizing_channel(2, 0.3)
    br = q.diamond_distance(ch, ch)
    assert br.upper < 1e-6 and br.lower <= br.upper


def test_unitary_closed_form_matches_sdp(rng):
    for _ in range(3):
        u, v = haar_unitary(2, rng), haar_unitary(2, rng)
        exact = q.unitary_diamond_distance(u, v)
        sdp = q._diamond_sdp(q.unitary_channel(u), q.unitary_channel(v))
        assert sdp.lower - 1e-6 <= exact <= sdp.upper + 1e-6


def test_diamond_coarse_fallback(rng):
    e = random_channel(4, rng)
    f = random_channel(4, rng)
    br = q.diamond_distance(e, f, max_in_dim=2)
    assert br.coarse and br.lower <= br.upper


def test_dilation_examples():
    u = q.dilate_to_unitary(np.zeros((2, 2)))
    assert np.allclose(q.corner(u.data, 1), 0)
    u = q.dilate_to_unitary(np.eye(2))
    assert np.allclose(q.corner(u.data, 1), np.eye(2))
    a = np.diag([0.5, -0.3])
    assert np.max(np.abs(q.corner(q.dilate_to_unitary(a).data, 1) - a)) < 1e-12
    with pytest.raises(ValueError):
        q.dilate_to_unitary(np.eye(2) * 1.01)


@given(st.integers(0, 2 ** 32 - 1))
def test_dilation_random_contraction(seed):
    r = np.random.default_rng(seed)
    a = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
    a /= q.operator_norm(a) * (1 + r.random())
    u = q.dilate_to_unitary(a)
    assert np.max(np.abs(q.corner(u.data, 1) - a)) < 1e-12


def test_entropy_oracles():
    assert np.isclose(q.von_neumann_entropy(q.DensityMatrix(np.eye(2) / 2)), np.log(2))
    assert q.von_neumann_entropy(q.DensityMatrix.from_pure([1, 0])) == 0
    mm = q.DensityMatrix.maximally_mixed(4)
    assert np.isclose(q.renyi_moment(mm, 2), 0.25)
    assert np.isclose(q.renyi_entropy(mm, 2), np.log(4))


def test_matrix_function_clips_drift():
    h = np.diag([1.0, -1e-12])
    out = q.matrix_function(h, np.sqrt, psd=True)
    assert np.allclose(out, np.diag([1.0, 0.0]))


def test_block_encoding_invariant():
    a = np.diag([0.4, -0.2])
    u = q.dilate_to_unitary(a)
    be = q.BlockEncoding(u, 1, 1, 1.0, 0.0, a)
    assert be.deviation() < 1e-12
    with pytest.raises(ValueError):
        q.BlockEncoding(u, 1, 1, 1.0, 0.01, a + 0.1)


def test_channel_representations_agree(rng):
    ch = random_channel(2, rng, 3)
    rho = random_density_matrix(2, 2, rng).data
    vec = ch.superoperator @ rho.reshape(-1)
    assert np.allclose(vec.reshape(2, 2), ch(rho))
    back = q.channel_from_superoperator(ch.superoperator, 2, 2)
    assert np.allclose(back(rho), ch(rho))
    assert ch.check_choi() > -1e-9


def test_sandwich_small(rng):
    for _ in range(3):
        e, f = random_channel(2, rng), random_channel(2, rng)
        td = q.channel_trace_distance(e, f).value
        br = q.diamond_distance(e, f)
        assert br.upper / 2 - 1e-6 <= td <= br.upper + 1e-6
        assert td <= br.lower + br.width + 1e-6
