import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from embedlab.errors import InvalidInput
from embedlab.linalg import (
    KrausChannel,
    Lindbladian,
    channel_to_stochastic,
    dephasing_channel,
    density_matrix,
    diag_state,
    expm,
    generator_matrix,
    lindblad_propagator,
    prob_vector,
    propagate_classical,
    propagate_lindblad,
    stochastic_matrix,
    superop_to_stochastic,
    unvec,
    vec,
)


def test_prob_vector_clamps_roundoff_and_rejects_garbage():
    assert prob_vector([1 + 1e-13, -1e-13]).min() == 0.0
    for bad in ([0.5, 0.6], [1.2, -0.2], [[0.5, 0.5]], [np.nan, 1.0], []):
        with pytest.raises(InvalidInput):
            prob_vector(bad)


def test_stochastic_matrix_validation():
    stochastic_matrix(np.eye(3))
    with pytest.raises(InvalidInput):
        stochastic_matrix([[0.5, 0.5], [0.4, 0.5]])
    with pytest.raises(InvalidInput):
        stochastic_matrix(np.ones((2, 3)) / 2)
    with pytest.raises(InvalidInput):
        stochastic_matrix([[1.1, 0], [-0.1, 1]])


def test_generator_validation():
    generator_matrix([[-1, 2], [1, -2]])
    with pytest.raises(InvalidInput):
        generator_matrix([[-1, -1], [1, 1]])
    with pytest.raises(InvalidInput):
        generator_matrix([[-1, 0], [2, 0]])


def test_vec_convention():
    # vec(A X B) = (B^T kron A) vec(X)
    rng = np.random.default_rng(0)
    A, X, B = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(vec(A @ X @ B), np.kron(B.T, A) @ vec(X))
    assert np.array_equal(unvec(vec(X), 3), X)


def test_lindbladian_superoperator_matches_action(rng):
    d = 3
    H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = H + H.conj().T
    ops = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(2)]
    L = Lindbladian(H, tuple(ops))
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    assert np.allclose(L.superoperator() @ vec(X), vec(L(X)))
    # trace annihilating: 1^T S = 0 on the identity's vec
    assert np.allclose(vec(np.eye(d)).conj() @ L.superoperator(), 0, atol=1e-12)


def test_lindbladian_rejects_non_hermitian_hamiltonian():
    with pytest.raises(InvalidInput):
        Lindbladian(np.array([[0, 1], [0, 0]]))


def test_classical_lift_reproduces_classical_exponential(rng):
    L = rng.random((3, 3))
    np.fill_diagonal(L, 0)
    L -= np.diag(L.sum(axis=0))
    S = expm(Lindbladian.from_generator(L).superoperator(), 0.7)
    assert np.allclose(superop_to_stochastic(S, 3), scipy.linalg.expm(0.7 * L), atol=1e-12)


def test_dephasing_channel_kills_coherence():
    ch = dephasing_channel(3)
    rho = np.full((3, 3), 1 / 3)
    assert np.allclose(ch(rho), np.eye(3) / 3)
    assert ch.is_trace_preserving()
    with pytest.raises(InvalidInput):
        dephasing_channel(1)


def test_channel_to_stochastic_of_unitary(rng):
    U = scipy.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    P = channel_to_stochastic(KrausChannel([U]))
    assert np.allclose(P, np.abs(U) ** 2)


def test_kraus_compose_order():
    X = np.array([[0, 1], [1, 0]])
    P0 = np.diag([1.0, 0.0])
    a, b = KrausChannel([X]), KrausChannel([P0, np.diag([0, 1.0])])
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(a.compose(b)(rho), a(b(rho)))


@given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4))
def test_propagate_classical_stays_stochastic(durations):
    L = np.array([[-1.0, 2.0, 0.0], [1.0, -3.0, 1.0], [0.0, 1.0, -1.0]])
    P = propagate_classical([(L, t) for t in durations])
    assert np.allclose(P, scipy.linalg.expm(L * sum(durations)), atol=1e-10)


def test_propagate_classical_order_first_segment_first():
    A = np.array([[-1.0, 0.0], [1.0, 0.0]])
    B = np.array([[0.0, 2.0], [0.0, -2.0]])
    P = propagate_classical([(A, 1.0), (B, 0.5)])
    assert np.allclose(P, scipy.linalg.expm(0.5 * B) @ scipy.linalg.expm(A))


def test_infinite_duration_is_truncated():
    L = np.array([[0.0, 1.0], [0.0, -1.0]])
    P = propagate_classical([(L, math.inf)], t_trunc=40)
    assert abs(P[1, 1] - math.exp(-40)) < 1e-20
    with pytest.raises(InvalidInput):
        propagate_classical([(L, -1.0)])
    with pytest.raises(InvalidInput):
        propagate_classical([])


def test_empty_schedule_is_identity():
    assert np.array_equal(propagate_classical([], d=3), np.eye(3))
    rho = diag_state([0.2, 0.8])
    assert np.allclose(propagate_lindblad([], rho), rho)


def test_lindblad_propagation_preserves_trace_and_positivity(rng):
    d = 3
    H = rng.normal(size=(d, d))
    H = H + H.T
    L = Lindbladian(H, (rng.normal(size=(d, d)),))
    rho = propagate_lindblad([(L, 0.8), (L, math.inf)], np.eye(d) / d, t_trunc=5)
    density_matrix(rho)
    S = lindblad_propagator([(L, 1.0)])
    assert S.shape == (9, 9)


def test_expm_rejects_non_finite():
    with pytest.raises(InvalidInput):
        expm(np.array([[np.inf, 0], [0, 0]]))
    with pytest.raises(InvalidInput):
        expm(np.eye(2), math.inf)


def test_density_matrix_checks():
    with pytest.raises(InvalidInput):
        density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidInput):
        density_matrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(InvalidInput):
        density_matrix(np.eye(2))
