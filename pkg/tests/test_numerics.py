import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from hameng.numerics import (
    MAX_SPINS,
    commutator,
    embed,
    expm_hermitian,
    global_operator,
    is_hermitian,
    operator_norm,
    pauli,
    phase_distance,
)

from conftest import random_hermitian


def test_pauli_matrices():
    assert np.array_equal(pauli("x"), [[0, 1], [1, 0]])
    assert np.array_equal(pauli("z"), [[1, 0], [0, -1]])
    assert np.allclose(pauli("y") @ pauli("y"), np.eye(2))
    assert np.array_equal(pauli(0), pauli("x"))


def test_pauli_bad_axis():
    with pytest.raises(ValueError):
        pauli("w")


def test_embed_examples():
    sz = pauli("z")
    assert np.allclose(embed(sz, 0, 1), sz)
    op = embed(sz, 0, 2)
    assert np.allclose(op, np.kron(sz, np.eye(2)))
    assert abs(np.trace(op)) < 1e-15
    assert np.allclose(commutator(embed(pauli("x"), 1, 3), embed(sz, 0, 3)), 0)


def test_embed_bounds():
    with pytest.raises(ValueError):
        embed(pauli("x"), 2, 2)
    with pytest.raises(ValueError):
        embed(pauli("x"), 0, MAX_SPINS + 1)
    # configurable maximum
    assert embed(pauli("x"), 0, 3, max_spins=3).shape == (8, 8)
    with pytest.raises(ValueError):
        embed(pauli("x"), 0, 3, max_spins=2)


def test_global_operator_is_kron_power():
    u = scipy.linalg.expm(-0.3j * pauli("y"))
    g = global_operator(u, 3)
    assert np.allclose(g, np.kron(np.kron(u, u), u))


def test_expm_zero_and_diagonal():
    assert np.allclose(expm_hermitian(np.zeros((4, 4)), 2.7), np.eye(4))
    u = expm_hermitian(pauli("z"), np.pi / 4)
    assert np.allclose(u, np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]))


def test_expm_random_against_scipy(rng):
    h = random_hermitian(rng, 8)
    u = expm_hermitian(h, 0.3)
    assert np.max(np.abs(u.conj().T @ u - np.eye(8))) < 1e-11
    assert np.max(np.abs(u @ h @ u.conj().T - h)) < 1e-11
    assert np.allclose(u, scipy.linalg.expm(-0.3j * h), atol=1e-11)


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


@given(st.integers(0, 10_000), st.floats(-5, 5))
def test_expm_group_property(seed, t):
    h = random_hermitian(np.random.default_rng(seed), 4)
    assert np.allclose(expm_hermitian(h, t) @ expm_hermitian(h, -t), np.eye(4), atol=1e-10)


def test_is_hermitian_and_norm():
    assert is_hermitian(pauli("y"))
    assert not is_hermitian(np.ones((2, 3)))
    assert operator_norm(3 * pauli("x")) == pytest.approx(3.0)


def test_phase_distance_ignores_global_phase():
    u = scipy.linalg.expm(-0.7j * pauli("x"))
    assert phase_distance(u, np.exp(0.4j) * u) < 1e-14
    assert phase_distance(u, pauli("z")) > 0.1
