import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rabi_expansions.linalg import (
    ContractViolation,
    StateVector,
    TimeGrid,
    Trajectory,
    commutator,
    cumulative_integral,
    dagger,
    expm_antihermitian,
    spectral_norm,
)


def test_grid_validation():
    with pytest.raises(ContractViolation):
        TimeGrid(1.0, 1.0, 10)
    with pytest.raises(ContractViolation):
        TimeGrid(0.0, 1.0, 1)


def test_grid_with_max_step_nests():
    g = TimeGrid.with_max_step(0.0, 10.0, 0.3, multiple_of=4)
    assert g.spacing <= 0.3
    assert (g.n_points - 1) % 4 == 0
    assert g.times[-1] == pytest.approx(10.0)


def test_state_vector_shape_check():
    with pytest.raises(ContractViolation):
        StateVector(("g", "e"), np.ones(3))
    s = StateVector.basis_state(("g", "e"), "e")
    assert s["e"] == 1 and s["g"] == 0
    assert s.norm() == pytest.approx(1.0)


def test_trajectory_amplitude_and_drift():
    t = np.linspace(0, 1, 5)
    states = np.stack([np.cos(t), -1j * np.sin(t)], axis=1)
    tr = Trajectory(t, states, ("g", "e"))
    np.testing.assert_allclose(tr.amplitude("g"), np.cos(t))
    assert tr.norm_drift() < 1e-15


def test_cumulative_integral_matches_antiderivative():
    t = np.linspace(0, 7, 701)
    f = np.exp(1.3j * t)
    got = cumulative_integral(f, t[1] - t[0])
    want = (np.exp(1.3j * t) - 1) / 1.3j
    assert np.max(np.abs(got - want)) < 1e-9


@pytest.mark.parametrize("n", [3, 4, 5, 10, 11])
def test_cumulative_integral_exactness(n):
    t = np.linspace(0, 2, n)
    h = t[1] - t[0]
    np.testing.assert_allclose(cumulative_integral(t**2 - t, h), t**3 / 3 - t**2 / 2, atol=1e-13)
    # Simpson panels are exact on cubics at even samples
    got = cumulative_integral(t**3 - t, h)
    np.testing.assert_allclose(got[::2], (t**4 / 4 - t**2 / 2)[::2], atol=1e-13)


def test_cumulative_integral_matrix_valued_and_short_input():
    t = np.linspace(0, 1, 11)
    m = t[:, None, None] * np.array([[1, 2j], [3, 4]])
    out = cumulative_integral(m, t[1])
    np.testing.assert_allclose(out[-1], 0.5 * np.array([[1, 2j], [3, 4]]), atol=1e-14)
    with pytest.raises(ContractViolation):
        cumulative_integral(np.ones(2), 0.1)


def test_expm_rejects_non_antihermitian():
    with pytest.raises(ContractViolation, match="anti-Hermitian"):
        expm_antihermitian(np.array([[1.0, 0], [0, 0]]))


def test_expm_pauli_rotation():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    u = expm_antihermitian(-1j * 0.7 * sx)
    np.testing.assert_allclose(u, np.cos(0.7) * np.eye(2) - 1j * np.sin(0.7) * sx, atol=1e-14)


def _antihermitian(draw_real, draw_imag):
    m = draw_real + 1j * draw_imag
    return 0.5 * (m - dagger(m))


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (4, 4), elements=st.floats(-5, 5)),
    arrays(np.float64, (4, 4), elements=st.floats(-5, 5)),
)
def test_expm_is_unitary(re, im):
    u = expm_antihermitian(_antihermitian(re, im))
    assert np.max(np.abs(dagger(u) @ u - np.eye(4))) < 1e-12


def test_spectral_norm_and_commutator():
    a = np.diag([3.0, -1.0]).astype(complex)
    assert spectral_norm(a) == pytest.approx(3.0)
    b = np.array([[0, 1], [0, 0]], dtype=complex)
    np.testing.assert_allclose(commutator(a, b), np.array([[0, 4], [0, 0]]))
