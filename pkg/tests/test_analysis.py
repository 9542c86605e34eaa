import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabi_expansions.analysis import (
    ObservableSeries,
    dce_peak_extraction,
    detect_peaks,
    doublet_ratio_prediction,
    fft_spectrum,
    mean_photons,
    observable,
    sweep_photon_surface,
    total_excitations,
)
from rabi_expansions.linalg import ContractViolation, StateVector
from rabi_expansions.models import ModelFlags, QuantumParams, QuantumRabi, SemiclassicalParams, SemiclassicalRabi
from rabi_expansions.rk4 import Rk4Config, rk4_propagate

Q = QuantumRabi(QuantumParams(0.1, n_max=4))


def _state(**amps):
    v = np.zeros(Q.dim, dtype=complex)
    for key, a in amps.items():
        v[Q.basis.index((key[0], int(key[1:])))] = a
    return StateVector(Q.basis, v)


def test_photon_counts():
    assert mean_photons(_state(g0=1)) == 0
    assert mean_photons(_state(g0=2**-0.5, e1=2**-0.5)) == pytest.approx(0.5)
    assert total_excitations(_state(g0=1)) == 0
    assert total_excitations(_state(e1=1)) == 2


def test_wrong_basis_rejected():
    with pytest.raises(ContractViolation):
        mean_photons(StateVector(("g", "e"), [1, 0]))


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(0, 1000))
def test_global_phase_invariance(phi, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=Q.dim) + 1j * rng.normal(size=Q.dim)
    v /= np.linalg.norm(v)
    a, b = StateVector(Q.basis, v), StateVector(Q.basis, np.exp(1j * phi) * v)
    assert mean_photons(a) == pytest.approx(mean_photons(b), abs=1e-12)
    assert total_excitations(a) == pytest.approx(total_excitations(b), abs=1e-12)


def test_rwa_conserves_excitations_full_model_does_not():
    q = QuantumRabi(QuantumParams(0.1, n_max=12), ModelFlags(rwa=True))
    tr = rk4_propagate(q, q.state(("e", 0)), Rk4Config(3001, 30.0))
    nt = observable(tr, "total_excitations").values
    assert np.max(np.abs(nt - 1)) < 1e-10
    for lam in (0.05, 0.1):
        qf = QuantumRabi(QuantumParams(lam, n_max=12))
        tr = rk4_propagate(qf, qf.state(("e", 0)), Rk4Config(3001, 30.0))
        assert np.max(np.abs(observable(tr, "total_excitations").values - 1)) > 0


def test_cosine_single_peak():
    om = 0.1
    t = np.linspace(0, 30 * 2 * np.pi / om, 4097)
    spec = fft_spectrum(ObservableSeries(t, np.cos(om * t), "re_cg"), unit=om)
    k = np.argmax(spec.magnitude)
    assert abs(spec.freqs[k] - om) <= spec.bin_width
    assert spec.magnitude[k] == pytest.approx(1.0)
    peaks = detect_peaks(spec)
    assert len(peaks.peaks) == 1


def test_rect_window_reads_amplitude():
    om = 0.1
    t = np.linspace(0, 30 * 2 * np.pi / om, 4097)
    spec = fft_spectrum(ObservableSeries(t, 0.7 * np.cos(om * t), "re_cg"), window="rect", unit=om)
    assert spec.magnitude.max() == pytest.approx(0.7)


@pytest.mark.parametrize("window", ["hann", "rect"])
@pytest.mark.parametrize("pad", [None, "pow2", 5000])
def test_parseval(window, pad):
    rng = np.random.default_rng(3)
    t = np.linspace(0, 10, 1001)
    spec = fft_spectrum(ObservableSeries(t, rng.normal(size=t.size), "re_cg"), window=window, pad=pad)
    assert spec.parseval_defect < 1e-8
    assert np.all(np.diff(spec.freqs) > 0) and spec.freqs[0] == 0


def test_pow2_padding_length():
    t = np.linspace(0, 1, 1001)
    spec = fft_spectrum(ObservableSeries(t, np.sin(t), "re_cg"), pad="pow2")
    assert spec.raw.size == 1024 // 2 + 1


def test_non_uniform_grid_rejected():
    t = np.array([0, 0.1, 0.25, 0.3])
    with pytest.raises(ContractViolation, match="uniform"):
        fft_spectrum(ObservableSeries(t, np.ones(4), "re_cg"))


def test_rwa_spectrum_has_single_line():
    om = 0.1
    m = SemiclassicalRabi(SemiclassicalParams(om), ModelFlags(rwa=True))
    T = 60 * np.pi / om
    tr = rk4_propagate(m, m.state("g"), Rk4Config(60001, T))
    spec = fft_spectrum(observable(tr, "re_cg"), unit=om)
    peaks = detect_peaks(spec, carrier=2.0)
    assert [round(p.freq / om, 6) for p in peaks.peaks] == [1.0]
    assert not any(p.freq > 2 * om for p in peaks.peaks)
    assert not peaks.fit_available


def test_doublet_ratio_prediction():
    assert doublet_ratio_prediction(0.1, 1.0) == pytest.approx(1 / 400)
    assert doublet_ratio_prediction(1.0, 1.0) == pytest.approx(0.25)
    assert doublet_ratio_prediction(0.2, 1.0) == pytest.approx(0.01)


def _photon_series(lam, frac=1.0):
    q = QuantumRabi(QuantumParams(lam))
    ts = np.pi / (2 * lam)
    n = int(round(frac * ts / 0.01))
    tr = rk4_propagate(q, q.state(("g", 0)), Rk4Config(n + 1, n * 0.01))
    return observable(tr, "mean_photons")


def test_dce_extraction_small_coupling():
    s = _photon_series(0.1)
    e = dce_peak_extraction(s, 0.1)
    ts = np.pi / 0.2
    assert e.peak_time / ts == pytest.approx(0.1, rel=0.05)
    assert e.peak_value == pytest.approx(0.01, rel=0.1)
    assert 1.9 <= e.frequency <= 2.1


@pytest.mark.parametrize("lam", [0.05, 0.1, 0.15])
def test_dce_frequency_near_twice_field(lam):
    e = dce_peak_extraction(_photon_series(lam, 0.6), lam)
    assert 1.9 <= e.frequency <= 2.1


def test_dce_no_maximum_flagged():
    t = np.linspace(0, 1, 50)
    e = dce_peak_extraction(ObservableSeries(t, t, "mean_photons"), 0.1)
    assert not e.found and e.notes


def test_photon_surface_limits():
    weak = sweep_photon_surface([1e-3], np.linspace(0, 0.01, 6), n_max=8)
    assert np.max(weak.exact) < 1e-5
    surf = sweep_photon_surface([0.1, 0.3], np.linspace(0, 1, 6), n_max=16)
    assert np.all(surf.exact >= 0)
    assert np.all(surf.exact[:, 0] == 0)
    assert surf.difference.shape == (2, 6)
