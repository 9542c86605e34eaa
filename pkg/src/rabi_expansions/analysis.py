"""Observables, spectra, peak tables and photon-number diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks
from scipy.signal.windows import hann

from .linalg import ContractViolation, StateVector, TimeGrid, Trajectory
from .models import ModelFlags, QuantumParams, QuantumRabi
from .picard import dce_prediction, picard_mean_photons, picard_numeric
from .rk4 import Rk4Config, rk4_propagate

OBSERVABLES = ("re_cg", "re_ce", "mean_photons", "total_excitations", "re_c_g0", "mathieu_y")


@dataclass
class ObservableSeries:
    times: np.ndarray
    values: np.ndarray
    tag: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.tag not in OBSERVABLES:
            raise ContractViolation(f"unknown observable {self.tag!r}")
        if self.values.shape != self.times.shape:
            raise ContractViolation(f"{self.values.size} values for {self.times.size} times")

    @property
    def grid(self) -> TimeGrid:
        dt = np.diff(self.times)
        if dt.size == 0 or np.max(np.abs(dt - dt.mean())) > 1e-9 * abs(dt.mean()):
            raise ContractViolation("observable series is not on a uniform time grid")
        return TimeGrid(self.times[0], self.times[-1], self.times.size)


def _fock_labels(psi: StateVector) -> tuple[np.ndarray, np.ndarray]:
    try:
        photons = np.array([n for _, n in psi.basis], dtype=float)
        excited = np.array([l == "e" for l, _ in psi.basis], dtype=float)
    except (TypeError, ValueError):
        raise ContractViolation("expected a qubit-Fock basis of (l, n) labels") from None
    return photons, excited


def mean_photons(psi: StateVector) -> np.ndarray:
    """``sum n |C_{l,n}|^2`` (batched over leading axes)."""
    photons, _ = _fock_labels(psi)
    return np.sum(photons * np.abs(psi.amplitudes) ** 2, axis=-1)


def total_excitations(psi: StateVector) -> np.ndarray:
    """Expectation of ``sigma_+ sigma_- + a^dag a``."""
    photons, excited = _fock_labels(psi)
    return np.sum((photons + excited) * np.abs(psi.amplitudes) ** 2, axis=-1)


def observable(traj: Trajectory, tag: str) -> ObservableSeries:
    """Extract one named observable from a trajectory."""
    if tag == "re_cg":
        vals = traj.amplitude("g").real
    elif tag == "re_ce":
        vals = traj.amplitude("e").real
    elif tag == "re_c_g0":
        vals = traj.amplitude(("g", 0)).real
    elif tag == "mathieu_y":
        vals = traj.amplitude("y").real
    elif tag == "mean_photons":
        vals = mean_photons(traj.as_state())
    elif tag == "total_excitations":
        vals = total_excitations(traj.as_state())
    else:
        raise ContractViolation(f"unknown observable {tag!r}")
    return ObservableSeries(traj.times, vals, tag)


@dataclass
class SpectrumResult:
    """One-sided spectrum.

    ``amplitudes`` are scaled so a sinusoid of amplitude ``A`` landing on a
    bin reads ``A`` (``2 X / sum(window)``).  ``raw`` keeps the plain DFT,
    used for the Parseval check.
    """

    freqs: np.ndarray
    amplitudes: np.ndarray
    raw: np.ndarray
    unit: float = 1.0
    window: str = "hann"
    parseval_defect: float = 0.0

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.amplitudes)

    @property
    def scaled_freqs(self) -> np.ndarray:
        return self.freqs / self.unit

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def _window(name: str, n: int) -> np.ndarray:
    if name == "hann":
        return hann(n, sym=False)
    if name in ("rect", "none"):
        return np.ones(n)
    raise ContractViolation(f"unknown window {name!r}; use 'hann' or 'rect'")


def fft_spectrum(
    series: ObservableSeries,
    window: str = "hann",
    pad=None,
    detrend: str | None = None,
    drop_endpoint: bool = True,
    unit: float = 1.0,
) -> SpectrumResult:
    """Windowed real FFT of a uniformly sampled series.

    With ``drop_endpoint`` the closing sample is omitted so the record spans
    exactly ``T``, which puts harmonics of ``2 pi / T`` on bin centres.
    ``pad`` may be None, ``"pow2"`` or an explicit transform length.
    """
    grid = series.grid
    x = series.values[:-1] if drop_endpoint else series.values
    if detrend == "mean":
        x = x - x.mean()
    elif detrend is not None:
        raise ContractViolation(f"unknown detrend {detrend!r}")
    n = x.size
    if pad is None:
        n_fft = n
    elif pad == "pow2":
        n_fft = 1 << (n - 1).bit_length()
    else:
        n_fft = int(pad)
        if n_fft < n:
            raise ContractViolation(f"padding length {n_fft} shorter than the record ({n})")
    w = _window(window, n)
    xw = x * w
    raw = np.fft.rfft(xw, n_fft)
    scale = np.full(raw.size, 2.0 / w.sum())
    scale[0] = 1.0 / w.sum()
    if n_fft % 2 == 0:
        scale[-1] = 1.0 / w.sum()
    freqs = 2 * np.pi * np.fft.rfftfreq(n_fft, d=grid.spacing)
    # Parseval: sum |x|^2 = (|X_0|^2 + 2 sum |X_k|^2 + |X_nyq|^2) / n_fft
    mult = np.full(raw.size, 2.0)
    mult[0] = 1.0
    if n_fft % 2 == 0:
        mult[-1] = 1.0
    energy = float(np.sum(np.abs(xw) ** 2))
    spectral = float(np.sum(mult * np.abs(raw) ** 2) / n_fft)
    defect = abs(spectral - energy) / energy if energy > 0 else 0.0
    return SpectrumResult(freqs, raw * scale, raw, unit, window, defect)


@dataclass(frozen=True)
class Peak:
    freq: float
    magnitude: float
    doublet_index: int  # 0 for the slow carrier, n for the doublet near n * carrier, -1 otherwise


@dataclass
class PeakSet:
    peaks: list
    unit: float
    fit_a: float | None = None
    fit_b: float | None = None
    notes: list = field(default_factory=list)

    @property
    def fit_available(self) -> bool:
        return self.fit_a is not None

    def doublet(self, n: int) -> list:
        return [p for p in self.peaks if p.doublet_index == n]

    def doublet_maxima(self) -> dict:
        out = {}
        for p in self.peaks:
            if p.doublet_index >= 0 and p.magnitude > out.get(p.doublet_index, (0, 0.0))[1]:
                out[p.doublet_index] = (p.freq, p.magnitude)
        return dict(sorted(out.items()))

    def doublet_ratios(self) -> list:
        """Max magnitude of doublet n+1 over that of doublet n, for n >= 1."""
        m = self.doublet_maxima()
        return [m[n + 1][1] / m[n][1] for n in sorted(m) if n >= 1 and n + 1 in m]


def detect_peaks(
    spec: SpectrumResult,
    rel_threshold: float = 1e-6,
    prominence_bins: int = 3,
    carrier: float | None = None,
    halfwidth: float = 2.5,
) -> PeakSet:
    """Local maxima above ``rel_threshold * max`` that also dominate ``prominence_bins`` on each side.

    With ``carrier`` (2 omega for the qubit, omega for Mathieu) peaks within
    ``halfwidth * unit`` of ``n * carrier`` are tagged as doublet ``n``.  The
    decay ``log10|F| = a - b w/unit`` is fitted to the carrier peak and the
    largest member of each doublet.
    """
    mag = spec.magnitude
    idx, _ = find_peaks(mag)
    floor = rel_threshold * mag.max()
    keep = [
        i for i in idx if mag[i] > floor and mag[i] >= mag[max(i - prominence_bins, 0) : i + prominence_bins + 1].max()
    ]
    unit = spec.unit
    peaks = []
    for i in keep:
        w = float(spec.freqs[i])
        tag = -1
        if carrier is not None:
            n = int(round(w / carrier))
            if n >= 1 and abs(w - n * carrier) <= halfwidth * unit:
                tag = n
            elif w <= halfwidth * unit:
                tag = 0
        peaks.append(Peak(w, float(mag[i]), tag))
    out = PeakSet(peaks, unit)
    if carrier is None:
        return out
    pts = [(f / unit, m) for f, m in out.doublet_maxima().values()]
    if len(pts) < 2:
        out.notes.append("fewer than two peak groups: decay fit unavailable")
        return out
    x, y = np.array(pts).T
    slope, intercept = np.polyfit(x, np.log10(y), 1)
    out.fit_a, out.fit_b = float(intercept), float(-slope)
    return out


def doublet_ratio_prediction(rabi: float, omega: float) -> float:
    """Expected suppression ``[Omega/(2 omega)]^2`` between successive doublets."""
    if not (rabi > 0 and omega > 0):
        raise ContractViolation("frequencies must be positive")
    return (rabi / (2 * omega)) ** 2


@dataclass(frozen=True)
class DceExtraction:
    peak_time: float | None
    peak_value: float | None
    frequency: float | None
    notes: tuple = ()

    @property
    def found(self) -> bool:
        return self.peak_time is not None


def _first_local_max(t: np.ndarray, v: np.ndarray):
    inner = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0]
    if inner.size == 0:
        return None
    i = int(inner[0]) + 1
    # parabola through the three samples around the maximum
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    den = y0 - 2 * y1 + y2
    off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
    h = t[i + 1] - t[i]
    return t[i] + off * h, y1 - 0.25 * (y0 - y2) * off


def dce_peak_extraction(series: ObservableSeries, coupling: float, freq_window: float = 0.5) -> DceExtraction:
    """First maximum of ``<n>(t)`` and its dominant oscillation frequency.

    The frequency comes from the samples with ``t <= freq_window * tau_s``;
    later the vacuum Rabi splitting turns the single line near 2 omega into
    sidebands.  The FFT is mean-subtracted, untapered and padded 64x.
    """
    if series.tag != "mean_photons":
        raise ContractViolation(f"expected a mean_photons series, got {series.tag!r}")
    t, v = series.times, series.values
    notes = []
    hit = _first_local_max(t, v)
    if hit is None:
        notes.append("no local maximum in range")
    tau_s = math.pi / (2 * abs(coupling))
    sel = t <= freq_window * tau_s
    freq = None
    if sel.sum() >= 8:
        x = v[sel] - v[sel].mean()
        n_fft = 64 * x.size
        f = np.abs(np.fft.rfft(x, n_fft))
        w = 2 * np.pi * np.fft.rfftfreq(n_fft, d=t[1] - t[0])
        freq = float(w[np.argmax(f)])
    else:
        notes.append("too few samples for a frequency estimate")
    if hit is None:
        return DceExtraction(None, None, freq, tuple(notes))
    return DceExtraction(float(hit[0]), float(hit[1]), freq, tuple(notes))


@dataclass
class PhotonSurface:
    """``<n>`` on a (coupling, t / tau_s) grid: exact, fourth-order Picard, and difference."""

    couplings: np.ndarray
    t_over_swap: np.ndarray
    exact: np.ndarray
    picard4: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def difference(self) -> np.ndarray:
        return self.picard4 - self.exact


def photon_runs(
    coupling: float, horizon: float, omega: float = 1.0, n_max: int = 32, phase_step: float = 0.01, picard_order: int = 4
):
    """RK4 and Picard ``<n>(t)`` from ``|g,0>`` on a shared grid with ``omega * h <= phase_step``."""
    model = QuantumRabi(QuantumParams(coupling, field_freq=omega, n_max=n_max), ModelFlags())
    grid = TimeGrid.with_max_step(0.0, horizon, phase_step / omega, multiple_of=2)
    psi0 = model.state(("g", 0))
    traj = rk4_propagate(model, psi0, Rk4Config(grid.n_points, horizon))
    exact = mean_photons(traj.as_state())
    pic = picard_numeric(model, psi0, picard_order, grid)
    return grid.times, exact, picard_mean_photons(pic), traj.warnings


def sweep_photon_surface(
    couplings, t_over_swap, omega: float = 1.0, n_max: int = 32, phase_step: float = 0.01
) -> PhotonSurface:
    """Exact and fourth-order Picard ``<n>`` over couplings and times in units of ``tau_s``."""
    couplings = np.asarray(couplings, dtype=float)
    t_over_swap = np.asarray(t_over_swap, dtype=float)
    if np.any(couplings <= 0) or np.any(t_over_swap < 0):
        raise ContractViolation("couplings must be positive and times non-negative")
    exact = np.empty((couplings.size, t_over_swap.size))
    pic = np.empty_like(exact)
    notes = []
    for k, lam in enumerate(couplings):
        tau_s = dce_prediction(lam, omega).swap_time
        horizon = max(float(t_over_swap.max()), 1e-3) * tau_s
        t, ne, npc, warn = photon_runs(lam, horizon, omega, n_max, phase_step)
        exact[k] = np.interp(t_over_swap * tau_s, t, ne)
        pic[k] = np.interp(t_over_swap * tau_s, t, npc)
        notes += [f"coupling {lam:g}: {w}" for w in warn]
    return PhotonSurface(couplings, t_over_swap, exact, pic, notes)
