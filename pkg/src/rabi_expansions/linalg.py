"""Dense complex linear algebra and quadrature shared by the physics modules.

Matrices are plain ``numpy`` arrays; every routine accepts a single matrix of
shape ``(d, d)`` or a stack of shape ``(..., d, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ANTIHERMITIAN_TOL = 1e-10


class ContractViolation(ValueError):
    """An input broke a documented precondition."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``n_points`` samples on ``[t0, t1]``."""

    t0: float
    t1: float
    n_points: int

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ContractViolation(f"TimeGrid needs t1 > t0, got [{self.t0}, {self.t1}]")
        if self.n_points < 2:
            raise ContractViolation(f"TimeGrid needs n_points >= 2, got {self.n_points}")

    @classmethod
    def with_max_step(cls, t0: float, t1: float, max_step: float, multiple_of: int = 1) -> "TimeGrid":
        """Smallest grid whose spacing does not exceed ``max_step``.

        The number of intervals is rounded up to a multiple of ``multiple_of`` so
        that a coarser sampling grid nests inside it.
        """
        n = int(np.ceil((t1 - t0) / max_step - 1e-9))
        n = max(multiple_of, int(np.ceil(n / multiple_of)) * multiple_of)
        return cls(t0, t1, n + 1)

    @property
    def spacing(self) -> float:
        return (self.t1 - self.t0) / (self.n_points - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n_points)


@dataclass
class StateVector:
    """Amplitudes over a labelled basis.

    ``amplitudes`` may carry leading batch axes (e.g. one row per time sample);
    the last axis always runs over ``basis``.  Truncated Picard sums are not
    unit vectors and carry ``normalized=False``.
    """

    basis: tuple
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        self.basis = tuple(self.basis)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape[-1:] != (len(self.basis),):
            raise ContractViolation(
                f"amplitude length {self.amplitudes.shape[-1:]} does not match basis of size {len(self.basis)}"
            )

    def __getitem__(self, label) -> complex:
        return self.amplitudes[..., self.basis.index(label)]

    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=-1)

    @classmethod
    def basis_state(cls, basis: Sequence, label) -> "StateVector":
        basis = tuple(basis)
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.index(label)] = 1.0
        return cls(basis, amps)


@dataclass
class Trajectory:
    """States sampled at ``times``; ``states`` has shape ``(n_times, dim)``."""

    times: np.ndarray
    states: np.ndarray
    basis: tuple
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states)
        self.basis = tuple(self.basis)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> StateVector:
        return StateVector(self.basis, self.states[i])

    def as_state(self) -> StateVector:
        return StateVector(self.basis, self.states)

    def amplitude(self, label) -> np.ndarray:
        return self.states[:, self.basis.index(label)]

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.states, axis=1) - 1.0)))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def expm_antihermitian(m: np.ndarray, tol: float = ANTIHERMITIAN_TOL) -> np.ndarray:
    """Exponential of an anti-Hermitian matrix (or stack) via ``eigh`` of ``i*m``.

    The result is unitary to round-off, which a Pade approximant does not
    guarantee.
    """
    m = np.asarray(m, dtype=complex)
    defect = np.max(np.abs(m + dagger(m))) if m.size else 0.0
    if defect > tol:
        raise ContractViolation(f"matrix is not anti-Hermitian: max|m + m^dagger| = {defect:.3e} > {tol:.1e}")
    herm = 1j * m
    herm = 0.5 * (herm + dagger(herm))
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def spectral_norm(m: np.ndarray) -> np.ndarray:
    """Largest singular value, i.e. sqrt of the top eigenvalue of ``m^dagger m``."""
    return np.linalg.norm(np.asarray(m), ord=2, axis=(-2, -1))


def cumulative_integral(samples: np.ndarray, spacing: float) -> np.ndarray:
    """Running composite-Simpson integral along axis 0, starting from zero.

    Even-indexed outputs are the plain composite Simpson sums.  Odd-indexed
    outputs add the integral of the quadratic through the next three samples
    over a single interval, which keeps every point fourth-order accurate.
    Works on complex and matrix-valued samples (``scipy``'s version drops
    imaginary parts).
    """
    y = np.asarray(samples)
    n = y.shape[0]
    if n < 3:
        raise ContractViolation(f"cumulative Simpson needs at least 3 samples, got {n}")
    h = float(spacing)
    out = np.zeros(y.shape, dtype=np.result_type(y.dtype, float))
    y0, y1, y2 = y[0:-2:2], y[1:-1:2], y[2::2]
    out[2::2] = np.cumsum(h / 3.0 * (y0 + 4.0 * y1 + y2), axis=0)
    out[1:-1:2] = out[0:-2:2] + h / 12.0 * (5.0 * y0 + 8.0 * y1 - y2)
    if n % 2 == 0:
        out[-1] = out[-2] + h / 12.0 * (-y[-3] + 8.0 * y[-2] + 5.0 * y[-1])
    return out
