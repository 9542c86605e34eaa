"""Classic fixed-step fourth-order Runge-Kutta, the reference solution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import ContractViolation, StateVector, Trajectory
from .models import TRUNCATION_TOL, LinearModel, QuantumRabi

NORM_DRIFT_TOL = 1e-8
# below this dimension the per-step transfer matrices are built in batches
_BATCH_MAX_DIM = 8
_CHUNK = 1 << 15


@dataclass(frozen=True)
class Rk4Config:
    n_points: int
    horizon: float
    t0: float = 0.0

    def __post_init__(self):
        if self.n_points < 2:
            raise ContractViolation(f"RK4 needs n_points >= 2, got {self.n_points}")

    @property
    def step(self) -> float:
        return self.horizon / (self.n_points - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_points) * self.step


def _split_state(psi0):
    if isinstance(psi0, StateVector):
        return psi0.basis, psi0.amplitudes
    amps = np.asarray(psi0, dtype=complex)
    return tuple(range(amps.shape[-1])), amps


def rk4_integrate(rhs: Callable, psi0, cfg: Rk4Config) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` and return every step."""
    basis, y = _split_state(psi0)
    h = cfg.step
    times = cfg.times
    out = np.empty((cfg.n_points, y.shape[-1]), dtype=complex)
    out[0] = y
    for k in range(cfg.n_points - 1):
        t = times[k]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = y
    return Trajectory(times, out, basis)


def rk4_step_matrices(model: LinearModel, t: np.ndarray, h: float) -> np.ndarray:
    """Per-step RK4 transfer matrices ``R_k`` with ``y_{k+1} = R_k y_k``.

    For a linear right-hand side the four stages collapse to one matrix, which
    is the same arithmetic as the stage-by-stage update.
    """
    eye = np.eye(model.dim)
    a0 = model.generator(t)
    ah = model.generator(t + 0.5 * h)
    a1 = model.generator(t + h)
    k2 = ah @ (eye + 0.5 * h * a0)
    k3 = ah @ (eye + 0.5 * h * k2)
    k4 = a1 @ (eye + h * k3)
    return eye + h / 6.0 * (a0 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagate(model: LinearModel, psi0, cfg: Rk4Config, sample_every: int = 1) -> Trajectory:
    """RK4 on a linear model, keeping every ``sample_every``-th state."""
    basis, y = _split_state(psi0)
    if y.shape[-1] != model.dim:
        raise ContractViolation(f"initial state has dimension {y.shape[-1]}, model needs {model.dim}")
    basis = model.basis
    n_steps = cfg.n_points - 1
    if n_steps % sample_every:
        raise ContractViolation(f"sample_every={sample_every} must divide the {n_steps} steps")
    h = cfg.step
    times = cfg.times
    out = np.empty((n_steps // sample_every + 1, model.dim), dtype=complex)
    out[0] = y
    if model.dim <= _BATCH_MAX_DIM:
        k = 0
        for start in range(0, n_steps, _CHUNK):
            stop = min(start + _CHUNK, n_steps)
            mats = rk4_step_matrices(model, times[start:stop], h)
            for r in mats:
                y = r @ y
                k += 1
                if k % sample_every == 0:
                    out[k // sample_every] = y
    else:
        for k in range(n_steps):
            t = times[k]
            k1 = model.apply(t, y)
            k2 = model.apply(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = model.apply(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = model.apply(t + h, y + h * k3)
            y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if (k + 1) % sample_every == 0:
                out[(k + 1) // sample_every] = y
    traj = Trajectory(times[::sample_every], out, basis)
    if model.unitary:
        drift = traj.norm_drift()
        if drift > NORM_DRIFT_TOL:
            traj.warnings.append(f"RK4 norm drift {drift:.2e} exceeds {NORM_DRIFT_TOL:.0e}")
    if isinstance(model, QuantumRabi):
        tail = model.check_truncation(out)
        if tail >= TRUNCATION_TOL:
            traj.warnings.append(f"Fock truncation: top-level population {tail:.3e}")
    return traj
