"""Magnus expansion: nested-commutator terms, single-interval propagators,
concatenated stepping and the convergence horizon.

Terms follow the recursion

    Omega1' = A
    Omega2' = 1/2 [A, Omega1]
    Omega3' = 1/2 [A, Omega2] + 1/12 [Omega1, [Omega1, A]]
    Omega4' = 1/2 [A, Omega3] + 1/12 ([Omega1, [Omega2, A]] + [Omega2, [Omega1, A]])

each integrated from the interval start with cumulative Simpson quadrature,
so the whole family of ``Omega_n(t)`` comes out on the grid in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    ContractViolation,
    Trajectory,
    TimeGrid,
    commutator,
    cumulative_integral,
    dagger,
    expm_antihermitian,
    spectral_norm,
)
from .models import TRUNCATION_TOL, LinearModel, QuantumRabi, SemiclassicalParams

MAX_TERM_ORDER = 4
UNITARITY_STEP_TOL = 1e-12
UNITARITY_RUN_TOL = 1e-10
DEFAULT_PHASE_STEP = 0.01
# order-4 concatenation default: omega * h <= 0.5
DEFAULT_STEP_PHASE = 0.5

SCHEMES = ("order1_exact", "order2_midpoint", "order4_gauss2")
_GL_OFFSET = math.sqrt(3.0) / 6.0


class UnsupportedOrder(ContractViolation):
    pass


@dataclass(frozen=True)
class MagnusTerm:
    order: int
    value: np.ndarray
    interval: tuple

    def antihermitian_defect(self) -> float:
        return float(np.max(np.abs(self.value + dagger(self.value))))


def magnus_terms_on_grid(model: LinearModel, grid: TimeGrid, max_order: int = MAX_TERM_ORDER) -> np.ndarray:
    """``Omega_1..Omega_max_order`` at every grid time, shape ``(max_order, n_t, d, d)``.

    Each term is integrated from ``grid.t0``.
    """
    if not 1 <= max_order <= MAX_TERM_ORDER:
        raise UnsupportedOrder(f"Magnus terms are available for orders 1..{MAX_TERM_ORDER}, got {max_order}")
    h = grid.spacing
    a = model.generator(grid.times)
    out = np.empty((max_order,) + a.shape, dtype=complex)
    out[0] = cumulative_integral(a, h)
    if max_order >= 2:
        out[1] = cumulative_integral(0.5 * commutator(a, out[0]), h)
    if max_order >= 3:
        c1 = commutator(out[0], a)
        out[2] = cumulative_integral(0.5 * commutator(a, out[1]) + commutator(out[0], c1) / 12.0, h)
    if max_order >= 4:
        inner = commutator(out[0], commutator(out[1], a)) + commutator(out[1], c1)
        out[3] = cumulative_integral(0.5 * commutator(a, out[2]) + inner / 12.0, h)
    return out


def _grid_for(model: LinearModel, t_a: float, t_b: float, phase_step: float) -> TimeGrid:
    max_step = phase_step / max(model.omega, model.rate)
    return TimeGrid.with_max_step(t_a, t_b, max_step, multiple_of=2)


def magnus_term_numeric(
    model: LinearModel, order: int, interval: tuple, phase_step: float = DEFAULT_PHASE_STEP
) -> MagnusTerm:
    """``Omega_order`` over ``interval`` by nested quadrature at ``omega*h <= phase_step``."""
    if not 1 <= order <= MAX_TERM_ORDER:
        raise UnsupportedOrder(f"Magnus terms are available for orders 1..{MAX_TERM_ORDER}, got {order}")
    t_a, t_b = interval
    if t_b == t_a:
        return MagnusTerm(order, np.zeros((model.dim, model.dim), dtype=complex), (t_a, t_b))
    grid = _grid_for(model, t_a, t_b, phase_step)
    return MagnusTerm(order, magnus_terms_on_grid(model, grid, order)[order - 1, -1], (t_a, t_b))


def magnus_semiclassical_analytic(p: SemiclassicalParams, order: int, t) -> MagnusTerm:
    """Closed-form ``Omega_order(t)`` for the resonant drive, integrated from 0.

    ``t`` may be an array; ``value`` then has shape ``t.shape + (2, 2)``.
    """
    if not 1 <= order <= 3:
        raise UnsupportedOrder(f"closed forms exist for orders 1..3 only, got {order}")
    if not p.resonant:
        raise ContractViolation("closed forms assume a resonant drive with zero phase")
    t = np.asarray(t, dtype=float)
    om, w = p.rabi_freq, p.field_freq
    wt = w * t
    val = np.zeros(t.shape + (2, 2), dtype=complex)
    if order == 1:
        ge = -om / (2 * w) * (1 - np.exp(-2j * wt) + 2j * wt)
        val[..., 0, 1] = ge
        val[..., 1, 0] = -np.conj(ge)
    elif order == 2:
        gg = 1j * om**2 / (4 * w**2) * (-2 * wt * np.cos(2 * wt) + np.sin(2 * wt))
        val[..., 0, 0] = gg
        val[..., 1, 1] = -gg
    else:
        ge = om**3 / (8 * w**3) * (
            -3 + 1j * wt + (4 / 3) * wt**2
            + (1.5 + 2j * wt - (2 / 3) * wt**2) * np.exp(-2j * wt)
            + (7 / 6 - (4 / 3) * 1j * wt - (2 / 3) * wt**2) * np.exp(2j * wt)
            + (1 / 3 + (1 / 3) * 1j * wt) * np.exp(-4j * wt)
        )
        val[..., 0, 1] = ge
        val[..., 1, 0] = -np.conj(ge)
    return MagnusTerm(order, val, (0.0, t))


def _expm(model: LinearModel, x: np.ndarray) -> np.ndarray:
    if model.unitary:
        return expm_antihermitian(x)
    return scipy.linalg.expm(x)


def _unitarity_defect(u: np.ndarray) -> float:
    if u.size == 0:
        return 0.0
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(dagger(u) @ u - eye)))


def record_truncation(model: LinearModel, traj: Trajectory) -> None:
    """Run the Fock-tail check on quantum trajectories and log a breach."""
    if isinstance(model, QuantumRabi):
        tail = model.check_truncation(traj.states)
        if tail >= TRUNCATION_TOL:
            traj.warnings.append(f"Fock truncation: top-level population {tail:.3e}")


def magnus_single_interval(
    model: LinearModel, psi0, horizon: float, order: int = MAX_TERM_ORDER, phase_step: float = DEFAULT_PHASE_STEP
) -> Trajectory:
    """``exp(Omega_1(t) + ... + Omega_order(t)) psi0`` with every term taken from 0.

    No stepping: this is the truncated expansion on one growing interval.
    """
    amps = getattr(psi0, "amplitudes", psi0)
    amps = np.asarray(amps, dtype=complex)
    grid = _grid_for(model, 0.0, horizon, phase_step)
    terms = magnus_terms_on_grid(model, grid, order)
    u = _expm(model, terms.sum(axis=0))
    traj = Trajectory(grid.times, u @ amps, model.basis)
    record_truncation(model, traj)
    return traj


@dataclass(frozen=True)
class StepperConfig:
    scheme: str
    n_steps: int
    horizon: float
    t0: float = 0.0
    samples_per_step: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ContractViolation(f"unknown scheme {self.scheme!r}; choose one of {', '.join(SCHEMES)}")
        if self.n_steps < 1:
            raise ContractViolation(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.horizon > 0:
            raise ContractViolation(f"horizon must be positive, got {self.horizon}")
        if self.samples_per_step < 1:
            raise ContractViolation(f"samples_per_step must be >= 1, got {self.samples_per_step}")

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps


@dataclass(frozen=True)
class PropagatorStep:
    t: float
    h: float
    matrix: np.ndarray

    def unitarity_defect(self) -> float:
        return _unitarity_defect(self.matrix)


def step_exponent(model: LinearModel, scheme: str, t, h) -> np.ndarray:
    """Exponent of one step of ``scheme`` from ``t`` to ``t + h`` (arrays broadcast)."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    if scheme == "order1_exact":
        return model.integral(t, t + h)
    if scheme == "order2_midpoint":
        return h[..., None, None] * model.generator(t + 0.5 * h)
    if scheme == "order4_gauss2":
        a1 = model.generator(t + h * (0.5 - _GL_OFFSET))
        a2 = model.generator(t + h * (0.5 + _GL_OFFSET))
        hh = h[..., None, None]
        return 0.5 * hh * (a1 + a2) + hh**2 * (math.sqrt(3.0) / 12.0) * commutator(a2, a1)
    raise ContractViolation(f"unknown scheme {scheme!r}; choose one of {', '.join(SCHEMES)}")


def magnus_step(model: LinearModel, scheme: str, t: float, h: float) -> PropagatorStep:
    if not h > 0:
        raise ContractViolation(f"step must be positive, got {h}")
    return PropagatorStep(t, h, _expm(model, step_exponent(model, scheme, t, h)))


_CHUNK = 4096


def magnus_propagate(model: LinearModel, cfg: StepperConfig, psi0) -> Trajectory:
    """Concatenate ``cfg.n_steps`` Magnus steps.

    States are recorded at every step boundary and, when
    ``samples_per_step > 1``, at evenly spaced points inside each step using
    the same scheme over the partial interval.
    """
    amps = np.asarray(getattr(psi0, "amplitudes", psi0), dtype=complex)
    if amps.shape != (model.dim,):
        raise ContractViolation(f"initial state has shape {amps.shape}, model needs ({model.dim},)")
    n, s, h = cfg.n_steps, cfg.samples_per_step, cfg.step
    starts = cfg.t0 + h * np.arange(n)
    times = cfg.t0 + (h / s) * np.arange(n * s + 1)
    states = np.empty((n * s + 1, model.dim), dtype=complex)
    states[0] = amps
    worst = 0.0
    y = amps
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        u = _expm(model, step_exponent(model, cfg.scheme, starts[lo:hi], np.full(hi - lo, h)))
        if model.unitary:
            worst = max(worst, _unitarity_defect(u))
        partial = None
        if s > 1:
            frac = (h / s) * np.arange(1, s)
            t_in = np.repeat(starts[lo:hi], s - 1)
            h_in = np.tile(frac, hi - lo)
            partial = _expm(model, step_exponent(model, cfg.scheme, t_in, h_in)).reshape(hi - lo, s - 1, model.dim, model.dim)
        for k in range(hi - lo):
            base = (lo + k) * s
            if partial is not None:
                states[base + 1 : base + s] = partial[k] @ y
            y = u[k] @ y
            states[base + s] = y
    traj = Trajectory(times, states, model.basis)
    if model.unitary:
        if worst > UNITARITY_STEP_TOL:
            traj.warnings.append(f"step propagator unitarity defect {worst:.2e} exceeds {UNITARITY_STEP_TOL:.0e}")
        drift = traj.norm_drift()
        if drift > UNITARITY_RUN_TOL:
            traj.warnings.append(f"cumulative norm drift {drift:.2e} exceeds {UNITARITY_RUN_TOL:.0e}")
    record_truncation(model, traj)
    return traj


QUANTUM_HORIZON_CAVEAT = (
    "the generator of the untruncated quantum model is unbounded; this horizon "
    "holds for the truncated Fock space only and shrinks as n_max grows"
)


@dataclass(frozen=True)
class ConvergenceHorizon:
    """First time the running integral of ``norm_scale * ||A||_2`` reaches pi.

    ``t_c`` is None when no crossing occurs before ``t_max``; ``bound_value``
    is then the integral accumulated up to ``t_max``.
    """

    t_c: float | None
    bound_value: float
    norm_scale: float = 1.0
    caveat: str = ""


def convergence_horizon(
    model: LinearModel, t_max: float, n_points: int = 20001, norm_scale: float = 1.0
) -> ConvergenceHorizon:
    grid = TimeGrid(0.0, t_max, n_points)
    norms = norm_scale * spectral_norm(model.generator(grid.times))
    running = cumulative_integral(norms, grid.spacing)
    caveat = QUANTUM_HORIZON_CAVEAT if isinstance(model, QuantumRabi) else ""
    hit = np.nonzero(running >= math.pi)[0]
    if hit.size == 0:
        return ConvergenceHorizon(None, float(running[-1]), norm_scale, caveat)
    k = int(hit[0])
    t = grid.times
    if k == 0:
        t_c = float(t[0])
    else:
        # linear interpolation between the bracketing samples
        frac = (math.pi - running[k - 1]) / (running[k] - running[k - 1])
        t_c = float(t[k - 1] + frac * (t[k] - t[k - 1]))
    return ConvergenceHorizon(t_c, math.pi, norm_scale, caveat)


def semiclassical_horizon_readings(model: LinearModel, t_max: float, n_points: int = 200001) -> dict:
    """Horizon under the literal spectral norm and under the single-amplitude reading.

    For the driven qubit ``||A(t)||_2 = 2 Omega |cos(omega t)|``.  Counting
    the drive amplitude once instead of twice halves the integrand, which
    roughly doubles the horizon.
    """
    return {
        "literal": convergence_horizon(model, t_max, n_points, 1.0),
        "single_amplitude": convergence_horizon(model, t_max, n_points, 0.5),
    }
