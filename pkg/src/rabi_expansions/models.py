"""Interaction-picture generators for the semiclassical Rabi, quantum Rabi and
Mathieu systems.

Every model is linear, ``psi'(t) = A(t) psi(t)``, with ``A`` written as a short
Fourier sum ``f(t) * sum_k M_k exp(i nu_k t)``.  Keeping that form lets
trajectories, exact per-interval integrals and batched products be evaluated
without ever forming ``A(t)`` on a dense time grid.

Quantum basis order is ``|g,0>, |e,0>, |g,1>, |e,1>, ...`` (index ``2n + l``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import ContractViolation, StateVector

SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g| in the (g, e) basis
SIGMA_MINUS = SIGMA_PLUS.T.copy()

TRUNCATION_TOL = 1e-8


class TruncationWarning(RuntimeWarning):
    """Population leaked into the top Fock levels of a truncated run."""


@dataclass(frozen=True)
class CouplingWindow:
    """Sudden switch: f(t) = 1 on [0, switch_off], 0 elsewhere."""

    switch_off: float = math.inf

    def __post_init__(self):
        if not self.switch_off > 0:
            raise ContractViolation(f"switch-off time must be positive, got {self.switch_off}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return ((t >= 0.0) & (t <= self.switch_off)).astype(float)

    def clip(self, a, b):
        return np.clip(a, 0.0, self.switch_off), np.clip(b, 0.0, self.switch_off)


@dataclass(frozen=True)
class ModelFlags:
    rwa: bool = False


@dataclass(frozen=True)
class SemiclassicalParams:
    rabi_freq: float
    field_freq: float = 1.0
    qubit_freq: float | None = None
    phase: float = 0.0
    window: CouplingWindow = field(default_factory=CouplingWindow)

    def __post_init__(self):
        if not (self.rabi_freq > 0 and self.field_freq > 0):
            raise ContractViolation("Rabi and field frequencies must be positive")

    @property
    def qubit(self) -> float:
        return self.field_freq if self.qubit_freq is None else self.qubit_freq

    @property
    def resonant(self) -> bool:
        return self.qubit == self.field_freq and self.phase == 0.0


@dataclass(frozen=True)
class QuantumParams:
    coupling: float
    field_freq: float = 1.0
    qubit_freq: float | None = None
    n_max: int = 32
    window: CouplingWindow = field(default_factory=CouplingWindow)

    def __post_init__(self):
        if isinstance(self.coupling, complex) or not np.isrealobj(self.coupling):
            raise ContractViolation("coupling strength must be real")
        if self.n_max < 1:
            raise ContractViolation(f"n_max must be >= 1, got {self.n_max}")
        if not self.field_freq > 0:
            raise ContractViolation("field frequency must be positive")

    @property
    def qubit(self) -> float:
        return self.field_freq if self.qubit_freq is None else self.qubit_freq

    @property
    def swap_time(self) -> float:
        return math.pi / (2.0 * abs(self.coupling))


@dataclass(frozen=True)
class MathieuParams:
    a: float
    q: float
    omega: float


def ladder_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation and creation operators on ``n_max + 1`` Fock levels."""
    if n_max < 1:
        raise ContractViolation(f"n_max must be >= 1, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def _phase_integral(nu: float, a, b):
    """Integral of exp(i nu t) over [a, b], stable for small nu*(b - a)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if nu == 0.0:
        return (b - a).astype(complex)
    return np.exp(1j * nu * a) * np.expm1(1j * nu * (b - a)) / (1j * nu)


class LinearModel:
    """``psi' = A(t) psi`` with ``A(t) = f(t) sum_k M_k exp(i nu_k t)``.

    Subclasses fill ``terms`` (list of ``(nu, M)``), ``basis``, ``omega`` (the
    fast modulation frequency) and ``rate`` (the slow frequency used as the
    spectral unit: Omega, lambda or sqrt(a)).
    """

    name = "linear"
    unitary = True
    basis: tuple = ()
    omega: float = 1.0
    rate: float = 1.0
    window: CouplingWindow | None = None

    def __init__(self, terms):
        merged: dict[float, np.ndarray] = {}
        for nu, m in terms:
            nu = float(nu)
            merged[nu] = merged.get(nu, 0) + np.asarray(m, dtype=complex)
        self.terms = [(nu, m) for nu, m in sorted(merged.items()) if np.any(m != 0)]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _envelope(self, t):
        if self.window is None:
            return np.ones_like(np.asarray(t, dtype=float))
        return self.window(t)

    def generator(self, t) -> np.ndarray:
        """A(t); ``t`` may be an array, giving shape ``t.shape + (d, d)``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dim, self.dim), dtype=complex)
        for nu, m in self.terms:
            out += np.exp(1j * nu * t)[..., None, None] * m
        return out * self._envelope(t)[..., None, None]

    def hamiltonian(self, t) -> np.ndarray:
        """H_I(t) = i A(t)."""
        return 1j * self.generator(t)

    def apply(self, t, psi) -> np.ndarray:
        """A(t) psi.  ``psi`` has shape ``(d,)`` or ``(n, d)`` matching ``t``'s shape."""
        t = np.asarray(t, dtype=float)
        psi = np.asarray(psi)
        out = np.zeros(np.broadcast_shapes(psi.shape, t.shape + (self.dim,)), dtype=complex)
        for nu, m in self.terms:
            out += np.exp(1j * nu * t)[..., None] * (psi @ m.T)
        return out * self._envelope(t)[..., None]

    def integral(self, a, b) -> np.ndarray:
        """Exact integral of A(t) over [a, b] (arrays broadcast)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.window is not None:
            a, b = self.window.clip(a, b)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape) + (self.dim, self.dim), dtype=complex)
        for nu, m in self.terms:
            out += _phase_integral(nu, a, b)[..., None, None] * m
        return out

    def state(self, label) -> StateVector:
        return StateVector.basis_state(self.basis, label)


class SemiclassicalRabi(LinearModel):
    name = "semiclassical"
    basis = ("g", "e")

    def __init__(self, params: SemiclassicalParams, flags: ModelFlags = ModelFlags()):
        self.params = params
        self.flags = flags
        self.omega = params.field_freq
        self.rate = params.rabi_freq
        self.window = params.window
        om, wq, w, phi = params.rabi_freq, params.qubit, params.field_freq, params.phase
        # sigma_+ carries exp(i wq t); the drive 2 Omega cos(w t + phi) splits into
        # co-rotating (wq - w) and counter-rotating (wq + w) parts.
        h_terms = [
            (wq - w, om * np.exp(-1j * phi) * SIGMA_PLUS),
            (-(wq - w), om * np.exp(1j * phi) * SIGMA_MINUS),
        ]
        if not flags.rwa:
            h_terms += [
                (wq + w, om * np.exp(1j * phi) * SIGMA_PLUS),
                (-(wq + w), om * np.exp(-1j * phi) * SIGMA_MINUS),
            ]
        super().__init__([(nu, -1j * m) for nu, m in h_terms])


class QuantumRabi(LinearModel):
    name = "quantum"

    def __init__(self, params: QuantumParams, flags: ModelFlags = ModelFlags()):
        self.params = params
        self.flags = flags
        self.omega = params.field_freq
        self.rate = abs(params.coupling)
        self.window = params.window
        self.n_max = params.n_max
        self.basis = tuple((l, n) for n in range(params.n_max + 1) for l in ("g", "e"))
        a, ad = ladder_operators(params.n_max)
        lam, wq, w = params.coupling, params.qubit, params.field_freq
        h_terms = [
            (wq - w, lam * np.kron(a, SIGMA_PLUS)),
            (-(wq - w), lam * np.kron(ad, SIGMA_MINUS)),
        ]
        if not flags.rwa:
            h_terms += [
                (-(wq + w), lam * np.kron(a, SIGMA_MINUS)),
                (wq + w, lam * np.kron(ad, SIGMA_PLUS)),
            ]
        super().__init__([(nu, -1j * m) for nu, m in h_terms])

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_max + 1), 2)

    @property
    def excitation_numbers(self) -> np.ndarray:
        return self.photon_numbers + np.tile([0, 1], self.n_max + 1)

    def tail_population(self, states) -> np.ndarray:
        """Population in Fock levels n >= n_max - 2, per state."""
        states = np.asarray(states)
        mask = self.photon_numbers >= self.n_max - 2
        return np.sum(np.abs(states[..., mask]) ** 2, axis=-1)

    def check_truncation(self, states, tol: float = TRUNCATION_TOL) -> float:
        tail = float(np.max(self.tail_population(states)))
        if tail >= tol:
            warnings.warn(
                f"Fock truncation n_max={self.n_max}: population {tail:.3e} in top levels exceeds {tol:.0e}",
                TruncationWarning,
                stacklevel=2,
            )
        return tail


class Mathieu(LinearModel):
    """y'' + [a - 2q cos(omega t)] y = 0 as a first-order system in (y, p)."""

    name = "mathieu"
    unitary = False
    basis = ("y", "p")

    def __init__(self, params: MathieuParams):
        self.params = params
        self.omega = params.omega
        self.rate = math.sqrt(params.a) if params.a > 0 else 1.0
        static = np.array([[0.0, 1.0], [-params.a, 0.0]], dtype=complex)
        drive = np.array([[0.0, 0.0], [params.q, 0.0]], dtype=complex)
        super().__init__([(0.0, static), (params.omega, drive), (-params.omega, drive)])

    def generator(self, t) -> np.ndarray:
        # real system; drop the round-off imaginary part of the cosine
        return super().generator(t).real.astype(complex)


def semiclassical_generator(p: SemiclassicalParams, flags: ModelFlags, t) -> np.ndarray:
    """H_I(t) of the driven qubit in the (g, e) basis."""
    return SemiclassicalRabi(p, flags).hamiltonian(t)


def quantum_generator(p: QuantumParams, flags: ModelFlags, t) -> np.ndarray:
    """H_I(t) of the quantum Rabi model on the truncated qubit-Fock space."""
    return QuantumRabi(p, flags).hamiltonian(t)


def mathieu_generator(p: MathieuParams, t) -> np.ndarray:
    """System matrix of the Mathieu equation for (y, p = y')."""
    return Mathieu(p).generator(t).real


def schrodinger_rhs(model: LinearModel, psi, t) -> np.ndarray:
    """Time derivative of the state: ``-i H_I(t) psi`` (``M(t) psi`` for Mathieu)."""
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    if amps.shape[-1] != model.dim:
        raise ContractViolation(f"state of dimension {amps.shape[-1]} does not match {model.name} model dimension {model.dim}")
    return model.apply(t, amps)
