"""Picard (iterated-integral) series for the interaction-picture dynamics.

``psi^(n)(t) = int_0^t A(t') psi^(n-1)(t') dt'`` with ``A = -i H_I``.  The
numeric recursion works for any model and order.  Closed forms are provided
up to third order for the resonant semiclassical model started in ``|g>`` and
the quantum model started in ``|g,0>``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import ContractViolation, StateVector, TimeGrid, cumulative_integral
from .models import LinearModel, QuantumParams, SemiclassicalParams

MAX_ANALYTIC_ORDER = 3
# omega * h above this makes the Simpson error of the oscillating integrands visible
MAX_PHASE_STEP = 0.05
DEFAULT_PHASE_STEP = 0.01


class UnsupportedOrder(ContractViolation):
    pass


class CoarseGridWarning(RuntimeWarning):
    pass


@dataclass
class PicardExpansion:
    """Per-order corrections sampled on ``grid``; ``orders[n]`` has shape ``(n_t, dim)``."""

    grid: TimeGrid
    orders: np.ndarray
    basis: tuple
    model: str
    warnings: list = field(default_factory=list)

    @property
    def max_order(self) -> int:
        return self.orders.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def order(self, n: int) -> StateVector:
        return StateVector(self.basis, self.orders[n], normalized=(n == 0))

    def _index(self, t) -> int | slice:
        if t is None:
            return slice(None)
        k = (t - self.grid.t0) / self.grid.spacing
        i = int(round(k))
        if abs(k - i) > 1e-6 or not 0 <= i < self.grid.n_points:
            raise ContractViolation(f"t={t} is not a point of the expansion grid")
        return i

    def partial_sum(self, t=None, n: int | None = None) -> StateVector:
        """Sum of orders ``0..n`` at grid time ``t`` (all times when ``t`` is None).

        Truncated sums are not normalized; the result carries ``normalized=False``.
        """
        n = self.max_order if n is None else n
        if not 0 <= n <= self.max_order:
            raise ContractViolation(f"partial sum order {n} outside 0..{self.max_order}")
        amps = self.orders[: n + 1, self._index(t)].sum(axis=0)
        return StateVector(self.basis, amps, normalized=(n == 0))


def _quadrature_error_estimate(model: LinearModel, grid: TimeGrid) -> float:
    # Simpson on exp(i nu t): relative error per unit length ~ (nu h)^4 / 180
    nu = max((abs(v) for v, _ in model.terms), default=0.0) + model.rate
    return model.rate * (grid.t1 - grid.t0) * (nu * grid.spacing) ** 4 / 180.0


def picard_numeric(model: LinearModel, psi0, max_order: int, grid: TimeGrid) -> PicardExpansion:
    """Numeric Picard recursion to ``max_order`` by cumulative Simpson quadrature."""
    if max_order < 0:
        raise ContractViolation(f"max_order must be >= 0, got {max_order}")
    amps = psi0.amplitudes if isinstance(psi0, StateVector) else np.asarray(psi0, dtype=complex)
    if amps.shape != (model.dim,):
        raise ContractViolation(f"initial state has shape {amps.shape}, model needs ({model.dim},)")
    notes = []
    phase_step = model.omega * grid.spacing
    if phase_step > MAX_PHASE_STEP:
        est = _quadrature_error_estimate(model, grid)
        msg = f"grid too coarse for Picard quadrature: omega*h={phase_step:.3g} > {MAX_PHASE_STEP}, estimated error {est:.1e}"
        warnings.warn(msg, CoarseGridWarning, stacklevel=2)
        notes.append(msg)
    t = grid.times
    orders = np.empty((max_order + 1, t.size, model.dim), dtype=complex)
    orders[0] = amps
    for n in range(1, max_order + 1):
        orders[n] = cumulative_integral(model.apply(t, orders[n - 1]), grid.spacing)
    return PicardExpansion(grid, orders, model.basis, model.name, notes)


def picard_semiclassical_analytic(p: SemiclassicalParams, order: int, t) -> StateVector:
    """Closed-form order-``order`` correction for the resonant drive from ``|g>``.

    The third-order ``(Omega t)`` term carries a factor ``i``; this is what the
    iterated integral gives and what the numeric recursion reproduces.
    """
    if order > MAX_ANALYTIC_ORDER or order < 0:
        raise UnsupportedOrder(f"closed forms exist for orders 0..3 only; use picard_numeric for order {order}")
    if not p.resonant:
        raise ContractViolation("closed forms assume a resonant drive with zero phase")
    t = np.asarray(t, dtype=float)
    om, w = p.rabi_freq, p.field_freq
    x = om * t
    e2 = np.exp(2j * w * t)
    em2 = np.exp(-2j * w * t)
    amps = np.zeros(t.shape + (2,), dtype=complex)
    if order == 0:
        amps[..., 0] = 1.0
    elif order == 1:
        amps[..., 1] = om / (2 * w) * (1 - e2) - 1j * x
    elif order == 2:
        amps[..., 0] = om**2 / (4 * w**2) * (-1 + e2) - 1j * om / (2 * w) * x * em2 - x**2 / 2
    else:
        amps[..., 1] = (
            om**3 / (8 * w**3) * (2.5 - em2 - e2 - 0.5 * np.exp(4j * w * t))
            + 1j * om**2 / (4 * w**2) * x * (1 - em2 + e2)
            - om / (4 * w) * x**2 * (1 - e2)
            + 1j * x**3 / 6
        )
    return StateVector(("g", "e"), amps, normalized=(order == 0))


# Vertices of the quantum interaction: name -> (qubit before, qubit after, photon change)
VERTICES = {
    "sigma+ a": ("g", "e", -1),
    "sigma- a^dag": ("e", "g", +1),
    "sigma- a": ("e", "g", -1),
    "sigma+ a^dag": ("g", "e", +1),
}
COUNTER_ROTATING = frozenset({"sigma- a", "sigma+ a^dag"})


def apply_vertex(vertex: str, label: tuple) -> tuple[tuple, float] | None:
    """Act with one vertex on ``(l, n)``; None if it annihilates the state."""
    before, after, dn = VERTICES[vertex]
    l, n = label
    if l != before or n + dn < 0:
        return None
    return (after, n + dn), math.sqrt(max(n, n + dn))


@dataclass(frozen=True)
class DiagramTerm:
    """One time-ordered vertex sequence, applied left to right."""

    vertex_sequence: tuple
    initial: tuple
    final: tuple
    weight: float = 1.0

    @property
    def rwa_violating(self) -> bool:
        return any(v in COUNTER_ROTATING for v in self.vertex_sequence)


def enumerate_diagrams(initial: tuple, order: int, n_max: int | None = None) -> list[DiagramTerm]:
    """All non-vanishing vertex sequences of length ``order`` from ``initial``.

    ``weight`` is the product of the ladder-operator matrix elements.
    """
    if order < 0:
        raise ContractViolation(f"order must be >= 0, got {order}")
    out = []
    for seq in itertools.product(VERTICES, repeat=order):
        label, weight = tuple(initial), 1.0
        for v in seq:
            hit = apply_vertex(v, label)
            if hit is None or (n_max is not None and hit[0][1] > n_max):
                break
            label, w = hit
            weight *= w
        else:
            out.append(DiagramTerm(seq, tuple(initial), label, weight))
    return out


def _quantum_checks(p: QuantumParams, order: int):
    if order > MAX_ANALYTIC_ORDER or order < 0:
        raise UnsupportedOrder(f"closed forms exist for orders 0..3 only; use picard_numeric for order {order}")
    if p.qubit != p.field_freq:
        raise ContractViolation("closed forms assume a resonant qubit")
    if p.n_max < order:
        raise ContractViolation(f"n_max={p.n_max} cannot hold the order-{order} correction")


def quantum_order3_diagrams(p: QuantumParams, t) -> list[tuple[DiagramTerm, np.ndarray]]:
    """The three third-order contributions from ``|g,0>``, one per diagram."""
    _quantum_checks(p, 3)
    t = np.asarray(t, dtype=float)
    lam, w = p.coupling, p.field_freq
    wt = w * t
    e2 = np.exp(2j * wt)
    k = lam**3 / (4 * w**3)
    via_g0 = k * (-1 + e2 - 1j * wt * (1 + e2))
    via_g2_up = math.sqrt(1.5) * lam**3 / (8 * w**3) * (1 - np.exp(4j * wt) + 4j * e2 * wt)
    via_g2_down = k * (1 - e2 + 2j * wt - 2 * wt**2)
    g0 = ("g", 0)
    terms = {d.vertex_sequence: d for d in enumerate_diagrams(g0, 3)}
    return [
        (terms[("sigma+ a^dag", "sigma- a", "sigma+ a^dag")], via_g0),
        (terms[("sigma+ a^dag", "sigma- a^dag", "sigma+ a^dag")], via_g2_up),
        (terms[("sigma+ a^dag", "sigma- a^dag", "sigma+ a")], via_g2_down),
    ]


def picard_quantum_analytic(p: QuantumParams, order: int, t) -> StateVector:
    """Closed-form order-``order`` correction for the quantum model from ``|g,0>``."""
    _quantum_checks(p, order)
    t = np.asarray(t, dtype=float)
    lam, w = p.coupling, p.field_freq
    basis = tuple((l, n) for n in range(p.n_max + 1) for l in ("g", "e"))
    amps = np.zeros(t.shape + (len(basis),), dtype=complex)
    idx = basis.index
    if order == 0:
        amps[..., idx(("g", 0))] = 1.0
    elif order == 1:
        amps[..., idx(("e", 1))] = lam / (2 * w) * (1 - np.exp(2j * w * t))
    elif order == 2:
        amps[..., idx(("g", 0))] = 1j * lam**2 / (2 * w) * (t + 1j / (2 * w) * (1 - np.exp(-2j * w * t)))
        amps[..., idx(("g", 2))] = 1j * math.sqrt(2) * lam**2 / (2 * w) * (-t + 1j / (2 * w) * (1 - np.exp(2j * w * t)))
    else:
        for term, coeff in quantum_order3_diagrams(p, t):
            amps[..., idx(term.final)] += coeff
    return StateVector(basis, amps, normalized=(order == 0))


@dataclass(frozen=True)
class DcePrediction:
    peak_time: float
    peak_value: float
    swap_time: float


def mean_photons_first_order(lam: float, omega: float, t) -> np.ndarray:
    """Lowest-order photon number ``(lam/omega)^2 sin^2(omega t)`` from ``|g,0>``."""
    if not (lam > 0 and omega > 0):
        raise ContractViolation("coupling and field frequency must be positive")
    return (lam / omega) ** 2 * np.sin(omega * np.asarray(t, dtype=float)) ** 2


def dce_prediction(lam: float, omega: float) -> DcePrediction:
    if not (lam > 0 and omega > 0):
        raise ContractViolation("coupling and field frequency must be positive")
    return DcePrediction(peak_time=math.pi / (2 * omega), peak_value=(lam / omega) ** 2, swap_time=math.pi / (2 * lam))


def picard_mean_photons(expansion: PicardExpansion, n: int | None = None) -> np.ndarray:
    """``sum_n n |C_{l,n}|^2`` of the (unnormalized) partial sum on the grid."""
    amps = expansion.partial_sum(None, n).amplitudes
    photons = np.array([lab[1] for lab in expansion.basis], dtype=float)
    return np.sum(photons * np.abs(amps) ** 2, axis=-1)


__all__ = [
    "CoarseGridWarning",
    "DcePrediction",
    "DiagramTerm",
    "PicardExpansion",
    "UnsupportedOrder",
    "VERTICES",
    "apply_vertex",
    "dce_prediction",
    "enumerate_diagrams",
    "mean_photons_first_order",
    "picard_mean_photons",
    "picard_numeric",
    "picard_quantum_analytic",
    "picard_semiclassical_analytic",
    "quantum_order3_diagrams",
]
