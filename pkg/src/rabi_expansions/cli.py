"""Command-line front end.

Configs are flat ``key = value`` files with dotted namespaces::

    figure = fig8            # optional preset, file keys override it
    model = semiclassical
    model.rabi = 0.1         # Omega / omega
    horizon.scaled = 60*pi   # Omega t; or `horizon = ...` in units of 1/omega
    method = magnus_concat
    method.scheme = order4_gauss2
    method.n_steps = 3000
    observables = re_cg
    spectrum = true

Per-method keys can be given as ``method.<key>`` (shared) or
``<method>.<key>`` (one method only, e.g. ``picard.order``).
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    OBSERVABLES,
    ObservableSeries,
    detect_peaks,
    dce_peak_extraction,
    fft_spectrum,
    observable,
    photon_runs,
    sweep_photon_surface,
)
from .linalg import ContractViolation, TimeGrid, Trajectory
from .magnus import DEFAULT_STEP_PHASE, StepperConfig, magnus_propagate, magnus_single_interval
from .models import (
    CouplingWindow,
    Mathieu,
    MathieuParams,
    ModelFlags,
    QuantumParams,
    QuantumRabi,
    SemiclassicalParams,
    SemiclassicalRabi,
)
from .picard import MAX_PHASE_STEP, dce_prediction, picard_numeric, picard_quantum_analytic, picard_semiclassical_analytic
from .rk4 import Rk4Config, rk4_propagate

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

MODELS = ("semiclassical", "quantum", "mathieu")
METHODS = ("rk4", "picard", "magnus_single", "magnus_concat")
MODEL_OBSERVABLES = {
    "semiclassical": ("re_cg", "re_ce"),
    "quantum": ("re_c_g0", "mean_photons", "total_excitations"),
    "mathieu": ("mathieu_y",),
}
SCHEME_FOR_ORDER = {1: "order1_exact", 2: "order2_midpoint", 4: "order4_gauss2"}


class ConfigError(ValueError):
    pass


PRESETS = {
    "fig1": (
        "Picard partial sums against RK4, driven qubit",
        {
            "model": "semiclassical",
            "model.rabi": "0.1",
            "horizon.scaled": "4*pi",
            "methods": "rk4, picard",
            "picard.order": "33",
            "observables": "re_cg",
        },
    ),
    "fig5": (
        "photon number surface, exact vs fourth-order Picard",
        {
            "model": "quantum",
            "sweep.kind": "photon_surface",
            "sweep.couplings": "0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5",
            "sweep.t_over_swap": "0:2:41",
        },
    ),
    "fig6": (
        "first photon peak time against the first-order law",
        {
            "model": "quantum",
            "sweep.kind": "peak_time",
            "sweep.couplings": "0.05, 0.1, 0.15, 0.2, 0.25, 0.3",
        },
    ),
    "fig7": (
        "single-interval vs concatenated first-order Magnus, driven qubit",
        {
            "model": "semiclassical",
            "model.rabi": "0.1",
            "horizon.scaled": "10",
            "methods": "rk4, magnus_single, magnus_concat",
            "magnus_single.order": "4",
            "magnus_concat.scheme": "order1_exact",
            "magnus_concat.n_steps": "10",
            "magnus_concat.samples_per_step": "100",
            "observables": "re_cg",
        },
    ),
    "fig8": (
        "Magnus spectrum with doublets at 2n omega +- Omega",
        {
            "model": "semiclassical",
            "model.rabi": "0.1",
            "horizon.scaled": "60*pi",
            "method": "magnus_concat",
            "method.scheme": "order4_gauss2",
            "method.n_steps": "3000",
            "observables": "re_cg, re_ce",
            "spectrum": "true",
        },
    ),
    "fig10": (
        "quantum model, concatenated fourth-order Magnus vs RK4",
        {
            "model": "quantum",
            "model.coupling": "0.12",
            "horizon": "50",
            "methods": "rk4, magnus_concat",
            "magnus_concat.scheme": "order4_gauss2",
            "magnus_concat.n_steps": "100",
            "observables": "re_c_g0",
        },
    ),
    "fig11": (
        "Mathieu spectrum with doublets at n omega +- sqrt(a)",
        {
            "model": "mathieu",
            "model.a": "0.5",
            "model.q": "0.1",
            "model.omega": "40",
            "horizon": "200",
            "method": "rk4",
            "rk4.n_points": "131073",
            "observables": "mathieu_y",
            "spectrum": "true",
        },
    ),
}


# ---- value parsing -------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "inf": math.inf}


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt" and len(node.args) == 1:
        return math.sqrt(_eval(node.args[0]))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """Numbers and small arithmetic expressions (``60*pi``, ``2**17+1``, ``sqrt(0.5)``)."""
    try:
        return float(_eval(ast.parse(text.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError, OverflowError):
        raise ConfigError(f"cannot read {text!r} as a number") from None


def parse_int(text: str) -> int:
    v = parse_number(text)
    if v != int(v):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}")


def parse_list(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def parse_range(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:num, got {text!r}")
        return np.linspace(parse_number(parts[0]), parse_number(parts[1]), parse_int(parts[2]))
    return np.array([parse_number(x) for x in parse_list(text)])


def read_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text)


def parse_config_text(text: str) -> dict:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        cfg[key] = value
    return resolve_preset(cfg)


def resolve_preset(cfg: dict) -> dict:
    name = cfg.get("figure")
    if name is None:
        return dict(cfg)
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    merged = dict(PRESETS[name][1])
    merged.update(cfg)
    return merged


# ---- experiment assembly -------------------------------------------------


@dataclass
class Experiment:
    cfg: dict
    model: object
    model_name: str
    horizon: float
    psi0: np.ndarray
    observables: list

    def get(self, key, default=None):
        return self.cfg.get(key, default)

    def method_opt(self, method: str, key: str, default=None):
        return self.cfg.get(f"{method}.{key}", self.cfg.get(f"method.{key}", default))


def _initial_state(model, model_name: str, cfg: dict) -> np.ndarray:
    if model_name == "mathieu":
        return np.array([parse_number(cfg.get("initial.y", "1")), parse_number(cfg.get("initial.p", "0"))], dtype=complex)
    label = cfg.get("initial", "g" if model_name == "semiclassical" else "g0").strip()
    if model_name == "quantum":
        if len(label) < 2 or label[0] not in "ge" or not label[1:].isdigit():
            raise ConfigError(f"quantum initial state must look like g0 or e1, got {label!r}")
        key = (label[0], int(label[1:]))
    else:
        key = label
    if key not in model.basis:
        raise ConfigError(f"initial state {label!r} is not in the {model_name} basis")
    return model.state(key).amplitudes


def build_model(cfg: dict):
    name = cfg.get("model", "semiclassical")
    if name not in MODELS:
        raise ConfigError(f"unknown model {name!r}; choose one of {', '.join(MODELS)}")
    omega = parse_number(cfg.get("model.omega", "1"))
    if not omega > 0:
        raise ConfigError("model.omega must be positive")
    if name == "mathieu":
        return name, Mathieu(MathieuParams(parse_number(cfg.get("model.a", "0.5")), parse_number(cfg.get("model.q", "0.1")), omega))
    flags = ModelFlags(rwa=parse_bool(cfg.get("model.rwa", "false")))
    window = CouplingWindow(parse_number(cfg.get("model.switch_off", "inf")) / omega)
    qubit = parse_number(cfg.get("model.qubit", "1")) * omega
    if name == "semiclassical":
        p = SemiclassicalParams(
            parse_number(cfg.get("model.rabi", "0.1")) * omega, omega, qubit, parse_number(cfg.get("model.phase", "0")), window
        )
        return name, SemiclassicalRabi(p, flags)
    p = QuantumParams(parse_number(cfg.get("model.coupling", "0.1")) * omega, omega, qubit, parse_int(cfg.get("model.n_max", "32")), window)
    return name, QuantumRabi(p, flags)


def build_experiment(cfg: dict) -> Experiment:
    try:
        name, model = build_model(cfg)
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from None
    if "horizon" in cfg:
        horizon = parse_number(cfg["horizon"]) / (model.omega if name != "mathieu" else 1.0)
    elif "horizon.scaled" in cfg:
        horizon = parse_number(cfg["horizon.scaled"]) / model.rate
    else:
        raise ConfigError("missing horizon (set `horizon` or `horizon.scaled`)")
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    obs = parse_list(cfg.get("observables", ""))
    if not obs:
        raise ConfigError("observable list is empty")
    for o in obs:
        if o not in OBSERVABLES:
            raise ConfigError(f"unknown observable {o!r}")
        if o not in MODEL_OBSERVABLES[name]:
            raise ConfigError(f"observable {o!r} is not defined for the {name} model")
    return Experiment(cfg, model, name, horizon, _initial_state(model, name, cfg), obs)


def _rk4_points(exp: Experiment, method: str, align: int = 1) -> int:
    if exp.method_opt(method, "n_points") is not None:
        return parse_int(exp.method_opt(method, "n_points"))
    fast = max(exp.model.omega, exp.model.rate)
    phase = parse_number(exp.method_opt(method, "phase_step", "0.01"))
    steps = int(math.ceil(exp.horizon * fast / phase - 1e-9))
    steps = int(math.ceil(steps / align)) * align
    return steps + 1


def _concat_config(exp: Experiment, method: str) -> StepperConfig:
    scheme = exp.method_opt(method, "scheme")
    if scheme is None:
        order = parse_int(exp.method_opt(method, "order", "4"))
        if order not in SCHEME_FOR_ORDER:
            raise ConfigError(f"concatenated Magnus supports orders 1, 2, 4, got {order}")
        scheme = SCHEME_FOR_ORDER[order]
    if exp.method_opt(method, "n_steps") is not None:
        n_steps = parse_int(exp.method_opt(method, "n_steps"))
    else:
        n_steps = max(1, int(math.ceil(exp.horizon * exp.model.omega / DEFAULT_STEP_PHASE - 1e-9)))
    sps = parse_int(exp.method_opt(method, "samples_per_step", "1"))
    try:
        return StepperConfig(scheme, n_steps, exp.horizon, samples_per_step=sps)
    except ContractViolation as exc:
        raise ConfigError(str(exc)) from None


def run_method(exp: Experiment, method: str, align: int = 1) -> Trajectory:
    """Integrate the experiment with one method."""
    model, psi0 = exp.model, exp.psi0
    if method == "rk4":
        return rk4_propagate(model, psi0, Rk4Config(_rk4_points(exp, method, align), exp.horizon))
    if method == "magnus_concat":
        return magnus_propagate(model, _concat_config(exp, method), psi0)
    if method == "magnus_single":
        order = parse_int(exp.method_opt(method, "order", "4"))
        if not 1 <= order <= 4:
            raise ConfigError(f"single-interval Magnus supports orders 1..4, got {order}")
        phase = parse_number(exp.method_opt(method, "phase_step", "0.01"))
        return magnus_single_interval(model, psi0, exp.horizon, order, phase)
    if method == "picard":
        return _run_picard(exp, method)
    raise ConfigError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")


def _run_picard(exp: Experiment, method: str) -> Trajectory:
    model = exp.model
    order = parse_int(exp.method_opt(method, "order", "3"))
    analytic = parse_bool(exp.method_opt(method, "analytic", "false"))
    phase = parse_number(exp.method_opt(method, "phase_step", "0.01"))
    if phase > MAX_PHASE_STEP:
        raise ConfigError(f"Picard grid too coarse: omega*h={phase} > {MAX_PHASE_STEP}")
    if order < 0:
        raise ConfigError("Picard order must be >= 0")
    fast = max(model.omega, model.rate)
    grid = TimeGrid.with_max_step(0.0, exp.horizon, phase / fast, multiple_of=2)
    if analytic:
        if order > 3:
            raise ConfigError(f"closed-form Picard is limited to order 3, got {order}; use numeric Picard")
        if exp.model_name == "semiclassical":
            fn, p = picard_semiclassical_analytic, model.params
        elif exp.model_name == "quantum":
            fn, p = picard_quantum_analytic, model.params
        else:
            raise ConfigError("closed-form Picard exists only for the qubit models")
        try:
            total = sum(fn(p, k, grid.times).amplitudes for k in range(order + 1))
        except ContractViolation as exc:
            raise ConfigError(str(exc)) from None
        return Trajectory(grid.times, total, model.basis)
    exp_ = picard_numeric(model, exp.psi0, order, grid)
    return Trajectory(grid.times, exp_.partial_sum(None, order).amplitudes, model.basis, list(exp_.warnings))


# ---- output --------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def config_echo(cfg: dict) -> list:
    return [f"# {k} = {cfg[k]}" for k in sorted(cfg)]


def write_csv(path: str, cfg: dict, header: list, rows) -> None:
    lines = config_echo(cfg)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class RunRecord:
    config: dict
    files: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    fit: tuple | None = None
    peaks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def numerical_breach(self) -> bool:
        return any(("truncation" in w.lower() or "unitarity" in w.lower() or "norm drift" in w.lower()) for w in self.warnings)


def _observable_series(traj: Trajectory, tag: str) -> ObservableSeries:
    return observable(traj, tag)


def _carrier(exp: Experiment) -> float:
    return exp.model.omega if exp.model_name == "mathieu" else 2.0 * exp.model.omega


def run_experiment(cfg: dict, out_dir: str = ".") -> RunRecord:
    exp = build_experiment(cfg)
    methods = parse_list(cfg.get("method", "rk4"))
    if len(methods) != 1:
        raise ConfigError("`run` takes a single method; use `compare` for several")
    method = methods[0]
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")
    traj = run_method(exp, method)
    rec = RunRecord(cfg, warnings=list(traj.warnings))
    stride = parse_int(cfg.get("output.stride", "1"))
    series = {o: _observable_series(traj, o) for o in exp.observables}
    path = os.path.join(out_dir, "trajectory.csv")
    idx = range(0, len(traj.times), max(stride, 1))
    write_csv(path, cfg, ["t"] + exp.observables, ([traj.times[i]] + [series[o].values[i] for o in exp.observables] for i in idx))
    rec.files.append(path)
    if parse_bool(cfg.get("spectrum", "false")):
        tag = cfg.get("spectrum.observable", exp.observables[0])
        if tag not in series:
            raise ConfigError(f"spectrum.observable {tag!r} is not among the observables")
        pad = cfg.get("spectrum.pad", "none")
        pad = None if pad == "none" else ("pow2" if pad == "pow2" else parse_int(pad))
        spec = fft_spectrum(
            series[tag], window=cfg.get("spectrum.window", "hann"), pad=pad, unit=exp.model.rate
        )
        peaks = detect_peaks(spec, rel_threshold=parse_number(cfg.get("spectrum.threshold", "1e-6")), carrier=_carrier(exp))
        path = os.path.join(out_dir, "spectrum.csv")
        write_csv(
            path,
            cfg,
            ["w", "w_over_Omega", "abs_F", "re_F", "im_F"],
            zip(spec.freqs, spec.scaled_freqs, spec.magnitude, spec.amplitudes.real, spec.amplitudes.imag),
        )
        rec.files.append(path)
        fa = "" if peaks.fit_a is None else peaks.fit_a
        fb = "" if peaks.fit_b is None else peaks.fit_b
        path = os.path.join(out_dir, "peaks.csv")
        write_csv(path, cfg, ["w", "magnitude", "doublet_index", "fit_a", "fit_b"], ([p.freq, p.magnitude, p.doublet_index, fa, fb] for p in peaks.peaks))
        rec.files.append(path)
        rec.peaks = peaks.peaks
        rec.fit = (peaks.fit_a, peaks.fit_b)
        rec.warnings += peaks.notes
    return rec


def compare_methods(cfg: dict, out_dir: str = ".") -> RunRecord:
    exp = build_experiment(cfg)
    methods = parse_list(cfg.get("methods", cfg.get("method", "")))
    if len(methods) < 2:
        raise ConfigError("compare needs at least two methods")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose one of {', '.join(METHODS)}")
    # make RK4 grids land on every step boundary of the concatenated runs
    align = 1
    for m in methods:
        if m == "magnus_concat":
            c = _concat_config(exp, m)
            align = math.lcm(align, c.n_steps * c.samples_per_step)
    trajs = {m: run_method(exp, m, align) for m in methods}
    ends = {m: tr.times[-1] for m, tr in trajs.items()}
    if max(ends.values()) - min(ends.values()) > 1e-9 * exp.horizon:
        raise ConfigError(f"methods end at different times: {ends}")
    base = min(trajs, key=lambda m: len(trajs[m].times))
    t = trajs[base].times
    rec = RunRecord(cfg)
    for m, tr in trajs.items():
        rec.warnings += [f"{m}: {w}" for w in tr.warnings]
    cols, header = [], ["t"]
    for o in exp.observables:
        vals = {m: np.interp(t, tr.times, observable(tr, o).values) for m, tr in trajs.items()}
        for m in methods:
            header.append(f"{o}[{m}]")
            cols.append(vals[m])
        for i, a in enumerate(methods):
            for b in methods[i + 1 :]:
                d = np.abs(vals[a] - vals[b])
                header.append(f"absdiff_{o}[{a}-{b}]")
                cols.append(d)
                rec.summary[f"{o}[{a}-{b}]"] = float(d.max())
    rows = [[t[k]] + [c[k] for c in cols] for k in range(t.size)]
    sup = ["sup"]
    for h, c in zip(header[1:], cols):
        sup.append(float(np.max(c)) if h.startswith("absdiff_") else "")
    rows.append(sup)
    path = os.path.join(out_dir, "compare.csv")
    write_csv(path, cfg, header, rows)
    rec.files.append(path)
    return rec


def run_sweep(cfg: dict, out_dir: str = ".") -> RunRecord:
    kind = cfg.get("sweep.kind")
    if kind not in ("photon_surface", "peak_time"):
        raise ConfigError("sweep.kind must be photon_surface or peak_time")
    if cfg.get("model", "quantum") != "quantum":
        raise ConfigError("sweeps run on the quantum model")
    omega = parse_number(cfg.get("model.omega", "1"))
    n_max = parse_int(cfg.get("model.n_max", "32"))
    couplings = parse_range(cfg.get("sweep.couplings", "0.02:0.5:9")) * omega
    if np.any(couplings <= 0):
        raise ConfigError("sweep couplings must be positive")
    rec = RunRecord(cfg)
    path = os.path.join(out_dir, "sweep.csv")
    if kind == "photon_surface":
        tgrid = parse_range(cfg.get("sweep.t_over_swap", "0:2:41"))
        surf = sweep_photon_surface(couplings, tgrid, omega, n_max)
        rec.warnings += surf.warnings
        rows = (
            [lam / omega, x, surf.exact[i, j], surf.picard4[i, j], surf.difference[i, j]]
            for i, lam in enumerate(surf.couplings)
            for j, x in enumerate(surf.t_over_swap)
        )
        write_csv(path, cfg, ["coupling_over_omega", "t_over_swap", "exact", "picard4", "difference"], rows)
    else:
        rows = []
        for lam in couplings:
            pred = dce_prediction(lam, omega)
            t, n_exact, _, warn = photon_runs(lam, pred.swap_time, omega, n_max, picard_order=0)
            rec.warnings += [f"coupling {lam:g}: {w}" for w in warn]
            ext = dce_peak_extraction(ObservableSeries(t, n_exact, "mean_photons"), lam)
            if not ext.found:
                rec.warnings.append(f"coupling {lam:g}: no photon peak found")
                continue
            ratio = ext.peak_time / pred.swap_time
            rows.append([lam / omega, ratio, lam / omega, ratio / (lam / omega) - 1, ext.peak_value, pred.peak_value, ext.frequency])
        write_csv(
            path,
            cfg,
            ["coupling_over_omega", "tau_p_over_tau_s", "predicted", "rel_dev", "peak_value", "predicted_value", "frequency"],
            rows,
        )
    rec.files.append(path)
    return rec


def gnuplot_script(rec: RunRecord, command: str) -> str:
    lines = ["set datafile separator ','", "set key outside"]
    names = [os.path.basename(f) for f in rec.files]
    if "trajectory.csv" in names:
        lines += ["set terminal pngcairo size 900,500", "set output 'trajectory.png'", "set xlabel 't'",
                  "plot 'trajectory.csv' using 1:2 with lines title columnhead(2)"]
    if "spectrum.csv" in names:
        lines += ["set output 'spectrum.png'", "set logscale y", "set xlabel 'w / rate'", "set ylabel '|F|'",
                  "plot 'spectrum.csv' using 2:3 with lines title '|F|'", "unset logscale y"]
    if "compare.csv" in names:
        lines += ["set terminal pngcairo size 900,500", "set output 'compare.png'", "set xlabel 't'",
                  "plot for [i=2:3] 'compare.csv' using 1:i with lines title columnhead(i)"]
    if "sweep.csv" in names:
        lines += ["set terminal pngcairo size 900,500", "set output 'sweep.png'",
                  "plot 'sweep.csv' using 1:2 with points title columnhead(2)"]
    return "\n".join(lines) + "\n"


def presets_text() -> str:
    out = []
    for name in sorted(PRESETS, key=lambda s: int(s[3:])):
        desc, binding = PRESETS[name]
        out.append(f"{name}: {desc}")
        for k in sorted(binding):
            out.append(f"    {k} = {binding[k]}")
    return "\n".join(out) + "\n"


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabi-expansions", description="Picard and Magnus expansions for Rabi-type models")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run one experiment"), ("compare", "compare several methods"), ("sweep", "parameter sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", nargs="?", help="key = value config file")
        p.add_argument("--preset", help="start from a named preset")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--gnuplot-script", action="store_true", help="also write plot.gp")
    sub.add_parser("presets", help="list presets")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        sys.stdout.write(presets_text())
        return EXIT_OK
    try:
        cfg = read_config(args.config) if args.config else {}
        if args.preset:
            cfg = resolve_preset({"figure": args.preset, **cfg})
        if not cfg:
            raise ConfigError("give a config file or --preset")
        os.makedirs(args.out, exist_ok=True)
        with warnings.catch_warnings():
            # integrators record these on the trajectory; reported below
            warnings.simplefilter("ignore", RuntimeWarning)
            if args.command == "run":
                rec = run_experiment(cfg, args.out)
            elif args.command == "compare":
                rec = compare_methods(cfg, args.out)
            else:
                rec = run_sweep(cfg, args.out)
        if args.gnuplot_script:
            path = os.path.join(args.out, "plot.gp")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(gnuplot_script(rec, args.command))
            rec.files.append(path)
    except (ConfigError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for w in rec.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for f in rec.files:
        print(f)
    if rec.fit and rec.fit[0] is not None:
        print(f"fit a={rec.fit[0]:.4f} b={rec.fit[1]:.4f}")
    for k, v in rec.summary.items():
        print(f"sup|diff| {k} = {v:.3e}")
    if rec.numerical_breach:
        print("error: numerical contract breached (see warnings)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
