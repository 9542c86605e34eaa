import numpy as np
import pytest

from rabi_expansions.cli import (
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    ConfigError,
    main,
    parse_config_text,
    parse_number,
    presets_text,
)


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _body(path):
    return [l for l in open(path).read().splitlines() if not l.startswith("#")]


def test_parse_number_expressions():
    assert parse_number("60*pi") == pytest.approx(60 * np.pi)
    assert parse_number("2**17 + 1") == 131073
    assert parse_number("sqrt(0.5)") == pytest.approx(0.5**0.5)
    with pytest.raises(ConfigError):
        parse_number("__import__('os')")


def test_config_parsing_and_preset_override():
    cfg = parse_config_text("figure = fig8\n# comment\nmethod.n_steps = 100  # fewer steps\n")
    assert cfg["method.n_steps"] == "100"
    assert cfg["model.rabi"] == "0.1"
    with pytest.raises(ConfigError):
        parse_config_text("no equals sign here")


def test_presets_listing_stable(capsys):
    assert main(["presets"]) == EXIT_OK
    first = capsys.readouterr().out
    main(["presets"])
    assert first == capsys.readouterr().out == presets_text()
    assert "fig8:" in first and "horizon.scaled = 60*pi" in first and "method.n_steps = 3000" in first
    assert "model.coupling = 0.12" in first and "magnus_concat.n_steps = 100" in first
    for name in ("fig1", "fig5", "fig6", "fig7", "fig10", "fig11"):
        assert f"{name}:" in first


def test_run_writes_csvs_and_is_reproducible(tmp_path):
    cfg = _write(tmp_path, "figure = fig8\nmethod.n_steps = 600\nhorizon.scaled = 12*pi\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out", str(out1), "--gnuplot-script"]) == EXIT_OK
    assert main(["run", cfg, "--out", str(out2)]) == EXIT_OK
    for name in ("trajectory.csv", "spectrum.csv", "peaks.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    assert _body(out1 / "spectrum.csv")[0] == "w,w_over_Omega,abs_F,re_F,im_F"
    assert _body(out1 / "peaks.csv")[0] == "w,magnitude,doublet_index,fit_a,fit_b"
    assert _body(out1 / "trajectory.csv")[0] == "t,re_cg,re_ce"
    assert open(out1 / "trajectory.csv").readline().startswith("# ")
    assert (out1 / "plot.gp").exists()


def test_echoed_config_reproduces_run(tmp_path):
    cfg = _write(tmp_path, "figure = fig10\nmethods = rk4\nmethod = magnus_concat\n")
    out = tmp_path / "a"
    assert main(["run", cfg, "--out", str(out)]) == EXIT_OK
    echo = "".join(l[2:] + "\n" for l in open(out / "trajectory.csv").read().splitlines() if l.startswith("# "))
    cfg2 = _write(tmp_path, echo, "echo.cfg")
    assert main(["run", cfg2, "--out", str(tmp_path / "b")]) == EXIT_OK
    assert (out / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_empty_observables_is_validation_error(tmp_path, capsys):
    cfg = _write(tmp_path, "figure = fig8\nobservables =\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "observable" in capsys.readouterr().err


def test_observable_must_fit_model(tmp_path):
    cfg = _write(tmp_path, "figure = fig8\nobservables = mean_photons\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_compare_needs_two_methods(tmp_path):
    cfg = _write(tmp_path, "figure = fig10\nmethods = rk4\n")
    assert main(["compare", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_analytic_picard_order_limit(tmp_path):
    cfg = _write(tmp_path, "model = semiclassical\nhorizon = 10\nmethod = picard\nmethod.order = 5\nmethod.analytic = true\nobservables = re_cg\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_coarse_picard_grid_rejected(tmp_path):
    cfg = _write(tmp_path, "model = semiclassical\nhorizon = 10\nmethod = picard\nmethod.phase_step = 0.2\nobservables = re_cg\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION


def _column(path, i):
    return np.array([float(l.split(",")[i]) for l in _body(path)[1:]])


def test_analytic_picard_matches_numeric(tmp_path):
    base = "model = quantum\nmodel.n_max = 6\nhorizon = 4\nmethod = picard\nmethod.order = 3\nobservables = re_c_g0\n"
    a = _write(tmp_path, base + "method.analytic = true\n", "a.cfg")
    b = _write(tmp_path, base, "b.cfg")
    assert main(["run", a, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", b, "--out", str(tmp_path / "b")]) == EXIT_OK
    va, vb = _column(tmp_path / "a" / "trajectory.csv", 1), _column(tmp_path / "b" / "trajectory.csv", 1)
    assert np.max(np.abs(va - vb)) < 1e-8


def test_truncation_breach_exit_code(tmp_path):
    cfg = _write(tmp_path, "model = quantum\nmodel.coupling = 0.5\nmodel.n_max = 3\nhorizon = 20\nmethod = rk4\nobservables = mean_photons\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path, "figure = fig10\nmethod = magnus_concat\n")
    assert main(["run", cfg, "--out", str(blocker / "sub")]) == EXIT_IO
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_IO


def test_compare_table(tmp_path):
    cfg = _write(tmp_path, "figure = fig10\n")
    assert main(["compare", cfg, "--out", str(tmp_path)]) == EXIT_OK
    body = _body(tmp_path / "compare.csv")
    assert body[0] == "t,re_c_g0[rk4],re_c_g0[magnus_concat],absdiff_re_c_g0[rk4-magnus_concat]"
    assert body[-1].startswith("sup,")
    assert float(body[-1].split(",")[-1]) < 1e-3
    assert len(body) == 1 + 101 + 1


def test_sweep_peak_time(tmp_path):
    cfg = _write(tmp_path, "model = quantum\nsweep.kind = peak_time\nsweep.couplings = 0.05, 0.1\n")
    assert main(["sweep", cfg, "--out", str(tmp_path)]) == EXIT_OK
    rows = _body(tmp_path / "sweep.csv")
    assert rows[0].startswith("coupling_over_omega,tau_p_over_tau_s")
    assert len(rows) == 3


def test_sweep_rejects_bad_kind(tmp_path):
    cfg = _write(tmp_path, "model = quantum\nsweep.kind = nope\n")
    assert main(["sweep", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_unknown_preset(tmp_path):
    assert main(["run", "--preset", "fig99", "--out", str(tmp_path)]) == EXIT_VALIDATION
