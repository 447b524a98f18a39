import json
import os
import tempfile

from nose.tools import eq_, ok_, assert_almost_equal
import numpy as np
import pandas as pd

from pathwave import cli, tools
from pathwave.errors import ConfigError


def _scenario(folder, text, name="scenario.ini"):
    path = os.path.join(folder, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _report(out):
    with open(os.path.join(out, "report.json"), encoding="utf-8") as fh:
        return json.load(fh)


def _table(out, name):
    return pd.read_csv(os.path.join(out, name), comment="#")


def _field(func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except ConfigError as e:
        return e.field
    raise AssertionError("expected a config error")


def _run(folder, subcommand, text=None, *flags):
    """ run a scenario into ``folder/out``; returns (exit status, out dir) """
    out = os.path.join(folder, "out")
    argv = [subcommand, "--out", out] + list(flags)
    if text is not None:
        argv += ["--config", _scenario(folder, text)]
    return cli.main(argv), out


def test_defaults():
    config = cli.ScenarioConfig("kernel-check")
    eq_(config.seed, 0)
    eq_(config.workers, 1)
    assert_almost_equal(config.options.reg_width, 0.02)
    eq_(set(config.as_dict()["sections"]),
        {"run", "medium", "anisotropy", "perturbation", "kernel-check"})
    medium = config.medium()
    eq_(medium.dimension, 3)
    ok_(medium.is_homogeneous)


def test_config_errors_name_their_field():
    eq_(_field(cli.ScenarioConfig, "warp-drive"), "run.subcommand")
    eq_(_field(cli.ScenarioConfig, "ray-trace", {"medium": {"colour": "red"}}),
        "medium.colour")
    eq_(_field(cli.ScenarioConfig, "ray-trace", {"telescope": {}}), "telescope")
    eq_(_field(cli.ScenarioConfig, "mc-propagate",
               {"mc-propagate": {"n_paths": "many"}}), "mc-propagate.n_paths")
    eq_(_field(cli.ScenarioConfig, "tomography",
               {"tomography": {"sweep": "maybe"}}), "tomography.sweep")
    eq_(_field(cli.ScenarioConfig, "ray-trace", {"run": {"workers": "-2"}}),
        "run.workers")


def test_precedence():
    """file < environment < command line"""
    with tempfile.TemporaryDirectory() as folder:
        path = _scenario(folder, "[run]\nseed = 3\nworkers = 2\n\n"
                                 "[medium]\nC0 = 2.0\n")
        config = cli.ScenarioConfig.load("ray-trace", path, environ={})
        eq_((config.seed, config.workers), (3, 2))
        eq_(config.sections["medium"]["C0"], 2.0)
        eq_(config.medium().velocity.constant, 2.0)

        config = cli.ScenarioConfig.load("ray-trace", path,
                                         environ={"PATHWAVE_SEED": "5"})
        eq_((config.seed, config.workers), (5, 2))

        config = cli.ScenarioConfig.load(
            "ray-trace", path, overrides={"seed": 7},
            environ={"PATHWAVE_SEED": "5", "PATHWAVE_WORKERS": "4"})
        eq_((config.seed, config.workers), (7, 4))

        eq_(_field(cli.ScenarioConfig.load, "ray-trace",
                   os.path.join(folder, "missing.ini")), "run.config")


def test_fourier_modes():
    with tempfile.TemporaryDirectory() as folder:
        path = _scenario(folder, "[medium]\nname = fourier-perturbed\n\n"
                                 "[perturbation]\n"
                                 "modes = 1,0,0 : 0.1 ; 0,1,0 : 0.05 : 0.5\n")
        medium = cli.ScenarioConfig.load("ray-trace", path, environ={}).medium()
        assert_almost_equal(float(medium.velocity(np.zeros(3))),
                            1.1 + 0.05 * np.cos(0.5), places=14)

        path = _scenario(folder, "[medium]\nname = fourier-perturbed\n\n"
                                 "[perturbation]\nmodes = 1,0,0\n", "bad.ini")
        config = cli.ScenarioConfig.load("ray-trace", path, environ={})
    eq_(_field(config.medium), "perturbation.modes")


def test_report_flags():
    report = cli.RunReport(cli.ScenarioConfig("ray-trace"))
    ok_(report.passed)
    report.check("one", True)
    report.check("two", np.bool_(False))
    ok_(not report.passed)
    eq_(report.as_dict()["checks"], {"one": True, "two": False})


def test_kernel_check():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "kernel-check")
        eq_(status, 0)
        with open(os.path.join(out, "kernels.csv"), encoding="utf-8") as fh:
            ok_(fh.readline().startswith("# pathwave "))
            ok_(fh.readline().startswith("# config: "))
        table = _table(out, "kernels.csv")
        report = _report(out)

    eq_(list(table.columns), ["kernel", "s", "distance", "lag", "i", "k",
                              "real", "imag", "modulus"])
    eq_(set(table["kernel"]), {"free_time", "homogeneous_space",
                               "wkb_space:homogeneous", "wkb_space:geodesic",
                               "short_time_amplitude", "retarded_green"})
    ok_(np.allclose(table["modulus"], np.hypot(table["real"], table["imag"])))
    ok_(report["passed"])
    eq_(report["subcommand"], "kernel-check")
    eq_(sorted(report["files"]), ["kernels.csv", "report.json"])
    ok_(report["results"]["chapman_kolmogorov_error"] < 1e-3)


def test_unknown_subcommand_exits_nonzero():
    with tempfile.TemporaryDirectory() as folder:
        ok_(_run(folder, "warp-drive")[0] != 0)


def test_module_error_exits_nonzero():
    """a time step above the stability bound is a config error"""
    with tempfile.TemporaryDirectory() as folder:
        status, _ = _run(folder, "spectral-run", "[spectral-run]\nM_cut = 100\n"
                                                 "dt = 1.0\n")
    eq_(status, 2)


def test_invalid_module_argument_exits_with_context():
    """n_paths below the minimum is a config error, not a traceback"""
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "mc-propagate", "[mc-propagate]\nn_paths = 50\n")
        report = _report(out)
    eq_(status, 2)
    eq_(report["error"]["error"], "ConfigError")
    eq_(report["error"]["field"], "n_paths")
    eq_(report["checks"], {"completed": False})
    ok_(not report["passed"])


def test_grid_medium_scenario():
    """a sampled constant grid traces the straight ray; bad orders exit 2"""
    text = ("[medium]\nname = grid\ngrid_base = homogeneous\nC0 = 1.5\n"
            "grid_points = 9\n")
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "ray-trace", text)
        report = _report(out)
        table = _table(out, "ray.csv")
    eq_(status, 0)
    eq_(report["error"], None)
    ok_(report["checks"]["stationarity"])
    ok_(np.allclose(table["x3"], 0., atol=1e-9))
    ok_(np.allclose(table["x2"], 0.5 * table["x1"], atol=1e-8))

    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "ray-trace",
                           text + "interpolation_order = 2\n")
        report = _report(out)
    eq_(status, 2)
    eq_(report["error"]["field"], "medium.interpolation_order")


def test_subcommand_flags_override_the_file():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "ray-trace",
                           "[ray-trace]\nn_steps = 80\nx = 1, 1, 0\n",
                           "--n-steps", "60", "--x", "0.5, 1, 0")
        report = _report(out)
        table = _table(out, "ray.csv")
    eq_(status, 0)
    eq_(report["config"]["sections"]["ray-trace"]["n_steps"], 60)
    eq_(report["config"]["sections"]["ray-trace"]["x"], "0.5, 1, 0")
    eq_(len(table), 61)
    assert_almost_equal(table["x1"].iloc[-1], 0.5, places=9)


def test_subcommand_flags_are_checked():
    with tempfile.TemporaryDirectory() as folder:
        eq_(_run(folder, "mc-propagate", None, "--n-paths", "many")[0], 2)
        try:
            _run(folder, "mc-propagate", None, "--reg-width", "0.1")
        except SystemExit as e:
            eq_(e.code, 2)
        else:
            raise AssertionError("a flag of another subcommand was accepted")


def test_mc_propagate():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "mc-propagate",
                           "[mc-propagate]\nn_paths = 4000\nsteps = 8\n"
                           "dump_paths = yes\n", "--seed", "11")
        report = _report(out)
        dumped = _table(out, "mc_paths.csv")
    eq_(status, 0)
    ok_(report["results"]["z_score"] is not None)
    ok_(abs(report["results"]["z_score"]) < 3)
    eq_(report["seed"], 11)
    eq_(len(dumped), 4000)


def test_mc_propagate_independent_of_workers():
    results = []
    for workers in ("1", "3"):
        with tempfile.TemporaryDirectory() as folder:
            _, out = _run(folder, "mc-propagate",
                          "[mc-propagate]\nn_paths = 3000\nsteps = 8\n",
                          "--workers", workers)
            results.append(_report(out)["results"])
    eq_(results[0], results[1])


def test_ray_trace_is_reproducible():
    scenario = ("[medium]\nname = gaussian-lens\namplitude = -0.2\n"
                "width = 1.0\n\n[ray-trace]\nx = 2, 0.3, 0\nx_src = -2, -0.1, 0\n")
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "ray-trace", scenario)
        with open(os.path.join(out, "ray.csv"), "rb") as fh:
            first_csv = fh.read()
        first = _report(out)

        _run(folder, "ray-trace", scenario)
        with open(os.path.join(out, "ray.csv"), "rb") as fh:
            second_csv = fh.read()
        second = _report(out)
        table = _table(out, "ray.csv")

    ok_(status in (0, 1))
    eq_(first_csv, second_csv)
    first.pop("timing")
    second.pop("timing")
    eq_(first, second)
    eq_(list(table.columns), ["sigma", "x1", "x2", "x3", "v1", "v2", "v3"])
    eq_(len(table), 101)
    ok_(first["checks"]["converged"])
    ok_(first["results"]["prefactor"] is not None)


def test_homogeneous_ray_is_stationary():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "ray-trace")
        report = _report(out)
    eq_(status, 0)
    eq_(report["results"]["prefactor"], 1.0)
    ok_(report["results"]["first_variation"] < 1e-9)


def test_green_matrix():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "green-matrix", "[green-matrix]\nt_min = 0.9\n"
                                                   "t_max = 1.1\nn_times = 11\n")
        table = _table(out, "green.csv")
        report = _report(out)
    eq_(status, 0)
    eq_(len(table), 11 * 9)
    eq_(list(table.columns), ["t", "i", "k", "real", "imag"])
    ok_(report["checks"]["shell_peak"])
    assert_almost_equal(report["results"]["peak_time"], 1.0, places=12)


def test_spectral_run():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "spectral-run",
                           "[spectral-run]\nM_cut = 300\ndt = 0.01\nt_max = 0.5\n"
                           "n_times = 51\nsmoothing = 0.15\n")
        table = _table(out, "spectral.csv")
        report = _report(out)
    eq_(status, 0)
    eq_(len(table), 51)
    eq_(list(table.columns)[:3], ["t", "u1_1", "u1_2"])
    ok_(report["checks"]["energy"] and report["checks"]["arrival"])
    assert_almost_equal(report["results"]["expected_arrival"], 0.25, places=12)
    ok_(report["results"]["dt"] < report["results"]["stability_bound"])


def test_tomography_inverse_crime():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "tomography",
                           "[run]\nmatrix_dump = true\n\n[tomography]\nk = 1\n")
        report = _report(out)
        solution = _table(out, "solution.csv")
        nodes = _table(out, "reconstruction.csv")
        matrix = tools.read_matrix_dump(os.path.join(out, "matrix.bin"))
    eq_(status, 0)
    ok_(report["results"]["recovery_error"] < 1e-6)
    ok_(report["results"]["reconstruction_error"] < 1e-6)
    eq_(report["results"]["failed_pairs"], [])
    ok_(np.isfinite(report["results"]["condition_number"]))
    eq_(len(solution), 9)
    ok_(np.allclose(solution["re"], solution["truth_re"], atol=1e-6))
    eq_(len(nodes), 125)
    eq_(matrix.shape, (9, 9))


def test_tomography_noisy_sweep():
    with tempfile.TemporaryDirectory() as folder:
        status, out = _run(folder, "tomography",
                           "[tomography]\nnoise = 0.001\nsweep = on\n")
        report = _report(out)
        sweep = _table(out, "lcurve.csv")
    eq_(status, 0)
    ok_(report["results"]["regularization"] > 0)
    ok_("lcurve.csv" in report["files"])
    eq_(list(sweep.columns), ["weight", "residual_norm", "solution_norm"])


def test_shipped_scenario_matches_defaults():
    path = os.path.join(os.path.dirname(__file__), "..", "..", "scenarios",
                        "default.ini")
    for subcommand in cli.SUBCOMMANDS:
        config = cli.ScenarioConfig.load(subcommand, path, environ={})
        eq_(config.sections, cli.DEFAULTS)
