#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# pathwave: proper-time path integrals for weakly anisotropic wave media
#
# Copyright 2016-2018 Ran Aroussi
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""
Scenario runner

    $ pathwave kernel-check --config scenarios/default.ini --out results

Every subcommand reads the ``[run]``, ``[medium]``, ``[anisotropy]`` and
``[perturbation]`` sections plus its own section of the INI file, writes
its CSV artifacts and a ``report.json`` into the output directory, and
exits 0 only when all of its built-in checks pass.
"""

import argparse
import configparser
import logging
import os
import sys
import time

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from pathwave import (
    __version__, kernels, paths, polarization, rays, spectral, tomography, tools
)
from pathwave.asynctools import multitasking
from pathwave.medium import make_standard_medium
from pathwave.errors import CausticError, ConfigError, PathwaveError

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__, logging.INFO)

SUBCOMMANDS = ("kernel-check", "mc-propagate", "ray-trace", "green-matrix",
               "spectral-run", "tomography")

POOL = "pathwave"
MAX_DUMP_ROWS = 10000
OPTION_PREFIX = "option_"

ENVIRONMENT = {"PATHWAVE_WORKERS": "workers", "PATHWAVE_SEED": "seed"}

DEFAULTS = {
    "run": {
        "seed": 0, "workers": 1, "out": "pathwave-output", "matrix_dump": False,
    },
    "medium": {
        "name": "homogeneous", "dimension": 3, "C0": 1.0, "epsilon": 0.0,
        "nu": 0.0, "g": 0.1, "axis": 1, "amplitude": -0.1, "width": 0.5,
        "center": "", "domain_min": "", "domain_max": "",
        "grid_base": "homogeneous", "grid_file": "", "grid_min": "-2",
        "grid_max": "2", "grid_points": 33, "interpolation_order": 1,
    },
    "anisotropy": {
        "kind": "zero", "a": 0.0, "b": 0.0, "g": 1.0, "axis": 1,
        "amplitude": 1.0, "seed": 0,
    },
    "perturbation": {
        "base": "homogeneous", "modes": "",
    },
    "kernel-check": {
        "s_values": "0.25, 0.5, 1.0, 2.0", "distances": "0.5, 1.0, 2.0",
        "lags": "0.5, 1.0, 1.5", "reg_width": 0.02, "ck_tolerance": 1e-3,
        "exact_tolerance": 1e-12, "area_tolerance": 0.02,
    },
    "mc-propagate": {
        "x": "0.5, 0, 0", "x_src": "0, 0, 0", "s": 0.5, "steps": 16,
        "n_paths": 10000, "dump_paths": False, "z_limit": 3.0,
    },
    "ray-trace": {
        "x": "1, 0.5, 0", "x_src": "0, 0, 0", "s": 1.0, "n_steps": 100,
        "tol": 1e-10, "probe_multipath": False, "variation_step": 1e-4,
        "n_variations": 20, "stationarity_tolerance": 1e-6,
    },
    "green-matrix": {
        "x": "1, 0, 0", "x_src": "0, 0, 0", "t_min": 0.5, "t_max": 1.5,
        "n_times": 101, "reg_width": 0.02, "n_steps": 100,
        "peak_tolerance": 0.01,
    },
    "spectral-run": {
        "box": "1, 1, 1", "M_cut": 1100.0, "dt": 3e-3, "t_max": 0.6,
        "n_times": 121, "smoothing": 0.08, "x": "0.75, 0.5, 0.5",
        "x_src": "0.5, 0.5, 0.5", "energy_tolerance": 1e-2,
    },
    "tomography": {
        "k": 1, "k_max": 2.0, "extent": 2.0, "frequency": 2.0, "speed": 1.0,
        "scale_b": 10.0, "epsilon": 1e-3, "regularization": 0.0,
        "van_vleck": True, "n_steps": 100, "method": "ray", "noise": 0.0,
        "sweep": False, "n_probe": 5, "survey_tries": 16,
        "recovery_tolerance": 1e-6, "noisy_tolerance": 0.2,
    },
}

SHARED_SECTIONS = ("run", "medium", "anisotropy", "perturbation")


# =============================================
# configuration
# =============================================

def _coerce(raw, default, field):
    """ convert a raw (string) value to the type of its default """
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        value = str(raw).strip().lower()
        if value not in configparser.ConfigParser.BOOLEAN_STATES:
            raise ConfigError("expected a boolean, got '%s'" % raw, field=field)
        return configparser.ConfigParser.BOOLEAN_STATES[value]
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except (TypeError, ValueError):
        raise ConfigError("expected a number, got '%s'" % raw, field=field)
    return str(raw).strip()


def _floats(text, field):
    values = [v.strip() for v in str(text).replace(";", ",").split(",")
              if v.strip()]
    if not values or not all(tools.is_number(v) for v in values):
        raise ConfigError("expected a comma separated list of numbers, "
                          "got '%s'" % text, field=field)
    return np.array([float(v) for v in values])


def _vector(text, field, dimension):
    vec = _floats(text, field)
    if vec.shape[0] != dimension:
        raise ConfigError("expected %d components, got %d"
                          % (dimension, vec.shape[0]), field=field)
    return vec


def _modes(text):
    """ ``k1,k2,k3 : amplitude [: phase]`` entries separated by ';' """
    modes = []
    for entry in [e for e in str(text).split(";") if e.strip()]:
        parts = entry.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError("bad mode '%s'" % entry.strip(),
                              field="perturbation.modes")
        mode = [list(_floats(parts[0], "perturbation.modes"))]
        mode += [float(_floats(p, "perturbation.modes")[0]) for p in parts[1:]]
        modes.append(mode)
    return modes


class ScenarioConfig():
    """
    Parsed scenario: defaults, then the INI file, then environment, then
    command-line flags

    :Parameters:
        subcommand : str
            one of ``SUBCOMMANDS``

    :Optional:
        sections : dict
            {section: {key: raw value}}; unknown sections or keys raise
            ConfigError naming ``section.key``
    """

    def __init__(self, subcommand, sections=None):
        if subcommand not in SUBCOMMANDS:
            raise ConfigError("unknown subcommand '%s' (expected one of %s)"
                              % (subcommand, ", ".join(SUBCOMMANDS)),
                              field="run.subcommand")
        self.subcommand = subcommand
        self.sections = {name: dict(values) for name, values in DEFAULTS.items()}
        for name, values in (sections or {}).items():
            self.update(name, values)

    def update(self, section, values):
        if section not in DEFAULTS:
            raise ConfigError("unknown section", field=section)
        for key, raw in values.items():
            field = "%s.%s" % (section, key)
            if key not in DEFAULTS[section]:
                raise ConfigError("unknown key", field=field)
            self.sections[section][key] = _coerce(raw, DEFAULTS[section][key],
                                                  field)
        run = self.sections["run"]
        if run["workers"] < 0:
            raise ConfigError("workers must be non-negative", field="run.workers")
        if run["seed"] < 0:
            raise ConfigError("seed must be non-negative", field="run.seed")

    @classmethod
    def load(cls, subcommand, path=None, overrides=None, environ=None,
             options=None):
        """
        :Optional:
            path : str
                INI file
            overrides : dict
                ``[run]`` values given on the command line
            environ : mapping
                defaults to ``os.environ``
            options : dict
                values for the subcommand's own section given on the
                command line
        """
        sections = {}
        if path is not None:
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                found = parser.read(path, encoding="utf-8")
            except configparser.Error as e:
                raise ConfigError(str(e), field="run.config")
            if not found:
                raise ConfigError("cannot read '%s'" % path, field="run.config")
            sections = {name: dict(parser[name]) for name in parser.sections()}

        config = cls(subcommand, sections)
        environ = os.environ if environ is None else environ
        config.update("run", {key: environ[var] for var, key in ENVIRONMENT.items()
                              if var in environ})
        config.update("run", overrides or {})
        config.update(subcommand, options or {})
        return config

    @property
    def seed(self):
        return self.sections["run"]["seed"]

    @property
    def workers(self):
        return self.sections["run"]["workers"]

    @property
    def out(self):
        return self.sections["run"]["out"]

    @property
    def options(self):
        return tools.make_object(**self.sections[self.subcommand])

    def medium(self):
        descriptor = {k: (v if v != "" else None)
                for k, v in self.sections["medium"].items()}
        descriptor["anisotropy"] = dict(self.sections["anisotropy"])
        if descriptor["name"] == "fourier-perturbed":
            descriptor["base"] = self.sections["perturbation"]["base"]
            descriptor["modes"] = _modes(self.sections["perturbation"]["modes"])
        return make_standard_medium(descriptor)

    def as_dict(self):
        names = SHARED_SECTIONS + (self.subcommand,)
        return {"subcommand": self.subcommand,
                "sections": {name: dict(self.sections[name]) for name in names}}


class RunReport():
    """ machine readable outcome of one scenario run """

    def __init__(self, config, version=__version__):
        self.subcommand = config.subcommand
        self.config = config.as_dict()
        self.version = version
        self.seed = config.seed
        self.results = {}
        self.checks = {}
        self.files = []
        self.timing = {}
        self.error = None

    def check(self, name, passed):
        self.checks[name] = bool(passed)

    @property
    def passed(self):
        return all(self.checks.values())

    def as_dict(self):
        return {
            "pathwave": self.version,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "config": self.config,
            "results": self.results,
            "checks": self.checks,
            "passed": self.passed,
            "files": self.files,
            "error": self.error,
            # the only key that changes between identical runs
            "timing": self.timing,
        }


def _write_table(config, report, name, df):
    tools.write_csv(df, os.path.join(config.out, name), report.version,
                    report.config)
    report.files.append(name)


# =============================================
# subcommands
# =============================================

def _kernel_check(config, report):
    opts = config.options
    medium = config.medium()
    n = medium.dimension
    origin = np.zeros(n)
    axis = np.eye(n)[0]
    c0 = float(medium.velocity(origin))
    s_values = _floats(opts.s_values, "kernel-check.s_values")
    distances = _floats(opts.distances, "kernel-check.distances")
    lags = _floats(opts.lags, "kernel-check.lags")

    store = tools.DataStore(os.path.join(config.out, "kernels.csv"),
                            report.version, report.config)

    def record(kernel, value, s=np.nan, distance=np.nan, lag=np.nan, i=0, k=0):
        value = complex(value)
        store.record(kernel=kernel, s=s, distance=distance, lag=lag, i=i, k=k,
                     real=value.real, imag=value.imag, modulus=abs(value))

    for s in s_values:
        for lag in lags:
            record("free_time", kernels.free_time_kernel(lag, 0., s), s=s, lag=lag)
        for d in distances:
            x = origin + d * axis
            record("homogeneous_space",
                   kernels.homogeneous_space_kernel(x, origin, s, c0),
                   s=s, distance=d)
            for convention in kernels.CONVENTIONS:
                record("wkb_space:" + convention,
                       kernels.wkb_space_kernel(x, origin, s, medium.velocity,
                                                convention),
                       s=s, distance=d)
            amplitude = kernels.short_time_amplitude(x, origin, s, medium)
            for (i, k), value in np.ndenumerate(amplitude):
                record("short_time_amplitude", value, s=s, distance=d, i=i, k=k)
    for d in distances:
        for lag in lags:
            record("retarded_green", kernels.retarded_green_homogeneous(
                origin + d * axis, origin, lag, 0., c0, opts.reg_width),
                distance=d, lag=lag)

    store.save()
    report.files.append("kernels.csv")

    ck = max(kernels.chapman_kolmogorov_error(lags[-1], 0., s1, s2)
             for s1, s2 in zip(s_values[:-1], s_values[1:])) \
        if len(s_values) > 1 else 0.
    separability = max(kernels.separability_error(origin + d / np.sqrt(n),
                                                  origin, s, c0)
                       for s in s_values for d in distances)
    linearity = max(kernels.amplitude_linearity_error(origin + d * axis, origin,
                                                      s, medium)
                    for s in s_values for d in distances)
    area = max(kernels.green_integral_error(d, c0, opts.reg_width)
               for d in distances)

    report.results.update(rows=len(store), chapman_kolmogorov_error=ck,
                          separability_error=separability,
                          linearity_error=linearity, green_area_error=area)
    report.check("chapman_kolmogorov", ck <= opts.ck_tolerance)
    report.check("separability", separability <= opts.exact_tolerance)
    report.check("amplitude_linearity", linearity <= opts.exact_tolerance)
    report.check("green_area", area <= opts.area_tolerance)


def _mc_propagate(config, report):
    opts = config.options
    medium = config.medium()
    n = medium.dimension
    x = _vector(opts.x, "mc-propagate.x", n)
    x_src = _vector(opts.x_src, "mc-propagate.x_src", n)

    estimate, samples = paths.euclidean_propagator_mc(
        x, x_src, opts.s, medium, opts.steps, opts.n_paths, config.seed,
        return_samples=True, pool=POOL)
    report.results.update(estimate=estimate.mean, stderr=estimate.standard_error,
                          normalization=estimate.normalization,
                          n_samples=estimate.n_samples,
                          seed_record=estimate.seed_record,
                          analytic_reference=None, z_score=None)

    if medium.is_homogeneous:
        reference = paths.analytic_euclidean_kernel(x, x_src, opts.s,
                                                    medium.velocity.constant)
        z = (np.real(estimate.mean) - reference) / estimate.standard_error \
            if estimate.standard_error > 0 else 0.
        report.results.update(analytic_reference=reference, z_score=float(z))
        report.check("z_score", abs(z) < opts.z_limit)

    if opts.dump_paths:
        shown = samples[:MAX_DUMP_ROWS]
        _write_table(config, report, "mc_paths.csv", pd.DataFrame({
            "path": np.arange(shown.shape[0]),
            "real": np.real(shown), "imag": np.imag(shown)}))


def _ray_trace(config, report):
    log = logging.getLogger(__name__)
    opts = config.options
    medium = config.medium()
    n = medium.dimension
    x = _vector(opts.x, "ray-trace.x", n)
    x_src = _vector(opts.x_src, "ray-trace.x_src", n)

    ray = rays.two_point_ray(x, x_src, medium, s=opts.s, n_steps=opts.n_steps,
                             tol=opts.tol, probe_multipath=opts.probe_multipath)
    action = rays.ray_action(ray, medium)
    report.results.update(ray.summary())
    report.results.update(action=action, prefactor=None, caustic=None)
    try:
        report.results["prefactor"] = rays.van_vleck_prefactor(ray, medium)
    except CausticError as e:
        log.warning("ray passes a caustic: %s", e)
        report.results["caustic"] = e.context()

    # central differences of the action along smooth random interior variations
    rng = np.random.default_rng(config.seed)
    variations = []
    for _ in range(opts.n_variations):
        amplitudes = rng.standard_normal((3, n))
        amplitudes /= np.linalg.norm(amplitudes)
        offset, rate = rays.sine_variation(ray, amplitudes)
        variations.append(rays.first_variation(ray, offset, rate, medium,
                                               h=opts.variation_step))
    variation = max(variations) if variations else 0.
    report.results["first_variation"] = variation

    columns = {"sigma": ray.sigma}
    columns.update({"x%d" % (d + 1): ray.positions[:, d] for d in range(n)})
    columns.update({"v%d" % (d + 1): ray.velocities[:, d] for d in range(n)})
    _write_table(config, report, "ray.csv", pd.DataFrame(columns))

    report.check("converged", ray.converged)
    report.check("stationarity", variation <= opts.stationarity_tolerance)


def _green_matrix(config, report):
    opts = config.options
    medium = config.medium()
    n = medium.dimension
    x = _vector(opts.x, "green-matrix.x", n)
    x_src = _vector(opts.x_src, "green-matrix.x_src", n)
    quad = polarization.QuadratureConfig(reg_width=opts.reg_width,
                                         n_steps=opts.n_steps)

    t = np.linspace(opts.t_min, opts.t_max, opts.n_times)
    green = np.asarray(polarization.factorized_green(x, x_src, t, 0., medium,
                                                     quad, pool=POOL))
    index = np.indices(green.shape).reshape(3, -1)
    _write_table(config, report, "green.csv", pd.DataFrame({
        "t": t[index[0]], "i": index[1], "k": index[2],
        "real": np.real(green).ravel(), "imag": np.imag(green).ravel()}))

    trace = np.trace(green, axis1=1, axis2=2) / n
    report.results.update(n_times=len(t), peak=float(np.max(np.abs(trace))),
                          peak_time=float(t[np.argmax(np.abs(trace))]),
                          mean_diagonal_area=float(trapezoid(trace, t)))
    report.check("finite", np.all(np.isfinite(green)))

    if medium.is_homogeneous and (medium.epsilon == 0 or medium.anisotropy.is_zero):
        c0 = medium.velocity.constant
        arrival = float(np.linalg.norm(x - x_src)) / c0
        at_arrival = polarization.factorized_green(x, x_src, arrival, 0., medium,
                                                   quad)
        reference = kernels.retarded_green_homogeneous(x, x_src, arrival, 0., c0,
                                                       opts.reg_width)
        error = abs(at_arrival[0, 0] - reference) / reference
        report.results.update(shell_peak=at_arrival[0, 0],
                              shell_reference=reference, shell_error=error)
        report.check("shell_peak", error <= opts.peak_tolerance)


def _spectral_run(config, report):
    opts = config.options
    medium = config.medium()
    n = medium.dimension
    box = spectral.BoxDomain(_floats(opts.box, "spectral-run.box"))
    if box.dimension != n:
        raise ConfigError("box has %d sides but the medium is %d-d"
                          % (box.dimension, n), field="spectral-run.box")
    x = _vector(opts.x, "spectral-run.x", n)
    x_src = _vector(opts.x_src, "spectral-run.x_src", n)

    basis = spectral.dirichlet_eigenbasis(box, opts.M_cut)
    operator = spectral.galerkin_operator(basis, medium)
    t_grid = np.linspace(0., opts.t_max, opts.n_times)
    response = spectral.spectral_green(x, x_src, t_grid, medium, basis, opts.dt,
                                       smoothing=opts.smoothing, pool=POOL)

    columns = {"t": t_grid}
    for k in range(n):
        for i in range(n):
            columns["u%d_%d" % (k + 1, i + 1)] = response[:, k, i]
    _write_table(config, report, "spectral.csv", pd.DataFrame(columns))

    # energy bookkeeping of the first source polarization
    state = spectral.SpectralState.zeros(basis, n)
    state.v[:, 0] = spectral.delta_source_coeffs(x_src, basis, opts.smoothing)
    n_steps = max(1, int(np.ceil(opts.t_max / opts.dt)))
    history = spectral.evolve(state, medium, opts.dt, n_steps, operator=operator)

    arrival = spectral.first_arrival(t_grid, response[:, 0, 0])
    report.results.update(
        n_modes=len(basis), dt=opts.dt, c_max=operator.c_max,
        stability_bound=spectral.stability_bound(basis, operator.c_max),
        initial_energy=history.energy[0], final_energy=history.energy[-1],
        energy_drift=history.energy_drift, arrival=arrival,
        expected_arrival=None)

    if medium.lossless:
        report.check("energy", history.energy_drift <= opts.energy_tolerance)
    if medium.is_homogeneous:
        c0 = medium.velocity.constant
        expected = float(np.linalg.norm(x - x_src)) / c0
        slack = 2. * opts.dt + 2. * opts.smoothing / c0 + t_grid[1] - t_grid[0]
        report.results["expected_arrival"] = expected
        report.check("arrival", abs(arrival - expected) <= slack)


def _tomography(config, report):
    log = logging.getLogger(__name__)
    opts = config.options
    reference = config.medium()
    if reference.dimension != 3:
        raise ConfigError("tomography runs in three dimensions",
                          field="medium.dimension")
    if opts.method not in tomography.METHODS:
        raise ConfigError("unknown method '%s'" % opts.method,
                          field="tomography.method")
    cfg = tomography.TomographyConfig(
        frequency=opts.frequency, speed=opts.speed, scale_b=opts.scale_b,
        epsilon=opts.epsilon, reference=reference,
        regularization=opts.regularization, van_vleck=opts.van_vleck,
        n_steps=opts.n_steps)

    wavenumbers = tomography.wavenumber_set(opts.k, opts.k_max)
    survey = tomography.select_survey(opts.k, wavenumbers, cfg, opts.extent,
                                      config.seed, opts.survey_tries,
                                      opts.method, POOL)
    truth_seed, noise_seed = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(truth_seed)
    truth = tomography.symmetrize_coefficients(
        rng.standard_normal(len(wavenumbers)) +
        1j * rng.standard_normal(len(wavenumbers)))

    clean = tomography.synthesize_data(survey, wavenumbers, cfg, truth,
                                       method=opts.method, pool=POOL)
    data = tomography.add_noise(clean, opts.noise, noise_seed)

    if opts.sweep:
        matrix, rows, failed = tomography.coefficient_matrix(
            survey, wavenumbers, cfg, opts.method, POOL)
        used = data[rows]
        sweep = tomography.lcurve_sweep(matrix, used)
        noise_norm = np.linalg.norm(used - clean[rows]) if opts.noise else None
        weight = tomography.select_weight(sweep, noise_norm)
        log.info("selected regularization weight %.3g", weight)
        solution, condition, residual = tomography.solve_system(matrix, used,
                                                                weight)
        system = tomography.TomographySystem(matrix, used, solution, rows, failed,
                                             condition, residual, weight,
                                             wavenumbers)
        _write_table(config, report, "lcurve.csv",
                     sweep.drop(columns="solution"))
    else:
        system = tomography.assemble_and_invert(survey, wavenumbers, cfg, data,
                                                opts.method, POOL)

    frame = system.solution_frame()
    frame["truth_re"], frame["truth_im"] = truth.real, truth.imag
    _write_table(config, report, "solution.csv", frame)

    axis = np.linspace(-opts.extent, opts.extent, opts.n_probe)
    nodes = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"),
                     axis=-1).reshape(-1, 3)
    solution = tomography.symmetrize_coefficients(system.solution)
    recovered = tomography.reconstruct_perturbation(solution, wavenumbers, nodes)
    exact = tomography.reconstruct_perturbation(truth, wavenumbers, nodes)
    _write_table(config, report, "reconstruction.csv", pd.DataFrame({
        "x1": nodes[:, 0], "x2": nodes[:, 1], "x3": nodes[:, 2],
        "recovered": recovered, "truth": exact}))

    if config.sections["run"]["matrix_dump"]:
        tools.write_matrix_dump(system.matrix, os.path.join(config.out, "matrix.bin"))
        report.files.append("matrix.bin")

    recovery = np.linalg.norm(solution - truth) / np.linalg.norm(truth)
    reconstruction = np.linalg.norm(recovered - exact) / np.linalg.norm(exact)
    report.results.update(system.summary())
    report.results.update(recovery_error=recovery,
                          reconstruction_error=reconstruction,
                          kappa=cfg.kappa, alpha=cfg.alpha)
    limit = opts.recovery_tolerance if opts.noise == 0 else opts.noisy_tolerance
    report.check("recovery", recovery <= limit)


RUNNERS = {
    "kernel-check": _kernel_check,
    "mc-propagate": _mc_propagate,
    "ray-trace": _ray_trace,
    "green-matrix": _green_matrix,
    "spectral-run": _spectral_run,
    "tomography": _tomography,
}


# =============================================
# entry points
# =============================================

def run_scenario(config):
    """
    Run one scenario and write its artifacts

    :Parameters:
        config : ScenarioConfig

    :Returns:
        report : RunReport
            also saved as ``report.json`` in the output directory
    """
    log = logging.getLogger(__name__)
    started, stamp = time.time(), tools.utc_timestamp()

    os.makedirs(config.out, exist_ok=True)
    multitasking.createPool(POOL, config.workers)

    report = RunReport(config)
    try:
        RUNNERS[config.subcommand](config, report)
    except PathwaveError as e:
        report.error = e.context()
        report.check("completed", False)
        raise
    finally:
        report.timing = {"started": stamp,
                         "elapsed": round(time.time() - started, 3)}
        report.files.append("report.json")
        tools.write_json(report.as_dict(),
                         os.path.join(config.out, "report.json"))

    log.info("%s finished in %.1fs: %s", config.subcommand,
             report.timing["elapsed"], "passed" if report.passed else "FAILED")
    return report


def main(argv=None):
    """ console entry point; returns the process exit status """
    log = logging.getLogger(__name__)

    parser = argparse.ArgumentParser(
        prog="pathwave",
        description='pathwave scenario runner',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    parser.add_argument('subcommand',
                        help='One of: %s' % ", ".join(SUBCOMMANDS))
    parser.add_argument('--config', default=None,
                        help='Path to a scenario INI file')
    parser.add_argument('--seed', default=None, type=int,
                        help='Master seed (overrides PATHWAVE_SEED)')
    parser.add_argument('--out', default=None,
                        help='Output directory')
    parser.add_argument('--workers', default=None, type=int,
                        help='Worker threads (overrides PATHWAVE_WORKERS)')

    # each key of the subcommand's section is also a flag
    first = argparse.ArgumentParser(add_help=False)
    first.add_argument('subcommand', nargs='?')
    for flag in ('--config', '--seed', '--out', '--workers'):
        first.add_argument(flag)
    subcommand = first.parse_known_args(argv)[0].subcommand
    if subcommand in SUBCOMMANDS:
        group = parser.add_argument_group('%s options' % subcommand)
        for key, default in DEFAULTS[subcommand].items():
            group.add_argument('--' + key.replace('_', '-'),
                               dest=OPTION_PREFIX + key,
                               default=argparse.SUPPRESS, metavar=key.upper(),
                               help='[%s] %s, default %s'
                               % (subcommand, key, default))

    cmd_args = parser.parse_args(argv)

    # only flags actually given override the file and the environment
    overrides = {arg: val for arg, val in vars(cmd_args).items()
                 if arg in ("seed", "out", "workers") and
                 val != parser.get_default(arg)}
    options = {arg[len(OPTION_PREFIX):]: val
               for arg, val in vars(cmd_args).items()
               if arg.startswith(OPTION_PREFIX) and val is not None}

    try:
        config = ScenarioConfig.load(cmd_args.subcommand, cmd_args.config,
                                     overrides, options=options)
        report = run_scenario(config)
    except PathwaveError as e:
        log.error("%s failed: %s", cmd_args.subcommand,
                  tools.config_echo(e.context()))
        return 2

    if not report.passed:
        log.warning("failed checks: %s", ", ".join(
            sorted(name for name, ok in report.checks.items() if not ok)))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
