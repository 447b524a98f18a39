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
First-Born scalar tomography on a source/receiver survey.

The perturbation 1/n1**2 = (2 pi)**-1.5 sum_j V_j exp(i k_j.x) is sampled on
a conjugate-symmetric wavevector lattice, the scattered field is linear in
the V_j, and the (2k+1)**2 survey samples are inverted by least squares.

Two forward models are available:

``ray``
    stationary phase at the two-point ray of the reference medium with
    the Van Vleck prefactor. A ray of proper time s is the s = 1 ray run
    at speed 1/s, so its action is S1/s and the proper-time integral has
    the closed form 2 (S1/4a)**(-3/4) K_{3/2}(-i sqrt(a S1)).
``euclidean``
    the Wick-rotated field of a homogeneous reference, estimated with
    Brownian bridges or evaluated in closed form with Gaussian dressing
    exp(-|k|**2 C0**2 sigma (s - sigma) / s) of each plane wave.
"""

import logging
import sys
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.integrate import simpson
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation
from scipy.special import kv

from pathwave import kernels, rays, tools
from pathwave.asynctools import multitasking, blocks
from pathwave.medium import (
    FOURIER_NORM, Medium, RefractionDecomposition, VelocityField
)
from pathwave.paths import (
    BLOCK_SIZE, McEstimate, proper_time_quadrature, sample_bridges
)
from pathwave.errors import (
    BoundaryValueError, CausticError, ConfigError, IllConditionedError,
    IntegrationError, SymmetryError, UnsupportedConfigurationError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

METHODS = ("ray", "euclidean")
CONDITION_LIMIT = 1e12
EUCLIDEAN_NODES = 64
SURVEY_TRIES = 16
EUCLIDEAN_MARGIN = 50.

PairKernel = namedtuple("PairKernel", [
    "p", "q", "prefactor", "nodes", "weights", "ray", "van_vleck"])

CrossCheck = namedtuple("CrossCheck", ["estimate", "reference", "z_score"])


class TomographyConfig():
    """
    Constants of the scalar survey

    :Optional:
        frequency : float
            w > 0
        speed : float
            background speed C > 0
        scale_b : float
            dimensionless scale B > 0
        epsilon : float
            perturbation strength
        reference : Medium
            reference medium, n0 = 1 / C0 (homogeneous C0 = 1 by default)
        regularization : float
            Tikhonov weight >= 0 (0 reproduces plain least squares)
        van_vleck : bool
            include the one-loop prefactor in ray entries
        n_steps : int
            ray discretization
    """

    def __init__(self, frequency=2.0, speed=1.0, scale_b=10.0, epsilon=1e-3,
                 reference=None, regularization=0.0, van_vleck=True, n_steps=100):
        for name, value in (("frequency", frequency), ("speed", speed),
                            ("scale_b", scale_b)):
            if not value > 0:
                raise ConfigError("%s must be positive" % name,
                                  field="tomography.%s" % name)
        if regularization < 0:
            raise ConfigError("regularization must be non-negative",
                              field="tomography.regularization")
        self.frequency = float(frequency)
        self.speed = float(speed)
        self.scale_b = float(scale_b)
        self.epsilon = float(epsilon)
        self.reference = reference or Medium(VelocityField.homogeneous(1.0, 3),
                                             name="homogeneous")
        self.regularization = float(regularization)
        self.van_vleck = bool(van_vleck)
        self.n_steps = int(n_steps)
        if not self.reference.lossless:
            raise UnsupportedConfigurationError(
                "the tomography reference medium must be lossless")

    @property
    def kappa(self):
        """ eps C**2 B**2 / w**2 """
        return self.epsilon * self.speed ** 2 * self.scale_b ** 2 / \
            self.frequency ** 2

    @property
    def alpha(self):
        """ w**2 / C**2 """
        return self.frequency ** 2 / self.speed ** 2

    def as_dict(self):
        data = {k: v for k, v in self.__dict__.items() if k != "reference"}
        data["reference"] = self.reference.descriptor
        return data


class SurveyGeometry():
    """ 2k+1 sources and 2k+1 receivers; data pairs run p (receiver) outer """

    def __init__(self, k, sources, receivers):
        self.k = int(k)
        self.sources = np.asarray(sources, dtype=float)
        self.receivers = np.asarray(receivers, dtype=float)
        n = 2 * self.k + 1
        if self.k < 1:
            raise ConfigError("k must be at least 1", field="tomography.k")
        if self.sources.shape != (n, 3) or self.receivers.shape != (n, 3):
            raise ConfigError("expected %d sources and %d receivers in 3-d" % (n, n),
                              field="tomography.geometry")
        if np.min(pdist(np.vstack([self.sources, self.receivers]))) <= 0:
            raise ConfigError("survey positions must be distinct",
                              field="tomography.geometry")

    @property
    def size(self):
        return 2 * self.k + 1

    def pairs(self):
        return [(p, q) for p in range(self.size) for q in range(self.size)]


def make_survey(k, extent=1.0, seed=0):
    """
    Sources and receivers interleaved on a Fibonacci lattice over the full
    sphere of radius ``extent``, turned by a seeded random rotation

    :Optional:
        seed : int or numpy.random.SeedSequence
    """
    n = 2 * int(k) + 1
    if n < 3:
        raise ConfigError("k must be at least 1", field="tomography.k")
    index = np.arange(2 * n)
    z = 1. - (2. * index + 1.) / (2 * n)
    ring = np.sqrt(1. - z ** 2)
    phi = index * np.pi * (3. - np.sqrt(5.))
    points = np.stack([ring * np.cos(phi), ring * np.sin(phi), z], axis=1)
    turn = Rotation.random(None, np.random.default_rng(seed))
    points = extent * turn.apply(points)
    return SurveyGeometry(k, points[0::2], points[1::2])


def condition_number(matrix):
    """ condition number of M^H M; inf when M is rank deficient """
    matrix = np.asarray(matrix)
    singular = linalg.svdvals(matrix)
    if singular[-1] == 0 or matrix.shape[0] < matrix.shape[1]:
        return np.inf
    return float((singular[0] / singular[-1]) ** 2)


def select_survey(k, wavenumbers, cfg, extent=1.0, seed=0,
                  tries=SURVEY_TRIES, method="ray", pool=None):
    """
    The best conditioned of ``tries`` seeded surveys for this forward model

    Candidate i uses the i-th child of ``SeedSequence(seed)``, so the choice
    is reproducible.

    :Returns:
        geometry : SurveyGeometry
    """
    log = logging.getLogger(__name__)
    if int(tries) < 1:
        raise ConfigError("must be at least 1", field="tomography.survey_tries")

    best, best_condition = None, np.inf
    for child in np.random.SeedSequence(seed).spawn(int(tries)):
        geometry = make_survey(k, extent, child)
        try:
            matrix, _, failed = coefficient_matrix(geometry, wavenumbers, cfg,
                                                   method, pool)
        except BoundaryValueError:
            continue
        condition = np.inf if failed else condition_number(matrix)
        if best is None or condition < best_condition:
            best, best_condition = geometry, condition

    if best is None:
        raise BoundaryValueError("no candidate survey produced a ray")
    log.info("survey picked from %d candidates, condition number %.3g",
             int(tries), best_condition)
    return best

# ---------------------------------------------


class WaveNumberSet():
    """
    Conjugate-symmetric wavevectors k_{-N} .. k_N with N = 2k(k+1)

    Row ``N + j`` holds k_j; k_0 = 0 and k_{-j} = -k_j.
    """

    def __init__(self, k, lattice, spacing):
        self.k = int(k)
        self.lattice = np.asarray(lattice, dtype=int)
        self.spacing = float(spacing)
        self.vectors = self.spacing * self.lattice

    @property
    def N(self):
        return 2 * self.k * (self.k + 1)

    def __len__(self):
        return self.vectors.shape[0]

    def row(self, j):
        return self.N + j

    @property
    def indices(self):
        return np.arange(-self.N, self.N + 1)


def _canonical(m):
    nonzero = [c for c in m if c != 0]
    return bool(nonzero) and nonzero[0] > 0


def wavenumber_set(k, k_max=3.0):
    """
    The N = 2k(k+1) shortest canonical integer vectors (first nonzero
    component positive), ordered by length then lexicographically, scaled
    so the longest sits on |k| = k_max

    :Returns:
        wavenumbers : WaveNumberSet
    """
    if int(k) < 1:
        raise ConfigError("k must be at least 1", field="tomography.k")
    if not k_max > 0:
        raise ConfigError("k_max must be positive", field="tomography.k_max")
    k = int(k)
    n_half = 2 * k * (k + 1)

    radius = 1
    while True:
        grid = range(-radius, radius + 1)
        candidates = [(m1, m2, m3) for m1 in grid for m2 in grid for m3 in grid
                      if _canonical((m1, m2, m3))]
        candidates.sort(key=lambda m: (m[0] ** 2 + m[1] ** 2 + m[2] ** 2, m))
        chosen = candidates[:n_half]
        if len(chosen) == n_half and \
                max(np.dot(m, m) for m in chosen) <= radius ** 2:
            break
        radius += 1

    half = np.array(chosen, dtype=int)
    lattice = np.vstack([-half[::-1], np.zeros((1, 3), dtype=int), half])
    spacing = k_max / np.sqrt(np.max(np.sum(half ** 2, axis=1)))
    return WaveNumberSet(k, lattice, spacing)

# ---------------------------------------------


def proper_time_bessel(alpha, action, wick=False):
    """
    int_0^inf s**(-5/2) exp(i a s + i S1 / 4s) ds, or with ``wick`` the
    decaying exp(-a s - S1 / 4s); both equal 2 (S1/4a)**(-3/4) K_{3/2}(w)
    with w = -i sqrt(a S1) and w = sqrt(a S1) respectively
    """
    z = np.sqrt(alpha * action)
    w = z if wick else -1j * z
    return 2. * (action / (4. * alpha)) ** -0.75 * kv(1.5, w)


def pair_kernel(x_src, x_rcv, cfg, p=0, q=0):
    """
    Everything about one source/receiver pair that does not depend on the
    wavevector: the s = 1 reference ray, its Van Vleck factor and the
    proper-time integral

    :Returns:
        kernel : PairKernel
            field = prefactor * sum(weights * 1/n1**2(nodes)), and
            entry(k) = (2 pi)**-1.5 * prefactor * sum(weights * exp(i k.nodes))
    """
    medium = cfg.reference
    ray = rays.two_point_ray(x_rcv, x_src, medium, s=1.0, n_steps=cfg.n_steps)
    vv = rays.van_vleck_prefactor(ray, medium) if cfg.van_vleck else 1.0

    action = rays.ray_action(ray, medium)
    n0_src = 1. / float(medium.velocity(x_src))
    n0_rcv = 1. / float(medium.velocity(x_rcv))
    path_weight = (n0_src * n0_rcv) ** 1.5 * \
        kernels.branch_power(1.0, -1.5) * vv
    prefactor = -0.25 * cfg.kappa * path_weight * \
        proper_time_bessel(cfg.alpha, action)

    n0 = 1. / np.asarray(medium.velocity(ray.positions))
    speed_sq = np.sum(ray.velocities ** 2, axis=1)
    rule = np.full(ray.sigma.shape[0], ray.s / ray.n_steps)
    rule[[0, -1]] *= 0.5
    return PairKernel(p, q, prefactor, ray.positions, rule * speed_sq * n0 ** 4,
                      ray, vv)


def _ray_entries(kernel, vectors):
    phases = np.exp(1j * kernel.nodes @ np.atleast_2d(vectors).T)
    return FOURIER_NORM * kernel.prefactor * (kernel.weights @ phases)


def _euclidean_setup(x_src, x_rcv, cfg):
    medium = cfg.reference
    if not medium.is_homogeneous:
        raise UnsupportedConfigurationError(
            "the Wick-rotated forward model needs a homogeneous reference")
    c0 = medium.velocity.constant
    x_src = tools.as_vector(x_src, 3)
    x_rcv = tools.as_vector(x_rcv, 3)
    dist_sq = float(np.sum((x_rcv - x_src) ** 2))
    action = dist_sq / c0 ** 2
    z = np.sqrt(cfg.alpha * action)
    s_min = action / (4. * (z + EUCLIDEAN_MARGIN))
    s_max = (z + EUCLIDEAN_MARGIN) / cfg.alpha
    return x_src, x_rcv, c0, dist_sq, s_min, s_max


def _euclidean_weight(s, c0, dist_sq, alpha):
    """
    exp(-a s) K_E(s) v**2 n0**4 with v = |x - x'| / s and K_E the heat
    kernel of ``analytic_euclidean_kernel``
    """
    heat = (4. * np.pi * s * c0 ** 2) ** -1.5 * \
        np.exp(-dist_sq / (4. * s * c0 ** 2))
    return np.exp(-alpha * s) * heat * dist_sq / s ** 2 / c0 ** 4


def euclidean_entries(x_src, x_rcv, vectors, cfg, n_sigma=48):
    """
    Wick-rotated coefficients for every wavevector, Gaussian-dressed plane
    waves integrated along the chord and over proper time
    """
    x_src, x_rcv, c0, dist_sq, s_min, s_max = _euclidean_setup(x_src, x_rcv, cfg)
    vectors = np.atleast_2d(vectors)
    u, w_u = np.polynomial.legendre.leggauss(n_sigma)
    u, w_u = 0.5 * (u + 1.), 0.5 * w_u
    chord = x_src + u[:, None] * (x_rcv - x_src)
    plane = np.exp(1j * chord @ vectors.T)
    k_sq = np.sum(vectors ** 2, axis=1)

    def integrand(s):
        dressing = np.exp(-c0 ** 2 * s[:, None, None] *
                          (u * (1. - u))[None, :, None] * k_sq[None, None, :])
        inner = np.einsum('u,suj->sj', w_u, plane[None] * dressing)
        weight = _euclidean_weight(s, c0, dist_sq, cfg.alpha)
        # the insertion integral is s times the average along the chord
        return (weight * s)[:, None] * inner

    value = 1j * proper_time_quadrature(integrand, s_min, s_max, n_nodes=256,
                                        rtol=1e-10, eta_long=0.)
    return -0.25 * cfg.kappa * FOURIER_NORM * np.atleast_1d(value)


def coefficient_entry(p, q, k_vec, geometry, cfg, method="ray"):
    """ A_pq(k): ray from source q to receiver p """
    x_src, x_rcv = geometry.sources[q], geometry.receivers[p]
    if method == "ray":
        return complex(_ray_entries(pair_kernel(x_src, x_rcv, cfg, p, q), k_vec)[0])
    if method == "euclidean":
        return complex(euclidean_entries(x_src, x_rcv, k_vec, cfg)[0])
    raise ConfigError("unknown method '%s'" % method, field="tomography.method")

# ---------------------------------------------


def born_scattered_field(x_src, x_rcv, cfg, decomp, method="ray",
                         n_paths=4096, steps=32, seed=0, pool=None):
    """
    First-Born scattered field at ``x_rcv`` for a source at ``x_src``

    :Parameters:
        decomp : RefractionDecomposition
            supplies 1/n1**2

    :Optional:
        method : str
            ``ray`` (stationary phase), ``euclidean`` (Wick-rotated closed
            form, Fourier perturbations only) or ``euclidean-mc`` (Brownian
            bridge estimate of the Wick-rotated field)

    :Returns:
        complex for ``ray`` and ``euclidean``, McEstimate for ``euclidean-mc``
    """
    if method == "ray":
        kernel = pair_kernel(x_src, x_rcv, cfg)
        values = decomp.inv_n1_sq(kernel.nodes)
        return complex(kernel.prefactor * np.sum(kernel.weights * values))
    if method == "euclidean":
        return euclidean_born_reference(x_src, x_rcv, cfg, decomp)
    if method == "euclidean-mc":
        return _euclidean_born_mc(x_src, x_rcv, cfg, decomp, n_paths, steps,
                                  seed, pool)
    raise ConfigError("unknown method '%s'" % method, field="tomography.method")


def euclidean_born_reference(x_src, x_rcv, cfg, decomp):
    """ closed-form Wick-rotated field of a Fourier perturbation """
    if not decomp.has_fourier:
        raise UnsupportedConfigurationError(
            "the Gaussian-dressed reference needs Fourier coefficients")
    entries = euclidean_entries(x_src, x_rcv, decomp.wavevectors, cfg)
    return complex(entries @ decomp.coefficients)


def _euclidean_rule(s_min, s_max, n_nodes=EUCLIDEAN_NODES):
    """ Gauss-Legendre in log s """
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    lo, hi = np.log(s_min), np.log(s_max)
    log_s = 0.5 * (hi - lo) * (nodes + 1.) + lo
    s = np.exp(log_s)
    return s, 0.5 * (hi - lo) * weights * s


def _euclidean_node(args):
    index, s, ctx = args
    totals, squares, n_done = 0., 0., 0
    for start, stop in blocks(ctx["n_paths"], BLOCK_SIZE):
        seq = np.random.SeedSequence(ctx["seed"],
                                     spawn_key=(index, start // BLOCK_SIZE))
        paths = sample_bridges(ctx["x_rcv"], ctx["x_src"], s, ctx["steps"],
                               ctx["c0"] ** 2, np.random.default_rng(seq),
                               n_paths=stop - start)
        values = ctx["decomp"].inv_n1_sq(paths)
        integral = simpson(values, dx=s / ctx["steps"], axis=1)
        totals += np.sum(integral)
        squares += np.sum(integral ** 2)
        n_done += stop - start
    mean = totals / n_done
    variance = max(squares / n_done - mean ** 2, 0.) * n_done / (n_done - 1.)
    return mean, variance / n_done


def _euclidean_born_mc(x_src, x_rcv, cfg, decomp, n_paths, steps, seed, pool):
    log = logging.getLogger(__name__)
    if n_paths < 100:
        raise ConfigError("must be at least 100", field="n_paths")
    if steps < 2 or steps % 2:
        raise ConfigError("bridges need an even number of steps (Simpson rule)",
                          field="steps")

    x_src, x_rcv, c0, dist_sq, s_min, s_max = _euclidean_setup(x_src, x_rcv, cfg)
    s_nodes, s_weights = _euclidean_rule(s_min, s_max)
    weight = _euclidean_weight(s_nodes, c0, dist_sq, cfg.alpha)
    factor = -0.25 * cfg.kappa * s_weights * weight

    ctx = {"x_src": x_src, "x_rcv": x_rcv, "c0": c0, "decomp": decomp,
           "n_paths": int(n_paths), "steps": int(steps), "seed": seed}
    results = multitasking.map(_euclidean_node,
                               [(i, s, ctx) for i, s in enumerate(s_nodes)],
                               name=pool)
    means = np.array([r[0] for r in results])
    variances = np.array([r[1] for r in results])

    estimate = McEstimate(
        mean=float(np.sum(factor * means)),
        standard_error=float(np.sqrt(np.sum(factor ** 2 * variances))),
        n_samples=int(n_paths) * len(s_nodes),
        seed_record={"seed": seed, "block_size": BLOCK_SIZE,
                     "proper_time_nodes": len(s_nodes)})
    log.debug("euclidean born estimate %.6g +- %.2g",
              estimate.mean, estimate.standard_error)
    return estimate


def euclidean_born_crosscheck(x_src, x_rcv, cfg, decomp, n_paths=4096,
                              steps=32, seed=0, pool=None):
    """
    Bridge estimate of the Wick-rotated field against its closed form

    :Returns:
        check : CrossCheck
            ``z_score`` = (estimate - reference) / standard error
    """
    estimate = _euclidean_born_mc(x_src, x_rcv, cfg, decomp, n_paths, steps,
                                  seed, pool)
    reference = euclidean_born_reference(x_src, x_rcv, cfg, decomp)
    if abs(reference.imag) > 1e-10 * max(abs(reference.real), 1e-300):
        raise SymmetryError("Wick-rotated field of a real perturbation is not real")
    z = (estimate.mean - reference.real) / estimate.standard_error \
        if estimate.standard_error > 0 else 0.
    return CrossCheck(estimate, reference.real, float(z))

# ---------------------------------------------


class TomographySystem():
    """ an assembled and solved survey """

    def __init__(self, matrix, data, solution, rows, failed, condition_number,
                 residual, weight, wavenumbers):
        self.matrix = matrix
        self.data = data
        self.solution = solution
        self.rows = rows
        self.failed = failed
        self.condition_number = condition_number
        self.residual = residual
        self.weight = weight
        self.wavenumbers = wavenumbers

    def solution_frame(self):
        vectors = self.wavenumbers.vectors
        return pd.DataFrame({
            "j": self.wavenumbers.indices,
            "k1": vectors[:, 0], "k2": vectors[:, 1], "k3": vectors[:, 2],
            "re": self.solution.real, "im": self.solution.imag,
        })

    def summary(self):
        return {
            "rows": len(self.rows),
            "unknowns": len(self.wavenumbers),
            "failed_pairs": [list(pair) for pair in self.failed],
            "condition_number": float(self.condition_number),
            "residual": float(self.residual),
            "regularization": float(self.weight),
        }


def coefficient_matrix(geometry, wavenumbers, cfg, method="ray", pool=None):
    """
    Rows of A_pq(k_j) for every (p, q); pairs whose ray fails are skipped

    :Returns:
        (matrix, rows, failed)
            matrix has one row per entry of ``rows`` (data indices kept)
    """
    log = logging.getLogger(__name__)
    if method not in METHODS:
        raise ConfigError("unknown method '%s'" % method, field="tomography.method")

    def build(pair):
        p, q = pair
        x_src, x_rcv = geometry.sources[q], geometry.receivers[p]
        try:
            if method == "ray":
                return _ray_entries(pair_kernel(x_src, x_rcv, cfg, p, q),
                                    wavenumbers.vectors)
            return euclidean_entries(x_src, x_rcv, wavenumbers.vectors, cfg)
        except (BoundaryValueError, CausticError, IntegrationError) as e:
            log.warning("excluding pair (%d, %d): %s", p, q, e)
            return None

    pairs = geometry.pairs()
    built = multitasking.map(build, pairs, name=pool)
    rows = [ix for ix, row in enumerate(built) if row is not None]
    failed = [pairs[ix] for ix, row in enumerate(built) if row is None]
    if not rows:
        raise BoundaryValueError("no source/receiver pair produced a ray")
    return np.vstack([built[ix] for ix in rows]), rows, failed


def solve_system(matrix, data, weight=0.0):
    """
    min |M V - U|**2 + weight |V|**2 as the stacked least-squares problem

    :Returns:
        (solution, condition_number, residual)
            condition number of M^H M and |M V - U| / |U|
    """
    matrix = np.asarray(matrix, dtype=complex)
    data = np.asarray(data, dtype=complex)
    condition = condition_number(matrix)
    if weight == 0 and condition > CONDITION_LIMIT:
        raise IllConditionedError(
            "normal matrix condition number %.3g exceeds %.0g; "
            "use a positive regularization weight" % (condition, CONDITION_LIMIT),
            condition_number=condition)

    if weight > 0:
        n = matrix.shape[1]
        stacked = np.vstack([matrix, np.sqrt(weight) * np.eye(n)])
        rhs = np.concatenate([data, np.zeros(n)])
    else:
        stacked, rhs = matrix, data
    solution = linalg.lstsq(stacked, rhs)[0]
    residual = np.linalg.norm(matrix @ solution - data) / np.linalg.norm(data)
    return solution, condition, float(residual)


def assemble_and_invert(geometry, wavenumbers, cfg, data, method="ray",
                        pool=None):
    """
    Fill the coefficient matrix and solve for the Fourier coefficients

    :Parameters:
        data : array ((2k+1)**2,)
            samples in (p, q) order, p outer

    :Returns:
        system : TomographySystem
    """
    log = logging.getLogger(__name__)
    data = np.asarray(data, dtype=complex)
    if data.shape != (geometry.size ** 2,):
        raise ConfigError("expected %d data samples, got %d"
                          % (geometry.size ** 2, data.size), field="tomography.data")

    matrix, rows, failed = coefficient_matrix(geometry, wavenumbers, cfg,
                                              method, pool)
    used = data[rows]
    solution, condition, residual = solve_system(matrix, used, cfg.regularization)
    log.info("inverted %d x %d system: cond %.3g, residual %.3g",
             matrix.shape[0], matrix.shape[1], condition, residual)
    return TomographySystem(matrix, used, solution, rows, failed, condition,
                            residual, cfg.regularization, wavenumbers)

# ---------------------------------------------


def lcurve_sweep(matrix, data, weights=None):
    """
    Tikhonov solutions over log-spaced weights

    :Returns:
        sweep : DataFrame
            weight, residual_norm, solution_norm and the solution per row
    """
    if weights is None:
        top = linalg.svdvals(matrix)[0] ** 2
        weights = top * np.logspace(-12, 0, 49)
    records = []
    for weight in weights:
        solution, _, _ = solve_system(matrix, data, weight)
        records.append({
            "weight": float(weight),
            "residual_norm": float(np.linalg.norm(matrix @ solution - data)),
            "solution_norm": float(np.linalg.norm(solution)),
            "solution": solution,
        })
    return pd.DataFrame.from_records(records)


def select_weight(sweep, noise_norm=None):
    """
    Discrepancy principle (largest weight whose residual stays within
    ``noise_norm``) when the noise is known, otherwise the corner of the
    L-curve (maximum curvature in log-log)
    """
    sweep = sweep.sort_values("weight").reset_index(drop=True)
    if noise_norm is not None:
        within = sweep[sweep["residual_norm"] <= noise_norm]
        if len(within):
            return float(within["weight"].iloc[-1])
        return float(sweep["weight"].iloc[0])

    t = np.log(sweep["weight"].values)
    x = np.log(sweep["residual_norm"].values)
    y = np.log(sweep["solution_norm"].values)
    dx, dy = np.gradient(x, t), np.gradient(y, t)
    ddx, ddy = np.gradient(dx, t), np.gradient(dy, t)
    curvature = (dx * ddy - ddx * dy) / np.power(dx ** 2 + dy ** 2, 1.5)
    curvature[~np.isfinite(curvature)] = -np.inf
    return float(sweep["weight"].iloc[int(np.argmax(curvature))])


def leave_one_out(matrix, data, weight):
    """ relative change of the solution when each row is dropped in turn """
    full, _, _ = solve_system(matrix, data, weight)
    scale = np.linalg.norm(full)
    changes = []
    for row in range(matrix.shape[0]):
        keep = np.arange(matrix.shape[0]) != row
        partial, _, _ = solve_system(matrix[keep], data[keep], weight)
        changes.append(np.linalg.norm(partial - full) / scale)
    return np.array(changes)

# ---------------------------------------------


def symmetrize_coefficients(coefficients):
    """ (V_j + conj V_{-j}) / 2 """
    coefficients = np.asarray(coefficients, dtype=complex)
    return 0.5 * (coefficients + np.conj(coefficients[::-1]))


def reconstruct_perturbation(coefficients, wavenumbers, points, tolerance=1e-10):
    """
    1/n1**2 at ``points`` from conjugate-symmetric Fourier coefficients

    :Returns:
        values : real array
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    scale = max(np.max(np.abs(coefficients)), np.finfo(float).tiny)
    asymmetry = np.max(np.abs(coefficients - np.conj(coefficients[::-1])))
    if asymmetry > tolerance * scale:
        raise SymmetryError("Fourier coefficients are not conjugate-symmetric "
                            "(mismatch %.3g)" % asymmetry)

    points = np.asarray(points, dtype=float)
    phase = np.exp(1j * np.einsum('...d,jd->...j', points, wavenumbers.vectors))
    values = FOURIER_NORM * (phase @ coefficients)
    residue = np.max(np.abs(values.imag)) if values.size else 0.
    if residue > tolerance * max(1., np.max(np.abs(values.real))):
        raise SymmetryError("reconstruction has imaginary residue %.3g" % residue)
    return values.real


def project_perturbation(f, wavenumbers, n_grid=None):
    """
    Fourier coefficients of a field periodic on the lattice cell, by the
    uniform-grid rule (exact for fields band-limited to the lattice)
    """
    period = 2. * np.pi / wavenumbers.spacing
    n_grid = n_grid or 2 * int(np.abs(wavenumbers.lattice).max()) + 2
    axis = np.arange(n_grid) * period / n_grid
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    grid = grid.reshape(-1, 3)
    values = np.asarray(f(grid), dtype=float)
    phase = np.exp(-1j * grid @ wavenumbers.vectors.T)
    return (values @ phase) / grid.shape[0] / FOURIER_NORM


def synthesize_data(geometry, wavenumbers, cfg, truth, noise=0.0, seed=0,
                    method="ray", pool=None):
    """
    Forward-modelled survey samples for coefficients ``truth``, with
    optional seeded complex noise of relative RMS size ``noise``
    """
    decomp = RefractionDecomposition(
        lambda x: 1. / np.asarray(cfg.reference.velocity(x)),
        epsilon=cfg.epsilon, wavevectors=wavenumbers.vectors,
        coefficients=truth)

    def sample(pair):
        p, q = pair
        return born_scattered_field(geometry.sources[q], geometry.receivers[p],
                                    cfg, decomp, method=method)

    data = np.array(multitasking.map(sample, geometry.pairs(), name=pool))
    return add_noise(data, noise, seed)


def add_noise(data, noise, seed=0):
    """ circular complex gaussian noise of RMS ``noise`` times the data RMS """
    data = np.asarray(data, dtype=complex)
    if not noise:
        return data
    rng = np.random.default_rng(seed)
    rms = np.sqrt(np.mean(np.abs(data) ** 2))
    return data + noise * rms * (rng.standard_normal(data.shape) +
                                 1j * rng.standard_normal(data.shape)) / np.sqrt(2.)
