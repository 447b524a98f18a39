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
Proper-time ordered polarization factors and the factorized Green matrix.

Ordering convention: the product runs over segments with the earliest
proper time rightmost,

    Phi = exp(-i eps A_{M-1} dsigma) ... exp(-i eps A_1 dsigma) exp(-i eps A_0 dsigma)

with (A_m)_pq = gamma_pmqn u_m u_n / C0**4 at the segment midpoint.
"""

import logging
import sys
from collections import namedtuple

import numpy as np
from scipy import linalg
from scipy.integrate import trapezoid

from pathwave import kernels, rays, tools
from pathwave.asynctools import multitasking
from pathwave.paths import proper_time_quadrature
from pathwave.errors import (
    ConfigError, SingularityError, UnsupportedConfigurationError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

RULES = ("midpoint", "trapezoid")
TIME_CHUNK = 64

PolarizationFactor = namedtuple("PolarizationFactor",
                                ["matrix", "epsilon", "path"])


class QuadratureConfig():
    """
    Proper-time quadrature settings for ``factorized_green``

    :Optional:
        reg_width : float
            time width of the matched Gaussian shell (default 0.02)
        eta : float
            short-time damping; derived from ``reg_width`` when None
        s_min, s_max : float
            integration limits; derived from the travel time when None
        n_nodes : int
            initial node count of the adaptive quadrature
        rtol : float
        n_steps : int
            ray discretization
    """

    def __init__(self, reg_width=0.02, eta=None, s_min=None, s_max=None,
                 n_nodes=2048, rtol=1e-8, n_steps=100):
        self.reg_width = float(reg_width)
        self.eta = eta
        self.s_min = s_min
        self.s_max = s_max
        self.n_nodes = int(n_nodes)
        self.rtol = float(rtol)
        self.n_steps = int(n_steps)

    def resolve(self, distance, c_mid):
        """
        Matched regularization: the shell comes out as a Lorentzian in
        t - t' whose peak equals that of a unit-area Gaussian of width
        ``reg_width``.
        """
        travel = distance / c_mid
        eta = self.eta
        if eta is None:
            eta = distance * self.reg_width / (np.sqrt(2. * np.pi) * c_mid)
        s_min = self.s_min or min(1e-3 * travel, eta / 40.)
        s_max = self.s_max or 1e6 * travel
        return {"eta": float(eta), "s_min": float(s_min),
                "s_max": float(s_max), "n_nodes": self.n_nodes,
                "rtol": self.rtol}

    def as_dict(self):
        return dict(self.__dict__)

# ---------------------------------------------


def _segment_generators(path, medium, rule="midpoint"):
    """ per-segment generators A_m (without eps) and the step dsigma """
    if rule not in RULES:
        raise ConfigError("unknown rule '%s'" % rule, field="rule")

    positions = np.asarray(path.positions, dtype=float)
    steps = positions.shape[0] - 1
    dsigma = path.s / steps

    if rule == "midpoint":
        mid = 0.5 * (positions[1:] + positions[:-1])
        u = np.diff(positions, axis=0) / dsigma
        c0 = np.asarray(medium.velocity(mid))
        return medium.anisotropy.contract(mid, u) / c0[:, None, None] ** 4, dsigma

    velocities = getattr(path, "velocities", None)
    if velocities is None:
        velocities = np.gradient(positions, dsigma, axis=0)
    c0 = np.asarray(medium.velocity(positions))
    nodes = medium.anisotropy.contract(positions, velocities) / \
        c0[:, None, None] ** 4
    return 0.5 * (nodes[1:] + nodes[:-1]), dsigma


def anisotropy_generator_integral(path, medium, rule="midpoint"):
    """ sum_m A_m dsigma; the eps-derivative of Phi at eps = 0 is -i times this """
    generators, dsigma = _segment_generators(path, medium, rule)
    return generators.sum(axis=0) * dsigma


def ordered_anisotropy_factor(path, medium, rule="midpoint"):
    """
    Proper-time ordered product of segment exponentials along ``path``

    :Parameters:
        path : DiscretePath or RayPath
        medium : Medium

    :Optional:
        rule : str
            ``midpoint`` (segment midpoint and chord velocity) or
            ``trapezoid`` (average of the node generators)

    :Returns:
        factor : PolarizationFactor
    """
    dimension = medium.dimension
    eps = medium.epsilon
    phi = np.eye(dimension, dtype=complex)
    if eps == 0 or medium.anisotropy.is_zero:
        return PolarizationFactor(phi, eps, path)

    generators, dsigma = _segment_generators(path, medium, rule)
    for factor in linalg.expm(-1j * eps * dsigma * generators):
        phi = factor @ phi
    return PolarizationFactor(phi, eps, path)

# ---------------------------------------------


def first_order_factor(ray, medium=None):
    """
    delta_ik - i eps int_0^s gamma_imkn R'_m R'_n / C0**4 dsigma,
    trapezoid rule on the ray grid
    """
    medium = medium or ray.medium
    dimension = medium.dimension
    identity = np.eye(dimension, dtype=complex)
    if medium.epsilon == 0:
        return PolarizationFactor(identity, 0., ray)

    c0 = np.asarray(medium.velocity(ray.positions))
    integrand = medium.anisotropy.contract(ray.positions, ray.velocities) / \
        c0[:, None, None] ** 4
    integral = trapezoid(integrand, ray.sigma, axis=0)
    return PolarizationFactor(identity - 1j * medium.epsilon * integral,
                              medium.epsilon, ray)

# ---------------------------------------------


def _checked_endpoints(x, x_src, medium):
    if not medium.lossless:
        raise UnsupportedConfigurationError(
            "the factorized Green matrix requires a lossless medium")
    if medium.dimension != 3:
        raise UnsupportedConfigurationError(
            "the factorized Green matrix is normalized in three dimensions")

    x = tools.as_vector(x, medium.dimension)
    x_src = tools.as_vector(x_src, medium.dimension)
    distance = float(np.linalg.norm(x - x_src))
    if distance == 0:
        raise SingularityError("factorized Green matrix is singular at x = x'")
    return x, x_src, distance


def scalar_green_integral(x, x_src, t, t_src, c_mid, settings, pool=None):
    """
    -i int ds of the free time kernel times the conjugate-branch space
    kernel at speed ``c_mid``, scaled so that its real part is the
    regularized retarded Green value (three dimensions)

    :Returns:
        value : complex array over the times in ``t``
    """
    lag = np.atleast_1d(np.asarray(t, dtype=float)) - t_src
    space_norm = c_mid ** 6

    def integrate(lags):
        def integrand(s):
            space = space_norm * kernels.homogeneous_space_kernel(
                x, x_src, s, c_mid, branch="conjugate")
            return kernels.free_time_kernel(lags[None, :], 0., s[:, None]) * \
                space[:, None]

        return np.atleast_1d(proper_time_quadrature(
            integrand, settings["s_min"], settings["s_max"],
            n_nodes=settings["n_nodes"], eta=settings["eta"],
            rtol=settings["rtol"], eta_long=0.))

    chunks = np.array_split(lag, int(np.ceil(lag.shape[0] / TIME_CHUNK)))
    values = np.concatenate(multitasking.map(integrate, chunks, name=pool))
    return 4. * np.pi / c_mid ** 2 * values


def polarization_average(phi, settings):
    """
    <Phi> = int rho Phi ds / int rho ds with rho = exp(-eta/s - eta*s)

    ``phi`` is the first-order factor of the s = 1 ray. Along a ray of
    proper time s the factor deviates from identity as 1/s, so the
    average is I + (phi - I) <1/s>. Equal to I when eps = 0.
    """
    def integrand(s):
        return np.stack([np.ones_like(s), 1. / s], axis=-1)

    weight, inverse = proper_time_quadrature(
        integrand, settings["s_min"], settings["s_max"],
        n_nodes=settings["n_nodes"], eta=settings["eta"],
        rtol=settings["rtol"])
    identity = np.eye(np.shape(phi)[0])
    return identity + float(np.real(inverse / weight)) * (phi - identity)


def factorized_green(x, x_src, t, t_src, medium, quad=None, causal=True,
                     pool=None):
    """
    Short-time Green matrix Re{ -i [scalar integral] x <Phi> }

    The two proper-time integrals are computed separately: the scalar one
    pairs the free time kernel with the conjugate-branch space kernel at
    the speed of the ray midpoint, and the polarization average uses the
    first-order factor of the two-point ray under the regularization
    weight alone. eps = 0 reproduces ``retarded_green_homogeneous``.

    :Parameters:
        x, x_src : positions
        t, t_src : float or array of times
        medium : Medium, lossless and three-dimensional

    :Optional:
        quad : QuadratureConfig
        causal : bool
            zero the t < t_src half
        pool : str
            worker pool for blocks of times

    :Returns:
        green : real array (N, N), or (T, N, N) for an array of times
    """
    log = logging.getLogger(__name__)
    quad = quad or QuadratureConfig()
    x, x_src, distance = _checked_endpoints(x, x_src, medium)

    ray = rays.two_point_ray(x, x_src, medium, s=1.0, n_steps=quad.n_steps)
    c_mid = float(medium.velocity(ray.midpoint()))
    settings = quad.resolve(distance, c_mid)

    scalar = scalar_green_integral(x, x_src, t, t_src, c_mid, settings, pool)
    average = polarization_average(first_order_factor(ray, medium).matrix,
                                   settings)
    green = np.real(scalar[:, None, None] * average[None])
    if causal:
        lag = np.atleast_1d(np.asarray(t, dtype=float)) - t_src
        green[lag < 0] = 0.

    log.debug("factorized green at %d times, eta=%.3g, c_mid=%.4g",
              scalar.shape[0], settings["eta"], c_mid)
    return green[0] if np.ndim(t) == 0 else green
