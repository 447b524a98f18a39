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
Closed-form short-time kernels and the homogeneous retarded Green function.

Phase conventions
-----------------
``homogeneous_space_kernel`` uses the constant-velocity exponent
``-(x-x')**2 / (4 s C0**2)`` together with a ``C0**(-2N)`` normalization.
``geodesic_length_sq`` keeps the small-deviation quadratic form
``-(x-x')**2 / (2 C0(mid)**2)``, so ``exp(i Delta**2 / 4s)`` built from it
carries half the homogeneous exponent. Both are available through
``wkb_space_kernel(convention=...)`` and every tabulated row records which
one produced it.

Half-integer powers of ``4 pi i s`` use the principal branch
(phase ``exp(i N pi / 4)``) unless ``branch="conjugate"`` is requested.
"""

import logging
import sys

import numpy as np
from scipy.integrate import trapezoid

from pathwave import tools
from pathwave.errors import ConfigError, DomainError, SingularityError

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

CONVENTIONS = ("homogeneous", "geodesic")


def _check_proper_time(s):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("proper time must be positive")
    return s


def branch_power(s, half_power, branch="principal"):
    """ (4 pi i s) ** half_power on the requested square-root branch """
    phase = np.pi / 2. * half_power
    if branch == "conjugate":
        phase = -phase
    elif branch != "principal":
        raise ConfigError("unknown branch '%s'" % branch, field="branch")
    return (4. * np.pi * s) ** half_power * np.exp(1j * phase)

# ---------------------------------------------


def free_time_kernel(t, t_src, s):
    """ exp(i (t - t')**2 / 4s) / sqrt(4 pi i s) """
    s = _check_proper_time(s)
    dt = np.asarray(t, dtype=float) - t_src
    return (np.exp(1j * dt ** 2 / (4. * s)) / branch_power(s, 0.5))[()]

# ---------------------------------------------


def homogeneous_space_kernel(x, x_src, s, C0, dimension=None,
                             branch="principal"):
    """
    C0**(-2N) exp(-i (x-x')**2 / (4 s C0**2)) / (4 pi i s)**(N/2)

    :Parameters:
        x, x_src : array (..., N)
        s : float or array, proper time > 0
        C0 : float, speed > 0

    :Optional:
        dimension : int
            defaults to the last axis of ``x``
        branch : str
            ``principal`` (default) or ``conjugate``
    """
    s = _check_proper_time(s)
    if C0 <= 0:
        raise DomainError("C0 must be positive")
    diff = np.asarray(x, dtype=float) - np.asarray(x_src, dtype=float)
    if dimension is None:
        dimension = diff.shape[-1]
    dist_sq = np.sum(diff ** 2, axis=-1)
    value = C0 ** (-2. * dimension) * \
        np.exp(-1j * dist_sq / (4. * s * C0 ** 2)) / \
        branch_power(s, dimension / 2., branch)
    return value[()]

# ---------------------------------------------


def geodesic_length_sq(x, x_src, velocity):
    """
    -(1/2) (x-x')**2 / C0((x+x')/2)**2; the quadratic truncation of the
    geodesic functional, accurate up to O((x-x')**4)
    """
    x = np.asarray(x, dtype=float)
    x_src = np.asarray(x_src, dtype=float)
    mid = 0.5 * (x + x_src)
    dist_sq = np.sum((x - x_src) ** 2, axis=-1)
    return (-0.5 * dist_sq / np.asarray(velocity(mid)) ** 2)[()]

# ---------------------------------------------


def wkb_space_kernel(x, x_src, s, velocity, convention="homogeneous"):
    """ space kernel in either phase convention (see module docs) """
    s = _check_proper_time(s)
    x = np.asarray(x, dtype=float)
    x_src = np.asarray(x_src, dtype=float)
    dimension = x.shape[-1]

    if convention == "homogeneous":
        c_mid = float(velocity(0.5 * (x + x_src)))
        return homogeneous_space_kernel(x, x_src, s, c_mid, dimension)

    if convention == "geodesic":
        delta_sq = geodesic_length_sq(x, x_src, velocity)
        prefactor = (float(velocity(x)) * float(velocity(x_src))) ** -dimension
        return (prefactor * np.exp(1j * delta_sq / (4. * s)) /
                branch_power(s, dimension / 2.))[()]

    raise ConfigError("unknown convention '%s'" % convention,
                      field="convention")

# ---------------------------------------------


def short_time_amplitude(x, x_src, s, medium):
    """
    Short-time matrix amplitude

    (C0(x)**2)**(-N/2) exp(-i (x-x')**2 / (2 s C0(x)**2)) *
        [d_ik - i s eps C0(x)**-4 gamma_iukv(x) u_u u_v],  u = (x-x')/s

    :Returns:
        matrix : complex array (N, N)
    """
    s = float(_check_proper_time(s))
    x = tools.as_vector(x, medium.dimension)
    x_src = tools.as_vector(x_src, medium.dimension)
    dimension = medium.dimension

    c0 = float(medium.velocity(x))
    diff = x - x_src
    scalar = (c0 ** 2) ** (-dimension / 2.) * \
        np.exp(-1j * diff.dot(diff) / (2. * s * c0 ** 2))

    bracket = np.eye(dimension, dtype=complex)
    if medium.epsilon:
        u = diff / s
        correction = np.einsum('iukv,u,v->ik', medium.anisotropy(x), u, u)
        bracket = bracket - 1j * s * medium.epsilon * c0 ** -4 * correction
    return scalar * bracket

# ---------------------------------------------


def retarded_green_homogeneous(x, x_src, t, t_src, C0, reg_width,
                               causal=True):
    """
    (1/2) delta_reg(C0 |t-t'| - |x-x'|) / (C0 |x-x'|)

    delta_reg has unit area in |t-t'| and time width ``reg_width``
    (width ``reg_width * C0`` in its own argument). With ``causal=True``
    the advanced piece (t < t') is dropped.
    """
    if reg_width <= 0:
        raise DomainError("regularization width must be positive")
    dist = float(np.linalg.norm(np.asarray(x, dtype=float) -
                                np.asarray(x_src, dtype=float)))
    if dist == 0:
        raise SingularityError("retarded Green function is singular at x = x'")

    lag = np.asarray(t, dtype=float) - t_src
    arg = C0 * np.abs(lag) - dist
    width = reg_width * C0
    delta = C0 * np.exp(-0.5 * (arg / width) ** 2) / (np.sqrt(2. * np.pi) * width)
    value = 0.5 * delta / (C0 * dist)
    if causal:
        value = np.where(lag >= 0, value, 0.)
    return value[()]


def free_space_scale(C0):
    """
    factor converting the retarded_green_homogeneous normalization into the
    impulse response of d_t**2 - C0**2 Laplacian in three dimensions
    """
    return 1. / (2. * np.pi * C0)


# =============================================
# built-in oracles
# =============================================

def chapman_kolmogorov_error(t, t_src, s1, s2, taper_tolerance=1e-4):
    """
    Relative error of the numerically composed time kernel,
    |int dtau K(t,tau,s1) K(tau,t',s2) - K(t,t',s1+s2)| / |K(t,t',s1+s2)|.
    The tau integral runs under a wide Gaussian taper centred on the
    stationary point; the taper itself contributes ~taper_tolerance.
    """
    _check_proper_time([s1, s2])
    center = (s2 * t + s1 * t_src) / (s1 + s2)
    curvature = 0.25 * (1. / s1 + 1. / s2)
    width = np.sqrt(1. / (2. * curvature * taper_tolerance))
    half_range = 6. * width
    # Nyquist for the steepest phase at the edge of the range
    step = np.pi / (4. * curvature * half_range)
    tau = np.arange(center - half_range, center + half_range + step, step)

    integrand = free_time_kernel(t, tau, s1) * free_time_kernel(tau, t_src, s2) * \
        np.exp(-((tau - center) / width) ** 2)
    composed = trapezoid(integrand, tau)
    logging.getLogger(__name__).debug(
        "composed time kernel over %d nodes, taper width %.3g", tau.size, width)
    exact = free_time_kernel(t, t_src, s1 + s2)
    return float(abs(composed - exact) / abs(exact))


def separability_error(x, x_src, s, C0):
    """ max deviation between the N-d kernel and the product of 1-d kernels """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_src = np.atleast_1d(np.asarray(x_src, dtype=float))
    full = homogeneous_space_kernel(x, x_src, s, C0)
    product = np.prod([homogeneous_space_kernel(x[d:d + 1], x_src[d:d + 1], s, C0)
                       for d in range(x.shape[0])])
    return float(abs(full - product) / abs(full))


def amplitude_linearity_error(x, x_src, s, medium, epsilon=0.1):
    """ doubling epsilon must double the anisotropic correction """
    base = short_time_amplitude(x, x_src, s, medium.with_epsilon(0.))
    once = short_time_amplitude(x, x_src, s, medium.with_epsilon(epsilon)) - base
    twice = short_time_amplitude(x, x_src, s, medium.with_epsilon(2 * epsilon)) - base
    scale = max(float(np.max(np.abs(once))), np.finfo(float).tiny)
    return float(np.max(np.abs(twice - 2. * once)) / scale)


def green_integral_error(distance, C0, reg_width, n_widths=12., n_nodes=20001):
    """ relative error of the time integral of the regularized Green function """
    x = np.zeros(3)
    x_src = np.array([distance, 0., 0.])
    arrival = distance / C0
    t = np.linspace(max(0., arrival - n_widths * reg_width),
                    arrival + n_widths * reg_width, n_nodes)
    values = retarded_green_homogeneous(x, x_src, t, 0., C0, reg_width)
    exact = 1. / (2. * C0 * distance)
    return float(abs(trapezoid(values, t) - exact) / exact)
