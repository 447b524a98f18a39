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
Discrete proper-time paths, their action terms, and the stochastic oracle.

The real-time path sum is oscillatory and is never sampled directly. The
Monte Carlo estimator works in imaginary proper time, where the kinetic
weight is a genuine probability; real-time quantities come from the
analytic kernels and from rays.
"""

import logging
import sys
from collections import namedtuple

import numpy as np

from pathwave import tools
from pathwave.asynctools import multitasking, blocks
from pathwave.errors import (
    ConfigError, DomainError, EvaluationError, UnsupportedConfigurationError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

# paths drawn per random stream; fixed so results never depend on workers
BLOCK_SIZE = 1024
GAUSS_ORDER = 16

ActionBreakdown = namedtuple("ActionBreakdown", [
    "time_kinetic", "damping_sq", "damping_cross",
    "space_kinetic", "log_measure"])

McEstimate = namedtuple("McEstimate", [
    "mean", "standard_error", "n_samples", "seed_record", "normalization"])
McEstimate.__new__.__defaults__ = (1.0,)


class DiscretePath():
    """
    A path (r(sigma), t(sigma)) on a uniform proper-time grid

    :Parameters:
        s : float
            proper-time length
        positions : array (M+1, N)
            r_0 = x' ... r_M = x
        times : array (M+1,)
            t_0 = t' ... t_M = t
    """

    def __init__(self, s, positions, times=None):
        self.s = float(s)
        self.positions = np.asarray(positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[0] < 2:
            raise DomainError("a path needs at least two nodes")
        if times is None:
            times = np.zeros(self.positions.shape[0])
        self.times = np.asarray(times, dtype=float)
        if self.s <= 0:
            raise DomainError("proper time must be positive")

    @property
    def steps(self):
        return self.positions.shape[0] - 1

    @property
    def dimension(self):
        return self.positions.shape[1]

    @property
    def dsigma(self):
        return self.s / self.steps

    @property
    def sigma(self):
        return np.linspace(0., self.s, self.steps + 1)

    def reversed(self):
        return DiscretePath(self.s, self.positions[::-1], self.times[::-1])

    @classmethod
    def straight(cls, x, x_src, t, t_src, s, steps):
        frac = np.linspace(0., 1., steps + 1)
        x = np.asarray(x, dtype=float)
        x_src = np.asarray(x_src, dtype=float)
        positions = x_src + frac[:, None] * (x - x_src)
        times = t_src + frac * (t - t_src)
        return cls(s, positions, times)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)

# ---------------------------------------------


def sample_bridges(x, x_src, s, steps, variance_scale, rng, n_paths=1):
    """
    Staged Brownian-bridge sampling of ``n_paths`` pinned paths.
    Each unconstrained step has variance 2 * variance_scale * dsigma
    per coordinate.

    :Returns:
        positions : array (n_paths, steps+1, N)
    """
    if steps < 2:
        raise ConfigError("a bridge needs at least two steps", field="steps")
    if s <= 0:
        raise DomainError("proper time must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_src = np.atleast_1d(np.asarray(x_src, dtype=float))
    rng = _rng(rng)
    dsigma = s / steps

    paths = np.empty((n_paths, steps + 1, x.shape[0]))
    paths[:, 0] = x_src
    paths[:, -1] = x
    noise = rng.standard_normal((n_paths, steps - 1, x.shape[0]))
    for i in range(1, steps):
        remaining = steps - i
        mean = (remaining * paths[:, i - 1] + x) / (remaining + 1.)
        var = 2. * variance_scale * dsigma * remaining / (remaining + 1.)
        paths[:, i] = mean + np.sqrt(var) * noise[:, i - 1]
    return paths


def sample_bridge(x, x_src, t, t_src, s, steps, variance_scale, rng_seed):
    """ one bridge realization in space and in time, endpoints exact """
    rng = _rng(rng_seed)
    positions = sample_bridges(x, x_src, s, steps, variance_scale, rng)[0]
    times = sample_bridges([t], [t_src], s, steps, variance_scale, rng)[0, :, 0]
    positions[0], positions[-1] = x_src, x
    times[0], times[-1] = t_src, t
    return DiscretePath(s, positions, times)

# ---------------------------------------------


def action_terms(path, medium):
    """
    Midpoint-rule action terms of a discrete path

    C0 and nu are evaluated at segment midpoints; ``log_measure`` is
    -(N/2) * sum over segments of log C0(midpoint).
    """
    if path.dimension != medium.dimension:
        raise DomainError("path and medium dimensions differ")

    dsigma = path.dsigma
    dr = np.diff(path.positions, axis=0)
    dt = np.diff(path.times)
    r_mid = 0.5 * (path.positions[1:] + path.positions[:-1])
    t_mid = 0.5 * (path.times[1:] + path.times[:-1])

    c0 = np.asarray(medium.velocity(r_mid))
    nu = np.asarray(medium.damping(r_mid, t_mid)) * np.ones_like(t_mid)
    t_rate = dt / dsigma
    r_rate_sq = np.sum((dr / dsigma) ** 2, axis=1)

    return ActionBreakdown(
        time_kinetic=0.25 * tools.fsum_complex(t_rate ** 2 * dsigma),
        damping_sq=0.25 * tools.fsum_complex(nu ** 2 * dsigma),
        damping_cross=0.5 * tools.fsum_complex(nu * t_rate * dsigma),
        space_kinetic=0.25 * tools.fsum_complex(r_rate_sq / c0 ** 2 * dsigma),
        log_measure=-0.5 * path.dimension * tools.fsum_complex(np.log(c0)),
    )

# ---------------------------------------------


def analytic_euclidean_kernel(x, x_src, s, C0):
    """ (4 pi s C0**2)**(-N/2) exp(-(x-x')**2 / (4 s C0**2)) """
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(x_src, dtype=float))
    return float((4. * np.pi * s * C0 ** 2) ** (-diff.shape[0] / 2.) *
                 np.exp(-diff.dot(diff) / (4. * s * C0 ** 2)))


def _euclidean_block(args):
    (start, stop), ctx = args
    seq = np.random.SeedSequence(ctx["seed"], spawn_key=(start // BLOCK_SIZE,))
    rng = np.random.default_rng(seq)
    n = stop - start
    steps, dsigma, c_ref = ctx["steps"], ctx["dsigma"], ctx["c_ref"]
    x, x_src, dimension = ctx["x"], ctx["x_src"], ctx["dimension"]

    # free diffusion for steps-1 increments, closed analytically on the last
    increments = np.sqrt(2. * c_ref ** 2 * dsigma) * \
        rng.standard_normal((n, steps - 1, dimension))
    positions = np.empty((n, steps + 1, dimension))
    positions[:, 0] = x_src
    positions[:, 1:steps] = x_src + np.cumsum(increments, axis=1)
    positions[:, steps] = x

    last = x - positions[:, steps - 1]
    closing = (4. * np.pi * dsigma * c_ref ** 2) ** (-dimension / 2.) * \
        np.exp(-np.sum(last ** 2, axis=1) / (4. * dsigma * c_ref ** 2))

    if ctx["homogeneous"]:
        return closing

    dr = np.diff(positions, axis=1)
    r_mid = 0.5 * (positions[:, 1:] + positions[:, :-1])
    c0 = np.asarray(ctx["velocity"](r_mid))
    rate_sq = np.sum(dr ** 2, axis=2) / dsigma
    delta_action = 0.25 * np.sum(rate_sq * (c0 ** -2 - c_ref ** -2), axis=1)
    delta_measure = -0.5 * dimension * np.sum(np.log(c0 / c_ref), axis=1)
    return closing * np.exp(delta_measure - delta_action)


def euclidean_propagator_mc(x, x_src, s, medium, steps, n_paths, seed,
                            return_samples=False, pool=None):
    """
    Monte Carlo estimate of the imaginary-proper-time space kernel

    Paths are free diffusions with reference speed C_ref = C0((x+x')/2)
    over the first ``steps - 1`` increments, closed with the analytic
    last-step density and reweighted by exp(-dS_space + d log_measure).
    The C0**(-2N) normalization is returned separately.

    :Parameters:
        x, x_src : positions
        s : float, proper time
        medium : Medium, must be lossless
        steps : int >= 2
        n_paths : int >= 100
        seed : int

    :Optional:
        return_samples : bool
            also return the per-path samples
        pool : str
            worker pool name

    :Returns:
        estimate : McEstimate (and samples when requested)
    """
    log = logging.getLogger(__name__)

    if not medium.lossless:
        raise UnsupportedConfigurationError(
            "the Euclidean oracle requires a lossless medium (nu = 0)")
    if n_paths < 100:
        raise ConfigError("must be at least 100", field="n_paths")
    if steps < 2:
        raise ConfigError("must be at least 2", field="steps")
    if s <= 0:
        raise DomainError("proper time must be positive")

    x = tools.as_vector(x, medium.dimension)
    x_src = tools.as_vector(x_src, medium.dimension)
    c_ref = float(medium.velocity(0.5 * (x + x_src)))

    ctx = {
        "seed": int(seed), "steps": int(steps), "dsigma": s / steps,
        "c_ref": c_ref, "x": x, "x_src": x_src,
        "dimension": medium.dimension, "velocity": medium.velocity,
        "homogeneous": medium.is_homogeneous,
    }
    work = [(blk, ctx) for blk in blocks(int(n_paths), BLOCK_SIZE)]
    samples = np.concatenate(multitasking.map(_euclidean_block, work, name=pool))

    if not np.all(np.isfinite(samples)):
        raise EvaluationError("non-finite path weight in Monte Carlo sum")

    n = samples.shape[0]
    mean = tools.fsum_complex(samples) / n
    variance = tools.fsum_complex((samples - mean) ** 2) / (n - 1)
    estimate = McEstimate(
        mean=mean,
        standard_error=float(np.sqrt(variance / n)),
        n_samples=n,
        seed_record={"seed": int(seed), "block_size": BLOCK_SIZE,
                     "n_blocks": len(work)},
        normalization=c_ref ** (-2. * medium.dimension),
    )
    log.debug("mc estimate %.6g +- %.2g over %d paths",
              estimate.mean, estimate.standard_error, n)
    if return_samples:
        return estimate, samples
    return estimate

# ---------------------------------------------


def _gauss_panel(a, b, nodes, weights):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid[:, None] + half[:, None] * nodes, half[:, None] * weights


def _panel_sums(integrand, eta, a, b, nodes, weights):
    eta_short, eta_long = eta
    s, w = _gauss_panel(a, b, nodes, weights)
    values = np.asarray(integrand(s.ravel()))
    values = values.reshape(s.shape + values.shape[1:])
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = np.argwhere(bad.reshape(s.shape + (-1,)).any(axis=-1))[0]
        raise EvaluationError("integrand is not finite at s = %r"
                              % float(s[tuple(where)]), node=float(s[tuple(where)]))
    weight = np.exp(-eta_short / s - eta_long * s) * w
    weight = weight.reshape(weight.shape + (1,) * (values.ndim - 2))
    return np.sum(values * weight, axis=1)


def proper_time_quadrature(integrand, s_min, s_max, n_nodes=2048, eta=0.0,
                           rtol=1e-8, max_panels=2 ** 18, eta_long=None):
    """
    -i * int_{s_min}^{s_max} ds exp(-eta/s - eta*s) integrand(s)

    Globally adaptive Gauss-Legendre quadrature on log-spaced panels.
    ``integrand`` takes an array of proper times and returns an array whose
    leading axis matches it (trailing axes are integrated elementwise).

    :Optional:
        eta_long : float
            separate damping of the s -> infinity end (defaults to ``eta``);
            0 is fine for integrands that already decay faster than 1/s

    :Returns:
        value : complex (or complex array for array-valued integrands)
    """
    log = logging.getLogger(__name__)

    if not 0 < s_min < s_max:
        raise DomainError("need 0 < s_min < s_max")
    if eta_long is None:
        eta_long = eta
    if eta < 0 or eta_long < 0:
        raise DomainError("eta must be non-negative")
    eta = (eta, eta_long)

    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    n_panels = max(1, int(n_nodes) // GAUSS_ORDER)
    edges = np.geomspace(s_min, s_max, n_panels + 1)
    a, b = edges[:-1], edges[1:]

    coarse = _panel_sums(integrand, eta, a, b, nodes, weights)
    scale = np.sum(np.abs(coarse))
    total = 0.
    level = 0
    while a.size:
        mid = np.sqrt(a * b)
        left = _panel_sums(integrand, eta, a, mid, nodes, weights)
        right = _panel_sums(integrand, eta, mid, b, nodes, weights)
        fine = left + right
        err = np.abs(fine - coarse)
        if err.ndim > 1:
            err = err.reshape(err.shape[0], -1).max(axis=1)
        share = np.log(b / a) / np.log(s_max / s_min)
        done = err <= rtol * max(scale, np.finfo(float).tiny) * share
        total = total + np.sum(fine[done], axis=0)
        if np.all(done):
            break
        if 4 * np.count_nonzero(~done) > max_panels:
            log.warning("proper-time quadrature stopped refining at %d panels; "
                        "estimated error %.3g", 2 * np.count_nonzero(~done),
                        float(np.sum(err[~done])))
            total = total + np.sum(fine[~done], axis=0)
            break
        keep = ~done
        a = np.concatenate([a[keep], mid[keep]])
        b = np.concatenate([mid[keep], b[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        level += 1
    log.debug("proper-time quadrature converged after %d refinements", level)
    return -1j * np.asarray(total)[()]
