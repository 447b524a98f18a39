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
Classical rays of the functional  S[r] = int_0^s |dr/dsigma|**2 / C0(r)**2.

sigma is proper time, not arclength. With w = C0**-2 and p = w dr/dsigma the
Euler-Lagrange equations read

    dr/dsigma = p / w,      dp/dsigma = |p|**2 / (2 w**2) grad(w)

and |dr/dsigma|**2 / C0**2 is conserved along a ray. The reference index
n0 is identified with 1 / C0 throughout.
"""

import logging
import sys

import numpy as np
from scipy import linalg
from scipy.integrate import simpson, trapezoid

from pathwave import tools
from pathwave.errors import (
    BoundaryValueError, CausticError, ConfigError, DomainError,
    IntegrationError, InvalidMediumError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)


class RayPath():
    """
    A sampled ray on the uniform grid sigma_0 = 0 ... sigma_n = s

    :Parameters:
        sigma : array (n+1,)
        positions : array (n+1, N)
            positions[0] is the launch point
        velocities : array (n+1, N)
        medium : Medium

    :Optional:
        converged : bool
            set for boundary-value solutions
        residual : float
            endpoint residual of a boundary-value solution
        multipath : bool
            a perturbed seed converged to a different ray
    """

    def __init__(self, sigma, positions, velocities, medium,
                 converged=True, residual=0.0, multipath=False):
        self.sigma = np.asarray(sigma, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        self.velocities = np.asarray(velocities, dtype=float)
        self.medium = medium
        self.converged = bool(converged)
        self.residual = float(residual)
        self.multipath = bool(multipath)

    @property
    def s(self):
        return float(self.sigma[-1])

    @property
    def n_steps(self):
        return self.sigma.shape[0] - 1

    @property
    def launch_velocity(self):
        return self.velocities[0]

    @property
    def momentum(self):
        w = np.asarray(self.medium.velocity.inv_sq(self.positions))
        return w[:, None] * self.velocities

    @property
    def hamiltonian(self):
        """ |dR/dsigma|**2 / C0**2 at every node """
        w = np.asarray(self.medium.velocity.inv_sq(self.positions))
        return w * np.sum(self.velocities ** 2, axis=1)

    def midpoint(self):
        """ position at sigma = s/2 (interpolated on odd step counts) """
        n = self.n_steps
        if n % 2 == 0:
            return self.positions[n // 2]
        return 0.5 * (self.positions[n // 2] + self.positions[n // 2 + 1])

    def summary(self):
        return {
            "s": self.s,
            "n_steps": self.n_steps,
            "converged": self.converged,
            "residual": self.residual,
            "multipath": self.multipath,
        }

# ---------------------------------------------


def _rhs(r, p, velocity):
    w = np.asarray(velocity.inv_sq(r))[..., None]
    grad_w = velocity.inv_sq_gradient(r)
    p_sq = np.sum(p ** 2, axis=-1)[..., None]
    return p / w, 0.5 * p_sq / w ** 2 * grad_w


def _integrate(r0, p0, velocity, s, n_steps):
    """ classical RK4 on (r, p); batch axes before the last are carried """
    h = s / n_steps
    r = np.empty((n_steps + 1,) + r0.shape)
    p = np.empty((n_steps + 1,) + p0.shape)
    r[0], p[0] = r0, p0
    for i in range(n_steps):
        try:
            k1r, k1p = _rhs(r[i], p[i], velocity)
            k2r, k2p = _rhs(r[i] + 0.5 * h * k1r, p[i] + 0.5 * h * k1p, velocity)
            k3r, k3p = _rhs(r[i] + 0.5 * h * k2r, p[i] + 0.5 * h * k2p, velocity)
            k4r, k4p = _rhs(r[i] + h * k3r, p[i] + h * k3p, velocity)
        except (InvalidMediumError, DomainError) as e:
            raise IntegrationError("ray left the medium after sigma = %g: %s"
                                   % (i * h, e), last_sigma=i * h)
        r[i + 1] = r[i] + h / 6. * (k1r + 2. * k2r + 2. * k3r + k4r)
        p[i + 1] = p[i] + h / 6. * (k1p + 2. * k2p + 2. * k3p + k4p)
        if not (np.all(np.isfinite(r[i + 1])) and np.all(np.isfinite(p[i + 1]))):
            raise IntegrationError("ray integration failed after sigma = %g"
                                   % (i * h), last_sigma=i * h)
    return r, p


def shoot_ray(x0, v0, medium, s, n_steps=100):
    """
    Initial-value ray from ``x0`` with launch velocity ``v0``

    :Returns:
        ray : RayPath
    """
    if n_steps < 10:
        raise ConfigError("must be at least 10", field="n_steps")
    if s <= 0:
        raise DomainError("proper time must be positive")
    x0 = tools.as_vector(x0, medium.dimension)
    v0 = tools.as_vector(v0, medium.dimension)

    p0 = float(medium.velocity.inv_sq(x0)) * v0
    r, p = _integrate(x0, p0, medium.velocity, float(s), int(n_steps))
    w = np.asarray(medium.velocity.inv_sq(r))[:, None]
    return RayPath(np.linspace(0., s, n_steps + 1), r, p / w, medium)

# ---------------------------------------------


def _endpoint_residuals(x_src, candidates, medium, s, n_steps):
    """ endpoint of each launch velocity in ``candidates`` (k, N) """
    w0 = float(medium.velocity.inv_sq(x_src))
    r0 = np.broadcast_to(x_src, candidates.shape).copy()
    r, _ = _integrate(r0, w0 * candidates, medium.velocity, s, n_steps)
    return r[-1]


def _newton_shoot(x, x_src, v0, medium, s, n_steps, tol, max_iter):
    """ damped Newton on the launch velocity; returns (v, residual, ok) """
    dimension = medium.dimension
    v = v0.copy()
    try:
        miss = _endpoint_residuals(x_src, v[None], medium, s, n_steps)[0] - x
    except IntegrationError:
        return v, np.inf, False
    norm = float(np.linalg.norm(miss))
    best_v, best_norm = v.copy(), norm

    for _ in range(max_iter):
        if norm < tol:
            return v, norm, True

        h = 1e-7 * max(1., float(np.linalg.norm(v)))
        kicked = v + h * np.eye(dimension)
        try:
            ends = _endpoint_residuals(x_src, kicked, medium, s, n_steps)
        except IntegrationError:
            break
        jacobian = ((ends - x) - miss).T / h
        step = linalg.lstsq(jacobian, -miss)[0]

        damping = 1.
        while True:
            trial = v + damping * step
            try:
                trial_miss = _endpoint_residuals(
                    x_src, trial[None], medium, s, n_steps)[0] - x
                trial_norm = float(np.linalg.norm(trial_miss))
            except IntegrationError:
                trial_norm = np.inf
            if trial_norm < norm or damping < 1e-4:
                break
            damping *= 0.5

        if not np.isfinite(trial_norm):
            break
        v, miss, norm = trial, trial_miss, trial_norm
        if norm < best_norm:
            best_v, best_norm = v.copy(), norm

    return best_v, best_norm, best_norm < tol


def two_point_ray(x, x_src, medium, s=1.0, n_steps=100, tol=1e-10,
                  max_iter=50, probe_multipath=False):
    """
    Boundary-value ray from ``x_src`` (sigma = 0) to ``x`` (sigma = s)

    Shooting on the launch velocity, seeded from the straight chord
    v0 = (x - x_src) / s, with a damped Newton iteration and a
    finite-difference Jacobian.

    :Optional:
        probe_multipath : bool
            relaunch from perturbed seeds and flag the ray when one of
            them converges to a different launch velocity

    :Returns:
        ray : RayPath

    :Raises:
        BoundaryValueError
            carrying the best endpoint residual reached
    """
    log = logging.getLogger(__name__)

    x = tools.as_vector(x, medium.dimension)
    x_src = tools.as_vector(x_src, medium.dimension)
    if not (medium.contains(x) and medium.contains(x_src)):
        raise DomainError("ray endpoints must lie inside the medium domain")
    if s <= 0:
        raise DomainError("proper time must be positive")

    seed = (x - x_src) / s
    v, residual, ok = _newton_shoot(x, x_src, seed, medium, s, n_steps,
                                    tol, max_iter)
    if not ok:
        raise BoundaryValueError(
            "two-point ray did not converge (best residual %.3g)" % residual,
            residual=residual)

    multipath = False
    if probe_multipath:
        speed = max(float(np.linalg.norm(seed)), 1e-12)
        for direction in np.vstack([np.eye(medium.dimension),
                                    -np.eye(medium.dimension)]):
            kick = direction - direction.dot(seed) * seed / speed ** 2
            if np.linalg.norm(kick) < 1e-8:
                continue
            trial_seed = seed + 0.5 * speed * kick / np.linalg.norm(kick)
            other, other_residual, other_ok = _newton_shoot(
                x, x_src, trial_seed, medium, s, n_steps, tol, max_iter)
            if other_ok and np.linalg.norm(other - v) > 1e-6 * (1. + speed):
                multipath = True
                log.warning("multipath: a second ray joins %s and %s",
                            x_src.tolist(), x.tolist())
                break

    ray = shoot_ray(x_src, v, medium, s, n_steps)
    ray.converged = True
    ray.residual = residual
    ray.multipath = multipath
    return ray

# ---------------------------------------------


def ray_action(ray, medium=None):
    """ trapezoid value of int |dR/dsigma|**2 / C0(R)**2 along the ray """
    medium = medium or ray.medium
    integrand = np.sum(ray.velocities ** 2, axis=1) * \
        np.asarray(medium.velocity.inv_sq(ray.positions))
    return float(trapezoid(integrand, ray.sigma))


def chord_action(x, x_src, medium, s=1.0, n_steps=100):
    """ the same functional along the straight chord, for comparison """
    x = tools.as_vector(x, medium.dimension)
    x_src = tools.as_vector(x_src, medium.dimension)
    sigma = np.linspace(0., s, n_steps + 1)
    positions = x_src + (sigma / s)[:, None] * (x - x_src)
    velocities = np.broadcast_to((x - x_src) / s, positions.shape)
    return ray_action(RayPath(sigma, positions, velocities, medium), medium)


def sine_variation(ray, amplitudes):
    """
    delta(sigma) = sum_m a_m sin(m pi sigma / s) at the ray's nodes

    :Parameters:
        ray : RayPath
        amplitudes : array (modes, N)
            one vector coefficient per sine mode

    :Returns:
        offset, rate : arrays (n+1, N)
            delta and d(delta)/dsigma; delta vanishes at both endpoints
    """
    amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=float))
    modes = np.arange(1, amplitudes.shape[0] + 1)
    phase = np.pi * np.outer(ray.sigma / ray.s, modes)
    offset = np.sin(phase) @ amplitudes
    rate = (np.cos(phase) * (np.pi * modes / ray.s)) @ amplitudes
    offset[0] = offset[-1] = 0.
    return offset, rate


def perturbed_action(ray, offset, offset_rate, medium=None):
    """ Simpson value of the action along r + offset with velocity v + offset_rate """
    medium = medium or ray.medium
    velocities = ray.velocities + offset_rate
    integrand = np.sum(velocities ** 2, axis=1) * \
        np.asarray(medium.velocity.inv_sq(ray.positions + offset))
    return float(simpson(integrand, x=ray.sigma))


def first_variation(ray, offset, offset_rate, medium=None, h=1e-4):
    """
    Central difference of the action along r + h delta, relative to |S|

    Zero up to O(h**2) and the integration error at a ray.
    """
    medium = medium or ray.medium
    plus = perturbed_action(ray, h * offset, h * offset_rate, medium)
    minus = perturbed_action(ray, -h * offset, -h * offset_rate, medium)
    scale = max(abs(perturbed_action(ray, 0. * offset, 0. * offset_rate,
                                     medium)), np.finfo(float).tiny)
    return abs(plus - minus) / (2. * h * scale)

# ---------------------------------------------


def discrete_action(positions, s, velocity):
    """ sum over segments of |dr|**2 w(midpoint) / dsigma """
    positions = np.asarray(positions, dtype=float)
    dsigma = s / (positions.shape[0] - 1)
    dr = np.diff(positions, axis=0)
    w = np.asarray(velocity.inv_sq(0.5 * (positions[1:] + positions[:-1])))
    return float(np.sum(np.sum(dr ** 2, axis=1) * w) / dsigma)


def discrete_action_gradient(positions, s, velocity, w_override=None):
    """
    Gradient of ``discrete_action`` with respect to the interior nodes

    :Optional:
        w_override : array (n,)
            frozen segment weights; the grad(w) terms are then dropped

    :Returns:
        gradient : array (n-1, N)
    """
    positions = np.asarray(positions, dtype=float)
    dsigma = s / (positions.shape[0] - 1)
    dr = np.diff(positions, axis=0)
    mid = 0.5 * (positions[1:] + positions[:-1])

    if w_override is None:
        w = np.asarray(velocity.inv_sq(mid))
        half_grad = 0.5 * np.sum(dr ** 2, axis=1)[:, None] * \
            velocity.inv_sq_gradient(mid)
    else:
        w = np.asarray(w_override, dtype=float)
        half_grad = np.zeros_like(dr)

    kinetic = 2. * w[:, None] * dr
    # node j sits at the end of segment j-1 and the start of segment j
    grad = kinetic[:-1] - kinetic[1:] + half_grad[:-1] + half_grad[1:]
    return grad / dsigma


def action_hessian(ray, medium=None, step=None):
    """
    Second variation of the discrete action about the ray, interior nodes
    only, endpoints pinned

    The kinetic part is exact; the remainder is a central difference of the
    gradient with the segment weights frozen at their ray values subtracted,
    evaluated with three interleaved node colourings.

    :Returns:
        (hessian, kinetic) : arrays ((n-1) N, (n-1) N)
    """
    medium = medium or ray.medium
    velocity = medium.velocity
    positions = ray.positions
    n, dimension = positions.shape[0] - 1, positions.shape[1]
    interior = n - 1
    dsigma = ray.s / n
    if step is None:
        step = 1e-5 * velocity.scale

    w_base = np.asarray(velocity.inv_sq(0.5 * (positions[1:] + positions[:-1])))
    diag = 2. * (w_base[:-1] + w_base[1:]) / dsigma
    off = -2. * w_base[1:-1] / dsigma
    tri = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    kinetic = np.kron(tri, np.eye(dimension))

    def remainder(nodes):
        return discrete_action_gradient(nodes, ray.s, velocity) - \
            discrete_action_gradient(nodes, ray.s, velocity, w_override=w_base)

    correction = np.zeros_like(kinetic)
    if not velocity.is_homogeneous:
        node_index = np.arange(interior)
        for colour in range(3):
            moved = node_index[node_index % 3 == colour]
            if moved.size == 0:
                continue
            for axis in range(dimension):
                plus, minus = positions.copy(), positions.copy()
                plus[moved + 1, axis] += step
                minus[moved + 1, axis] -= step
                column = (remainder(plus) - remainder(minus)) / (2. * step)
                for j in moved:
                    for i in range(max(0, j - 1), min(interior, j + 2)):
                        correction[i * dimension:(i + 1) * dimension,
                                   j * dimension + axis] = column[i]
        correction = 0.5 * (correction + correction.T)

    return kinetic + correction, kinetic


def van_vleck_prefactor(ray, medium=None):
    """
    (det H / det H_free) ** (-1/2) for the discrete second variation H

    H_free is the kinetic part with the ray's own segment weights, so a
    homogeneous medium gives exactly 1.

    :Raises:
        CausticError
            when H has a negative eigenvalue (a conjugate point)
    """
    log = logging.getLogger(__name__)
    medium = medium or ray.medium

    hessian, kinetic = action_hessian(ray, medium)
    eigenvalues = linalg.eigh(hessian, eigvals_only=True)
    negative = int(np.count_nonzero(eigenvalues <= 0))
    if negative:
        log.warning("conjugate point on ray: %d non-positive Hessian "
                    "eigenvalue(s), smallest %.3g", negative, eigenvalues[0])
        raise CausticError("conjugate point detected along the ray",
                           index=negative, eigenvalue=float(eigenvalues[0]))

    correction = hessian - kinetic
    if not np.any(correction):
        return 1.0

    # det H / det K = det(I + L^-1 C L^-T) for K = L L^T
    factor = linalg.cholesky(kinetic, lower=True)
    half = linalg.solve_triangular(factor, correction, lower=True)
    relative = linalg.solve_triangular(factor, half.T, lower=True).T
    relative = 0.5 * (relative + relative.T)
    shifted = linalg.eigh(relative, eigvals_only=True)
    log_ratio = tools.fsum_complex(np.log1p(shifted))
    return float(np.exp(-0.5 * log_ratio.real))
