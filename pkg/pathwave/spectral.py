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
Reference solver: Galerkin truncation of the elastic wave equation in a
Dirichlet box, used as ground truth for the Green-function checks.

Coefficients are stored mode-major, u[n, i] for mode n and component i.
The semi-discrete system is

    u'' = K u - D u'
    K[n, i, m, k] = -int d_j phi_n C_ijkl d_l phi_m
    D[n, m]       =  int nu phi_n phi_m

and a source delta(x - x') delta(t - t') e_i enters as a velocity kick
phi_n(x') e_i at t = t'.
"""

import itertools
import logging
import sys
from collections import namedtuple

import numpy as np
from scipy import linalg
from scipy.special import erf

from pathwave import tools
from pathwave.asynctools import multitasking
from pathwave.errors import (
    ConfigError, DegenerateSourceError, DomainError,
    UnsupportedConfigurationError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

GalerkinOperator = namedtuple("GalerkinOperator",
                              ["stiffness", "damping", "c_max"])


class BoxDomain():
    """ [0, L_1] x ... x [0, L_N] """

    def __init__(self, lengths):
        self.lengths = np.atleast_1d(np.asarray(lengths, dtype=float))
        if np.any(self.lengths <= 0):
            raise ConfigError("box side lengths must be positive",
                              field="spectral.box")

    @property
    def dimension(self):
        return self.lengths.shape[0]

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    @property
    def center(self):
        return 0.5 * self.lengths

    def strictly_inside(self, x, tolerance=1e-12):
        x = np.asarray(x, dtype=float)
        margin = tolerance * self.lengths
        return bool(np.all(x > margin) and np.all(x < self.lengths - margin))

# ---------------------------------------------


class SpectralBasis():
    """
    Tensor-product sine modes, sorted by |lambda| then by index

    phi_n(x) = prod_d sqrt(2 / L_d) sin(n_d pi x_d / L_d)
    lambda_n = -sum_d (n_d pi / L_d)**2
    """

    def __init__(self, box, indices):
        self.box = box
        self.indices = np.asarray(indices, dtype=int)
        self.wavenumbers = self.indices * np.pi / box.lengths
        self.eigenvalues = -np.sum(self.wavenumbers ** 2, axis=1)
        self._norm = np.prod(np.sqrt(2. / box.lengths))
        self._operators = {}

    def __len__(self):
        return self.indices.shape[0]

    @property
    def dimension(self):
        return self.box.dimension

    def evaluate(self, x):
        """ mode values at points (..., N) -> (..., K) """
        x = np.asarray(x, dtype=float)
        phases = x[..., None, :] * self.wavenumbers
        return self._norm * np.prod(np.sin(phases), axis=-1)

    def gradient(self, x):
        """ mode gradients at points (..., N) -> (..., K, N) """
        x = np.asarray(x, dtype=float)
        phases = x[..., None, :] * self.wavenumbers
        sines, cosines = np.sin(phases), np.cos(phases)
        grad = np.empty(phases.shape)
        for axis in range(self.dimension):
            factors = sines.copy()
            factors[..., axis] = self.wavenumbers[:, axis] * cosines[..., axis]
            grad[..., axis] = self._norm * np.prod(factors, axis=-1)
        return grad

    def integrals(self):
        """ int phi_n over the box, in closed form """
        n = self.indices
        per_axis = self.box.lengths * (1. - np.cos(n * np.pi)) / (n * np.pi)
        return self._norm * np.prod(per_axis, axis=1)

    def quadrature(self, order=None):
        """
        tensor Gauss-Legendre nodes (Q, N) and weights (Q,) on the box

        Default order per axis is 2 * (largest index on that axis) + 20,
        which resolves products of two modes to rounding.
        """
        if order is None:
            orders = 2 * self.indices.max(axis=0) + 20
        else:
            orders = np.full(self.dimension, int(order))
        axes, axis_weights = [], []
        for length, n in zip(self.box.lengths, orders):
            nodes, weights = np.polynomial.legendre.leggauss(int(n))
            axes.append(0.5 * length * (nodes + 1.))
            axis_weights.append(0.5 * length * weights)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        w = np.ones(())
        for aw in axis_weights:
            w = np.multiply.outer(w, aw)
        return grid.reshape(-1, self.dimension), w.ravel()

    def gram(self, order=None):
        points, weights = self.quadrature(order)
        values = self.evaluate(points)
        return values.T @ (weights[:, None] * values)


def dirichlet_eigenbasis(box, M_cut):
    """
    Every Dirichlet mode of the box with |lambda_n| <= M_cut

    :Returns:
        basis : SpectralBasis
    """
    log = logging.getLogger(__name__)

    first = float(np.sum((np.pi / box.lengths) ** 2))
    if M_cut < first:
        raise ConfigError("M_cut %g is below the first eigenvalue magnitude %g"
                          % (M_cut, first), field="spectral.M_cut")

    limits = np.floor(np.sqrt(M_cut) * box.lengths / np.pi).astype(int)
    ranges = [range(1, limit + 1) for limit in limits]
    modes = []
    for index in itertools.product(*ranges):
        magnitude = float(np.sum((np.asarray(index) * np.pi / box.lengths) ** 2))
        if magnitude <= M_cut:
            modes.append((magnitude, index))
    modes.sort()

    basis = SpectralBasis(box, [index for _, index in modes])
    log.info("dirichlet basis: %d modes below |lambda| = %g", len(basis), M_cut)
    return basis

# ---------------------------------------------


def project_field(f, basis, order=None):
    """
    Galerkin coefficients of a scalar or vector field

    :Parameters:
        f : callable
            points (Q, N) -> values (Q,) or (Q, C)

    :Returns:
        (coefficients, reconstruction_error)
            coefficients (K,) or (K, C); the error is the relative L2
            mismatch of the truncated expansion on the quadrature grid
    """
    points, weights = basis.quadrature(order)
    values = np.asarray(f(points), dtype=float)
    phi = basis.evaluate(points)

    w = weights.reshape((-1,) + (1,) * (values.ndim - 1))
    coeffs = np.tensordot(phi, w * values, axes=(0, 0))
    rebuilt = np.tensordot(phi, coeffs, axes=(1, 0))

    residual = np.sum(w * (values - rebuilt) ** 2)
    norm = np.sum(w * values ** 2)
    error = float(np.sqrt(residual / norm)) if norm > 0 else 0.
    return coeffs, error

# ---------------------------------------------


def delta_source_coeffs(x_src, basis, smoothing=0.0):
    """
    Mode weights phi_n(x') exp(-|lambda_n| smoothing**2 / 2) of a point
    source; ``smoothing`` is the width of an equivalent Gaussian source
    """
    x_src = tools.as_vector(x_src, basis.dimension)
    if not basis.box.strictly_inside(x_src):
        raise DegenerateSourceError(
            "source %s is not strictly inside the box; every mode vanishes there"
            % x_src.tolist())
    weights = basis.evaluate(x_src)
    if smoothing:
        weights = weights * np.exp(0.5 * basis.eigenvalues * smoothing ** 2)
    return weights


def delta_integral(x_src, basis, smoothing=0.0):
    """ integral of the truncated delta over the box (tends to 1) """
    return float(delta_source_coeffs(x_src, basis, smoothing) @ basis.integrals())

# ---------------------------------------------


def galerkin_operator(basis, medium, order=None):
    """
    Stiffness and damping matrices of ``medium`` on ``basis`` (cached per
    medium on the basis)

    :Returns:
        operator : GalerkinOperator
            stiffness (K, N, K, N), damping (K, K) or None, c_max
    """
    log = logging.getLogger(__name__)

    key = (id(medium), medium.epsilon, order)
    cached = basis._operators.get(key)
    if cached is not None and cached[0] is medium:
        return cached[1]

    if medium.dimension != basis.dimension:
        raise ConfigError("medium and box dimensions differ", field="spectral.box")
    if not medium.damping.time_independent:
        raise UnsupportedConfigurationError(
            "time-dependent damping is not supported by the Galerkin stepper")

    n_modes, dimension = len(basis), basis.dimension
    eye = np.eye(dimension)
    plain = medium.is_homogeneous and (medium.epsilon == 0 or
                                       medium.anisotropy.is_zero)

    if plain:
        c0 = medium.velocity.constant
        stiffness = np.einsum('n,nm,ik->nimk', c0 ** 2 * basis.eigenvalues,
                              np.eye(n_modes), eye)
        c_max = c0
        points = weights = None
    else:
        points, weights = basis.quadrature(order)
        grads = basis.gradient(points)
        c0 = np.asarray(medium.velocity(points))
        c_max = float(c0.max())
        isotropic = np.einsum('q,qnj,qmj->nm', weights * c0 ** 2, grads, grads)
        stiffness = -np.einsum('nm,ik->nimk', isotropic, eye)

        if medium.epsilon and not medium.anisotropy.is_zero:
            gamma = medium.anisotropy.constant
            if gamma is not None:
                # S[n, j, m, l] = int d_j phi_n d_l phi_m
                cross = np.einsum('q,qnj,qml->njml', weights, grads, grads)
                stiffness -= medium.epsilon * \
                    np.einsum('ijkl,njml->nimk', gamma, cross)
            else:
                gamma = medium.anisotropy(points)
                for i, j, k, l in itertools.product(range(dimension), repeat=4):
                    block = np.einsum('q,qn,qm->nm', weights * gamma[:, i, j, k, l],
                                      grads[:, :, j], grads[:, :, l])
                    stiffness[:, i, :, k] -= medium.epsilon * block

    damping = None
    if not medium.lossless:
        nu = medium.damping.constant
        if nu is not None:
            damping = nu * np.eye(n_modes)
        else:
            if points is None:
                points, weights = basis.quadrature(order)
            phi = basis.evaluate(points)
            nu = np.asarray(medium.damping(points))
            damping = phi.T @ ((weights * nu)[:, None] * phi)

    operator = GalerkinOperator(stiffness, damping, float(c_max))
    basis._operators[key] = (medium, operator)
    log.debug("galerkin operator: %d modes x %d components", n_modes, dimension)
    return operator

# ---------------------------------------------


class SpectralState():
    """ coefficients u[n, i], velocities v[n, i] and the current time """

    def __init__(self, basis, u, v=None, t=0.0):
        self.basis = basis
        self.u = np.array(u, dtype=float)
        self.v = np.zeros_like(self.u) if v is None else np.array(v, dtype=float)
        self.t = float(t)
        if self.u.ndim != 2 or self.u.shape[0] != len(basis):
            raise DomainError(
                "state coefficients must have shape (modes, components)")
        if self.v.shape != self.u.shape:
            raise DomainError("u and v shapes differ")

    @classmethod
    def zeros(cls, basis, components=None):
        components = components or basis.dimension
        return cls(basis, np.zeros((len(basis), components)))

    def field_at(self, x):
        """ U(x) = sum_n u_n phi_n(x), shape (..., N) """
        return np.tensordot(self.basis.evaluate(x), self.u, axes=(-1, 0))


class SpectralHistory():
    """ recorded states of an ``evolve`` run """

    def __init__(self, basis, times, u, v, energy):
        self.basis = basis
        self.times = np.asarray(times)
        self.u = np.asarray(u)
        self.v = np.asarray(v)
        self.energy = np.asarray(energy)

    @property
    def final(self):
        return SpectralState(self.basis, self.u[-1], self.v[-1], self.times[-1])

    def field_at(self, x):
        """ U(x, t) for every recorded time, shape (T, N) """
        phi = self.basis.evaluate(tools.as_vector(x, self.basis.dimension))
        return np.einsum('n,tni->ti', phi, self.u)

    @property
    def energy_drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])) /
                     abs(self.energy[0]))


def stability_bound(basis, c_max):
    """ dt <= 2 / (C_max sqrt|lambda_max|) """
    return 2. / (c_max * np.sqrt(np.max(np.abs(basis.eigenvalues))))


def energy(u, v, stiffness):
    """ (v.v - u.K u) / 2 """
    u_flat = np.ravel(u)
    k_flat = stiffness.reshape(u_flat.shape[0], u_flat.shape[0])
    return 0.5 * (np.dot(np.ravel(v), np.ravel(v)) - u_flat @ (k_flat @ u_flat))


def evolve(state, medium, dt, n_steps, record_every=1, operator=None):
    """
    Advance the Galerkin system ``n_steps`` steps of size ``dt``

    Velocity Verlet when the medium is lossless; otherwise the position form
    (I + dt D/2) u+ = 2 u - (I - dt D/2) u- + dt**2 K u, implicit in the
    damping.

    :Returns:
        history : SpectralHistory
            the initial state and every ``record_every``-th step (the last
            step is always recorded)
    """
    log = logging.getLogger(__name__)

    basis = state.basis
    operator = operator or galerkin_operator(basis, medium)
    bound = stability_bound(basis, operator.c_max)
    if dt <= 0 or dt > bound:
        raise ConfigError("dt = %g violates the stability bound %g" % (dt, bound),
                          field="spectral.dt")
    if state.u.shape[1] != medium.dimension:
        raise DomainError("state has %d components, medium needs %d"
                         % (state.u.shape[1], medium.dimension))

    shape = state.u.shape
    size = state.u.size
    stiffness = operator.stiffness.reshape(size, size)
    components = shape[1]

    times, us, vs, energies = [], [], [], []

    def record(t, u, v):
        times.append(t)
        us.append(u.reshape(shape).copy())
        vs.append(v.reshape(shape).copy())
        energies.append(0.5 * (v @ v - u @ (stiffness @ u)))

    u = state.u.ravel().copy()
    v = state.v.ravel().copy()
    t0 = state.t
    record(t0, u, v)

    if operator.damping is None:
        accel = stiffness @ u
        for step in range(1, n_steps + 1):
            v_half = v + 0.5 * dt * accel
            u = u + dt * v_half
            accel = stiffness @ u
            v = v_half + 0.5 * dt * accel
            if step % record_every == 0 or step == n_steps:
                record(t0 + step * dt, u, v)
    else:
        # the damping matrix acts on the mode index only
        damp = np.kron(operator.damping, np.eye(components))
        ident = np.eye(size)
        lhs = linalg.cho_factor(ident + 0.5 * dt * damp)
        explicit = ident - 0.5 * dt * damp

        u_prev = u
        u_curr = u + dt * v + 0.5 * dt ** 2 * (stiffness @ u - damp @ v)
        for step in range(1, n_steps + 1):
            u_next = linalg.cho_solve(
                lhs, 2. * u_curr - explicit @ u_prev + dt ** 2 * (stiffness @ u_curr))
            v_curr = (u_next - u_prev) / (2. * dt)
            if step % record_every == 0 or step == n_steps:
                record(t0 + step * dt, u_curr, v_curr)
            u_prev, u_curr = u_curr, u_next

    history = SpectralHistory(basis, times, us, vs, energies)
    log.debug("evolved %d steps of %g; energy drift %.3g",
              n_steps, dt, history.energy_drift if energies[0] else 0.)
    return history

# ---------------------------------------------


def spectral_green(x, x_src, t_grid, medium, basis, dt, smoothing=0.0,
                   pool=None):
    """
    Impulse response at ``x`` of a source at ``x_src`` firing at t = 0

    One run per source polarization e_i, each started from a velocity kick.

    :Returns:
        response : array (T, N, N)
            response[t, k, i] is component k for source polarization i
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0):
        raise DomainError("t_grid must start at or after the source time")
    dimension = medium.dimension
    x = tools.as_vector(x, dimension)
    if not basis.box.strictly_inside(x):
        raise DegenerateSourceError("receiver must be strictly inside the box")

    kick = delta_source_coeffs(x_src, basis, smoothing)
    operator = galerkin_operator(basis, medium)
    n_steps = max(1, int(np.ceil(t_grid.max() / dt)))

    def run(polarization):
        state = SpectralState.zeros(basis, dimension)
        state.v[:, polarization] = kick
        history = evolve(state, medium, dt, n_steps, operator=operator)
        trace = history.field_at(x)
        return np.stack([np.interp(t_grid, history.times, trace[:, k])
                         for k in range(dimension)], axis=-1)

    columns = multitasking.map(run, range(dimension), name=pool)
    return np.stack(columns, axis=-1)


def first_arrival(times, trace, method="peak", fraction=0.5):
    """
    Arrival time of a recorded trace

    ``peak`` returns the time of the largest |trace|; ``onset`` the first
    crossing of ``fraction`` of that maximum, linearly interpolated.
    """
    times = np.asarray(times, dtype=float)
    trace = np.abs(np.asarray(trace, dtype=float))
    peak = int(np.argmax(trace))
    if method == "peak":
        return float(times[peak])
    if method != "onset":
        raise ConfigError("unknown arrival method '%s'" % method,
                          field="method")
    level = fraction * trace[peak]
    above = int(np.argmax(trace >= level))
    if above == 0:
        return float(times[0])
    t0, t1 = times[above - 1], times[above]
    a0, a1 = trace[above - 1], trace[above]
    return float(t0 + (level - a0) * (t1 - t0) / (a1 - a0))


def smoothed_static_response(distance, C0, smoothing):
    """
    Time integral of the 3-d impulse response for a Gaussian source of
    width ``smoothing``: erf(r / (sqrt(2) sigma)) / (4 pi C0**2 r)
    """
    scale = erf(distance / (np.sqrt(2.) * smoothing)) if smoothing else 1.
    return scale / (4. * np.pi * C0 ** 2 * distance)
