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
Material-property fields of a weakly anisotropic medium.

All fields are closed-form evaluators taking points of shape ``(..., N)``
and returning arrays of shape ``(...)`` (scalars) or ``(..., N, N, N, N)``
(the anisotropy tensor). The elasticity tensor is always
``C0**2 * delta_ik * delta_jl + epsilon * gamma_ijkl`` with ``epsilon`` kept
explicit and ``gamma`` unscaled.
"""

import logging
import sys

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from pathwave import tools
from pathwave.errors import (
    ConfigError, DomainError, InvalidMediumError
)

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

tools.createLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
FOURIER_NORM = (2. * np.pi) ** -1.5

# interpolation order of grid media -> RegularGridInterpolator method
GRID_METHODS = {0: "nearest", 1: "linear", 3: "cubic", 5: "quintic"}

# documented keys and defaults of every builtin medium
MEDIUM_DEFAULTS = {
    "common": {
        "dimension": 3, "epsilon": 0.0, "nu": 0.0,
        "domain_min": None, "domain_max": None,
    },
    "homogeneous": {"C0": 1.0},
    "linear-gradient": {"C0": 1.0, "g": 0.1, "axis": 1},
    "gaussian-lens": {"C0": 1.0, "amplitude": -0.1,
                      "center": None, "width": 0.5},
    "fourier-perturbed": {"base": "homogeneous", "modes": []},
    "grid": {"C0": 1.0, "grid_base": "homogeneous", "grid_file": None,
             "grid_min": -2.0, "grid_max": 2.0, "grid_points": 33,
             "interpolation_order": 1},
}

ANISOTROPY_DEFAULTS = {
    "kind": "zero", "a": 0.0, "b": 0.0, "g": 1.0,
    "axis": 1, "amplitude": 1.0, "seed": 0,
}


# =============================================
# tensor helpers
# =============================================

def kronecker_product_tensor(dimension):
    """ delta_ik * delta_jl laid out as [i, j, k, l] """
    eye = np.eye(dimension)
    return np.einsum('ik,jl->ijkl', eye, eye)


def isotropic_tensor(a, b, dimension=3):
    """ a * d_ij d_kl + b * (d_ik d_jl + d_il d_jk) """
    eye = np.eye(dimension)
    return (a * np.einsum('ij,kl->ijkl', eye, eye) +
            b * (np.einsum('ik,jl->ijkl', eye, eye) +
                 np.einsum('il,jk->ijkl', eye, eye)))


def symmetrize_tensor(tensor):
    """ average over the index permutations generated by ijkl=jikl=ijlk=klij """
    t = np.asarray(tensor, dtype=float)
    images = [
        t,
        t.transpose(1, 0, 2, 3),
        t.transpose(0, 1, 3, 2),
        t.transpose(1, 0, 3, 2),
        t.transpose(2, 3, 0, 1),
        t.transpose(3, 2, 0, 1),
        t.transpose(2, 3, 1, 0),
        t.transpose(3, 2, 1, 0),
    ]
    return sum(images) / 8.


def random_symmetric_tensor(dimension=3, amplitude=1.0, seed=0):
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((dimension,) * 4)
    return amplitude * symmetrize_tensor(raw)


# =============================================
# fields
# =============================================

class VelocityField():
    """
    Unperturbed wave speed C0(x) > 0

    :Parameters:
        evaluator : callable
            maps points of shape (..., N) to speeds of shape (...)
        dimension : int
            spatial dimension N

    :Optional:
        gradient : callable
            analytic gradient, (..., N) -> (..., N); central differences
            with step ``1e-5 * scale`` are used when omitted
        scale : float
            domain length scale used for the finite-difference step
        constant : float
            set when the field is homogeneous
        name : str
            label used in logs and reports
    """

    def __init__(self, evaluator, dimension, gradient=None, scale=1.0,
                 constant=None, name="custom"):
        self.evaluator = evaluator
        self.dimension = int(dimension)
        self._gradient = gradient
        self.scale = float(scale)
        self.constant = constant
        self.name = name

    @classmethod
    def homogeneous(cls, C0, dimension=3):
        C0 = float(C0)
        if C0 <= 0:
            raise InvalidMediumError("C0 must be positive, got %g" % C0)

        def evaluator(x):
            return np.full(np.shape(x)[:-1], C0)

        def gradient(x):
            return np.zeros(np.shape(x))

        return cls(evaluator, dimension, gradient=gradient,
                   constant=C0, name="homogeneous")

    @classmethod
    def from_grid(cls, axes, values, method="linear", name="grid"):
        """ grid-sampled speeds through interpolation (trilinear by default) """
        field = GridField(axes, values, method=method)
        scale = max(float(ax[-1] - ax[0]) for ax in field.axes)
        return cls(field, len(field.axes), scale=scale, name=name)

    @property
    def is_homogeneous(self):
        return self.constant is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        values = np.asarray(self.evaluator(x), dtype=float)
        if not np.all(values > 0):
            raise InvalidMediumError(
                "velocity field %s is not positive at every queried point"
                % self.name)
        return values[()]

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self._gradient is not None:
            return np.asarray(self._gradient(x), dtype=float)
        return tools.central_gradient(self, x, 1e-5 * self.scale)

    def inv_sq(self, x):
        """ w(x) = C0(x)**-2 (the squared reference index) """
        return self(x) ** -2.

    def inv_sq_gradient(self, x):
        c0 = np.asarray(self(x))
        return -2. * c0[..., None] ** -3. * self.gradient(x)

# ---------------------------------------------


class DampingField():
    """ scalar damping rate nu(x, t) >= 0 """

    def __init__(self, evaluator, constant=None, time_independent=False):
        self.evaluator = evaluator
        self.constant = constant
        self.time_independent = time_independent or constant is not None

    @classmethod
    def uniform(cls, nu=0.0):
        nu = float(nu)
        if nu < 0:
            raise InvalidMediumError("damping must be non-negative")

        def evaluator(x, t=0.):
            return np.full(np.shape(x)[:-1], nu)

        return cls(evaluator, constant=nu)

    @property
    def lossless(self):
        return self.constant == 0.

    def __call__(self, x, t=0.):
        values = np.asarray(self.evaluator(np.asarray(x, dtype=float), t),
                            dtype=float)
        if np.any(values < 0):
            raise InvalidMediumError("damping field is negative")
        return values[()]

# ---------------------------------------------


class AnisotropyTensor():
    """ rank-4 perturbation gamma_ijkl(x), stored in [i, j, k, l] order """

    def __init__(self, evaluator, dimension, constant=None, name="custom"):
        self.evaluator = evaluator
        self.dimension = int(dimension)
        self.constant = constant
        self.name = name

    @classmethod
    def from_constant(cls, tensor, name="constant"):
        tensor = np.array(tensor, dtype=float)
        dim = tensor.shape[0]
        if tensor.shape != (dim,) * 4:
            raise InvalidMediumError("anisotropy tensor must be N x N x N x N")
        tensor.setflags(write=False)

        def evaluator(x):
            return np.broadcast_to(tensor, np.shape(x)[:-1] + tensor.shape)

        return cls(evaluator, dim, constant=tensor, name=name)

    @classmethod
    def zero(cls, dimension=3):
        return cls.from_constant(np.zeros((dimension,) * 4), name="zero")

    @property
    def is_zero(self):
        return self.constant is not None and not np.any(self.constant)

    def __call__(self, x):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)))

    def contract(self, x, v):
        """ gamma_{a j b l}(x) v_j v_l, computed from the canonical layout """
        return np.einsum('...ajbl,...j,...l->...ab', self(x), v, v)

# ---------------------------------------------


class GridField():
    """ interpolating evaluator over a rectilinear grid """

    def __init__(self, axes, values, method="linear"):
        self.axes = [np.asarray(ax, dtype=float) for ax in axes]
        self.values = np.asarray(values, dtype=float)
        self.method = method
        self._interp = RegularGridInterpolator(
            self.axes, self.values, method=method,
            bounds_error=True)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        try:
            out = self._interp(flat)
        except ValueError as e:
            raise DomainError("grid field queried outside its grid: %s" % e)
        return out.reshape(x.shape[:-1])

# ---------------------------------------------


class Medium():
    """
    A weakly anisotropic medium: velocity, damping, anisotropy and the
    perturbation strength epsilon >= 0
    """

    def __init__(self, velocity, damping=None, anisotropy=None, epsilon=0.0,
                 domain=None, name="custom", descriptor=None):
        self.velocity = velocity
        self.dimension = velocity.dimension
        self.damping = damping if damping is not None else DampingField.uniform(0.)
        self.anisotropy = anisotropy if anisotropy is not None else \
            AnisotropyTensor.zero(self.dimension)
        self.epsilon = float(epsilon)
        self.name = name
        self.descriptor = descriptor or {"name": name}

        if self.epsilon < 0:
            raise InvalidMediumError("epsilon must be >= 0")
        if self.anisotropy.dimension != self.dimension:
            raise InvalidMediumError(
                "anisotropy dimension %d does not match medium dimension %d"
                % (self.anisotropy.dimension, self.dimension))

        self.domain = None
        if domain is not None:
            lo, hi = (np.asarray(d, dtype=float) for d in domain)
            self.domain = (lo, hi)

    @property
    def is_homogeneous(self):
        return self.velocity.is_homogeneous

    @property
    def lossless(self):
        return self.damping.lossless

    def contains(self, x):
        if self.domain is None:
            return True
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.domain[0]) and np.all(x <= self.domain[1]))

    def with_epsilon(self, epsilon):
        return Medium(self.velocity, self.damping, self.anisotropy,
                      epsilon=epsilon, domain=self.domain, name=self.name,
                      descriptor=dict(self.descriptor, epsilon=epsilon))

    def __repr__(self):
        return "Medium(%s, N=%d, epsilon=%g)" % (
            self.name, self.dimension, self.epsilon)

# ---------------------------------------------


class RefractionDecomposition():
    """
    1/n**2 = 1/n0**2 + epsilon / n1**2, with 1/n1**2 given either by an
    evaluator or by Fourier coefficients on a set of wavevectors
    """

    def __init__(self, n0, n1=None, epsilon=0.0, wavevectors=None,
                 coefficients=None):
        self.n0 = _as_field(n0)
        self.n1 = _as_field(n1) if n1 is not None else None
        self.epsilon = float(epsilon)
        self.wavevectors = None
        self.coefficients = None
        if wavevectors is not None:
            self.wavevectors = np.asarray(wavevectors, dtype=float)
            self.coefficients = np.asarray(coefficients, dtype=complex)
            if self.coefficients.shape[0] != self.wavevectors.shape[0]:
                raise InvalidMediumError(
                    "one Fourier coefficient per wavevector is required")
        if self.n1 is None and self.wavevectors is None:
            raise InvalidMediumError(
                "refraction decomposition needs n1 or Fourier coefficients")

    @property
    def has_fourier(self):
        return self.wavevectors is not None

    def fourier_sum(self, x):
        """ complex (2 pi)^-3/2 sum_j V(k_j) exp(i k_j.x) """
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * np.einsum('...d,jd->...j', x, self.wavevectors))
        return FOURIER_NORM * (phase @ self.coefficients)

    def inv_n1_sq(self, x):
        if self.has_fourier:
            return np.real(self.fourier_sum(x))
        return np.asarray(self.n1(x), dtype=float) ** -2.

    def inv_n0_sq(self, x):
        return np.asarray(self.n0(x), dtype=float) ** -2.

    def fourier_mismatch(self, points):
        """ max |1/n1**2 (evaluator) - 1/n1**2 (Fourier sum)| over points """
        if self.n1 is None or not self.has_fourier:
            return 0.
        points = np.asarray(points, dtype=float)
        direct = np.asarray(self.n1(points), dtype=float) ** -2.
        return float(np.max(np.abs(direct - np.real(self.fourier_sum(points)))))

# ---------------------------------------------


class LameMedium():
    """
    Isotropic elastic medium from density and Lame parameters

    :Parameters:
        density, lam, mu : callable or float
            scalar fields of shape (..., N) -> (...)
        dimension : int

    :Optional:
        lam_gradient, mu_gradient : callable
            analytic gradients; central differences with step
            ``1e-5 * scale`` otherwise
        scale : float
    """

    def __init__(self, density, lam, mu, dimension=3, lam_gradient=None,
                 mu_gradient=None, scale=1.0):
        self.density = _as_field(density)
        self.lam = _as_field(lam)
        self.mu = _as_field(mu)
        self.dimension = int(dimension)
        self.lam_gradient = lam_gradient
        self.mu_gradient = mu_gradient
        self.scale = float(scale)

    def gradients(self, x):
        step = 1e-5 * self.scale
        g_lam = self.lam_gradient(x) if self.lam_gradient is not None else \
            tools.central_gradient(self.lam, x, step)
        g_mu = self.mu_gradient(x) if self.mu_gradient is not None else \
            tools.central_gradient(self.mu, x, step)
        return np.asarray(g_lam, dtype=float), np.asarray(g_mu, dtype=float)


def _as_field(value):
    if callable(value):
        return value
    constant = float(value)

    def evaluator(x):
        return np.full(np.shape(x)[:-1], constant)

    return evaluator


# =============================================
# operations
# =============================================

def elasticity_tensor_at(medium, x):
    """ C_ijkl(x) = C0(x)**2 d_ik d_jl + epsilon * gamma_ijkl(x) """
    x = tools.as_vector(x, medium.dimension)
    if not medium.contains(x):
        raise DomainError("point %s is outside the medium domain" % x.tolist())
    c0 = float(medium.velocity(x))
    tensor = c0 ** 2 * kronecker_product_tensor(medium.dimension)
    if medium.epsilon:
        tensor = tensor + medium.epsilon * medium.anisotropy(x)
    return tensor

# ---------------------------------------------


def check_symmetries(gamma, sample_points, tolerance=SYMMETRY_TOLERANCE):
    """
    Check gamma_ijkl = gamma_jikl = gamma_ijlk = gamma_klij at every sample

    :Returns:
        report : list of dict
            one entry per (point, violated relation); empty when all hold
    """
    points = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if points.shape[0] == 0:
        raise DomainError("check_symmetries needs at least one sample point")

    relations = (
        ("ijkl=jikl", (1, 0, 2, 3)),
        ("ijkl=ijlk", (0, 1, 3, 2)),
        ("ijkl=klij", (2, 3, 0, 1)),
    )
    report = []
    for point in points:
        tensor = np.asarray(gamma(point), dtype=float)
        for relation, axes in relations:
            violation = float(np.max(np.abs(tensor - tensor.transpose(axes))))
            if violation > tolerance:
                report.append({
                    "relation": relation,
                    "point": point.tolist(),
                    "max_violation": violation,
                })
    return report

# ---------------------------------------------


def lame_tensors_at(lm, x):
    """
    Lame-parameter tensors at x:
    Lambda_ijkl = d_ij d_lk lam/rho + (mu/rho)(d_il d_jk + d_jl d_ik)
    D_ikl = (d_i lam/rho) d_lk + (d_k mu/rho) d_li + (d_l mu/rho) d_ik
    """
    x = tools.as_vector(x, lm.dimension)
    rho = float(lm.density(x))
    if rho <= 0:
        raise InvalidMediumError("density must be positive, got %g" % rho)
    lam = float(lm.lam(x))
    mu = float(lm.mu(x))
    if mu < 0:
        raise InvalidMediumError("shear modulus must be non-negative")

    eye = np.eye(lm.dimension)
    big_lambda = (np.einsum('ij,lk->ijkl', eye, eye) * lam / rho +
                  (mu / rho) * (np.einsum('il,jk->ijkl', eye, eye) +
                                np.einsum('jl,ik->ijkl', eye, eye)))

    g_lam, g_mu = lm.gradients(x)
    d_tensor = (np.einsum('i,lk->ikl', g_lam / rho, eye) +
                np.einsum('k,li->ikl', g_mu / rho, eye) +
                np.einsum('l,ik->ikl', g_mu / rho, eye))
    return big_lambda, d_tensor

# ---------------------------------------------


def refraction_inv_sq(decomp, x):
    """ 1/n**2(x) = 1/n0**2(x) + epsilon/n1**2(x) """
    x = np.asarray(x, dtype=float)
    value = decomp.inv_n0_sq(x)
    if decomp.epsilon:
        value = value + decomp.epsilon * decomp.inv_n1_sq(x)
    return np.asarray(value, dtype=float)[()]


# =============================================
# builtin media
# =============================================

def _vector_param(value, dimension, default=0.):
    if value is None:
        return np.full(dimension, float(default))
    if isinstance(value, str):
        value = [float(v) for v in value.replace(";", ",").split(",") if v.strip()]
    vec = np.atleast_1d(np.asarray(value, dtype=float))
    if vec.size == 1:
        vec = np.full(dimension, float(vec[0]))
    if vec.size != dimension:
        raise ConfigError("expected %d components" % dimension)
    return vec


def read_velocity_grid(path, dimension):
    """
    Speeds on a rectilinear grid from a CSV with columns x1 .. xN, C0
    (``#`` comment lines allowed), one row per grid node in any order

    :Returns:
        (axes, values)
            sorted axis coordinates and the (n1, ..., nN) array of speeds
    """
    columns = ["x%d" % (d + 1) for d in range(dimension)]
    try:
        df = pd.read_csv(path, comment="#")
    except (OSError, ValueError) as e:
        raise ConfigError("cannot read velocity grid: %s" % e,
                          field="medium.grid_file")
    missing = [c for c in columns + ["C0"] if c not in df.columns]
    if missing:
        raise ConfigError("velocity grid lacks columns %s" % ", ".join(missing),
                          field="medium.grid_file")

    axes = [np.unique(df[c].values.astype(float)) for c in columns]
    shape = tuple(len(ax) for ax in axes)
    if len(df) != int(np.prod(shape)) or df.duplicated(columns).any():
        raise ConfigError("velocity grid is not a full rectilinear grid",
                          field="medium.grid_file")
    df = df.sort_values(columns)
    return axes, df["C0"].values.astype(float).reshape(shape)


def _velocity_from_descriptor(descriptor, dimension):
    name = descriptor.get("name", "homogeneous")
    defaults = MEDIUM_DEFAULTS.get(name)
    if defaults is None:
        raise ConfigError("unknown medium '%s'" % name, field="medium.name")
    params = dict(defaults)
    params.update({k: v for k, v in descriptor.items() if k in defaults})

    c0 = float(descriptor.get("C0", params.get("C0", 1.0)))
    if name != "fourier-perturbed" and c0 <= 0:
        raise ConfigError("C0 must be positive", field="medium.C0")

    if name == "homogeneous":
        return VelocityField.homogeneous(c0, dimension)

    if name == "linear-gradient":
        g = float(params["g"])
        axis = int(params["axis"]) - 1
        if not 0 <= axis < dimension:
            raise ConfigError("axis out of range", field="medium.axis")

        def evaluator(x):
            return c0 + g * np.asarray(x)[..., axis]

        def gradient(x):
            grad = np.zeros(np.shape(x))
            grad[..., axis] = g
            return grad

        return VelocityField(evaluator, dimension, gradient=gradient,
                             name=name)

    if name == "gaussian-lens":
        amplitude = float(params["amplitude"])
        width = float(params["width"])
        center = _vector_param(params["center"], dimension)
        if width <= 0:
            raise ConfigError("width must be positive", field="medium.width")
        if amplitude == 0:
            return VelocityField.homogeneous(c0, dimension)

        def bump(x):
            d = np.asarray(x) - center
            return np.exp(-np.einsum('...d,...d->...', d, d) / (2. * width ** 2))

        def evaluator(x):
            return c0 + amplitude * bump(x)

        def gradient(x):
            d = np.asarray(x) - center
            return (-amplitude / width ** 2) * bump(x)[..., None] * d

        return VelocityField(evaluator, dimension, gradient=gradient,
                             scale=width, name=name)

    if name == "grid":
        order = int(params["interpolation_order"])
        if order not in GRID_METHODS:
            raise ConfigError("expected one of %s" % sorted(GRID_METHODS),
                              field="medium.interpolation_order")
        if params["grid_file"]:
            axes, values = read_velocity_grid(params["grid_file"], dimension)
        else:
            base = dict(descriptor, name=params["grid_base"])
            if base["name"] == "grid":
                raise ConfigError("a grid medium cannot sample another grid",
                                  field="medium.grid_base")
            base_field = _velocity_from_descriptor(base, dimension)
            points = int(params["grid_points"])
            if points < order + 1 or points < 2:
                raise ConfigError("too few points for interpolation order %d"
                                  % order, field="medium.grid_points")
            lo = _vector_param(params["grid_min"], dimension)
            hi = _vector_param(params["grid_max"], dimension)
            if not np.all(hi > lo):
                raise ConfigError("grid_max must exceed grid_min",
                                  field="medium.grid_max")
            axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            values = np.asarray(base_field(mesh))
        return VelocityField.from_grid(axes, values, method=GRID_METHODS[order],
                                       name=name)

    if name == "fourier-perturbed":
        base = params["base"]
        if isinstance(base, str):
            base = {"name": base}
        base = dict(base)
        base.setdefault("C0", c0)
        if base.get("name") == "fourier-perturbed":
            raise ConfigError("fourier-perturbed cannot be its own base",
                              field="medium.base")
        base_field = _velocity_from_descriptor(base, dimension)
        modes = []
        for mode in params["modes"]:
            wavevector, amplitude = mode[0], mode[1]
            phase = mode[2] if len(mode) > 2 else 0.
            modes.append((_vector_param(wavevector, dimension),
                          float(amplitude), float(phase)))
        if not modes:
            return base_field
        kvecs = np.array([m[0] for m in modes])
        amps = np.array([m[1] for m in modes])
        phases = np.array([m[2] for m in modes])

        def evaluator(x):
            arg = np.einsum('...d,md->...m', np.asarray(x), kvecs) + phases
            return base_field.evaluator(x) + np.cos(arg) @ amps

        def gradient(x):
            arg = np.einsum('...d,md->...m', np.asarray(x), kvecs) + phases
            return base_field.gradient(x) - (np.sin(arg) * amps) @ kvecs

        return VelocityField(evaluator, dimension, gradient=gradient,
                             name=name)

    raise ConfigError("unknown medium '%s'" % name, field="medium.name")


def make_anisotropy(descriptor, dimension):
    """ builtin constant anisotropy tensors, all with the full symmetries """
    params = dict(ANISOTROPY_DEFAULTS)
    params.update(descriptor or {})
    kind = params["kind"]

    if kind == "zero":
        return AnisotropyTensor.zero(dimension)
    if kind == "isotropic":
        return AnisotropyTensor.from_constant(
            isotropic_tensor(float(params["a"]), float(params["b"]), dimension),
            name=kind)
    if kind == "uniaxial":
        axis = int(params["axis"]) - 1
        if not 0 <= axis < dimension:
            raise ConfigError("axis out of range", field="anisotropy.axis")
        tensor = np.zeros((dimension,) * 4)
        tensor[axis, axis, axis, axis] = float(params["g"])
        return AnisotropyTensor.from_constant(tensor, name=kind)
    if kind == "random":
        return AnisotropyTensor.from_constant(
            random_symmetric_tensor(dimension, float(params["amplitude"]),
                                    int(params["seed"])), name=kind)
    raise ConfigError("unknown anisotropy kind '%s'" % kind,
                      field="anisotropy.kind")


def make_standard_medium(descriptor):
    """
    Build a Medium from a scenario descriptor

    :Parameters:
        descriptor : dict
            ``name`` is one of homogeneous, linear-gradient, gaussian-lens,
            fourier-perturbed, grid; the remaining keys are documented in
            ``MEDIUM_DEFAULTS``; an optional ``anisotropy`` dict is documented
            in ``ANISOTROPY_DEFAULTS``

    :Returns:
        medium : Medium
    """
    descriptor = dict(descriptor)
    name = descriptor.get("name", "homogeneous")
    if name not in MEDIUM_DEFAULTS or name == "common":
        raise ConfigError("unknown medium '%s'" % name, field="medium.name")

    common = dict(MEDIUM_DEFAULTS["common"])
    common.update({k: v for k, v in descriptor.items() if k in common})
    dimension = int(common["dimension"])
    if dimension < 1:
        raise ConfigError("dimension must be positive", field="medium.dimension")

    velocity = _velocity_from_descriptor(descriptor, dimension)
    nu = float(common["nu"])
    if nu < 0:
        raise ConfigError("damping must be non-negative", field="medium.nu")
    anisotropy = make_anisotropy(descriptor.get("anisotropy"), dimension)

    domain = None
    if common["domain_min"] is not None and common["domain_max"] is not None:
        domain = (_vector_param(common["domain_min"], dimension),
                  _vector_param(common["domain_max"], dimension))

    logging.getLogger(__name__).debug(
        "built %s medium (N=%d, epsilon=%g, nu=%g)",
        name, dimension, float(common["epsilon"]), nu)
    return Medium(velocity, DampingField.uniform(nu), anisotropy,
                  epsilon=float(common["epsilon"]), domain=domain,
                  name=name, descriptor=descriptor)
