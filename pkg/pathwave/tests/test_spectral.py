from nose.tools import eq_, ok_, assert_raises, assert_almost_equal
import numpy as np
from scipy import stats
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from pathwave import kernels as kn
from pathwave import medium as md
from pathwave import spectral as sp
from pathwave.errors import (
    ConfigError, DegenerateSourceError, UnsupportedConfigurationError
)


def _homogeneous(C0=1.0, dimension=3, **extra):
    descriptor = {"name": "homogeneous", "C0": C0, "dimension": dimension}
    descriptor.update(extra)
    return md.make_standard_medium(descriptor)


def _single_mode(C0=1.0, nu=0.0):
    """ 1-d unit box with only the first mode """
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0]), 10.0)
    eq_(len(basis), 1)
    return basis, _homogeneous(C0, dimension=1, nu=nu)


def test_first_eigenvalue():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0]), 50.0)
    assert_almost_equal(basis.eigenvalues[0], -np.pi ** 2, places=12)
    ok_(np.all(np.diff(np.abs(basis.eigenvalues)) >= 0))


def test_mode_counts():
    cube = sp.BoxDomain([1., 1., 1.])
    eq_(len(sp.dirichlet_eigenbasis(cube, 40.0)), 1)
    basis = sp.dirichlet_eigenbasis(cube, 60.0)
    eq_(len(basis), 4)
    eq_(sorted(map(tuple, basis.indices[1:])), [(1, 1, 2), (1, 2, 1), (2, 1, 1)])
    assert_raises(ConfigError, sp.dirichlet_eigenbasis, cube, 20.0)


def test_orthonormal_and_vanishing_on_boundary():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0, 2.0, 0.5]), 300.0)
    gram = basis.gram()
    ok_(np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10)
    faces = np.array([[0., 0.3, 0.2], [1., 1.1, 0.1], [0.4, 2., 0.3], [0.5, 1., 0.5]])
    ok_(np.max(np.abs(basis.evaluate(faces))) < 1e-12)


def test_gradient_matches_finite_differences():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0, 1.5]), 120.0)
    x = np.array([0.31, 0.77])
    grad = basis.gradient(x)
    h = 1e-6
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        numeric = (basis.evaluate(x + step) - basis.evaluate(x - step)) / (2 * h)
        ok_(np.allclose(grad[:, axis], numeric, rtol=0, atol=1e-6))


def test_project_field():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1., 1., 1.]), 60.0)

    coeffs, error = sp.project_field(lambda p: basis.evaluate(p)[:, 1], basis)
    expected = np.zeros(len(basis))
    expected[1] = 1.0
    ok_(np.max(np.abs(coeffs - expected)) < 1e-10)
    ok_(error < 1e-10)

    coeffs, error = sp.project_field(lambda p: np.zeros(p.shape[0]), basis)
    ok_(not np.any(coeffs))
    eq_(error, 0.)

    def sines(p):
        return np.prod(np.sin(np.pi * p), axis=-1)

    coeffs, _ = sp.project_field(sines, basis)
    assert_almost_equal(coeffs[0], 2. ** -1.5, places=12)
    ok_(np.max(np.abs(coeffs[1:])) < 1e-12)


def test_project_vector_field():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1., 1.]), 80.0)

    def field(p):
        phi = basis.evaluate(p)
        return np.stack([phi[:, 0], 2. * phi[:, 2]], axis=-1)

    coeffs, error = sp.project_field(field, basis)
    eq_(coeffs.shape, (len(basis), 2))
    assert_almost_equal(coeffs[0, 0], 1.0, places=12)
    assert_almost_equal(coeffs[2, 1], 2.0, places=12)
    ok_(error < 1e-10)


def test_delta_source_parity_and_boundary():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0]), 400.0)
    weights = sp.delta_source_coeffs([0.5], basis)
    n = basis.indices[:, 0]
    ok_(np.max(np.abs(weights[n % 2 == 0])) < 1e-12)
    ok_(np.allclose(weights[n % 2 == 1], np.sqrt(2.) * np.sin(n[n % 2 == 1] * np.pi / 2)))
    assert_raises(DegenerateSourceError, sp.delta_source_coeffs, [0.0], basis)
    assert_raises(DegenerateSourceError, sp.delta_source_coeffs, [1.0], basis)


def test_delta_integral_improves_with_cutoff():
    box = sp.BoxDomain([1.0])
    coarse = abs(sp.delta_integral([0.5], sp.dirichlet_eigenbasis(box, 400.0)) - 1.)
    fine = abs(sp.delta_integral([0.5], sp.dirichlet_eigenbasis(box, 4000.0)) - 1.)
    ok_(coarse < 0.15)
    ok_(fine < 0.05)
    ok_(fine < coarse)


def test_stiffness_symmetric():
    """anisotropic lens medium gives a symmetric Galerkin matrix"""
    box = sp.BoxDomain([1., 1., 1.])
    basis = sp.dirichlet_eigenbasis(box, 100.0)
    medium = md.make_standard_medium({
        "name": "gaussian-lens", "amplitude": -0.2, "width": 0.3,
        "center": [0.5, 0.5, 0.5], "epsilon": 0.1,
        "anisotropy": {"kind": "random", "amplitude": 0.5, "seed": 2}})
    operator = sp.galerkin_operator(basis, medium)
    size = 3 * len(basis)
    stiffness = operator.stiffness.reshape(size, size)
    ok_(np.linalg.norm(stiffness - stiffness.T) < 1e-10 * np.linalg.norm(stiffness))
    ok_(sp.galerkin_operator(basis, medium) is operator)


def test_homogeneous_stiffness_is_diagonal():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1., 1.]), 150.0)
    plain = sp.galerkin_operator(basis, _homogeneous(1.5, dimension=2))
    size = 2 * len(basis)
    expected = np.kron(np.diag(2.25 * basis.eigenvalues), np.eye(2))
    ok_(np.allclose(plain.stiffness.reshape(size, size), expected))

    # the quadrature path agrees on a homogeneous medium
    lens = md.make_standard_medium({
        "name": "gaussian-lens", "amplitude": 1e-12, "C0": 1.5, "dimension": 2})
    assembled = sp.galerkin_operator(basis, lens)
    ok_(np.allclose(assembled.stiffness.reshape(size, size), expected,
                    rtol=0, atol=1e-8))


def test_time_dependent_damping_rejected():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0]), 50.0)
    damping = md.DampingField(lambda x, t=0.: 0.1 * (1. + t))
    medium = md.Medium(md.VelocityField.homogeneous(1.0, 1), damping=damping)
    assert_raises(UnsupportedConfigurationError, sp.galerkin_operator,
                  basis, medium)


def test_single_mode_oscillation():
    """u(t) = cos(C0 sqrt|lambda| t) over ten periods"""
    C0 = 1.3
    basis, medium = _single_mode(C0)
    omega = C0 * np.pi
    dt = 4e-4 / omega
    n_steps = int(round(20. * np.pi / (omega * dt)))
    history = sp.evolve(sp.SpectralState(basis, [[1.0]]), medium, dt, n_steps,
                        record_every=50)
    exact = np.cos(omega * history.times)
    ok_(np.max(np.abs(history.u[:, 0, 0] - exact)) < 1e-6)


def test_stepper_is_second_order():
    """halving dt cuts the error by four (compared at a zero crossing)"""
    basis, medium = _single_mode()
    omega = np.pi
    errors = []
    for dt in (0.05 / omega, 0.025 / omega):
        n_steps = int(round(20.5 * np.pi / (omega * dt)))
        history = sp.evolve(sp.SpectralState(basis, [[1.0]]), medium, dt, n_steps,
                            record_every=n_steps)
        errors.append(abs(history.u[-1, 0, 0] - np.cos(omega * history.times[-1])))
    ok_(3.5 < errors[0] / errors[1] < 4.5)


def test_damping_envelope():
    """peaks decay as exp(-nu t / 2)"""
    nu = 0.2
    basis, medium = _single_mode(nu=nu)
    history = sp.evolve(sp.SpectralState(basis, [[1.0]]), medium, 1e-3, 20000)
    trace = history.u[:, 0, 0]
    peaks, _ = find_peaks(trace)
    fit = stats.linregress(history.times[peaks], np.log(trace[peaks]))
    ok_(abs(-fit.slope - nu / 2) < 0.01 * nu / 2)


def test_energy_conserved():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1., 1., 1.]), 200.0)
    medium = _homogeneous()
    rng = np.random.default_rng(6)
    state = sp.SpectralState(basis, rng.standard_normal((len(basis), 3)),
                             rng.standard_normal((len(basis), 3)))
    omega_max = np.sqrt(np.max(np.abs(basis.eigenvalues)))
    history = sp.evolve(state, medium, 1e-3 / omega_max, 1000)
    ok_(history.energy_drift < 1e-6)

    operator = sp.galerkin_operator(basis, medium)
    expected = 0.5 * np.sum(state.v ** 2 +
                            np.abs(basis.eigenvalues)[:, None] * state.u ** 2)
    assert_almost_equal(sp.energy(state.u, state.v, operator.stiffness) / expected,
                        1.0, places=12)


def test_stability_bound_enforced():
    basis, medium = _single_mode()
    bound = sp.stability_bound(basis, 1.0)
    assert_raises(ConfigError, sp.evolve, sp.SpectralState(basis, [[1.0]]),
                  medium, 1.01 * bound, 10)


def test_continuity_in_epsilon():
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1., 1., 1.]), 100.0)
    anisotropy = {"kind": "random", "amplitude": 1.0, "seed": 1}
    rng = np.random.default_rng(3)
    start = rng.standard_normal((len(basis), 3))
    runs = []
    for eps in (0.0, 1e-8):
        medium = md.make_standard_medium({"name": "homogeneous", "epsilon": eps,
                                          "anisotropy": anisotropy})
        history = sp.evolve(sp.SpectralState(basis, start), medium, 1e-3, 500,
                            record_every=500)
        runs.append(history.u[-1])
    ok_(np.linalg.norm(runs[1] - runs[0]) < 1e-6 * np.linalg.norm(runs[0]))


def test_green_onset_in_one_dimension():
    """half-step onset at d / C0 with nothing before it"""
    C0, d = 1.0, 0.3
    basis = sp.dirichlet_eigenbasis(sp.BoxDomain([1.0]), 4e5)
    dt = 2e-4
    times = np.arange(0., 0.55, dt)
    response = sp.spectral_green([0.8], [0.5], times, _homogeneous(C0, dimension=1),
                                 basis, dt, smoothing=0.01)
    trace = response[:, 0, 0]
    onset = sp.first_arrival(times, trace, method="onset")
    ok_(abs(onset - d / C0) <= 2 * dt)
    early = times < d / C0 - 0.05
    ok_(np.max(np.abs(trace[early])) < 0.01 * np.max(np.abs(trace)))
    assert_almost_equal(np.max(trace), 0.5 / C0, places=2)


def test_green_matches_free_space_integral():
    """pre-reflection time integral against the free-space Green function"""
    box = sp.BoxDomain([1., 1., 1.])
    basis = sp.dirichlet_eigenbasis(box, 1100.0)
    medium = _homogeneous()
    dt, sigma, r = 3e-3, 0.08, 0.25
    times = np.arange(0., 0.5 + dt / 2, dt)
    x_src = box.center
    x = x_src + np.array([r, 0., 0.])
    response = sp.spectral_green(x, x_src, times, medium, basis, dt, smoothing=sigma)

    # epsilon = 0 leaves the components uncoupled
    peak = np.max(np.abs(response[:, 0, 0]))
    off = response.copy()
    for i in range(3):
        off[:, i, i] = 0.
    ok_(np.max(np.abs(off)) < 1e-8 * peak)

    fine = np.linspace(0., 0.5, 5001)
    shell = trapezoid(kn.retarded_green_homogeneous(x, x_src, fine, 0., 1.0, 0.02),
                      fine)
    reference = shell * kn.free_space_scale(1.0)
    assert_almost_equal(reference / sp.smoothed_static_response(r, 1.0, 0.), 1.0,
                        places=3)

    # the Gaussian source shaves erf(r / (sqrt(2) sigma)) off the point value
    reference *= sp.smoothed_static_response(r, 1.0, sigma) / \
        sp.smoothed_static_response(r, 1.0, 0.)
    integral = trapezoid(response[:, 0, 0], times)
    ok_(abs(integral - reference) < 0.1 * reference)

    arrival = sp.first_arrival(times, response[:, 0, 0])
    ok_(abs(arrival - r) < 0.05)


def test_first_arrival_methods():
    times = np.linspace(0., 1., 11)
    trace = np.array([0., 0., 0., 0.2, 0.6, 1.0, 0.6, 0.2, 0., 0., 0.])
    assert_almost_equal(sp.first_arrival(times, trace), 0.5)
    assert_almost_equal(sp.first_arrival(times, trace, method="onset"), 0.375)
    assert_raises(ValueError, sp.first_arrival, times, trace, "median")
