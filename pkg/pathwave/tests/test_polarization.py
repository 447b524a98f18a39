from nose.tools import eq_, ok_, assert_raises
import numpy as np
from scipy import linalg, stats
from scipy.integrate import trapezoid
from scipy.special import kv

from pathwave import kernels as kn
from pathwave import medium as md
from pathwave import polarization as pol
from pathwave import rays
from pathwave.paths import DiscretePath
from pathwave.errors import UnsupportedConfigurationError


def _medium(tensor, epsilon, C0=1.0, velocity=None):
    velocity = velocity or md.VelocityField.homogeneous(C0)
    return md.Medium(velocity, epsilon=epsilon,
                     anisotropy=md.AnisotropyTensor.from_constant(tensor))


def _random_tensor(seed, amplitude=1.0):
    return md.random_symmetric_tensor(3, amplitude, seed)


def _random_path(seed, steps=3, s=0.7):
    rng = np.random.default_rng(seed)
    return DiscretePath(s, rng.uniform(-1, 1, size=(steps + 1, 3)))


def _brute_force(path, tensor, epsilon, C0=1.0):
    """ explicit segment exponentials, earliest rightmost """
    phi = np.eye(3, dtype=complex)
    for m in range(path.steps):
        u = (path.positions[m + 1] - path.positions[m]) / path.dsigma
        generator = np.einsum('pmqn,m,n->pq', tensor, u, u) / C0 ** 4
        phi = linalg.expm(-1j * epsilon * generator * path.dsigma) @ phi
    return phi


def test_ordered_identity_without_anisotropy():
    path = _random_path(0)
    eye = np.eye(3)
    phi = pol.ordered_anisotropy_factor(path, _medium(_random_tensor(1), 0.0))
    ok_(np.array_equal(phi.matrix, eye))
    phi = pol.ordered_anisotropy_factor(
        path, md.Medium(md.VelocityField.homogeneous(1.0), epsilon=0.3))
    ok_(np.array_equal(phi.matrix, eye))


def test_ordered_commuting_generators():
    """isotropic-diagonal gamma on a straight path is a pure phase"""
    g, v, s, C0, eps = 0.8, 1.5, 2.0, 1.2, 0.05
    tensor = g * np.einsum('pq,mn->pmqn', np.eye(3), np.eye(3))
    path = DiscretePath.straight([v * s, 0., 0.], [0., 0., 0.], 0., 0., s, 25)
    phi = pol.ordered_anisotropy_factor(path, _medium(tensor, eps, C0)).matrix
    expected = np.exp(-1j * eps * g * v ** 2 * s / C0 ** 4) * np.eye(3)
    ok_(np.allclose(phi, expected, rtol=0, atol=1e-13))


def test_ordered_two_segment_brute_force():
    """noncommuting segments multiply in proper-time order"""
    tensor = _random_tensor(4)
    path = DiscretePath(1.0, [[0., 0., 0.], [1., 0., 0.], [1., 1.5, -0.5]])
    eps = 0.4
    phi = pol.ordered_anisotropy_factor(path, _medium(tensor, eps)).matrix
    ok_(np.max(np.abs(phi - _brute_force(path, tensor, eps))) < 1e-14)

    wrong_order = _brute_force(path.reversed(), tensor, eps)
    ok_(np.max(np.abs(phi - wrong_order)) > 1e-6)


def test_ordered_reversal():
    """reversed paths give the reverse-ordered product (the transpose)"""
    for seed in range(5):
        tensor = _random_tensor(10 + seed)
        path = _random_path(seed)
        medium = _medium(tensor, 0.3)
        forward = pol.ordered_anisotropy_factor(path, medium).matrix
        backward = pol.ordered_anisotropy_factor(path.reversed(), medium).matrix
        ok_(np.max(np.abs(backward - _brute_force(path.reversed(), tensor, 0.3)))
            < 1e-13)
        ok_(np.max(np.abs(backward - forward.T)) < 1e-13)


def test_ordered_unitary():
    """symmetric generators give a unitary product"""
    for seed in range(5):
        path = _random_path(seed, steps=12)
        phi = pol.ordered_anisotropy_factor(
            path, _medium(_random_tensor(seed), 0.7)).matrix
        ok_(abs(np.linalg.norm(phi, 2) - 1.0) < 1e-12)
        ok_(np.allclose(phi.conj().T @ phi, np.eye(3), atol=1e-12))


def test_ordered_derivative_at_zero():
    """d Phi / d eps at 0 is -i times the generator integral"""
    tensor = _random_tensor(21, amplitude=0.5)
    path = DiscretePath(0.5, np.linspace([0., 0., 0.], [0.4, 0.2, -0.3], 9))
    delta = 1e-6
    phi = pol.ordered_anisotropy_factor(path, _medium(tensor, delta)).matrix
    numeric = (phi - np.eye(3)) / delta
    exact = -1j * pol.anisotropy_generator_integral(path, _medium(tensor, delta))
    ok_(np.max(np.abs(numeric - exact)) < 1e-6 * np.max(np.abs(exact)))


def test_first_order_identity_and_straight_ray():
    medium = _medium(_random_tensor(3), 0.0)
    ray = rays.two_point_ray([1., 0.5, 0.], [0., 0., 0.], medium, n_steps=20)
    ok_(np.array_equal(pol.first_order_factor(ray).matrix, np.eye(3)))

    tensor, eps, C0, s = _random_tensor(5), 0.02, 1.4, 0.8
    medium = _medium(tensor, eps, C0)
    x = np.array([0.6, -0.2, 0.3])
    ray = rays.two_point_ray(x, np.zeros(3), medium, s=s, n_steps=20)
    v = x / s
    expected = np.eye(3) - 1j * eps * s * \
        np.einsum('imkn,m,n->ik', tensor, v, v) / C0 ** 4
    ok_(np.allclose(pol.first_order_factor(ray).matrix, expected,
                    rtol=0, atol=1e-13))


def test_first_order_error_is_second_order():
    """ordered minus first-order factor scales as eps**2"""
    velocity = md.make_standard_medium({
        "name": "gaussian-lens", "amplitude": -0.2, "width": 1.0}).velocity
    tensor = _random_tensor(8, amplitude=0.02)
    base = _medium(tensor, 0.1, velocity=velocity)
    ray = rays.two_point_ray([1.5, 0.3, 0.], [-1.5, 0., 0.2], base, n_steps=80)

    epsilons = np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    errors = []
    for eps in epsilons:
        medium = base.with_epsilon(eps)
        ordered = pol.ordered_anisotropy_factor(ray, medium, rule="trapezoid")
        first = pol.first_order_factor(ray, medium)
        errors.append(np.linalg.norm(ordered.matrix - first.matrix))
    slope = stats.linregress(np.log(epsilons), np.log(errors)).slope
    ok_(1.9 <= slope <= 2.1)


def test_unknown_rule():
    assert_raises(ValueError, pol.ordered_anisotropy_factor, _random_path(0),
                  _medium(_random_tensor(0), 0.1), "simpson")


# factorized green -----------------------------------------------------

def _homogeneous(C0=1.0, **extra):
    return md.make_standard_medium(dict({"name": "homogeneous", "C0": C0}, **extra))


def test_factorized_green_matches_shell_peak():
    """eps = 0: scalar times identity, peak as the regularized Green value"""
    quad = pol.QuadratureConfig(reg_width=0.02)
    for C0, distance in ((1.0, 1.0), (1.5, 2.0)):
        x = np.array([distance, 0., 0.])
        arrival = distance / C0
        green = pol.factorized_green(x, np.zeros(3), arrival, 0.,
                                     _homogeneous(C0), quad)
        reference = kn.retarded_green_homogeneous(x, np.zeros(3), arrival, 0.,
                                                  C0, 0.02)
        ok_(abs(green[0, 0] - reference) < 0.01 * reference)
        ok_(np.allclose(green, green[0, 0] * np.eye(3), rtol=0,
                        atol=1e-12 * abs(green[0, 0])))


def test_factorized_green_pulse_area():
    """time integral of the shell is close to 1 / (2 C0 |x - x'|)"""
    quad = pol.QuadratureConfig(reg_width=0.02)
    t = np.linspace(0.2, 1.8, 801)
    green = pol.factorized_green([1., 0., 0.], np.zeros(3), t, 0.,
                                 _homogeneous(), quad)
    area = trapezoid(green[:, 0, 0], t)
    ok_(abs(area - 0.5) < 0.02 * 0.5)
    eq_(green.shape, (801, 3, 3))


def test_factorized_green_off_cone():
    """far inside the light cone the shell has died away"""
    quad = pol.QuadratureConfig(reg_width=0.02)
    medium = _homogeneous()
    x = np.array([1., 0., 0.])
    peak = pol.factorized_green(x, np.zeros(3), 1.0, 0., medium, quad)[0, 0]
    off = pol.factorized_green(x, np.zeros(3), 8.0, 0., medium, quad)
    ok_(np.max(np.abs(off)) < 1e-6 * peak)
    before = pol.factorized_green(x, np.zeros(3), -1.0, 0., medium, quad)
    ok_(not np.any(before))


def test_factorized_green_uniaxial_entry():
    """gamma_1111 along axis 1 only moves entry (1, 1)"""
    tensor = np.zeros((3,) * 4)
    tensor[0, 0, 0, 0] = 1.0
    quad = pol.QuadratureConfig(reg_width=0.05)
    x = np.array([1., 0., 0.])
    t = np.array([0.95, 1.0, 1.05])
    plain = pol.factorized_green(x, np.zeros(3), t, 0., _medium(tensor, 0.0), quad)
    bent = pol.factorized_green(x, np.zeros(3), t, 0., _medium(tensor, 0.2), quad)
    diff = np.abs(bent - plain)
    ok_(np.max(diff[:, 0, 0]) > 1e-6 * np.max(np.abs(plain)))
    diff[:, 0, 0] = 0.
    ok_(np.max(diff) < 1e-14 * np.max(np.abs(plain)))


def test_polarization_average_closed_form():
    """<1/s> under exp(-eta/s - eta s) is K0(2 eta) / K1(2 eta)"""
    quad = pol.QuadratureConfig(reg_width=0.05)
    settings = quad.resolve(1.0, 1.0)
    eta = settings["eta"]
    phi = np.eye(3) - 0.3j * np.diag([1., 0., 0.])
    average = pol.polarization_average(phi, settings)
    expected = np.eye(3) + kv(0, 2. * eta) / kv(1, 2. * eta) * (phi - np.eye(3))
    ok_(np.allclose(average, expected, rtol=0, atol=1e-7))
    eq_(pol.polarization_average(np.eye(3), settings).tolist(),
        np.eye(3).tolist())


def test_factorized_green_is_the_product_of_its_integrals():
    """Re{-i S(t) <Phi>} built by hand agrees with the assembled matrix"""
    tensor = _random_tensor(4, 0.5)
    medium = _medium(tensor, 0.1)
    quad = pol.QuadratureConfig(reg_width=0.05)
    x = np.array([1., 0.2, 0.])
    t = np.array([0.9, 1.02, 1.1])
    green = pol.factorized_green(x, np.zeros(3), t, 0., medium, quad)

    ray = rays.two_point_ray(x, np.zeros(3), medium, s=1.0, n_steps=quad.n_steps)
    c_mid = float(medium.velocity(ray.midpoint()))
    settings = quad.resolve(np.linalg.norm(x), c_mid)
    scalar = pol.scalar_green_integral(x, np.zeros(3), t, 0., c_mid, settings)
    average = pol.polarization_average(
        pol.first_order_factor(ray, medium).matrix, settings)
    by_hand = np.real(scalar[:, None, None] * average)
    ok_(np.allclose(green, by_hand, rtol=0, atol=1e-12 * np.max(np.abs(green))))

    # eps = 0: the scalar integral alone is the Green value
    plain = pol.factorized_green(x, np.zeros(3), t, 0., _medium(tensor, 0.), quad)
    ok_(np.allclose(plain, np.real(scalar)[:, None, None] * np.eye(3),
                    rtol=0, atol=1e-12 * np.max(np.abs(plain))))


def test_factorized_green_preconditions():
    lossy = _homogeneous(nu=0.1)
    assert_raises(UnsupportedConfigurationError, pol.factorized_green,
                  [1., 0., 0.], np.zeros(3), 1., 0., lossy)
    flat = md.make_standard_medium({"name": "homogeneous", "dimension": 2})
    assert_raises(UnsupportedConfigurationError, pol.factorized_green,
                  [1., 0.], np.zeros(2), 1., 0., flat)
