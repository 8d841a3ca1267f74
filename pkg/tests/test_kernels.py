import numpy as np
import pytest

from vcl.errors import InvalidModulusError, SingularInputError
from vcl.kernels import (
    DoublyPeriodic,
    Finite,
    SinglyPeriodic,
    half_period_zetas,
    upsilon,
    upsilon_wirtinger,
    weierstrass_p,
    weierstrass_zeta,
    xi,
    xi_wirtinger,
)

from oracles import p_lattice_sum, wirtinger_fd, zeta_lattice_sum

TAUS = [1j, 0.5 + 1j, 0.3 + 0.8j, -0.2 + 1.4j]


def test_upsilon_finite_simple():
    assert upsilon(2.0, Finite()) == pytest.approx(0.5)


def test_upsilon_singly_half_period_zero():
    assert abs(upsilon(0.5, SinglyPeriodic())) < 1e-15


def test_upsilon_singly_offset_row():
    # cot(pi/2 + iy) = -i tanh(pi y)
    val = upsilon(0.5 + 0.3j, SinglyPeriodic())
    assert val == pytest.approx(-1j * np.pi * np.tanh(0.3 * np.pi), abs=1e-14)


def test_upsilon_doubly_half_lattice_zero():
    g = DoublyPeriodic(1j)
    assert abs(upsilon((1 + 1j) / 2, g)) < 1e-13
    # confirmed against the slow lattice-sum oracle
    tau = 1j
    z = (1 + tau) / 2
    e1, e2 = half_period_zetas(tau)
    direct = zeta_lattice_sum(z, tau, N=120) - (e1 + e2)
    assert abs(direct) < 1e-4


@pytest.mark.parametrize("tau", TAUS)
def test_zeta_oddness(tau):
    rng = np.random.default_rng(3)
    for _ in range(4):
        z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4) * tau.imag)
        assert weierstrass_zeta(-z, tau) == pytest.approx(-weierstrass_zeta(z, tau), rel=1e-12)


@pytest.mark.parametrize("tau", [1j, 0.5 + 1j])
def test_legendre_relation_against_lattice_sum(tau):
    e1, e2 = half_period_zetas(tau)
    assert abs(e1 * tau - e2 - 1j * np.pi) < 1e-12
    # the half-period values themselves agree with the independent sum
    assert abs(zeta_lattice_sum(0.5, tau) - e1) < 1e-4
    assert abs(zeta_lattice_sum(tau / 2.0, tau) - e2) < 1e-4


@pytest.mark.parametrize("tau", TAUS)
def test_zeta_quasi_periodicity(tau):
    e1, e2 = half_period_zetas(tau)
    z = 0.17 + 0.11j
    assert weierstrass_zeta(z + 1, tau) - weierstrass_zeta(z, tau) == pytest.approx(2 * e1, abs=1e-12)
    assert weierstrass_zeta(z + tau, tau) - weierstrass_zeta(z, tau) == pytest.approx(2 * e2, abs=1e-12)


def test_zeta_matches_lattice_sum():
    tau = 0.3 + 0.8j
    for z in (0.3 + 0.2j, 0.1 - 0.35j, -0.25 + 0.3j):
        assert abs(weierstrass_zeta(z, tau) - zeta_lattice_sum(z, tau)) < 1e-4


def test_p_properties():
    tau = 0.5 + 1j
    z = 0.21 + 0.32j
    assert weierstrass_p(-z, tau) == pytest.approx(weierstrass_p(z, tau), rel=1e-12)
    assert weierstrass_p(z + 1, tau) == pytest.approx(weierstrass_p(z, tau), rel=1e-12)
    assert weierstrass_p(z + tau, tau) == pytest.approx(weierstrass_p(z, tau), rel=1e-12)
    assert abs(weierstrass_p(z, tau) - p_lattice_sum(z, tau)) < 1e-4


def test_p_is_minus_zeta_derivative():
    tau = 1j
    z = 0.23 + 0.19j
    h = 1e-6
    dz = (weierstrass_zeta(z + h, tau) - weierstrass_zeta(z - h, tau)) / (2 * h)
    assert -dz == pytest.approx(weierstrass_p(z, tau), rel=1e-8)


def test_xi_values():
    tau = 0.4 + 1.2j
    e1, e2 = half_period_zetas(tau)
    assert xi(0.0, tau) == pytest.approx(0.0, abs=1e-15)
    assert xi(1.0, tau) == pytest.approx(2 * e1, rel=1e-14)
    assert xi((1 + tau) / 2, tau) == pytest.approx(e1 + e2, rel=1e-14)


def test_xi_wirtinger_decomposition():
    tau = 0.3 + 0.9j
    c1, c2 = xi_wirtinger(tau)
    rng = np.random.default_rng(11)
    for _ in range(5):
        z = complex(rng.normal(), rng.normal())
        assert xi(z, tau) == pytest.approx(c1 * z + c2 * np.conj(z), abs=1e-12)
    dz, dzbar = wirtinger_fd(lambda w: xi(w, tau), 0.1 + 0.2j)
    assert dz == pytest.approx(c1, abs=1e-7)
    assert dzbar == pytest.approx(c2, abs=1e-7)


@pytest.mark.parametrize("tau", TAUS)
def test_upsilon_double_periodicity(tau):
    g = DoublyPeriodic(tau)
    rng = np.random.default_rng(7)
    z = rng.uniform(-0.45, 0.45, 25) + 1j * rng.uniform(-0.45, 0.45, 25) * tau.imag + 0.05
    assert np.max(np.abs(upsilon(z + 1, g) - upsilon(z, g))) < 1e-12
    assert np.max(np.abs(upsilon(z + tau, g) - upsilon(z, g))) < 1e-12


def test_upsilon_single_periodicity():
    g = SinglyPeriodic()
    rng = np.random.default_rng(8)
    z = rng.uniform(-0.45, 0.45, 25) + 1j * rng.uniform(-0.6, 0.6, 25) + 0.03
    assert np.max(np.abs(upsilon(z + 1, g) - upsilon(z, g))) < 1e-12


@pytest.mark.parametrize(
    "geometry",
    [Finite(), SinglyPeriodic(), DoublyPeriodic(0.5 + 1j)],
)
def test_upsilon_oddness(geometry):
    rng = np.random.default_rng(9)
    for _ in range(5):
        z = complex(rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4))
        assert upsilon(-z, geometry) == pytest.approx(-upsilon(z, geometry), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "geometry",
    [Finite(), SinglyPeriodic(), DoublyPeriodic(1j), DoublyPeriodic(0.5 + 1j)],
)
def test_upsilon_laurent_compatibility(geometry):
    # K(z) - 1/z stays bounded (and small) toward the singularity
    for r in (1e-2, 1e-4, 1e-6):
        z = r * np.exp(0.7j)
        delta = upsilon(z, geometry) - 1.0 / z
        assert abs(delta) < 1.0
    z = 1e-8 * np.exp(0.7j)
    assert abs(upsilon(z, geometry) - 1.0 / z) < 1e-5


def test_upsilon_wirtinger_finite():
    pair = upsilon_wirtinger(1.0, Finite())
    assert pair.d_z == pytest.approx(-1.0)
    assert pair.d_zbar == 0


@pytest.mark.parametrize(
    "z,geometry",
    [
        (0.3, SinglyPeriodic()),
        (0.2 + 0.1j, DoublyPeriodic(1j)),
        (0.15 - 0.22j, DoublyPeriodic(0.4 + 0.9j)),
        (0.37 + 0.05j, Finite()),
    ],
)
def test_upsilon_wirtinger_matches_finite_differences(z, geometry):
    pair = upsilon_wirtinger(z, geometry)
    dz, dzbar = wirtinger_fd(lambda w: upsilon(w, geometry), z)
    scale = max(1.0, abs(pair.d_z))
    assert abs(pair.d_z - dz) / scale < 1e-7
    assert abs(pair.d_zbar - dzbar) / scale < 1e-7


def test_singular_guard():
    with pytest.raises(SingularInputError):
        upsilon(0.0, Finite())
    with pytest.raises(SingularInputError):
        upsilon(1.0 + 1e-14j, SinglyPeriodic())
    with pytest.raises(SingularInputError):
        weierstrass_zeta(1 + 1j + 1e-15, 1j)
    with pytest.raises(SingularInputError):
        upsilon_wirtinger(2.0, SinglyPeriodic())


def test_invalid_modulus():
    with pytest.raises(InvalidModulusError):
        DoublyPeriodic(1.0)
    with pytest.raises(InvalidModulusError):
        weierstrass_zeta(0.3, 0.5 - 1j)
    with pytest.raises(InvalidModulusError):
        xi(0.3, 1.0 + 0j)


def test_legendre_grid():
    for re in np.linspace(-0.4, 0.4, 5):
        for im in np.linspace(0.5, 3.0, 5):
            tau = complex(re, im)
            e1, e2 = half_period_zetas(tau)
            assert abs(e1 * tau - e2 - 1j * np.pi) < 1e-12
