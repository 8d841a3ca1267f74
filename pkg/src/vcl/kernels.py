"""Interaction kernels for the three crystal geometries.

The pair interaction between point vortices is mediated by a complex kernel
that depends on where the vortices live:

* the plane            -> 1/z
* the cylinder (period 1) -> pi*cot(pi*z)
* the torus C/<1,tau>  -> zeta(z;tau) - xi(z;tau)

where ``zeta`` is the Weierstrass zeta function of the lattice generated by
1 and tau, and ``xi`` is the real-linear correction that turns the
quasi-periodic zeta into a genuinely doubly periodic function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidModulusError, SingularInputError

# Evaluations closer to a lattice point than this raise SingularInputError.
SINGULAR_GUARD = 1e-13

# q-series terms are added until their bound drops below this.
_SERIES_EPS = 1e-18


@dataclass(frozen=True)
class Finite:
    """Vortices in the plane."""


@dataclass(frozen=True)
class SinglyPeriodic:
    """Vortices in the cylinder C/<1>; the period is normalized to 1."""


@dataclass(frozen=True)
class DoublyPeriodic:
    """Vortices in the torus C/<1, tau> with Im tau > 0."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not (tau.imag > 0):
            raise InvalidModulusError(f"lattice modulus needs Im tau > 0, got tau={tau}")


GeometryKind = Finite | SinglyPeriodic | DoublyPeriodic


@dataclass(frozen=True)
class WirtingerPair:
    """Partial derivatives (d/dz, d/dzbar) of a kernel value."""

    d_z: complex
    d_zbar: complex


def _require_tau(tau: complex) -> complex:
    tau = complex(tau)
    if not (tau.imag > 0):
        raise InvalidModulusError(f"lattice modulus needs Im tau > 0, got tau={tau}")
    return tau


def lattice_coords(z, tau: complex):
    """Real coordinates (x, y) with z = x + y*tau."""
    z = np.asarray(z)
    y = z.imag / tau.imag
    x = z.real - y * tau.real
    return x, y


def reduce_doubly(z, tau: complex, centered: bool = True):
    """Reduce z modulo <1, tau>; returns (z0, m, n) with z = z0 + m + n*tau."""
    x, y = lattice_coords(z, tau)
    if centered:
        m, n = np.round(x), np.round(y)
    else:
        m, n = np.floor(x), np.floor(y)
    z0 = (x - m) + (y - n) * tau
    return z0, m, n


def reduce_singly(z, centered: bool = True):
    """Reduce Re z modulo 1; returns (z0, m) with z = z0 + m."""
    z = np.asarray(z)
    m = np.round(z.real) if centered else np.floor(z.real)
    return z - m, m


def _guard(z0, what: str) -> None:
    dist = np.min(np.abs(z0))
    if dist < SINGULAR_GUARD:
        raise SingularInputError(f"{what} evaluated within {dist:.2e} of a lattice point")


def _expm1c(z):
    """exp(z) - 1 for complex z, accurate near 0."""
    x, y = np.real(z), np.imag(z)
    em = np.expm1(x)
    cy, sy = np.cos(y), np.sin(y)
    return (em * cy - 2.0 * np.sin(0.5 * y) ** 2) + 1j * (em + 1.0) * sy


def _cot_pi(z):
    """cot(pi*z), stable for large |Im z| and near the poles."""
    z = np.asarray(z, dtype=complex)
    upper = z.imag >= 0
    wm1 = _expm1c(2j * np.pi * np.where(upper, z, np.conj(z)))
    val = 1j * (wm1 + 2.0) / wm1
    return np.where(upper, val, np.conj(val))


def _inv_sin2_pi(z):
    """1/sin(pi*z)^2, stable for large |Im z| and near the poles."""
    z = np.asarray(z, dtype=complex)
    upper = z.imag >= 0
    wm1 = _expm1c(2j * np.pi * np.where(upper, z, np.conj(z)))
    val = -4.0 * (wm1 + 1.0) / wm1**2
    return np.where(upper, val, np.conj(val))


@lru_cache(maxsize=64)
def _lattice_data(tau: complex):
    """Per-tau constants: nome q, series coefficients, half-period zetas.

    eta1 = zeta(1/2) comes from the Lambert series of the weight-2 Eisenstein
    sum; eta2 = zeta(tau/2) is evaluated from the sine q-series directly at
    tau/2 (no reduction, which would be circular there).
    """
    q = np.exp(1j * np.pi * tau)
    t = tau.imag
    # term bound 4*pi*exp(-pi*t*n) for arguments in the reduced cell
    n_max = max(8, int(math.ceil(math.log(4 * math.pi / _SERIES_EPS) / (math.pi * t))))
    n = np.arange(1, n_max + 1)
    q2n = q ** (2 * n)
    coeff = 4.0 * np.pi * q2n / (1.0 - q2n)

    lam = np.sum(n * q2n / (1.0 - q2n))
    eta1 = np.pi**2 * (1.0 / 6.0 - 4.0 * lam)

    half = tau / 2.0
    eta2 = (
        2.0 * eta1 * half
        + np.pi * complex(_cot_pi(half))
        + np.sum(coeff * np.sin(2.0 * np.pi * n * half))
    )
    return q, n, coeff, complex(eta1), complex(eta2)


def half_period_zetas(tau: complex) -> tuple[complex, complex]:
    """(zeta(1/2;tau), zeta(tau/2;tau)) for the lattice <1, tau>."""
    tau = _require_tau(tau)
    _, _, _, eta1, eta2 = _lattice_data(tau)
    return eta1, eta2


def weierstrass_zeta(z, tau: complex):
    """Weierstrass zeta of the lattice <1, tau>.

    The argument is reduced to the centered fundamental cell, the cell value
    comes from the cotangent q-series, and quasi-periodicity restores the
    shift: zeta(z + m + n*tau) = zeta(z) + 2*m*eta1 + 2*n*eta2.
    """
    tau = _require_tau(tau)
    q, n, coeff, eta1, eta2 = _lattice_data(tau)
    z0, mm, nn = reduce_doubly(np.asarray(z, dtype=complex), tau)
    _guard(z0, "zeta")
    base = 2.0 * eta1 * z0 + np.pi * _cot_pi(z0)
    series = np.tensordot(coeff, np.sin(2.0 * np.pi * np.multiply.outer(n, z0)), axes=1)
    out = base + series + 2.0 * mm * eta1 + 2.0 * nn * eta2
    return complex(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def weierstrass_p(z, tau: complex):
    """Weierstrass p-function of <1, tau> (the negative derivative of zeta)."""
    tau = _require_tau(tau)
    q, n, coeff, eta1, _ = _lattice_data(tau)
    z0, _, _ = reduce_doubly(np.asarray(z, dtype=complex), tau)
    _guard(z0, "weierstrass_p")
    base = -2.0 * eta1 + np.pi**2 * _inv_sin2_pi(z0)
    # d/dz of the zeta series term coeff*sin(2 pi n z) is 2 pi n coeff cos(...)
    dcoeff = 2.0 * np.pi * n * coeff
    series = np.tensordot(dcoeff, np.cos(2.0 * np.pi * np.multiply.outer(n, z0)), axes=1)
    out = base - series
    return complex(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def xi(z, tau: complex):
    """Real-linear correction 2x*zeta(1/2) + 2y*zeta(tau/2) with z = x + y*tau."""
    tau = _require_tau(tau)
    eta1, eta2 = half_period_zetas(tau)
    x, y = lattice_coords(np.asarray(z, dtype=complex), tau)
    out = 2.0 * x * eta1 + 2.0 * y * eta2
    return complex(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def xi_wirtinger(tau: complex) -> tuple[complex, complex]:
    """Coefficients (c1, c2) of the decomposition xi(z) = c1*z + c2*conj(z)."""
    tau = _require_tau(tau)
    eta1, eta2 = half_period_zetas(tau)
    den = tau - np.conj(tau)
    c1 = (2.0 * eta2 - 2.0 * eta1 * np.conj(tau)) / den
    c2 = (2.0 * eta1 * tau - 2.0 * eta2) / den
    return complex(c1), complex(c2)


def upsilon(z, geometry: GeometryKind):
    """Interaction kernel value for the given geometry.

    Finite: 1/z.  Singly periodic: pi*cot(pi*z).  Doubly periodic:
    zeta(z;tau) - xi(z;tau), which is exactly periodic in both lattice
    directions.
    """
    if isinstance(geometry, Finite):
        zz = np.asarray(z, dtype=complex)
        _guard(zz, "upsilon")
        out = 1.0 / zz
    elif isinstance(geometry, SinglyPeriodic):
        z0, _ = reduce_singly(np.asarray(z, dtype=complex))
        _guard(z0, "upsilon")
        out = np.pi * _cot_pi(z0)
    elif isinstance(geometry, DoublyPeriodic):
        tau = geometry.tau
        z0, _, _ = reduce_doubly(np.asarray(z, dtype=complex), tau)
        # zeta - xi is invariant under the reduction, so evaluate on z0
        out = weierstrass_zeta(z0, tau) - xi(z0, tau)
    else:
        raise TypeError(f"unknown geometry {geometry!r}")
    return complex(out) if np.isscalar(z) or np.ndim(z) == 0 else out


def upsilon_wirtinger(z, geometry: GeometryKind):
    """Wirtinger derivatives of the kernel at z.

    The finite and singly periodic kernels are holomorphic (d_zbar = 0); the
    doubly periodic kernel carries the constant antiholomorphic coefficient
    -c2 inherited from xi.
    """
    if isinstance(geometry, Finite):
        zz = np.asarray(z, dtype=complex)
        _guard(zz, "upsilon_wirtinger")
        d_z = -1.0 / zz**2
        d_zbar = np.zeros_like(d_z)
    elif isinstance(geometry, SinglyPeriodic):
        z0, _ = reduce_singly(np.asarray(z, dtype=complex))
        _guard(z0, "upsilon_wirtinger")
        d_z = -(np.pi**2) * _inv_sin2_pi(z0)
        d_zbar = np.zeros_like(d_z)
    elif isinstance(geometry, DoublyPeriodic):
        tau = geometry.tau
        c1, c2 = xi_wirtinger(tau)
        d_z = -weierstrass_p(z, tau) - c1
        d_zbar = np.full_like(np.asarray(d_z), -c2)
    else:
        raise TypeError(f"unknown geometry {geometry!r}")
    if np.isscalar(z) or np.ndim(z) == 0:
        return WirtingerPair(complex(d_z), complex(d_zbar))
    return WirtingerPair(d_z, d_zbar)


def reduce_to_fundamental(z, geometry: GeometryKind):
    """Map positions to the fundamental domain ([0,1) cells for periodic kinds)."""
    z = np.asarray(z, dtype=complex)
    if isinstance(geometry, Finite):
        return z
    if isinstance(geometry, SinglyPeriodic):
        z0, _ = reduce_singly(z, centered=False)
        return z0
    z0, _, _ = reduce_doubly(z, geometry.tau, centered=False)
    return z0


def reduce_difference(z, geometry: GeometryKind):
    """Reduce pairwise differences to the centered cell before kernel calls."""
    z = np.asarray(z, dtype=complex)
    if isinstance(geometry, Finite):
        return z
    if isinstance(geometry, SinglyPeriodic):
        z0, _ = reduce_singly(z)
        return z0
    z0, _, _ = reduce_doubly(z, geometry.tau)
    return z0
