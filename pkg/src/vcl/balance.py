"""Balance residuals, motion inference, moment identities and classification.

A configuration is a crystal when every vortex is advected exactly as a rigid
body: F_j = -conj(v) + i*omega*conj(p_j) + (1/2 pi i) sum_k sigma_k K(p_j - p_k)
vanishes for all j, with the kernel K of the configuration's geometry and
omega = 0 in the periodic geometries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import CrystalClass, Motion, VortexConfig
from .errors import (
    CoincidentVorticesError,
    InconsistentClassError,
    InvariantViolationError,
    UnsupportedGeometryError,
)
from .kernels import GeometryKind, reduce_difference, upsilon

DEFAULT_TOL = 1e-12

TWO_PI_I = 2j * np.pi


def default_tolerance() -> float:
    """Balance tolerance, overridable through the VCL_TOL environment variable."""
    env = os.environ.get("VCL_TOL")
    if env:
        try:
            val = float(env)
        except ValueError:
            raise InvariantViolationError(f"VCL_TOL: not a number: {env!r}") from None
        if val <= 0:
            raise InvariantViolationError("VCL_TOL: must be positive")
        return val
    return DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class BalanceReport:
    """Residual vector, its sup-norm, moment identity checks and the class."""

    residuals: np.ndarray
    sup_norm: float
    moment1_residual: Optional[complex]
    moment2_residual: Optional[complex]
    crystal_class: Optional[CrystalClass]
    tol: float

    @property
    def balanced(self) -> bool:
        return self.sup_norm <= self.tol


def _pairwise_kernel(positions: np.ndarray, geometry: GeometryKind) -> np.ndarray:
    """Matrix K(p_j - p_k) with zero diagonal."""
    n = len(positions)
    if n == 1:
        return np.zeros((1, 1), dtype=complex)
    diff = positions[:, None] - positions[None, :]
    diff = reduce_difference(diff, geometry)
    off = ~np.eye(n, dtype=bool)
    vals = np.abs(diff[off])
    if vals.min() < 1e-10:
        raise CoincidentVorticesError(f"pairwise distance {vals.min():.3e} below 1e-10")
    out = np.zeros((n, n), dtype=complex)
    out[off] = upsilon(diff[off], geometry)
    return out


def interaction(positions: np.ndarray, circulations: np.ndarray, geometry: GeometryKind) -> np.ndarray:
    """I_j = (1/2 pi i) sum_{k != j} sigma_k K(p_j - p_k)."""
    K = _pairwise_kernel(np.asarray(positions, dtype=complex), geometry)
    return (K @ np.asarray(circulations, dtype=float)) / TWO_PI_I


def residual_raw(positions, circulations, geometry: GeometryKind, v: complex, omega: float) -> np.ndarray:
    """Balance residual on raw arrays (no config validation)."""
    positions = np.asarray(positions, dtype=complex)
    F = interaction(positions, circulations, geometry) - np.conj(v)
    if omega != 0.0:
        F = F + 1j * omega * np.conj(positions)
    return F


def residual(config: VortexConfig, motion: Motion) -> np.ndarray:
    """Balance residual vector (F_1, ..., F_n)."""
    if config.is_periodic and motion.omega != 0.0:
        raise InvariantViolationError("omega must be 0 in periodic geometries")
    return residual_raw(config.positions, config.circulations, config.geometry, motion.v, motion.omega)


def infer_motion(config: VortexConfig) -> Motion:
    """Least-squares rigid motion minimizing the residual norm.

    Fits (Re v, Im v, omega) for finite configurations and (Re v, Im v) for
    periodic ones; the fit is exact when the configuration is a crystal.
    """
    I = interaction(config.positions, config.circulations, config.geometry)
    n = config.n
    fit_omega = not config.is_periodic
    cols = 3 if fit_omega else 2
    M = np.zeros((2 * n, cols))
    # residual rows: Re F_j = -a + omega*Im p_j + Re I_j ; Im F_j = b + omega*Re p_j + Im I_j
    M[0::2, 0] = -1.0
    M[1::2, 1] = 1.0
    if fit_omega:
        M[0::2, 2] = config.positions.imag
        M[1::2, 2] = config.positions.real
    d = np.empty(2 * n)
    d[0::2] = I.real
    d[1::2] = I.imag
    sol, *_ = np.linalg.lstsq(M, -d, rcond=None)
    v = complex(sol[0], sol[1])
    omega = float(sol[2]) if fit_omega else 0.0
    return Motion(v, omega)


def moment_check(config: VortexConfig, motion: Motion) -> tuple[complex, complex]:
    """Residuals of the two moment identities implied by balance (finite only).

    First:  v*sum(sigma) + i*omega*sum(sigma*p) = 0.
    Second: conj(v)*sum(sigma*p) - i*omega*sum(sigma*|p|^2)
            = ((sum sigma)^2 - sum sigma^2) / (4 pi i).
    """
    if config.is_periodic:
        raise UnsupportedGeometryError("moment identities are stated for finite configurations")
    s = config.circulations.astype(float)
    p = config.positions
    m1 = motion.v * s.sum() + 1j * motion.omega * np.sum(s * p)
    rhs = (s.sum() ** 2 - np.sum(s**2)) / (4j * np.pi)
    m2 = np.conj(motion.v) * np.sum(s * p) - 1j * motion.omega * np.sum(s * np.abs(p) ** 2) - rhs
    return complex(m1), complex(m2)


def classify(config: VortexConfig, motion: Motion, tol: float = DEFAULT_TOL) -> CrystalClass:
    """Rotating / translating / stationary verdict with count consistency checks."""
    n, n_plus, n_minus = config.n, config.n_plus, config.n_minus
    m = n_plus - n_minus
    if abs(motion.omega) > tol:
        return CrystalClass("rotating", n, n_plus, n_minus)
    if abs(motion.v) > tol:
        if m != 0:
            raise InconsistentClassError(f"translating crystal needs m = 0, got m = {m}")
        return CrystalClass("translating", n, n_plus, n_minus)
    if not config.is_periodic and m * m != n:
        raise InconsistentClassError(f"finite stationary crystal needs m^2 = n, got m^2 = {m*m}, n = {n}")
    return CrystalClass("stationary", n, n_plus, n_minus)


def check_balance(config: VortexConfig, motion: Optional[Motion] = None, tol: Optional[float] = None) -> BalanceReport:
    """Full balance report; infers the motion when none is given."""
    if tol is None:
        tol = default_tolerance()
    if motion is None:
        motion = infer_motion(config)
    res = residual(config, motion)
    sup = float(np.max(np.abs(res)))
    m1 = m2 = None
    if not config.is_periodic:
        m1, m2 = moment_check(config, motion)
    cls = None
    if sup <= tol:
        try:
            cls = classify(config, motion, tol)
        except InconsistentClassError:
            cls = None
    return BalanceReport(res, sup, m1, m2, cls, tol)
