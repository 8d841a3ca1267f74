"""Real Jacobian of the balance map, numerical rank and nondegeneracy verdicts.

Real coordinates are interleaved as (Re p_1, Im p_1, Re p_2, Im p_2, ...) and
the residual rows follow the same layout.  The complex linearization
dF = A dp + B d(conj p) is folded into 2x2 real blocks
[[Re(A+B), -Im(A-B)], [Im(A+B), Re(A-B)]].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .balance import DEFAULT_TOL, TWO_PI_I, classify, residual, residual_raw
from .config import CrystalClass, Motion, SymmetryGroup, VortexConfig, require_symmetry
from .errors import CoincidentVorticesError, NotBalancedError
from .kernels import Finite, reduce_difference, upsilon_wirtinger

RANK_TOL_PER_DOF = 1e-11  # singular values below 2n * this * s_max count as zero


@dataclass(frozen=True, eq=False)
class RankReport:
    """SVD-based rank summary of a (possibly restricted) balance Jacobian."""

    jacobian: np.ndarray
    singular_values: np.ndarray
    rank: int
    null_dim: int
    max_possible_rank: int
    nondegenerate: bool
    crystal_class: Optional[CrystalClass] = None
    restricted: bool = False
    subspace_dim: Optional[int] = None


def wirtinger_to_real(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Fold complex blocks dF = A dp + B d(conj p) into the real 2n x 2n matrix."""
    n = A.shape[0]
    J = np.empty((2 * n, 2 * n))
    S, D = A + B, A - B
    J[0::2, 0::2] = S.real
    J[0::2, 1::2] = -D.imag
    J[1::2, 0::2] = S.imag
    J[1::2, 1::2] = D.real
    return J


def analytic_jacobian(config: VortexConfig, motion: Motion) -> np.ndarray:
    """Closed-form real Jacobian of the residual in the interleaved layout."""
    p = config.positions
    s = config.circulations.astype(float)
    n = config.n
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, n), dtype=complex)
    if n > 1:
        diff = reduce_difference(p[:, None] - p[None, :], config.geometry)
        off = ~np.eye(n, dtype=bool)
        if np.abs(diff[off]).min() < 1e-10:
            raise CoincidentVorticesError("vortices too close for a Jacobian")
        pair = upsilon_wirtinger(diff[off], config.geometry)
        dz = np.zeros((n, n), dtype=complex)
        dzbar = np.zeros((n, n), dtype=complex)
        dz[off], dzbar[off] = pair.d_z, pair.d_zbar
        A = -(s[None, :] / TWO_PI_I) * dz
        B = -(s[None, :] / TWO_PI_I) * dzbar
        np.fill_diagonal(A, 0.0)
        np.fill_diagonal(B, 0.0)
        A[np.diag_indices(n)] = -A.sum(axis=1)
        B[np.diag_indices(n)] = -B.sum(axis=1)
    B[np.diag_indices(n)] += 1j * motion.omega
    return wirtinger_to_real(A, B)


def numeric_jacobian(config: VortexConfig, motion: Motion, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian; the oracle for the analytic one."""
    if not (1e-8 <= h <= 1e-4):
        raise ValueError(f"step h must lie in [1e-8, 1e-4], got {h}")
    p0 = config.positions
    s = config.circulations
    n = config.n
    J = np.empty((2 * n, 2 * n))
    for k in range(n):
        for comp, delta in enumerate((h, 1j * h)):
            plus, minus = p0.copy(), p0.copy()
            plus[k] += delta
            minus[k] -= delta
            Fp = residual_raw(plus, s, config.geometry, motion.v, motion.omega)
            Fm = residual_raw(minus, s, config.geometry, motion.v, motion.omega)
            dF = (Fp - Fm) / (2.0 * h)
            J[0::2, 2 * k + comp] = dF.real
            J[1::2, 2 * k + comp] = dF.imag
    return J


def max_rank_for_class(config: VortexConfig, crystal_class: CrystalClass) -> int:
    """Class-dependent maximum rank: 2n-1 / 2n-2 / 2n-4, or 2n-2 when periodic."""
    n = config.n
    if config.is_periodic:
        return 2 * n - 2
    if crystal_class.kind == "rotating":
        return 2 * n - 1
    if crystal_class.kind == "translating":
        return 2 * n - 2
    return 2 * n - 4


def trivial_directions(config: VortexConfig, crystal_class: CrystalClass) -> np.ndarray:
    """Real perturbation directions forced into the kernel by the gauge group.

    Translating/periodic: the two uniform translations.  Rotating (normalized
    so v = 0): the rotation i*p.  Finite stationary: translations, rotation
    and the scaling p.
    """

    def as_real(vec: np.ndarray) -> np.ndarray:
        out = np.empty(2 * len(vec))
        out[0::2], out[1::2] = vec.real, vec.imag
        return out

    p = config.positions
    ones = np.ones_like(p)
    if config.is_periodic or crystal_class.kind == "translating":
        dirs = [ones, 1j * ones]
    elif crystal_class.kind == "rotating":
        dirs = [1j * p]
    else:
        dirs = [ones, 1j * ones, p, 1j * p]
    cols = np.stack([as_real(d) for d in dirs], axis=1)
    q, _ = np.linalg.qr(cols)
    return q


def _svd_rank(J: np.ndarray, rel_tol: float) -> tuple[np.ndarray, int]:
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return sv, 0
    return sv, int(np.sum(sv > rel_tol * sv[0]))


def rank_report(
    config: VortexConfig,
    motion: Motion,
    crystal_class: Optional[CrystalClass] = None,
    rel_tol: Optional[float] = None,
    balance_tol: float = DEFAULT_TOL,
) -> RankReport:
    """SVD rank of the full Jacobian against the class maximum."""
    sup = float(np.max(np.abs(residual(config, motion))))
    if sup > balance_tol:
        raise NotBalancedError(f"rank analysis needs a balanced crystal; sup-norm {sup:.3e}")
    if crystal_class is None:
        crystal_class = classify(config, motion, balance_tol)
    if rel_tol is None:
        rel_tol = 2 * config.n * RANK_TOL_PER_DOF
    J = analytic_jacobian(config, motion)
    sv, rank = _svd_rank(J, rel_tol)
    max_rank = max_rank_for_class(config, crystal_class)
    return RankReport(
        jacobian=J,
        singular_values=sv,
        rank=rank,
        null_dim=2 * config.n - rank,
        max_possible_rank=max_rank,
        nondegenerate=(rank == max_rank),
        crystal_class=crystal_class,
    )


def invariant_perturbation_basis(config: VortexConfig, group: SymmetryGroup, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of perturbations commuting with every group generator.

    A perturbation dp is compatible with g(z) = a*z + b (resp. a*conj(z) + b)
    permuting vortex k to pi(k) iff dp_{pi(k)} = a*dp_k (resp. a*conj(dp_k)).
    """
    n = config.n
    actions = require_symmetry(config, group, tol)
    if not actions:
        return np.eye(2 * n)
    blocks = []
    for iso, perm in actions:
        T = np.zeros((2 * n, 2 * n))
        a = iso.a
        R = np.array([[a.real, -a.imag], [a.imag, a.real]])
        if iso.conjugate:
            R = R @ np.array([[1.0, 0.0], [0.0, -1.0]])
        for k in range(n):
            j = perm[k]
            T[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = R
        blocks.append(T - np.eye(2 * n))
    M = np.vstack(blocks)
    _, svals, vh = np.linalg.svd(M)
    cutoff = max(M.shape) * np.finfo(float).eps * (svals[0] if svals.size else 1.0)
    rank = int(np.sum(svals > max(cutoff, 1e-9)))
    return vh[rank:].T


def restricted_rank_report(
    config: VortexConfig,
    motion: Motion,
    group: SymmetryGroup,
    rel_tol: Optional[float] = None,
    balance_tol: float = DEFAULT_TOL,
) -> RankReport:
    """Rank of the Jacobian restricted to the symmetry-compatible subspace.

    The maximum possible rank is the subspace dimension minus the number of
    trivial motions (class gauge directions) that are themselves compatible
    with the group.
    """
    sup = float(np.max(np.abs(residual(config, motion))))
    if sup > balance_tol:
        raise NotBalancedError(f"rank analysis needs a balanced crystal; sup-norm {sup:.3e}")
    crystal_class = classify(config, motion, balance_tol)
    basis = invariant_perturbation_basis(config, group)
    d = basis.shape[1]
    if rel_tol is None:
        rel_tol = 2 * config.n * RANK_TOL_PER_DOF
    J = analytic_jacobian(config, motion) @ basis
    sv, rank = _svd_rank(J, rel_tol)
    triv = trivial_directions(config, crystal_class)
    proj = basis.T @ triv
    psv = np.linalg.svd(proj, compute_uv=False) if proj.size else np.array([])
    compat = int(np.sum(psv > 1e-9))
    max_rank = d - compat
    return RankReport(
        jacobian=J,
        singular_values=sv,
        rank=rank,
        null_dim=d - rank,
        max_possible_rank=max_rank,
        nondegenerate=(rank == max_rank),
        crystal_class=crystal_class,
        restricted=True,
        subspace_dim=d,
    )
