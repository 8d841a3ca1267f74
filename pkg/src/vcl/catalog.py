"""Generators for the classical binary vortex crystal families.

Every generator returns (VortexConfig, Motion) and is validated by the
balance residual; closed-form motions come from the standard identities
(Hermite root sums, regular-polygon cotangent sums, the staggered-street
velocity) and everything else is refined numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from . import balance, solver
from .config import Isometry, Motion, SymmetryGroup, VortexConfig
from .errors import InvariantViolationError, RootBracketError
from .kernels import DoublyPeriodic, Finite, SinglyPeriodic, reduce_difference
from .solver import SolveSettings


# ---------------------------------------------------------------------------
# Hermite families
# ---------------------------------------------------------------------------


def hermite_roots(n: int) -> np.ndarray:
    """Ascending roots of the physicists' Hermite polynomial H_n.

    Eigenvalues of the symmetric Jacobi matrix, polished by one Newton step
    on the orthonormal three-term recurrence.
    """
    if not (1 <= n <= 50):
        raise ValueError(f"Hermite degree must lie in [1, 50], got {n}")
    if n == 1:
        return np.zeros(1)
    k = np.arange(1, n)
    J = np.diag(np.sqrt(k / 2.0), 1)
    x = np.linalg.eigvalsh(J + J.T)

    def newton_step(x):
        # orthonormal recurrence psi_{k+1} = x*sqrt(2/(k+1))*psi_k - sqrt(k/(k+1))*psi_{k-1}
        psi_prev = np.full_like(x, np.pi**-0.25)
        psi = x * np.sqrt(2.0) * psi_prev
        for k in range(1, n):
            psi, psi_prev = (
                x * np.sqrt(2.0 / (k + 1)) * psi - np.sqrt(k / (k + 1.0)) * psi_prev,
                psi,
            )
        # H_n / H_n' = psi_n / (sqrt(2n) psi_{n-1})
        return x - psi / (np.sqrt(2.0 * n) * psi_prev)

    x = newton_step(x)
    return np.sort(x)


def hermite_config(n: int) -> tuple[VortexConfig, Motion]:
    """Co-rotating line of identical vortices at the roots of H_n."""
    roots = hermite_roots(n)
    config = VortexConfig(Finite(), roots.astype(complex), -np.ones(n, dtype=int))
    return config, Motion(0.0, -1.0 / (2.0 * np.pi))


def interlaced_hermite(m: int) -> tuple[VortexConfig, Motion]:
    """2m+1 vortices: positive at the roots of H_{m+1} interlaced with
    negative at the roots of H_m; for m = 0 a single positive vortex."""
    if not (0 <= m <= 49):
        raise ValueError(f"interlacing index must lie in [0, 49], got {m}")
    if m == 0:
        return VortexConfig(Finite(), np.array([0j]), np.array([1])), Motion(0.0, 0.0)
    outer = hermite_roots(m + 1)
    inner = hermite_roots(m)
    p = np.concatenate([outer, inner]).astype(complex)
    s = np.concatenate([np.ones(m + 1, dtype=int), -np.ones(m, dtype=int)])
    config = VortexConfig(Finite(), p, s)
    return config, balance.infer_motion(config)


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------


def thomson(n: int, sigma: int = 1) -> tuple[VortexConfig, Motion]:
    """Identical vortices on the unit regular n-gon, rotating at (n-1)/(4 pi)."""
    if n < 1:
        raise ValueError("polygon needs n >= 1")
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    p = np.exp(2j * np.pi * np.arange(n) / n)
    config = VortexConfig(Finite(), p, sigma * np.ones(n, dtype=int))
    return config, Motion(0.0, sigma * (n - 1) / (4.0 * np.pi))


def polygon_with_center(n: int, sigma_center: int = 1) -> tuple[VortexConfig, Motion]:
    """Unit n-gon of negative vortices plus a center vortex of either sign."""
    if n < 2:
        raise ValueError("polygon with a center vortex needs n >= 2")
    if sigma_center not in (1, -1):
        raise ValueError("sigma_center must be +1 or -1")
    p = np.concatenate([np.exp(2j * np.pi * np.arange(n) / n), [0j]])
    s = np.concatenate([-np.ones(n, dtype=int), [sigma_center]])
    config = VortexConfig(Finite(), p, s)
    return config, balance.infer_motion(config)


def nested_polygon_ratio(k: int) -> tuple[float, float]:
    """The two circumradius ratios (inverse to each other) of the k-family.

    With K = k+1 vertices per polygon, the staggered two-polygon balance
    reduces to K*(1-r^K)/(1+r^K) = (1+r^2)/(1-r^2); the roots are bracketed
    in (0, 1) and (1, oo).
    """
    if k < 1:
        raise ValueError("nested polygon family needs k >= 1")
    K = k + 1

    def g(r: float) -> float:
        return K * (1.0 - r**K) * (1.0 - r**2) - (1.0 + r**2) * (1.0 + r**K)

    brackets = [(1e-9, 1.0 - 1e-12), (1.0 + 1e-12, 100.0)]
    roots = []
    for lo, hi in brackets:
        if g(lo) * g(hi) > 0:
            raise RootBracketError(f"no sign change for the ratio equation in [{lo}, {hi}]")
        roots.append(float(brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16)))
    return roots[0], roots[1]


def nested_polygons(k: int, root: str = "small") -> tuple[VortexConfig, Motion]:
    """Two concentric staggered (k+1)-gons of opposite circulations.

    Positive vortices sit on the unit polygon, negative ones on the
    staggered polygon of radius r solving the ratio equation; the result is
    polished by Newton refinement.
    """
    r_small, r_large = nested_polygon_ratio(k)
    r = {"small": r_small, "large": r_large}.get(root)
    if r is None:
        raise ValueError("root must be 'small' or 'large'")
    K = k + 1
    ang = 2.0 * np.pi * np.arange(K) / K
    p = np.concatenate([np.exp(1j * ang), r * np.exp(1j * (ang + np.pi / K))])
    s = np.concatenate([np.ones(K, dtype=int), -np.ones(K, dtype=int)])
    config = VortexConfig(Finite(), p, s)
    motion = balance.infer_motion(config)
    config, motion, _ = solver.refine(config, motion, SolveSettings(tol=1e-13, gauge="rotating"))
    return config, balance.infer_motion(config)


# ---------------------------------------------------------------------------
# Adler-Moser (translating) families
# ---------------------------------------------------------------------------


def _padd(*arrs):
    n = max(len(a) for a in arrs)
    out = np.zeros(n, dtype=complex)
    for a in arrs:
        out[: len(a)] += a
    return out


def _ladder_particular(prev: np.ndarray, cur: np.ndarray, k: int) -> np.ndarray:
    """Monic particular solution T of T'*prev - T*prev' = (2k+1)*cur^2.

    The equation is linear in T; the one-dimensional kernel (multiples of
    ``prev``) carries the family parameter and is added by the caller.
    """
    rhs = (2 * k + 1) * npoly.polymul(cur, cur)
    deg = (k + 1) * (k + 2) // 2
    M = np.zeros((len(rhs), deg + 1), dtype=complex)
    for i in range(deg + 1):
        e = np.zeros(i + 1, dtype=complex)
        e[i] = 1.0
        expr = _padd(npoly.polymul(npoly.polyder(e), prev), -npoly.polymul(e, npoly.polyder(prev)))
        M[: len(expr), i] = expr[: len(rhs)]
    r = rhs - M[:, -1]
    sol, res, _, _ = np.linalg.lstsq(M[:, :-1], r, rcond=None)
    return np.concatenate([sol, [1.0]])


@dataclass(frozen=True)
class AdlerMoserPoly:
    """One rung of the Adler-Moser ladder with its free parameters."""

    j: int
    coefficients: tuple[complex, ...]  # ascending powers, monic
    kappas: tuple[complex, ...]

    @property
    def degree(self) -> int:
        return self.j * (self.j + 1) // 2

    def __call__(self, z):
        return npoly.polyval(z, np.asarray(self.coefficients))

    def roots(self) -> np.ndarray:
        return npoly.polyroots(np.asarray(self.coefficients))


def adler_moser_poly(j: int, kappas=()) -> AdlerMoserPoly:
    """j-th Adler-Moser polynomial with parameters (kappa_2, ..., kappa_j).

    Built from the bilinear ladder T_{k+1}'T_{k-1} - T_{k+1}T_{k-1}'
    = (2k+1) T_k^2 with T_0 = 1, T_1 = z; each integration constant enters
    as kappa_{k+1} times T_{k-1}.
    """
    if j < 0:
        raise ValueError("ladder index must be >= 0")
    kappas = tuple(complex(k) for k in kappas)
    if len(kappas) != max(j - 1, 0):
        raise ValueError(f"expected {max(j - 1, 0)} parameters for j = {j}, got {len(kappas)}")
    th_prev = np.array([1.0 + 0j])
    th = np.array([0.0 + 0j, 1.0])
    if j == 0:
        return AdlerMoserPoly(0, (1.0 + 0j,), ())
    for k in range(1, j):
        T = _ladder_particular(th_prev, th, k)
        T[: len(th_prev)] += kappas[k - 1] * th_prev
        th_prev, th = th, T
    return AdlerMoserPoly(j, tuple(th.tolist()), kappas)


def bilinear_ladder_defect(poly: AdlerMoserPoly) -> float:
    """Max coefficient magnitude of T'_j T_{j-2} - T_j T'_{j-2} - (2j-1) T_{j-1}^2.

    The two lower rungs are rebuilt from the stored parameters, so a zero
    defect certifies that the stored coefficients satisfy the recursion.
    """
    j = poly.j
    if j < 2:
        return 0.0
    low = np.asarray(adler_moser_poly(j - 2, poly.kappas[: max(j - 3, 0)]).coefficients)
    mid = np.asarray(adler_moser_poly(j - 1, poly.kappas[: max(j - 2, 0)]).coefficients)
    up = np.asarray(poly.coefficients)
    expr = _padd(
        npoly.polymul(npoly.polyder(up), low),
        -npoly.polymul(up, npoly.polyder(low)),
        -(2 * j - 1) * npoly.polymul(mid, mid),
    )
    return float(np.max(np.abs(expr)))


def _reflect_poly(c: np.ndarray) -> np.ndarray:
    """Coefficients of (-1)^deg p(-z), whose roots are the negated roots of p."""
    deg = len(c) - 1
    return c * (-1.0) ** (deg + np.arange(deg + 1))


def _translating_defect(P: np.ndarray, Q: np.ndarray, lam: float) -> np.ndarray:
    """Coefficients of P''Q - 2P'Q' + PQ'' - 2*lam*(P'Q - PQ')."""
    Pp, Qp = npoly.polyder(P), npoly.polyder(Q)
    return _padd(
        npoly.polymul(npoly.polyder(Pp), Q),
        -2.0 * npoly.polymul(Pp, Qp),
        npoly.polymul(P, npoly.polyder(Qp)),
        -2.0 * lam * _padd(npoly.polymul(Pp, Q), -npoly.polymul(P, Qp)),
    )


@lru_cache(maxsize=16)
def _symmetric_translating_poly(j: int, lam: float = 1.0) -> tuple[complex, ...]:
    """Monic real polynomial whose roots are the positive vortices of the
    mirror-symmetric translating family (drift parameter lam).

    Climb the shifted ladder from z + 1/(2 lam); at each rung the new
    integration constant enters the translating defect quadratically, so it
    is fixed by minimizing a quartic in one real variable.
    """
    s = 1.0 / (2.0 * lam)
    prev = np.array([1.0 + 0j])
    cur = np.array([s + 0j, 1.0])
    for k in range(1, j):
        G = _ladder_particular(prev, cur, k)
        X = np.zeros(len(G), dtype=complex)
        X[: len(prev)] = prev
        H0 = _translating_defect(G, _reflect_poly(G), lam)
        H1 = _padd(
            _translating_defect(G, _reflect_poly(X), lam),
            _translating_defect(X, _reflect_poly(G), lam),
        )
        H2 = _translating_defect(X, _reflect_poly(X), lam)
        L = max(len(H0), len(H1), len(H2))
        H0, H1, H2 = (np.pad(a, (0, L - len(a))) for a in (H0, H1, H2))
        w = np.abs(npoly.polymul(np.abs(G), np.abs(G)))[:L]
        h0, h1, h2 = (h / np.maximum(w, 1.0) for h in (H0, H1, H2))
        # ||h0 + kappa h1 + kappa^2 h2||^2 is a quartic in kappa
        quartic = np.array(
            [
                np.vdot(h0, h0).real,
                2.0 * np.vdot(h1, h0).real,
                2.0 * np.vdot(h2, h0).real + np.vdot(h1, h1).real,
                2.0 * np.vdot(h2, h1).real,
                np.vdot(h2, h2).real,
            ]
        )
        crit = np.roots(np.polynomial.polynomial.polyder(quartic)[::-1])
        crit = [c.real for c in crit if abs(c.imag) < 1e-8 * max(1.0, abs(c))]
        kappa = min(crit, key=lambda c: npoly.polyval(c, quartic))
        prev, cur = cur, _padd(G, kappa * X)
    return tuple(cur.tolist())


def _two_reflection_group() -> SymmetryGroup:
    """Reflections across the imaginary axis (circulation-preserving) and the
    real axis (circulation-reversing), as realized by the v = 1 frame."""
    return SymmetryGroup(
        (
            Isometry(a=-1.0, b=0.0, conjugate=True, preserves=True),
            Isometry(a=1.0, b=0.0, conjugate=True, preserves=False),
        )
    )


def adler_moser_config(j: int) -> tuple[VortexConfig, Motion]:
    """Mirror-symmetric translating crystal of the j-th polynomial pair,
    normalized to unit velocity.

    Positive vortices at the roots of the symmetric ladder polynomial,
    negative at the mirrored roots; seeds are polished under the imposed
    two-reflection symmetry.
    """
    if not (1 <= j <= 8):
        raise ValueError(f"translating ladder index must lie in [1, 8], got {j}")
    lam = 1.0
    # the coefficients are real in exact arithmetic; dropping the float noise
    # makes the extracted roots exactly conjugate-symmetric
    P = np.asarray(_symmetric_translating_poly(j, lam)).real
    rp = npoly.polyroots(P)
    rq = -rp  # roots of the reflected partner polynomial
    p = np.concatenate([rp, rq])
    sep = np.abs(p[:, None] - p[None, :]) + np.eye(len(p))
    if sep.min() < 1e-8:
        raise InvariantViolationError(f"multiple roots detected (separation {sep.min():.2e})")
    s = np.concatenate([np.ones(len(rp), dtype=int), -np.ones(len(rq), dtype=int)])
    # symmetric frame drifts with v = i*lam/(2 pi); rotate/scale to v = 1
    v_sym = 1j * lam / (2.0 * np.pi)
    config = VortexConfig(Finite(), np.conj(v_sym) * p, s)
    motion = Motion(1.0, 0.0)
    config, motion, _ = solver.refine(
        config, motion, SolveSettings(tol=5e-13, max_iter=80), symmetry=_two_reflection_group()
    )
    return config, motion


# ---------------------------------------------------------------------------
# translating pair, streets, torus dipoles
# ---------------------------------------------------------------------------


def vortex_pair() -> tuple[VortexConfig, Motion]:
    """Opposite vortices at +-i/(4 pi), translating with unit velocity."""
    q = 0.25j / np.pi
    config = VortexConfig(Finite(), np.array([q, -q]), np.array([1, -1]))
    return config, Motion(1.0, 0.0)


def karman_street(b: float, staggered: bool = True) -> tuple[VortexConfig, Motion]:
    """Two opposite vortex rows of unit period separated by height b.

    The staggered street drifts with v = -tanh(pi b)/2, the unstaggered one
    with v = -coth(pi b)/2.
    """
    if b <= 0:
        raise ValueError("row separation b must be positive")
    shift = 0.5 if staggered else 0.0
    p = np.array([0j, shift + 1j * b])
    config = VortexConfig(SinglyPeriodic(), p, np.array([1, -1]))
    v = -np.tanh(np.pi * b) / 2.0 if staggered else -1.0 / (2.0 * np.tanh(np.pi * b))
    return config, Motion(v, 0.0)


def doubly_dipole(tau: complex, offset: complex) -> tuple[VortexConfig, Motion]:
    """Opposite vortices at 0 and ``offset`` in the torus C/<1, tau>.

    Every offset balances; half-lattice offsets are stationary, generic ones
    translate.
    """
    geometry = DoublyPeriodic(tau)
    off = reduce_difference(np.asarray(offset, dtype=complex), geometry)
    if abs(off) < 1e-10:
        raise InvariantViolationError("offset lies on the lattice")
    config = VortexConfig(geometry, np.array([0j, complex(offset)]), np.array([1, -1]))
    return config, balance.infer_motion(config)


FAMILIES = {
    "hermite": hermite_config,
    "interlaced-hermite": interlaced_hermite,
    "thomson": thomson,
    "polygon-center": polygon_with_center,
    "nested": nested_polygons,
    "adler-moser": adler_moser_config,
    "pair": vortex_pair,
    "karman": karman_street,
    "dipole": doubly_dipole,
}
