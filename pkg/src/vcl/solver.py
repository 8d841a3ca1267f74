"""Gauge-fixed refinement, Kirchhoff-Routh time integration and sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import balance
from .balance import residual_raw
from .config import Motion, SymmetryGroup, VortexConfig
from .errors import CoincidentVorticesError, CollisionError, ConvergenceError, VclError
from .jacobian import analytic_jacobian, invariant_perturbation_basis, rank_report
from .kernels import reduce_difference

COLLISION_DIST = 1e-6

GAUGES = ("auto", "rotating", "translating", "stationary", "periodic")


@dataclass(frozen=True)
class SolveSettings:
    """Targets and knobs for Gauss-Newton refinement."""

    tol: float = 1e-13
    max_iter: int = 50
    damping: float = 1.0
    gauge: str = "auto"

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")
        if self.gauge not in GAUGES:
            raise ValueError(f"gauge must be one of {GAUGES}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled Kirchhoff-Routh flow of a configuration."""

    times: np.ndarray
    states: np.ndarray  # (T, n) complex positions
    motion_fit: tuple[Motion, ...]

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _real(vec: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(vec))
    out[0::2], out[1::2] = vec.real, vec.imag
    return out


def _complex(vec: np.ndarray) -> np.ndarray:
    return vec[0::2] + 1j * vec[1::2]


def _gauge_kind(config: VortexConfig, motion: Motion, requested: str) -> str:
    if requested != "auto":
        return requested
    if config.is_periodic:
        return "periodic"
    if abs(motion.omega) > 1e-12:
        return "rotating"
    if abs(motion.v) > 1e-12:
        return "translating"
    return "stationary"


def _gauge_rows(config: VortexConfig, kind: str) -> np.ndarray:
    """Linear functionals pinned to their seed values during refinement."""
    n = config.n
    rows = []
    if kind == "rotating":
        # pin Im p_a for the vortex with the largest |Re p| (strongest handle
        # on the rotational degree of freedom)
        a = int(np.argmax(np.abs(config.positions.real)))
        row = np.zeros(2 * n)
        row[2 * a + 1] = 1.0
        rows.append(row)
    elif kind in ("translating", "periodic"):
        rx, ry = np.zeros(2 * n), np.zeros(2 * n)
        rx[0::2] = 1.0
        ry[1::2] = 1.0
        rows.extend([rx, ry])
    elif kind == "stationary":
        for idx in range(min(n, 2)):
            for comp in (0, 1):
                row = np.zeros(2 * n)
                row[2 * idx + comp] = 1.0
                rows.append(row)
    else:
        raise ValueError(f"unknown gauge {kind}")
    out = np.array(rows)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _nullspace(M: np.ndarray) -> np.ndarray:
    """Null space with rows assumed O(1): guards against all-noise inputs."""
    if M.size == 0:
        return np.eye(M.shape[1])
    _, sv, vh = np.linalg.svd(M, full_matrices=True)
    cutoff = max(M.shape) * np.finfo(float).eps * max(1.0, sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > cutoff))
    return vh[rank:].T


def refine(
    config: VortexConfig,
    motion: Motion,
    settings: Optional[SolveSettings] = None,
    symmetry: Optional[SymmetryGroup] = None,
    fit_motion: bool = False,
    trace: Optional[list] = None,
):
    """Gauss-Newton refinement of a near-crystal to residual sup-norm < tol.

    Steps live in the null space of the gauge rows (class-dependent pinned
    functionals), so the gauge holds exactly at every iterate.  With a
    symmetry group the step is further restricted to the group-compatible
    perturbation subspace.  With ``fit_motion`` the rigid-motion parameters
    are solved alongside the positions.  ``trace``, when given, collects the
    residual sup-norm of every accepted iterate.
    """
    if settings is None:
        settings = SolveSettings()
    geometry = config.geometry
    sig = config.circulations
    x = _real(config.positions)
    v, omega = motion.v, motion.omega
    fit_omega = fit_motion and not config.is_periodic

    basis = np.eye(2 * config.n)
    if symmetry is not None and len(symmetry):
        basis = invariant_perturbation_basis(config, symmetry)
    kind = _gauge_kind(config, motion, settings.gauge)
    G = _gauge_rows(config, kind) @ basis
    Z = basis @ _nullspace(G)

    def f(xv, vv, ww):
        return residual_raw(_complex(xv), sig, geometry, vv, ww)

    def sup(F):
        return float(np.max(np.abs(F)))

    F = f(x, v, omega)
    if trace is not None:
        trace.append(sup(F))
    last_sv = None
    for _ in range(settings.max_iter):
        if sup(F) < settings.tol:
            break
        Jx = analytic_jacobian(VortexConfig(geometry, _complex(x), sig), Motion(v, omega))
        cols = [Jx @ Z]
        if fit_motion:
            n = config.n
            dv = np.zeros((2 * n, 2))
            dv[0::2, 0] = -1.0  # dF/d(Re v) = -1
            dv[1::2, 1] = 1.0  # dF/d(Im v) = +i
            cols.append(dv)
            if fit_omega:
                dw = np.empty((2 * n, 1))
                p = _complex(x)
                dw[0::2, 0] = p.imag  # dF/d(omega) = i*conj(p)
                dw[1::2, 0] = p.real
                cols.append(dw)
        J = np.hstack(cols)
        r = _real(F)
        # truncate near-null directions (degenerate crystals): they carry no
        # usable descent and amplify roundoff into the step
        step, _, _, last_sv = np.linalg.lstsq(J, -r, rcond=1e-10)
        scale = max(1.0, float(np.linalg.norm(_real(config.positions))))
        if np.linalg.norm(step) < 1e-16 * scale:
            break
        t = settings.damping
        phi0 = float(r @ r)
        sup0 = sup(F)
        accepted = False
        for _ in range(40):
            dx = Z @ step[: Z.shape[1]] * t
            xv = x + dx
            vv, ww = v, omega
            if fit_motion:
                vv = v + complex(step[Z.shape[1]], step[Z.shape[1] + 1]) * t
                if fit_omega:
                    ww = omega + float(step[-1]) * t
            Fn = f(xv, vv, ww)
            rn = _real(Fn)
            phin = float(rn @ rn)
            if phin <= phi0 * (1.0 - 1e-4 * t) and sup(Fn) <= sup0 * (1.0 + 1e-12) + 1e-16:
                x, v, omega, F = xv, vv, ww, Fn
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        if trace is not None:
            trace.append(sup(F))

    if sup(F) >= settings.tol:
        detail = ""
        if last_sv is not None and len(last_sv):
            detail = f"; smallest lstsq singular values {np.sort(last_sv)[:3]}"
        raise ConvergenceError(
            f"refinement stalled at residual sup-norm {sup(F):.3e} (target {settings.tol:.1e}){detail}"
        )
    out = VortexConfig(geometry, _complex(x), sig)
    out_motion = Motion(v, omega)
    report = balance.check_balance(out, out_motion, tol=settings.tol)
    return out, out_motion, report


def advection_velocities(positions, circulations, geometry) -> np.ndarray:
    """dp_j/dt of the point-vortex flow (each vortex advected by the others)."""
    return np.conj(balance.interaction(positions, circulations, geometry))


def integrate(config: VortexConfig, t_end: float, dt: float) -> Trajectory:
    """Classical fixed-step RK4 trajectory of the vortex flow.

    Aborts with the timestamp when any pairwise distance (reduced modulo the
    lattice in periodic geometries) falls below 1e-6.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    geometry = config.geometry
    sig = config.circulations
    p = config.positions.astype(complex)

    def check_collision(q, t):
        if len(q) < 2:
            return
        diff = reduce_difference(q[:, None] - q[None, :], geometry)
        d = np.abs(diff) + 2.0 * np.eye(len(q))
        if d.min() < COLLISION_DIST:
            raise CollisionError(f"near-collision (distance {d.min():.3e}) at t = {t:.6g}", t)

    current_t = 0.0

    def rhs(q):
        try:
            return advection_velocities(q, sig, geometry)
        except CoincidentVorticesError as exc:
            # a stage evaluation overshot the collision guard within one step
            raise CollisionError(f"near-collision inside a step at t ~ {current_t:.6g}", current_t) from exc

    steps = int(np.ceil(t_end / dt - 1e-12))
    times = [0.0]
    states = [p.copy()]
    check_collision(p, 0.0)
    t = 0.0
    for i in range(steps):
        h = min(dt, t_end - t)
        if h <= 0.0:
            break
        current_t = t
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        check_collision(p, t)
        times.append(t)
        states.append(p.copy())
    state_arr = np.array(states)
    fits = tuple(
        balance.infer_motion(VortexConfig(geometry, q, sig)) if len(q) > 1 else Motion(0.0, 0.0)
        for q in states
    )
    return Trajectory(np.array(times), state_arr, fits)


def rigidity_drift(trajectory: Trajectory) -> float:
    """Max over time and vortex pairs of the pairwise-distance change."""
    if len(trajectory.times) < 2:
        raise ValueError("trajectory needs at least two samples")
    states = trajectory.states
    if states.shape[1] == 1:
        return 0.0
    dists = np.abs(states[:, :, None] - states[:, None, :])
    return float(np.max(np.abs(dists - dists[0])))


def sweep(
    family: Callable[[float], tuple[VortexConfig, Motion]],
    bounds: tuple[float, float],
    steps: int,
    settings: Optional[SolveSettings] = None,
    rank_rel_tol: Optional[float] = None,
):
    """Refine a parameterized family over a range, seeding from the previous step.

    Returns a list of (parameter, config, motion, RankReport).  Refinement
    failures propagate with the parameter value attached.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return []
    if settings is None:
        settings = SolveSettings(tol=1e-12)
    params = np.linspace(bounds[0], bounds[1], steps)
    results = []
    prev: Optional[VortexConfig] = None
    for par in params:
        cfg, motion = family(float(par))
        if (
            prev is not None
            and prev.n == cfg.n
            and type(prev.geometry) is type(cfg.geometry)
            and prev.geometry == cfg.geometry
        ):
            try:
                seeded = cfg.with_positions(prev.positions)
                cfg2, motion2, _ = refine(seeded, motion, settings)
            except VclError:
                cfg2, motion2, _ = refine(cfg, motion, settings)
        else:
            cfg2, motion2, _ = refine(cfg, motion, settings)
        motion2 = balance.infer_motion(cfg2)
        try:
            report = rank_report(cfg2, motion2, rel_tol=rank_rel_tol, balance_tol=max(settings.tol, 1e-11))
        except VclError as exc:
            raise type(exc)(f"sweep at parameter {par:.6g}: {exc}") from exc
        results.append((float(par), cfg2, motion2, report))
        prev = cfg2
    return results
