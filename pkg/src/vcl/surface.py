"""Helicoid-limit geometry: multigraph heights, flow field, period vectors.

The rescaled limit of the glued surfaces over a crystal is the multigraph of
the multivalued height f(z) = sum_i sigma_i arg(z - p_i), its
half-turn-shifted copy f + pi, and vertical lines over the vortices.  This
module evaluates f by analytic continuation along polylines, exports a
triangulated rendering, samples the limit flow field, and reports the
translation periods and quotient genus of the associated surface families.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import balance
from .config import Motion, VortexConfig
from .errors import InvariantViolationError, UnsupportedGeometryError, VclError
from .kernels import DoublyPeriodic, Finite, lattice_coords, upsilon

PATH_CLEARANCE = 1e-9


# ---------------------------------------------------------------------------
# multigraph heights
# ---------------------------------------------------------------------------


def _segment_distance(a: complex, b: complex, p: np.ndarray) -> np.ndarray:
    """Distance from points p to the segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return np.abs(p - a)
    t = np.clip(((p - a) * np.conj(d)).real / L2, 0.0, 1.0)
    return np.abs(p - (a + t * d))


def _segment_increments(a: complex, b: complex, positions: np.ndarray) -> np.ndarray:
    """Angle increments of arg(z - p_i) along the straight segment a -> b.

    A straight segment subtends less than pi from any point not on it, so
    the principal branch of the ratio argument is the continuous increment.
    """
    dist = _segment_distance(a, b, positions)
    if np.min(dist) < PATH_CLEARANCE:
        raise VclError(f"path passes within {np.min(dist):.2e} of a vortex")
    return np.angle((b - positions) / (a - positions))


def base_height(z: complex, config: VortexConfig) -> float:
    """Principal-branch value of f at the basepoint."""
    return float(np.sum(config.circulations * np.angle(z - config.positions)))


def multigraph_height(z: complex, path: Sequence[complex], config: VortexConfig) -> float:
    """Continuous continuation of f along a polyline from its first point to z.

    ``path`` starts at the basepoint (where f takes its principal value); the
    target z is appended when not already the final waypoint.
    """
    pts = [complex(w) for w in path]
    if not pts:
        raise ValueError("path needs at least the basepoint")
    if pts[-1] != complex(z):
        pts.append(complex(z))
    s = config.circulations
    h = base_height(pts[0], config)
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            continue
        h += float(np.sum(s * _segment_increments(a, b, config.positions)))
    return h


def loop_height_change(loop: Sequence[complex], config: VortexConfig) -> float:
    """Height change of f along a closed polyline (2 pi times the signed
    winding sum of the enclosed circulations)."""
    pts = [complex(w) for w in loop]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    s = config.circulations
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            continue
        total += float(np.sum(s * _segment_increments(a, b, config.positions)))
    return total


def winding_numbers(loop: Sequence[complex], config: VortexConfig) -> np.ndarray:
    """Integer winding numbers of a closed polyline around each vortex."""
    pts = [complex(w) for w in loop]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    acc = np.zeros(config.n)
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            continue
        acc += _segment_increments(a, b, config.positions)
    return np.round(acc / (2.0 * np.pi)).astype(int)


# ---------------------------------------------------------------------------
# flow field
# ---------------------------------------------------------------------------


def flow_field(z, config: VortexConfig, exclude: Optional[int] = None):
    """Velocity u of the flow generated by the crystal at z.

    conj(u) = (1/2 pi i) sum_k sigma_k K(z - p_k); with ``exclude`` the
    self-term of that vortex is removed (the advection velocity used by the
    integrator).
    """
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex)
    for k, (p, s) in enumerate(zip(config.positions, config.circulations)):
        if exclude is not None and k == exclude:
            continue
        acc = acc + s * upsilon(z - p, config.geometry)
    ubar = acc / (2j * np.pi)
    out = np.conj(ubar)
    return complex(out) if out.ndim == 0 else out


def sample_flow_grid(config: VortexConfig, extent: float, n: int, center: complex = 0.0):
    """Flow samples on an n x n grid, skipping points too close to a vortex.

    Returns (points, velocities) flat arrays.
    """
    if n < 2:
        raise ValueError("grid needs at least 2 points per side")
    xs = np.linspace(center.real - extent, center.real + extent, n)
    ys = np.linspace(center.imag - extent, center.imag + extent, n)
    X, Y = np.meshgrid(xs, ys)
    pts = (X + 1j * Y).ravel()
    dist = np.min(np.abs(pts[:, None] - config.positions[None, :]), axis=1)
    keep = dist > 1e-6
    pts = pts[keep]
    return pts, flow_field(pts, config)


def write_field_csv(path: str, points: np.ndarray, velocities: np.ndarray) -> None:
    """Delimited flow samples with header x,y,u_re,u_im."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "u_re", "u_im"])
        for z, u in zip(points, velocities):
            writer.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(u.real)), repr(float(u.imag))])


# ---------------------------------------------------------------------------
# limit periods
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitPeriods:
    """Translation periods and topology of the limit surface family."""

    nu: complex
    T0: tuple[float, float, float]
    T1: Optional[tuple[float, float, float]]
    T2: Optional[tuple[float, float, float]]
    psi1_limit: Optional[float]
    psi2_limit: Optional[float]
    quotient_genus: int
    end_description: str
    eps: float
    screw_angle: Optional[float] = None


def limit_periods(config: VortexConfig, motion: Motion, eps: float, tol: Optional[float] = None) -> LimitPeriods:
    """Period vectors, quotient genus and end types of the surface family.

    Finite translating crystals yield singly periodic surfaces with period
    T0 = 2 pi (eps Re nu, eps Im nu, 1), nu = -2 pi v; singly periodic
    crystals add T1 = (1/eps, 0, m pi); doubly periodic crystals (requiring
    m = 0) add T2 and the height shears Psi1 -> -2 pi y, Psi2 -> 2 pi x
    where sum sigma_k p_k = x + y tau.  Finite rotating crystals give the
    screw-motion family with angle 2 pi eps^2 per vertical period.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if tol is None:
        tol = balance.default_tolerance()
    res = balance.residual(config, motion)
    sup = float(np.max(np.abs(res)))
    if sup > tol:
        raise VclError(f"limit periods need a balanced crystal; residual sup-norm {sup:.3e}")
    n = config.n
    m = config.total_circulation
    nu = -2.0 * np.pi * motion.v
    T0 = (2.0 * np.pi * eps * nu.real, 2.0 * np.pi * eps * nu.imag, 2.0 * np.pi)

    if isinstance(config.geometry, Finite):
        cls = balance.classify(config, motion, tol)
        if cls.kind == "rotating":
            ends = "two helicoidal ends" if m != 0 else "two planar ends"
            return LimitPeriods(
                nu=0.0,
                T0=(0.0, 0.0, 2.0 * np.pi),
                T1=None,
                T2=None,
                psi1_limit=None,
                psi2_limit=None,
                quotient_genus=n - 1,
                end_description=ends,
                eps=eps,
                screw_angle=2.0 * np.pi * eps**2,
            )
        if cls.kind == "translating":
            return LimitPeriods(
                nu=nu,
                T0=T0,
                T1=None,
                T2=None,
                psi1_limit=None,
                psi2_limit=None,
                quotient_genus=n - 1,
                end_description="two helicoidal ends",
                eps=eps,
            )
        raise UnsupportedGeometryError("finite stationary crystals have no helicoid-limit family")

    if isinstance(config.geometry, DoublyPeriodic):
        if m != 0:
            raise InvariantViolationError(f"doubly periodic limit needs m = 0, got m = {m}")
        tau = config.geometry.tau
        ssp = complex(np.sum(config.circulations * config.positions))
        x, y = lattice_coords(ssp, tau)
        psi1, psi2 = -2.0 * np.pi * float(y), 2.0 * np.pi * float(x)
        return LimitPeriods(
            nu=nu,
            T0=T0,
            T1=(1.0 / eps, 0.0, psi1),
            T2=(tau.real / eps, tau.imag / eps, psi2),
            psi1_limit=psi1,
            psi2_limit=psi2,
            quotient_genus=n + 1,
            end_description="no ends (triply periodic quotient)",
            eps=eps,
        )

    # singly periodic
    return LimitPeriods(
        nu=nu,
        T0=T0,
        T1=(1.0 / eps, 0.0, m * np.pi),
        T2=None,
        psi1_limit=None,
        psi2_limit=None,
        quotient_genus=n - 1,
        end_description="four Scherk ends",
        eps=eps,
    )


# ---------------------------------------------------------------------------
# mesh export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshSettings:
    """Sampling grid for the multigraph rendering."""

    outer_radius: Optional[float] = None
    rings: int = 8
    sectors: int = 48
    background: int = 24
    turns: int = 1
    exclusion_factor: float = 0.05

    def __post_init__(self):
        if self.rings < 1 or self.sectors < 8 or self.background < 0:
            raise ValueError("invalid grid settings: need rings >= 1, sectors >= 8, background >= 0")
        if self.turns < 1:
            raise ValueError("invalid grid settings: turns >= 1")
        if not (0 < self.exclusion_factor < 0.5):
            raise ValueError("invalid grid settings: exclusion_factor in (0, 0.5)")
        if self.outer_radius is not None and self.outer_radius <= 0:
            raise ValueError("invalid grid settings: outer_radius > 0")


@dataclass(frozen=True, eq=False)
class MultigraphSheet:
    """Sampled branch of the multigraph (branch 1 sits at +pi)."""

    branch: int
    turns: int
    points: np.ndarray
    heights: np.ndarray
    vortex_markers: np.ndarray


@dataclass(frozen=True, eq=False)
class MeshDocument:
    """Triangulated multigraph with vortex axis polylines."""

    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) int, indices into vertices
    objects: tuple[tuple[str, int, int], ...]  # (name, face_start, face_count)
    line_vertices: np.ndarray  # (L, 3)
    lines: tuple[tuple[int, int], ...]
    sheets: tuple[MultigraphSheet, ...]
    stats: dict = field(default_factory=dict)

    def write_obj(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("# multigraph rendering\n")
            for v in self.vertices:
                fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            for name, start, count in self.objects:
                fh.write(f"o {name}\n")
                for f in self.faces[start : start + count]:
                    fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")

    def write_lines_obj(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("# vortex axis segments\no vortex_lines\n")
            for v in self.line_vertices:
                fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            for a, b in self.lines:
                fh.write(f"l {a + 1} {b + 1}\n")


def _spiral_patch(center: complex, r0: float, r1: float, anchor_height: float, anchor_angle: float, config, settings):
    """Helicoid-core patch: rings x (sectors*turns + 1) spiral vertices.

    Heights continue along the outer spiral and then radially inward, so the
    sheet climbs continuously with the winding.
    """
    S, R, T = settings.sectors, settings.rings, settings.turns
    radii = np.geomspace(r0, r1, R + 1)
    steps = S * T + 1
    angles = anchor_angle + 2.0 * np.pi * np.arange(steps) / S
    ring_pts = center + np.multiply.outer(radii, np.exp(1j * angles))  # (R+1, steps)
    heights = np.empty_like(ring_pts, dtype=float)
    # outer rim first: continue along the spiral
    h = anchor_height
    heights[-1, 0] = h
    s = config.circulations
    pos = config.positions
    for k in range(1, steps):
        h += float(np.sum(s * _segment_increments(ring_pts[-1, k - 1], ring_pts[-1, k], pos)))
        heights[-1, k] = h
    # radial spokes inward
    for k in range(steps):
        hk = heights[-1, k]
        for r in range(R - 1, -1, -1):
            hk += float(np.sum(s * _segment_increments(ring_pts[r + 1, k], ring_pts[r, k], pos)))
            heights[r, k] = hk
    return ring_pts.ravel(), heights.ravel(), (R, steps)


def _patch_faces(R: int, steps: int, offset: int):
    faces = []
    for r in range(R):
        for k in range(steps - 1):
            a = offset + r * steps + k
            b = a + 1
            c = a + steps
            d = c + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    return faces


def export_mesh(config: VortexConfig, settings: Optional[MeshSettings] = None, eps: float = 0.0) -> MeshDocument:
    """Triangulated rendering of the two multigraph sheets plus vortex axes.

    The geometry is the rescaled limit object, so ``eps`` only tags the
    report.  Helicoid cores are spiral patches climbing 2 pi sigma_i per
    turn; the surrounding annulus is a Cartesian grid carried at every turn
    offset.  Sheet 1 duplicates sheet 0 at height +pi.
    """
    if settings is None:
        settings = MeshSettings()
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if config.is_periodic:
        raise UnsupportedGeometryError("mesh export renders finite configurations")
    p = config.positions
    center = complex(np.mean(p))
    spread = float(np.max(np.abs(p - center))) if config.n > 1 else 0.0
    R_outer = settings.outer_radius or (2.0 + 1.5 * spread)
    if config.n > 1:
        dmin = float(np.min(np.abs(p[:, None] - p[None, :]) + 2 * R_outer * np.eye(config.n)))
        r_patch = min(0.45 * dmin, 0.5 * R_outer)
    else:
        dmin = 2.0 * R_outer
        r_patch = R_outer
    r0 = settings.exclusion_factor * dmin

    basepoint = center + 1.05 * R_outer + 0.521j * r0  # slightly off-axis, outside the disk

    verts2 = []  # (x, y) base positions
    base_h = []  # branch-0, turn-0 heights
    faces = []
    # spiral patches
    patch_spans = []
    for i, pi_ in enumerate(p):
        anchor = pi_ + r_patch
        # straight path basepoint -> anchor must clear every vortex
        anchor_angle = 0.0
        for attempt in range(settings.sectors):
            cand = pi_ + r_patch * np.exp(2j * np.pi * attempt / settings.sectors)
            if np.min(_segment_distance(basepoint, cand, p)) > max(PATH_CLEARANCE, 0.5 * r0):
                anchor = cand
                anchor_angle = 2.0 * np.pi * attempt / settings.sectors
                break
        else:
            raise VclError("could not route a clear path to a patch anchor")
        h_anchor = multigraph_height(anchor, [basepoint], config)
        pts, hs, (Rr, steps) = _spiral_patch(
            pi_, r0, r_patch, h_anchor, anchor_angle, config, settings
        )
        offset = len(verts2)
        faces.extend(_patch_faces(Rr, steps, offset))
        verts2.extend(pts.tolist())
        base_h.extend(hs.tolist())
        patch_spans.append((offset, len(pts)))

    # background grid (single cover; replicated per turn below)
    bg_index = {}
    B = settings.background
    if B >= 2 and config.n > 0 and r_patch < R_outer:
        xs = np.linspace(center.real - R_outer, center.real + R_outer, B + 1)
        ys = np.linspace(center.imag - R_outer, center.imag + R_outer, B + 1)
        def keep(z):
            return abs(z - center) <= R_outer and np.min(np.abs(z - p)) > 0.98 * r_patch
        grid = {}
        for iy, yv in enumerate(ys):
            for ix, xv in enumerate(xs):
                z = complex(xv, yv)
                if keep(z):
                    grid[(ix, iy)] = z
        # heights by BFS over grid edges from the vertex nearest the basepoint
        order = sorted(grid)
        if order:
            hmap = {}
            from collections import deque

            remaining = set(order)
            while remaining:
                root = min(
                    remaining,
                    key=lambda k: abs(grid[k] - basepoint),
                )
                try:
                    hmap[root] = multigraph_height(grid[root], [basepoint], config)
                except VclError:
                    hmap[root] = multigraph_height(
                        grid[root], [basepoint, center + 1j * (1.2 * R_outer)], config
                    )
                queue = deque([root])
                remaining.discard(root)
                while queue:
                    cur = queue.popleft()
                    cx, cy = cur
                    for nb in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                        if nb in remaining:
                            try:
                                inc = float(
                                    np.sum(config.circulations * _segment_increments(grid[cur], grid[nb], p))
                                )
                            except VclError:
                                continue
                            hmap[nb] = hmap[cur] + inc
                            remaining.discard(nb)
                            queue.append(nb)
            for k in order:
                bg_index[k] = len(verts2)
                verts2.append(grid[k])
                base_h.append(hmap[k])
            for iy in range(B):
                for ix in range(B):
                    quad = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)]
                    if all(q in bg_index for q in quad):
                        a, b, c, d = (bg_index[q] for q in quad)
                        faces.append((a, b, c))
                        faces.append((a, c, d))

    verts2 = np.asarray(verts2, dtype=complex)
    base_h = np.asarray(base_h)
    faces = np.asarray(faces, dtype=int)
    n_base = len(verts2)

    # assemble copies: patches appear once per branch (spirals already climb
    # all turns); background replicates at every 2 pi turn offset
    vertices = []
    out_faces = []
    objects = []
    sheets = []
    patch_vert_count = patch_spans[-1][0] + patch_spans[-1][1] if patch_spans else 0
    bg_ids = np.arange(patch_vert_count, n_base)
    patch_faces_mask = np.all(faces < patch_vert_count, axis=1) if len(faces) else np.array([], bool)

    for branch in range(2):
        shift = np.pi * branch
        face_start = len(out_faces)
        idx_offset = len(vertices)
        # patch vertices
        for z, h in zip(verts2[:patch_vert_count], base_h[:patch_vert_count]):
            vertices.append((z.real, z.imag, h + shift))
        for f in faces[patch_faces_mask]:
            out_faces.append(tuple(int(v) + idx_offset for v in f))
        # background copies per turn
        for t in range(settings.turns):
            copy_offset = len(vertices)
            remap = {}
            for local, gid in enumerate(bg_ids):
                remap[int(gid)] = copy_offset + local
                z, h = verts2[gid], base_h[gid]
                vertices.append((z.real, z.imag, h + shift + 2.0 * np.pi * t))
            for f in (faces[~patch_faces_mask] if len(faces) else []):
                out_faces.append(tuple(remap[int(v)] for v in f))
        objects.append((f"sheet{branch}", face_start, len(out_faces) - face_start))
        pts_all = np.concatenate([verts2[:patch_vert_count], np.tile(verts2[bg_ids], settings.turns)]) if len(bg_ids) else verts2[:patch_vert_count]
        hs_all = np.array([v[2] for v in vertices[idx_offset:]])
        sheets.append(
            MultigraphSheet(
                branch=branch,
                turns=settings.turns,
                points=pts_all,
                heights=hs_all,
                vortex_markers=p.copy(),
            )
        )

    # vortex axis segments: one per turn, length exactly 2 pi
    line_vertices = []
    lines = []
    for (offset, count), pi_ in zip(patch_spans, p):
        inner = base_h[offset : offset + (settings.sectors * settings.turns + 1)]
        start = float(np.min(inner))
        for t in range(settings.turns):
            a = len(line_vertices)
            line_vertices.append((pi_.real, pi_.imag, start + 2.0 * np.pi * t))
            line_vertices.append((pi_.real, pi_.imag, start + 2.0 * np.pi * (t + 1)))
            lines.append((a, a + 1))

    V = np.asarray(vertices)
    F = np.asarray(out_faces, dtype=int)
    patch_faces_per_branch = int(patch_faces_mask.sum()) if len(faces) else 0
    bg_faces_per_copy = len(faces) - patch_faces_per_branch
    stats = {
        "vertices": len(V),
        "faces": len(F),
        "patch_vertices_per_branch": patch_vert_count,
        "patch_faces_per_branch": patch_faces_per_branch,
        "background_vertices_per_copy": int(len(bg_ids)),
        "background_faces_per_copy": int(bg_faces_per_copy),
        "turns": settings.turns,
        "eps": eps,
    }
    return MeshDocument(
        vertices=V,
        faces=F,
        objects=tuple(objects),
        line_vertices=np.asarray(line_vertices),
        lines=tuple(lines),
        sheets=tuple(sheets),
        stats=stats,
    )
