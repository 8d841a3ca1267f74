"""Vortex configuration data model, serialization and symmetry handling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    InvariantViolationError,
    InvalidModulusError,
    NotBalancedError,
    SchemaError,
    SymmetryError,
    VclError,
)
from .kernels import (
    DoublyPeriodic,
    Finite,
    GeometryKind,
    SinglyPeriodic,
    lattice_coords,
    reduce_difference,
    reduce_to_fundamental,
)

MIN_SEPARATION = 1e-10


@dataclass(frozen=True, eq=False)
class VortexConfig:
    """An ordered set of point vortices with circulations +-1."""

    geometry: GeometryKind
    positions: np.ndarray
    circulations: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.positions, dtype=complex))
        s = np.atleast_1d(np.asarray(self.circulations))
        if p.ndim != 1 or s.ndim != 1 or len(p) != len(s):
            raise InvariantViolationError("positions and circulations must be flat lists of equal length")
        if len(p) == 0:
            raise InvariantViolationError("a configuration needs at least one vortex")
        if not np.all(np.isfinite(p)):
            raise InvariantViolationError("positions must be finite")
        si = np.round(np.real(s)).astype(int)
        if np.any(np.abs(si - s) > 0) or not np.all(np.abs(si) == 1):
            raise InvariantViolationError("circulations must be +1 or -1")
        p = reduce_to_fundamental(p, self.geometry)
        if len(p) > 1:
            diff = reduce_difference(p[:, None] - p[None, :], self.geometry)
            dist = np.abs(diff) + np.eye(len(p))
            if dist.min() <= MIN_SEPARATION:
                raise InvariantViolationError(
                    f"vortices too close: min separation {dist.min():.3e} <= {MIN_SEPARATION}"
                )
        p.setflags(write=False)
        si.setflags(write=False)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "circulations", si)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def n_plus(self) -> int:
        return int(np.sum(self.circulations > 0))

    @property
    def n_minus(self) -> int:
        return int(np.sum(self.circulations < 0))

    @property
    def total_circulation(self) -> int:
        return int(self.circulations.sum())

    @property
    def is_periodic(self) -> bool:
        return not isinstance(self.geometry, Finite)

    def with_positions(self, positions) -> "VortexConfig":
        return VortexConfig(self.geometry, np.asarray(positions, dtype=complex), self.circulations)


@dataclass(frozen=True)
class Motion:
    """Rigid-motion parameters: translation velocity v, angular velocity omega."""

    v: complex = 0.0
    omega: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", complex(self.v))
        object.__setattr__(self, "omega", float(self.omega))


@dataclass(frozen=True)
class CrystalClass:
    """Rigid-motion class of a crystal plus its circulation counts."""

    kind: str  # "rotating" | "translating" | "stationary"
    n: int
    n_plus: int
    n_minus: int

    @property
    def m(self) -> int:
        return self.n_plus - self.n_minus


@dataclass(frozen=True)
class Isometry:
    """Planar isometry z -> a*z + b or a*conj(z) + b with |a| = 1."""

    a: complex
    b: complex
    conjugate: bool
    preserves: bool = True

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        w = np.conj(z) if self.conjugate else z
        return self.a * w + self.b

    @property
    def kind(self) -> str:
        if self.conjugate:
            return "reflection"
        if abs(self.a - 1.0) < 1e-12:
            return "translation"
        return "rotation"


@dataclass(frozen=True)
class SymmetryGroup:
    """Isometries mapping a configuration to itself (identity not stored)."""

    generators: tuple[Isometry, ...] = field(default_factory=tuple)

    @property
    def order(self) -> int:
        return len(self.generators) + 1

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)


# ---------------------------------------------------------------------------
# document serialization
# ---------------------------------------------------------------------------


def _c2pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _pair2c(val, path: str) -> complex:
    if (
        not isinstance(val, (list, tuple))
        or len(val) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val)
    ):
        raise SchemaError(f"{path}: expected [re, im] pair, got {val!r}")
    return complex(val[0], val[1])


def _real(val, path: str) -> float:
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise SchemaError(f"{path}: expected a real number, got {val!r}")
    return float(val)


def serialize_geometry(g: GeometryKind) -> dict:
    if isinstance(g, Finite):
        return {"kind": "finite"}
    if isinstance(g, SinglyPeriodic):
        return {"kind": "singly"}
    return {"kind": "doubly", "tau": _c2pair(g.tau)}


def parse_geometry(doc, path: str = "geometry") -> GeometryKind:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError(f"{path}: expected an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "finite":
        return Finite()
    if kind == "singly":
        return SinglyPeriodic()
    if kind == "doubly":
        if "tau" not in doc:
            raise SchemaError(f"{path}.tau: required for doubly periodic geometry")
        tau = _pair2c(doc["tau"], f"{path}.tau")
        try:
            return DoublyPeriodic(tau)
        except InvalidModulusError as exc:
            raise InvalidModulusError(f"{path}.tau: {exc}") from None
    raise SchemaError(f"{path}.kind: unknown geometry kind {kind!r}")


def serialize_isometry(iso: Isometry) -> dict:
    return {
        "kind": iso.kind,
        "a": _c2pair(iso.a),
        "b": _c2pair(iso.b),
        "conjugate": iso.conjugate,
        "preserves": iso.preserves,
    }


def parse_isometry(doc, path: str) -> Isometry:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")
    a = _pair2c(doc.get("a", [1.0, 0.0]), f"{path}.a")
    b = _pair2c(doc.get("b", [0.0, 0.0]), f"{path}.b")
    if abs(abs(a) - 1.0) > 1e-9:
        raise SchemaError(f"{path}.a: linear part must have unit modulus")
    return Isometry(a=a, b=b, conjugate=bool(doc.get("conjugate", False)), preserves=bool(doc.get("preserves", True)))


def serialize_config(
    config: VortexConfig,
    motion: Optional[Motion] = None,
    symmetry: Optional[SymmetryGroup] = None,
) -> dict:
    """Configuration document (plain dict of JSON types)."""
    doc = {
        "geometry": serialize_geometry(config.geometry),
        "vortices": [
            {"p": _c2pair(p), "sigma": int(s)}
            for p, s in zip(config.positions, config.circulations)
        ],
    }
    if motion is not None:
        doc["motion"] = {"v": _c2pair(motion.v), "omega": motion.omega}
    if symmetry is not None:
        doc["symmetry"] = {"generators": [serialize_isometry(g) for g in symmetry.generators]}
    return doc


@dataclass(frozen=True)
class ParsedDocument:
    config: VortexConfig
    motion: Optional[Motion]
    symmetry: Optional[SymmetryGroup]


def parse_config(doc) -> ParsedDocument:
    """Validate a configuration document; violations carry field paths."""
    if not isinstance(doc, dict):
        raise SchemaError("document: expected a JSON object")
    unknown = set(doc) - {"geometry", "vortices", "motion", "symmetry"}
    if unknown:
        raise SchemaError(f"document: unknown fields {sorted(unknown)}")
    if "geometry" not in doc:
        raise SchemaError("geometry: required")
    geometry = parse_geometry(doc["geometry"])
    if "vortices" not in doc or not isinstance(doc["vortices"], list) or not doc["vortices"]:
        raise SchemaError("vortices: required non-empty list")
    positions, sigmas = [], []
    for i, item in enumerate(doc["vortices"]):
        path = f"vortices[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{path}: expected an object")
        if "p" not in item:
            raise SchemaError(f"{path}.p: required")
        positions.append(_pair2c(item["p"], f"{path}.p"))
        sig = item.get("sigma")
        if isinstance(sig, bool) or not isinstance(sig, (int, float)) or sig not in (1, -1):
            raise InvariantViolationError(f"{path}.sigma: must be +1 or -1, got {sig!r}")
        sigmas.append(int(sig))
    try:
        config = VortexConfig(geometry, np.array(positions), np.array(sigmas))
    except VclError as exc:
        raise type(exc)(f"vortices: {exc}") from None

    motion = None
    if "motion" in doc:
        mdoc = doc["motion"]
        if not isinstance(mdoc, dict):
            raise SchemaError("motion: expected an object")
        v = _pair2c(mdoc.get("v", [0.0, 0.0]), "motion.v")
        omega = _real(mdoc.get("omega", 0.0), "motion.omega")
        if config.is_periodic and omega != 0.0:
            raise InvariantViolationError("motion.omega: must be 0 in periodic geometries")
        motion = Motion(v, omega)

    symmetry = None
    if "symmetry" in doc:
        sdoc = doc["symmetry"]
        if not isinstance(sdoc, dict) or "generators" not in sdoc:
            raise SchemaError("symmetry.generators: required")
        gens = tuple(
            parse_isometry(g, f"symmetry.generators[{i}]") for i, g in enumerate(sdoc["generators"])
        )
        symmetry = SymmetryGroup(gens)
    return ParsedDocument(config, motion, symmetry)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def canonical_order(config: VortexConfig) -> VortexConfig:
    """Reorder vortices lexicographically by (Re p, Im p)."""
    idx = np.lexsort((config.positions.imag, config.positions.real))
    return VortexConfig(config.geometry, config.positions[idx], config.circulations[idx])


def normalize(config: VortexConfig, motion: Motion, tol: float | None = None):
    """Canonical representative of a balanced crystal under its gauge freedoms.

    Rotating crystals are translated so v = 0 and rescaled so |omega| = 1;
    translating crystals are complex-scaled so v = 1; finite stationary
    crystals anchor the first vortex at 0 and the second at 1; periodic
    crystals anchor the canonically least vortex at the origin of the cell.
    """
    from . import balance  # deferred: balance imports this module's types

    if tol is None:
        tol = balance.DEFAULT_TOL
    res = balance.residual(config, motion)
    sup = float(np.max(np.abs(res)))
    if sup > tol:
        raise NotBalancedError(f"cannot normalize: residual sup-norm {sup:.3e} > {tol:.1e}")
    cls = balance.classify(config, motion, tol)

    p = config.positions.copy()
    if config.is_periodic:
        # translate the lattice-coordinate-least vortex to the cell origin
        if isinstance(config.geometry, DoublyPeriodic):
            x, y = lattice_coords(p, config.geometry.tau)
        else:
            x, y = p.real, p.imag
        anchor = int(np.lexsort((y, x))[0])
        new = VortexConfig(config.geometry, p - p[anchor], config.circulations)
        return canonical_order(new), motion

    if cls.kind == "rotating":
        if motion.omega == 0.0:
            raise VclError("zero-motion: rotating normalization needs omega != 0")
        shift = -1j * motion.v / motion.omega
        scale = np.sqrt(abs(motion.omega))
        q = scale * (p + shift)
        new_motion = Motion(0.0, float(np.sign(motion.omega)))
        new = VortexConfig(config.geometry, q, config.circulations)
        return canonical_order(new), new_motion

    if cls.kind == "translating":
        q = np.conj(motion.v) * p
        new = VortexConfig(config.geometry, q, config.circulations)
        return canonical_order(new), Motion(1.0, 0.0)

    # stationary: anchor on the stored-order first two vortices; keep their
    # order so a second application reuses the same anchors.
    q = p - p[0]
    q = q / q[1]
    return VortexConfig(config.geometry, q, config.circulations), Motion(0.0, 0.0)


# ---------------------------------------------------------------------------
# symmetry detection
# ---------------------------------------------------------------------------


def _match_permutation(config: VortexConfig, iso: Isometry, tol: float):
    """Permutation mapping each vortex onto its image, or None."""
    images = iso.apply(config.positions)
    diff = reduce_difference(images[:, None] - config.positions[None, :], config.geometry)
    dist = np.abs(diff)
    perm = np.argmin(dist, axis=1)
    if np.any(dist[np.arange(config.n), perm] > tol):
        return None
    if len(set(perm.tolist())) != config.n:
        return None
    return perm


def classify_action(config: VortexConfig, iso: Isometry, tol: float):
    """(permutation, preserves-flag) of an isometry on the vortex set, or None."""
    perm = _match_permutation(config, iso, tol)
    if perm is None:
        return None
    s = config.circulations
    if np.all(s[perm] == s):
        return perm, True
    if np.all(s[perm] == -s):
        return perm, False
    return None


def _candidate_isometries(config: VortexConfig):
    """Dihedral-frame candidates, plus lattice moves for periodic geometries."""
    n = config.n
    cands: list[tuple[complex, complex, bool]] = []
    if isinstance(config.geometry, Finite):
        center = complex(np.mean(config.positions))
        angles = sorted({2.0 * np.pi * k / N for N in range(1, n + 1) for k in range(1, N)})
        for ang in angles:
            a = np.exp(1j * ang)
            cands.append((a, center * (1.0 - a), False))
        axes = sorted({np.pi * j / N for N in range(1, n + 1) for j in range(N)})
        for theta in axes:
            a = np.exp(2j * theta)
            cands.append((a, center - a * np.conj(center), True))
        return cands

    # periodic: half-lattice translations and pi-rotations about pair midpoints
    if isinstance(config.geometry, DoublyPeriodic):
        tau = config.geometry.tau
        halves = [0.5, 0.5 * tau, 0.5 * (1.0 + tau)]
        mirror_ok = abs(tau.real) < 1e-12 or abs(abs(tau.real) - 0.5) < 1e-12
    else:
        halves = [0.5]
        mirror_ok = True
    for t in halves:
        cands.append((1.0, t, False))
    centers = set()
    p = config.positions
    for i in range(n):
        for j in range(i, n):
            for off in [0.0] + halves:
                c = (p[i] + p[j]) / 2.0 + off
                centers.add(complex(np.round(c.real, 12), np.round(c.imag, 12)))
    for c in centers:
        cands.append((-1.0, 2.0 * c, False))
    if mirror_ok:
        ys = sorted({float(np.round((p[i].imag + p[j].imag) / 2.0, 12)) for i in range(n) for j in range(i, n)})
        for y in ys:
            cands.append((1.0, 2j * y, True))  # reflection across a horizontal line
        xs = sorted(
            {
                float(np.round((p[i].real + p[j].real) / 2.0 + off, 12))
                for i in range(n)
                for j in range(i, n)
                for off in (0.0, 0.25, 0.5)
            }
        )
        for x in xs:
            cands.append((-1.0, 2.0 * x, True))  # reflection across a vertical line
    return cands


def detect_symmetries(config: VortexConfig, tol: float = 1e-9) -> SymmetryGroup:
    """Maximal group of dihedral-frame/lattice candidates fixing the configuration."""
    found = []
    seen = set()
    for a, b, conj in _candidate_isometries(config):
        iso = Isometry(a=complex(a), b=complex(b), conjugate=conj)
        key = (np.round(complex(a), 9), np.round(complex(b), 9), conj)
        if key in seen:
            continue
        seen.add(key)
        if iso.kind == "translation" and abs(iso.b) < tol:
            continue  # identity
        action = classify_action(config, iso, tol)
        if action is None:
            continue
        _, preserves = action
        found.append(Isometry(iso.a, iso.b, iso.conjugate, preserves))
    return SymmetryGroup(tuple(found))


def require_symmetry(config: VortexConfig, group: SymmetryGroup, tol: float = 1e-8):
    """Permutations and flags for each generator; raises if one fails."""
    actions = []
    for i, iso in enumerate(group.generators):
        action = classify_action(config, iso, tol)
        if action is None:
            raise SymmetryError(f"generator {i} ({iso.kind}) does not map the configuration to itself")
        perm, preserves = action
        if preserves != iso.preserves:
            raise SymmetryError(
                f"generator {i} ({iso.kind}) acts with preserves={preserves}, declared {iso.preserves}"
            )
        actions.append((iso, perm))
    return actions
