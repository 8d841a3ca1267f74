"""Exception types shared across the library."""


class VclError(Exception):
    """Base class for all library errors."""

    code = "error"


class SchemaError(VclError):
    """A configuration document does not match the expected schema."""

    code = "schema"


class InvariantViolationError(VclError):
    """A configuration violates a structural invariant (bad sigma, duplicates...)."""

    code = "invariant-violation"


class InvalidModulusError(VclError):
    """A lattice modulus tau with Im tau <= 0 was supplied."""

    code = "invalid-modulus"


class SingularInputError(VclError):
    """Kernel evaluated at (or too close to) a lattice point."""

    code = "singular-input"


class CoincidentVorticesError(VclError):
    """Two vortices closer than the minimum allowed separation."""

    code = "coincident-vortices"


class NotBalancedError(VclError):
    """Operation requires a balanced configuration and got an unbalanced one."""

    code = "not-balanced"


class InconsistentClassError(VclError):
    """Motion classification contradicts the circulation counts."""

    code = "inconsistent-class"


class UnsupportedGeometryError(VclError):
    """Operation not defined for this geometry kind."""

    code = "unsupported-geometry"


class ConvergenceError(VclError):
    """Iterative refinement failed to reach the requested tolerance."""

    code = "no-convergence"


class CollisionError(VclError):
    """Trajectory integration aborted on a near-collision."""

    code = "collision-abort"

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class SymmetryError(VclError):
    """A claimed symmetry group does not map the configuration to itself."""

    code = "symmetry"


class RootBracketError(VclError):
    """A bracketed root search found no sign change."""

    code = "no-real-root"
