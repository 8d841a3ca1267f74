"""Binary point-vortex crystals: balance, rank analysis, refinement,
classical families, and helicoid-limit geometry."""

from .balance import BalanceReport, check_balance, classify, infer_motion, moment_check, residual
from .catalog import (
    AdlerMoserPoly,
    adler_moser_config,
    adler_moser_poly,
    doubly_dipole,
    hermite_config,
    hermite_roots,
    interlaced_hermite,
    karman_street,
    nested_polygon_ratio,
    nested_polygons,
    polygon_with_center,
    thomson,
    vortex_pair,
)
from .config import (
    CrystalClass,
    Isometry,
    Motion,
    SymmetryGroup,
    VortexConfig,
    detect_symmetries,
    normalize,
    parse_config,
    serialize_config,
)
from .errors import VclError
from .jacobian import (
    RankReport,
    analytic_jacobian,
    numeric_jacobian,
    rank_report,
    restricted_rank_report,
)
from .kernels import (
    DoublyPeriodic,
    Finite,
    GeometryKind,
    SinglyPeriodic,
    WirtingerPair,
    upsilon,
    upsilon_wirtinger,
    weierstrass_p,
    weierstrass_zeta,
    xi,
)
from .solver import SolveSettings, Trajectory, integrate, refine, rigidity_drift, sweep
from .surface import (
    LimitPeriods,
    MeshSettings,
    MultigraphSheet,
    export_mesh,
    flow_field,
    limit_periods,
    multigraph_height,
)

__version__ = "0.1.0"
