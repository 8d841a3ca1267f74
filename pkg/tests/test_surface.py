import numpy as np
import pytest

from vcl import catalog, solver
from vcl.config import Motion, VortexConfig
from vcl.errors import InvariantViolationError, UnsupportedGeometryError, VclError
from vcl.kernels import Finite
from vcl.surface import (
    MeshSettings,
    export_mesh,
    flow_field,
    limit_periods,
    loop_height_change,
    multigraph_height,
    winding_numbers,
)

from oracles import angle_track


def circle(center, radius, n=96):
    pts = [center + radius * np.exp(2j * np.pi * k / n) for k in range(n)]
    return pts + [pts[0]]


def single_vortex():
    return VortexConfig(Finite(), np.array([0j]), np.array([1]))


def test_full_loop_single_vortex():
    config = single_vortex()
    assert loop_height_change(circle(0, 1.0), config) == pytest.approx(2 * np.pi, abs=1e-10)


def test_pair_loop_cancellation():
    config, _ = catalog.vortex_pair()
    assert abs(loop_height_change(circle(0, 1.0), config)) < 1e-10


def test_pair_loop_single_enclosure():
    config, _ = catalog.vortex_pair()
    p_plus = config.positions[0]
    loop = circle(p_plus, 0.3 * abs(config.positions[0] - config.positions[1]))
    change = loop_height_change(loop, config)
    assert change == pytest.approx(2 * np.pi, abs=1e-10)
    # independent angle-tracking oracle
    oracle = 2 * np.pi * sum(
        s * round(angle_track(loop, p) / (2 * np.pi))
        for p, s in zip(config.positions, config.circulations)
    )
    assert change == pytest.approx(oracle, abs=1e-10)


def test_winding_numbers():
    config, _ = catalog.vortex_pair()
    loop = circle(config.positions[1], 1e-3)
    assert winding_numbers(loop, config).tolist() == [0, 1]


def test_multigraph_height_path_and_branch():
    config, _ = catalog.vortex_pair()
    base = 2.0 + 0.0j
    target = -2.0 + 0.0j
    upper = multigraph_height(target, [base, 2j, target], config)
    lower = multigraph_height(target, [base, -2j, target], config)
    # the two routes differ by the loop defect around the enclosed pair (zero net)
    assert upper - lower == pytest.approx(0.0, abs=1e-12)
    # routes around only the positive vortex differ by 2 pi
    mid = 0.5j / np.pi
    upper = multigraph_height(0.0, [base, mid + 0.2, 0.0], config)
    # direct evaluation at a point equals the principal value when reachable directly
    direct = multigraph_height(1.0, [base], config)
    assert direct == pytest.approx(float(np.sum(config.circulations * np.angle(1.0 - config.positions))), abs=1e-12)


def test_multigraph_path_through_vortex_rejected():
    config, _ = catalog.vortex_pair()
    with pytest.raises(VclError):
        multigraph_height(-1.0, [1.0, config.positions[0], -1.0], config)


def test_height_loop_matches_enclosed_circulations():
    rng = np.random.default_rng(17)
    p = rng.normal(0, 1, 5) + 1j * rng.normal(0, 1, 5)
    s = np.array([1, -1, 1, 1, -1])
    config = VortexConfig(Finite(), p, s)
    loop = circle(0, 1.2, n=256)
    w = winding_numbers(loop, config)
    assert loop_height_change(loop, config) == pytest.approx(2 * np.pi * float(np.sum(s * w)), abs=1e-10)


def test_flow_field_single_vortex():
    config = single_vortex()
    assert flow_field(1.0, config) == pytest.approx(1j / (2 * np.pi), abs=1e-15)


def test_flow_field_pair_midpoint_and_far():
    config, motion = catalog.vortex_pair()
    mid = flow_field(0.0, config)
    assert mid == pytest.approx(4.0 + 0j, abs=1e-13)
    assert abs(mid) > abs(motion.v)
    far = flow_field(100.0, config)
    assert abs(far) < 1e-3


def test_flow_field_rigid_motion_identity():
    # at each vortex (self-term removed) the flow equals v + i omega p
    for make in (lambda: catalog.thomson(5), lambda: catalog.vortex_pair(), lambda: catalog.karman_street(0.4)):
        config, motion = make()
        for j, p in enumerate(config.positions):
            u = flow_field(p, config, exclude=j)
            assert u == pytest.approx(motion.v + 1j * motion.omega * p, abs=1e-13)


def test_flow_field_matches_integrator_rhs():
    config, _ = catalog.doubly_dipole(1j, 0.37 + 0.18j)
    vel = solver.advection_velocities(config.positions, config.circulations, config.geometry)
    for j, p in enumerate(config.positions):
        assert flow_field(p, config, exclude=j) == pytest.approx(vel[j], abs=1e-14)


def test_limit_periods_pair():
    config, motion = catalog.vortex_pair()
    lp = limit_periods(config, motion, 0.1)
    assert lp.nu == pytest.approx(-2 * np.pi)
    assert lp.T0 == pytest.approx((2 * np.pi * 0.1 * (-2 * np.pi), 0.0, 2 * np.pi), abs=1e-13)
    assert lp.quotient_genus == 1
    assert "helicoidal" in lp.end_description


def test_limit_periods_karman():
    config, motion = catalog.karman_street(0.3)
    lp = limit_periods(config, motion, 0.25)
    assert lp.T1 == pytest.approx((4.0, 0.0, 0.0), abs=1e-13)
    assert lp.quotient_genus == config.n - 1
    assert "Scherk" in lp.end_description


def test_limit_periods_doubly_dipole():
    tau = 1j
    config, motion = catalog.doubly_dipole(tau, (1 + tau) / 2)
    lp = limit_periods(config, motion, 0.2)
    ssp = complex(np.sum(config.circulations * config.positions))
    x, y = ssp.real, ssp.imag  # tau = i: lattice coords are just (Re, Im)
    assert lp.psi1_limit == pytest.approx(-2 * np.pi * y, abs=1e-13)
    assert lp.psi2_limit == pytest.approx(2 * np.pi * x, abs=1e-13)
    assert lp.T1 == pytest.approx((5.0, 0.0, lp.psi1_limit), abs=1e-13)
    assert lp.T2 == pytest.approx((0.0, 5.0, lp.psi2_limit), abs=1e-13)
    assert lp.quotient_genus == config.n + 1


def test_limit_periods_rotating():
    config, motion = catalog.thomson(5)
    lp = limit_periods(config, motion, 0.1)
    assert lp.screw_angle == pytest.approx(2 * np.pi * 0.01)
    assert lp.quotient_genus == 4
    assert "helicoidal" in lp.end_description
    config, motion = catalog.hermite_config(3)
    lp = limit_periods(config, motion, 0.1)  # m != 0 keeps helicoidal ends
    assert "helicoidal" in lp.end_description


def test_limit_periods_doubly_m_nonzero_rejected():
    from vcl.kernels import DoublyPeriodic

    config = VortexConfig(DoublyPeriodic(1j), np.array([0.25 + 0.25j]), np.array([1]))
    with pytest.raises(InvariantViolationError):
        limit_periods(config, Motion(0.0, 0.0), 0.1)


def test_limit_periods_requires_balance():
    config, _ = catalog.thomson(5)
    with pytest.raises(VclError):
        limit_periods(config, Motion(0.0, 99.0), 0.1)


def test_mesh_single_vortex_counts_closed_form():
    config = single_vortex()
    settings = MeshSettings(rings=4, sectors=16, turns=2, outer_radius=1.5, background=12)
    doc = export_mesh(config, settings)
    steps = settings.sectors * settings.turns + 1
    assert doc.stats["vertices"] == 2 * (settings.rings + 1) * steps
    assert doc.stats["faces"] == 2 * 2 * settings.rings * settings.sectors * settings.turns
    assert doc.stats["background_vertices_per_copy"] == 0


def test_mesh_sheet_offset_is_pi():
    config, _ = catalog.vortex_pair()
    doc = export_mesh(config, MeshSettings(rings=3, sectors=12, background=8))
    s0, s1 = doc.sheets
    assert np.max(np.abs((s1.heights - s0.heights) - np.pi)) < 1e-12


def test_mesh_spiral_spans_two_pi_per_turn():
    config = single_vortex()
    settings = MeshSettings(rings=2, sectors=24, turns=3, outer_radius=1.0)
    doc = export_mesh(config, settings)
    steps = settings.sectors * settings.turns + 1
    inner = doc.sheets[0].heights[:steps]
    for t in range(settings.turns):
        span = inner[(t + 1) * settings.sectors] - inner[t * settings.sectors]
        assert span == pytest.approx(2 * np.pi, abs=1e-10)


def test_mesh_heights_consistent_with_multigraph():
    config, _ = catalog.vortex_pair()
    doc = export_mesh(config, MeshSettings(rings=3, sectors=16, background=10))
    s0 = doc.sheets[0]
    basepoint = complex(np.mean(config.positions)) + 1.05 * (2.0 + 1.5 * np.max(np.abs(config.positions - np.mean(config.positions))))
    rng = np.random.default_rng(3)
    idx = rng.choice(len(s0.points), size=12, replace=False)
    for i in idx:
        z = complex(s0.points[i])
        try:
            direct = multigraph_height(z, [basepoint + 0.013j], config)
        except VclError:
            continue
        # heights agree up to the loop ambiguity of the connecting paths
        k = (s0.heights[i] - direct) / (2 * np.pi)
        assert abs(k - round(k)) < 1e-10


def test_mesh_vertical_lines():
    config, _ = catalog.vortex_pair()
    doc = export_mesh(config, MeshSettings(rings=3, sectors=12, background=0, turns=2))
    assert len(doc.lines) == config.n * 2
    for a, b in doc.lines:
        va, vb = doc.line_vertices[a], doc.line_vertices[b]
        assert va[0] == vb[0] and va[1] == vb[1]
        assert vb[2] - va[2] == pytest.approx(2 * np.pi, abs=1e-12)


def test_mesh_obj_round_trip(tmp_path):
    config, _ = catalog.vortex_pair()
    doc = export_mesh(config, MeshSettings(rings=2, sectors=12, background=8))
    path = tmp_path / "mesh.obj"
    lines_path = tmp_path / "mesh_lines.obj"
    doc.write_obj(str(path))
    doc.write_lines_obj(str(lines_path))
    verts, faces, objects = [], [], []
    for line in path.read_text().splitlines():
        if line.startswith("v "):
            verts.append([float(x) for x in line.split()[1:]])
        elif line.startswith("f "):
            faces.append([int(x) for x in line.split()[1:]])
        elif line.startswith("o "):
            objects.append(line.split()[1])
    assert len(verts) == doc.stats["vertices"]
    assert len(faces) == doc.stats["faces"]
    assert objects == ["sheet0", "sheet1"]
    assert all(len(f) == 3 and all(1 <= i <= len(verts) for i in f) for f in faces)
    seg_lines = [l for l in lines_path.read_text().splitlines() if l.startswith("l ")]
    assert len(seg_lines) == len(doc.lines)


def test_mesh_rejects_bad_settings():
    with pytest.raises(ValueError):
        MeshSettings(rings=0)
    with pytest.raises(ValueError):
        MeshSettings(turns=0)
    with pytest.raises(ValueError):
        MeshSettings(exclusion_factor=0.9)


def test_mesh_rejects_periodic():
    config, _ = catalog.karman_street(0.3)
    with pytest.raises(UnsupportedGeometryError):
        export_mesh(config)
