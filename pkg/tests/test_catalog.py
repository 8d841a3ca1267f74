import numpy as np
import pytest

from vcl import balance, catalog, solver
from vcl.balance import check_balance, infer_motion, residual
from vcl.config import Motion
from vcl.errors import InvariantViolationError
from vcl.solver import SolveSettings

ALL_FAMILIES = [
    ("pair", lambda: catalog.vortex_pair()),
    ("thomson3", lambda: catalog.thomson(3)),
    ("thomson7", lambda: catalog.thomson(7)),
    ("thomson5_neg", lambda: catalog.thomson(5, -1)),
    ("hermite1", lambda: catalog.hermite_config(1)),
    ("hermite12", lambda: catalog.hermite_config(12)),
    ("interlaced0", lambda: catalog.interlaced_hermite(0)),
    ("interlaced1", lambda: catalog.interlaced_hermite(1)),
    ("interlaced5", lambda: catalog.interlaced_hermite(5)),
    ("polygon_center2", lambda: catalog.polygon_with_center(2, 1)),
    ("polygon_center6", lambda: catalog.polygon_with_center(6, -1)),
    ("nested1", lambda: catalog.nested_polygons(1)),
    ("nested3", lambda: catalog.nested_polygons(3)),
    ("adler_moser1", lambda: catalog.adler_moser_config(1)),
    ("adler_moser3", lambda: catalog.adler_moser_config(3)),
    ("karman", lambda: catalog.karman_street(0.35)),
    ("karman_unstag", lambda: catalog.karman_street(0.25, staggered=False)),
    ("dipole", lambda: catalog.doubly_dipole(0.2 + 1.1j, 0.4 + 0.3j)),
]


@pytest.mark.parametrize("name,make", ALL_FAMILIES)
def test_every_generator_balances(name, make):
    config, motion = make()
    sup = float(np.max(np.abs(residual(config, motion))))
    assert sup < 1e-10
    # and refinement takes each one to the tight tolerance
    if config.n > 1:
        _, _, rep = solver.refine(config, motion, SolveSettings(tol=1e-13, max_iter=40))
        assert rep.sup_norm < 1e-13


def test_hermite_roots_small_cases():
    assert catalog.hermite_roots(1).tolist() == [0.0]
    r3 = catalog.hermite_roots(3)
    assert r3 == pytest.approx([-np.sqrt(1.5), 0.0, np.sqrt(1.5)], abs=1e-14)


def test_hermite_roots_identity_n20():
    x = catalog.hermite_roots(20)
    for j in range(20):
        s = np.sum(1.0 / (x[j] - np.delete(x, j)))
        assert s == pytest.approx(x[j], abs=1e-10)


def test_hermite_roots_range_check():
    with pytest.raises(ValueError):
        catalog.hermite_roots(0)
    with pytest.raises(ValueError):
        catalog.hermite_roots(51)


def test_hermite_config_motion():
    config, motion = catalog.hermite_config(6)
    assert motion == Motion(0.0, -1 / (2 * np.pi))
    assert np.all(config.circulations == -1)


def test_interlaced_hermite_motion():
    config, motion = catalog.interlaced_hermite(4)
    assert config.n == 9
    assert motion.omega == pytest.approx(-1 / (2 * np.pi), abs=1e-12)
    assert abs(motion.v) < 1e-13
    assert config.n_plus == 5 and config.n_minus == 4


def test_thomson_motion_values():
    for n in (2, 5, 9):
        _, motion = catalog.thomson(n)
        assert motion.omega == pytest.approx((n - 1) / (4 * np.pi))
    _, motion = catalog.thomson(4, -1)
    assert motion.omega == pytest.approx(-3 / (4 * np.pi))
    config, motion = catalog.thomson(1)
    assert motion == Motion(0.0, 0.0)


def test_polygon_with_center_balance_and_error():
    config, motion = catalog.polygon_with_center(3, -1)
    assert np.max(np.abs(residual(config, motion))) < 1e-13
    with pytest.raises(ValueError):
        catalog.polygon_with_center(1, 1)


def test_nested_ratio_k1_closed_form():
    r_small, r_large = catalog.nested_polygon_ratio(1)
    assert r_small == pytest.approx(np.sqrt(2) - 1, abs=1e-12)
    assert r_large == pytest.approx(np.sqrt(2) + 1, abs=1e-12)
    assert r_small * r_large == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_nested_ratio_roots_are_inverse(k):
    r_small, r_large = catalog.nested_polygon_ratio(k)
    assert r_small * r_large == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_nested_both_roots_give_same_crystal_up_to_scaling(k):
    small, ms = catalog.nested_polygons(k, "small")
    large, ml = catalog.nested_polygons(k, "large")
    r_small, _ = catalog.nested_polygon_ratio(k)
    K = k + 1
    # scale the large-root crystal by r_small and rotate by the stagger angle:
    # the unsigned vortex sets coincide, with all circulations flipped
    mapped = large.positions * r_small * np.exp(1j * np.pi / K)
    for z, s in zip(mapped, large.circulations):
        d = np.abs(z - small.positions)
        i = int(np.argmin(d))
        assert d[i] < 1e-9
        assert small.circulations[i] == -s


def test_adler_moser_poly_low_rungs():
    p0 = catalog.adler_moser_poly(0)
    assert p0.coefficients == (1 + 0j,)
    p1 = catalog.adler_moser_poly(1)
    assert np.allclose(p1.coefficients, [0, 1])
    p2 = catalog.adler_moser_poly(2, [3.0])
    assert np.allclose(p2.coefficients, [3.0, 0, 0, 1])
    p3 = catalog.adler_moser_poly(3, [2.0, -1.5])
    # z^6 + 5 k2 z^3 + k3 z - 5 k2^2
    assert np.allclose(p3.coefficients, [-20.0, -1.5, 0, 10.0, 0, 0, 1])


def test_adler_moser_poly_degree_and_param_count():
    for j in range(0, 7):
        kap = [0.1 * (i + 1) for i in range(max(j - 1, 0))]
        poly = catalog.adler_moser_poly(j, kap)
        assert len(poly.coefficients) == poly.degree + 1
        assert poly.coefficients[-1] == 1
    with pytest.raises(ValueError):
        catalog.adler_moser_poly(3, [1.0])


def test_adler_moser_ladder_defect_zero():
    rng = np.random.default_rng(5)
    for j in (2, 3, 4, 5):
        kap = rng.normal(size=j - 1) + 1j * rng.normal(size=j - 1)
        poly = catalog.adler_moser_poly(j, kap)
        scale = np.max(np.abs(poly.coefficients))
        assert catalog.bilinear_ladder_defect(poly) / scale < 1e-10


def test_adler_moser_roots_give_translating_balance():
    # generic parameters: positive vortices at the ladder roots, negatives at
    # the partner roots, translating after pairing through the linear system
    config, motion = catalog.adler_moser_config(2)
    assert motion == Motion(1.0, 0.0)
    rep = check_balance(config, motion, tol=1e-12)
    assert rep.balanced
    assert rep.crystal_class.kind == "translating"


@pytest.mark.parametrize("j", [1, 2, 3, 4, 5])
def test_adler_moser_configs_balance(j):
    config, motion = catalog.adler_moser_config(j)
    assert config.n == j * (j + 1)
    assert np.max(np.abs(residual(config, motion))) < 5e-13
    s = config.circulations.astype(float)
    assert np.sum(s * config.positions) == pytest.approx(-config.n / (4j * np.pi), abs=1e-10)


@pytest.mark.parametrize("j", [6, 7, 8])
def test_adler_moser_high_rungs(j):
    config, motion = catalog.adler_moser_config(j)
    assert np.max(np.abs(residual(config, motion))) < 5e-13


def test_adler_moser_symmetry_invariance():
    for j in (2, 3):
        config, _ = catalog.adler_moser_config(j)
        p, s = config.positions, config.circulations
        for mapper, flip in ((np.conj, True), (lambda z: -np.conj(z), False)):
            images = mapper(p)
            for z, sig in zip(images, s):
                d = np.abs(z - p)
                i = int(np.argmin(d))
                assert d[i] < 1e-10
                assert s[i] == (-sig if flip else sig)


def test_adler_moser_range():
    with pytest.raises(ValueError):
        catalog.adler_moser_config(0)
    with pytest.raises(ValueError):
        catalog.adler_moser_config(9)


def test_vortex_pair_exact():
    config, motion = catalog.vortex_pair()
    assert motion == Motion(1.0, 0.0)
    assert np.max(np.abs(residual(config, motion))) == 0.0
    s = config.circulations.astype(float)
    assert np.sum(s * config.positions) == -2 / (4j * np.pi)


def test_karman_large_b_limit():
    _, motion = catalog.karman_street(5.0)
    assert motion.v == pytest.approx(-0.5, abs=1e-12)


def test_karman_unstaggered_consistency():
    config, motion = catalog.karman_street(0.5, staggered=False)
    fit = infer_motion(config)
    assert fit.v == pytest.approx(motion.v, abs=1e-13)
    assert motion.v == pytest.approx(-1 / (2 * np.tanh(0.5 * np.pi)))


def test_karman_rejects_nonpositive_b():
    with pytest.raises(ValueError):
        catalog.karman_street(0.0)


def test_dipole_half_x_offset_stationary():
    config, motion = catalog.doubly_dipole(1j, 0.5)
    assert abs(motion.v) < 1e-13


def test_dipole_generic_nondegenerate():
    from vcl.jacobian import rank_report

    config, motion = catalog.doubly_dipole(1j, 0.3 + 0.2j)
    rep = rank_report(config, motion)
    assert rep.rank == 2 == rep.max_possible_rank
    assert rep.nondegenerate


def test_dipole_lattice_offset_rejected():
    with pytest.raises(InvariantViolationError):
        catalog.doubly_dipole(1j, 1.0 + 1j)


def test_rotating_generators_normalized_moments():
    from vcl.config import normalize

    for make in (lambda: catalog.thomson(5), lambda: catalog.hermite_config(6), lambda: catalog.nested_polygons(2)):
        config, motion = make()
        out, m2 = normalize(config, motion)
        s = out.circulations.astype(float)
        assert abs(np.sum(s * out.positions)) < 1e-12
        m = s.sum()
        expected = (m * m - out.n) / (4 * np.pi * m2.omega)
        assert np.sum(s * np.abs(out.positions) ** 2) == pytest.approx(expected, abs=1e-12)
