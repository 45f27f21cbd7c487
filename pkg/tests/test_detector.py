"""Tests for the symmetry detector: energy derivative, reflected-point
gradient relations, and the annular decomposition."""

import math

import numpy as np
import pytest

from csym import detector, fixtures, grids, radial
from csym.functionals import EquationSpec
from csym.grids import Direction, GridFunction

G2 = lambda z: z * z


@pytest.fixture(scope="module")
def torsion_raster():
    spec = EquationSpec.power_law(2.0, f=1.0, lam=0.5)
    prof = radial.solve_radial(spec, 2, 0.25)
    return radial.rasterize(prof, (0.0, 0.0), ((-1.2, 1.2), (-1.2, 1.2)), (256, 256))


# -- energy derivative ----------------------------------------------------------


def test_energy_derivative_zero_for_flow_fixed_point(torsion_raster):
    ed = detector.energy_derivative(torsion_raster, G2, 0)
    assert ed.value == 0.0 and ed.uncertainty == 0.0
    assert ed.symmetric


def test_energy_derivative_positive_for_asymmetric_tent():
    u = fixtures.asymmetric_tent_1d(512)
    ed = detector.energy_derivative(u, G2, 0, t_list=(0.2, 0.1, 0.05, 0.025))
    assert ed.value > 0.0
    # the total energy drop at t = inf is 1.5 - 4/3 = 1/6; the small-t
    # quotient is positive but need not match that secant
    assert all(q >= -1e-9 for _, q in ed.samples)


def test_energy_derivative_translate_blind_for_off_center_ball():
    # every fiber's level sets share the center 0.7, so the flow is a rigid
    # translation toward the axis and gradient energy cannot change; an
    # off-center ball is locally symmetric and the criterion must accept it
    u = fixtures.radial_bump_2d(n=128, half_width=2.0, center=(0.7, 0.0))
    ed = detector.energy_derivative(u, G2, 0, t_list=(0.4, 0.2, 0.1))
    eps = u.max_spacing * u.lipschitz_estimate() ** 2 * u.radius
    assert abs(ed.value) <= eps
    assert ed.symmetric


def test_energy_derivative_positive_for_skewed_profile():
    # level sets within a fiber are non-concentric, so the flow deforms the
    # profile immediately and the quotient stays positive down to t -> 0
    from csym.functionals import dirichlet_energy
    from csym.grids import GridFunction

    n = 256
    bbox = ((-2.5, 2.5), (-2.0, 2.0))
    xs = np.linspace(-2.5, 2.5, n, endpoint=False) + 2.5 / n
    ys = np.linspace(-2.0, 2.0, n, endpoint=False) + 2.0 / n
    x, y = np.meshgrid(xs, ys, indexing="ij")
    tent = np.maximum(0.0, np.where(x < 0, 1.0 + x, 1.0 - 0.5 * x))
    u = GridFunction(bbox, tent * np.maximum(0.0, 1.0 - y * y))
    ed = detector.energy_derivative(u, G2, 0, t_list=(0.2, 0.1, 0.05, 0.025))
    assert ed.value > 0.0
    assert all(q > 0 for _, q in ed.samples)
    assert dirichlet_energy(grids.steiner(u, 0), G2) < dirichlet_energy(u, G2)


def test_energy_derivative_never_materially_negative(small_suite):
    for u in small_suite[:4]:
        ed = detector.energy_derivative(u, G2, 0, t_list=(0.2, 0.1, 0.05))
        eps = 10 * u.max_spacing * 2 * u.lipschitz_estimate()
        assert all(q >= -eps for _, q in ed.samples)


def test_energy_derivative_needs_three_times():
    u = fixtures.tent_1d(128)
    with pytest.raises(ValueError, match="3 flow times"):
        detector.energy_derivative(u, G2, 0, t_list=(0.1, 0.01))
    with pytest.raises(ValueError, match="decreasing"):
        detector.energy_derivative(u, G2, 0, t_list=(0.01, 0.1, 0.5))


# -- reflection_point -------------------------------------------------------------


def test_reflection_symmetric_tent():
    u = fixtures.tent_1d(512, half_width=2.5, center=0.5)
    mirror = detector.reflection_point(u, np.array([0.0]), 0)
    assert mirror is not None and abs(mirror[0] - 1.0) <= 1e-6


def test_reflection_radial_bump():
    u = fixtures.radial_bump_2d(n=512)
    mirror = detector.reflection_point(u, np.array([-0.6, 0.0]), 0)
    assert mirror is not None
    assert abs(mirror[0] - 0.6) <= 1e-3 and abs(mirror[1]) <= 1e-12


def test_reflection_involution(torsion_raster):
    u = torsion_raster
    y = np.array([-0.5, 0.2])
    mirror = detector.reflection_point(u, y, 0)
    assert mirror is not None
    back = detector.reflection_point(
        u, mirror, Direction(0, np.array([[-1.0, 0.0], [0.0, -1.0]]))
    )
    assert back is not None
    assert np.abs(back - y).max() <= u.max_spacing


def test_reflection_precondition_violations():
    u = fixtures.tent_1d(256)
    with pytest.raises(ValueError, match="0 < u"):
        detector.reflection_point(u, np.array([-1.5]), 0)  # u = 0 there
    with pytest.raises(ValueError, match="derivative"):
        detector.reflection_point(u, np.array([0.5]), 0, grad_tol=2.0)


def test_reflection_not_found_when_window_exits():
    u = fixtures.tent_1d(512, half_width=2.5, center=0.5)
    # crossing sits at x = 1; a search window shorter than that exits first
    assert detector.reflection_point(u, np.array([0.0]), 0, max_span=0.5) is None


# -- local_symmetry_check -----------------------------------------------------------


def test_local_symmetry_radial_all_directions(torsion_raster):
    u = torsion_raster
    tol = 5 * u.max_spacing * u.lipschitz_estimate()
    for d in detector.direction_set(2, 8):
        pts = detector.sample_points(u, d, n_samples=24)
        res = detector.local_symmetry_check(u, d, pts, tol=tol)
        assert res.passed, (d, res.max_residual)


def test_local_symmetry_asymmetric_tent_fails():
    u = fixtures.asymmetric_tent_1d(512)
    res = detector.local_symmetry_check(u, 0, np.array([[-0.5]]), tol=0.05)
    assert len(res.pairs) == 1
    pair = res.pairs[0]
    assert abs(pair.mirror[0] - 1.0) <= 1e-3
    assert abs(pair.residual_parallel - 0.5) <= 0.05
    assert not res.passed


def test_local_symmetry_plateau_cone_passes_below_plateau():
    u = fixtures.truncated_cone_2d(n=256)
    d = Direction(0)
    pts = detector.sample_points(u, d, n_samples=24, value_band=(0.2, 0.9))
    res = detector.local_symmetry_check(
        u, d, pts, tol=5 * u.max_spacing * u.lipschitz_estimate()
    )
    assert res.pairs and res.passed


def test_local_symmetry_counts_skipped():
    u = fixtures.tent_1d(256, half_width=2.5, center=0.5)
    samples = np.array([[0.0], [-1.6]])  # second violates 0 < u(y)
    res = detector.local_symmetry_check(u, 0, samples, tol=0.05)
    assert res.n_skipped == 1 and len(res.pairs) == 1


def test_sample_points_satisfy_preconditions():
    u = fixtures.radial_bump_2d(n=128)
    pts = detector.sample_points(u, 0, n_samples=40)
    assert len(pts) > 0
    vals = u.interp(pts)
    assert np.all((vals > 0.1 * u.max_value) & (vals < 0.95 * u.max_value))


# -- radial_decomposition -------------------------------------------------------------


def test_decomposition_ball(torsion_raster):
    dec = detector.radial_decomposition(torsion_raster)
    assert dec.classification == "ball, radial"
    assert len(dec.annuli) == 1
    ann = dec.annuli[0]
    assert ann.r_inner == 0.0
    assert not dec.critical_mask.any()
    assert abs(ann.r_outer - 1.0) <= 3 * torsion_raster.max_spacing
    assert np.abs(np.asarray(ann.center)).max() <= torsion_raster.max_spacing
    assert dec.connected and dec.disjoint


def test_decomposition_plateau_cone():
    u = fixtures.truncated_cone_2d(n=256)
    h = u.max_spacing
    dec = detector.radial_decomposition(u)
    assert len(dec.annuli) == 1
    ann = dec.annuli[0]
    assert ann.r_inner > 0.0
    assert abs(ann.r_inner - 0.4) <= 3 * h
    assert ann.hole_condition and ann.radially_decreasing
    assert dec.classification == "locally symmetric"
    # critical set matches the plateau within a 2-cell collar
    rho = np.sqrt((u.cell_centers() ** 2).sum(-1))
    S = dec.critical_mask
    assert not S[(rho > 0.4 + 2 * h)].any()
    inner = (rho < 0.4 - 2 * h) & (u.values > 0)
    assert S[inner].all()


def test_decomposition_two_balls():
    u = fixtures.two_bumps_2d(n=256)
    dec = detector.radial_decomposition(u)
    assert len(dec.annuli) == 2
    assert not dec.connected
    assert dec.disjoint
    assert dec.classification == "locally symmetric"


def test_decomposition_rejects_asymmetric():
    u = fixtures.random_bumps(3, n=128)
    dec = detector.radial_decomposition(u)
    assert dec.classification == "non-symmetric"


def test_direction_set_counts():
    assert len(detector.direction_set(1, 5)) == 1
    dirs2 = detector.direction_set(2, 16)
    assert len(dirs2) == 16
    dirs3 = detector.direction_set(3, 26)
    assert len(dirs3) == 26
    for d in dirs3:
        e = d.unit_vector(3)
        assert abs(np.linalg.norm(e) - 1.0) <= 1e-12
