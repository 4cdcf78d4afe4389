"""Gradient-flow integration, trajectory identities, distance inequalities."""

import math
from fractions import Fraction

import numpy as np
import pytest

from lojalab.flow import (
    CoordinateSubspace,
    CriticalSet,
    DifferentiableFunction,
    FlowError,
    dqds_identity_error,
    energy_monotonicity_violation,
    integrate_flow,
    rk4_fixed_step,
    speed_identity_error,
    verify_distance_inequalities,
    verify_length_bound,
)
from lojalab.poly import parse

TIGHT = dict(rtol=1e-12, atol=1e-12)


def test_exponential_decay_matches_closed_form():
    # dx/dt = -2x from 0.5: x(t) = 0.5 exp(-2t).
    p = parse("x^2")
    traj = integrate_flow(p, [0.5], tol=1e-10, **TIGHT)
    assert traj.converged and traj.stop_reason == "gradient-below-tol"
    for t, x in zip(traj.times[::20], traj.points[::20, 0]):
        assert x == pytest.approx(0.5 * math.exp(-2.0 * t), rel=1e-9, abs=1e-12)
    assert traj.arc_length == pytest.approx(0.5, abs=1e-9)
    assert traj.limit_point[0] == pytest.approx(0.0, abs=1e-9)


def test_length_bound_equality_square():
    p = parse("x^2")
    traj = integrate_flow(p, [0.5], tol=1e-10, **TIGHT)
    report = verify_length_bound(traj, Fraction(1, 2), 2.0)
    assert report.bound == pytest.approx(0.5, abs=0)
    assert report.passed
    assert abs(report.margin) < 1e-6


def test_length_bound_equality_quartic():
    p = parse("x^4")
    traj = integrate_flow(p, [0.5], tol=4e-21, t_max=1e18)
    report = verify_length_bound(traj, Fraction(3, 4), 4.0)
    assert report.bound == pytest.approx(0.5, abs=0)
    assert report.passed
    assert abs(report.actual - 0.5) < 1e-6


def test_radial_flow_length_bound():
    p = parse("x^2 + y^2")
    traj = integrate_flow(p, [0.3, 0.4], tol=1e-10, **TIGHT)
    report = verify_length_bound(traj, Fraction(1, 2), 2.0)
    assert report.bound == pytest.approx(0.5, abs=0)
    assert traj.arc_length == pytest.approx(0.5, abs=1e-8)
    assert report.passed


def test_product_flow_converges_to_nearest_axis():
    p = parse("x^2*y^2")
    crit = CriticalSet(
        subspaces=(CoordinateSubspace((0,)), CoordinateSubspace((1,)))
    )
    traj = integrate_flow(p, [0.3, 0.4], tol=1e-10, crit_set=crit, **TIGHT)
    assert traj.converged
    # y^2 - x^2 is conserved, so the limit is (0, sqrt(0.07)).
    assert traj.limit_point[0] == pytest.approx(0.0, abs=1e-8)
    assert traj.limit_point[1] == pytest.approx(math.sqrt(0.07), abs=1e-8)
    assert traj.snap_distance < 1e-8


def test_trajectory_identities_on_corpus():
    cases = [
        ("x^2", [0.5], 1e-10),
        ("x^4", [0.5], 1e-10),
        ("x^2 + y^2", [0.3, 0.4], 1e-10),
        ("x^2*y^2", [0.3, 0.4], 1e-10),
        ("x^2 + y^4", [0.2, 0.2], 1e-5),
    ]
    for text, x0, tol in cases:
        p = parse(text)
        traj = integrate_flow(p, x0, tol=tol, **TIGHT)
        assert traj.converged, text
        assert energy_monotonicity_violation(traj) <= 1e-9, text
        assert dqds_identity_error(traj, p, count=40_000) <= 1e-6, text
        assert speed_identity_error(traj) <= 1e-6, text


def test_halved_tolerance_limit_agreement():
    p = parse("x^2 + y^4")
    a = integrate_flow(p, [0.2, 0.2], tol=1e-5, rtol=1e-9, atol=1e-9)
    b = integrate_flow(p, [0.2, 0.2], tol=1e-5, rtol=1e-12, atol=1e-12)
    assert np.linalg.norm(a.limit_point - b.limit_point) < 1e-6


def test_adaptive_agrees_with_fixed_step_oracle():
    p = parse("x^2 + y^2")
    traj = integrate_flow(p, [0.3, 0.4], tol=1e-10, t_max=1.0, **TIGHT)
    # Independent route: classical RK4 with a fixed step to the same time.
    t_end = float(traj.times[-1])
    endpoint = rk4_fixed_step(p, [0.3, 0.4], step=t_end / 4096, steps=4096)
    assert np.linalg.norm(traj.points[-1] - endpoint) < 1e-9


def test_fixed_step_halving_agreement():
    p = parse("x^2*y^2")
    coarse = rk4_fixed_step(p, [0.3, 0.4], step=1e-2, steps=20_000)
    fine = rk4_fixed_step(p, [0.3, 0.4], step=5e-3, steps=40_000)
    assert np.linalg.norm(coarse - fine) < 1e-6


def test_left_domain_recorded():
    traj = integrate_flow(parse("0 - x^2"), [0.1], tol=1e-12, t_max=100.0, sigma=0.5)
    assert traj.stop_reason == "left-domain"
    assert not traj.converged
    assert abs(traj.points[-1, 0]) == pytest.approx(0.5, abs=1e-9)


def test_nonfinite_gradient_raises():
    bad = DifferentiableFunction(
        dimension=1,
        value=lambda x: float(x[0]),
        gradient=lambda x: np.array([math.nan]),
    )
    with pytest.raises(FlowError, match="non-finite"):
        integrate_flow(bad, [0.5], tol=1e-6)


def test_already_converged_start():
    traj = integrate_flow(parse("x^2"), [0.0], tol=1e-6)
    assert traj.converged and traj.arc_length == 0.0


# ----------------------------------------------------------------------
# distance descriptors
# ----------------------------------------------------------------------


def test_critical_set_distances_exact():
    crit = CriticalSet(
        subspaces=(CoordinateSubspace((0,)),), points=((1.0, 1.0),)
    )
    pts = np.array([[0.3, 0.4], [1.0, 1.1], [2.0, 0.0]])
    # distance to x-axis is |y|; to the point, the euclidean distance.
    expected = [min(0.4, math.hypot(0.7, 0.6)), min(1.1, 0.1), min(0.0, math.hypot(1, 1))]
    assert np.allclose(crit.distances(pts), expected)


def test_critical_set_rejects_empty():
    with pytest.raises(FlowError):
        CriticalSet()


def test_trajectory_csv_columns(tmp_path):
    traj = integrate_flow(parse("x^2 + y^2"), [0.3, 0.4], tol=1e-8)
    path = tmp_path / "trajectory.csv"
    traj.write_csv(str(path))
    header = path.read_text().splitlines()[0]
    assert header == "t,x_1,x_2,E,grad_norm,arc_length"


# ----------------------------------------------------------------------
# distance inequalities
# ----------------------------------------------------------------------


def test_distance_inequalities_for_square():
    p = parse("x^2")
    reports = verify_distance_inequalities(
        p, CriticalSet.subspace(()), Fraction(1, 2), gradient_constant=2.0
    )
    by_id = {r.inequality_id: r for r in reports}
    # E = dist^2 exactly, so the alpha constant is exactly 1.
    assert by_id["distance-critical"].exponent == Fraction(2)
    assert by_id["distance-critical"].measured_constant == pytest.approx(1.0, abs=1e-9)
    assert by_id["distance-zero"].exponent == Fraction(2)
    assert by_id["distance-zero"].measured_constant == pytest.approx(1.0, abs=1e-9)
    assert by_id["gradient-distance"].exponent == Fraction(1)
    assert by_id["gradient-distance"].measured_constant == pytest.approx(2.0, abs=1e-9)
    assert by_id["gradient-distance-analytic"].exponent == Fraction(1)
    assert all(r.passed for r in reports)


def test_distance_inequalities_for_product_square():
    p = parse("x^2*y^2")
    crit = CriticalSet(
        subspaces=(CoordinateSubspace((0,)), CoordinateSubspace((1,)))
    )
    reports = verify_distance_inequalities(p, crit, Fraction(3, 4))
    by_id = {r.inequality_id: r for r in reports}
    assert by_id["distance-critical"].exponent == Fraction(4)
    assert all(r.measured_constant > 0 for r in reports)
    # Grid oracle: x^2 y^2 >= min(|x|,|y|)^4 on the ball.
    grid = np.linspace(-0.125, 0.125, 41)
    xs, ys = np.meshgrid(grid, grid)
    lhs = (xs * ys) ** 2
    rhs = np.minimum(np.abs(xs), np.abs(ys)) ** 4
    assert np.all(lhs + 1e-18 >= rhs)


def test_distance_inequalities_for_quartic_well():
    p = parse("x^2 + y^4")
    reports = verify_distance_inequalities(p, CriticalSet.origin(2), Fraction(3, 4))
    assert all(r.measured_constant > 0 for r in reports)
    assert all(r.passed for r in reports)


def test_distance_alpha_skipped_for_sign_changing_function():
    p = parse("x^2 - y^2")
    reports = verify_distance_inequalities(p, CriticalSet.origin(2), Fraction(1, 2))
    alpha = next(r for r in reports if r.inequality_id == "distance-critical")
    assert "skipped" in alpha.notes
    assert not alpha.passed
