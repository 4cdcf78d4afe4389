"""Blow-up engine: chart towers, golden transforms, transported bounds."""

from fractions import Fraction

import numpy as np
import pytest

from lojalab.blowup import (
    BlowupError,
    blowup_once,
    exponent_upper_bound,
    pull_back_and_bound,
    resolve,
    translated_chart_analysis,
)
from lojalab.poly import Substitution, parse

CUSP = parse("x^2 - y^3")

# Traditional chart letters for the engine's path-derived variable names.
RENAMES = {
    "root/1": {"u1": "u", "v1": "v"},
    "root/2": {"a2": "a", "b2": "b"},
    "root/1/2": {"a12": "r", "b12": "s"},
    "root/2/1": {"u21": "c", "v21": "d"},
    "root/1/2/2": {"a122": "alpha", "b122": "beta"},
    "root/2/1/1": {"u211": "g", "v211": "h"},
}


def test_blowup_once_cusp_charts():
    chart1, chart2 = blowup_once(CUSP)
    assert chart1.total_transform.rename(RENAMES["root/1"]) == parse("u^2*v^2 - v^3")
    assert chart2.total_transform.rename(RENAMES["root/2"]) == parse("a^2 - a^3*b^3")
    # New exceptional line: second variable in chart 1, first in chart 2.
    assert chart1.exceptional_axes == (False, True)
    assert chart2.exceptional_axes == (True, False)


def test_blowup_once_monomializes_cross_term():
    chart1, _ = blowup_once(parse("x*y"))
    assert chart1.total_transform.rename(RENAMES["root/1"]) == parse("u*v^2")


def test_blowup_once_needs_two_variables():
    with pytest.raises(BlowupError):
        blowup_once(parse("x^2"))


# ----------------------------------------------------------------------
# resolve, default origin-stopped mode
# ----------------------------------------------------------------------


def test_resolve_already_snc_is_depth_zero():
    result = resolve(parse("x1*x2"), max_depth=3)
    assert result.tree.depth == 0
    assert len(result.leaf_reports) == 1
    leaf = result.leaf_reports[0]
    assert leaf.snc and leaf.theta_bound == Fraction(1, 2)
    assert result.theta_interval == (Fraction(1, 2), Fraction(1, 2))


def test_resolve_cusp_produces_golden_leaf():
    result = resolve(CUSP, max_depth=3)
    golden = [
        leaf
        for leaf in result.leaf_reports
        if leaf.exponents == (6, 2) and leaf.snc
    ]
    assert len(golden) == 1
    leaf = golden[0]
    assert leaf.total_degree == 8
    assert leaf.theta_bound == Fraction(7, 8)
    assert leaf.residual.rename(RENAMES["root/1/2/2"]) == parse(
        "1 - beta", variables=["alpha", "beta"]
    )


def test_resolve_requires_vanishing_origin():
    with pytest.raises(BlowupError):
        resolve(parse("1 + x*y"))


def test_resolve_depth_cap_flags_branch():
    result = resolve(CUSP, max_depth=1)
    assert result.depth_capped
    capped = [leaf for leaf in result.leaf_reports if leaf.depth_capped]
    assert capped and all(not leaf.snc for leaf in capped)


# ----------------------------------------------------------------------
# full expansion: the worked-example tower
# ----------------------------------------------------------------------


def test_expanded_tower_reproduces_all_transforms():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    expected = {
        "root/1": "u^2*v^2 - v^3",
        "root/2": "a^2 - a^3*b^3",
        "root/1/2": "r^4*s^2 - r^3*s^3",
        "root/2/1": "c^2*d^2 - c^3*d^6",
        "root/1/2/2": "alpha^6*beta^2 - alpha^6*beta^3",
        "root/2/1/1": "g^2*h^4 - g^3*h^9",
    }
    for chart_id, text in expected.items():
        node = result.tree.node(chart_id)
        assert node.total_transform.rename(RENAMES[chart_id]) == parse(text), chart_id


def test_expanded_tower_composite_map():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    node = result.tree.node("root/1/2/2")
    rename = RENAMES["root/1/2/2"]
    assert node.composite[0].rename(rename) == parse("alpha^3*beta")
    assert node.composite[1].rename(rename) == parse("alpha^2*beta")


def test_exceptional_multiplicities_match_content_on_snc_nodes():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    for node in result.tree.nodes.values():
        if node.depth >= 1 and node.snc:
            assert node.exceptional_multiplicities == node.factorization.exponents


# ----------------------------------------------------------------------
# structural invariants
# ----------------------------------------------------------------------


def test_roundtrip_composite_reproduces_total_transform():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    for node in result.tree.nodes.values():
        if node.depth == 0:
            continue
        sub = Substitution(
            {
                CUSP.variables[0]: node.composite[0],
                CUSP.variables[1]: node.composite[1],
            }
        )
        assert CUSP.substitute(sub) == node.total_transform, node.chart_id


def test_composite_injective_off_exceptional_set():
    result = resolve(CUSP, max_depth=3)
    rng = np.random.default_rng(3)
    for leaf in result.leaf_reports:
        fx = leaf.composite[0].numeric()
        fy = leaf.composite[1].numeric()
        pts = rng.uniform(0.05, 1.0, size=(40, 2)) * rng.choice([-1.0, 1.0], size=(40, 2))
        images = np.column_stack([fx(pts), fy(pts)])
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if np.linalg.norm(pts[i] - pts[j]) > 1e-6:
                    assert np.linalg.norm(images[i] - images[j]) > 1e-9


def test_exceptional_axes_map_into_zero_set():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    probe_values = [Fraction(1, 3), Fraction(-2, 5), Fraction(7, 4)]
    for node in result.tree.nodes.values():
        if node.depth == 0:
            continue
        for axis, exceptional in enumerate(node.exceptional_axes):
            if not exceptional:
                continue
            for t in probe_values:
                point = [t, t]
                point[axis] = Fraction(0)
                image = [c.evaluate_exact(point) for c in node.composite]
                on_curve = CUSP.evaluate_exact(image) == 0
                at_origin = image[0] == 0 and image[1] == 0
                assert on_curve or at_origin, (node.chart_id, axis)


def test_monomial_degree_never_decreases_along_branches():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    for node in result.tree.nodes.values():
        if node.parent is None:
            continue
        parent = result.tree.node(node.parent)
        assert node.monomial_total_degree >= parent.monomial_total_degree


# ----------------------------------------------------------------------
# translated-chart analysis
# ----------------------------------------------------------------------


def test_translated_point_on_golden_leaf():
    result = resolve(CUSP, max_depth=3, expand_snc=True)
    node = result.tree.node("root/1/2/2")
    reports, unanalyzed = translated_chart_analysis(node)
    assert unanalyzed == 0
    assert len(reports) == 1
    rep = reports[0]
    assert rep.point_value == 1
    assert rep.exponents == (6, 1)
    assert rep.total_degree == 7
    assert rep.theta_bound == Fraction(6, 7)
    # Residual (1 - gamma)^2, nonzero at the recentred origin.
    assert rep.residual.constant_term() == 1
    assert rep.residual == parse("(1 - gamma)*(1 - gamma)", variables=["a122", "gamma"])


def test_translated_analysis_counts_irrational_points():
    # x^2 - 2y^2 pulls back to v^2 (u^2 - 2): the residual meets the
    # exceptional line at u = +/- sqrt(2), both irrational.
    child1, _ = blowup_once(parse("x^2 - 2*y^2"))
    reports, unanalyzed = translated_chart_analysis(child1)
    assert unanalyzed == 2
    assert reports == []


def test_pull_back_and_bound_cross_is_tight():
    p = parse("x1*x2")
    result = resolve(p)
    bound = pull_back_and_bound(p, result)
    assert bound.interval == (Fraction(1, 2), Fraction(1, 2))
    assert bound.per_leaf[0].jacobian_sup >= 1.0


def test_pull_back_and_bound_cusp_leaves():
    result = resolve(CUSP, max_depth=3)
    bound = pull_back_and_bound(CUSP, result)
    intervals = {b.chart_id: b.interval for b in bound.per_leaf}
    assert intervals["root/1/2/2"] == (Fraction(1, 2), Fraction(7, 8))
    assert all(b.constant_factor > 0 for b in bound.per_leaf)
    assert bound.origin_local


def test_exponent_upper_bound_routes():
    theta, how = exponent_upper_bound(parse("x^2*y^2"))
    assert theta == Fraction(3, 4) and how == "snc"
    theta, how = exponent_upper_bound(CUSP)
    assert how == "resolution-origin-local"
    assert Fraction(2, 3) <= theta < 1
    # No route: three variables and not snc at the origin.
    assert exponent_upper_bound(parse("x^2 - y^3 + z^5")) is None


def test_resolve_report_json_shape():
    result = resolve(CUSP, max_depth=3)
    payload = result.to_json()
    assert payload["root"] == str(CUSP)
    assert payload["theta_interval"] is not None
    assert payload["origin_local"] is True
    leaf = payload["leaves"][0]
    assert {"chart_path", "composite_map", "monomial", "residual", "N", "theta_bound"} <= set(leaf)
