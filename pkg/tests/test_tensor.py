"""Christoffel symbols, curvature and the metric-compatibility residual."""

import numpy as np
import pytest

from walkergeom import (
    ChartSplit,
    MetricField,
    SingularMetricError,
    SymbolicConnection,
    christoffel,
    covariant_derivative_metric_residual,
    covariant_derivative_vector,
    curvature,
    curvature_components,
    lower_curvature,
    parse_expression,
)
from walkergeom.corpus import random_metric, random_walker_metric
from walkergeom.sampling import sample_points


def two_block(n):
    return ChartSplit.two_block(n, 1)


# ---------------------------------------------------------------------------
# christoffel
# ---------------------------------------------------------------------------


def test_christoffel_identity_metric_vanishes():
    g = MetricField(two_block(2), {(1, 1): 1.0, (2, 2): 1.0})
    G = christoffel(g).gamma(np.array([0.3, -0.8]))
    assert np.max(np.abs(G)) == 0.0


def test_christoffel_adapted_two_dim_block():
    # g_11 = -2 c x2, g_12 = 1, g_22 = 0 has Gamma^1_11 = c; hand value via
    # the shortcut 2 Gamma^i_jk = -g^{ai} d_a g_jk with [g^{ai}] = [1]
    c = 0.7
    g = MetricField(
        ChartSplit.three_block(2, 1), {(1, 1): f"-2*{c}*x2", (1, 2): 1.0}
    )
    pts = np.array([[0.1, 0.5], [-0.9, 0.2]])
    G = christoffel(g).gamma(pts)
    assert np.allclose(G[:, 0, 0, 0], c, atol=1e-14)


def test_christoffel_polar_type_metric():
    g = MetricField(two_block(2), {(1, 1): 1.0, (2, 2): "x1^2"})
    G = christoffel(g).gamma(np.array([2.0, 1.3]))
    assert abs(G[0, 1, 1] + 2.0) < 1e-14  # Gamma^1_22 = -x1
    assert abs(G[1, 0, 1] - 0.5) < 1e-14  # Gamma^2_12 = 1/x1


def test_christoffel_raises_on_singular_metric():
    g = MetricField(two_block(2), {(1, 1): "x1", (2, 2): 1.0})
    with pytest.raises(SingularMetricError):
        christoffel(g).gamma(np.array([0.0, 0.0]))


def test_metric_compatibility_for_random_metrics():
    rng = np.random.default_rng(5)
    for _ in range(6):
        n = int(rng.integers(2, 6))
        g = random_metric(rng, two_block(n))
        pts = sample_points(n, 100, seed=int(rng.integers(1 << 30)), metric=g)
        res = covariant_derivative_metric_residual(g, christoffel(g), pts)
        assert np.max(res) < 1e-10


def test_metric_compatibility_trivial_and_failing_cases():
    g = MetricField(two_block(2), {(1, 1): 1.0, (2, 2): 1.0})
    zero = SymbolicConnection.zero(2)
    assert covariant_derivative_metric_residual(g, zero, np.array([0.4, 0.1])) == 0.0

    g2 = MetricField(two_block(2), {(1, 1): "1 + x2^2", (2, 2): 1.0})
    assert covariant_derivative_metric_residual(g2, zero, np.array([0.0, 1.0])) > 0.0


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


def test_curvature_flat_connection_vanishes():
    flat = SymbolicConnection.zero(3)
    R = curvature(flat, np.array([0.1, 0.2, 0.3]))
    assert np.max(np.abs(R.components)) == 0.0


def test_curvature_antisymmetry_is_exact():
    rng = np.random.default_rng(6)
    g = random_metric(rng, two_block(3))
    pts = sample_points(3, 25, seed=9, metric=g)
    R = curvature_components(christoffel(g), pts)
    assert np.array_equal(R, -np.swapaxes(R, 1, 2))
    # in particular the i = j components vanish
    idx = np.arange(3)
    assert np.max(np.abs(R[:, idx, idx])) == 0.0


def test_curvature_round_sphere_against_finite_difference_oracle():
    # hand-derived connection of g = diag(1, sin^2 x1):
    #   Gamma^1_22 = -sin x1 cos x1,  Gamma^2_12 = cos x1 / sin x1
    conn = SymbolicConnection(
        2,
        {
            (1, 2, 2): parse_expression("-sin(x1)*cos(x1)", 2),
            (2, 1, 2): parse_expression("cos(x1)/sin(x1)", 2),
        },
    )
    x = np.array([np.pi / 2, 0.4])
    h = 1e-6
    # oracle: centred differences of the hand-derived Gamma in the formula
    G = conn.gamma(x)
    dG = np.empty((2, 2, 2, 2))
    for mu in range(2):
        step = np.zeros(2)
        step[mu] = h
        dG[mu] = (conn.gamma(x + step) - conn.gamma(x - step)) / (2 * h)
    quad = np.einsum("ljp,pik->ijkl", G, G) - np.einsum("lip,pjk->ijkl", G, G)
    oracle = np.einsum("jlik->ijkl", dG) - np.einsum("iljk->ijkl", dG) + quad
    assert abs(oracle[0, 1, 0, 1] - 1.0) < 1e-8  # frozen: R_121^2 = +1 at the pole

    # engine value from the metric itself
    g = MetricField(two_block(2), {(1, 1): 1.0, (2, 2): "sin(x1)^2"})
    R = curvature(christoffel(g), x)
    assert abs(R.components[0, 1, 0, 1] - 1.0) < 1e-12
    assert np.max(np.abs(R.components - oracle)) < 1e-8


def test_first_bianchi_identity():
    rng = np.random.default_rng(13)
    g = random_metric(rng, two_block(4))
    pts = sample_points(4, 40, seed=3, metric=g)
    R = curvature_components(christoffel(g), pts)
    cyc = (
        R
        + np.einsum("...jkil->...ijkl", R)
        + np.einsum("...kijl->...ijkl", R)
    )
    assert np.max(np.abs(cyc)) < 1e-10


def test_lower_curvature_levi_civita_symmetries():
    rng = np.random.default_rng(21)
    g = random_walker_metric(rng, 1, 2)
    pts = sample_points(g.n, 20, seed=4, metric=g)
    conn = christoffel(g)
    for x in pts[:5]:
        low = lower_curvature(curvature(conn, x), g)
        assert np.max(np.abs(low + np.einsum("jikl->ijkl", low))) < 1e-12
        assert np.max(np.abs(low + np.einsum("ijlk->ijkl", low))) < 1e-10
        assert np.max(np.abs(low - np.einsum("klij->ijkl", low))) < 1e-10


def test_lower_curvature_flat_metric_vanishes():
    g = MetricField(two_block(2), {(1, 1): 1.0, (2, 2): 1.0})
    low = lower_curvature(curvature(christoffel(g), np.array([0.1, 0.2])), g)
    assert np.max(np.abs(low)) == 0.0


# ---------------------------------------------------------------------------
# adapted-form shortcut (leading-block Christoffel symbols)
# ---------------------------------------------------------------------------


def _shortcut_residual(g, pts):
    """|2 Gamma^i_jk + g^{ai} d_a g_jk| via the inverse of the [g_ia] block."""
    chart = g.chart
    r = chart.r
    lead, trail = chart.leading, chart.trailing
    conn = christoffel(g)
    G = conn.gamma(pts)[:, lead, lead, lead]
    dg = g.partial_value(pts)
    gv = g.value(pts)
    block = gv[:, lead, trail]  # [i, a]
    inv = np.linalg.inv(block)  # [a, i]
    shortcut = np.einsum("...ai,...ajk->...ijk", inv, dg[:, trail, lead, lead])
    return np.max(np.abs(2.0 * G + shortcut))


def test_leading_block_shortcut_on_adapted_metrics():
    rng = np.random.default_rng(31)
    for (r, m) in [(1, 0), (1, 1), (2, 0), (2, 2)]:
        g = random_walker_metric(rng, r, m)
        pts = sample_points(g.n, 50, seed=r * 10 + m, metric=g)
        assert _shortcut_residual(g, pts) < 1e-10


def test_leading_block_shortcut_under_weaker_hypotheses():
    # only g_ab = g_ap = 0 and d_j g_ia = 0 are needed; g_ia may vary with
    # the middle/trailing coordinates
    chart = ChartSplit.three_block(4, 1)
    g = MetricField(
        chart,
        {
            (1, 1): "x2*x3 + x4^2",
            (1, 2): "0.3*x1",
            (1, 4): "1 + 0.2*x2 + 0.1*x4",
            (2, 2): "1 + 0.1*x1^2",
            (3, 3): 1.0,
        },
    )
    pts = sample_points(4, 50, seed=8, metric=g)
    assert _shortcut_residual(g, pts) < 1e-10


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def test_covariant_derivative_vector_flat_reduces_to_directional():
    flat = SymbolicConnection.zero(2)
    w = [parse_expression("x1*x2", 2), parse_expression("x2^2", 2)]
    v = [parse_expression("1", 2), parse_expression("0", 2)]
    pts = np.array([[0.5, 2.0]])
    out = covariant_derivative_vector(flat, w, v, pts)
    assert np.allclose(out, [[2.0, 0.0]])


def test_metric_rejects_conflicting_symmetric_entries():
    with pytest.raises(ValueError):
        MetricField(two_block(2), {(1, 2): "x1", (2, 1): "x2"})
