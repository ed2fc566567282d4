"""Weighted distribution function, Lorenz curve, and Gini estimators."""

import math

import numpy as np
import pytest

from lorenzband import (
    DegeneracyError,
    ValidationError,
    curve_difference,
    gini,
    hajek_df,
    lorenz,
    quantile,
    sup_distance,
    weighted_step_df,
)
from lorenzband.designs import DrawnSample
from lorenzband import rng


def pairwise_gini(y, w):
    """Reference Gini: sum of weighted absolute differences over all pairs."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    num = 0.0
    for i in range(len(y)):
        for j in range(len(y)):
            num += w[i] * w[j] * abs(y[i] - y[j])
    return num / (2.0 * w.sum() * float(w @ y))


def make_sample(y, pi):
    y = np.asarray(y, dtype=float)
    pi = np.asarray(pi, dtype=float)
    return DrawnSample(
        indices=np.arange(len(y)), pi=pi, weights=1.0 / pi, y=y
    )


# --- step distribution function ---


def test_hajek_df_three_point_fixture():
    # weights 2, 4, 4 normalize to cumulative (0.2, 0.6, 1.0) exactly
    df = hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25]))
    assert np.array_equal(df.knots_y, [1.0, 2.0, 3.0])
    assert np.array_equal(df.cum_p, [0.2, 0.6, 1.0])


def test_weighted_step_df_merges_ties():
    df = weighted_step_df(np.array([5.0, 7.0, 5.0]), np.array([1.0, 1.0, 1.0]))
    assert np.array_equal(df.knots_y, [5.0, 7.0])
    assert np.array_equal(df.cum_p, [2.0 / 3.0, 1.0])
    # masses keep the max-normalized weight scale, not the probability scale
    assert np.array_equal(df.masses, [2.0, 1.0])


def test_step_df_is_right_continuous():
    df = weighted_step_df(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    vals = df.evaluate(np.array([0.5, 1.0, 1.5, 2.0, 3.0]))
    assert np.array_equal(vals, [0.0, 0.5, 0.5, 1.0, 1.0])


def test_step_df_ends_at_exactly_one():
    g = rng.spawn(17)
    y = g.random(50)
    w = 0.1 + g.random(50)
    assert weighted_step_df(y, w).cum_p[-1] == 1.0


def test_weighted_step_df_rejects_bad_input():
    with pytest.raises(ValidationError):
        weighted_step_df(np.array([]), np.array([]))
    with pytest.raises(ValidationError):
        weighted_step_df(np.array([1.0]), np.array([0.0]))
    with pytest.raises(ValidationError):
        weighted_step_df(np.array([1.0, 2.0]), np.array([1.0]))
    with pytest.raises(ValidationError):
        weighted_step_df(np.array([1.0, np.inf]), np.array([1.0, 1.0]))


def test_lorenz_rejects_negative_values():
    # a step d.f. may sit on negative values but income shares may not
    df = weighted_step_df(np.array([-1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        lorenz(df)


# --- quantiles ---


def test_quantile_left_inverse_convention():
    df = hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25]))
    assert quantile(df, 0.2) == 1.0  # boundary hits the first knot
    assert quantile(df, 0.200001) == 2.0
    assert quantile(df, 0.6) == 2.0
    assert quantile(df, 1.0) == 3.0


def test_quantile_single_knot():
    df = weighted_step_df(np.array([4.0]), np.array([3.0]))
    assert quantile(df, 0.001) == 4.0
    assert quantile(df, 1.0) == 4.0


@pytest.mark.parametrize("p", [0.0, -0.1, 1.0000001])
def test_quantile_rejects_out_of_range(p):
    df = weighted_step_df(np.array([4.0]), np.array([3.0]))
    with pytest.raises(ValidationError):
        quantile(df, p)


# --- Lorenz curve ---


def test_lorenz_three_point_fixture():
    # cumulative weighted income shares 2/22, 10/22, 22/22
    curve = lorenz(hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25])))
    assert np.array_equal(curve.knots_p, [0.0, 0.2, 0.6, 1.0])
    assert np.array_equal(curve.values_L, [0.0, 1.0 / 11.0, 5.0 / 11.0, 1.0])
    assert curve.mean == 2.2


def test_lorenz_equal_incomes_is_identity():
    curve = lorenz(weighted_step_df(np.array([3.0]), np.array([5.0])))
    assert np.array_equal(curve.knots_p, curve.values_L)


def test_lorenz_two_point_zero_one():
    # half the mass earns nothing: L stays 0 until p = 0.5
    df = weighted_step_df(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    curve = lorenz(df)
    assert np.array_equal(curve.knots_p, [0.0, 0.5, 1.0])
    assert np.array_equal(curve.values_L, [0.0, 0.0, 1.0])
    assert gini(curve).value == 0.5


def test_lorenz_rejects_zero_total_income():
    df = weighted_step_df(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(DegeneracyError):
        lorenz(df)


def test_lorenz_evaluate_interpolates():
    curve = lorenz(hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25])))
    mid = curve.evaluate(np.array([0.4]))[0]
    expected = 0.5 * (1.0 / 11.0 + 5.0 / 11.0)
    assert math.isclose(mid, expected, rel_tol=1e-15)
    assert curve.evaluate(np.array([0.0]))[0] == 0.0
    assert curve.evaluate(np.array([1.0]))[0] == 1.0


def test_generalized_curve_is_mean_scaled():
    curve = lorenz(hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25])))
    gen = curve.generalized(curve.knots_p)
    assert np.array_equal(gen, curve.mean * curve.values_L)


# --- Gini ---


def test_gini_three_point_weighted_fixture():
    # pairwise formula on weights (2, 4, 4): 80 / (2 * 10 * 22) = 2/11
    curve = lorenz(hajek_df(make_sample([1.0, 2.0, 3.0], [0.5, 0.25, 0.25])))
    assert math.isclose(gini(curve).value, 2.0 / 11.0, rel_tol=0, abs_tol=1e-15)


def test_gini_three_point_equal_weights():
    curve = lorenz(weighted_step_df(np.array([1.0, 2.0, 3.0]), np.ones(3)))
    assert math.isclose(gini(curve).value, 2.0 / 9.0, rel_tol=0, abs_tol=1e-15)


def test_gini_equal_incomes_is_zero():
    curve = lorenz(weighted_step_df(np.array([7.0]), np.array([2.0])))
    assert gini(curve).value == 0.0


@pytest.mark.parametrize("size", [2, 3, 4, 5, 6])
def test_gini_matches_pairwise_oracle(size):
    g = rng.spawn(200 + size)
    for _ in range(20):
        y = g.random(size) * 10.0
        w = 0.5 + g.random(size) * 4.0
        curve = lorenz(weighted_step_df(y, w))
        assert math.isclose(
            gini(curve).value, pairwise_gini(y, w), rel_tol=0, abs_tol=1e-12
        )


def test_gini_matches_pairwise_oracle_with_ties():
    y = np.array([2.0, 2.0, 5.0, 5.0, 9.0])
    w = np.array([1.0, 3.0, 2.0, 2.0, 0.5])
    curve = lorenz(weighted_step_df(y, w))
    assert math.isclose(
        gini(curve).value, pairwise_gini(y, w), rel_tol=0, abs_tol=1e-12
    )


# --- invariances ---


@pytest.mark.parametrize("lam", [2.0, 0.5, 0.25, 8.0])
def test_lorenz_scale_invariant_exact_for_binary_factors(lam):
    # powers of two rescale y without rounding, so the shares match bitwise
    g = rng.spawn(31)
    y = g.random(40) * 5.0 + 0.1
    w = 0.5 + g.random(40)
    a = lorenz(weighted_step_df(y, w))
    b = lorenz(weighted_step_df(lam * y, w))
    assert np.array_equal(a.knots_p, b.knots_p)
    assert np.array_equal(a.values_L, b.values_L)
    assert gini(a).value == gini(b).value


def test_lorenz_scale_invariant_to_rounding_for_any_factor():
    g = rng.spawn(37)
    y = g.random(40) * 5.0 + 0.1
    w = 0.5 + g.random(40)
    a = lorenz(weighted_step_df(y, w))
    b = lorenz(weighted_step_df(3.7 * y, w))
    assert np.allclose(a.values_L, b.values_L, rtol=0, atol=1e-14)
    assert math.isclose(gini(a).value, gini(b).value, abs_tol=1e-14)


@pytest.mark.parametrize("c", [2.0, 4.0, 0.125])
def test_step_df_invariant_to_weight_rescaling(c):
    g = rng.spawn(41)
    y = g.random(30)
    w = 0.5 + g.random(30)
    a = weighted_step_df(y, w)
    b = weighted_step_df(y, c * w)
    assert np.array_equal(a.cum_p, b.cum_p)
    assert np.array_equal(a.masses, b.masses)


def test_translation_reduces_gini():
    g = rng.spawn(43)
    for _ in range(50):
        y = g.random(25) * 10.0 + 0.01
        w = 0.5 + g.random(25)
        base = gini(lorenz(weighted_step_df(y, w))).value
        shifted = gini(lorenz(weighted_step_df(y + 5.0, w))).value
        assert shifted <= base + 1e-15


def test_lorenz_is_convex_and_below_diagonal():
    g = rng.spawn(47)
    for _ in range(25):
        y = g.random(30) * 10.0
        w = 0.5 + g.random(30)
        curve = lorenz(weighted_step_df(y, w))
        slopes = np.diff(curve.values_L) / np.diff(curve.knots_p)
        assert np.all(np.diff(slopes) >= -1e-12)
        assert np.all(curve.values_L <= curve.knots_p + 1e-15)
        assert np.all(np.diff(curve.values_L) >= 0.0)


def test_gini_stays_in_unit_interval():
    g = rng.spawn(53)
    for _ in range(50):
        y = g.random(20) * 100.0
        w = 0.5 + g.random(20)
        value = gini(lorenz(weighted_step_df(y, w))).value
        assert 0.0 <= value < 1.0


# --- sup distance between curves ---


def _random_curve(g, size):
    y = g.random(size) * 10.0 + 0.1
    w = 0.5 + g.random(size)
    return lorenz(weighted_step_df(y, w))


def test_sup_distance_identity_vs_two_point():
    ident = lorenz(weighted_step_df(np.array([1.0]), np.array([1.0])))
    two = lorenz(weighted_step_df(np.array([0.0, 1.0]), np.array([1.0, 1.0])))
    assert sup_distance(ident, two) == 0.5


def test_sup_distance_zero_iff_identical():
    g = rng.spawn(59)
    a = _random_curve(g, 15)
    assert sup_distance(a, a) == 0.0
    b = _random_curve(g, 15)
    assert sup_distance(a, b) > 0.0


def test_sup_distance_symmetry_and_triangle():
    g = rng.spawn(61)
    for _ in range(10):
        a = _random_curve(g, 12)
        b = _random_curve(g, 12)
        c = _random_curve(g, 12)
        assert sup_distance(a, b) == sup_distance(b, a)
        assert sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-15


def test_curve_difference_antisymmetric():
    g = rng.spawn(67)
    a = _random_curve(g, 12)
    b = _random_curve(g, 12)
    d1 = curve_difference(a, b)
    d2 = curve_difference(b, a)
    assert np.array_equal(d1.p, d2.p)
    assert np.array_equal(d1.values, -d2.values)
    assert d1.sup_abs() == d2.sup_abs()
