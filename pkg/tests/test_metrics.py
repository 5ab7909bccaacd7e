from fractions import Fraction

import numpy as np
import pytest

from lobflow import Side, Snapshot
from lobflow.errors import EmptySide, InsufficientDepth
from lobflow.metrics import (
    book_imbalance,
    compute_static_metrics,
    cumulative_depth,
    execution_cost_PI,
    impact_slope,
    mid_and_spread,
    pi_curve,
)


def snap(bids, asks):
    return Snapshot(ts=0, bids=tuple(bids), asks=tuple(asks))


def rect_snap(width, n_levels=40, spread=1, p0=2500):
    """Rectangular book: every level holds `width` shares."""
    return snap(
        [(p0 - i, width) for i in range(n_levels)],
        [(p0 + spread + i, width) for i in range(n_levels)],
    )


# --- mid / spread / BI --------------------------------------------------------

def test_mid_and_spread():
    s = snap([(2629, 100)], [(2630, 100)])
    assert mid_and_spread(s) == (5259, 1)
    s2 = snap([(2629, 100)], [(2631, 100)])
    assert mid_and_spread(s2) == (5260, 2)


def test_mid_translation_invariance():
    s = snap([(2629, 100)], [(2630, 100)])
    shifted = snap([(2639, 100)], [(2640, 100)])
    mid0, spr0 = mid_and_spread(s)
    mid1, spr1 = mid_and_spread(shifted)
    assert mid1 - mid0 == 20 and spr1 == spr0


def test_book_imbalance_values():
    assert book_imbalance(snap([(99, 500)], [(100, 500)])) == 0.0
    assert book_imbalance(snap([(99, 24000)], [(100, 8000)])) == -0.5
    # swapping sides negates
    assert book_imbalance(snap([(99, 8000)], [(100, 24000)])) == 0.5


# --- cumulative depth ----------------------------------------------------------

def test_cumulative_depth_reference_ladder(fig_book_snapshot):
    s = fig_book_snapshot
    assert cumulative_depth(s, 1, Side.ASK) == 8000
    assert cumulative_depth(s, 2, Side.ASK) == 18000
    assert cumulative_depth(s, 4, Side.ASK) == 40000
    # beyond populated levels: sum of all, no extrapolation
    assert cumulative_depth(s, 9, Side.ASK) == 40000


def test_cumulative_depth_skips_empty_ticks():
    s = snap([(100, 10), (97, 20)], [(101, 5), (105, 7)])
    assert cumulative_depth(s, 2, Side.BID) == 30
    assert cumulative_depth(s, 2, Side.ASK) == 12


# --- execution cost -------------------------------------------------------------

def test_pi_reference_values(fig_book_snapshot):
    s = fig_book_snapshot
    assert execution_cost_PI(s, 30000, Side.ASK) == Fraction(9, 5)
    assert execution_cost_PI(s, 8000, Side.ASK) == Fraction(1, 2)
    assert execution_cost_PI(s, 1, Side.ASK) == Fraction(1, 2)
    assert execution_cost_PI(s, 18000, Side.ASK) == Fraction(19, 18)
    # symmetric book: bid side identical
    assert execution_cost_PI(s, 30000, Side.BID) == Fraction(9, 5)


def test_pi_equals_half_spread_up_to_touch_volume():
    s = snap([(99, 700)], [(100, 700), (101, 50)])
    for n in (1, 350, 700):
        assert execution_cost_PI(s, n, Side.ASK) == Fraction(1, 2)
    assert execution_cost_PI(s, 701, Side.ASK) > Fraction(1, 2)


def test_pi_monotone_in_n(fig_book_snapshot):
    s = fig_book_snapshot
    values = [execution_cost_PI(s, n, Side.ASK)
              for n in range(1000, 40001, 1000)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_pi_gap_uses_true_price_distance():
    # level 2 sits 4 ticks behind the touch; cost must use the real gap
    s = snap([(95, 100)], [(100, 10), (104, 10)])
    # mid = 97.5 ticks -> distances 2.5 and 6.5
    assert execution_cost_PI(s, 20, Side.ASK) == Fraction(45, 10) / 1


def test_pi_insufficient_depth(fig_book_snapshot):
    with pytest.raises(InsufficientDepth):
        execution_cost_PI(fig_book_snapshot, 40001, Side.ASK)


def test_pi_errors_on_empty_side():
    with pytest.raises(EmptySide):
        execution_cost_PI(Snapshot(0, (), ((100, 5),)), 1, Side.BID)


# --- impact slope ----------------------------------------------------------------

def brute_force_slope(s, n_shares, side, intercept):
    """Independent oracle: explicit PI_n grid + textbook least squares."""
    pi = np.array([float(execution_cost_PI(s, n, side))
                   for n in range(1, n_shares + 1)])
    n = np.arange(1, n_shares + 1, dtype=float)
    if intercept:
        return float(np.polyfit(n, pi, 1)[0])
    return float(np.dot(n, pi) / np.dot(n, n))


@pytest.mark.parametrize("intercept", [False, True])
@pytest.mark.parametrize("n_shares", [60, 155, 300])
def test_slope_matches_brute_force(intercept, n_shares):
    s = snap([(99, 80), (98, 50), (96, 120), (95, 60)],
             [(100, 80), (101, 50), (103, 120), (104, 60)])
    fast = impact_slope(s, n_shares, Side.ASK, intercept=intercept)
    ref = brute_force_slope(s, n_shares, Side.ASK, intercept)
    assert fast == pytest.approx(ref, rel=1e-9)


def test_slope_reference_value(fig_book_snapshot):
    s_hat = impact_slope(fig_book_snapshot, 30000, Side.ASK)
    assert s_hat * 1000 == pytest.approx(0.0611, rel=0.01)
    assert 0.5 / s_hat == pytest.approx(8176, rel=0.01)


def test_slope_intercept_convention_differs(fig_book_snapshot):
    origin = impact_slope(fig_book_snapshot, 30000, Side.ASK, intercept=False)
    with_icpt = impact_slope(fig_book_snapshot, 30000, Side.ASK, intercept=True)
    assert with_icpt != pytest.approx(origin, rel=0.05)


def test_rectangular_book_slope_inverse_width():
    for w in (500, 2000):
        s = rect_snap(w)
        s_hat = impact_slope(s, 10 * w, Side.ASK)
        assert s_hat * 2 * w == pytest.approx(1.0, rel=0.02)


def test_doubling_volume_halves_slope():
    w = 1000
    s1 = rect_snap(w)
    s2 = rect_snap(2 * w)
    n = 8 * w
    s_hat1 = impact_slope(s1, n, Side.ASK)
    s_hat2 = impact_slope(s2, n, Side.ASK)
    assert s_hat2 == pytest.approx(s_hat1 / 2, rel=0.05)


def test_pi_curve_consistent_with_exact_pi(fig_book_snapshot):
    curve = pi_curve(fig_book_snapshot, 30000, Side.ASK)
    assert curve[-1] == pytest.approx(1.8, abs=1e-12)
    assert curve[7999] == pytest.approx(0.5, abs=1e-12)
    for n in (123, 8000, 17500, 29999):
        exact = float(execution_cost_PI(fig_book_snapshot, n, Side.ASK))
        assert curve[n - 1] == pytest.approx(exact, rel=1e-12)


# --- bundled static metrics ------------------------------------------------------

def test_compute_static_metrics(fig_book_snapshot):
    m = compute_static_metrics(fig_book_snapshot, pi_n=30000)
    assert m.mid == 5001 and m.spread == 1
    assert m.bi == 0.0
    assert m.depth_ask == (8000, 18000, 25000, 40000)
    assert m.pi_ask == Fraction(9, 5)
    assert not m.truncated


def test_compute_static_metrics_truncation():
    s = snap([(99, 50), (98, 60)], [(100, 50), (101, 60)])
    m = compute_static_metrics(s, pi_n=500)
    assert m.truncated
    # PI evaluated at all visible depth instead
    assert m.pi_ask == execution_cost_PI(s, 110, Side.ASK)
    assert m.depth_ask == (50, 110, 110, 110)
