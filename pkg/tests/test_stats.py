from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from drivebase.stats import (
    betainc_regularized,
    doubled_ranks,
    paired_t_test,
    qq_points,
    signed_rank_counts,
    t_cdf,
    t_two_sided_p,
    wilcoxon_signed_rank,
)
from oracles import average_ranks, t_two_sided_quadrature, wilcoxon_enumeration_p

# two-sided p for t = sqrt(6), df = 3, frozen from quadrature of the t density
T_SQRT6_DF3_P = 0.09172111331157196


def test_t_statistic_sqrt6():
    r = paired_t_test([1, 1, 2, 0], [0, 0, 0, 0])
    assert r.statistic == math.sqrt(6)
    assert r.df == 3 and r.n_effective == 4
    assert r.p_value == pytest.approx(T_SQRT6_DF3_P, rel=1e-13)
    assert r.p_value == pytest.approx(t_two_sided_quadrature(math.sqrt(6), 3), abs=1e-12)


def test_t_swap_flips_sign_only():
    x = [1.0, 2.0, 3.0, 4.0]
    y = [1.0, 2.0, 3.0, 5.5]
    a, b = paired_t_test(x, y), paired_t_test(y, x)
    assert a.statistic == -b.statistic
    assert a.p_value == b.p_value


def test_t_errors():
    with pytest.raises(ValueError, match="degenerate paired sample"):
        paired_t_test([1, 2, 3], [0, 1, 2])
    with pytest.raises(ValueError):
        paired_t_test([1], [0])
    with pytest.raises(ValueError):
        paired_t_test([1, 2], [1, 2, 3])


@pytest.mark.parametrize("df", [1, 3, 9, 15, 40])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.2, 4.5, 9.0])
def test_t_p_against_quadrature(t, df):
    assert t_two_sided_p(t, df) == pytest.approx(t_two_sided_quadrature(t, df), abs=1e-9)


def test_t_cdf_symmetry():
    assert t_cdf(0.0, 5) == pytest.approx(0.5)
    assert t_cdf(1.3, 7) + t_cdf(-1.3, 7) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(0.1, 30), st.floats(0.1, 30), st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_betainc_matches_scipy(a, b, x):
    assert betainc_regularized(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-12)


def test_wilcoxon_small_examples():
    r = wilcoxon_signed_rank([1, 2, 3], [0, 0, 0])
    assert r.statistic == 6 and r.p_value == 0.25 and r.method == "exact"
    assert wilcoxon_signed_rank([-1, -2, -3], [0, 0, 0]).p_value == 0.25


def test_wilcoxon_drops_zeros():
    r = wilcoxon_signed_rank([1, 2, 3, 5], [0, 0, 0, 5])
    assert r.n_effective == 3 and r.n == 4
    assert r.p_value == 0.25


def test_wilcoxon_all_zero():
    with pytest.raises(ValueError, match="no nonzero differences"):
        wilcoxon_signed_rank([1, 2], [1, 2])


def test_doubled_ranks_with_ties():
    d = [3.0, 1.0, 3.0, 2.0]
    assert (doubled_ranks(d) / 2).tolist() == average_ranks(d)


def test_signed_rank_counts_total():
    counts = signed_rank_counts(2 * np.arange(1, 11))
    assert counts.sum() == 2**10
    assert np.array_equal(counts, counts[::-1])


def test_wilcoxon_random_against_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = rng.normal(size=10).round(1)
        p, w = wilcoxon_enumeration_p(d.tolist())
        r = wilcoxon_signed_rank(d, np.zeros_like(d))
        assert r.p_value == pytest.approx(p, abs=1e-12)
        assert r.statistic == w


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=12))
@settings(max_examples=150, deadline=None)
def test_wilcoxon_ties_against_enumeration(d):
    if not any(d):
        return
    p, w = wilcoxon_enumeration_p(d)
    r = wilcoxon_signed_rank(d, [0] * len(d))
    assert r.p_value == pytest.approx(p, abs=1e-12)
    assert r.statistic == w


def test_wilcoxon_normal_approximation_large_n():
    rng = np.random.default_rng(2)
    d = rng.normal(0.3, 1.0, size=40)
    r = wilcoxon_signed_rank(d, np.zeros(40))
    assert r.method == "normal"
    # continuity-corrected normal p is close to the exact one at n = 40
    exact = wilcoxon_signed_rank(d, np.zeros(40), exact_max_n=40)
    assert exact.method == "exact"
    assert r.p_value == pytest.approx(exact.p_value, abs=5e-3)


def test_qq_self_match():
    from statistics import NormalDist

    n = 16
    sample = [NormalDist().inv_cdf((i - 0.5) / n) for i in range(1, n + 1)]
    assert qq_points(sample).r == pytest.approx(1.0, abs=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30), st.floats(0.01, 100), st.floats(-100, 100))
@settings(max_examples=100, deadline=None)
def test_qq_affine_invariance(x, a, b):
    x = np.array(x)
    if np.ptp(x) < 1e-6 * (1 + np.abs(x).max()):
        return
    r1 = qq_points(x).r
    r2 = qq_points(a * x + b).r
    assert r1 == pytest.approx(r2, abs=1e-9)


def test_qq_heavy_tails_lower_r():
    rng = np.random.default_rng(0)
    wins = sum(
        qq_points(rng.standard_cauchy(16)).r < qq_points(rng.normal(size=16)).r for _ in range(200)
    )
    assert wins > 100


def test_qq_errors():
    with pytest.raises(ValueError, match="zero variance"):
        qq_points([2.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        qq_points([1.0, 2.0])


def test_t_p_uniform_under_null():
    rng = np.random.default_rng(9)
    ps = [paired_t_test(rng.normal(size=16), rng.normal(size=16)).p_value for _ in range(2000)]
    rate = np.mean(np.array(ps) < 0.05)
    assert 0.035 <= rate <= 0.065


paired = st.integers(2, 14).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-100, 100), min_size=n, max_size=n),
    st.lists(st.floats(-100, 100), min_size=n, max_size=n),
))


@given(paired, st.floats(-1e3, 1e3), st.floats(0.1, 10))
@settings(max_examples=150, deadline=None)
def test_invariances(xy, shift, scale):
    x, y = np.array(xy[0]), np.array(xy[1])
    d = x - y
    if np.ptp(d) < 1e-6 or np.any(np.abs(d) < 1e-6):
        return
    t = paired_t_test(x, y)
    assert paired_t_test(x + shift, y + shift).p_value == pytest.approx(t.p_value, rel=1e-6)
    assert paired_t_test(scale * d, np.zeros_like(d)).statistic == pytest.approx(t.statistic, rel=1e-9)
    w = wilcoxon_signed_rank(d, np.zeros_like(d))
    # a strictly monotone odd transform keeps signs and the order of |d|
    odd = np.sign(d) * np.abs(d) ** 3 + d
    assert wilcoxon_signed_rank(odd, np.zeros_like(d)).p_value == w.p_value


def test_exact_null_sums_to_one():
    for n in (1, 5, 16, 20):
        counts = signed_rank_counts(doubled_ranks(np.arange(1.0, n + 1)))
        assert counts.sum() == 2**n
