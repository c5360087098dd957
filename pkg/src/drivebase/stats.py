"""Paired two-sided tests and a normal QQ diagnostic."""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

EXACT_WILCOXON_MAX_N = 20

_TINY = 1e-300
_EPS = 1e-16


@dataclass(frozen=True)
class TestResult:
    test: str  # "paired_t" or "wilcoxon_signed_rank"
    statistic: float
    p_value: float
    n_effective: int
    design: str = ""
    n: int = 0
    df: int | None = None
    method: str = ""

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)


def _betacf(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta failed to converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, betainc_regularized(df / 2.0, 0.5, x))


def t_cdf(t: float, df: float) -> float:
    half_tail = 0.5 * t_two_sided_p(t, df)
    return 1.0 - half_tail if t >= 0 else half_tail


def _differences(x, y) -> np.ndarray:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError(f"paired samples must have equal length (got {xa.size} and {ya.size})")
    return xa - ya


def _positive_p(p: float) -> float:
    return max(p, sys.float_info.min)


def paired_t_test(x, y, design: str = "") -> TestResult:
    """Two-sided paired t-test of H0: mean(x - y) == 0."""
    d = _differences(x, y)
    n = d.size
    if n < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    if np.all(d == d[0]):
        raise ValueError("degenerate paired sample: differences have zero standard deviation")
    mean = d.mean()
    sd = d.std(ddof=1)
    t = float(mean / (sd / math.sqrt(n)))
    p = _positive_p(t_two_sided_p(t, n - 1))
    return TestResult("paired_t", t, p, n, design, n=n, df=n - 1, method="student_t")


def doubled_ranks(a) -> np.ndarray:
    """Twice the average (1-based) ranks of ``a``; integers even with ties."""
    a = np.asarray(a, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    ranks2 = np.empty(a.size, dtype=np.int64)
    i = 0
    while i < a.size:
        k = i
        while k + 1 < a.size and sorted_a[k + 1] == sorted_a[i]:
            k += 1
        ranks2[order[i:k + 1]] = (i + 1) + (k + 1)
        i = k + 1
    return ranks2


def signed_rank_counts(ranks2) -> np.ndarray:
    """Number of sign assignments giving each doubled positive-rank sum.

    ``counts[s]`` is how many of the ``2**n`` assignments have the doubled
    ranks of the positive signs summing to ``s``.
    """
    ranks2 = np.asarray(ranks2, dtype=np.int64)
    counts = np.zeros(int(ranks2.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    top = 0
    for r in ranks2:
        r = int(r)
        counts[r:top + r + 1] += counts[:top + 1].copy()
        top += r
    return counts


def wilcoxon_signed_rank(x, y, design: str = "", exact_max_n: int = EXACT_WILCOXON_MAX_N) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on the paired differences ``x - y``.

    Zero differences are dropped and tied magnitudes share their average rank.
    Up to ``exact_max_n`` nonzero pairs the p-value is exact; beyond that a
    continuity-corrected normal approximation with tie-corrected variance is used.
    """
    d = _differences(x, y)
    n_input = d.size
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise ValueError("no nonzero differences")
    ranks2 = doubled_ranks(np.abs(d))
    w2 = int(ranks2[d > 0].sum())
    w_plus = w2 / 2.0
    if n <= exact_max_n:
        counts = signed_rank_counts(ranks2)
        total = float(2**n)
        upper = counts[w2:].sum() / total
        lower = counts[:w2 + 1].sum() / total
        p = min(1.0, 2.0 * min(upper, lower))
        method = "exact"
    else:
        mu = n * (n + 1) / 4.0
        _, tie_sizes = np.unique(np.abs(d), return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
        diff = w_plus - mu
        corrected = max(abs(diff) - 0.5, 0.0)
        z = corrected / math.sqrt(var)
        p = min(1.0, math.erfc(z / math.sqrt(2.0)))
        method = "normal"
    return TestResult(
        "wilcoxon_signed_rank", w_plus, _positive_p(p), n, design, n=n_input, method=method
    )


@dataclass(frozen=True, eq=False)
class QQResult:
    theoretical: np.ndarray
    empirical: np.ndarray
    r: float

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.theoretical.tolist(), self.empirical.tolist()))


def normal_plotting_positions(n: int) -> np.ndarray:
    nd = NormalDist()
    return np.array([nd.inv_cdf((i - 0.5) / n) for i in range(1, n + 1)])


def qq_points(sample) -> QQResult:
    """Order statistics against standard-normal quantiles at (i - 0.5)/n."""
    s = np.sort(np.asarray(sample, dtype=np.float64))
    if s.size < 3:
        raise ValueError("QQ diagnostic needs at least 3 values")
    if s[0] == s[-1]:
        raise ValueError("zero variance")
    theo = normal_plotting_positions(s.size)
    r = float(np.corrcoef(theo, s)[0, 1])
    return QQResult(theo, s, r)
