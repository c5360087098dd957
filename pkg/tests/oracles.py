"""Slow, independent reference computations used to check the fast paths."""

from __future__ import annotations

import itertools
import math

from scipy import integrate


def dtw_brute_force(q, r, diag_weight=1):
    """Minimum cost over every monotone path, walked one path at a time.

    Depth-first over the step tree.  A prefix is abandoned once its cost
    reaches the best complete path found so far, which is exact because
    every step cost is non-negative.  No table of sub-results is kept.
    Integer inputs give exact integer arithmetic.
    """
    n, m = len(q), len(r)
    best = None
    stack = [(0, 0, abs(q[0] - r[0]))]
    while stack:
        i, j, cost = stack.pop()
        if best is not None and cost >= best:
            continue
        if (i, j) == (n - 1, m - 1):
            best = cost
            continue
        for di, dj, w in ((1, 1, diag_weight), (1, 0, 1), (0, 1, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                stack.append((a, b, cost + w * abs(q[a] - r[b])))
    return best


def dtw_enumerate_paths(n, m):
    """Every monotone path from (1, 1) to (n, m), as lists of 1-based pairs."""

    def rec(i, j):
        if (i, j) == (n, m):
            yield [(i, j)]
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if i + di <= n and j + dj <= m:
                for rest in rec(i + di, j + dj):
                    yield [(i, j)] + rest

    yield from rec(1, 1)


def path_cost(q, r, path, diag_weight=1):
    cost = abs(q[0] - r[0])
    for (a, b), (c, d) in zip(path, path[1:]):
        w = diag_weight if (c - a, d - b) == (1, 1) else 1
        cost += w * abs(q[c - 1] - r[d - 1])
    return cost


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        k = i
        while k + 1 < len(order) and values[order[k + 1]] == values[order[i]]:
            k += 1
        for idx in order[i:k + 1]:
            ranks[idx] = (i + k + 2) / 2.0
        i = k + 1
    return ranks


def wilcoxon_enumeration_p(differences):
    """Two-sided exact p from all 2**n sign flips of the nonzero differences."""
    d = [x for x in differences if x != 0]
    ranks = average_ranks([abs(x) for x in d])
    observed = sum(rk for rk, x in zip(ranks, d) if x > 0)
    ge = le = 0
    total = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        w = sum(rk for rk, s in zip(ranks, signs) if s)
        total += 1
        ge += w >= observed
        le += w <= observed
    return min(1.0, 2.0 * min(ge, le) / total), observed


def t_density(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def t_two_sided_quadrature(t, df):
    tail, _ = integrate.quad(t_density, abs(t), math.inf, args=(df,), epsabs=1e-15, epsrel=1e-13)
    return 2.0 * tail


def mean_var_two_pass(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var


def coarse_loop(q, r):
    total = 0.0
    for a, b in zip(q, r):
        total += abs(b - a)
    return total


def fine_naive(q, r, w):
    out = []
    for i in range(len(q) - w + 1):
        s = 0.0
        for j in range(i, i + w):
            s += abs(r[j] - q[j])
        out.append(1.0 - s)
    return out
