"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package. Weighted enumeration is exact: weights are
Fractions, so a rational theta gives exact expectations.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations

THETAS = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5))


def records(w):
    out, best = [], float("-inf")
    for i, x in enumerate(w, 1):
        if x > best:
            out.append(i)
            best = x
    return out


def min_records(w):
    out, best = [], float("inf")
    for i, x in enumerate(w, 1):
        if x < best:
            out.append(i)
            best = x
    return out


def descents(w):
    return [i for i in range(2, len(w) + 1) if w[i - 2] > w[i - 1]]


def inv_profile(w):
    return [sum(1 for i in range(j) if w[i] > w[j]) for j in range(len(w))]


def inversions(w):
    return sum(inv_profile(w))


def cycles(w):
    """Cycles as sets, found by following i -> w(i)."""
    seen, out = set(), []
    for start in range(1, len(w) + 1):
        if start in seen:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(i)
            i = w[i - 1]
        out.append(cyc)
    return out


def rising(theta, n):
    r = Fraction(1)
    for i in range(n):
        r *= theta + i
    return r


def weighted(n, theta, stat):
    """Exact E[stat] under P(s) proportional to theta**rec(s)."""
    total = Fraction(0)
    acc = Fraction(0)
    for w in permutations(range(1, n + 1)):
        wt = Fraction(theta) ** len(records(w))
        total += wt
        acc += wt * Fraction(stat(w))
    return acc / total


def law(n, theta):
    """Exact probability of every permutation of size n."""
    weights = {w: Fraction(theta) ** len(records(w)) for w in permutations(range(1, n + 1))}
    z = sum(weights.values())
    return {w: v / z for w, v in weights.items()}


def one_bit(outcomes, init):
    """Mispredictions of a 1-bit predictor; init None means a warm start."""
    state, miss = init, 0
    for o in outcomes:
        if state is not None and state != o:
            miss += 1
        state = o
    return miss


def naive_outcomes(w):
    lo = hi = w[0]
    l4, l6 = [], []
    for x in w[1:]:
        l4.append(x < lo)
        l6.append(x > hi)
        lo, hi = min(lo, x), max(hi, x)
    return l4, l6


def pair_outcomes(w):
    """L3/L7/L8 outcomes of the 3/2 scan with prefix min/max (first pair seeds them)."""
    m = len(w) - len(w) % 2
    l3 = [w[0] < w[1]]
    lo, hi = min(w[0], w[1]), max(w[0], w[1])
    l7, l8 = [], []
    for k in range(2, m, 2):
        a, b = w[k], w[k + 1]
        l3.append(a < b)
        small, big = min(a, b), max(a, b)
        l7.append(small < lo)
        l8.append(big > hi)
        lo, hi = min(lo, small), max(hi, big)
    return l3, l7, l8
