"""Permutation statistics: records, min-records, descents, inversions, m_rec, weights."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .perm_core import Permutation, PermutationError, check_distinct

CSV_COLUMNS = ("n", "rec", "min_rec", "desc", "inv", "first", "m_rec")


@njit(cache=True, nogil=True)
def count_records(a):
    r = 0
    best = a[0] - 1
    for x in a:
        if x > best:
            best = x
            r += 1
    return r


@njit(cache=True, nogil=True)
def count_min_records(a):
    r = 0
    best = a[0] + 1
    for x in a:
        if x < best:
            best = x
            r += 1
    return r


@njit(cache=True, nogil=True)
def count_descents(a):
    d = 0
    for i in range(1, a.size):
        if a[i - 1] > a[i]:
            d += 1
    return d


@njit(cache=True, nogil=True)
def inversion_profile_into(a, tree, out):
    """out[j] = #{i < j : a[i] > a[j]} for a permutation of [n] (0-based j).

    Fenwick tree over values; ``tree`` must have length n + 1 and is cleared.
    """
    n = a.size
    for k in range(n + 1):
        tree[k] = 0
    total = 0
    for j in range(n):
        v = a[j]
        # number of earlier values <= v
        s = 0
        k = v
        while k > 0:
            s += tree[k]
            k -= k & -k
        out[j] = j - s
        total += j - s
        k = v
        while k <= n:
            tree[k] += 1
            k += k & -k
    return total


@njit(cache=True, nogil=True)
def count_inversions(a, tree):
    n = a.size
    for k in range(n + 1):
        tree[k] = 0
    total = 0
    for j in range(n):
        v = a[j]
        s = 0
        k = v
        while k > 0:
            s += tree[k]
            k -= k & -k
        total += j - s
        k = v
        while k <= n:
            tree[k] += 1
            k += k & -k
    return total


@dataclass
class StatReport:
    n: int
    rec: int
    min_rec: int
    desc: int
    inv: int
    first: int
    m_rec: int
    record_positions: list[int] = field(repr=False)
    inv_profile: list[int] = field(repr=False)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_row(self) -> list[int]:
        return [getattr(self, c) for c in CSV_COLUMNS]


def compute_stats(p: Permutation) -> StatReport:
    a = p.word
    n = p.n
    profile = np.empty(n, dtype=np.int64)
    inv = inversion_profile_into(a, np.zeros(n + 1, dtype=np.int64), profile)
    positions = p.record_positions()
    rec = len(positions)
    return StatReport(
        n=n,
        rec=rec,
        min_rec=int(count_min_records(a)),
        desc=int(count_descents(a)),
        inv=int(inv),
        first=int(a[0]),
        m_rec=n - rec,
        record_positions=positions,
        inv_profile=profile.tolist(),
    )


def m_rec(values: Sequence[int]) -> int:
    """Number of non-records; a measure of presortedness on distinct sequences."""
    if len(values) == 0:
        return 0
    arr = check_distinct(values)
    return int(arr.size - count_records(arr))


def _check_theta(theta: float) -> None:
    if not theta > 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be a positive real, got {theta!r}")


def log_weight(p: Permutation, theta: float) -> float:
    """ln(theta ** rec(p))."""
    _check_theta(theta)
    return count_records(p.word) * math.log(theta)


def weight_prime(values: Sequence[int], n: int, theta: float) -> float:
    """Log of the suffix weight theta**m of a partial word of distinct values in [n].

    m counts the records of ``values`` exceeding the largest element of [n]
    missing from ``values`` (0 when nothing is missing).
    """
    _check_theta(theta)
    arr = np.asarray(values, dtype=np.int64)
    if arr.size:
        arr = check_distinct(arr)
        if arr.min() < 1 or arr.max() > n:
            raise PermutationError(f"values must lie in [1, {n}]")
    present = np.zeros(n + 1, dtype=bool)
    present[arr] = True
    present[0] = False
    missing = np.flatnonzero(~present[1:])
    largest_missing = int(missing[-1]) + 1 if missing.size else 0
    m = 0
    best = 0
    for x in arr.tolist():
        if x > best:
            best = x
            if x > largest_missing:
                m += 1
    return m * math.log(theta)
