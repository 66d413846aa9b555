"""Instrumented sorting and min/max algorithms under a local 1-bit branch predictor.

Branch sites are labelled by the line of the test in the original
pseudocode: L4/L6 for the min and max tests of the naive scan, L3/L7/L8 for
the pair comparison and the min and max updates of the 3/2 scan.

Predictors on max tests start at True and predictors on min tests start at
False; the pair comparison starts warm. Under these initial states the
simulated means reproduce the exact misprediction formulas for the max tests
and respect the (2/theta) E[rec] bounds for the min tests.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field
from functools import cmp_to_key
from typing import Sequence

import numpy as np
from numba import njit

from .perm_core import check_distinct

SITES = ("L4_min", "L6_max", "L3_pair", "L7_min", "L8_max")
MODES = ("analysis_model", "as_written")
CSV_COLUMNS = ("n", "theta", "algorithm", "mode", "comparisons", "swaps", "mu4", "mu6", "nu3", "nu7", "nu8")
_CSV_SITES = {"mu4": "L4_min", "mu6": "L6_max", "nu3": "L3_pair", "nu7": "L7_min", "nu8": "L8_max"}


class OneBitPredictor:
    """Predicts that a branch goes the way it went last time.

    ``state=None`` gives a warm start: the first outcome is recorded but not
    judged.
    """

    __slots__ = ("state", "misses")

    def __init__(self, state: bool | None = True):
        self.state = state
        self.misses = 0

    def mispredicted(self, outcome: bool) -> bool:
        return self.state is not None and self.state != outcome

    def observe(self, outcome: bool) -> bool:
        miss = self.mispredicted(outcome)
        if miss:
            self.misses += 1
        self.state = outcome
        return outcome


@dataclass
class InstrumentationReport:
    algorithm: str
    n: int
    comparisons: int = 0
    swaps: int = 0
    mispredictions: dict[str, int] = field(default_factory=dict)
    result_min: int | None = None
    result_max: int | None = None
    checksum: int | None = None
    mode: str = ""
    odd_tail: bool = False
    output: list[int] | None = field(default=None, repr=False)

    def to_dict(self, include_output: bool = False) -> dict:
        d = asdict(self)
        if not include_output:
            d.pop("output")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_row(self, theta: float | str = "") -> list:
        row = [self.n, theta, self.algorithm, self.mode, self.comparisons, self.swaps]
        row += [self.mispredictions.get(_CSV_SITES[k], 0) for k in CSV_COLUMNS[6:]]
        return row


def _checksum(values: Sequence[int]) -> int:
    return zlib.crc32(np.asarray(values, dtype=np.int64).tobytes())


def insertion_sort_instrumented(values: Sequence[int]) -> InstrumentationReport:
    """Insertion sort by adjacent swaps; swaps equal the inversions of the input."""
    a = check_distinct(values)
    out = np.empty_like(a)
    swaps, comparisons = insertion_counts(a, out)
    return InstrumentationReport(
        "insertion_sort",
        int(a.size),
        int(comparisons),
        int(swaps),
        checksum=_checksum(out),
        output=out.tolist(),
    )


def naive_minmax_instrumented(
    values: Sequence[int], init_min: bool | None = False, init_max: bool | None = True
) -> InstrumentationReport:
    t = check_distinct(values).tolist()
    p4, p6 = OneBitPredictor(init_min), OneBitPredictor(init_max)
    lo = hi = t[0]
    comparisons = 0
    for x in t[1:]:
        comparisons += 2
        if p4.observe(x < lo):
            lo = x
        if p6.observe(x > hi):
            hi = x
    return InstrumentationReport(
        "naive_minmax",
        len(t),
        comparisons,
        mispredictions={"L4_min": p4.misses, "L6_max": p6.misses},
        result_min=lo,
        result_max=hi,
    )


def minmax32_instrumented(
    values: Sequence[int],
    mode: str = "analysis_model",
    init_min: bool | None = False,
    init_max: bool | None = True,
) -> InstrumentationReport:
    """3/2 min/max: compare each pair, then its smaller to min and larger to max.

    ``as_written`` starts from min = max = T[n] and runs the full loop body on
    every pair. ``analysis_model`` lets the first pair set min and max directly
    and folds an odd trailing element in with two unmonitored comparisons.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    t = check_distinct(values).tolist()
    n = len(t)
    if n < 2:
        raise ValueError("3/2 min/max needs n >= 2")
    p3, p7, p8 = OneBitPredictor(None), OneBitPredictor(init_min), OneBitPredictor(init_max)
    comparisons = 0
    odd_tail = False
    if mode == "as_written":
        lo = hi = t[-1]
        start = 0
    else:
        comparisons += 1
        if p3.observe(t[0] < t[1]):
            lo, hi = t[0], t[1]
        else:
            lo, hi = t[1], t[0]
        start = 2
    for k in range(start, n - 1, 2):
        comparisons += 3
        if p3.observe(t[k] < t[k + 1]):
            pmin, pmax = t[k], t[k + 1]
        else:
            pmin, pmax = t[k + 1], t[k]
        if p7.observe(pmin < lo):
            lo = pmin
        if p8.observe(pmax > hi):
            hi = pmax
    if n % 2 and mode == "analysis_model":
        odd_tail = True
        comparisons += 2
        lo, hi = min(lo, t[-1]), max(hi, t[-1])
    return InstrumentationReport(
        "minmax32",
        n,
        comparisons,
        mispredictions={"L3_pair": p3.misses, "L7_min": p7.misses, "L8_max": p8.misses},
        result_min=lo,
        result_max=hi,
        mode=mode,
        odd_tail=odd_tail,
    )


def mrec_optimal_sort(values: Sequence[int]) -> InstrumentationReport:
    """Sort in O(n + k log k) comparisons, k = number of non-records.

    Records come out of one left-to-right scan already sorted; the others are
    sorted separately and merged in.
    """
    a = check_distinct(values).tolist()
    comparisons = 0
    records, rest = [a[0]], []
    for x in a[1:]:
        comparisons += 1
        if x > records[-1]:
            records.append(x)
        else:
            rest.append(x)

    def cmp(x, y):
        nonlocal comparisons
        comparisons += 1
        return -1 if x < y else 1

    rest.sort(key=cmp_to_key(cmp))
    out = []
    i = j = 0
    while i < len(records) and j < len(rest):
        comparisons += 1
        if records[i] < rest[j]:
            out.append(records[i])
            i += 1
        else:
            out.append(rest[j])
            j += 1
    out += records[i:]
    out += rest[j:]
    return InstrumentationReport(
        "mrec_optimal_sort", len(a), comparisons, checksum=_checksum(out), output=out
    )


# Batch kernels: the same counters on int64 arrays, for Monte Carlo runs.


@njit(cache=True, nogil=True)
def insertion_counts(a, buf):
    """(swaps, comparisons) of insertion sort on ``a``; ``buf`` is scratch."""
    n = a.size
    for k in range(n):
        buf[k] = a[k]
    swaps = 0
    comparisons = 0
    for i in range(1, n):
        x = buf[i]
        j = i
        while j > 0:
            comparisons += 1
            if buf[j - 1] <= x:
                break
            buf[j] = buf[j - 1]
            j -= 1
        swaps += i - j
        buf[j] = x
    return swaps, comparisons


@njit(cache=True, nogil=True)
def naive_counts(t):
    """(mu4, mu6) with the default predictor states."""
    lo = t[0]
    hi = t[0]
    s4 = False
    s6 = True
    m4 = 0
    m6 = 0
    for k in range(1, t.size):
        x = t[k]
        o = x < lo
        if o != s4:
            m4 += 1
        s4 = o
        if o:
            lo = x
        o = x > hi
        if o != s6:
            m6 += 1
        s6 = o
        if o:
            hi = x
    return m4, m6


@njit(cache=True, nogil=True)
def minmax32_counts(t):
    """(nu3, nu7, nu8) of the analysis model on the paired prefix of ``t``."""
    n = t.size - (t.size % 2)
    s3 = t[0] < t[1]
    if s3:
        lo = t[0]
        hi = t[1]
    else:
        lo = t[1]
        hi = t[0]
    s7 = False
    s8 = True
    m3 = 0
    m7 = 0
    m8 = 0
    for k in range(2, n, 2):
        a = t[k]
        b = t[k + 1]
        o = a < b
        if o != s3:
            m3 += 1
        s3 = o
        if o:
            pmin = a
            pmax = b
        else:
            pmin = b
            pmax = a
        o = pmin < lo
        if o != s7:
            m7 += 1
        s7 = o
        if o:
            lo = pmin
        o = pmax > hi
        if o != s8:
            m8 += 1
        s8 = o
        if o:
            hi = pmax
    return m3, m7, m8
