"""Monte Carlo estimation against the closed forms, exhaustive oracles, heatmaps.

Trials are split into blocks of ``BLOCK`` consecutive trials; block ``b``
draws from ``RngStream(seed, b)``. Results depend only on the seed and the
parameters, never on how blocks are scheduled across workers.
"""
from __future__ import annotations

import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

import numpy as np
from numba import njit

from . import algorithms, analytics
from .algorithms import insertion_counts, minmax32_counts, naive_counts
from .analytics import OddSizeWarning, rising_factorial_log
from .sampler import RngStream, sample_records_batch
from .statistics import (
    compute_stats,
    count_descents,
    count_inversions,
    count_min_records,
    count_records,
)
from .perm_core import Permutation

BLOCK = 1024
DEFAULT_SEED = 20160427

STAT_NAMES = (
    "rec", "min_rec", "desc", "inv", "first",
    "swaps", "comparisons", "mu4", "mu6", "nu3", "nu7", "nu8",
)
_INDEX = {s: k for k, s in enumerate(STAT_NAMES)}
_PAIRED = {"nu3", "nu7", "nu8"}
EXHAUSTIVE_MAX_N = 7
EXHAUSTIVE_MAX_N_PAIRED = 6


@njit(cache=True, nogil=True)
def _block_stats(perms, want, out):
    count, n = perms.shape
    tree = np.empty(n + 1, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    for r in range(count):
        a = perms[r]
        out[r, 0] = count_records(a)
        out[r, 1] = count_min_records(a)
        out[r, 2] = count_descents(a)
        if want[3]:
            out[r, 3] = count_inversions(a, tree)
        out[r, 4] = a[0]
        if want[5] or want[6]:
            s, c = insertion_counts(a, buf)
            out[r, 5] = s
            out[r, 6] = c
        if want[7] or want[8]:
            m4, m6 = naive_counts(a)
            out[r, 7] = m4
            out[r, 8] = m6
        if (want[9] or want[10] or want[11]) and n >= 2:
            m3, m7, m8 = minmax32_counts(a)
            out[r, 9] = m3
            out[r, 10] = m7
            out[r, 11] = m8


def _want_mask(stats: Sequence[str]) -> np.ndarray:
    want = np.zeros(len(STAT_NAMES), dtype=np.bool_)
    for s in stats:
        if s not in _INDEX:
            raise ValueError(f"unknown statistic {s!r}; expected one of {STAT_NAMES}")
        want[_INDEX[s]] = True
    return want


def _run_block(n, theta, seed, block, count, want):
    perms = sample_records_batch(n, theta, count, RngStream(seed, block))
    out = np.zeros((count, len(STAT_NAMES)), dtype=np.int64)
    _block_stats(perms, want, out)
    return out


def simulate_trials(
    n: int,
    theta: float,
    trials: int,
    seed: int = DEFAULT_SEED,
    stats: Sequence[str] = STAT_NAMES,
    threads: int | None = None,
) -> np.ndarray:
    """Per-trial values, shape (trials, len(STAT_NAMES)); unrequested columns may be 0."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    want = _want_mask(stats)
    if n < 2 and any(s in _PAIRED for s in stats):
        raise ValueError("3/2 min/max statistics need n >= 2")
    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bc: _run_block(n, theta, seed, bc[0], bc[1], want), blocks))
    else:
        parts = [_run_block(n, theta, seed, b, c, want) for b, c in blocks]
    return np.concatenate(parts)


@dataclass
class EstimateReport:
    statistic: str
    n: int
    theta: float
    trials: int
    mean: float
    stderr: float
    ci95_low: float
    ci95_high: float
    analytic: float | None = None
    z_score: float | None = None
    bound: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _analytic(statistic: str, n: int, theta: float) -> tuple[float | None, float | None, str]:
    note = ""
    if statistic in _PAIRED and n % 2:
        note = f"paired prefix of size {n - 1}; trailing element not monitored"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OddSizeWarning)
        exact = analytics.exact_value(statistic, n, theta)
        bound_f = analytics.BOUNDS.get(statistic)
        bound = bound_f(n, theta) if bound_f else None
    return exact, bound, note


def summarize(
    statistic: str, n: int, theta: float, values: np.ndarray, with_analytic: bool = True
) -> EstimateReport:
    trials = int(values.size)
    x = values.astype(np.float64)
    mean = math.fsum(x) / trials
    if trials > 1:
        var = math.fsum((x - mean) ** 2) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    exact, bound, note = _analytic(statistic, n, theta) if with_analytic else (None, None, "")
    z = None
    if exact is not None:
        diff = mean - exact
        if stderr > 0:
            z = diff / stderr
        else:
            z = 0.0 if abs(diff) <= 1e-9 * max(1.0, abs(exact)) else math.copysign(math.inf, diff)
    return EstimateReport(
        statistic, n, float(theta), trials, mean, stderr,
        mean - 1.96 * stderr, mean + 1.96 * stderr,
        analytic=exact, z_score=z, bound=bound, note=note,
    )


def estimate_many(
    stats: Sequence[str],
    n: int,
    theta: float,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: int | None = None,
) -> dict[str, EstimateReport]:
    """Estimate several statistics from one shared sample of permutations."""
    table = simulate_trials(n, theta, trials, seed, stats, threads)
    return {s: summarize(s, n, theta, table[:, _INDEX[s]]) for s in stats}


def estimate(
    statistic: str,
    n: int,
    theta: float,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: int | None = None,
) -> EstimateReport:
    return estimate_many([statistic], n, theta, trials, seed, threads)[statistic]


# Exhaustive oracles over S_n.

def _reference_value(statistic: str, word: tuple[int, ...]) -> float:
    if statistic in ("rec", "min_rec", "desc", "inv", "first"):
        return getattr(compute_stats(Permutation(word, check=False)), statistic)
    if statistic in ("swaps", "comparisons"):
        return getattr(algorithms.insertion_sort_instrumented(word), statistic)
    if statistic in ("mu4", "mu6"):
        site = {"mu4": "L4_min", "mu6": "L6_max"}[statistic]
        return algorithms.naive_minmax_instrumented(word).mispredictions[site]
    site = {"nu3": "L3_pair", "nu7": "L7_min", "nu8": "L8_max"}[statistic]
    return algorithms.minmax32_instrumented(word, "analysis_model").mispredictions[site]


def exhaustive_mean(func: Callable[[tuple[int, ...]], float], n: int, theta: float) -> float:
    """sum over S_n of theta**rec(s) * func(s), divided by theta^(n).

    Permutations are visited in lexicographic order.
    """
    if not 1 <= n <= EXHAUSTIVE_MAX_N + 1:
        raise ValueError(f"exhaustive enumeration limited to n <= {EXHAUSTIVE_MAX_N + 1}")
    log_theta = math.log(theta)
    log_total = rising_factorial_log(theta, n)
    terms = []
    for word in permutations(range(1, n + 1)):
        r = count_records(np.array(word, dtype=np.int64))
        terms.append(math.exp(r * log_theta - log_total) * func(word))
    return math.fsum(terms)


def exhaustive_expectation(statistic: str, n: int, theta: float) -> float:
    if statistic not in _INDEX:
        raise ValueError(f"unknown statistic {statistic!r}")
    limit = EXHAUSTIVE_MAX_N_PAIRED if statistic in _PAIRED else EXHAUSTIVE_MAX_N
    if n > limit:
        raise ValueError(f"exhaustive {statistic} limited to n <= {limit}")
    if statistic in _PAIRED and n < 2:
        raise ValueError("3/2 min/max statistics need n >= 2")
    return exhaustive_mean(lambda w: _reference_value(statistic, w), n, theta)


# Heatmaps.

@dataclass
class HeatmapMatrix:
    """counts[i - 1][j - 1] = number of samples with sigma(i) = j."""

    n: int
    theta: float
    samples: int
    counts: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.counts, fmt="%d", delimiter=",")
        return buf.getvalue()

    def to_pgm(self) -> bytes:
        """Binary P5 greymap, counts scaled linearly so the largest count is 255."""
        top = int(self.counts.max())
        scaled = np.rint(self.counts * (255.0 / top)) if top else self.counts
        header = f"P5\n{self.n} {self.n}\n255\n".encode("ascii")
        return header + scaled.astype(np.uint8).tobytes()


def heatmap(n: int, theta: float, samples: int, seed: int = DEFAULT_SEED) -> HeatmapMatrix:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    counts = np.zeros(n * n, dtype=np.int64)
    offsets = np.arange(n, dtype=np.int64) * n - 1
    for b in range(math.ceil(samples / BLOCK)):
        count = min(BLOCK, samples - b * BLOCK)
        perms = sample_records_batch(n, theta, count, RngStream(seed, b))
        counts += np.bincount((perms + offsets).ravel(), minlength=n * n)
    return HeatmapMatrix(n, float(theta), samples, counts.reshape(n, n))


# Algorithm runs over sampled inputs.

ALGORITHMS = {
    "insertion_sort": algorithms.insertion_sort_instrumented,
    "naive_minmax": algorithms.naive_minmax_instrumented,
    "minmax32": algorithms.minmax32_instrumented,
    "mrec_optimal_sort": algorithms.mrec_optimal_sort,
}
COUNTERS = ("comparisons", "swaps", "mu4", "mu6", "nu3", "nu7", "nu8")
_SITE_OF = {"mu4": "L4_min", "mu6": "L6_max", "nu3": "L3_pair", "nu7": "L7_min", "nu8": "L8_max"}


def _counter_row(report: algorithms.InstrumentationReport) -> list[int]:
    row = [report.comparisons, report.swaps]
    row += [report.mispredictions.get(_SITE_OF[c], 0) for c in COUNTERS[2:]]
    return row


def _algorithm_block(algorithm, mode, n, theta, seed, block, count):
    run = ALGORITHMS[algorithm]
    perms = sample_records_batch(n, theta, count, RngStream(seed, block))
    rows = []
    for word in perms:
        report = run(word, mode) if algorithm == "minmax32" else run(word)
        rows.append(_counter_row(report))
    return np.array(rows, dtype=np.int64).reshape(count, len(COUNTERS))


def simulate_algorithm(
    algorithm: str,
    n: int,
    theta: float,
    trials: int,
    seed: int = DEFAULT_SEED,
    mode: str = "analysis_model",
    threads: int | None = None,
) -> dict[str, EstimateReport]:
    """Run an instrumented algorithm on sampled inputs; one report per counter.

    Uses the same block streams as ``simulate_trials``, so trial t sees the
    same input permutation in both.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {tuple(ALGORITHMS)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]
    job = lambda bc: _algorithm_block(algorithm, mode, n, theta, seed, bc[0], bc[1])
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(bc) for bc in blocks]
    table = np.concatenate(parts)
    out = {}
    for k, c in enumerate(COUNTERS):
        # analytic values only apply where the counter measures the modelled quantity
        modelled = (
            (algorithm == "insertion_sort" and c == "swaps")
            or (algorithm == "naive_minmax" and c in ("mu4", "mu6"))
            or (algorithm == "minmax32" and mode == "analysis_model" and c in ("nu3", "nu7", "nu8"))
        )
        out[c] = summarize(c, n, theta, table[:, k], with_analytic=modelled)
    return out


@dataclass
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    kind: str = "abs"  # "abs": |value - reference| < tol; "le": value <= reference + tol; "z": |value| < tol
    passed: bool = False

    def __post_init__(self):
        if self.kind == "abs":
            self.passed = abs(self.value - self.reference) < self.tolerance
        elif self.kind == "le":
            self.passed = self.value <= self.reference + self.tolerance
        else:
            self.passed = abs(self.value) < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.kind == "z":
            return f"{status} {self.name}: z = {self.value:+.3f} (|z| < {self.tolerance})"
        op = "<=" if self.kind == "le" else "=="
        return (
            f"{status} {self.name}: {self.value:.15g} {op} {self.reference:.15g} "
            f"(tol {self.tolerance:g})"
        )


@lru_cache(maxsize=1 << 16)
def _profile(word):
    return compute_stats(Permutation(word, check=False))


def exhaustive_checks(n: int, theta: float, tol: float = 1e-10) -> list[Check]:
    """Every closed form at size n against weighted enumeration of S_n."""
    checks = [
        Check(
            "normalization",
            math.fsum(math.exp(count_records(np.array(w, dtype=np.int64)) * math.log(theta))
                      for w in permutations(range(1, n + 1))),
            math.exp(rising_factorial_log(theta, n)),
            tol * math.exp(rising_factorial_log(theta, n)),
        )
    ]
    for i in range(1, n + 1):
        checks.append(Check(
            f"P(record at {i})",
            exhaustive_mean(lambda w, i=i: float(i in _profile(w).record_positions), n, theta),
            analytics.p_record_at(n, theta, i), tol,
        ))
    for i in range(2, n + 1):
        checks.append(Check(
            f"P(descent at {i})",
            exhaustive_mean(lambda w, i=i: float(w[i - 2] > w[i - 1]), n, theta),
            analytics.p_descent_at(n, theta, i), tol,
        ))
    for k in range(1, n + 1):
        checks.append(Check(
            f"P(first = {k})",
            exhaustive_mean(lambda w, k=k: float(w[0] == k), n, theta),
            analytics.p_first_eq(n, theta, k), tol,
        ))
    for j in range(1, n + 1):
        for k in range(j):
            checks.append(Check(
                f"P(inv_{j} = {k})",
                exhaustive_mean(lambda w, j=j, k=k: float(_profile(w).inv_profile[j - 1] == k), n, theta),
                analytics.p_inv_at(n, theta, j, k), tol,
            ))
    for stat in ("rec", "desc", "first", "inv", "swaps", "mu6"):
        checks.append(Check(
            f"E[{stat}]", exhaustive_expectation(stat, n, theta),
            analytics.exact_value(stat, n, theta), tol,
        ))
    checks.append(Check("E[mu4] bound", exhaustive_expectation("mu4", n, theta),
                        analytics.mu4_bound(n, theta), tol, kind="le"))
    if 2 <= n <= EXHAUSTIVE_MAX_N_PAIRED and n % 2 == 0:
        for stat in ("nu3", "nu8"):
            checks.append(Check(
                f"E[{stat}]", exhaustive_expectation(stat, n, theta),
                analytics.exact_value(stat, n, theta), max(tol, 1e-9),
            ))
        checks.append(Check("E[nu7] bound", exhaustive_expectation("nu7", n, theta),
                            analytics.nu7_bound(n, theta), tol, kind="le"))
    return checks


def monte_carlo_checks(
    n: int, theta: float, trials: int, seed: int = DEFAULT_SEED,
    z_max: float = 4.0, threads: int | None = None,
) -> list[Check]:
    """|z| of every estimable statistic against its closed form.

    A cell that fails is rerun once with an independent seed, and only fails
    if the rerun fails too.
    """
    stats = ["rec", "desc", "first", "inv", "swaps", "mu6"]
    if n >= 2:
        stats += ["nu3", "nu8"]
    reports = estimate_many(stats, n, theta, trials, seed, threads)
    retry = [s for s, r in reports.items() if not abs(r.z_score) < z_max]
    if retry:
        reports.update(estimate_many(retry, n, theta, trials, seed + 1, threads))
    return [
        Check(f"MC E[{s}] n={n} theta={theta:g}", r.z_score, 0.0, z_max, kind="z")
        for s, r in reports.items()
    ]
