"""Closed-form probabilities, expectations and asymptotics under the record-biased law.

Everything here is exact arithmetic on floats; factorial-like products are
evaluated in log space or as products of ratios to stay finite for large n.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .sampler import ThetaSpec

EULER_GAMMA = 0.57721566490153286061
DIRECT_SUM_MAX = 1_000_000

# B_2k / 2k for k = 1..7
_DIGAMMA_SERIES = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)

STATISTICS = ("rec", "desc", "first", "inv", "mu6", "nu3", "nu8", "nu_total", "mu_total")


class UnsupportedRegime(ValueError):
    pass


class OddSizeWarning(UserWarning):
    """The paired min/max formulas were evaluated on the even prefix n - 1."""


def _positive(name: str, x: float) -> None:
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"{name} must be a positive real, got {x!r}")


def _size(n: int, low: int = 1) -> None:
    if int(n) != n or n < low:
        raise ValueError(f"n must be an integer >= {low}, got {n!r}")


def rising_factorial_log(x: float, n: int) -> float:
    """log(x (x+1) ... (x+n-1)); 0 for n = 0."""
    _positive("x", x)
    _size(n, 0)
    if n == 0:
        return 0.0
    if n <= DIRECT_SUM_MAX:
        return math.fsum(np.log(x + np.arange(n, dtype=np.float64)))
    return math.lgamma(x + n) - math.lgamma(x)


def digamma(x: float) -> float:
    """Logarithmic derivative of the Gamma function for x > 0."""
    _positive("x", x)
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_SERIES:
        series += c * power
        power *= inv2
    return shift + math.log(x) - 0.5 / x - series


def delta_sum(x: float, n: int) -> float:
    """sum_{i<n} 1/(x+i) by compensated summation."""
    if n == 0:
        return 0.0
    return math.fsum(1.0 / (x + np.arange(n, dtype=np.float64)))


def delta_digamma(x: float, n: int) -> float:
    return digamma(x + n) - digamma(x)


def delta(x: float, n: int) -> float:
    """Delta(x, n) = Psi(x + n) - Psi(x) = sum_{i=0}^{n-1} 1/(x+i)."""
    _positive("x", x)
    _size(n, 0)
    if n <= DIRECT_SUM_MAX:
        return delta_sum(x, n)
    return delta_digamma(x, n)


def half_delta_gap(theta: float, m: int) -> float:
    """Delta((theta+1)/2, m) - Delta(theta/2, m), without cancellation."""
    if m == 0:
        return 0.0
    if m > DIRECT_SUM_MAX:
        return delta_digamma((theta + 1) / 2, m) - delta_digamma(theta / 2, m)
    t = theta + 2.0 * np.arange(m, dtype=np.float64)
    return -2.0 * math.fsum(1.0 / (t * (t + 1.0)))


def _check(n: int, theta: float, low: int = 1) -> None:
    _size(n, low)
    _positive("theta", theta)


def p_record_at(n: int, theta: float, i: int) -> float:
    _check(n, theta)
    if not 1 <= i <= n:
        raise ValueError(f"position {i} outside [1, {n}]")
    return theta / (theta + i - 1)


def expected_records(n: int, theta: float) -> float:
    _check(n, theta)
    return theta * delta(theta, n)


def p_descent_at(n: int, theta: float, i: int) -> float:
    _check(n, theta)
    if not 2 <= i <= n:
        raise ValueError(f"descent position {i} outside [2, {n}]")
    return (i - 1) * (2 * theta + i - 2) / (2 * (theta + i - 1) * (theta + i - 2))


def expected_descents(n: int, theta: float) -> float:
    _check(n, theta)
    return n * (n - 1) / (2 * (theta + n - 1))


def _log_first_gt(n: int, theta: float, k: int) -> float:
    # (n-1)!/(n-k-1)! * theta^(n-k)/theta^(n) = prod_{i=n-k}^{n-1} i/(theta+i)
    if k == 0:
        return 0.0
    i = np.arange(n - k, n, dtype=np.float64)
    return -math.fsum(np.log1p(theta / i))


def p_first_gt(n: int, theta: float, k: int) -> float:
    """P(sigma(1) > k) for 0 <= k <= n - 1."""
    _check(n, theta)
    if not 0 <= k <= n - 1:
        raise ValueError(f"k = {k} outside [0, {n - 1}]")
    return math.exp(_log_first_gt(n, theta, k))


def p_first_eq(n: int, theta: float, k: int) -> float:
    """P(sigma(1) = k) for 1 <= k <= n."""
    _check(n, theta)
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} outside [1, {n}]")
    return math.exp(_log_first_gt(n, theta, k - 1)) * theta / (theta + n - k)


def expected_first(n: int, theta: float) -> float:
    _check(n, theta)
    return (theta + n) / (theta + 1)


def p_inv_at(n: int, theta: float, j: int, k: int) -> float:
    """P(inv_j = k): k inversions whose right end is position j."""
    _check(n, theta)
    if not 1 <= j <= n:
        raise ValueError(f"position {j} outside [1, {n}]")
    if not 0 <= k <= j - 1:
        raise ValueError(f"inv_{j} takes values in [0, {j - 1}], got {k}")
    return (theta if k == 0 else 1.0) / (theta + j - 1)


def expected_inversions(n: int, theta: float) -> float:
    _check(n, theta)
    return n * (n + 1 - 2 * theta) / 4 + theta * (theta - 1) / 2 * delta(theta, n)


def expected_mu6(n: int, theta: float) -> float:
    """Expected mispredictions of the max test of the naive min/max scan."""
    _check(n, theta)
    if n < 2:
        return 0.0
    return 2 * theta * delta(theta, n - 1) - (2 * theta + 1) * (n - 1) / (theta + n - 1)


def mu4_bound(n: int, theta: float) -> float:
    """Upper bound on the expected mispredictions of the min test, (2/theta) E[rec]."""
    _check(n, theta)
    return 2 * delta(theta, n)


def nu7_bound(n: int, theta: float) -> float:
    _check(n, theta)
    return 2 * delta(theta, n)


def paired_size(n: int) -> int:
    """Largest even size <= n; odd sizes are analysed on their paired prefix."""
    _size(n, 2)
    if n % 2:
        warnings.warn(
            f"n = {n} is odd: evaluating the paired prefix of size {n - 1}",
            OddSizeWarning,
            stacklevel=3,
        )
        return n - 1
    return n


def expected_nu3(n: int, theta: float) -> float:
    """Expected mispredictions of the pair comparison of the 3/2 min/max scan."""
    _check(n, theta, 2)
    n = paired_size(n)
    t = theta
    c = t * t * (t - 1) ** 2
    return (
        (n - 2) / 4
        + t * (t - 1) ** 2 / 4
        + c / 12 * (1 / (t + n - 1) - 3 / (t + n - 2) - 1 / (t + 1))
        + c / 6 * half_delta_gap(t, (n - 2) // 2)
    )


def expected_nu8(n: int, theta: float) -> float:
    """Expected mispredictions of the max update test of the 3/2 min/max scan."""
    _check(n, theta, 2)
    n = paired_size(n)
    t = theta
    m = (n - 2) // 2
    head = (n - 2) * ((2 * t**3 + t**2 - 9 * t - 3) * n + 2 * t**4 - 5 * t**2 + 9 * t + 3) / (
        3 * (t + n - 1) * (t + n - 2)
    )
    # theta(2t^3+t+3)/3 * A - theta(2t^3+t-3)/3 * B, regrouped over A - B and A + B
    a = delta((t + 1) / 2, m) if m else 0.0
    b = delta(t / 2, m) if m else 0.0
    return head + t * t * (2 * t * t + 1) / 3 * half_delta_gap(t, m) + t * (a + b)


# Per-element leading coefficients when theta = lam * n.


def f_inv(lam: float) -> float:
    return 1 - 2 * lam + 2 * lam**2 * math.log1p(1 / lam)


def mu_per_element(lam: float) -> float:
    return 2 * lam * (math.log1p(1 / lam) - 1 / (lam + 1))


def nu3_per_element(lam: float) -> float:
    return (6 * lam**2 + 8 * lam + 3) / (12 * (lam + 1) ** 3)


def nu8_per_element(lam: float) -> float:
    return 2 * lam * math.log1p(1 / lam) - lam * (6 * lam**2 + 15 * lam + 10) / (3 * (lam + 1) ** 3)


def nu_per_element(lam: float) -> float:
    return 2 * lam * math.log1p(1 / lam) - (24 * lam**3 + 54 * lam**2 + 32 * lam - 3) / (
        12 * (lam + 1) ** 3
    )


@dataclass(frozen=True)
class AsymptoticRegime:
    statistic: str
    spec: ThetaSpec

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise UnsupportedRegime(f"unknown statistic {self.statistic!r}")

    @property
    def column(self) -> str:
        mode, v = self.spec.mode, self.spec.value
        if mode == "fixed":
            return "fixed"
        if mode == "linear":
            return "linear"
        if v < 1:
            return "power_sub"
        if v > 1:
            return "power_super"
        raise UnsupportedRegime("theta = n^1 is the linear regime with lambda = 1")


def asymptotic_eval(regime: AsymptoticRegime, n: int) -> float:
    """Leading-order equivalent of the expectation at size n."""
    _size(n, 2)
    stat, col, v = regime.statistic, regime.column, regime.spec.value
    log_n = math.log(n)
    table = {
        ("rec", "fixed"): lambda: v * log_n,
        ("rec", "power_sub"): lambda: (1 - v) * n**v * log_n,
        ("rec", "linear"): lambda: v * math.log1p(1 / v) * n,
        ("rec", "power_super"): lambda: float(n),
        ("desc", "fixed"): lambda: n / 2,
        ("desc", "power_sub"): lambda: n / 2,
        ("desc", "linear"): lambda: n / (2 * (v + 1)),
        ("desc", "power_super"): lambda: n ** (2 - v) / 2,
        ("first", "fixed"): lambda: n / (v + 1),
        ("first", "power_sub"): lambda: n ** (1 - v),
        ("first", "linear"): lambda: (v + 1) / v,
        ("first", "power_super"): lambda: 1.0,
        ("inv", "fixed"): lambda: n * n / 4,
        ("inv", "power_sub"): lambda: n * n / 4,
        ("inv", "linear"): lambda: n * n / 4 * f_inv(v),
        ("inv", "power_super"): lambda: n ** (3 - v) / 6,
        ("mu6", "fixed"): lambda: 2 * v * log_n,
        ("mu6", "power_sub"): lambda: 2 * (1 - v) * n**v * log_n,
        ("mu6", "linear"): lambda: mu_per_element(v) * n,
        ("mu_total", "power_sub"): lambda: 2 * (1 - v) * n**v * log_n,
        ("mu_total", "linear"): lambda: mu_per_element(v) * n,
        ("nu3", "linear"): lambda: nu3_per_element(v) * n,
        ("nu8", "linear"): lambda: nu8_per_element(v) * n,
        ("nu_total", "linear"): lambda: nu_per_element(v) * n,
    }
    try:
        return table[stat, col]()
    except KeyError:
        raise UnsupportedRegime(f"no asymptotic for {stat!r} when theta = {regime.spec}") from None


EXACT = {
    "rec": expected_records,
    "desc": expected_descents,
    "first": expected_first,
    "inv": expected_inversions,
    "swaps": expected_inversions,
    "mu6": expected_mu6,
    "nu3": expected_nu3,
    "nu8": expected_nu8,
}

BOUNDS = {
    "mu4": mu4_bound,
    "nu7": nu7_bound,
}


def exact_value(statistic: str, n: int, theta: float) -> float | None:
    f = EXACT.get(statistic)
    return None if f is None else f(n, theta)


def _crossover_gap(lam: float, cost: float) -> float:
    # extra cost of 3/2 min/max over the naive scan, per element
    diff = nu_per_element(lam) - mu_per_element(lam)
    if cost == 0:
        return diff
    return (1.5 + cost * nu_per_element(lam)) - (2.0 + cost * mu_per_element(lam))


def crossover_lambda(cost_per_misprediction: float, lo: float = 1e-6, hi: float = 10.0) -> float | None:
    """lambda at which both min/max scans cost the same per element, theta = lambda n.

    A cost of 0 compares mispredictions alone. Otherwise each comparison costs
    1 and each misprediction ``cost_per_misprediction``. Returns None when the
    two costs do not cross on [lo, hi].
    """
    c = float(cost_per_misprediction)
    if c < 0 or not math.isfinite(c):
        raise ValueError(f"cost must be a nonnegative real, got {cost_per_misprediction!r}")
    g_lo, g_hi = _crossover_gap(lo, c), _crossover_gap(hi, c)
    if g_lo == 0:
        return lo
    if (g_lo > 0) == (g_hi > 0):
        return None
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        g_mid = _crossover_gap(mid, c)
        if g_mid == 0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossover_table(points: int = 200, lam_min: float = 0.01, lam_max: float = 2.0):
    """(lambda, mu per element, nu per element) on a log-spaced grid."""
    return [
        (float(lam), mu_per_element(lam), nu_per_element(lam))
        for lam in np.geomspace(lam_min, lam_max, points)
    ]
