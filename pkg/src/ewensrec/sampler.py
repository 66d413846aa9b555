"""Linear-time samplers for the Ewens distribution (cycles) and its record analogue.

Randomness comes from numpy's counter-based Philox generator keyed by the pair
``(seed, stream_id)``. Samplers draw one uniform per position: with
``x = u * (theta + i - 1)``, position ``i`` opens a new cycle when
``x < theta`` and otherwise follows element ``1 + floor(x - theta)``, which is
uniform on ``[1, i - 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from numba import njit

from .perm_core import Permutation
from .statistics import count_records

EXACT_MAX_N = 8
_CHUNK = 1 << 20
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ThetaSpec:
    """theta fixed, theta = n**value ("power") or theta = value * n ("linear")."""

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("fixed", "power", "linear"):
            raise ValueError(f"unknown theta mode {self.mode!r}")
        if not self.value > 0 or not math.isfinite(self.value):
            raise ValueError(f"theta parameter must be a positive real, got {self.value!r}")

    @classmethod
    def fixed(cls, theta: float) -> ThetaSpec:
        return cls("fixed", float(theta))

    @classmethod
    def power(cls, eps: float) -> ThetaSpec:
        return cls("power", float(eps))

    @classmethod
    def linear(cls, lam: float) -> ThetaSpec:
        return cls("linear", float(lam))

    def resolve(self, n: int) -> float:
        if self.mode == "fixed":
            return self.value
        if self.mode == "power":
            return float(n) ** self.value
        return self.value * n

    def __str__(self) -> str:
        return {"fixed": "{}", "power": "n^{}", "linear": "{}n"}[self.mode].format(self.value)


def _check_args(n: int, theta: float) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not theta > 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be a positive real, got {theta!r}")


@njit(cache=True, nogil=True)
def _restaurant(sigma, inv, start, u, theta):
    """Seat customers start .. start + len(u) - 1 (1-based) of the cycle process.

    sigma[i] is the successor of i in its cycle; inv is kept in step so that
    inserting i before j needs no search.
    """
    for t in range(u.size):
        i = start + t
        x = u[t] * (theta + i - 1)
        if x < theta:
            sigma[i] = i
            inv[i] = i
        else:
            j = 1 + np.int64(x - theta)
            if j > i - 1:
                j = i - 1
            p = inv[j]
            sigma[p] = i
            inv[i] = p
            sigma[i] = j
            inv[j] = i


@njit(cache=True, nogil=True)
def _cycles_to_word(sigma, nxt, out):
    """Apply the fundamental bijection to the cycle array ``sigma`` (destroyed).

    Cycles are visited by decreasing maximum; each one is written from its
    maximum along successors and spliced in front of the cycles already
    written, through the ``nxt`` link array.
    """
    n = sigma.size - 1
    head = 0
    top = n
    while top > 0:
        if sigma[top] == 0:
            top -= 1
            continue
        first = top
        x = top
        while True:
            y = sigma[x]
            sigma[x] = 0
            if sigma[y] == 0:
                nxt[x] = head
                break
            nxt[x] = y
            x = y
        head = first
        top -= 1
    x = head
    for k in range(n):
        out[k] = x
        x = nxt[x]


@njit(cache=True, nogil=True)
def _records_batch(u, theta, out):
    count, n = u.shape
    sigma = np.empty(n + 1, dtype=np.int64)
    inv = np.empty(n + 1, dtype=np.int64)
    nxt = np.empty(n + 1, dtype=np.int64)
    for r in range(count):
        _restaurant(sigma, inv, 1, u[r], theta)
        sigma[0] = 0
        _cycles_to_word(sigma, nxt, out[r])


@njit(cache=True, nogil=True)
def _cycles_batch(u, theta, out):
    count, n = u.shape
    sigma = np.empty(n + 1, dtype=np.int64)
    inv = np.empty(n + 1, dtype=np.int64)
    for r in range(count):
        _restaurant(sigma, inv, 1, u[r], theta)
        out[r, :] = sigma[1:]


def _cycle_array(n: int, theta: float, rng: RngStream) -> np.ndarray:
    _check_args(n, theta)
    gen = rng.generator()
    sigma = np.zeros(n + 1, dtype=np.int64)
    inv = np.zeros(n + 1, dtype=np.int64)
    for start in range(1, n + 1, _CHUNK):
        size = min(_CHUNK, n + 1 - start)
        _restaurant(sigma, inv, start, gen.random(size), float(theta))
    return sigma


def sample_ewens_cycles(n: int, theta: float, rng: RngStream) -> Permutation:
    """P(sigma) = theta**cyc(sigma) / theta^(n), in O(n)."""
    return Permutation(_cycle_array(n, theta, rng)[1:], check=False)


def sample_ewens_records(n: int, theta: float, rng: RngStream) -> Permutation:
    """P(sigma) = theta**rec(sigma) / theta^(n), in O(n).

    Draws from the cycle process with the same stream, then rewrites it with
    the fundamental bijection, so the result is F(sample_ewens_cycles(...)).
    """
    sigma = _cycle_array(n, theta, rng)
    out = np.empty(n, dtype=np.int64)
    _cycles_to_word(sigma, np.empty(n + 1, dtype=np.int64), out)
    return Permutation(out, check=False)


def sample_records_batch(n: int, theta: float, count: int, rng: RngStream) -> np.ndarray:
    """``count`` independent record-biased permutations as rows of an int64 array.

    Row r only depends on the first (r + 1) * n uniforms of the stream, so a
    batch is a prefix of any larger batch drawn from the same stream.
    """
    _check_args(n, theta)
    u = rng.generator().random((count, n))
    out = np.empty((count, n), dtype=np.int64)
    _records_batch(u, float(theta), out)
    return out


def sample_cycles_batch(n: int, theta: float, count: int, rng: RngStream) -> np.ndarray:
    _check_args(n, theta)
    u = rng.generator().random((count, n))
    out = np.empty((count, n), dtype=np.int64)
    _cycles_batch(u, float(theta), out)
    return out


def exact_distribution(n: int, theta: float) -> dict[Permutation, float]:
    """Exact law theta**rec / theta^(n) on S_n by enumeration (n <= 8)."""
    _check_args(n, theta)
    if n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration refused for n = {n} > {EXACT_MAX_N}")
    log_theta = math.log(theta)
    words = list(permutations(range(1, n + 1)))
    logs = [count_records(np.array(w, dtype=np.int64)) * log_theta for w in words]
    # normalize in log space against the largest weight
    top = max(logs)
    weights = [math.exp(lw - top) for lw in logs]
    total = math.fsum(weights)
    return {Permutation(w, check=False): wt / total for w, wt in zip(words, weights)}
