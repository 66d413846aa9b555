"""Permutations as words and as sets of cycles, and the fundamental bijection.

Values are 1-based throughout: ``p.word[i - 1] == p(i)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class PermutationError(ValueError):
    """Raised for malformed permutations, cycles or sequences."""


class Permutation:
    """An immutable permutation of [n] stored as its word."""

    __slots__ = ("_word", "_hash")

    def __init__(self, word: Iterable[int], *, check: bool = True):
        if not isinstance(word, (np.ndarray, list, tuple)):
            word = list(word)
        # trusted arrays (check=False) are adopted without a copy
        arr = np.array(word, dtype=np.int64, copy=check or None)
        if arr.ndim != 1:
            raise PermutationError("a permutation word must be one-dimensional")
        if check:
            n = arr.size
            if n == 0:
                raise PermutationError("a permutation must have size n >= 1")
            if arr.min() < 1 or arr.max() > n:
                raise PermutationError(f"values must lie in [1, {n}]")
            seen = np.zeros(n + 1, dtype=bool)
            seen[arr] = True
            if not seen[1:].all():
                raise PermutationError("word is not a bijection on [n]")
        arr.setflags(write=False)
        self._word = arr
        self._hash = None

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(1, n + 1), check=False)

    @classmethod
    def from_text(cls, line: str) -> Permutation:
        try:
            return cls([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise PermutationError(f"cannot parse permutation from {line!r}") from exc

    @property
    def word(self) -> np.ndarray:
        return self._word

    @property
    def n(self) -> int:
        return int(self._word.size)

    def __len__(self) -> int:
        return self.n

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} outside [1, {self.n}]")
        return int(self._word[i - 1])

    def __iter__(self):
        return (int(x) for x in self._word)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self._word, other._word)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._word.tobytes())
        return self._hash

    def __repr__(self) -> str:
        if self.n <= 20:
            return f"Permutation({self.to_text()})"
        return f"Permutation(n={self.n})"

    def to_text(self) -> str:
        return " ".join(map(str, self._word.tolist()))

    def inverse(self) -> Permutation:
        inv = np.empty_like(self._word)
        inv[self._word - 1] = np.arange(1, self.n + 1)
        return Permutation(inv, check=False)

    def record_positions(self) -> list[int]:
        return record_positions(self._word)


@dataclass(frozen=True)
class CycleDecomposition:
    """Cycles of a permutation in canonical form.

    Each cycle starts with its maximum and cycles are sorted by increasing
    maximum. The cycle ``(a b c)`` means a -> b -> c -> a.
    """

    n: int
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(x for c in self.cycles for x in c)
        if seen != list(range(1, self.n + 1)):
            raise PermutationError("cycles must cover [n] with each value exactly once")
        if any(len(c) == 0 for c in self.cycles):
            raise PermutationError("empty cycle")
        object.__setattr__(self, "cycles", canonical_cycles(self.cycles))

    def __len__(self) -> int:
        return len(self.cycles)

    def to_text(self) -> str:
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles)

    @classmethod
    def from_text(cls, text: str) -> CycleDecomposition:
        groups = re.findall(r"\(([^()]*)\)", text)
        if not groups or re.sub(r"\([^()]*\)", "", text).strip():
            raise PermutationError(f"cannot parse cycles from {text!r}")
        cycles = tuple(tuple(int(tok) for tok in g.split()) for g in groups)
        n = sum(len(c) for c in cycles)
        return cls(n, cycles)

    def to_permutation(self) -> Permutation:
        word = np.empty(self.n, dtype=np.int64)
        for c in self.cycles:
            for a, b in zip(c, c[1:] + c[:1]):
                word[a - 1] = b
        return Permutation(word, check=False)


def canonical_cycles(cycles: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Rotate each cycle to start at its maximum and sort by maximum."""
    out = []
    for c in cycles:
        c = tuple(c)
        k = c.index(max(c))
        out.append(c[k:] + c[:k])
    out.sort(key=lambda c: c[0])
    return tuple(out)


def record_positions(word: Sequence[int]) -> list[int]:
    """1-based positions of left-to-right maxima of a sequence of distinct values."""
    positions = []
    best = None
    for i, x in enumerate(word, start=1):
        if best is None or x > best:
            positions.append(i)
            best = x
    return positions


def check_distinct(values: Sequence[int]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise PermutationError("expected a nonempty sequence")
    if np.unique(arr).size != arr.size:
        raise PermutationError("sequence contains repeated values")
    return arr


def normalize(values: Sequence[int]) -> Permutation:
    """Replace each value by its rank among the values of the sequence.

    >>> normalize([8, 2, 5, 4]).to_text()
    '4 1 3 2'
    """
    arr = check_distinct(values)
    ranks = np.empty(arr.size, dtype=np.int64)
    ranks[np.argsort(arr, kind="stable")] = np.arange(1, arr.size + 1)
    return Permutation(ranks, check=False)


def to_cycles(p: Permutation) -> CycleDecomposition:
    word = p.word
    n = p.n
    seen = np.zeros(n + 1, dtype=bool)
    cycles = []
    # Scanning from n downwards meets every cycle first at its maximum.
    for start in range(n, 0, -1):
        if seen[start]:
            continue
        cycle = []
        x = start
        while not seen[x]:
            seen[x] = True
            cycle.append(x)
            x = int(word[x - 1])
        cycles.append(tuple(cycle))
    cycles.reverse()
    return CycleDecomposition(n, tuple(cycles))


def fundamental_bijection(p: Permutation) -> Permutation:
    """Write the cycles max-first by increasing maximum and erase the brackets.

    The number of cycles of ``p`` becomes the number of records of the result.
    """
    word = [x for c in to_cycles(p).cycles for x in c]
    return Permutation(word, check=False)


def inverse_fundamental_bijection(p: Permutation) -> Permutation:
    """Cut the word just before each record; each piece is one cycle."""
    word = p.word.tolist()
    starts = [i - 1 for i in record_positions(word)] + [len(word)]
    cycles = tuple(tuple(word[a:b]) for a, b in zip(starts, starts[1:]))
    return CycleDecomposition(p.n, cycles).to_permutation()


def read_permutations(lines: Iterable[str]) -> Iterable[Permutation]:
    for line in lines:
        if line.strip():
            yield Permutation.from_text(line)
