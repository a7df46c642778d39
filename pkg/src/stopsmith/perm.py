"""Permutations in one-line notation, Lehmer codes and record scans.

Values are 1-based throughout the public API: a permutation of size ``n``
holds each of ``1..n`` exactly once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DuplicateEntries, InvalidPermutation


class RankDirection(str, enum.Enum):
    """Which value is the best item: 1 (``MIN``) or n (``MAX``)."""

    MIN = "min"
    MAX = "max"

    @classmethod
    def parse(cls, value: "str | RankDirection") -> "RankDirection":
        if isinstance(value, RankDirection):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidPermutation(f"unknown rank direction {value!r}") from None


@dataclass(frozen=True)
class Permutation:
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        n = len(vals)
        if n < 1:
            raise InvalidPermutation("a permutation needs n >= 1")
        if sorted(vals) != list(range(1, n + 1)):
            raise InvalidPermutation(f"{vals} is not a permutation of 1..{n}")

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __str__(self) -> str:
        return " ".join(map(str, self.values))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse ``"3 1 4 2"``, ``"3,1,4,2"`` or the compact ``"3142"`` (n <= 9)."""
        text = text.strip()
        parts = text.replace(",", " ").split()
        if len(parts) == 1 and len(parts[0]) > 1 and parts[0].isdigit():
            parts = list(parts[0])
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as exc:
            if isinstance(exc, InvalidPermutation):
                raise
            raise InvalidPermutation(f"cannot parse permutation from {text!r}") from None

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)


@dataclass(frozen=True)
class LehmerCode:
    """Insertion code ``x = (X_2, ..., X_n)`` with ``0 <= X_j <= j - 1``."""

    n: int
    x: tuple[int, ...]

    def __post_init__(self):
        xs = tuple(int(v) for v in self.x)
        object.__setattr__(self, "x", xs)
        if self.n < 1:
            raise InvalidPermutation("a Lehmer code needs n >= 1")
        if len(xs) != self.n - 1:
            raise InvalidPermutation(f"expected {self.n - 1} entries, got {len(xs)}")
        for j, xj in enumerate(xs, start=2):
            if not 0 <= xj <= j - 1:
                raise InvalidPermutation(f"X_{j} = {xj} outside 0..{j - 1}")

    def total(self) -> int:
        return sum(self.x)


def _as_perm(p) -> Permutation:
    return p if isinstance(p, Permutation) else Permutation(tuple(p))


def inverse(p: Permutation) -> Permutation:
    p = _as_perm(p)
    out = [0] * p.n
    for i, v in enumerate(p.values, start=1):
        out[v - 1] = i
    return Permutation(tuple(out))


def complement(p: Permutation) -> Permutation:
    p = _as_perm(p)
    return Permutation(tuple(p.n + 1 - v for v in p.values))


def reverse(p: Permutation) -> Permutation:
    p = _as_perm(p)
    return Permutation(p.values[::-1])


class _Fenwick:
    """Binary indexed tree over positions 1..n."""

    __slots__ = ("n", "tree")

    def __init__(self, n: int, fill: int = 0):
        self.n = n
        if fill:
            # all-ones tree: node i covers (i - lowbit(i), i]
            self.tree = [i & -i for i in range(n + 1)]
            self.tree[0] = 0
        else:
            self.tree = [0] * (n + 1)

    def add(self, i: int, delta: int) -> None:
        n, tree = self.n, self.tree
        while i <= n:
            tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        s, tree = 0, self.tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def find_kth(self, k: int) -> int:
        """Smallest index whose prefix count reaches ``k``."""
        pos, tree, n = 0, self.tree, self.n
        step = 1 << n.bit_length()
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < k:
                pos = nxt
                k -= tree[nxt]
            step >>= 1
        return pos + 1


def inversion_count(p: Permutation) -> int:
    """Number of pairs ``i < j`` with ``p_j < p_i``; O(n log n)."""
    p = _as_perm(p)
    fw = _Fenwick(p.n)
    inv = 0
    for seen, v in enumerate(p.values):
        inv += seen - fw.prefix(v)
        fw.add(v, 1)
    return inv


def reduce_sequence(a: Sequence[float]) -> Permutation:
    """Rank vector of distinct reals: the smallest entry becomes 1."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidPermutation("reduce_sequence needs a non-empty 1-d sequence")
    order = np.argsort(arr, kind="stable")
    if np.any(arr[order][1:] == arr[order][:-1]):
        raise DuplicateEntries("sequence has entries that compare equal")
    ranks = np.empty(arr.size, dtype=np.int64)
    ranks[order] = np.arange(1, arr.size + 1)
    return Permutation(tuple(ranks.tolist()))


def lehmer_decode(code: LehmerCode) -> Permutation:
    """Insert 1, then each ``j`` with exactly ``X_j`` entries to its right.

    Runs backwards from ``j = n``: every free slot right of ``j`` is later
    filled by a smaller number, so ``j`` takes the ``(j - X_j)``-th free slot.
    """
    n = code.n
    fw = _Fenwick(n, fill=1)
    out = [0] * n
    xs = (0,) + code.x
    for j in range(n, 0, -1):
        slot = fw.find_kth(j - xs[j - 1])
        out[slot - 1] = j
        fw.add(slot, -1)
    return Permutation(tuple(out))


def lehmer_encode(p: Permutation) -> LehmerCode:
    p = _as_perm(p)
    pos = inverse(p).values
    fw = _Fenwick(p.n)
    xs = []
    for j in range(1, p.n + 1):
        # smaller numbers already inserted, sitting right of j
        right = (j - 1) - fw.prefix(pos[j - 1])
        if j > 1:
            xs.append(right)
        fw.add(pos[j - 1], 1)
    return LehmerCode(p.n, tuple(xs))


def record_indicators(p: Permutation, direction: "RankDirection | str") -> tuple[bool, ...]:
    p = _as_perm(p)
    direction = RankDirection.parse(direction)
    out = []
    best = None
    for v in p.values:
        if best is None:
            out.append(True)
            best = v
        elif (v < best) if direction is RankDirection.MIN else (v > best):
            out.append(True)
            best = v
        else:
            out.append(False)
    return tuple(out)


def all_permutations(n: int) -> np.ndarray:
    """Every permutation of ``1..n`` as rows of an ``(n!, n)`` array, lexicographic."""
    from itertools import permutations

    return np.array(list(permutations(range(1, n + 1))), dtype=np.int64).reshape(-1, n)


def inversion_counts(perms: np.ndarray) -> np.ndarray:
    """Row-wise inversion counts of a 2-d array of permutations."""
    perms = np.asarray(perms)
    n = perms.shape[1]
    total = np.zeros(perms.shape[0], dtype=np.int64)
    for i in range(n - 1):
        total += (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
    return total


def decode_batch(codes: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`lehmer_decode` for a ``(size, n - 1)`` array of codes."""
    codes = np.asarray(codes, dtype=np.int64)
    if n == 1:
        return np.ones((codes.shape[0], 1), dtype=np.int64)
    codes = codes.reshape(-1, n - 1)
    size = codes.shape[0]
    rows = np.arange(size)
    idx = np.arange(n + 1)
    tree = np.broadcast_to(idx & -idx, (size, n + 1)).copy()
    tree[:, 0] = 0
    out = np.zeros((size, n), dtype=np.int64)
    top = 1 << n.bit_length()
    for j in range(n, 0, -1):
        k = np.full(size, j, dtype=np.int64)
        if j > 1:
            k -= codes[:, j - 2]
        pos = np.zeros(size, dtype=np.int64)
        step = top
        while step:
            nxt = pos + step
            ok = nxt <= n
            vals = tree[rows, np.minimum(nxt, n)]
            take = ok & (vals < k)
            k = np.where(take, k - vals, k)
            pos = np.where(take, nxt, pos)
            step >>= 1
        slot = pos + 1
        out[rows, slot - 1] = j
        i = slot
        live = i <= n
        while live.any():
            tree[rows[live], i[live]] -= 1
            i = i + (i & -i)
            live = i <= n
    return out
