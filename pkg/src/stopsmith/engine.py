"""Threshold stopping rules, success evaluation and the enumeration oracles."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadProbability, BadThreshold, TooLarge
from .models import ModelSpec, support_arrays
from .perm import Permutation, RankDirection

DEFAULT_SEED = 1729
DEFAULT_CHUNK = 4096
MAX_RECORD_N = 7


@dataclass(frozen=True)
class MonteCarloEstimate:
    successes: int
    trials: int
    seed: int
    family: str = ""
    n: int = 0
    m: int = 0
    direction: str = ""
    params: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise BadThreshold("trials must be >= 1")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def std_err(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["p_hat"] = self.p_hat
        rec["std_err"] = self.std_err
        return rec


def _check_threshold(n: int, m: int) -> None:
    if not 0 <= m <= n - 1:
        raise BadThreshold(f"threshold M = {m} outside 0..{n - 1}")


def run_threshold_strategy(p: Permutation, m: int, direction) -> tuple[int, bool]:
    """Skip the first ``m`` items, then take the first running record.

    Returns the 1-based selected index and whether it holds the best value.
    The last item is accepted if no record turns up after position ``m``.
    """
    if not isinstance(p, Permutation):
        p = Permutation(tuple(p))
    direction = RankDirection.parse(direction)
    n = p.n
    _check_threshold(n, m)
    sign = 1 if direction is RankDirection.MIN else -1
    vals = [sign * v for v in p.values]
    best_target = min(vals)
    selected = n
    if m == 0:
        selected = 1
    else:
        running = min(vals[:m])
        for j in range(m, n):
            if vals[j] < running:
                selected = j + 1
                break
            running = min(running, vals[j])
    return selected, vals[selected - 1] == best_target


def success_mask(perms: np.ndarray, m: int, direction) -> np.ndarray:
    """Vectorised success indicator of the threshold rule for each row."""
    perms = np.asarray(perms)
    direction = RankDirection.parse(direction)
    n = perms.shape[1]
    _check_threshold(n, m)
    vals = perms if direction is RankDirection.MIN else (n + 1) - perms
    if m == 0:
        return vals[:, 0] == 1
    prefix_min = np.minimum.accumulate(vals, axis=1)
    # record at j (0-based) iff vals[j] < min(vals[:j])
    records = np.zeros_like(vals, dtype=bool)
    records[:, 1:] = vals[:, 1:] < prefix_min[:, :-1]
    after = records[:, m:]
    has = after.any(axis=1)
    first = np.where(has, np.argmax(after, axis=1) + m, n - 1)
    return vals[np.arange(vals.shape[0]), first] == 1


def worker_count() -> int:
    raw = os.environ.get("STOPSMITH_THREADS", "0").strip() or "0"
    try:
        k = int(raw)
    except ValueError:
        k = 0
    return k if k > 0 else (os.cpu_count() or 1)


def monte_carlo_success(
    spec: ModelSpec,
    m: int,
    direction,
    trials: int = 10**6,
    seed: int = DEFAULT_SEED,
    chunk_size: int = DEFAULT_CHUNK,
    workers: Optional[int] = None,
) -> MonteCarloEstimate:
    """Estimate the success probability by sampling ``spec``.

    Chunk ``c`` draws from ``default_rng([seed, c])``, so the estimate only
    depends on ``(seed, chunk_size)`` and never on the worker count.
    """
    direction = RankDirection.parse(direction)
    if trials < 1:
        raise BadThreshold("trials must be >= 1")
    _check_threshold(spec.n, m)
    sizes = [min(chunk_size, trials - start) for start in range(0, trials, chunk_size)]

    def run(chunk):
        cid, size = chunk
        rng = np.random.default_rng([seed, cid])
        return int(success_mask(spec.sample_batch(size, rng), m, direction).sum())

    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(sizes) == 1:
        counts = [run(c) for c in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, enumerate(sizes)))
    return MonteCarloEstimate(
        successes=sum(counts),
        trials=trials,
        seed=seed,
        family=spec.family,
        n=spec.n,
        m=m,
        direction=direction.value,
        params=spec.describe(),
    )


def exact_success_curve(spec: ModelSpec, direction) -> np.ndarray:
    """Oracle success probability for every ``M = 0..n-1`` by enumeration."""
    perms, probs = support_arrays(spec)
    return np.array(
        [math.fsum(probs[success_mask(perms, m, direction)]) for m in range(spec.n)]
    )


def exact_success_by_enumeration(spec: ModelSpec, m: int, direction) -> float:
    _check_threshold(spec.n, m)
    perms, probs = support_arrays(spec)
    return math.fsum(probs[success_mask(perms, m, direction)])


def _record_matrix(perms: np.ndarray, direction) -> np.ndarray:
    direction = RankDirection.parse(direction)
    n = perms.shape[1]
    vals = perms if direction is RankDirection.MIN else (n + 1) - perms
    prefix_min = np.minimum.accumulate(vals, axis=1)
    rec = np.ones_like(vals, dtype=bool)
    rec[:, 1:] = vals[:, 1:] < prefix_min[:, :-1]
    return rec


def record_joint_law(spec: ModelSpec, direction) -> dict[tuple[int, ...], float]:
    """Exact law of ``(U_2, ..., U_n)``; ``U_1`` is always 1 and is omitted."""
    if spec.n > MAX_RECORD_N:
        raise TooLarge(f"record laws are capped at n = {MAX_RECORD_N}, got {spec.n}")
    perms, probs = support_arrays(spec)
    rec = _record_matrix(perms, direction)[:, 1:].astype(np.int64)
    table = {u: 0.0 for u in itertools.product((0, 1), repeat=spec.n - 1)}
    buckets: dict[tuple[int, ...], list[float]] = {}
    for row, pr in zip(map(tuple, rec.tolist()), probs):
        buckets.setdefault(row, []).append(pr)
    for key, vals in buckets.items():
        table[key] = math.fsum(vals)
    return table


def record_marginals(table: dict[tuple[int, ...], float]) -> list[float]:
    """``P(U_j = 1)`` for ``j = 2..n`` from a joint table."""
    if not table:
        return []
    width = len(next(iter(table)))
    return [math.fsum(p for u, p in table.items() if u[i]) for i in range(width)]


def independence_defect(spec: ModelSpec, direction) -> float:
    table = record_joint_law(spec, direction)
    marg = record_marginals(table)
    worst = 0.0
    for u, pr in table.items():
        prod = 1.0
        for ui, pi in zip(u, marg):
            prod *= pi if ui else 1.0 - pi
        worst = max(worst, abs(pr - prod))
    return worst


def odds_suffix_sums(record_probs: Sequence[float]) -> list[float]:
    """Suffix sums ``sum_{j>=k} p_j / (1 - p_j)`` aligned with the input (index 2..n)."""
    odds = []
    for p in record_probs:
        if not (0.0 < p <= 1.0) or math.isnan(p):
            raise BadProbability(f"record probability {p!r} outside (0, 1]")
        odds.append(math.inf if p == 1.0 else p / (1.0 - p))
    out = [0.0] * len(odds)
    acc = 0.0
    for i in range(len(odds) - 1, -1, -1):
        acc += odds[i]
        out[i] = acc
    return out


def bruss_odds_threshold(record_probs: Sequence[float]) -> int:
    """Odds-algorithm threshold for independent record indicators ``p_2..p_n``.

    Stops from the last index ``s`` at which the suffix odds sum reaches 1 and
    returns ``M = s - 1``.  If the total is below 1 the rule stops at the
    first item, i.e. ``M = 0``.
    """
    suffix = odds_suffix_sums(record_probs)
    for i in range(len(suffix) - 1, -1, -1):
        if suffix[i] >= 1.0:
            return i + 1  # suffix[i] starts at index s = i + 2
    return 0
