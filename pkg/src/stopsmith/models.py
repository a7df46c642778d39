"""Mallows, Luce and p-shifted permutation laws: pmfs, samplers, enumeration.

Exponential variables use the rate convention, so ``Exp(theta)`` has mean
``1 / theta`` and heavier weights tend to produce smaller values.

Every sampler has a single-draw form returning a :class:`Permutation` and a
``*_batch`` form returning an ``(size, n)`` integer array of 1-based rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import BadParameter, TooLarge
from .perm import (
    Permutation,
    all_permutations,
    decode_batch,
    inverse,
    inversion_count,
    inversion_counts,
    lehmer_decode,
    lehmer_encode,
    LehmerCode,
    reduce_sequence,
)

MAX_ENUMERATION_N = 9


@dataclass(frozen=True)
class WeightVector:
    theta: tuple[float, ...]
    label: Optional[str] = None

    def __post_init__(self):
        th = tuple(float(t) for t in self.theta)
        if not th:
            raise BadParameter("weight vector is empty")
        for t in th:
            if not (t > 0 and math.isfinite(t)):
                raise BadParameter(f"weights must be positive and finite, got {t!r}")
        object.__setattr__(self, "theta", th)

    @property
    def n(self) -> int:
        return len(self.theta)

    @cached_property
    def total(self) -> float:
        return math.fsum(self.theta)

    def __len__(self) -> int:
        return len(self.theta)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)

    def describe(self) -> str:
        if self.label:
            return self.label
        return ";".join(format(t, ".15g") for t in self.theta)

    @classmethod
    def unit(cls, n: int) -> "WeightVector":
        return cls((1.0,) * n, label="unit")

    @classmethod
    def geometric(cls, q: float, n: int) -> "WeightVector":
        """``theta_i = q**i``; the weights that reproduce Mallows(q)."""
        if not q > 0:
            raise BadParameter("geometric weights need q > 0")
        return cls(tuple(q ** i for i in range(1, n + 1)), label=f"geom:{q:.15g}")

    @classmethod
    def sukhatme(cls, n: int) -> "WeightVector":
        return cls(tuple(float(n + 1 - j) for j in range(1, n + 1)), label="sukhatme")

    @classmethod
    def reverse_sukhatme(cls, n: int) -> "WeightVector":
        return cls(tuple(float(j) for j in range(1, n + 1)), label="rev-sukhatme")

    linear = reverse_sukhatme

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "WeightVector":
        """Inline ``"1,2,3"``, a file path, or ``unit``/``geom:<q>``/``sukhatme``/``rev-sukhatme``."""
        text = text.strip()
        key = text.lower()
        shorthand = key in {"unit", "sukhatme", "rev-sukhatme", "linear"} or key.startswith("geom:")
        if shorthand:
            if n is None:
                raise BadParameter(f"weights {text!r} need an explicit n")
            if key == "unit":
                return cls.unit(n)
            if key == "sukhatme":
                return cls.sukhatme(n)
            if key in {"rev-sukhatme", "linear"}:
                return cls.reverse_sukhatme(n)
            try:
                q = float(key.split(":", 1)[1])
            except ValueError:
                raise BadParameter(f"bad geometric ratio in {text!r}") from None
            return cls.geometric(q, n)
        path = Path(text)
        if "," not in text and path.is_file():
            text = path.read_text()
        items = text.replace(",", " ").replace(";", " ").split()
        try:
            w = cls(tuple(float(s) for s in items))
        except ValueError as exc:
            if isinstance(exc, BadParameter):
                raise
            raise BadParameter(f"cannot parse weights from {text!r}") from None
        if n is not None and w.n != n:
            raise BadParameter(f"got {w.n} weights for n = {n}")
        return w


FAMILIES = ("mallows", "luce", "luce-inv", "p-shifted", "uniform")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n: int
    q: Optional[float] = None
    weights: Optional[WeightVector] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadParameter(f"unknown family {self.family!r}")
        if self.n < 1:
            raise BadParameter("n must be >= 1")
        if self.family == "mallows":
            if self.q is None or not self.q > 0 or not math.isfinite(self.q):
                raise BadParameter("Mallows needs a finite q > 0")
        if self.family in ("luce", "luce-inv", "p-shifted"):
            if self.weights is None:
                raise BadParameter(f"{self.family} needs a weight vector")
            if self.weights.n != self.n:
                raise BadParameter(f"{self.weights.n} weights for n = {self.n}")

    @classmethod
    def mallows(cls, n: int, q: float) -> "ModelSpec":
        return cls("mallows", n, q=float(q))

    @classmethod
    def luce(cls, w) -> "ModelSpec":
        w = _weights(w)
        return cls("luce", w.n, weights=w)

    @classmethod
    def luce_inv(cls, w) -> "ModelSpec":
        w = _weights(w)
        return cls("luce-inv", w.n, weights=w)

    @classmethod
    def p_shifted(cls, w) -> "ModelSpec":
        w = _weights(w)
        return cls("p-shifted", w.n, weights=w)

    @classmethod
    def uniform(cls, n: int) -> "ModelSpec":
        return cls("uniform", n)

    def describe(self) -> str:
        if self.family == "mallows":
            return format(self.q, ".15g")
        if self.weights is not None:
            return self.weights.describe()
        return ""

    def pmf(self, p: Permutation) -> float:
        if self.family == "mallows":
            return mallows_pmf(p, self.q)
        if self.family == "luce":
            return luce_pmf(p, self.weights)
        if self.family == "luce-inv":
            return luce_inv_pmf(p, self.weights)
        if self.family == "p-shifted":
            return p_shifted_pmf(p, self.weights)
        return math.exp(-math.lgamma(self.n + 1))

    def sample_batch(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.family == "mallows":
            return mallows_sample_batch(self.n, self.q, size, rng)
        if self.family == "luce":
            return luce_sample_batch(self.weights, size, rng)
        if self.family == "luce-inv":
            return luce_inv_sample_batch(self.weights, size, rng)
        if self.family == "p-shifted":
            return p_shifted_sample_batch(self.weights, size, rng, n=self.n)
        return uniform_sample_batch(self.n, size, rng)


def _weights(w) -> WeightVector:
    return w if isinstance(w, WeightVector) else WeightVector(tuple(w))


# ---------------------------------------------------------------- normalizer


def log_q_integer(j: int, log_q: float) -> float:
    """``log([j]_q)`` where ``[j]_q = 1 + q + ... + q**(j-1)``, stable near q = 1."""
    if j < 1:
        raise BadParameter("q-integer needs j >= 1")
    if log_q == 0.0:
        return math.log(j)
    if log_q > 0:
        # [j]_q = q**(j-1) [j]_{1/q}
        return (j - 1) * log_q + log_q_integer(j, -log_q)
    return math.log(-math.expm1(j * log_q)) - math.log(-math.expm1(log_q))


def log_mallows_normalizer(n: int, q: float) -> float:
    if not q > 0:
        raise BadParameter("Mallows needs q > 0")
    if q == 1.0:
        return math.lgamma(n + 1)
    lq = math.log(q)
    return math.fsum(log_q_integer(j, lq) for j in range(1, n + 1))


def mallows_normalizer(n: int, q: float) -> float:
    """``Z_n(q) = prod_j (1 - q**j) / (1 - q)**n``; may overflow to ``inf``.

    Use :func:`log_mallows_normalizer` when ``n`` is large and ``q > 1``.
    """
    try:
        return math.exp(log_mallows_normalizer(n, q))
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------- pmfs


def mallows_pmf(p: Permutation, q: float) -> float:
    if not q > 0:
        raise BadParameter("Mallows needs q > 0")
    n = len(p)
    if q == 1.0:
        return math.exp(-math.lgamma(n + 1))
    return math.exp(inversion_count(p) * math.log(q) - log_mallows_normalizer(n, q))


def luce_pmf(p: Permutation, w) -> float:
    """Probability that weighted draws without replacement come out in the order ``p``."""
    w = _weights(w)
    if w.n != len(p):
        raise BadParameter(f"{w.n} weights for a permutation of size {len(p)}")
    th = w.theta
    remaining = w.total
    logp = 0.0
    for v in p:
        logp += math.log(th[v - 1]) - math.log(remaining)
        remaining -= th[v - 1]
        if remaining < 0:
            remaining = 0.0
    return math.exp(logp)


def luce_inv_pmf(p: Permutation, w) -> float:
    return luce_pmf(inverse(p), w)


def p_shifted_pmf(p: Permutation, w) -> float:
    """Product of the independent insertion-code probabilities."""
    w = _weights(w)
    n = len(p)
    if w.n < n:
        raise BadParameter(f"{w.n} weights for a permutation of size {n}")
    th = w.theta
    code = lehmer_encode(p)
    prefix = th[0]
    logp = 0.0
    for j, xj in enumerate(code.x, start=2):
        prefix += th[j - 1]
        logp += math.log(th[xj]) - math.log(prefix)
    return math.exp(logp)


# ------------------------------------------------------------------ samplers


def _uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.random(shape)


def _urn_draws(theta: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """Labels drawn stage by stage, each proportional to the remaining weights."""
    n = theta.size
    w = np.broadcast_to(theta, (size, n)).copy()
    rows = np.arange(size)
    out = np.empty((size, n), dtype=np.int64)
    for stage in range(n):
        cum = np.cumsum(w, axis=1)
        u = _uniforms(rng, size) * cum[:, -1]
        pick = (cum <= u[:, None]).sum(axis=1)
        # guard against u landing on a zeroed tail by rounding
        pick = np.minimum(pick, n - 1)
        bad = w[rows, pick] == 0
        if bad.any():
            pick[bad] = np.argmax(np.where(w[bad] > 0, np.arange(n), -1), axis=1)
        out[:, stage] = pick + 1
        w[rows, pick] = 0.0
    return out


def _invert_rows(perms: np.ndarray) -> np.ndarray:
    size, n = perms.shape
    inv = np.empty_like(perms)
    rows = np.arange(size)[:, None]
    inv[rows, perms - 1] = np.arange(1, n + 1)
    return inv


def _rank_rows(values: np.ndarray) -> np.ndarray:
    """Row-wise reduced permutation (1 = smallest)."""
    order = np.argsort(values, axis=1, kind="stable")
    size, n = values.shape
    ranks = np.empty((size, n), dtype=np.int64)
    ranks[np.arange(size)[:, None], order] = np.arange(1, n + 1)
    return ranks


def luce_sample_batch(w, size: int, rng: np.random.Generator) -> np.ndarray:
    return _urn_draws(_weights(w).as_array(), size, rng)


def luce_inv_sample_batch(w, size: int, rng: np.random.Generator) -> np.ndarray:
    return _invert_rows(luce_sample_batch(w, size, rng))


def luce_sample(w, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(luce_sample_batch(w, 1, rng)[0].tolist()))


def luce_inv_sample(w, rng: np.random.Generator) -> Permutation:
    return inverse(luce_sample(w, rng))


def _p_shifted_codes(theta: np.ndarray, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    codes = np.empty((size, max(n - 1, 0)), dtype=np.int64)
    for j in range(2, n + 1):
        cdf = np.cumsum(theta[:j])
        u = _uniforms(rng, size) * cdf[-1]
        codes[:, j - 2] = np.minimum(np.searchsorted(cdf, u, side="right"), j - 1)
    return codes


def p_shifted_sample_batch(w, size: int, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
    """Independent insertion codes with ``P(X_j = i - 1) ∝ theta_i``, then decode."""
    w = _weights(w)
    n = w.n if n is None else n
    if w.n < n:
        raise BadParameter(f"{w.n} weights for n = {n}")
    if n == 1:
        return np.ones((size, 1), dtype=np.int64)
    return decode_batch(_p_shifted_codes(w.as_array(), n, size, rng), n)


def p_shifted_sample(w, rng: np.random.Generator, n: Optional[int] = None) -> Permutation:
    w = _weights(w)
    n = w.n if n is None else n
    if w.n < n:
        raise BadParameter(f"{w.n} weights for n = {n}")
    codes = _p_shifted_codes(w.as_array(), n, 1, rng)[0]
    return lehmer_decode(LehmerCode(n, tuple(codes.tolist())))


def _mallows_codes(n: int, q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Truncated-geometric insertion codes by closed-form inverse CDF.

    ``P(X_j <= k) = (1 - q**(k+1)) / (1 - q**j)``.  For ``q > 1`` draw with
    ``1 / q`` and reflect ``k -> j - 1 - k`` so no power of ``q`` overflows.
    """
    if not q > 0:
        raise BadParameter("Mallows needs q > 0")
    j = np.arange(2, n + 1, dtype=float)
    u = _uniforms(rng, (size, n - 1))
    if q == 1.0:
        codes = np.floor(u * j).astype(np.int64)
        return np.minimum(codes, (j - 1).astype(np.int64))
    r = q if q < 1 else 1.0 / q
    lr = math.log(r)
    mass = -np.expm1(j * lr)  # 1 - r**j
    k = np.ceil(np.log1p(-u * mass) / lr) - 1.0
    codes = np.clip(k, 0, j - 1).astype(np.int64)
    if q > 1:
        codes = (j - 1).astype(np.int64) - codes
    return codes


def mallows_sample_batch(n: int, q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.ones((size, 1), dtype=np.int64)
    return decode_batch(_mallows_codes(n, q, size, rng), n)


def mallows_sample(n: int, q: float, rng: np.random.Generator) -> Permutation:
    if n == 1:
        return Permutation((1,))
    codes = _mallows_codes(n, q, 1, rng)[0]
    return lehmer_decode(LehmerCode(n, tuple(codes.tolist())))


def exponential_reduction_sample_batch(w, size: int, rng: np.random.Generator) -> np.ndarray:
    th = _weights(w).as_array()
    v = rng.exponential(1.0, size=(size, th.size)) / th
    return _rank_rows(v)


def exponential_reduction_sample(w, rng: np.random.Generator) -> Permutation:
    th = _weights(w).as_array()
    return reduce_sequence(rng.exponential(1.0, size=th.size) / th)


def _sukhatme_gaps(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    v = np.sort(rng.exponential(1.0, size=(size, n)), axis=1)
    return np.diff(v, axis=1, prepend=0.0)


def sukhatme_gap_sample_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return _rank_rows(_sukhatme_gaps(n, size, rng))


def sukhatme_gap_sample(n: int, rng: np.random.Generator) -> Permutation:
    return reduce_sequence(_sukhatme_gaps(n, 1, rng)[0])


def uniform_sample_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return np.argsort(rng.random((size, n)), axis=1) + 1


# --------------------------------------------------------------- enumeration


def support_arrays(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """All of ``S_n`` as an ``(n!, n)`` array with the matching pmf vector.

    The pmf is computed straight from each family's definition, vectorised
    over rows; it is the backbone of every brute-force oracle.
    """
    n = spec.n
    if n > MAX_ENUMERATION_N:
        raise TooLarge(f"enumeration is capped at n = {MAX_ENUMERATION_N}, got {n}")
    perms = all_permutations(n)
    if spec.family == "uniform" or (spec.family == "mallows" and spec.q == 1.0):
        probs = np.full(perms.shape[0], math.exp(-math.lgamma(n + 1)))
    elif spec.family == "mallows":
        logp = inversion_counts(perms) * math.log(spec.q) - log_mallows_normalizer(n, spec.q)
        probs = np.exp(logp)
    elif spec.family in ("luce", "luce-inv"):
        seq = perms if spec.family == "luce" else _invert_rows(perms)
        th = spec.weights.as_array()[seq - 1]
        remaining = np.cumsum(th[:, ::-1], axis=1)[:, ::-1]
        probs = np.exp(np.sum(np.log(th) - np.log(remaining), axis=1))
    else:
        th = spec.weights.as_array()
        prefix = np.cumsum(th)
        inv = _invert_rows(perms)
        logp = np.zeros(perms.shape[0])
        for j in range(2, n + 1):
            # X_j: numbers < j placed right of j
            xj = (inv[:, : j - 1] > inv[:, j - 1 : j]).sum(axis=1)
            logp += np.log(th[xj]) - math.log(prefix[j - 1])
        probs = np.exp(logp)
    return perms, probs


def enumerate_support(spec: ModelSpec) -> Iterator[tuple[Permutation, float]]:
    perms, probs = support_arrays(spec)
    for row, pr in zip(perms, probs):
        yield Permutation(tuple(row.tolist())), float(pr)


def empirical_tv(samples: np.ndarray, spec_or_probs) -> float:
    """Total-variation distance between sampled rows and an exact law on ``S_n``."""
    samples = np.asarray(samples)
    n = samples.shape[1]
    if isinstance(spec_or_probs, ModelSpec):
        perms, probs = support_arrays(spec_or_probs)
    else:
        perms, probs = spec_or_probs
    weights = n ** np.arange(n - 1, -1, -1)
    keys = (perms - 1) @ weights
    lookup = {int(k): i for i, k in enumerate(keys)}
    sample_keys = (samples - 1) @ weights
    uniq, counts = np.unique(sample_keys, return_counts=True)
    freq = np.zeros(perms.shape[0])
    for k, c in zip(uniq, counts):
        freq[lookup[int(k)]] = c
    freq /= samples.shape[0]
    return 0.5 * float(np.abs(freq - probs).sum())
