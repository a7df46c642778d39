"""Exact success probabilities of threshold rules and their large-n limits.

Conventions: ``up`` means the largest value is best, ``down`` the smallest.
Powers of ``q`` are formed as ``exp(k * log q)`` and ``1 - q**k`` as
``-expm1(k * log q)`` so that ``q = 1 +- c/n`` keeps full precision.

The Sukhatme limit curve is ``-(2b - b^2) log(2b - b^2)``, which is what the
integral ``2 (1 - (1-b)^2) * int_b^1 (1-x) / (1 - (1-x)^2) dx`` evaluates to.
The variant with prefactor ``2b - 2b^2`` disagrees with the exact n = 10^5
curve by up to 0.07, while this one agrees to ~1e-5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import BadParameter, BadThreshold, DomainError
from .models import WeightVector, _weights
from .perm import RankDirection

INV_E = math.exp(-1.0)
ONE_MINUS_LOG_E_MINUS_1 = 1.0 - math.log(math.e - 1.0)

EXACT_FAMILIES = ("mallows-up", "mallows-down", "luce-inv-down", "classical")


def _check(n: int, m: int) -> None:
    if n < 1:
        raise BadParameter("n must be >= 1")
    if not 0 <= m <= n - 1:
        raise BadThreshold(f"threshold M = {m} outside 0..{n - 1}")


def _check_q(q: float) -> None:
    if not (q > 0) or not math.isfinite(q):
        raise BadParameter(f"q must be a finite positive number, got {q!r}")


def _one_minus_pow(k, lq):
    """``1 - q**k`` from ``lq = log q``."""
    if isinstance(k, (int, float)):
        return -math.expm1(k * lq)
    return -np.expm1(np.multiply(k, lq))


def _fsum(terms: np.ndarray) -> float:
    return math.fsum(terms.tolist())


# ------------------------------------------------------------ exact formulas


def classical_exact(n: int, m: int) -> float:
    _check(n, m)
    if m == 0:
        return 1.0 / n
    return (m / n) * _fsum(1.0 / np.arange(m, n))


def mallows_up_exact(n: int, m: int, q: float) -> float:
    """Success probability of ``S(n, M)`` under Mallows(q), largest value best."""
    _check(n, m)
    _check_q(q)
    if q == 1.0:
        return classical_exact(n, m)
    if q < 1.0:
        lq = math.log(q)
        head = (1.0 - q) / _one_minus_pow(n, lq)
        if m == 0:
            return head * math.exp((n - 1) * lq)
        tail = _fsum(1.0 / _one_minus_pow(np.arange(m, n), lq))
        return head * math.exp((n - m - 1) * lq) * _one_minus_pow(m, lq) * tail
    # q > 1: ((q-1)/q) (1 - q^-M) / (1 - q^-n) * sum 1/(q^(j-1) - 1)
    lr = -math.log(q)
    lead = -math.expm1(lr) / _one_minus_pow(n, lr)  # ((q-1)/q) / (1 - q^-n)
    if m == 0:
        return lead
    k = np.arange(m, n)
    tail = _fsum(np.exp(k * lr) / _one_minus_pow(k, lr))
    return lead * _one_minus_pow(m, lr) * tail


def mallows_down_exact(n: int, m: int, q: float) -> float:
    """Success probability of ``S(n, M)`` under Mallows(q), smallest value best."""
    _check(n, m)
    _check_q(q)
    if q == 1.0:
        return classical_exact(n, m)
    if q < 1.0:
        lq = math.log(q)
        head = (1.0 - q) / _one_minus_pow(n, lq)
        if m == 0:
            return head
        k = np.arange(m, n)
        tail = _fsum(np.exp(k * lq) / _one_minus_pow(k, lq))
        return head * _one_minus_pow(m, lq) * tail
    # q > 1: divide numerator and denominator through by q^n, q^M, q^(j-1)
    lr = -math.log(q)
    head = _one_minus_pow(1, lr) / _one_minus_pow(n, lr)
    if m == 0:
        return head * math.exp((n - 1) * lr)
    tail = _fsum(1.0 / _one_minus_pow(np.arange(m, n), lr))
    return head * math.exp((n - m - 1) * lr) * _one_minus_pow(m, lr) * tail


def luce_inv_down_exact(n: int, m: int, w) -> float:
    """Success probability under the inverse-Luce law, smallest value best."""
    _check(n, m)
    w = _weights(w)
    if w.n != n:
        raise BadParameter(f"{w.n} weights for n = {n}")
    th = w.as_array()
    total = w.total
    if m == 0:
        return float(th[0]) / total
    prefix = np.cumsum(th)
    s = _fsum(th[m:] / prefix[m - 1 : n - 1])
    return float(prefix[m - 1]) / total * s


def exact(family: str, n: int, m: int, q: Optional[float] = None, weights=None) -> float:
    """Dispatch by family name: ``mallows-up``, ``mallows-down``, ``luce-inv-down``, ``classical``."""
    if family == "classical":
        return classical_exact(n, m)
    if family in ("mallows-up", "mallows-down"):
        if q is None:
            raise BadParameter(f"{family} needs q")
        f = mallows_up_exact if family == "mallows-up" else mallows_down_exact
        return f(n, m, q)
    if family == "luce-inv-down":
        if weights is None:
            raise BadParameter("luce-inv-down needs weights")
        return luce_inv_down_exact(n, m, weights)
    raise BadParameter(f"unknown family {family!r}")


# ------------------------------------------------- curves over every M, O(n)


def _suffix_from(terms: np.ndarray) -> np.ndarray:
    """``out[k] = sum(terms[k:])`` with a trailing zero."""
    out = np.zeros(terms.size + 1)
    out[:-1] = np.cumsum(terms[::-1])[::-1]
    return out


def success_curve(family: str, n: int, q: Optional[float] = None, weights=None) -> np.ndarray:
    """Exact success probability for every ``M = 0..n-1`` in one pass."""
    if n < 1:
        raise BadParameter("n must be >= 1")
    m = np.arange(1, n)
    j1 = np.arange(1, n)  # j - 1 for j = 2..n
    out = np.empty(n)
    if family == "classical" or (family.startswith("mallows") and q == 1.0):
        suf = _suffix_from(1.0 / j1)  # suf[k] = sum_{j-1 >= k+1}
        out[0] = 1.0 / n
        out[1:] = m / n * suf[m - 1]
        return out
    if family == "luce-inv-down":
        w = _weights(weights)
        if w.n != n:
            raise BadParameter(f"{w.n} weights for n = {n}")
        th = w.as_array()
        prefix = np.cumsum(th)
        suf = _suffix_from(th[1:] / prefix[:-1])
        out[0] = th[0] / prefix[-1]
        out[1:] = prefix[m - 1] / prefix[-1] * suf[m - 1]
        return out
    if family not in ("mallows-up", "mallows-down"):
        raise BadParameter(f"unknown family {family!r}")
    if q is None:
        raise BadParameter(f"{family} needs q")
    _check_q(q)
    # down(q) = up(1/q); both are written through r = min(q', 1/q') < 1
    qq = q if family == "mallows-up" else 1.0 / q
    r = min(qq, 1.0 / qq)
    lr = math.log(r)
    head = _one_minus_pow(1, lr) / _one_minus_pow(n, lr)
    if qq < 1:
        # (1-r)/(1-r^n) r^(n-M-1) (1-r^M) sum 1/(1-r^(j-1))
        suf = _suffix_from(1.0 / _one_minus_pow(j1, lr))
        out[0] = head * math.exp((n - 1) * lr)
        out[1:] = head * np.exp((n - m - 1) * lr) * _one_minus_pow(m, lr) * suf[m - 1]
    else:
        # (1-r)/(1-r^n) (1-r^M) sum r^(j-1)/(1-r^(j-1))
        suf = _suffix_from(np.exp(j1 * lr) / _one_minus_pow(j1, lr))
        out[0] = head
        out[1:] = head * _one_minus_pow(m, lr) * suf[m - 1]
    return out


def optimize_threshold(
    family: Union[str, Callable[[int], float]],
    n: int,
    q: Optional[float] = None,
    weights=None,
) -> tuple[int, float]:
    """Smallest maximising ``M`` and the maximal success probability.

    ``family`` is a name understood by :func:`success_curve` or any callable
    ``M -> probability``.
    """
    if callable(family):
        vals = np.array([family(m) for m in range(n)])
    else:
        vals = success_curve(family, n, q=q, weights=weights)
    best = int(np.argmax(vals))
    return best, float(vals[best])


# ----------------------------------------------------------------- tail sums


def tail_sum(q: float, m: int, tol: float = 1e-14, direction=None) -> float:
    """``sum_{j>=M} 1/(q^j - 1)`` for ``q > 1`` or ``sum_{j>=M} q^j/(1 - q^j)`` for ``q < 1``.

    Both are ``sum r^j / (1 - r^j)`` with ``r = min(q, 1/q)``.  Terms shrink
    by at least a factor ``r``, so summation stops once the geometric bound on
    the remainder drops below ``tol`` times the partial sum; that bound's
    leading estimate is added back.  ``direction`` pins the series: ``max``
    requires ``q > 1`` and ``min`` requires ``q < 1``.
    """
    _check_q(q)
    if m < 1:
        raise BadParameter("tail sums start at M >= 1")
    if not tol > 0:
        raise BadParameter("tol must be > 0")
    if q == 1.0:
        raise BadParameter("the series diverges at q = 1")
    if direction is not None:
        d = RankDirection.parse(direction)
        if d is RankDirection.MAX and q < 1:
            raise BadParameter("the max-rank series needs q > 1")
        if d is RankDirection.MIN and q > 1:
            raise BadParameter("the min-rank series needs q < 1")
    lr = -abs(math.log(q))
    r = math.exp(lr)
    total = 0.0
    comp = 0.0
    start = m
    block = 256
    while True:
        j = np.arange(start, start + block, dtype=float)
        terms = np.exp(j * lr) / _one_minus_pow(j, lr)
        for t in terms:
            # Kahan summation: near q = 1 the series has many terms
            y = t - comp
            s = total + y
            comp = (s - total) - y
            total = s
            if t * r / (1.0 - r) <= tol * total:
                return total + t * r / (1.0 - r)
        start += block
        block = min(block * 2, 1 << 20)


# ------------------------------------------------------- asymptotic results


@dataclass(frozen=True)
class LimitResult:
    """Asymptotic optimal threshold and its limiting success probability.

    ``threshold_kind`` is one of ``fraction`` (``M* ~ value * n``), ``count``
    (``M* = value``), ``deficiency`` (``M* = n - value``), ``scaled-count``
    (``M* ~ value * n^alpha``) or ``scaled-deficiency``
    (``n - M* ~ value * n^alpha``).
    """

    threshold_kind: str
    value: float
    limit_prob: float
    regime: str = ""
    direction: str = ""
    sign: str = ""
    params: dict = field(default_factory=dict)
    co_optimal: Optional[float] = None

    def to_record(self) -> dict:
        rec = {
            "regime": self.regime,
            "direction": self.direction,
            "sign": self.sign,
            "params": dict(self.params),
            "threshold_kind": self.threshold_kind,
            "threshold_value": self.value,
            "limit_prob": self.limit_prob,
        }
        if self.co_optimal is not None:
            rec["co_optimal"] = self.co_optimal
        return rec


@dataclass(frozen=True)
class FixedQ:
    q: float


@dataclass(frozen=True)
class CriticalWindow:
    c: float
    sign: str  # "+" or "-": q_n = 1 +- c/n


@dataclass(frozen=True)
class Intermediate:
    c: float
    alpha: float
    sign: str


@dataclass(frozen=True)
class Uniform:
    pass


AsymptoticRegime = Union[FixedQ, CriticalWindow, Intermediate, Uniform]


def _parse_sign(sign) -> str:
    s = str(sign).strip().lower()
    if s in ("+", "plus", "p", "1", "+1"):
        return "+"
    if s in ("-", "minus", "m", "-1"):
        return "-"
    raise BadParameter(f"sign must be plus or minus, got {sign!r}")


def fixed_q_optimum(q: float, direction, eq_tol: float = 1e-12) -> LimitResult:
    """Large-n optimum for a fixed ``q != 1``.

    ``(max, q > 1)`` and ``(min, q < 1)`` give a bounded ``M*`` from the tail
    sum criterion; the other two give ``M* = n - L`` with ``L`` the integer in
    a unit-length interval.  Ties at the criterion boundary are reported in
    ``co_optimal``.
    """
    _check_q(q)
    direction = RankDirection.parse(direction)
    if q == 1.0:
        raise BadParameter("q = 1 belongs to the uniform / critical regimes")
    params = {"q": q}
    bounded = (direction is RankDirection.MAX) == (q > 1)
    if bounded:
        # both cases are sum r^j/(1-r^j) >= 1/(1-r) with r = min(q, 1/q)
        r = q if q < 1 else 1.0 / q
        thresh = 1.0 / (1.0 - r)
        s = tail_sum(q, 1)
        if s < thresh and not math.isclose(s, thresh, rel_tol=eq_tol, abs_tol=0.0):
            return LimitResult("count", 0.0, 1.0 - r, "fixed-q", direction.value, "", params)
        m = 1
        # walk forward while the next tail still clears the threshold
        while True:
            t = r ** m / (1.0 - r ** m)
            nxt = s - t
            if nxt >= thresh or math.isclose(nxt, thresh, rel_tol=eq_tol, abs_tol=0.0):
                s, m = nxt, m + 1
            else:
                break
        limit = (1.0 - r) * (1.0 - r ** m) * s
        co = float(m - 1) if math.isclose(s, thresh, rel_tol=eq_tol, abs_tol=0.0) else None
        return LimitResult("count", float(m), limit, "fixed-q", direction.value, "", params, co)
    # deficiency: L in [r/(1-r), 1/(1-r)) with r = q (max) or 1/q (min)
    r = q if q < 1 else 1.0 / q
    lo = r / (1.0 - r)
    L = math.ceil(lo)
    if math.isclose(L - 1, lo, rel_tol=eq_tol, abs_tol=eq_tol) and L - 1 >= 1:
        L -= 1
    L = max(L, 1)
    limit = (1.0 - r) * r ** (L - 1) * L
    co = float(L + 1) if math.isclose(L, lo, rel_tol=eq_tol, abs_tol=eq_tol) else None
    return LimitResult("deficiency", float(L), limit, "fixed-q", direction.value, "", params, co)


def _fraction_first(c: float) -> float:
    """``(1/c) log(1 + (e^c - 1)/e)``."""
    if c > 1.0:
        # 1 + (e^c - 1)/e = e^(c-1) (1 + (e - 1) e^-c)
        return (c - 1.0 + math.log1p((math.e - 1.0) * math.exp(-c))) / c
    return math.log1p(math.expm1(c) / math.e) / c


def _fraction_second(c: float) -> float:
    """``(1/c) log(1 + (1 - e^-c)/(e - 1 + e^-c))``."""
    return math.log1p(-math.expm1(-c) / (math.e - 1.0 + math.exp(-c))) / c


def critical_window_fraction(c: float, direction, sign) -> LimitResult:
    """Optimal ``b* = lim M*/n`` for ``q_n = 1 +- c/n``; the limit is always ``1/e``."""
    if not (c > 0) or not math.isfinite(c):
        raise BadParameter("c must be a finite positive number")
    direction = RankDirection.parse(direction)
    sign = _parse_sign(sign)
    first = (direction is RankDirection.MAX) == (sign == "-")
    b = _fraction_first(c) if first else _fraction_second(c)
    return LimitResult("fraction", b, INV_E, "critical", direction.value, sign, {"c": c})


def intermediate_regime(c: float, alpha: float, direction, sign) -> LimitResult:
    """Threshold scaling for ``q_n = 1 +- c/n^alpha``, ``0 < alpha < 1``."""
    if not (c > 0) or not math.isfinite(c):
        raise BadParameter("c must be a finite positive number")
    if not 0 < alpha < 1:
        raise BadParameter("alpha must lie in (0, 1)")
    direction = RankDirection.parse(direction)
    sign = _parse_sign(sign)
    params = {"c": c, "alpha": alpha}
    if (direction is RankDirection.MAX) == (sign == "-"):
        return LimitResult("scaled-deficiency", 1.0 / c, INV_E, "intermediate", direction.value, sign, params)
    return LimitResult(
        "scaled-count", ONE_MINUS_LOG_E_MINUS_1 / c, INV_E, "intermediate", direction.value, sign, params
    )


def sukhatme_optimal_fraction(kind: str = "standard") -> LimitResult:
    if kind == "standard":
        b = 1.0 - math.sqrt(1.0 - INV_E)
    elif kind == "reverse":
        b = math.exp(-0.5)
    else:
        raise BadParameter(f"kind must be standard or reverse, got {kind!r}")
    return LimitResult("fraction", b, INV_E, "sukhatme", "min", "", {"kind": kind})


def asymptotic_optimum(regime: AsymptoticRegime, direction) -> LimitResult:
    if isinstance(regime, FixedQ):
        return fixed_q_optimum(regime.q, direction)
    if isinstance(regime, CriticalWindow):
        return critical_window_fraction(regime.c, direction, regime.sign)
    if isinstance(regime, Intermediate):
        return intermediate_regime(regime.c, regime.alpha, direction, regime.sign)
    if isinstance(regime, Uniform):
        d = RankDirection.parse(direction)
        return LimitResult("fraction", INV_E, INV_E, "uniform", d.value, "", {})
    raise BadParameter(f"unknown regime {regime!r}")


# ------------------------------------------------------------- limit curves


def h_critical(b: float, c: float, sign="+") -> float:
    """Limit of the max-rank success probability at ``M ~ b n`` for ``q = 1 +- c/n``.

    Equivalently the min-rank limit with the opposite sign.
    """
    if not 0 < b <= 1:
        raise DomainError("b must lie in (0, 1]")
    if not c > 0:
        raise DomainError("c must be > 0")
    k = c if _parse_sign(sign) == "+" else -c
    num = -math.expm1(-b * k)
    den = -math.expm1(-k)
    ratio = num / den
    return ratio * -math.log(ratio)


def h_intermediate(b: float, c: float) -> float:
    if not b > 0:
        raise DomainError("b must be > 0")
    if not c > 0:
        raise DomainError("c must be > 0")
    x = -math.expm1(-c * b)
    return -x * math.log(x)


def g_fixed_q(m: int, q: float) -> float:
    """``G(M) = (1 - q^-M) sum_{j>=M} 1/(q^j - 1)``, ``G(0) = 1``, for ``q > 1``.

    The limiting success probability at fixed ``M`` is ``(q-1)/q * G(M)``.
    """
    if not q > 1:
        raise DomainError("G is defined for q > 1")
    if m < 0:
        raise DomainError("M must be >= 0")
    if m == 0:
        return 1.0
    return -math.expm1(-m * math.log(q)) * tail_sum(q, m)


def h_sukhatme(b: float) -> float:
    if not 0 < b <= 1:
        raise DomainError("b must lie in (0, 1]")
    x = 2 * b - b * b
    return -x * math.log(x)


def h_reverse_sukhatme(b: float) -> float:
    if not 0 < b <= 1:
        raise DomainError("b must lie in (0, 1]")
    return -2 * b * b * math.log(b)


LIMIT_CURVES = {
    "critical": h_critical,
    "intermediate": h_intermediate,
    "fixed-q": g_fixed_q,
    "sukhatme": h_sukhatme,
    "reverse-sukhatme": h_reverse_sukhatme,
}


def limit_curve(kind: str, x, **params) -> float:
    try:
        f = LIMIT_CURVES[kind]
    except KeyError:
        raise DomainError(f"unknown limit curve {kind!r}") from None
    return f(x, **params)
