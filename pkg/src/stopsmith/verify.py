"""Self-check suite behind ``stopsmith verify``.

``quick`` runs the oracle comparisons at small sizes with short Monte Carlo
runs.  ``full`` runs every release criterion at its stated size and tolerance.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from . import closed_forms as cf
from . import models
from .engine import (
    exact_success_curve,
    bruss_odds_threshold,
    independence_defect,
    monte_carlo_success,
    record_joint_law,
    record_marginals,
)
from .models import ModelSpec, WeightVector

INV_E = math.exp(-1.0)
Q_GRID = (0.3, 0.7, 1.5, 3.0)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def weight_grid(n: int) -> list[WeightVector]:
    return [
        WeightVector.unit(n),
        WeightVector.geometric(0.6, n),
        WeightVector.geometric(2.0, n),
        WeightVector.sukhatme(n),
        WeightVector.reverse_sukhatme(n),
        WeightVector(tuple(float(i) for i in range(1, n + 1)), label="linear"),
    ]


def monte_carlo_configs() -> list[tuple[ModelSpec, int, str]]:
    return [
        (ModelSpec.uniform(4), 1, "min"),
        (ModelSpec.mallows(2, 2.0), 0, "min"),
        (ModelSpec.mallows(6, 0.5), 2, "max"),
        (ModelSpec.mallows(7, 1.5), 3, "min"),
        (ModelSpec.mallows(5, 0.7), 1, "min"),
        (ModelSpec.mallows(7, 3.0), 0, "max"),
        (ModelSpec.luce_inv(WeightVector.geometric(0.6, 5)), 2, "min"),
        (ModelSpec.luce_inv(WeightVector.sukhatme(6)), 1, "min"),
        (ModelSpec.luce_inv(WeightVector.reverse_sukhatme(7)), 4, "max"),
        (ModelSpec.luce((1.0, 2.0, 3.0)), 1, "max"),
        (ModelSpec.luce(WeightVector.geometric(2.0, 5)), 2, "min"),
        (ModelSpec.p_shifted((1.0, 2.0, 3.0, 4.0)), 1, "max"),
    ]


def sampler_cases(n: int) -> list[tuple[str, Callable, ModelSpec]]:
    geo = WeightVector.geometric(0.6, n)
    lin = WeightVector.reverse_sukhatme(n)
    return [
        ("mallows_sample", lambda size, rng: models.mallows_sample_batch(n, 2.0, size, rng), ModelSpec.mallows(n, 2.0)),
        ("luce_sample", lambda size, rng: models.luce_sample_batch(geo, size, rng), ModelSpec.luce(geo)),
        ("luce_inv_sample", lambda size, rng: models.luce_inv_sample_batch(geo, size, rng), ModelSpec.luce_inv(geo)),
        (
            "p_shifted_sample",
            lambda size, rng: models.p_shifted_sample_batch(WeightVector.geometric(2.0, n), size, rng),
            ModelSpec.mallows(n, 2.0),
        ),
        (
            "exponential_reduction_sample",
            lambda size, rng: models.exponential_reduction_sample_batch(lin, size, rng),
            ModelSpec.luce_inv(lin),
        ),
        (
            "sukhatme_gap_sample",
            lambda size, rng: models.sukhatme_gap_sample_batch(n, size, rng),
            ModelSpec.luce_inv(WeightVector.sukhatme(n)),
        ),
    ]


def _oracle_equivalence(n_max: int) -> CheckResult:
    worst = 0.0
    for n in range(2, n_max + 1):
        for q in Q_GRID:
            for fam, d in (("mallows-up", "max"), ("mallows-down", "min")):
                oracle = exact_success_curve(ModelSpec.mallows(n, q), d)
                closed = [cf.exact(fam, n, m, q=q) for m in range(n)]
                worst = max(worst, float(np.max(np.abs(oracle - closed))))
        for w in weight_grid(n):
            oracle = exact_success_curve(ModelSpec.luce_inv(w), "min")
            closed = [cf.luce_inv_down_exact(n, m, w) for m in range(n)]
            worst = max(worst, float(np.max(np.abs(oracle - closed))))
        oracle = exact_success_curve(ModelSpec.uniform(n), "min")
        closed = [cf.classical_exact(n, m) for m in range(n)]
        worst = max(worst, float(np.max(np.abs(oracle - closed))))
    return CheckResult(f"oracle equivalence n<={n_max}", worst <= 1e-12, f"max gap {worst:.3e}")


def _coincidence(n_max: int) -> CheckResult:
    worst = 0.0
    for q in (0.5, 0.9, 1.1, 2.0):
        for n in range(1, n_max + 1):
            w = WeightVector.geometric(q, n)
            for m in range(n):
                gap = abs(cf.luce_inv_down_exact(n, m, w) - cf.mallows_down_exact(n, m, q))
                worst = max(worst, gap)
    return CheckResult(f"mallows-luce coincidence n<={n_max}", worst <= 1e-10, f"max gap {worst:.3e}")


def _duality(n_max: int) -> CheckResult:
    worst = 0.0
    for q in (0.5, 0.9, 1.1, 2.0):
        for n in range(1, n_max + 1):
            for m in range(n):
                gap = abs(cf.mallows_down_exact(n, m, q) - cf.mallows_up_exact(n, m, 1.0 / q))
                worst = max(worst, gap)
    return CheckResult(f"min/max duality n<={n_max}", worst <= 1e-10, f"max gap {worst:.3e}")


def _classical() -> CheckResult:
    n = 10**4
    m, v = cf.optimize_threshold("classical", n)
    ok = 0.36 <= m / n <= 0.38 and abs(v - INV_E) <= 0.01
    return CheckResult("classical baseline", ok, f"M*/n={m / n:.5f} value={v:.6f}")


def _sukhatme(n: int) -> CheckResult:
    ms, vs = cf.optimize_threshold("luce-inv-down", n, weights=WeightVector.sukhatme(n))
    mr, vr = cf.optimize_threshold("luce-inv-down", n, weights=WeightVector.reverse_sukhatme(n))
    ok = (
        abs(ms / n - 0.204887) <= 0.005
        and abs(mr / n - 0.606531) <= 0.005
        and abs(vs - INV_E) <= 0.005
        and abs(vr - INV_E) <= 0.005
    )
    return CheckResult(
        f"sukhatme limits n={n}", ok, f"standard {ms / n:.5f}/{vs:.5f} reverse {mr / n:.5f}/{vr:.5f}"
    )


def _fixed_q() -> CheckResult:
    m, v = cf.optimize_threshold("mallows-up", 50, q=2.0)
    lim = cf.fixed_q_optimum(2.0, "max")
    ok = m == 0 and abs(v - 0.5) <= 1e-6 and lim.value == 0 and abs(lim.limit_prob - 0.5) <= 1e-12
    return CheckResult("fixed q>1 optimum", ok, f"M*={m} value={v:.9f} limit M*={lim.value:g}")


def _critical() -> CheckResult:
    n = 10**5
    m, v = cf.optimize_threshold("mallows-up", n, q=1.0 - 1.0 / n)
    target = math.log(2.0 - INV_E)
    ok = abs(m / n - target) <= 0.01 and abs(v - INV_E) <= 0.01
    return CheckResult("critical window", ok, f"M*/n={m / n:.5f} target={target:.5f} value={v:.6f}")


def _monte_carlo(trials: int, seed: int) -> CheckResult:
    bad = []
    for spec, m, d in monte_carlo_configs():
        truth = float(exact_success_curve(spec, d)[m])
        ok = False
        for attempt in range(2):
            est = monte_carlo_success(spec, m, d, trials=trials, seed=seed + attempt)
            if abs(est.p_hat - truth) <= 4 * est.std_err:
                ok = True
                break
        if not ok:
            bad.append(f"{spec.family}(n={spec.n},M={m},{d})")
    detail = "all within 4 std_err" if not bad else "off: " + ", ".join(bad)
    return CheckResult(f"monte carlo consistency ({trials} trials)", not bad, detail)


def _independence(n_max: int) -> CheckResult:
    worst = 0.0
    for n in range(2, n_max + 1):
        for q in Q_GRID:
            for d in ("min", "max"):
                worst = max(worst, independence_defect(ModelSpec.mallows(n, q), d))
        for w in weight_grid(n):
            worst = max(worst, independence_defect(ModelSpec.luce_inv(w), "min"))
    dep = min(
        independence_defect(ModelSpec.luce((1.0, 2.0, 3.0)), "max"),
        independence_defect(ModelSpec.luce_inv((1.0, 2.0, 3.0)), "max"),
    )
    ok = worst <= 1e-12 and dep > 1e-4
    return CheckResult("record independence", ok, f"independent max {worst:.2e}, dependent min {dep:.2e}")


def _sampler_laws(n: int, draws: int, tv_max: float, seed: int) -> CheckResult:
    worst, worst_name = 0.0, ""
    for i, (name, draw, spec) in enumerate(sampler_cases(n)):
        rng = np.random.default_rng([seed, i])
        tv = models.empirical_tv(draw(draws, rng), spec)
        if tv > worst:
            worst, worst_name = tv, name
    return CheckResult(
        f"sampler laws n={n} ({draws} draws)", worst <= tv_max, f"max TV {worst:.4f} ({worst_name})"
    )


def _odds(n_max: int) -> CheckResult:
    misses = []
    cases = []
    for n in range(2, n_max + 1):
        for q in Q_GRID:
            cases += [(ModelSpec.mallows(n, q), "min"), (ModelSpec.mallows(n, q), "max")]
        cases += [(ModelSpec.luce_inv(w), "min") for w in weight_grid(n)]
    for spec, d in cases:
        curve = exact_success_curve(spec, d)
        best = set(np.flatnonzero(curve >= curve.max() - 1e-12).tolist())
        m = bruss_odds_threshold(record_marginals(record_joint_law(spec, d)))
        if m not in best:
            misses.append(f"{spec.family}(n={spec.n},{spec.describe()},{d})")
    return CheckResult("odds threshold agreement", not misses, "ok" if not misses else "; ".join(misses[:3]))


def _boundary(full: bool) -> CheckResult:
    small = [
        cf.critical_window_fraction(1e-6, d, s).value for d in ("max", "min") for s in ("+", "-")
    ]
    ok = all(abs(b - INV_E) <= 1e-4 for b in small)
    big_c = 50.0 if full else 1000.0
    first = [cf.critical_window_fraction(big_c, "max", "-").value, cf.critical_window_fraction(big_c, "min", "+").value]
    second = [cf.critical_window_fraction(big_c, "max", "+").value, cf.critical_window_fraction(big_c, "min", "-").value]
    ok = ok and all(abs(b - 1.0) <= 0.01 for b in first) and all(abs(b) <= 0.01 for b in second)
    return CheckResult(
        f"critical boundary limits (c=1e-6, c={big_c:g})",
        ok,
        f"small-c max gap {max(abs(b - INV_E) for b in small):.2e}; "
        f"c={big_c:g}: first {first[0]:.4f}, second {second[0]:.4f}",
    )


def run_suite(level: str = "quick", seed: int = 1729) -> list[CheckResult]:
    full = level == "full"
    return [
        _oracle_equivalence(7 if full else 5),
        _coincidence(200 if full else 50),
        _duality(200 if full else 50),
        _classical(),
        _sukhatme(10**5 if full else 10**4),
        _fixed_q(),
        _critical(),
        _monte_carlo(10**6 if full else 10**4, seed),
        _independence(6 if full else 4),
        _sampler_laws(5, 10**6, 0.005, seed) if full else _sampler_laws(3, 10**5, 0.01, seed),
        _odds(7 if full else 5),
        _boundary(full),
    ]
