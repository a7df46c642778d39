"""Command-line front end: ``stopsmith <command> [flags]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import closed_forms as cf
from . import models
from .engine import (
    DEFAULT_CHUNK,
    DEFAULT_SEED,
    exact_success_by_enumeration,
    monte_carlo_success,
)
from .errors import BadParameter, StopsmithError
from .models import ModelSpec, WeightVector
from .perm import Permutation, RankDirection

DEFAULT_TRIALS = 10**6
DEFAULT_TOL = 1e-14
SAMPLE_MODELS = ("mallows", "luce", "luce-inv", "p-shifted", "uniform", "exp-reduce", "sukhatme-gap")
# above this size single draws beat the vectorised decoder
BATCH_MAX_N = 256


class UsageError(StopsmithError):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(x: float) -> float:
    """Round to 15 significant digits so json and csv carry the same value."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(format(x, ".15g"))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".15g")
    if isinstance(v, dict):
        return ";".join(f"{k}={_csv_cell(x)}" for k, x in v.items())
    return str(v)


def _emit(records, fmt: str, out, header: Optional[Sequence[str]] = None, scalar: bool = False) -> None:
    """Write one record, a list of records, or a bare scalar."""
    if fmt == "json":
        out.write(json.dumps(_clean(records)) + "\n")
        return
    rows = records if isinstance(records, list) else [records]
    if scalar:
        out.write(f"{header[0] if header else 'value'}\n{_csv_cell(float(records))}\n")
        return
    header = list(header or rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_csv_cell(r.get(h, "")) for h in header])
    out.write(buf.getvalue())


# ------------------------------------------------------------ flag handling


def _add_common(
    p: argparse.ArgumentParser, *, model=False, family=False, direction=False, m=False, formats=("json", "csv")
):
    p.add_argument("--n", type=int, help="permutation size")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    if model:
        p.add_argument("--model", required=True)
    if family:
        p.add_argument("--family", required=True, choices=cf.EXACT_FAMILIES)
    if model or family:
        p.add_argument("--q", type=float)
        p.add_argument("--weights", help="1,2,3 | file | unit | geom:<q> | sukhatme | rev-sukhatme")
    if direction:
        p.add_argument("--direction", default="min", choices=("min", "max"))
    if m:
        p.add_argument("--m", type=int, required=True, help="number of items rejected")


def _need_n(args) -> int:
    if args.n is None:
        if getattr(args, "weights", None):
            w = WeightVector.parse(args.weights)
            return w.n
        raise UsageError("--n is required")
    if args.n < 1:
        raise BadParameter("--n must be >= 1")
    return args.n


def _weights(args, n: int) -> WeightVector:
    if not args.weights:
        raise UsageError("--weights is required for this model")
    return WeightVector.parse(args.weights, n=n)


def _model_spec(args) -> ModelSpec:
    n = _need_n(args)
    model = args.model
    if model == "mallows":
        if args.q is None:
            raise UsageError("--q is required for mallows")
        return ModelSpec.mallows(n, args.q)
    if model in ("luce", "luce-inv", "p-shifted"):
        w = _weights(args, n)
        return ModelSpec(model, n, weights=w)
    if model == "uniform":
        return ModelSpec.uniform(n)
    raise UsageError(f"unknown model {model!r}")


def _family_params(args, n: int) -> dict:
    fam = args.family
    if fam.startswith("mallows"):
        if args.q is None:
            raise UsageError(f"--q is required for {fam}")
        return {"q": args.q}
    if fam == "luce-inv-down":
        return {"weights": _weights(args, n)}
    return {}


# ----------------------------------------------------------------- commands


def cmd_sample(args, out) -> int:
    n = _need_n(args)
    if args.count < 1:
        raise BadParameter("--count must be >= 1")
    rng = np.random.default_rng(args.seed)
    model = args.model
    if model not in SAMPLE_MODELS:
        raise UsageError(f"unknown model {model!r}; choose from {', '.join(SAMPLE_MODELS)}")
    if model == "exp-reduce":
        w = _weights(args, n)
        batch = lambda size: models.exponential_reduction_sample_batch(w, size, rng)
        single = lambda: models.exponential_reduction_sample(w, rng)
    elif model == "sukhatme-gap":
        batch = lambda size: models.sukhatme_gap_sample_batch(n, size, rng)
        single = lambda: models.sukhatme_gap_sample(n, rng)
    else:
        spec = _model_spec(args)
        batch = lambda size: spec.sample_batch(size, rng)
        singles = {
            "mallows": lambda: models.mallows_sample(n, spec.q, rng),
            "luce": lambda: models.luce_sample(spec.weights, rng),
            "luce-inv": lambda: models.luce_inv_sample(spec.weights, rng),
            "p-shifted": lambda: models.p_shifted_sample(spec.weights, rng),
            "uniform": lambda: Permutation(tuple((rng.permutation(n) + 1).tolist())),
        }
        single = singles[model]
    if n <= BATCH_MAX_N:
        rows = batch(args.count)
        out.write("".join(" ".join(map(str, r)) + "\n" for r in rows.tolist()))
    else:
        for _ in range(args.count):
            out.write(str(single()) + "\n")
    return 0


def cmd_pmf(args, out) -> int:
    perm = Permutation.parse(args.perm)
    if args.n is None:
        args.n = perm.n
    spec = _model_spec(args)
    if spec.n != perm.n:
        raise BadParameter(f"permutation has size {perm.n}, model has n = {spec.n}")
    value = spec.pmf(perm)
    _emit(value, args.format, out, header=["probability"], scalar=True)
    return 0


def cmd_exact(args, out) -> int:
    n = _need_n(args)
    value = cf.exact(args.family, n, args.m, **_family_params(args, n))
    _emit(value, args.format, out, header=["probability"], scalar=True)
    return 0


def cmd_enumerate(args, out) -> int:
    spec = _model_spec(args)
    if args.list:
        rows = [{"permutation": str(p), "probability": pr} for p, pr in models.enumerate_support(spec)]
        _emit(rows, args.format, out, header=["permutation", "probability"])
        return 0
    if args.m is None:
        raise UsageError("--m is required unless --list is given")
    value = exact_success_by_enumeration(spec, args.m, args.direction)
    rec = {
        "family": spec.family,
        "n": spec.n,
        "m": args.m,
        "direction": args.direction,
        "params": spec.describe(),
        "probability": value,
    }
    _emit(rec, args.format, out)
    return 0


def cmd_simulate(args, out) -> int:
    spec = _model_spec(args)
    est = monte_carlo_success(
        spec, args.m, args.direction, trials=args.trials, seed=args.seed, chunk_size=args.chunk_size
    )
    rec = est.to_record()
    header = ["family", "n", "m", "direction", "trials", "successes", "p_hat", "std_err", "seed"]
    ordered = {k: rec[k] for k in header}
    ordered["params"] = rec["params"]
    _emit(ordered, args.format, out, header=header + ["params"])
    return 0


def cmd_optimize(args, out) -> int:
    n = _need_n(args)
    m, value = cf.optimize_threshold(args.family, n, **_family_params(args, n))
    rec = {"family": args.family, "n": n, "m": m, "value": value}
    _emit(rec, args.format, out)
    return 0


def cmd_asymptotic(args, out) -> int:
    regime = args.regime
    direction = args.direction
    if regime == "fixed":
        if args.q is None:
            raise UsageError("--q is required for the fixed regime")
        res = cf.fixed_q_optimum(args.q, direction)
    elif regime == "critical":
        res = cf.critical_window_fraction(_need(args.c, "--c"), direction, _need(args.sign, "--sign"))
    elif regime == "intermediate":
        res = cf.intermediate_regime(
            _need(args.c, "--c"), _need(args.alpha, "--alpha"), direction, _need(args.sign, "--sign")
        )
    elif regime == "sukhatme":
        res = cf.sukhatme_optimal_fraction(args.kind)
    else:
        res = cf.asymptotic_optimum(cf.Uniform(), direction)
    _emit(res.to_record(), args.format, out)
    return 0


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _parse_m_range(text: str, n: int) -> range:
    text = text.strip()
    if text == "all":
        return range(n)
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo = int(lo) if lo else 0
        hi = int(hi) if hi else n - 1
        return range(lo, hi + 1)
    return range(int(text), int(text) + 1)


def cmd_sweep(args, out) -> int:
    ns = [int(x) for x in args.n_list.replace(",", " ").split()] if args.n_list else [_need_n(args)]
    direction = {"mallows-up": "max", "mallows-down": "min", "luce-inv-down": "min", "classical": "min"}[args.family]
    rows = []
    for n in ns:
        if args.family.startswith("mallows"):
            grid = args.q_grid or (str(args.q) if args.q is not None else None)
            if grid is None:
                raise UsageError("--q or --q-grid is required")
            params = [{"q": float(x)} for x in grid.replace(",", " ").split()]
        elif args.family == "luce-inv-down":
            params = [{"weights": WeightVector.parse(s, n=n)} for s in _need(args.weights, "--weights").split(";")]
        else:
            params = [{}]
        for prm in params:
            curve = cf.success_curve(args.family, n, **prm)
            label = (
                format(prm["q"], ".15g") if "q" in prm else prm["weights"].describe() if prm else ""
            )
            for m in _parse_m_range(args.m, n):
                if not 0 <= m < n:
                    raise BadParameter(f"threshold M = {m} outside 0..{n - 1}")
                rows.append(
                    {
                        "family": args.family,
                        "n": n,
                        "m": m,
                        "q_or_weights": label,
                        "direction": direction,
                        "probability": float(curve[m]),
                    }
                )
    fmt = args.format
    _emit(rows, fmt, out, header=["family", "n", "m", "q_or_weights", "direction", "probability"])
    return 0


def cmd_verify(args, out) -> int:
    from .verify import run_suite

    results = run_suite(level=args.level, seed=args.seed)
    if args.format == "json":
        out.write(json.dumps(_clean([r._asdict() for r in results])) + "\n")
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}\n")
    return 0 if all(r.passed for r in results) else 1


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stopsmith", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sample", help="draw permutations, one per line")
    _add_common(p, model=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pmf", help="probability of one permutation")
    _add_common(p, model=True)
    p.add_argument("--perm", required=True, help='e.g. "3 1 4 2"')
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("exact", help="closed-form success probability")
    _add_common(p, family=True, m=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("enumerate", help="brute-force success probability (n <= 9)")
    _add_common(p, model=True, direction=True)
    p.add_argument("--m", type=int)
    p.add_argument("--list", action="store_true", help="print the whole support instead")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", help="Monte Carlo success estimate")
    _add_common(p, model=True, direction=True, m=True)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="finite-n optimal threshold")
    _add_common(p, family=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("asymptotic", help="large-n optimal threshold and limit")
    _add_common(p)
    p.add_argument("--regime", required=True, choices=("fixed", "critical", "intermediate", "sukhatme", "uniform"))
    p.add_argument("--direction", default="max", choices=("min", "max"))
    p.add_argument("--sign", choices=("plus", "minus", "+", "-"))
    p.add_argument("--c", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--kind", default="standard", choices=("standard", "reverse"))
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("sweep", help="exact probabilities over M and a parameter grid (csv)")
    _add_common(p, family=True)
    p.set_defaults(format="csv")
    p.add_argument("--m", default="all", help="all | a:b | single M")
    p.add_argument("--n-list", help="comma-separated sizes, overrides --n")
    p.add_argument("--q-grid", help="comma-separated q values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the self-check suite")
    _add_common(p, formats=("text", "json"))
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "json"
    if "--format" in argv:
        i = argv.index("--format")
        if i + 1 < len(argv):
            fmt = argv[i + 1]
    try:
        args = build_parser().parse_args(argv)
        fmt = getattr(args, "format", fmt)
        if getattr(args, "output", None):
            with open(args.output, "w", newline="") as fh:
                return args.func(args, fh)
        return args.func(args, stdout)
    except StopsmithError as exc:
        if fmt == "json":
            stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        else:
            stderr.write(f"error: {exc.code}: {exc}\n")
        return 2 if isinstance(exc, UsageError) else 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
