"""Command-line interface.

Every command writes one result to stdout, either a key-sorted JSON envelope
(``schema_version``, ``command``, ``inputs_echo``, ``results``, ``warnings``)
or CSV with 10 significant digits. Diagnostics go to stderr.

Exit codes: 0 success, 1 usage, 2 data, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
import warnings

import numpy as np

from . import __version__, competitors, datasets, estimation, gof, mbur, simulation
from .errors import ConvergenceError, DataError, DegenerateSampleError, DomainError, UnitfitError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# argument types
# --------------------------------------------------------------------------

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text):
    v = int(text) if text.lstrip("-").isdigit() else None
    if v is None or v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _level(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"level must be in (0, 1), got {v}")
    return v


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 2:
        raise argparse.ArgumentTypeError("sample sizes must be integers >= 2")
    return vals


def _methods(text):
    if text == "all":
        return list(estimation.METHODS)
    vals = [t.strip() for t in text.split(",") if t.strip()]
    bad = [m for m in vals if m not in estimation.METHODS]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from all, {', '.join(estimation.METHODS)}")
    return vals


def parse_grid(text: str, closed: bool) -> np.ndarray:
    """``lo:hi:num`` or a comma list.

    On the open unit interval (``closed=False``) the range form yields
    ``num`` interior points ``lo + (hi-lo) k/(num+1)``; otherwise it is
    ``linspace(lo, hi, num)``.
    """
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be lo:hi:num, got {text!r}")
        try:
            lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"grid must be lo:hi:num, got {text!r}") from None
        if num < 1 or not hi > lo:
            raise UsageError(f"grid needs hi > lo and num >= 1, got {text!r}")
        if closed:
            return np.linspace(lo, hi, num)
        return lo + (hi - lo) * np.arange(1, num + 1) / (num + 1.0)
    try:
        return np.array(_float_list(text))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.10g}"
    if v is None:
        return ""
    return str(v)


def _write_csv(rows: list, out) -> None:
    if not rows:
        return
    cols = list(rows[0])
    for r in rows[1:]:
        cols += [c for c in r if c not in cols]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])


def _flatten(d: dict, prefix="") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            if v and isinstance(v[0], (list, tuple)):
                for i, row in enumerate(v):
                    for j, x in enumerate(row):
                        out[f"{key}.{i}.{j}"] = x
            else:
                for i, x in enumerate(v):
                    out[f"{key}.{i}"] = x
        else:
            out[key] = v
    return out


class Outcome:
    def __init__(self, command, inputs, results, rows=None, code=EXIT_OK):
        self.command = command
        self.inputs = inputs
        self.results = results
        self.rows = rows
        self.code = code
        self.warnings = []

    def emit(self, fmt: str, out) -> None:
        if fmt == "csv":
            _write_csv(self.rows if self.rows is not None else [_flatten(_clean(self.results))], out)
            for w in self.warnings:
                print(f"warning: {w}", file=sys.stderr)
            return
        env = {"schema_version": SCHEMA_VERSION, "command": self.command,
               "inputs_echo": self.inputs, "results": self.results, "warnings": self.warnings}
        json.dump(_clean(env), out, sort_keys=True, indent=2, allow_nan=False)
        out.write("\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _load(args):
    return datasets.resolve(args.data, args.column, args.delimiter)


def _data_echo(args, ds):
    return {"data": args.data, "column": args.column, "delimiter": args.delimiter, "n": ds.n}


def _gof_block(s, model, exact_ks):
    d = gof.ks_statistic(s, model)
    p = gof.ks_pvalue(d, s.n, exact=exact_ks)
    ic = gof.info_criteria(model.loglik(s), model.k, s.n)
    return {"ks": d, "ks_pvalue": p, "ks_reject_5pct": p < 0.05,
            "ad": gof.ad_statistic(s, model), "cvm": gof.cvm_statistic(s, model), **ic._asdict()}


def cmd_fit(args) -> Outcome:
    if args.dist != "mbur" and args.method != "mle":
        raise UsageError(f"--dist {args.dist} supports only --method mle")
    ds = _load(args)
    s = ds.sample()
    if args.dist == "mbur":
        kw = {"spacings": args.mps_spacings} if args.method == "mps" else {}
        fit = estimation.fit(args.method, s, level=args.ci, **kw)
    else:
        fit = competitors.fit_mle_competitor(args.dist, s, level=args.ci)
    res = fit.to_dict()
    code = EXIT_OK
    if fit.converged:
        res.update(_gof_block(s, competitors.make_dist(args.dist, fit.values), args.exact_ks))
    else:
        code = EXIT_CONVERGENCE
    inputs = {**_data_echo(args, ds), "dist": args.dist, "method": args.method, "ci": args.ci,
              "exact_ks": args.exact_ks}
    if args.method == "mps":
        inputs["mps_spacings"] = args.mps_spacings
    out = Outcome("fit", inputs, res, code=code)
    if not fit.converged:
        out.warnings.append(f"fit did not converge: {fit.message}")
    return out


def _parse_params(dist, text):
    try:
        vals = _float_list(text)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"--params: {exc}") from None
    return competitors.make_dist(dist, vals)


def cmd_gof(args) -> Outcome:
    ds = _load(args)
    s = ds.sample()
    warn = []
    if args.params is None:
        fit = competitors.fit_mle_competitor(args.dist, s)
        if not fit.converged:
            raise ConvergenceError(f"fit did not converge: {fit.message}", best=fit.values)
        model = competitors.make_dist(args.dist, fit.values)
        warn.append("no --params given; using the maximum-likelihood fit")
    else:
        model = _parse_params(args.dist, args.params)
    seed, drawn = _resolve_seed(args.seed)
    res = _gof_block(s, model, args.exact_ks)
    res["params"] = dict(zip(model.param_names, model.params))
    res["loglik"] = model.loglik(s)
    mc = gof.mc_reference_all(model, s.n, args.mc_reps, args.mode, seed) if args.mc_reps else {}
    res["mc"] = {}
    for stat, ref in mc.items():
        obs = res[stat]
        res["mc"][stat] = {"quantiles": {f"{p:g}": q for p, q in ref.quantiles.items()},
                           "pvalue": ref.pvalue(obs), "replicates": ref.replicates, "dropped": ref.dropped}
    inputs = {**_data_echo(args, ds), "dist": args.dist, "params": list(model.params),
              "mc_reps": args.mc_reps, "mode": args.mode, "seed": seed, "seed_drawn": drawn,
              "exact_ks": args.exact_ks}
    out = Outcome("gof", inputs, res)
    out.warnings += warn
    if args.format == "csv":
        rows = []
        for stat in gof.STATISTICS:
            row = {"statistic": stat, "value": res[stat]}
            if stat == "ks":
                row["asymptotic_pvalue"] = res["ks_pvalue"]
            if stat in res["mc"]:
                m = res["mc"][stat]
                row["mc_pvalue"] = m["pvalue"]
                row.update({f"q{k}": v for k, v in m["quantiles"].items()})
            rows.append(row)
        out.rows = rows
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    return out


def _resolve_seed(seed):
    if seed is not None:
        return seed, False
    return secrets.randbits(63), True


def cmd_simulate(args) -> Outcome:
    seed, drawn = _resolve_seed(args.seed)
    cfg = simulation.SimStudyConfig(args.alpha, tuple(args.sizes), args.reps, tuple(args.methods), seed,
                                    summarize=not args.no_summary,
                                    lilliefors_replicates=args.lilliefors_reps,
                                    mps_spacings=args.mps_spacings)
    table = simulation.run_study(cfg)
    inputs = {"alpha": args.alpha, "sizes": args.sizes, "reps": args.reps, "methods": args.methods,
              "seed": seed, "seed_drawn": drawn, "summary": not args.no_summary,
              "lilliefors_reps": args.lilliefors_reps, "mps_spacings": args.mps_spacings}
    out = Outcome("simulate", inputs, table.to_dict(), rows=table.rows())
    for c in table.cells:
        if not c.usable:
            out.warnings.append(f"cell ({c.method}, n={c.n}) unusable: {c.failures} failed replicate(s)")
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    return out


def _mrl(model, y):
    if model.name == "mbur":
        return mbur.mean_residual_life(model.alpha, y)
    from scipy import integrate
    out = []
    for yi in np.atleast_1d(y):
        s = float(model.sf(yi))
        if s <= 0:
            raise ZeroDivisionError(f"survival underflows at y={yi}")
        val, _ = integrate.quad(lambda x: model.sf(x), yi, 1.0 - 1e-16, epsabs=1e-12, limit=500)
        out.append(val / s)
    return np.array(out)


def cmd_dist(args) -> Outcome:
    model = _parse_params(args.dist, args.params)
    closed = args.eval in ("quantile", "ttt")
    x = parse_grid(args.at, closed)
    if args.eval == "pdf":
        v = model.pdf(x)
    elif args.eval == "cdf":
        v = model.cdf(x)
    elif args.eval == "hazard":
        sf = np.asarray(model.sf(x), dtype=float)
        if np.any(sf <= 0):
            raise ZeroDivisionError("survival underflows on the grid")
        v = np.asarray(model.pdf(x)) / sf
    elif args.eval == "mrl":
        v = _mrl(model, x)
    elif args.eval == "quantile":
        v = gof.model_quantile(model, mbur.check_probability(x))
    else:
        _, v = gof.ttt_theoretical(model, x)
    x, v = np.atleast_1d(x), np.atleast_1d(np.asarray(v, dtype=float))
    xname = "u" if closed else "y"
    rows = [{xname: float(a), args.eval: float(b)} for a, b in zip(x, v)]
    inputs = {"dist": args.dist, "params": list(model.params), "eval": args.eval, "at": args.at}
    return Outcome("dist", inputs, {"x": xname, "points": [[r[xname], r[args.eval]] for r in rows]}, rows=rows)


def cmd_datasets(args) -> Outcome:
    if args.action == "list":
        rows = [{"name": n, "n": k, "source": datasets.builtin(n).source} for n, k in datasets.list_builtin()]
        return Outcome("datasets", {"action": "list"}, {"datasets": rows}, rows=rows)
    if args.name is None:
        raise UsageError(f"datasets {args.action} needs a dataset name")
    ds = datasets.builtin(args.name)
    if args.action == "show":
        rows = [{"index": i, "value": v} for i, v in enumerate(ds.values)]
        return Outcome("datasets", {"action": "show", "name": args.name}, ds.to_dict(), rows=rows)
    st = gof.descriptive_stats(ds.values, bias_corrected=not args.biased)
    res = {"name": ds.name, **st.to_dict()}
    return Outcome("datasets", {"action": "stats", "name": args.name, "biased": args.biased},
                   res, rows=[res])


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_data(p):
    p.add_argument("--data", required=True, help="builtin dataset name or path to a text/CSV file")
    p.add_argument("--column", type=_nonneg_int, default=None, help="0-based column for delimited files")
    p.add_argument("--delimiter", default=None, help="single-character field delimiter")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unitfit", description="MBUR and competitor unit distributions: fitting, "
                                                 "goodness of fit and simulation studies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a distribution to data")
    _add_data(p)
    p.add_argument("--dist", choices=competitors.DIST_NAMES, default="mbur")
    p.add_argument("--method", choices=estimation.METHODS, default="mle")
    p.add_argument("--ci", type=_level, default=0.95, help="confidence level")
    p.add_argument("--mps-spacings", choices=("n+1", "n"), default="n+1")
    p.add_argument("--exact-ks", action="store_true", help="exact finite-n KS p-value")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="goodness-of-fit statistics with Monte-Carlo reference values")
    _add_data(p)
    p.add_argument("--dist", choices=competitors.DIST_NAMES, default="mbur")
    p.add_argument("--params", default=None, help="comma-separated parameters (default: MLE fit)")
    p.add_argument("--mc-reps", type=_nonneg_int, default=10_000)
    p.add_argument("--mode", choices=("fixed", "refit"), default="fixed")
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--exact-ks", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("simulate", help="replicated estimator simulation study")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sizes", type=_int_list, default=list(simulation.DEFAULT_SIZES))
    p.add_argument("--reps", type=_positive_int, default=1000)
    p.add_argument("--methods", type=_methods, default=list(estimation.METHODS))
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--no-summary", action="store_true", help="skip estimator-distribution summaries")
    p.add_argument("--lilliefors-reps", type=_positive_int, default=1000)
    p.add_argument("--mps-spacings", choices=("n+1", "n"), default="n+1")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dist", help="evaluate a distribution function on a grid")
    p.add_argument("--dist", choices=competitors.DIST_NAMES, default="mbur")
    p.add_argument("--params", required=True)
    p.add_argument("--eval", choices=("pdf", "cdf", "quantile", "hazard", "mrl", "ttt"), required=True)
    p.add_argument("--at", required=True, help="lo:hi:num or comma list; y grids exclude the endpoints")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("datasets", help="embedded datasets")
    p.add_argument("action", choices=("list", "show", "stats"))
    p.add_argument("name", nargs="?")
    p.add_argument("--biased", action="store_true", help="plain moment skewness/kurtosis")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_datasets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_stream = sys.stdout
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            outcome = args.func(args)
        outcome.warnings += sorted({str(w.message) for w in caught})
    except UsageError as exc:
        print(f"unitfit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"unitfit {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, DomainError, DegenerateSampleError, ZeroDivisionError) as exc:
        print(f"unitfit {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UnitfitError, ValueError) as exc:
        print(f"unitfit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outcome.emit(args.format, out_stream)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
