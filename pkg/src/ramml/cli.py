"""Command-line front end: ``ramml fit`` and ``ramml simulate``.

Exit status
-----------
0  success
2  bad command-line usage
3  input or config file not found
4  malformed CSV or config file
5  non-numeric or missing value in a selected CSV column
6  an estimator failed on the data

Sweep config format
-------------------
One ``key = value`` per line; ``#`` starts a comment.  For the keys ``n``,
``m``, ``law``, ``contamination``, ``leverage`` and ``rho`` a comma
separated list expands into the cross product of cells.  ``n_rep``, ``p``
and ``seed`` are single values, ``estimators`` is a comma separated list
of estimators run in every cell, and ``output`` optionally names the CSV
file to write.  Example::

    n = 50, 200
    m = 1
    law = normal, t5
    contamination = 0.1, 0.2
    leverage = 10
    n_rep = 500
    seed = 1
"""
import argparse
import csv
import io
import itertools
import json
import math
import os
import sys

import numpy as np

from . import amml
from .datasets import BUNDLED, RegressionData
from .distributions import ErrorLaw
from .evaluation import sep
from .exceptions import RammlError
from .initial import fit_lts, fit_mm, fit_ols, fit_s
from .simulation import ESTIMATORS, ScenarioSpec, run_table

EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_PARSE, EXIT_NON_NUMERIC, EXIT_ESTIMATOR = 0, 2, 3, 4, 5, 6

FIT_ESTIMATORS = ("MM", "LTS", "AMML1", "RAMML1", "S", "AMML2", "RAMML2", "OLS")


class CliError(Exception):
    def __init__(self, message, status):
        super().__init__(message)
        self.status = status


# ---------------------------------------------------------------------------
# CSV input


def read_csv_columns(path):
    """Header and raw string rows of a CSV file."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise CliError(f"{path}: file not found", EXIT_NOT_FOUND) from None
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise CliError(f"{path}: cannot read CSV ({exc})", EXIT_PARSE) from None
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise CliError(f"{path}: empty file", EXIT_PARSE)
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise CliError(f"{path}: duplicate column names in header", EXIT_PARSE)
    for k, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise CliError(f"{path}: line {k} has {len(r)} fields, header has {len(header)}", EXIT_PARSE)
    return header, rows[1:]


def load_csv_data(path, response=None, predictors=None):
    """Build :class:`RegressionData` from selected numeric CSV columns.

    The response defaults to the last column and the predictors to all
    other columns.  Cells are never coerced: anything ``float`` cannot
    parse (including empty cells) is reported with its line and column.
    """
    header, rows = read_csv_columns(path)
    response = header[-1] if response is None else response
    if response not in header:
        raise CliError(f"{path}: no column named {response!r}", EXIT_PARSE)
    if predictors is None:
        predictors = [h for h in header if h != response]
    for col in predictors:
        if col not in header:
            raise CliError(f"{path}: no column named {col!r}", EXIT_PARSE)
    if not predictors:
        raise CliError(f"{path}: need at least one predictor column", EXIT_PARSE)
    cols = [response] + list(predictors)
    idx = [header.index(c) for c in cols]
    values = np.empty((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, k in enumerate(idx):
            cell = r[k].strip()
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                what = "missing value" if not cell else f"non-numeric value {cell!r}"
                raise CliError(f"{path}: line {i + 2}, column {cols[j]!r}: {what}", EXIT_NON_NUMERIC)
            values[i, j] = v
    try:
        return RegressionData(values[:, 0], values[:, 1:], response, tuple(predictors))
    except RammlError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


# ---------------------------------------------------------------------------
# fit


def _parse_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def run_estimators(data, estimators, p=amml.DEFAULT_SHAPE, seed=0):
    """Fit each tag in `estimators`; LTS and S starts are shared."""
    cache = {}

    def start(tag):
        if tag not in cache:
            cache[tag] = fit_lts(data, seed=seed) if tag == "LTS" else fit_s(data, seed=seed)
        return cache[tag]

    fits = {}
    for tag in estimators:
        try:
            if tag == "OLS":
                fits[tag] = fit_ols(data)
            elif tag in ("LTS", "S"):
                fits[tag] = start(tag)
            elif tag == "MM":
                fits[tag] = fit_mm(data, s_fit=start("S"))
            else:
                init = start("LTS" if tag.endswith("1") else "S")
                fits[tag] = amml.fit_method(data, tag, p=p, initial=init)
        except (RammlError, np.linalg.LinAlgError) as exc:
            raise CliError(f"estimator {tag} failed: {type(exc).__name__}: {exc}", EXIT_ESTIMATOR) from None
    return fits


def _observation_weights(f):
    if isinstance(f, amml.FitResult):
        return amml.final_weights(f)
    return f.weights


def _fit_rows(data, fits, trim):
    rows = []
    for tag, f in fits.items():
        s, s_trim, bias = sep(data.y, f.predict(data.X), trim)
        rows.append({"estimator": tag, "intercept": f.intercept,
                     "coefficients": [float(c) for c in f.coefficients], "scale": f.scale,
                     "sep": s, "sep_trim": s_trim, "bias": bias})
    return rows


def _diagnostics(data, fits):
    out = []
    for tag, f in fits.items():
        w = _observation_weights(f)
        if w is None:
            continue
        r = data.y - f.predict(data.X)
        z = amml.standardize(r, f.scale)
        for i in range(data.n):
            out.append({"estimator": tag, "index": i + 1, "scaled_residual": float(z[i]),
                        "weight": float(w[i])})
    return out


def format_fit_table(data, rows):
    names = ["b0"] + [f"b{j + 1}" for j in range(data.m)]
    head = ["Estimator"] + names + ["sigma", "SEP", "SEP_trim"]
    lines = []
    for r in rows:
        vals = [r["intercept"]] + r["coefficients"] + [r["scale"], r["sep"], r["sep_trim"]]
        lines.append([r["estimator"]] + [f"{v:.4f}" for v in vals])
    widths = [max(len(h), *(len(l[k]) for l in lines)) for k, h in enumerate(head)]
    fmt = lambda cells: "  ".join(c.rjust(wd) if k else c.ljust(wd)  # noqa: E731
                                  for k, (c, wd) in enumerate(zip(cells, widths)))
    return "\n".join([fmt(head)] + [fmt(l) for l in lines]) + "\n"


def _write_csv(records, fields):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def cmd_fit(args):
    if args.dataset:
        data = BUNDLED[args.dataset]()
        if args.response or args.predictors:
            raise CliError("--response/--predictors only apply to CSV input", EXIT_USAGE)
    elif args.input:
        predictors = _parse_list(args.predictors) if args.predictors else None
        data = load_csv_data(args.input, args.response, predictors)
    else:
        raise CliError("give an input CSV or --dataset", EXIT_USAGE)
    estimators = [e.upper() for e in _parse_list(args.estimators)]
    bad = [e for e in estimators if e not in FIT_ESTIMATORS]
    if bad or not estimators:
        raise CliError(f"unknown estimator(s) {bad}; choose from {', '.join(FIT_ESTIMATORS)}", EXIT_USAGE)
    if not 0 <= args.trim < 0.5:
        raise CliError("--trim must lie in [0, 0.5)", EXIT_USAGE)
    fits = run_estimators(data, estimators, p=args.p, seed=args.seed)
    rows = _fit_rows(data, fits, args.trim)
    diag = _diagnostics(data, fits) if args.diagnostics else None

    if args.format == "json":
        for r in rows:
            f = fits[r["estimator"]]
            if isinstance(f, amml.FitResult):
                r["fit"] = f.to_dict()
        doc = {"response": data.response_name, "predictors": list(data.predictor_names),
               "n": data.n, "p": args.p, "seed": args.seed, "trim_fraction": args.trim,
               "estimates": rows}
        if diag is not None:
            doc["diagnostics"] = diag
        text = json.dumps(doc, indent=2) + "\n"
    elif args.format == "csv":
        flat = []
        for r in rows:
            rec = {"estimator": r["estimator"], "b0": r["intercept"]}
            rec.update({f"b{j + 1}": c for j, c in enumerate(r["coefficients"])})
            rec.update({"sigma": r["scale"], "sep": r["sep"], "sep_trim": r["sep_trim"], "bias": r["bias"]})
            flat.append(rec)
        text = _write_csv(flat, list(flat[0]))
        if diag is not None:
            text += "\n" + _write_csv(diag, ["estimator", "index", "scaled_residual", "weight"])
    else:
        text = format_fit_table(data, rows)
        if diag is not None:
            text += "\nDiagnostics (index, scaled residual, final weight)\n"
            text += "".join(f"{d['estimator']:<8}{d['index']:>5}  {d['scaled_residual']:>10.4f}  "
                            f"{d['weight']:.4f}\n" for d in diag)
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

_EXPAND = {"n": int, "m": int, "law": ErrorLaw.parse, "contamination": float,
           "leverage": float, "rho": float}
_SCALAR = {"n_rep": int, "p": float, "seed": int, "output": str}


def parse_sweep_config(text, source="<config>"):
    """Parse the flat ``key = value`` sweep format into a dict of value lists."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{source}: line {lineno}: expected 'key = value'", EXIT_PARSE)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key in cfg:
            raise CliError(f"{source}: key {key!r} given twice", EXIT_PARSE)
        if key not in _EXPAND and key not in _SCALAR and key != "estimators":
            raise CliError(f"{source}: unknown key {key!r}", EXIT_PARSE)
        items = _parse_list(value)
        if not items:
            raise CliError(f"{source}: key {key!r} has no value", EXIT_PARSE)
        try:
            if key in _EXPAND:
                cfg[key] = [_EXPAND[key](v) for v in items]
            elif key == "estimators":
                cfg[key] = [v.upper() for v in items]
            else:
                if len(items) != 1:
                    raise ValueError("takes a single value")
                cfg[key] = _SCALAR[key](items[0])
        except (ValueError, RammlError) as exc:
            raise CliError(f"{source}: key {key!r}: invalid value {value!r} ({exc})", EXIT_PARSE) from None
    return cfg


def expand_sweep(cfg, source="<config>"):
    """Cross product of the list-valued keys as :class:`ScenarioSpec` cells."""
    for key in ("n", "m"):
        if key not in cfg:
            raise CliError(f"{source}: missing required key {key!r}", EXIT_PARSE)
    axes = {k: cfg.get(k, d) for k, d in
            (("n", None), ("m", None), ("law", [ErrorLaw.NORMAL]), ("contamination", [0.0]),
             ("leverage", [10.0]), ("rho", [0.0]))}
    fixed = {"n_rep": cfg.get("n_rep", 500), "p": cfg.get("p", amml.DEFAULT_SHAPE),
             "seed": cfg.get("seed", 0), "estimators": tuple(cfg.get("estimators", ESTIMATORS))}
    specs, seen = [], set()
    for n, m, law, level, lev, rho in itertools.product(*axes.values()):
        if level == 0:
            lev = axes["leverage"][0]
        key = (n, m, law, level, lev, rho)
        if key in seen:
            continue
        seen.add(key)
        try:
            specs.append(ScenarioSpec(n, m, law, level, lev, rho, **fixed))
        except RammlError as exc:
            bad = _guess_key(str(exc))
            raise CliError(f"{source}: key {bad!r}: {exc}", EXIT_PARSE) from None
    return specs


def _guess_key(message):
    for key in ("estimators", "contamination", "leverage", "n_rep", "rho", "p", "m", "n"):
        if key in message.split(":")[0] or f" {key}" in message or message.startswith(key):
            return key
    return "n"


SIM_FIELDS = ["n", "m", "law", "level", "leverage", "rho", "estimator", "mse_beta", "mse_sigma", "failures"]


def simulation_rows(results):
    rows = []
    for cell in results:
        s = cell.scenario
        for tag in s.estimators:
            rows.append({"n": s.n, "m": s.m, "law": s.error_law.value, "level": float(s.contamination),
                         "leverage": float(s.leverage), "rho": float(s.rho), "estimator": tag,
                         "mse_beta": cell.mse_beta[tag], "mse_sigma": cell.mse_sigma[tag],
                         "failures": cell.failures[tag]})
    return rows


def cmd_simulate(args):
    try:
        with open(args.config) as fh:
            text = fh.read()
    except FileNotFoundError:
        raise CliError(f"{args.config}: file not found", EXIT_NOT_FOUND) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{args.config}: cannot read ({exc})", EXIT_PARSE) from None
    cfg = parse_sweep_config(text, args.config)
    specs = expand_sweep(cfg, args.config)
    if args.n_rep is not None:
        specs = [ScenarioSpec(**{**s.__dict__, "n_rep": args.n_rep}) for s in specs]
    results = run_table(specs, workers=args.workers)
    _emit(_write_csv(simulation_rows(results), SIM_FIELDS), args.output or cfg.get("output"))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="ramml", description="Robust regression by adaptive modified "
                                     "maximum likelihood, with Monte-Carlo comparison tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit estimators to a CSV data set")
    f.add_argument("input", nargs="?", help="CSV file with a header row")
    f.add_argument("--dataset", choices=sorted(BUNDLED), help="use a bundled data set instead of a CSV")
    f.add_argument("--response", help="response column (default: last column)")
    f.add_argument("--predictors", help="comma separated predictor columns (default: all others)")
    f.add_argument("--estimators", default=",".join(FIT_ESTIMATORS),
                   help="comma separated subset of " + ",".join(FIT_ESTIMATORS))
    f.add_argument("--p", type=float, default=amml.DEFAULT_SHAPE, help="shape parameter (default 16.5)")
    f.add_argument("--seed", type=int, default=0, help="seed for the LTS and S searches")
    f.add_argument("--trim", type=float, default=0.1, help="SEP trimming fraction (default 0.1)")
    f.add_argument("--format", choices=("table", "csv", "json"), default="table")
    f.add_argument("--diagnostics", action="store_true",
                   help="also list scaled residuals and final weights per observation")
    f.add_argument("-o", "--output", help="write to this file instead of stdout")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="run a Monte-Carlo sweep from a config file")
    s.add_argument("config", help="sweep config file (key = value lines)")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $RAMML_WORKERS or 1)")
    s.add_argument("--n-rep", type=int, default=None, help="override n_rep from the config")
    s.add_argument("-o", "--output", help="CSV output path (default: config 'output' or stdout)")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ramml: error: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
