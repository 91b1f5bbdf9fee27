"""Command-line interface: ``evgof {gof,pickands,power,sample}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import pickands as pk
from .errors import ConfigError, DegenerateError, DomainError, EvGofError, TieError, UnsupportedOperation
from .estimation import ModelSpec, check_method, fit
from .empirical import pseudo_observations
from .families import CopulaModel, family_info, theta_of_tau
from .gof import GofConfig, bootstrap_pseudo, check_null, stat_kind
from .power import JSON_FIELDS, PowerRow, PowerTable, paper_suite, run_scenarios

EXIT_OK, EXIT_INPUT, EXIT_TIES, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(EvGofError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- CSV ingestion -------------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_pairs(path) -> np.ndarray:
    """Read two numeric columns (x, y) from a comma- or tab-separated file.

    A first row with non-numeric cells is taken as a header.  Any other
    non-numeric cell is an error naming its row.  Files with more than two
    columns (e.g. a censoring indicator) are rejected: censored data are not
    supported.
    """
    try:
        text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("input is empty")
    delim = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delim))
    start = 0
    if not all(_is_number(c.strip()) for c in rows[0]):
        start = 1
    ncol = len(rows[0])
    if ncol > 2:
        raise InputError(
            f"expected two columns (x, y), found {ncol}; censored observations are not supported, "
            "remove censoring columns and censored rows first"
        )
    data = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        cells = [c.strip() for c in row]
        if len(cells) != 2:
            raise InputError(f"row {lineno}: expected 2 columns, found {len(cells)}")
        try:
            data.append([float(cells[0]), float(cells[1])])
        except ValueError:
            raise InputError(f"row {lineno}: non-numeric cell in {row!r}") from None
    arr = np.array(data, float).reshape(-1, 2)
    if arr.shape[0] < 2:
        raise InputError("need at least 2 complete rows")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0]) + start + 1
        raise InputError(f"row {bad}: non-finite value")
    return arr


def write_rows(path, header, rows) -> None:
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
    finally:
        if out is not sys.stdout:
            out.close()


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _split(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


# -- commands ------------------------------------------------------------------

def build_report(x, h0s, stats, args) -> dict:
    ps = pseudo_observations(x, args.ties)
    results = []
    for h0 in h0s:
        spec = ModelSpec.parse(h0)
        cfg = GofConfig(
            corrected=args.corrected, method=args.method, N=args.N, grid_m=args.grid,
            master_seed=args.seed, ties=args.ties, workers=args.workers,
        )
        res = bootstrap_pseudo(ps, spec, stats, cfg)
        for kind in stats:
            r = res[kind]
            row = r.as_dict()
            if spec.asym:
                row["asym"] = list(r.theta_hat[1:])
            results.append(row)
    return {"version": __version__, "seed": args.seed, "n": ps.n, "ties": args.ties, "results": results}


def cmd_gof(args) -> int:
    x = read_pairs(args.input)
    h0s = _split(args.h0)
    stats = tuple(stat_kind(s) for s in _split(args.stat))
    if not h0s or not stats:
        raise ConfigError("--h0 and --stat must name at least one item")
    for h0 in h0s:
        check_null(h0, stats, args.method)
    report = build_report(x, h0s, stats, args)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(f"n = {report['n']}, N = {args.N}, seed = {args.seed}, ties = {args.ties}")
    print(f"{'model':<12} {'stat':<6} {'statistic':>12} {'p-value':>9}  theta_hat")
    for r in report["results"]:
        th = ", ".join(f"{t:.4g}" for t in r["theta_hat"])
        print(f"{r['family']:<12} {r['statistic_kind']:<6} {r['statistic']:>12.5g} {r['pvalue']:>9.4f}  ({th})")
    return EXIT_OK


def cmd_pickands(args) -> int:
    x = read_pairs(args.input)
    ps = pseudo_observations(x, args.ties)
    t = pk.grid(args.grid)
    cols = [t]
    header = ["t"]
    suffix = "_c" if args.corrected else ""
    for kind in ("P", "CFG"):
        cols.append(pk.curve(kind, args.corrected, ps, args.grid, bound=True).values)
        header.append(f"A_{kind}{suffix}")
    if args.fit:
        spec = ModelSpec.parse(args.fit)
        method = "mpl" if spec.asym else args.method
        model = fit(spec, ps, check_method(spec, method)).model
        cols.append(model.pickands(t))
        header.append(f"A_{spec.name}")
    write_rows(args.out, header, zip(*cols))
    return EXIT_OK


def _scenario_file(root: Path, sid: str) -> Path:
    safe = "".join(c if c.isalnum() or c in "-_.=" else "_" for c in sid)
    return root / "scenarios" / f"{safe}.json"


def cmd_power(args) -> int:
    suite = paper_suite(args.scale, args.only, args.seed)
    over = {k: getattr(args, k) for k in ("n", "N", "reps") if getattr(args, k) is not None}
    if over:
        suite = [replace(s, **over) for s in suite]
    out = Path(args.out)
    (out / "scenarios").mkdir(parents=True, exist_ok=True)
    manifest = {"version": __version__, "scale": args.scale, "seed": args.seed, "overrides": over}
    mfile = out / "manifest.json"
    if mfile.exists():
        if json.loads(mfile.read_text()) != manifest:
            raise ConfigError(f"{out} holds results of a run with other settings; choose another --out")
    else:
        mfile.write_text(json.dumps(manifest, indent=2))
    done = {}
    todo = []
    for s in suite:
        f = _scenario_file(out, s.id)
        if f.exists():
            done[s] = PowerRow(**json.loads(f.read_text()))
        else:
            todo.append(s)

    def save(row):
        f = _scenario_file(out, row.scenario_id)
        tmp = f.with_suffix(".tmp")
        tmp.write_text(json.dumps({f: getattr(row, f) for f in JSON_FIELDS}, indent=2))
        tmp.replace(f)
        print(f"{row.scenario_id}: rejection {row.rejection_rate:.3f} (se {row.mc_stderr:.3f})", flush=True)

    if todo:
        for s, row in zip(todo, run_scenarios(todo, args.workers, progress=save)):
            done[s] = row
    table = PowerTable([done[s] for s in suite])
    table.to_csv(out / "power.csv")
    table.to_json(out / "power.json")
    return EXIT_OK


def cmd_sample(args) -> int:
    name = args.family.lower()
    asym = None
    if name.startswith("a-"):
        name = name[2:]
        asym = tuple(float(a) for a in _split(args.asym or "0.3,0.8"))
    elif args.asym:
        asym = tuple(float(a) for a in _split(args.asym))
    family_info(name)
    if (args.tau is None) == (args.theta is None):
        raise ConfigError("give exactly one of --tau and --theta")
    if args.theta is not None:
        model = CopulaModel(name, args.theta, asym)
    elif asym is not None:
        from .power import khoudraji_theta

        model = CopulaModel(name, khoudraji_theta(name, *asym, args.tau), asym)
    else:
        model = CopulaModel(name, theta_of_tau(name, args.tau))
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    uv = model.sample(args.n, args.seed)
    header = ["u", "v"]
    if args.margins:
        from scipy import stats as st

        names = _split(args.margins)
        if len(names) == 1:
            names = names * 2
        dists = [getattr(st, nm, None) for nm in names]
        if any(not isinstance(d, st.rv_continuous) for d in dists):
            raise ConfigError(f"unknown continuous distribution in {args.margins!r}")
        if any(d.numargs for d in dists):
            raise ConfigError("margin distributions must not need shape parameters (e.g. norm, expon, cauchy)")
        uv = np.column_stack([dists[0].ppf(uv[:, 0]), dists[1].ppf(uv[:, 1])])
        header = ["x", "y"]
    write_rows(args.out, header, uv.tolist())
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evgof", description="Goodness-of-fit tests for bivariate extreme-value copulas.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="CSV/TSV file with two numeric columns (x, y), or - for stdin")
        sp.add_argument("--ties", choices=("reject", "midrank"), default="reject")
        sp.add_argument("--corrected", type=_bool, default=True, help="end-point-corrected estimators (default true)")
        sp.add_argument("--grid", type=int, default=1001, help="points of the uniform grid on [0,1]")
        sp.add_argument("--method", choices=("itau", "irho", "mpl"), default="itau")

    g = sub.add_parser("gof", help="parametric bootstrap goodness-of-fit tests")
    common(g)
    g.add_argument("--h0", default="gh", help="comma-separated null families, e.g. gh,galambos,a-gh")
    g.add_argument("--stat", default="cfg", help="comma-separated statistics among p, cfg, tn")
    g.add_argument("--N", type=int, default=1000, help="bootstrap samples")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", help="JSON report path")
    g.set_defaults(func=cmd_gof)

    k = sub.add_parser("pickands", help="export nonparametric Pickands curves")
    common(k)
    k.add_argument("--fit", help="also export the fitted Pickands function of this family")
    k.add_argument("--out", help="CSV output path (default stdout)")
    k.set_defaults(func=cmd_pickands)

    w = sub.add_parser("power", help="Monte Carlo level/power study")
    w.add_argument("--scale", choices=("desk", "full"), default="desk")
    w.add_argument("--only", help="comma-separated subset of group1, group2, group3")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", default="power_out", help="output directory (resumable)")
    w.add_argument("--n", type=int, help="override the sample size")
    w.add_argument("--N", type=int, help="override the bootstrap size")
    w.add_argument("--reps", type=int, help="override the number of data sets")
    w.set_defaults(func=cmd_power)

    s = sub.add_parser("sample", help="draw a sample from a copula")
    s.add_argument("--family", required=True, help="family name; prefix a- for a Khoudraji model")
    s.add_argument("--tau", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--asym", help="lambda,kappa of a Khoudraji model (default 0.3,0.8)")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--margins", help="scipy.stats distribution name(s) for back-transformed margins")
    s.add_argument("--out", help="CSV output path (default stdout)")
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        if getattr(args, "N", None) is not None and args.N < 1:
            raise ConfigError("--N must be at least 1")
        return args.func(args)
    except TieError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TIES
    except (DegenerateError, ArithmeticError) as exc:
        print(f"error: numeric degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ConfigError, DomainError, UnsupportedOperation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
