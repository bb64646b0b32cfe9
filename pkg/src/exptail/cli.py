"""Command-line front end.

Exit codes: 0 success, 1 verdict "fails", 2 configuration or usage error,
3 inconclusive. Results are printed as JSON (always with ``--json``) and
written to ``--out`` when given.
"""
import argparse
import csv
from dataclasses import dataclass, field
import json
import math
import os
import sys

import numpy as np

from . import io
from .certify import INCONCLUSIVE as CERT_INCONCLUSIVE, k_gamma_integral, l_integral
from .conjugate import ConjugateGrid, legendre_transform
from .distributions import DistributionModel, sample
from .norms import MGFOracle, norm_report
from .tails import chernov_bound, empirical_tail
from .verify import (
    CONSISTENT, FAILS, INCONCLUSIVE, EquivalenceReport, EvidenceTable, LadderConfig, LadderRun,
    run_ladder, tail_domination_sweep,
)
from .young import YoungFunction

EXIT_OK, EXIT_FAILS, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3
PLOT_COLUMNS = ("query", "empirical", "half_width", "bound", "margin")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    model: str = None
    phi: str = None
    n: int = 1_000_000
    seeds: list = field(default_factory=lambda: [0])
    x_grid: object = None
    lambda_grid: object = None
    r_grid: object = None
    out: str = None
    evidence_csv: str = None
    verbosity: int = 0

    def __post_init__(self):
        if int(self.n) < 1:
            raise ConfigError("n must be at least 1")
        self.n = int(self.n)
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        self.seeds = [int(s) for s in self.seeds]
        for path in (self.model, self.phi):
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"config file not found: {path}")


def expand_grid(spec, d):
    """A grid is an explicit list of vectors or {"product": [axis values per coordinate]}."""
    if spec is None:
        return None
    if isinstance(spec, dict):
        if "product" not in spec:
            raise ConfigError("grid spec must be a list of vectors or {'product': [...]}")
        axes = spec["product"]
        if len(axes) == 1 and d > 1:
            axes = axes * d
        if len(axes) != d:
            raise ConfigError("product grid needs one axis per coordinate")
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    arr = np.asarray(spec, dtype=float)
    if arr.size and arr.size % d:
        raise ConfigError(f"grid entries must have {d} coordinates")
    return arr.reshape(-1, d)


def _vector(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text):
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _load_phi(path):
    try:
        return YoungFunction.from_config(io.load_config(path, "young_function"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"phi config: {exc}") from exc


def _load_model(path):
    try:
        return DistributionModel.from_config(io.load_config(path, "distribution"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"model config: {exc}") from exc


def _run_config(args):
    base = {}
    if getattr(args, "run_config", None):
        try:
            base = io.load_config(args.run_config, "run")
        except (OSError, ValueError) as exc:
            raise ConfigError(f"run config: {exc}") from exc
        base.pop("schema_version", None)
        base.pop("kind", None)
    for key in ("model", "phi", "n", "seeds", "out", "evidence_csv"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "seed", None) is not None:
        base["seeds"] = [args.seed]
    unknown = set(base) - {f for f in RunConfig.__dataclass_fields__}
    if unknown:
        raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
    return RunConfig(**base)


def _emit(args, obj, command, plain=None):
    text = io.dumps(obj, command, {"argv": sys.argv[1:]})
    if getattr(args, "out", None):
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from exc
    if args.json or plain is None:
        print(text)
    else:
        print(plain)


# ---------------------------------------------------------------- commands

def cmd_conjugate(args):
    phi = _load_phi(args.phi)
    if len(args.y) != phi.dimension:
        raise ConfigError(f"--y needs {phi.dimension} coordinates")
    res = legendre_transform(phi, np.array(args.y), args.radius)
    if args.grid_out:
        grid = ConjugateGrid.build(phi, radius=args.radius)
        try:
            grid.to_csv(args.grid_out)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.grid_out}: {exc}") from exc
    out = {"y": args.y, "value": float(res.value), "truncated": bool(res.truncated),
           "argmax": np.asarray(res.argmax).tolist()}
    _emit(args, out, "conjugate", _fmt(float(res.value)) + (" (truncated)" if res.truncated else ""))
    return EXIT_OK


def cmd_tail(args):
    rc = _run_config(args)
    phi, model = _load_phi(rc.phi), _load_model(rc.model)
    d = model.dimension
    if phi.dimension != d:
        raise ConfigError("model and phi dimensions differ")
    s = sample(model, rc.n, rc.seeds[0])
    if args.x is None:
        grid = expand_grid(rc.x_grid, d)
        table = tail_domination_sweep(model, phi, args.scale, grid, samples=s)
        if args.plot_csv:
            emit_plot_data(table, args.plot_csv)
        _emit(args, table, "tail")
        return EXIT_OK
    if len(args.x) != d:
        raise ConfigError(f"--x needs {d} coordinates")
    est = empirical_tail(s, args.x)
    bound = chernov_bound(phi, np.array(args.x), args.scale)
    out = {"x": args.x, "empirical": est.value, "half_width": est.half_width,
           "chernov": float(bound.value), "possibly_loose": bool(bound.possibly_loose),
           "dominated": bool(est.value - est.half_width <= bound.value),
           "argmax_orbit": list(est.argmax_orbit)}
    _emit(args, out, "tail")
    return EXIT_OK


def cmd_norm(args):
    rc = _run_config(args)
    phi, model = _load_phi(rc.phi), _load_model(rc.model)
    if phi.dimension != model.dimension:
        raise ConfigError("model and phi dimensions differ")
    d = model.dimension
    s = sample(model, rc.n, rc.seeds[0])
    oracle = MGFOracle.analytic(model) if args.analytic else MGFOracle.empirical(s)
    rep = norm_report(s, phi, oracle, expand_grid(rc.lambda_grid, d), expand_grid(rc.r_grid, d))
    _emit(args, rep, "norm")
    return EXIT_OK


def cmd_certify(args):
    phi = _load_phi(args.phi)
    k = k_gamma_integral(phi, args.gamma)
    lval = l_integral(phi, args.gamma)

    def summary(r):
        if r.verdict == CERT_INCONCLUSIVE:
            return "inconclusive"
        return r.value

    out = {"I_gamma": summary(k), "L": summary(lval), "details": {"I_gamma": k, "L": lval}}
    _emit(args, out, "certify", f"I_gamma = {_fmt(summary(k))}\nL = {_fmt(summary(lval))} [{lval.verdict}]")
    inconclusive = CERT_INCONCLUSIVE in (k.verdict, lval.verdict)
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_verify(args):
    rc = _run_config(args)
    phi, model = _load_phi(rc.phi), _load_model(rc.model)
    d = model.dimension
    if phi.dimension != d:
        raise ConfigError("model and phi dimensions differ")
    cfg = LadderConfig(rc.n, rc.seeds[0], expand_grid(rc.x_grid, d), expand_grid(rc.r_grid, d),
                       expand_grid(rc.lambda_grid, d), analytic=not args.empirical)
    run = run_ladder(model, phi, rc.seeds, cfg)
    if rc.evidence_csv:
        emit_plot_data(run, rc.evidence_csv)
    lines = [f"ladder: {run.verdict}"]
    for rep in run.reports:
        preds = " ".join(f"{k}={p.verdict}" for k, p in rep.predicates.items())
        lines.append(f"seed {rep.seed}: {rep.verdict} {preds} C={_fmt(rep.fitted['C_tail'])} "
                     f"ratio={_fmt(rep.fitted['sandwich_ratio'])}")
    _emit(args, run, "verify", "\n".join(lines))
    return {CONSISTENT: EXIT_OK, FAILS: EXIT_FAILS, INCONCLUSIVE: EXIT_INCONCLUSIVE}[run.verdict]


def cmd_report(args):
    try:
        with open(args.input) as fh:
            obj = io.loads(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"report: {exc}") from exc
    if args.plot_csv:
        emit_plot_data(obj, args.plot_csv)
    verdict = getattr(obj, "verdict", None)
    _emit(args, obj, "report", _describe(obj))
    if verdict == FAILS:
        return EXIT_FAILS
    if verdict == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _describe(obj):
    if isinstance(obj, LadderRun):
        return f"ladder run over {len(obj.reports)} seeds: {obj.verdict}"
    if isinstance(obj, EvidenceTable):
        return f"evidence table {obj.name}: {len(obj.rows)} rows, min margin {_fmt(obj.min_margin)}"
    return type(obj).__name__


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None:
        return "-"
    if isinstance(v, float) and not math.isfinite(v):
        return io._float(v)
    return f"{v:.6g}"


# ---------------------------------------------------------------- plot data

def _write_table(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLOT_COLUMNS)
        for r in table.rows:
            q = ";".join(repr(float(v)) if not isinstance(v, str) else v for v in r.query)
            w.writerow([q, repr(float(r.lhs)), repr(float(r.half_width)), repr(float(r.rhs)), repr(float(r.margin))])


def emit_plot_data(report, path):
    """Write (query, empirical, half_width, bound, margin) CSVs.

    An evidence table goes to ``path``; a ladder report or run writes one file
    per predicate (and per seed) into the directory ``path``.
    """
    try:
        if isinstance(report, EvidenceTable):
            _write_table(report, path)
            return [path]
        reports = report.reports if isinstance(report, LadderRun) else [report]
        if not all(isinstance(r, EquivalenceReport) for r in reports):
            raise ConfigError(f"no plot data for {type(report).__name__}")
        os.makedirs(path, exist_ok=True)
        written = []
        for rep in reports:
            for name, pred in rep.predicates.items():
                p = os.path.join(path, f"seed{rep.seed}_{name}.csv")
                _write_table(pred.evidence, p)
                written.append(p)
        return written
    except OSError as exc:
        raise ConfigError(f"cannot write plot data to {path}: {exc}") from exc


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="exptail", description="Exponential-tail norms and bounds for random vectors.")
    p.add_argument("--json", action="store_true", help="machine-readable output only")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--phi", help="Young function config (JSON)")
        if model:
            sp.add_argument("--model", help="distribution config (JSON)")
            sp.add_argument("--n", type=int)
            sp.add_argument("--run-config", help="run config (JSON) with grids, n, seeds")
        sp.add_argument("--out", help="write the JSON report here")

    sp = sub.add_parser("conjugate", help="Young-Fenchel conjugate at a point")
    common(sp, model=False)
    sp.add_argument("--y", type=_vector, required=True)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--grid-out", help="also tabulate phi* on knots into this CSV")
    sp.set_defaults(func=cmd_conjugate)

    sp = sub.add_parser("tail", help="empirical tail against the Chernov bound")
    common(sp)
    sp.add_argument("--x", type=_vector, help="one query; omit for a sweep over the x grid")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--plot-csv", help="CSV of the sweep for plotting")
    sp.set_defaults(func=cmd_tail)

    sp = sub.add_parser("norm", help="B(phi), GLS and Orlicz norms of a sample")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--analytic", action="store_true", help="closed-form MGF oracle for B(phi)")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("certify", help="K(gamma) and L integrability certificates")
    common(sp, model=False)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("verify", help="equivalence ladder across seeds")
    common(sp)
    sp.add_argument("--seeds", type=_ints)
    sp.add_argument("--evidence-csv", help="directory for per-predicate evidence CSVs")
    sp.add_argument("--empirical", action="store_true", help="empirical MGF oracle for predicate D")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="re-read a JSON report; optionally emit plot data")
    sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--plot-csv", help="CSV file (evidence table) or directory (ladder)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        err = {"error": str(exc), "exit_code": EXIT_CONFIG}
        print(json.dumps(err) if args.json else f"exptail: error: {exc}",
              file=sys.stdout if args.json else sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
