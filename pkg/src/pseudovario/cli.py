"""
Command-line front end.

Exit codes: 0 when every check passed, 1 when a mathematical check failed
(a witness is printed), 2 for usage or configuration errors.

CSV outputs use a header row, LF line endings and ``.`` as decimal
separator. Component indices in CSV files and messages are one-based;
replicate, space and time indices are zero-based.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import definiteness as dfn
from . import estimate as est
from . import transforms as tf
from .config import (ConfigError, bernstein_from_config, cm_from_config,
                     gneiting_from_config, load_json, model_from_config,
                     plan_from_config)
from .simulate import CovarianceAssemblyError, FieldSample, run_simulation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _fmt_points(points: np.ndarray) -> str:
    if points.shape[1] == 1:
        return ",".join(_fmt(p) for p in points[:, 0])
    return ",".join("(" + " ".join(_fmt(c) for c in p) + ")" for p in points)


def format_witness(report: dfn.DefinitenessReport) -> str:
    """Render a failing report as ``points=...; a=...; qf=...``."""
    parts = []
    if report.points is not None:
        parts.append(f"points={_fmt_points(report.points)}")
    if report.witness is not None:
        parts.append("a=" + ",".join(_fmt(v) for v in report.witness))
        parts.append(f"qf={_fmt(report.witness_qf)}")
    if not parts:
        parts.append(report.reason)
    return "; ".join(parts)


def _open_csv(path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _probe_configs(dim: int, count: int, seed: int) -> list:
    """The unit lattice ``{0, e1, 2 e1}`` followed by ``count`` random configurations."""
    lattice = np.zeros((3, dim))
    lattice[:, 0] = [0.0, 1.0, 2.0]
    rng = np.random.default_rng(seed)
    return [lattice] + dfn.random_configs(rng, count, dim, max_points=8)


def _load_model(path):
    if path is None:
        raise UsageError("--model is required")
    return model_from_config(load_json(path))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args, out) -> int:
    model = _load_model(args.model)
    configs = _probe_configs(model.dim, args.configs, args.seed)
    rows = []
    try:
        rep = dfn.check_pseudo_variogram(model, configs, args.tol)
    except dfn.SymmetryError as exc:
        print(f"pseudo-variogram: FAIL ({exc})", file=out)
        return EXIT_FAIL
    if rep.passed:
        print(f"pseudo-variogram: PASS on {rep.configs_checked} configs; projected eigenvalues "
              f"min={rep.min_eigenvalue:.6g} max={rep.max_eigenvalue:.6g} "
              f"(tol {rep.tolerance:.3g})", file=out)
    else:
        print(f"pseudo-variogram: FAIL ({rep.reason})", file=out)
        print(f"witness: {format_witness(rep)}", file=out)
    rows.append(["pseudo-variogram", rep.verdict.value, rep.min_eigenvalue, rep.max_eigenvalue,
                 rep.tolerance, format_witness(rep) if not rep.passed else ""])

    rng = np.random.default_rng(args.seed + 1)
    lattice = configs[0]
    lags = np.concatenate([rng.uniform(-3, 3, size=(1000, model.dim)),
                           (lattice[:, None, :] - lattice[None, :, :]).reshape(-1, model.dim)])
    sq = dfn.check_sqrt_inequality(model, lags)
    print(f"sqrt-inequality: {'PASS' if sq.passed else 'FAIL'} "
          f"(worst margin {sq.worst_margin:.3g}, {sq.kind})", file=out)
    rows.append(["sqrt-inequality", "pass" if sq.passed else "fail", "", "", "",
                 "" if sq.passed else f"i={sq.worst_case[0] + 1}; j={sq.worst_case[1] + 1}; "
                 f"h={','.join(_fmt(v) for v in sq.worst_case[2])}"])

    inter = dfn.check_intersection_triviality(model, configs[:5], probe_lags=lags)
    if inter.passed:
        print(f"intersection: in both pseudo- and cross-variogram sets "
              f"(deviation {inter.deviation:.3g})", file=out)
    else:
        print("intersection: not in intersection; " + "; ".join(inter.failed), file=out)
    rows.append(["intersection", inter.verdict.value, "", "", "", "; ".join(inter.failed)])

    if args.out:
        fh, w = _open_csv(args.out)
        with fh:
            w.writerow(["check", "verdict", "min_eigenvalue", "max_eigenvalue", "tolerance",
                        "detail"])
            w.writerows(rows)
    return EXIT_OK if (rep.passed and sq.passed) else EXIT_FAIL


def cmd_transform(args, out) -> int:
    model = _load_model(args.model)
    configs = _probe_configs(model.dim, args.configs, args.seed)
    rng = np.random.default_rng(args.seed)
    jobs = []
    if args.kind == "schoenberg":
        jobs = [((t, ""), tf.schoenberg_map(model, t), "pd") for t in args.t]
    elif args.kind == "laplace":
        jobs = [((t, lam), tf.laplace_map(model, t, lam), "pd") for t in args.t for lam in args.lam]
    elif args.kind == "general-laplace":
        if args.measure is None:
            raise UsageError("--measure is required for general-laplace")
        measure = cm_from_config(load_json(args.measure))
        jobs = [((t, ""), tf.general_laplace_map(model, t, measure, args.draws, rng), "pd")
                for t in args.t]
    elif args.kind == "residual":
        jobs = [((t, ""), tf.inverse_schoenberg_residual(model, t), "cnd") for t in args.t]
    elif args.kind == "bernstein":
        if args.bernstein is None:
            raise UsageError("--bernstein is required for the bernstein transform")
        g = bernstein_from_config(load_json(args.bernstein))
        try:
            composed = tf.bernstein_compose(g, model)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        jobs = [(("", ""), composed, "pseudo")]

    rows, ok = [], True
    for (t, lam), func, check in jobs:
        for ci, pts in enumerate(configs):
            if check == "pd":
                rep = dfn.check_pd(func, pts, args.tol)
            elif check == "cnd":
                rep = dfn.check_cnd(func, pts, args.tol)
            else:
                rep = dfn.check_pseudo_variogram(func, [pts], args.tol)
            rows.append([args.kind, t, lam, ci, rep.min_eigenvalue, rep.max_eigenvalue,
                         rep.tolerance, rep.verdict.value])
            if not rep.passed:
                ok = False
                print(f"{args.kind} t={t} lam={lam} config {ci}: FAIL; "
                      f"witness: {format_witness(rep)}", file=out)
    print(f"transform {args.kind}: {'PASS' if ok else 'FAIL'} over {len(rows)} checks", file=out)
    if args.out:
        fh, w = _open_csv(args.out)
        with fh:
            w.writerow(["kind", "t", "lam", "config", "min_eigenvalue", "max_eigenvalue",
                        "tolerance", "verdict"])
            w.writerows(rows)
    return EXIT_OK if ok else EXIT_FAIL


def _random_grids(model, count: int, seed: int, max_order: int = 60) -> list:
    rng = np.random.default_rng(seed)
    grids = []
    for _ in range(count):
        while True:
            ns = int(rng.integers(1, 9))
            nt = int(rng.integers(1, 9))
            if ns * nt * model.m <= max_order:
                break
        grids.append((rng.uniform(-2, 2, size=(ns, model.spatial_dim)),
                      rng.uniform(-2, 2, size=(nt, model.temporal_dim))))
    return grids


def cmd_gneiting_check(args, out) -> int:
    if args.model is None:
        raise UsageError("--model is required")
    model = gneiting_from_config(load_json(args.model))
    grids = []
    if args.plan:
        cfg = load_json(args.plan)
        try:
            grids.append((np.asarray(cfg["spatial"], dtype=float).reshape(len(cfg["spatial"]), -1),
                          np.asarray(cfg["temporal"], dtype=float).reshape(len(cfg["temporal"]), -1)))
        except KeyError as exc:
            raise ConfigError(f"plan is missing field {exc}") from exc
    grids += _random_grids(model, args.configs, args.seed)
    from .gneiting import assemble_spacetime_cov

    rows, ok = [], True
    for gi, (xs, ts) in enumerate(grids):
        M = assemble_spacetime_cov(model, xs, ts)
        rep = dfn.check_psd_matrix(M, args.tol)
        rows.append([gi, xs.shape[0], ts.shape[0], M.shape[0], rep.min_eigenvalue,
                     rep.tolerance, rep.verdict.value])
        if not rep.passed:
            ok = False
            print(f"grid {gi}: FAIL (min eigenvalue {rep.min_eigenvalue:.6g}); "
                  f"witness: a={','.join(_fmt(v) for v in rep.witness)}; "
                  f"qf={_fmt(rep.witness_qf)}", file=out)
    lo = min(r[4] for r in rows)
    print(f"gneiting-check: {'PASS' if ok else 'FAIL'} on {len(rows)} grids "
          f"(smallest eigenvalue {lo:.6g})", file=out)
    if args.out:
        fh, w = _open_csv(args.out)
        with fh:
            w.writerow(["grid", "n_space", "n_time", "order", "min_eigenvalue", "tolerance",
                        "verdict"])
            w.writerows(rows)
    return EXIT_OK if ok else EXIT_FAIL


def write_samples_csv(samples: FieldSample, path):
    N, m, ns, nt = samples.values.shape
    r, c, s, t = np.meshgrid(np.arange(N), np.arange(m) + 1, np.arange(ns), np.arange(nt),
                             indexing="ij")
    table = np.column_stack([r.ravel(), c.ravel(), s.ravel(), t.ravel()])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("replicate,component,space_index,time_index,value\n")
        buf = io.StringIO()
        vals = samples.values.ravel()
        for start in range(0, vals.size, 200_000):
            stop = start + 200_000
            for (a, b, cc, d), v in zip(table[start:stop].tolist(), vals[start:stop].tolist()):
                buf.write(f"{a},{b},{cc},{d},{v!r}\n")
            fh.write(buf.getvalue())
            buf.seek(0)
            buf.truncate()


def read_samples_csv(path, spatial, temporal) -> FieldSample:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read samples from {path}: {exc}") from exc
    idx = data[:, :4].astype(int)
    N = idx[:, 0].max() + 1
    m = idx[:, 1].max()
    values = np.zeros((N, m, len(spatial), len(temporal)))
    values[idx[:, 0], idx[:, 1] - 1, idx[:, 2], idx[:, 3]] = data[:, 4]
    return FieldSample(values, spatial, temporal)


def _write_report(report: est.CompareReport, path, lag_names):
    fh, w = _open_csv(path)
    with fh:
        w.writerow(["i", "j", *lag_names, "empirical", "model", "diff", "verdict"])
        for row in report.rows:
            i, j, *lags = row.index
            w.writerow([i + 1, j + 1, *lags, repr(row.empirical), repr(row.model),
                        repr(row.diff), "pass" if row.passed else "fail"])


def _lag_report(samples, model, abs_tol, statistic="cross-covariance"):
    index, emp, mod = est.lag_table(samples, model, statistic)
    return est.compare_report(emp, mod, abs_tol, index=index)


def _gneiting_for(gamma, phi, d):
    from .gneiting import MultivariateExtendedGneiting

    return MultivariateExtendedGneiting(phi, gamma, d / 2, d)


def cmd_simulate(args, out) -> int:
    if args.plan is None:
        raise UsageError("--plan is required")
    plan, gamma, phi = plan_from_config(load_json(args.plan), seed=args.seed)
    if args.model:
        gamma = _load_model(args.model)
    if gamma is None or phi is None:
        raise ConfigError("plan needs 'gamma' (or --model) and 'phi'")
    try:
        result = run_simulation(plan, gamma, phi, workers=args.workers)
    except CovarianceAssemblyError as exc:
        print(f"simulate: FAIL ({exc})", file=out)
        return EXIT_FAIL
    tol = args.tol if args.tol is not None else max(0.02, 4 / math.sqrt(plan.replicates))
    if args.out:
        write_samples_csv(result.samples, args.out)
    ok = True
    if plan.replicates >= 2:
        report = _lag_report(result.samples, _gneiting_for(gamma, phi, plan.d), tol)
        ok = report.passed
        worst = report.worst
        print(f"simulate: {plan.replicates} replicates; empirical vs model cross-covariance "
              f"{'PASS' if ok else 'FAIL'} (worst |diff| {worst.diff:.4g} at "
              f"i={worst.index[0] + 1}, j={worst.index[1] + 1}, lags={worst.index[2:]}, "
              f"tol {tol:.3g})", file=out)
        if args.empirical:
            _write_report(report, args.empirical, ["space_lag", "time_lag"])
    else:
        print("simulate: 1 replicate written; no empirical comparison", file=out)
    if plan.normalize and result.normalized is not None:
        print(f"normalized sum: mean {result.normalized.mean():.4g}, "
              f"sd {result.normalized.std():.4g}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_estimate(args, out) -> int:
    if args.plan is None or args.samples is None:
        raise UsageError("--plan and --samples are required")
    cfg = load_json(args.plan)
    plan, gamma, phi = plan_from_config(cfg, seed=args.seed)
    samples = read_samples_csv(args.samples, plan.spatial, plan.temporal)
    if samples.replicates < 2:
        raise ConfigError("estimation needs at least two replicates")
    model = _gneiting_for(gamma, phi, plan.d) if (gamma is not None and phi is not None) else None
    if model is None:
        raise ConfigError("plan needs 'gamma' and 'phi' to compare against")
    tol = args.tol if args.tol is not None else max(0.02, 4 / math.sqrt(samples.replicates))
    report = _lag_report(samples, model, tol, args.statistic)
    worst = report.worst
    print(f"estimate ({args.statistic}): {'PASS' if report.passed else 'FAIL'} over "
          f"{len(report.rows)} lags (worst |diff| {worst.diff:.4g}, tol {tol:.3g})", file=out)
    if args.out:
        _write_report(report, args.out, ["space_lag", "time_lag"])
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(args, out) -> int:
    model = _load_model(args.model)
    configs = _probe_configs(model.dim, args.configs, args.seed)
    rng = np.random.default_rng(args.seed)
    rows, ok = [], True
    constraints = ([args.constraint] if args.constraint != "both"
                   else [dfn.GLOBAL_SUM, dfn.PER_COMPONENT_SUM])
    for constraint in constraints:
        check = dfn.check_cnd if constraint == dfn.GLOBAL_SUM else dfn.check_almost_nd
        for ci, pts in enumerate(configs):
            rep = check(model, pts, args.tol)
            best, vec = dfn.brute_force_qf_search(model, pts, constraint, args.trials, rng)
            found = best > rep.tolerance
            agree = found == (not rep.passed)
            rows.append([constraint, ci, repr(best), repr(rep.max_eigenvalue), rep.tolerance,
                         "fail" if found else "pass", rep.verdict.value,
                         "agree" if agree else "disagree"])
            if found or not rep.passed:
                ok = False
                print(f"{constraint} config {ci}: search max {best:.6g}, eigen max "
                      f"{rep.max_eigenvalue:.6g}; witness: points={_fmt_points(rep.points)}; "
                      f"a={','.join(_fmt(v) for v in vec)}; qf={_fmt(best)}", file=out)
            if not agree:
                print(f"{constraint} config {ci}: search and eigenvalue verdicts disagree",
                      file=out)
    n_agree = sum(r[-1] == "agree" for r in rows)
    print(f"oracle: {n_agree}/{len(rows)} verdicts agree; "
          f"{'no violation found' if ok else 'violation found'}", file=out)
    if args.out:
        fh, w = _open_csv(args.out)
        with fh:
            w.writerow(["constraint", "config", "search_max", "eigen_max", "tolerance",
                        "search_verdict", "eigen_verdict", "agreement"])
            w.writerows(rows)
    return EXIT_OK if ok and n_agree == len(rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudovario",
        description="Validate pseudo-variograms, transform them, and simulate "
                    "multivariate Gneiting-type random fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", metavar="PATH", help="model JSON file")
        p.add_argument("--seed", type=int, default=None, metavar="S")
        p.add_argument("--tol", type=float, default=None, metavar="X",
                       help="tolerance (default: scale-aware)")
        p.add_argument("--out", metavar="PATH", help="CSV output file")

    p = sub.add_parser("validate", help="pseudo-variogram checks with witnesses")
    common(p)
    p.add_argument("--configs", type=int, default=20, metavar="N")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("transform", help="Schoenberg / Laplace / Bernstein transforms")
    common(p)
    p.add_argument("--configs", type=int, default=20, metavar="N")
    p.add_argument("--kind", default="schoenberg",
                   choices=["schoenberg", "laplace", "general-laplace", "residual", "bernstein"])
    p.add_argument("--t", type=float, nargs="+", default=[0.1, 1.0, 10.0])
    p.add_argument("--lam", type=float, nargs="+", default=[1.0])
    p.add_argument("--bernstein", metavar="PATH", help="Bernstein function JSON")
    p.add_argument("--measure", metavar="PATH", help="completely monotone function JSON")
    p.add_argument("--draws", type=int, default=10_000)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("gneiting-check", help="PSD checks of space-time covariance matrices")
    common(p)
    p.add_argument("--plan", metavar="PATH", help="plan JSON supplying a grid")
    p.add_argument("--configs", type=int, default=20, metavar="N")
    p.set_defaults(func=cmd_gneiting_check)

    p = sub.add_parser("simulate", help="spectral simulation with empirical covariances")
    common(p)
    p.add_argument("--plan", metavar="PATH")
    p.add_argument("--empirical", metavar="PATH", help="empirical-vs-model CSV")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimators on a samples CSV and model comparison")
    common(p, model=False)
    p.add_argument("--plan", metavar="PATH")
    p.add_argument("--samples", metavar="PATH")
    p.add_argument("--statistic", default="cross-covariance",
                   choices=["cross-covariance", "pseudo-variogram"])
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle", help="brute-force quadratic form search")
    common(p)
    p.add_argument("--configs", type=int, default=20, metavar="N")
    p.add_argument("--trials", type=int, default=10_000, metavar="N")
    p.add_argument("--constraint", default="both",
                   choices=[dfn.GLOBAL_SUM, dfn.PER_COMPONENT_SUM, "both"])
    p.set_defaults(func=cmd_oracle)
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command != "simulate" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args, out)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
