"""
Command line: ``regimetest {stats,test,plotdata,simulate-dump,estimate}``.

Exit codes: 0 success, 2 bad input, 3 inference failure, 4 degenerate
statistic (too few squeezes or zero spread in the observed series).
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import datafiles as io
from .errors import DegenerateStatisticError, InferenceError, InputError, RegimeTestError
from .inference import composite_test, objective_grid, run_grid
from .series_stats import (
    simple_returns,
    squeeze_durations,
    squeeze_statistic,
    summarize,
    vol_tracks,
)
from .simulate import SimRequest, simulate

log = logging.getLogger("regimetest")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFERENCE = 3
EXIT_DEGENERATE = 4


def _out_dir(config) -> Path:
    out = Path(config.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(file, config):
    return io.load_series(file, dt=config.dt, session_gap=config.session_gap,
                          min_rows=config.window + 3)


def _observed(path, config):
    sq, t_star = squeeze_statistic(path, config.p, config.window, config.r)
    return sq, t_star, summarize(path, config.p, config.window)


def cmd_stats(files, config) -> list:
    """One record per series: id, number of squeezes and the observed statistic.

    Degenerate series get ``t=None`` and a ``degenerate`` reason instead of numbers.
    """
    records = []
    for f in files:
        path = _load(f, config)
        rec = {"id": Path(f).stem}
        try:
            sq, t_star = squeeze_statistic(path, config.p, config.window, config.r)
            rec.update(L=sq.L, t=list(t_star.t), degenerate=None)
        except DegenerateStatisticError as exc:
            tracks = vol_tracks(simple_returns(path), config.window)
            L = squeeze_durations(tracks, config.p).L if tracks.sigma_hat.max() > 0 else 0
            rec.update(L=L, t=None, degenerate=str(exc))
        records.append(rec)
    return records


def format_stats(records, r) -> str:
    header = f"{'series':<28}{'occurrence':>12}" + "".join(f"{'t*_' + str(j + 1):>10}" for j in range(r))
    lines = [header]
    for rec in records:
        head = f"{rec['id']:<28}{rec['L']:>12d}"
        if rec["t"] is None:
            lines.append(head + "".join(f"{'NA':>10}" for _ in range(r))
                         + f"  degenerate: {rec['degenerate']}")
        else:
            lines.append(head + "".join(f"{v:>10.2f}" for v in rec["t"]))
    return "\n".join(lines) + "\n"


def cmd_test(file, config, hypothesis=None):
    """Run the composite test and write the per-theta table, the composite
    row and a JSON dump. Returns ``(report, written_files)``."""
    hypothesis = hypothesis or config.hypothesis
    path = _load(file, config)
    _, t_star, summary = _observed(path, config)
    report = composite_test(t_star, summary, config.theta_grid(hypothesis), len(path),
                            config.test_config())
    sid = Path(file).stem
    out = _out_dir(config)
    alpha_hdr = [f"alpha_{j + 1}" for j in range(config.r)]
    per_theta = out / f"{sid}_{hypothesis}_per_theta.txt"
    per_theta.write_text(io.format_table(["theta"] + alpha_hdr,
                                         [(row.label, row.alphas) for row in report.per_theta], 3))
    composite = out / f"{sid}_{hypothesis}_composite.txt"
    composite.write_text(io.format_table(["series"] + alpha_hdr, [(sid, report.composite)], 3))
    dump = out / f"{sid}_{hypothesis}_report.json"
    data = report.to_dict()
    data["series"] = sid
    data["summary"] = asdict(summary)
    io.write_json(data, dump)
    return report, [per_theta, composite, dump]


def cmd_plotdata(file, config, hypothesis=None):
    """Surrogate statistic matrices per grid point, the observed point and
    five-number summaries per component. ``B = 1`` is allowed here."""
    hypothesis = hypothesis or config.hypothesis
    path = _load(file, config)
    _, t_star, summary = _observed(path, config)
    points, ensembles = run_grid(summary, config.theta_grid(hypothesis), len(path),
                                 config.test_config())
    sid = Path(file).stem
    out = _out_dir(config)
    cols = [f"t{j + 1}" for j in range(config.r)]
    written = []
    observed = out / f"{sid}_observed.csv"
    io.write_matrix([t_star.t], observed, cols)
    written.append(observed)
    summary_rows = []
    for pt, ens in zip(points, ensembles):
        f = out / f"{sid}_{hypothesis}_theta{pt.index:03d}.csv"
        io.write_matrix(ens.stat_rows, f, cols)
        written.append(f)
        for j, c in enumerate(cols):
            summary_rows.append((pt.label, c, io.five_number_summary(ens.stat_rows[:, j])))
    summ = out / f"{sid}_{hypothesis}_boxplot.csv"
    with open(summ, "w", newline="") as fh:
        fh.write("theta_index,theta,component,min,q1,median,q3,max\n")
        for k, (label, c, five) in enumerate(summary_rows):
            idx = k // len(cols)
            fh.write(f"{idx},\"{label}\",{c}," + ",".join(repr(v) for v in five) + "\n")
    written.append(summ)
    return written


def cmd_estimate(file, config, hypothesis=None):
    """Least-squares objective over the grid and its minimiser."""
    hypothesis = hypothesis or config.hypothesis
    path = _load(file, config)
    _, t_star, summary = _observed(path, config)
    res = objective_grid(t_star, summary, config.theta_grid(hypothesis), len(path),
                         config.test_config())
    sid = Path(file).stem
    out = _out_dir(config)
    table = out / f"{sid}_{hypothesis}_objective.txt"
    table.write_text(io.format_table(["theta", "objective"],
                                     [(lab, [v]) for lab, v in zip(res.labels, res.values)], 4)
                     + f"argmin: {res.labels[res.argmin]}\n")
    dump = out / f"{sid}_{hypothesis}_objective.json"
    io.write_json({"series": sid, "hypothesis": hypothesis, "observed": list(t_star.t),
                   "objective": {lab: float(v) for lab, v in zip(res.labels, res.values)},
                   "argmin": res.labels[res.argmin],
                   "argmin_params": asdict(res.best.params)}, dump)
    return res, [table, dump]


def cmd_simulate_dump(file, config, hypothesis=None, sojourn=None, shape=None,
                      n_steps=None, x0=None, s0=None):
    """Simulate one path from the admissible model of a series and dump it."""
    hypothesis = hypothesis or config.hypothesis
    path = _load(file, config)
    summary = summarize(path, config.p, config.window)
    grid = config.theta_grid(hypothesis)
    if hypothesis != "gbm":
        grid = type(grid)(hypothesis, (sojourn if sojourn is not None else grid.sojourn_grid[0],),
                          (shape if shape is not None else grid.shape_grid[0],), grid.unit_scale)
    theta = grid.points(summary)[0].params
    req = SimRequest(theta, n_steps or len(path), config.dt,
                     s0=s0 if s0 is not None else float(path.prices[0]),
                     seed=config.seed, step_cap=config.step_cap)
    res = simulate(req, x0=x0)
    out = _out_dir(config) / f"{Path(file).stem}_{hypothesis}_sim.csv"
    io.dump_series(res.path, out, res.states)
    return res, out


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--p", type=float)
    common.add_argument("--window", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--B", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--hypothesis", choices=("gbm", "mmgbm", "smgbm"))
    common.add_argument("--grid", help="sojourn grid, e.g. 5:15:0.5 or 5,10,15")
    common.add_argument("--shape-grid", dest="shape_grid")
    common.add_argument("--unit-scale", dest="unit_scale", type=float)
    common.add_argument("--step-cap", dest="step_cap", type=float)
    common.add_argument("--redraw-limit", dest="redraw_limit", type=int)
    common.add_argument("--session-gap", dest="session_gap", choices=io.SESSION_GAP_POLICIES)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="regimetest", description=__doc__.splitlines()[1])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("stats", parents=[common], help="observed squeeze statistics")
    p.add_argument("series", nargs="+")
    for name, text in (("test", "composite surrogate test"),
                       ("plotdata", "surrogate statistic matrices for plotting"),
                       ("estimate", "grid least-squares objective")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("series")
    p = sub.add_parser("simulate-dump", parents=[common], help="dump one surrogate path")
    p.add_argument("series")
    p.add_argument("--sojourn", type=float, help="mean sojourn of state 1 in grid units")
    p.add_argument("--shape", type=float)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.add_argument("--x0", type=int, choices=(1, 2))
    p.add_argument("--s0", type=float)
    return ap


_CONFIG_KEYS = ("p", "window", "r", "B", "seed", "dt", "hypothesis", "grid", "shape_grid",
                "unit_scale", "step_cap", "redraw_limit", "session_gap", "out_dir")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = io.make_config(args.config, **{k: getattr(args, k) for k in _CONFIG_KEYS})
        if args.command == "stats":
            records = cmd_stats(args.series, config)
            text = format_stats(records, config.r)
            sys.stdout.write(text)
            if config.out_dir:
                out = _out_dir(config)
                (out / "stats.txt").write_text(text)
                io.write_json(records, out / "stats.json")
            return EXIT_DEGENERATE if any(r["t"] is None for r in records) else EXIT_OK
        if args.command == "test":
            report, files = cmd_test(args.series, config)
            sys.stdout.write(files[1].read_text())
        elif args.command == "plotdata":
            files = cmd_plotdata(args.series, config)
        elif args.command == "estimate":
            res, files = cmd_estimate(args.series, config)
            sys.stdout.write(files[0].read_text())
        else:
            _, out = cmd_simulate_dump(args.series, config, sojourn=args.sojourn,
                                       shape=args.shape, n_steps=args.n_steps, x0=args.x0,
                                       s0=args.s0)
            files = [out]
        for f in files:
            log.info("wrote %s", f)
        return EXIT_OK
    except DegenerateStatisticError as exc:
        print(f"regimetest: degenerate statistic: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InferenceError as exc:
        print(f"regimetest: inference failed: {exc}", file=sys.stderr)
        return EXIT_INFERENCE
    except (InputError, RegimeTestError) as exc:
        print(f"regimetest: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
