"""Command-line front end: grid | keyrate | covbounds | simulate.

Every command is a pure function of (config file, flags, seed); rerunning
with the same inputs reproduces the outputs byte for byte. Primary
artifacts go to --out (or stdout); the accompanying summary JSON goes to
stdout when the artifact went to a file, to stderr otherwise.

Exit codes: 0 success, 2 configuration error, 3 numerical/resource
failure (including failed simulation bound checks).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .bounds import SecurityParams, f_continuity, rate_finite
from .config import ConfigError, RunConfig, load_config
from .constellation import (
    build_grid,
    epsilon_a,
    epsilon_p_closed,
    epsilon_p_numeric,
    epsilon_tail,
    grid_to_csv,
)
from .covariance import (
    bound_oracle_rows,
    bound_sweep_to_csv,
    deviation_bound_sweep,
    oracle_sweep_to_csv,
)
from .fock import ResourceError
from .sim import SimConfig, empirical_epsilon_check, histogram_to_csv, run_simulation

KEYRATE_CSV_SCHEMA = "cvqkdsec-keyrate-v1"
FCURVE_CSV_SCHEMA = "cvqkdsec-fcurve-v1"

# epsilon_a is assembled from d^2 rank-one updates; past this bit depth the
# cost explodes and the simulate command skips the analytic bound checks.
EPS_A_MAX_B = 8


@contextmanager
def _artifact(path):
    if path:
        with open(path, "w") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit_summary(summary: dict, to_stdout: bool) -> None:
    text = json.dumps(summary, sort_keys=True, indent=2)
    print(text, file=sys.stdout if to_stdout else sys.stderr)


def _rows_to_csv(stream, schema, fields, rows):
    stream.write(f"# schema={schema}\n")
    writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, float) else v
                         for k, v in row.items()})


def _rows_to_json(stream, schema, rows):
    stream.write(json.dumps({"schema": schema, "rows": rows}, sort_keys=True, indent=2))
    stream.write("\n")


def cmd_grid(cfg: RunConfig, args) -> int:
    if args.figure not in (None, "grid"):
        raise ConfigError("figure", f"grid emits only --figure=grid, got {args.figure!r}")
    spec = cfg.constellation()
    grid = build_grid(spec)
    summary = {
        "N": spec.N,
        "R_A": spec.R_A,
        "b": spec.b,
        "n_points": grid.n_points,
        "delta_A": spec.delta_A,
        "epsilon_a": epsilon_a(grid),
        "epsilon_p_numeric": epsilon_p_numeric(spec),
        "epsilon_p_closed": epsilon_p_closed(spec),
        "epsilon_tail": epsilon_tail(spec.R_A, spec.N),
        "epsilon_p_note": (
            "epsilon_p_numeric integrates the coherent-state distance against the "
            "ideal Gaussian density (symbol error of the intended draw); the "
            "out-of-range contribution is reported separately as epsilon_tail"
        ),
    }
    fmt = args.format or cfg.output().format
    with _artifact(args.out) as fh:
        if fmt == "csv":
            grid_to_csv(grid, fh)
        else:
            w = grid.axis_weights
            mid = grid.midpoints
            rows = [
                {"j": j, "k": k, "q_Aj": float(mid[j]), "p_Ak": float(mid[k]),
                 "re_alpha": float(mid[j] / math.sqrt(2)), "im_alpha": float(mid[k] / math.sqrt(2)),
                 "p_jk": float(w[j] * w[k])}
                for j in range(mid.size) for k in range(mid.size)
            ]
            _rows_to_json(fh, "cvqkdsec-grid-v1", rows)
    _emit_summary(summary, to_stdout=args.out is not None)
    return 0


def _keyrate_figure_f(cfg: RunConfig, args) -> int:
    card = cfg.measurement().cardinality
    eps_values = np.geomspace(1e-8, 1e-2, 100)
    rows = [{"eps_a": float(e), "f_bits": f_continuity(float(e), card)} for e in eps_values]
    fmt = args.format or cfg.output().format
    with _artifact(args.out) as fh:
        if fmt == "csv":
            _rows_to_csv(fh, FCURVE_CSV_SCHEMA, ["eps_a", "f_bits"], rows)
        else:
            _rows_to_json(fh, FCURVE_CSV_SCHEMA, rows)
    _emit_summary({"cardinality": card, "points": len(rows)}, to_stdout=args.out is not None)
    return 0


def cmd_keyrate(cfg: RunConfig, args) -> int:
    if args.figure == "f":
        return _keyrate_figure_f(cfg, args)
    if args.figure not in (None, "keyrate"):
        raise ConfigError("figure", f"keyrate emits --figure=keyrate or f, got {args.figure!r}")

    ch = cfg.channel()
    meas = cfg.measurement()
    sec = cfg.security()
    spec = cfg.constellation()
    if sec.beta is None:
        raise ConfigError("security.beta", "reconciliation efficiency must be given explicitly")
    if sec.n is None and sec.n_sweep is None:
        raise ConfigError("security.n", "give security.n or security.n_sweep")
    eps_a = sec.eps_a
    if eps_a is None:
        eps_a = epsilon_a(build_grid(spec))
    if sec.n_sweep is not None:
        n_min, n_max, points = sec.n_sweep
        n_values = np.geomspace(n_min, n_max, points)
    else:
        n_values = np.array([sec.n])

    rows = []
    first_positive = None
    for n in n_values:
        params = SecurityParams(eps_s=sec.eps_s, eps_h=sec.eps_h, eps_a=eps_a,
                                n=float(n), cardinality=meas.cardinality, beta=sec.beta)
        rep = rate_finite(ch, spec.N, params, exact_lhl=args.exact_lhl)
        rows.append({
            "n": float(n), "r_inf": rep.r_inf, "f_term": rep.f_term,
            "aep_term": rep.aep_term, "r_n": rep.r_n, "positive": rep.r_n > 0,
        })
        if first_positive is None and rep.r_n > 0:
            first_positive = float(n)

    fmt = args.format or cfg.output().format
    with _artifact(args.out) as fh:
        if fmt == "csv":
            _rows_to_csv(fh, KEYRATE_CSV_SCHEMA,
                         ["n", "r_inf", "f_term", "aep_term", "r_n", "positive"], rows)
        else:
            _rows_to_json(fh, KEYRATE_CSV_SCHEMA, rows)
    _emit_summary({
        "eps_a": eps_a,
        "cardinality": meas.cardinality,
        "total_epsilon": sec.eps_h + sec.eps_s + eps_a,
        "first_positive_n": first_positive,
    }, to_stdout=args.out is not None)
    return 0


def cmd_covbounds(cfg: RunConfig, args) -> int:
    spec = cfg.constellation()
    ch = cfg.channel()
    meas = cfg.measurement()
    # the oracle table evaluates the exact average-state error per depth,
    # which is only tractable for coarse grids; the analytic table carries
    # an upper bound past b=6 and can sweep much further
    b_min = args.b_min if args.b_min is not None else 2
    b_max = args.b_max if args.b_max is not None else (4 if args.table == "oracle" else 14)
    if args.table == "oracle" and b_max > EPS_A_MAX_B:
        raise ConfigError("b_max", f"the oracle table needs b <= {EPS_A_MAX_B}")
    b_values = range(b_min, b_max + 1)
    fmt = args.format or cfg.output().format

    if args.table == "oracle":
        sigma_b = math.sqrt(ch.eta * spec.N + ch.u + 1.0)
        rows = bound_oracle_rows(spec.N, spec.R_A, b_values, ch,
                                 M_values=[2 * sigma_b, 4 * sigma_b, 6 * sigma_b])
        with _artifact(args.out) as fh:
            if fmt == "csv":
                oracle_sweep_to_csv(rows, fh)
            else:
                _rows_to_json(fh, "cvqkdsec-covoracle-v1", rows)
        summary = {"all_satisfied": all(r["satisfied"] for r in rows)}
        _emit_summary(summary, to_stdout=args.out is not None)
        return 0

    rows, summary = deviation_bound_sweep(spec.N, spec.R_A, b_values, ch, meas)
    with _artifact(args.out) as fh:
        if fmt == "csv":
            bound_sweep_to_csv(rows, fh)
        else:
            _rows_to_json(fh, "cvqkdsec-covbounds-v1", rows)
    _emit_summary(summary, to_stdout=args.out is not None)
    return 0


def cmd_simulate(cfg: RunConfig, args) -> int:
    spec = cfg.constellation()
    ch = cfg.channel()
    meas = cfg.measurement()
    sim_sec = cfg.sim()
    grid = build_grid(spec)
    sim_cfg = SimConfig(
        grid=grid, ch=ch, meas=meas,
        n_rounds=sim_sec.n_rounds,
        seed=args.seed if args.seed is not None else sim_sec.seed,
        modulation=sim_sec.modulation,
        clip_mode=sim_sec.clip_mode,
        backend=sim_sec.backend,
        threads=args.threads,
        entropy_bias_correction=sim_sec.entropy_bias_correction,
    )
    result = run_simulation(sim_cfg)

    checks = []
    check_note = None
    if spec.b <= EPS_A_MAX_B:
        from .covariance import cross_deviation_bound, diag_deviation_bound

        ea = epsilon_a(grid)
        ep = epsilon_p_numeric(spec)
        bounds = {
            "q_B^2": diag_deviation_bound(min(ea, 1.0), meas.M),
            "q_A*q_B": cross_deviation_bound(ep, spec.R_A, meas.M, spec.N),
        }
        report = empirical_epsilon_check(sim_cfg, bounds, strict=False)
        checks = [
            {"moment": r.moment, "bound": r.bound, "gap": r.gap,
             "sigma_mc": r.sigma_mc, "n_required": r.n_required, "status": r.status}
            for r in report.rows
        ]
    else:
        check_note = f"bound checks skipped: epsilon_a is not computed for b > {EPS_A_MAX_B}"

    doc = {"result": result.to_dict(), "epsilon_checks": checks}
    if check_note:
        doc["check_note"] = check_note
    text = json.dumps(doc, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
            fh.write("\n")
        hist_path = args.out + ".hist.csv" if not args.out.endswith(".json") \
            else args.out[:-5] + ".hist.csv"
        with open(hist_path, "w") as fh:
            histogram_to_csv(result, fh)
        print(f"wrote {args.out} and {hist_path}", file=sys.stderr)
    else:
        print(text)
    return 3 if any(c["status"] == "fail" for c in checks) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvqkdsec",
        description="Finite-size security bounds and simulation for discretely "
                    "modulated CV QKD (all quantities in shot-noise units)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config document")
        p.add_argument("--out", help="primary artifact path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"],
                       help="artifact format (default from config, else csv)")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override a config field")
        p.add_argument("--figure", choices=["grid", "f", "keyrate"],
                       help="named dataset to emit (grid, keyrate commands)")

    p = sub.add_parser("grid", help="emit the modulation grid and preparation errors")
    common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("keyrate", help="finite-size key rate sweep (or the f-curve dataset)")
    common(p)
    p.add_argument("--exact-lhl", action="store_true",
                   help="include the higher-order hashing terms in r_n")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("covbounds", help="covariance deviation bounds over bit depths")
    common(p)
    p.add_argument("--b-min", type=int, default=None,
                   help="smallest bit depth in the sweep (default 2)")
    p.add_argument("--b-max", type=int, default=None,
                   help="largest bit depth (default 14, oracle table 4)")
    p.add_argument("--table", choices=["bounds", "oracle"], default="bounds",
                   help="analytic bound sweep or bound-vs-oracle verification table")
    p.set_defaults(func=cmd_covbounds)

    p = sub.add_parser("simulate", help="Monte Carlo protocol run plus bound checks")
    common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "exact_lhl"):
        args.exact_lhl = False
    try:
        cfg = load_config(args.config, args.overrides)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical/resource failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
