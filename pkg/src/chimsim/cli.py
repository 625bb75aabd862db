"""Command line entry point.

Exit status: 0 on success, 1 on configuration errors, 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .analysis import AnalysisParams, mc_oracle, pr_t_imb, pr_x, pr_y_given_x, q_coll, y_support
from .config import ExperimentConfig, load_config
from .errors import ChimError, ConfigError, DimensionError
from .latin import build_mols, next_prime, truncate, write_rectangle
from .schedule import write_schedule_csv
from .sweep import (compare, fmt, read_metrics, run_one, run_sweep, schemes, seed_setup,
                    write_compare, write_outputs)

ANALYZE_HEADER = ("P", "alpha", "M", "K", "m", "x", "y", "t", "pr_x", "pr_y_given_x",
                  "q", "pr_t_imb", "q_mc", "q_mc_stderr")


def _config(path) -> ExperimentConfig:
    if not path:
        return ExperimentConfig().validate()
    try:
        return load_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def cmd_gen_latin(args):
    M, K = args.m_rows, args.k_cols
    q = args.q if args.q is not None else next_prime(max(M, K))
    family = build_mols(q)
    if not 1 <= args.index <= len(family):
        raise DimensionError(f"index must lie in [1, {len(family)}]")
    rect = truncate(family[args.index - 1], M, K)
    if args.out:
        write_rectangle(rect, args.out)
    else:
        write_rectangle(rect, sys.stdout)


def cmd_dump_schedule(args):
    cfg = _config(args.config)
    n = args.omega if args.omega is not None else max(cfg.omega)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    _world, chim, _zig = seed_setup(cfg, seed, n)
    if args.out:
        write_schedule_csv(chim[:n], args.out)
    else:
        write_schedule_csv(chim[:n], sys.stdout)


def cmd_run(args):
    cfg = _config(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    result = run_sweep(cfg)
    paths = write_outputs(result, cfg.output_dir)
    if args.trace_omega is not None:
        _write_trace(cfg, args.trace_omega)
    for rec in result.compare():
        print(f"omega={rec['omega']:3d}  APC {rec['apc_chim']:.4f} vs {rec['apc_zigbee']:.4f}"
              f"  AEC {rec['aec_chim']:.5f} vs {rec['aec_zigbee']:.5f} mW"
              f"  DPS {rec['dps_chim']:.3f} vs {rec['dps_zigbee']:.3f}"
              f"  (APC -{100 * rec['apc_improvement']:.1f}%)")
    for name, p in paths.items():
        print(f"wrote {name}: {p}")


def _write_trace(cfg, omega):
    seed = cfg.seeds[0]
    world, chim, zig = seed_setup(cfg, seed, omega)
    for scheme in schemes(cfg):
        res = run_one(cfg, scheme, world, chim, zig, omega)
        path = os.path.join(cfg.output_dir, f"log_{scheme}_omega{omega}_seed{seed}.csv")
        res.log.write_csv(path)
        print(f"wrote trace: {path}")


def analysis_rows(cfg: ExperimentConfig):
    K, M, P = cfg.sensors, cfg.channels, cfg.surrounding_sensors
    m = cfg.family_size or next_prime(max(M, K)) - 1
    rng = np.random.default_rng(cfg.seeds[0])
    base = AnalysisParams(P, cfg.alpha, M, K, m)
    for x in range(0, min(P, base.Z) + 1):
        px = base.with_(x=x)
        for y in y_support(px):
            pxy = px.with_(y=y)
            q = q_coll(pxy)
            q_mc, q_se = mc_oracle(pxy, cfg.mc_samples, rng)
            for t in cfg.t_values:
                p = pxy.with_(t=t)
                yield {"P": P, "alpha": cfg.alpha, "M": M, "K": K, "m": m, "x": x, "y": y, "t": t,
                       "pr_x": pr_x(p), "pr_y_given_x": pr_y_given_x(p), "q": q,
                       "pr_t_imb": pr_t_imb(p, q), "q_mc": q_mc, "q_mc_stderr": q_se}


def cmd_analyze(args):
    cfg = _config(args.config)
    path = args.out or os.path.join(cfg.output_dir, "analysis.csv")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANALYZE_HEADER)
        for rec in analysis_rows(cfg):
            w.writerow([fmt(rec[h]) for h in ANALYZE_HEADER])
    print(f"wrote analysis: {path}")


def cmd_compare(args):
    rows = read_metrics(args.metrics)
    records = compare(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_compare(records, fh)
    else:
        write_compare(records, sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chimsim", description="CHIM inter-WBAN interference simulator")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-latin", help="write one member of an orthogonal rectangle family")
    g.add_argument("--q", type=int, help="prime construction order (default: smallest prime >= max(M, K))")
    g.add_argument("--m-rows", type=int, required=True)
    g.add_argument("--k-cols", type=int, required=True)
    g.add_argument("--index", type=int, default=1, help="1-based family member")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_latin)

    d = sub.add_parser("dump-schedule", help="CSV of CHIM schedules for one network setup")
    d.add_argument("--config")
    d.add_argument("--omega", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--out")
    d.set_defaults(func=cmd_dump_schedule)

    r = sub.add_parser("run", help="run the configured sweep")
    r.add_argument("--config")
    r.add_argument("--output-dir")
    r.add_argument("--trace-omega", type=int, help="also write the transmission log of the first seed at this omega")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="evaluate the closed-form model with a Monte-Carlo check")
    a.add_argument("--config")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", help="CHIM vs ZIGBEE improvement table from a metrics CSV")
    c.add_argument("--metrics", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ChimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
