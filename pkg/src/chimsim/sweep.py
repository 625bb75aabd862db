"""Seeded (scheme, omega, seed) sweeps and their CSV summaries.

For one seed, the largest network in the omega sweep is drawn once and every
smaller omega uses its first WBANs. Both schemes see the same topology, so
scheme and omega differences are not confounded by topology resampling.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .errors import ChimError
from .latin import family_for
from .schedule import chim_setup, zigbee_setup
from .simcore import EnergyModel, NetworkModel, run_chim, run_zigbee

METRICS_HEADER = ("scheme", "omega", "alpha", "seed", "apc", "aec", "dps")
SUMMARY_HEADER = ("scheme", "omega", "runs", "apc_mean", "apc_std",
                  "aec_mean", "aec_std", "dps_mean", "dps_std")
COMPARE_HEADER = ("omega", "apc_chim", "apc_zigbee", "apc_improvement",
                  "aec_chim", "aec_zigbee", "aec_improvement",
                  "dps_chim", "dps_zigbee", "dps_improvement")
CHECKPOINT_HEADER = ("scheme", "omega", "superframes", "dps_mean")


class SweepError(ChimError):
    pass


@dataclass(frozen=True)
class MetricRow:
    scheme: str
    omega: int
    alpha: float
    seed: int
    apc: float
    aec: float
    dps: float


@dataclass
class SweepResult:
    rows: list
    checkpoints: dict   # (scheme, omega, seed) -> running DPS at each checkpoint
    checkpoint_at: list

    def summary(self):
        return summarize(self.rows)

    def compare(self):
        return compare(self.rows)


def fmt(v) -> str:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} in output")
        return repr(v)
    return str(v)


def build_network(cfg: ExperimentConfig, n: int, rng) -> NetworkModel:
    if cfg.topology == "geometric":
        return NetworkModel.geometric(n, cfg.sensors, rng, cfg.area_m, cfg.range_m,
                                      cfg.body_radius_m, cfg.max_slot_offset)
    return NetworkModel.probabilistic(n, cfg.sensors, cfg.alpha, rng, cfg.max_slot_offset)


def schemes(cfg):
    return ("chim", "zigbee") if cfg.scheme == "both" else (cfg.scheme,)


def checkpoints_for(cfg) -> list:
    marks = list(range(cfg.checkpoint_every, cfg.superframes + 1, cfg.checkpoint_every))
    if not marks or marks[-1] != cfg.superframes:
        marks.append(cfg.superframes)
    return marks


def energy_for(cfg: ExperimentConfig) -> EnergyModel:
    return EnergyModel(cfg.tx_power_dbm, cfg.slot_ms, cfg.beacon_interval_s)


def seed_setup(cfg: ExperimentConfig, seed: int, n: int | None = None):
    """Topology, CHIM and ZIGBEE schedules for one seed, drawn at the largest omega.

    Any omega of the sweep uses ``network.restrict(omega)`` and the first omega
    schedules. ``n`` widens the draw beyond the sweep when needed.
    """
    n_max = max(max(cfg.omega), n or 0)
    rng = np.random.default_rng(seed)
    world = build_network(cfg, n_max, rng)
    family = family_for(cfg.channels, cfg.sensors)
    chim = chim_setup(n_max, cfg.sensors, cfg.channels, family, rng, cfg.tiebreak)
    zig = zigbee_setup(n_max, cfg.sensors, cfg.gts, rng)
    return world, chim, zig


def run_one(cfg: ExperimentConfig, scheme: str, world, chim, zig, omega: int):
    net = world.restrict(omega)
    if scheme == "chim":
        return run_chim(net, chim[:omega], cfg.superframes, cfg.inactive_slots, energy_for(cfg))
    return run_zigbee(net, zig[:omega], cfg.superframes, cfg.inactive_slots, energy_for(cfg))


def run_seed(cfg: ExperimentConfig, seed: int):
    """All (scheme, omega) runs for one seed. Returns metric rows and DPS checkpoints."""
    marks = np.array(checkpoints_for(cfg)) - 1
    world, chim_all, zig_all = seed_setup(cfg, seed)

    rows, marks_out = [], {}
    for scheme in schemes(cfg):
        for omega in cfg.omega:
            try:
                res = run_one(cfg, scheme, world, chim_all, zig_all, omega)
            except ChimError as exc:
                raise SweepError(f"scheme={scheme} omega={omega} seed={seed}: {exc}") from exc
            m = res.metrics
            rows.append(MetricRow(scheme, omega, cfg.alpha, seed, m.apc, m.aec, m.dps))
            marks_out[(scheme, omega, seed)] = m.dps_running()[marks]
    return rows, marks_out


def _run_seed_job(args):
    return run_seed(*args)


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    cfg.validate()
    jobs = [(cfg, s) for s in cfg.seeds]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_seed_job, jobs))
    else:
        parts = [_run_seed_job(j) for j in jobs]
    rows, marks = [], {}
    for r, m in parts:
        rows.extend(r)
        marks.update(m)
    order = {s: i for i, s in enumerate(("chim", "zigbee"))}
    rows.sort(key=lambda r: (order[r.scheme], r.omega, r.seed))
    return SweepResult(rows, marks, checkpoints_for(cfg))


def _stats(values):
    a = np.asarray(values, dtype=float)
    std = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return float(a.mean()), std


def summarize(rows) -> list:
    """Mean and sample std of each metric per (scheme, omega)."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.scheme, r.omega), []).append(r)
    out = []
    for (scheme, omega), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        rec = {"scheme": scheme, "omega": omega, "runs": len(rs)}
        for metric in ("apc", "aec", "dps"):
            rec[f"{metric}_mean"], rec[f"{metric}_std"] = _stats([getattr(r, metric) for r in rs])
        out.append(rec)
    return out


def improvement(chim: float, zigbee: float) -> float:
    """Relative reduction of CHIM against the baseline; 0 when the baseline is 0."""
    return (zigbee - chim) / zigbee if zigbee > 0 else 0.0


def compare(rows) -> list:
    """Per-omega CHIM vs ZIGBEE means and improvement ratios."""
    by = {(s["scheme"], s["omega"]): s for s in summarize(rows)}
    out = []
    for omega in sorted({o for (_, o) in by}):
        c, z = by.get(("chim", omega)), by.get(("zigbee", omega))
        if c is None or z is None:
            continue
        rec = {"omega": omega}
        for metric in ("apc", "aec", "dps"):
            cm, zm = c[f"{metric}_mean"], z[f"{metric}_mean"]
            rec[f"{metric}_chim"] = cm
            rec[f"{metric}_zigbee"] = zm
            rec[f"{metric}_improvement"] = improvement(cm, zm)
        out.append(rec)
    return out


def checkpoint_means(result: SweepResult) -> list:
    groups: dict = {}
    for (scheme, omega, _seed), vals in result.checkpoints.items():
        groups.setdefault((scheme, omega), []).append(vals)
    order = {"chim": 0, "zigbee": 1}
    out = []
    for (scheme, omega) in sorted(groups, key=lambda k: (order[k[0]], k[1])):
        mean = np.mean(groups[(scheme, omega)], axis=0)
        for n, v in zip(result.checkpoint_at, mean):
            out.append({"scheme": scheme, "omega": omega, "superframes": n, "dps_mean": float(v)})
    return out


def _write(path, header, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in records:
            w.writerow([fmt(rec[h]) for h in header])


def write_metrics(rows, path):
    _write(path, METRICS_HEADER, (r.__dict__ for r in rows))


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise SweepError(f"{path}: expected header {','.join(METRICS_HEADER)}")
        rows = []
        for n, rec in enumerate(reader, start=2):
            try:
                rows.append(MetricRow(rec["scheme"], int(rec["omega"]), float(rec["alpha"]),
                                      int(rec["seed"]), float(rec["apc"]), float(rec["aec"]),
                                      float(rec["dps"])))
            except (TypeError, ValueError) as exc:
                raise SweepError(f"{path} line {n}: {exc}") from None
    return rows


def write_outputs(result: SweepResult, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, f"{name}.csv")
             for name in ("metrics", "summary", "compare", "dps_checkpoints")}
    write_metrics(result.rows, paths["metrics"])
    _write(paths["summary"], SUMMARY_HEADER, result.summary())
    _write(paths["compare"], COMPARE_HEADER, result.compare())
    _write(paths["dps_checkpoints"], CHECKPOINT_HEADER, checkpoint_means(result))
    return paths


def write_compare(records, dest):
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(COMPARE_HEADER)
    for rec in records:
        w.writerow([fmt(rec[h]) for h in COMPARE_HEADER])
