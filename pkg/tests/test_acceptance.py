"""Acceptance criteria, each at its stated tolerance.

Every criterion records one PASS/FAIL line in ``VERDICTS``; the conftest hook
prints them at the end of the pytest run. Running this file directly goes
through pytest.main with the same summary.
"""
import itertools
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from chimsim import _kernels
from chimsim.analysis import (AnalysisParams, mc_oracle, pr_t_imb, pr_t_imb_expanded,
                              pr_y_given_x, q_coll, y_support)
from chimsim.config import ExperimentConfig
from chimsim.latin import LatinSquare, are_orthogonal, build_mols, family_for, is_latin, join
from chimsim.schedule import chim_setup, zigbee_setup
from chimsim.simcore import NetworkModel, run_chim, run_zigbee
from chimsim.sweep import run_sweep

VERDICTS: dict = {}
TITLES = {
    "1": "Latin correctness (q=3..23, 16x20 truncation, <5 s)",
    "2": "E/F worked example join",
    "3": "Analytical self-consistency (<30 s)",
    "4": "Zero-interference soundness",
    "5": "Intra-WBAN invariant (1e4 superframes, N=10)",
    "6": "Trend reproduction over omega 5..50, 30 seeds",
    "7": "Determinism of run --config",
}


def record(key, ok, detail=""):
    VERDICTS[key] = (bool(ok), detail)
    return ok


def verdict_lines():
    out = []
    for key, title in TITLES.items():
        if key in VERDICTS:
            ok, detail = VERDICTS[key]
            out.append(f"[{'PASS' if ok else 'FAIL'}] {key}. {title}" + (f" -- {detail}" if detail else ""))
        else:
            out.append(f"[SKIP] {key}. {title}")
    return out


# 1

def test_criterion_1_latin_correctness():
    t0 = time.perf_counter()
    problems = []
    for q in (3, 5, 7, 11, 13, 17, 19, 23):
        fam = build_mols(q)
        if len(fam) != q - 1:
            problems.append(f"q={q}: {len(fam)} members")
        if not all(is_latin(s) for s in fam):
            problems.append(f"q={q}: non-Latin member")
        if not all(are_orthogonal(a, b) for a, b in itertools.combinations(fam, 2)):
            problems.append(f"q={q}: non-orthogonal pair")
    rects = build_mols(23).truncate(16, 20)
    if not all(is_latin(r) for r in rects):
        problems.append("16x20 truncation not Latin")
    if not all(are_orthogonal(a, b) for a, b in itertools.combinations(rects, 2)):
        problems.append("16x20 truncation not orthogonal")
    elapsed = time.perf_counter() - t0
    if elapsed >= 5.0:
        problems.append(f"runtime {elapsed:.2f} s")
    record("1", not problems, "; ".join(problems) or f"{elapsed:.2f} s, 231 pairs at q=23")
    assert not problems


# 2

def test_criterion_2_worked_example():
    E = LatinSquare([[1, 2, 3], [2, 3, 1], [3, 1, 2]])
    F = LatinSquare([[1, 2, 3], [3, 1, 2], [2, 3, 1]])
    displayed = [[(1, 1), (2, 2), (3, 3)],
                 [(2, 3), (3, 1), (1, 2)],
                 [(3, 2), (1, 3), (2, 1)]]
    fam = build_mols(3)
    got = [[tuple(p) for p in row] for row in join(fam[0], fam[1]).tolist()]
    distinct = len({p for row in got for p in row})
    ok = fam[0] == E and fam[1] == F and got == displayed and distinct == 9
    record("2", ok, f"{distinct} distinct ordered pairs")
    assert ok


# 3

def test_criterion_3_analysis_consistency():
    t0 = time.perf_counter()
    worst_sum = 0.0
    for K, m in ((20, 22), (20, 16), (5, 3), (13, 1)):
        for x in range(0, min(40, K * m) + 1):
            base = AnalysisParams(max(x, 1), 0.5, 16, K, m, x=x)
            s = sum(pr_y_given_x(base.with_(y=y)) for y in y_support(base))
            worst_sum = max(worst_sum, abs(s - 1.0))

    worst_rel = 0.0
    for M, K, n in itertools.product((2, 5, 16, 23), (1, 7, 20), range(0, 25)):
        for t in range(K + 1):
            p = AnalysisParams(40, 0.5, M, K, 3, x=n, t=t)
            a, b = pr_t_imb(p), pr_t_imb_expanded(p)
            if a or b:
                worst_rel = max(worst_rel, abs(a - b) / max(abs(a), abs(b)))

    grid = list(itertools.product((4, 8, 16, 20), (1, 2, 4, 8, 16)))
    worst_z = 0.0
    for i, (slots, n) in enumerate(grid):
        p = AnalysisParams(40, 0.5, slots, slots, 3, x=n)
        est, se = mc_oracle(p, 10 ** 5, np.random.default_rng(1000 + i))
        worst_z = max(worst_z, abs(est - q_coll(p)) / se)
    elapsed = time.perf_counter() - t0
    ok = worst_sum <= 1e-9 and worst_rel <= 1e-12 and worst_z <= 4 and elapsed < 30
    record("3", ok, f"max |sum-1|={worst_sum:.1e}, max rel diff={worst_rel:.1e}, "
                    f"max |z|={worst_z:.2f} over {len(grid)} points, {elapsed:.1f} s")
    assert ok


# 4

def test_criterion_4_zero_interference():
    K, M, G = 20, 16, 12
    fam = family_for(M, K)
    bad = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        net = NetworkModel.probabilistic(1, K, 1.0, rng)
        for name, res in (("chim", run_chim(net, chim_setup(1, K, M, fam, rng), 50)),
                          ("zigbee", run_zigbee(net, zigbee_setup(1, K, G, rng), 50))):
            if res.metrics.apc != 0 or res.metrics.dps != 0:
                bad.append(f"N=1 seed={seed} {name}")
    for N in (2, 5, 17, 50):
        rng = np.random.default_rng(N)
        net = NetworkModel.probabilistic(N, K, 0.0, rng)
        for name, res in (("chim", run_chim(net, chim_setup(N, K, M, fam, rng), 50)),
                          ("zigbee", run_zigbee(net, zigbee_setup(N, K, G, rng), 50))):
            if res.metrics.apc != 0 or res.metrics.dps != 0:
                bad.append(f"alpha=0 N={N} {name}")
    record("4", not bad, "; ".join(bad) or "APC = DPS = 0 exactly in all 28 runs")
    assert not bad


# 5

def test_criterion_5_intra_wban():
    K, M, N = 20, 16, 10
    # seed 1 puts four WBANs on one default channel; alpha = 1 keeps everyone in range
    rng = np.random.default_rng(1)
    net = NetworkModel.probabilistic(N, K, 1.0, rng)
    res = run_chim(net, chim_setup(N, K, M, family_for(M, K), rng), 10_000)
    log = res.log
    wban, intf, tick = log.column("wban"), log.column("interferer"), log.column("tick")
    self_hits = int(np.count_nonzero(intf == wban))
    # one transmitter per WBAN per slot: no two same-WBAN records can share a tick
    per_tick = tick * N + wban
    dup = len(per_tick) - len(np.unique(per_tick))
    collided = int(log.column("outcome").sum())
    imb = int(np.count_nonzero(log.column("phase") == _kernels.IMB))
    ok = self_hits == 0 and dup == 0 and collided > 0 and imb > 0
    record("5", ok, f"{len(log)} records, {collided} collisions, {imb} IMB retries, "
                    f"{self_hits} same-WBAN interferers, {dup} same-WBAN overlaps")
    assert ok


# 6

@pytest.fixture(scope="module")
def sweep():
    cfg = ExperimentConfig()
    assert cfg.omega == list(range(5, 55, 5)) and len(cfg.seeds) == 30
    assert (cfg.sensors, cfg.channels, cfg.gts) == (20, 16, 12)
    t0 = time.perf_counter()
    result = run_sweep(cfg)
    return result, time.perf_counter() - t0


def _means(result):
    out = {}
    for rec in result.summary():
        out[(rec["scheme"], rec["omega"])] = rec
    return out


def criterion_6_parts(result, elapsed):
    s = _means(result)
    omegas = sorted({o for (_, o) in s})
    apc = {sc: [s[(sc, o)]["apc_mean"] for o in omegas] for sc in ("chim", "zigbee")}
    aec = {sc: [s[(sc, o)]["aec_mean"] for o in omegas] for sc in ("chim", "zigbee")}

    marks: dict = {}
    for (scheme, omega, _seed), vals in result.checkpoints.items():
        marks.setdefault((scheme, omega), []).append(vals)
    dps_ok = all(np.all(np.mean(marks[("chim", o)], axis=0) < np.mean(marks[("zigbee", o)], axis=0))
                 for o in omegas)

    def plateau(v):
        return abs(v[-1] - v[-2]) / v[-2]

    i30 = omegas.index(30)
    improvement = (apc["zigbee"][i30] - apc["chim"][i30]) / apc["zigbee"][i30]
    return {
        "a": (all(c < z for c, z in zip(apc["chim"], apc["zigbee"])), "APC_CHIM < APC_ZIGBEE at every omega"),
        "b": (dps_ok, f"DPS_CHIM < DPS_ZIGBEE at all {len(result.checkpoint_at)} checkpoints x {len(omegas)} omegas"),
        "c": (all(c < z for c, z in zip(aec["chim"], aec["zigbee"])),
              f"AEC_CHIM < AEC_ZIGBEE at every omega (omega=50: {aec['chim'][-1]:.5f} vs {aec['zigbee'][-1]:.5f} mW)"),
        "d-monotone": (all(np.diff(apc["chim"]) >= 0) and all(np.diff(apc["zigbee"]) >= 0),
                       "both APC curves non-decreasing"),
        "d-plateau-chim": (plateau(apc["chim"]) < 0.10,
                           f"CHIM APC change 45->50 = {100 * plateau(apc['chim']):.1f}%"),
        "d-plateau-zigbee": (plateau(apc["zigbee"]) < 0.10,
                             f"ZIGBEE APC change 45->50 = {100 * plateau(apc['zigbee']):.1f}%"),
        "target": (improvement >= 0.40, f"APC reduction at omega=30 = {100 * improvement:.1f}%"),
        "runtime": (elapsed < 600, f"sweep {elapsed:.1f} s"),
    }


PART_NAMES = ("a", "b", "c", "d-monotone", "d-plateau-chim", "d-plateau-zigbee", "target", "runtime")


@pytest.mark.parametrize("part", PART_NAMES)
def test_criterion_6_trends(sweep, part):
    result, elapsed = sweep
    parts = criterion_6_parts(result, elapsed)
    failed = [f"({k}) {d}" for k, (ok, d) in parts.items() if not ok]
    record("6", not failed, "; ".join(failed) if failed else
           "; ".join(d for _ok, d in parts.values()))
    ok, detail = parts[part]
    assert ok, detail


# 7

def _cli_run(cfg_path):
    return subprocess.run([sys.executable, "-m", "chimsim.cli", "run", "--config", cfg_path],
                          capture_output=True, text=True)


def test_criterion_7_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        snapshots = []
        for tag in ("first", "second"):
            cfg = os.path.join(tmp, f"{tag}.cfg")
            with open(cfg, "w") as fh:
                fh.write(f"output_dir = {os.path.join(tmp, tag)}\n")
            proc = _cli_run(cfg)
            assert proc.returncode == 0, proc.stderr
            out = os.path.join(tmp, tag)
            snapshots.append({n: open(os.path.join(out, n), "rb").read()
                              for n in sorted(os.listdir(out))})
        same = snapshots[0] == snapshots[1]
        record("7", same, f"{len(snapshots[0])} CSVs byte-identical" if same else "CSV bytes differ")
        assert same


if __name__ == "__main__":
    print(f"kernel backend: {_kernels.BACKEND}")
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
