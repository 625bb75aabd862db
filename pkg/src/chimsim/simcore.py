"""Slot-synchronous simulation of coexisting WBANs under CHIM or the ZIGBEE baseline.

Each slot is an atomic data + ACK exchange. A transmission from sensor s to
its coordinator d is delivered iff no other same-channel transmission in that
slot comes from an entity in range of d or of s.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionError, ScheduleMismatch
from .schedule import WbanSchedule, ZigbeeGtsSchedule

DELIVERED = "delivered"
COLLIDED = "collided"
PHASE_NAMES = {_kernels.TDMA: "TDMA", _kernels.IMB: "IMB", _kernels.CFP: "CFP"}
LOG_HEADER = ("superframe", "slot", "phase", "channel", "src_wban", "src_sensor", "dst", "outcome")


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """N WBANs of K sensors plus the static in-range relation between their entities.

    ``relation[a, b]`` says entity a's transmissions reach entity b. Entity
    ``w*(K+1)`` is the coordinator of 0-based WBAN w, ``w*(K+1) + k`` its sensor k.
    """

    N: int
    K: int
    relation: np.ndarray
    alpha: float | None = None
    mode: str = "probabilistic"
    positions: np.ndarray | None = None
    slot_offsets: np.ndarray = field(default=None)

    def __post_init__(self):
        E = self.N * (self.K + 1)
        rel = np.array(self.relation, dtype=np.bool_, copy=True)
        if rel.shape != (E, E):
            raise DimensionError(f"relation must be {E}x{E}, got {rel.shape}")
        owner = self.wban_of_entity()
        rel[owner[:, None] == owner[None, :]] = True
        rel.setflags(write=False)
        object.__setattr__(self, "relation", rel)
        offs = np.zeros(self.N, dtype=np.int64) if self.slot_offsets is None \
            else np.array(self.slot_offsets, dtype=np.int64, copy=True)
        if offs.shape != (self.N,) or (offs < 0).any():
            raise DimensionError("slot_offsets must hold one non-negative integer per WBAN")
        offs.setflags(write=False)
        object.__setattr__(self, "slot_offsets", offs)

    @classmethod
    def probabilistic(cls, N, K, alpha, rng, max_slot_offset=0) -> "NetworkModel":
        """Each entity lies in range of each foreign WBAN independently with probability alpha.

        Being in range of a WBAN means reaching its coordinator and all its sensors.
        """
        if not 0.0 <= alpha <= 1.0:
            raise DimensionError(f"alpha={alpha} outside [0, 1]")
        E = N * (K + 1)
        in_range_of = rng.random((E, N)) < alpha
        owner = np.repeat(np.arange(N), K + 1)
        rel = in_range_of[:, owner]
        offs = rng.integers(0, max_slot_offset + 1, N) if max_slot_offset > 0 else None
        return cls(N, K, rel, float(alpha), "probabilistic", None, offs)

    @classmethod
    def geometric(cls, N, K, rng, area=20.0, range_radius=3.0, body_radius=1.0,
                  max_slot_offset=0) -> "NetworkModel":
        """WBAN centres uniform in an area x area square, sensors uniform on a body disc."""
        centres = rng.random((N, 2)) * area
        r = body_radius * np.sqrt(rng.random((N, K)))
        theta = rng.random((N, K)) * 2 * np.pi
        pos = np.empty((N, K + 1, 2))
        pos[:, 0] = centres
        pos[:, 1:, 0] = centres[:, None, 0] + r * np.cos(theta)
        pos[:, 1:, 1] = centres[:, None, 1] + r * np.sin(theta)
        flat = pos.reshape(-1, 2)
        d = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=-1)
        offs = rng.integers(0, max_slot_offset + 1, N) if max_slot_offset > 0 else None
        return cls(N, K, d <= range_radius, None, "geometric", flat, offs)

    @classmethod
    def isolated(cls, N, K) -> "NetworkModel":
        E = N * (K + 1)
        return cls(N, K, np.zeros((E, E), dtype=np.bool_), 0.0)

    def wban_of_entity(self) -> np.ndarray:
        return np.repeat(np.arange(self.N), self.K + 1)

    def entity(self, wban: int, sensor: int = 0) -> int:
        """Entity index of a 1-based WBAN; sensor 0 is the coordinator."""
        return (wban - 1) * (self.K + 1) + sensor

    def restrict(self, n: int) -> "NetworkModel":
        """The sub-network of the first n WBANs."""
        if not 1 <= n <= self.N:
            raise DimensionError(f"cannot restrict {self.N} WBANs to {n}")
        E = n * (self.K + 1)
        pos = None if self.positions is None else self.positions[:E]
        return NetworkModel(n, self.K, self.relation[:E, :E], self.alpha, self.mode,
                            pos, self.slot_offsets[:n])


def resolve_slot(transmissions, relation) -> list:
    """Outcome of each (src_entity, dst_entity, channel) transmission sharing one slot."""
    tx = np.asarray(list(transmissions), dtype=np.int64).reshape(-1, 3)
    col, _ = _kernels.resolve(np.ascontiguousarray(tx[:, 0]), np.ascontiguousarray(tx[:, 1]),
                              np.ascontiguousarray(tx[:, 2]), np.asarray(relation, dtype=np.bool_))
    return [COLLIDED if c else DELIVERED for c in col]


@dataclass(frozen=True)
class EnergyModel:
    """Linear per-attempt energy: sensor transmit plus an equal coordinator receive cost."""

    tx_power_dbm: float = -10.0
    slot_ms: float = 1.0
    beacon_interval_s: float = 1.0

    @property
    def tx_power_mw(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0)

    @property
    def attempt_mj(self) -> float:
        return 2.0 * self.tx_power_mw * self.slot_ms / 1000.0


@dataclass(frozen=True, eq=False)
class TransmissionLog:
    """Kernel log rows; columns are ``_kernels.LOG_FIELDS``."""

    rows: np.ndarray
    energy_per_attempt_mj: float

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        return self.rows[:, _kernels.LOG_FIELDS.index(name)]

    def records(self):
        """Yield dicts with 1-based superframe/wban and textual phase/outcome."""
        for r in self.rows:
            tick, sf, slot, phase, ch, w, k, out, intf = (int(v) for v in r)
            yield {
                "tick": tick,
                "superframe": sf + 1,
                "slot": slot,
                "phase": PHASE_NAMES[phase],
                "channel": ch,
                "src_wban": w + 1,
                "src_sensor": k,
                "dst": f"crd{w + 1}",
                "outcome": COLLIDED if out else DELIVERED,
                "interferer_wban": intf + 1 if intf >= 0 else None,
                "energy_mj": self.energy_per_attempt_mj,
            }

    def write_csv(self, dest) -> None:
        own = isinstance(dest, (str, os.PathLike))
        fh = open(dest, "w", newline="") if own else dest
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOG_HEADER)
            for rec in self.records():
                w.writerow([rec[h] for h in LOG_HEADER])
        finally:
            if own:
                fh.close()


@dataclass(frozen=True, eq=False)
class RunMetrics:
    """APC, AEC (mW-equivalent) and DPS plus the per-(WBAN, superframe) counters behind them."""

    apc: float
    aec: float
    dps: float
    attempts: np.ndarray
    collided: np.ndarray
    deferred: np.ndarray

    @property
    def dps_by_superframe(self) -> np.ndarray:
        return self.deferred.mean(axis=0)

    def dps_running(self) -> np.ndarray:
        """Mean DPS over the first n superframes, for n = 1..horizon."""
        per = self.dps_by_superframe
        return np.cumsum(per) / np.arange(1, len(per) + 1)


@dataclass(frozen=True, eq=False)
class RunResult:
    metrics: RunMetrics
    log: TransmissionLog


def _metrics(attempts, collided, deferred, energy: EnergyModel) -> RunMetrics:
    apc = float(np.mean(collided / attempts))
    # mJ per superframe reported over a fixed window -> mW
    aec = float(np.mean(attempts) * energy.attempt_mj / energy.beacon_interval_s)
    dps = float(np.mean(deferred))
    return RunMetrics(apc, aec, dps, attempts, collided, deferred)


def _check(network: NetworkModel, schedules, superframes, kind):
    if superframes < 1:
        raise DimensionError("superframes must be >= 1")
    if len(schedules) != network.N:
        raise ScheduleMismatch(f"{len(schedules)} schedules for {network.N} WBANs")
    for s in schedules:
        if not isinstance(s, kind):
            raise ScheduleMismatch(f"expected {kind.__name__}, got {type(s).__name__}")
        if s.K != network.K:
            raise ScheduleMismatch(f"WBAN {s.wban_id} has {s.K} sensors, network expects {network.K}")


def run_chim(network: NetworkModel, schedules, superframes: int, inactive_slots: int = 0,
             energy: EnergyModel | None = None) -> RunResult:
    """Simulate CHIM: TDMA on the DFC, failed sensors retry once in their backup slot."""
    _check(network, schedules, superframes, WbanSchedule)
    energy = energy or EnergyModel()
    q = schedules[0].q
    if any(s.q != q for s in schedules):
        raise ScheduleMismatch("schedules disagree on the IMB part length")
    K = network.K
    dfc = np.array([s.default_channel for s in schedules], dtype=np.int64)
    bkc = np.stack([s.backup_channel for s in schedules]).astype(np.int64)
    bkts = np.stack([s.backup_slot for s in schedules]).astype(np.int64) - 1
    log, att, col, dfr = _kernels.simulate(
        network.relation, K, q, K + q + inactive_slots, superframes, _kernels.CHIM,
        dfc, bkc, bkts, network.slot_offsets)
    return RunResult(_metrics(att, col, dfr, energy), TransmissionLog(log, energy.attempt_mj))


def run_zigbee(network: NetworkModel, schedules, superframes: int, inactive_slots: int = 0,
               energy: EnergyModel | None = None) -> RunResult:
    """Simulate the baseline: shared-channel TDMA, failed sensors retry in granted GTSs."""
    _check(network, schedules, superframes, ZigbeeGtsSchedule)
    energy = energy or EnergyModel()
    G = schedules[0].G
    if any(s.G != G for s in schedules):
        raise ScheduleMismatch("schedules disagree on the CFP length")
    K = network.K
    chans = np.array([s.shared_channel for s in schedules], dtype=np.int64)
    rec_channel = np.repeat(chans[:, None], K, axis=1)
    no_slot = np.zeros((network.N, K), dtype=np.int64)
    log, att, col, dfr = _kernels.simulate(
        network.relation, K, G, K + G + inactive_slots, superframes, _kernels.ZIGBEE,
        chans, rec_channel, no_slot, network.slot_offsets)
    return RunResult(_metrics(att, col, dfr, energy), TransmissionLog(log, energy.attempt_mj))
