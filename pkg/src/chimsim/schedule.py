"""Per-WBAN CHIM schedules and the ZIGBEE GTS baseline schedule.

A CHIM superframe is K TDMA slots on the default channel (DFC), then an IMB
part of q backup slots, then ``inactive`` idle slots. Sensor k owns TDMA slot
k. Its backup pair comes from the WBAN's Latin rectangle: with s_k the symbol
assigned to column k, BKTS(k) = s_k and BKC(k) is the row holding s_k in
column k.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .latin import OrthogonalFamily, assign_symbols, common_cells

ZIGBEE_CHANNELS = 16


@dataclass(frozen=True)
class SuperframeLayout:
    tdma_slots: int
    imb_slots: int
    inactive_slots: int = 0

    def __post_init__(self):
        if self.tdma_slots < 1:
            raise DimensionError("a superframe needs at least one TDMA slot")
        if self.imb_slots < self.tdma_slots:
            raise DimensionError(
                f"IMB part ({self.imb_slots}) shorter than TDMA part ({self.tdma_slots})")
        if self.inactive_slots < 0:
            raise DimensionError("inactive slot count must be non-negative")

    @property
    def length(self) -> int:
        return self.tdma_slots + self.imb_slots + self.inactive_slots


@dataclass(frozen=True, eq=False)
class WbanSchedule:
    """Static CHIM schedule of one WBAN. Sensors, slots and channels are 1-based."""

    wban_id: int
    default_channel: int
    rectangle_index: int
    backup_channel: np.ndarray
    backup_slot: np.ndarray
    q: int

    def __post_init__(self):
        for name in ("backup_channel", "backup_slot"):
            arr = np.array(getattr(self, name), dtype=np.int64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return len(self.backup_slot)

    @property
    def tdma_slot(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def layout(self, inactive_slots: int = 0) -> SuperframeLayout:
        return SuperframeLayout(self.K, self.q, inactive_slots)

    def decodes_from(self, family: OrthogonalFamily) -> bool:
        """Every (BKC, BKTS) pair names the rectangle cell of its sensor's column."""
        cells = family[self.rectangle_index].cells
        cols = np.arange(self.K)
        return bool(np.all(cells[self.backup_channel - 1, cols] == self.backup_slot))

    def rows(self):
        for k in range(self.K):
            yield (self.wban_id, k + 1, self.default_channel, k + 1,
                   int(self.backup_channel[k]), int(self.backup_slot[k]))


def schedule_from_rectangle(wban_id, default_channel, family, rectangle_index,
                            tiebreak="diagonal") -> WbanSchedule:
    rect = family[rectangle_index]
    avoid = common_cells(family) if len(family) > 1 else None
    a = assign_symbols(rect, tiebreak, avoid)
    return WbanSchedule(wban_id, int(default_channel), int(rectangle_index),
                        np.array(a.rows), np.array(a.symbols), rect.q)


def chim_setup(N: int, K: int, M: int, family: OrthogonalFamily, rng,
               tiebreak: str = "diagonal") -> list:
    """Network setup: each WBAN independently draws a DFC in [1, M] and a family member.

    Draws are made WBAN by WBAN (DFC then rectangle), so the first n schedules
    of an N-WBAN setup equal an n-WBAN setup from the same generator state.
    Cells shared by every family member are used for backups only as a last
    resort.
    """
    if N < 1:
        raise DimensionError("need at least one WBAN")
    if family.M != M or family.K != K:
        raise DimensionError(
            f"family is {family.M}x{family.K}, setup asked for {M}x{K}")
    avoid = common_cells(family) if len(family) > 1 else None
    cache: dict = {}
    out = []
    for w in range(1, N + 1):
        dfc = int(rng.integers(1, M + 1))
        idx = int(rng.integers(0, len(family)))
        if idx not in cache:
            a = assign_symbols(family[idx], tiebreak, avoid)
            cache[idx] = (np.array(a.rows), np.array(a.symbols))
        bkc, bkts = cache[idx]
        out.append(WbanSchedule(w, dfc, idx, bkc, bkts, family.q))
    return out


@dataclass(frozen=True)
class ZigbeeGtsSchedule:
    wban_id: int
    shared_channel: int
    K: int
    G: int

    def __post_init__(self):
        if self.G < 0:
            raise DimensionError("GTS count must be non-negative")
        if self.K < 1:
            raise DimensionError("need at least one sensor")

    def layout(self, inactive_slots: int = 0):
        # CFP part is G slots; not bound by SuperframeLayout's IMB >= TDMA rule
        return self.K + self.G + inactive_slots


def zigbee_setup(N: int, K: int, G: int, rng=None, channels: int = ZIGBEE_CHANNELS) -> list:
    """All WBANs share one channel. The channel is drawn once if a generator is given."""
    if N < 1:
        raise DimensionError("need at least one WBAN")
    channel = int(rng.integers(1, channels + 1)) if rng is not None else 1
    return [ZigbeeGtsSchedule(w, channel, K, G) for w in range(1, N + 1)]


def grant_gts(schedule: ZigbeeGtsSchedule, failed_sensors) -> dict:
    """Grant GTS 1..G to failed sensors in ascending ID order.

    Returns sensor -> GTS index, with None for sensors deferred to the next
    superframe.
    """
    grants = {}
    for n, k in enumerate(sorted(set(failed_sensors))):
        if not 1 <= k <= schedule.K:
            raise DimensionError(f"sensor {k} outside [1, {schedule.K}]")
        grants[k] = n + 1 if n < schedule.G else None
    return grants


SCHEDULE_HEADER = ("wban_id", "sensor_id", "dfc", "tdma_slot", "bkc", "bkts")


def write_schedule_csv(schedules, dest) -> None:
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        for s in schedules:
            w.writerows(s.rows())
    finally:
        if own:
            fh.close()
