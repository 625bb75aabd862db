"""Slot-resolution and superframe-loop kernels.

Two interchangeable backends with identical output:

* ``*_jit``   -- numba ``@njit`` loops
* ``*_numpy`` -- pure numpy, vectorised per slot

``resolve`` and ``simulate`` point at the jit backend unless numba is missing
or the environment variable ``CHIMSIM_PURE_NUMPY`` is set to a non-empty value
other than ``0``.

Entity numbering: WBAN w (0-based) owns entities ``w*(K+1)`` (coordinator)
and ``w*(K+1) + k`` for sensor k = 1..K. ``relation[a, b]`` is True when
entity a transmits within range of entity b.

Log rows follow ``LOG_FIELDS``. tick, superframe, wban and interferer are
0-based (interferer is -1 when delivered); slot and sensor are 1-based;
outcome is 1 for collided.
"""
import os

import numpy as np

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

PURE_NUMPY = os.environ.get("CHIMSIM_PURE_NUMPY", "") not in ("", "0")
BACKEND = "numpy" if (PURE_NUMPY or not HAS_NUMBA) else "numba"

CHIM = 0
ZIGBEE = 1

TDMA = 0
IMB = 1
CFP = 2

LOG_FIELDS = ("tick", "superframe", "slot", "phase", "channel", "wban",
              "sensor", "outcome", "interferer")
N_LOG = len(LOG_FIELDS)


def resolve_numpy(src, dst, ch, relation):
    """Per-transmission (collided, first interferer index or -1)."""
    n = len(src)
    if n == 0:
        return np.zeros(0, dtype=np.bool_), np.zeros(0, dtype=np.int64)
    same = ch[:, None] == ch[None, :]
    np.fill_diagonal(same, False)
    # [i, j]: transmitter of j reaches receiver or sender of i
    reach = relation[src[None, :], dst[:, None]] | relation[src[None, :], src[:, None]]
    hit = same & reach
    collided = hit.any(axis=1)
    first = np.where(collided, hit.argmax(axis=1), -1).astype(np.int64)
    return collided, first


def _plan_numpy(scheme, failed_row, rec_slot_row, n_rec):
    """Recovery-slot plan for one WBAN: sensor index (0-based) per slot, -1 if idle.

    Returns the plan and the number of failures left without a slot.
    """
    plan = np.full(n_rec, -1, dtype=np.int64)
    idx = np.flatnonzero(failed_row)
    if scheme == CHIM:
        plan[rec_slot_row[idx]] = idx
        return plan, 0
    granted = idx[:n_rec]
    plan[:len(granted)] = granted
    return plan, len(idx) - len(granted)


def simulate_numpy(relation, K, n_rec, frame_len, n_sf, scheme,
                   dfc, rec_channel, rec_slot, offsets):
    N = len(dfc)
    stride = K + 1
    max_rows = N * n_sf * (K + min(K, n_rec))
    log = np.empty((max_rows, N_LOG), dtype=np.int64)
    attempts = np.zeros((N, n_sf), dtype=np.int64)
    collided_ct = np.zeros((N, n_sf), dtype=np.int64)
    deferred = np.zeros((N, n_sf), dtype=np.int64)
    failed = np.zeros((N, K), dtype=np.bool_)
    plan = np.full((N, max(n_rec, 1)), -1, dtype=np.int64)
    rec_phase = IMB if scheme == CHIM else CFP
    wbans = np.arange(N)
    coord = wbans * stride
    n_ticks = n_sf * frame_len + (int(offsets.max()) if N else 0)
    row = 0
    for t in range(n_ticks):
        p = t - offsets
        sf = np.where(p >= 0, p // frame_len, -1)
        live = (sf >= 0) & (sf < n_sf)
        pos = np.where(live, p % frame_len, -1)

        failed[live & (pos == 0)] = False

        in_tdma = live & (pos < K)
        rec_b = pos - K
        in_rec = live & (rec_b >= 0) & (rec_b < n_rec)
        sensor = np.full(N, -1, dtype=np.int64)
        sensor[in_tdma] = pos[in_tdma]
        if in_rec.any():
            sensor[in_rec] = plan[wbans[in_rec], rec_b[in_rec]]
        tx = sensor >= 0
        if not tx.any():
            _close_tdma_numpy(scheme, live, pos, K, n_rec, failed, rec_slot,
                              plan, deferred, sf)
            continue
        w_tx = wbans[tx]
        k_tx = sensor[tx]
        is_tdma = in_tdma[tx]
        ch = np.where(is_tdma, dfc[w_tx], rec_channel[w_tx, k_tx])
        src = coord[w_tx] + k_tx + 1
        dst = coord[w_tx]
        col, first = resolve_numpy(src, dst, ch, relation)

        n = len(w_tx)
        block = log[row:row + n]
        block[:, 0] = t
        block[:, 1] = sf[w_tx]
        block[:, 2] = pos[w_tx] + 1
        block[:, 3] = np.where(is_tdma, TDMA, rec_phase)
        block[:, 4] = ch
        block[:, 5] = w_tx
        block[:, 6] = k_tx + 1
        block[:, 7] = col
        block[:, 8] = np.where(first >= 0, w_tx[np.maximum(first, 0)], -1)
        row += n

        sf_tx = sf[w_tx]
        attempts[w_tx, sf_tx] += 1
        collided_ct[w_tx, sf_tx] += col
        failed[w_tx[is_tdma & col], k_tx[is_tdma & col]] = True
        rec_fail = ~is_tdma & col
        deferred[w_tx[rec_fail], sf_tx[rec_fail]] += 1

        _close_tdma_numpy(scheme, live, pos, K, n_rec, failed, rec_slot,
                          plan, deferred, sf)
    return log[:row], attempts, collided_ct, deferred


def _close_tdma_numpy(scheme, live, pos, K, n_rec, failed, rec_slot, plan, deferred, sf):
    for w in np.flatnonzero(live & (pos == K - 1)):
        p, left = _plan_numpy(scheme, failed[w], rec_slot[w], n_rec)
        plan[w, :n_rec] = p
        deferred[w, sf[w]] += left


if HAS_NUMBA:
    @numba.njit(cache=True)
    def resolve_jit(src, dst, ch, relation):
        n = src.shape[0]
        collided = np.zeros(n, dtype=np.bool_)
        first = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if j == i or ch[j] != ch[i]:
                    continue
                if relation[src[j], dst[i]] or relation[src[j], src[i]]:
                    collided[i] = True
                    first[i] = j
                    break
        return collided, first

    @numba.njit(cache=True)
    def simulate_jit(relation, K, n_rec, frame_len, n_sf, scheme,
                     dfc, rec_channel, rec_slot, offsets):
        N = dfc.shape[0]
        stride = K + 1
        max_rows = N * n_sf * (K + min(K, n_rec))
        log = np.empty((max_rows, 9), dtype=np.int64)
        attempts = np.zeros((N, n_sf), dtype=np.int64)
        collided_ct = np.zeros((N, n_sf), dtype=np.int64)
        deferred = np.zeros((N, n_sf), dtype=np.int64)
        failed = np.zeros((N, K), dtype=np.bool_)
        plan = np.full((N, max(n_rec, 1)), -1, dtype=np.int64)
        rec_phase = 1 if scheme == 0 else 2
        max_off = 0
        for w in range(N):
            if offsets[w] > max_off:
                max_off = offsets[w]
        n_ticks = n_sf * frame_len + max_off

        src = np.empty(N, dtype=np.int64)
        dst = np.empty(N, dtype=np.int64)
        ch = np.empty(N, dtype=np.int64)
        w_tx = np.empty(N, dtype=np.int64)
        k_tx = np.empty(N, dtype=np.int64)
        tdma_tx = np.empty(N, dtype=np.bool_)
        sf_of = np.empty(N, dtype=np.int64)
        pos_of = np.empty(N, dtype=np.int64)

        row = 0
        for t in range(n_ticks):
            n = 0
            for w in range(N):
                p = t - offsets[w]
                if p < 0:
                    sf_of[w] = -1
                    continue
                sf = p // frame_len
                if sf >= n_sf:
                    sf_of[w] = -1
                    continue
                pos = p % frame_len
                sf_of[w] = sf
                pos_of[w] = pos
                if pos == 0:
                    for k in range(K):
                        failed[w, k] = False
                if pos < K:
                    k = pos
                    c = dfc[w]
                    is_t = True
                elif pos - K < n_rec:
                    k = plan[w, pos - K]
                    if k < 0:
                        continue
                    c = rec_channel[w, k]
                    is_t = False
                else:
                    continue
                w_tx[n] = w
                k_tx[n] = k
                ch[n] = c
                tdma_tx[n] = is_t
                src[n] = w * stride + k + 1
                dst[n] = w * stride
                n += 1

            if n > 0:
                col, first = resolve_jit(src[:n], dst[:n], ch[:n], relation)
                for i in range(n):
                    w = w_tx[i]
                    sf = sf_of[w]
                    log[row, 0] = t
                    log[row, 1] = sf
                    log[row, 2] = pos_of[w] + 1
                    log[row, 3] = 0 if tdma_tx[i] else rec_phase
                    log[row, 4] = ch[i]
                    log[row, 5] = w
                    log[row, 6] = k_tx[i] + 1
                    log[row, 7] = 1 if col[i] else 0
                    log[row, 8] = w_tx[first[i]] if first[i] >= 0 else -1
                    row += 1
                    attempts[w, sf] += 1
                    if col[i]:
                        collided_ct[w, sf] += 1
                        if tdma_tx[i]:
                            failed[w, k_tx[i]] = True
                        else:
                            deferred[w, sf] += 1

            # end of TDMA part: lay out the recovery slots
            for w in range(N):
                if sf_of[w] < 0 or pos_of[w] != K - 1:
                    continue
                for b in range(n_rec):
                    plan[w, b] = -1
                g = 0
                for k in range(K):
                    if not failed[w, k]:
                        continue
                    if scheme == 0:
                        plan[w, rec_slot[w, k]] = k
                    elif g < n_rec:
                        plan[w, g] = k
                        g += 1
                    else:
                        deferred[w, sf_of[w]] += 1
        return log[:row], attempts, collided_ct, deferred
else:  # pragma: no cover
    resolve_jit = resolve_numpy
    simulate_jit = simulate_numpy


if BACKEND == "numba":
    resolve = resolve_jit
    simulate = simulate_jit
else:
    resolve = resolve_numpy
    simulate = simulate_numpy
