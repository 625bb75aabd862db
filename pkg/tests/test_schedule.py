import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chimsim.errors import DimensionError
from chimsim.latin import are_orthogonal, build_mols, family_for
from chimsim.schedule import (SCHEDULE_HEADER, SuperframeLayout, WbanSchedule, ZigbeeGtsSchedule,
                              chim_setup, grant_gts, schedule_from_rectangle,
                              write_schedule_csv, zigbee_setup)
from chimsim.simcore import NetworkModel, run_chim

FAM = family_for(16, 20)


def test_single_wban_setup():
    (s,) = chim_setup(1, 20, 16, FAM, np.random.default_rng(0))
    assert s.K == 20 and 1 <= s.default_channel <= 16
    assert len(set(s.backup_slot.tolist())) == 20
    assert s.decodes_from(FAM)
    assert s.layout().length == 20 + 23


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_setup_invariants(N, seed):
    scheds = chim_setup(N, 20, 16, FAM, np.random.default_rng(seed))
    for s in scheds:
        assert len(set(s.backup_slot.tolist())) == s.K
        assert s.decodes_from(FAM)
        assert ((1 <= s.backup_channel) & (s.backup_channel <= 16)).all()
        assert ((1 <= s.backup_slot) & (s.backup_slot <= 23)).all()


def test_setup_reproducible():
    a = chim_setup(30, 20, 16, FAM, np.random.default_rng(5))
    b = chim_setup(30, 20, 16, FAM, np.random.default_rng(5))
    assert [list(s.rows()) for s in a] == [list(s.rows()) for s in b]


def test_setup_prefix_property():
    big = chim_setup(30, 20, 16, FAM, np.random.default_rng(9))
    small = chim_setup(12, 20, 16, FAM, np.random.default_rng(9))
    assert [list(s.rows()) for s in big[:12]] == [list(s.rows()) for s in small]


def test_pigeonhole_shared_dfc():
    scheds = chim_setup(17, 20, 16, FAM, np.random.default_rng(1))
    dfcs = [s.default_channel for s in scheds]
    assert len(set(dfcs)) < len(dfcs)


def test_setup_dimension_mismatch():
    with pytest.raises(DimensionError):
        chim_setup(3, 20, 15, FAM, np.random.default_rng(0))
    with pytest.raises(DimensionError):
        chim_setup(0, 20, 16, FAM, np.random.default_rng(0))


def test_same_rectangle_same_dfc_collides_in_imb():
    a = schedule_from_rectangle(1, 4, FAM, 3)
    b = schedule_from_rectangle(2, 4, FAM, 3)
    assert np.array_equal(a.backup_channel, b.backup_channel)
    assert np.array_equal(a.backup_slot, b.backup_slot)
    net = NetworkModel.probabilistic(2, 20, 1.0, np.random.default_rng(0))
    res = run_chim(net, [a, b], 5)
    phase = res.log.column("phase")
    imb = res.log.column("outcome")[phase == 1]
    assert len(imb) > 0 and imb.all()


def test_orthogonal_pairs_never_repeat_per_column():
    fam = build_mols(7).truncate(5, 7)
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            assert are_orthogonal(fam[i], fam[j])
            a = schedule_from_rectangle(1, 1, fam, i)
            b = schedule_from_rectangle(2, 1, fam, j)
            same = (a.backup_channel == b.backup_channel) & (a.backup_slot == b.backup_slot)
            # a shared (channel, slot) backup pair means the two cells coincide there;
            # orthogonality allows each symbol pair (s, s) at most once over the grid
            shared = [int(s) for s in a.backup_slot[same]]
            assert len(shared) == len(set(shared))


def test_layout_rules():
    assert SuperframeLayout(20, 23, 5).length == 48
    with pytest.raises(DimensionError):
        SuperframeLayout(20, 19)
    with pytest.raises(DimensionError):
        SuperframeLayout(0, 3)


def test_zigbee_setup_one_channel():
    scheds = zigbee_setup(10, 20, 12, np.random.default_rng(3))
    assert len({s.shared_channel for s in scheds}) == 1
    assert scheds[0].layout(4) == 36
    assert zigbee_setup(2, 20, 12)[0].shared_channel == 1
    with pytest.raises(DimensionError):
        ZigbeeGtsSchedule(1, 1, 20, -1)


def test_grant_gts_examples():
    s = ZigbeeGtsSchedule(1, 1, 20, 12)
    assert grant_gts(s, []) == {}
    assert grant_gts(s, [7, 3]) == {3: 1, 7: 2}
    g = grant_gts(s, range(1, 21))
    assert [k for k, v in g.items() if v is None] == list(range(13, 21))
    assert sum(v is None for v in grant_gts(s, range(1, 14)).values()) == 1
    assert all(v is not None for v in grant_gts(ZigbeeGtsSchedule(1, 1, 20, 12), range(1, 13)).values())


def test_grant_gts_out_of_range():
    with pytest.raises(DimensionError):
        grant_gts(ZigbeeGtsSchedule(1, 1, 20, 12), [0])


@given(st.sets(st.integers(1, 20)), st.integers(0, 20))
def test_grant_gts_properties(failed, G):
    g = grant_gts(ZigbeeGtsSchedule(1, 1, 20, G), failed)
    granted = [v for v in g.values() if v is not None]
    assert len(granted) <= G
    assert len(granted) == len(set(granted))
    assert set(g) == failed


def test_schedule_csv():
    scheds = chim_setup(2, 20, 16, FAM, np.random.default_rng(0))
    buf = io.StringIO()
    write_schedule_csv(scheds, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(SCHEDULE_HEADER)
    assert len(lines) == 41
    wban, k, dfc, slot, bkc, bkts = map(int, lines[5].split(","))
    assert (wban, k, slot) == (1, 5, 5)
    assert FAM[scheds[0].rectangle_index].cell(bkc, k) == bkts


def test_schedule_arrays_read_only():
    s = chim_setup(1, 20, 16, FAM, np.random.default_rng(0))[0]
    assert isinstance(s, WbanSchedule)
    with pytest.raises(ValueError):
        s.backup_slot[0] = 1
