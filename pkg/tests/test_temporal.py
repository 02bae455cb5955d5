import numpy as np
import pytest

from pyraflow import (
    ArgumentError,
    DimensionError,
    LatentGrid,
    Stage,
    build_history,
    build_schedule,
    causal_mask,
    down,
    history_divisor,
    position_grids,
    stream_rng,
    token_count,
)
from pyraflow.temporal import MAX_CORRUPTION, HistoryEntry, HistoryPyramid


def frames(n, h=16, w=16, seed=0):
    rng = stream_rng(seed, 0)
    return [LatentGrid(rng.standard_normal((h, w, 1))) for _ in range(n)]


class TestBuildHistory:
    def test_single_frame_full_res_clean(self):
        sched = build_schedule(3)
        past = frames(1)
        hist = build_history(past, sched.stage(0), K=3, mode="infer")
        assert len(hist.entries) == 1
        e = hist.entries[0]
        assert e.divisor == 1 and e.corruption == 0.0
        assert np.array_equal(e.grid.data, past[0].data)

    def test_divisor_ladder_with_clamp(self):
        sched = build_schedule(3)
        hist = build_history(frames(4), sched.stage(0), K=3, mode="infer")
        assert [e.divisor for e in hist.entries] == [4, 4, 2, 1]

    def test_divisors_follow_current_stage(self):
        sched = build_schedule(3)
        hist = build_history(frames(3), sched.stage(1), K=3, mode="infer")
        assert [e.divisor for e in hist.entries] == [4, 4, 2]

    def test_infer_entries_are_downsampled_frames(self):
        sched = build_schedule(3)
        past = frames(2)
        hist = build_history(past, sched.stage(0), K=3, mode="infer")
        assert np.array_equal(hist.entries[0].grid.data, down(past[0], 2).data)
        assert np.array_equal(hist.entries[1].grid.data, past[1].data)

    def test_train_corruption_range_and_determinism(self):
        sched = build_schedule(3)
        past = frames(5)
        a = build_history(past, sched.stage(0), K=3, mode="train", rng=stream_rng(3, 7))
        b = build_history(past, sched.stage(0), K=3, mode="train", rng=stream_rng(3, 7))
        for ea, eb in zip(a.entries, b.entries):
            assert 0.0 <= ea.corruption <= MAX_CORRUPTION
            assert ea.corruption == eb.corruption
            assert np.array_equal(ea.grid.data, eb.grid.data)
        strengths = [e.corruption for e in a.entries]
        assert len(set(strengths)) == len(strengths)  # independent per entry

    def test_train_mode_needs_rng(self):
        sched = build_schedule(2)
        with pytest.raises(ArgumentError):
            build_history(frames(1), sched.stage(0), K=2, mode="train")

    def test_mismatched_frames(self):
        sched = build_schedule(2)
        bad = [LatentGrid(np.zeros((16, 16, 1))), LatentGrid(np.zeros((8, 8, 1)))]
        with pytest.raises(DimensionError):
            build_history(bad, sched.stage(0), K=2, mode="infer")

    def test_history_divisor_ages(self):
        assert [history_divisor(a, 0, 3) for a in (1, 2, 3, 4)] == [1, 2, 4, 4]
        assert [history_divisor(a, 2, 3) for a in (1, 2)] == [4, 4]

    def test_entry_order_validation(self):
        g = LatentGrid(np.zeros((4, 4, 1)))
        with pytest.raises(ArgumentError):
            HistoryPyramid(
                entries=(
                    HistoryEntry(0, 1, g, 0.0),
                    HistoryEntry(1, 2, LatentGrid(np.zeros((2, 2, 1))), 0.0),
                ),
                current_stage=Stage(index=0, s=0.5, e=1.0),
            )


class TestCausalMask:
    def test_single_frame_all_true(self):
        assert causal_mask(1, [3]).allowed.all()

    def test_three_frames_block_lower_triangular(self):
        mask = causal_mask(3, [2, 2, 2])
        expected = np.array(
            [
                [1, 1, 0, 0, 0, 0],
                [1, 1, 0, 0, 0, 0],
                [1, 1, 1, 1, 0, 0],
                [1, 1, 1, 1, 0, 0],
                [1, 1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1, 1],
            ],
            dtype=bool,
        )
        assert np.array_equal(mask.allowed, expected)

    def test_row_sums_count_visible_tokens(self):
        tokens = [3, 1, 4]
        mask = causal_mask(3, tokens)
        sums = mask.allowed.sum(axis=1)
        for q in range(sum(tokens)):
            j = mask.frame_of_token[q]
            assert sums[q] == sum(tokens[: j + 1])

    def test_reflexive_same_frame(self):
        mask = causal_mask(2, [2, 3])
        for q in range(5):
            same = mask.frame_of_token == mask.frame_of_token[q]
            assert mask.allowed[q][same].all()

    def test_errors(self):
        with pytest.raises(ArgumentError):
            causal_mask(0, [])
        with pytest.raises(ArgumentError):
            causal_mask(2, [2])


class TestPositionGrids:
    def test_current_stage_native_lattice(self):
        sched = build_schedule(1)
        hist = build_history([], sched.stage(0), K=1, mode="infer")
        pos = position_grids(hist, (4, 4))
        assert sorted(set(pos.rows.tolist())) == [0.0, 1.0, 2.0, 3.0]
        assert sorted(set(pos.cols.tolist())) == [0.0, 1.0, 2.0, 3.0]

    def test_history_block_centers(self):
        sched = build_schedule(2)
        past = frames(1, h=4, w=4)
        hist = build_history(past, sched.stage(1), K=2, mode="infer")
        pos = position_grids(hist, (4, 4))
        hist_rows = pos.rows[pos.frame_of_token == 0]
        assert sorted(set(hist_rows.tolist())) == [0.5, 2.5]

    def test_current_stage_reduced_lattice_is_extrapolated(self):
        sched = build_schedule(2)
        hist = build_history(frames(1, h=8, w=8), sched.stage(1), K=2, mode="infer")
        pos = position_grids(hist, (8, 8))
        cur = pos.rows[pos.frame_of_token == 1]
        # divisor 2 current stage: native indices 0..3, not spread over 0..7
        assert sorted(set(cur.tolist())) == [0.0, 1.0, 2.0, 3.0]

    def test_history_extents_identical_across_divisors(self):
        sched = build_schedule(3)
        hist = build_history(frames(3), sched.stage(0), K=3, mode="infer")
        pos = position_grids(hist, (16, 16))
        for entry in hist.entries:
            rows = pos.rows[pos.frame_of_token == entry.frame_index]
            d = entry.divisor
            assert rows.min() - (d - 1) / 2 == 0.0
            assert rows.max() + (d - 1) / 2 == 15.0

    def test_temporal_indices(self):
        sched = build_schedule(2)
        hist = build_history(frames(2), sched.stage(0), K=2, mode="infer")
        pos = position_grids(hist, (16, 16))
        assert pos.temporal_index.tolist() == [0, 1, 2]
        assert set(pos.frame_of_token.tolist()) == {0, 1, 2}


class TestTokenCount:
    def test_no_history(self):
        sched = build_schedule(1)
        hist = build_history([], sched.stage(0), K=1, mode="infer")
        assert token_count(hist, 3840) == 3840

    def test_two_history_frames(self):
        # divisors (2, 1) on 48x80 frames: 3840/4 + 3840 + 3840
        entries = (
            HistoryEntry(0, 2, LatentGrid(np.zeros((24, 40, 1))), 0.0),
            HistoryEntry(1, 1, LatentGrid(np.zeros((48, 80, 1))), 0.0),
        )
        hist = HistoryPyramid(entries=entries, current_stage=Stage(index=0, s=0.5, e=1.0))
        assert token_count(hist, 3840) == 960 + 3840 + 3840

    def test_paper_scale_bound(self):
        # 30 history latents at 48x80 full res, final stage of a 3-level pyramid
        sched = build_schedule(3)
        past = frames(30, h=48, w=80)
        hist = build_history(past, sched.stage(0), K=3, mode="infer")
        total = token_count(hist, 48 * 80)
        assert total == 15_360
        assert total <= 15_360

    def test_monotone_compression(self):
        sched = build_schedule(3)
        hist = build_history(frames(6), sched.stage(0), K=3, mode="infer")
        counts = [e.grid.height * e.grid.width for e in hist.entries]
        assert all(a <= b for a, b in zip(counts, counts[1:]))
