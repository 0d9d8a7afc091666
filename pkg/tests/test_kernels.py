import numpy as np

from lcslab import (
    DropState,
    InsertionMode,
    RngStream,
    classify_matches,
    lcs_length,
    lcs_prefix_curve,
    lcs_row,
    minimal_matching,
    nonempty_match_count,
)
from lcslab._kernels import (
    bitlength_rows,
    draw_drop_steps,
    drop_rows_at_checkpoints,
    drop_rows_at_perrep_k,
    grow_final,
    lcs_rows_flat,
    matching_stats_batch,
    pack_eq_batch,
    popcount_rows,
    prefix_mask,
)

from conftest import random_bits, random_tri


def test_rows_flat_matches_engine(rng):
    reps, n = 64, 150
    z = np.stack([random_tri(rng, n) for _ in range(reps)])
    y = np.stack([random_bits(rng, n) for _ in range(reps)])
    lens = rng.integers(0, n + 1, size=reps).astype(np.int64)
    eq0, eq1, _ = pack_eq_batch(y)
    rows = lcs_rows_flat(z, lens, eq0, eq1)
    vals = popcount_rows(rows)
    for r in range(reps):
        assert vals[r] == lcs_length(z[r, : lens[r]], y[r])


def test_rows_prefix_popcount_and_bitlength(rng):
    reps, nz, ny = 40, 70, 200  # multiword (W = 4)
    z = np.stack([random_bits(rng, nz) for _ in range(reps)])
    y = np.stack([random_bits(rng, ny) for _ in range(reps)])
    eq0, eq1, _ = pack_eq_batch(y)
    rows = lcs_rows_flat(z, np.full(reps, nz, np.int64), eq0, eq1)
    for r in range(8):
        big = lcs_row(z[r], y[r])
        got = int.from_bytes(rows[r].tobytes(), "little")
        assert got == big
        assert bitlength_rows(rows[r : r + 1])[0] == big.bit_length()
        for l in (0, 1, 64, 65, 130, 200):
            assert popcount_rows(rows[r], l=l) == bin(big & ((1 << l) - 1)).count("1")


def test_prefix_mask_edges():
    assert prefix_mask(0, 2).tolist() == [0, 0]
    assert prefix_mask(64, 2).tolist() == [0xFFFFFFFFFFFFFFFF, 0]
    assert prefix_mask(65, 2).tolist() == [0xFFFFFFFFFFFFFFFF, 1]


def test_grow_final_matches_replay():
    for mode in InsertionMode:
        gen = RngStream(3).generator()
        base, t_steps, v_steps = draw_drop_steps(gen, 16, 40, mode is InsertionMode.PAPER_INTERIOR)
        grown = grow_final(base, t_steps, v_steps)
        for r in range(16):
            state = DropState.replay(
                (int(base[r, 0]), int(base[r, 1])),
                [(int(t), int(v)) for t, v in zip(t_steps[r], v_steps[r])],
                mode=mode,
            )
            assert np.array_equal(grown[r], state.current_bits())


def test_checkpoint_rows_match_scalar_curve(rng):
    reps, n, k_max = 12, 60, 80
    gen = RngStream(5).generator()
    base, t_steps, v_steps = draw_drop_steps(gen, reps, k_max, True)
    y = np.stack([random_bits(rng, n) for _ in range(reps)])
    eq0, eq1, _ = pack_eq_batch(y)
    ks = np.array([2, 3, 17, 17, 40, 80], dtype=np.int64)
    rows = drop_rows_at_checkpoints(base, t_steps, v_steps, ks, eq0, eq1)
    vals = popcount_rows(rows)
    for r in range(reps):
        state = DropState.replay(
            (int(base[r, 0]), int(base[r, 1])),
            [(int(t), int(v)) for t, v in zip(t_steps[r], v_steps[r])],
        )
        curve = lcs_prefix_curve(state, y[r])
        for j, k in enumerate(ks):
            assert vals[r, j] == curve[int(k)]


def test_perrep_rows_match_checkpoint_rows(rng):
    reps, n, k_max = 30, 50, 64
    gen = RngStream(6).generator()
    base, t_steps, v_steps = draw_drop_steps(gen, reps, k_max, True)
    y = np.stack([random_bits(rng, n) for _ in range(reps)])
    eq0, eq1, _ = pack_eq_batch(y)
    k_r = rng.integers(2, k_max + 1, size=reps).astype(np.int64)
    rows = drop_rows_at_perrep_k(base, t_steps, v_steps, k_r, eq0, eq1)
    vals = popcount_rows(rows)
    for r in range(reps):
        state = DropState.replay(
            (int(base[r, 0]), int(base[r, 1])),
            [(int(t), int(v)) for t, v in zip(t_steps[r][: k_r[r] - 2], v_steps[r][: k_r[r] - 2])],
        )
        assert vals[r] == lcs_length(state.current_bits(), y[r])


def test_matching_stats_batch_matches_public(rng):
    reps, k, n = 50, 35, 55
    z = np.stack([random_bits(rng, k) for _ in range(reps)])
    y = np.stack([random_bits(rng, n) for _ in range(reps)])
    stats = matching_stats_batch(z, k, y)
    for r in range(reps):
        mt = minimal_matching(z[r], y[r])
        records = classify_matches(mt, z[r], y[r])
        assert stats[r, 0] == mt.m
        if mt.m:
            assert stats[r, 1] == mt.eta[0]
            assert stats[r, 2] == mt.eta[-1]
        assert stats[r, 3] == nonempty_match_count(records)
        assert stats[r, 4] == sum(rec.free_bits for rec in records)
        assert stats[r, 5] == 1  # canonical minimal matchings are single-color
