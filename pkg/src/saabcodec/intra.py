"""35-mode intra prediction for 8x8 blocks, following the HEVC process.

Planar, DC with edge filtering, and angular modes with 1/32-pel
interpolation and the [1 2 1] reference smoothing rule for 8x8 blocks.
All arithmetic is integer, so encoder and decoder predictions are
bit-identical by construction.

Reference layout: `above` has 17 entries (corner, 8 top, 8 top-right);
`left` has 17 entries (corner, 8 left, 8 below-left).  Unavailable samples
are substituted by scanning from the bottom-left end, per the standard.
"""

import numpy as np

from .errors import InvalidInputError
from .modes import N_MODES

N = 8
_LOG2N = 3

# intraPredAngle for modes 2..34
_ANGLES = np.array(
    [32, 26, 21, 17, 13, 9, 5, 2, 0, -2, -5, -9, -13, -17, -21, -26, -32,
     -26, -21, -17, -13, -9, -5, -2, 0, 2, 5, 9, 13, 17, 21, 26, 32],
    dtype=np.int32,
)
# invAngle for angles -2,-5,-9,-13,-17,-21,-26,-32
_INV_ANGLES = {-2: -4096, -5: -1638, -9: -910, -13: -630, -17: -482,
               -21: -390, -26: -315, -32: -256}


def _mode_angle(mode):
    return int(_ANGLES[mode - 2])


def smoothing_enabled(mode):
    """[1 2 1] reference smoothing rule for 8x8 luma blocks."""
    if mode == 0:
        return True
    if mode < 2:
        return False
    return min(abs(mode - 10), abs(mode - 26)) > 7


def build_references(recon, bx, by, blocks_w, blocks_h):
    """Reference sample arrays for the block at grid position (bx, by).

    `recon` is the frame-sized reconstruction surface filled in raster block
    order.  Returns (above, left, above_f, left_f) as int32 arrays of length
    17 each, the latter two smoothed with the [1 2 1] filter.
    """
    if not (0 <= bx < blocks_w and 0 <= by < blocks_h):
        raise InvalidInputError(f"block position ({bx}, {by}) off the grid")
    x0 = bx * N
    y0 = by * N

    # Scan-ordered reference list: below-left bottom .. corner .. top-right end.
    refs = np.zeros(4 * N + 1, dtype=np.int32)
    avail = np.zeros(4 * N + 1, dtype=bool)

    # Below-left (rows y0+15 .. y0+8 of column x0-1): never coded yet in
    # raster block order, so always unavailable.
    # Left (rows y0+7 .. y0 of column x0-1).
    if bx > 0:
        refs[N : 2 * N] = recon[y0 + N - 1 : y0 - 1 if y0 > 0 else None : -1, x0 - 1]
        avail[N : 2 * N] = True
    # Corner.
    if bx > 0 and by > 0:
        refs[2 * N] = recon[y0 - 1, x0 - 1]
        avail[2 * N] = True
    # Top.
    if by > 0:
        refs[2 * N + 1 : 3 * N + 1] = recon[y0 - 1, x0 : x0 + N]
        avail[2 * N + 1 : 3 * N + 1] = True
    # Top-right: coded in the previous block row when it exists.
    if by > 0 and bx + 1 < blocks_w:
        refs[3 * N + 1 :] = recon[y0 - 1, x0 + N : x0 + 2 * N]
        avail[3 * N + 1 :] = True

    if not avail.any():
        refs[:] = 128
    else:
        if not avail[0]:
            refs[0] = refs[np.nonzero(avail)[0][0]]
            avail[0] = True
        for i in range(1, refs.size):
            if not avail[i]:
                refs[i] = refs[i - 1]

    left = refs[2 * N : N - 1 : -1].copy()  # corner, left 0..7, below-left 0..7
    left = np.concatenate([left, refs[N - 1 :: -1]])
    above = refs[2 * N :].copy()  # corner, top 0..7, top-right 0..7

    filt = np.concatenate([left[:0:-1], above])  # full scan line for filtering
    sm = filt.copy()
    sm[1:-1] = (filt[:-2] + 2 * filt[1:-1] + filt[2:] + 2) >> 2
    left_f = np.concatenate([[sm[2 * N]], sm[2 * N - 1 :: -1]])
    above_f = sm[2 * N :].copy()
    return above, left, above_f, left_f


def _predict_planar(above, left):
    t = above[1 : N + 1]
    l = left[1 : N + 1]
    tr = above[N + 1]
    bl = left[N + 1]
    x = np.arange(N, dtype=np.int32)
    y = np.arange(N, dtype=np.int32).reshape(-1, 1)
    horiz = (N - 1 - x) * l.reshape(-1, 1) + (x + 1) * tr
    vert = (N - 1 - y) * t + (y + 1) * bl
    return (horiz + vert + N) >> (_LOG2N + 1)


def _predict_dc(above, left):
    t = above[1 : N + 1]
    l = left[1 : N + 1]
    dc = (int(t.sum()) + int(l.sum()) + N) >> (_LOG2N + 1)
    pred = np.full((N, N), dc, dtype=np.int32)
    # Luma edge filtering for block sizes below 32.
    pred[0, 1:] = (t[1:] + 3 * dc + 2) >> 2
    pred[1:, 0] = (l[1:] + 3 * dc + 2) >> 2
    pred[0, 0] = (l[0] + 2 * dc + t[0] + 2) >> 2
    return pred


def _angular_ref(main, side, angle):
    """Extended main reference indexed ref[x+N] for x in [-N, 2N]."""
    ref = np.zeros(3 * N + 1, dtype=np.int32)
    ref[N : 3 * N + 1] = main  # main[0] = corner at x = 0
    if angle < 0:
        inv = _INV_ANGLES[angle]
        lower = (N * angle) >> 5
        for x in range(-1, lower - 1, -1):
            ref[x + N] = side[(x * inv + 128) >> 8]
    return ref


def _predict_angular_core(main, side, angle):
    """Prediction in main-direction coordinates; rows step along the angle."""
    ref = _angular_ref(main, side, angle)
    pred = np.zeros((N, N), dtype=np.int32)
    x = np.arange(N, dtype=np.int32)
    for y in range(N):
        pos = (y + 1) * angle
        idx = pos >> 5
        fact = pos & 31
        base = x + idx + 1 + N
        if fact:
            pred[y] = (ref[base] * (32 - fact) + ref[base + 1] * fact + 16) >> 5
        else:
            pred[y] = ref[base]
    return pred


def _build_tables():
    """Gather tables for the batched all-mode predictor.

    For each angular mode m (2..34) and pixel (y, x) in main-direction
    coordinates, the prediction is a 1/32-pel interpolation between two
    entries of an extended reference line.  All indices and weights depend
    only on the mode, so they are precomputed once.
    """
    n_ang = N_MODES - 2
    main_src = np.zeros(n_ang, dtype=np.intp)
    side_src = np.zeros(n_ang, dtype=np.intp)
    idx0 = np.zeros((n_ang, N, N), dtype=np.intp)
    idx1 = np.zeros((n_ang, N, N), dtype=np.intp)
    fact = np.zeros((n_ang, N, 1), dtype=np.int32)
    neg_idx = np.zeros((n_ang, N), dtype=np.intp)
    neg_mask = np.zeros((n_ang, N), dtype=bool)
    x = np.arange(N, dtype=np.intp)
    for mode in range(2, N_MODES):
        m = mode - 2
        angle = _mode_angle(mode)
        smooth = smoothing_enabled(mode)
        above_main = mode >= 18
        # source order in the stacked array: above, left, above_f, left_f
        main_src[m] = (0 if above_main else 1) + (2 if smooth else 0)
        side_src[m] = (1 if above_main else 0) + (2 if smooth else 0)
        for y in range(N):
            pos = (y + 1) * angle
            fact[m, y, 0] = pos & 31
            idx0[m, y] = x + (pos >> 5) + 1 + N
        idx1[m] = idx0[m] + (fact[m] != 0).reshape(N, 1)
        if angle < 0:
            inv = _INV_ANGLES[angle]
            lower = (N * angle) >> 5
            for xx in range(-1, lower - 1, -1):
                neg_idx[m, xx + N] = (xx * inv + 128) >> 8
                neg_mask[m, xx + N] = True
    return main_src, side_src, idx0, idx1, fact, neg_idx, neg_mask


_MAIN_SRC, _SIDE_SRC, _IDX0, _IDX1, _FACT, _NEG_IDX, _NEG_MASK = _build_tables()
_REF_LEN = 3 * N + 1
_ROW_OFFS = (np.arange(N_MODES - 2, dtype=np.intp) * _REF_LEN).reshape(-1, 1, 1)


def predict_all_modes(above, left, above_f, left_f):
    """All 35 predictions at once as a (35, 8, 8) int32 array.

    Bit-identical to calling predict_block per mode; used by the encoder's
    candidate search.
    """
    preds = np.empty((N_MODES, N, N), dtype=np.int32)
    preds[0] = _predict_planar(above_f, left_f)
    preds[1] = _predict_dc(above, left)
    sources = np.stack([above, left, above_f, left_f]).astype(np.int32)
    refs = np.zeros((N_MODES - 2, _REF_LEN), dtype=np.int32)
    refs[:, N:] = sources[_MAIN_SRC]
    neg = sources[_SIDE_SRC[:, None], _NEG_IDX]
    refs[:, :N][_NEG_MASK] = neg[_NEG_MASK]
    flat = refs.ravel()
    g0 = flat[_ROW_OFFS + _IDX0]
    g1 = flat[_ROW_OFFS + _IDX1]
    p = (g0 * (32 - _FACT) + g1 * _FACT + 16) >> 5
    p[:16] = p[:16].transpose(0, 2, 1)  # horizontal modes 2..17
    preds[2:] = p
    preds[10, 0, :] = np.clip(left[1] + ((above[1 : N + 1] - above[0]) >> 1), 0, 255)
    preds[26, :, 0] = np.clip(above[1] + ((left[1 : N + 1] - above[0]) >> 1), 0, 255)
    return preds


def predict_block(above, left, above_f, left_f, mode):
    """Predict one 8x8 block in [0, 255].  Reference arrays as produced by
    build_references."""
    if not 0 <= mode < N_MODES:
        raise InvalidInputError(f"intra mode {mode} out of range")
    if mode == 0:
        return _predict_planar(above_f, left_f).astype(np.int32)
    if mode == 1:
        return _predict_dc(above, left)
    smooth = smoothing_enabled(mode)
    a = above_f if smooth else above
    l = left_f if smooth else left
    angle = _mode_angle(mode)
    if mode >= 18:
        pred = _predict_angular_core(a, l, angle)
        if mode == 26:
            col = above[1] + ((left[1 : N + 1] - above[0]) >> 1)
            pred[:, 0] = np.clip(col, 0, 255)
    else:
        pred = _predict_angular_core(l, a, angle).T
        if mode == 10:
            row = left[1] + ((above[1 : N + 1] - above[0]) >> 1)
            pred[0, :] = np.clip(row, 0, 255)
    return pred
