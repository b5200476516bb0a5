"""Simplified 8x8-block intra encoder/decoder.

Per block the encoder runs all 35 intra modes, codes the residual with each
transform the strategy allows (DCT and/or the mode's learned kernel),
entropy-codes the levels, reconstructs in the pixel domain, and keeps the
candidate with the lowest J = SSE + lambda * bits.  Ties prefer DCT, then
the lower mode id.  The decoder replays the identical arithmetic, so its
output matches the encoder reconstruction bit-exactly.

Strategies:
  dct_only  anchor; every mode uses DCT, no flags.
  s1        pure substitution: learned kernel outside modes 8-12/24-28,
            DCT inside, never a flag bit.
  s2        RDO kernel-vs-DCT with a 1-bit flag outside 8-12/24-28,
            DCT-only inside.
  s3        RDO with flag for all 35 modes.

Block payload format (per block, in stream order): 6-bit mode, optional
1-bit transform flag (0=DCT, 1=learned), then the level coder: 1-bit
coded-block flag; if set, 6-bit last significant position and, scanning
from that position down to 0, a significance bit (implied at the last
position) plus exp-Golomb(magnitude-1) and a sign bit for significant
levels.  DCT levels are scanned in zigzag order, learned-kernel levels in
coefficient order.
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .bitstream import BitReader, BitWriter, ue_bit_length
from .errors import BitstreamError, InvalidInputError
from .intra import build_references, predict_all_modes, predict_block
from .linalg import VEC_LEN
from .metrics import qp_to_lambda, qp_to_qstep
from .modes import DCT_ONLY_MODES, N_MODES
from .transforms import DCT_64

BLOCK = 8
MODE_BITS = 6

STRATEGIES = ("dct_only", "s1", "s2", "s3")
_STRATEGY_CODES = {name: i for i, name in enumerate(STRATEGIES)}

STREAM_MAGIC = b"SBVC"
STREAM_VERSION = 1
_HEADER = struct.Struct("<4sBBBBHHH16s")


def _zigzag_order(n):
    order = sorted(
        ((r, c) for r in range(n) for c in range(n)),
        key=lambda rc: (rc[0] + rc[1], rc[1] if (rc[0] + rc[1]) % 2 else rc[0]),
    )
    return np.array([r * n + c for r, c in order], dtype=np.int64)


ZIGZAG = _zigzag_order(BLOCK)
INV_ZIGZAG = np.argsort(ZIGZAG)


def quantize(coeffs, q_step, deadzone=1.0 / 3.0):
    """Uniform deadzone quantizer: sign(y) * floor(|y|/Q + f)."""
    if q_step <= 0:
        raise InvalidInputError("q_step must be positive")
    y = np.asarray(coeffs, dtype=np.float64)
    return (np.sign(y) * np.floor(np.abs(y) / q_step + deadzone)).astype(np.int64)


def dequantize(levels, q_step):
    if q_step <= 0:
        raise InvalidInputError("q_step must be positive")
    return np.asarray(levels, dtype=np.float64) * q_step


def rd_cost(bits, sse, lam):
    return sse + lam * bits


def encode_levels(bw, levels_scan):
    """Entropy-code 64 levels (already in scan order) into the writer."""
    nz = np.nonzero(levels_scan)[0]
    if nz.size == 0:
        bw.write_bit(0)
        return
    bw.write_bit(1)
    last = int(nz[-1])
    bw.write_bits(last, 6)
    for pos in range(last, -1, -1):
        lv = int(levels_scan[pos])
        if pos != last:
            bw.write_bit(lv != 0)
        if lv != 0:
            bw.write_ue(abs(lv) - 1)
            bw.write_bit(lv < 0)


def decode_levels(br):
    levels = np.zeros(VEC_LEN, dtype=np.int64)
    if br.read_bit() == 0:
        return levels
    last = br.read_bits(6)
    for pos in range(last, -1, -1):
        sig = 1 if pos == last else br.read_bit()
        if sig:
            mag = br.read_ue() + 1
            levels[pos] = -mag if br.read_bit() else mag
    return levels


def level_bit_cost(levels_scan):
    """Exact bit count of encode_levels, vectorized over (n, 64) level arrays."""
    arr = np.asarray(levels_scan, dtype=np.int64)
    single = arr.ndim == 1
    lv = np.atleast_2d(arr)
    sig = lv != 0
    any_nz = sig.any(axis=1)
    last = (VEC_LEN - 1) - np.argmax(sig[:, ::-1], axis=1)
    mag_bits = np.where(sig, ue_bit_length(np.abs(lv) - sig) + 1, 0)
    payload = 6 + last + mag_bits.sum(axis=1)
    cost = 1 + np.where(any_nz, payload, 0)
    return int(cost[0]) if single else cost


@dataclass(frozen=True)
class CodedBlock:
    mode: int
    transform_flag: int | None  # None when the strategy offers no choice
    levels: np.ndarray  # 64 levels in scan order
    uses_saab: bool


@dataclass
class BlockRecord:
    mode: int
    transform: str
    bits: int
    sse: float
    j_chosen: float = math.inf
    j_dct: float = math.inf
    residual: np.ndarray | None = None


@dataclass
class FrameStats:
    total_bits: int = 0
    sse: float = 0.0
    psnr: float = math.inf
    n_saab: int = 0
    n_total: int = 0
    blocks: list = field(default_factory=list)


@dataclass
class DecodeStats:
    n_total: int = 0
    n_saab: int = 0
    n_flag_bits: int = 0
    n_flag_saab: int = 0


class StrategyConfig:
    """Strategy + kernel bank, with per-mode candidate tables precomputed."""

    def __init__(self, strategy, bank=None):
        if strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {strategy!r}")
        if strategy == "dct_only":
            bank = None
        elif bank is None:
            raise InvalidInputError(f"strategy {strategy} requires a kernel bank")
        self.strategy = strategy
        self.bank = bank

        self.dct_ok = np.ones(N_MODES, dtype=bool)
        self.saab_ok = np.zeros(N_MODES, dtype=bool)
        if strategy in ("s1", "s2"):
            for m in range(N_MODES):
                self.saab_ok[m] = m not in DCT_ONLY_MODES
            if strategy == "s1":
                self.dct_ok = ~self.saab_ok
        elif strategy == "s3":
            self.saab_ok[:] = True
        self.flag = self.dct_ok & self.saab_ok

        if bank is not None:
            self.saab_matrices = np.stack(
                [bank.kernel_for_mode(m).matrix for m in range(N_MODES)]
            )
        else:
            self.saab_matrices = None

    def flag_present(self, mode):
        return bool(self.flag[mode])

    def digest(self):
        return self.bank.digest() if self.bank is not None else b"\x00" * 16


def _reconstruct_block(pred64, levels_scan, uses_saab, kernel_matrix, q_step):
    """Shared encoder/decoder reconstruction path (must stay bit-identical)."""
    deq = dequantize(levels_scan, q_step)
    if uses_saab:
        xhat = kernel_matrix.T @ deq
    else:
        xhat = DCT_64.T @ deq[INV_ZIGZAG]
    return np.clip(np.rint(pred64 + xhat), 0, 255).astype(np.int32)


def encode_block(original, recon, pos, qp, cfg):
    """RD-optimal mode and transform choice for one block.

    `recon` is the frame reconstruction surface with causal neighbors
    filled; `pos` is the (bx, by) block grid position.  Returns
    (CodedBlock, reconstructed 8x8 int array, BlockRecord); the caller
    stores the reconstruction and serializes the CodedBlock.
    """
    bx, by = pos
    h, w = recon.shape
    refs = build_references(recon, bx, by, w // BLOCK, h // BLOCK)
    preds = predict_all_modes(*refs)
    orig = np.asarray(original, dtype=np.int32)
    res = (orig - preds).reshape(N_MODES, VEC_LEN).astype(np.float64)

    q = qp_to_qstep(qp)
    lam = qp_to_lambda(qp)
    flag_bits = cfg.flag.astype(np.int64)
    head_bits = MODE_BITS + flag_bits

    # DCT candidates.
    lv_dct = quantize(res @ DCT_64.T, q)[:, ZIGZAG]
    bits_dct = head_bits + level_bit_cost(lv_dct)
    rec_dct = np.clip(
        np.rint(preds.reshape(N_MODES, VEC_LEN) + dequantize(lv_dct, q)[:, INV_ZIGZAG] @ DCT_64),
        0,
        255,
    )
    sse_dct = np.sum((orig.reshape(VEC_LEN) - rec_dct) ** 2, axis=1)
    j_dct = np.where(cfg.dct_ok, sse_dct + lam * bits_dct, np.inf)

    # Learned-kernel candidates.
    if cfg.saab_matrices is not None and cfg.saab_ok.any():
        y_saab = np.einsum("mij,mj->mi", cfg.saab_matrices, res)
        lv_saab = quantize(y_saab, q)
        bits_saab = head_bits + level_bit_cost(lv_saab)
        rec_saab = np.clip(
            np.rint(
                preds.reshape(N_MODES, VEC_LEN)
                + np.einsum("mji,mj->mi", cfg.saab_matrices, dequantize(lv_saab, q))
            ),
            0,
            255,
        )
        sse_saab = np.sum((orig.reshape(VEC_LEN) - rec_saab) ** 2, axis=1)
        j_saab = np.where(cfg.saab_ok, sse_saab + lam * bits_saab, np.inf)
    else:
        lv_saab = None
        j_saab = np.full(N_MODES, np.inf)

    # Flattened candidate order [DCT modes..., kernel modes...]: argmin takes
    # the first minimum, which encodes the DCT-first / lower-mode tie-break.
    j_all = np.concatenate([j_dct, j_saab])
    best = int(np.argmin(j_all))
    uses_saab = best >= N_MODES
    mode = best % N_MODES

    if uses_saab:
        levels = lv_saab[mode]
        bits = int(bits_saab[mode])
        kernel_matrix = cfg.saab_matrices[mode]
    else:
        levels = lv_dct[mode]
        bits = int(bits_dct[mode])
        kernel_matrix = None

    rec = _reconstruct_block(
        preds[mode].reshape(VEC_LEN), levels, uses_saab, kernel_matrix, q
    ).reshape(BLOCK, BLOCK)
    sse = float(np.sum((orig - rec) ** 2))
    coded = CodedBlock(
        mode=mode,
        transform_flag=(1 if uses_saab else 0) if cfg.flag_present(mode) else None,
        levels=levels,
        uses_saab=uses_saab,
    )
    record = BlockRecord(
        mode=mode, transform="saab" if uses_saab else "dct", bits=bits, sse=sse
    )
    # Exposed for dominance checks: J of the chosen candidate and of the DCT
    # candidate in the same pass.
    record.j_chosen = float(j_all[best])
    record.j_dct = float(j_dct[mode]) if cfg.dct_ok[mode] else math.inf
    record.residual = (orig - preds[mode]).astype(np.int16)
    return coded, rec, record


def _write_coded_block(bw, coded):
    bw.write_bits(coded.mode, MODE_BITS)
    if coded.transform_flag is not None:
        bw.write_bit(coded.transform_flag)
    encode_levels(bw, coded.levels)


def encode_sequence(planes, qp, cfg, collect_residuals=None, source_id=0, recon_out=None):
    """Encode luma planes into one self-describing bitstream.

    Returns (stream bytes, list of FrameStats).  When `collect_residuals`
    is a list, one ResidualRecord-shaped dict per coded block is appended
    (used by the training pipeline).  When `recon_out` is a list, the
    encoder's own reconstruction planes are appended (uint8), which must
    match the decoder output bit-exactly.
    """
    if not planes:
        raise InvalidInputError("no frames to encode")
    h, w = planes[0].shape
    if h % BLOCK or w % BLOCK:
        raise InvalidInputError("plane dimensions must be multiples of 8")
    bw = BitWriter()
    stats_list = []
    for frame_index, plane in enumerate(planes):
        if plane.shape != (h, w):
            raise InvalidInputError("all frames must share dimensions")
        recon = np.zeros((h, w), dtype=np.int32)
        stats = FrameStats()
        for by in range(h // BLOCK):
            for bx in range(w // BLOCK):
                orig = plane[by * BLOCK : (by + 1) * BLOCK, bx * BLOCK : (bx + 1) * BLOCK]
                before = bw.bit_length
                coded, rec, record = encode_block(orig, recon, (bx, by), qp, cfg)
                _write_coded_block(bw, coded)
                record.bits = bw.bit_length - before
                recon[by * BLOCK : (by + 1) * BLOCK, bx * BLOCK : (bx + 1) * BLOCK] = rec
                stats.blocks.append(record)
                stats.total_bits += record.bits
                stats.sse += record.sse
                stats.n_total += 1
                stats.n_saab += 1 if coded.uses_saab else 0
                if collect_residuals is not None:
                    collect_residuals.append(
                        {
                            "residual": record.residual,
                            "mode": record.mode,
                            "qp": qp,
                            "source": source_id,
                            "frame": frame_index,
                            "x": bx,
                            "y": by,
                        }
                    )
        npix = h * w
        stats.psnr = (
            math.inf
            if stats.sse == 0
            else 10.0 * math.log10(255.0 * 255.0 * npix / stats.sse)
        )
        stats_list.append(stats)
        if recon_out is not None:
            recon_out.append(recon.astype(np.uint8))
    header = _HEADER.pack(
        STREAM_MAGIC,
        STREAM_VERSION,
        _STRATEGY_CODES[cfg.strategy],
        qp,
        0,
        w,
        h,
        len(planes),
        cfg.digest(),
    )
    return header + bw.getvalue(), stats_list


def encode_frame(plane, qp, cfg):
    """Single-frame convenience wrapper around encode_sequence."""
    stream, stats = encode_sequence([plane], qp, cfg)
    return stream, stats[0]


def decode_sequence(data, bank=None):
    """Decode a bitstream back to luma planes.

    Returns (planes, DecodeStats).  Raises BitstreamError on truncation and
    InvalidInputError when the embedded kernel-bank digest does not match.
    """
    if len(data) < _HEADER.size or data[:4] != STREAM_MAGIC:
        raise BitstreamError("not a saabcodec bitstream")
    magic, version, strategy_code, qp, _, w, h, n_frames, digest = _HEADER.unpack_from(data)
    if version != STREAM_VERSION:
        raise BitstreamError(f"unsupported stream version {version}")
    strategy = STRATEGIES[strategy_code]
    if strategy != "dct_only":
        if bank is None:
            raise InvalidInputError("stream requires a kernel bank")
        if bank.digest() != digest:
            raise InvalidInputError("kernel bank digest mismatch")
    cfg = StrategyConfig(strategy, bank if strategy != "dct_only" else None)
    q = qp_to_qstep(qp)
    br = BitReader(data[_HEADER.size :])
    planes = []
    dstats = DecodeStats()
    for _ in range(n_frames):
        recon = np.zeros((h, w), dtype=np.int32)
        for by in range(h // BLOCK):
            for bx in range(w // BLOCK):
                mode = br.read_bits(MODE_BITS)
                if mode >= N_MODES:
                    raise BitstreamError(f"invalid mode {mode}", bit_offset=br.position)
                uses_saab = not cfg.dct_ok[mode]
                if cfg.flag_present(mode):
                    flag = br.read_bit()
                    dstats.n_flag_bits += 1
                    dstats.n_flag_saab += flag
                    uses_saab = bool(flag)
                levels = decode_levels(br)
                refs = build_references(recon, bx, by, w // BLOCK, h // BLOCK)
                pred = predict_block(*refs, mode).reshape(VEC_LEN)
                kernel_matrix = cfg.saab_matrices[mode] if uses_saab else None
                rec = _reconstruct_block(pred, levels, uses_saab, kernel_matrix, q)
                recon[by * BLOCK : (by + 1) * BLOCK, bx * BLOCK : (bx + 1) * BLOCK] = (
                    rec.reshape(BLOCK, BLOCK)
                )
                dstats.n_total += 1
                dstats.n_saab += 1 if uses_saab else 0
        planes.append(recon.astype(np.uint8))
    return planes, dstats


def stream_info(data):
    """Parse the header of a bitstream without decoding the payload."""
    if len(data) < _HEADER.size or data[:4] != STREAM_MAGIC:
        raise BitstreamError("not a saabcodec bitstream")
    magic, version, strategy_code, qp, _, w, h, n_frames, digest = _HEADER.unpack_from(data)
    return {
        "version": version,
        "strategy": STRATEGIES[strategy_code],
        "qp": qp,
        "width": w,
        "height": h,
        "frames": n_frames,
        "digest": digest.hex(),
    }
