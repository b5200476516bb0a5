"""Residual collection and mode-dependent kernel-bank training.

Residuals come from running the DCT-only codec over raw clips at the chosen
QPs and recording, per coded 8x8 block, the prediction residual of the
RD-selected intra mode.  Residuals are then pooled per kernel group and
each of the 24 kernels is learned from a seeded subsample of its pool.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .codec import StrategyConfig, encode_sequence
from .errors import InvalidInputError, StarvedGroupError
from .kernelio import KernelBank
from .modes import N_KERNELS, canonical_mode_group_table
from .transforms import learn_saab1
from .video import read_yuv

DEFAULT_QPS = (22, 27, 32, 37)
DEFAULT_SAMPLES_PER_KERNEL = 80_000
MIN_GROUP_SAMPLES = 64

CORPUS_MAGIC = b"SRSC"
CORPUS_VERSION = 1
_RECORD = struct.Struct("<BBHHHH")  # mode, qp, source, frame, x, y + 64 int16


@dataclass(frozen=True)
class ResidualRecord:
    residual: np.ndarray  # 8x8 int16, original - prediction
    mode: int
    qp: int
    source: int
    frame: int
    x: int
    y: int


def extract_residuals(clips, qps=DEFAULT_QPS, frames=None):
    """Run the DCT-only encoder over luma clips and collect labelled residuals.

    `clips` is a list of frame lists (as from read_yuv) or a single frame
    list.  One record per coded block per QP.
    """
    if clips and isinstance(clips[0], np.ndarray):
        clips = [clips]
    cfg = StrategyConfig("dct_only")
    records = []
    for source_id, planes in enumerate(clips):
        if frames is not None:
            planes = planes[:frames]
        if not planes:
            raise InvalidInputError(f"clip {source_id} has no frames")
        for qp in qps:
            raw = []
            encode_sequence(planes, qp, cfg, collect_residuals=raw, source_id=source_id)
            records.extend(
                ResidualRecord(
                    residual=r["residual"],
                    mode=r["mode"],
                    qp=r["qp"],
                    source=r["source"],
                    frame=r["frame"],
                    x=r["x"],
                    y=r["y"],
                )
                for r in raw
            )
    return records


def extract_residuals_from_files(paths_dims, qps=DEFAULT_QPS, frames=None):
    """File-based wrapper: paths_dims is a list of (path, width, height)."""
    clips = [read_yuv(path, w, h) for path, w, h in paths_dims]
    return extract_residuals(clips, qps=qps, frames=frames)


def save_residual_corpus(path, records):
    with open(path, "wb") as f:
        f.write(CORPUS_MAGIC + struct.pack("<II", CORPUS_VERSION, len(records)))
        for r in records:
            f.write(_RECORD.pack(r.mode, r.qp, r.source, r.frame, r.x, r.y))
            f.write(r.residual.astype("<i2").tobytes())


def load_residual_corpus(path):
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:4] != CORPUS_MAGIC:
        raise InvalidInputError("not a residual corpus file")
    version, count = struct.unpack_from("<II", buf, 4)
    if version != CORPUS_VERSION:
        raise InvalidInputError(f"unsupported corpus version {version}")
    offset = 12
    records = []
    for _ in range(count):
        mode, qp, source, frame, x, y = _RECORD.unpack_from(buf, offset)
        offset += _RECORD.size
        residual = np.frombuffer(buf, dtype="<i2", count=64, offset=offset).reshape(8, 8)
        offset += 128
        records.append(
            ResidualRecord(
                residual=residual.copy(), mode=mode, qp=qp, source=source, frame=frame, x=x, y=y
            )
        )
    return records


def train_kernel_bank(
    records,
    table=None,
    samples_per_kernel=DEFAULT_SAMPLES_PER_KERNEL,
    seed=0,
    decimal_digits=None,
    provenance=None,
):
    """Learn the 24 mode-dependent kernels from a residual corpus.

    Each kernel trains on residuals whose intra mode falls in its group,
    subsampled deterministically to `samples_per_kernel`.  Raises
    StarvedGroupError listing every group with fewer than 64 residuals.
    """
    if table is None:
        table = canonical_mode_group_table()
    pools = {k: [] for k in range(N_KERNELS)}
    for r in records:
        for k in range(N_KERNELS):
            if r.mode in table.train_groups[k]:
                pools[k].append(r.residual)
    starved = {
        k: table.train_groups[k]
        for k in range(N_KERNELS)
        if len(pools[k]) < MIN_GROUP_SAMPLES
    }
    if starved:
        raise StarvedGroupError(starved)
    kernels = []
    for k in range(N_KERNELS):
        pool = np.asarray(pools[k], dtype=np.float64).reshape(len(pools[k]), 64)
        if pool.shape[0] > samples_per_kernel:
            rng = np.random.default_rng([seed, k])
            idx = np.sort(rng.choice(pool.shape[0], size=samples_per_kernel, replace=False))
            pool = pool[idx]
        kernels.append(learn_saab1(pool, trained_mode_group=sorted(table.train_groups[k])))
    meta = dict(provenance or {})
    meta.update(
        seed=seed,
        samples_per_kernel=samples_per_kernel,
        decimal_digits=decimal_digits,
        record_count=len(records),
    )
    bank = KernelBank(kernels=tuple(kernels), table=table, meta=meta)
    if decimal_digits is not None:
        bank = bank.rounded(decimal_digits)
    return bank
