"""Rate-distortion analysis: PSNR, Bjontegaard deltas, usage/timing
summaries, transform comparison reports, and the experiment driver that
turns a manifest of clips into CSV/JSON result tables.
"""

import csv
import json
import math
import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .codec import STRATEGIES, StrategyConfig, decode_sequence, encode_sequence
from .errors import (
    ExperimentStageError,
    InsufficientDataError,
    InvalidInputError,
    NoOverlapError,
)
from .kernelio import KernelBank
from .metrics import RDModelParams, coeff_stats, compare_transforms
from .transforms import dct_forward, learn_klt, learn_saab1, learn_saab2, saab2_forward, saab_forward
from .video import read_yuv

PEAK = 255.0


def psnr(original, reconstructed):
    """Luma PSNR in dB between two planes (or plane lists); inf if identical."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    return psnr_from_sse(mse * a.size, a.size)


def psnr_from_sse(sse, n_pixels):
    if n_pixels <= 0:
        raise InvalidInputError("need at least one pixel")
    if sse <= 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK * n_pixels / sse)


@dataclass(frozen=True)
class RDPoint:
    qp: int
    rate: float  # bits per frame
    psnr: float  # dB


@dataclass(frozen=True)
class BDStats:
    bdbr_percent: float
    bdpsnr_db: float


def _curve_arrays(points, label):
    pts = sorted(points, key=lambda p: p.rate)
    pts = [p for p in pts if math.isfinite(p.psnr)]
    if len(pts) < 4:
        raise InsufficientDataError(
            f"{label}: need at least 4 finite RD points for a cubic fit, got {len(pts)}"
        )
    rates = np.array([p.rate for p in pts], dtype=np.float64)
    psnrs = np.array([p.psnr for p in pts], dtype=np.float64)
    if np.any(rates <= 0):
        raise InvalidInputError(f"{label}: rates must be positive")
    return np.log10(rates), psnrs


def _poly_average(x, y, lo, hi):
    coeffs = np.polyfit(x, y, 3)
    integ = np.polyint(coeffs)
    return (np.polyval(integ, hi) - np.polyval(integ, lo)) / (hi - lo)


def bd_rate(anchor_points, test_points):
    """Bjontegaard deltas of `test` against `anchor` via cubic fits.

    BDBR integrates log10(rate) over the common PSNR interval; BDPSNR
    integrates PSNR over the common log-rate interval.  Negative BDBR
    means the test codec needs fewer bits at equal quality.
    """
    la, pa = _curve_arrays(anchor_points, "anchor")
    lt, pt = _curve_arrays(test_points, "test")

    lo = max(pa.min(), pt.min())
    hi = min(pa.max(), pt.max())
    if hi <= lo:
        raise NoOverlapError(
            f"PSNR ranges do not overlap: anchor [{pa.min():.3f}, {pa.max():.3f}] "
            f"vs test [{pt.min():.3f}, {pt.max():.3f}]"
        )
    avg_log_diff = _poly_average(pt, lt, lo, hi) - _poly_average(pa, la, lo, hi)
    bdbr = (10.0 ** avg_log_diff - 1.0) * 100.0

    rlo = max(la.min(), lt.min())
    rhi = min(la.max(), lt.max())
    if rhi <= rlo:
        raise NoOverlapError("rate ranges do not overlap")
    bdpsnr = _poly_average(lt, pt, rlo, rhi) - _poly_average(la, pa, rlo, rhi)
    return BDStats(bdbr_percent=float(bdbr), bdpsnr_db=float(bdpsnr))


def saab_usage(counts_by_qp):
    """Percentage of blocks coded with a Saab kernel, per QP and averaged.

    counts_by_qp maps qp -> (n_saab, n_total).
    """
    if not counts_by_qp:
        raise InsufficientDataError("no usage counts")
    per_qp = {}
    for qp, (n_saab, n_total) in counts_by_qp.items():
        if n_total <= 0:
            raise InvalidInputError(f"qp {qp}: no coded blocks")
        per_qp[int(qp)] = 100.0 * n_saab / n_total
    return {"per_qp": per_qp, "average": sum(per_qp.values()) / len(per_qp)}


def timing_ratio(test_seconds, anchor_seconds):
    """Mean-of-ratios runtime percentage of test over anchor, per matching QP."""
    if set(test_seconds) != set(anchor_seconds):
        raise InvalidInputError("timing dictionaries cover different QP sets")
    if not test_seconds:
        raise InsufficientDataError("no timing samples")
    ratios = []
    for qp in test_seconds:
        if anchor_seconds[qp] <= 0:
            raise InvalidInputError(f"qp {qp}: anchor time must be positive")
        ratios.append(test_seconds[qp] / anchor_seconds[qp])
    return 100.0 * sum(ratios) / len(ratios)


def transform_comparison_report(train_blocks, eval_blocks):
    """Energy compaction and decorrelation of DCT vs KLT vs one/two-stage Saab.

    Transforms are learned on train_blocks and evaluated on eval_blocks.
    Returns per-transform compaction curves and decorrelation costs.
    """
    from .metrics import decorrelation_cost, energy_compaction, residual_sample_variance

    train = np.asarray(train_blocks, dtype=np.float64)
    ev = np.asarray(eval_blocks, dtype=np.float64)
    klt = learn_klt(train)
    saab1 = learn_saab1(train)
    saab2 = learn_saab2(train)
    flat = ev.reshape(ev.shape[0], -1)
    coeffs = {
        "dct": np.array([dct_forward(b) for b in flat]),
        "klt": np.array([saab_forward(klt, b) for b in flat]),
        "saab1": np.array([saab_forward(saab1, b) for b in flat]),
        "saab2": np.array([saab2_forward(saab2, b) for b in flat]),
    }
    var = residual_sample_variance(ev)
    report = {"input_variance": var, "sample_count": int(ev.shape[0]), "transforms": {}}
    for name, y in coeffs.items():
        curve = energy_compaction(y, var)
        report["transforms"][name] = {
            "compaction": curve.values,
            "position_order": curve.position_order,
            "decorrelation_cost": decorrelation_cost(y),
        }
    return report


def rd_model_report(records, bank, qp):
    """Closed-form RD comparison of mode-dependent Saab kernels against DCT.

    Groups residual records by intra mode, computes coefficient statistics
    under both transforms, and evaluates the per-position kappa model at the
    given QP.  Mode averages are unweighted; modes with fewer than two
    residuals are skipped.
    """
    params = RDModelParams.from_qp(qp)
    by_mode = {}
    for r in records:
        by_mode.setdefault(r.mode, []).append(r.residual)
    per_mode = {}
    for mode in sorted(by_mode):
        blocks = np.asarray(by_mode[mode], dtype=np.float64)
        if blocks.shape[0] < 2:
            continue
        flat = blocks.reshape(blocks.shape[0], -1)
        kernel = bank.kernel_for_mode(mode)
        y_saab = flat @ kernel.matrix.T
        y_dct = np.array([dct_forward(b) for b in flat])
        cmp_ = compare_transforms(coeff_stats(y_saab), coeff_stats(y_dct), params)
        per_mode[mode] = cmp_
    if not per_mode:
        raise InsufficientDataError("no mode had at least 2 residuals")
    return {
        "qp": qp,
        "per_mode": per_mode,
        "avg_delta_kappa": sum(c.delta_kappa for c in per_mode.values()) / len(per_mode),
        "avg_delta_sigma2": sum(c.delta_sigma2 for c in per_mode.values()) / len(per_mode),
    }


@dataclass(frozen=True)
class ClipSpec:
    name: str
    path: str
    width: int
    height: int
    frames: int = 0  # 0 = all


@dataclass(frozen=True)
class ExperimentManifest:
    clips: tuple
    qps: tuple = (22, 27, 32, 37)
    strategies: tuple = ("s1", "s2", "s3")
    bank_path: str = ""
    seed: int = 0
    timing_runs: int = 3

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            raw = json.load(f)
        clips = tuple(ClipSpec(**c) for c in raw["clips"])
        return cls(
            clips=clips,
            qps=tuple(raw.get("qps", (22, 27, 32, 37))),
            strategies=tuple(raw.get("strategies", ("s1", "s2", "s3"))),
            bank_path=raw.get("bank_path", ""),
            seed=int(raw.get("seed", 0)),
            timing_runs=int(raw.get("timing_runs", 3)),
        )

    def to_json(self, path):
        raw = {
            "clips": [vars(c) for c in self.clips],
            "qps": list(self.qps),
            "strategies": list(self.strategies),
            "bank_path": self.bank_path,
            "seed": self.seed,
            "timing_runs": self.timing_runs,
        }
        with open(path, "w") as f:
            json.dump(raw, f, indent=2, sort_keys=True)
            f.write("\n")


def _timed(fn, runs):
    """Run fn() `runs` times; return (result of first run, median seconds)."""
    result = None
    times = []
    for i in range(max(1, runs)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
        if i == 0:
            result = out
    return result, statistics.median(times)


def run_experiment(manifest, output_dir, bank=None, verbose=False):
    """Encode every (clip, strategy, qp) cell, decode to verify, and produce
    RD points, Bjontegaard deltas vs the DCT-only anchor, Saab usage, and
    runtime ratios.  Writes CSV tables plus report.json under output_dir;
    timing lives only in timing.csv so the other outputs are deterministic.
    """
    strategies = list(manifest.strategies)
    for s in strategies:
        if s not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {s!r}")
    if "dct_only" in strategies:
        strategies.remove("dct_only")
    strategies = ["dct_only"] + strategies

    if bank is None and any(s != "dct_only" for s in strategies):
        if not manifest.bank_path:
            raise InvalidInputError("manifest needs bank_path for Saab strategies")
        bank = KernelBank.load(manifest.bank_path)

    os.makedirs(output_dir, exist_ok=True)
    report = {
        "qps": list(manifest.qps),
        "strategies": strategies,
        "seed": manifest.seed,
        "bank_digest": bank.digest().hex() if bank is not None else "",
        "clips": {},
    }
    timing_rows = []

    for clip in manifest.clips:
        planes = read_yuv(clip.path, clip.width, clip.height)
        if clip.frames:
            planes = planes[: clip.frames]
        n_pix = sum(p.size for p in planes)
        clip_out = {"strategies": {}}
        enc_times = {}
        dec_times = {}

        for strategy in strategies:
            cfg = StrategyConfig(strategy, bank if strategy != "dct_only" else None)
            points = []
            usage_counts = {}
            enc_times[strategy] = {}
            dec_times[strategy] = {}
            for qp in manifest.qps:
                try:
                    (stream, stats), t_enc = _timed(
                        lambda: encode_sequence(planes, qp, cfg), manifest.timing_runs
                    )
                    (decoded, dstats), t_dec = _timed(
                        lambda: decode_sequence(stream, cfg.bank), manifest.timing_runs
                    )
                except Exception as e:  # noqa: BLE001 - re-raised with context
                    raise ExperimentStageError(clip.name, qp, strategy, e) from e
                total_bits = sum(s.total_bits for s in stats)
                total_sse = sum(s.sse for s in stats)
                decoded_sse = float(
                    sum(
                        np.sum((o.astype(np.int64) - d.astype(np.int64)) ** 2)
                        for o, d in zip(planes, decoded)
                    )
                )
                if decoded_sse != total_sse:
                    raise ExperimentStageError(
                        clip.name, qp, strategy, "decoder does not match encoder reconstruction"
                    )
                points.append(
                    RDPoint(
                        qp=qp,
                        rate=total_bits / len(planes),
                        psnr=psnr_from_sse(total_sse, n_pix),
                    )
                )
                usage_counts[qp] = (dstats.n_saab, dstats.n_total)
                enc_times[strategy][qp] = t_enc
                dec_times[strategy][qp] = t_dec
                if verbose:
                    print(
                        f"{clip.name} {strategy} qp={qp}: "
                        f"{points[-1].rate:.1f} bits/frame, {points[-1].psnr:.3f} dB"
                    )
            entry = {
                "points": points,
                "usage": saab_usage(usage_counts),
            }
            if strategy != "dct_only":
                entry["bd"] = bd_rate(clip_out["strategies"]["dct_only"]["points"], points)
                timing_rows.append(
                    {
                        "clip": clip.name,
                        "strategy": strategy,
                        "encr_percent": timing_ratio(enc_times[strategy], enc_times["dct_only"]),
                        "decr_percent": timing_ratio(dec_times[strategy], dec_times["dct_only"]),
                    }
                )
            clip_out["strategies"][strategy] = entry
        report["clips"][clip.name] = clip_out

    _write_outputs(report, timing_rows, output_dir)
    report["timing"] = timing_rows
    return report


def _fmt(x):
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.6f}"
    return str(x)


def _write_outputs(report, timing_rows, output_dir):
    with open(os.path.join(output_dir, "rd_points.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["clip", "strategy", "qp", "bits_per_frame", "psnr_db"])
        for clip, cdata in sorted(report["clips"].items()):
            for strategy in report["strategies"]:
                for p in cdata["strategies"][strategy]["points"]:
                    w.writerow([clip, strategy, p.qp, _fmt(p.rate), _fmt(p.psnr)])

    with open(os.path.join(output_dir, "bd_summary.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["clip", "strategy", "bdbr_percent", "bdpsnr_db"])
        for clip, cdata in sorted(report["clips"].items()):
            for strategy in report["strategies"]:
                bd = cdata["strategies"][strategy].get("bd")
                if bd is not None:
                    w.writerow([clip, strategy, _fmt(bd.bdbr_percent), _fmt(bd.bdpsnr_db)])

    with open(os.path.join(output_dir, "usage.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["clip", "strategy", "qp", "p_saab_percent"])
        for clip, cdata in sorted(report["clips"].items()):
            for strategy in report["strategies"]:
                usage = cdata["strategies"][strategy]["usage"]
                for qp in sorted(usage["per_qp"]):
                    w.writerow([clip, strategy, qp, _fmt(usage["per_qp"][qp])])
                w.writerow([clip, strategy, "avg", _fmt(usage["average"])])

    with open(os.path.join(output_dir, "timing.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["clip", "strategy", "encr_percent", "decr_percent"])
        for row in timing_rows:
            w.writerow(
                [row["clip"], row["strategy"], _fmt(row["encr_percent"]), _fmt(row["decr_percent"])]
            )

    with open(os.path.join(output_dir, "report.json"), "w") as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (RDPoint, BDStats)):
        return _jsonable(vars(obj))
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) or isinstance(obj, np.floating):
        x = float(obj)
        return "inf" if math.isinf(x) else round(x, 9)
    return obj
