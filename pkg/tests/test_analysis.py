import math

import numpy as np
import pytest

from saabcodec import analysis
from saabcodec.errors import InsufficientDataError, InvalidInputError, NoOverlapError

BASE = [analysis.RDPoint(qp=37 - 5 * k, rate=1000.0 * 2**k, psnr=30.0 + 2 * k) for k in range(4)]


def _scale_rate(points, f):
    return [analysis.RDPoint(p.qp, p.rate * f, p.psnr) for p in points]


def _shift_psnr(points, d):
    return [analysis.RDPoint(p.qp, p.rate, p.psnr + d) for p in points]


def test_bd_equal_curves_zero():
    bd = analysis.bd_rate(BASE, list(BASE))
    assert abs(bd.bdbr_percent) < 1e-9
    assert abs(bd.bdpsnr_db) < 1e-9


def test_bd_rate_scaling():
    bd = analysis.bd_rate(BASE, _scale_rate(BASE, 1.10))
    assert bd.bdbr_percent == pytest.approx(10.0, abs=1e-6)


def test_bd_psnr_shift():
    bd = analysis.bd_rate(BASE, _shift_psnr(BASE, 1.0))
    assert bd.bdpsnr_db == pytest.approx(1.0, abs=1e-6)


def test_bd_antisymmetry():
    test = _shift_psnr(BASE, 0.05)
    fwd = analysis.bd_rate(BASE, test)
    rev = analysis.bd_rate(test, BASE)
    assert abs(fwd.bdbr_percent + rev.bdbr_percent) < 0.05
    assert abs(fwd.bdpsnr_db + rev.bdpsnr_db) < 1e-6


def test_bd_no_overlap():
    far = _shift_psnr(BASE, 50.0)
    with pytest.raises(NoOverlapError):
        analysis.bd_rate(BASE, far)


def test_bd_needs_four_points():
    with pytest.raises(InsufficientDataError):
        analysis.bd_rate(BASE[:3], BASE)


def test_bd_excludes_lossless_points():
    padded = BASE + [analysis.RDPoint(qp=0, rate=1e6, psnr=math.inf)]
    bd = analysis.bd_rate(padded, padded)
    assert abs(bd.bdbr_percent) < 1e-9


def test_psnr_basics():
    a = np.zeros((8, 8))
    assert analysis.psnr(a, a) == math.inf
    b = a.copy()
    b[0, 0] = 255
    expected = 10 * math.log10(255**2 / (255**2 / 64))
    assert analysis.psnr(a, b) == pytest.approx(expected)
    with pytest.raises(InvalidInputError):
        analysis.psnr(np.zeros((8, 8)), np.zeros((4, 4)))


def test_timing_ratio_mean_of_ratios():
    anchor = {22: 1.0, 27: 1.0, 32: 1.0, 37: 1.0}
    test = {22: 1.0, 27: 2.0, 32: 3.0, 37: 4.0}
    assert analysis.timing_ratio(test, anchor) == pytest.approx(250.0)
    with pytest.raises(InvalidInputError):
        analysis.timing_ratio({22: 1.0}, anchor)


def test_saab_usage():
    usage = analysis.saab_usage({22: (25, 100), 37: (75, 100)})
    assert usage["per_qp"][22] == pytest.approx(25.0)
    assert usage["average"] == pytest.approx(50.0)
    with pytest.raises(InsufficientDataError):
        analysis.saab_usage({})


def test_manifest_json_roundtrip(tmp_path):
    m = analysis.ExperimentManifest(
        clips=(analysis.ClipSpec(name="a", path="/x.yuv", width=64, height=48, frames=5),),
        qps=(22, 37),
        strategies=("s3",),
        bank_path="/bank.skb",
        seed=9,
        timing_runs=1,
    )
    path = str(tmp_path / "manifest.json")
    m.to_json(path)
    back = analysis.ExperimentManifest.from_json(path)
    assert back == m


def test_experiment_outputs(experiment_report):
    import os

    out = experiment_report["output_dir"]
    for name in ("rd_points.csv", "bd_summary.csv", "usage.csv", "timing.csv", "report.json"):
        assert os.path.exists(os.path.join(out, name)), name
    for clip, cdata in experiment_report["clips"].items():
        for strategy, entry in cdata["strategies"].items():
            assert len(entry["points"]) == 4
            rates = [p.rate for p in sorted(entry["points"], key=lambda p: p.qp)]
            assert all(a >= b for a, b in zip(rates, rates[1:])), "rate falls with QP"
            if strategy == "dct_only":
                assert entry["usage"]["average"] == 0.0
            if strategy == "s1":
                # substitution strategy codes every eligible-mode block with Saab
                assert entry["usage"]["average"] > 0.0


def test_rd_model_report(residual_records, bank):
    report = analysis.rd_model_report(residual_records[:3000], bank, qp=37)
    assert set(report["per_mode"]) <= set(range(35))
    assert math.isfinite(report["avg_delta_kappa"])
    assert math.isfinite(report["avg_delta_sigma2"])
