import math

import numpy as np
import pytest

from saabcodec import metrics
from saabcodec.errors import DegenerateInputError, InsufficientDataError, InvalidInputError


def test_qp_to_qstep():
    assert metrics.qp_to_qstep(4) == pytest.approx(1.0)
    assert metrics.qp_to_qstep(10) == pytest.approx(2.0)
    assert metrics.qp_to_qstep(22) == pytest.approx(2.0 ** 3)


def test_qp_to_lambda():
    assert metrics.qp_to_lambda(12) == pytest.approx(0.57)
    assert metrics.qp_to_lambda(15) == pytest.approx(0.57 * 2.0)


def test_kappa_low_sigma_branch_exact():
    params = metrics.RDModelParams(qp=0, q_step=10.0, lam=1.0)
    assert abs(metrics.kappa(1.0, params) - 100.0 / 112.0) < 1e-12


def test_kappa_zero_sigma():
    params = metrics.RDModelParams.from_qp(32)
    assert metrics.kappa(0.0, params) == 0.0
    with pytest.raises(InvalidInputError):
        metrics.kappa(-1.0, params)


def test_kappa_rate_term_joins_continuously():
    params = metrics.RDModelParams(qp=0, q_step=1.0, lam=0.5)
    thresh = 1.0 / metrics.SQRT2_E
    below = metrics.kappa(thresh * (1 - 1e-9), params)
    above = metrics.kappa(thresh * (1 + 1e-9), params)
    assert abs(above - below) < 1e-6


def test_energy_compaction_monotone_and_normalized():
    rng = np.random.default_rng(0)
    y = rng.normal(0, 3, size=(500, 64))
    var = float(np.var(y))  # treat the raw samples as the input signal
    curve = metrics.energy_compaction(y, var)
    assert len(curve.values) == 64
    assert all(b >= a for a, b in zip(curve.values, curve.values[1:]))
    assert curve.values[-1] == pytest.approx(np.mean(np.sum(y * y, axis=1)) / (64 * var))
    # descending per-position energy order
    energies = np.mean(y * y, axis=0)
    assert list(curve.position_order) == list(np.argsort(-energies, kind="stable"))


def test_decorrelation_cost_ordering():
    rng = np.random.default_rng(1)
    indep = rng.normal(size=(4000, 8))
    mix = indep @ np.array(
        [[1.0 if i == j else 0.4 for j in range(8)] for i in range(8)]
    )
    assert metrics.decorrelation_cost(indep) < metrics.decorrelation_cost(mix)


def test_distribution_fit_prefers_laplace_on_laplace_data():
    rng = np.random.default_rng(2)
    fit = metrics.fit_coefficient_distribution(rng.laplace(0, 5, size=5000))
    assert fit.better == "laplace"
    gauss = metrics.fit_coefficient_distribution(rng.normal(0, 5, size=5000))
    assert gauss.better == "gauss"


def test_distribution_fit_errors():
    with pytest.raises(InsufficientDataError):
        metrics.fit_coefficient_distribution(np.ones(10))
    with pytest.raises(DegenerateInputError):
        metrics.fit_coefficient_distribution(np.ones(100))


def test_compare_transforms_zero_for_identical_stats():
    rng = np.random.default_rng(3)
    y = rng.normal(size=(200, 64))
    stats = metrics.coeff_stats(y)
    cmp_ = metrics.compare_transforms(stats, stats, metrics.RDModelParams.from_qp(37))
    assert cmp_.delta_kappa == 0.0
    assert cmp_.delta_sigma2 == 0.0


def test_compare_transforms_sample_count_mismatch():
    rng = np.random.default_rng(4)
    a = metrics.coeff_stats(rng.normal(size=(100, 64)))
    b = metrics.coeff_stats(rng.normal(size=(101, 64)))
    with pytest.raises(InvalidInputError):
        metrics.compare_transforms(a, b, metrics.RDModelParams.from_qp(22))


def test_residual_sample_variance():
    blocks = np.stack([np.zeros((8, 8)), np.ones((8, 8))])
    v = metrics.residual_sample_variance(blocks)
    assert v == pytest.approx(0.25)
