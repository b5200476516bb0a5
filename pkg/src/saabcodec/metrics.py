"""Transform-quality analytics and the closed-form RD proxy.

Conventions pinned here:
  * QP -> quantization step: Q = 2**((QP-4)/6); lambda = 0.57 * 2**((QP-12)/3).
  * Rate is measured in bits, so logs are base 2.
  * Energy compaction normalizes by 64 * (per-sample variance of the input
    residual set), so the curve ends near 1 for mean-free data, and ranks
    coefficient positions per transform by average energy, descending.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError, InvalidInputError
from .linalg import VEC_LEN

SQRT2_E = math.sqrt(2.0) * math.e


def qp_to_qstep(qp):
    return 2.0 ** ((qp - 4) / 6.0)


def qp_to_lambda(qp):
    return 0.57 * 2.0 ** ((qp - 12) / 3.0)


@dataclass(frozen=True)
class RDModelParams:
    qp: int
    q_step: float
    lam: float

    @classmethod
    def from_qp(cls, qp):
        return cls(qp=qp, q_step=qp_to_qstep(qp), lam=qp_to_lambda(qp))


def _as_coeff_matrix(coeff_sets, width=VEC_LEN):
    y = np.asarray(coeff_sets, dtype=np.float64)
    if y.ndim != 2 or (width is not None and y.shape[1] != width):
        raise InvalidInputError(f"expected (n, {width}) coefficient array, got {y.shape}")
    return y


@dataclass(frozen=True)
class CompactionCurve:
    """values[i-1] = cumulative transformed energy fraction using the i
    highest-energy coefficient positions."""

    values: np.ndarray
    sample_count: int
    position_order: np.ndarray


def residual_sample_variance(blocks):
    """Population variance of all residual samples in the set (scalar)."""
    x = np.asarray(blocks, dtype=np.float64).reshape(-1)
    return float(x.var())


def energy_compaction(coeff_sets, input_variance):
    y = _as_coeff_matrix(coeff_sets)
    if y.shape[0] == 0:
        raise InsufficientDataError("empty coefficient set")
    if input_variance <= 0:
        raise DegenerateInputError("input variance must be positive")
    mean_energy = np.mean(y * y, axis=0)
    order = np.argsort(-mean_energy, kind="stable")
    curve = np.cumsum(mean_energy[order]) / (VEC_LEN * input_variance)
    return CompactionCurve(values=curve, sample_count=y.shape[0], position_order=order)


def decorrelation_cost(coeff_sets):
    """Sum of |E[y_i * y_j]| over i != j, with the means taken as zero."""
    y = _as_coeff_matrix(coeff_sets, width=None)
    if y.shape[0] < 2:
        raise InsufficientDataError("need at least 2 coefficient blocks")
    m = y.T @ y / y.shape[0]
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


@dataclass(frozen=True)
class CoeffStats:
    mean: np.ndarray
    variance: np.ndarray
    cov: np.ndarray
    sample_count: int


def coeff_stats(coeff_sets):
    y = _as_coeff_matrix(coeff_sets)
    if y.shape[0] < 2:
        raise InsufficientDataError("need at least 2 coefficient blocks")
    mean = y.mean(axis=0)
    centered = y - mean
    cov = centered.T @ centered / y.shape[0]
    cov = 0.5 * (cov + cov.T)
    return CoeffStats(mean=mean, variance=np.diag(cov).copy(), cov=cov, sample_count=y.shape[0])


@dataclass(frozen=True)
class DistributionFit:
    laplace_mu: float
    laplace_b: float
    gauss_mu: float
    gauss_sigma: float
    laplace_nll: float
    gauss_nll: float
    better: str


def fit_coefficient_distribution(values):
    """Maximum-likelihood Laplacian and Gaussian fits; `better` has the lower
    negative log-likelihood."""
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    n = x.size
    if n < 30:
        raise InsufficientDataError(f"need at least 30 samples, got {n}")
    if np.all(x == x[0]):
        raise DegenerateInputError("all samples identical: point mass")
    lap_mu = float(np.median(x))
    lap_b = float(np.mean(np.abs(x - lap_mu)))
    g_mu = float(np.mean(x))
    g_sigma = float(np.std(x))
    lap_nll = n * (math.log(2.0 * lap_b) + 1.0)
    gauss_nll = n * (math.log(g_sigma * math.sqrt(2.0 * math.pi)) + 0.5)
    return DistributionFit(
        laplace_mu=lap_mu,
        laplace_b=lap_b,
        gauss_mu=g_mu,
        gauss_sigma=g_sigma,
        laplace_nll=lap_nll,
        gauss_nll=gauss_nll,
        better="laplace" if lap_nll <= gauss_nll else "gauss",
    )


def kappa(sigma_y, params):
    """Closed-form RD cost of a Laplacian coefficient under uniform quantization.

    Distortion term sigma^2 Q^2 / (12 sigma^2 + Q^2) always; the rate term
    lambda * log2(sqrt(2) e sigma / Q) joins when sigma exceeds Q/(sqrt(2) e).
    """
    if sigma_y < 0:
        raise InvalidInputError("sigma must be non-negative")
    if sigma_y == 0.0:
        return 0.0
    q = params.q_step
    s2 = sigma_y * sigma_y
    d = s2 * q * q / (12.0 * s2 + q * q)
    if sigma_y > q / SQRT2_E:
        return d + params.lam * math.log2(SQRT2_E * sigma_y / q)
    return d


@dataclass(frozen=True)
class TransformComparison:
    delta_kappa: float
    delta_sigma2: float
    kappa_saab: float
    kappa_dct: float
    per_position_kappa_saab: np.ndarray
    per_position_kappa_dct: np.ndarray
    per_position_delta_sigma2: np.ndarray


def compare_transforms(stats_saab, stats_dct, params):
    """Aggregate kappa and variance differences; negative values favor Saab.

    Aggregates are arithmetic means over the 64 coefficient positions.
    """
    if stats_saab.sample_count != stats_dct.sample_count:
        raise InvalidInputError("mismatched sample counts between transform stats")
    k_saab = np.array([kappa(math.sqrt(v), params) for v in stats_saab.variance])
    k_dct = np.array([kappa(math.sqrt(v), params) for v in stats_dct.variance])
    d_sigma2 = stats_saab.variance - stats_dct.variance
    return TransformComparison(
        delta_kappa=float(k_saab.mean() - k_dct.mean()),
        delta_sigma2=float(d_sigma2.mean()),
        kappa_saab=float(k_saab.mean()),
        kappa_dct=float(k_dct.mean()),
        per_position_kappa_saab=k_saab,
        per_position_kappa_dct=k_dct,
        per_position_delta_sigma2=d_sigma2,
    )
