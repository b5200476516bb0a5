import numpy as np
import pytest

from saabcodec import transforms as tf
from saabcodec.errors import InsufficientDataError


@pytest.fixture(scope="module")
def training_data():
    rng = np.random.default_rng(5)
    return rng.laplace(0, 8, size=(2000, 64))


@pytest.fixture(scope="module")
def saab1(training_data):
    return tf.learn_saab1(training_data)


def test_dct_matrix_orthonormal():
    for n in (2, 4, 8):
        d = tf.dct_matrix(n)
        assert np.max(np.abs(d @ d.T - np.eye(n))) < 1e-12


def test_dct64_is_separable_kron():
    d8 = tf.dct_matrix(8)
    assert np.allclose(tf.DCT_64, np.kron(d8, d8))


def test_dct_roundtrip():
    rng = np.random.default_rng(6)
    x = rng.normal(size=64)
    assert np.max(np.abs(tf.dct_inverse(tf.dct_forward(x)) - x)) < 1e-12


def test_saab_dc_kernel_and_bias(saab1, training_data):
    assert np.allclose(saab1.matrix[0], np.full(64, 1.0 / 8.0))
    assert saab1.bias[0] == 0.0
    expected = np.max(np.linalg.norm(training_data, axis=1))
    assert np.allclose(saab1.bias[1:], expected)


def test_saab_orthonormal_and_roundtrip(saab1):
    assert saab1.orthonormality_error() < 1e-10
    rng = np.random.default_rng(7)
    x = rng.normal(size=64)
    for mode in ("centered", "raw"):
        y = tf.saab_forward(saab1, x, bias_mode=mode)
        assert np.max(np.abs(tf.saab_inverse(saab1, y, bias_mode=mode) - x)) < 1e-10


def test_bias_modes_differ_by_bias(saab1):
    x = np.arange(64, dtype=np.float64)
    yc = tf.saab_forward(saab1, x, bias_mode="centered")
    yr = tf.saab_forward(saab1, x, bias_mode="raw")
    assert np.allclose(yr - yc, saab1.bias)


def test_learning_is_deterministic(training_data):
    k1 = tf.learn_saab1(training_data.copy())
    k2 = tf.learn_saab1(training_data.copy())
    assert np.array_equal(k1.matrix, k2.matrix)
    assert np.array_equal(k1.bias, k2.bias)


def test_degenerate_training_data_still_orthonormal():
    # constant blocks: the DC-removed covariance is exactly zero
    d = np.full((100, 64), 3.0)
    k = tf.learn_saab1(d)
    assert k.orthonormality_error() < 1e-10
    assert np.max(np.abs(k.matrix[1:] @ np.ones(64))) < 1e-10


def test_insufficient_samples():
    with pytest.raises(InsufficientDataError):
        tf.learn_saab1(np.zeros((10, 64)))


def test_klt_zero_bias_and_roundtrip(training_data):
    k = tf.learn_klt(training_data)
    assert np.all(k.bias == 0)
    assert k.orthonormality_error() < 1e-10
    x = training_data[0]
    assert np.max(np.abs(tf.saab_inverse(k, tf.saab_forward(k, x)) - x)) < 1e-10


def test_round_kernel(saab1):
    r = tf.round_kernel(saab1, 2)
    assert np.array_equal(r.matrix, np.round(saab1.matrix, 2))
    assert r.decimal_digits == 2
    # coarse rounding breaks exact orthonormality; fine rounding keeps it tiny
    assert tf.round_kernel(saab1, 12).orthonormality_error() < 1e-10


def test_saab2_structure_and_roundtrip(training_data):
    k2 = tf.learn_saab2(training_data)
    assert k2.stage1_matrix.shape == (16, 16)
    assert k2.stage2_matrices.shape == (16, 4, 4)
    assert k2.orthonormality_error() < 1e-10
    x = training_data[1]
    for mode in ("centered", "raw"):
        y = tf.saab2_forward(k2, x, bias_mode=mode)
        assert y.shape == (64,)
        assert np.max(np.abs(tf.saab2_inverse(k2, y, bias_mode=mode) - x)) < 1e-10


def test_saab2_is_energy_preserving(training_data):
    # both stages are orthonormal, so the composition preserves norms
    k2 = tf.learn_saab2(training_data)
    x = training_data[2]
    y = tf.saab2_forward(k2, x, bias_mode="centered")
    assert abs(np.linalg.norm(y) - np.linalg.norm(x)) < 1e-9
