import numpy as np

from spectralkahler.quadrature import cumulative_matrix, embedded_weights, gauss_legendre, segment_rule


def test_gauss_legendre_is_exact_for_polynomials():
    t, w = gauss_legendre(16)
    for k in range(32):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(np.dot(w, t ** k) - exact) < 1e-14


def test_cumulative_matrix_integrates_exponential():
    t, _ = gauss_legendre(32)
    S = cumulative_matrix(32)
    assert np.max(np.abs(S @ np.exp(t) - (np.exp(t) - np.exp(-1)))) < 1e-13


def test_embedded_weights_are_lower_order_rule():
    t, _ = gauss_legendre(32)
    e = embedded_weights(32)
    assert abs(np.dot(e, t ** 4) - 0.4) < 1e-12
    assert abs(np.sum(e) - 2) < 1e-13


def test_segment_rule_complex():
    z, w = segment_rule(0.0, 1 + 1j, 20)
    assert abs(np.sum(w * z ** 2) - (1 + 1j) ** 3 / 3) < 1e-14
