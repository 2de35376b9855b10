"""Gauss-Legendre rules on [-1, 1] with cached nodes and a spectral
cumulative-integration matrix."""
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as L

ORDER = 32


@lru_cache(maxsize=None)
def gauss_legendre(n=ORDER):
    t, w = L.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def cumulative_matrix(n=ORDER):
    """Matrix S with (S @ f)[j] = integral of the interpolant of f from -1 to t_j."""
    t, _ = gauss_legendre(n)
    V = L.legvander(t, n - 1)
    # antiderivative of P_k vanishing at -1
    A = np.zeros((n, n))
    for k in range(n):
        c = np.zeros(n)
        c[k] = 1.0
        ci = L.legint(c, lbnd=-1)
        A[:, k] = L.legval(t, ci)
    S = A @ np.linalg.inv(V)
    S.setflags(write=False)
    return S


@lru_cache(maxsize=None)
def embedded_weights(n=ORDER):
    """Weights of the n/2-point rule re-expressed on the n-point nodes.

    Obtained by integrating the degree n/2-1 least-squares fit; used only as a
    cheap error estimate for the n-point rule.
    """
    t, w = gauss_legendre(n)
    m = n // 2
    V = L.legvander(t, m - 1)
    # integral of a Legendre series is 2 * c0
    proj = np.linalg.pinv(V)
    out = 2.0 * proj[0]
    out.setflags(write=False)
    return out


def segment_rule(z0, z1, n=ORDER):
    """Nodes and complex weights (dz) for the straight segment z0 -> z1."""
    t, w = gauss_legendre(n)
    half = 0.5 * (z1 - z0)
    return 0.5 * (z0 + z1) + half * t, half * w
