"""Riemann theta functions with half-integer characteristics.

theta[a, b](u | tau) = sum_n exp(pi i (n+a)^T tau (n+a) + 2 pi i (n+a)^T (u+b)).

Arguments are reduced modulo the period lattice before summation (second
log-derivatives are lattice invariant), and the summation runs over the
lattice points of an ellipsoid chosen so the neglected tail is below the
requested bound for every reduced argument.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DegenerateCharacteristicError, ThetaTruncationError

TAIL = 1e-14
MAX_POINTS = 2_000_000


def _ellipsoid_points(Y, center_shift, radius):
    """Integer n with (n + s)^T Y (n + s) <= radius^2 for the given shift s.

    Recursive enumeration on the Cholesky factor (Fincke-Pohst); only the
    points actually inside the ellipsoid are produced.
    """
    g = Y.shape[0]
    L = np.linalg.cholesky(Y)  # Y = L L^T
    # (n+s)^T Y (n+s) = |L^T (n+s)|^2, L^T upper triangular
    R = L.T
    out = []

    def rec(i, partial, rest):
        # choose n_i for i = g-1 .. 0 given n_{i+1..}
        if i < 0:
            out.append(tuple(partial[::-1]))
            return
        # coordinate i of R (n+s) = R_ii (n_i+s_i) + sum_{j>i} R_ij (n_j+s_j)
        tail = sum(R[i, j] * (partial_map[j] + center_shift[j]) for j in range(i + 1, g))
        r_ii = R[i, i]
        lim = np.sqrt(max(rest, 0.0)) / r_ii
        c = -center_shift[i] - tail / r_ii
        for n in range(int(np.ceil(c - lim)), int(np.floor(c + lim)) + 1):
            v = r_ii * (n + center_shift[i]) + tail
            partial_map[i] = n
            rec(i - 1, partial + [n], rest - v * v)
            if len(out) > MAX_POINTS:
                raise ThetaTruncationError("theta summation set too large (Im tau nearly degenerate)")

    partial_map = [0] * g
    rec(g - 1, [], radius ** 2)
    return np.array(out, dtype=float).reshape(-1, g)


@dataclass
class ThetaContext:
    tau: np.ndarray
    char: tuple = None  # (a, b), each a 0/1 tuple meaning halves
    tail: float = TAIL
    sign: int = 1
    radius: float = 0.0
    _points: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=complex)
        g = self.tau.shape[0]
        Y = self.tau.imag
        Y = 0.5 * (Y + Y.T)
        ev = np.linalg.eigvalsh(Y)
        if ev[0] <= 0:
            raise ThetaTruncationError("Im tau is not positive definite")
        # shifts c in [-1/2, 1/2]^g contribute at most this in the Y-norm
        cmax = 0.5 * np.sqrt(g * ev[-1])
        # tail ~ exp(-pi R^2) times a polynomial count factor
        r2 = (np.log(1.0 / self.tail) + 2.0 * g + 5.0) / np.pi
        self.radius = float(np.sqrt(r2) + 2.0 * cmax)
        self._Y = Y
        self._points = _ellipsoid_points(Y, np.zeros(g), self.radius)
        if self.char is None:
            self.char = self.select_odd()

    @property
    def genus(self):
        return self.tau.shape[0]

    @property
    def tail_bound(self):
        r = self.radius - np.sqrt(self.genus * np.linalg.eigvalsh(self._Y)[-1])
        return float(np.exp(-np.pi * r * r))

    # -- characteristic handling ---------------------------------------------
    def characteristics(self):
        g = self.genus
        for bits in product((0, 1), repeat=2 * g):
            yield tuple(bits[:g]), tuple(bits[g:])

    @staticmethod
    def is_odd(char):
        a, b = char
        return sum(x * y for x, y in zip(a, b)) % 2 == 1

    def select_odd(self, threshold=1e-6):
        for ch in self.characteristics():
            if not self.is_odd(ch):
                continue
            grad = self.derivatives(np.zeros((1, self.genus)), ch, order=1)[1][0]
            if np.linalg.norm(grad) > threshold:
                return ch
        raise DegenerateCharacteristicError("no odd characteristic with non-vanishing gradient at 0")

    # -- evaluation ---------------------------------------------------------
    def reduce(self, u):
        """u -> u - m - tau n with the imaginary part in the central cell."""
        u = np.atleast_2d(np.asarray(u, dtype=complex))
        n = np.round(np.linalg.solve(self._Y, u.imag.T)).T
        u = u - n @ self.tau.T
        m = np.round(u.real)
        return u - m

    def derivatives(self, u, char=None, order=2):
        """theta, gradient, Hessian at the rows of ``u`` (already reduced)."""
        a, b = (np.array(c, dtype=float) / 2 for c in (char or self.char))
        u = np.atleast_2d(np.asarray(u, dtype=complex))
        N = self._points + a  # (K, g)
        quad = np.einsum("ki,ij,kj->k", N, self.tau, N)
        lin = (u + b) @ N.T  # (npts, K)
        expo = np.pi * 1j * quad[None, :] + 2j * np.pi * lin
        # stabilise: subtract the largest real part per row
        shift = np.max(expo.real, axis=1, keepdims=True)
        e = np.exp(expo - shift)
        th = e.sum(axis=1)
        out = [th]
        if order >= 1:
            out.append(2j * np.pi * e @ N)
        if order >= 2:
            out.append((2j * np.pi) ** 2 * np.einsum("pk,ki,kj->pij", e, N, N))
        scale = np.exp(shift[:, 0])
        return [o * scale.reshape((-1,) + (1,) * (o.ndim - 1)) for o in out]

    def log_hessian(self, u):
        """Second derivatives of log theta[char] at ``u`` (reduced internally)."""
        u = self.reduce(u)
        th, gr, he = self.derivatives(u)
        return he / th[:, None, None] - np.einsum("pi,pj->pij", gr, gr) / (th ** 2)[:, None, None]


def riemann_theta(u, tau, char=((0,), (0,))):
    """Convenience scalar evaluation (used by tests and small checks)."""
    tau = np.atleast_2d(tau)
    g = tau.shape[0]
    ctx = ThetaContext(tau, char=(tuple(char[0])[:g], tuple(char[1])[:g]))
    return ctx.derivatives(np.atleast_2d(u), order=0)[0]
