"""Bergman kernel of a spectral curve and its local jet data.

Two independent constructions:

* :class:`KleinKernel` (hyperelliptic only): the algebraic bidifferential
  (2 y1 y2 + F(x1, x2)) / (4 y1 y2 (x1 - x2)^2) dx1 dx2 with Klein's
  polynomial F, corrected by a symmetric holomorphic term so that all
  a-periods vanish.
* :class:`ThetaKernel`: -d1 d2 log theta[delta](A(p1) - A(p2)) with an odd
  non-singular characteristic delta.

Kernels return the dx1 dx2 coefficient.  :func:`bergman_jets` extracts the
local data at the ramification points by two-dimensional Cauchy integrals
on tori in the local coordinates q_a.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import HyperellipticCurve, LocalFrame
from .errors import CorrectionRankError, ExtrapolationError
from .periods import abel_map, integrate_track
from .quadrature import gauss_legendre
from .series import Series
from .theta import ThetaContext

FFT_N = 64
JET_RADIUS = 0.6
CROSS_RADIUS = 0.45


def klein_polynomial(Q, x, z):
    """Klein's symmetric polynomial F with F(x, x) = 2Q(x) and
    dF/dz(x, x) = Q'(x), holomorphic at infinity after division."""
    lam = np.asarray(Q, dtype=complex)
    G = (len(lam) - 1) // 2  # = g + 1
    lam = np.concatenate([lam, np.zeros(2 * G + 2 - len(lam))])
    out = 0
    xz = 1
    for k in range(G + 1):
        out = out + xz * (2 * lam[2 * k] + lam[2 * k + 1] * (x + z))
        xz = xz * x * z
    return out


def _raw_basis(model, x, fib):
    return np.stack([np.broadcast_to(np.asarray(v, dtype=complex), np.shape(x))
                     for v in model.holomorphic_basis(x, fib)]) if model.genus else np.zeros((0,) + np.shape(x))


class KleinKernel:
    """Normalised Bergman kernel of y^2 = Q(x) via Klein's bidifferential."""

    method = "klein"

    def __init__(self, model, pd, nsample=None):
        if not isinstance(model, HyperellipticCurve):
            raise TypeError("the Klein construction needs a hyperelliptic model")
        self.model, self.pd = model, pd
        g = model.genus
        self.kappa = np.zeros((g, g), dtype=complex)
        self.kappa_asymmetry = 0.0
        self.lsq_residual = 0.0
        if g:
            self._solve_correction(nsample or 3 * g + 3)

    def base(self, x1, f1, x2, f2):
        y1, y2 = f1[0], f2[0]
        F = klein_polynomial(self.model.Q, x1, x2)
        return (2 * y1 * y2 + F) / (4 * y1 * y2 * (x1 - x2) ** 2)

    def _sample_points(self, n):
        bp = np.asarray(self.model.branch_points)
        R = 2.0 * float(np.max(np.abs(bp))) + 1.0
        xs = R * np.exp(2j * np.pi * (np.arange(n) + 0.37) / n)
        fib = self.model.fiber_candidates(xs)[0]
        return xs, fib

    def _solve_correction(self, n):
        model, pd = self.model, self.pd
        xs, fib = self._sample_points(n)
        I = np.zeros((model.genus, n), dtype=complex)
        for s in range(n):
            x2, f2 = xs[s], fib[:, s]

            def dif(x, f):
                return self.base(x, f, x2, f2)

            a, _ = pd.cycle_integrals(dif, singularities=[x2])
            I[:, s] = a
        U = _raw_basis(model, xs, fib)  # (g, n)
        if np.linalg.matrix_rank(U, tol=1e-10 * np.abs(U).max()) < model.genus:
            raise CorrectionRankError("sample points do not separate the holomorphic differentials")
        m = I @ np.linalg.pinv(U)
        self.lsq_residual = float(np.max(np.abs(m @ U - I)) / max(1.0, np.max(np.abs(I))))
        if self.lsq_residual > 1e-8:
            raise CorrectionRankError(f"a-periods of the algebraic kernel are not holomorphic (residual {self.lsq_residual:.3g})")
        kappa = -pd.C @ m
        self.kappa_asymmetry = float(np.max(np.abs(kappa - kappa.T)))
        self.kappa = 0.5 * (kappa + kappa.T)

    def __call__(self, x1, f1, x2, f2):
        x1, x2 = np.asarray(x1, dtype=complex), np.asarray(x2, dtype=complex)
        f1, f2 = np.asarray(f1, dtype=complex), np.asarray(f2, dtype=complex)
        out = self.base(x1, f1, x2, f2)
        if self.model.genus:
            u1 = _raw_basis(self.model, x1, f1)
            u2 = _raw_basis(self.model, x2, f2)
            out = out + np.einsum("i...,ij,j...->...", u1, self.kappa, u2)
        return out


class ThetaKernel:
    """Bergman kernel from the prime form built on an odd theta characteristic."""

    method = "theta"

    def __init__(self, model, pd, base_point=None, char=None):
        self.model, self.pd = model, pd
        self.ctx = ThetaContext(pd.tau, char=char)
        if base_point is None:
            bp = np.asarray(model.branch_points)
            x0 = complex(np.mean(bp)) + 0.31 + 0.23j
            d = np.min(np.abs(bp - x0))
            r = 0.5 * np.min(np.abs(bp[:, None] - bp[None, :]) + np.eye(len(bp)) * 1e300)
            if d < r:
                x0 = x0 + r * (0.6 + 0.8j)
            base_point = (x0, model.fiber_candidates(x0)[0])
        self.base_point = base_point
        self.sign = 1
        self.sign = self._fix_sign()

    def abel(self, x, fib):
        return abel_map(self.model, (complex(x), np.asarray(fib)), self.base_point, self.pd)

    def from_abel(self, A1, A2, x1, f1, x2, f2):
        """B from precomputed Abel images; A1 (..., g), x1 (...)"""
        A1, A2 = np.asarray(A1), np.asarray(A2)
        shp = np.broadcast_shapes(A1.shape[:-1], A2.shape[:-1])
        u = (A1 - A2).reshape(-1, self.pd.genus) if A1.shape[:-1] == shp and A2.shape[:-1] == shp else \
            (np.broadcast_to(A1, shp + A1.shape[-1:]) - np.broadcast_to(A2, shp + A2.shape[-1:])).reshape(-1, self.pd.genus)
        K = len(self.ctx._points)
        chunk = max(1, int(4e6 // max(K, 1)))
        H = np.concatenate([self.ctx.log_hessian(u[i:i + chunk]) for i in range(0, len(u), chunk)])
        H = H.reshape(shp + H.shape[-2:])
        w1 = np.moveaxis(np.broadcast_to(self.pd.omega(np.asarray(x1), np.asarray(f1)), (self.pd.genus,) + np.shape(x1)), 0, -1)
        w2 = np.moveaxis(np.broadcast_to(self.pd.omega(np.asarray(x2), np.asarray(f2)), (self.pd.genus,) + np.shape(x2)), 0, -1)
        return -self.sign * np.einsum("...ij,...i,...j->...", H, w1, w2)

    def _fix_sign(self):
        x0, f0 = self.base_point
        d = 1e-3 * (1 + 0.5j)
        x1 = x0 + d
        f1 = self.model.nearest_fiber(x1, f0)
        A0 = np.zeros(self.pd.genus, dtype=complex)
        A1 = self.abel(x1, f1)
        b = self.from_abel(A1, A0, x1, f1, x0, f0)
        lead = b * d ** 2
        return 1 if lead.real > 0 else -1

    def __call__(self, x1, f1, x2, f2):
        shape = np.broadcast_shapes(np.shape(x1), np.shape(x2))
        x1 = np.atleast_1d(np.asarray(x1, dtype=complex)).ravel()
        x2 = np.atleast_1d(np.asarray(x2, dtype=complex)).ravel()
        f1 = np.asarray(f1, dtype=complex).reshape(self.model.ncomp, -1)
        f2 = np.asarray(f2, dtype=complex).reshape(self.model.ncomp, -1)
        A1 = np.array([self.abel(x, f1[:, k]) for k, x in enumerate(x1)])
        A2 = np.array([self.abel(x, f2[:, k]) for k, x in enumerate(x2)])
        out = self.from_abel(A1, A2, x1, f1, x2, f2)
        return out.reshape(shape) if shape else out.reshape(())[()]

    def local_abel(self, frame, qs, anchor=None):
        """Abel images of points with local coordinates ``qs`` near a ramification point."""
        qs = np.asarray(qs, dtype=complex)
        if anchor is None:
            anchor = self.ramification_abel(frame)
        return anchor + _radial_integral(self.model, self.pd, frame, qs)

    def ramification_abel(self, frame):
        q0 = 0.5 * frame.radius
        x0, f0 = frame.fiber_at(self.model, np.array([q0]))
        A_side = self.abel(x0[0], f0[:, 0])
        return A_side - _radial_integral(self.model, self.pd, frame, np.array([q0]))[0]


def _radial_integral(model, pd, frame, qs, n=32):
    """Integral of the normalised differentials from q=0 to each q along rays."""
    t, w = gauss_legendre(n)
    s = qs[:, None] * (1 + t[None, :]) / 2
    x, fib = frame.fiber_at(model, s.ravel())
    om = pd.omega(x, fib).reshape((pd.genus,) + s.shape) * (2 * s)
    return np.einsum("gkn,n->kg", om, w) * (qs[:, None] / 2)


def make_kernel(model, pd, method="auto"):
    if method == "auto":
        method = "klein" if isinstance(model, HyperellipticCurve) else "theta"
    if method == "klein":
        return KleinKernel(model, pd)
    if method == "theta":
        return ThetaKernel(model, pd)
    raise ValueError(f"unknown kernel method {method!r}")


def bergman_eval(model, pd, p1, p2, kernel=None, method="auto"):
    """B(p1, p2) as the coefficient of dx1 dx2; points are (x, fiber) pairs."""
    kernel = kernel or make_kernel(model, pd, method)
    (x1, f1), (x2, f2) = p1, p2
    return kernel(complex(x1), np.asarray(f1), complex(x2), np.asarray(f2))


def bergman_hyperelliptic_fast(model, pd, p1, p2, kernel=None):
    return bergman_eval(model, pd, p1, p2, kernel or KleinKernel(model, pd))


# ---------------------------------------------------------------------------
# jets


def _series_coeffs(s, n):
    return s.coefficients(0, n)


@dataclass
class BergmanJets:
    """Local data at the ramification points (all in the frames' q-coordinates).

    ``T[a, b, m, l]``: coefficient of q_a^m q_b^l in B(q_a, q_b)/(dq_a dq_b),
    with 1/(q1 - q2)^2 removed when a == b.  ``omega[a, i, k]``: coefficient
    of q^k in omega_i/dq.  ``y[a, k]``: coefficient of q^k in y.
    """

    frames: list
    T: np.ndarray
    omega: np.ndarray
    y: np.ndarray
    order: int
    method: str = ""
    residual: float = 0.0
    raw_omega: np.ndarray = field(default=None, repr=False)

    @property
    def nram(self):
        return len(self.frames)

    @property
    def S_B(self):
        return 6 * np.array([self.T[a, a, 0, 0] for a in range(self.nram)])

    def cross(self, a, b):
        return self.T[a, b, 0, 0]

    @property
    def dy(self):
        """(y'(a), y''(a), y'''(a)) per ramification point."""
        return self.y[:, 1], 2 * self.y[:, 2], 6 * self.y[:, 3]

    def symmetry_defect(self):
        return float(np.max(np.abs(self.T - np.transpose(self.T, (1, 0, 3, 2)))))

    def flipped(self, a):
        """Jets after the branch change q -> -q at ramification point ``a``."""
        M = self.order
        sg = (-1.0) ** np.arange(M)
        T = self.T.copy()
        # dq_a changes sign as well as q_a
        T[a, :, :, :] *= -sg[:, None]
        T[:, a, :, :] *= -sg[None, :]
        om = self.omega.copy()
        om[a] *= -sg
        y = self.y.copy()
        y[a] *= (-1.0) ** np.arange(y.shape[1])
        frames = list(self.frames)
        frames[a] = frames[a].flipped()
        return BergmanJets(frames, T, om, y, self.order, self.method, self.residual)

    def reparametrized(self, a, f_coeffs, radius=0.05, n=32):
        """Jets in the coordinate q^ = f(q) at ``a`` (f odd: f''(0) = 0).

        Generic transformation of the series data: y^ = theta/dx^ with
        x^ = q^^2, omega^ = omega dq/dq^, and B re-expanded by a Cauchy FFT
        of the transformed two-point function.
        """
        M = self.order
        L = max(M + 4, self.y.shape[1])
        f = Series(np.concatenate([f_coeffs, np.zeros(max(0, L - len(f_coeffs)))])[:L])
        gs = f.revert()  # q as a series in q^
        dg = gs.deriv()
        qhat = Series.var(L)
        # y^(q^) = y(g) * 2 g g' / (2 q^)
        ys = Series(self.y[a][:L]).compose(gs)
        yhat = (ys * gs * dg / qhat).coefficients(0, M)
        om = np.array([(Series(self.omega[a, i]).compose(gs) * dg).coefficients(0, M)
                       for i in range(self.omega.shape[1])])
        T = self.T.copy()
        zeta = np.exp(2j * np.pi * np.arange(n) / n)
        qh = radius * zeta
        g_val, dg_val = gs(qh), dg(qh)
        pw = np.arange(M)
        for b in range(self.nram):
            if b == a:
                continue
            # T^(q^_a, q_b) = T(g(q^_a), q_b) g'(q^_a): a one-variable substitution
            vals = (g_val[:, None] ** pw[None, :]) @ T[a, b] * dg_val[:, None]
            c = np.fft.fft(vals, axis=0)[:M] / n / (radius ** pw)[:, None]
            T[a, b] = c
            T[b, a] = c.T
        r2 = 0.5 * radius
        q1, q2 = qh[:, None], (r2 * zeta)[None, :]
        g1, g2 = gs(q1), gs(q2)
        d1, d2 = dg(q1), dg(q2)
        P = (g1[..., None] ** pw)  # (n, 1, M)
        Qp = (g2[..., None] ** pw)  # (1, n, M)
        reg = np.einsum("ijm,ml,ijl->ij", np.broadcast_to(P, (n, n, M)), self.T[a, a], np.broadcast_to(Qp, (n, n, M)))
        F = (reg + 1 / (g1 - g2) ** 2) * d1 * d2 - 1 / (q1 - q2) ** 2
        c = np.fft.fft2(F)[:M, :M] / n ** 2 / np.outer(radius ** pw, r2 ** pw)
        T[a, a] = 0.5 * (c + c.T)
        omega = self.omega.copy()
        omega[a] = om
        y = np.zeros_like(self.y)
        y[:, :] = self.y
        y[a, :M] = yhat
        y[a, M:] = 0
        return BergmanJets(self.frames, T, omega, y, self.order, self.method + "+reparam", self.residual)

    def to_json(self):
        def cm(v):
            v = np.asarray(v)
            return np.stack([v.real, v.imag], axis=-1).tolist()
        return {
            "order": self.order,
            "method": self.method,
            "ramification_x": cm([f.point.x for f in self.frames]),
            "S_B": cm(self.S_B),
            "cross": cm(self.T[:, :, 0, 0]),
            "y_jets": cm(self.y[:, :4]),
            "omega_jets": cm(self.omega[:, :, :4]),
        }


def _kernel_grid(kernel, model, pd, fa, fb, qa, qb, same):
    """B(q_a, q_b)/(dq_a dq_b) on the outer grid qa x qb."""
    xa, fiba = fa.fiber_at(model, qa)
    xb, fibb = fb.fiber_at(model, qb)
    if isinstance(kernel, ThetaKernel):
        Aa = kernel.local_abel(fa, qa)
        Ab = Aa if same and np.array_equal(qa, qb) else kernel.local_abel(fb, qb)
        B = kernel.from_abel(Aa[:, None, :], Ab[None, :, :], xa[:, None], fiba[:, :, None], xb[None, :], fibb[:, None, :])
    else:
        B = kernel(xa[:, None], fiba[:, :, None], xb[None, :], fibb[:, None, :])
    return B * (2 * qa)[:, None] * (2 * qb)[None, :]


def bergman_jets(model, pd, kernel=None, order=None, frames=None, n=FFT_N, method="auto"):
    """Two-point Taylor tensors, omega-jets and y-jets at every ramification point."""
    from .curves import JET_ORDER
    M = order or JET_ORDER
    kernel = kernel or make_kernel(model, pd, method)
    frames = frames or model.local_frames(max(M, 4))
    nr = len(frames)
    g = model.genus
    T = np.zeros((nr, nr, M, M), dtype=complex)
    zeta = np.exp(2j * np.pi * np.arange(n) / n)
    pw = np.arange(M)
    rho = [JET_RADIUS * f.radius for f in frames]
    for a in range(nr):
        for b in range(a, nr):
            if a == b:
                ra, rb = rho[a], 0.5 * rho[a]
            else:
                # the two charts meet once |q_a|^2 + |q_b|^2 reaches |x_a - x_b|,
                # so the bidisc must be smaller than the single-chart disc
                ra, rb = CROSS_RADIUS * frames[a].radius, CROSS_RADIUS * frames[b].radius
            qa, qb = ra * zeta, rb * zeta
            F = _kernel_grid(kernel, model, pd, frames[a], frames[b], qa, qb, a == b)
            if a == b:
                F = F - 1 / (qa[:, None] - qb[None, :]) ** 2
            c = np.fft.fft2(F)[:M, :M] / n ** 2 / np.outer(ra ** pw, rb ** pw)
            if a == b:
                c = 0.5 * (c + c.T)
            T[a, b] = c
            T[b, a] = c.T
    raw = np.array([[_series_coeffs(bs, M) for bs in f.basis] for f in frames]).reshape(nr, g, M)
    omega = np.einsum("ki,akm->aim", pd.C, raw) if g else raw
    y = np.array([f.y.coefficients(0, max(M, 8)) for f in frames])
    jets = BergmanJets(frames, T, omega, y, M, getattr(kernel, "method", ""), raw_omega=raw)
    jets.residual = _jet_residual(jets, kernel, model, pd)
    return jets


def _jet_residual(jets, kernel, model, pd):
    """Reconstruct B from the tensors at interior points and compare."""
    worst = 0.0
    nr = jets.nram
    pw = np.arange(jets.order)
    for a in range(nr):
        b = (a + 1) % nr
        fa, fb = jets.frames[a], jets.frames[b]
        qa = np.array([0.06 * fa.radius * np.exp(0.7j)])
        qb = np.array([0.05 * fb.radius * np.exp(-1.1j)])
        if a == b:
            continue
        direct = _kernel_grid(kernel, model, pd, fa, fb, qa, qb, False)[0, 0]
        approx = (qa[0] ** pw) @ jets.T[a, b] @ (qb[0] ** pw)
        worst = max(worst, abs(direct - approx) / max(1.0, abs(direct)))
    return float(worst)


def projective_connection_richardson(kernel, model, pd, frame, h=None, levels=4, tol=1e-6):
    """S_B(a) from the regularised diagonal limit on the stencil h, h/2, h/4.

    With q1 = s h, q2 = i s h the average over s = +-1 of
    B(q1, q2) - 1/(q1 - q2)^2 is S_B/6 + c2 h^2 + c4 h^4 + ... (odd powers
    cancel), and Richardson extrapolation removes the even powers.  The
    points have distinct x so the algebraic kernel is evaluated off its
    removable singularity.  The default step is a fifth of the chart
    radius: the algebraic kernel loses about h^-4 digits near the
    ramification point, so small steps are limited by round-off.
    """
    h = 0.2 * frame.radius if h is None else h
    hs = h / 2.0 ** np.arange(levels)
    vals = []
    for hh in hs:
        acc = 0
        for s in (1, -1):
            q1, q2 = np.array([s * hh + 0j]), np.array([1j * s * hh])
            F = _kernel_grid(kernel, model, pd, frame, frame, q1, q2, True)[0, 0]
            acc = acc + 0.5 * (F - 1 / (q1[0] - q2[0]) ** 2)
        vals.append(acc)
    tab = [np.array(vals)]
    for k in range(1, levels):
        prev = tab[-1]
        fac = 4.0 ** k
        tab.append((fac * prev[1:] - prev[:-1]) / (fac - 1))
    est = tab[-1][0]
    resid = abs(tab[-1][0] - tab[-2][-1])
    if resid > tol * max(1.0, abs(est)):
        raise ExtrapolationError(f"Richardson residual {resid:.3g} too large")
    return 6 * est, 6 * resid


def infinity_check(kernel, model, p2, radius=None, n=256):
    """Integral of B(., p2) around a large circle on each sheet (no pole at infinity => 0)."""
    bp = np.asarray(model.branch_points)
    R = radius or 3.0 * float(np.max(np.abs(bp))) + 2.0
    t = 2 * np.pi * np.arange(n) / n
    x = R * np.exp(1j * t)
    dx = 1j * x * (2 * np.pi / n)
    out = []
    for sheet in range(model.nsheets):
        f0 = model.fiber_candidates(x[0])[sheet]
        fib = np.empty((model.ncomp, n), dtype=complex)
        cur = f0
        for k in range(n):
            cur = model.nearest_fiber(x[k], cur)
            fib[:, k] = cur
        x2, f2 = p2
        vals = kernel(x, fib, np.full(n, x2), np.repeat(np.asarray(f2)[:, None], n, axis=1))
        out.append(complex(np.sum(vals * dx)))
    return np.array(out)


def cycle_identity_check(kernel, pd, p2):
    """a-periods of B(., p2) and the defect of the b-period identity 2 pi i omega(p2)."""
    x2, f2 = complex(p2[0]), np.asarray(p2[1])
    a, b = pd.cycle_integrals(lambda x, f: kernel(x, f, np.full(np.shape(x), x2),
                                                  np.broadcast_to(f2.reshape((-1,) + (1,) * np.ndim(x)), np.shape(f))),
                              singularities=[x2])
    om = pd.omega(np.asarray(x2), f2)
    return float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b - 2j * np.pi * om), initial=0.0))
