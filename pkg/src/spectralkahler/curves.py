"""Algebraic models of spectral curves, ramification data and local frames.

Two presentations are supported:

* ``HyperellipticCurve``: y^2 = Q(x), deg Q = 2g + 2, theta = y dx.
* ``TowerCurve``: a double cover v^2 = R(x) of the hyperelliptic base curve
  w^2 = f(x); theta = (-alpha(x)/2 + v) dx / w.  This is the spectral curve of
  a rank-2 Higgs field with characteristic coefficients (alpha, R - alpha^2/4)
  (up to the usual normalisation), and theta is holomorphic on it.

Points of a curve are given by their x-coordinate together with a *fiber*
vector: the values of the square roots ``sqrt(P_c(x))`` of each polynomial
in ``sqrt_polys``.  Every pointwise formula here also accepts
:class:`~spectralkahler.series.Series` arguments, which is how local jets are
produced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .errors import DegreeError, RootSeparationError, SeriesDivergenceError
from .series import Series, polynomial, taylor_shift

SEPARATION_FLOOR = 1e-6
JET_ORDER = 12
LOCAL_ORDER = 48


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    if not np.all(np.isfinite(c)):
        raise DegreeError("coefficients must be finite")
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        raise DegreeError("zero polynomial")
    return c[: nz[-1] + 1]


def _roots(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(c[::-1])
    # one Newton polish step per root
    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    for _ in range(3):
        r = r - p(r) / dp(r)
    return np.sort_complex(r)


def _check_separation(points, floor):
    pts = np.asarray(points)
    if len(pts) < 2:
        return
    scale = max(1.0, float(np.max(np.abs(pts))))
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    if d[i, j] < floor * scale:
        raise RootSeparationError(
            f"branch points {pts[i]:.6g} and {pts[j]:.6g} are closer than the "
            f"separation floor {floor:g} (singular spectral curve)"
        )


@dataclass(frozen=True)
class RamificationPoint:
    index: int
    x: complex
    fiber: tuple
    component: int  # which sqrt component vanishes here


@dataclass
class CurveReport:
    genus: int
    ramification_x: list
    basis_dimension: int
    branch_points: list


class CurveModel:
    """Common machinery; subclasses define the polynomials and 1-forms."""

    kind = "abstract"
    sqrt_polys: list
    genus: int

    # -- x-plane data -------------------------------------------------------
    @property
    def ncomp(self):
        return len(self.sqrt_polys)

    @property
    def nsheets(self):
        return 2 ** self.ncomp

    @cached_property
    def branch_points(self):
        return np.concatenate([_roots(p) for p in self.sqrt_polys])

    def fiber_candidates(self, x):
        """All fibers over ``x``: array (nsheets, ncomp, *x.shape)."""
        x = np.asarray(x, dtype=complex)
        roots = [np.sqrt(polynomial(p, x)) for p in self.sqrt_polys]
        out = []
        for signs in product((1, -1), repeat=self.ncomp):
            out.append(np.stack([s * r for s, r in zip(signs, roots)]))
        return np.stack(out)

    def nearest_fiber(self, x, guess):
        """Fiber over ``x`` closest to ``guess`` componentwise."""
        x = np.asarray(x, dtype=complex)
        guess = np.asarray(guess, dtype=complex)
        out = []
        for c, p in enumerate(self.sqrt_polys):
            r = np.sqrt(polynomial(p, x))
            out.append(np.where(np.abs(r - guess[c]) <= np.abs(r + guess[c]), r, -r))
        return np.stack(out)

    def sheet_gap(self, x):
        """Smallest distance between distinct values of any fiber component."""
        x = np.asarray(x, dtype=complex)
        return np.min(np.stack([2 * np.abs(np.sqrt(polynomial(p, x))) for p in self.sqrt_polys]), axis=0)

    def fiber_derivative(self, x, fib):
        """d(fiber)/dx along the sheet."""
        out = []
        for c, p in enumerate(self.sqrt_polys):
            dp = np.polynomial.polynomial.polyder(p)
            out.append(polynomial(dp, x) / (2 * fib[c]))
        return np.stack(out)

    # -- interface for subclasses --------------------------------------------
    def y(self, x, fib):
        raise NotImplementedError

    def theta(self, x, fib):
        """dx-coefficient of the canonical 1-form."""
        return self.y(x, fib)

    def holomorphic_basis(self, x, fib):
        raise NotImplementedError

    def deformation_basis(self, x, fib):
        raise NotImplementedError

    @property
    def ramification_points(self):
        raise NotImplementedError

    @property
    def theta_holomorphic(self):
        return False

    def report(self):
        return CurveReport(
            genus=self.genus,
            ramification_x=[complex(r.x) for r in self.ramification_points],
            basis_dimension=self.genus,
            branch_points=[complex(b) for b in self.branch_points],
        )

    # -- local frames ---------------------------------------------------------
    def local_frames(self, order=JET_ORDER):
        if order < 4:
            raise ValueError("jet order must be at least 4")
        return [LocalFrame.build(self, r, order) for r in self.ramification_points]


class HyperellipticCurve(CurveModel):
    kind = "hyperelliptic"

    def __init__(self, Q, separation_floor=SEPARATION_FLOOR):
        Q = _trim(Q)
        deg = len(Q) - 1
        if deg % 2 or deg < 2:
            raise DegreeError(f"deg Q must be even and >= 2, got {deg}")
        self.Q = Q
        self.sqrt_polys = [Q]
        self.genus = deg // 2 - 1
        self.separation_floor = separation_floor
        _check_separation(_roots(Q), separation_floor)

    def __repr__(self):
        return f"HyperellipticCurve(genus={self.genus}, Q={self.Q.tolist()})"

    def y(self, x, fib):
        return fib[0]

    def holomorphic_basis(self, x, fib):
        y = fib[0]
        return [x ** k / y if k else 1 / y for k in range(self.genus)]

    def deformation_basis(self, x, fib):
        """dx-coefficients of d(theta)/dt_m for Q_t = Q + sum t_m x^m."""
        y = fib[0]
        return [(x ** m if m else 1) / (2 * y) for m in range(self.genus)]

    def deformed(self, t):
        Q = self.Q.copy()
        Q[: len(t)] += np.asarray(t)
        return HyperellipticCurve(Q, self.separation_floor)

    def scaled(self, c):
        return HyperellipticCurve(self.Q * c ** 2, self.separation_floor)

    def rescale_fiber(self, fib, c):
        return np.asarray(fib) * c

    @cached_property
    def ramification_points(self):
        return [RamificationPoint(i, complex(e), (0j,), 0) for i, e in enumerate(_roots(self.Q))]


class TowerCurve(CurveModel):
    kind = "tower"

    def __init__(self, f, alpha, R, separation_floor=SEPARATION_FLOOR):
        f = _trim(f)
        deg_f = len(f) - 1
        if deg_f % 2 or deg_f < 4:
            raise DegreeError(f"base polynomial f must have even degree >= 4, got {deg_f}")
        gb = deg_f // 2 - 1
        alpha = np.asarray(alpha, dtype=complex)
        if len(alpha) > gb and np.any(alpha[gb:] != 0):
            raise DegreeError(f"deg alpha must be <= {gb - 1}")
        alpha = np.concatenate([alpha[:gb], np.zeros(max(0, gb - len(alpha)))])
        R = _trim(R)
        if len(R) - 1 != 2 * gb - 2:
            raise DegreeError(f"deg R must equal {2 * gb - 2} for a smooth unramified-at-infinity cover")
        self.f, self.alpha, self.R = f, alpha, R
        self.base_genus = gb
        self.sqrt_polys = [f, R]
        self.genus = 4 * (gb - 1) + 1
        self.separation_floor = separation_floor
        _check_separation(np.concatenate([_roots(f), _roots(R)]), separation_floor)

    def __repr__(self):
        return f"TowerCurve(base_genus={self.base_genus}, genus={self.genus})"

    @property
    def theta_holomorphic(self):
        return True

    def y(self, x, fib):
        w, v = fib[0], fib[1]
        return (-0.5 * polynomial(self.alpha, x) + v) / w

    def holomorphic_basis(self, x, fib):
        w, v = fib[0], fib[1]
        gb = self.base_genus
        one = [(x ** k if k else 1) / w for k in range(gb)]
        two = [(x ** k if k else 1) / (w * v) for k in range(2 * gb - 1)]
        return one + two

    def deformation_basis(self, x, fib):
        w, v = fib[0], fib[1]
        gb = self.base_genus
        da = [-(x ** k if k else 1) / (2 * w) for k in range(gb)]
        dR = [(x ** k if k else 1) / (2 * v * w) for k in range(2 * gb - 1)]
        return da + dR

    def deformed(self, t):
        gb = self.base_genus
        t = np.asarray(t, dtype=complex)
        R = self.R.copy()
        R[: len(t) - gb] += t[gb:]
        return TowerCurve(self.f, self.alpha + t[:gb], R, self.separation_floor)

    def scaled(self, c):
        return TowerCurve(self.f, self.alpha * c, self.R * c ** 2, self.separation_floor)

    def rescale_fiber(self, fib, c):
        fib = np.array(fib, dtype=complex)
        fib[1] = fib[1] * c
        return fib

    @property
    def ramification_points(self):
        out = []
        for r in _roots(self.R):
            w = np.sqrt(polynomial(self.f, r))
            for s in (1, -1):
                out.append(RamificationPoint(len(out), complex(r), (complex(s * w), 0j), 1))
        return out


def validate_curve(model):
    """Return a :class:`CurveReport` (construction already enforced invariants)."""
    rep = model.report()
    if len(rep.ramification_x) == 0 and model.genus > 0:
        raise DegreeError("curve has no ramification points")
    return rep


def _even_embed(coeffs, n):
    out = np.zeros(n, dtype=complex)
    k = min(len(coeffs), (n + 1) // 2)
    out[0 : 2 * k : 2] = coeffs[:k]
    return out


@dataclass
class LocalFrame:
    """Local data at a simple ramification point in the coordinate x - x_a = q^2."""

    point: RamificationPoint
    order: int
    x: Series
    fiber: list  # Series per component, high order
    y: Series
    basis: list  # dq-coefficients of the raw holomorphic differentials
    radius: float  # convergence radius of the q-expansions
    residual: float = 0.0
    extras: dict = field(default_factory=dict)

    @classmethod
    def build(cls, model, point, order, local_order=LOCAL_ORDER):
        n = max(order, local_order) + 2
        q = Series.var(n)
        xs = q * q + point.x
        others = np.asarray(model.branch_points)
        d = np.abs(others - point.x)
        d = d[d > 1e-12]
        radius = float(np.sqrt(d.min())) if len(d) else 10.0

        comps = []
        for c, p in enumerate(model.sqrt_polys):
            shifted = taylor_shift(p, point.x)
            if c == point.component:
                # P(x_a + t) = t * Ptilde(t); component = q * sqrt(Ptilde(q^2))
                comps.append(q * Series(_even_embed(shifted[1:], n)).sqrt())
            else:
                comps.append(Series(_even_embed(shifted, n)).sqrt(branch=point.fiber[c]))
        y = model.y(xs, comps)
        y1 = y[1]
        if y1.real < 0 or (y1.real == 0 and y1.imag < 0):
            comps[point.component] = -comps[point.component]
            y = model.y(xs, comps)
        # substitution residual through the requested order
        resid = 0.0
        for c, p in enumerate(model.sqrt_polys):
            diff = comps[c] * comps[c] - polynomial(p, xs)
            scale = max(1.0, float(np.max(np.abs(p))))
            resid = max(resid, float(np.max(np.abs(diff.coefficients(0, order + 1)))) / scale)
        if resid > 1e-12:
            raise SeriesDivergenceError(f"local series residual {resid:.3g} exceeds tolerance")
        dxdq = 2 * q
        basis = [(b * dxdq) for b in model.holomorphic_basis(xs, comps)]
        frame = cls(point, order, xs, comps, y, basis, radius, resid)
        return frame

    def flipped(self):
        """The same frame in the opposite coordinate q -> -q."""
        return LocalFrame(self.point, self.order, self.x, [c.flip() for c in self.fiber], self.y.flip(),
                          [-b.flip() for b in self.basis], self.radius, self.residual, dict(self.extras))

    # -- conveniences -----------------------------------------------------
    @property
    def dy(self):
        """Derivatives y'(0), y''(0), y'''(0)."""
        return self.y[1], 2 * self.y[2], 6 * self.y[3]

    def differential_series(self, pointwise, model):
        """dq-coefficient series of a differential given pointwise as dx-coefficient."""
        q = Series.var(len(self.x.coeffs))
        return pointwise(self.x, self.fiber) * (2 * q)

    def fiber_at(self, model, q):
        """Fibers at local coordinates ``q`` (array), branch fixed by the series."""
        q = np.asarray(q, dtype=complex)
        x = self.point.x + q * q
        out = []
        for c, p in enumerate(model.sqrt_polys):
            guess = self.fiber[c](q)
            if c == self.point.component:
                tail = taylor_shift(p, self.point.x)[1:]
                r = q * np.sqrt(polynomial(tail, q * q))
            else:
                r = np.sqrt(polynomial(p, x))
            out.append(np.where(np.abs(r - guess) <= np.abs(r + guess), r, -r))
        return x, np.stack(out)


def local_frames(model, order=JET_ORDER):
    return model.local_frames(order)
