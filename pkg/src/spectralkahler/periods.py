"""Contour integrals over tracked cycles, period matrices and the Abel map."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedError, QuadratureError
from .homology import Arc, Cycle, Line, track_path
from .quadrature import embedded_weights, gauss_legendre

COND_LIMIT = 1e8


def _as_values(differential, x, fib):
    v = differential(x, fib)
    if isinstance(v, (list, tuple)):
        v = np.stack([np.broadcast_to(np.asarray(c, dtype=complex), x.shape) for c in v])
    return np.broadcast_to(np.asarray(v, dtype=complex), np.shape(v))


def integrate_track(track, differential, with_error=False):
    """Integral of ``differential`` (dx-coefficient callable) along a track."""
    vals = _as_values(differential, track.x, track.fib)
    _, w = gauss_legendre(track.x.shape[1])
    I_sub = np.sum(vals * track.jac * w, axis=-1)
    val = np.sum(I_sub, axis=-1)
    if not with_error:
        return val
    I16 = np.sum(vals * track.jac * embedded_weights(track.x.shape[1]), axis=-1)
    err = np.sum(np.abs(I_sub - I16), axis=-1)
    return val, err


def integrate_over_cycle(model, differential, cycle, tol=1e-12, singularities=(), max_refine=4):
    """Adaptive Gauss-Legendre integral of a differential over a cycle.

    ``differential(x, fib)`` returns the dx-coefficient (or a list of them).
    Subsegments are refined until the embedded error estimate is below
    ``tol``; :class:`QuadratureError` if that fails.
    """
    sing = np.asarray(singularities, dtype=complex).ravel()
    for level in range(max_refine + 1):
        tr = cycle.track(model, sing, shrink=2.0 ** level)
        val, err = integrate_track(tr, differential, with_error=True)
        if np.max(err) <= tol:
            return val
    raise QuadratureError(f"quadrature error estimate {np.max(err):.3g} above tolerance {tol:g}")


@dataclass
class PeriodData:
    A: np.ndarray
    Bp: np.ndarray
    C: np.ndarray
    tau: np.ndarray
    z: np.ndarray
    w: np.ndarray
    asymmetry: float
    cond: float
    normalization_error: float
    frame: object = field(repr=False, default=None)
    model: object = field(repr=False, default=None)

    @property
    def genus(self):
        return self.A.shape[0]

    def omega(self, x, fib):
        """Normalised differentials (dx-coefficients), shape (g, *x.shape)."""
        u = np.stack([np.broadcast_to(np.asarray(v, dtype=complex), np.shape(x))
                      for v in self.model.holomorphic_basis(x, fib)])
        return np.tensordot(self.C.T, u, axes=(1, 0))

    def cycle_integrals(self, differential, singularities=()):
        """(a-periods, b-periods) of an arbitrary differential."""
        per = [integrate_track(c.track(self.model, singularities), differential) for c in self.frame.cycles]
        return self.frame.combine(np.array(per))

    def to_json(self):
        def cm(a):
            return np.stack([np.real(a), np.imag(a)], axis=-1).tolist()
        return {
            "A": cm(self.A), "B": cm(self.Bp), "tau": cm(self.tau), "z": cm(self.z), "w": cm(self.w),
            "tau_asymmetry": self.asymmetry, "cond_A": self.cond,
            "normalization_error": self.normalization_error,
        }


def raw_cycle_integrals(model, frame):
    """Per-cycle integrals of the raw basis and of theta: (ncyc, g), (ncyc,)."""
    U, T = [], []
    for c in frame.cycles:
        tr = c.track(model)
        U.append(integrate_track(tr, model.holomorphic_basis))
        T.append(integrate_track(tr, model.theta))
    return np.array(U).reshape(len(frame.cycles), model.genus), np.array(T)


def period_data(model, frame, check=True):
    if model.genus == 0:
        e = np.zeros((0, 0), dtype=complex)
        return PeriodData(e, e, e, e, np.zeros(0), np.zeros(0), 0.0, 1.0, 0.0, frame, model)
    per_u, per_t = raw_cycle_integrals(model, frame)
    A, Bp = frame.combine(per_u)
    z, w = frame.combine(per_t)
    cond = float(np.linalg.cond(A))
    if cond > COND_LIMIT:
        raise IllConditionedError(f"cond(A) = {cond:.3g} exceeds {COND_LIMIT:g}")
    C = np.linalg.inv(A)
    tau_raw = Bp @ C
    asym = float(np.max(np.abs(tau_raw - tau_raw.T)))
    tau = 0.5 * (tau_raw + tau_raw.T)
    pd = PeriodData(A, Bp, C, tau, z, w, asym, cond, 0.0, frame, model)
    if check:
        a_om, _ = pd.cycle_integrals(pd.omega)
        pd.normalization_error = float(np.max(np.abs(a_om.T - np.eye(model.genus))))
    return pd


def transported_period_data(model, frame, check=False):
    """Period data on a nearby curve with the frame carried along."""
    return period_data(model, frame.transport(model), check=check)


# ---------------------------------------------------------------------------
# paths between points and the Abel map


def route(x0, x1, avoid, radius, depth=0):
    """Polyline from x0 to x1 keeping at least ``radius`` from ``avoid``.

    Each offending point is bypassed by a waypoint pushed off to the side the
    straight segment already passes on; the construction is deterministic.
    """
    x0, x1 = complex(x0), complex(x1)
    avoid = np.asarray(avoid, dtype=complex)
    if depth > 12 or len(avoid) == 0 or abs(x1 - x0) == 0:
        return [x0, x1]
    d = x1 - x0
    t = ((avoid - x0) * np.conj(d)).real / abs(d) ** 2
    inner = (t > 0) & (t < 1)
    foot = x0 + np.clip(t, 0, 1) * d
    dist = np.abs(avoid - foot)
    bad = inner & (dist < radius) & (np.abs(avoid - x0) > 0.5 * radius) & (np.abs(avoid - x1) > 0.5 * radius)
    if not np.any(bad):
        return [x0, x1]
    k = np.argmin(np.where(bad, t, np.inf))
    e = avoid[k]
    off = foot[k] - e
    if abs(off) < 1e-12 * max(1.0, abs(e)):
        off = 1j * d  # pass on the left
    wp = e + 2.0 * radius * off / abs(off)
    a = route(x0, wp, avoid, radius, depth + 1)
    b = route(wp, x1, avoid, radius, depth + 1)
    return a[:-1] + b


def polyline_segments(verts):
    return [Line(a, b) for a, b in zip(verts[:-1], verts[1:]) if a != b]


def _keyhole(model, x_end, comp, radius):
    """Loop from x_end around the nearest root of component ``comp``."""
    roots = np.roots(np.asarray(model.sqrt_polys[comp])[::-1])
    e = roots[np.argmin(np.abs(roots - x_end))]
    bps = np.asarray(model.branch_points)
    others = bps[np.abs(bps - e) > 1e-9]
    r = min(radius, 0.4 * float(np.min(np.abs(others - e)))) if len(others) else radius
    if abs(x_end - e) <= r:
        u = (x_end - e) / abs(x_end - e)
        a = float(np.angle(u))
        return [Arc(e, abs(x_end - e), a, a + 2 * np.pi)]
    u = (x_end - e) / abs(x_end - e)
    entry = e + r * u
    verts = route(x_end, entry, others, r)
    out = polyline_segments(verts)
    a = float(np.angle(u))
    out.append(Arc(e, r, a, a + 2 * np.pi))
    out += [s.reversed() for s in out[:-1][::-1]]
    return out


def point_path(model, p, q, radius=None):
    """Segments from point q to point p that end on p's sheet."""
    bps = np.asarray(model.branch_points)
    if radius is None:
        d = np.abs(bps[:, None] - bps[None, :])
        np.fill_diagonal(d, np.inf)
        radius = 0.2 * float(d.min()) if len(bps) > 1 else 0.5
    xq, fq = q
    xp, fp = p
    segs = polyline_segments(route(xq, xp, bps, radius))
    if not segs:
        return [], np.asarray(fq)
    tr = track_path(model, segs, fq)
    end = tr.end_fiber
    fp = np.asarray(fp, dtype=complex)
    for c in range(model.ncomp):
        if abs(end[c] - fp[c]) > abs(end[c] + fp[c]):
            segs = segs + _keyhole(model, complex(xp), c, radius)
            end = end.copy()
            end[c] = -end[c]
    return segs, np.asarray(fq)


def abel_map(model, p, q, pd=None, frame=None, return_path=False, normalized=True):
    """Integral of the (normalised) holomorphic differentials from q to p.

    Points are ``(x, fiber)`` pairs.  With ``normalized`` the result is in
    the a-normalised basis (needs period data ``pd``).
    """
    segs, fq = point_path(model, p, q)
    if not segs:
        val = np.zeros(model.genus, dtype=complex)
    else:
        tr = track_path(model, segs, fq)
        val = integrate_track(tr, model.holomorphic_basis)
        val = np.asarray(val).reshape(model.genus)
    if normalized:
        if pd is None:
            raise ValueError("normalised Abel map needs period data")
        val = pd.C.T @ val
    if return_path:
        return val, Cycle(segs, fq, "abel")
    return val


def lattice_reduce(u, tau):
    """u = m + tau n + r with integer m, n and r in the fundamental cell."""
    Y = tau.imag
    n = np.round(np.linalg.solve(Y, np.imag(u)))
    r = u - tau @ n
    m = np.round(r.real)
    return r - m, m, n


def point_on_sheet(model, x, sheet=0):
    return complex(x), model.fiber_candidates(complex(x))[sheet].astype(complex)


def modular_reduce(tau, max_iter=100):
    """Move a genus-1 tau into the standard fundamental domain of SL(2, Z)."""
    tau = complex(tau)
    for _ in range(max_iter):
        tau -= round(tau.real)
        if abs(tau) < 1 - 1e-15:
            tau = -1 / tau
        else:
            break
    return tau


def j_invariant(tau, terms=60):
    """Klein j from the Eisenstein q-series (tau reduced first)."""
    tau = modular_reduce(tau)
    q = np.exp(2j * np.pi * tau)
    n = np.arange(1, terms + 1)
    div = [d for d in range(1, terms + 1)]
    s3 = np.array([sum(d ** 3 for d in div if k % d == 0) for k in n], dtype=float)
    s5 = np.array([sum(d ** 5 for d in div if k % d == 0) for k in n], dtype=float)
    qn = q ** n
    E4 = 1 + 240 * np.sum(s3 * qn)
    E6 = 1 - 504 * np.sum(s5 * qn)
    return complex(1728 * E4 ** 3 / (E4 ** 3 - E6 ** 2))
