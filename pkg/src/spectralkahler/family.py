"""Finite-difference oracles over families of spectral curves.

A family member is the base curve with its coefficients shifted by a
parameter vector t (hyperelliptic: Q + sum t_m x^m; tower: alpha and R).
The homology frame is carried along by continuity, and finite differences
are taken on a uniform grid in the special coordinates z (obtained by a
Newton solve in t) so no second-order chain rule is needed.

Points are held at fixed (x, sheet) while the curve moves; this is the
variation used by the Rauch and variational formulas.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bergman import bergman_jets, make_kernel
from .errors import FrameTransportError, NewtonDivergenceError, StepTooLargeError
from .periods import period_data
from .recursion import RecursionEngine, a_cycle_check, b_contraction
from .series import Series

H1 = 1e-4
H2 = 1e-3
NEWTON_TOL = 1e-10
COND_J = 1e6


@dataclass
class Member:
    t: tuple
    model: object
    frame: object
    pd: object
    _kernel: object = field(default=None, repr=False)
    _engine: object = field(default=None, repr=False)

    def kernel(self):
        if self._kernel is None:
            self._kernel = make_kernel(self.model, self.pd)
        return self._kernel

    def engine(self, order=None):
        if self._engine is None:
            k = self.kernel()
            jets = bergman_jets(self.model, self.pd, k, order=order)
            self._engine = RecursionEngine(jets, k, self.model, self.pd)
        return self._engine


class FamilyChart:
    """Deformations of a base curve with a transported homology frame."""

    def __init__(self, model, frame, pd=None, h1=H1, h2=H2):
        self.model = model
        self.frame = frame
        self.pd = pd or period_data(model, frame)
        self.h1, self.h2 = h1, h2
        self._members = {}
        x0 = 0.377 + 0.291j  # generic point: only the number of directions is needed
        self.ndir = len(model.deformation_basis(np.array(x0), model.fiber_candidates(x0)[0]))
        self.J = self.jacobian()
        self.cond = float(np.linalg.cond(self.J))
        if self.cond > COND_J:
            raise FrameTransportError(f"chart Jacobian ill-conditioned (cond {self.cond:.3g})")
        self.Jinv = np.linalg.inv(self.J)
        self.scale = max(1.0, float(np.max(np.abs(self.pd.z))))

    @property
    def genus(self):
        return self.model.genus

    def jacobian(self):
        """J[i, m] = a_i-period of the m-th deformation differential."""
        a, _ = self.pd.cycle_integrals(self.model.deformation_basis)
        return np.asarray(a).reshape(self.genus, self.ndir)

    def member(self, t):
        key = tuple(np.round(np.asarray(t, dtype=complex), 15))
        if key not in self._members:
            if not np.any(np.asarray(key)):
                self._members[key] = Member(key, self.model, self.frame, self.pd)
            else:
                m = self.model.deformed(np.asarray(t, dtype=complex))
                fr = self.frame.transport(m)
                self._members[key] = Member(key, m, fr, period_data(m, fr, check=False))
        return self._members[key]

    def z_of(self, t):
        return self.member(t).pd.z

    # -- coordinates -------------------------------------------------------
    def to_z_chart(self, dz, tol=NEWTON_TOL, max_iter=30):
        """Parameters t with z(t) = z(0) + dz (chord Newton with the base Jacobian)."""
        dz = np.asarray(dz, dtype=complex)
        if not np.any(dz):
            return np.zeros(self.ndir, dtype=complex)
        z0 = self.pd.z
        t = self.Jinv @ dz
        for _ in range(max_iter):
            r = self.z_of(t) - z0 - dz
            if np.max(np.abs(r)) <= tol:
                return t
            t = t - self.Jinv @ r
        raise NewtonDivergenceError(f"z-chart inversion stalled at residual {np.max(np.abs(r)):.3g}")

    def at_z(self, dz):
        return self.member(self.to_z_chart(dz))

    # -- finite differences --------------------------------------------------
    def _d1(self, fn, h):
        g = self.genus
        out = []
        for i in range(g):
            e = np.zeros(g, dtype=complex)
            e[i] = h
            out.append((fn(self.at_z(e)) - fn(self.at_z(-e))) / (2 * h))
        return np.array(out)

    def _d2(self, fn, h):
        g = self.genus
        f0 = fn(self.member(np.zeros(self.ndir)))
        out = np.empty((g, g) + np.shape(f0), dtype=complex)
        E = np.eye(g) * h
        for i in range(g):
            out[i, i] = (fn(self.at_z(E[i])) - 2 * f0 + fn(self.at_z(-E[i]))) / h ** 2
            for j in range(i + 1, g):
                v = (fn(self.at_z(E[i] + E[j])) - fn(self.at_z(E[i] - E[j]))
                     - fn(self.at_z(E[j] - E[i])) + fn(self.at_z(-E[i] - E[j]))) / (4 * h * h)
                out[i, j] = out[j, i] = v
        return out

    def derivative(self, fn, order=1, h=None, richardson=False):
        """FD of a member-valued function along the z-coordinates.

        Halving the step is always done; a change above 10% raises
        :class:`StepTooLargeError`.  With ``richardson`` the two estimates
        are combined to cancel the h^2 error term.
        """
        h = (h or (self.h1 if order == 1 else self.h2)) * self.scale
        d = self._d1 if order == 1 else self._d2
        A = d(fn, h)
        B = d(fn, h / 2)
        # derivatives that vanish (e.g. by symmetry) are compared against the
        # round-off floor of the difference quotient instead of themselves
        f0 = float(np.max(np.abs(fn(self.member(np.zeros(self.ndir))))))
        floor = 1e-9 * max(f0, 1.0) / h ** order
        size = max(float(np.max(np.abs(B))), floor)
        change = float(np.max(np.abs(A - B))) / size
        if change > 0.1:
            raise StepTooLargeError(f"halving the step changed the derivative by {change:.2%}")
        return (4 * B - A) / 3 if richardson else B


def fd_tau(chart, order=1, h=None, richardson=False):
    """d tau_jk / dz^i (order 1, shape (g,g,g)) or d^2 tau_kl / dz^i dz^j (order 2)."""
    return chart.derivative(lambda m: m.pd.tau, order, h, richardson)


def jacobian_check(chart, h=1e-5):
    """Analytic J against central differences of z(t); max abs deviation."""
    cols = []
    for m in range(chart.ndir):
        e = np.zeros(chart.ndir, dtype=complex)
        e[m] = h
        cols.append((chart.z_of(e) - chart.z_of(-e)) / (2 * h))
    return float(np.max(np.abs(np.array(cols).T - chart.J)))


# ---------------------------------------------------------------------------
# variation at fixed (x, sheet)


def _fixed_point(member, p):
    x, fib = p
    return complex(x), member.model.nearest_fiber(complex(x), np.asarray(fib))


def _delta_theta_at(engine, direction):
    """dq-coefficient at q = 0 of the variation of theta along ``direction`` (t-space)."""
    direction = np.asarray(direction, dtype=complex)
    out = []
    for fr in engine.jets.frames:
        q2 = 2 * Series.var(len(fr.x.coeffs))
        ser = [b * q2 for b in engine.model.deformation_basis(fr.x, fr.fiber)]
        out.append(sum(d * s[0] for d, s in zip(direction, ser)))
    return np.array(out)


def rauch_check(chart, p, r, direction=None, h=None):
    """delta B(p, r) by FD in t along ``direction`` vs the residue formula.

    Right side: -sum_a phi_a(0) xi_{a,0}(p) xi_{a,0}(r) / (2 y'(a)), with phi
    the dq-coefficient of the variation of theta at a.
    """
    direction = np.eye(chart.ndir)[0] if direction is None else np.asarray(direction, dtype=complex)
    if not np.any(direction):
        return {"fd": 0j, "residue": 0j, "rel_error": 0.0}
    h = h or chart.h1 * chart.scale

    def B(t):
        m = chart.member(t)
        k = m.kernel()
        (x1, f1), (x2, f2) = _fixed_point(m, p), _fixed_point(m, r)
        return complex(k(x1, f1, x2, f2))

    fd = (B(h * direction) - B(-h * direction)) / (2 * h)
    fd2 = (B(0.5 * h * direction) - B(-0.5 * h * direction)) / h
    fd = (4 * fd2 - fd) / 3
    eng = chart.member(np.zeros(chart.ndir)).engine()
    phi = _delta_theta_at(eng, direction)
    y1 = eng.jets.y[:, 1]
    xp, xr = eng.xi(p, 1)[:, 0], eng.xi(r, 1)[:, 0]
    res = complex(-np.sum(phi * xp * xr / (2 * y1)))
    return {"fd": fd, "residue": res, "rel_error": abs(fd - res) / max(abs(res), 1e-300)}


def _w_value(member, g, k, points):
    pts = [_fixed_point(member, p) for p in points]
    if (g, k) == (0, 2):
        (x1, f1), (x2, f2) = pts
        return complex(member.kernel()(x1, f1, x2, f2))
    return member.engine().evaluate(g, k, pts)


def variational_check(chart, g, k, points, i=0, cycle="b", h=None):
    """delta_i W^(g)_k against -(1/2 pi i) times the cycle integral of W^(g)_{k+1}.

    ``cycle='a'`` returns the a-cycle integral instead (which must vanish).
    """
    eng = chart.member(np.zeros(chart.ndir)).engine()
    corr = eng.get(g, k + 1)
    if cycle == "a":
        val = a_cycle_check(eng, corr, points)[i]
        return {"a_integral": complex(val), "abs": abs(val)}
    rhs = complex(-b_contraction(eng, corr, points)[i] / (2j * np.pi))
    h = (h or chart.h1) * chart.scale
    e = np.zeros(chart.genus, dtype=complex)
    e[i] = 1.0

    def fd(step):
        return (_w_value(chart.at_z(step * e), g, k, points) - _w_value(chart.at_z(-step * e), g, k, points)) / (2 * step)

    A, B = fd(h), fd(h / 2)
    lhs = (4 * B - A) / 3
    return {"fd": lhs, "cycle_integral": rhs, "rel_error": abs(lhs - rhs) / max(abs(rhs), 1e-300)}
