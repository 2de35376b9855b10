"""Special Kähler data of a spectral curve.

The special coordinates z^i and dual coordinates w_i are the a- and
b-periods of the canonical 1-form; tau = dw/dz is the period matrix.  The
cubic c_ijk = d tau_jk / dz^i and the quartic D_ijkl = d_i d_j tau_kl are
assembled from first- and second-order local data at the ramification
points (normalised omega-jets, y-jets, S_B and the cross values B(a, b)).

Global identities (w = tau z, theta = z^i omega_i, F = z.w / 2) require a
holomorphic canonical form and are only claimed for tower curves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import FrameMissingError, JetOrderError, ModeError
from .periods import period_data

TWO_PI_I = 2j * np.pi


def _sym_defect(T, perms):
    return max(float(np.max(np.abs(T - np.transpose(T, p)))) for p in perms)


@dataclass
class SKData:
    z: np.ndarray
    w: np.ndarray
    tau: np.ndarray
    F: complex
    K: float
    c: np.ndarray = None
    D: np.ndarray = None
    c_asymmetry: float = 0.0
    D_asymmetry: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def metric(self):
        return self.tau.imag

    @property
    def kahler_form(self):
        """Coefficients of dz^i ^ dzbar^j in the Kähler form."""
        return -0.5j * self.tau.imag

    def metric_positive(self):
        return bool(np.all(np.linalg.eigvalsh(0.5 * (self.metric + self.metric.T)) > 0))

    def to_json(self):
        def cm(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()
        out = {"z": cm(self.z), "w": cm(self.w), "tau": cm(self.tau), "F": cm(self.F), "K": float(self.K),
               "metric": np.asarray(self.metric).tolist(), "metric_positive": self.metric_positive()}
        if self.c is not None:
            out["cubic"] = cm(self.c)
            out["cubic_asymmetry"] = self.c_asymmetry
        if self.D is not None:
            out["quartic"] = cm(self.D)
            out["quartic_asymmetry"] = self.D_asymmetry
        return out


def prepotential(z, w):
    return 0.5 * complex(np.dot(z, w))


def kahler_potential(z, w):
    return -0.5 * float(np.sum(np.imag(w * np.conj(z))))


def sk_data(pd, jets=None, quartic=True):
    z, w, tau = pd.z, pd.w, pd.tau
    data = SKData(z, w, tau, prepotential(z, w), kahler_potential(z, w))
    if jets is not None:
        data.c = cubic_residue(pd.model, pd.frame, jets)
        data.c_asymmetry = data.c.asymmetry
        if quartic:
            data.D = quartic_residue(pd.model, pd.frame, jets)
            data.D_asymmetry = data.D.asymmetry
    return data


class _Tensor(np.ndarray):
    """ndarray carrying the raw asymmetry measured before symmetrisation."""

    asymmetry = 0.0


def _tagged(arr, asym):
    out = np.asarray(arr).view(_Tensor)
    out.asymmetry = float(asym)
    return out


def _require(frame, jets):
    if frame is None or jets is None:
        raise FrameMissingError("residue formulas need the homology frame and normalised jets")


def cubic_residue(model, frame, jets):
    """c_ijk = -2 pi i sum_a omega_i(a) omega_j(a) omega_k(a) / (2 y'(a))."""
    _require(frame, jets)
    om = jets.omega[:, :, 0]
    y1 = jets.y[:, 1]
    c = -TWO_PI_I * np.einsum("ai,aj,ak,a->ijk", om, om, om, 1 / (2 * y1))
    perms = list(permutations(range(3)))
    asym = _sym_defect(c, perms)
    c = sum(np.transpose(c, p) for p in perms) / 6
    return _tagged(c, asym)


def quartic_residue(model, frame, jets):
    """D_ijkl = d_i d_j tau_kl from three blocks of local data.

    cross:  2 pi i sum_{a != b} B(a,b) P_a^{ij} P_b^{kl} + cyclic in (j, k, l)
    local:  2 pi i sum_a (S_B - y'''/y') / (8 y'^2) omega_i omega_j omega_k omega_l
    omega'': 2 pi i sum_a omega_i'' omega_j omega_k omega_l / (8 y'^2) + cyclic in (i, j, k, l)
    with P_a^{ij} = omega_i(a) omega_j(a) / (2 y'(a)).
    """
    _require(frame, jets)
    if jets.order < 4 or jets.omega.shape[2] < 3:
        raise JetOrderError("quartic needs jets of order >= 4")
    om = jets.omega[:, :, 0]
    om2 = 2 * jets.omega[:, :, 2]  # second derivative in q
    y1, _, y3 = jets.dy
    SB = jets.S_B
    nr = jets.nram
    Bab = jets.T[:, :, 0, 0].copy()
    Bab[np.arange(nr), np.arange(nr)] = 0
    P = np.einsum("ai,aj,a->aij", om, om, 1 / (2 * y1))
    cross = np.einsum("ab,aij,bkl->ijkl", Bab, P, P)
    D = cross + np.transpose(cross, (0, 2, 3, 1)) + np.transpose(cross, (0, 3, 1, 2))
    D = D + np.einsum("a,ai,aj,ak,al->ijkl", (SB - y3 / y1) / (8 * y1 ** 2), om, om, om, om)
    E = np.einsum("ai,aj,ak,al,a->ijkl", om2, om, om, om, 1 / (8 * y1 ** 2))
    D = D + E + np.transpose(E, (3, 0, 1, 2)) + np.transpose(E, (2, 3, 0, 1)) + np.transpose(E, (1, 2, 3, 0))
    D = TWO_PI_I * D
    perms = [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]
    asym = _sym_defect(D, perms)
    return _tagged(D, asym)


# ---------------------------------------------------------------------------
# global identities


def kahler_identities(pd, points=None, strict=True):
    """w = tau z, theta = z^i omega_i at sample points, and the Kähler identity.

    ``kahler_exact`` compares -Im(w.conj(z))/2 evaluated with w := tau z
    against -conj(z)^T Im(tau) z / 2, an identity of stored arithmetic.
    """
    model = pd.model
    if strict and not model.theta_holomorphic:
        raise ModeError("global identities need a holomorphic canonical form (tower mode)")
    z, w, tau = pd.z, pd.w, pd.tau
    out = {"w_minus_tau_z": float(np.max(np.abs(w - tau @ z)))}
    if points is None:
        bp = np.asarray(model.branch_points)
        centre = complex(np.mean(bp))
        spread = float(np.max(np.abs(bp - centre)))
        xs = centre + spread * np.array([0.37 + 0.41j, -0.52 + 0.13j, 0.21 - 0.66j, 1.3 + 0.2j])
        points = [(x, model.fiber_candidates(x)[k % model.nsheets]) for k, x in enumerate(xs)]
    worst = 0.0
    for x, fib in points:
        th = complex(model.theta(x, fib))
        recon = complex(np.dot(z, pd.omega(np.asarray(x), np.asarray(fib))))
        worst = max(worst, abs(th - recon) / max(1.0, abs(th)))
    out["theta_minus_z_omega"] = worst
    Kw = kahler_potential(z, tau @ z)
    Kq = -0.5 * float(np.real(np.conj(z) @ tau.imag @ z))
    out["kahler_exact"] = abs(Kw - Kq)
    out["kahler_measured"] = abs(kahler_potential(z, w) - Kq)
    out["F_minus_quadratic"] = abs(prepotential(z, w) - 0.5 * complex(z @ tau @ z))
    return out


def prepotential_check(chart, strict=True, h=None):
    """FD gradient of F = z.w/2 on the z-grid against w (relative error)."""
    if strict and not chart.model.theta_holomorphic:
        raise ModeError("prepotential gradient is only claimed for tower curves")
    grad = chart.derivative(lambda m: np.array(prepotential(m.pd.z, m.pd.w)), order=1, h=h, richardson=True)
    w = chart.pd.w
    rel = float(np.max(np.abs(grad - w)) / max(np.max(np.abs(w)), 1e-300))
    return {"grad_F": grad, "w": w, "rel_error": rel}


def scale_check(model, frame, pd=None, c=1.01):
    """Rescale theta -> c theta on the curve and compare periods.

    z and w must scale by c and tau must not change.
    """
    pd = pd or period_data(model, frame, check=False)
    if c == 1:
        return {"c": c, "z_error": 0.0, "w_error": 0.0, "tau_error": 0.0}
    scaled = model.scaled(c)
    fr = frame.transport(scaled)
    ps = period_data(scaled, fr, check=False)
    nz = max(1.0, float(np.max(np.abs(pd.z))))
    nw = max(1.0, float(np.max(np.abs(pd.w))))
    return {
        "c": c,
        "z_error": float(np.max(np.abs(ps.z - c * pd.z))) / nz,
        "w_error": float(np.max(np.abs(ps.w - c * pd.w))) / nw,
        "tau_error": float(np.max(np.abs(ps.tau - pd.tau))),
    }
