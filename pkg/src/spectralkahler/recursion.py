"""Genus-expansion recursion executed as finite linear algebra on jet data.

Every stable correlator W^(g)_n has poles only at the ramification points,
so it is stored as a coefficient tensor over the differentials

    xi_{a,k}(p) = Res_{q -> a} q^{-(2k+1)} B(p, q),

i.e. the q^{2k} Taylor coefficient of B(p, q)/dq at a, which has a single
pole of order 2k + 2 at a.  The recursion kernel factorises over this basis:

    dE_q(p) / omega(q) = sum_k xi_{a,k}(p) kappa_k(q) / dq,
    kappa_k(q) = -q^(2k-1) / (4 (2k+1) Y(q)),  Y(q) = (y(q) - y(-q)) / (2q),

so each residue is a finite contraction of Laurent coefficients built from
the two-point Taylor tensors of B.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .errors import JetOrderError, NonSymmetricResultError
from .bergman import ThetaKernel
from .series import Series

ASYM_TOL = 1e-8


def slot_count(g, n):
    """Number of xi-orders per ramification point needed for W^(g)_n."""
    return 3 * g - 3 + n + 1


@dataclass
class Correlator:
    g: int
    n: int
    K: int
    nram: int
    C: np.ndarray
    asymmetry: float = 0.0
    odd_defect: float = 0.0
    meta: dict = field(default_factory=dict)

    def index(self, a, k):
        return a * self.K + k

    def evaluate(self, xis):
        """Contract with per-point xi values, each of shape (nram, >= K)."""
        out = self.C
        for xi in xis:
            v = np.asarray(xi)[:, : self.K].reshape(-1)
            out = np.tensordot(out, v, axes=(0, 0))
        return complex(out)

    def permuted_defect(self):
        C = self.C
        return max((float(np.max(np.abs(C - np.transpose(C, p)))) for p in permutations(range(self.n))), default=0.0)

    def to_json(self, tol=0.0):
        nz = np.argwhere(np.abs(self.C) > tol)
        entries = []
        for idx in nz:
            slots = [[int(i // self.K), int(i % self.K)] for i in idx]
            v = self.C[tuple(idx)]
            entries.append({"slots": slots, "value": [float(v.real), float(v.imag)]})
        return {"g": self.g, "n": self.n, "K": self.K, "nram": self.nram,
                "asymmetry": self.asymmetry, "odd_defect": self.odd_defect, "entries": entries}


def _threads():
    try:
        return max(1, int(os.environ.get("SK_RECURSION_THREADS", "1")))
    except ValueError:
        return 1


class RecursionEngine:
    """Holds the jet data and memoises correlators by (g, n)."""

    def __init__(self, jets, kernel=None, model=None, pd=None, cauchy_n=64):
        self.jets = jets
        self.kernel = kernel
        self.model = model
        self.pd = pd
        self.cauchy_n = cauchy_n
        self.nram = jets.nram
        self.M = jets.order
        self._store = {}
        self._ycache = {}
        self._circle_cache = {}

    # -- local series ---------------------------------------------------------
    def _Y(self, a, L):
        """First L coefficients of the even series Y(q) = (y(q) - y(-q)) / (2q)."""
        y = self.jets.y[a]
        if L + 1 > len(y):
            y = self.jets.frames[a].y.coefficients(0, L + 1)
        out = np.zeros(L, dtype=complex)
        out[0::2] = y[1:L + 1:2]
        return out

    def _kappa(self, a, K, P):
        """kappa_k coefficients on powers -P..P for k < K: array (K, 2P+1)."""
        key = (a, K, P)
        if key not in self._ycache:
            invY = Series(self._Y(a, P + 2)).inverse()
            out = np.zeros((K, 2 * P + 1), dtype=complex)
            for k in range(K):
                for e in range(2 * k - 1, P + 1):
                    out[k, e + P] = -invY[e - (2 * k - 1)] / (4 * (2 * k + 1))
            self._ycache[key] = out
        return self._ycache[key]

    def _L(self, a, K, P, bar=False):
        """Laurent coefficients of xi_{b,k}(q) near a: array (nram*K, 2P+1)."""
        M = self.M
        if P >= M or 2 * (K - 1) >= M:
            raise JetOrderError(f"jet order {M} too short (needs > {max(P, 2 * K - 2)})")
        T = self.jets.T
        out = np.zeros((self.nram * K, 2 * P + 1), dtype=complex)
        for b in range(self.nram):
            for k in range(K):
                j = 2 * k
                row = out[b * K + k]
                row[P:] = T[a, b, : P + 1, j]
                if b == a:
                    if j + 2 > P:
                        raise JetOrderError("Laurent window too small for the pole part")
                    row[P - j - 2] += j + 1
        if bar:
            e = np.arange(-P, P + 1)
            out = out * (-1.0) ** (e + 1)
        return out

    def _Bfac(self, a, P, Kout, bar=False):
        """B(q, p) (or B(q-bar, p)) near a as a slot-extended factor.

        Rows are indexed by the extended slot space: nram*Kout compressed
        slots followed by P+1 overflow rows for raw orders that are odd or
        beyond the stored range.
        """
        S = self.nram * Kout + P + 1
        out = np.zeros((S, 2 * P + 1), dtype=complex)
        for j in range(P + 1):
            sign = (-1.0) ** (j + 1) if bar else 1.0
            if j % 2 == 0 and j // 2 < Kout:
                out[a * Kout + j // 2, P + j] = sign
            else:
                out[self.nram * Kout + j, P + j] = sign
        return out

    # -- recursion ---------------------------------------------------------------
    def get(self, g, n):
        if 2 * g - 2 + n <= 0:
            raise ValueError("W^(g)_n with 2g-2+n <= 0 is not stored in the xi basis")
        key = (g, n)
        if key not in self._store:
            self._store[key] = self._compute(g, n)
        return self._store[key]

    def _factor(self, a, h, m, P, Kout, S_ext, bar):
        """W^(h)_m(q or q-bar, ...) near a as array (2P+1, S_ext^(m-1))."""
        if (h, m) == (0, 2):
            return self._Bfac(a, P, Kout, bar).T
        c = self.get(h, m)
        L = self._L(a, c.K, P, bar)  # (nram*K, E)
        Cr = c.C
        for ax in range(1, m):
            Cr = self._embed_axis(Cr, ax, c.K, Kout, S_ext)
        return np.tensordot(L.T, Cr, axes=(1, 0))

    def _embed_axis(self, C, ax, Kin, Kout, S_ext):
        idx = np.array([b * Kout + k for b in range(self.nram) for k in range(Kin)])
        shape = list(C.shape)
        shape[ax] = S_ext
        new = np.zeros(shape, dtype=complex)
        sl = [slice(None)] * C.ndim
        sl[ax] = idx
        new[tuple(sl)] = C
        return new

    def _compute(self, g, n1):
        n = n1 - 1  # number of spectator points
        Kout = slot_count(g, n1)
        # largest pole order among bracket factors
        Kf = [slot_count(h, m) for h in range(g + 1) for m in range(1, n1 + 2)
              if 2 * h - 2 + m > 0 and 2 * h - 2 + m < 2 * g - 2 + n1]
        P = max([2] + [2 * k for k in Kf])
        P = max(P, 2 * Kout)
        if P >= self.M:
            raise JetOrderError(f"W^({g})_{n1} needs jet order > {P}, have {self.M}")
        S = self.nram * Kout
        S_ext = S + P + 1
        E = 2 * P + 1
        shape_out = (self.nram * Kout,) + (S_ext,) * n
        total = np.zeros(shape_out, dtype=complex)

        def at_point(a):
            kap = self._kappa(a, Kout, P)  # (Kout, E)
            e = np.arange(-P, P + 1)
            # Kmat[k, e2, e3] = kappa_k[-1 - e2 - e3]
            idx = -1 - e[:, None] - e[None, :] + P
            valid = (idx >= 0) & (idx < E)
            Kmat = np.where(valid[None], kap[:, np.clip(idx, 0, E - 1)], 0)
            out = np.zeros((Kout,) + (S_ext,) * n, dtype=complex)
            pts = list(range(n))
            for h in range(g + 1):
                for r in range(n + 1):
                    for J in combinations(pts, r):
                        m1, m2 = r + 1, n - r + 1
                        h2 = g - h
                        if (h, m1) == (0, 1) or (h2, m2) == (0, 1):
                            continue
                        F = self._factor(a, h, m1, P, Kout, S_ext, bar=False)  # (E, S^r)
                        G = self._factor(a, h2, m2, P, Kout, S_ext, bar=True)  # (E, S^(n-r))
                        KF = np.tensordot(Kmat, F, axes=(1, 0))  # (Kout, E3, S^r)
                        prod = np.tensordot(KF, G, axes=(1, 0))  # (Kout, S^r, S^(n-r))
                        rest = [p for p in pts if p not in J]
                        order = list(J) + rest
                        inv = np.argsort(order)
                        out += np.transpose(prod, [0] + [1 + i for i in inv])
            if g >= 1:
                if (g - 1, n + 2) == (0, 2):
                    T = self.jets.T[a, a]
                    Bqq = np.zeros(E, dtype=complex)
                    Bqq[P - 2] = -0.25
                    for s in range(0, P + 1):
                        acc = 0
                        for m in range(s + 1):
                            acc += T[m, s - m] * (-1.0) ** (s - m)
                        Bqq[P + s] = -acc
                    # Res kappa_k(q) B(q, q-bar)
                    for k in range(Kout):
                        res = 0
                        for e1 in range(E):
                            e2 = -1 - (e1 - P)
                            if -P <= e2 <= P:
                                res += kap[k, e1] * Bqq[e2 + P]
                        out[k] += res
                else:
                    c = self.get(g - 1, n + 2)
                    L = self._L(a, c.K, P)
                    Lb = self._L(a, c.K, P, bar=True)
                    Cr = c.C
                    for ax in range(2, n + 2):
                        Cr = self._embed_axis(Cr, ax, c.K, Kout, S_ext)
                    A = np.tensordot(L.T, Cr, axes=(1, 0))  # (E2, s2, rest)
                    Bm = np.tensordot(Lb.T, A, axes=(1, 1))  # (E3, E2, rest)
                    out += np.tensordot(Kmat, Bm, axes=([1, 2], [1, 0]))
            return a, out

        # fill the store for every factor first so worker threads only read it
        for h in range(g + 1):
            for m in range(1, n1 + 2):
                if 0 < 2 * h - 2 + m < 2 * g - 2 + n1 and (h, m) != (0, 2):
                    self.get(h, m)
        workers = min(_threads(), self.nram)
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                results = list(ex.map(at_point, range(self.nram)))
        else:
            results = [at_point(a) for a in range(self.nram)]
        for a, out in results:
            total[a * Kout:(a + 1) * Kout] += out
        # split off overflow slots
        odd = 0.0
        C = total
        for ax in range(1, n + 1):
            sl = [slice(None)] * C.ndim
            sl[ax] = slice(S, None)
            if C.shape[ax] > S:
                odd = max(odd, float(np.max(np.abs(C[tuple(sl)]), initial=0.0)))
            sl[ax] = slice(0, S)
            C = C[tuple(sl)]
        scale = max(float(np.max(np.abs(C))), 1e-300)
        perms = list(permutations(range(n1)))
        asym = max(float(np.max(np.abs(C - np.transpose(C, p)))) for p in perms) / scale
        if asym > ASYM_TOL:
            raise NonSymmetricResultError(f"W^({g})_{n1} asymmetry {asym:.3g} exceeds {ASYM_TOL:g}")
        Csym = sum(np.transpose(C, p) for p in perms) / len(perms)
        return Correlator(g, n1, Kout, self.nram, Csym, asym, odd / scale, {"P": P})

    # -- evaluation -------------------------------------------------------------
    def _circle(self, a, rho):
        key = (a, round(rho, 15))
        if key not in self._circle_cache:
            fr = self.jets.frames[a]
            N = self.cauchy_n
            q = rho * np.exp(2j * np.pi * np.arange(N) / N)
            x, fib = fr.fiber_at(self.model, q)
            A = self.kernel.local_abel(fr, q) if isinstance(self.kernel, ThetaKernel) else None
            self._circle_cache[key] = (q, x, fib, A)
        return self._circle_cache[key]

    def raw_xi(self, p, J, rho_scale=0.6):
        """b_{a,j}(p) for j < J: Taylor coefficients of B(p, q_a)/dq_a (dx at p)."""
        xp, fp = complex(p[0]), np.asarray(p[1], dtype=complex)
        out = np.zeros((self.nram, J), dtype=complex)
        Ap = None
        if isinstance(self.kernel, ThetaKernel):
            Ap = self.kernel.abel(xp, fp)
        for a, fr in enumerate(self.jets.frames):
            qp = np.sqrt(abs(xp - fr.point.x))
            rho = min(rho_scale * fr.radius, 0.5 * qp)
            q, x, fib, A = self._circle(a, rho)
            if Ap is not None:
                vals = self.kernel.from_abel(Ap[None, :], A, np.full(len(q), xp), fp[:, None], x, fib)
            else:
                vals = self.kernel(np.full(len(q), xp), np.repeat(fp[:, None], len(q), 1), x, fib)
            vals = vals * 2 * q
            c = np.fft.fft(vals) / len(q)
            out[a] = c[:J] / rho ** np.arange(J)
        return out

    def xi(self, p, K):
        return self.raw_xi(p, 2 * K)[:, 0::2]

    def evaluate(self, g, n, points):
        c = self.get(g, n)
        xis = [self.xi(p, c.K) for p in points]
        return c.evaluate(xis)

    # -- cycle integrals of the basis -----------------------------------------
    def xi_b_integrals(self, K):
        """b-cycle integrals of xi_{a,k}: 2 pi i [q^{2k}] omega_i at a; (g, nram, K)."""
        om = self.jets.omega
        if 2 * (K - 1) >= om.shape[2]:
            raise JetOrderError("omega jets too short")
        return 2j * np.pi * np.transpose(om[:, :, 0:2 * K:2], (1, 0, 2))

    def xi_a_integrals(self, K, rho_scale=0.4):
        """a-cycle integrals of xi_{a,k} computed numerically (should vanish)."""
        g = self.pd.genus
        out = np.zeros((g, self.nram, K), dtype=complex)
        for a, fr in enumerate(self.jets.frames):
            rho = rho_scale * fr.radius
            q, x, fib, _ = self._circle(a, rho)
            vals = np.zeros((g, len(q)), dtype=complex)
            for t in range(len(q)):
                x2, f2 = x[t], fib[:, t]
                ai, _ = self.pd.cycle_integrals(lambda xx, ff: self.kernel(xx, ff, x2, f2), singularities=[x2])
                vals[:, t] = ai * 2 * q[t]
            c = np.fft.fft(vals, axis=1) / len(q)
            out[:, a, :] = c[:, 0:2 * K:2] / rho ** np.arange(0, 2 * K, 2)
        return out

    def xi_b_integrals_numeric(self, K, rho_scale=0.4):
        g = self.pd.genus
        out = np.zeros((g, self.nram, K), dtype=complex)
        for a, fr in enumerate(self.jets.frames):
            rho = rho_scale * fr.radius
            q, x, fib, _ = self._circle(a, rho)
            vals = np.zeros((g, len(q)), dtype=complex)
            for t in range(len(q)):
                x2, f2 = x[t], fib[:, t]
                _, bi = self.pd.cycle_integrals(lambda xx, ff: self.kernel(xx, ff, x2, f2), singularities=[x2])
                vals[:, t] = bi * 2 * q[t]
            c = np.fft.fft(vals, axis=1) / len(q)
            out[:, a, :] = c[:, 0:2 * K:2] / rho ** np.arange(0, 2 * K, 2)
        return out


# ---------------------------------------------------------------------------
# module-level operations


def recursion_base(kernel):
    """W^(0)_1 (identically zero) and W^(0)_2 (the Bergman kernel)."""
    def w01(p):
        return 0j

    def w02(p1, p2):
        return kernel(complex(p1[0]), np.asarray(p1[1]), complex(p2[0]), np.asarray(p2[1]))

    return w01, w02


def recurse(engine, g, n):
    return engine.get(g, n)


def w03_eval(engine, p, p1, p2):
    """Closed form: sum_a xi_{a,0}(p) xi_{a,0}(p1) xi_{a,0}(p2) / (2 y'(a))."""
    y1 = engine.jets.y[:, 1]
    x = [engine.xi(pt, 1)[:, 0] for pt in (p, p1, p2)]
    return complex(np.sum(x[0] * x[1] * x[2] / (2 * y1)))


def w04_eval(engine, p, p1, p2, p3):
    """Closed form from first-order local data.

    sum_a [ (1/(4 y1^2)) sum_s xi1(p_s) prod_{t != s} xi0(p_t)
            - 3 y3 / (4 y1^3) prod_t xi0(p_t) ]
    + sum over the three pairings of sum_{a,b} T^{ab}_{00} P_a P_b,
    with P_a(u, v) = xi0_a(u) xi0_a(v) / (2 y1_a) and y3 = y'''(a)/6.
    """
    y1 = engine.jets.y[:, 1]
    y3 = engine.jets.y[:, 3]
    pts = (p, p1, p2, p3)
    xs = [engine.xi(pt, 2) for pt in pts]
    x0 = [v[:, 0] for v in xs]
    x1 = [v[:, 1] for v in xs]
    total = 0j
    prod_all = x0[0] * x0[1] * x0[2] * x0[3]
    for s in range(4):
        others = np.ones_like(y1)
        for t in range(4):
            if t != s:
                others = others * x0[t]
        total += np.sum(x1[s] * others / (4 * y1 ** 2))
    total -= np.sum(3 * y3 * prod_all / (4 * y1 ** 3))
    T00 = engine.jets.T[:, :, 0, 0]
    for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        Pa = x0[i] * x0[j] / (2 * y1)
        Pb = x0[k] * x0[l] / (2 * y1)
        total += Pa @ T00 @ Pb
    return complex(total)


def residue_check(engine, corr, points, slot=0, radius_scale=0.3, n=64):
    """Small-circle integrals of W around each ramification point in one slot.

    Returns the largest |integral| / (2 pi max|W on circle| radius) over
    ramification points; zero residues give round-off level values.
    """
    others = [engine.xi(p, corr.K) for i, p in enumerate(points) if i != slot]
    worst = 0.0
    for a, fr in enumerate(engine.jets.frames):
        r = radius_scale * fr.radius
        q = r * np.exp(2j * np.pi * np.arange(n) / n)
        x, fib = fr.fiber_at(engine.model, q)
        vals = np.zeros(n, dtype=complex)
        for t in range(n):
            xi = engine.xi((x[t], fib[:, t]), corr.K)
            C = np.moveaxis(corr.C, slot, 0)
            v = np.tensordot(C, xi.reshape(-1), axes=(0, 0))
            for o in others:
                v = np.tensordot(v, o.reshape(-1), axes=(0, 0))
            vals[t] = v * 2 * q[t]  # dq-coefficient
        integral = np.mean(vals * q) * 2j * np.pi  # sum f dq over the circle
        scale = max(float(np.max(np.abs(vals))) * r * 2 * np.pi, 1e-300)
        worst = max(worst, abs(integral) / scale)
    return worst


def a_cycle_check(engine, corr, points):
    """a-cycle integrals of W in its first slot, one per a-cycle."""
    A = engine.xi_a_integrals(corr.K)  # (g, nram, K)
    others = [engine.xi(p, corr.K) for p in points]
    out = []
    for i in range(A.shape[0]):
        v = np.tensordot(corr.C, A[i].reshape(-1), axes=(0, 0))
        for o in others:
            v = np.tensordot(v, o.reshape(-1), axes=(0, 0))
        out.append(complex(v))
    return np.array(out)


def b_contraction(engine, corr, points, slot_integrals=None):
    """b-cycle integrals of W in its first slot (semi-analytic), one per b-cycle."""
    Bi = engine.xi_b_integrals(corr.K) if slot_integrals is None else slot_integrals
    others = [engine.xi(p, corr.K) for p in points]
    out = []
    for i in range(Bi.shape[0]):
        v = np.tensordot(corr.C, Bi[i].reshape(-1), axes=(0, 0))
        for o in others:
            v = np.tensordot(v, o.reshape(-1), axes=(0, 0))
        out.append(complex(v))
    return np.array(out)


def full_b_contraction(engine, corr):
    """Integral of W over b_{i1} x ... x b_{in}: tensor (g,)*n."""
    Bi = engine.xi_b_integrals(corr.K).reshape(engine.pd.genus, -1)  # (g, S)
    out = corr.C
    for _ in range(corr.n):
        out = np.tensordot(out, Bi, axes=(0, 1))
    return out
