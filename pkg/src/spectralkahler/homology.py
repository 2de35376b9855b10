"""Sheet-tracked paths and a symplectic basis of 1-cycles.

Paths live in the x-plane and are made of straight segments and circular
arcs.  Tracking a path continues the fiber (the vector of square-root
values) node by node; the same discretisation is reused by the quadrature
in :mod:`spectralkahler.periods`, so every integral is taken along exactly
the sheets that were tracked.

Candidate cycles are "dumbbells": a segment between two branch points,
closed by small circles around each end.  They are deduplicated by their
periods, intersected pairwise (signed crossings on matching sheets) and
reduced over the integers to a standard symplectic basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import (
    ContinuationAmbiguityError,
    CrossingDegeneracyError,
    FrameTransportError,
    PoleOnPathError,
    RankError,
)
from .quadrature import ORDER, gauss_legendre

MAX_DEPTH = 40
DEDUP_TOL = 1e-9


# ---------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class Line:
    z0: complex
    z1: complex

    def point(self, s):
        return self.z0 + (self.z1 - self.z0) * s

    def deriv(self, s):
        return np.full(np.shape(s), self.z1 - self.z0, dtype=complex)

    @property
    def start(self):
        return complex(self.z0)

    @property
    def end(self):
        return complex(self.z1)

    @property
    def length(self):
        return abs(self.z1 - self.z0)

    def reversed(self):
        return Line(self.z1, self.z0)

    def translated(self, eps):
        return Line(self.z0 + eps, self.z1 + eps)

    def to_json(self):
        return {"type": "line", "z0": [self.z0.real, self.z0.imag], "z1": [self.z1.real, self.z1.imag]}


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    phi0: float
    phi1: float  # counter-clockwise when phi1 > phi0

    def point(self, s):
        phi = self.phi0 + (self.phi1 - self.phi0) * s
        return self.center + self.radius * np.exp(1j * phi)

    def deriv(self, s):
        return 1j * (self.phi1 - self.phi0) * (self.point(s) - self.center)

    @property
    def start(self):
        return complex(self.point(0.0))

    @property
    def end(self):
        return complex(self.point(1.0))

    @property
    def length(self):
        return abs(self.phi1 - self.phi0) * self.radius

    def reversed(self):
        return Arc(self.center, self.radius, self.phi1, self.phi0)

    def translated(self, eps):
        return Arc(self.center + eps, self.radius, self.phi0, self.phi1)

    def to_json(self):
        c = complex(self.center)
        return {"type": "arc", "center": [c.real, c.imag], "radius": self.radius,
                "phi0": self.phi0, "phi1": self.phi1}


def segment_from_json(d):
    if d["type"] == "line":
        return Line(complex(*d["z0"]), complex(*d["z1"]))
    if d["type"] == "arc":
        return Arc(complex(*d["center"]), float(d["radius"]), float(d["phi0"]), float(d["phi1"]))
    raise ValueError(f"unknown segment type {d['type']!r}")


def _point_segment_distance(p, a, b):
    """Distance from points ``p`` (array) to the segment a-b."""
    d = b - a
    if abs(d) == 0:
        return np.abs(p - a)
    t = np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(p - (a + t * d))


def polyline_distance(points, verts):
    """Distance from each of ``points`` to the polyline through ``verts``."""
    p = np.atleast_1d(np.asarray(points, dtype=complex))[:, None]
    a, b = verts[None, :-1], verts[None, 1:]
    d = b - a
    dd = np.abs(d) ** 2
    t = np.clip(((p - a) * np.conj(d)).real / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    return np.abs(p - (a + t * d)).min(axis=1)


# ---------------------------------------------------------------------------
# tracking


@dataclass
class Track:
    """Discretisation of a path with tracked fibers at Gauss-Legendre nodes.

    ``x``, ``jac`` have shape (nsub, n); the quadrature weight of node j in
    subsegment i is ``jac[i, j] * w[j]``.  ``fib`` has shape (ncomp, nsub, n).
    ``verts``/``vfib`` is a polyline through the tracked path (every fourth
    node) used for crossing counts.
    """

    x: np.ndarray
    jac: np.ndarray
    fib: np.ndarray
    start_fiber: np.ndarray
    end_fiber: np.ndarray
    verts: np.ndarray
    vfib: np.ndarray
    seg_index: np.ndarray

    @property
    def weights(self):
        _, w = gauss_legendre(self.x.shape[1])
        return self.jac * w

    def integrate(self, values):
        """Integral of nodal values of shape (..., nsub, n)."""
        return np.sum(values * self.weights, axis=(-2, -1))


def _track_points(model, xs, fiber, polys, dpolys):
    """Continue ``fiber`` through the points ``xs`` (first point excluded).

    Returns the fibers at all points or ``None`` when a step fails the
    acceptance test |new - predicted| < gap/4.
    """
    ncomp = len(polys)
    roots = [np.sqrt(np.polynomial.polynomial.polyval(xs, p)).tolist() for p in polys]
    dvals = [np.polynomial.polynomial.polyval(xs, dp).tolist() for dp in dpolys]
    xl = np.asarray(xs).tolist()
    out = np.empty((ncomp, len(xs)), dtype=complex)
    cur = [complex(v) for v in fiber]
    out[:, 0] = cur
    for c in range(ncomp):
        rc, dc = roots[c], dvals[c]
        f = cur[c]
        col = [f]
        for j in range(1, len(xl)):
            pred = f + dc[j - 1] / (2 * f) * (xl[j] - xl[j - 1])
            r = rc[j]
            new = r if abs(r - pred) <= abs(r + pred) else -r
            if abs(new - pred) >= 0.5 * abs(r):
                return None
            col.append(new)
            f = new
        out[c] = col
    return out


def track_path(model, segments, start_fiber, singularities=(), n=ORDER, min_gap=1e-9, shrink=1.0):
    """Track ``start_fiber`` along ``segments`` and build the quadrature grid.

    ``singularities`` are additional x-locations (besides branch points) that
    integrands may be singular at; subsegments are kept shorter than their
    distance to every singular point (divided by ``shrink``) so the Gauss
    rule converges spectrally.
    """
    t, _ = gauss_legendre(n)
    polys = [np.asarray(p) for p in model.sqrt_polys]
    dpolys = [np.polynomial.polynomial.polyder(p) for p in polys]
    sing = np.concatenate([np.asarray(model.branch_points), np.asarray(singularities, dtype=complex).ravel()])
    start_fiber = np.asarray(start_fiber, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(sing)))) if len(sing) else 1.0

    xs_all, jac_all, fib_all, seg_all = [], [], [], []
    verts, vfib = [], []
    cur = start_fiber.copy()
    x_cur = segments[0].start
    cur = model.nearest_fiber(x_cur, cur)
    verts.append(x_cur)
    vfib.append(cur.copy())
    for si, seg in enumerate(segments):
        if abs(seg.start - x_cur) > 1e-9 * scale:
            raise ValueError("path segments are not contiguous")
        stack = [(0.0, 1.0, 0)]
        while stack:
            s0, s1, depth = stack.pop()
            if depth > MAX_DEPTH:
                raise ContinuationAmbiguityError(
                    f"continuation stalled near x = {seg.point(s0):.6g} (path too close to a branch point)")
            sm, hs = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
            nodes_s = sm + hs * t
            nodes = seg.point(nodes_s)
            probe = np.concatenate([[seg.point(s0)], nodes, [seg.point(s1)]])
            half = 0.5 * np.sum(np.abs(np.diff(probe)))
            if len(sing):
                dist = polyline_distance(sing, probe).min()
                if dist < 1e-12 * scale:
                    raise PoleOnPathError(f"singular point on the path near x = {seg.point(sm):.6g}")
                if dist < half * shrink:
                    stack.append((sm, s1, depth + 1))
                    stack.append((s0, sm, depth + 1))
                    continue
            pts = np.concatenate([[x_cur], nodes, [seg.point(s1)]])
            if np.min(model.sheet_gap(pts[1:])) < min_gap:
                raise ContinuationAmbiguityError("path passes through a branch point")
            fibs = _track_points(model, pts, cur, polys, dpolys)
            if fibs is None:
                stack.append((sm, s1, depth + 1))
                stack.append((s0, sm, depth + 1))
                continue
            xs_all.append(nodes)
            jac_all.append(seg.deriv(nodes_s) * hs)
            fib_all.append(fibs[:, 1:-1])
            seg_all.append(si)
            for k in range(4, n, 4):
                verts.append(nodes[k])
                vfib.append(fibs[:, 1 + k])
            cur = fibs[:, -1]
            x_cur = complex(pts[-1])
            verts.append(x_cur)
            vfib.append(cur.copy())
    return Track(
        x=np.array(xs_all),
        jac=np.array(jac_all),
        fib=np.stack(fib_all, axis=1),
        start_fiber=np.asarray(vfib[0]),
        end_fiber=cur,
        verts=np.array(verts),
        vfib=np.array(vfib).T,
        seg_index=np.array(seg_all),
    )


def continue_sheet(model, path, start):
    """Continue fibers along ``path`` (segment list).

    ``start`` is either a fiber vector or an integer sheet label (index into
    :meth:`CurveModel.fiber_candidates` at the start point).  Returns
    ``(end_sheet, end_fiber, track)``; ``track.vfib`` holds sampled fibers.
    """
    x0 = path[0].start
    if np.isscalar(start) and not isinstance(start, complex):
        start = model.fiber_candidates(x0)[int(start)]
    tr = track_path(model, path, start)
    xe = path[-1].end
    cands = model.fiber_candidates(xe)
    end_sheet = int(np.argmin([np.max(np.abs(c - tr.end_fiber)) for c in cands]))
    return end_sheet, tr.end_fiber, tr


def sheet_label(model, x, fiber):
    cands = model.fiber_candidates(x)
    return int(np.argmin([np.max(np.abs(c - np.asarray(fiber))) for c in cands]))


# ---------------------------------------------------------------------------
# cycles


@dataclass
class Cycle:
    segments: list
    start_fiber: np.ndarray
    label: str = ""
    repeat: int = 1
    _tracks: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def path(self):
        return list(self.segments) * self.repeat

    def track(self, model, singularities=(), shrink=1.0):
        key = (id(model), tuple(np.round(np.asarray(singularities, dtype=complex).ravel(), 14)), shrink)
        tr = self._tracks.get(key)
        if tr is None:
            tr = track_path(model, self.path, self.start_fiber, singularities, shrink=shrink)
            self._tracks[key] = tr
        return tr

    def reversed(self):
        segs = [s.reversed() for s in self.segments[::-1]]
        return Cycle(segs, self.start_fiber, self.label + "^-1", self.repeat)

    def translated(self, eps, model):
        segs = [s.translated(eps) for s in self.segments]
        fib = model.nearest_fiber(segs[0].start, self.start_fiber)
        return Cycle(segs, fib, self.label, self.repeat)

    def to_json(self):
        return {
            "label": self.label,
            "repeat": self.repeat,
            "start_fiber": [[complex(v).real, complex(v).imag] for v in self.start_fiber],
            "segments": [s.to_json() for s in self.segments],
        }

    @classmethod
    def from_json(cls, d):
        fib = np.array([complex(*v) for v in d["start_fiber"]])
        return cls([segment_from_json(s) for s in d["segments"]], fib, d.get("label", ""), d.get("repeat", 1))


def _closed(model, tr, x):
    gap = float(model.sheet_gap(np.array([x]))[0])
    return np.max(np.abs(tr.end_fiber - tr.start_fiber)) < gap / 4


def dumbbell(e1, e2, r):
    """Segments of a loop around e1 and e2: out along the segment, around e2,
    back, around e1 (both circles counter-clockwise)."""
    u = (e2 - e1) / abs(e2 - e1)
    s0, s1 = e1 + r * u, e2 - r * u
    a2 = float(np.angle(-u))
    a1 = float(np.angle(u))
    return [Line(s0, s1), Arc(e2, r, a2, a2 + 2 * np.pi), Line(s1, s0), Arc(e1, r, a1, a1 + 2 * np.pi)]


def closing_cycle(model, segments, fiber, label=""):
    """Repeat ``segments`` until the lift closes; ``None`` if it never does."""
    x0 = segments[0].start
    for rep in range(1, model.nsheets + 1):
        c = Cycle(segments, fiber, label, rep)
        tr = c.track(model)
        if _closed(model, tr, x0):
            return c
    return None


def _loop_radius(points):
    pts = np.asarray(points)
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    return 0.25 * float(d.min())


def candidate_cycles(model, radius=None):
    """Dumbbell loops on every starting sheet for all admissible pairs."""
    pts = np.asarray(model.branch_points)
    r = _loop_radius(pts) if radius is None else radius
    out = []
    for i, j in combinations(range(len(pts)), 2):
        e1, e2 = pts[i], pts[j]
        others = np.delete(pts, [i, j])
        if len(others) and _point_segment_distance(others, e1, e2).min() < 1.5 * r:
            continue
        segs = dumbbell(e1, e2, r)
        x0 = segs[0].start
        for sheet, fib in enumerate(model.fiber_candidates(x0)):
            c = closing_cycle(model, segs, fib, f"D({i},{j})s{sheet}")
            if c is not None:
                out.append(c)
    return out, r


def raw_periods(model, cycles):
    """Periods of the raw holomorphic basis: array (ncycles, g)."""
    out = []
    for c in cycles:
        tr = c.track(model)
        vals = np.array(model.holomorphic_basis(tr.x, tr.fib))
        out.append(tr.integrate(vals))
    return np.array(out).reshape(len(cycles), model.genus)


def deduplicate(cycles, periods, tol=DEDUP_TOL):
    """Keep one representative per homology class up to sign, drop nulls."""
    scale = max(1.0, float(np.max(np.abs(periods)))) if periods.size else 1.0
    keep, kept = [], []
    for c, p in zip(cycles, periods):
        if np.max(np.abs(p), initial=0.0) < tol * scale:
            continue
        if any(np.max(np.abs(p - q)) < tol * scale or np.max(np.abs(p + q)) < tol * scale for q in kept):
            continue
        keep.append(c)
        kept.append(p)
    return keep, np.array(kept)


# ---------------------------------------------------------------------------
# intersections


def _crossings(model, tr1, tr2, tol=1e-9):
    """Signed crossing count between two tracked polylines on matching sheets."""
    P0, P1 = tr1.verts[:-1], tr1.verts[1:]
    Q0, Q1 = tr2.verts[:-1], tr2.verts[1:]
    d1 = P1 - P0
    d2 = Q1 - Q0
    # bounding-box prefilter
    lo1 = np.minimum(P0.real, P1.real), np.minimum(P0.imag, P1.imag)
    hi1 = np.maximum(P0.real, P1.real), np.maximum(P0.imag, P1.imag)
    lo2 = np.minimum(Q0.real, Q1.real), np.minimum(Q0.imag, Q1.imag)
    hi2 = np.maximum(Q0.real, Q1.real), np.maximum(Q0.imag, Q1.imag)
    mask = ((lo1[0][:, None] <= hi2[0][None, :]) & (lo2[0][None, :] <= hi1[0][:, None])
            & (lo1[1][:, None] <= hi2[1][None, :]) & (lo2[1][None, :] <= hi1[1][:, None]))
    ii, jj = np.nonzero(mask)
    if len(ii) == 0:
        return 0
    a, b = d1[ii], d2[jj]
    w = Q0[jj] - P0[ii]
    cross = (np.conj(a) * b).imag
    total = 0
    for k in range(len(ii)):
        c = cross[k]
        if abs(c) < tol * abs(a[k]) * abs(b[k]):
            # parallel; overlapping collinear pieces are degenerate
            if abs((np.conj(a[k]) * w[k]).imag) < tol * abs(a[k]) * (abs(w[k]) + abs(a[k])):
                raise CrossingDegeneracyError("collinear overlapping path pieces")
            continue
        s = (w[k].real * b[k].imag - w[k].imag * b[k].real) / c
        u = (w[k].real * a[k].imag - w[k].imag * a[k].real) / c
        if -tol < s < 1 + tol and -tol < u < 1 + tol:
            if min(abs(s), abs(s - 1), abs(u), abs(u - 1)) < tol:
                raise CrossingDegeneracyError("crossing at a polyline vertex")
            i, j = ii[k], jj[k]
            xc = P0[i] + s * a[k]
            f1 = model.nearest_fiber(xc, tr1.vfib[:, i] + s * (tr1.vfib[:, i + 1] - tr1.vfib[:, i]))
            f2 = model.nearest_fiber(xc, tr2.vfib[:, j] + u * (tr2.vfib[:, j + 1] - tr2.vfib[:, j]))
            gap = float(model.sheet_gap(np.array([xc]))[0])
            if np.max(np.abs(f1 - f2)) < gap / 4:
                total += 1 if c > 0 else -1
    return total


_EPS_DIRS = (0.6180339887 + 0.3819660113j, -0.2763932023 + 0.7236067977j,
             0.5257311121 - 0.8506508084j, -0.7071067812 - 0.2928932188j)


def intersection_number(model, c1, c2, eps_scale, retries=len(_EPS_DIRS), _cache=None):
    """c1 . c2 with +1 when c2 crosses c1 from its right to its left."""
    cache = {} if _cache is None else _cache
    last = None
    for k in range(retries):
        key = (id(c2), k)
        if key not in cache:
            eps = eps_scale * _EPS_DIRS[k] / abs(_EPS_DIRS[k])
            cache[key] = c2.translated(eps, model).track(model)
        try:
            return _crossings(model, c1.track(model), cache[key])
        except CrossingDegeneracyError as exc:
            last = exc
    raise CrossingDegeneracyError(f"intersection degenerate after {retries} perturbations: {last}")


def intersection_matrix(model, cycles, eps_scale):
    n = len(cycles)
    M = np.zeros((n, n), dtype=np.int64)
    cache = {}
    for i in range(n):
        for j in range(i + 1, n):
            v = intersection_number(model, cycles[i], cycles[j], eps_scale, _cache=cache)
            M[i, j], M[j, i] = v, -v
    return M


# ---------------------------------------------------------------------------
# integer symplectic reduction


def standard_symplectic(g):
    J = np.zeros((2 * g, 2 * g), dtype=np.int64)
    J[:g, g:] = np.eye(g, dtype=np.int64)
    J[g:, :g] = -np.eye(g, dtype=np.int64)
    return J


def _euclid_step(vecs, i, j, pij, pair):
    vi, vj = vecs[i], vecs[j]
    changed = False
    for k in range(len(vecs)):
        if k in (i, j):
            continue
        r = pair(vecs[k], vj)
        c = int(round(r / pij))
        changed |= r - c * pij != 0
        vecs[k] = vecs[k] - c * vi
        r = pair(vecs[k], vi)
        c = int(round(r / -pij))
        changed |= r + c * pij != 0
        vecs[k] = vecs[k] + c * vj
    return changed


def symplectic_reduction(M):
    """Integer vectors a_1..a_g, b_1..b_g (rows of U) with U M U^T standard.

    Symplectic Gram-Schmidt over the integers: the pivot pair is the one with
    the smallest nonzero |pairing| (ties broken by index order); when that
    minimum exceeds one, Euclidean steps reduce it.  Vectors in the radical
    are dropped.  Raises :class:`RankError` if the lattice spanned by the
    inputs is not unimodular.
    """
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    vecs = [np.array([int(i == j) for j in range(n)], dtype=object) for i in range(n)]

    def pair(u, v):
        return int(u @ M @ v)

    a_list, b_list = [], []
    for _ in range(10 * n + 10):
        P = np.array([[pair(u, v) for v in vecs] for u in vecs], dtype=object).reshape(len(vecs), len(vecs))
        alive = [k for k in range(len(vecs)) if any(P[k, m] != 0 for m in range(len(vecs)))]
        vecs = [vecs[k] for k in alive]
        if not vecs:
            break
        P = P[np.ix_(alive, alive)]
        pairs = sorted((abs(P[i, j]), i, j) for i in range(len(vecs))
                       for j in range(i + 1, len(vecs)) if P[i, j] != 0)
        d, i, j = pairs[0]
        if d == 1:
            a = vecs[i]
            b = vecs[j] * int(P[i, j])  # so that <a, b> = +1
            a_list.append(a)
            b_list.append(b)
            rest = []
            for k, w in enumerate(vecs):
                if k in (i, j):
                    continue
                rest.append(w - pair(w, b) * a + pair(w, a) * b)
            vecs = rest
            continue
        # Euclid: reduce pairings with the pivot pair modulo their pairing
        for d, i, j in pairs:
            if _euclid_step(vecs, i, j, int(P[i, j]), pair):
                break
        else:
            raise RankError(f"intersection lattice has index > 1 (minimal pairing {pairs[0][0]})")
    else:
        raise RankError("symplectic reduction did not terminate")
    U = np.array(a_list + b_list, dtype=object)
    return np.array(U, dtype=np.int64).reshape(len(U), n)


# ---------------------------------------------------------------------------
# frames


@dataclass
class SymplecticFrame:
    """Basis cycles and the integer transform to a symplectic basis.

    ``cycles`` are tracked primitive loops, ``M`` their intersection matrix
    and ``U`` the integer matrix whose rows express a_1..a_g, b_1..b_g in
    terms of ``cycles``; ``U M U^T`` is the standard symplectic form.
    """

    cycles: list
    M: np.ndarray
    U: np.ndarray
    genus: int
    radius: float
    candidates_total: int = 0
    extras: dict = field(default_factory=dict)

    @cached_property
    def J(self):
        return standard_symplectic(self.genus)

    @property
    def unimodular(self):
        return self.U.shape[0] == self.U.shape[1] and abs(round(np.linalg.det(self.U))) == 1

    def check(self):
        G = self.U @ self.M @ self.U.T
        return bool(np.array_equal(G, self.J))

    def combine(self, per_cycle):
        """Map per-cycle integrals (ncycles, ...) to (a-part, b-part)."""
        v = np.tensordot(self.U.astype(float), np.asarray(per_cycle), axes=(1, 0))
        return v[: self.genus], v[self.genus:]

    def transport(self, model):
        """Same x-plane paths on a nearby curve, start fibers by continuity."""
        out = []
        for c in self.cycles:
            x0 = c.segments[0].start
            fib = model.nearest_fiber(x0, c.start_fiber)
            nc = Cycle(list(c.segments), fib, c.label, c.repeat)
            try:
                tr = nc.track(model)
            except (ContinuationAmbiguityError, PoleOnPathError) as exc:
                raise FrameTransportError(f"cycle {c.label} cannot be transported: {exc}") from exc
            if not _closed(model, tr, x0):
                raise FrameTransportError(f"cycle {c.label} no longer closes on the deformed curve")
            out.append(nc)
        return SymplecticFrame(out, self.M, self.U, self.genus, self.radius, self.candidates_total, dict(self.extras))

    def to_json(self):
        return {
            "genus": self.genus,
            "cycles": [c.to_json() for c in self.cycles],
            "intersection_matrix": self.M.tolist(),
            "U": self.U.tolist(),
        }


def _real_period_rank(periods, tol=1e-8):
    if len(periods) == 0:
        return 0
    R = np.hstack([periods.real, periods.imag])
    s = np.linalg.svd(R, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def _select_basis(periods, M, g):
    """Greedy choice of 2g candidates forming a Z-basis (det of M block = 1)."""
    order = list(range(len(periods)))
    chosen = []
    for k in order:
        if _real_period_rank(periods[chosen + [k]]) == len(chosen) + 1:
            chosen.append(k)
        if len(chosen) == 2 * g:
            break
    if len(chosen) < 2 * g:
        return None
    sub = M[np.ix_(chosen, chosen)].astype(float)
    if abs(round(np.linalg.det(sub))) == 1:
        return chosen
    # one round of single swaps
    for pos in range(2 * g):
        for k in order:
            if k in chosen:
                continue
            trial = chosen.copy()
            trial[pos] = k
            if _real_period_rank(periods[trial]) < 2 * g:
                continue
            if abs(round(np.linalg.det(M[np.ix_(trial, trial)].astype(float)))) == 1:
                return trial
    return None


def build_symplectic_frame(model, hints=None, radius=None):
    """Symplectic basis of H_1 from dumbbell candidates (plus optional hints)."""
    g = model.genus
    if g == 0:
        return SymplecticFrame([], np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64), 0, 0.0)
    cands, r = candidate_cycles(model, radius)
    if hints:
        cands = list(hints) + cands
    per = raw_periods(model, cands)
    uniq, uper = deduplicate(cands, per)
    if _real_period_rank(uper) < 2 * g:
        raise RankError(f"candidate cycles span rank {_real_period_rank(uper)} < {2 * g}")
    eps = 0.2 * r
    chosen_idx = None
    M_all = intersection_matrix(model, uniq, eps)
    chosen_idx = _select_basis(uper, M_all, g)
    if chosen_idx is not None:
        cyc = [uniq[k] for k in chosen_idx]
        M = M_all[np.ix_(chosen_idx, chosen_idx)]
        U = symplectic_reduction(M)
    else:
        U_all = symplectic_reduction(M_all)
        used = np.nonzero(np.any(U_all != 0, axis=0))[0]
        cyc = [uniq[k] for k in used]
        M = M_all[np.ix_(used, used)]
        U = U_all[:, used]
    if U.shape[0] != 2 * g:
        raise RankError(f"symplectic reduction found {U.shape[0] // 2} pairs, expected {g}")
    frame = SymplecticFrame(cyc, M, U, g, r, len(cands))
    if not frame.check():
        raise RankError("reduced intersection form is not standard symplectic")
    return frame
