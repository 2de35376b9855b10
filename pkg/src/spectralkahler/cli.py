"""Command-line driver: config ingestion, pipeline orchestration, reports.

    spectralkahler periods  --config run.json
    spectralkahler recurse  --config run.json --g 0 --n 3
    spectralkahler validate --config run.json --suite cubic
    spectralkahler report   --config run.json --out report.json --emit-csv slices/

Exit codes: 0 when every check passes, 1 when a numerical check fails
(the failing check is named on stderr), 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from importlib import resources
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import bergman as bg
from . import family as fam
from . import skgeom as sk
from .curves import HyperellipticCurve, TowerCurve
from .errors import ConfigError, SpectralKahlerError
from .homology import Cycle, build_symplectic_frame
from .periods import j_invariant, period_data, polyline_segments
from .recursion import RecursionEngine, a_cycle_check, residue_check, w03_eval, w04_eval

DEFAULT_TOL = {
    "tau_symmetry": 1e-10,
    "bergman_a_periods": 1e-9,
    "bergman_b_identity": 1e-8,
    "kernel_agreement": 1e-8,
    "cubic": 1e-6,
    "quartic": 1e-4,
    "reparametrization": 1e-8,
    "rauch": 1e-5,
    "variational": 1e-4,
    "a_cycle": 1e-9,
    "recursion": 1e-8,
    "identities": 1e-8,
    "prepotential": 1e-6,
}
SUITES = ("periods", "bergman", "cubic", "quartic", "rauch", "variational", "recursion", "tower")


# ---------------------------------------------------------------------------
# config


def _schema():
    return json.loads(resources.files("spectralkahler").joinpath("schemas/config.schema.json").read_text())


def _cx(pair):
    return complex(pair[0], pair[1])


def load_config(path):
    import jsonschema

    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        # report the deepest error on the first offending path
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(err.message, err.absolute_path)
    return cfg


def fixture_path(name):
    return str(resources.files("spectralkahler").joinpath(f"fixtures/{name}.json"))


def build_model(curve):
    try:
        if curve["variant"] == "hyperelliptic":
            return HyperellipticCurve([_cx(c) for c in curve["Q"]])
        return TowerCurve([_cx(c) for c in curve["f"]], [_cx(c) for c in curve["alpha"]], [_cx(c) for c in curve["R"]])
    except SpectralKahlerError as exc:
        raise ConfigError(str(exc), ("curve",)) from exc


# ---------------------------------------------------------------------------
# pipeline


class Pipeline:
    """Lazily computed curve data shared by all requested outputs."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.model = build_model(cfg["curve"])
        defaults = dict(DEFAULT_TOL)
        if self.model.genus >= 2:
            defaults["quartic"] = 5e-4  # second differences on a 2-d grid are noisier
        self.tol = {**defaults, **cfg.get("tolerances", {})}
        self.order = cfg.get("jet_order")
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def frame(self):
        def make():
            hints = self.cfg.get("frame_hints", {})
            cycles = []
            for k, h in enumerate(hints.get("cycles", [])):
                verts = [_cx(v) for v in h["vertices"]]
                fib = self.model.fiber_candidates(verts[0])[h["sheet"] % self.model.nsheets]
                cycles.append(Cycle(polyline_segments(verts), fib, f"hint{k}"))
            return build_symplectic_frame(self.model, cycles or None, hints.get("radius"))
        return self._get("frame", make)

    @property
    def pd(self):
        return self._get("pd", lambda: period_data(self.model, self.frame))

    @property
    def kernel(self):
        return self._get("kernel", lambda: bg.make_kernel(self.model, self.pd))

    @property
    def jets(self):
        return self._get("jets", lambda: bg.bergman_jets(self.model, self.pd, self.kernel, order=self.order))

    @property
    def engine(self):
        return self._get("engine", lambda: RecursionEngine(self.jets, self.kernel, self.model, self.pd))

    @property
    def chart(self):
        steps = self.cfg.get("fd_steps", {})
        return self._get("chart", lambda: fam.FamilyChart(self.model, self.frame, self.pd,
                                                           steps.get("first", fam.H1), steps.get("second", fam.H2)))

    def points(self, n=5):
        pts = self.cfg.get("points")
        if pts:
            out = [(_cx(p["x"]), self.model.fiber_candidates(_cx(p["x"]))[p["sheet"] % self.model.nsheets]) for p in pts]
        else:
            out = default_points(self.model, n)
        if len(out) < n:
            out += default_points(self.model, n)[len(out):]
        return out


def default_points(model, n=5):
    """Deterministic sample points away from the branch points."""
    bp = np.asarray(model.branch_points)
    centre = complex(np.mean(bp))
    spread = max(float(np.max(np.abs(bp - centre))), 1.0)
    offsets = [0.31 + 0.62j, -0.71 + 0.23j, 0.93 - 0.51j, -0.27 - 0.88j, 0.58 + 0.14j, -0.45 + 0.77j, 1.21 - 0.09j]
    out = []
    for k in range(n):
        x = centre + spread * offsets[k % len(offsets)] * (1 + 0.1 * (k // len(offsets)))
        out.append((x, model.fiber_candidates(x)[k % model.nsheets]))
    return out


def check(name, value, tol, note=""):
    value = float(value)
    return {"name": name, "value": value, "tol": tol, "pass": bool(value <= tol), **({"note": note} if note else {})}


def cm(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def tensor_error(value, reference, scale):
    """Relative error of two tensors; absolute against a natural scale if both vanish.

    Symmetric curves (e.g. x^4 - 1, x^6 - 1) sit at fixed points of the
    modular action where c and D vanish identically; a relative error is
    then a ratio of round-off values.
    """
    size = max(float(np.max(np.abs(value))), float(np.max(np.abs(reference))))
    diff = float(np.max(np.abs(np.asarray(value) - np.asarray(reference))))
    if size < 1e-8 * scale:
        return diff / scale, "tensor vanishes; error relative to |tau|/|z|^k"
    return diff / size, ""


def natural_scale(pd, order=1):
    """|tau| / |z|^order: the size of an order-th z-derivative of tau."""
    return float(np.max(np.abs(pd.tau))) / max(float(np.max(np.abs(pd.z))), 1e-300) ** order


# ---------------------------------------------------------------------------
# sections


def section_periods(P):
    pd = P.pd
    out = {"data": pd.to_json(), "checks": [
        check("tau_symmetry", pd.asymmetry, P.tol["tau_symmetry"]),
        check("im_tau_positive", 0.0 if np.all(np.linalg.eigvalsh(pd.tau.imag) > 0) else 1.0, 0.5),
        check("a_normalization", pd.normalization_error, 1e-10),
    ]}
    if pd.genus == 1:
        j = j_invariant(pd.tau[0, 0])
        out["data"]["j_invariant"] = cm(j)
    return out


def section_bergman(P):
    pts = P.points(4)
    checks, worst_a, worst_b = [], 0.0, 0.0
    if P.model.genus > 0:
        for p in pts[:2]:
            a, b = bg.cycle_identity_check(P.kernel, P.pd, p)
            worst_a, worst_b = max(worst_a, a), max(worst_b, b)
        checks.append(check("bergman_a_periods", worst_a, P.tol["bergman_a_periods"]))
        checks.append(check("bergman_b_identity", worst_b, P.tol["bergman_b_identity"]))
    if isinstance(P.model, HyperellipticCurve) and P.model.genus > 0:
        th = bg.ThetaKernel(P.model, P.pd)
        worst = 0.0
        for p, q in zip(pts[:3], pts[1:4]):
            k1 = P.kernel(p[0], p[1], q[0], q[1])
            k2 = th(p[0], p[1], q[0], q[1])
            worst = max(worst, abs(k1 - k2) / abs(k1))
        checks.append(check("klein_vs_theta", worst, P.tol["kernel_agreement"]))
    checks.append(check("jet_residual", P.jets.residual, 1e-10))
    return {"data": P.jets.to_json(), "checks": checks}


def section_cubic(P):
    c = sk.cubic_residue(P.model, P.frame, P.jets)
    return {"data": {"cubic": cm(c), "raw_asymmetry": c.asymmetry},
            "checks": [check("cubic_symmetry", c.asymmetry, 1e-8)], "tensor": c}


def section_quartic(P):
    D = sk.quartic_residue(P.model, P.frame, P.jets)
    return {"data": {"quartic": cm(D), "raw_asymmetry": D.asymmetry},
            "checks": [check("quartic_symmetry", D.asymmetry, 1e-8)], "tensor": D}


def section_recurse(P, g, n):
    E = P.engine
    c = E.get(g, n)
    pts = P.points(n)
    checks = [check("asymmetry", c.asymmetry, P.tol["recursion"]),
              check("odd_defect", c.odd_defect, P.tol["recursion"]),
              check("residues", residue_check(E, c, pts[:n]), P.tol["recursion"])]
    if P.model.genus > 0:
        a = a_cycle_check(E, c, pts[1:n])
        scale = max(abs(E.evaluate(g, n, pts[:n])), 1.0)
        checks.append(check("a_integrals", float(np.max(np.abs(a))) / scale, P.tol["a_cycle"]))
    closed = {(0, 3): w03_eval, (0, 4): w04_eval}.get((g, n))
    if closed is not None:
        v, w = E.evaluate(g, n, pts[:n]), closed(E, *pts[:n])
        checks.append(check("closed_form", abs(v - w) / abs(w), P.tol["recursion"]))
    return {"data": c.to_json(), "checks": checks}


def suite(P, name):
    tol = P.tol
    if name == "periods":
        return section_periods(P)["checks"]
    if name == "bergman":
        return section_bergman(P)["checks"]
    if name == "cubic":
        c = sk.cubic_residue(P.model, P.frame, P.jets)
        fd = fam.fd_tau(P.chart, 1, richardson=True)
        err, note = tensor_error(c, fd, natural_scale(P.pd))
        return [check("cubic_vs_fd", err, tol["cubic"], note)]
    if name == "quartic":
        D = sk.quartic_residue(P.model, P.frame, P.jets)
        fd = fam.fd_tau(P.chart, 2, richardson=True)
        scale = natural_scale(P.pd, 2)
        err, note = tensor_error(D, fd, scale)
        rep = max(tensor_error(sk.quartic_residue(P.model, P.frame, P.jets.reparametrized(a, [0, 2, 0, 1])), D, scale)[0]
                  for a in range(P.jets.nram))
        return [check("quartic_vs_fd", err, tol["quartic"], note), check("quartic_reparametrization", rep, tol["reparametrization"])]
    if name == "rauch":
        pts = P.points(6)
        worst = 0.0
        for p, r in zip(pts[:5], pts[1:6]):
            worst = max(worst, fam.rauch_check(P.chart, p, r)["rel_error"])
        return [check("rauch", worst, tol["rauch"])]
    if name == "variational":
        pts = P.points(3)
        v2 = fam.variational_check(P.chart, 0, 2, pts[:2])["rel_error"]
        v3 = fam.variational_check(P.chart, 0, 3, pts[:3])["rel_error"]
        a3 = fam.variational_check(P.chart, 0, 3, pts[:3], cycle="a")["abs"]
        return [check("variational_02", v2, tol["variational"]), check("variational_03", v3, tol["variational"]),
                check("variational_a_cycle", a3, tol["a_cycle"])]
    if name == "recursion":
        out = []
        for g, n in ((0, 3), (0, 4), (1, 1), (1, 2), (0, 5), (1, 3), (2, 1)):
            out += [dict(c, name=f"W{g}_{n}:{c['name']}") for c in section_recurse(P, g, n)["checks"]]
        return out
    if name == "tower":
        out = []
        for c in (1.01, np.exp(1j * np.pi / 50)):
            s = sk.scale_check(P.model, P.frame, P.pd, c)
            lab = "real" if np.isreal(c) else "complex"
            out += [check(f"scale_{lab}_z", s["z_error"], tol["identities"]), check(f"scale_{lab}_tau", s["tau_error"], tol["identities"])]
        if not P.model.theta_holomorphic:
            return out
        ids = sk.kahler_identities(P.pd)
        out += [check("w_equals_tau_z", ids["w_minus_tau_z"], tol["identities"]),
                check("theta_equals_z_omega", ids["theta_minus_z_omega"], tol["identities"]),
                check("kahler_identity_exact", ids["kahler_exact"], 1e-13 * max(1.0, float(np.max(np.abs(P.pd.z))) ** 2)),
                check("prepotential_gradient", sk.prepotential_check(P.chart)["rel_error"], tol["prepotential"])]
        return out
    raise ConfigError(f"unknown suite {name!r}", ("outputs",))


def default_suites(model):
    """Suites run by ``--suite all``.

    Tower curves only get the period and global-identity checks: their
    Bergman kernel comes from theta functions, which is far too slow for
    FFT jets at higher genus.  Request the other suites explicitly if needed.
    """
    if model.theta_holomorphic:
        return ("periods", "tower")
    return SUITES


# ---------------------------------------------------------------------------
# reporting


def _meta(cmd):
    try:
        v = version("artifact")
    except PackageNotFoundError:
        v = "unknown"
    return {"package": "spectralkahler", "version": v, "command": cmd}


def print_table(report, stream=None):
    stream = stream or sys.stdout
    rows = []
    for sec, body in report["sections"].items():
        for c in body.get("checks", []):
            rows.append((sec, c["name"], f"{c['value']:.3e}", f"{c['tol']:.1e}", "PASS" if c["pass"] else "FAIL"))
    if not rows:
        return
    w = [max(len(r[i]) for r in rows + [("section", "check", "value", "tol", "result")]) for i in range(5)]
    head = ("section", "check", "value", "tol", "result")
    print("  ".join(h.ljust(w[i]) for i, h in enumerate(head)), file=stream)
    for r in rows:
        print("  ".join(x.ljust(w[i]) for i, x in enumerate(r)), file=stream)


def emit_csv(report_tensors, outdir):
    os.makedirs(outdir, exist_ok=True)
    for name, T in report_tensors.items():
        T = np.asarray(T)
        with open(os.path.join(outdir, f"{name}.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"i{k}" for k in range(T.ndim)] + ["re", "im"])
            for idx in np.ndindex(T.shape):
                w.writerow(list(idx) + [repr(float(T[idx].real)), repr(float(T[idx].imag))])


def run(args):
    cfg = load_config(args.config)
    P = Pipeline(cfg)
    sections, tensors = {}, {}
    cmd = args.command
    if cmd in ("periods", "bergman", "cubic", "quartic"):
        requested = [cmd]
    elif cmd == "recurse":
        requested = [("recurse", args.g, args.n)]
    elif cmd == "validate":
        requested = [("validate", args.suite)]
    else:
        requested = []
        for o in cfg.get("outputs", ["periods"]):
            if isinstance(o, str):
                requested.append(o)
            elif "recurse" in o:
                requested += [("recurse", g, n) for g, n in o["recurse"]]
            else:
                requested += [("validate", s) for s in o["validate"]]
    for item in requested:
        if item in ("periods", "bergman", "cubic", "quartic"):
            body = {"periods": section_periods, "bergman": section_bergman,
                    "cubic": section_cubic, "quartic": section_quartic}[item](P)
            if "tensor" in body:
                tensors[item] = body.pop("tensor")
            sections[item] = body
        elif item[0] == "recurse":
            sections[f"recurse_{item[1]}_{item[2]}"] = section_recurse(P, item[1], item[2])
        else:
            names = default_suites(P.model) if item[1] == "all" else (item[1],)
            for nm in names:
                sections[f"validate_{nm}"] = {"checks": suite(P, nm)}
    report = {"config": cfg.get("name", os.path.basename(args.config)), "sections": sections, "metadata": _meta(cmd)}
    text = json.dumps(report, indent=2, sort_keys=True)
    out = args.out or cfg.get("output", {}).get("report")
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print_table(report)
    csv_dir = args.emit_csv or cfg.get("output", {}).get("csv_dir")
    if csv_dir:
        emit_csv(tensors, csv_dir)
    failed = [f"{sec}:{c['name']}" for sec, b in sections.items() for c in b.get("checks", []) if not c["pass"]]
    for f in failed:
        print(f"FAILED {f}", file=sys.stderr)
    return 1 if failed else 0


def make_parser():
    ap = argparse.ArgumentParser(prog="spectralkahler", description="Periods, Bergman kernel, special Kähler data "
                                 "and genus-expansion correlators of spectral curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run configuration (JSON) or fixture:NAME")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--emit-csv", dest="emit_csv", help="directory for tensor CSV slices")

    for name in ("periods", "bergman", "cubic", "quartic", "report"):
        common(sub.add_parser(name))
    p = sub.add_parser("recurse")
    common(p)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p = sub.add_parser("validate")
    common(p)
    p.add_argument("--suite", choices=SUITES + ("all",), required=True)
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    if args.config.startswith("fixture:"):
        args.config = fixture_path(args.config.split(":", 1)[1])
    try:
        return run(args)
    except ConfigError as exc:
        path = "/".join(str(p) for p in exc.path) or "<root>"
        print(f"config error at {path}: {exc}", file=sys.stderr)
        return 2
    except SpectralKahlerError as exc:
        print(f"FAILED {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
