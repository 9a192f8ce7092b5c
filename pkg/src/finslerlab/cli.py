"""Command-line entry point: ``finsler-lab <subcommand> [--config PATH] [--out DIR] [--seed N]``.

Each subcommand reads one section of a JSON config (plus the shared
``norm``, ``nonlinearity`` and ``seed`` keys), writes ``summary.json`` and
CSV files to the output directory, and exits 0 when every asserted property
holds, 2 when one fails and 1 on a usage or domain error.  The output
directory may also be set through FINSLERLAB_OUT.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import SCHEMA, __version__
from .anisotropy import NormSpec, verify_properties
from .errors import BlowUpError, DomainError, NonConvergenceError, NumericError
from .radial import (
    Nonlinearity,
    explicit_critical_power,
    explicit_liouville,
    residual,
    shoot,
    singular_log_solution,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
DEFAULT_OUT = "finsler-lab-out"
OUT_ENV = "FINSLERLAB_OUT"


class UsageError(Exception):
    pass


# -- deterministic JSON -----------------------------------------------------------


def _encode(obj):
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(json.dumps(k) + ": " + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj):
    """JSON with sorted keys and floats at 17 significant digits."""
    return _encode(obj) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- config -----------------------------------------------------------------------

SECTIONS = {
    "norm-check": {"samples": 1000, "tolerance": None},
    "solve-radial": {"profile": {"kind": "liouville", "lambda": 1.0}, "tolerance": None},
    "solve-bvp": {"radius": 2.0, "h": 0.0625, "trace": "liouville", "tolerance": 1e-9},
    "stability": {"profile": {"kind": "singular-log", "N": 10}, "interval": [0.1, 50.0], "nodes": 4000,
                  "expect": None, "tolerance": 1e-8},
    "exterior-stability": {"profile": {"kind": "liouville", "lambda": 1.0}, "start": 0.05, "factor": 2.0,
                           "ladder": [2.0, 8.0, 64.0, 1024.0], "nodes": 2000, "tolerance": 1e-8},
    "energy-scan": {"profile": {"kind": "liouville", "lambda": 1.0}, "lambda_range": [0.1, 20.0], "points": 100,
                    "negate": False, "tolerance": 1e-7},
    "hardy": {"N": 3, "s": [2.0, 1.5, 5.0], "count": 100, "plateau": 20.0, "tolerance": 1e-6},
    "isoperimetric": {"vertices": 4096, "polygons": 50, "points": 12, "tolerance": 1e-6},
    "coarea": {"field": "cone", "h": 0.015625, "levels": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
               "tolerance": 2e-2},
    "capacity-scan": {"profile": {"kind": "singular-log", "N": 10}, "kind": "exponential", "p": None,
                      "alpha": [0.5, 1.0, 2.0, 3.9], "R_range": [1.0, 100.0], "points": 20, "tolerance": 1e-3},
    "epsilon-scan": {"profile": {"kind": "singular-log", "N": 10}, "p": 1.0, "epsilon": None, "centers": None,
                     "radii": [0.01, 0.02, 0.05, 0.1], "expect_flagged": None},
    "decay-probe": {"profile": {"kind": "liouville", "lambda": 1.0}, "r": 0.25},
}
TOP_KEYS = {"norm", "nonlinearity", "seed", "out"} | set(SECTIONS)
PROFILE_KEYS = {
    "liouville": {"kind", "lambda"},
    "critical": {"kind", "lambda", "N"},
    "singular-log": {"kind", "N"},
    "shoot": {"kind", "N", "u0", "r_max", "steps"},
}


def load_config(path):
    """Parse a JSON config file, reporting line and column of syntax errors."""
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    text = p.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise UsageError(f"{path}: unknown key(s) {unknown}")
    base = p.parent
    if isinstance(doc.get("norm"), str):
        npath = base / doc["norm"]
        if not npath.is_file():
            raise UsageError(f"norm file not found: {npath}")
        try:
            doc["norm"] = json.loads(npath.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{npath}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return doc


def resolve(command, doc, seed=None):
    """Merge defaults with the config section; reject unknown keys and bad tolerances."""
    section = doc.get(command, {})
    if not isinstance(section, dict):
        raise UsageError(f"section {command!r} must be an object")
    defaults = SECTIONS[command]
    unknown = sorted(set(section) - set(defaults))
    if unknown:
        raise UsageError(f"{command}: unknown key(s) {unknown}")
    params = {**defaults, **section}
    tol = params.get("tolerance")
    if tol is not None and not (isinstance(tol, (int, float)) and tol > 0):
        raise UsageError(f"{command}: tolerance must be positive")
    prof = params.get("profile")
    if prof is not None:
        if not isinstance(prof, dict) or prof.get("kind") not in PROFILE_KEYS:
            raise UsageError(f"{command}: profile kind must be one of {sorted(PROFILE_KEYS)}")
        bad = sorted(set(prof) - PROFILE_KEYS[prof["kind"]])
        if bad:
            raise UsageError(f"{command}: unknown profile key(s) {bad}")
    norm = doc.get("norm", {"kind": "euclidean", "dim": 2})
    nonlin = doc.get("nonlinearity", {"kind": "exponential"})
    s = doc.get("seed", 0) if seed is None else seed
    if not isinstance(s, int) or isinstance(s, bool):
        raise UsageError("seed must be an integer")
    return {"command": command, "norm": norm, "nonlinearity": nonlin, "seed": s, "params": params}


def config_hash(cfg):
    return hashlib.sha256(dumps(cfg).encode()).hexdigest()


# -- helpers ------------------------------------------------------------------------


def _norm(cfg, dim=None):
    if not isinstance(cfg["norm"], dict):
        raise UsageError("norm must be an object or a path to a JSON file")
    spec = NormSpec.from_dict(cfg["norm"])
    if dim is not None and spec.dim != dim:
        if spec.kind == "euclidean":
            return NormSpec.euclidean(dim)
        raise DomainError(f"norm dimension {spec.dim} does not match N = {dim}")
    return spec


def _nonlinearity(cfg):
    return Nonlinearity.from_dict(cfg["nonlinearity"])


def _profile(d, f=None):
    kind = d["kind"]
    if kind == "liouville":
        return explicit_liouville(float(d.get("lambda", 1.0)))
    if kind == "critical":
        return explicit_critical_power(float(d.get("lambda", 1.0)), int(d.get("N", 3)))
    if kind == "singular-log":
        return singular_log_solution(int(d.get("N", 10)))
    return shoot(f, int(d.get("N", 3)), float(d.get("u0", 0.0)), float(d.get("r_max", 10.0)),
                 int(d.get("steps", 2047)))


def _profile_nonlinearity(d, cfg):
    """The equation a profile solves: fixed for explicit kinds, from the config for shooting."""
    if d["kind"] in ("liouville", "singular-log"):
        return Nonlinearity.exponential()
    if d["kind"] == "critical":
        N = int(d.get("N", 3))
        return Nonlinearity.power((N + 2) / (N - 2))
    return _nonlinearity(cfg)


# -- subcommands ----------------------------------------------------------------------
# each returns (passed, summary dict, {csv name: text}, applied tolerance)


def cmd_norm_check(cfg):
    P = cfg["params"]
    spec = _norm(cfg)
    rep = verify_properties(spec, int(P["samples"]), cfg["seed"], P["tolerance"])
    rows = [(p.name, p.residual, p.tolerance, p.passed) for p in rep.properties]
    summary = rep.to_dict()
    summary["failed"] = rep.failed
    return rep.passed, summary, {"properties.csv": _csv(["property", "residual", "tolerance", "passed"], rows)}, rep.tolerance


def cmd_solve_radial(cfg):
    P = cfg["params"]
    f = _profile_nonlinearity(P["profile"], cfg)
    prof = _profile(P["profile"], f)
    worst = residual(prof, f)
    tol = P["tolerance"]
    if tol is None:
        tol = {"singular-log": 1e-12, "shoot": 1e-3}.get(P["profile"]["kind"], 1e-8)
    tol = float(tol)
    summary = {"profile": prof.to_dict(), "nonlinearity": f.to_dict(), "max_residual": worst, "passed": worst <= tol}
    return worst <= tol, summary, {"profile.csv": prof.to_csv()}, tol


def cmd_solve_bvp(cfg):
    from .bvp import GridDomain2D, residual_norm, solve_semilinear

    P = cfg["params"]
    spec = _norm(cfg, 2)
    f = _nonlinearity(cfg)
    if P["trace"] == "liouville":
        exact = explicit_liouville(1.0)
        g = lambda X, Y: exact.evaluate(spec.dual(np.stack([X, Y], axis=-1)))[0]  # noqa: E731
    elif P["trace"] == "zero":
        g = None
    else:
        raise UsageError("trace must be 'liouville' or 'zero'")
    dom = GridDomain2D.wulff_ball(spec, float(P["radius"]), float(P["h"]), g=g)
    tol = float(P["tolerance"])
    sol = solve_semilinear(dom, spec, f, tol=tol)
    summary = sol.to_dict()
    summary["residual_norm"] = residual_norm(sol)
    if P["trace"] == "liouville" and spec.kind == "euclidean" and f.kind == "exponential":
        X, Y = dom.mesh()
        ref = exact.evaluate(spec.dual(np.stack([X, Y], axis=-1)))[0]
        summary["max_error"] = float(np.max(np.abs(sol.u - ref)[dom.interior]))
    X, Y = dom.mesh()
    known = dom.interior | dom.boundary
    rows = zip(X[known], Y[known], sol.u[known])
    summary["passed"] = bool(sol.converged)
    return sol.converged, summary, {"solution.csv": _csv(["x", "y", "u"], rows)}, tol


def cmd_stability(cfg):
    from .stability import assemble_radial_form, verdict

    P = cfg["params"]
    d = P["profile"]
    f = _profile_nonlinearity(d, cfg)
    prof = _profile(d, f)
    spec = _norm(cfg, prof.N)
    lo, hi = (float(v) for v in P["interval"])
    asm = assemble_radial_form(prof, f, (lo, hi), nodes=int(P["nodes"]), norm=spec)
    v = verdict(asm, -float(P["tolerance"]))
    ok = P["expect"] is None or v.kind == P["expect"]
    summary = {"profile": prof.to_dict(), "verdict": v.to_dict(), "expect": P["expect"], "passed": ok}
    rows = []
    if v.witness is not None:
        rows = zip(asm.r[asm.free], v.witness)
    return ok, summary, {"witness.csv": _csv(["r", "psi"], rows)}, float(P["tolerance"])


def cmd_exterior_stability(cfg):
    from .stability import exterior_stability, exterior_scan

    P = cfg["params"]
    d = P["profile"]
    f = _profile_nonlinearity(d, cfg)
    prof = _profile(d, f)
    spec = _norm(cfg, prof.N)
    R0, hist = exterior_scan(prof, f, float(P["start"]), float(P["factor"]), tuple(P["ladder"]),
                             nodes=int(P["nodes"]), norm=spec)
    rows = [(r, m, v.lambda_min, v.kind) for r, vs in hist for m, v in zip(P["ladder"], vs)]
    summary = {"profile": prof.to_dict(), "R0": R0, "passed": R0 is not None}
    if R0 is not None:
        v = exterior_stability(prof, f, R0, 8 * R0, int(P["nodes"]), spec)
        summary["annulus_8R0"] = v.to_dict()
        summary["passed"] = v.lambda_min >= -float(P["tolerance"])
    return summary["passed"], summary, {"scan.csv": _csv(["R0", "ratio", "lambda_min", "verdict"], rows)}, float(P["tolerance"])


def cmd_energy_scan(cfg):
    from .energy import monotonicity_scan

    P = cfg["params"]
    d = P["profile"]
    f = _profile_nonlinearity(d, cfg)
    prof = _profile(d, f)
    spec = _norm(cfg, prof.N)
    kind = {"exponential": "exponential", "power": "power", "negative-power": "negative-power"}.get(f.kind)
    if kind is None:
        raise DomainError(f"no monotonicity functional for the {f.kind} nonlinearity")
    lo, hi = (float(v) for v in P["lambda_range"])
    lam = np.geomspace(lo, hi, int(P["points"]))
    params = {} if kind == "exponential" else {"p": f.p}
    tol = float(P["tolerance"])
    scan = monotonicity_scan(kind, prof, params, lam, spec, bool(P["negate"]), tol)
    summary = scan.to_dict()
    summary["profile"] = prof.to_dict()
    return scan.passed, summary, {"energy.csv": scan.to_csv()}, tol


def cmd_hardy(cfg):
    from .inequalities import LogPlateau, TestFunctionSet, hardy_check

    P = cfg["params"]
    N = int(P["N"])
    tol = float(P["tolerance"])
    out, rows, ok = [], [], True
    for s in P["s"]:
        s = float(s)
        tests = TestFunctionSet.random_bumps(int(P["count"]), cfg["seed"], avoid_origin=s > N)
        res = hardy_check(None, s, N, tests)
        res.tolerance = tol
        ok &= res.passed
        d = res.to_dict()
        d["plateau_ratio"] = hardy_check(None, s, N, [LogPlateau(float(P["plateau"]))]).min_ratio
        out.append(d)
        rows += [(s, k, float(r)) for k, r in enumerate(res.ratios)]
    return ok, {"results": out, "passed": ok}, {"hardy.csv": _csv(["s", "test", "ratio"], rows)}, tol


def cmd_isoperimetric(cfg):
    from .inequalities import ShapeMesh, anisotropic_perimeter, isoperimetric_check

    P = cfg["params"]
    spec = _norm(cfg, 2)
    tol = float(P["tolerance"])
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    wulff = ShapeMesh.wulff(spec, 1.0, int(P["vertices"]))
    Pw = anisotropic_perimeter(wulff, spec)
    dw = isoperimetric_check(wulff, spec)
    worst = math.inf
    for k in range(int(P["polygons"])):
        shape = ShapeMesh.random_convex(rng, int(P["points"]))
        Ps = anisotropic_perimeter(shape, spec)
        d = isoperimetric_check(shape, spec)
        worst = min(worst, d / Ps)
        rows.append((k, shape.area, Ps, d))
    ok = worst >= -tol and abs(dw) <= 1e-3 * Pw
    summary = {"wulff_perimeter": Pw, "wulff_relative_deficit": dw / Pw, "min_relative_deficit": worst,
               "polygons": int(P["polygons"]), "passed": ok}
    return ok, summary, {"polygons.csv": _csv(["polygon", "area", "perimeter", "deficit"], rows)}, tol


def cmd_coarea(cfg):
    from .inequalities import GridField, coarea_check
    from .radial import RadialProfile

    P = cfg["params"]
    spec = _norm(cfg, 2)
    h = float(P["h"])
    if P["field"] == "cone":
        cone = RadialProfile.from_function(lambda r: 1 - r, 2, np.linspace(0, 10, 16),
                                           dphi=lambda r: -np.ones_like(r), d2phi=lambda r: 0 * r)
        ext = 1.15 * spec.value(np.eye(2))
        fld = GridField.from_radial(cone, spec, tuple(ext), h)
    elif P["field"] == "linear":
        x = np.arange(0, int(round(1 / h)) + 1) * h
        fld = GridField.from_function(lambda X, Y: X, x, x)
    else:
        raise UsageError("field must be 'cone' or 'linear'")
    rep = coarea_check(fld, spec, P["levels"])
    tol = float(P["tolerance"])
    ok = bool(rep.max_residual <= tol)
    summary = rep.to_dict()
    summary["passed"] = ok
    rows = zip(rep.t, rep.perimeter, rep.derivative, rep.residual)
    return ok, summary, {"coarea.csv": _csv(["t", "perimeter", "minus_dV_dt", "residual"], rows)}, tol


def cmd_capacity_scan(cfg):
    from .inequalities import capacity_scaling

    P = cfg["params"]
    d = P["profile"]
    f = _profile_nonlinearity(d, cfg)
    prof = _profile(d, f)
    spec = _norm(cfg, prof.N)
    lo, hi = (float(v) for v in P["R_range"])
    R = np.geomspace(lo, hi, int(P["points"]))
    tol = float(P["tolerance"])
    out, rows, ok = [], [], True
    for a in P["alpha"]:
        c = capacity_scaling(prof, P["kind"], float(a), R, P["p"], spec)
        good = abs(c.slope - c.predicted) <= tol
        ok &= good
        dd = c.to_dict()
        dd["passed"] = bool(good)
        out.append(dd)
        rows += [(float(a), r, i) for r, i in zip(c.R, c.I)]
    return ok, {"results": out, "passed": ok}, {"capacity.csv": _csv(["alpha", "R", "I"], rows)}, tol


def _default_centers(N):
    c = np.zeros((9, N))
    for k in range(1, 9):
        c[k, (k - 1) % N] = 0.25 * ((k + 1) // 2) * (1 if k % 2 else -1)
    return c


def cmd_epsilon_scan(cfg):
    from .regularity import epsilon_scan

    P = cfg["params"]
    d = P["profile"]
    f = _profile_nonlinearity(d, cfg)
    prof = _profile(d, f)
    spec = _norm(cfg, prof.N)
    eps = prof.N * spec.kappa0 if P["epsilon"] is None else float(P["epsilon"])
    centers = _default_centers(prof.N) if P["centers"] is None else np.asarray(P["centers"], dtype=float)
    rep = epsilon_scan(prof, spec, float(P["p"]), eps, centers, P["radii"])
    ok = P["expect_flagged"] is None or sorted(P["expect_flagged"]) == rep.flagged_indices
    summary = rep.to_dict()
    summary["expect_flagged"] = P["expect_flagged"]
    summary["passed"] = ok
    return ok, summary, {"quantity.csv": rep.to_csv()}, eps


def cmd_decay_probe(cfg):
    from .regularity import decay_probe

    P = cfg["params"]
    d = P["profile"]
    prof = _profile(d, _profile_nonlinearity(d, cfg))
    spec = _norm(cfg, prof.N)
    probe = decay_probe(prof, spec, float(P["r"]))
    summary = probe.to_dict()
    summary["passed"] = True
    return True, summary, {"probe.csv": _csv(["q2", "qr", "ratio"], [(probe.q2, probe.qr, probe.ratio)])}, None


HELP = {
    "norm-check": "structural identities of F and its dual",
    "solve-radial": "explicit or shot radial profile and its ODE residual",
    "solve-bvp": "Newton solve of the Dirichlet problem on a Wulff ball",
    "stability": "minimal eigenvalue of the stability form on a ball or annulus",
    "exterior-stability": "scan for the radius beyond which annuli are stable",
    "energy-scan": "monotonicity of the rescaled energy in the scale",
    "hardy": "Hardy inequality on seeded radial bumps",
    "isoperimetric": "anisotropic isoperimetric deficit of polygons",
    "coarea": "co-area identity on level sets of a grid field",
    "capacity-scan": "R-scaling of weighted integrals over Wulff balls",
    "epsilon-scan": "epsilon-regularity detector over centres and radii",
    "decay-probe": "scale-invariant energy on B_2 and B_r",
}

COMMANDS = {
    "norm-check": cmd_norm_check,
    "solve-radial": cmd_solve_radial,
    "solve-bvp": cmd_solve_bvp,
    "stability": cmd_stability,
    "exterior-stability": cmd_exterior_stability,
    "energy-scan": cmd_energy_scan,
    "hardy": cmd_hardy,
    "isoperimetric": cmd_isoperimetric,
    "coarea": cmd_coarea,
    "capacity-scan": cmd_capacity_scan,
    "epsilon-scan": cmd_epsilon_scan,
    "decay-probe": cmd_decay_probe,
}


# -- entry point ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="finsler-lab", description="Numerical checks for anisotropic semilinear elliptic equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--seed", type=int, help="random seed (overrides the config)")
        sp.add_argument("--quiet", action="store_true", help="suppress the one-line result")
        if name == "epsilon-scan":
            sp.add_argument("--p", type=float, help="exponent p")
            sp.add_argument("--epsilon", type=float, help="threshold")
            sp.add_argument("--centers", help="JSON list of centres")
            sp.add_argument("--radii", help="comma-separated radii")
    return parser


def _overrides(args, cfg):
    if args.command != "epsilon-scan":
        return
    P = cfg["params"]
    if args.p is not None:
        P["p"] = args.p
    if args.epsilon is not None:
        P["epsilon"] = args.epsilon
    if args.centers is not None:
        try:
            P["centers"] = json.loads(args.centers)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--centers: column {exc.colno}: {exc.msg}") from None
    if args.radii is not None:
        try:
            P["radii"] = [float(v) for v in args.radii.split(",")]
        except ValueError:
            raise UsageError("--radii must be comma-separated numbers") from None


def run(command, cfg, out_dir):
    """Run a resolved config; write summary.json and CSVs; return the exit status."""
    passed, summary, tables, tol = COMMANDS[command](cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "tolerance": tol,
        "passed": bool(passed),
        "result": summary,
    }
    (out / "summary.json").write_text(dumps(doc))
    for name, text in tables.items():
        (out / name).write_text(text)
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        doc = load_config(args.config)
        out = args.out or os.environ.get(OUT_ENV) or doc.get("out") or DEFAULT_OUT
        cfg = resolve(args.command, doc, args.seed)
        _overrides(args, cfg)
        status = run(args.command, cfg, out)
    except UsageError as exc:
        print(f"finsler-lab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, NumericError, NonConvergenceError, BlowUpError, KeyError, TypeError, ValueError) as exc:
        print(f"finsler-lab: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        word = "pass" if status == EXIT_OK else "FAIL"
        print(f"{args.command}: {word} ({Path(out) / 'summary.json'})")
    return status


if __name__ == "__main__":
    sys.exit(main())
