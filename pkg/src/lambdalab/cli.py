"""Command line entry points: ``verify``, ``flow``, ``classify`` and ``growth``.

Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analytic, flow, growth, rigidity
from .analytic import Kind
from .mesh import MeshError, generate
from .mesh_io import read_mesh, write_obj

logger = logging.getLogger("lambdalab")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3
CONFIG_VERSION = 1
THREADS_ENV = "LAMBDALAB_THREADS"


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration


def load_config(path) -> dict:
    if path is None:
        return {"version": CONFIG_VERSION}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}, got {cfg.get('version')!r}")
    return cfg


def _positive(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number") from exc
    if not value > 0 or not math.isfinite(value):
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _surface(spec) -> analytic.CanonicalSurface:
    if not isinstance(spec, dict):
        raise ConfigError("surface spec must be an object with kind, n, k, r")
    try:
        return analytic.make_canonical(spec["kind"], spec["n"], spec.get("k"), spec.get("r"))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid surface {spec}: {exc}") from exc


def _mesh(spec, seed=None):
    if not isinstance(spec, dict):
        raise ConfigError("mesh spec must be an object")
    try:
        if "path" in spec:
            return read_mesh(spec["path"])
        spec = dict(spec)
        if seed is not None and spec.get("kind") == "perturbed_sphere":
            spec["seed"] = seed
        return generate(spec)
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid mesh spec {spec}: {exc}") from exc


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


# --------------------------------------------------------------------------
# verify


def _sweep_radii(n):
    return [0.1, 0.5, 1.0, math.sqrt(n), 2.0, 5.0]


def _canonical_sweep(ns):
    for n in ns:
        for r in _sweep_radii(n):
            yield analytic.make_canonical(Kind.SPHERE, n, n, r)
            for k in range(1, n):
                yield analytic.make_canonical(Kind.CYLINDER, n, k, r)
        yield analytic.make_canonical(Kind.PLANE, n)


def boundary_family():
    """Model surfaces on which the pinching inequality is an equality."""
    out = [analytic.make_canonical(Kind.SPHERE, n, n, math.sqrt(n)) for n in range(2, 9)]
    out += [analytic.make_canonical(Kind.CYLINDER, 2, 1, r) for r in (0.1, 0.5, 1.0, math.sqrt(2), 2.0, 5.0)]
    for n in range(3, 7):
        out.append(analytic.make_canonical(Kind.CYLINDER, n, 1, 1.0))
        out.append(analytic.make_canonical(Kind.CYLINDER, n, n - 1, math.sqrt(n - 1)))
    for n in range(4, 9):
        for k in range(2, n - 1):
            out.append(analytic.make_canonical(Kind.CYLINDER, n, k, math.sqrt(k)))
    return out


def random_traceless(rng, count, n):
    mus = rng.normal(size=(count, n)) * rng.uniform(0.1, 3.0, size=(count, 1))
    return mus - mus.mean(axis=1, keepdims=True)


def equal_entry_family(rng, count, n):
    """Trace-free vectors with ``n-1`` equal entries, randomly permuted."""
    a = rng.uniform(-2.0, 2.0, size=count)
    mus = np.repeat(a[:, None], n, axis=1)
    mus[:, -1] = -(n - 1) * a
    perm = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
    return np.take_along_axis(mus, perm, axis=1)


def run_verify(cfg: dict, tolerance=None, seed=None):
    """Analytic identity suite; returns the report dict."""
    ns = cfg.get("n_values", [2, 3, 4, 5, 6])
    seed = cfg.get("seed", 0) if seed is None else seed
    tol = {
        "simons": 1e-12,
        "focal": 1e-12,
        "pinching": 1e-12,
        "root": 1e-10,
        "b3_inequality": 1e-12,
        "b3_equality": 1e-10,
        "kato_inequality": 1e-12,
        "kato_identity": 1e-12,
    }
    tol.update(cfg.get("tolerances", {}))
    if tolerance is not None:
        tol = {k: float(tolerance) for k in tol}
    if any(not (v >= 0) for v in tol.values()):
        raise ConfigError("tolerances must be nonnegative")
    b3_trials = int(cfg.get("b3_trials", 100_000))
    eq_trials = int(cfg.get("equality_trials", 1000))
    kato_trials = int(cfg.get("kato_trials", 100_000))
    rng = np.random.default_rng(seed)
    checks = []

    def add(group, name, measured, limit, passed):
        checks.append(
            {"group": group, "name": name, "measured": float(measured), "tolerance": float(limit), "pass": bool(passed)}
        )

    surfaces = list(_canonical_sweep(ns))

    # lambda values: closed form, exact
    worst = residual = 0.0
    for s in surfaces:
        expected = 0.0 if s.kind is Kind.PLANE else s.k / s.r - s.r
        worst = max(worst, abs(analytic.lambda_of(s) - expected))
        q = analytic.support_value(s) + float(analytic.curvature_summary(s).H) - analytic.lambda_of(s)
        residual = max(residual, abs(q))
    add("lambda_values", "lambda_closed_form", worst, 0.0, worst == 0.0)
    add("lambda_values", "support_plus_H_residual", residual, tol["simons"], residual <= tol["simons"])

    rH_max = rS_max = 0.0
    for s in surfaces:
        rH, rS = analytic.simons_rhs(analytic.curvature_summary(s), analytic.lambda_of(s))
        rH_max, rS_max = max(rH_max, abs(float(rH))), max(rS_max, abs(float(rS)))
    add("simons_rhs", "LH_rhs", rH_max, tol["simons"], rH_max <= tol["simons"])
    add("simons_rhs", "LS_rhs", rS_max, tol["simons"], rS_max <= tol["simons"])

    spheres = [s for s in surfaces if s.kind is Kind.SPHERE]
    cylinders = [s for s in surfaces if s.kind is Kind.CYLINDER]
    focal_sph = max(abs(rigidity.focal_quantity(float(analytic.curvature_summary(s).H), analytic.lambda_of(s), s.n)) for s in spheres)
    focal_cyl = max(rigidity.focal_quantity(float(analytic.curvature_summary(s).H), analytic.lambda_of(s), s.n) for s in cylinders)
    add("focal_identity", "spheres_zero", focal_sph, tol["focal"], focal_sph <= tol["focal"])
    add("focal_identity", "cylinders_negative", focal_cyl, 0.0, focal_cyl < 0)

    worst = max(abs(rigidity.pinching_report(s).defect) for s in boundary_family())
    add("pinching_boundary", "boundary_defect", worst, tol["pinching"], worst <= tol["pinching"])
    root_err = max(abs(rigidity.sphere_gap_root(n) - math.sqrt(n)) for n in range(2, 9))
    add("pinching_boundary", "sphere_root", root_err, tol["root"], root_err <= tol["root"])

    b3_min = math.inf
    eq_max = 0.0
    for n in range(3, 9):
        mus = random_traceless(rng, b3_trials // 6 + 1, n)
        B, _, _, defect = rigidity.b3_bound(mus)
        b3_min = min(b3_min, float(np.min(defect / np.maximum(1.0, B**1.5))))
        B, _, _, defect = rigidity.b3_bound(equal_entry_family(rng, eq_trials // 6 + 1, n))
        eq_max = max(eq_max, float(np.max(np.abs(defect) / np.maximum(1.0, B**1.5))))
    add("b3_bound", "inequality_min_defect", b3_min, tol["b3_inequality"], b3_min >= -tol["b3_inequality"])
    add("b3_bound", "equality_family", eq_max, tol["b3_equality"], eq_max <= tol["b3_equality"])

    kato_gap = math.inf
    ident = 0.0
    for n in range(2, 6):
        T = rigidity.SymmetricTensor3(rigidity.symmetrize(rng.normal(size=(kato_trials // 4 + 1, n, n, n))))
        total, _, defect, (pairs, distinct) = rigidity.kato_defect(T)
        scale = np.maximum(1.0, total)
        kato_gap = min(kato_gap, float(np.min((defect - pairs - distinct) / scale)), float(np.min(pairs + distinct)))
        ident = max(ident, float(np.max(np.abs(sum(rigidity.kato_split(T)) - total) / scale)))
    add("kato", "inequality_min_gap", kato_gap, tol["kato_inequality"], kato_gap >= -tol["kato_inequality"])
    add("kato", "decomposition_identity", ident, tol["kato_identity"], ident <= tol["kato_identity"])

    return {
        "version": CONFIG_VERSION,
        "command": "verify",
        "seed": seed,
        "groups": sorted({c["group"] for c in checks}),
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def cmd_verify(cfg, out: Path, args) -> int:
    report = run_verify(cfg, tolerance=args.tolerance, seed=args.seed)
    _write_json(out / "verify_report.json", report)
    for c in report["checks"]:
        status = "pass" if c["pass"] else "FAIL"
        print(f"{status} {c['group']}/{c['name']}: measured={c['measured']:.3e} tol={c['tolerance']:.1e}")
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# --------------------------------------------------------------------------
# flow


def cmd_flow(cfg, out: Path, args) -> int:
    mesh = _mesh(cfg.get("mesh", {"kind": "sphere", "r": 1.0, "level": 3}), args.seed)
    if not mesh.is_closed:
        raise ConfigError("flow needs a closed mesh")
    t_end = _positive(cfg.get("t_end", 0.1), "t_end")
    record_every = cfg.get("record_every", 1)
    if not isinstance(record_every, int) or record_every < 1:
        raise ConfigError("record_every must be a positive integer")
    v_tol = _positive(args.tolerance if args.tolerance is not None else cfg.get("v_tolerance", 1e-10), "v_tolerance")
    stat_tol = _positive(cfg.get("stationary_tolerance", 0.02), "stationary_tolerance")
    disp_tol = _positive(cfg.get("displacement_tolerance", 1e-3), "displacement_tolerance")
    dt = cfg.get("dt")
    dt = _positive(dt, "dt") if dt is not None else _positive(cfg.get("dt_factor", 0.5), "dt_factor") * flow.stability_bound(mesh)

    state = flow.init(mesh)
    start_speed = float(np.max(np.abs(state.curvature.H - flow.alpha(state))))
    scale = float(np.max(np.linalg.norm(mesh.positions, axis=1)))
    snapshots = bool(cfg.get("snapshots", False))
    counter = itertools.count()

    def on_record(s):
        if snapshots:
            write_obj(s.mesh, out / f"flow_{next(counter):05d}.obj")

    trace = flow.run(state, dt, t_end, record_every, on_record=on_record)
    trace.to_csv(out / "flow_trace.csv")
    if trace.aborted:
        print(f"flow aborted: {trace.error}", file=sys.stderr)
        return EXIT_ABORT
    V = trace.column("volume_weighted")
    v_drift = float(np.max(np.abs(V - V[0])) / max(abs(V[0]), 1e-300))
    ok = v_drift <= v_tol
    constant_H = start_speed <= stat_tol
    disp = trace.displacement[-1]
    if constant_H:
        ok = ok and disp <= disp_tol * scale
    summary = {
        "volume_drift": v_drift,
        "constant_H_input": constant_H,
        "max_displacement": disp,
        "steps": len(trace.rows),
        "pass": ok,
    }
    _write_json(out / "flow_summary.json", summary)
    print(json.dumps(summary))
    return EXIT_PASS if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# classify


def certification_list():
    """``(surface, expected tag)`` pairs covering every case of the rigidity list."""
    T = rigidity.CaseTag
    mk = analytic.make_canonical
    items = [(mk(Kind.SPHERE, n, n, math.sqrt(n)), T.SPHERE_SMALL) for n in range(2, 7)]
    items += [
        (mk(Kind.SPHERE, 3, 3, 1.0), T.SPHERE_SMALL),
        (mk(Kind.SPHERE, 2, 2, 2.0), T.GAP_VIOLATED),
        (mk(Kind.PLANE, 2), T.EUCLIDEAN),
        (mk(Kind.PLANE, 5), T.EUCLIDEAN),
        (mk(Kind.CYLINDER, 3, 1, 0.5), T.GAP_VIOLATED),
        (mk(Kind.CYLINDER, 3, 2, 2.0), T.GAP_VIOLATED),
        (mk(Kind.CYLINDER, 4, 2, 1.0), T.GAP_VIOLATED),
    ]
    items += [(mk(Kind.CYLINDER, 2, 1, r), T.CYL_1) for r in (0.5, 1.0, 2.0)]
    for n in range(3, 7):
        items.append((mk(Kind.CYLINDER, n, 1, 1.0), T.CYL_1))
        items.append((mk(Kind.CYLINDER, n, n - 1, math.sqrt(n - 1)), T.CYL_N1))
    for n in range(4, 9):
        items += [(mk(Kind.CYLINDER, n, k, math.sqrt(k)), T.CYL_K) for k in range(2, n - 1)]
    return items


def _expand_grid(grid):
    if isinstance(grid, list):
        return [_surface(g) for g in grid]
    if isinstance(grid, dict):
        kinds = grid.get("kinds", ["Sphere", "Cylinder", "Plane"])
        out = []
        for kind, n in itertools.product(kinds, grid.get("n", [])):
            kind = Kind.parse(kind)
            if kind is Kind.PLANE:
                out.append(analytic.make_canonical(kind, n))
                continue
            ks = [n] if kind is Kind.SPHERE else grid.get("k", list(range(1, n)))
            for k, r in itertools.product(ks, grid.get("r", [])):
                if kind is Kind.CYLINDER and not 1 <= k <= n - 1:
                    continue
                out.append(_surface({"kind": kind.value, "n": n, "k": k, "r": r}))
        return out
    raise ConfigError("grid must be a list of surfaces or an object of value lists")


def cmd_classify(cfg, out: Path, args) -> int:
    tol = float(args.tolerance) if args.tolerance is not None else float(cfg.get("tolerance", 1e-12))
    if "grid" in cfg:
        grid = _expand_grid(cfg["grid"])
        if not grid:
            raise ConfigError("classification grid is empty")
    else:
        grid = [s for s, _ in certification_list()]
    reports = []
    for s in grid:
        rep = rigidity.pinching_report(s, tol).to_dict()
        rep["surface"] = s.to_dict()
        reports.append(rep)
    _write_json(out / "classify_reports.json", reports)
    failures = [
        (s.to_dict(), expected.value, got.value)
        for s, expected in certification_list()
        if (got := rigidity.classify_canonical(s, tol)) is not expected
    ]
    for s, expected, got in failures:
        print(f"certification mismatch {s}: expected {expected}, got {got}", file=sys.stderr)
    print(json.dumps({"classified": len(reports), "certification_failures": len(failures)}))
    return EXIT_FAIL if failures else EXIT_PASS


# --------------------------------------------------------------------------
# growth


def cmd_growth(cfg, out: Path, args) -> int:
    slack = float(args.tolerance) if args.tolerance is not None else float(cfg.get("slack", 0.05))
    radii = cfg.get("radii")
    if radii is not None:
        if not isinstance(radii, list) or len(radii) < 4:
            raise ConfigError("radii must be a list of at least 4 values")
        radii = [float(r) for r in radii]
        if min(radii) < 1:
            raise ConfigError("growth radii must satisfy r >= 1")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("radii must be strictly increasing")
    try:
        if "mesh" in cfg:
            mesh = _mesh(cfg["mesh"], args.seed)
            if radii is None:
                reach = float(np.max(np.linalg.norm(mesh.positions, axis=1)))
                radii = [r for r in (2.0 ** np.arange(1, 12)).tolist() if r < reach]
                if len(radii) < 4:
                    raise ConfigError("mesh too small for a default radius grid; give radii")
            fit = growth.mesh_growth_fit(mesh, radii)
        else:
            surface = _surface(cfg.get("surface", {"kind": "Cylinder", "n": 2, "k": 1, "r": 1.0}))
            radii = radii if radii is not None else growth.default_radii(surface).tolist()
            samples = [(r, growth.ball_area_analytic(surface, r)) for r in radii]
            lam = analytic.lambda_of(surface)
            H = float(analytic.curvature_summary(surface).H)
            fit = growth.growth_fit(samples, surface.n, lam, H * H, (lam - H) ** 2)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    fit.write(out / "growth_samples.csv", out / "growth_fit.json")
    ok = fit.d <= fit.bound_exponent + slack
    print(json.dumps({**fit.record(), "pass": ok}))
    return EXIT_PASS if ok else EXIT_FAIL


# --------------------------------------------------------------------------


COMMANDS = {"verify": cmd_verify, "flow": cmd_flow, "classify": cmd_classify, "growth": cmd_growth}


def build_parser():
    parser = argparse.ArgumentParser(prog="lambdalab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="JSON config file (version 1)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tolerance", type=float, default=None)
    return parser


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        cfg = load_config(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        with _thread_limit():
            return COMMANDS[args.command](cfg, args.out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (flow.FlowError, MeshError, RuntimeError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
