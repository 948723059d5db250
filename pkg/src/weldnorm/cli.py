"""Command-line front end: scans, extrema, bound checks, energies and the invariant suite.

Every subcommand writes to stdout.  Floats use the shortest round-trip
decimal, infinity is written as ``inf`` and lines end in LF, so the same
inputs give byte-identical output.

Exit codes: 0 success, 1 an invariant failed, 2 bad usage or input,
3 numerical divergence (the sentinel report is still printed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from .preschwarz import (B, B_star, C_op, DiskPair, MobiusMap, QuadraticMap,
                         arclength_factorization_energy, disk_image, loewner_energy_boundary,
                         loewner_energy_innerproduct, loewner_energy_interior,
                         loewner_energy_log_form, map_from_json, schwarzian)
from .seminorm import BoundaryFunction, QuadratureConfig, h_half_seminorm_sq
from .sphere import (INF, UNIT_DISK, Mobius, cross_ratio_defect, ext, is_inf,
                     mobius_apply, mobius_from_triples, spherical_distance)
from .weldenergy import (Divergent, L_values, W, W_extrema, W_scan, composition_bound_check,
                         entropy_scan, resolve_threads, scan_roots)
from .welding import (REAL_LINE, UNIT_CIRCLE, compose, corner_welding, example_h, invert,
                      mobius_welding, normalize_fix_infty, welding_from_json, welding_to_json)
from .zipper import SampledJordanCurve, arclength_factorization, geodesic_zipper

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3
SCAN_COLUMNS = ("y_re", "y_im", "K_h", "K_hinv", "W", "converged", "panel_doublings")
FORMULAS = ("boundary", "interior", "log", "innerproduct", "factorization")


class UsageError(Exception):
    pass


# -- formatting ----------------------------------------------------------------

def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def scan_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in reports:
        y = ext(r.root)
        ys = ("inf", "inf") if is_inf(y) else (repr(y.real), repr(y.imag))
        w.writerow([*ys, repr(_f(r.K_h)), repr(_f(r.K_hinv)), repr(_f(r.value)),
                    "true" if r.converged else "false", r.doublings])
    return buf.getvalue()


def _f(v):
    return math.nan if v is None else float(v)


def read_scan_csv(text: str) -> list[dict]:
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        y = INF if row["y_re"] == "inf" else complex(float(row["y_re"]), float(row["y_im"]))
        rows.append({"root": y, "K_h": float(row["K_h"]), "K_hinv": float(row["K_hinv"]),
                     "W": float(row["W"]), "converged": row["converged"] == "true",
                     "panel_doublings": int(row["panel_doublings"])})
    return rows


def golden_scan_text() -> str:
    """The stored scan of the example welding at the default configuration."""
    return resources.files("weldnorm").joinpath("data/example_scan.csv").read_text()


# -- inputs --------------------------------------------------------------------

def parse_point(text: str) -> complex:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    try:
        return complex(t.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a point: {text!r}") from None


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_welding(path: str):
    try:
        return welding_from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: not a welding ({exc})") from None


def load_curve(path: str, nodes: int | None) -> SampledJordanCurve:
    text = _read(path)
    try:
        if text.lstrip().startswith(("[", "{")):
            return SampledJordanCurve.from_json(text, resample=nodes)
        return SampledJordanCurve.from_csv(text, resample=nodes)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: not a usable curve ({exc})") from None


def config_from(args) -> QuadratureConfig:
    kw = {}
    if args.gauss_order is not None:
        kw["gauss_order"] = args.gauss_order
    if args.panels is not None:
        kw["panels_per_interval"] = args.panels
    if args.tol is not None:
        kw["target_rel_tol"] = args.tol
    try:
        return QuadratureConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _roots(args, domain):
    mesh = args.mesh if args.mesh is not None else 0.05
    if args.window is not None:
        window = tuple(args.window)
    elif domain == UNIT_CIRCLE:
        window = (0.0, 2.0 * math.pi - mesh)
    else:
        window = (-1.5, 5.5)
    try:
        return scan_roots(window, mesh, domain)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands -------------------------------------------------------------------

def cmd_example(args, out) -> int:
    out.write(_dump(welding_to_json(example_h())))
    if args.golden:
        with open(args.golden, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(golden_scan_text())
    return EXIT_OK


def cmd_scan(args, out) -> int:
    h = load_welding(args.welding)
    reports = W_scan(h, _roots(args, h.domain), config_from(args), args.threads)
    if args.format == "json":
        out.write(_dump({"rows": [r.to_json() for r in reports]}))
    else:
        out.write(scan_csv(reports))
    return EXIT_DIVERGED if any(math.isinf(r.value) for r in reports) else EXIT_OK


def cmd_extrema(args, out) -> int:
    h = load_welding(args.welding)
    try:
        ex = W_extrema(h, config_from(args), _roots(args, h.domain), args.threads)
    except Divergent as exc:
        out.write(_dump({"upper": "inf", "lower": "inf", "gap": "nan", "error": str(exc)}))
        return EXIT_DIVERGED
    out.write(_dump(ex.to_json()))
    return EXIT_OK


def cmd_compose(args, out) -> int:
    h1, h2 = load_welding(args.outer), load_welding(args.inner)
    if h1.domain != h2.domain:
        raise UsageError("the two weldings live on different circles")
    try:
        rep = composition_bound_check(h1, h2, args.K1, args.K2, args.root, config_from(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(_dump(rep.to_json()))
    return EXIT_DIVERGED if math.isinf(rep.lhs) or math.isinf(rep.rhs) else EXIT_OK


def cmd_entropy(args, out) -> int:
    h = load_welding(args.welding)
    if h.domain != REAL_LINE:
        raise UsageError("entropy table needs a welding of the real line")
    if not is_inf(h.eval(INF)):
        h = normalize_fix_infty(h, args.root)[0]
    try:
        table = entropy_scan(h, args.n_max, args.K, config_from(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = table["rows"]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("n", "W", "bound", "slope", "holds", "knots"))
        for r in rows:
            w.writerow((r.n, repr(r.W), repr(r.bound), repr(r.slope),
                        "true" if r.holds else "false", r.knots))
        out.write(buf.getvalue())
    else:
        out.write(_dump({
            "rows": [{"n": r.n, "W": _num(r.W), "bound": _num(r.bound), "slope": _num(r.slope),
                      "holds": r.holds, "knots": r.knots} for r in rows],
            "log_tilde_K": table["log_tilde_K"], "all_hold": table["all_hold"]}))
    return EXIT_DIVERGED if any(math.isinf(r.W) for r in rows) else EXIT_OK


def _energy_of_zipper(pair, formula, root, cfg):
    if formula == "boundary":
        return loewner_energy_boundary(pair.disk_pair(), 0.0 if root is None else root, cfg)
    if formula == "interior":
        return loewner_energy_interior(pair.bounded_pair(), 0.0, INF, cfg)
    if formula == "log":
        return loewner_energy_log_form(pair.bounded_pair(), 0.0, cfg)
    if formula == "innerproduct":
        a, b = loewner_energy_innerproduct(pair.infinity_pair(), cfg)
        return {"value": a, "g_form": b}
    H_f, H_g = arclength_factorization(pair)
    return {"value": arclength_factorization_energy(H_f, H_g, cfg)}


def _energy_of_maps(pair: DiskPair, formula, root, cfg):
    D = pair.D
    u = D.from_unit_disk()(0.0)
    if formula == "boundary":
        w0 = D.boundary.sample_points()[0] if root is None else root
        return loewner_energy_boundary(pair, w0, cfg)
    if formula == "interior":
        return loewner_energy_interior(pair, u, D.reflect(u), cfg)
    if formula == "log":
        return loewner_energy_log_form(pair, u, cfg)
    raise UsageError(f"formula {formula!r} needs a welding on the line; give a curve")


def cmd_energy(args, out) -> int:
    cfg = config_from(args)
    if (args.curve is None) == (args.map is None):
        raise UsageError("give exactly one of --curve and --map")
    try:
        if args.curve is not None:
            res = _energy_of_zipper(geodesic_zipper(load_curve(args.curve, args.nodes)),
                                    args.formula, args.root, cfg)
        else:
            data = _load_json(args.map)
            if data.get("kind") == "zipper":
                pts = [complex(p[0], p[1]) for p in data["points"]]
                curve = SampledJordanCurve.from_points(pts, resample=args.nodes)
                res = _energy_of_zipper(geodesic_zipper(curve), args.formula, args.root, cfg)
            else:
                pair = DiskPair(map_from_json(data["f"]), map_from_json(data["g"]))
                res = _energy_of_maps(pair, args.formula, args.root, cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if isinstance(res, dict):
        report = {k: _num(v) for k, v in res.items()}
        report.update(converged=None, doublings=None, rel_change=None)
        value = res["value"]
    else:
        report = {"value": _num(res.value), "converged": res.converged,
                  "doublings": res.doublings, "rel_change": _num(res.rel_change)}
        value = res.value
    report["formula"] = args.formula
    out.write(_dump(report))
    return EXIT_DIVERGED if math.isinf(value) else EXIT_OK


# -- the invariant suite ---------------------------------------------------------

def _random_mobius(rng, real=False):
    while True:
        v = rng.uniform(-2, 2, 4) if real else rng.uniform(-2, 2, 4) + 1j * rng.uniform(-2, 2, 4)
        a, b, c, d = v
        det = a * d - b * c
        if abs(det) > 0.1 and (not real or det > 0):
            return Mobius(a, b, c, d)


def _disk_automorphism(rng):
    a = 0.6 * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
    rot = np.exp(2j * np.pi * rng.uniform())
    return Mobius(rot, -rot * a, -np.conj(a), 1.0)


def _check_cross_ratio(rng):
    worst = 0.0
    for _ in range(200):
        T = _random_mobius(rng)
        x, y = rng.uniform(-5, 5, 2)
        worst = max(worst, abs(cross_ratio_defect(T, x, y) - 1.0))
    return worst <= 1e-10, worst


def _check_triples(rng):
    worst = 0.0
    for _ in range(50):
        p = rng.normal(size=3) + 1j * rng.normal(size=3)
        q = rng.normal(size=3) + 1j * rng.normal(size=3)
        T = mobius_from_triples(*p, *q)
        worst = max(worst, max(spherical_distance(mobius_apply(T, a), b) for a, b in zip(p, q)))
    return worst <= 1e-10, worst


def _check_welding_inverse(rng):
    h = example_h()
    x = rng.uniform(-3, 8, 100)
    err = float(np.max(np.abs(invert(h).eval(h.eval(x)) - x)))
    mono = bool(np.all(np.diff(h.eval(np.sort(x))) > 0))
    return err <= 1e-9 and mono, err


def _check_L_additivity(rng):
    f = example_h()
    g = invert(f)
    gf = compose(g, f)
    worst = 0.0
    for _ in range(20):
        x, y = rng.uniform(-1.4, 5.4, 2)
        if min(abs(x - k) for k in (0, 1, 3)) < 1e-3:
            continue
        lhs = L_values(gf, np.array([x]), y)[0]
        rhs = L_values(g, np.array([f.eval(x)]), f.eval(y))[0] + L_values(f, np.array([x]), y)[0]
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, worst


def _check_seminorm_oracles(rng):
    cfg = QuadratureConfig()
    cos = BoundaryFunction(lambda z: np.real(z), UNIT_CIRCLE)
    bump = BoundaryFunction(lambda x: 1.0 / (1.0 + x * x), REAL_LINE)
    e1 = abs(h_half_seminorm_sq(cos, cfg) - 0.5)
    e2 = abs(h_half_seminorm_sq(bump, cfg) - 0.125)
    return e1 <= 1e-4 and e2 <= 1e-3, max(e1, e2)


def _check_mobius_vanishing(rng):
    worst = 0.0
    for _ in range(2):
        h = mobius_welding(_random_mobius(rng, real=True))
        for y in (rng.uniform(-2, 2), INF):
            worst = max(worst, W(h, y).value)
    return worst < 1e-6, worst


def _check_B_rules(rng):
    f = QuadraticMap(0.25)
    worst = 0.0
    for _ in range(10):
        M = _disk_automorphism(rng)
        g = MobiusMap(M)
        fg = f.precompose(M)
        z, w = 0.5 * rng.uniform(0, 1, 2) * np.exp(2j * np.pi * rng.uniform(size=2))
        lhs = B(fg, z, w)
        rhs = B(f, mobius_apply(M, z), mobius_apply(M, w)) * M.derivative_array(np.array([z]))[0]
        rhs += B(g, z, w)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, worst


def _check_Bstar_covariance(rng):
    f = QuadraticMap(0.2 + 0.1j)
    g = MobiusMap(Mobius(1, 0.3, 0.2, 1), UNIT_DISK.complement())
    worst = 0.0
    for _ in range(10):
        S = _random_mobius(rng)
        T = _random_mobius(rng)
        E = disk_image(T.inverse(), UNIT_DISK)
        F = f.precompose(T).postcompose(S)
        G = g.precompose(T).postcompose(S)
        z, u = (E.from_unit_disk()(0.6 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()))
                for _ in range(2))
        v = E.reflect(E.from_unit_disk()(0.6 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())))
        dT = T.derivative_array(np.array([z]))[0]
        Tz, Tu, Tv = (mobius_apply(T, p) for p in (z, u, v))
        for op in (B_star, C_op):
            lhs = op(F, G, E, z, u, v)
            rhs = op(f, g, UNIT_DISK, Tz, Tu, Tv) * dT
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst <= 1e-10, worst


def _check_diagonal(rng):
    f = QuadraticMap(0.25)
    worst = 0.0
    for _ in range(10):
        w = 0.5 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        # smaller steps lose digits in f(z) - f(w)
        d = 1e-3 * np.exp(2j * np.pi * rng.uniform())
        est = (B(f, w + d, w) - B(f, w - d, w)) / (2 * d)
        worst = max(worst, abs(est + schwarzian(f, w) / 6.0))
    return worst <= 1e-6, worst


def _check_divergence(rng):
    from .weldenergy import K
    rep = K(corner_welding(), INF)
    return math.isinf(rep.value), rep.value


CHECKS = (
    ("mobius_cross_ratio", _check_cross_ratio),
    ("mobius_triples", _check_triples),
    ("welding_inverse_monotone", _check_welding_inverse),
    ("L_composition_additivity", _check_L_additivity),
    ("seminorm_oracles", _check_seminorm_oracles),
    ("W_vanishes_on_mobius", _check_mobius_vanishing),
    ("B_composition_rule", _check_B_rules),
    ("Bstar_C_covariance", _check_Bstar_covariance),
    ("B_diagonal_schwarzian", _check_diagonal),
    ("corner_welding_diverges", _check_divergence),
)


def run_checks(seed: int) -> dict:
    results = []
    for i, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        try:
            ok, detail = fn(rng)
            results.append({"name": name, "passed": bool(ok), "worst": _num(detail)})
        except Exception as exc:  # a crash is a failed invariant, not a usage error
            results.append({"name": name, "passed": False, "error": f"{type(exc).__name__}: {exc}"})
    return {"seed": seed, "checks": results, "all_passed": all(r["passed"] for r in results)}


def cmd_verify(args, out) -> int:
    t0 = time.perf_counter()
    report = run_checks(args.seed)
    out.write(_dump(report))
    if args.manifest:
        manifest = {"command": "verify", "seed": args.seed, "cfg": config_from(args).to_json(),
                    "version": __version__, "wall_time_s": time.perf_counter() - t0}
        with open(args.manifest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_dump(manifest))
    return EXIT_OK if report["all_passed"] else EXIT_INVARIANT


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", type=float, help="root spacing of scans (default 0.05)")
    common.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                        help="root window; angles on the circle (default -1.5 5.5)")
    common.add_argument("--gauss-order", type=int)
    common.add_argument("--panels", type=int, help="panels per interval")
    common.add_argument("--tol", type=float, help="target relative tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int,
                        help="worker threads (falls back to WELDNORM_THREADS, then 1)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="weldnorm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"weldnorm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("example", parents=[common], help="print the example welding as JSON")
    s.add_argument("--golden", metavar="PATH", help="also write the stored example scan here")
    s.set_defaults(run=cmd_example)

    s = sub.add_parser("scan", parents=[common], help="W_h(y) over a mesh of roots")
    s.add_argument("welding", help="welding JSON file, or - for stdin")
    s.set_defaults(run=cmd_scan)

    s = sub.add_parser("extrema", parents=[common], help="upper and lower energies and the gap")
    s.add_argument("welding")
    s.set_defaults(run=cmd_extrema)

    s = sub.add_parser("compose", parents=[common], help="composition bound for h1 o h2")
    s.add_argument("outer")
    s.add_argument("inner")
    s.add_argument("--K1", type=float, required=True)
    s.add_argument("--K2", type=float, required=True)
    s.add_argument("--root", type=parse_point, default=INF)
    s.set_defaults(run=cmd_compose)

    s = sub.add_parser("entropy", parents=[common], help="W of iterates at infinity")
    s.add_argument("welding")
    s.add_argument("--n-max", type=int, default=3)
    s.add_argument("--K", type=float, required=True)
    s.add_argument("--root", type=parse_point, default=0.0,
                   help="root sent to infinity when the welding moves infinity")
    s.set_defaults(run=cmd_entropy)

    s = sub.add_parser("energy", parents=[common], help="Loewner energy of a curve or map pair")
    s.add_argument("--curve", help="CSV of x,y rows or JSON point list")
    s.add_argument("--map", help="JSON: {f, g} closed-form pair, or a zipper point list")
    s.add_argument("--nodes", type=int, help="resample the curve to this many nodes")
    s.add_argument("--formula", choices=FORMULAS, default="boundary")
    s.add_argument("--root", type=parse_point, help="boundary root for the boundary formula")
    s.set_defaults(run=cmd_energy)

    s = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    s.add_argument("--manifest", metavar="PATH", help="write a run manifest with wall time")
    s.set_defaults(run=cmd_verify)
    return p


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.threads = resolve_threads(args.threads)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"weldnorm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args, out)
    except UsageError as exc:
        print(f"weldnorm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
