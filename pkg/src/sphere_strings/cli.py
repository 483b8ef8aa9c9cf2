"""Command line entry point: ``sphere-strings <group> <command> ...``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric
non-convergence.  Every command takes ``--format text|json|csv``.  A key-value
config file given with ``--config`` supplies defaults for the command's flags;
flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys

import numpy as np

from . import __version__
from . import coalgebra as co
from . import extension as ext
from . import geodesics as geo
from . import homology as hom
from . import resonance as res
from . import sphere_algebra as sa
from .graded import CoefficientRing, IllegalGenerator, parse_element

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = {"algebra", "coalgebra", "homology", "geodesics", "resonance", "density",
            "mul", "verify", "associativity", "involutions", "apply", "dual",
            "table", "diagram", "spectrum", "shoot", "index", "average"}


class UsageError(ValueError):
    pass


def tables_hash() -> str:
    """Hash of the embedded product and coproduct tables."""
    h = hashlib.sha256()
    for n in (1, 2, 3, 4):
        h.update(sa.SphereAlgebraTable(n).table_hash().encode())
    for X in co.homology_basis(2, 5):
        for fn in (co.copairing_gen, co.comodule_left_gen, co.comodule_right_gen):
            try:
                h.update(fn(X).text().encode())
            except co.UnsupportedGenerator:
                h.update(b"-")
    return h.hexdigest()[:16]


def banner() -> str:
    return f"sphere-strings {__version__} tables {tables_hash()}"


# ---- output ---------------------------------------------------------------

def _cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def render(fmt: str, payload: dict, rows: list | None = None,
           columns: list | None = None, text: str | None = None) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, default=_json_default)
    if fmt == "csv":
        if rows is None:
            rows = [{k: v for k, v in payload.items() if not isinstance(v, (list, dict))}]
        columns = columns or list(rows[0].keys()) if rows else (columns or [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])
        return buf.getvalue().rstrip("\n")
    out = [f"# {banner()}"]
    if text is not None:
        out.append(text)
    elif rows is not None:
        out.append(_table(rows, columns or list(rows[0].keys()) if rows else []))
    else:
        out += [f"{k}: {_cell(v)}" for k, v in payload.items()]
    return "\n".join(out)


def _table(rows, columns) -> str:
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    line = lambda vals: "  ".join(v.rjust(w) for v, w in zip(vals, widths))   # noqa: E731
    return "\n".join([line(columns), line(["-" * w for w in widths])] + [line(r) for r in cells])


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


# ---- algebra --------------------------------------------------------------

def _table_for(args) -> sa.SphereAlgebraTable:
    ring = CoefficientRing.parse(args.coeff) if getattr(args, "coeff", None) else None
    return sa.SphereAlgebraTable(args.n, ring)


def cmd_algebra_mul(args):
    t = _table_for(args)
    x = parse_element(args.x, args.n, t.ring)
    y = parse_element(args.y, args.n, t.ring)
    for e in (x, y):
        for g, _ in e.items():
            t.check_legal(g)
    z = t.product(x, y)
    payload = {"n": args.n, "ring": t.ring.value, "x": x.text(), "y": y.text(),
               "product": z.text(), "degree": str(z.degree()), "terms": z.to_json()}
    return EXIT_OK, render(args.format, payload)


def cmd_algebra_verify(args):
    t = _table_for(args)
    checks = {
        "presentation": sa.verify_presentation(t, args.cutoff),
        "unit": sa.check_unit(t, args.cutoff),
        "degree": sa.check_degree_law(t, args.cutoff),
    }
    if t.regime is not sa.Regime.CIRCLE:
        checks["signed-commutation"] = sa.check_sign_commutation(t, args.cutoff)
    p = sa.presentation(t)
    return _report(args, {"n": args.n, "regime": t.regime.value, "cutoff": args.cutoff,
                          "presentation": p.name}, checks)


def cmd_algebra_associativity(args):
    t = _table_for(args)
    a, b, p = ext.table_parts(t)
    checks = {"associativity": sa.check_associativity(t, args.cutoff),
              "adapted": ext.check_adapted(a, b, p, args.cutoff)}
    return _report(args, {"n": args.n, "cutoff": args.cutoff}, checks)


def cmd_algebra_involutions(args):
    t = _table_for(args)
    found = ext.find_degree0_involutions(ext.table_algebra(t), args.cutoff, args.bound)
    payload = {"n": args.n, "cutoff": args.cutoff, "bound": args.bound,
               "involutions": [e.text() for e in found],
               "nontrivial_extension_witness": not found}
    rows = [{"involution": e.text()} for e in found] or [{"involution": "none"}]
    return EXIT_OK, render(args.format, payload, rows)


def _report(args, head: dict, checks: dict):
    failures = {k: v for k, v in checks.items() if v}
    payload = dict(head)
    payload["checks"] = {k: len(v) for k, v in checks.items()}
    payload["failures"] = failures
    payload["ok"] = not failures
    rows = [{"check": k, "failures": len(v), "status": "pass" if not v else "FAIL"}
            for k, v in checks.items()]
    text = _table(rows, ["check", "failures", "status"])
    for k, v in failures.items():
        for f in v[:10]:
            text += f"\n  {k}: {json.dumps(f, default=str)}"
    return (EXIT_OK if not failures else EXIT_FAIL), render(args.format, payload, rows, text=text)


# ---- coalgebra ------------------------------------------------------------

MAPS = {"copairing": co.copairing, "comodule-left": co.comodule_left,
        "comodule-right": co.comodule_right, "loop": co.loop_coproduct}
_COH = re.compile(r"\s*([ab])\[(\d+)\]\s*")


def _cohomology(text: str, n: int) -> co.CohomologyGenerator:
    m = _COH.fullmatch(text)
    if not m:
        raise UsageError(f"cannot parse cohomology class {text!r} (expected a[i] or b[i])")
    return co.CohomologyGenerator(m.group(1), int(m.group(2)), n)


def cmd_coalgebra_apply(args):
    X = parse_element(args.x, args.n, CoefficientRing.QQ)
    out = MAPS[args.map](args.n, X)
    payload = {"n": args.n, "map": args.map, "input": X.text(), "output": out.text(),
               "terms": out.to_json()}
    text = f"{args.map}({X.text()}) = {out.text()}"
    if args.map == "copairing":
        payload["note"] = co.COPAIRING_NOTE
        text += f"\nnote: {co.COPAIRING_NOTE}"
    rows = [{"left": a.text(), "right": b.text(), "coefficient": str(c)} for (a, b), c in out.items()]
    return EXIT_OK, render(args.format, payload, rows or None, ["left", "right", "coefficient"], text)


def cmd_coalgebra_dual(args):
    phi, psi = _cohomology(args.phi, args.n), _cohomology(args.psi, args.n)
    r = co.dual_product(args.n, phi, psi)
    payload = {"n": args.n, "phi": phi.text(), "psi": psi.text(),
               "product": co.render_signed(r),
               "sign": None if r is None else r[0],
               "class": None if r is None else r[1].text()}
    return EXIT_OK, render(args.format, payload,
                           text=f"{phi.text()} o {psi.text()} = {co.render_signed(r)}")


def cmd_coalgebra_verify(args):
    rep = co.verify_gh_structure(args.n, args.cutoff)
    assoc = co.associativity_status(args.n, args.cutoff)
    head = {"n": args.n, "cutoff": args.cutoff, "associativity_reported": assoc}
    return _report(args, head, {"gh-structure": rep.failures})


# ---- homology -------------------------------------------------------------

def cmd_homology_table(args):
    ring = CoefficientRing.parse(args.coeff)
    rows = hom.homology_table(args.space, args.n, ring, args.max_degree)
    payload = {"space": args.space, "n": args.n, "ring": ring.value, "rows": rows}
    return EXIT_OK, render(args.format, payload, rows, ["degree", "group", "strata"])


def cmd_homology_diagram(args):
    boxes = hom.diagram_boxes(args.space, args.n, args.levels)
    payload = {"space": args.space, "n": args.n, "levels": args.levels, "boxes": boxes}
    return EXIT_OK, render(args.format, payload, boxes, ["label", "bottom", "top", "manifold"],
                           hom.emit_stacked_diagram(args.space, args.n, args.levels))


def cmd_homology_spectrum(args):
    strata = hom.critical_spectrum(args.space, args.n, args.max_length)
    rows = [s.to_dict() for s in strata]
    cols = ["multiplicity", "length", "energy", "index", "nullity", "manifold"]
    return EXIT_OK, render(args.format, {"strata": rows}, rows, cols)


# ---- geodesics ------------------------------------------------------------

def _metric(args) -> geo.MetricSpec:
    return geo.MetricSpec.parse(args.metric, args.n)


def _vec(text, dim, name):
    if text is None:
        return None
    v = np.array([float(x) for x in text.split(",")])
    if len(v) != dim:
        raise UsageError(f"--{name} needs {dim} comma-separated numbers")
    return v


def _start(args, m):
    N = m.n + 1
    p = _vec(args.p, N, "p")
    if p is not None:
        p = p / np.linalg.norm(p)
    d = _vec(args.direction, N, "direction")
    p, v = geo.level_guess(m, args.level, p, d)
    if args.speed is not None:
        v = v / math.sqrt(float(m.norm2(p, v))) * args.speed
    return p, v


def _shoot(args, m):
    p, v = _start(args, m)
    steps = geo.default_steps(m, p, v, steps_per_pi=args.steps_per_pi)
    return geo.shoot_antipodal(m, p, v, tol=args.tol, max_iter=args.max_iter,
                               fd_step=args.fd_step, steps=steps)


def _geo_row(m, rec, rep):
    return {"length": rec.length, "energy": rec.energy, "index": rep.index,
            "nullity_flag": int(rep.kernel_flagged or rep.kernel_dim != 2 * m.n - 1)}


def cmd_geodesics_shoot(args):
    m = _metric(args)
    rec = _shoot(args, m)
    payload = rec.to_dict(args.samples)
    return EXIT_OK, render(args.format, payload)


def cmd_geodesics_index(args):
    m = _metric(args)
    rec = _shoot(args, m)
    rep = geo.jacobi_index(m, rec)
    payload = {"geodesic": rec.to_dict(), "index": rep.to_dict()}
    row = _geo_row(m, rec, rep)
    text = "\n".join([f"length: {rec.length:.12g} ({rec.length / math.pi:.12g} pi)",
                      f"energy: {rec.energy:.12g}", f"index: {rep.index}",
                      f"kernel_dim: {rep.kernel_dim}",
                      "conjugate times: " + ", ".join(f"{c.t:.10g} (x{c.multiplicity})"
                                                      for c in rep.conjugate_points)]
                     + [f"flag: {f}" for f in rep.flags])
    return EXIT_OK, render(args.format, payload, [row], list(row), text)


def cmd_geodesics_spectrum(args):
    m = _metric(args)
    rng = np.random.default_rng(args.seed)
    N = m.n + 1
    starts = []
    for _ in range(args.count):
        p = rng.normal(size=N)
        p /= np.linalg.norm(p)
        u = rng.normal(size=N)
        u -= (u @ p) * p
        u /= np.linalg.norm(u)
        s = rng.uniform(args.min_speed, args.max_speed)
        starts.append((p, s * u / math.sqrt(float(m.norm2(p, u)))))
    out = geo.shoot_antipodal_batch(m, starts, tol=args.tol, max_iter=args.max_iter,
                                    fd_step=args.fd_step)
    rows, failed = [], 0
    for rec in out:
        if isinstance(rec, geo.ShootingFailure):
            failed += 1
            rows.append({"length": "", "energy": "", "index": "", "nullity_flag": "nonconvergent"})
            continue
        rows.append(_geo_row(m, rec, geo.jacobi_index(m, rec)))
    payload = {"metric": m.text(), "n": m.n, "seed": args.seed, "rows": rows, "failed": failed}
    code = EXIT_NUMERIC if failed else EXIT_OK
    return code, render(args.format, payload, rows, ["length", "energy", "index", "nullity_flag"])


def cmd_geodesics_average(args):
    m = _metric(args)
    rec = _shoot(args, m)
    a = geo.average_index(m, rec, args.k_max)
    rows = [{"k": k, "index": i} for k, i in enumerate(a.indices, 1)]
    return EXIT_OK, render(args.format, a.to_dict(), rows, ["k", "index"])


# ---- resonance and density ------------------------------------------------

def cmd_resonance(args):
    r = res.resonance_check(args.n, args.cutoff)
    cols = ["generator", "degree", "cr", "deviation", "inside"]
    text = (f"alpha_bar = {r.alpha_bar_pi}/pi, mu = {r.mu_pi}pi, beta = {r.beta}, "
            f"bound = {r.bound}\n" + _table(r.records, cols))
    return (EXIT_OK if r.ok else EXIT_FAIL), render(args.format, r.to_dict(), r.records, cols, text)


def cmd_density(args):
    m = _metric(args)
    args.level = 0
    rec = _shoot(args, m)
    a = geo.average_index(m, rec, args.k_max)
    d = geo.density_sum(m, [a], args.eps)
    payload = {"geodesic": rec.to_dict(), "average_index": a.to_dict(), "density": d.to_dict()}
    text = (f"alpha = {a.alpha} over k <= {args.k_max}\n"
            f"sum 1/alpha = {d.total} vs bound {d.bound}: {'pass' if d.passed else 'FAIL'}")
    row = {"alpha": float(a.alpha), "sum": float(d.total), "bound": float(d.bound),
           "passed": d.passed}
    return (EXIT_OK if d.passed else EXIT_FAIL), render(args.format, payload, [row], list(row), text)


# ---- parser ---------------------------------------------------------------

def _common(p):
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")


def _geo_flags(p, metric="round"):
    p.add_argument("--metric", default=metric, help="round | ellipsoid:a0,a1,... | conformal:1;c*x0^2")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--level", type=int, default=0, help="target the level-th antipodal geodesic")
    p.add_argument("--p", default=None, help="start point, comma separated")
    p.add_argument("--direction", default=None, help="initial direction, comma separated")
    p.add_argument("--speed", type=float, default=None, help="initial speed guess")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--fd-step", type=float, default=1e-6)
    p.add_argument("--steps-per-pi", type=int, default=geo.STEPS_PER_PI)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sphere-strings", description="String topology tables for spheres")
    ap.add_argument("--version", action="version", version=banner())
    top = ap.add_subparsers(dest="group", required=True)

    alg = top.add_parser("algebra").add_subparsers(dest="cmd", required=True)
    p = alg.add_parser("mul")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--coeff", default=None)
    p.set_defaults(func=cmd_algebra_mul)
    for name, fn, cut in (("verify", cmd_algebra_verify, 10),
                          ("associativity", cmd_algebra_associativity, 8)):
        p = alg.add_parser(name)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--cutoff", type=int, default=cut)
        p.add_argument("--coeff", default=None)
        p.set_defaults(func=fn)
    p = alg.add_parser("involutions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=2)
    p.add_argument("--bound", type=int, default=2)
    p.add_argument("--coeff", default=None)
    p.set_defaults(func=cmd_algebra_involutions)
    for q in alg.choices.values():
        _common(q)

    coal = top.add_parser("coalgebra").add_subparsers(dest="cmd", required=True)
    p = coal.add_parser("apply")
    p.add_argument("x")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--map", choices=sorted(MAPS), default="copairing")
    p.set_defaults(func=cmd_coalgebra_apply)
    p = coal.add_parser("dual")
    p.add_argument("phi")
    p.add_argument("psi")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_coalgebra_dual)
    p = coal.add_parser("verify")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=8)
    p.set_defaults(func=cmd_coalgebra_verify)
    for q in coal.choices.values():
        _common(q)

    h = top.add_parser("homology").add_subparsers(dest="cmd", required=True)
    p = h.add_parser("table")
    p.add_argument("--space", default="P")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--coeff", default="Z")
    p.add_argument("--max-degree", type=int, default=12)
    p.set_defaults(func=cmd_homology_table)
    p = h.add_parser("diagram")
    p.add_argument("--space", default="P")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(func=cmd_homology_diagram)
    p = h.add_parser("spectrum")
    p.add_argument("--space", default="P")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-length", type=float, default=10.0)
    p.set_defaults(func=cmd_homology_spectrum)
    for q in h.choices.values():
        _common(q)

    g = top.add_parser("geodesics").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("shoot")
    _geo_flags(p)
    p.add_argument("--samples", type=int, default=0, help="trajectory samples in the JSON record")
    p.set_defaults(func=cmd_geodesics_shoot)
    p = g.add_parser("index")
    _geo_flags(p)
    p.set_defaults(func=cmd_geodesics_index)
    p = g.add_parser("average")
    _geo_flags(p)
    p.add_argument("--k-max", type=int, default=12)
    p.set_defaults(func=cmd_geodesics_average)
    p = g.add_parser("spectrum")
    _geo_flags(p)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-speed", type=float, default=2.0)
    p.add_argument("--max-speed", type=float, default=14.0)
    p.set_defaults(func=cmd_geodesics_spectrum)
    for q in g.choices.values():
        _common(q)

    p = top.add_parser("resonance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=20)
    p.set_defaults(func=cmd_resonance)
    _common(p)

    p = top.add_parser("density")
    _geo_flags(p)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--k-max", type=int, default=12)
    p.set_defaults(func=cmd_density)
    _common(p)
    return ap


def load_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into command line flags."""
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out += ["--" + k.replace("_", "-"), v]
    return out


def _expand(argv: list[str]) -> list[str]:
    argv = list(argv)
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file")
    extra = load_config(argv[i + 1])
    del argv[i:i + 2]
    j = 0
    while j < len(argv) and argv[j] in COMMANDS:
        j += 1
    return argv[:j] + extra + argv[j:]


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        argv = _expand(argv)
    except (UsageError, OSError) as e:
        print(f"sphere-strings: {e}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and EXIT_USAGE
    try:
        code, out = args.func(args)
    except (geo.ShootingFailure, geo.IntegrationFailure) as e:
        print(f"sphere-strings: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, IllegalGenerator, sa.UnsupportedSphere, co.UnsupportedGenerator,
            ValueError) as e:
        print(f"sphere-strings: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
