"""The ``anglers`` command.

Every command prints a canonical JSON report on stdout and human notes on
stderr. Exit codes: 0 success, 1 the mathematics says no, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .angles import (
    AngleAssignment,
    AngleError,
    LemmaViolation,
    PartiallyFlatAssignment,
    binding_slack,
    build_polytope,
    check_partially_flat,
    perturb,
    solve,
    solve_float,
    t_max,
    verify,
)
from .config import float_tolerance
from .io import (
    InputError,
    canonical,
    load_angles,
    load_decomposition,
    load_fixed,
    load_surface,
    load_triangulation,
    write_json,
)
from .layered import DiagonalMissesHyperbolicSpace, LayeredError, build
from .surfaces import SurfaceError, check_admissibility, inner_angles, prop_verdict
from .triangulation import validate
from .volume import MaximizeOptions, maximize, total_volume

OK, NEGATIVE, BAD_INPUT = 0, 1, 2


class Outcome:
    def __init__(self, code: int, report: dict, notes: list[str] | None = None):
        self.code = code
        self.report = report
        self.notes = notes or []


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _number(raw: str) -> Fraction | float:
    try:
        return Fraction(raw)
    except ValueError:
        return float(raw)


def _tol(args) -> float:
    return args.tol if getattr(args, "tol", None) is not None else float_tolerance()


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> Outcome:
    tri = load_triangulation(args.triangulation, require_oriented=False)
    rep = validate(tri)
    report = {
        "valid": rep.ok,
        "failures": rep.failures,
        "warnings": rep.warnings,
        "edge_classes": [{"id": i, "valence": v, "corners": c} for i, v, c in rep.edge_table],
        "boundary": [{"component": b, "euler_characteristic": chi} for b, chi in rep.boundary],
    }
    notes = [f"e{i}: valence {v}: {' '.join(c)}" for i, v, c in rep.edge_table]
    notes += [f"boundary b{b}: chi = {chi}" for b, chi in rep.boundary]
    notes += [f"warning: {w}" for w in rep.warnings] + [f"FAIL: {f}" for f in rep.failures]
    return Outcome(NEGATIVE if rep.failures else OK, report, notes)


def cmd_angles_find(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    fixed, tags = load_fixed(args.fixed, tri) if args.fixed else ({}, None)
    poly = build_polytope(tri, fixed)
    if args.exact:
        out = solve(poly)
    else:
        out = solve_float(poly)
        if out is None:
            return Outcome(NEGATIVE, {"status": "infeasible", "exact": False}, ["edge equations are inconsistent"])
    report = {
        "status": out.status,
        "exact": args.exact,
        "slack": str(out.slack) if isinstance(out.slack, Fraction) else out.slack,
        "dimensions": poly.dimensions,
    }
    notes = [f"status: {out.status}, optimal slack s* = {out.slack} (units of pi)"]
    if out.witness is not None and out.status == "strictly_feasible":
        witness = out.witness
        if tags is not None:
            witness = PartiallyFlatAssignment(witness.values, tags)
        if args.out:
            write_json(witness.to_dict(), args.out)
            report["witness"] = str(args.out)
        else:
            report["witness"] = witness.to_dict()
        return Outcome(OK, report, notes)
    if out.certificate is not None:
        cert = out.certificate.to_dict()
        cert["verified"] = out.certificate.verify(poly)
        path = args.certificate or (Path(args.out).with_suffix(".certificate.json") if args.out else None)
        if path:
            write_json(cert, path)
            report["certificate"] = str(path)
            notes.append(f"certificate written to {path}")
        else:
            report["certificate"] = cert
    notes.append("no strict angle structure")
    return Outcome(NEGATIVE, report, notes)


def cmd_angles_verify(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    alpha = load_angles(args.angles, tri)
    rep = verify(tri, alpha, tol=_tol(args))
    report = {
        "passed": rep.passed,
        "exact": rep.exact,
        "failures": rep.failures,
        "max_edge_residual": max(rep.edge_residuals.values()),
        "min_vertex_margin": rep.min_vertex_margin,
        "min_angle": rep.min_angle,
        "tolerance": _tol(args),
    }
    return Outcome(OK if rep.passed else NEGATIVE, report, rep.format().splitlines())


def cmd_angles_perturb(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    beta = load_angles(args.beta, tri)
    if not isinstance(beta, PartiallyFlatAssignment):
        raise InputError(f"{args.beta}: a partially flat assignment needs tetrahedron tags")
    problems = check_partially_flat(tri, beta)
    lemma = [p for p in problems if p.startswith("edge with no interior angle")]
    if lemma:
        return Outcome(NEGATIVE, {"status": "lemma_violation", "problems": problems}, lemma)
    if problems:
        raise InputError(f"{args.beta}: " + "; ".join(problems))
    bound = t_max(tri, beta)
    if args.t is None:
        t = bound.value / 2
    else:
        t = _number(args.t)
        if not beta.exact:
            t = float(t)
    if not 0 < t < bound.value:
        raise InputError(f"t = {t} is outside (0, t_max = {bound.value})")
    alpha = perturb(tri, beta, t)
    rep = verify(tri, alpha, tol=max(_tol(args), 1e-9) if not alpha.exact else 0.0)
    report = {
        "t": str(t) if isinstance(t, Fraction) else t,
        "t_max": str(bound.value) if isinstance(bound.value, Fraction) else float(bound.value),
        "binding": bound.describe(),
        "binding_slack_at_t_max": binding_slack(tri, beta, bound),
        "verified": rep.passed,
        "failures": rep.failures,
    }
    if args.out:
        write_json(alpha.to_dict(), args.out)
        report["angles"] = str(args.out)
    else:
        report["angles"] = alpha.to_dict()
    notes = [f"t_max = {bound.value} ({bound.describe()}); using t = {t}"]
    return Outcome(OK if rep.passed else NEGATIVE, report, notes)


def _strict(tri, path) -> AngleAssignment:
    alpha = load_angles(path, tri)
    rep = verify(tri, alpha, tol=max(float_tolerance(), 1e-9))
    if not rep.passed:
        raise InputError(f"{path}: not a strict angle structure: " + "; ".join(rep.failures[:3]))
    return alpha


def cmd_volume_eval(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    alpha = _strict(tri, args.angles)
    rep = total_volume(tri, alpha, threads=args.threads)
    return Outcome(OK, rep.to_dict(), [f"volume: {rep.total_volume:.15g}"])


def cmd_volume_maximize(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    alpha = _strict(tri, args.angles)
    opts = MaximizeOptions(threads=args.threads)
    if args.tol is not None:
        opts.tol = args.tol
    if args.max_iters is not None:
        opts.max_iters = args.max_iters
    if args.guard is not None:
        opts.guard = args.guard
    try:
        res = maximize(tri, alpha, opts)
    except AngleError as exc:
        raise InputError(str(exc)) from exc
    report = res.to_dict()
    if args.out:
        write_json(res.angles.to_dict(), args.out)
        report["angles"] = str(args.out)
    notes = [f"status: {res.status} after {res.iterations} iterations, volume {res.report.total_volume:.15g}"]
    if res.status == "boundary":
        notes.append("warning: the maximum sits on the boundary of the angle polytope; pinned:")
        notes += [f"  {p}" for p in res.pinned]
    elif res.status == "max_iters":
        notes.append("warning: iteration limit reached before convergence")
    if res.stalled:
        notes.append("note: line search reached float resolution before the gradient tolerance")
    return Outcome(OK, report, notes)


def cmd_surface_check(args) -> Outcome:
    tri = load_triangulation(args.triangulation)
    alpha = _strict(tri, args.angles)
    surface = load_surface(args.surface)
    try:
        adm = check_admissibility(tri, surface)
        if not adm.ok:
            return Outcome(NEGATIVE, {"admissible": False, "violations": adm.violations}, adm.violations)
        theta = inner_angles(tri, surface, alpha)
        verdict = prop_verdict(tri, surface, theta)
    except SurfaceError as exc:
        raise InputError(f"{args.surface}: {exc}") from exc
    report = {
        "admissible": True,
        "chi_combinatorial": str(verdict.chi),
        "chi_angle": str(verdict.chi_angle) if isinstance(verdict.chi_angle, Fraction) else float(verdict.chi_angle),
        "consistent": verdict.consistent,
        "disk_types": verdict.lemma.disk_types,
        "verdict": verdict.label,
        "lemma_failures": verdict.lemma.failures,
    }
    code = OK
    if not verdict.consistent:
        code = BAD_INPUT
    elif not verdict.holds:
        code = NEGATIVE
    return Outcome(code, report, verdict.format().splitlines())


def cmd_layered_build(args) -> Outcome:
    decomp = load_decomposition(args.decomposition)
    try:
        out = build(decomp, geometric=args.geometry)
    except (DiagonalMissesHyperbolicSpace, LemmaViolation) as exc:
        return Outcome(NEGATIVE, {"error": str(exc)}, [str(exc)])
    except LayeredError as exc:
        raise InputError(f"{args.decomposition}: {exc}") from exc
    prefix = Path(args.out_dir) / args.name
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    files = {"triangulation": f"{prefix}.triangulation.json", "provenance": f"{prefix}.provenance.json"}
    write_json(out.triangulation.to_dict(), files["triangulation"])
    write_json(out.provenance_dict(), files["provenance"])
    if out.beta is not None:
        files["beta"] = f"{prefix}.beta.json"
        write_json(out.beta.to_dict(), files["beta"])
    else:
        files["tags"] = f"{prefix}.tags.json"
        write_json(out.tags_dict(), files["tags"])
    report = {
        "tetrahedra": out.triangulation.tet_count,
        "flat_tetrahedra": out.flat_count,
        "flats_per_pairing": out.flats_per_pairing,
        "files": files,
    }
    notes = [f"{out.triangulation.tet_count} tetrahedra, {out.flat_count} flat"]
    return Outcome(OK, report, notes)


# -- argument parsing ----------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anglers", description="Angle structures on ideal triangulations.")
    p.add_argument("--version", action="version", version=f"anglers {__version__}")
    p.add_argument("--threads", type=int, default=1, help="worker threads for per-tetrahedron maps")
    p.add_argument("--quiet", action="store_true", help="suppress notes on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a triangulation file")
    v.add_argument("triangulation")
    v.set_defaults(func=cmd_validate)

    ang = sub.add_parser("angles", help="find, verify or perturb angle structures").add_subparsers(
        dest="action", required=True
    )
    f = ang.add_parser("find", help="max-slack linear program")
    f.add_argument("triangulation")
    f.add_argument("--out", help="witness angle file")
    f.add_argument("--certificate", help="Farkas certificate file")
    f.add_argument("--fixed", help="tags file whose corner values are held fixed")
    f.add_argument("--exact", dest="exact", action="store_true", default=True)
    f.add_argument("--no-exact", dest="exact", action="store_false", help="floating-point LP")
    f.set_defaults(func=cmd_angles_find)
    ver = ang.add_parser("verify", help="check the strict conditions")
    ver.add_argument("triangulation")
    ver.add_argument("angles")
    ver.add_argument("--tol", type=float)
    ver.set_defaults(func=cmd_angles_verify)
    per = ang.add_parser("perturb", help="deform a partially flat assignment into a strict one")
    per.add_argument("triangulation")
    per.add_argument("beta")
    per.add_argument("--t", help="parameter in units of pi (default t_max/2)")
    per.add_argument("--out")
    per.add_argument("--tol", type=float)
    per.set_defaults(func=cmd_angles_perturb)

    vol = sub.add_parser("volume", help="volume functional").add_subparsers(dest="action", required=True)
    ev = vol.add_parser("eval")
    ev.add_argument("triangulation")
    ev.add_argument("angles")
    ev.set_defaults(func=cmd_volume_eval)
    mx = vol.add_parser("maximize")
    mx.add_argument("triangulation")
    mx.add_argument("angles")
    mx.add_argument("--out")
    mx.add_argument("--tol", type=float)
    mx.add_argument("--max-iters", type=int)
    mx.add_argument("--guard", type=float)
    mx.set_defaults(func=cmd_volume_maximize)

    srf = sub.add_parser("surface").add_subparsers(dest="action", required=True)
    sc = srf.add_parser("check", help="admissibility and Euler characteristic checks")
    sc.add_argument("triangulation")
    sc.add_argument("angles")
    sc.add_argument("surface")
    sc.set_defaults(func=cmd_surface_check)

    lay = sub.add_parser("layered").add_subparsers(dest="action", required=True)
    lb = lay.add_parser("build", help="layered triangulation of a polyhedral decomposition")
    lb.add_argument("decomposition")
    lb.add_argument("--geometry", action="store_true", help="compute beta from vertex coordinates")
    lb.add_argument("--out-dir", default=".")
    lb.add_argument("--name", default="layered")
    lb.set_defaults(func=cmd_layered_build)
    return p


def run(args: argparse.Namespace) -> Outcome:
    if args.threads < 1:
        return Outcome(BAD_INPUT, {"error": "--threads must be positive"})
    try:
        float_tolerance()
    except ValueError as exc:
        return Outcome(BAD_INPUT, {"error": str(exc)}, [f"error: {exc}"])
    try:
        return args.func(args)
    except InputError as exc:
        return Outcome(BAD_INPUT, {"error": str(exc)}, [f"error: {exc}"])


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return BAD_INPUT if exc.code else OK
    outcome = run(args)
    sys.stdout.write(canonical(outcome.report))
    if not args.quiet:
        for line in outcome.notes:
            _note(line)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
