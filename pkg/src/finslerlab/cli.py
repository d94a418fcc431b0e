"""Command line entry point: ``finslerlab <command> --scenario <path> ...``.

Exit codes: 0 every check passed, 1 a check failed or the geometry broke down,
2 the scenario (or the command line) is malformed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .duality import legendre, legendre_inverse
from .engine import derivative_mode, tolerance_floor
from .errors import ConfigurationError, GeometryError
from .isoparametric import isoparametric_check, minkowski_dual_check, sample_levels
from .models import AlphaBetaMetric, DualAlphaBetaMetric, HelicoidMetric, KropinaMetric
from .phi import validate_phi
from .report import Check, Report, check_rng
from .reproduce import cone_samples, reproduce_paper, summary_lines
from .scenario import Scenario, default_volume, load_scenario
from .shape import kropina_equivalence_report, shape_operator, umbilic_minimal_flags
from .tensors import eval_metric, fundamental_tensor
from .zoo import killing_check

COMMANDS = ("validate-metric", "surface-report", "isoparametric-check", "kropina-compare", "reproduce-paper")
MAX_LISTED_FAILURES = 20


def _effective_tol(tol: float) -> float:
    return max(tol, tolerance_floor())


def _box(sc: Scenario):
    if "box" in sc.raw:
        b = np.asarray(sc.raw["box"], dtype=float)
        return b[0], b[1]
    return -np.ones(sc.model.dim), np.ones(sc.model.dim)


# ---------------------------------------------------------------------------
# validate-metric


def _pointwise_check(name, samples, measure, tol):
    """``measure(x, y)`` returns (deviation, computed, expected)."""
    worst, failures = 0.0, []
    for x, y in samples:
        dev, got, want = measure(x, y)
        worst = max(worst, dev)
        if dev > tol and len(failures) < MAX_LISTED_FAILURES:
            failures.append({"x": x.tolist(), "y": y.tolist(), "computed": got, "expected": want})
    return Check(name, worst <= tol, worst, tol, {"samples": len(samples)}, failures)


def validate_metric(sc: Scenario, report: Report) -> None:
    model = sc.model
    tol = _effective_tol(sc.tol)
    rng = check_rng(sc.seed, "validate-metric")
    samples = cone_samples(model, rng, int(sc.get("samples", 20)), _box(sc))
    for x, _ in samples:
        model.check_point(x)

    def homogeneity(x, y):
        F = eval_metric(model, x, y)
        worst = (0.0, F, F)
        for lam in (0.5, 3.0):
            got, want = eval_metric(model, x, lam * y), lam * F
            dev = abs(got - want) / abs(want)
            if dev >= worst[0]:
                worst = (dev, got, want)
        return worst

    def euler(x, y):
        F2 = eval_metric(model, x, y) ** 2
        got = float(legendre(model, x, y) @ y)
        return abs(got - F2) / F2, got, F2

    def definite(x, y):
        low = float(np.linalg.eigvalsh(fundamental_tensor(model, x, y).g).min())
        return (0.0 if low > 0 else abs(low) + 1.0), low, "> 0"

    def cartan(x, y):
        C = fundamental_tensor(model, x, y).cartan
        Cy = np.einsum("ijk,i->jk", C, y)
        dev = float(np.max(np.abs(Cy))) / (1.0 + float(np.max(np.abs(C))))
        return dev, Cy.tolist(), 0.0

    def round_trip(x, y):
        back = legendre_inverse(model, x, legendre(model, x, y))
        return float(np.linalg.norm(back - y) / np.linalg.norm(y)), back.tolist(), y.tolist()

    report.add(_pointwise_check("positive homogeneity F(x, ly) = l F(x, y)", samples, homogeneity, tol))
    report.add(_pointwise_check("Euler identity y . xi = F^2", samples, euler, tol))
    report.add(_pointwise_check("fundamental tensor positive definite", samples, definite, 0.0))
    report.add(_pointwise_check("Cartan tensor annihilates y", samples, cartan, tol))
    report.add(_pointwise_check("Legendre round trip", samples, round_trip, tol))

    phi_model = isinstance(model, (AlphaBetaMetric, DualAlphaBetaMetric))
    if phi_model:
        if isinstance(model, HelicoidMetric):
            b0 = model.b
        elif isinstance(model, AlphaBetaMetric):
            b0 = model.b0
        else:
            b0 = max(float(np.sqrt(model.alpha.dual_norm_sq(list(x), model.beta_star(list(x))))) for x, _ in samples)
        rep = validate_phi(model.phi, b0, grid=int(sc.get("phi_grid", 200)))
        report.add(Check("profile phi admissible (convexity conditions)", rep.passed, None, 0.0, rep.to_dict(),
                         [] if rep.passed else [{"min_phi": rep.min_phi, "min_first": rep.min_first,
                                                 "min_second": rep.min_second, "expected": "> 0"}]))
    if isinstance(model, KropinaMetric):
        kr = killing_check(model.h, model.W, [x for x, _ in samples])
        # informational: a non-Killing wind still gives a Kropina metric
        report.add(Check("wind Killing (informational)", True, kr.max_r, kr.tol, {"killing": kr.passed, "max_r": kr.max_r}))


# ---------------------------------------------------------------------------
# surface-report


def surface_report(sc: Scenario, report: Report) -> None:
    if sc.surface is None:
        raise ConfigurationError("surface-report needs a 'surface'")
    tol = _effective_tol(sc.tol)
    expect = sc.get("expect", {}) or {}
    orientation = sc.get("orientation")
    route = sc.get("route")
    rows, errors, reps = [], [], []
    for u in sc.samples():
        try:
            r = shape_operator(sc.model, sc.surface, u, orientation=orientation, volume=sc.volume, route=route)
        except GeometryError as exc:
            errors.append({"u": u.tolist(), "error": f"{type(exc).__name__}: {exc}"})
            continue
        reps.append(r)
        rows.append(r.to_dict())
    report.add(Check("shape operator at every sample", not errors, None, None,
                     {"samples": rows, "count": len(rows)}, errors[:MAX_LISTED_FAILURES]))
    if not reps:
        return
    sa = max(r.self_adjoint_residual for r in reps)
    report.add(Check("shape operator self-adjoint for g_n", sa <= tol, sa, tol))
    if "curvatures" in expect:
        want = np.sort(np.asarray(expect["curvatures"], dtype=float))
        worst, fails = 0.0, []
        for r in reps:
            got = np.sort(r.curvatures)
            dev = float(np.max(np.abs(got - want))) if got.shape == want.shape else float("inf")
            worst = max(worst, dev)
            if dev > tol and len(fails) < MAX_LISTED_FAILURES:
                fails.append({"u": r.u.tolist(), "x": r.x.tolist(), "computed": got.tolist(), "expected": want.tolist()})
        report.add(Check("principal curvatures match expected values", worst <= tol, worst, tol, {}, fails))
    for key, idx in (("umbilic", 0), ("minimal", 1)):
        if key in expect:
            fails = []
            for r in reps:
                flag = umbilic_minimal_flags(r, tol)[idx]
                if flag != bool(expect[key]) and len(fails) < MAX_LISTED_FAILURES:
                    fails.append({"u": r.u.tolist(), "x": r.x.tolist(), "computed": flag, "expected": bool(expect[key]),
                                  "curvatures": r.curvatures.tolist()})
            report.add(Check(f"{key} at every sample", not fails, None, tol, {}, fails))
    if expect.get("constant"):
        k = np.array([np.sort(r.curvatures) for r in reps])
        spread = np.ptp(k, axis=0)
        worst = float(spread.max())
        fails = []
        if worst > tol:
            j = int(np.argmax(spread))
            lo, hi = int(np.argmin(k[:, j])), int(np.argmax(k[:, j]))
            fails.append({"index": j, "u_min": reps[lo].u.tolist(), "min": float(k[lo, j]),
                          "u_max": reps[hi].u.tolist(), "max": float(k[hi, j])})
        report.add(Check("principal curvatures constant across samples", worst <= tol, worst, tol,
                         {"spread": spread.tolist()}, fails))


# ---------------------------------------------------------------------------
# isoparametric-check


def _verdict_failures(v) -> list:
    return [{"level": t, **w} for t, w in v.worst.items()]


def isoparametric_command(sc: Scenario, report: Report) -> None:
    if sc.field is None:
        raise ConfigurationError("isoparametric-check needs a 'field'")
    if "levels" not in sc.raw:
        raise ConfigurationError("isoparametric-check needs 'levels'")
    tol = _effective_tol(sc.tol)
    levels = [float(t) for t in sc.raw["levels"]]
    expect = bool(sc.get("expect", True))
    volume = sc.volume or default_volume(sc.model)
    pts = sample_levels(sc.model, sc.field, levels, int(sc.get("samples", 10)), _box(sc),
                        check_rng(sc.seed, "isoparametric-check"))
    v = isoparametric_check(sc.model, volume, sc.field, levels, pts, tol,
                            mean_curvature=bool(sc.get("mean_curvature", False)))
    report.add(Check("isoparametric verdict matches expectation", v.isoparametric == expect, None, tol,
                     {"expected": expect, "verdict": v.to_dict()},
                     [] if v.isoparametric == expect else _verdict_failures(v) or [{"computed": v.isoparametric, "expected": expect}]))
    if sc.model.minkowski and sc.model.has_dual:
        w = minkowski_dual_check(sc.model, sc.field, levels, pts, tol)
        path_tol = _effective_tol(1e-8)
        fails, worst = [], 0.0
        for t in v.a:
            for name, p, q in (("a", v.a[t], w.a[t]), ("b", v.b_hat[t], w.b_hat[t])):
                dev = abs(p - q)
                worst = max(worst, dev)
                if dev > path_tol * (1.0 + abs(p)):
                    fails.append({"level": t, "quantity": name, "primal": p, "dual": q})
        report.add(Check("primal and dual paths agree", not fails and w.isoparametric == v.isoparametric, worst, path_tol,
                         {"dual_verdict": w.isoparametric}, fails))


# ---------------------------------------------------------------------------
# kropina-compare


def kropina_compare(sc: Scenario, report: Report) -> None:
    if not isinstance(sc.model, KropinaMetric):
        raise ConfigurationError("kropina-compare needs a metric of kind 'kropina'")
    if sc.surface is None:
        raise ConfigurationError("kropina-compare needs a 'surface'")
    tol = _effective_tol(sc.tol)
    conf_tol = _effective_tol(float(sc.get("conformal_tol", 1e-8)))
    rep = kropina_equivalence_report(sc.model, sc.surface, sc.samples(), tol=tol, orientation=sc.get("orientation"))
    fails = [{"u": s.u, "kropina": s.kropina, "riemannian": s.riemannian, "eigen_dev": s.eigen_dev}
             for s in rep.samples if s.eigen_dev > tol or s.angle_dev > tol]
    report.add(Check("principal curvatures of (F, n) and (h, nbar) agree", not fails, rep.max_eigen_dev, tol,
                     rep.to_dict(), fails[:MAX_LISTED_FAILURES]))
    fails = [{"u": s.u, "computed": s.conformal_residual, "expected": 0.0} for s in rep.samples if s.conformal_residual > conf_tol]
    report.add(Check("induced metrics conformal with factor W0", not fails, rep.max_conformal_residual, conf_tol, {},
                     fails[:MAX_LISTED_FAILURES]))
    fails = [{"u": s.u, "computed": s.connection_residual, "expected": 0.0} for s in rep.samples if s.connection_residual > tol]
    report.add(Check("normal derivatives agree", not fails, rep.max_connection_residual, tol, {}, fails[:MAX_LISTED_FAILURES]))


# ---------------------------------------------------------------------------


HANDLERS = {
    "validate-metric": validate_metric,
    "surface-report": surface_report,
    "isoparametric-check": isoparametric_command,
    "kropina-compare": kropina_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finslerlab", description="Numerical checks for conic Finsler geometry.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", help="scenario JSON file (not needed for reproduce-paper)")
    p.add_argument("--out", help="where to write the JSON report (default: <command>-report.json)")
    p.add_argument("--tol", type=float, default=None, help="override the scenario tolerance")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--derivatives", choices=("exact", "fd"), default="exact")
    p.add_argument("--corrupt-helicoid", action="store_true",
                   help="reproduce-paper only: flip the sign in the helicoid profile (negative control)")
    return p


def _write(report: Report, out: str | None) -> None:
    path = Path(out or f"{report.command}-report.json")
    path.write_text(report.to_json())


def run(args: argparse.Namespace) -> tuple[int, Report]:
    if args.command == "reproduce-paper":
        report = reproduce_paper(args.derivatives, seed=args.seed or 0, corrupt_helicoid=args.corrupt_helicoid)
        for line in summary_lines(report):
            print(line)
        return (0 if report.passed else 1), report
    report = Report(args.command, {}, args.derivatives, args.seed or 0)
    if not args.scenario:
        report.error = {"type": "ConfigurationError", "message": f"{args.command} needs --scenario"}
        return 2, report
    with derivative_mode(args.derivatives):
        try:
            sc = load_scenario(args.scenario, args.seed, args.tol)
            report.scenario, report.seed = sc.raw, sc.seed
            HANDLERS[args.command](sc, report)
        except ConfigurationError as exc:
            report.error = {"type": type(exc).__name__, "message": str(exc)}
            return 2, report
        except GeometryError as exc:
            report.error = {"type": type(exc).__name__, "message": str(exc)}
            return 1, report
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
    return (0 if report.passed else 1), report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, report = run(args)
    if report.error:
        print(f"error: {report.error['type']}: {report.error['message']}", file=sys.stderr)
    try:
        _write(report, args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    return code


__all__ = ["main", "run", "build_parser", "COMMANDS"]


if __name__ == "__main__":
    sys.exit(main())
