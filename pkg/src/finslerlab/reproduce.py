"""The fixed acceptance suite: eight criteria, each returning one :class:`Check`."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .calculus import ScalarField, VolumeForm, flag_curvature, laplacians, s_curvature, spray, christoffel
from .duality import legendre, legendre_inverse
from .engine import derivative_mode, tolerance_floor
from .errors import FinslerLabError, GeometryError, InsufficientSamples
from .isoparametric import isoparametric_check, linear_field, minkowski_dual_check, norm_field, quadratic_field, sample_levels, transnormal_check
from .models import AlphaBetaMetric, EuclideanMetric, HelicoidMetric, KropinaMetric, MetricModel, euclidean_h, round_sphere_h
from .phi import HelicoidPhi, KropinaPhi, validate_phi
from .report import Check, Report, check_rng
from .shape import kropina_equivalence_report, shape_operator, umbilic_minimal_flags
from .surfaces import clifford_torus, cylinder, helicoid, hyperplane, s3_sphere, sphere
from .tensors import fundamental_tensor
from .zoo import hopf_field, kropina_tensor_closed_form, s3_hopf_kropina, s_upper_zero

HELICOID_PARAMS = ((1.0, 1.0), (0.5, 2.0))
HELICOID_GRID = {"u": (0.05, 0.95, 5), "v": (0.0, 6.28, 5)}
Z_AXIS = (0.0, 0.0, 1.0)


def _tol(t: float) -> float:
    return max(t, tolerance_floor())


def _const_kropina(constant: bool = True, wind=Z_AXIS) -> KropinaMetric:
    return KropinaMetric(euclidean_h(3), lambda x: list(wind), wind_name=list(wind), constant_wind=constant)


def omega_matrix(a: float, b: float, u: float, phi: HelicoidPhi | None = None) -> np.ndarray:
    """Closed-form helicoid shape matrix: zero diagonal, off-diagonal
    -mu1 (varphi + phi'' a^2 b^2 / G) and -mu2 varphi with G = u^2 + a^2."""
    phi = phi or HelicoidPhi(a, b)
    G = u * u + a * a
    s = b * u / math.sqrt(G)
    p, dp, d2p = phi.derivatives(s)
    vp = p - s * dp
    mu1 = a / G**1.5
    mu2 = a / math.sqrt(G)
    return np.array([[0.0, -mu1 * (vp + d2p * a * a * b * b / G)], [-mu2 * vp, 0.0]])


CONE_MARGIN = 0.05
MAX_DRAWS = 10_000


def _inside(model: MetricModel, x, y, margin: float = CONE_MARGIN) -> bool:
    """y lies in the cone together with every y +- margin |y| e_k."""
    if not model.in_cone(x, y):
        return False
    step = margin * float(np.linalg.norm(y))
    for k in range(model.dim):
        for sgn in (1.0, -1.0):
            z = np.array(y, dtype=float)
            z[k] += sgn * step
            if not model.in_cone(x, z):
                return False
    return True


def cone_vector(model: MetricModel, rng, x, scale: float = 1.0):
    for _ in range(MAX_DRAWS):
        y = rng.normal(size=model.dim) * scale
        if _inside(model, x, y):
            return y
    raise InsufficientSamples(f"no cone vector found at x = {list(map(float, x))} after {MAX_DRAWS} draws")


def cone_samples(model: MetricModel, rng, count: int, box=1.0, scale: float = 1.0):
    """Random (x, y) pairs with x in the box ([-box, box]^m or a (lo, hi) pair)
    and y inside the cone with a margin."""
    if np.isscalar(box):
        lo, hi = -float(box) * np.ones(model.dim), float(box) * np.ones(model.dim)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)
    out = []
    for _ in range(MAX_DRAWS * count):
        if len(out) == count:
            break
        x = rng.uniform(lo, hi)
        y = rng.normal(size=model.dim) * scale
        if _inside(model, x, y):
            out.append((x, y))
    if len(out) < count:
        raise InsufficientSamples(f"only {len(out)} of {count} cone samples found")
    return out


# ---------------------------------------------------------------------------


def criterion_1(corrupt: bool = False, seed: int = 0) -> Check:
    tol = _tol(1e-6)
    dev = mean_dev = 0.0
    failures, per = [], {}
    for a, b in HELICOID_PARAMS:
        model = HelicoidMetric(a, b, corrupt=corrupt)
        imm = helicoid(a)
        d_ab = 0.0
        for u in imm.grid(HELICOID_GRID):
            try:
                r = shape_operator(model, imm, u)
            except GeometryError as exc:
                # the pipeline rejects the metric here; report the drift of the
                # closed-form shape matrix built from the same profile instead
                lam = np.linalg.eigvals(omega_matrix(a, b, float(u[0]), model.phi).T)
                lam = lam[np.argsort(lam.imag if np.any(lam.imag) else lam.real)]
                d = float(np.max(np.abs(lam - np.array([-1.0, 1.0]))))
                d_ab = max(d_ab, d)
                failures.append({"a": a, "b": b, "u": u.tolist(), "error": f"{type(exc).__name__}: {exc}",
                                 "closed_form_curvatures": [[float(z.real), float(z.imag)] for z in lam],
                                 "expected": [-1.0, 1.0]})
                continue
            d = float(np.max(np.abs(r.curvatures - np.array([-1.0, 1.0]))))
            d_ab = max(d_ab, d)
            mean_dev = max(mean_dev, abs(r.mean_hat))
            if d > tol or abs(r.mean_hat) > tol:
                failures.append({"a": a, "b": b, "u": u.tolist(), "computed": r.curvatures.tolist(),
                                 "expected": [-1.0, 1.0], "mean_hat": r.mean_hat})
        per[f"a={a},b={b}"] = d_ab
        dev = max(dev, d_ab)
    return Check("C1 helicoid principal curvatures +-1 and minimality", dev <= tol and mean_dev <= tol,
                 max(dev, mean_dev), tol, {"eigen_drift": per, "max_abs_mean_curvature": mean_dev,
                                           "samples_per_model": 25, "corrupted_phi": corrupt}, failures[:10])


def criterion_2(seed: int = 0) -> Check:
    tol_ode = _tol(1e-8)
    tol_omega = _tol(1e-6)
    details, failures = {}, []
    ok = True
    worst = 0.0
    for a, b in HELICOID_PARAMS:
        phi = HelicoidPhi(a, b)
        rep = validate_phi(phi, b, grid=100)
        grid = np.concatenate([np.linspace(-phi.c, 0, 52)[1:-1], np.linspace(0, phi.c, 52)[1:-1]])
        ode = max(abs(phi.ode_residual(float(s))) for s in grid)
        model = HelicoidMetric(a, b)
        imm = helicoid(a)
        om = 0.0
        for u in imm.grid(HELICOID_GRID):
            A = shape_operator(model, imm, u).A
            om = max(om, float(np.max(np.abs(A - omega_matrix(a, b, float(u[0])).T))))
        key = f"a={a},b={b}"
        details[key] = {"ode_residual": ode, "omega_deviation": om,
                        "min_phi_minus_s_dphi": rep.min_first, "min_second_condition": rep.min_second}
        good = ode <= tol_ode and rep.passed and om <= tol_omega
        if not good:
            failures.append({key: details[key]})
        ok = ok and good
        worst = max(worst, ode, om)
    return Check("C2 helicoid internals (ODE, convexity, omega matrix)", ok, worst, tol_omega, details, failures)


def criterion_3(seed: int = 0) -> Check:
    tol_zero = _tol(1e-8)
    tol_spread = _tol(1e-6)
    E = EuclideanMetric(3)
    details, failures = {}, []
    ok = True
    worst = 0.0
    # hyperplanes in several Minkowski spaces
    planes = [("euclidean", E, hyperplane(3)),
              ("kropina-constant-wind", _const_kropina(), hyperplane(3, [0.2, 0.1, 1.0])),
              ("helicoid-space", HelicoidMetric(1.0, 1.0), hyperplane(3, [1.0, 0.0, 0.1]))]
    for name, model, imm in planes:
        k = np.array([shape_operator(model, imm, u).curvatures for u in imm.grid()])
        dev = float(np.max(np.abs(k)))
        details[f"hyperplane/{name}"] = {"max_abs_curvature": dev}
        if dev > tol_zero:
            ok = False
            failures.append({"surface": f"hyperplane/{name}", "max_abs_curvature": dev, "expected": 0.0})
        worst = max(worst, dev)
    # sphere of radius 2: one repeated value
    imm = sphere(3, 2.0)
    reps = [shape_operator(E, imm, u) for u in imm.grid()]
    k = np.array([r.curvatures for r in reps])
    spread = float(k.max() - k.min())
    umb = all(umbilic_minimal_flags(r, tol_spread)[0] for r in reps)
    details["sphere r=2"] = {"value": float(k.mean()), "spread": spread, "umbilic": umb}
    if spread > tol_spread or not umb:
        ok = False
        failures.append({"surface": "sphere r=2", "spread": spread, "umbilic": umb})
    worst = max(worst, spread)
    # cylinder S^1(1) x R: two values, one zero
    imm = cylinder(3, 1.0)
    k = np.array([shape_operator(E, imm, u).curvatures for u in imm.grid()])
    zero_dev = float(np.max(np.abs(k[:, 1])))
    spread_c = float(max(np.ptp(k[:, 0]), np.ptp(k[:, 1])))
    distinct = bool(np.min(np.abs(k[:, 0] - k[:, 1])) > 1e-3)
    details["cylinder r=1"] = {"values": [float(k[:, 0].mean()), float(k[:, 1].mean())], "zero_deviation": zero_dev,
                               "spread": spread_c, "two_distinct": distinct}
    if zero_dev > tol_zero or spread_c > tol_spread or not distinct:
        ok = False
        failures.append({"surface": "cylinder", **details["cylinder r=1"]})
    worst = max(worst, zero_dev, spread_c)
    return Check("C3 isoparametric hyperplanes, spheres and cylinders", ok, worst, tol_spread, details, failures)


def criterion_4(seed: int = 0) -> Check:
    tol = _tol(1e-6)
    tol_conf = _tol(1e-8)
    # wind along the polar axis of the sphere chart keeps nbar away from -W on the grid
    cases = [("R3 constant wind, sphere r=2", _const_kropina(wind=(1.0, 0.0, 0.0)), sphere(3, 2.0)),
             ("S3 Hopf, Clifford torus", s3_hopf_kropina(), clifford_torus())]
    details, failures = {}, []
    ok = True
    worst = 0.0
    for name, model, imm in cases:
        rep = kropina_equivalence_report(model, imm, imm.grid(), tol=tol)
        d = {"max_eigen_dev": rep.max_eigen_dev, "max_angle_dev": rep.max_angle_dev,
             "conformal_residual": rep.max_conformal_residual, "connection_residual": rep.max_connection_residual,
             "killing_max_r": rep.killing_max_r, "samples": len(rep.samples),
             "curvatures_first_sample": rep.samples[0].kropina,
             "multiplicities_first_sample": list(rep.samples[0].multiplicities)}
        details[name] = d
        good = (rep.max_eigen_dev <= tol and rep.max_connection_residual <= tol
                and rep.max_conformal_residual <= tol_conf and rep.max_angle_dev <= tol)
        if not good:
            bad = max(rep.samples, key=lambda s: s.eigen_dev)
            failures.append({"case": name, "u": bad.u, "kropina": bad.kropina, "riemannian": bad.riemannian})
        ok = ok and good
        worst = max(worst, rep.max_eigen_dev, rep.max_connection_residual)
    return Check("C4 Kropina vs Riemannian principal curvatures", ok, worst, tol, details, failures)


def criterion_5(seed: int = 0) -> Check:
    rng = check_rng(seed, "C5")
    details, failures = {}, []
    ok = True
    worst = 0.0
    for name, model, expected, tol in (("S3 Hopf Kropina", s3_hopf_kropina(), 1.0, _tol(1e-3)),
                                       ("Euclidean-wind Kropina", _const_kropina(constant=False), 0.0, _tol(1e-6))):
        ks = []
        for x, y in cone_samples(model, rng, 10):
            v = rng.normal(size=3)
            K = flag_curvature(model, x, y, v)
            ks.append(K)
            if abs(K - expected) > tol:
                failures.append({"model": name, "x": x.tolist(), "y": y.tolist(), "v": v.tolist(),
                                 "computed": K, "expected": expected})
        dev = float(max(abs(k - expected) for k in ks))
        details[name] = {"flags": len(ks), "max_deviation": dev, "tolerance": tol, "expected": expected}
        ok = ok and dev <= tol
        worst = max(worst, dev)
    return Check("C5 constant flag curvature", ok, worst, None, details, failures)


def _legendre_families() -> list[tuple[str, MetricModel]]:
    return [
        ("euclidean", EuclideanMetric(3)),
        ("round-sphere chart", round_sphere_h(3)),
        ("alpha-beta kropina-profile on sphere chart",
         AlphaBetaMetric(round_sphere_h(3), lambda x: [0.3, 0.0, 1.0], KropinaPhi(), 10.0, b_name=[0.3, 0.0, 1.0])),
        ("kropina constant wind", _const_kropina()),
        ("kropina S3 Hopf", s3_hopf_kropina()),
        ("helicoid a=1,b=1", HelicoidMetric(1.0, 1.0)),
        ("helicoid a=0.5,b=2", HelicoidMetric(0.5, 2.0)),
    ]


def criterion_6(seed: int = 0) -> Check:
    rng = check_rng(seed, "C6")
    details, failures = {}, []
    ok = True
    t_rt = _tol(1e-8)
    rt = {}
    for name, model in _legendre_families():
        worst = 0.0
        for x, y in cone_samples(model, rng, 100):
            y2 = cone_vector(model, rng, x)
            try:
                back = legendre_inverse(model, x, legendre(model, x, y))
                e1 = float(np.linalg.norm(back - y) / np.linalg.norm(y))
                xi = legendre(model, x, y2)
                fwd = legendre(model, x, legendre_inverse(model, x, xi))
                e2 = float(np.linalg.norm(fwd - xi) / np.linalg.norm(xi))
            except FinslerLabError as exc:
                e1 = e2 = math.inf
                failures.append({"family": name, "x": x.tolist(), "y": y.tolist(), "error": str(exc)})
            worst = max(worst, e1, e2)
        rt[name] = worst
        ok = ok and worst <= t_rt
    details["legendre_round_trip"] = rt
    # Kropina closed-form fundamental tensor
    t_g = _tol(1e-6)
    gdev = 0.0
    for model in (_const_kropina(), s3_hopf_kropina()):
        for x, y in cone_samples(model, rng, 20):
            g = fundamental_tensor(model, x, y).g
            c = kropina_tensor_closed_form(model, x, y)
            gdev = max(gdev, float(np.max(np.abs(g - c)) / np.max(np.abs(g))))
    details["kropina_tensor_closed_form_rel"] = gdev
    ok = ok and gdev <= t_g
    # spray relation G = Gbar - F s^i_0
    t_s = _tol(1e-5)
    K = s3_hopf_kropina()
    sdev = 0.0
    for x, y in cone_samples(K, rng, 10):
        G = spray(K, x, y).G
        Gbar = 0.5 * np.einsum("ijk,j,k->i", christoffel(K.h, x), y, y)
        F = float(K.primal(list(x), list(y)))
        rhs = Gbar - F * s_upper_zero(K.h, hopf_field, x, y)
        d = float(np.linalg.norm(G - rhs) / (1.0 + np.linalg.norm(G)))
        sdev = max(sdev, d)
        if d > t_s:
            failures.append({"check": "spray relation", "x": x.tolist(), "y": y.tolist(), "G": G.tolist(), "rhs": rhs.tolist()})
    details["spray_relation"] = sdev
    ok = ok and sdev <= t_s
    # Laplacian closure on Kropina spaces with random quadratic fields
    t_l = _tol(1e-6)
    ldev = 0.0
    for model in (s3_hopf_kropina(), _const_kropina(constant=False)):
        vol = VolumeForm.busemann_hausdorff(model)
        for _ in range(10):
            Q = rng.normal(size=(3, 3))
            f = quadratic_field(Q + Q.T, rng.normal(size=3))
            x = rng.uniform(-0.8, 0.8, 3)
            L = laplacians(model, vol, f, x)
            ldev = max(ldev, L.closure_residual)
    details["laplacian_closure"] = ldev
    ok = ok and ldev <= t_l
    # vanishing S-curvature
    t_S = _tol(1e-8)
    sv = {}
    for name, model, vol in (
        ("kropina S3 Hopf + BH", s3_hopf_kropina(), None),
        ("kropina constant wind + BH", _const_kropina(constant=False), None),
        ("helicoid + lebesgue", HelicoidMetric(1.0, 1.0), VolumeForm.lebesgue()),
        ("euclidean + lebesgue", EuclideanMetric(3), VolumeForm.lebesgue()),
    ):
        vol = vol or VolumeForm.busemann_hausdorff(model)
        sv[name] = max(abs(s_curvature(model, vol, x, y)) for x, y in cone_samples(model, rng, 10))
    details["s_curvature"] = sv
    ok = ok and max(sv.values()) <= t_S
    worst = max(max(rt.values()), gdev, sdev, ldev, max(sv.values()))
    return Check("C6 calculus core", ok, worst, None, details, failures[:10])


def criterion_7(seed: int = 0) -> Check:
    tol = _tol(1e-6)
    t_path = _tol(1e-8)
    details, failures = {}, []
    ok = True
    path_dev = 0.0
    box3 = (-3.0 * np.ones(3), 3.0 * np.ones(3))
    cases = [
        ("helicoid-space linear x1+0.1x3", HelicoidMetric(1.0, 1.0), VolumeForm.lebesgue(), linear_field([1.0, 0.0, 0.1]), [0.0, 0.5], None),
        ("kropina constant wind x3", _const_kropina(), VolumeForm.lebesgue(), linear_field([0.0, 0.0, 1.0]), [0.0, 1.0], None),
        ("euclidean |x|", EuclideanMetric(3), VolumeForm.lebesgue(), norm_field(), [1.0, 2.0], box3),
    ]
    for name, model, vol, f, levels, box in cases:
        rng = check_rng(seed, "C7/" + name)
        pts = sample_levels(model, f, levels, 10, box or (-2.0 * np.ones(3), 2.0 * np.ones(3)), rng)
        v = isoparametric_check(model, vol, f, levels, pts, tol, mean_curvature=True)
        w = minkowski_dual_check(model, f, levels, pts, tol)
        da = max(abs(v.a[t] - w.a[t]) for t in v.a)
        db = max(abs(v.b_hat[t] - w.b_hat[t]) for t in v.b_hat)
        mc = max(sp.get("mean_curvature", 0.0) for sp in v.spreads.values())
        path_dev = max(path_dev, da, db)
        details[name] = {"primal_isoparametric": v.isoparametric, "dual_isoparametric": w.isoparametric,
                         "a": v.a, "b_hat": v.b_hat, "b_sigma": v.b_sigma, "a_path_dev": da, "b_path_dev": db,
                         "level_mean_curvature_spread": mc, "closure": v.max_closure_residual}
        good = v.isoparametric and w.isoparametric and da <= t_path and db <= t_path and mc <= tol
        if not good:
            failures.append({"case": name, **details[name]})
        ok = ok and good
    # negative control must fail on both paths
    E = EuclideanMetric(3)
    neg = quadratic_field([[0, 0, 0], [0, 2, 0], [0, 0, 0]], [1.0, 0.0, 0.0])
    rng = check_rng(seed, "C7/negative")
    pts = sample_levels(E, neg, [0.0, 0.5], 10, (-2.0 * np.ones(3), 2.0 * np.ones(3)), rng)
    tv = transnormal_check(E, neg, [0.0, 0.5], pts, tol)
    dv = minkowski_dual_check(E, neg, [0.0, 0.5], pts, tol)
    details["negative control x1 + x2^2"] = {"primal_transnormal": tv.transnormal, "dual_transnormal": dv.transnormal,
                                             "spreads": {t: s["F_grad"] for t, s in tv.spreads.items()}}
    if tv.transnormal or dv.transnormal:
        ok = False
        failures.append({"case": "negative control", "detail": "unexpectedly transnormal"})
    return Check("C7 isoparametric verifier", ok, path_dev, t_path, details, failures)


def criterion_8(seed: int = 0) -> Check:
    tol = _tol(1e-6)
    K = s3_hopf_kropina()
    details, failures = {}, []
    ok = True
    worst = 0.0
    rows = [("g=1 great sphere", s3_sphere(0.0), 1), ("g=1 small sphere t=0.5", s3_sphere(0.5), 1),
            ("g=2 Clifford torus", clifford_torus(), 2)]
    for name, imm, g in rows:
        k = np.array([shape_operator(K, imm, u).curvatures for u in imm.grid()])
        spread = float(max(np.ptp(k[:, 0]), np.ptp(k[:, 1])))
        gap = float(np.max(k[:, 1] - k[:, 0]))
        distinct = 1 if gap <= tol * (1.0 + abs(k[0, 0])) else 2
        details[name] = {"values": [float(k[:, 0].mean()), float(k[:, 1].mean())], "spread": spread,
                         "distinct_values": distinct, "expected_distinct": g, "samples": len(k)}
        good = spread <= tol and distinct == g
        if not good:
            failures.append({"row": name, **details[name]})
        ok = ok and good
        worst = max(worst, spread)
    for g in (3, 4, 6):
        details[f"g={g}"] = "skipped: out of scope for the desk-scale suite"
    return Check("C8 isoparametric families with g=1 and g=2 in the Hopf Kropina three-sphere", ok, worst, tol, details, failures)


CRITERIA: list[tuple[str, Callable]] = [
    ("C1", criterion_1),
    ("C2", criterion_2),
    ("C3", criterion_3),
    ("C4", criterion_4),
    ("C5", criterion_5),
    ("C6", criterion_6),
    ("C7", criterion_7),
    ("C8", criterion_8),
]


def run_criterion(key: str, seed: int = 0, corrupt_helicoid: bool = False) -> Check:
    fn = dict(CRITERIA)[key]
    try:
        return fn(corrupt=corrupt_helicoid, seed=seed) if key == "C1" else fn(seed=seed)
    except FinslerLabError as exc:
        return Check(f"{key} (aborted)", False, None, None, {}, [{"error": f"{type(exc).__name__}: {exc}"}])


def reproduce_paper(derivatives: str = "exact", seed: int = 0, corrupt_helicoid: bool = False,
                    only: list[str] | None = None, scenario: dict | None = None) -> Report:
    report = Report("reproduce-paper", scenario or {}, derivatives, seed)
    with derivative_mode(derivatives):
        for key, _ in CRITERIA:
            if only and key not in only:
                continue
            report.add(run_criterion(key, seed, corrupt_helicoid))
    return report


def summary_lines(report: Report) -> list[str]:
    lines = []
    for c in report.checks:
        dev = "n/a" if c.max_deviation is None else f"{c.max_deviation:.3e}"
        tol = "mixed" if c.tolerance is None else f"{c.tolerance:.0e}"
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  max_dev={dev}  tol={tol}")
    return lines


__all__ = ["reproduce_paper", "run_criterion", "summary_lines", "cone_samples", "cone_vector", "CRITERIA", "omega_matrix"]
