"""Unit normals, induced metrics and shape operators of conic hypersurfaces.

The normal is carried along the parametrization only.  Its u-derivatives
come either from the dual metric (n = d_xi(F*^2/2) at the unit conormal) or,
for models without a closed-form dual, from implicit differentiation of
``L(n) . Phi_a = 0, F(n) = 1``.  The covariant derivative adds the
nonlinear-connection term, D_b n = dn/du^b + N(x, n) Phi_b, and the shape
operator matrix solves  g_n(Phi_a, -D_b n) = ghat_ac A_cb.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, subspace_angles

from . import jets
from .calculus import ScalarField, VolumeForm, gradient, s_curvature, spray, _grad_jacobian_dual, _grad_jacobian_primal
from .duality import legendre_inverse
from .errors import (
    ConfigurationError,
    DualConeViolation,
    NewtonDivergence,
    NoConicNormal,
    NormalExcluded,
    NotKilling,
    UnsupportedOperation,
)
from .models import KropinaMetric, MetricModel, RiemannianMetric
from .surfaces import Immersion, check_frame, conormal_jets
from .tensors import dual_sq_xxi, eval_dual_metric, eval_metric, fundamental_tensor, primal_sq_xy
from .zoo import killing_check

MULTIPLICITY_GAP = 1e-6


@dataclass
class NormalData:
    x: np.ndarray
    frame: np.ndarray
    nu: np.ndarray
    n: np.ndarray
    ray: str
    dnu_raw: np.ndarray  # d(conormal)/du, unnormalized, m x n
    nu_raw: np.ndarray
    second: np.ndarray  # second derivatives of Phi, m x n x n


@dataclass
class ShapeReport:
    u: np.ndarray
    x: np.ndarray
    nu: np.ndarray
    n: np.ndarray
    nbar: np.ndarray | None
    ray: str
    ghat: np.ndarray
    M: np.ndarray
    A: np.ndarray
    D: np.ndarray  # columns D^n_{Phi_b} n
    curvatures: np.ndarray
    principal_vectors: np.ndarray  # columns, in the Phi_a basis
    multiplicities: list
    mean_hat: float
    mean: float
    s_normal: float
    self_adjoint_residual: float
    pairing_residual: float
    unit_residual: float
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "u": self.u.tolist(),
            "x": self.x.tolist(),
            "nu": self.nu.tolist(),
            "n": self.n.tolist(),
            "nbar": None if self.nbar is None else self.nbar.tolist(),
            "ray": self.ray,
            "ghat": self.ghat.tolist(),
            "shape_matrix": self.A.tolist(),
            "principal_curvatures": self.curvatures.tolist(),
            "multiplicities": self.multiplicities,
            "mean_curvature_hat": self.mean_hat,
            "mean_curvature": self.mean,
            "s_curvature_normal": self.s_normal,
            "self_adjoint_residual": self.self_adjoint_residual,
            "pairing_residual": self.pairing_residual,
            "unit_residual": self.unit_residual,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# normals


def _orientation_sign(orientation, imm: Immersion, u, nu_raw) -> float:
    if orientation is None or (isinstance(orientation, str) and orientation in ("+", "default")):
        c = imm.coorientation(u)
        sign = 1.0
    elif isinstance(orientation, str) and orientation == "-":
        c = imm.coorientation(u)
        sign = -1.0
    else:
        c = np.asarray(orientation, dtype=float)
        sign = 1.0
    pair = float(nu_raw @ c)
    return sign * (1.0 if pair >= 0 else -1.0)


def _normal_data(model: MetricModel, imm: Immersion, u, orientation=None, strict: bool = False) -> NormalData:
    u = np.asarray(u, dtype=float)
    jphi = imm.jets(u, 2)
    x = np.array([c.value for c in jphi])
    E1 = [[c.deriv(a) for a in range(imm.n)] for c in jphi]  # order-1 jets of Phi_a
    E = np.array([[e.value for e in row] for row in E1])
    check_frame(E, u)
    second = np.array([c.hessian() for c in jphi])
    nuj = conormal_jets(E1)
    nu_raw = np.array([c.value for c in nuj])
    dnu_raw = np.array([c.gradient() for c in nuj])
    sign = _orientation_sign(orientation, imm, u, nu_raw)
    rays = [(sign, "preferred"), (-sign, "opposite")]
    if strict:
        rays = rays[:1]
    model.check_point(x)
    for sg, label in rays:
        cand = sg * nu_raw
        if not model.in_dual_cone(x, cand):
            continue
        try:
            k = eval_dual_metric(model, x, cand)
            nu = cand / k
            n = legendre_inverse(model, x, nu, check_cone=False)
        except (DualConeViolation, NewtonDivergence):
            continue
        tag = ("+" if sg > 0 else "-") + ("" if label == "preferred" else " (fallback: preferred ray not conic)")
        return NormalData(x, E, nu, n, tag, sg * dnu_raw, sg * nu_raw, second)
    raise NoConicNormal(
        f"neither conormal ray at u = {list(u)} lies in the dual cone"
        if not strict else f"preferred conormal ray at u = {list(u)} is not in the dual cone"
    )


def finsler_unit_normal(model: MetricModel, imm: Immersion, u, orientation=None):
    """(nu, n, ray): unit conormal with F*(nu) = 1 and n = L^{-1}(nu)."""
    d = _normal_data(model, imm, u, orientation)
    return d.nu, d.n, d.ray


def induced_metric(model: MetricModel, imm: Immersion, u, n) -> np.ndarray:
    E = imm.frame(u)
    g = fundamental_tensor(model, imm.point(u), n).g
    return E.T @ g @ E


# ---------------------------------------------------------------------------
# derivatives of the normal along the parametrization


def _dn_dual(model: MetricModel, d: NormalData) -> np.ndarray:
    m = model.dim
    Z = dual_sq_xxi(model, d.x, d.nu, 2)
    grad = 0.5 * Z.gradient()
    H = 0.5 * Z.hessian()
    k = float(model.dual(list(d.x), list(d.nu_raw)))
    gx, gxi = grad[:m], grad[m:]
    dk = k * (gx @ d.frame) + gxi @ d.dnu_raw  # one entry per parameter
    dnu = (d.dnu_raw - np.outer(d.nu, dk)) / k
    return H[m:, :m] @ d.frame + H[m:, m:] @ dnu


def _dn_primal(model: MetricModel, d: NormalData) -> np.ndarray:
    m = model.dim
    n_par = d.frame.shape[1]
    Z = primal_sq_xy(model, d.x, d.n, 2)
    grad = 0.5 * Z.gradient()
    H = 0.5 * Z.hessian()
    psi_x, L = grad[:m], grad[m:]
    g = H[m:, m:]
    P = H[m:, :m]  # P[i, j] = d_{y^i} d_{x^j} psi
    E = d.frame
    Jn = np.vstack([E.T @ g, L[None, :]])
    Ju = np.empty((n_par + 1, n_par))
    for a in range(n_par):
        for b in range(n_par):
            Ju[a, b] = E[:, a] @ (P @ E[:, b]) + L @ d.second[:, a, b]
    Ju[n_par] = psi_x @ E
    return -np.linalg.solve(Jn, Ju)


def normal_derivative(model: MetricModel, d: NormalData, route: str | None = None) -> np.ndarray:
    """dn/du^b as the columns of an m x n matrix."""
    route = route or ("dual" if model.has_dual else "primal")
    if route == "dual":
        if not model.has_dual:
            raise UnsupportedOperation(f"{model.kind} has no closed-form dual")
        return _dn_dual(model, d)
    if not model.has_primal:
        raise UnsupportedOperation(f"{model.kind} has no closed-form primal metric")
    return _dn_primal(model, d)


# ---------------------------------------------------------------------------
# eigen-decomposition


def group_multiplicities(values: np.ndarray, gap: float = MULTIPLICITY_GAP) -> list:
    groups: list = []
    for k in values:
        if groups and abs(k - groups[-1][-1]) <= gap * max(1.0, abs(k)):
            groups[-1].append(k)
        else:
            groups.append([k])
    return [len(g) for g in groups]


def principal_data(M: np.ndarray, ghat: np.ndarray):
    """Generalized symmetric eigenproblem sym(M) v = k ghat v (Cholesky based)."""
    Ms = 0.5 * (M + M.T)
    w, V = eigh(Ms, ghat)
    return w, V


def _mean(model, volume, x, n, mean_hat):
    if volume is None:
        if isinstance(model, (KropinaMetric, RiemannianMetric)):
            volume = VolumeForm.busemann_hausdorff(model)
        elif model.minkowski:
            volume = VolumeForm.lebesgue()
        else:
            return mean_hat, 0.0, ["no volume form given; S(n) taken as 0"]
    s = s_curvature(model, volume, x, n)
    return mean_hat + s, s, []


def shape_operator(model: MetricModel, imm: Immersion, u, orientation=None, volume: VolumeForm | None = None,
                   route: str | None = None) -> ShapeReport:
    """Shape operator -[D^n_X n]^T in the Phi_a basis, principal and mean curvatures."""
    u = np.asarray(u, dtype=float)
    d = _normal_data(model, imm, u, orientation)
    dn = normal_derivative(model, d, route)
    N = spray(model, d.x, d.n).N
    D = dn + N @ d.frame
    g = fundamental_tensor(model, d.x, d.n).g
    E = d.frame
    ghat = E.T @ g @ E
    M = -E.T @ g @ D
    A = np.linalg.solve(ghat, M)
    curv, V = principal_data(M, ghat)
    mean_hat = float(np.trace(A))
    mean, s_n, warns = _mean(model, volume, d.x, d.n, mean_hat)
    nbar = riemannian_normal(model, d.x, d.nu)
    return ShapeReport(
        u=u,
        x=d.x,
        nu=d.nu,
        n=d.n,
        nbar=nbar,
        ray=d.ray,
        ghat=ghat,
        M=M,
        A=A,
        D=D,
        curvatures=curv,
        principal_vectors=V,
        multiplicities=group_multiplicities(curv),
        mean_hat=mean_hat,
        mean=float(mean),
        s_normal=float(s_n),
        self_adjoint_residual=float(np.linalg.norm(M - M.T) / max(np.linalg.norm(M), 1e-300)),
        pairing_residual=float(np.abs(d.nu @ E).max()),
        unit_residual=abs(eval_metric(model, d.x, d.n) - 1.0),
        warnings=warns,
    )


def riemannian_normal(model: MetricModel, x, nu) -> np.ndarray | None:
    """The unit normal of the underlying Riemannian metric (h or alpha), when there is one."""
    base = getattr(model, "h", None) or getattr(model, "alpha", None)
    if isinstance(model, RiemannianMetric):
        base = model
    if base is None:
        return None
    v = np.asarray(jets.values(base.sharp(list(x), list(nu))), dtype=float)
    return v / np.sqrt(float(base.norm_sq(list(x), list(v))))


def umbilic_minimal_flags(report: ShapeReport, tol: float = 1e-6) -> tuple[bool, bool]:
    k = report.curvatures
    umbilic = bool(np.max(k) - np.min(k) <= tol * (1.0 + abs(k[0])))
    minimal = bool(abs(report.mean_hat) <= tol)
    return umbilic, minimal


# ---------------------------------------------------------------------------
# level hypersurfaces of a function


@dataclass
class LevelShape:
    x: np.ndarray
    n: np.ndarray
    curvatures: np.ndarray
    mean_hat: float
    mean: float


def level_set_shape(model: MetricModel, field_: ScalarField, x, volume: VolumeForm | None = None) -> LevelShape:
    """Shape operator of the level hypersurface through x with normal n = grad f / F(grad f)."""
    x = np.asarray(x, dtype=float)
    y = gradient(model, field_, x)
    df = field_.differential(x)
    hf = field_.hessian(x)
    if model.has_primal:
        J = _grad_jacobian_primal(model, x, y, hf)
    else:
        J = _grad_jacobian_dual(model, x, df, hf)
    a = float(np.sqrt(df @ y))  # F(grad f)^2 = df(grad f)
    # d(F(grad f)^2 / 2)/dx_j = d_x psi + df . J  (psi evaluated at grad f)
    m = model.dim
    if model.has_dual:
        Zd = dual_sq_xxi(model, x, df, 1)
        dpsi = 0.5 * Zd.gradient()[:m] + y @ hf
    else:
        Zp = primal_sq_xy(model, x, y, 1)
        dpsi = 0.5 * Zp.gradient()[:m] + df @ J
    da = dpsi / a
    n = y / a
    Jn = J / a - np.outer(y, da) / (a * a)
    N = spray(model, x, n).N
    Dn = Jn + N
    _, _, vt = np.linalg.svd(df[None, :])
    E = vt[1:].T
    g = fundamental_tensor(model, x, n).g
    ghat = E.T @ g @ E
    M = -E.T @ g @ Dn @ E
    curv, _ = principal_data(M, ghat)
    mean_hat = float(np.trace(np.linalg.solve(ghat, M)))
    mean, _, _ = _mean(model, volume, x, n, mean_hat)
    return LevelShape(x, n, curv, mean_hat, float(mean))


# ---------------------------------------------------------------------------
# Kropina versus Riemannian comparison


@dataclass
class EquivalenceSample:
    u: list
    kropina: list
    riemannian: list
    eigen_dev: float
    angle_dev: float
    conformal_residual: float
    connection_residual: float
    multiplicities: tuple

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class EquivalenceReport:
    passed: bool
    tol: float
    max_eigen_dev: float
    max_angle_dev: float
    max_conformal_residual: float
    max_connection_residual: float
    killing_max_r: float
    samples: list

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k != "samples"}
        out["samples"] = [s.to_dict() for s in self.samples]
        return out


def _eigenspaces(curv: np.ndarray, V: np.ndarray):
    out = []
    start = 0
    for mult in group_multiplicities(curv):
        out.append((float(np.mean(curv[start:start + mult])), V[:, start:start + mult]))
        start += mult
    return out


def kropina_equivalence_report(model: KropinaMetric, imm: Immersion, samples, tol: float = 1e-6,
                               killing_tol: float = 1e-8, orientation=None) -> EquivalenceReport:
    """Compare (F, n) with (h, nbar) sample by sample on a Kropina space."""
    if not isinstance(model, KropinaMetric):
        raise ConfigurationError("kropina_equivalence_report needs a Kropina model")
    h = model.h
    samples = [np.asarray(u, dtype=float) for u in samples]
    pts = [imm.point(u) for u in samples]
    kill = killing_check(h, model.W, pts, killing_tol)
    if not kill.passed:
        raise NotKilling(f"wind is not Killing: max |r_ij| = {kill.max_r:.3e} > {killing_tol}")
    out = []
    for u, x in zip(samples, pts):
        rk = shape_operator(model, imm, u, orientation)
        nbar = rk.nbar
        w0 = float(h.inner(list(x), list(jets.values(model.W(list(x)))), list(nbar)))
        if w0 + 1.0 <= 1e-12:
            raise NormalExcluded(f"nbar = -W at u = {list(u)}")
        rh = shape_operator(h, imm, u, orientation=rk.nu)
        eig_dev = float(np.max(np.abs(rk.curvatures - rh.curvatures)))
        angle = 0.0
        sk, sh = _eigenspaces(rk.curvatures, rk.principal_vectors), _eigenspaces(rh.curvatures, rh.principal_vectors)
        if [V.shape[1] for _, V in sk] == [V.shape[1] for _, V in sh]:
            for (_, Vk), (_, Vh) in zip(sk, sh):
                if Vk.shape[1] < len(rk.curvatures):
                    angle = max(angle, float(np.max(subspace_angles(Vk, Vh))))
        else:
            angle = float("inf")
        # ghat = hbar / W0(n) (relative residual) and D^n n = nabla^h nbar
        W0n = float(model.W0(list(x), list(rk.n)))
        hbar = rh.ghat
        conf = float(np.max(np.abs(W0n * rk.ghat - hbar)) / np.max(np.abs(hbar)))
        conn = float(np.max(np.linalg.norm(rk.D - rh.D, axis=0)))
        out.append(EquivalenceSample(
            u=u.tolist(),
            kropina=rk.curvatures.tolist(),
            riemannian=rh.curvatures.tolist(),
            eigen_dev=eig_dev,
            angle_dev=angle,
            conformal_residual=conf,
            connection_residual=conn,
            multiplicities=(tuple(rk.multiplicities), tuple(rh.multiplicities)),
        ))
    me = max(s.eigen_dev for s in out)
    ma = max(s.angle_dev for s in out)
    mc = max(s.conformal_residual for s in out)
    mn = max(s.connection_residual for s in out)
    passed = me <= tol and ma <= tol and mn <= tol and mc <= max(tol, 1e-8)
    return EquivalenceReport(passed, tol, me, ma, mc, mn, kill.max_r, out)


__all__ = [
    "ShapeReport",
    "LevelShape",
    "EquivalenceReport",
    "finsler_unit_normal",
    "induced_metric",
    "normal_derivative",
    "shape_operator",
    "umbilic_minimal_flags",
    "level_set_shape",
    "kropina_equivalence_report",
    "group_multiplicities",
    "principal_data",
    "riemannian_normal",
]
