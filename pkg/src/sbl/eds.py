"""The fundamental differential system on the radius-s tangent sphere bundle.

``theta``, ``alpha_0 .. alpha_n`` are built from their coordinate definitions:

    theta(y)      = g(u, dpi y)
    alpha_n(y..)  = (1/s) vol_g(u, K y_1, .., K y_n)
    alpha_i(v..)  = 1/(i!(n-i)!) sum_sigma sg(sigma)
                    alpha_n(B v_s1, .., B v_s(n-i), v_s(n-i+1), .., v_sn)

Nothing here uses the adapted frame except the objects that are *defined* through
it (gamma, the curvature correction terms and the frame scalars c, p^2, q^2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import jax.numpy as jnp
import numpy as np

from sbl.forms import (
    W_BASIS,
    FormField,
    compound,
    ext_derivative,
    frame_form,
    frame_values,
    interior_table,
    perm_sign,
    w_coefficients,
    wedge,
    wedge_table,
)
from sbl.metric_chart import ChartMetric
from sbl.sphere_bundle import (
    connection_matrix,
    cross_matrix,
    frame_parts,
    mirror_matrix,
    sphere_frame,
    split,
)


class UnsupportedDimensionError(ValueError):
    pass


@dataclass
class FundamentalSystem:
    metric: ChartMetric
    s: float
    n: int
    theta: FormField
    alpha: list
    dtheta: FormField
    vol: FormField  # pi^* vol_M
    vol_S: FormField  # e^{01..2n}
    backend: str = "dual"
    step: float = 1e-4

    @property
    def dim(self) -> int:
        return 2 * (self.n + 1)

    def alpha_i(self, i: int) -> FormField:
        """``alpha_i`` with the conventions ``alpha_{-1} = alpha_{n+1} = 0``."""
        if 0 <= i <= self.n:
            return self.alpha[i]
        return FormField(self.n, self.dim, lambda z: jnp.zeros(math.comb(self.dim, self.n)), f"alpha{i}")

    def d(self, a: FormField) -> FormField:
        return ext_derivative(a, self.backend, self.step)

    def frame_values(self, a: FormField, z):
        return frame_values(a, self.metric, z)


def _alpha_n_table(m: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Constant argument vectors and weights for the permutation sum defining alpha_i.

    Returns ``W[I, sigma]`` of shape ``(C(N, n), n!, N, n)`` holding the n argument
    vectors (B applied to the first n - i of them) and ``w[sigma] = sg(sigma)/(i!(n-i)!)``.
    """
    n, N = m - 1, 2 * m
    B = np.asarray(mirror_matrix(m))
    eye = np.eye(N)
    idx = list(itertools.combinations(range(N), n))
    perms = list(itertools.permutations(range(n)))
    W = np.zeros((len(idx), len(perms), N, n))
    for a, I in enumerate(idx):
        for b, sigma in enumerate(perms):
            for slot in range(n):
                v = eye[I[sigma[slot]]]
                W[a, b, :, slot] = B @ v if slot < n - i else v
    w = np.array([perm_sign(p) for p in perms], float) / (math.factorial(i) * math.factorial(n - i))
    return W, w


def _alpha_form(metric: ChartMetric, s: float, i: int) -> FormField:
    m = metric.dim
    n, N = m - 1, 2 * m
    W, w = _alpha_n_table(m, i)
    W, w = jnp.asarray(W), jnp.asarray(w)

    def comps(z):
        x, u = split(z, m)
        g = metric.metric(x)
        K = connection_matrix(metric.christoffel(x), u)
        KW = jnp.einsum("mN,cpNn->cpmn", K, W)
        U = jnp.broadcast_to(u[:, None], KW.shape[:2] + (m, 1))
        dets = jnp.linalg.det(jnp.concatenate([U, KW], axis=-1))
        return jnp.sqrt(jnp.linalg.det(g)) / s * (dets @ w)

    return FormField(n, N, comps, f"alpha{i}", s)


def theta_form(metric: ChartMetric, s: float | None = None) -> FormField:
    m = metric.dim

    def comps(z):
        x, u = split(z, m)
        return jnp.concatenate([metric.metric(x) @ u, jnp.zeros(m)])

    return FormField(1, 2 * m, comps, "theta", s)


def base_volume(metric: ChartMetric) -> FormField:
    """``pi^* vol_M = sqrt(det g) dx^0 .. dx^n``."""
    m = metric.dim
    N = 2 * m
    size = math.comb(N, m)

    def comps(z):
        return jnp.zeros(size).at[0].set(jnp.sqrt(jnp.linalg.det(metric.metric(z[:m]))))

    return FormField(m, N, comps, "vol")


def build_system(metric: ChartMetric, s: float, backend: str | None = None, step: float = 1e-4) -> FundamentalSystem:
    if metric.dim not in (2, 3):
        raise UnsupportedDimensionError(f"base dimension must be 2 or 3, got {metric.dim}")
    if not s > 0:
        raise ValueError(f"radius must be positive, got {s}")
    backend = backend or ("fd" if metric.backend == "fd" else "dual")
    n = metric.dim - 1
    theta = theta_form(metric, s)
    D = 2 * n + 1
    vol_S = frame_form(lambda z: jnp.ones(1), D, metric, "vol_S", s)
    return FundamentalSystem(
        metric=metric,
        s=float(s),
        n=n,
        theta=theta,
        alpha=[_alpha_form(metric, s, i) for i in range(n + 1)],
        dtheta=ext_derivative(theta, backend, step),
        vol=base_volume(metric),
        vol_S=vol_S,
        backend=backend,
        step=step,
    )


# ---------------------------------------------------------------------------------------
# curvature in the adapted frame


def frame_curvature(metric: ChartMetric, z, pivot=None):
    """``(b, Rf)``: base frame and ``Rf[l, k, i, j] = R(b_l, b_k, b_i, b_j)``."""
    fp = frame_parts(metric, z, pivot)
    R = metric.riemann(z[: metric.dim])
    return fp.base, jnp.einsum("abcd,ai,bj,ck,dl->ijkl", R, fp.base, fp.base, fp.base, fp.base)


def curvature_correction(system: FundamentalSystem, i: int) -> FormField:
    """``sum_{j<q} sum_p s R_{p0jq} e^{jq} ^ (e_{p+n} -| alpha_i)`` as a literal double sum."""
    n = system.n
    if not 0 <= i <= n:
        raise IndexError(f"alpha index {i} outside 0..{n}")
    metric, s = system.metric, system.s
    N = system.dim
    alpha = system.alpha[i]
    P = jnp.asarray(interior_table(N, n))
    W1 = jnp.asarray(wedge_table(N, 1, 1))
    W2 = jnp.asarray(wedge_table(N, 2, n - 1))
    pairs = [(j, q) for j in range(n + 1) for q in range(j + 1, n + 1)]

    def comps(z):
        E, cof = sphere_frame(metric, z)
        _, Rf = frame_curvature(metric, z)
        a = alpha.comps(z)
        out = jnp.zeros(math.comb(N, n + 1))
        for j, q in pairs:
            ejq = jnp.einsum("kab,a,b->k", W1, cof[j], cof[q])
            for p in range(1, n + 1):
                contracted = jnp.einsum("jia,i,a->j", P, a, E[:, p + n])
                out = out + s * Rf[p, 0, j, q] * jnp.einsum("kab,a,b->k", W2, ejq, contracted)
        return out

    return FormField(n + 1, N, comps, f"Ralpha{i}", s)


# ---------------------------------------------------------------------------------------
# scalar and 1-form curvature fields (n = 2 unless stated)


def _require_n2(system: FundamentalSystem) -> None:
    if system.n != 2:
        raise UnsupportedDimensionError("this object exists only over 3-manifolds")


def r_field(system: FundamentalSystem) -> Callable:
    """``r = Ric(xi, xi) / s^2``."""
    m, s = system.metric.dim, system.s

    def r(z):
        x, u = split(z, m)
        return u @ system.metric.ricci(x) @ u / s**2

    return r


def frame_scalars(metric: ChartMetric, z, pivot=None) -> dict:
    """``c, r, p2, q2`` and the alternative ``q2_det`` from the frame curvature at z (n = 2).

    ``pivot`` forces a different (rotated) base frame; the values must not change.
    """
    _, R = frame_curvature(metric, z, pivot)
    M = jnp.array([[R[1, 0, 0, 1], R[1, 0, 0, 2]], [R[2, 0, 0, 1], R[2, 0, 0, 2]]])
    r = R[1, 0, 1, 0] + R[2, 0, 2, 0]
    return {
        "c": R[1, 2, 1, 2],
        "r": r,
        "p2": R[1, 0, 1, 2] ** 2 + R[2, 0, 1, 2] ** 2,
        "q2": 2 * R[1, 0, 0, 2] ** 2 + 0.5 * (R[1, 0, 0, 1] - R[2, 0, 0, 2]) ** 2,
        "q2_det": 0.5 * r**2 - 2 * jnp.linalg.det(M),
    }


@dataclass
class RhoFamily:
    rho: FormField
    rho1: FormField
    rho2: FormField
    rho3: FormField
    gamma: FormField
    r: Callable
    c: Callable
    p2: Callable
    q2: Callable


def rho_family(system: FundamentalSystem) -> RhoFamily:
    _require_n2(system)
    metric, s = system.metric, system.s
    m, N = 3, 6
    P = jnp.concatenate([jnp.eye(m), jnp.zeros((m, m))], axis=1)

    def pieces(z):
        x, u = split(z, m)
        g = metric.metric(x)
        ric_u = metric.ricci(x) @ u / s
        K = connection_matrix(metric.christoffel(x), u)
        b0 = u / jnp.sqrt(u @ g @ u)
        return g, ric_u, K, b0

    def rho(z):
        _, ric_u, K, _ = pieces(z)
        return ric_u @ K

    def rho1(z):
        g, ric_u, _, b0 = pieces(z)
        proj = jnp.eye(m) - jnp.outer(b0, g @ b0)
        return ric_u @ proj @ P

    def rho2(z):
        g, ric_u, _, b0 = pieces(z)
        return ric_u @ cross_matrix(g, b0) @ P

    def rho3(z):
        g, ric_u, K, b0 = pieces(z)
        return ric_u @ cross_matrix(g, b0) @ K

    def gamma_values(z):
        _, R = frame_curvature(metric, z)
        B = jnp.asarray(W_BASIS)
        return R[1, 0, 0, 2] * B[9] + 0.5 * (R[1, 0, 0, 1] - R[2, 0, 0, 2]) * B[8]

    def scalar(key):
        return lambda z: frame_scalars(metric, z)[key]

    return RhoFamily(
        rho=FormField(1, N, rho, "rho", s),
        rho1=FormField(1, N, rho1, "rho1", s),
        rho2=FormField(1, N, rho2, "rho2", s),
        rho3=FormField(1, N, rho3, "rho3", s),
        gamma=frame_form(gamma_values, 2, metric, "gamma", s),
        r=r_field(system),
        c=scalar("c"),
        p2=scalar("p2"),
        q2=scalar("q2"),
    )


def scalar_invariants(metric: ChartMetric, s: float, x, u) -> dict:
    """``c, r, p2, q2`` (plus ``q2_det`` and ``scal``) at the bundle point (x, u)."""
    if metric.dim != 3:
        raise UnsupportedDimensionError("scalar invariants are defined over 3-manifolds")
    x = metric.check_point(x)
    z = jnp.concatenate([jnp.asarray(x), jnp.asarray(u, dtype=float)])
    out = {k: float(v) for k, v in frame_scalars(metric, z).items()}
    out["scal"] = float(metric.scalar(jnp.asarray(x)))
    out["r_xi"] = float(jnp.asarray(u) @ metric.ricci(jnp.asarray(x)) @ jnp.asarray(u)) / s**2
    return out


def grad_ricci_frame(metric: ChartMetric, z):
    """``A[i, j] = (nabla_i Ric)_{0j}`` in the adapted base frame, i, j = 0, 1, 2."""
    fp = frame_parts(metric, z)
    T = metric.grad_ricci(z[: metric.dim])
    b = fp.base
    return jnp.einsum("abc,ai,b,cj->ij", T, b, b[:, 0], b)


def f_direct(metric: ChartMetric, z):
    """``(F1, F2, F3, F4)`` straight from the nabla Ric components."""
    A = grad_ricci_frame(metric, z)
    F1 = 0.5 * (A[1, 2] - A[2, 1])
    F2 = jnp.array([A[0, 1], A[0, 2]])
    F3 = jnp.array([0.5 * (A[1, 2] + A[2, 1]), 0.5 * (A[2, 2] - A[1, 1])])
    F4 = -0.5 * (A[1, 1] + A[2, 2])
    return F1, F2, F3, F4


def f_from_drho(system: FundamentalSystem, drho: FormField, z):
    """``(F1, F2, F3, F4, leftover)`` from the W-decomposition of the numerical d rho."""
    c = w_coefficients(frame_values(drho, system.metric, z))
    leftover = jnp.max(jnp.abs(jnp.concatenate([c[jnp.array([0, 2])], c[4:6]])))
    return c[1], c[6:8], c[8:10], c[3], leftover


@dataclass(frozen=True)
class FCoefficients:
    F1: float
    F2: np.ndarray
    F3: np.ndarray
    F4: float
    direct: tuple
    disagreement: float
    leftover: float


def F_coefficients(system: FundamentalSystem, x, u, drho: FormField | None = None) -> FCoefficients:
    _require_n2(system)
    metric = system.metric
    x = metric.check_point(x)
    z = jnp.concatenate([jnp.asarray(x), jnp.asarray(u, dtype=float)])
    if drho is None:
        drho = system.d(rho_family(system).rho)
    a = f_from_drho(system, drho, z)
    b = f_direct(metric, z)
    dis = max(
        abs(float(a[0] - b[0])),
        float(jnp.max(jnp.abs(a[1] - b[1]))),
        float(jnp.max(jnp.abs(a[2] - b[2]))),
        abs(float(a[3] - b[3])),
    )
    return FCoefficients(
        F1=float(a[0]),
        F2=np.asarray(a[1]),
        F3=np.asarray(a[2]),
        F4=float(a[3]),
        direct=(float(b[0]), np.asarray(b[1]), np.asarray(b[2]), float(b[3])),
        disagreement=dis,
        leftover=float(a[4]),
    )


@dataclass
class RicciTypeReport:
    F1: np.ndarray
    F2norm: np.ndarray
    F3norm: np.ndarray
    F4: np.ndarray
    types: frozenset
    types_direct: frozenset
    csc_flag: bool
    recurrent_flag: bool
    tol: float
    max_disagreement: float
    consistent: bool = field(default=True)

    def as_dict(self) -> dict:
        return {
            "types": sorted(self.types),
            "types_direct": sorted(self.types_direct),
            "csc": self.csc_flag,
            "recurrent": self.recurrent_flag,
            "max_abs_F1": float(np.max(np.abs(self.F1))),
            "max_F2norm": float(np.max(self.F2norm)),
            "max_F3norm": float(np.max(self.F3norm)),
            "max_abs_F4": float(np.max(np.abs(self.F4))),
            "max_path_disagreement": self.max_disagreement,
            "containments_ok": self.consistent,
            "tol": self.tol,
        }


def _types(F1, F2n, F3n, F4, tol) -> frozenset:
    out = set()
    if np.all(np.abs(F1) <= tol):
        out.add("I")
    if np.all(F2n <= tol):
        out.add("II")
    if np.all(F3n <= tol):
        out.add("III")
    if np.all(np.abs(F4) <= tol):
        out.add("IV")
    return frozenset(out)


def _direct_types(A: np.ndarray, tol: float) -> frozenset:
    """Type conditions written directly on ``A[k, i, j] = (nabla_i Ric)_{0j}`` per sample."""
    out = set()
    if np.all(np.abs(A[:, 1, 2] - A[:, 2, 1]) <= 2 * tol):
        out.add("I")
    if np.all(np.abs(A[:, 0, 1]) <= tol) and np.all(np.abs(A[:, 0, 2]) <= tol):
        out.add("II")
    if np.all(np.abs(A[:, 1, 2] + A[:, 2, 1]) <= 2 * tol) and np.all(np.abs(A[:, 1, 1] - A[:, 2, 2]) <= 2 * tol):
        out.add("III")
    if np.all(np.abs(A[:, 1, 1] + A[:, 2, 2]) <= 2 * tol):
        out.add("IV")
    return frozenset(out)


def classify_ricci(system: FundamentalSystem, Z, tol: float = 1e-6) -> RicciTypeReport:
    """Ricci types I-IV granted only when the defining condition holds at every sample."""
    import jax

    _require_n2(system)
    Z = jnp.asarray(Z)
    if Z.shape[0] < 10:
        raise ValueError(f"Ricci classification needs at least 10 samples, got {Z.shape[0]}")
    metric = system.metric
    drho = system.d(rho_family(system).rho)

    def one(z):
        F1, F2, F3, F4, _ = f_from_drho(system, drho, z)
        return F1, jnp.linalg.norm(F2), jnp.linalg.norm(F3), F4, grad_ricci_frame(metric, z)

    F1, F2n, F3n, F4, A = (np.asarray(v) for v in jax.jit(jax.vmap(one))(Z))
    d1, d2, d3, d4 = jax.jit(jax.vmap(lambda z: f_direct(metric, z)))(Z)
    dis = float(
        max(
            np.max(np.abs(F1 - np.asarray(d1))),
            np.max(np.abs(F2n - np.linalg.norm(np.asarray(d2), axis=1))),
            np.max(np.abs(F3n - np.linalg.norm(np.asarray(d3), axis=1))),
            np.max(np.abs(F4 - np.asarray(d4))),
        )
    )
    types = _types(F1, F2n, F3n, F4, tol)
    types_direct = _direct_types(A, tol)
    consistent = ("III" not in types or "I" in types) and ("II" not in types or "IV" in types)

    xs = np.unique(np.asarray(Z[:, :3]), axis=0)
    csc, recurrent = True, True
    for x in xs:
        T = np.asarray(metric.grad_ricci(jnp.asarray(x)))
        g = np.asarray(metric.metric(jnp.asarray(x)))
        ginv = np.linalg.inv(g)
        dscal = np.einsum("bc,abc->a", ginv, T)
        if np.max(np.abs(dscal)) > tol:
            csc = False
        # nabla Ric = omega (x) g : least squares for omega
        Amat = np.einsum("ak,bc->abck", np.eye(3), g).reshape(27, 3)
        omega, *_ = np.linalg.lstsq(Amat, T.reshape(27), rcond=None)
        if np.max(np.abs(Amat @ omega - T.reshape(27))) > tol:
            recurrent = False
    return RicciTypeReport(F1, F2n, F3n, F4, types, types_direct, csc, recurrent, tol, dis, consistent)


def poincare_cartan(system: FundamentalSystem, fam: RhoFamily | None = None) -> tuple[FormField, FormField]:
    """``(d(alpha_2 - s rho_2 ^ theta), Pi)`` with ``Pi = theta ^ (gamma - r/2 alpha_1 - s d rho_2)``."""
    _require_n2(system)
    fam = fam or rho_family(system)
    s = system.s
    lhs = system.d(system.alpha[2] - s * wedge(fam.rho2, system.theta))
    inner = fam.gamma - system.alpha[1].times(lambda z: 0.5 * fam.r(z), "r/2") - s * system.d(fam.rho2)
    return lhs, wedge(system.theta, inner)


def frame_basis_form(system: FundamentalSystem, indices) -> FormField:
    """``e^{i_1 .. i_k}`` in the adapted coframe, as a form on T_M."""
    D = 2 * system.n + 1
    k = len(indices)
    vals = np.zeros(math.comb(D, k))
    srt = tuple(sorted(indices))
    vals[list(itertools.combinations(range(D), k)).index(srt)] = perm_sign(indices)
    vals = jnp.asarray(vals)
    return frame_form(lambda z: vals, k, system.metric, "e" + "".join(map(str, indices)), system.s)


def evaluate_on_frame(a: FormField, metric: ChartMetric, z, indices) -> float:
    """``a(e_{i_1}, .., e_{i_k})`` at z."""
    E, _ = sphere_frame(metric, z)
    return float(a.evaluate(z, E[:, list(indices)].T))


__all__ = [
    "FundamentalSystem",
    "RhoFamily",
    "RicciTypeReport",
    "FCoefficients",
    "build_system",
    "theta_form",
    "base_volume",
    "curvature_correction",
    "rho_family",
    "scalar_invariants",
    "F_coefficients",
    "classify_ricci",
    "poincare_cartan",
    "frame_curvature",
    "frame_scalars",
    "f_direct",
    "grad_ricci_frame",
    "frame_basis_form",
    "evaluate_on_frame",
    "compound",
]
