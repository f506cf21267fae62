"""Integration along the S^2 (or S^1) fibres of the sphere bundle.

The fibre over x is parametrized as ``u = s * F @ omega(theta, z)`` with F a
g-orthonormal basis of T_xM and ``omega = (a cos theta, a sin theta, z)``,
``a = sqrt(1 - z^2)``. The area element of the unit sphere is ``dtheta dz``, so a
trapezoid rule in theta times Gauss-Legendre in z integrates polynomials in u
of degree below ``min(N_theta, 2 N_z)`` exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from sbl.eds import frame_scalars
from sbl.forms import FormField, compound
from sbl.metric_chart import ChartMetric, curvature_pack
from sbl.sphere_bundle import horizontal_matrix


class QuadratureError(RuntimeError):
    """Refining the fibre grid changed an integral by more than the tolerance."""


@dataclass(frozen=True)
class FiberGrid:
    n_theta: int = 32
    n_z: int = 16

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit-sphere points ``(count, 3)`` and weights summing to 4 pi."""
        th = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        zs, wz = np.polynomial.legendre.leggauss(self.n_z)
        T, Zz = np.meshgrid(th, zs, indexing="ij")
        a = np.sqrt(1 - Zz**2)
        pts = np.stack([a * np.cos(T), a * np.sin(T), Zz], axis=-1).reshape(-1, 3)
        w = (np.full(self.n_theta, 2 * np.pi / self.n_theta)[:, None] * wz[None, :]).reshape(-1)
        return pts, w

    def circle(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit-circle points and weights summing to 2 pi (for 2-D bases)."""
        th = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(self.n_theta, 2 * np.pi / self.n_theta)

    def refined(self) -> "FiberGrid":
        return FiberGrid(2 * self.n_theta, 2 * self.n_z)

    @property
    def degree(self) -> int:
        return min(self.n_theta - 1, 2 * self.n_z - 1)


def orthonormal_basis(metric: ChartMetric, x) -> np.ndarray:
    return curvature_pack(metric, x).orthonormal_frame()


def fiber_points(metric: ChartMetric, s: float, x, grid: FiberGrid, basis: np.ndarray | None = None):
    """Bundle points ``z = (x, u)`` on the fibre and the quadrature weights."""
    x = metric.check_point(x)
    F = orthonormal_basis(metric, x) if basis is None else np.asarray(basis, float)
    pts, w = grid.nodes() if metric.dim == 3 else grid.circle()
    U = s * pts @ F.T
    Z = np.concatenate([np.broadcast_to(x, U.shape), U], axis=1)
    return Z, w, pts, F


def fiber_integrate(
    metric: ChartMetric,
    s: float,
    x,
    f: Callable,
    grid: FiberGrid | None = None,
    basis: np.ndarray | None = None,
) -> float:
    """``f-check(x) = (1/s^2) int f alpha_2``, i.e. the integral of ``f(x, s omega)`` over the unit sphere."""
    grid = grid or FiberGrid()
    Z, w, _, _ = fiber_points(metric, s, x, grid, basis)
    vals = np.asarray(jax.vmap(f)(jnp.asarray(Z)), float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite on the whole fibre")
    return float(vals @ w)


def norm_R2(R: np.ndarray) -> float:
    return float(np.sum(R**2))


def norm_R2_weighted(R: np.ndarray) -> float:
    """``4 (R_ijij^2 + R_ikik^2 + R_jkjk^2) + 8 (R_ijik^2 + R_ijkj^2 + R_ikjk^2)`` with (i, j, k) = (0, 1, 2)."""
    i, j, k = 0, 1, 2
    return float(
        4 * (R[i, j, i, j] ** 2 + R[i, k, i, k] ** 2 + R[j, k, j, k] ** 2)
        + 8 * (R[i, j, i, k] ** 2 + R[i, j, k, j] ** 2 + R[i, k, j, k] ** 2)
    )


@dataclass
class FiberRecord:
    name: str
    closed_form_value: float
    computed: float
    refined: float
    abs_err: float
    rel_err: float
    verdict: str  # "match" or "mismatch"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "closed_form": self.closed_form_value,
            "quadrature": self.computed,
            "quadrature_refined": self.refined,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "verdict": self.verdict,
        }


@dataclass
class FiberIntegralReport:
    x: np.ndarray
    s: float
    norm_R2: float
    norm_R2_weighted: float
    scal: float
    records: list = field(default_factory=list)

    def record(self, name: str) -> FiberRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


# integrands and their closed forms in terms of (|R|^2, scal)
BATTERY = (
    ("1", lambda v: 1.0, lambda R2, sc: 4 * math.pi),
    ("c", lambda v: v["c"], lambda R2, sc: 2 * math.pi / 3 * sc),
    ("c^2", lambda v: v["c"] ** 2, lambda R2, sc: math.pi / 15 * (2 * R2 + sc**2)),
    ("r", lambda v: v["r"], lambda R2, sc: 4 * math.pi / 3 * sc),
    ("r^2", lambda v: v["r"] ** 2, lambda R2, sc: 2 * math.pi / 15 * (R2 + 6 * sc**2)),
    ("p^2", lambda v: v["p2"], lambda R2, sc: math.pi / 15 * (3 * R2 - 2 * sc**2)),
    ("q^2", lambda v: v["q2"], lambda R2, sc: 2 * math.pi / 15 * (3 * R2 - 2 * sc**2)),
)


def identity_battery(
    metric: ChartMetric,
    s: float,
    x,
    grid: FiberGrid | None = None,
    tol: float = 1e-6,
    conv_tol: float = 1e-8,
) -> FiberIntegralReport:
    """The seven fibre integrals by quadrature, each next to its closed form.

    The quadrature value is authoritative; a closed form that disagrees beyond
    ``tol`` (relative to ``max(1, |value|)``) is recorded as a ``mismatch``.
    """
    if metric.dim != 3:
        raise ValueError("the fibre integral battery is defined over 3-manifolds")
    grid = grid or FiberGrid()
    pack = curvature_pack(metric, x)
    F = pack.orthonormal_frame()
    Rn = np.einsum("abcd,ai,bj,ck,dl->ijkl", pack.Riem, F, F, F, F)
    R2, R2w = norm_R2(Rn), norm_R2_weighted(Rn)
    report = FiberIntegralReport(pack.x, float(s), R2, R2w, pack.scal)

    def integrate_all(gr: FiberGrid) -> np.ndarray:
        Z, w, _, _ = fiber_points(metric, s, pack.x, gr, F)
        vals = jax.vmap(lambda z: frame_scalars(metric, z))(jnp.asarray(Z))
        vals = {k: np.asarray(v) for k, v in vals.items()}
        out = []
        for _, integrand, _ in BATTERY:
            fv = integrand(vals)
            fv = np.broadcast_to(np.asarray(fv, float), w.shape)
            out.append(float(fv @ w))
        return np.array(out)

    coarse, fine = integrate_all(grid), integrate_all(grid.refined())
    if np.max(np.abs(coarse - fine) / np.maximum(1.0, np.abs(fine))) > conv_tol:
        raise QuadratureError(f"fibre quadrature not converged: {coarse} vs {fine}")
    for (name, _, closed), val, ref in zip(BATTERY, coarse, fine):
        cf = closed(R2, pack.scal)
        err = abs(val - cf)
        rel = err / max(1.0, abs(val))
        report.records.append(FiberRecord(name, cf, float(val), float(ref), err, rel, "match" if rel <= tol else "mismatch"))
    return report


def _sphere_tangents(om):
    """Orthonormal tangents ``t`` of the unit sphere at ``om`` with ``(om, t)`` positively oriented."""
    if om.shape[0] == 2:
        return jnp.array([[-om[1]], [om[0]]])
    t1 = jnp.cross(jnp.array([0.0, 0.0, 1.0]), om)
    t1 = t1 / jnp.linalg.norm(t1)  # grid never hits the poles
    return jnp.stack([t1, jnp.cross(om, t1)], axis=1)


def pushforward(
    form: FormField,
    metric: ChartMetric,
    s: float,
    x,
    grid: FiberGrid | None = None,
) -> np.ndarray:
    """Fibre integral of a k-form on the bundle: components of the (k-2)-form on M
    (k-1 for 2-D bases) on the g-orthonormal base frame, in increasing-index order."""
    grid = grid or FiberGrid()
    m = metric.dim
    fib = m - 1
    k = form.degree - fib
    if k < 0:
        raise ValueError(f"a {form.degree}-form has no fibre component")
    Z, w, pts, F = fiber_points(metric, s, x, grid)
    x = jnp.asarray(Z[0, :m])
    gamma = metric.christoffel(x)
    base_idx = list(itertools.combinations(range(m), k))

    def integrand(z, om):
        u = z[m:]
        H = horizontal_matrix(gamma, u) @ jnp.asarray(F)  # horizontal lifts of the base frame
        T = jnp.concatenate([jnp.zeros((m, fib)), jnp.asarray(F) @ _sphere_tangents(om)], axis=0) * s
        comps = form.comps(z)
        out = []
        for I in base_idx:
            vecs = jnp.concatenate([H[:, list(I)], T], axis=1)
            out.append(comps @ compound(vecs, form.degree)[:, 0])
        return jnp.stack(out)

    vals = np.asarray(jax.jit(jax.vmap(integrand))(jnp.asarray(Z), jnp.asarray(pts)))
    return w @ vals


def pushforward_checks(metric: ChartMetric, s: float, x, grid: FiberGrid | None = None) -> dict:
    """Push-forwards of ``vol_S``, ``theta ^ alpha_2`` and ``alpha_0 ^ alpha_2`` (n = 2)."""
    from sbl.eds import build_system
    from sbl.forms import wedge

    sy = build_system(metric, s)
    return {
        "vol_S": float(pushforward(sy.vol_S, metric, s, x, grid)[0]),
        "theta^alpha2": float(np.max(np.abs(pushforward(wedge(sy.theta, sy.alpha[2]), metric, s, x, grid)))),
        "alpha0^alpha2": float(np.max(np.abs(pushforward(wedge(sy.alpha[0], sy.alpha[2]), metric, s, x, grid)))),
        "expected_vol": 4 * math.pi * s**2,
    }


def tensor_lift_integrals(metric: ChartMetric, x, phi, grid: FiberGrid | None = None) -> dict:
    """Unit-radius fibre integrals of lifted tensors.

    ``phi`` of shape ``(m,)`` is a 1-form: returns ``(phi~^2)-check`` against ``(4 pi/3)|phi|^2``.
    ``phi`` of shape ``(m, m)`` is a 2-tensor ``g1``: returns the diagonal integral of
    ``g1(u, u)`` against ``(4 pi/3) tr_g g1`` and the integral of ``|g1(u, .)|^2`` against
    ``(4 pi/3)|g1|^2``.
    """
    grid = grid or FiberGrid()
    x = metric.check_point(x)
    phi = np.asarray(phi, float)
    g = np.asarray(metric.metric(jnp.asarray(x)))
    ginv = np.linalg.inv(g)
    Z, w, _, _ = fiber_points(metric, 1.0, x, grid)
    U = Z[:, metric.dim:]
    out = {}
    if phi.ndim == 1:
        out["phi^2"] = {"quadrature": float(((U @ phi) ** 2) @ w), "closed_form": 4 * math.pi / 3 * float(phi @ ginv @ phi)}
    elif phi.ndim == 2:
        diag = np.einsum("ki,ij,kj->k", U, phi, U)
        out["g1(u,u)"] = {"quadrature": float(diag @ w), "closed_form": 4 * math.pi / 3 * float(np.trace(ginv @ phi))}
        row = U @ phi
        sq = np.einsum("ki,ij,kj->k", row, ginv, row)
        hs = float(np.einsum("ab,cd,ac,bd->", ginv, ginv, phi, phi))
        out["|g1(u,.)|^2"] = {"quadrature": float(sq @ w), "closed_form": 4 * math.pi / 3 * hs}
    else:
        raise ValueError(f"expected a 1-form or a 2-tensor, got shape {phi.shape}")
    return out
