"""Immersed surfaces in 3-D chart metrics, their Gauss lifts and Weingarten functionals.

Orientation rule: the unit normal ``nu`` makes ``(nu, phi_a, phi_b)`` positively
oriented, and the shape operator is ``S = -nabla nu``. Spheres are parametrised
as ``(azimuth, polar)`` so that ``nu`` points inward and round spheres get
positive principal curvatures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from sbl.backends import jacobian
from sbl.catalog import euclidean3, halfspace, hyperbolic3
from sbl.eds import FundamentalSystem, build_system
from sbl.forms import pullback
from sbl.lagrangian import InvariantLagrangian
from sbl.metric_chart import ChartMetric, Domain


class SurfaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurfaceImmersion:
    name: str
    phi: Callable  # (a, b) -> chart point, jax.numpy
    patch: tuple  # ((a0, a1), (b0, b1))
    metric: ChartMetric
    backend: str = "dual"
    step: float = 1e-4
    # closed-form principal curvatures (a, b) -> (l1, l2), when known
    expected: Callable | None = None
    params: dict = field(default_factory=dict)

    def tangent(self, t):
        return jacobian(self.phi, self.backend, self.step)(t)

    def second(self, t):
        return jax.jacfwd(lambda q: jacobian(self.phi, self.backend, self.step)(q))(t)

    def induced(self, t):
        X = self.tangent(t)
        return X.T @ self.metric.g(self.phi(t)) @ X

    def normal(self, t):
        X = self.tangent(t)
        g = self.metric.g(self.phi(t))
        ncov = jnp.cross(X[:, 0], X[:, 1])
        nu = jnp.linalg.solve(g, ncov)
        return nu / jnp.sqrt(nu @ g @ nu)

    def gauss_lift(self, s: float = 1.0) -> Callable:
        return lambda t: jnp.concatenate([self.phi(t), s * self.normal(t)])


# ---------------------------------------------------------------------------------------
# catalog


def horosphere(height: float = 1.0) -> SurfaceImmersion:
    """``z = height`` in the half-space model, upward normal, umbilic with ``lambda = 1``."""
    return SurfaceImmersion(
        "horosphere",
        lambda t: jnp.array([t[0], t[1], height]),
        ((-1.0, 1.0), (-1.0, 1.0)),
        halfspace(),
        expected=lambda t: (1.0, 1.0),
        params={"height": height},
    )


def vertical_plane() -> SurfaceImmersion:
    """``x = 0`` in the half-space model; totally geodesic."""
    return SurfaceImmersion(
        "vertical_plane",
        lambda t: jnp.array([0.0, t[0], t[1]]),
        ((-1.0, 1.0), (0.5, 2.0)),
        halfspace(),
        expected=lambda t: (0.0, 0.0),
    )


def _round_sphere(radius: float):
    def phi(t):
        az, pol = t[0], t[1]
        return radius * jnp.array([jnp.sin(pol) * jnp.cos(az), jnp.sin(pol) * jnp.sin(az), jnp.cos(pol)])

    return phi


_BAND = ((0.0, 2.0 * math.pi), (0.3, math.pi - 0.3))


def geodesic_sphere(a: float = 1.0, c: float = -1.0) -> SurfaceImmersion:
    """Geodesic sphere of radius ``a`` about the origin of the ball model of curvature ``c < 0``."""
    if c >= 0:
        raise SurfaceError("geodesic_sphere needs c < 0")
    k = math.sqrt(-c)
    R = 2.0 / k * math.tanh(k * a / 2.0)
    lam = k / math.tanh(k * a)
    return SurfaceImmersion(
        "geodesic_sphere", _round_sphere(R), _BAND, hyperbolic3(c), expected=lambda t: (lam, lam), params={"a": a, "c": c}
    )


def euclidean_sphere(a: float = 1.0) -> SurfaceImmersion:
    return SurfaceImmersion(
        "euclidean_sphere", _round_sphere(a), _BAND, euclidean3(), expected=lambda t: (1.0 / a, 1.0 / a), params={"a": a}
    )


def graph(h: Callable | None = None, metric: ChartMetric | None = None) -> SurfaceImmersion:
    """``z = h(x, y)`` with upward normal; default ``h = 0.2 sin(x) cos(y)`` in Euclidean space."""
    h = h or (lambda a, b: 0.2 * jnp.sin(a) * jnp.cos(b))
    return SurfaceImmersion(
        "graph",
        lambda t: jnp.array([t[0], t[1], h(t[0], t[1])]),
        ((-1.0, 1.0), (-1.0, 1.0)),
        metric or euclidean3(),
    )


SURFACES: dict[str, Callable[..., SurfaceImmersion]] = {
    "horosphere": horosphere,
    "vertical_plane": vertical_plane,
    "geodesic_sphere": geodesic_sphere,
    "euclidean_sphere": euclidean_sphere,
    "graph": graph,
}


def get_surface(name: str, **params) -> SurfaceImmersion:
    try:
        factory = SURFACES[name]
    except KeyError:
        raise SurfaceError(f"unknown surface {name!r}; known: {sorted(SURFACES)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------------------
# extrinsic geometry


def patch_grid(S: SurfaceImmersion, n: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes on the patch and their weights."""
    x, w = np.polynomial.legendre.leggauss(n)
    (a0, a1), (b0, b1) = S.patch
    A = 0.5 * (a1 - a0) * x + 0.5 * (a1 + a0)
    B = 0.5 * (b1 - b0) * x + 0.5 * (b1 + b0)
    T = np.stack(np.meshgrid(A, B, indexing="ij"), -1).reshape(-1, 2)
    W = np.outer(0.5 * (a1 - a0) * w, 0.5 * (b1 - b0) * w).reshape(-1)
    return T, W


def _geometry_at(S: SurfaceImmersion):
    metric = S.metric

    def one(t):
        x = S.phi(t)
        X = S.tangent(t)
        H2 = S.second(t)  # [k, a, b]
        g = metric.g(x)
        nu = S.normal(t)
        I = X.T @ g @ X
        acc = H2 + jnp.einsum("kij,ia,jb->kab", metric.christoffel(x), X, X)
        II = jnp.einsum("kab,kl,l->ab", acc, g, nu)
        shape = jnp.linalg.solve(I, II)
        R = metric.riemann(x)
        amb = jnp.einsum("lkij,i,j,k,l->", R, X[:, 0], X[:, 1], X[:, 1], X[:, 0]) / jnp.linalg.det(I)
        lam = jnp.sort(jnp.real(jnp.linalg.eigvals(shape)))
        return {
            "area": jnp.sqrt(jnp.linalg.det(I)),
            "H": 0.5 * jnp.trace(shape),
            "Kext": jnp.linalg.det(shape),
            "ambient": amb,
            "l1": lam[0],
            "l2": lam[1],
            "sym": jnp.max(jnp.abs(II - II.T)),
            "normal_tangency": jnp.max(jnp.abs(X.T @ g @ nu)),
        }

    return one


@dataclass(frozen=True)
class SurfaceGeometry:
    points: np.ndarray
    area: np.ndarray
    H: np.ndarray
    Kext: np.ndarray
    KN_gauss: np.ndarray
    KN_intrinsic: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    symmetry_residual: float
    normal_residual: float

    @property
    def gauss_equation_residual(self) -> float:
        return float(np.max(np.abs(self.KN_gauss - self.KN_intrinsic)))


def induced_chart(S: SurfaceImmersion, fd_step: float = 1e-3) -> ChartMetric:
    (a0, a1), (b0, b1) = S.patch
    dom = Domain(f"patch of {S.name}", lambda t: True, (a0, b0), (a1, b1))
    return ChartMetric(f"induced[{S.name}]", 2, S.induced, dom, backend="fd", fd_step=fd_step)


def surface_geometry(S: SurfaceImmersion, points=None, fd_step: float = 1e-3) -> SurfaceGeometry:
    """Principal curvatures and ``K_N`` two ways: Gauss equation vs the induced metric by FD."""
    T = patch_grid(S, 6)[0] if points is None else np.atleast_2d(np.asarray(points, float))
    geo = jax.jit(jax.vmap(_geometry_at(S)))(jnp.asarray(T))
    chart = induced_chart(S, fd_step)
    Kin = jax.jit(jax.vmap(lambda t: 0.5 * chart.scalar(t)))(jnp.asarray(T))
    geo = {k: np.asarray(v) for k, v in geo.items()}
    return SurfaceGeometry(
        T,
        geo["area"],
        geo["H"],
        geo["Kext"],
        geo["ambient"] + geo["Kext"],
        np.asarray(Kin),
        geo["l1"],
        geo["l2"],
        float(np.max(geo["sym"])),
        float(np.max(geo["normal_tangency"])),
    )


# ---------------------------------------------------------------------------------------
# Gauss lift


@dataclass(frozen=True)
class LiftPullback:
    points: np.ndarray
    ratios: np.ndarray  # (count, 3): f^* alpha_i / vol_N
    expected: np.ndarray  # (count, 3): 1, -(l1 + l2), l1 l2
    theta: float  # max |f^* theta|

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.ratios - self.expected)))


def _lift_system(S: SurfaceImmersion, system: FundamentalSystem | None) -> FundamentalSystem:
    system = system or build_system(S.metric, 1.0)
    if system.s != 1.0:
        raise SurfaceError("the Gauss lift lives on the unit sphere bundle; build the system with s = 1")
    if system.metric is not S.metric:
        raise SurfaceError("system and surface use different metrics")
    return system


def gauss_lift_pullback(S: SurfaceImmersion, system: FundamentalSystem | None = None, points=None) -> LiftPullback:
    system = _lift_system(S, system)
    T = patch_grid(S, 5)[0] if points is None else np.atleast_2d(np.asarray(points, float))
    lift = S.gauss_lift(1.0)
    pulled = [pullback(a, lift, 2) for a in system.alpha]
    pth = pullback(system.theta, lift, 2)
    geo = _geometry_at(S)

    def one(t):
        gd = geo(t)
        r = jnp.stack([p.comps(t)[0] for p in pulled]) / gd["area"]
        e = jnp.stack([1.0, -2.0 * gd["H"], gd["Kext"]])
        return r, e, jnp.max(jnp.abs(pth.comps(t)))

    r, e, th = jax.jit(jax.vmap(one))(jnp.asarray(T))
    return LiftPullback(T, np.asarray(r), np.asarray(e), float(jnp.max(th)))


# ---------------------------------------------------------------------------------------
# Weingarten functional


@dataclass(frozen=True)
class WeingartenReport:
    surface: str
    t0: float
    branch: str
    residual: np.ndarray  # K_N + sign 2 t0 H + 2 t0^2 at the quadrature nodes
    value: float  # integral of the residual over the patch
    lift_value: float  # t0 * integral of f^* Lambda_2
    lift_value_inverse: float  # (1/t0) * integral of f^* Lambda_2
    lambda_branch: int
    curvature: float

    @property
    def stationary(self) -> bool:
        return bool(np.max(np.abs(self.residual)) < 1e-8)

    @property
    def cross_check(self) -> float:
        return abs(self.value - self.lift_value)


def weingarten_functional(
    S: SurfaceImmersion, t0: float, branch: str = "-", n: int = 24, tol: float = 1e-8
) -> WeingartenReport:
    """``int (K_N - 2 t0 H + 2 t0^2)`` for branch ``-`` (``+`` flips the sign of the H term).

    Needs constant curvature ``c = -t0^2``. The branch pairs with ``Lambda_2`` carrying
    ``-sign`` in front of ``alpha_1``.
    """
    if branch not in ("+", "-"):
        raise SurfaceError("branch must be '+' or '-'")
    if t0 <= 0:
        raise SurfaceError("t0 must be positive")
    sign = 1.0 if branch == "+" else -1.0
    T, W = patch_grid(S, n)
    geo = jax.jit(jax.vmap(_geometry_at(S)))(jnp.asarray(T))
    geo = {k: np.asarray(v) for k, v in geo.items()}
    c = geo["ambient"]
    if np.max(np.abs(c + t0**2)) > tol:
        raise SurfaceError(f"ambient curvature {float(np.mean(c)):.6g} is not -t0^2 = {-t0**2:.6g}")
    KN = c + geo["Kext"]
    res = KN + sign * 2.0 * t0 * geo["H"] + 2.0 * t0**2
    value = float(np.sum(W * res * geo["area"]))

    lam_branch = -int(sign)
    system = build_system(S.metric, 1.0)
    lam = InvariantLagrangian.lambda2(t0, lam_branch).form(system)
    pulled = pullback(lam, S.gauss_lift(1.0), 2)
    vals = np.asarray(jax.jit(jax.vmap(lambda t: pulled.comps(t)[0]))(jnp.asarray(T)))
    integral = float(np.sum(W * vals))
    return WeingartenReport(S.name, t0, branch, res, value, t0 * integral, integral / t0, lam_branch, float(np.mean(c)))
