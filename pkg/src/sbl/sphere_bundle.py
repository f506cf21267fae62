"""Geometry of the tangent manifold and of the radius-s sphere bundle.

Chart coordinates on the tangent manifold are ``z = (x, u)`` with ``x`` a chart
point and ``u`` the fibre coordinates. A tangent vector ``y = (xdot, udot)`` splits
as ``y = hor(dpi y) + vert(K y)`` with

    dpi y = xdot,         K y = udot + Gamma(x)(xdot, u),
    hor(v) = (v, -Gamma(x)(v, u)),   vert(v) = (0, v).

The mirror map is ``B(xdot, udot) = (0, xdot)`` in these coordinates and the
Sasaki metric is ``<y, w> = g(dpi y, dpi w) + g(K y, K w)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import jax.numpy as jnp
import numpy as np

from sbl.metric_chart import ChartMetric


class BundleError(ValueError):
    pass


class NotTangentError(BundleError):
    """A vector passed as tangent to the sphere bundle has a normal (xi) component."""


# ---------------------------------------------------------------------------------------
# traceable core


def split(z, m: int):
    return z[:m], z[m:]


def connection_matrix(gamma, u):
    """``K`` as an ``m x 2m`` matrix acting on chart tangent vectors."""
    m = u.shape[0]
    return jnp.concatenate([jnp.einsum("kij,j->ki", gamma, u), jnp.eye(m)], axis=1)


def horizontal_matrix(gamma, u):
    """Columns are the horizontal lifts of the chart basis ``d_1 .. d_m``."""
    m = u.shape[0]
    return jnp.concatenate([jnp.eye(m), -jnp.einsum("kij,j->ki", gamma, u)], axis=0)


def vertical_matrix(m: int):
    return jnp.concatenate([jnp.zeros((m, m)), jnp.eye(m)], axis=0)


def mirror_matrix(m: int):
    """``B`` in chart coordinates: ``(xdot, udot) -> (0, xdot)``."""
    z = jnp.zeros((m, m))
    return jnp.block([[z, z], [jnp.eye(m), z]])


def sasaki_matrix(metric: ChartMetric, z):
    m = metric.dim
    x, u = split(z, m)
    g = metric.metric(x)
    K = connection_matrix(metric.christoffel(x), u)
    P = jnp.concatenate([jnp.eye(m), jnp.zeros((m, m))], axis=1)
    return P.T @ g @ P + K.T @ g @ K


def _others_table(m: int) -> np.ndarray:
    return np.array([[j for j in range(m) if j != p] for p in range(m)], dtype=int)


class FrameParts(NamedTuple):
    base: jnp.ndarray  # m x m, columns b_0 .. b_n, g-orthonormal, positively oriented
    full: jnp.ndarray  # 2m x 2m, columns e_0..e_n, xi/s, e_{n+1}..e_{2n}
    gamma: jnp.ndarray
    g: jnp.ndarray
    s: jnp.ndarray  # |u|_g
    pivot: jnp.ndarray


def base_frame(g, u, pivot=None):
    """Orthonormal base frame ``b_0 = u/|u|, b_1, .., b_n``.

    The chart basis vectors are Gram-Schmidt'ed in index order after ``b_0``,
    skipping the one most aligned with ``u``; ``b_n`` is flipped if needed so the
    frame is positively oriented. Returns ``(frame, |u|, pivot)``.
    """
    m = u.shape[0]
    s = jnp.sqrt(u @ g @ u)
    b0 = u / s
    if pivot is None:
        align = jnp.abs(g @ u) / jnp.sqrt(jnp.diag(g))
        pivot = jnp.argmax(align)
    others = jnp.asarray(_others_table(m))[pivot]
    cols = [b0]
    for j in range(m - 1):
        v = jnp.eye(m)[others[j]]
        for b in cols:
            v = v - (b @ g @ v) * b
        cols.append(v / jnp.sqrt(v @ g @ v))
    frame = jnp.stack(cols, axis=1)
    flip = jnp.where(jnp.linalg.det(frame) < 0, -1.0, 1.0)
    frame = frame.at[:, m - 1].multiply(flip)
    return frame, s, pivot


def frame_parts(metric: ChartMetric, z, pivot=None) -> FrameParts:
    m = metric.dim
    x, u = split(z, m)
    g = metric.metric(x)
    gamma = metric.christoffel(x)
    b, s, pivot = base_frame(g, u, pivot)
    H = horizontal_matrix(gamma, u) @ b
    V = vertical_matrix(m) @ b
    # order: e_0..e_n (horizontal), xi/s, e_{n+1}..e_{2n}
    full = jnp.concatenate([H, V[:, :1], V[:, 1:]], axis=1)
    return FrameParts(b, full, gamma, g, s, pivot)


def sphere_indices(m: int) -> np.ndarray:
    """Positions of ``e_0..e_{2n}`` inside the full frame (skipping xi/s)."""
    n = m - 1
    return np.array(list(range(n + 1)) + list(range(n + 2, 2 * n + 2)), dtype=int)


def sphere_frame(metric: ChartMetric, z, pivot=None):
    """``(E, Cof)``: the 2n+1 adapted frame vectors as columns and their dual rows."""
    fp = frame_parts(metric, z, pivot)
    idx = sphere_indices(metric.dim)
    cof = jnp.linalg.inv(fp.full)
    return fp.full[:, idx], cof[idx, :]


def cross_matrix(g, a):
    """Matrix of ``w -> a x w`` for the metric ``g`` and chart orientation (3-D only)."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    vol = jnp.sqrt(jnp.linalg.det(g))
    return vol * jnp.einsum("lk,ijk,i->lj", jnp.linalg.inv(g), jnp.asarray(eps), a)


def i_structures(metric: ChartMetric, z):
    """``(I_plus, I_minus)`` as chart matrices on the tangent manifold (n = 2)."""
    if metric.dim != 3:
        raise BundleError("I+/I- exist only over 3-manifolds")
    x, u = split(z, 3)
    g, gamma = metric.metric(x), metric.christoffel(x)
    b0 = u / jnp.sqrt(u @ g @ u)
    C = cross_matrix(g, b0)
    H, V, K = horizontal_matrix(gamma, u), vertical_matrix(3), connection_matrix(gamma, u)
    P = jnp.concatenate([jnp.eye(3), jnp.zeros((3, 3))], axis=1)
    return H @ C @ P + V @ C @ K, H @ C @ P - V @ C @ K


# ---------------------------------------------------------------------------------------
# user-facing value objects


@dataclass(frozen=True)
class BundlePoint:
    x: np.ndarray
    u: np.ndarray
    s: float

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])

    @classmethod
    def from_direction(cls, metric: ChartMetric, x, direction, s: float) -> "BundlePoint":
        """Rescale ``direction`` to g-length ``s``."""
        x = metric.check_point(x)
        d = np.asarray(direction, float)
        gx = np.asarray(metric.metric(jnp.asarray(x)))
        return cls(x, s * d / np.sqrt(d @ gx @ d), float(s))

    def validate(self, metric: ChartMetric, tol: float = 1e-12) -> None:
        metric.check_point(self.x)
        if self.s <= 0:
            raise BundleError(f"radius must be positive, got {self.s}")
        gx = np.asarray(metric.metric(jnp.asarray(self.x)))
        norm2 = float(self.u @ gx @ self.u)
        if abs(norm2 - self.s**2) > tol * max(1.0, self.s**2):
            raise BundleError(f"g(u, u) = {norm2!r} differs from s^2 = {self.s**2!r}")


@dataclass(frozen=True)
class AdaptedFrame:
    at: BundlePoint
    e: np.ndarray  # (2n+1, 2m) rows e_0 .. e_{2n}
    xi: np.ndarray
    coframe: np.ndarray  # (2n+1, 2m) rows e^0 .. e^{2n}
    base: np.ndarray  # (m, m) columns b_0 .. b_n
    pivot: int

    @property
    def n(self) -> int:
        return self.base.shape[0] - 1


@dataclass(frozen=True)
class MirrorMap:
    B: np.ndarray
    Bt: np.ndarray
    J: np.ndarray
    Iplus: np.ndarray | None
    Iminus: np.ndarray | None


def horizontal_lift(metric: ChartMetric, x, u, v) -> np.ndarray:
    """Horizontal lift of base vector ``v`` to the point ``(x, u)``: ``(v, -Gamma(v, u))``."""
    x = metric.check_point(x)
    gamma = np.asarray(metric.christoffel(jnp.asarray(x)))
    v, u = np.asarray(v, float), np.asarray(u, float)
    return np.concatenate([v, -np.einsum("kij,i,j->k", gamma, v, u)])


def vertical_lift(v) -> np.ndarray:
    v = np.asarray(v, float)
    return np.concatenate([np.zeros_like(v), v])


def adapted_frame(metric: ChartMetric, p: BundlePoint) -> AdaptedFrame:
    p.validate(metric, tol=1e-10)
    fp = frame_parts(metric, jnp.asarray(p.z))
    full = np.asarray(fp.full)
    idx = sphere_indices(metric.dim)
    cof = np.linalg.inv(full)
    n = metric.dim - 1
    return AdaptedFrame(
        at=p,
        e=full[:, idx].T.copy(),
        xi=full[:, n + 1] * p.s,
        coframe=cof[idx, :].copy(),
        base=np.asarray(fp.base),
        pivot=int(fp.pivot),
    )


def sasaki_inner(metric: ChartMetric, p: BundlePoint, y, w) -> float:
    S = np.asarray(sasaki_matrix(metric, jnp.asarray(p.z)))
    return float(np.asarray(y, float) @ S @ np.asarray(w, float))


def mirror_map(metric: ChartMetric, p: BundlePoint) -> MirrorMap:
    zj = jnp.asarray(p.z)
    m = metric.dim
    B = np.asarray(mirror_matrix(m))
    S = np.asarray(sasaki_matrix(metric, zj))
    Bt = np.linalg.solve(S, B.T @ S)
    Ip = Im = None
    if m == 3:
        Ip, Im = (np.asarray(a) for a in i_structures(metric, zj))
    return MirrorMap(B=B, Bt=Bt, J=B - Bt, Iplus=Ip, Iminus=Im)


def sasaki_adjoint(metric: ChartMetric, p: BundlePoint, A: np.ndarray) -> np.ndarray:
    S = np.asarray(sasaki_matrix(metric, jnp.asarray(p.z)))
    return np.linalg.solve(S, A.T @ S)


def tautological_residual(metric: ChartMetric, p: BundlePoint, y) -> float:
    """|pi* nabla_y xi - y^v| with the left side from differentiating the field xi(z) = (0, u).

    The vertical part ``y^v`` is taken from the Sasaki-orthogonal split, i.e.
    ``y - hor(dpi y)``, independently of the connection map.
    """
    import jax

    m = metric.dim
    zj, yj = jnp.asarray(p.z), jnp.asarray(np.asarray(y, float))

    def xi_fibre(zz):
        return zz[m:]

    _, dxi = jax.jvp(xi_fibre, (zj,), (yj,))
    gamma = metric.christoffel(zj[:m])
    cov = dxi + jnp.einsum("kij,i,j->k", gamma, yj[:m], zj[m:])
    hor = jnp.concatenate([yj[:m], -jnp.einsum("kij,i,j->k", gamma, yj[:m], zj[m:])])
    yv = yj - hor
    return float(jnp.max(jnp.abs(jnp.concatenate([jnp.zeros(m), cov]) - yv)))


def contact_form_bilinear_check(metric: ChartMetric, p: BundlePoint, v, w, tol: float = 1e-9) -> float:
    """|d theta(v, w) - (<v, Bw> - <w, Bv>)| with d theta differentiated numerically."""
    from sbl.eds import theta_form
    from sbl.forms import ext_derivative

    v, w = np.asarray(v, float), np.asarray(w, float)
    zj = jnp.asarray(p.z)
    S = np.asarray(sasaki_matrix(metric, zj))
    xi = vertical_lift(p.u)
    for name, vec in (("v", v), ("w", w)):
        if abs(xi @ S @ vec) > tol * max(1.0, np.linalg.norm(vec)) * p.s:
            raise NotTangentError(f"{name} is not tangent to the sphere bundle")
    dtheta = ext_derivative(theta_form(metric), backend=metric.backend, step=1e-4)
    lhs = float(dtheta.evaluate(zj, jnp.stack([jnp.asarray(v), jnp.asarray(w)])))
    B = np.asarray(mirror_matrix(metric.dim))
    rhs = float(v @ S @ (B @ w) - w @ S @ (B @ v))
    return abs(lhs - rhs)


def sample_bundle_points(metric: ChartMetric, s: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` points ``z = (x, u)`` with x uniform in the safe box and u uniform on the g-sphere."""
    xs = metric.domain.sample(rng, count)
    gauss = rng.standard_normal((count, metric.dim))
    out = np.empty((count, 2 * metric.dim))
    for k in range(count):
        gx = np.asarray(metric.metric(jnp.asarray(xs[k])))
        L = np.linalg.cholesky(gx)
        v = np.linalg.solve(L.T, gauss[k])  # g-orthonormal frame applied to a Gaussian
        v = s * v / np.sqrt(v @ gx @ v)
        out[k] = np.concatenate([xs[k], v])
    return out
