"""Riemannian metrics on a coordinate chart and their curvature.

Index convention (fixed once, used everywhere)::

    R_{lkij} = < R(d_i, d_j) d_k , d_l >,   R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]

so that a space of constant sectional curvature c has
``R_{lkij} = c (g_il g_jk - g_ik g_jl)`` and ``R_{1212} = c`` in an orthonormal frame.
``Ric(Y, Z) = trace(W -> R(W, Y) Z)``.
"""

from __future__ import annotations

import dataclasses
import weakref
from dataclasses import dataclass, field
from typing import Callable, Mapping

import jax
import jax.numpy as jnp
import numpy as np

from sbl.backends import BACKENDS, jacobian


class DomainError(ValueError):
    """A chart point lies outside the metric's domain."""


class DegenerateMetricError(ValueError):
    """The metric matrix is singular or not positive definite."""


@dataclass(frozen=True)
class Domain:
    """Open chart domain: a validity predicate plus a safe box used for sampling."""

    description: str
    contains: Callable[[np.ndarray], bool]
    safe_lo: tuple
    safe_hi: tuple

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = np.asarray(self.safe_lo, float), np.asarray(self.safe_hi, float)
        return lo + (hi - lo) * rng.random((count, lo.size))


@dataclass(frozen=True, eq=False)
class ChartMetric:
    """A metric tensor field ``g(x)`` on a chart of dimension 2 or 3.

    ``g`` must be written with ``jax.numpy`` so both backends can differentiate it.
    ``analytic`` may hold closed-form ``christoffel``/``riemann`` callables used by
    the ``analytic`` backend.
    """

    name: str
    dim: int
    g: Callable
    domain: Domain
    params: Mapping = field(default_factory=dict)
    backend: str = "dual"
    fd_step: float = 1e-3
    analytic: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"only 2- and 3-dimensional charts are supported, got {self.dim}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")

    def with_backend(self, backend: str, fd_step: float | None = None) -> "ChartMetric":
        return dataclasses.replace(self, backend=backend, fd_step=fd_step or self.fd_step)

    # -- traceable pieces (jax.numpy in, jax.numpy out) -------------------------------

    def _jac(self, f):
        return jacobian(f, self.backend, self.fd_step)

    def metric(self, x):
        return self.g(x)

    def dmetric(self, x):
        """``dg[l, j, i] = d_i g_{lj}``."""
        return self._jac(self.g)(x)

    def christoffel(self, x):
        """``Gamma[k, i, j] = Gamma^k_{ij}``."""
        if self.backend == "analytic" and "christoffel" in self.analytic:
            return self.analytic["christoffel"](x)
        ginv = jnp.linalg.inv(self.g(x))
        dg = self.dmetric(x)
        # lowered[l, i, j] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
        lowered = 0.5 * (jnp.transpose(dg, (0, 2, 1)) + dg) - 0.5 * jnp.transpose(dg, (2, 0, 1))
        return jnp.einsum("kl,lij->kij", ginv, lowered)

    def riemann_up(self, x):
        """``Rup[l, k, i, j] = R^l_{kij}``."""
        gam = self.christoffel(x)
        dgam = self._jac(self.christoffel)(x)  # dgam[l, a, b, i] = d_i Gamma^l_ab
        return (
            jnp.einsum("ljki->lkij", dgam)
            - jnp.einsum("likj->lkij", dgam)
            + jnp.einsum("lim,mjk->lkij", gam, gam)
            - jnp.einsum("ljm,mik->lkij", gam, gam)
        )

    def riemann(self, x):
        """Fully lowered ``R[l, k, i, j] = R_{lkij}``."""
        if self.backend == "analytic" and "riemann" in self.analytic:
            return self.analytic["riemann"](x)
        return jnp.einsum("lp,pkij->lkij", self.g(x), self.riemann_up(x))

    def ricci(self, x):
        if self.backend == "analytic" and "riemann" in self.analytic:
            ginv = jnp.linalg.inv(self.g(x))
            return jnp.einsum("pa,acpb->bc", ginv, self.riemann(x))
        return jnp.einsum("acab->bc", self.riemann_up(x))

    def scalar(self, x):
        return jnp.einsum("bc,bc->", jnp.linalg.inv(self.g(x)), self.ricci(x))

    def grad_ricci(self, x):
        """``T[a, b, c] = (nabla_a Ric)_{bc}``."""
        gam = self.christoffel(x)
        ric = self.ricci(x)
        dric = self._jac(self.ricci)(x)  # dric[b, c, a]
        return (
            jnp.transpose(dric, (2, 0, 1))
            - jnp.einsum("dab,dc->abc", gam, ric)
            - jnp.einsum("dac,bd->abc", gam, ric)
        )

    # -- validation --------------------------------------------------------------------

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(f"{self.name}: expected a point of shape ({self.dim},), got {x.shape}")
        if not self.domain.contains(x):
            raise DomainError(f"{self.name}: point {x.tolist()} outside domain ({self.domain.description})")
        gx = np.asarray(self.g(jnp.asarray(x)))
        if not np.all(np.isfinite(gx)):
            raise DegenerateMetricError(f"{self.name}: non-finite metric at {x.tolist()}")
        eig = np.linalg.eigvalsh(0.5 * (gx + gx.T))
        if eig[0] <= 1e-12 * max(1.0, eig[-1]):
            raise DegenerateMetricError(f"{self.name}: metric not positive definite at {x.tolist()}")
        return x


@dataclass
class CurvaturePack:
    x: np.ndarray
    g: np.ndarray
    Gamma: np.ndarray
    Riem: np.ndarray
    Ric: np.ndarray
    scal: float
    gradRic: np.ndarray

    def orthonormal_frame(self) -> np.ndarray:
        """Columns form a g-orthonormal, positively oriented basis (Cholesky based)."""
        L = np.linalg.cholesky(self.g)
        return np.linalg.inv(L).T

    def invariant_residuals(self) -> dict[str, float]:
        """Symmetry and Bianchi residuals; all should vanish to backend tolerance."""
        R, ric, T = self.Riem, self.Ric, self.gradRic
        ginv = np.linalg.inv(self.g)
        bianchi = R + np.einsum("lkij->lijk", R) + np.einsum("lkij->ljki", R)
        # contracted second Bianchi: g^{ab} T_{a b c} = 1/2 d_c scal, written with T only:
        # d_c scal = g^{ab} T_{c a b}
        div = np.einsum("ab,abc->c", ginv, T)
        dscal = np.einsum("ab,cab->c", ginv, T)
        return {
            "antisym_lk": float(np.max(np.abs(R + np.swapaxes(R, 0, 1)))),
            "antisym_ij": float(np.max(np.abs(R + np.swapaxes(R, 2, 3)))),
            "pair_symmetry": float(np.max(np.abs(R - np.einsum("lkij->ijlk", R)))),
            "first_bianchi": float(np.max(np.abs(bianchi))),
            "ricci_symmetric": float(np.max(np.abs(ric - ric.T))),
            "ricci_trace": float(abs(np.einsum("ab,ab->", ginv, ric) - self.scal)),
            "contracted_bianchi": float(np.max(np.abs(div - 0.5 * dscal))),
        }


def christoffel(m: ChartMetric, x) -> np.ndarray:
    """Levi-Civita coefficients ``Gamma[k, i, j] = Gamma^k_{ij}`` at ``x``."""
    x = m.check_point(x)
    return np.asarray(m.christoffel(jnp.asarray(x)))


_PACK_FNS: "weakref.WeakKeyDictionary[ChartMetric, Callable]" = weakref.WeakKeyDictionary()


def _pack_fn(m: ChartMetric) -> Callable:
    fn = _PACK_FNS.get(m)
    if fn is None:
        fn = jax.jit(lambda x: (m.metric(x), m.christoffel(x), m.riemann(x), m.ricci(x), m.scalar(x), m.grad_ricci(x)))
        _PACK_FNS[m] = fn
    return fn


def curvature_pack(m: ChartMetric, x) -> CurvaturePack:
    x = m.check_point(x)
    g, gam, R, ric, scal, T = (np.asarray(a) for a in _pack_fn(m)(jnp.asarray(x)))
    return CurvaturePack(x=x, g=g, Gamma=gam, Riem=R, Ric=ric, scal=float(scal), gradRic=T)


def _compat(m: ChartMetric):
    def res(x):
        g, dg, gam = m.metric(x), m.dmetric(x), m.christoffel(x)
        r = jnp.transpose(dg, (2, 0, 1)) - jnp.einsum("lki,lj->kij", gam, g) - jnp.einsum("lkj,il->kij", gam, g)
        return jnp.max(jnp.abs(r))

    return jax.jit(res)


_COMPAT_FNS: "weakref.WeakKeyDictionary[ChartMetric, Callable]" = weakref.WeakKeyDictionary()


def metric_compatibility_residual(m: ChartMetric, x) -> float:
    """max |nabla g| = max |d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il|."""
    x = m.check_point(x)
    if m not in _COMPAT_FNS:
        _COMPAT_FNS[m] = _compat(m)
    return float(_COMPAT_FNS[m](jnp.asarray(x)))


def sectional(m: ChartMetric, x, plane, tol: float = 1e-8) -> float:
    """Sectional curvature ``R(v, w, v, w)`` of the plane spanned by orthonormal ``v, w``."""
    x = m.check_point(x)
    v, w = (np.asarray(p, float) for p in plane)
    P = curvature_pack(m, x)
    gx = P.g
    gram = np.array([[v @ gx @ v, v @ gx @ w], [w @ gx @ v, w @ gx @ w]])
    if np.max(np.abs(gram - np.eye(2))) > tol:
        raise ValueError(f"plane basis is not g-orthonormal (Gram matrix {gram.tolist()})")
    return float(np.einsum("lkij,l,k,i,j->", P.Riem, v, w, v, w))
