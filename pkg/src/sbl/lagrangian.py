"""Invariant Lagrangians ``Lambda = t0 alpha_0 + t1 alpha_1 + t2 alpha_2 + t3 dtheta`` (n = 2)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from sbl.eds import FundamentalSystem, RhoFamily, rho_family
from sbl.forms import W_BASIS, FormField, frame_values, multi_indices, star_table, wedge, wedge_table


@dataclass(frozen=True)
class InvariantLagrangian:
    t0: float
    t1: float = 0.0
    t2: float = 0.0
    t3: float = 0.0

    @classmethod
    def lambda1(cls, t0: float, t2: float, t3: float = 0.0) -> "InvariantLagrangian":
        return cls(t0, 0.0, t2, t3)

    @classmethod
    def lambda2(cls, t0: float, branch: int = 1) -> "InvariantLagrangian":
        """``t0 alpha_0 + branch alpha_1 + alpha_2 / t0`` with ``branch`` in {+1, -1}."""
        if branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if t0 == 0:
            raise ValueError("t0 must be nonzero")
        return cls(t0, float(branch), 1.0 / t0, 0.0)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.t0, self.t1, self.t2, self.t3], float)

    @property
    def discriminant(self) -> float:
        return self.t0 * self.t2 - self.t1**2 - self.t3**2

    def frame_values(self) -> np.ndarray:
        """Values on the ten frame pairs of ``e^0 .. e^4`` (constant over the bundle)."""
        return self.coeffs @ W_BASIS[:4]

    def form(self, system: FundamentalSystem) -> FormField:
        a0, a1, a2 = system.alpha
        out = self.t0 * a0 + self.t1 * a1 + self.t2 * a2 + self.t3 * system.dtheta
        out.name = "Lambda"
        return out


@dataclass(frozen=True)
class LagrangianClass:
    degenerate: bool
    selfdual: bool
    antiselfdual: bool
    degenerate_direct: bool
    selfdual_direct: bool
    antiselfdual_direct: bool
    square_norm: float

    @property
    def consistent(self) -> bool:
        return (
            self.degenerate == self.degenerate_direct
            and self.selfdual == self.selfdual_direct
            and self.antiselfdual == self.antiselfdual_direct
        )


def star4_table() -> np.ndarray:
    """Hodge star of ``e_0``-perp (basis e1..e4, orientation e^{1234}) on the ten pairs of R^5."""
    pairs = multi_indices(5, 2)
    sub = multi_indices(4, 2)
    S4 = star_table(4, 2)
    T = np.zeros((10, 10))
    for a, A in enumerate(sub):
        for b, Bp in enumerate(sub):
            if S4[b, a]:
                T[pairs.index(tuple(i + 1 for i in Bp)), pairs.index(tuple(i + 1 for i in A))] = S4[b, a]
    return T


def lagrangian_classify(L: InvariantLagrangian, tol: float = 1e-12) -> LagrangianClass:
    """Algebraic conditions next to the direct wedge/star computation on frame values."""
    v = L.frame_values()
    sq = wedge_table(5, 2, 2) @ v @ v
    star = star4_table() @ v
    scale = max(1.0, float(np.max(np.abs(v))))
    t0, t1, t2, t3 = L.coeffs
    return LagrangianClass(
        degenerate=bool(abs(L.discriminant) <= tol * scale**2),
        selfdual=bool(abs(t2 - t0) <= tol * scale and abs(t1) <= tol * scale and abs(t3) <= tol * scale),
        antiselfdual=bool(abs(t2 + t0) <= tol * scale),
        degenerate_direct=float(np.max(np.abs(sq))) <= tol * scale**2,
        selfdual_direct=float(np.max(np.abs(star - v))) <= tol * scale,
        antiselfdual_direct=float(np.max(np.abs(star + v))) <= tol * scale,
        square_norm=float(np.max(np.abs(sq))),
    )


def dLambda_decompose(
    L: InvariantLagrangian, system: FundamentalSystem, fam: RhoFamily | None = None
) -> tuple[FormField, FormField]:
    """``(Lambda'_0, Lambda'_1)`` with ``d Lambda = theta ^ Lambda'_0 + Lambda'_1`` and no theta in Lambda'_1."""
    fam = fam or rho_family(system)
    s = system.s
    a0, a1, a2 = system.alpha
    t0, t1, t2, _ = L.coeffs
    r = fam.r
    lam0 = (
        a0.times(lambda z: -r(z) * t1, "-r t1")
        + a1.times(lambda z: (2 * t0 - s**2 * t2 * r(z)) / (2 * s**2), "(2t0-s^2 t2 r)/2s^2")
        + (2 * t1 / s**2) * a2
        + t2 * fam.gamma
    )
    lam1 = (s * t2) * wedge(a0, fam.rho)
    return lam0, lam1


def principal_ideal_residual(L: InvariantLagrangian, system: FundamentalSystem, Z) -> tuple[float, np.ndarray]:
    """Least-squares ``psi`` with ``d Lambda = psi ^ Lambda`` at each sample; returns (max residual, psi)."""
    lam = L.form(system)
    dlam = system.d(lam)
    W = jnp.asarray(wedge_table(5, 1, 2))
    metric = system.metric

    def one(z):
        lv = frame_values(lam, metric, z)
        dv = frame_values(dlam, metric, z)
        M = jnp.einsum("kij,j->ki", W, lv)  # (10, 5): psi -> psi ^ Lambda
        psi, *_ = jnp.linalg.lstsq(M, dv)
        return jnp.max(jnp.abs(M @ psi - dv)), psi

    res, psi = jax.jit(jax.vmap(one))(jnp.asarray(Z))
    return float(jnp.max(res)), np.asarray(psi)


@dataclass(frozen=True)
class IntegrityKernel:
    basis: np.ndarray  # rows: 1-forms on the frame e^0..e^4
    dimension: int
    expected: np.ndarray
    wedge_residual: float
    span_residual: float


def integrity_kernel(L: InvariantLagrangian, frame_vals=None, tol: float = 1e-9) -> IntegrityKernel:
    """``{beta : beta ^ Lambda = 0}`` for ``Lambda_2``; ``frame_vals`` defaults to the exact constants."""
    v = L.frame_values() if frame_vals is None else np.asarray(frame_vals, float)
    M = np.einsum("kij,j->ki", wedge_table(5, 1, 2), v)
    _, sv, Vt = np.linalg.svd(M)
    scale = max(1.0, sv[0])
    null = Vt[np.sum(sv > tol * scale):]
    t0, eps = L.t0, np.sign(L.t1) if L.t1 else 1.0
    expected = np.array([[0, t0, 0, eps, 0], [0, 0, t0, 0, eps]], float)
    wres = float(np.max(np.abs(M @ null.T))) if len(null) else 0.0
    # expected rows must lie in the computed span
    proj = expected - (expected @ null.T) @ null if len(null) else expected
    return IntegrityKernel(null, len(null), expected, wres, float(np.max(np.abs(proj))))


def wedge_with(L: InvariantLagrangian, beta) -> np.ndarray:
    """Frame values of ``beta ^ Lambda`` for a constant 1-form ``beta`` on R^5."""
    return np.einsum("kij,i,j->k", wedge_table(5, 1, 2), np.asarray(beta, float), L.frame_values())


def closed_lambda1_curvature(t0: float, t2: float, s: float) -> float:
    """Sectional curvature making ``Lambda_1`` closed: ``c = t0 / (s^2 t2)``."""
    return t0 / (s**2 * t2)


def hyperbolic_t0(c: float, s: float = 1.0) -> float:
    """``t0`` with ``c = -t0^2 / s^2``."""
    if c >= 0:
        raise ValueError("needs c < 0")
    return math.sqrt(-c) * s
