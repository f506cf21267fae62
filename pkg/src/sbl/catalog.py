"""Named chart metrics used by the verification suites.

3-D: ``euclidean3``, ``sphere3(c>0)``, ``hyperbolic3(c<0)`` (conformal chart
``delta / (1 + c|x|^2/4)^2``), ``halfspace`` (``delta / x_3^2``), ``heisenberg``
(Nil, ``dx^2 + dy^2 + (dz - x dy)^2``) and ``perturbed(eps)``.
2-D: ``flat2d``, ``sphere2(c)``, ``hyperbolic2(c)``, ``perturbed2d(eps)``.
"""

from __future__ import annotations

import math
from typing import Callable

import jax.numpy as jnp
import numpy as np

from sbl.metric_chart import ChartMetric, Domain


def _everywhere(dim: int, half: float = 1.0) -> Domain:
    return Domain(f"R^{dim}", lambda x: bool(np.all(np.isfinite(x))), (-half,) * dim, (half,) * dim)


def _space_form_riemann(g_fn: Callable, c: float) -> Callable:
    def riemann(x):
        g = g_fn(x)
        return c * (jnp.einsum("il,jk->lkij", g, g) - jnp.einsum("ik,jl->lkij", g, g))

    return riemann


def _conformal_christoffel(grad_log_factor: Callable, dim: int) -> Callable:
    """Gamma^k_ij for g = exp(2 phi) delta, given grad phi."""
    eye = jnp.eye(dim)

    def christoffel(x):
        dphi = grad_log_factor(x)
        return (
            jnp.einsum("ki,j->kij", eye, dphi)
            + jnp.einsum("kj,i->kij", eye, dphi)
            - jnp.einsum("ij,k->kij", eye, dphi)
        )

    return christoffel


def space_form(dim: int, c: float) -> ChartMetric:
    """Constant curvature ``c`` in the conformal (stereographic) chart."""
    c = float(c)
    eye = jnp.eye(dim)

    def g(x):
        return eye / (1.0 + 0.25 * c * jnp.dot(x, x)) ** 2

    def dphi(x):
        return -0.5 * c * x / (1.0 + 0.25 * c * jnp.dot(x, x))

    if c > 0:
        name = f"sphere{dim}"
        domain = _everywhere(dim, 0.8)
    elif c < 0:
        name = f"hyperbolic{dim}"
        radius = 2.0 / math.sqrt(-c)
        half = min(0.8, 0.45 * radius)
        domain = Domain(
            f"|x| < {radius:g}",
            lambda x, r=radius: bool(np.dot(x, x) < r * r),
            (-half,) * dim,
            (half,) * dim,
        )
    else:
        name = "euclidean3" if dim == 3 else "flat2d"
        domain = _everywhere(dim)
    return ChartMetric(
        name=name,
        dim=dim,
        g=g,
        domain=domain,
        params={"c": c},
        analytic={"christoffel": _conformal_christoffel(dphi, dim), "riemann": _space_form_riemann(g, c)},
    )


def euclidean3() -> ChartMetric:
    m = space_form(3, 0.0)
    return m


def sphere3(c: float = 1.0) -> ChartMetric:
    if c <= 0:
        raise ValueError("sphere3 needs c > 0")
    return space_form(3, c)


def hyperbolic3(c: float = -1.0) -> ChartMetric:
    if c >= 0:
        raise ValueError("hyperbolic3 needs c < 0")
    return space_form(3, c)


def halfspace() -> ChartMetric:
    """Upper half-space model of curvature -1."""

    def g(x):
        return jnp.eye(3) / x[2] ** 2

    def christoffel(x):
        # phi = -log x_3, grad phi = -e_3 / x_3
        return _conformal_christoffel(lambda y: jnp.array([0.0, 0.0, -1.0]) / y[2], 3)(x)

    domain = Domain("x_3 > 0", lambda x: bool(x[2] > 0), (-1.0, -1.0, 0.5), (1.0, 1.0, 2.0))
    return ChartMetric(
        name="halfspace",
        dim=3,
        g=g,
        domain=domain,
        params={"c": -1.0},
        analytic={"christoffel": christoffel, "riemann": _space_form_riemann(g, -1.0)},
    )


def heisenberg() -> ChartMetric:
    def g(x):
        a = x[0]
        return jnp.array([[1.0, 0.0, 0.0], [0.0, 1.0 + a * a, -a], [0.0, -a, 1.0]])

    return ChartMetric(name="heisenberg", dim=3, g=g, domain=_everywhere(3))


# Wave vectors and phases for the perturbation; any smooth bounded table works.
_BUMP3 = {
    (0, 0): ((1.0, 2.0, 0.0), 0.3),
    (1, 1): ((0.0, 1.0, -1.5), 1.1),
    (2, 2): ((1.3, 0.0, 1.0), -0.4),
    (0, 1): ((0.7, -1.0, 2.0), 0.9),
    (0, 2): ((-1.2, 0.5, 1.0), 0.2),
    (1, 2): ((2.0, 1.0, -0.6), -1.3),
}
_BUMP2 = {
    (0, 0): ((1.0, 2.0), 0.3),
    (1, 1): ((-1.5, 1.0), 1.1),
    (0, 1): ((0.7, -1.3), 0.9),
}


def _perturbed(dim: int, eps: float, table) -> ChartMetric:
    eps = float(eps)
    if not abs(eps) < 1.0 / dim:
        raise ValueError(f"perturbation eps={eps} too large to guarantee a positive-definite metric")
    waves = {key: (jnp.asarray(k), ph) for key, (k, ph) in table.items()}

    def g(x):
        rows = []
        for i in range(dim):
            row = []
            for j in range(dim):
                k, ph = waves[(min(i, j), max(i, j))]
                row.append(jnp.cos(jnp.dot(k, x) + ph))
            rows.append(jnp.stack(row))
        return jnp.eye(dim) + eps * jnp.stack(rows)

    name = "perturbed" if dim == 3 else "perturbed2d"
    return ChartMetric(name=name, dim=dim, g=g, domain=_everywhere(dim), params={"eps": eps})


def perturbed(eps: float = 0.05) -> ChartMetric:
    return _perturbed(3, eps, _BUMP3)


def flat2d() -> ChartMetric:
    return space_form(2, 0.0)


def sphere2(c: float = 1.0) -> ChartMetric:
    if c <= 0:
        raise ValueError("sphere2 needs c > 0")
    return space_form(2, c)


def hyperbolic2(c: float = -1.0) -> ChartMetric:
    if c >= 0:
        raise ValueError("hyperbolic2 needs c < 0")
    return space_form(2, c)


def perturbed2d(eps: float = 0.05) -> ChartMetric:
    return _perturbed(2, eps, _BUMP2)


METRICS: dict[str, Callable[..., ChartMetric]] = {
    "euclidean3": euclidean3,
    "sphere3": sphere3,
    "hyperbolic3": hyperbolic3,
    "halfspace": halfspace,
    "heisenberg": heisenberg,
    "perturbed": perturbed,
    "flat2d": flat2d,
    "sphere2": sphere2,
    "hyperbolic2": hyperbolic2,
    "perturbed2d": perturbed2d,
}

# which keyword each factory accepts
METRIC_PARAMS = {
    "sphere3": ("c",),
    "hyperbolic3": ("c",),
    "sphere2": ("c",),
    "hyperbolic2": ("c",),
    "perturbed": ("eps",),
    "perturbed2d": ("eps",),
}


def get_metric(name: str, backend: str = "dual", fd_step: float | None = None, **params) -> ChartMetric:
    """Build a catalog metric. Unused parameters (e.g. ``c`` for ``heisenberg``) are ignored."""
    try:
        factory = METRICS[name]
    except KeyError:
        raise KeyError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None
    accepted = METRIC_PARAMS.get(name, ())
    kwargs = {k: v for k, v in params.items() if k in accepted and v is not None}
    return factory(**kwargs).with_backend(backend, fd_step)
