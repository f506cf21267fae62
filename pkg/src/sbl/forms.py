"""Exterior calculus on the chart of the tangent manifold.

A k-form on an N-dimensional chart is stored by its components on the strictly
increasing multi-indices ``I = (i_1 < ... < i_k)``, so that
``omega = sum_I omega_I dx^I`` and antisymmetry holds by construction. All sign
bookkeeping lives in small dense tables (wedge, d, interior) built once per
``(N, k)``. Evaluation on vectors and change of basis use compound matrices
(the matrices of k x k minors).

Forms used on the sphere bundle are defined on all of the tangent manifold and
restricted at evaluation time; ``d`` is always taken upstairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from sbl.backends import jacobian
from sbl.metric_chart import ChartMetric
from sbl.sphere_bundle import sphere_frame


class FormDegreeError(ValueError):
    pass


class FrameMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------------------
# combinatorics


@lru_cache(maxsize=None)
def multi_indices(N: int, k: int) -> tuple:
    return tuple(itertools.combinations(range(N), k))


@lru_cache(maxsize=None)
def _index_of(N: int, k: int) -> dict:
    return {I: pos for pos, I in enumerate(multi_indices(N, k))}


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (0 if an entry repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def wedge_table(N: int, k: int, l: int) -> np.ndarray:
    idx = _index_of(N, k + l)
    T = np.zeros((comb(N, k + l), comb(N, k), comb(N, l)))
    for a, I in enumerate(multi_indices(N, k)):
        for b, J in enumerate(multi_indices(N, l)):
            sg = perm_sign(I + J)
            if sg:
                T[idx[tuple(sorted(I + J))], a, b] = sg
    return T


@lru_cache(maxsize=None)
def d_table(N: int, k: int) -> np.ndarray:
    """``D[K, I, a]`` with ``dx^a ^ dx^I = D[K, I, a] dx^K``."""
    return np.einsum("kai->kia", wedge_table(N, 1, k))


@lru_cache(maxsize=None)
def interior_table(N: int, k: int) -> np.ndarray:
    """``P[J, I, a]`` with ``d_a -| dx^I = sum_J P[J, I, a] dx^J``."""
    idx = _index_of(N, k - 1)
    T = np.zeros((comb(N, k - 1), comb(N, k), N))
    for b, I in enumerate(multi_indices(N, k)):
        for pos, a in enumerate(I):
            T[idx[I[:pos] + I[pos + 1:]], b, a] = (-1) ** pos
    return T


@lru_cache(maxsize=None)
def star_table(D: int, k: int) -> np.ndarray:
    """Euclidean Hodge star on ``Lambda^k R^D``: ``*e^A = sign(A, A^c) e^{A^c}``."""
    idx = _index_of(D, D - k)
    T = np.zeros((comb(D, D - k), comb(D, k)))
    for a, A in enumerate(multi_indices(D, k)):
        Ac = tuple(i for i in range(D) if i not in A)
        T[idx[Ac], a] = perm_sign(A + Ac)
    return T


def compound(M, k: int):
    """Matrix of k x k minors of ``M`` (rows and columns in increasing-index order)."""
    R, C = M.shape
    if k == 0:
        return jnp.ones((1, 1), dtype=M.dtype)
    if k == 1:
        return M
    ri = np.array(multi_indices(R, k), dtype=int)
    ci = np.array(multi_indices(C, k), dtype=int)
    sub = M[ri[:, None, :, None], ci[None, :, None, :]]
    return jnp.linalg.det(sub)


# ---------------------------------------------------------------------------------------
# form fields


class FormField:
    """A k-form on an open subset of R^dim, given by ``comps(z) -> (C(dim, k),)``."""

    __slots__ = ("degree", "dim", "comps", "name", "s")

    def __init__(self, degree: int, dim: int, comps: Callable, name: str = "", s: float | None = None):
        if not 0 <= degree <= dim:
            raise FormDegreeError(f"degree {degree} impossible on a {dim}-dimensional chart")
        self.degree = degree
        self.dim = dim
        self.comps = comps
        self.name = name
        self.s = s

    def __repr__(self) -> str:
        return f"FormField({self.name or '?'}, degree={self.degree}, dim={self.dim})"

    def __call__(self, z):
        return self.comps(z)

    @property
    def size(self) -> int:
        return comb(self.dim, self.degree)

    def _check_same(self, other: "FormField") -> None:
        if not isinstance(other, FormField):
            raise TypeError(f"expected a FormField, got {type(other).__name__}")
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise FormDegreeError(
                f"cannot add a {other.degree}-form on R^{other.dim} to a {self.degree}-form on R^{self.dim}"
            )

    def __add__(self, other: "FormField") -> "FormField":
        self._check_same(other)
        f, g = self.comps, other.comps
        return FormField(self.degree, self.dim, lambda z: f(z) + g(z), f"({self.name}+{other.name})", self.s)

    def __sub__(self, other: "FormField") -> "FormField":
        self._check_same(other)
        f, g = self.comps, other.comps
        return FormField(self.degree, self.dim, lambda z: f(z) - g(z), f"({self.name}-{other.name})", self.s)

    def __neg__(self) -> "FormField":
        f = self.comps
        return FormField(self.degree, self.dim, lambda z: -f(z), f"-{self.name}", self.s)

    def __mul__(self, c) -> "FormField":
        if callable(c):
            return self.times(c)
        f = self.comps
        return FormField(self.degree, self.dim, lambda z: c * f(z), f"{c:g}*{self.name}", self.s)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "FormField":
        return self * (1.0 / c)

    def __xor__(self, other: "FormField") -> "FormField":
        return wedge(self, other)

    def times(self, f: Callable, label: str = "f") -> "FormField":
        """Multiply by the scalar field ``f(z)``."""
        a = self.comps
        return FormField(self.degree, self.dim, lambda z: f(z) * a(z), f"{label}*{self.name}", self.s)

    def evaluate(self, z, vectors):
        """``omega_z(v_1, .., v_k)`` for the rows of ``vectors``."""
        vectors = jnp.atleast_2d(jnp.asarray(vectors))
        if self.degree == 0:
            return self.comps(z)[0]
        if vectors.shape != (self.degree, self.dim):
            raise FormDegreeError(f"need {self.degree} vectors of length {self.dim}, got shape {vectors.shape}")
        return self.comps(z) @ compound(vectors.T, self.degree)[:, 0]


def constant_form(degree: int, dim: int, values, name: str = "") -> FormField:
    values = jnp.asarray(values, dtype=float)
    return FormField(degree, dim, lambda z: values, name)


def basis_form(dim: int, indices, name: str = "") -> FormField:
    """``dx^{i_1} ^ ... ^ dx^{i_k}`` for any (possibly unsorted) index tuple."""
    indices = tuple(indices)
    k = len(indices)
    vals = np.zeros(comb(dim, k))
    sg = perm_sign(indices)
    if sg:
        vals[_index_of(dim, k)[tuple(sorted(indices))]] = sg
    return constant_form(k, dim, vals, name or "dx" + "".join(map(str, indices)))


def scalar_field(f: Callable, dim: int, name: str = "f") -> FormField:
    return FormField(0, dim, lambda z: jnp.reshape(f(z), (1,)), name)


def one_form(fn: Callable, dim: int, name: str = "") -> FormField:
    """1-form from ``fn(z) -> (dim,)`` coefficients."""
    return FormField(1, dim, fn, name)


def wedge(a: FormField, b: FormField) -> FormField:
    if a.dim != b.dim:
        raise FormDegreeError("forms live on different charts")
    k, l = a.degree, b.degree
    if k + l > a.dim:
        raise FormDegreeError(f"degree overflow: {k} + {l} > {a.dim}")
    T = jnp.asarray(wedge_table(a.dim, k, l))
    fa, fb = a.comps, b.comps
    return FormField(k + l, a.dim, lambda z: jnp.einsum("kij,i,j->k", T, fa(z), fb(z)), f"{a.name}^{b.name}", a.s)


def wedge_all(*forms: FormField) -> FormField:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def ext_derivative(a: FormField, backend: str = "dual", step: float = 1e-4) -> FormField:
    """Exterior derivative by differentiating the component functions."""
    if a.degree >= a.dim:
        raise FormDegreeError(f"d of a top-degree form on R^{a.dim} has no room")
    T = jnp.asarray(d_table(a.dim, a.degree))
    jac = jacobian(a.comps, backend, step)
    return FormField(a.degree + 1, a.dim, lambda z: jnp.einsum("kia,ia->k", T, jac(z)), f"d{a.name}", a.s)


def interior(v: Callable, a: FormField) -> FormField:
    """``v -| a`` for the vector field ``v(z) -> (dim,)``."""
    if a.degree == 0:
        raise FormDegreeError("interior product of a 0-form")
    P = jnp.asarray(interior_table(a.dim, a.degree))
    fa = a.comps
    return FormField(a.degree - 1, a.dim, lambda z: jnp.einsum("jia,i,a->j", P, fa(z), v(z)), f"i({a.name})", a.s)


def pullback(a: FormField, psi: Callable, param_dim: int) -> FormField:
    """``psi^* a`` for a map ``psi: R^param_dim -> R^a.dim`` written in jax.numpy."""
    if a.degree > param_dim:
        return FormField(0, param_dim, lambda t: jnp.zeros(1), f"pullback({a.name})")
    dpsi = jax.jacfwd(psi)
    k, fa = a.degree, a.comps
    return FormField(k, param_dim, lambda t: fa(psi(t)) @ compound(dpsi(t), k), f"pullback({a.name})")


# ---------------------------------------------------------------------------------------
# restriction to the sphere bundle and the adapted frame


def frame_values(a: FormField, metric: ChartMetric, z):
    """Components of ``a`` on the adapted coframe at ``z`` (one value per frame k-tuple)."""
    E, _ = sphere_frame(metric, z)
    return a.comps(z) @ compound(E, a.degree)


def from_frame_values(values, degree: int, metric: ChartMetric, z):
    """Coordinate components of the form on T_M with the given adapted-frame values, zero on xi."""
    _, cof = sphere_frame(metric, z)
    return values @ compound(cof, degree)


def frame_form(fn: Callable, degree: int, metric: ChartMetric, name: str = "", s: float | None = None) -> FormField:
    """Form on T_M specified by its adapted-frame values ``fn(z) -> (C(2n+1, degree),)``."""
    N = 2 * metric.dim

    def comps(z):
        return from_frame_values(fn(z), degree, metric, z)

    return FormField(degree, N, comps, name, s)


def coframe_form(metric: ChartMetric, index: int, name: str | None = None) -> FormField:
    """The adapted coframe 1-form ``e^index`` (index in 0..2n), extended to T_M."""
    N = 2 * metric.dim
    return FormField(1, N, lambda z: sphere_frame(metric, z)[1][index], name or f"e{index}")


def frame_vector_field(metric: ChartMetric, index: int) -> Callable:
    return lambda z: sphere_frame(metric, z)[0][:, index]


def hodge_star(a: "FormField | RestrictedForm", metric: ChartMetric | None = None):
    """Hodge star of the Sasaki metric on the sphere bundle, orientation ``e^{01..2n}``."""
    if isinstance(a, RestrictedForm):
        return RestrictedForm(hodge_star(a.form, a.metric), a.metric, a.s)
    if metric is None:
        raise ValueError("hodge_star of a bare FormField needs the metric")
    D = 2 * metric.dim - 1
    k = a.degree
    if k > D:
        raise FormDegreeError(f"no Hodge star for degree {k} on the {D}-dimensional sphere bundle")
    S = jnp.asarray(star_table(D, k))
    fa = a.comps

    def comps(z):
        E, cof = sphere_frame(metric, z)
        vals = fa(z) @ compound(E, k)
        return (S @ vals) @ compound(cof, D - k)

    return FormField(D - k, a.dim, comps, f"*{a.name}", a.s)


def hodge_star_at(a: "FormField | RestrictedForm", frame, metric: ChartMetric | None = None) -> np.ndarray:
    """Frame values of ``*a`` at the point of an explicitly supplied ``AdaptedFrame``."""
    if isinstance(a, RestrictedForm):
        metric = a.metric
        if a.s is not None and abs(a.s - frame.at.s) > 1e-12 * a.s:
            raise FrameMismatchError(f"form restricted to radius {a.s}, frame at radius {frame.at.s}")
        a = a.form
    z = jnp.asarray(frame.at.z)
    E, _ = sphere_frame(metric, z)
    if not np.allclose(np.asarray(E).T, frame.e, atol=1e-10):
        raise FrameMismatchError("frame does not belong to the point it claims")
    vals = np.asarray(a.comps(z) @ compound(jnp.asarray(frame.e.T), a.degree))
    D = frame.e.shape[0]
    return star_table(D, a.degree) @ vals


def codifferential(a: "FormField | RestrictedForm", metric: ChartMetric | None = None, backend: str = "dual", step: float = 1e-4):
    """``delta = - * d *``."""
    if isinstance(a, RestrictedForm):
        return RestrictedForm(codifferential(a.form, a.metric, backend, step), a.metric, a.s)
    out = -hodge_star(ext_derivative(hodge_star(a, metric), backend, step), metric)
    out.name = f"delta{a.name}"
    return out


def laplacian(a: "FormField | RestrictedForm", metric: ChartMetric | None = None, backend: str = "dual", step: float = 1e-4):
    """``Delta = d delta + delta d``."""
    if isinstance(a, RestrictedForm):
        return RestrictedForm(laplacian(a.form, a.metric, backend, step), a.metric, a.s)
    parts = []
    if a.degree > 0:
        parts.append(ext_derivative(codifferential(a, metric, backend, step), backend, step))
    if a.degree < 2 * metric.dim - 1:
        parts.append(codifferential(ext_derivative(a, backend, step), metric, backend, step))
    out = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    out.name = f"Delta{a.name}"
    return out


@dataclass(frozen=True)
class RestrictedForm:
    """A form on T_M that is only ever evaluated on vectors tangent to the radius-s bundle."""

    form: FormField
    metric: ChartMetric
    s: float

    @property
    def degree(self) -> int:
        return self.form.degree

    def frame_values(self, z):
        return frame_values(self.form, self.metric, z)

    def evaluate(self, z, vectors, tol: float = 1e-9):
        """Evaluate after removing each vector's xi-component; points must lie on the bundle."""
        from sbl.sphere_bundle import NotTangentError, sasaki_matrix

        m = self.metric.dim
        z = jnp.asarray(z)
        S = sasaki_matrix(self.metric, z)
        u = z[m:]
        norm = float(jnp.sqrt(u @ S[m:, m:] @ u))
        if abs(norm - self.s) > tol * max(1.0, self.s):
            raise NotTangentError(f"point has |u| = {norm}, not on the radius-{self.s} bundle")
        xi = jnp.concatenate([jnp.zeros(m), u])
        vecs = jnp.atleast_2d(jnp.asarray(vectors))
        vecs = vecs - jnp.outer(vecs @ S @ xi, xi) / (xi @ S @ xi)
        return self.form.evaluate(z, vecs)


def residual_fn(a: FormField, metric: ChartMetric) -> Callable:
    """Jitted ``Z -> max |frame values of a|`` over a batch of points."""
    f = jax.jit(jax.vmap(lambda z: jnp.max(jnp.abs(frame_values(a, metric, z)))))

    def run(Z) -> float:
        return float(jnp.max(f(jnp.asarray(Z))))

    return run


def max_frame_residual(a: FormField, b: FormField | None, metric: ChartMetric, Z) -> float:
    """Max over points and adapted-frame k-tuples of ``|a - b|``."""
    diff = a if b is None else a - b
    return residual_fn(diff, metric)(Z)


def max_frame_residuals(diffs: dict, metric: ChartMetric, Z) -> dict:
    """Several residuals (name -> form that should vanish) in one compiled pass."""
    names = list(diffs)
    forms = [diffs[k] for k in names]

    def one(z):
        return jnp.stack([jnp.max(jnp.abs(frame_values(a, metric, z))) for a in forms])

    out = np.asarray(jnp.max(jax.jit(jax.vmap(one))(jnp.asarray(Z)), axis=0))
    return {k: float(v) for k, v in zip(names, out)}


def batch_frame_values(a: FormField, metric: ChartMetric, Z) -> np.ndarray:
    f = jax.jit(jax.vmap(lambda z: frame_values(a, metric, z)))
    return np.asarray(f(jnp.asarray(Z)))


# ---------------------------------------------------------------------------------------
# decomposition of 2-forms on R^5

_PAIRS5 = multi_indices(5, 2)


def _e(i: int, j: int) -> np.ndarray:
    v = np.zeros(len(_PAIRS5))
    if i < j:
        v[_PAIRS5.index((i, j))] = 1.0
    else:
        v[_PAIRS5.index((j, i))] = -1.0
    return v


# rows: alpha0, alpha1, alpha2, dtheta, e01, e02, e03, e04, f1, f2
W_BASIS = np.array(
    [
        _e(1, 2),
        _e(1, 4) - _e(2, 3),
        _e(3, 4),
        _e(3, 1) + _e(4, 2),
        _e(0, 1),
        _e(0, 2),
        _e(0, 3),
        _e(0, 4),
        _e(1, 4) + _e(2, 3),
        _e(3, 1) - _e(4, 2),
    ]
)
W_LABELS = ("alpha0", "alpha1", "alpha2", "dtheta", "W1", "W1", "W2", "W2", "W3", "W3")


@dataclass(frozen=True)
class WDecomposition:
    """Coefficients on ``alpha0, alpha1, alpha2, dtheta``; ``w1, w2, w3`` are the
    coefficients on ``(e01, e02)``, ``(e03, e04)`` and ``(f1, f2)``."""

    a0: float
    a1: float
    a2: float
    a3: float
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    residual: float

    def pieces(self) -> list[np.ndarray]:
        """The seven components as frame-value vectors (four lines, then W1, W2, W3)."""
        c = np.concatenate([[self.a0, self.a1, self.a2, self.a3], self.w1, self.w2, self.w3])
        lines = [c[i] * W_BASIS[i] for i in range(4)]
        return lines + [c[4:6] @ W_BASIS[4:6], c[6:8] @ W_BASIS[6:8], c[8:10] @ W_BASIS[8:10]]


def w_coefficients(values):
    """Traceable version of :func:`w_decompose`: the ten coefficients as one array."""
    B = jnp.asarray(W_BASIS)
    return (B @ values) / jnp.sum(B * B, axis=1)


def w_decompose(values, degree: int = 2) -> WDecomposition:
    """Orthogonal projection of a 2-form on R^5 (given by its 10 frame values)."""
    if degree != 2:
        raise FormDegreeError(f"W-decomposition is for 2-forms, got degree {degree}")
    values = np.asarray(values, float)
    if values.shape != (10,):
        raise FormDegreeError(f"expected 10 frame values of a 2-form on R^5, got shape {values.shape}")
    c = np.asarray(w_coefficients(values))
    res = float(np.max(np.abs(c @ W_BASIS - values)))
    return WDecomposition(c[0], c[1], c[2], c[3], c[4:6], c[6:8], c[8:10], res)
