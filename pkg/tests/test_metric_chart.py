import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import METRICS_2D, METRICS_3D, metric_id
from sbl.catalog import get_metric
from sbl.metric_chart import (
    DegenerateMetricError,
    DomainError,
    christoffel,
    curvature_pack,
    metric_compatibility_residual,
    sectional,
)

# Nil geometry g = dx^2 + dy^2 + (dz - x dy)^2, frozen from tests/oracles/nil_symbolic.py
NIL_POINT = np.array([0.3, -0.2, 0.5])
NIL_GAMMA = {
    (0, 1, 1): -0.3,
    (0, 1, 2): 0.5,
    (0, 2, 1): 0.5,
    (1, 0, 1): 0.15,
    (1, 0, 2): -0.5,
    (1, 1, 0): 0.15,
    (1, 2, 0): -0.5,
    (2, 0, 1): -0.455,
    (2, 0, 2): -0.15,
    (2, 1, 0): -0.455,
    (2, 2, 0): -0.15,
}
NIL_RIEM = {(0, 1, 0, 1): -0.7275, (0, 2, 0, 2): 0.25, (1, 2, 1, 2): 0.25, (0, 1, 0, 2): -0.075}
NIL_SCAL = -0.5
NIL_RIC_FRAME = np.diag([-0.5, -0.5, 0.5])
NIL_SECTIONAL = {(0, 1): -0.75, (0, 2): 0.25, (1, 2): 0.25}
NIL_GRAD_RIC_FRAME = {(0, 1, 2): -0.5, (0, 2, 1): -0.5, (1, 0, 2): 0.5, (1, 2, 0): 0.5}


def nil_frame(x):
    """Columns E1 = d_x, E2 = d_y + x d_z, E3 = d_z (orthonormal for the Nil metric)."""
    return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, x[0], 1.0]])


ALL = METRICS_3D + METRICS_2D


def sample(m, count, seed=0):
    return m.domain.sample(np.random.default_rng(seed), count)


def test_euclidean_christoffel_vanish():
    m = get_metric("euclidean3")
    for x in sample(m, 5):
        assert np.max(np.abs(christoffel(m, x))) == 0.0


def test_halfspace_christoffel_at_unit_height():
    G = christoffel(get_metric("halfspace"), [0.0, 0.0, 1.0])
    want = np.zeros((3, 3, 3))
    want[2, 0, 0] = want[2, 1, 1] = 1.0
    want[0, 0, 2] = want[0, 2, 0] = want[1, 1, 2] = want[1, 2, 1] = want[2, 2, 2] = -1.0
    np.testing.assert_allclose(G, want, atol=1e-13)


def test_halfspace_christoffel_fd_oracle():
    # 4th-order central differences of the closed-form metric fed to the Koszul formula
    def g(x):
        return np.eye(3) / x[2] ** 2

    x, h = np.array([0.1, -0.3, 1.2]), 1e-3
    dg = np.zeros((3, 3, 3))
    for i in range(3):
        e = np.eye(3)[i] * h
        dg[:, :, i] = (g(x - 2 * e) - 8 * g(x - e) + 8 * g(x + e) - g(x + 2 * e)) / (12 * h)
    low = 0.5 * (np.transpose(dg, (0, 2, 1)) + dg - np.transpose(dg, (2, 0, 1)))
    want = np.einsum("kl,lij->kij", np.linalg.inv(g(x)), low)
    np.testing.assert_allclose(christoffel(get_metric("halfspace"), x), want, atol=1e-9)


def test_sphere_christoffel_at_origin():
    assert np.max(np.abs(christoffel(get_metric("sphere3", c=1.0), np.zeros(3)))) < 1e-15


def test_nil_christoffel_oracle():
    G = christoffel(get_metric("heisenberg"), NIL_POINT)
    want = np.zeros((3, 3, 3))
    for k, v in NIL_GAMMA.items():
        want[k] = v
    np.testing.assert_allclose(G, want, atol=1e-13)


def test_nil_curvature_oracle():
    P = curvature_pack(get_metric("heisenberg"), NIL_POINT)
    for idx, v in NIL_RIEM.items():
        assert P.Riem[idx] == pytest.approx(v, abs=1e-12)
    assert P.scal == pytest.approx(NIL_SCAL, abs=1e-12)
    F = nil_frame(NIL_POINT)
    np.testing.assert_allclose(F.T @ P.Ric @ F, NIL_RIC_FRAME, atol=1e-12)
    T = np.einsum("abc,ai,bj,ck->ijk", P.gradRic, F, F, F)
    want = np.zeros((3, 3, 3))
    for k, v in NIL_GRAD_RIC_FRAME.items():
        want[k] = v
    np.testing.assert_allclose(T, want, atol=1e-12)


@pytest.mark.parametrize("x", [np.zeros(3), NIL_POINT, np.array([-0.7, 0.4, 0.9])])
def test_nil_sectional_oracle(x):
    m = get_metric("heisenberg")
    F = nil_frame(x)
    for (i, j), v in NIL_SECTIONAL.items():
        assert sectional(m, x, (F[:, i], F[:, j])) == pytest.approx(v, abs=1e-12)


def test_nil_ricci_eigenvalues():
    m = get_metric("heisenberg")
    for x in sample(m, 4):
        P = curvature_pack(m, x)
        ev = np.sort(np.linalg.eigvals(np.linalg.solve(P.g, P.Ric)).real)
        np.testing.assert_allclose(ev, [-0.5, -0.5, 0.5], atol=1e-11)


def test_flat_curvature_vanishes():
    m = get_metric("euclidean3")
    P = curvature_pack(m, [0.2, -0.1, 0.4])
    for arr in (P.Riem, P.Ric, P.gradRic):
        assert np.max(np.abs(arr)) == 0.0
    assert P.scal == 0.0


@pytest.mark.parametrize("c", [1.0, 0.5])
def test_sphere_einstein(c):
    m = get_metric("sphere3", c=c)
    for x in sample(m, 5):
        P = curvature_pack(m, x)
        np.testing.assert_allclose(P.Ric, 2 * c * P.g, atol=1e-12)
        assert P.scal == pytest.approx(6 * c, abs=1e-12)


@pytest.mark.parametrize("name,params", [("sphere3", {"c": 1.0}), ("hyperbolic3", {"c": -1.0}), ("halfspace", {}), ("sphere3", {"c": 2.5})])
def test_constant_curvature_closed_form(name, params):
    m = get_metric(name, **params)
    c = m.params["c"]
    for x in sample(m, 5, seed=3):
        P = curvature_pack(m, x)
        F = P.orthonormal_frame()
        Rn = np.einsum("abcd,ai,bj,ck,dl->ijkl", P.Riem, F, F, F, F)
        d = np.eye(3)
        # R_{qpij} = c (delta_iq delta_jp - delta_ip delta_jq)
        want = c * (np.einsum("iq,jp->qpij", d, d) - np.einsum("ip,jq->qpij", d, d))
        np.testing.assert_allclose(Rn, want, atol=1e-11)


@pytest.mark.parametrize("case", ALL, ids=metric_id)
def test_curvature_pack_invariants(case):
    m = get_metric(case[0], **case[1])
    tol = 1e-9
    for x in sample(m, 20, seed=11):
        res = curvature_pack(m, x).invariant_residuals()
        assert max(res.values()) < tol, res
        assert metric_compatibility_residual(m, x) < tol


@pytest.mark.parametrize("case", [c for c in ALL if c[0] not in ("heisenberg", "perturbed", "perturbed2d")], ids=metric_id)
def test_backends_agree_analytic(case):
    m = get_metric(case[0], **case[1])
    ana, fd = m.with_backend("analytic"), m.with_backend("fd")
    for x in sample(m, 5, seed=5):
        Ra = curvature_pack(ana, x).Riem
        assert np.max(np.abs(curvature_pack(m, x).Riem - Ra)) < 1e-12
        assert np.max(np.abs(curvature_pack(fd, x).Riem - Ra)) < 1e-6


@pytest.mark.parametrize("case", [("heisenberg", {}), ("perturbed", {"eps": 0.05}), ("perturbed2d", {"eps": 0.05})], ids=metric_id)
def test_backends_agree_dual_fd(case):
    m = get_metric(case[0], **case[1])
    fd = m.with_backend("fd")
    for x in sample(m, 5, seed=5):
        a, b = curvature_pack(m, x), curvature_pack(fd, x)
        assert np.max(np.abs(a.Riem - b.Riem)) < 1e-6
        assert np.max(np.abs(a.gradRic - b.gradRic)) < 1e-5


def _random_plane(g, rng):
    v, w = rng.standard_normal((2, 3))
    v = v / np.sqrt(v @ g @ v)
    w = w - (w @ g @ v) * v
    return v, w / np.sqrt(w @ g @ w)


@pytest.mark.parametrize("name,params,c", [("hyperbolic3", {"c": -1.0}, -1.0), ("sphere3", {"c": 1.0}, 1.0), ("euclidean3", {}, 0.0)])
def test_sectional_constant(name, params, c):
    m = get_metric(name, **params)
    rng = np.random.default_rng(7)
    for x in sample(m, 20, seed=2):
        g = curvature_pack(m, x).g
        assert sectional(m, x, _random_plane(g, rng)) == pytest.approx(c, abs=1e-7)


@given(angle=st.floats(0.0, 2 * np.pi), seed=st.integers(0, 10_000))
def test_sectional_rotation_invariant(perturbed, angle, seed):
    rng = np.random.default_rng(seed)
    x = sample(perturbed, 1, seed)[0]
    g = np.asarray(perturbed.metric(x))
    v, w = _random_plane(g, rng)
    v2, w2 = np.cos(angle) * v + np.sin(angle) * w, -np.sin(angle) * v + np.cos(angle) * w
    assert sectional(perturbed, x, (v2, w2)) == pytest.approx(sectional(perturbed, x, (v, w)), abs=1e-11)


def test_sectional_rejects_non_orthonormal(flat):
    with pytest.raises(ValueError):
        sectional(flat, np.zeros(3), ([1.0, 0, 0], [1.0, 1.0, 0]))


def test_domain_errors():
    with pytest.raises(DomainError):
        christoffel(get_metric("halfspace"), [0.0, 0.0, -1.0])
    with pytest.raises(DomainError):
        christoffel(get_metric("hyperbolic3"), [3.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        curvature_pack(get_metric("euclidean3"), [0.0, 0.0])


def test_degenerate_metric_rejected():
    import jax.numpy as jnp

    from sbl.metric_chart import ChartMetric, Domain

    m = ChartMetric("bad", 3, lambda x: jnp.diag(jnp.array([1.0, 1.0, 0.0])), Domain("R^3", lambda x: True, (-1,) * 3, (1,) * 3))
    with pytest.raises(DegenerateMetricError):
        christoffel(m, np.zeros(3))


def test_unknown_metric():
    with pytest.raises(KeyError):
        get_metric("torus")
