import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import METRICS_2D, METRICS_3D, metric_id
from sbl.catalog import get_metric
from sbl.metric_chart import christoffel
from sbl.sphere_bundle import (
    BundleError,
    BundlePoint,
    NotTangentError,
    adapted_frame,
    contact_form_bilinear_check,
    horizontal_lift,
    mirror_map,
    sample_bundle_points,
    sasaki_inner,
    tautological_residual,
    vertical_lift,
)


def points(m, s, count, seed=0):
    Z = sample_bundle_points(m, s, count, np.random.default_rng(seed))
    return [BundlePoint(z[: m.dim], z[m.dim :], s) for z in Z]


def test_flat_horizontal_lift():
    m = get_metric("euclidean3")
    v = np.array([0.3, -1.0, 2.0])
    np.testing.assert_array_equal(horizontal_lift(m, [0.1, 0.2, 0.3], [1.0, 0, 0], v), np.r_[v, 0, 0, 0])


def test_halfspace_horizontal_lift_uses_christoffel():
    m = get_metric("halfspace")
    x, u, v = np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
    G = christoffel(m, x)
    lift = horizontal_lift(m, x, u, v)
    np.testing.assert_allclose(lift[3:], -np.einsum("kij,i,j->k", G, v, u), atol=1e-14)
    np.testing.assert_allclose(lift[3:], [1.0, 0.0, 0.0], atol=1e-14)


@pytest.mark.parametrize("case", METRICS_3D + METRICS_2D, ids=metric_id)
def test_lift_of_u_is_s_e0(case):
    m = get_metric(case[0], **case[1])
    for p in points(m, 1.7, 3):
        F = adapted_frame(m, p)
        np.testing.assert_allclose(horizontal_lift(m, p.x, p.u, p.u), p.s * F.e[0], atol=1e-12)


def test_flat_axis_aligned_frame():
    m = get_metric("euclidean3")
    s = 2.0
    F = adapted_frame(m, BundlePoint(np.zeros(3), np.array([0.0, 0.0, s]), s))
    want = np.array(
        [
            [0, 0, 1, 0, 0, 0],
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 1, 0],
        ],
        float,
    )
    np.testing.assert_allclose(F.e, want, atol=1e-15)


@pytest.mark.parametrize("case", METRICS_3D + METRICS_2D, ids=metric_id)
@pytest.mark.parametrize("s", [1.0, 2.0])
def test_adapted_frame_invariants(case, s):
    m = get_metric(case[0], **case[1])
    n = m.dim - 1
    for p in points(m, s, 5, seed=2):
        F = adapted_frame(m, p)
        gram = np.array([[sasaki_inner(m, p, a, b) for b in F.e] for a in F.e])
        np.testing.assert_allclose(gram, np.eye(2 * n + 1), atol=1e-10)
        # tangency: every e_k is Sasaki-orthogonal to xi
        assert max(abs(sasaki_inner(m, p, e, F.xi)) for e in F.e) < 1e-10
        assert sasaki_inner(m, p, F.xi, F.xi) == pytest.approx(s * s, rel=1e-12)
        # e_{n+i} = B e_i and the coframe is dual
        B = mirror_map(m, p).B
        for i in range(1, n + 1):
            np.testing.assert_allclose(B @ F.e[i], F.e[n + i], atol=1e-12)
        np.testing.assert_allclose(F.coframe @ F.e.T, np.eye(2 * n + 1), atol=1e-10)
        # orientation: (e_0 .. e_4, xi) positive in the chart volume; over a surface
        # the chart order dx du puts xi first instead
        sign = 1 if n == 2 else -1
        assert sign * np.linalg.det(np.vstack([F.e, F.xi])) > 0


def test_adapted_frame_deterministic(perturbed):
    p = points(perturbed, 1.0, 1, seed=9)[0]
    a, b = adapted_frame(perturbed, p), adapted_frame(perturbed, p)
    assert np.array_equal(a.e, b.e) and a.pivot == b.pivot


def test_bundle_point_validation(sphere3):
    with pytest.raises(BundleError):
        adapted_frame(sphere3, BundlePoint(np.zeros(3), np.array([1.0, 0, 0]), 2.0))
    p = BundlePoint.from_direction(sphere3, [0.2, 0.1, 0.0], [1.0, 2.0, 3.0], 1.5)
    p.validate(sphere3)


def test_sasaki_split_orthogonal(flat):
    p = BundlePoint(np.zeros(3), np.array([1.0, 0, 0]), 1.0)
    v = np.array([0.3, 0.4, -1.0])
    assert sasaki_inner(flat, p, horizontal_lift(flat, p.x, p.u, v), vertical_lift(v)) == 0.0


@given(seed=st.integers(0, 10_000))
def test_sasaki_inner_formula(perturbed, seed):
    # <y, w> = g(dpi y, dpi w) + g(K y, K w) with K y = udot + Gamma(xdot, u)
    p = points(perturbed, 1.3, 1, seed)[0]
    rng = np.random.default_rng(seed)
    y, w = rng.standard_normal((2, 6))
    g = np.asarray(perturbed.metric(p.x))
    G = christoffel(perturbed, p.x)

    def K(a):
        return a[3:] + np.einsum("kij,i,j->k", G, a[:3], p.u)

    want = y[:3] @ g @ w[:3] + K(y) @ g @ K(w)
    assert sasaki_inner(perturbed, p, y, w) == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert sasaki_inner(perturbed, p, y, w) == pytest.approx(sasaki_inner(perturbed, p, w, y), rel=1e-13)


@pytest.mark.parametrize("case", METRICS_3D, ids=metric_id)
def test_mirror_and_complex_structures(case):
    m = get_metric(case[0], **case[1])
    for p in points(m, 1.2, 3, seed=4):
        M = mirror_map(m, p)
        F = adapted_frame(m, p)
        I6 = np.eye(6)
        np.testing.assert_allclose(M.B @ M.B, 0, atol=1e-15)
        np.testing.assert_allclose(M.J @ M.J, -I6, atol=1e-11)
        np.testing.assert_allclose(M.Iplus @ M.Iminus, M.Iminus @ M.Iplus, atol=1e-11)
        np.testing.assert_allclose(M.J @ M.Iminus, -M.Iminus @ M.J, atol=1e-11)
        np.testing.assert_allclose(M.J @ M.Iplus @ np.linalg.inv(M.J), M.Iplus, atol=1e-11)
        # B of a horizontal lift is the vertical lift; e^{n+i} o B = e^i on the frame
        v = np.array([0.5, -0.2, 1.0])
        np.testing.assert_allclose(M.B @ horizontal_lift(m, p.x, p.u, v), vertical_lift(v), atol=1e-13)
        np.testing.assert_allclose((F.coframe[3:] @ M.B @ F.e.T)[:, 1:3], np.eye(2), atol=1e-11)
        # I_- rotates e_3 into +-e_4 and e_4 into -+e_3
        r = F.coframe @ M.Iminus @ F.e[3]
        assert abs(abs(r[4]) - 1) < 1e-10 and abs(np.delete(r, 4)).max() < 1e-10
        np.testing.assert_allclose(F.coframe @ M.Iminus @ F.e[4], -r[4] * np.eye(5)[3], atol=1e-10)


@pytest.mark.parametrize("case", [("euclidean3", {}), ("perturbed", {"eps": 0.05}), ("heisenberg", {})], ids=metric_id)
def test_tautological_field(case):
    m = get_metric(case[0], **case[1])
    rng = np.random.default_rng(0)
    for p in points(m, 1.0, 4, seed=6):
        assert tautological_residual(m, p, rng.standard_normal(6)) < 1e-6


def test_contact_form_flat_pairs(flat):
    p = BundlePoint(np.zeros(3), np.array([0.0, 0.0, 1.0]), 1.0)
    E = adapted_frame(flat, p).e
    assert contact_form_bilinear_check(flat, p, E[1], E[3]) < 1e-12
    assert contact_form_bilinear_check(flat, p, E[0], E[1]) < 1e-12
    from sbl.eds import theta_form
    from sbl.forms import ext_derivative

    dth = ext_derivative(theta_form(flat))
    assert float(dth.evaluate(p.z, np.stack([E[1], E[3]]))) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("case", [("sphere3", {"c": 1.0}), ("perturbed", {"eps": 0.05})], ids=metric_id)
def test_contact_form_random_pairs(case):
    m = get_metric(case[0], **case[1])
    rng = np.random.default_rng(3)
    for p in points(m, 1.0, 3, seed=8):
        a, b = rng.standard_normal((2, 5)) @ adapted_frame(m, p).e
        assert contact_form_bilinear_check(m, p, a, b) < 1e-7


def test_contact_form_rejects_normal_vector(sphere3):
    p = points(sphere3, 1.0, 1)[0]
    F = adapted_frame(sphere3, p)
    with pytest.raises(NotTangentError):
        contact_form_bilinear_check(sphere3, p, F.xi, F.e[1])


def test_samples_lie_on_bundle(heisenberg):
    Z = sample_bundle_points(heisenberg, 2.0, 20, np.random.default_rng(0))
    for z in Z:
        g = np.asarray(heisenberg.metric(z[:3]))
        assert z[3:] @ g @ z[3:] == pytest.approx(4.0, rel=1e-12)
