import jax.numpy as jnp
import numpy as np
import pytest

from conftest import metric_id
from sbl.catalog import get_metric
from sbl.eds import (
    F_coefficients,
    UnsupportedDimensionError,
    build_system,
    classify_ricci,
    curvature_correction,
    frame_basis_form,
    frame_scalars,
    poincare_cartan,
    rho_family,
    scalar_invariants,
)
from sbl.forms import max_frame_residual, max_frame_residuals, wedge, wedge_all
from sbl.sphere_bundle import sample_bundle_points

# Nil values at x = 0 (metric is the identity there), frozen from tests/oracles/nil_symbolic.py
NIL_SCALARS = {
    (0.0, 0.0, 1.0): {"c": -0.75, "r": 0.5, "p2": 0.0, "q2": 0.0},
    (1.0, 0.0, 0.0): {"c": 0.25, "r": -0.5, "p2": 0.0, "q2": 0.5},
}


def bundle(m, s, count, seed=0):
    return sample_bundle_points(m, s, count, np.random.default_rng(seed))


STRUCT = [("euclidean3", {}), ("sphere3", {"c": 1.0}), ("hyperbolic3", {"c": -1.0}), ("heisenberg", {}), ("perturbed", {"eps": 0.05})]


@pytest.mark.parametrize("case", STRUCT, ids=metric_id)
@pytest.mark.parametrize("s", [1.0, 2.0])
def test_structure_equations(case, s):
    m = get_metric(case[0], **case[1])
    sy = build_system(m, s)
    fam = rho_family(sy)
    th, a0, a1, a2 = sy.theta, *sy.alpha
    forms = {
        "dalpha0": sy.d(a0) - (1 / s**2) * wedge(th, a1),
        "dalpha1": sy.d(a1) - (2 / s**2) * wedge(th, a2) + wedge(th, a0).times(fam.r),
        "dalpha2": sy.d(a2) - wedge(th, fam.gamma) + wedge(th, a1).times(lambda z: 0.5 * fam.r(z)) - s * wedge(a0, fam.rho),
    }
    res = max_frame_residuals(forms, m, bundle(m, s, 4))
    assert max(res.values()) < 1e-7, res


@pytest.mark.parametrize("case", [("perturbed", {"eps": 0.05}), ("heisenberg", {})], ids=metric_id)
def test_general_form_with_curvature_correction(case):
    m = get_metric(case[0], **case[1])
    s = 1.4
    sy = build_system(m, s)
    Z = bundle(m, s, 3)
    for i in range(3):
        want = ((i + 1) / s**2) * wedge(sy.theta, sy.alpha_i(i + 1)) + curvature_correction(sy, i)
        assert max_frame_residual(sy.d(sy.alpha[i]), want, m, Z) < 1e-7
    assert max_frame_residual(curvature_correction(sy, 0), None, m, Z) < 1e-12


@pytest.mark.parametrize("c", [1.0, -1.0, 0.5])
def test_constant_curvature_corrections(c):
    m = get_metric("sphere3" if c > 0 else "hyperbolic3", c=c)
    sy = build_system(m, 1.0)
    th, a0, a1, _ = sy.theta, *sy.alpha
    Z = bundle(m, 1.0, 4)
    assert max_frame_residual(curvature_correction(sy, 1), -2 * c * wedge(th, a0), m, Z) < 1e-10
    assert max_frame_residual(curvature_correction(sy, 2), -c * wedge(th, a1), m, Z) < 1e-10
    fam = rho_family(sy)
    for z in Z:
        assert float(fam.r(jnp.asarray(z))) == pytest.approx(2 * c, abs=1e-10)
    assert max(max_frame_residuals({"rho": fam.rho, "gamma": fam.gamma}, m, Z).values()) < 1e-10


@pytest.mark.parametrize("name,params", [("flat2d", {}), ("sphere2", {"c": 1.0}), ("hyperbolic2", {"c": -1.0}), ("perturbed2d", {"eps": 0.05})])
def test_surface_base_equations(name, params):
    m = get_metric(name, **params)
    s = 1.5
    sy = build_system(m, s)
    th, a0, a1 = sy.theta, *sy.alpha
    Z = bundle(m, s, 4)
    assert max_frame_residual(sy.dtheta, wedge(a1, a0), m, Z) < 1e-10
    assert max_frame_residual(sy.d(a0), (1 / s**2) * wedge(th, a1), m, Z) < 1e-8
    from sbl.eds import frame_curvature

    K = lambda z: frame_curvature(m, z)[1][1, 0, 1, 0]  # noqa: E731
    assert max_frame_residual(sy.d(a1), wedge(a0, th).times(K), m, Z) < 1e-8
    assert max_frame_residual(frame_basis_form(sy, (1,)), a0, m, Z) < 1e-12


def test_rejects_bad_dimension_and_radius(sphere3):
    with pytest.raises(ValueError):
        build_system(sphere3, 0.0)
    with pytest.raises(UnsupportedDimensionError):
        rho_family(build_system(get_metric("flat2d"), 1.0))
    with pytest.raises(UnsupportedDimensionError):
        scalar_invariants(get_metric("sphere2", c=1.0), 1.0, [0.0, 0.0], [1.0, 0.0])
    with pytest.raises(IndexError):
        curvature_correction(build_system(sphere3, 1.0), 3)


@pytest.mark.parametrize("u", list(NIL_SCALARS), ids=str)
def test_nil_scalar_invariants(heisenberg, u):
    v = scalar_invariants(heisenberg, 1.0, np.zeros(3), np.array(u))
    for k, want in NIL_SCALARS[u].items():
        assert v[k] == pytest.approx(want, abs=1e-12), k
    assert v["q2_det"] == pytest.approx(v["q2"], abs=1e-12)
    assert v["r"] == pytest.approx(v["r_xi"], abs=1e-12)
    assert v["r"] + v["c"] == pytest.approx(0.5 * v["scal"], abs=1e-12)


def test_nil_F_coefficients(heisenberg):
    sy = build_system(heisenberg, 1.0)
    F = F_coefficients(sy, np.zeros(3), np.array([1.0, 0.0, 0.0]))
    assert abs(F.F1) == pytest.approx(0.25, abs=1e-9)
    np.testing.assert_allclose(F.F2, 0.0, atol=1e-9)
    assert np.linalg.norm(F.F3) == pytest.approx(0.25, abs=1e-9)
    assert F.F4 == pytest.approx(0.0, abs=1e-9)
    assert F.leftover < 1e-9
    assert abs(F.F1 - F.direct[0]) < 1e-9 and abs(F.F4 - F.direct[3]) < 1e-9


@pytest.mark.parametrize("case", [("perturbed", {"eps": 0.05}), ("heisenberg", {})], ids=metric_id)
def test_frame_scalars_frame_independent(case):
    m = get_metric(case[0], **case[1])
    for z in bundle(m, 1.0, 5, seed=3):
        z = jnp.asarray(z)
        vals = [frame_scalars(m, z, p) for p in range(3)]
        for k in ("c", "r", "p2", "q2"):
            assert max(abs(float(v[k] - vals[0][k])) for v in vals) < 1e-10


def test_rho_identities(perturbed):
    s = 1.2
    sy = build_system(perturbed, s)
    fam = rho_family(sy)
    th, a0, a1, a2 = sy.theta, *sy.alpha
    W = wedge
    forms = {
        "row1": W(fam.rho, a0) + W(fam.rho1, a1),
        "row2": W(fam.rho1, a2) - W(fam.rho3, sy.dtheta),
        "row3": W(fam.rho2, a1) + W(fam.rho3, a0),
        "row4": W(fam.rho3, a1) + W(fam.rho2, a2),
        "rho3_rho": W(fam.rho3, fam.rho) - a2.times(fam.p2),
        "rho2_rho1": W(fam.rho2, fam.rho1) - a0.times(fam.p2),
        "gamma_sq": W(fam.gamma, fam.gamma) - W(a0, a2).times(fam.q2),
        "p4": sy.vol_S.times(lambda z: s * fam.p2(z) ** 2) - wedge_all(th, fam.rho, fam.rho1, fam.rho2, fam.rho3),
    }
    res = max_frame_residuals(forms, perturbed, bundle(perturbed, s, 4))
    assert max(res.values()) < 1e-10, res


def test_poincare_cartan(perturbed):
    sy = build_system(perturbed, 1.0)
    lhs, Pi = poincare_cartan(sy)
    assert max_frame_residual(lhs, Pi, perturbed, bundle(perturbed, 1.0, 3)) < 1e-7


@pytest.mark.parametrize("case", [("perturbed", {"eps": 0.05}), ("heisenberg", {})], ids=metric_id)
def test_F_paths_agree(case):
    m = get_metric(case[0], **case[1])
    sy = build_system(m, 1.0)
    drho = sy.d(rho_family(sy).rho)
    for z in bundle(m, 1.0, 3, seed=2):
        F = F_coefficients(sy, z[:3], z[3:], drho)
        assert abs(F.F1 - F.direct[0]) < 1e-8
        assert abs(F.F4 - F.direct[3]) < 1e-8


def test_classify_flat_and_sphere():
    for name, params in (("euclidean3", {}), ("sphere3", {"c": 1.0})):
        m = get_metric(name, **params)
        rep = classify_ricci(build_system(m, 1.0), bundle(m, 1.0, 10))
        assert rep.types == frozenset({"I", "II", "III", "IV"}) == rep.types_direct
        assert rep.csc_flag and rep.recurrent_flag and rep.consistent


def test_classify_heisenberg(heisenberg):
    rep = classify_ricci(build_system(heisenberg, 1.0), bundle(heisenberg, 1.0, 12))
    assert rep.types == rep.types_direct
    assert "IV" in rep.types and "I" not in rep.types
    assert rep.csc_flag and not rep.recurrent_flag
    assert rep.consistent
    d = rep.as_dict()
    assert d["types"] == sorted(rep.types) and d["max_path_disagreement"] < 1e-8


def test_classify_needs_ten_samples(sphere3):
    with pytest.raises(ValueError):
        classify_ricci(build_system(sphere3, 1.0), bundle(sphere3, 1.0, 9))
