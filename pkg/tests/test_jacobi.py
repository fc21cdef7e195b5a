import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpch2 import ambient as amb
from cpch2 import jacobi as jc
from cpch2.cli import jacobi_grid, jacobi_ode_errors
from cpch2.errors import DomainError, FocalPointError
from cpch2.hypersurfaces import geodesic_sphere, measure, ruled_W3
from oracles import tube_spectrum_by_jacobi


def test_profiles_at_zero():
    for lam in (-0.7, 0.0, 0.3):
        assert jc.f_profile(lam, 0.0) == 1.0
        assert jc.f_prime(lam, 0.0) == -lam
        assert jc.g_profile(lam, 0.0) == 0.0
        assert jc.g_prime(lam, 0.0) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0, 3))
def test_profiles_solve_their_odes(lam, t):
    # 4 f'' = f, and f + g solves 4 h'' = 4 h (cosh t - lam sinh t)
    h = 1e-4
    f2 = (jc.f_profile(lam, t + h) - 2 * jc.f_profile(lam, t) + jc.f_profile(lam, t - h)) / h**2
    assert abs(4 * f2 - jc.f_profile(lam, t)) < 1e-5 * max(1, abs(jc.f_profile(lam, t)))
    whole = jc.f_profile(lam, t) + jc.g_profile(lam, t)
    assert abs(whole - (np.cosh(t) - lam * np.sinh(t))) < 1e-9 * max(1, abs(whole))
    fd = (jc.g_profile(lam, t + h) - jc.g_profile(lam, t - h)) / (2 * h)
    assert abs(fd - jc.g_prime(lam, t)) < 1e-6 * max(1, abs(fd))


def test_ode_matches_closed_form():
    errs = jacobi_ode_errors(12, seed=11, rtol=1e-12)
    assert max(errs) < 1e-8


def test_tighter_ode_tolerance_is_not_worse():
    loose = max(jacobi_ode_errors(6, seed=2, rtol=1e-8))
    tight = max(jacobi_ode_errors(6, seed=2, rtol=1e-12))
    assert tight <= loose


def test_prop5_frame_at_lambda3_02():
    frame = jc.DisplacementFrame.from_lambda3(0.2)
    assert abs(frame.r - 0.8472978603872037) < 1e-12
    assert abs(np.linalg.det(jc.build_D(frame, frame.r).D) - 0.7698727167525814) < 1e-12


@pytest.mark.parametrize("l3", list(jacobi_grid(20)))
def test_D_and_C_identities(l3):
    res = jc.verify_DC_identities(jc.DisplacementFrame.from_lambda3(l3))
    assert res["det_D"] < 1e-10
    assert res["trace_C"] < 1e-9 and res["det_C"] < 1e-9
    assert res["eig_C"] < 1e-8
    assert res["f3_prime"] < 1e-12


def test_identities_reject_foreign_frames():
    frame = jc.DisplacementFrame(0.5, (-0.3, 0.6, 0.1), (0.6, 0.8, 0.0))
    with pytest.raises(DomainError):
        jc.verify_DC_identities(frame)
    with pytest.raises(ValueError):
        jc.DisplacementFrame(0.5, (-0.3, 0.6, 0.1), (0.6, 0.7, 0.0))
    with pytest.raises(DomainError):
        jc.radius_for_lambda3(0.5)


def test_C_is_similar_to_shape_matrix():
    # the matrix of the displaced shape operator is -D^{-1} D'; C = -D' D^{-1} shares its spectrum
    frame = jc.DisplacementFrame.from_lambda3(-0.31)
    m = jc.build_D(frame, frame.r)
    S = -np.linalg.solve(m.D, m.Dprime)
    assert np.allclose(np.sort(np.linalg.eigvals(S).real), np.sort(np.linalg.eigvals(m.C).real))


def test_synthetic_frame_plus_sign():
    x = np.array([0.1, -0.2, 0.05, 0.3])
    xi = np.array([0.3, 0.1, -0.2, 0.4])
    xi = xi / amb.norm(x, xi)
    b = np.array([0.6, 0.0, 0.8])
    U = jc.synthetic_frame(x, xi, b)
    G = amb.metric_eval(x, U[:, None], U[None])
    assert np.allclose(G, np.eye(3), atol=1e-12)
    assert np.allclose(amb.metric_eval(x, amb.apply_J(xi), U), b, atol=1e-12)
    c = [amb.metric_eval(x, amb.apply_J(U[i]), U[(i + 1) % 3]) for i in range(3)]
    assert np.allclose(c, b[[2, 0, 1]], atol=1e-12)


def test_displaced_shape_on_sphere_matches_jacobi_spectrum():
    # a geodesic sphere of radius 0.6 pushed out by 0.5 is the sphere of radius 1.1
    sph = geodesic_sphere(0.6)
    (d,), _ = measure(sph, sph.grid.center[None])
    r = 0.5
    images = []
    for k in range(3):
        inp = jc.JacobiInput(d.point, -d.normal, d.frame[k], -d.lambdas[k] * d.frame[k])
        sol = jc.jacobi_integrate(inp, r)
        images.append(sol)
    Z = np.array([s.zeta for s in images])
    SZ = np.array([jc.displaced_shape(jc.JacobiInput(d.point, -d.normal, d.frame[k], -d.lambdas[k] * d.frame[k]), r)
                   for k in range(3)])
    A = np.linalg.lstsq(Z.T, SZ.T, rcond=None)[0]
    outward = np.sort(np.linalg.eigvals(A).real)
    assert np.allclose(-outward[::-1], tube_spectrum_by_jacobi("point", 1.1), atol=1e-9)


def test_displace_zero_is_identity():
    w = ruled_W3()
    assert jc.displace_patch(w, 0.0) is w


def test_focal_point_detected():
    # the inward normals of a sphere of radius 0.5 meet at its center
    with pytest.raises(FocalPointError) as info:
        jc.displace_patch(geodesic_sphere(0.5), 0.5)
    assert info.value.singular_values is not None
