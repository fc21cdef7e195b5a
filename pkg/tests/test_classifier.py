import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpch2 import classifier as cl
from cpch2.errors import DomainError, NotApplicable
from cpch2.hypersurfaces import PrincipalData
from cpch2.jacobi import displace_patch
from oracles import homotopy_roots

GRID = np.linspace(-0.499, 0.499, 101)
L0 = cl.CurvatureTriple((-0.5, 0.5, 0.0))


def family_data(l3):
    t = cl.family_triple(l3)
    b = np.sqrt(list(cl.b_from_lambda(l3)) + [0.0])
    return t, b, cl.x_from_b(t, b)


def test_triple_d_sums_to_zero():
    t = cl.CurvatureTriple((0.3, -1.2, 0.7))
    assert sum(t.d) == 0.0
    with pytest.raises(DomainError):
        cl.residual_eq2(cl.CurvatureTriple((0.1, 0.1, 0.3)), [1, 0, 0], [0, 0, 0])


def test_eq2_examples():
    assert np.allclose(cl.residual_eq2(L0, np.sqrt([0.5, 0.5, 0]), [0.25, -0.25, 0]), 0, atol=1e-15)
    assert np.abs(cl.residual_eq2(L0, [1, 0, 0], [0, 0, 0])).max() > 1
    t, b, x = family_data(0.2)
    assert np.abs(cl.residual_eq2(t, b, x)).max() < 1e-12


def test_eq6_examples_and_sensitivity():
    assert np.abs(cl.residual_eq6(L0, np.sqrt([0.5, 0.5, 0]), [0.25, -0.25, 0])).max() < 1e-12
    t, b, x = family_data(0.2)
    assert np.abs(cl.residual_eq6(t, b, x)).max() < 1e-10
    rng = np.random.default_rng(0)
    assert np.abs(cl.residual_eq6(t, b, x + 1e-3 * rng.normal(size=3))).max() > 1e-4


def test_family_values_at_02():
    # frozen from direct evaluation of the closed forms
    t, b, x = family_data(0.2)
    assert np.allclose(t.lam, (-0.1690415759823429, 0.7690415759823430, 0.2), atol=1e-15)
    assert np.allclose(b**2, (0.2143110400834820, 0.7856889599165181, 0.0), atol=1e-15)
    assert np.allclose(x, (0.2665009003, -0.2665009003, 0.2), atol=1e-10)


def test_lambda_relations():
    assert cl.lambda_relations(0.0) == (-0.5, 0.5)
    l1, l2 = cl.lambda_relations(1 / np.sqrt(3))
    assert np.isclose(l1, l2)
    with pytest.raises(DomainError):
        cl.lambda_relations(0.6)


@pytest.mark.parametrize("l3", GRID)
def test_grid_relations(l3):
    t, b, _ = family_data(l3)
    rep = cl.residual_report(t, b)
    assert max(abs(v) for v in rep.values()) < 1e-10
    rel = cl.algebraic_relations(t)
    assert abs(rel["diffsq_rel"]) < 1e-12 and abs(rel["cubic_rel"]) < 1e-12 and abs(rel["lin_rel"]) < 1e-12
    b1, b2 = cl.b_from_lambda(l3)
    assert 0 < b1 < 1 and 0 < b2 < 1 and abs(b1 + b2 - 1) < 1e-12
    assert abs(rep["bdiff_rel"]) < 1e-12


def test_b_from_lambda_examples():
    assert np.allclose(cl.b_from_lambda(0.0), (0.5, 0.5), atol=1e-15)
    assert np.allclose(cl.b_from_lambda(-0.2), cl.b_from_lambda(0.2)[::-1], atol=1e-15)
    with pytest.raises(DomainError):
        cl.b_from_lambda(0.5)


def test_branch_solutions():
    sols = cl.branch_solutions(0.2)
    assert len(sols) == 4
    assert any(np.allclose(s, (1.25, 0.85)) for s in sols)
    assert any(np.allclose(s, (0.9380831519646859, -0.2)) for s in sols)
    for x, y in sols:
        assert max(abs(v) for v in cl.branch_constraints(0.2, x, y)) < 1e-12
    assert cl.branch_solutions(0.0) == [(1.0, 0.0), (-1.0, 0.0)]


def test_ellipse_exclusion():
    assert np.allclose(cl.ellipse_axes(0.55), (0.2704480608, 0.9395519392), atol=1e-9)
    assert cl.ellipse_exclusion(0.51)
    assert all(cl.ellipse_exclusion(v) for v in np.linspace(0.5001, 0.5773, 50))
    assert all(cl.ellipse_exclusion(-v) for v in np.linspace(0.5001, 0.5773, 50))
    with pytest.raises(DomainError):
        cl.ellipse_exclusion(0.4)


def test_system_has_family_root_and_leading_coefficient():
    sys0 = cl.build_system(L0)
    assert np.abs(sys0.raw([0.25, -0.25, 0.0])).max() < 1e-14
    t = cl.family_triple(0.2)
    s = cl.build_system(t)
    d = t.d
    assert np.isclose(s.weight[0], 8 * d[0] * d[1] / d[2] ** 2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_y_form_is_change_of_variables(y):
    s = cl.build_system(cl.family_triple(0.13))
    y = np.array(y)
    x = np.array([[-1, 1, 1], [1, -1, 1], [1, 1, -1]]) @ y
    for i in range(3):
        assert np.isclose(x[i] + x[(i + 1) % 3], 2 * y[(i + 2) % 3])
    assert np.allclose(s.normalized(x)[[1, 2, 0]], s.y_form(y), atol=1e-12 * max(1, np.abs(y).max() ** 2))


@pytest.mark.parametrize("l3", [0.0, 0.2, -0.2, 0.37, -0.45])
def test_solver_finds_family_root(l3):
    t, b, x = family_data(l3)
    sol = cl.solve_system(cl.build_system(t), seed=4)
    assert sol.contains(x, 1e-9)
    assert len(sol.roots) <= 8
    assert all(r.residual < 1e-9 for r in sol.roots)
    xs = sol.as_array()
    assert all(np.abs(a - b_).max() > sol.dedup_radius for a, b_ in itertools.combinations(xs, 2))


@pytest.mark.parametrize("l3", [0.0, 0.2, -0.33, 0.475, 0.49])
def test_solver_against_homotopy_oracle(l3):
    s = cl.build_system(cl.family_triple(l3))
    ref, _ = homotopy_roots(s)
    sol = cl.solve_system(s, seed=0).as_array()
    assert np.abs(ref).max() <= cl.root_bound(s)
    for r in ref:
        assert np.abs(sol - r).max(axis=1).min() < 1e-7
    for r in sol:
        assert np.abs(ref - r).max(axis=1).min() < 1e-7


@pytest.mark.parametrize("l3", [-0.475, -0.27, 0.475])
def test_solver_seed_independent(l3):
    s = cl.build_system(cl.family_triple(l3))
    a, b = cl.solve_system(s, seed=1), cl.solve_system(s, seed=99)
    assert len(a.roots) == len(b.roots)
    assert np.abs(a.as_array() - b.as_array()).max() < 1e-10


def test_classify_family_data():
    t, b, _ = family_data(0.2)
    res = cl.classify(PrincipalData(np.array(t.lam), b), tol=cl.ANALYTIC_TOL)
    assert res.family is cl.Family.WEquidistant
    assert abs(res.parameter - 0.8472978603872037) < 1e-6
    w3 = cl.classify(PrincipalData([-0.5, 0.0, 0.5], [np.sqrt(0.5), 0, np.sqrt(0.5)]), tol=cl.ANALYTIC_TOL)
    assert w3.family is cl.Family.RuledW3


def test_classify_label_alignment_any_order():
    t, b, _ = family_data(-0.3)
    lam = np.array(t.lam)
    order = np.argsort(lam)
    res = cl.classify(PrincipalData(lam[order], b[order]), tol=1e-9)
    assert res.family is cl.Family.WEquidistant and res.parameter < 0


def test_classify_negative_controls():
    rng = np.random.default_rng(7)
    for _ in range(20):
        lam = np.sort(rng.uniform(-2, 2, 3))
        b = rng.normal(size=3)
        res = cl.classify(PrincipalData(lam, b / np.linalg.norm(b)))
        assert res.family is cl.Family.Unclassified
    umb = cl.classify(PrincipalData([0.7, 0.7, 0.7], [0, 0, 1]))
    assert umb.family is cl.Family.Unclassified


def test_classify_hopf_models_from_formulas():
    r = 0.9
    cases = [
        ([0.5 / np.tanh(r / 2)] * 2 + [1 / np.tanh(r)], cl.Family.GeodesicSphere),
        ([0.5 * np.tanh(r / 2)] * 2 + [1 / np.tanh(r)], cl.Family.TubeCH1),
        ([0.5 * np.tanh(r / 2), 0.5 / np.tanh(r / 2), np.tanh(r)], cl.Family.TubeRH2),
    ]
    for lam, fam in cases:
        res = cl.classify(PrincipalData(lam, [0, 0, 1]), tol=1e-9)
        assert res.family is fam and abs(res.parameter - r) < 1e-9
    crit = cl.classify(PrincipalData([1 / (2 * np.sqrt(3)), np.sqrt(3) / 2, np.sqrt(3) / 2], [0, 1, 0]), tol=1e-9)
    assert crit.family is cl.Family.TubeRH2 and abs(crit.parameter - cl.CRITICAL_RADIUS) < 1e-9
    horo = cl.classify(PrincipalData([-1, -0.5, -0.5], [1, 0, 0]), tol=1e-9)  # outward normal
    assert horo.family is cl.Family.Horosphere


def test_classified_result_invariant():
    with pytest.raises(ValueError):
        cl.ClassificationResult(cl.Family.RuledW3, None, {"eq1": 0.5}, tolerance=1e-3)


def test_align_labels_requires_orthogonal_direction():
    with pytest.raises(NotApplicable):
        cl.align_labels(PrincipalData([-0.5, 0.0, 0.5], [0.6, 0.48, 0.64]))


def test_codazzi_contractions(measured):
    w3, _, _ = measured("w3")
    c = cl.check_lemma_contractions(w3, w3.grid.center)
    assert c.mixed < 1e-3 and c.diagonal < 1e-3
    assert c.db < 1e-3 and c.eq2 < 1e-3
    assert np.allclose(c.x, [0.25, 0.0, -0.25], atol=1e-5)
    bad = cl.check_lemma_contractions(w3, w3.grid.center, lambdas=[0.5, -0.5, 0.0])
    assert bad.mixed > 1e-1
    tube, _, _ = measured("tube-rh2", 1.0)
    c = cl.check_lemma_contractions(tube, tube.grid.nodes()[3])
    assert c.mixed < 1e-3 and c.diagonal < 1e-3
    sphere, _, _ = measured("sphere", 1.0)
    with pytest.raises(NotApplicable):
        cl.check_lemma_contractions(sphere, sphere.grid.center)


def test_codazzi_on_w3_nodes(measured):
    w3, _, _ = measured("w3")
    for u in w3.grid.nodes()[:10]:
        c = cl.check_lemma_contractions(w3, u)
        assert c.mixed < 1e-3


@pytest.mark.parametrize("name,r,family", [
    ("sphere", 1.0, cl.Family.GeodesicSphere),
    ("horosphere", None, cl.Family.Horosphere),
    ("tube-ch1", 0.8, cl.Family.TubeCH1),
    ("tube-rh2", 1.0, cl.Family.TubeRH2),
    ("tube-rh2", cl.CRITICAL_RADIUS, cl.Family.TubeRH2),
    ("w3", None, cl.Family.RuledW3),
])
def test_round_trip(measured, name, r, family):
    _, data, _ = measured(name, r)
    for d in data:
        res = cl.classify(d)
        assert res.family is family
        if r is not None:
            assert abs(res.parameter - r) < 1e-3
    assert "eq1" not in cl.classify(PrincipalData(data[0].lambdas, data[0].b)).residual_report


def test_round_trip_equidistant(measured):
    _, data, _ = measured("w3-equidistant", 0.8472978603872037)
    for d in data:
        res = cl.classify(d)
        assert res.family is cl.Family.WEquidistant
        assert abs(res.parameter - 0.8472978603872037) < 1e-3
        assert res.residual_report["eq1"] < 1e-6
