import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lambdalab import analytic, rigidity
from lambdalab.analytic import CurvatureSummary, make_canonical
from lambdalab.cli import boundary_family, certification_list
from lambdalab.rigidity import CaseTag, SymmetricTensor3


def gap(kind, n, k=None, r=None):
    s = make_canonical(kind, n, k, r)
    return rigidity.pinching_gap(analytic.curvature_summary(s), analytic.lambda_of(s), n)


def test_pinching_examples():
    assert gap("Sphere", 2, 2, math.sqrt(2)) == pytest.approx((1.0, 1.0, 0.0), abs=1e-12)
    assert gap("Cylinder", 2, 1, 2.0) == pytest.approx((2.125, 2.125, 0.0), abs=1e-12)
    assert gap("Sphere", 2, 2, 1.0) == pytest.approx((0.5, 1.5, 1.0), abs=1e-12)


def test_pinching_rejects_small_n_and_negative_B():
    with pytest.raises(ValueError):
        rigidity.pinching_gap(CurvatureSummary.from_kappas([1.0]), 0.0)
    bad = CurvatureSummary(
        kappas=np.array([1.0, 1.0]), H=np.array(2.0), S=np.array(1.0), B=np.array(-1e-6),
        mus=np.zeros(2), B3=np.array(0.0), f3=np.array(2.0),
    )
    with pytest.raises(ValueError):
        rigidity.pinching_gap(bad, 1.0)


def test_pinching_vectorised_over_vertices():
    s = CurvatureSummary.from_kappas(np.array([[1.0, 1.0], [1.0, 0.0]]))
    lhs, rhs, defect = rigidity.pinching_gap(s, 1.0)
    assert lhs.shape == (2,)
    np.testing.assert_allclose(defect, rhs - lhs)


def test_boundary_family_defect_zero():
    for s in boundary_family():
        _, _, d = rigidity.pinching_gap(analytic.curvature_summary(s), analytic.lambda_of(s), s.n)
        assert abs(d) <= 1e-12, s


def test_n2_cylinders_are_boundary_for_every_radius():
    for r in np.geomspace(0.05, 20, 40):
        assert abs(gap("Cylinder", 2, 1, r)[2]) <= 1e-12


@pytest.mark.parametrize("n", range(2, 9))
def test_sphere_defect_monotone_with_root(n):
    radii = np.linspace(0.1, 3 * math.sqrt(n), 200)
    d = np.array([gap("Sphere", n, n, r)[2] for r in radii])
    assert np.all(np.diff(d) < 0)
    # closed form of the sphere defect
    np.testing.assert_allclose(d, n / radii**2 - 1, atol=1e-9)
    assert abs(rigidity.sphere_gap_root(n) - math.sqrt(n)) <= 1e-10


def test_classify_examples():
    assert rigidity.classify_canonical(make_canonical("Sphere", 3, 3, 1.0)) is CaseTag.SPHERE_SMALL
    assert rigidity.classify_canonical(make_canonical("Cylinder", 4, 2, math.sqrt(2))) is CaseTag.CYL_K
    assert rigidity.classify_canonical(make_canonical("Sphere", 2, 2, 2.0)) is CaseTag.GAP_VIOLATED
    assert rigidity.classify_canonical(make_canonical("Plane", 3)) is CaseTag.EUCLIDEAN


def test_certification_list():
    for s, expected in certification_list():
        assert rigidity.classify_canonical(s) is expected, s


def test_middle_cylinders_only_at_zero_lambda():
    for n in range(4, 9):
        for k in range(2, n - 1):
            for r in (0.9 * math.sqrt(k), math.sqrt(k), 1.1 * math.sqrt(k)):
                s = make_canonical("Cylinder", n, k, r)
                tag = rigidity.classify_canonical(s)
                assert (tag is CaseTag.CYL_K) == (abs(analytic.lambda_of(s)) < 1e-12)


def test_classification_consistent_over_grid():
    # pinching and the radius ranges never disagree (classify raises otherwise)
    for n in range(2, 8):
        for r in np.geomspace(0.05, 6, 60):
            rigidity.classify_canonical(make_canonical("Sphere", n, n, r))
            for k in range(1, n):
                rigidity.classify_canonical(make_canonical("Cylinder", n, k, r))


def test_threshold_cylinder_radius_ranges():
    T = CaseTag
    for n in range(3, 7):
        assert rigidity.classify_canonical(make_canonical("Cylinder", n, 1, 1.5)) is T.CYL_1
        assert rigidity.classify_canonical(make_canonical("Cylinder", n, 1, 0.9)) is T.GAP_VIOLATED
        small = 0.8 * math.sqrt(n - 1)
        assert rigidity.classify_canonical(make_canonical("Cylinder", n, n - 1, small)) is T.CYL_N1
        big = 1.2 * math.sqrt(n - 1)
        assert rigidity.classify_canonical(make_canonical("Cylinder", n, n - 1, big)) is T.GAP_VIOLATED


def test_strict_pinching_only_small_spheres_and_plane():
    for n in range(2, 7):
        assert rigidity.strict_pinching(analytic.curvature_summary(make_canonical("Plane", n)), 0.0, n)
        for r in np.geomspace(0.1, 5, 31):
            for k in range(1, n + 1):
                kind = "Sphere" if k == n else "Cylinder"
                s = make_canonical(kind, n, k, r)
                strict = rigidity.strict_pinching(analytic.curvature_summary(s), analytic.lambda_of(s), n)
                expected = kind == "Sphere" and r < math.sqrt(n) * (1 - 1e-9)
                assert strict == expected, s


def test_focal_quantity():
    assert rigidity.focal_quantity(2.0, 1.0, 2) == pytest.approx(0.0, abs=1e-15)
    assert rigidity.focal_quantity(1.0, 0.0, 2) == pytest.approx(-1.0)
    assert rigidity.focal_quantity(1.5, 3.0, 4) == pytest.approx(-(4 + 9 / 4))
    for n in range(2, 7):
        for r in (0.1, 0.5, 1.0, math.sqrt(n), 2.0, 5.0):
            s = make_canonical("Sphere", n, n, r)
            H = float(analytic.curvature_summary(s).H)
            assert abs(rigidity.focal_quantity(H, analytic.lambda_of(s), n)) <= 1e-12 * max(1, H * H)
            for k in range(1, n):
                c = make_canonical("Cylinder", n, k, r)
                q = rigidity.focal_quantity(float(analytic.curvature_summary(c).H), analytic.lambda_of(c), n)
                assert q == pytest.approx(k - n, abs=1e-9)


def test_report_json_keys():
    rep = rigidity.pinching_report(make_canonical("Sphere", 2, 2, 2.0))
    doc = json.loads(json.dumps(rep.to_dict()))
    assert set(doc) == {"n", "lambda", "lhs", "rhs", "defect", "thm12_defect", "case_tag"}
    assert doc["case_tag"] == "GapViolated"
    assert doc["rhs"] >= 1 and doc["lhs"] >= 0


def test_b3_examples():
    assert rigidity.b3_bound([1.0, 1.0, -2.0]) == pytest.approx((6.0, -6.0, 6.0, 0.0), abs=1e-12)
    B, B3, bound, defect = rigidity.b3_bound([1.0, -1.0, 0.0])
    assert (B, B3) == pytest.approx((2.0, 0.0))
    assert bound == pytest.approx(2 * math.sqrt(2) / math.sqrt(6))
    assert defect == pytest.approx(1.1547, abs=1e-4)
    assert rigidity.b3_bound(np.zeros(4)) == (0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        rigidity.b3_bound([1.0, 0.0, 0.0])


@settings(max_examples=300, deadline=None)
@given(arrays(float, st.integers(3, 8), elements=st.floats(-5, 5)))
def test_b3_inequality_property(v):
    mus = v - v.mean()
    _, _, bound, defect = rigidity.b3_bound(mus)
    assert defect >= -1e-10 * max(1.0, bound)


def test_b3_equality_and_strictness():
    rng = np.random.default_rng(3)
    for n in range(3, 9):
        for a in rng.uniform(-2, 2, 50):
            mus = np.full(n, a)
            mus[rng.integers(n)] = -(n - 1) * a
            assert abs(rigidity.b3_bound(mus)[3]) <= 1e-10
        # three distinct values: strict inequality
        mus = np.zeros(n)
        mus[:3] = [1.0, 0.3, -1.3]
        B, _, _, defect = rigidity.b3_bound(mus)
        assert defect > 1e-6 * B**1.5


def test_kato_example():
    h = np.zeros((2, 2, 2))
    h[0, 0, 0] = 1.0
    total, trace_term, defect, (pair2, distinct) = rigidity.kato_defect(SymmetricTensor3(h))
    assert (total, trace_term, defect, pair2, distinct) == pytest.approx((1, 0.5, 0.5, 0, 0))
    zero = rigidity.kato_defect(SymmetricTensor3(np.zeros((3, 3, 3))))
    assert zero[:3] == (0, 0, 0) and zero[3] == (0, 0)


def test_symmetric_tensor_validation():
    h = np.zeros((3, 3, 3))
    h[0, 1, 2] = 1.0
    with pytest.raises(ValueError):
        SymmetricTensor3(h)
    T = SymmetricTensor3(rigidity.symmetrize(h))
    np.testing.assert_allclose(T.entries[2, 1, 0], 1 / 6)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: arrays(float, (n, n, n), elements=st.floats(-3, 3))))
def test_kato_property(a):
    T = SymmetricTensor3(rigidity.symmetrize(a))
    total, _, defect, (pair2, distinct) = rigidity.kato_defect(T)
    assert defect >= pair2 + distinct - 1e-10 * max(1.0, total)
    assert pair2 + distinct >= 0
    assert sum(rigidity.kato_split(T)) == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_gradient_of_H_is_trace():
    rng = np.random.default_rng(5)
    T = SymmetricTensor3(rigidity.symmetrize(rng.normal(size=(4, 4, 4))))
    np.testing.assert_allclose(T.gradient_H(), [np.trace(T.entries[:, :, k]) for k in range(4)])
