import json
import math

import numpy as np
import pytest

from borsuk.geom2d import ConvexPolygon, congruence_key, diameter
from borsuk.ucs import (
    FIRST_DEPTH,
    FIRST_RETAINED,
    SECOND_DEPTH,
    CoveringShape,
    CutSpec,
    LemmaViolation,
    all_shapes,
    build_s10,
    build_two_shape_system,
    chord_endpoints,
    diagonal_lengths,
    dumps_shape,
    lemma1_cut,
    pal_hexagon,
    shape_by_name,
)

S3 = math.sqrt(3)
OMEGA = pal_hexagon()


def test_hexagon_side_width_diameter():
    V = OMEGA.polygon.vertices
    sides = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
    np.testing.assert_allclose(sides, 1 / S3, atol=1e-15)
    C, B = OMEGA.polygon.line_arrays()
    for t in range(3):
        # opposite edges: distance between parallel lines
        assert B[t] + B[t + 3] == pytest.approx(1.0, abs=1e-15)
    assert diameter(OMEGA.polygon) == pytest.approx(2 / S3, abs=1e-15)
    assert np.allclose(OMEGA.polygon.centroid, 0, atol=1e-15)
    # a main diagonal on the x-axis
    assert np.min(np.linalg.norm(V - [1 / S3, 0], axis=1)) < 1e-15


def test_first_depth_constants():
    assert FIRST_DEPTH == pytest.approx((2 / S3 - 1) / 2, abs=1e-16)
    assert FIRST_RETAINED == pytest.approx(0.5 + 1 / S3, abs=1e-16)
    assert SECOND_DEPTH == pytest.approx(1 / (2 * S3) - 0.25, abs=1e-16)
    # half the leftover over 1, the positive-depth reading
    assert SECOND_DEPTH == pytest.approx((FIRST_RETAINED - 1) / 2, abs=1e-15)


def test_lemma1_single_end_cut_keeps_half_plus_inverse_root3():
    a, b = chord_endpoints(OMEGA.polygon, (1.0, 0.0))
    m1, m2 = lemma1_cut(OMEGA, CutSpec(tuple(a), tuple(b), 0.0, FIRST_DEPTH))
    a1, b1 = chord_endpoints(m1.polygon, (1.0, 0.0))
    assert np.linalg.norm(b1 - a1) == pytest.approx(0.5 + 1 / S3, abs=1e-12)
    assert m2.polygon.area == pytest.approx(OMEGA.polygon.area, abs=1e-15)
    assert len(m1.provenance) == 1 and m1.provenance[0].strip_width >= 1 - 1e-12


def test_lemma1_zero_cut_is_identity():
    a, b = chord_endpoints(OMEGA.polygon, (0.5, S3 / 2))
    m1, m2 = lemma1_cut(OMEGA, CutSpec(tuple(a), tuple(b), 0.0, 0.0))
    np.testing.assert_array_equal(m1.polygon.vertices, OMEGA.polygon.vertices)
    np.testing.assert_array_equal(m2.polygon.vertices, OMEGA.polygon.vertices)


def test_lemma1_width_boundary():
    a, b = chord_endpoints(OMEGA.polygon, (1.0, 0.0))
    L = 2 / S3
    with pytest.raises(LemmaViolation):
        lemma1_cut(OMEGA, CutSpec(tuple(a), tuple(b), (L - 1) / 2, (L - 1) / 2 + 1e-6))
    lemma1_cut(OMEGA, CutSpec(tuple(a), tuple(b), (L - 1) / 2, (L - 1) / 2))
    with pytest.raises(LemmaViolation):
        lemma1_cut(OMEGA, CutSpec(tuple(a), tuple(b), -0.01, 0.0))


def test_two_shape_system():
    o1, o2 = build_two_shape_system()
    assert (o1.name, o2.name) == ("Omega_1", "Omega_2")
    for s in (o1, o2):
        np.testing.assert_allclose(diagonal_lengths(s), 0.5 + 1 / S3, atol=1e-12)
        assert len(s.polygon) == 9
    assert o1.polygon.area == pytest.approx(o2.polygon.area, abs=1e-12)
    assert congruence_key(o1.polygon) != congruence_key(o2.polygon)
    # Omega_1 is symmetric under a 120 degree turn, Omega_2 is not
    R = np.array([[-0.5, -S3 / 2], [S3 / 2, -0.5]])
    assert set(map(tuple, np.round(o1.polygon.vertices @ R.T, 12))) == \
        set(map(tuple, np.round(o1.polygon.vertices, 12)))


def test_s10_counts_and_names():
    s10 = build_s10()
    names = [s.name for s in s10]
    assert names == [f"Omega_1{i}" for i in range(1, 5)] + [f"Omega_2{i}" for i in range(1, 7)]
    assert len({congruence_key(s.polygon) for s in s10}) == 10


def test_s10_diagonals_diameters_areas():
    for s in build_s10():
        np.testing.assert_allclose(diagonal_lengths(s), 0.75 + 1 / (2 * S3), atol=1e-12)
        assert diameter(s.polygon) <= 2 / S3 + 1e-15
        assert s.polygon.area < OMEGA.polygon.area


def test_s10_inside_hexagon_and_cuts_valid():
    for s in all_shapes():
        assert np.all(OMEGA.polygon.contains(s.polygon.vertices, tol=1e-12))
        for rec in s.provenance:
            assert rec.strip_width >= 1 - 1e-12
            assert rec.depth in (pytest.approx(FIRST_DEPTH, abs=1e-15), pytest.approx(SECOND_DEPTH, abs=1e-15))
    assert all(len(s.provenance) == 6 for s in build_s10())


def test_s10_deterministic():
    a, b = build_s10(), build_s10()
    for x, y in zip(a, b):
        assert dumps_shape(x) == dumps_shape(y)


def test_s10_areas_match_cut_formula():
    # A corner triangle of height h at a 120 degree vertex has area sqrt(3) h^2; a
    # trapezoid of height h behind a first cut of depth d has area sqrt(3) h (2d + h).
    # Each triangle adds one vertex to the 9-gon, a trapezoid adds none.
    base = build_two_shape_system()[0].polygon.area
    h, d = SECOND_DEPTH, FIRST_DEPTH
    for s in build_s10():
        n_tri = len(s.polygon) - 9
        expect = base - n_tri * S3 * h * h - (3 - n_tri) * S3 * h * (2 * d + h)
        assert s.polygon.area == pytest.approx(expect, abs=1e-12)


def test_s10_area_fixture():
    areas = {s.name: s.polygon.area for s in build_s10()}
    assert areas["Omega_11"] == pytest.approx(0.8168012911456746, abs=1e-12)
    assert areas["Omega_14"] == pytest.approx(0.7960753489819843, abs=1e-12)
    assert areas["Omega_21"] == pytest.approx(0.8271642622275195, abs=1e-12)


def test_json_round_trip():
    for s in all_shapes():
        data = json.loads(dumps_shape(s))
        assert set(data) == {"name", "vertices", "provenance"}
        back = CoveringShape.from_json(data)
        np.testing.assert_allclose(back.polygon.vertices, s.polygon.vertices, atol=1e-14)
        assert back.provenance == s.provenance


def test_shape_lookup():
    assert shape_by_name("Omega_23").name == "Omega_23"
    with pytest.raises(KeyError):
        shape_by_name("Omega_99")


def test_s10_runtime_fast():
    import time

    t = time.perf_counter()
    build_s10()
    assert time.perf_counter() - t < 1.0


def test_polygons_valid():
    for s in all_shapes():
        ConvexPolygon(s.polygon.vertices)
