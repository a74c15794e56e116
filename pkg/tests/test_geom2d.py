import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borsuk.geom2d import (
    ConvexPolygon,
    GeometryError,
    HalfPlane,
    clip_halfplane,
    congruence_key,
    convex_hull,
    coverage_residual,
    diameter,
    voronoi_cells,
    voronoi_clipped,
)
from borsuk.ucs import build_s10, build_two_shape_system, pal_hexagon

SQUARE = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
OMEGA = pal_hexagon().polygon


def random_polygon(rng, n=12):
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    rad = rng.uniform(0.5, 1.0, n)
    return ConvexPolygon(convex_hull(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])))


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# -- polygon basics -------------------------------------------------------------

def test_polygon_is_normalized_ccw():
    P = ConvexPolygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert P.area == pytest.approx(1.0)
    assert ConvexPolygon(P.vertices[::-1]).area == pytest.approx(1.0)


def test_nonconvex_polygon_rejected():
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (2, 0), (1, 0.2), (1, 2)])


def test_too_few_vertices_rejected():
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (1, 0)])


def test_halfplane_requires_unit_normal():
    with pytest.raises(ValueError):
        HalfPlane((1.0, 1.0), 0.0)


# -- diameter -------------------------------------------------------------------

def test_diameter_unit_square():
    assert diameter(SQUARE) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_diameter_pal_hexagon():
    assert diameter(OMEGA) == pytest.approx(2 / math.sqrt(3), abs=1e-15)


def test_diameter_degenerate_input():
    with pytest.raises(GeometryError):
        diameter(np.array([[0.0, 0.0]]))


@pytest.mark.parametrize("seed", range(5))
def test_diameter_matches_dense_boundary_sampling(seed):
    P = random_polygon(np.random.default_rng(seed))
    V = P.vertices
    t = np.linspace(0, 1, 200, endpoint=False)[:, None]
    samples = np.vstack([V[i] + t * (V[(i + 1) % len(V)] - V[i]) for i in range(len(V))])
    D = np.linalg.norm(samples[:, None] - samples[None], axis=2)
    assert abs(diameter(P) - D.max()) <= 1e-9


# -- clipping ---------------------------------------------------------------------

def test_clip_redundant_constraint():
    out = clip_halfplane(SQUARE, HalfPlane((1.0, 0.0), 0.0))
    np.testing.assert_allclose(out.vertices, SQUARE.vertices)


def test_clip_half_square():
    out = clip_halfplane(SQUARE, HalfPlane((-1.0, 0.0), 0.5))
    assert out.area == pytest.approx(0.5, abs=1e-15)
    assert np.all(out.vertices[:, 0] <= 0.5 + 1e-12)


def test_clip_supporting_line_keeps_hexagon():
    for h in OMEGA.halfplanes():
        out = clip_halfplane(OMEGA, h)
        assert out.area == pytest.approx(OMEGA.area, abs=1e-15)
        assert len(out) == 6


def test_clip_to_empty():
    assert clip_halfplane(SQUARE, HalfPlane((1.0, 0.0), -2.0)) is None
    # touching the square at an edge leaves zero area
    assert clip_halfplane(SQUARE, HalfPlane((-1.0, 0.0), 0.0)) is None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 2 * math.pi), st.floats(-0.8, 0.8))
def test_clip_monotone_diameter_and_subset(seed, theta, offset):
    P = random_polygon(np.random.default_rng(seed))
    h = HalfPlane((math.cos(theta), math.sin(theta)), offset)
    out = clip_halfplane(P, h)
    if out is None:
        return
    assert diameter(out) <= diameter(P) + 1e-12
    assert np.all(h.value(out.vertices) >= -1e-12)
    assert np.all(P.contains(out.vertices, tol=1e-12))


# -- Voronoi ------------------------------------------------------------------------

def test_voronoi_single_site_is_host():
    st_ = voronoi_clipped([(0.1, -0.05)], OMEGA)
    assert len(st_.parts) == 1
    assert ConvexPolygon(st_.X[st_.parts[0]]).area == pytest.approx(OMEGA.area, abs=1e-15)
    assert {t for _, t in st_.E} == set(range(6))


def test_voronoi_two_sites_in_square():
    st_ = voronoi_clipped([(0.25, 0.5), (0.75, 0.5)], SQUARE)
    polys = [ConvexPolygon(st_.X[J]) for J in st_.parts]
    for p in polys:
        assert p.area == pytest.approx(0.5, abs=1e-9)
    assert congruence_key(polys[0], quantum=1e-6) == congruence_key(polys[1], quantum=1e-6)


def brute_force_cell(sites, i, host, n=60):
    """Cell i as the hull of grid points and host vertices nearest to site i (a coarse oracle)."""
    g = np.linspace(-0.6, 0.6, n)
    G = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    G = G[host.contains(G, tol=0)]
    d = np.linalg.norm(G[:, None] - sites[None], axis=2)
    return G[np.argmin(d, axis=1) == i]


def test_voronoi_seven_sites_tile_and_match_independent_cells():
    rng = np.random.default_rng(7)
    sites = []
    while len(sites) < 7:
        p = rng.uniform(-0.5, 0.5, 2)
        if OMEGA.contains(p[None], tol=-0.02)[0]:
            sites.append(p)
    sites = np.array(sites)
    st_ = voronoi_clipped(sites, OMEGA)
    st_.validate()
    polys = [ConvexPolygon(st_.X[J]) for J in st_.parts]
    assert abs(sum(p.area for p in polys) - OMEGA.area) <= 1e-9
    # independent construction: intersect the host with every bisector half-plane,
    # with vertices compared against the shared-vertex structure
    for i, (p, q) in enumerate(zip(polys, voronoi_cells(sites, OMEGA))):
        assert p.contains(sites[i][None])[0]
        assert abs(p.area - q.area) <= 1e-9
        # grid points strictly nearest to site i lie in cell i
        pts = brute_force_cell(sites, i, OMEGA)
        assert np.all(p.contains(pts, tol=1e-9))
    assert coverage_residual(OMEGA, polys) <= 1e-9


def test_voronoi_rejects_duplicate_and_outside_sites():
    with pytest.raises(GeometryError):
        voronoi_clipped([(0, 0), (0, 0)], OMEGA)
    with pytest.raises(GeometryError):
        voronoi_clipped([(0, 0), (2, 0)], OMEGA)


def test_voronoi_cocircular_sites_resolved_by_jitter():
    sites = [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)]
    st_ = voronoi_clipped(sites, SQUARE)
    st_.validate()
    assert sum(ConvexPolygon(st_.X[J]).area for J in st_.parts) == pytest.approx(1.0, abs=1e-9)


# -- congruence --------------------------------------------------------------------

def test_congruence_rotated_reflected_hexagon():
    V = OMEGA.vertices @ rotation(math.radians(17)).T
    V = V * np.array([-1.0, 1.0])
    assert congruence_key(ConvexPolygon(V)) == congruence_key(OMEGA)


def test_congruence_distinguishes_two_shape_system():
    o1, o2 = build_two_shape_system()
    assert congruence_key(o1.polygon) != congruence_key(o2.polygon)


def test_congruence_s10_has_ten_classes():
    assert len({congruence_key(s.polygon) for s in build_s10()}) == 10


def test_congruence_chiral_pair_is_congruent_under_reflection():
    P = ConvexPolygon([(0, 0), (3, 0), (1, 2)])
    Q = ConvexPolygon([(0, 0), (-3, 0), (-1, 2)])
    assert congruence_key(P) == congruence_key(Q)
    assert congruence_key(P) != congruence_key(ConvexPolygon([(0, 0), (3, 0), (1.1, 2)]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 2 * math.pi), st.booleans(),
       st.floats(-5, 5), st.floats(-5, 5))
def test_congruence_isometry_invariance(seed, theta, reflect, dx, dy):
    P = random_polygon(np.random.default_rng(seed), n=8)
    V = P.vertices @ rotation(theta).T
    if reflect:
        V = V * np.array([1.0, -1.0])
    Q = ConvexPolygon(V + np.array([dx, dy]))
    # random coordinates: a coarse quantum keeps rounding off the bucket edges
    assert congruence_key(P, quantum=1e-6) == congruence_key(Q, quantum=1e-6)


# -- coverage ------------------------------------------------------------------------

def test_coverage_self():
    assert coverage_residual(OMEGA, [OMEGA]) == 0.0


def test_coverage_left_half():
    left = ConvexPolygon([(0, 0), (0.5, 0), (0.5, 1), (0, 1)])
    assert coverage_residual(SQUARE, [left]) == pytest.approx(0.5, abs=1e-15)


def test_coverage_of_voronoi_partition():
    sites = [(0.1, 0.1), (-0.2, 0.15), (0.05, -0.3), (0.3, -0.1)]
    st_ = voronoi_clipped(sites, OMEGA)
    polys = [ConvexPolygon(st_.X[J]) for J in st_.parts]
    assert coverage_residual(OMEGA, polys) <= 1e-9


def test_coverage_overlapping_parts_counted_once():
    a = ConvexPolygon([(0, 0), (0.7, 0), (0.7, 1), (0, 1)])
    b = ConvexPolygon([(0.3, 0), (0.9, 0), (0.9, 1), (0.3, 1)])
    assert coverage_residual(SQUARE, [a, b]) == pytest.approx(0.1, abs=1e-12)
