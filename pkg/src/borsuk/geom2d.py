"""Planar geometry kernel: convex polygons, half-planes, clipped Voronoi cells.

Everything works in double precision with two tolerance levels: ``EPS_BUILD``
for constructive predicates (clipping, merging) and ``EPS_CERT`` for
certification checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

EPS_BUILD = 1e-12
EPS_CERT = 1e-9
# Partition vertices closer than this are merged into one vertex of X.
MERGE_TOL = 1e-9
# Voronoi sites are jittered by this much to break cocircular ties.
SITE_JITTER = 1e-10


class GeometryError(ValueError):
    """Raised for degenerate or invalid geometric input."""


def _as_points(points) -> np.ndarray:
    arr = np.array(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise GeometryError("non-finite coordinates")
    return arr


def cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; returns the hull counterclockwise without
    collinear points."""
    pts = sorted(map(tuple, _as_points(points)))
    pts = [p for i, p in enumerate(pts) if i == 0 or p != pts[i - 1]]
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def half(seq):
        chain: list = []
        for p in seq:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


@dataclass(frozen=True)
class HalfPlane:
    """The closed half-plane ``(x, c) + b >= 0`` with unit normal ``c``."""

    c: tuple[float, float]
    b: float

    def __post_init__(self):
        if abs(math.hypot(*self.c) - 1.0) > 1e-12:
            raise GeometryError(f"half-plane normal is not unit: {self.c}")

    @classmethod
    def from_normal(cls, normal, offset: float) -> "HalfPlane":
        n = math.hypot(normal[0], normal[1])
        if n == 0.0:
            raise GeometryError("zero normal")
        return cls((normal[0] / n, normal[1] / n), offset / n)

    @classmethod
    def through(cls, point, normal) -> "HalfPlane":
        """Half-plane whose boundary passes through ``point``, interior along ``normal``."""
        n = math.hypot(normal[0], normal[1])
        c = (normal[0] / n, normal[1] / n)
        return cls(c, -(c[0] * point[0] + c[1] * point[1]))

    def value(self, points) -> np.ndarray | float:
        p = np.asarray(points, dtype=float)
        return p @ np.array(self.c) + self.b


class ConvexPolygon:
    """Counterclockwise convex polygon with at least three vertices."""

    __slots__ = ("vertices",)

    def __init__(self, vertices, *, check: bool = True):
        v = _as_points(vertices)
        if check:
            v = _normalize_ring(v)
        v.setflags(write=False)
        self.vertices = v

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"ConvexPolygon({self.vertices.tolist()!r})"

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        a = 3.0 * c.sum()
        return np.array([((v[:, 0] + w[:, 0]) * c).sum() / a, ((v[:, 1] + w[:, 1]) * c).sum() / a])

    def edges(self) -> Iterable[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    def halfplanes(self) -> list[HalfPlane]:
        """Edge lines as inward half-planes, edge ``t`` runs from vertex ``t`` to ``t+1``."""
        out = []
        for a, b in self.edges():
            d = b - a
            out.append(HalfPlane.through(a, (-d[1], d[0])))
        return out

    def line_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge lines as arrays ``C`` (m, 2) and ``B`` (m,)."""
        hp = self.halfplanes()
        return np.array([h.c for h in hp]), np.array([h.b for h in hp])

    def contains(self, points, tol: float = EPS_CERT) -> np.ndarray:
        C, B = self.line_arrays()
        vals = np.atleast_2d(np.asarray(points, dtype=float)) @ C.T + B
        return np.all(vals >= -tol, axis=1)

    def transformed(self, matrix, offset=(0.0, 0.0)) -> "ConvexPolygon":
        m = np.asarray(matrix, dtype=float)
        v = self.vertices @ m.T + np.asarray(offset, dtype=float)
        if np.linalg.det(m) < 0:
            v = v[::-1]
        return ConvexPolygon(v)


def _normalize_ring(v: np.ndarray) -> np.ndarray:
    keep = [v[0]]
    for p in v[1:]:
        if np.max(np.abs(p - keep[-1])) > EPS_BUILD:
            keep.append(p)
    while len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= EPS_BUILD:
        keep.pop()
    v = np.array(keep)
    if len(v) < 3:
        raise GeometryError("a polygon needs at least 3 distinct vertices")
    if signed_area(v) < 0:
        v = v[::-1].copy()
    n = len(v)
    for i in range(n):
        if cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) < -EPS_BUILD:
            raise GeometryError("polygon is not convex")
    return v


def diameter(poly: ConvexPolygon | np.ndarray) -> float:
    """Largest vertex-to-vertex distance; equals the set diameter for convex sets."""
    v = poly.vertices if isinstance(poly, ConvexPolygon) else _as_points(poly)
    if len(v) < 2:
        raise GeometryError("diameter needs at least 2 points")
    best = 0.0
    for i in range(len(v) - 1):
        d = v[i + 1:] - v[i]
        best = max(best, float(np.sqrt(np.max(d[:, 0] ** 2 + d[:, 1] ** 2))))
    return best


def clip_halfplane(poly: ConvexPolygon, h: HalfPlane) -> ConvexPolygon | None:
    """Intersection of ``poly`` with ``h``; ``None`` when it has zero area."""
    v = poly.vertices
    vals = h.value(v)
    if np.all(vals >= -EPS_BUILD):
        return poly
    if np.all(vals <= EPS_BUILD):
        return None
    out = []
    n = len(v)
    for i in range(n):
        j = (i + 1) % n
        a, fa = v[i], vals[i]
        b, fb = v[j], vals[j]
        if fa >= -EPS_BUILD:
            out.append(a)
        if (fa > EPS_BUILD and fb < -EPS_BUILD) or (fa < -EPS_BUILD and fb > EPS_BUILD):
            t = fa / (fa - fb)
            out.append(a + t * (b - a))
    if len(out) < 3:
        return None
    try:
        res = ConvexPolygon(np.array(out), check=True)
    except GeometryError:
        return None
    if res.area <= EPS_BUILD:
        return None
    return res


def clip_halfplanes(poly: ConvexPolygon | None, planes: Iterable[HalfPlane]) -> ConvexPolygon | None:
    for h in planes:
        if poly is None:
            return None
        poly = clip_halfplane(poly, h)
    return poly


def bisector_halfplane(site, other) -> HalfPlane:
    """Points at least as close to ``site`` as to ``other``."""
    site = np.asarray(site, dtype=float)
    other = np.asarray(other, dtype=float)
    mid = 0.5 * (site + other)
    return HalfPlane.through(mid, site - other)


@dataclass
class PartitionStructure:
    """Partition of ``host`` into polygons sharing the vertex array ``X``.

    ``parts[i]`` lists indices into ``X`` counterclockwise; ``E`` holds pairs
    ``(s, t)`` meaning vertex ``s`` lies on edge line ``t`` of ``host``.
    """

    X: np.ndarray
    parts: list[list[int]]
    E: list[tuple[int, int]]
    host: ConvexPolygon
    sites: np.ndarray | None = field(default=None, repr=False)

    @property
    def r(self) -> int:
        return len(self.X)

    @property
    def m(self) -> int:
        return len(self.host)

    def part_points(self, i: int) -> np.ndarray:
        return self.X[self.parts[i]]

    def validate(self, tol: float = 1e-9) -> None:
        r, m = len(self.X), len(self.host)
        for J in self.parts:
            if len(J) < 3:
                raise GeometryError("every part needs at least 3 vertices")
            if any(j < 0 or j >= r for j in J):
                raise GeometryError("part index out of range")
            pts = self.X[J]
            n = len(pts)
            for a in range(n):
                if cross(pts[a], pts[(a + 1) % n], pts[(a + 2) % n]) < -tol:
                    raise GeometryError("part vertices are not in convex position")
        for s, t in self.E:
            if not (0 <= s < r and 0 <= t < m):
                raise GeometryError(f"bad incidence {(s, t)}")

    def with_X(self, X: np.ndarray) -> "PartitionStructure":
        return PartitionStructure(np.array(X, dtype=float), [list(J) for J in self.parts],
                                  list(self.E), self.host, self.sites)


def voronoi_cells(sites, host: ConvexPolygon) -> list[ConvexPolygon | None]:
    """Voronoi cell of each site clipped to ``host``, by direct half-plane intersection."""
    sites = _as_points(sites)
    cells = []
    for i, s in enumerate(sites):
        planes = [bisector_halfplane(s, o) for j, o in enumerate(sites) if j != i]
        cells.append(clip_halfplanes(host, planes))
    return cells


def voronoi_clipped(sites, host: ConvexPolygon, *, jitter: bool = True,
                    check_inside: bool = True) -> PartitionStructure:
    """Clipped Voronoi diagram of ``sites`` in ``host`` as a shared-vertex partition."""
    sites = _as_points(sites)
    if len(sites) == 0:
        raise GeometryError("no sites")
    for a, b in combinations(range(len(sites)), 2):
        if np.linalg.norm(sites[a] - sites[b]) <= 1e-9:
            raise GeometryError(f"duplicate sites {a} and {b}")
    if check_inside:
        C, B = host.line_arrays()
        if np.any(sites @ C.T + B <= 0):
            raise GeometryError("site outside host")
    work = sites
    if jitter and len(sites) > 1:
        # Deterministic, seed-free jitter so equal inputs give equal structures.
        k = np.arange(len(sites), dtype=float)
        work = sites + SITE_JITTER * np.column_stack([np.sin(1.7 * k + 0.3), np.cos(2.3 * k + 0.1)])
    cells = voronoi_cells(work, host)
    if any(c is None for c in cells):
        raise GeometryError("empty Voronoi cell")
    return structure_from_polygons(cells, host, sites=sites)


def structure_from_polygons(polys: Sequence[ConvexPolygon], host: ConvexPolygon,
                            sites=None) -> PartitionStructure:
    """Merge coincident polygon corners into one vertex set and record host incidences."""
    X: list[np.ndarray] = []
    parts: list[list[int]] = []

    def index_of(p):
        for idx, q in enumerate(X):
            if abs(p[0] - q[0]) <= MERGE_TOL and abs(p[1] - q[1]) <= MERGE_TOL:
                return idx
        X.append(np.array(p, dtype=float))
        return len(X) - 1

    for poly in polys:
        J = []
        for p in poly.vertices:
            idx = index_of(p)
            if not J or J[-1] != idx:
                J.append(idx)
        if len(J) > 1 and J[0] == J[-1]:
            J.pop()
        parts.append(J)
    Xa = np.array(X)
    C, B = host.line_arrays()
    vals = Xa @ C.T + B
    E = [(int(s), int(t)) for s, t in zip(*np.nonzero(np.abs(vals) <= EPS_CERT))]
    # Snap boundary vertices exactly onto their host lines.
    Xa = snap_to_lines(Xa, E, C, B)
    return PartitionStructure(Xa, parts, E, host, None if sites is None else _as_points(sites))


def snap_to_lines(X: np.ndarray, E, C: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Project each constrained vertex onto its line, or onto the intersection
    of its lines when it carries two."""
    X = np.array(X, dtype=float)
    lines: dict[int, list[int]] = {}
    for s, t in E:
        lines.setdefault(s, []).append(t)
    for s, ts in lines.items():
        if len(ts) == 1:
            t = ts[0]
            X[s] -= (X[s] @ C[t] + B[t]) * C[t]
        else:
            t1, t2 = ts[0], ts[1]
            X[s] = np.linalg.solve(np.array([C[t1], C[t2]]), -np.array([B[t1], B[t2]]))
    return X


def congruence_key(poly: ConvexPolygon, quantum: float = 1e-9) -> tuple:
    """Canonical (edge length, interior angle) cycle, invariant under isometries."""
    v = poly.vertices
    n = len(v)
    seq = []
    for i in range(n):
        a, b, c = v[i - 1], v[i], v[(i + 1) % n]
        e1, e2 = b - a, c - b
        turn = math.atan2(e1[0] * e2[1] - e1[1] * e2[0], e1 @ e2)
        seq.append((round(math.hypot(*e2) / quantum), round((math.pi - turn) / quantum)))
    # seq[i] = (length of edge i -> i+1, angle at vertex i).
    # Reflection reverses traversal: edge lengths shift by one relative to angles.
    rev = [(seq[(i - 1) % n][0], seq[i][1]) for i in range(n)][::-1]
    best = None
    for cyc in (seq, rev):
        for s in range(n):
            cand = tuple(cyc[s:] + cyc[:s])
            if best is None or cand < best:
                best = cand
    return best


def convex_difference(a: ConvexPolygon, b: ConvexPolygon) -> list[ConvexPolygon]:
    """``a \\ b`` as interior-disjoint convex pieces."""
    pieces = []
    rest: ConvexPolygon | None = a
    for h in b.halfplanes():
        if rest is None:
            break
        outside = HalfPlane((-h.c[0], -h.c[1]), -h.b)
        piece = clip_halfplane(rest, outside)
        if piece is not None:
            pieces.append(piece)
        rest = clip_halfplane(rest, h)
    return pieces


def coverage_residual(host: ConvexPolygon, parts: Sequence[ConvexPolygon]) -> float:
    """Area of ``host`` not covered by the union of ``parts``.

    Host is cut along every part edge line; each resulting face is kept only
    if its centroid lies in no part.
    """
    faces = [host]
    for part in parts:
        nxt = []
        for f in faces:
            pieces = convex_difference(f, part)
            nxt.extend(pieces)
        faces = nxt
        if not faces:
            return 0.0
    total = 0.0
    for f in faces:
        c = f.centroid
        if not any(p.contains(c, tol=EPS_BUILD)[0] for p in parts):
            total += f.area
    return max(total, 0.0)
