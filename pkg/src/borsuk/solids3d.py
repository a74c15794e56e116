"""Four-part partitions of the truncated rhombic dodecahedron by six planes through a point.

The body is the rhombic dodecahedron whose twelve faces lie at distance 1/2
from the centre, cut by the six coordinate planes at distance 1/2, so its
width is 1 in all eighteen face-normal directions.

A plane partition is parametrised by an apex ``p`` and a frame of four vectors
``a_1..a_4``; the plane between parts ``i`` and ``j`` passes through ``p`` with
unit normal ``n_ij = (a_i - a_j) / |a_i - a_j|``.  Cell ``i`` is where
``(x - p, a_i)`` is largest, so the four cells always tile the body.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .optimizer import NoFeasibleResult, OptimizerConfig, SearchConfig, rng_for

log = logging.getLogger(__name__)

PAIRS = list(itertools.combinations(range(4), 2))
FACE_TOL = 1e-9


class PolyhedronError(ValueError):
    pass


@dataclass
class ConvexPolyhedron:
    """Vertices plus faces as counterclockwise (seen from outside) index loops."""

    vertices: np.ndarray
    faces: list[list[int]]

    @classmethod
    def from_halfspaces(cls, A, h, tol: float = 1e-10) -> "ConvexPolyhedron | None":
        """``{x : A x <= h}``; ``None`` when it has no interior."""
        A = np.asarray(A, dtype=float)
        h = np.asarray(h, dtype=float)
        pts = []
        for i, j, k in itertools.combinations(range(len(A)), 3):
            N = A[[i, j, k]]
            if abs(np.linalg.det(N)) < 1e-12:
                continue
            x = np.linalg.solve(N, h[[i, j, k]])
            if np.all(A @ x <= h + tol) and not any(np.max(np.abs(x - q)) <= 1e-9 for q in pts):
                pts.append(x)
        if len(pts) < 4:
            return None
        V = np.array(pts)
        if np.linalg.matrix_rank(V[1:] - V[0], tol=1e-9) < 3:
            return None
        faces = []
        seen = set()
        for t in range(len(A)):
            on = np.nonzero(np.abs(V @ A[t] - h[t]) <= 1e-9)[0]
            key = tuple(on)
            if len(on) < 3 or key in seen:
                continue
            seen.add(key)
            faces.append(_order_face(V, on, A[t]))
        poly = cls(V, faces)
        return poly

    @property
    def euler_characteristic(self) -> int:
        edges = {tuple(sorted((f[i], f[(i + 1) % len(f)]))) for f in self.faces for i in range(len(f))}
        return len(self.vertices) - len(edges) + len(self.faces)

    def face_planes(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals and offsets of the faces."""
        N, H = [], []
        c = self.vertices.mean(axis=0)
        for f in self.faces:
            P = self.vertices[f]
            n = np.zeros(3)
            for i in range(len(P)):
                n += np.cross(P[i], P[(i + 1) % len(P)])
            n /= np.linalg.norm(n)
            if n @ (P[0] - c) < 0:
                n = -n
            N.append(n)
            H.append(float(n @ P[0]))
        return np.array(N), np.array(H)

    def volume(self) -> float:
        """Divergence theorem: one third of the sum over faces of (area vector . point)."""
        total = 0.0
        for f in self.faces:
            P = self.vertices[f]
            s = np.zeros(3)
            for i in range(len(P)):
                s += np.cross(P[i], P[(i + 1) % len(P)])
            total += s @ P[0]
        return total / 6.0

    def validate(self, tol: float = FACE_TOL) -> None:
        N, H = self.face_planes()
        if np.any(self.vertices @ N.T - H > tol):
            raise PolyhedronError("vertex outside a face plane")
        for f, n, hh in zip(self.faces, N, H):
            if np.any(np.abs(self.vertices[f] @ n - hh) > tol):
                raise PolyhedronError("non-planar face")
        if self.euler_characteristic != 2:
            raise PolyhedronError("Euler characteristic is not 2")

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist(), "faces": [list(map(int, f)) for f in self.faces]}

    def to_obj(self) -> str:
        lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in self.vertices]
        for f in self.faces:
            for i in range(1, len(f) - 1):
                lines.append(f"f {f[0] + 1} {f[i] + 1} {f[i + 1] + 1}")
        return "\n".join(lines) + "\n"


def _order_face(V, idx, normal):
    P = V[idx]
    c = P.mean(axis=0)
    u = P[0] - c
    u /= np.linalg.norm(u)
    w = np.cross(normal, u)
    ang = np.arctan2((P - c) @ w, (P - c) @ u)
    return [int(i) for i in idx[np.argsort(ang)]]


def trd_halfspaces() -> tuple[np.ndarray, np.ndarray]:
    normals = []
    for i, j in itertools.combinations(range(3), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            n = np.zeros(3)
            n[i], n[j] = si, sj
            normals.append(n / math.sqrt(2))
    for i in range(3):
        for s in (1, -1):
            n = np.zeros(3)
            n[i] = s
            normals.append(n)
    A = np.array(normals)
    return A, np.full(len(A), 0.5)


def build_trd() -> ConvexPolyhedron:
    A, h = trd_halfspaces()
    return ConvexPolyhedron.from_halfspaces(A, h)


def diameter3(poly: ConvexPolyhedron | np.ndarray) -> float:
    V = poly.vertices if isinstance(poly, ConvexPolyhedron) else np.asarray(poly, dtype=float)
    if len(V) < 2:
        raise PolyhedronError("diameter needs at least 2 points")
    best = 0.0
    for i in range(len(V) - 1):
        d = V[i + 1:] - V[i]
        best = max(best, float(np.sqrt(np.max(np.sum(d * d, axis=1)))))
    return best


def width(poly: ConvexPolyhedron, direction) -> float:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    proj = poly.vertices @ d
    return float(proj.max() - proj.min())


@dataclass
class PlanePartitionParams:
    """Apex and the six unit normals ``normals[(i, j)]`` for ``i < j``; ``n_ji = -n_ij``."""

    apex: np.ndarray
    normals: dict[tuple[int, int], np.ndarray]
    frame: np.ndarray | None = None

    @classmethod
    def from_frame(cls, apex, frame) -> "PlanePartitionParams":
        a = np.asarray(frame, dtype=float)
        normals = {}
        for i, j in PAIRS:
            d = a[i] - a[j]
            normals[i, j] = d / np.linalg.norm(d)
        return cls(np.asarray(apex, dtype=float), normals, a)

    def normal(self, i: int, j: int) -> np.ndarray:
        return self.normals[i, j] if i < j else -self.normals[j, i]

    def validate(self) -> None:
        for n in self.normals.values():
            if abs(np.linalg.norm(n) - 1.0) > 1e-12:
                raise ValueError("normals must be unit vectors")

    def to_json(self) -> dict:
        return {"apex": self.apex.tolist(),
                "normals": {f"{i}{j}": n.tolist() for (i, j), n in self.normals.items()},
                "frame": None if self.frame is None else self.frame.tolist()}


def cells_from_planes(host: ConvexPolyhedron, params: PlanePartitionParams) -> list[ConvexPolyhedron | None]:
    """Cell ``i`` = host cut by ``(x - p, n_ij) >= 0`` for every ``j != i``; empty cells are ``None``."""
    params.validate()
    HN, HH = host.face_planes()
    p = params.apex
    if np.any(HN @ p - HH >= 0):
        raise PolyhedronError("apex outside host")
    cells = []
    for i in range(4):
        rows = [-params.normal(i, j) for j in range(4) if j != i]
        A = np.vstack([HN, rows])
        h = np.concatenate([HH, [r @ p for r in rows]])
        cells.append(ConvexPolyhedron.from_halfspaces(A, h))
    return cells


@dataclass
class PartitionResult3D:
    params: PlanePartitionParams
    cells: list
    rho: float
    cell_diameters: list[float]
    volume_residual: float
    host_volume: float
    seed: int | None = None
    restart: int | None = None
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(c is not None for c in self.cells) and self.volume_residual <= 1e-8 * self.host_volume

    def to_json(self) -> dict:
        return {
            "dimension": 3,
            "shape": "TRD",
            "k": 4,
            "seed": self.seed,
            "restart": self.restart,
            "rho": self.rho,
            "feasible": self.feasible,
            "cell_diameters": self.cell_diameters,
            "params": self.params.to_json(),
            "cells": [None if c is None else c.to_json() for c in self.cells],
            "residuals": {"volume": self.volume_residual},
            "iterations": self.iterations,
        }


def certify3d(host: ConvexPolyhedron, params: PlanePartitionParams) -> PartitionResult3D:
    """Rebuild the cells in plain numpy and recompute diameters and volume balance."""
    cells = cells_from_planes(host, params)
    diams = [diameter3(c) if c is not None else 0.0 for c in cells]
    vol = host.volume()
    total = sum(c.volume() for c in cells if c is not None)
    return PartitionResult3D(params, cells, max(diams), diams, abs(total - vol), vol)


def pack_spheres(host: ConvexPolyhedron, k: int, steps: int, seed: int, restart: int,
                 cfg: OptimizerConfig) -> np.ndarray:
    HN, HH = host.face_planes()
    V0 = rng_for(seed, restart).uniform(-1.0, 1.0, size=(k, 3))
    return _kernels.pack_loop(V0, -HN, HH, steps, cfg.pack_lr, cfg.beta1, cfg.beta2, cfg.eps)


def circumcenter(P) -> np.ndarray:
    """Point equidistant from four points in general position."""
    P = np.asarray(P, dtype=float)
    M = 2.0 * (P[1:] - P[0])
    rhs = np.sum(P[1:] ** 2, axis=1) - np.sum(P[0] ** 2)
    return np.linalg.solve(M, rhs)


def initial_params(host: ConvexPolyhedron, scfg: SearchConfig, restart: int,
                   cfg: OptimizerConfig) -> PlanePartitionParams | None:
    """Voronoi partition of four packed sphere centres: its planes share the circumcentre."""
    V = pack_spheres(host, 4, scfg.pack_steps, scfg.seed, restart, cfg)
    try:
        p = circumcenter(V)
    except np.linalg.LinAlgError:
        return None
    HN, HH = host.face_planes()
    if not np.all(np.isfinite(p)) or np.any(HN @ p - HH >= -1e-9):
        return None
    return PlanePartitionParams.from_frame(p, V - V.mean(axis=0))


def refine_planes(host: ConvexPolyhedron, params: PlanePartitionParams,
                  cfg: OptimizerConfig) -> tuple[PlanePartitionParams, float, int]:
    HN, HH = host.face_planes()
    p, a, val, it = _kernels.plane_refine_loop(
        HN, HH, params.apex.copy(), params.frame.copy(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps,
        cfg.max_iter, cfg.stop_window, cfg.stop_tol)
    return PlanePartitionParams.from_frame(p, a), float(val), int(it)


def _descend3d(host_data, scfg: SearchConfig, cfg: OptimizerConfig, indices: list[int]) -> list[tuple]:
    host = ConvexPolyhedron(*host_data)
    HN, HH = host.face_planes()
    out = []
    for i in indices:
        params = initial_params(host, scfg, i, cfg)
        if params is None:
            out.append((i, None, None, math.inf, 0))
            continue
        p, a, val, it = _kernels.plane_refine_loop(
            HN, HH, params.apex.copy(), params.frame.copy(), cfg.lr, cfg.beta1, cfg.beta2,
            cfg.eps, cfg.max_iter, cfg.stop_window, cfg.stop_tol)
        out.append((i, p, a, float(val), int(it)))
    return out


def _worker3d(args):
    return _descend3d(*args)


def search3d_planes(host: ConvexPolyhedron, scfg: SearchConfig,
                    cfg: OptimizerConfig | None = None) -> PartitionResult3D:
    """Multistart search over apex and frame; best certified feasible result by (rho, restart).

    Descents may run in ``scfg.jobs`` processes; certification walks the
    restarts in index order so the result does not depend on the job count.
    """
    cfg = cfg or OptimizerConfig(lr=3e-3, max_iter=3000, stop_window=100, stop_tol=1e-7, pack_lr=1e-2)
    if scfg.k != 4:
        raise ValueError("the plane partition has exactly four parts")
    host_data = (host.vertices, host.faces)
    indices = list(range(scfg.restarts))
    if scfg.jobs > 1:
        chunks = [indices[j::scfg.jobs] for j in range(scfg.jobs)]
        with ProcessPoolExecutor(max_workers=scfg.jobs) as pool:
            runs = [r for part in pool.map(_worker3d, [(host_data, scfg, cfg, c) for c in chunks if c])
                    for r in part]
        runs.sort(key=lambda r: r[0])
    else:
        runs = _descend3d(host_data, scfg, cfg, indices)
    best = None
    accepted = []  # (restart, rho, volume residual) of every incumbent
    HN, HH = host.face_planes()
    for i, p, a, val, it in runs:
        if not math.isfinite(val) or (best is not None and val >= best.rho):
            continue
        if np.any(HN @ p - HH >= 0):
            continue
        res = certify3d(host, PlanePartitionParams.from_frame(p, a))
        res.seed, res.restart, res.iterations = scfg.seed, i, it
        if res.feasible and (best is None or res.rho < best.rho):
            best = res
            accepted.append((i, res.rho, res.volume_residual))
            log.info("restart %d: rho=%.6f", i, res.rho)
    if best is None:
        raise NoFeasibleResult(f"no feasible plane partition in {scfg.restarts} restarts")
    best.extra["accepted"] = accepted
    return best


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


# -- overlapping covers ----------------------------------------------------------

def host_samples(host: ConvexPolyhedron, face_spacing: float = 0.02,
                 interior_spacing: float = 0.05) -> np.ndarray:
    """Host vertices, a lattice on every face and an interior lattice."""
    pts = [host.vertices]
    N, H = host.face_planes()
    for f, n in zip(host.faces, N):
        P = host.vertices[f]
        u = P[1] - P[0]
        u /= np.linalg.norm(u)
        w = np.cross(n, u)
        cu, cw = (P - P[0]) @ u, (P - P[0]) @ w
        gu = np.arange(cu.min(), cu.max() + 1e-12, face_spacing)
        gw = np.arange(cw.min(), cw.max() + 1e-12, face_spacing)
        U, W = np.meshgrid(gu, gw)
        Q = P[0] + U.reshape(-1, 1) * u + W.reshape(-1, 1) * w
        pts.append(Q[np.all(Q @ N.T - H <= 1e-12, axis=1)])
    lo, hi = host.vertices.min(axis=0), host.vertices.max(axis=0)
    axes = [np.arange(lo[i], hi[i] + 1e-12, interior_spacing) for i in range(3)]
    G = np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, 3)
    pts.append(G[np.all(G @ N.T - H <= 0, axis=1)])
    return np.vstack(pts)


def _hull_planes(P):
    from scipy.spatial import ConvexHull

    hull = ConvexHull(P)
    return hull.equations[:, :3], -hull.equations[:, 3], hull.simplices


def cover_margins(clouds, samples) -> np.ndarray:
    """Per sample, the smallest over clouds of the largest facet excess (<= 0 means covered)."""
    best = np.full(len(samples), np.inf)
    for P in clouds:
        N, H, _ = _hull_planes(P)
        best = np.minimum(best, np.max(samples @ N.T - H, axis=1))
    return best


@dataclass
class CoverResult:
    clouds: list[np.ndarray]
    rho: float
    cloud_diameters: list[float]
    max_uncovered_margin: float
    n_samples: int
    seed: int | None = None
    iterations: int = 0
    note: str = "coverage certified on a finite sample only"

    @property
    def feasible(self) -> bool:
        return self.max_uncovered_margin <= 1e-12

    def to_json(self) -> dict:
        return {"dimension": 3, "shape": "TRD", "k": len(self.clouds), "mode": "cover",
                "seed": self.seed, "rho": self.rho, "feasible": self.feasible,
                "cloud_diameters": self.cloud_diameters,
                "clouds": [c.tolist() for c in self.clouds],
                "residuals": {"max_uncovered_margin": self.max_uncovered_margin,
                              "n_samples": self.n_samples},
                "iterations": self.iterations, "note": self.note}


def certify_cover(clouds, samples) -> CoverResult:
    diams = [diameter3(c) for c in clouds]
    margin = float(np.max(cover_margins(clouds, samples)))
    return CoverResult([np.array(c) for c in clouds], max(diams), diams, max(margin, 0.0), len(samples))


def search3d_cover(host: ConvexPolyhedron, scfg: SearchConfig, cfg: OptimizerConfig | None = None,
                   *, steps: int = 1500, mu: float = 50.0, mu_growth: float = 2.0,
                   mu_every: int = 100, inflate: float = 1.003,
                   samples: np.ndarray | None = None,
                   start: PartitionResult3D | None = None) -> CoverResult:
    """Let the parts of the best plane partition overlap.

    Every cloud is first inflated about its centroid by ``inflate``; cloud
    vertices then move by Adam on the largest cloud diameter plus a squared
    penalty on uncovered samples; the best sample-covering iterate is kept.
    """
    cfg = cfg or OptimizerConfig(lr=1e-3)
    samples = host_samples(host) if samples is None else samples
    if start is None:
        start = search3d_planes(host, scfg)
    clouds = [c.vertices.copy() for c in start.cells]
    best = certify_cover(clouds, samples)
    # a tiling has no slack: grow every cloud a little so overlaps can form
    clouds = [c.mean(axis=0) + inflate * (c - c.mean(axis=0)) for c in clouds]
    best.seed = scfg.seed
    sizes = [len(c) for c in clouds]
    X = np.vstack(clouds)
    offsets = np.cumsum([0] + sizes)
    m = np.zeros_like(X)
    v = np.zeros_like(X)
    b1t = b2t = 1.0
    for it in range(1, steps + 1):
        if it % mu_every == 0:
            mu *= mu_growth
        parts = [X[offsets[i]:offsets[i + 1]] for i in range(len(sizes))]
        g = np.zeros_like(X)
        # diameter term: active pair of the widest cloud
        diams = []
        for i, P in enumerate(parts):
            D = np.linalg.norm(P[:, None] - P[None], axis=2)
            s, t = np.unravel_index(np.argmax(D), D.shape)
            diams.append((D[s, t], i, s, t))
        d, i, s, t = max(diams)
        e = (parts[i][s] - parts[i][t]) / d
        g[offsets[i] + s] += e
        g[offsets[i] + t] -= e
        # coverage term: push the facets of the nearest cloud out over uncovered samples
        excess = np.full(len(samples), np.inf)
        owner = np.zeros(len(samples), dtype=int)
        facet = np.zeros(len(samples), dtype=int)
        planes = []
        for c, P in enumerate(parts):
            N, H, S = _hull_planes(P)
            planes.append((N, S))
            vals = samples @ N.T - H
            f = np.argmax(vals, axis=1)
            ex = vals[np.arange(len(samples)), f]
            better = ex < excess
            excess[better], owner[better], facet[better] = ex[better], c, f[better]
        for q in np.nonzero(excess > 0)[0]:
            N, S = planes[owner[q]]
            n = N[facet[q]]
            for vert in S[facet[q]]:
                g[offsets[owner[q]] + vert] -= 2 * mu * excess[q] * n / 3
        b1t *= cfg.beta1
        b2t *= cfg.beta2
        _kernels.adam_update(X, g, m, v, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, b1t, b2t)
        if np.all(excess <= 1e-12) and d < best.rho:
            cand = certify_cover([p.copy() for p in parts], samples)
            if cand.feasible and cand.rho < best.rho:
                cand.seed, cand.iterations = scfg.seed, it
                best = cand
    return best
