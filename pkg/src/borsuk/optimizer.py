"""Multistart search for partitions of a convex polygon with small maximum part diameter.

Each restart packs ``k`` circles roughly (Adam ascent on the packing
objective), takes the clipped Voronoi diagram of the circle centres as the
initial partition, then keeps the combinatorial structure fixed while Adam
descends on the largest part diameter.  Boundary vertices are held on their
host edges by a quadratic penalty and snapped exactly at the end.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .geom2d import (
    EPS_CERT,
    ConvexPolygon,
    GeometryError,
    PartitionStructure,
    convex_hull,
    coverage_residual,
    diameter,
    snap_to_lines,
    voronoi_clipped,
)

log = logging.getLogger(__name__)


class OptimizationError(RuntimeError):
    """The objective became non-finite during refinement."""


class NoFeasibleResult(RuntimeError):
    def __init__(self, message: str, best_infeasible: "PartitionResult | None" = None):
        super().__init__(message)
        self.best_infeasible = best_infeasible


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_iter: int = 20000
    stop_window: int = 200
    stop_tol: float = 1e-10
    mu0: float = 10.0
    mu_growth: float = 10.0
    mu_every: int = 2000
    mu_cap: float = 1e8
    # step size for the circle-packing ascent
    pack_lr: float = 1e-2

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("moment decay rates must lie in (0, 1)")
        if self.lr <= 0 or self.pack_lr <= 0 or self.eps <= 0:
            raise ValueError("learning rates and eps must be positive")
        if self.max_iter < 1 or self.stop_window < 1 or self.mu_every < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass(frozen=True)
class SearchConfig:
    k: int
    restarts: int = 100
    pack_steps: int = 1000
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.k < 1 or self.restarts < 1 or self.pack_steps < 1:
            raise ValueError("k, restarts and pack_steps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class PartitionResult:
    structure: PartitionStructure
    rho: float
    part_diameters: list[float]
    constraint_residual: float
    containment_residual: float
    coverage_residual: float
    seed: int | None = None
    restart: int | None = None
    iterations: int = 0
    objective: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return (self.constraint_residual <= EPS_CERT
                and self.containment_residual <= EPS_CERT
                and self.coverage_residual <= EPS_CERT * self.structure.host.area)

    def residuals(self) -> dict:
        return {"constraint": self.constraint_residual,
                "containment": self.containment_residual,
                "coverage": self.coverage_residual}

    def to_json(self, shape: str | None = None) -> dict:
        st = self.structure
        return {
            "shape": shape,
            "k": len(st.parts),
            "seed": self.seed,
            "restart": self.restart,
            "rho": self.rho,
            "feasible": self.feasible,
            "part_diameters": list(self.part_diameters),
            "parts": [list(map(int, J)) for J in st.parts],
            "vertices": st.X.tolist(),
            "incidences": [list(map(int, e)) for e in st.E],
            "host": st.host.vertices.tolist(),
            "residuals": self.residuals(),
            "iterations": self.iterations,
        }


def rng_for(seed: int, restart: int) -> np.random.Generator:
    """Per-restart PCG64 stream, seeded with ``seed + restart`` (mod 2**64)."""
    return np.random.Generator(np.random.PCG64((seed + restart) % 2**64))


# -- packing ---------------------------------------------------------------

def psi(V, host: ConvexPolygon) -> float:
    """Packing objective: the smaller of the least signed edge distance and
    half the least centre spacing."""
    V = np.asarray(V, dtype=float).reshape(-1, 2)
    C, B = host.line_arrays()
    val, *_ = _kernels.psi_active(V, C, B)
    return float(val)


def pack_circles(host: ConvexPolygon, k: int, steps: int, seed: int,
                 cfg: OptimizerConfig | None = None, restart: int = 0) -> np.ndarray:
    cfg = cfg or OptimizerConfig()
    rng = rng_for(seed, restart)
    V0 = rng.uniform(-1.0, 1.0, size=(k, 2))
    C, B = host.line_arrays()
    return _kernels.pack_loop(V0, C, B, steps, cfg.pack_lr, cfg.beta1, cfg.beta2, cfg.eps)


# -- partition objective -----------------------------------------------------

def pair_arrays(structure: PartitionStructure) -> tuple[np.ndarray, np.ndarray]:
    """All vertex pairs within parts, ordered by (part, p, q), first occurrence kept."""
    seen = set()
    P, Q = [], []
    for J in structure.parts:
        for p, q in sorted((min(a, b), max(a, b)) for i, a in enumerate(J) for b in J[i + 1:]):
            if (p, q) not in seen:
                seen.add((p, q))
                P.append(p)
                Q.append(q)
    return np.array(P, dtype=np.int64), np.array(Q, dtype=np.int64)


def phi(structure: PartitionStructure) -> float:
    P, Q = pair_arrays(structure)
    val, _ = _kernels.phi_active(structure.X, P, Q)
    return float(val)


def subgradient_phi(structure: PartitionStructure) -> np.ndarray:
    """Gradient of the active distance term; ties go to the smallest (part, p, q)."""
    P, Q = pair_arrays(structure)
    _, a = _kernels.phi_active(structure.X, P, Q)
    p, q = P[a], Q[a]
    d = structure.X[p] - structure.X[q]
    n = float(np.hypot(*d))
    if n == 0.0:
        raise GeometryError("active pair has coincident vertices")
    g = np.zeros_like(structure.X)
    g[p] = d / n
    g[q] = -d / n
    return g


def _constraint_arrays(structure: PartitionStructure):
    r = len(structure.X)
    kind = np.zeros(r, dtype=np.int64)
    line1 = np.zeros(r, dtype=np.int64)
    line2 = np.zeros(r, dtype=np.int64)
    for s, t in structure.E:
        if kind[s] == 0:
            line1[s] = t
        elif kind[s] == 1:
            line2[s] = t
        kind[s] += 1
    # more than two lines only happens at a corner: keep it frozen
    kind = np.minimum(kind, 2)
    return kind, line1, line2


def refine_partition(structure: PartitionStructure, host: ConvexPolygon | None = None,
                     cfg: OptimizerConfig | None = None) -> PartitionResult:
    """Local descent on the largest part diameter with the partition structure fixed."""
    cfg = cfg or OptimizerConfig()
    host = host or structure.host
    P, Q = pair_arrays(structure)
    kind, line1, line2 = _constraint_arrays(structure)
    C, B = host.line_arrays()
    if np.all(kind == 2):
        X, it = snap_to_lines(structure.X, structure.E, C, B), 0
    else:
        X, _, it, ok = _kernels.refine_loop(
            np.ascontiguousarray(structure.X, dtype=float), P, Q, kind, line1, C, B, line2,
            cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.max_iter, cfg.stop_window, cfg.stop_tol,
            cfg.mu0, cfg.mu_growth, cfg.mu_every, cfg.mu_cap)
        if not ok:
            raise OptimizationError("objective became non-finite")
    X = snap_to_lines(X, structure.E, C, B)
    out = certify(host, structure.with_X(X))
    out.iterations = int(it)
    out.objective = phi(out.structure)
    return out


def certify(host: ConvexPolygon, structure: PartitionStructure) -> PartitionResult:
    """Recompute every accepted number from raw coordinates.

    Parts are taken as the convex hulls of their vertices, so the diameters are
    set diameters and the coverage check applies to the sets actually used.
    """
    X = np.asarray(structure.X, dtype=float)
    hulls = []
    diams = []
    for J in structure.parts:
        h = convex_hull(X[J])
        diams.append(diameter(h) if len(h) >= 2 else 0.0)
        if len(h) >= 3:
            try:
                hulls.append(ConvexPolygon(h))
            except GeometryError:
                pass
    C, B = host.line_arrays()
    vals = X @ C.T + B
    constraint = max((abs(vals[s, t]) for s, t in structure.E), default=0.0)
    containment = max(0.0, -float(vals.min())) if vals.size else 0.0
    coverage = coverage_residual(host, hulls)
    return PartitionResult(structure=structure, rho=max(diams), part_diameters=diams,
                           constraint_residual=float(constraint),
                           containment_residual=containment, coverage_residual=coverage)


# -- multistart search -------------------------------------------------------

def initial_structure(host: ConvexPolygon, k: int, pack_steps: int, seed: int, restart: int,
                      cfg: OptimizerConfig) -> PartitionStructure | None:
    """Packing followed by clipped Voronoi; ``None`` for a degenerate draw."""
    V = pack_circles(host, k, pack_steps, seed, cfg, restart)
    try:
        st = voronoi_clipped(V, host)
    except GeometryError:
        return None
    if len(st.parts) != k or any(len(J) < 3 for J in st.parts):
        return None
    return st


def _descend(host: ConvexPolygon, scfg: SearchConfig, cfg: OptimizerConfig,
             indices: list[int]) -> list[tuple]:
    """Run packing, Voronoi and descent for each restart; ``(i, structure, X, val, it)``
    per restart, with ``structure = None`` for a discarded draw."""
    out = []
    C, B = host.line_arrays()
    for i in indices:
        st = initial_structure(host, scfg.k, scfg.pack_steps, scfg.seed, i, cfg)
        if st is None:
            out.append((i, None, None, 0.0, 0))
            continue
        P, Q = pair_arrays(st)
        kind, line1, line2 = _constraint_arrays(st)
        X, val, it, ok = _kernels.refine_loop(
            st.X, P, Q, kind, line1, C, B, line2,
            cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.max_iter, cfg.stop_window, cfg.stop_tol,
            cfg.mu0, cfg.mu_growth, cfg.mu_every, cfg.mu_cap)
        out.append((i, st if ok else None, X, float(val), int(it)))
    return out


def _worker(args):
    host_vertices, scfg, cfg, indices = args
    return _descend(ConvexPolygon(host_vertices), scfg, cfg, indices)


def search(host: ConvexPolygon, scfg: SearchConfig, cfg: OptimizerConfig | None = None) -> PartitionResult:
    """Run ``scfg.restarts`` independent restarts and return the best certified feasible result.

    Descents may run in parallel, but certification always walks the restarts
    in index order, so the answer does not depend on ``scfg.jobs``.
    """
    cfg = cfg or OptimizerConfig()
    if scfg.k == 1:
        st = voronoi_clipped([host.centroid], host)
        res = certify(host, st)
        res.seed, res.restart = scfg.seed, 0
        return res
    indices = list(range(scfg.restarts))
    if scfg.jobs > 1:
        chunks = [indices[j::scfg.jobs] for j in range(scfg.jobs)]
        with ProcessPoolExecutor(max_workers=scfg.jobs) as pool:
            runs = [r for part in pool.map(_worker, [(host.vertices, scfg, cfg, c) for c in chunks if c])
                    for r in part]
        runs.sort(key=lambda r: r[0])
    else:
        runs = _descend(host, scfg, cfg, indices)

    C, B = host.line_arrays()
    best = best_bad = None
    discarded = 0
    for i, st, X, val, it in runs:
        if st is None:
            discarded += 1
            continue
        # Only a restart that can beat the incumbent is worth certifying.
        if best is not None and val >= best.rho:
            continue
        res = certify(host, st.with_X(snap_to_lines(X, st.E, C, B)))
        res.seed, res.restart, res.iterations, res.objective = scfg.seed, i, it, val
        if res.feasible:
            if best is None or res.rho < best.rho:
                best = res
        elif best_bad is None or res.rho < best_bad.rho:
            best_bad = res
    if discarded:
        log.info("%d of %d restarts discarded as degenerate", discarded, scfg.restarts)
    if best is None:
        raise NoFeasibleResult(f"all {scfg.restarts} restarts infeasible", best_bad)
    best.extra["discarded"] = discarded
    return best


def config_dict(scfg: SearchConfig, cfg: OptimizerConfig) -> dict:
    d = {"search": asdict(scfg), "optimizer": asdict(cfg)}
    d["search"].pop("jobs")
    return d
