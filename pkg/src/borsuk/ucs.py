"""Universal covering systems built from the Pál hexagon by chord cuts.

A chord cut takes a shape ``M`` and a chord ``AB`` longer than 1, removes a
strip of depth ``depth_B`` at the ``B`` end to get ``M1`` and a strip of depth
``depth_A`` at the ``A`` end to get ``M2``.  As long as the retained middle
strip has width at least 1, any set of unit diameter covered by ``M`` is
covered by ``M1`` or ``M2``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geom2d import ConvexPolygon, GeometryError, HalfPlane, clip_halfplane, congruence_key

SQRT3 = math.sqrt(3.0)
HEX_SIDE = 1.0 / SQRT3
HEX_DIAGONAL = 2.0 / SQRT3
FIRST_DEPTH = (HEX_DIAGONAL - 1.0) / 2.0
FIRST_RETAINED = 0.5 + 1.0 / SQRT3
SECOND_DEPTH = 1.0 / (2.0 * SQRT3) - 0.25
SECOND_RETAINED = 0.75 + 1.0 / (2.0 * SQRT3)

WIDTH_TOL = 1e-12


class LemmaViolation(GeometryError):
    """A chord cut whose retained strip is narrower than 1."""


@dataclass(frozen=True)
class CutRecord:
    diagonal: int
    end: str  # "A" or "B": which end lost material
    depth: float
    chord: float
    strip_width: float

    def as_dict(self) -> dict:
        return {"diagonal": self.diagonal, "end": self.end, "depth": self.depth,
                "chord": self.chord, "strip_width": self.strip_width}


@dataclass
class CoveringShape:
    name: str
    polygon: ConvexPolygon
    provenance: list[CutRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "vertices": [[float(f"{x:.15g}"), float(f"{y:.15g}")] for x, y in self.polygon.vertices],
            "provenance": [c.as_dict() for c in self.provenance],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoveringShape":
        prov = [CutRecord(**c) for c in data.get("provenance", [])]
        return cls(data["name"], ConvexPolygon(data["vertices"]), prov)


@dataclass(frozen=True)
class CutSpec:
    A: tuple[float, float]
    B: tuple[float, float]
    depth_A: float
    depth_B: float
    diagonal: int = 0

    @property
    def chord(self) -> float:
        return math.dist(self.A, self.B)

    @property
    def strip_width(self) -> float:
        return self.chord - self.depth_A - self.depth_B

    def check(self) -> None:
        if self.depth_A < 0 or self.depth_B < 0:
            raise LemmaViolation("cut depths must be non-negative")
        if self.strip_width < 1.0 - WIDTH_TOL:
            raise LemmaViolation(
                f"retained strip {self.strip_width:.15g} is narrower than 1")


def pal_hexagon() -> CoveringShape:
    """Regular hexagon of width 1 centred at the origin, a main diagonal on the x-axis."""
    ang = np.arange(6) * math.pi / 3.0
    verts = HEX_SIDE * np.column_stack([np.cos(ang), np.sin(ang)])
    return CoveringShape("Omega", ConvexPolygon(verts))


def lemma1_cut(shape: CoveringShape, spec: CutSpec) -> tuple[CoveringShape, CoveringShape]:
    """Split ``shape`` along the chord ``spec.A``-``spec.B``.

    Returns ``(M1, M2)``: ``M1`` loses a strip of ``depth_B`` at the ``B`` end,
    ``M2`` loses ``depth_A`` at the ``A`` end.
    """
    spec.check()
    A = np.asarray(spec.A, dtype=float)
    B = np.asarray(spec.B, dtype=float)
    L = spec.chord
    u = (B - A) / L
    keep_B = HalfPlane.through(B - spec.depth_B * u, -u)
    keep_A = HalfPlane.through(A + spec.depth_A * u, u)

    def cut(h, depth, end):
        poly = clip_halfplane(shape.polygon, h) if depth > 0 else shape.polygon
        if poly is None:
            raise GeometryError("cut removed the whole shape")
        rec = CutRecord(spec.diagonal, end, depth, L, spec.strip_width)
        return CoveringShape(shape.name, poly, shape.provenance + ([rec] if depth > 0 else []))

    return cut(keep_B, spec.depth_B, "B"), cut(keep_A, spec.depth_A, "A")


def diagonal_directions() -> list[np.ndarray]:
    """Unit directions of the three main diagonals of the Pál hexagon."""
    return [np.array([math.cos(i * math.pi / 3), math.sin(i * math.pi / 3)]) for i in range(3)]


def chord_endpoints(poly: ConvexPolygon, direction) -> tuple[np.ndarray, np.ndarray]:
    """Where the line through the origin along ``direction`` leaves ``poly`` (backward, forward)."""
    d = np.asarray(direction, dtype=float)
    C, B = poly.line_arrays()
    cd = C @ d
    # (t d, c) + b >= 0 for all edges
    hi = min(-b / x for x, b in zip(cd, B) if x < -1e-15)
    lo = max(-b / x for x, b in zip(cd, B) if x > 1e-15)
    return lo * d, hi * d


def diagonal_lengths(shape: CoveringShape) -> list[float]:
    out = []
    for d in diagonal_directions():
        a, b = chord_endpoints(shape.polygon, d)
        out.append(float(np.linalg.norm(b - a)))
    return out


def _cut_along(shape: CoveringShape, diag: int, end: int, depth: float) -> CoveringShape:
    """Apply one chord cut along main diagonal ``diag`` and keep the piece
    that lost material at end ``end`` (0: backward end, 1: forward end)."""
    a, b = chord_endpoints(shape.polygon, diagonal_directions()[diag])
    spec = CutSpec(tuple(a), tuple(b), depth, depth, diagonal=diag)
    m1, m2 = lemma1_cut(shape, spec)
    return m1 if end == 1 else m2


def build_two_shape_system() -> list[CoveringShape]:
    """Cut a corner triangle at one end of each main diagonal of the hexagon."""
    omega = pal_hexagon()
    # Hexagon vertex i sits at angle 60*i; diagonal d joins vertices d and d+3.
    # Alternating corners 0, 2, 4 -> Omega_1; consecutive corners 0, 1, 2 -> Omega_2.
    choices = {"Omega_1": (1, 0, 1), "Omega_2": (1, 1, 1)}
    out = []
    for name, ends in choices.items():
        s = omega
        for diag, end in enumerate(ends):
            s = _cut_along(s, diag, end, FIRST_DEPTH)
        out.append(CoveringShape(name, s.polygon, s.provenance))
    return out


def build_s10() -> list[CoveringShape]:
    """Second-stage cuts of depth ``SECOND_DEPTH`` at one end of each diagonal,
    enumerated over all end choices and reduced modulo congruence."""
    system = []
    for base_index, base in enumerate(build_two_shape_system(), start=1):
        seen: dict[tuple, CoveringShape] = {}
        for ends in itertools.product((0, 1), repeat=3):
            s = base
            for diag, end in enumerate(ends):
                s = _cut_along(s, diag, end, SECOND_DEPTH)
            key = congruence_key(s.polygon)
            if key not in seen:
                seen[key] = s
        for n, s in enumerate(seen.values(), start=1):
            system.append(CoveringShape(f"Omega_{base_index}{n}", s.polygon, s.provenance))
    return system


def all_shapes() -> list[CoveringShape]:
    return [pal_hexagon(), *build_two_shape_system(), *build_s10()]


def shape_by_name(name: str) -> CoveringShape:
    for s in all_shapes():
        if s.name == name:
            return s
    raise KeyError(f"unknown shape {name!r}")


def dumps_shape(shape: CoveringShape) -> str:
    return json.dumps(shape.to_json(), indent=1, sort_keys=True)
