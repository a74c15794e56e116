"""Lower bounds for covering the disk of unit diameter by k = 10, 11, 12 sets.

The disk ``D`` has centre ``O`` at the origin and radius 1/2.  For a covering
with ``c`` central sets, boundary points ``P_i`` of the extreme sets are at
most ``2 asin(sigma)`` apart in angle, and the points ``Q_i`` where the
``sigma``-circles around ``P_{i-1}``, ``P_{i+1}`` meet inside ``D`` all lie in
central sets.  The distance ``Q_2 Q_j`` is a function ``f(alpha, beta, gamma)``
of three angles; its extremal value decides whether ``sigma`` is a valid bound.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .geom2d import GeometryError

RADIUS = 0.5

# j(k, c): index of the second Q point
J_INDEX = {(10, 1): 6, (11, 1): 7, (11, 2): 6, (12, 1): 7, (12, 2): 6}

SIGMA = {10: 0.366538, 11: 0.353553, 12: math.sin(math.pi / 9)}

# Printed values (degrees, and Q2Qj) for side-by-side reporting.
PRINTED_TABLE2 = {
    (10, 1): {"alpha_min": 36.0, "gamma_max": 86.92, "delta0": 230.92, "f": 0.3665},
    (11, 1): {"alpha_min": 27.88, "gamma_max": 124.23, "delta0": 235.79, "f": 0.3535},
    (11, 2): {"alpha_min": 38.23, "gamma_max": 82.82, "delta0": 235.79, "f": 0.3665},
    (12, 1): {"alpha_min": 20.0, "gamma_max": 120.0, "delta0": 200.0, "f": math.sin(math.pi / 9)},
    (12, 2): {"alpha_min": 30.0, "gamma_max": 80.0, "delta0": 200.0, "f": 0.3751},
}


class UnsupportedCase(ValueError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class LowerBoundCase:
    k: int
    c: int
    j: int
    sigma: float
    alpha_min: float
    gamma_max: float
    delta0: float
    f: float

    @property
    def e(self) -> int:
        return self.k - self.c

    def row(self) -> dict:
        d = asdict(self)
        d["e"] = self.e
        for key in ("alpha_min", "gamma_max", "delta0"):
            d[key + "_deg"] = round(math.degrees(d[key]), 2)
        return d


def case_params(k: int, c: int, sigma: float) -> tuple[int, float, float, float]:
    """``(j, gamma_max, delta0, alpha_min)`` in radians for the case ``(k, c)``."""
    if (k, c) not in J_INDEX:
        raise UnsupportedCase(f"no case analysis for k={k}, c={c}")
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    j = J_INDEX[k, c]
    arc = math.asin(sigma)
    gamma_max = (2 * j - 8) * arc
    delta0 = 2 * math.pi - 2 * (k - c - j) * arc
    alpha_min = (delta0 - gamma_max) / 4
    return j, gamma_max, delta0, alpha_min


def q_radius(alpha: float, sigma: float, branch: int = -1) -> float:
    """Distance from O of the point on the bisector at ``sigma`` from both
    boundary points at angle ``+-alpha``; ``branch=-1`` is the inner root."""
    disc = sigma * sigma - 0.25 * math.sin(alpha) ** 2
    if disc < 0:
        raise GeometryError(f"sigma={sigma} circles do not meet on the bisector (alpha={alpha})")
    return RADIUS * math.cos(alpha) + branch * math.sqrt(disc)


def q_point(bisector: float, alpha: float, sigma: float) -> np.ndarray:
    """The Q point for boundary points at angles ``bisector +- alpha``."""
    d = q_radius(alpha, sigma)
    return d * np.array([math.cos(bisector), math.sin(bisector)])


def f_dist(alpha: float, beta: float, gamma: float, sigma: float) -> float:
    """Distance ``Q_2 Q_j`` for half-angles ``alpha``, ``beta`` and gap ``gamma``."""
    q2 = q_point(0.0, alpha, sigma)
    qj = q_point(alpha + gamma + beta, beta, sigma)
    return float(math.hypot(*(qj - q2)))


def extremal_case(k: int, c: int, sigma: float | None = None) -> LowerBoundCase:
    sigma = SIGMA[k] if sigma is None else sigma
    j, gm, d0, am = case_params(k, c, sigma)
    return LowerBoundCase(k, c, j, sigma, am, gm, d0, f_dist(am, am, gm, sigma))


def _excess(k: int, c: int, sigma: float) -> float:
    _, gm, _, am = case_params(k, c, sigma)
    try:
        return f_dist(am, am, gm, sigma) - sigma
    except GeometryError:
        # P_1 and P_3 cannot both be within sigma of a common point: no such covering.
        return math.inf


def solve_sigma(k: int, c: int, lo: float = 0.25, hi: float = 0.45, tol: float = 1e-9) -> float:
    """Largest sigma the ``(k, c)`` case certifies: root of ``f_min(sigma) - sigma``.

    Returns the lower end of the final bracket, where the excess is still positive.
    """
    glo, ghi = _excess(k, c, lo), _excess(k, c, hi)
    if not (glo > 0 > ghi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: {glo}, {ghi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _excess(k, c, mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class LowerBound:
    k: int
    value: float
    binding: str
    cases: dict

    def to_json(self) -> dict:
        return asdict(self)


def lower_bound(k: int) -> LowerBound:
    """Smallest guarantee over the cases c = 0, c >= 3 and c in {1, 2}."""
    if k not in SIGMA:
        raise UnsupportedCase(f"lower bound only for k in 10..12, got {k}")
    cases = {"c=0": 0.5, "c>=3": math.sin(math.pi / (k - 3))}
    for c in (1, 2):
        if (k, c) in J_INDEX:
            cases[f"c={c}"] = solve_sigma(k, c)
    binding = min(cases, key=lambda key: (cases[key], key))
    value = cases[binding]
    for c in (1, 2):
        if (k, c) in J_INDEX:
            case = extremal_case(k, c, value)
            if case.f < value:
                raise AssertionError(f"case c={c} fails at sigma={value}")
    return LowerBound(k, value, binding, cases)


def table2(sigma_from: str = "published") -> list[LowerBoundCase]:
    """Extremal parameters for every supported ``(k, c)``.

    ``sigma_from="published"`` evaluates at the published sigma_k; ``"solved"``
    at each case's own fixed point.
    """
    rows = []
    for k, c in J_INDEX:
        sigma = SIGMA[k] if sigma_from == "published" else solve_sigma(k, c)
        rows.append(extremal_case(k, c, sigma))
    return rows


def check_nonbipartite(n: int, step: int) -> bool:
    """True when the circulant graph on ``n`` vertices with edges ``{i, i+step}`` has an odd cycle."""
    if n < 3 or not 1 <= step < n:
        raise ValueError("need n >= 3 and 1 <= step < n")
    adj = [{(i + step) % n, (i - step) % n} for i in range(n)]
    color = [-1] * n
    for start in range(n):
        if color[start] >= 0:
            continue
        color[start] = 0
        todo = deque([start])
        while todo:
            u = todo.popleft()
            for w in adj[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    todo.append(w)
                elif color[w] == color[u]:
                    return True
    return False


def extremal_grid(k: int, c: int, sigma: float | None = None,
                  n_alpha: int = 50, n_gamma: int = 20) -> tuple[float, float, int]:
    """Minimum of ``f`` over a grid of admissible angles.

    Admissible: ``alpha, beta`` in ``[0, 2 asin(sigma)]``, ``gamma`` in
    ``[0, gamma_max]``, ``2 alpha + 2 beta + gamma >= delta0``.  Returns
    ``(grid minimum, extremal f, number of admissible points)``.
    """
    case = extremal_case(k, c, sigma)
    s = case.sigma
    arc = math.asin(s)
    a = np.linspace(0.0, 2 * arc, n_alpha)
    g = np.linspace(0.0, case.gamma_max, n_gamma)
    aa, bb, gg = np.meshgrid(a, a, g, indexing="ij")
    ok = 2 * aa + 2 * bb + gg >= case.delta0 - 1e-12
    aa, bb, gg = aa[ok], bb[ok], gg[ok]
    da = RADIUS * np.cos(aa) - np.sqrt(s * s - 0.25 * np.sin(aa) ** 2)
    db = RADIUS * np.cos(bb) - np.sqrt(s * s - 0.25 * np.sin(bb) ** 2)
    f = np.sqrt(da * da + db * db - 2 * da * db * np.cos(aa + bb + gg))
    return float(f.min()), case.f, int(ok.sum())
