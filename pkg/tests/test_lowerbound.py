import math

import numpy as np
import pytest

from borsuk.geom2d import GeometryError
from borsuk.lowerbound import (
    J_INDEX,
    PRINTED_TABLE2,
    SIGMA,
    BracketError,
    UnsupportedCase,
    case_params,
    check_nonbipartite,
    extremal_case,
    extremal_grid,
    f_dist,
    lower_bound,
    q_point,
    q_radius,
    solve_sigma,
    table2,
)

SIN20 = math.sin(math.pi / 9)


def on_circle(angle):
    return 0.5 * np.array([math.cos(angle), math.sin(angle)])


def circle_meet(p1, p2, r):
    """Both intersections of two radius-r circles, by plain coordinate geometry."""
    mid = (p1 + p2) / 2
    half = np.linalg.norm(p2 - p1) / 2
    h = math.sqrt(r * r - half * half)
    n = np.array([-(p2 - p1)[1], (p2 - p1)[0]]) / (2 * half)
    return mid + h * n, mid - h * n


def brute_q(bisector, alpha, sigma):
    a, b = circle_meet(on_circle(bisector - alpha), on_circle(bisector + alpha), sigma)
    return a if np.linalg.norm(a) < np.linalg.norm(b) else b


# -- case parameters ------------------------------------------------------------------

def test_case_params_k10():
    j, gm, d0, am = case_params(10, 1, 0.366538)
    assert j == 6
    # The printed row (36, 86.92, 230.92) is self-consistent but sits off the formulas
    # at this sigma (36.24, 86.01, 230.99); both are compared within the 1 degree band.
    assert math.degrees(d0) == pytest.approx(230.986, abs=1e-3)
    assert abs(math.degrees(d0) - PRINTED_TABLE2[10, 1]["delta0"]) <= 1.0
    assert abs(math.degrees(am) - PRINTED_TABLE2[10, 1]["alpha_min"]) <= 1.0
    assert 86.0 <= math.degrees(gm) <= 86.92
    assert abs(math.degrees(gm) - PRINTED_TABLE2[10, 1]["gamma_max"]) <= 1.0


def test_case_params_k12():
    _, gm, d0, am = case_params(12, 1, SIN20)
    assert (math.degrees(gm), math.degrees(d0), math.degrees(am)) == \
        pytest.approx((120.0, 200.0, 20.0), abs=1e-9)
    _, gm, _, am = case_params(12, 2, SIN20)
    assert (math.degrees(am), math.degrees(gm)) == pytest.approx((30.0, 80.0), abs=1e-9)


@pytest.mark.parametrize("kc", list(J_INDEX))
def test_case_params_arcsin_consistency(kc):
    k, c = kc
    j, gm, d0, am = case_params(k, c, SIGMA[k])
    assert gm / (2 * j - 8) == pytest.approx(math.asin(SIGMA[k]), abs=1e-15)
    assert 2 * am + 2 * am + gm == pytest.approx(d0, abs=1e-12)
    case = extremal_case(k, c)
    assert case.e + case.c == k
    assert case.j in (6, 7)


def test_case_params_errors():
    with pytest.raises(UnsupportedCase):
        case_params(13, 1, 0.3)
    with pytest.raises(UnsupportedCase):
        case_params(10, 2, 0.3)
    with pytest.raises(ValueError):
        case_params(10, 1, 1.5)


# -- Q points --------------------------------------------------------------------------

def test_q_radius_collinear_limit():
    assert q_radius(0.0, 0.3) == pytest.approx(0.5 - 0.3, abs=1e-15)


def test_q_point_is_at_sigma_from_both_p():
    a, s = math.radians(36), 0.366538
    Q = q_point(0.4, a, s)
    for P in (on_circle(0.4 - a), on_circle(0.4 + a)):
        assert np.linalg.norm(Q - P) == pytest.approx(s, abs=1e-12)
    assert np.linalg.norm(Q) <= 0.5


@pytest.mark.parametrize("kc", list(J_INDEX))
def test_q_point_matches_circle_intersection_and_outer_root_rejected(kc):
    k, c = kc
    case = extremal_case(k, c)
    for alpha in (case.alpha_min, 0.5 * case.alpha_min, 2 * math.asin(case.sigma) * 0.99):
        np.testing.assert_allclose(q_point(1.1, alpha, case.sigma), brute_q(1.1, alpha, case.sigma),
                                   atol=1e-12)
    assert q_radius(case.alpha_min, case.sigma, branch=+1) > 0.5


def test_q_point_infeasible():
    with pytest.raises(GeometryError):
        q_point(0.0, math.radians(80), 0.2)


# -- f ---------------------------------------------------------------------------------------

def test_f_extremal_k10():
    assert extremal_case(10, 1).f == pytest.approx(0.3665, abs=5e-4)


def test_f_extremal_k12():
    assert extremal_case(12, 1).f == pytest.approx(SIN20, abs=5e-4)


def test_f_final_display_values():
    # remaining entries of the final inequality display
    assert extremal_case(11, 1).f == pytest.approx(0.3536, abs=5e-4)
    assert extremal_case(11, 2).f == pytest.approx(0.4362, abs=5e-4)
    assert extremal_case(12, 2).f == pytest.approx(0.3751, abs=5e-4)


@pytest.mark.parametrize("alpha_deg", [10, 25, 36])
def test_f_symmetric_brute_force(alpha_deg):
    a, s = math.radians(alpha_deg), 0.366538
    q2 = brute_q(0.0, a, s)
    qj = brute_q(2 * a, a, s)
    assert f_dist(a, a, 0.0, s) == pytest.approx(np.linalg.norm(qj - q2), abs=1e-12)


def test_f_general_brute_force():
    a, b, g, s = 0.5, 0.6, 1.2, 0.36
    q2 = brute_q(0.0, a, s)
    qj = brute_q(a + g + b, b, s)
    assert f_dist(a, b, g, s) == pytest.approx(np.linalg.norm(qj - q2), abs=1e-12)


@pytest.mark.parametrize("kc", list(J_INDEX))
def test_final_display_inequality(kc):
    k, c = kc
    assert extremal_case(k, c).f >= SIGMA[k] - 1e-9


# -- sigma fixed points -----------------------------------------------------------------------

@pytest.mark.parametrize("k,expected", [(10, 0.366538), (11, 0.353553), (12, 0.342020)])
def test_solve_sigma(k, expected):
    assert solve_sigma(k, 1) == pytest.approx(expected, abs=1e-4)


def test_solve_sigma_c2_fixed_points():
    assert solve_sigma(11, 2) == pytest.approx(0.366538, abs=1e-5)
    assert solve_sigma(12, 2) == pytest.approx(0.348670, abs=1e-5)


def test_solve_sigma_returns_certified_side():
    s = solve_sigma(11, 1)
    assert extremal_case(11, 1, s).f >= s


def test_solve_sigma_bracket_error():
    with pytest.raises(BracketError):
        solve_sigma(10, 1, lo=0.40, hi=0.45)


@pytest.mark.parametrize("k,value,binding", [(10, 0.3665, "c=1"), (11, 0.3535, "c=1"), (12, 0.3420, "c=1")])
def test_lower_bound(k, value, binding):
    lb = lower_bound(k)
    assert lb.value == pytest.approx(value, abs=5e-4)
    assert lb.binding == binding
    assert lb.cases["c=0"] == 0.5
    assert lb.cases["c>=3"] == pytest.approx(math.sin(math.pi / (k - 3)), abs=1e-15)


def test_lower_bound_unsupported():
    with pytest.raises(UnsupportedCase):
        lower_bound(9)


def test_table2_rows():
    rows = {(r.k, r.c): r for r in table2()}
    r = rows[12, 1].row()
    assert (r["j"], r["alpha_min_deg"], r["gamma_max_deg"], r["delta0_deg"]) == (7, 20.0, 120.0, 200.0)
    assert r["f"] == pytest.approx(SIN20, abs=1e-6)
    assert rows[10, 1].row()["delta0_deg"] == pytest.approx(230.92, abs=0.1)


# -- extremal grid and Lemma 2 ------------------------------------------------------------------

@pytest.mark.parametrize("kc", list(J_INDEX))
def test_extremal_grid_property(kc):
    k, c = kc
    gmin, fext, n = extremal_grid(k, c)
    assert n > 0
    assert gmin >= fext - 1e-9


def test_extremal_grid_includes_extremal_point_value():
    # with 7 nodes per axis, alpha_min = 20 and gamma_max = 120 degrees are grid nodes
    gmin, fext, _ = extremal_grid(12, 1, n_alpha=7, n_gamma=7)
    assert gmin == pytest.approx(fext, abs=1e-12)


@pytest.mark.parametrize("n,step,expected", [(9, 4, True), (10, 4, True), (4, 2, False), (8, 2, False),
                                             (7, 1, True)])
def test_check_nonbipartite(n, step, expected):
    assert check_nonbipartite(n, step) is expected


def test_check_nonbipartite_bad_input():
    with pytest.raises(ValueError):
        check_nonbipartite(2, 1)
    with pytest.raises(ValueError):
        check_nonbipartite(9, 9)
