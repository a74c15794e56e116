"""Compiled inner loops for circle packing and partition refinement."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def phi_active(X, P, Q):
    """Max distance over the pair list and the first pair attaining it."""
    best = -1.0
    arg = 0
    for k in range(P.shape[0]):
        dx = X[P[k], 0] - X[Q[k], 0]
        dy = X[P[k], 1] - X[Q[k], 1]
        d = math.sqrt(dx * dx + dy * dy)
        if d > best:
            best = d
            arg = k
    return best, arg


@njit(cache=True)
def snap(X, kind, line1, line2, C, B, out):
    for s in range(X.shape[0]):
        if kind[s] == 1:
            t = line1[s]
            v = X[s, 0] * C[t, 0] + X[s, 1] * C[t, 1] + B[t]
            out[s, 0] = X[s, 0] - v * C[t, 0]
            out[s, 1] = X[s, 1] - v * C[t, 1]
        elif kind[s] == 2:
            t1 = line1[s]
            t2 = line2[s]
            det = C[t1, 0] * C[t2, 1] - C[t1, 1] * C[t2, 0]
            out[s, 0] = (-B[t1] * C[t2, 1] + B[t2] * C[t1, 1]) / det
            out[s, 1] = (-C[t1, 0] * B[t2] + C[t2, 0] * B[t1]) / det
        else:
            out[s, 0] = X[s, 0]
            out[s, 1] = X[s, 1]


@njit(cache=True)
def _inside(X, C, B):
    # snapped boundary vertices sit on their lines to ~1e-16
    for s in range(X.shape[0]):
        for t in range(C.shape[0]):
            if X[s, 0] * C[t, 0] + X[s, 1] * C[t, 1] + B[t] < -1e-12:
                return False
    return True


@njit(cache=True)
def refine_loop(X0, P, Q, kind, line1, C, B, line2,
                lr, beta1, beta2, eps, max_iter, window, tol,
                mu0, mu_growth, mu_every, mu_cap):
    """Adam descent on max pair distance plus quadratic line penalty.

    Returns the best snapped iterate that lies inside the host, its value,
    and the iteration count.
    """
    r = X0.shape[0]
    X = X0.copy()
    m = np.zeros_like(X)
    v = np.zeros_like(X)
    g = np.zeros_like(X)
    Xs = np.empty_like(X)
    snap(X, kind, line1, line2, C, B, Xs)
    best, _ = phi_active(Xs, P, Q)
    best_X = Xs.copy()
    window_start = best
    mu = mu0
    b1t = 1.0
    b2t = 1.0
    it = 0
    while it < max_iter:
        it += 1
        if it % mu_every == 0:
            mu = min(mu * mu_growth, mu_cap)
        g[:, :] = 0.0
        val, a = phi_active(X, P, Q)
        if not math.isfinite(val):
            return best_X, best, it, False
        p = P[a]
        q = Q[a]
        dx = X[p, 0] - X[q, 0]
        dy = X[p, 1] - X[q, 1]
        d = math.sqrt(dx * dx + dy * dy)
        if d > 0.0:
            g[p, 0] += dx / d
            g[p, 1] += dy / d
            g[q, 0] -= dx / d
            g[q, 1] -= dy / d
        for s in range(r):
            if kind[s] == 1:
                t = line1[s]
                res = X[s, 0] * C[t, 0] + X[s, 1] * C[t, 1] + B[t]
                g[s, 0] += 2.0 * mu * res * C[t, 0]
                g[s, 1] += 2.0 * mu * res * C[t, 1]
            elif kind[s] == 2:
                g[s, 0] = 0.0
                g[s, 1] = 0.0
        b1t *= beta1
        b2t *= beta2
        adam_update(X, g, m, v, lr, beta1, beta2, eps, b1t, b2t)
        snap(X, kind, line1, line2, C, B, Xs)
        cur, _ = phi_active(Xs, P, Q)
        if cur < best and _inside(Xs, C, B):
            best = cur
            best_X[:, :] = Xs
        if it % window == 0:
            if window_start - best < tol * window_start:
                break
            window_start = best
    return best_X, best, it, True


@njit(cache=True)
def psi_active(V, C, B):
    """Packing objective and its active term, in any dimension.

    kind 0: face term for point ``i`` and face ``j``; kind 1: pair term (i, j).
    """
    k, dim = V.shape
    best = 1e300
    kind = 0
    ai = 0
    aj = 0
    for i in range(k):
        for t in range(C.shape[0]):
            val = B[t]
            for c in range(dim):
                val += V[i, c] * C[t, c]
            if val < best:
                best = val
                kind = 0
                ai = i
                aj = t
    for i in range(k):
        for j in range(i + 1, k):
            sq = 0.0
            for c in range(dim):
                sq += (V[i, c] - V[j, c]) ** 2
            val = 0.5 * math.sqrt(sq)
            if val < best:
                best = val
                kind = 1
                ai = i
                aj = j
    return best, kind, ai, aj


@njit(cache=True)
def adam_update(X, g, m, v, lr, beta1, beta2, eps, b1t, b2t):
    """One Adam step on ``X`` in place; ``b1t``, ``b2t`` are the decay powers."""
    for s in range(X.shape[0]):
        for c in range(X.shape[1]):
            m[s, c] = beta1 * m[s, c] + (1.0 - beta1) * g[s, c]
            v[s, c] = beta2 * v[s, c] + (1.0 - beta2) * g[s, c] * g[s, c]
            mh = m[s, c] / (1.0 - b1t)
            vh = v[s, c] / (1.0 - b2t)
            X[s, c] -= lr * mh / (math.sqrt(vh) + eps)


@njit(cache=True)
def pack_loop(V0, C, B, steps, lr, beta1, beta2, eps):
    """Adam ascent on the packing objective for ``steps`` steps."""
    V = V0.copy()
    dim = V.shape[1]
    m = np.zeros_like(V)
    v = np.zeros_like(V)
    g = np.zeros_like(V)
    b1t = 1.0
    b2t = 1.0
    for _ in range(steps):
        g[:, :] = 0.0
        val, kind, i, j = psi_active(V, C, B)
        # gradients are negated: the update descends on -psi
        if kind == 0:
            for c in range(dim):
                g[i, c] = -C[j, c]
        else:
            sq = 0.0
            for c in range(dim):
                sq += (V[i, c] - V[j, c]) ** 2
            d = math.sqrt(sq)
            if d > 0.0:
                for c in range(dim):
                    g[i, c] = -0.5 * (V[i, c] - V[j, c]) / d
                    g[j, c] = 0.5 * (V[i, c] - V[j, c]) / d
        b1t *= beta1
        b2t *= beta2
        adam_update(V, g, m, v, lr, beta1, beta2, eps, b1t, b2t)
    return V


# -- 3D plane partitions -------------------------------------------------------

@njit(cache=True)
def _solve3(A, rows, rhs, x):
    """Cramer's rule for the 3x3 system with rows ``A[rows]``; False when singular."""
    a = A[rows[0]]
    b = A[rows[1]]
    c = A[rows[2]]
    det = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
           + a[2] * (b[0] * c[1] - b[1] * c[0]))
    if abs(det) < 1e-12:
        return False
    r0, r1, r2 = rhs[rows[0]], rhs[rows[1]], rhs[rows[2]]
    x[0] = (r0 * (b[1] * c[2] - b[2] * c[1]) - a[1] * (r1 * c[2] - b[2] * r2)
            + a[2] * (r1 * c[1] - b[1] * r2)) / det
    x[1] = (a[0] * (r1 * c[2] - b[2] * r2) - r0 * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * r2 - r1 * c[0])) / det
    x[2] = (a[0] * (b[1] * r2 - r1 * c[1]) - a[1] * (b[0] * r2 - r1 * c[0])
            + r0 * (b[0] * c[1] - b[1] * c[0])) / det
    return True


@njit(cache=True)
def halfspace_vertices(A, h, tol):
    """Vertices of ``{x : A x <= h}`` by enumerating plane triples.

    Returns ``(V, T, n)``: the first ``n`` rows of ``V`` are distinct vertices,
    ``T`` holds one defining plane triple per vertex.
    """
    m = A.shape[0]
    cap = 256
    V = np.empty((cap, 3))
    T = np.empty((cap, 3), dtype=np.int64)
    n = 0
    rows = np.empty(3, dtype=np.int64)
    x = np.empty(3)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                rows[0] = i
                rows[1] = j
                rows[2] = k
                if not _solve3(A, rows, h, x):
                    continue
                ok = True
                for t in range(m):
                    if A[t, 0] * x[0] + A[t, 1] * x[1] + A[t, 2] * x[2] > h[t] + tol:
                        ok = False
                        break
                if not ok:
                    continue
                dup = False
                for u in range(n):
                    if (abs(V[u, 0] - x[0]) <= 1e-9 and abs(V[u, 1] - x[1]) <= 1e-9
                            and abs(V[u, 2] - x[2]) <= 1e-9):
                        dup = True
                        break
                if dup:
                    continue
                if n == cap:
                    return V, T, n
                V[n] = x
                T[n] = rows
                n += 1
    return V, T, n


@njit(cache=True)
def cell_system(HA, Hh, p, a, i):
    """Half-space rows ``A x <= h`` of cell ``i``: host rows, then one row per other part."""
    m = HA.shape[0]
    A = np.empty((m + 3, 3))
    h = np.empty(m + 3)
    A[:m] = HA
    h[:m] = Hh
    r = m
    for j in range(4):
        if j == i:
            continue
        d0 = a[i, 0] - a[j, 0]
        d1 = a[i, 1] - a[j, 1]
        d2 = a[i, 2] - a[j, 2]
        L = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        # (x - p, n) >= 0  <=>  -n x <= -n p
        A[r, 0] = -d0 / L
        A[r, 1] = -d1 / L
        A[r, 2] = -d2 / L
        h[r] = -(d0 * p[0] + d1 * p[1] + d2 * p[2]) / L
        r += 1
    return A, h


@njit(cache=True)
def plane_objective(HA, Hh, p, a):
    """Max cell diameter and its active (cell, vertex, vertex) data.

    Returns ``(value, cell, u, v, Tu, Tv, A, empty)`` where ``empty`` counts cells
    with fewer than 4 vertices.
    """
    best = -1.0
    bu = np.zeros(3)
    bv = np.zeros(3)
    bTu = np.zeros(3, dtype=np.int64)
    bTv = np.zeros(3, dtype=np.int64)
    bcell = -1
    empty = 0
    for i in range(4):
        A, h = cell_system(HA, Hh, p, a, i)
        V, T, n = halfspace_vertices(A, h, 1e-10)
        if n < 4:
            empty += 1
            continue
        for s in range(n):
            for t in range(s + 1, n):
                d = math.sqrt((V[s, 0] - V[t, 0]) ** 2 + (V[s, 1] - V[t, 1]) ** 2
                              + (V[s, 2] - V[t, 2]) ** 2)
                if d > best:
                    best = d
                    bu[:] = V[s]
                    bv[:] = V[t]
                    bTu[:] = T[s]
                    bTv[:] = T[t]
                    bcell = i
    return best, bcell, bu, bv, bTu, bTv, empty


@njit(cache=True)
def _vertex_sensitivity(A, rows, e, x, p, m, cell, a, gp, ga, sign):
    """Accumulate d(sign * e.x)/d(p, a) for a vertex ``x`` defined by ``rows``."""
    N = np.empty((3, 3))
    for r in range(3):
        N[r] = A[rows[r]]
    w = np.linalg.solve(N.T, e * sign)
    others = np.empty(3, dtype=np.int64)
    c = 0
    for j in range(4):
        if j != cell:
            others[c] = j
            c += 1
    for r in range(3):
        row = rows[r]
        if row < m:
            continue
        j = others[row - m]
        n = -A[row]  # inward unit normal (a_cell - a_j) / L
        d = a[cell] - a[j]
        L = math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
        # n.(x - p) = 0: grad wrt p is -w n, grad wrt n is w (x - p)
        gn = w[r] * (x - p)
        for c3 in range(3):
            gp[c3] -= w[r] * n[c3]
        proj = gn - n * (n[0] * gn[0] + n[1] * gn[1] + n[2] * gn[2])
        for c3 in range(3):
            ga[cell, c3] += proj[c3] / L
            ga[j, c3] -= proj[c3] / L


@njit(cache=True)
def plane_refine_loop(HA, Hh, p0, a0, lr, beta1, beta2, eps, max_iter, window, tol):
    """Adam on apex ``p`` and frame ``a``; returns best (p, a), value, iterations."""
    m = HA.shape[0]
    theta = np.empty((5, 3))
    theta[0] = p0
    theta[1:] = a0
    mom = np.zeros_like(theta)
    var = np.zeros_like(theta)
    g = np.zeros_like(theta)
    best = 1e300
    best_theta = theta.copy()
    window_start = 1e300
    b1t = 1.0
    b2t = 1.0
    it = 0
    while it < max_iter:
        p = theta[0].copy()
        a = theta[1:].copy()
        val, cell, u, v, Tu, Tv, empty = plane_objective(HA, Hh, p, a)
        if empty == 0 and val < best:
            best = val
            best_theta[:, :] = theta
        if it > 0 and it % window == 0:
            if window_start - best < tol * window_start:
                break
            window_start = best
        if cell < 0 or not math.isfinite(val):
            break
        it += 1
        A, h = cell_system(HA, Hh, p, a, cell)
        e = u - v
        e /= math.sqrt(e[0] ** 2 + e[1] ** 2 + e[2] ** 2)
        gp = np.zeros(3)
        ga = np.zeros((4, 3))
        _vertex_sensitivity(A, Tu, e, u, p, m, cell, a, gp, ga, 1.0)
        _vertex_sensitivity(A, Tv, e, v, p, m, cell, a, gp, ga, -1.0)
        g[0] = gp
        g[1:] = ga
        b1t *= beta1
        b2t *= beta2
        adam_update(theta, g, mom, var, lr, beta1, beta2, eps, b1t, b2t)
        # renormalise the frame: zero mean, unit mean norm
        c0 = np.zeros(3)
        for j in range(4):
            c0 += theta[1 + j]
        c0 /= 4.0
        s = 0.0
        for j in range(4):
            theta[1 + j] -= c0
            s += math.sqrt(theta[1 + j, 0] ** 2 + theta[1 + j, 1] ** 2 + theta[1 + j, 2] ** 2)
        theta[1:] /= s / 4.0
    return best_theta[0].copy(), best_theta[1:].copy(), best, it
