"""Scan-and-refine maximization used by every sup/inf formula."""

import math

import numpy as np

SCAN_POINTS = 512
GRID_2D = 256
TOL = 1e-10
CLAMP = 1e6
INF = math.inf

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def clamp(value):
    """Map numerically divergent values to +inf."""
    return INF if value > CLAMP else value


def _values(f, x):
    with np.errstate(all="ignore"):
        y = np.asarray(f(x), dtype=float)
    y = np.broadcast_to(y, np.shape(x)).copy()
    y[np.isnan(y)] = -INF
    return y


def golden_max(f, lo, hi, tol=TOL):
    """Golden-section search for the max of a unimodal scalar function."""
    a, b = lo, hi
    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize(f, lo, hi, n=SCAN_POINTS, tol=TOL):
    """sup of ``f`` on [lo, hi]; ``f`` must accept numpy arrays."""
    x = np.linspace(lo, hi, n)
    y = _values(f, x)
    i = int(np.argmax(y))
    best = y[i]
    if not np.isfinite(best):
        return float(best), float(x[i])
    a, b = x[max(i - 1, 0)], x[min(i + 1, n - 1)]

    def g(z):
        return float(_values(f, np.array([z]))[0])

    z, fz = golden_max(g, a, b, tol)
    if fz > best:
        return fz, z
    return float(best), float(x[i])


def minimize(f, lo, hi, n=SCAN_POINTS, tol=TOL):
    val, x = maximize(lambda z: -np.asarray(f(z)), lo, hi, n, tol)
    return -val, x


def halfline(f, lo=0.0, at_infinity=None):
    """Reparametrize t in [lo, inf] as u in [0, 1] via t = lo + u/(1-u)."""
    if at_infinity is None:
        with np.errstate(all="ignore"):
            tail = float(np.asarray(f(np.array([lo + 1e9])))[0])
    else:
        tail = at_infinity

    def g(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            t = lo + u / (1 - u)
        out = np.asarray(f(np.where(u < 1, t, lo)), dtype=float)
        out = np.broadcast_to(out, u.shape).copy()
        out[u >= 1] = tail
        return out

    return g


def maximize_halfline(f, lo=0.0, at_infinity=None, n=SCAN_POINTS, tol=TOL):
    """sup of ``f`` over t in [lo, inf], the endpoint given by ``at_infinity``."""
    val, u = maximize(halfline(f, lo, at_infinity), 0.0, 1.0, n, tol)
    return val


def minimize_halfline(f, lo=0.0, at_infinity=None, n=SCAN_POINTS, tol=TOL):
    neg_inf = None if at_infinity is None else -at_infinity
    return -maximize_halfline(lambda t: -np.asarray(f(t)), lo, neg_inf, n, tol)


def maximize_2d(f, box1, box2, n=GRID_2D, rounds=30, tol=1e-9):
    """sup of ``f(x, y)`` on a box: grid scan then coordinate-wise refinement."""
    xs = np.linspace(box1[0], box1[1], n)
    ys = np.linspace(box2[0], box2[1], n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = _values(lambda _: f(X, Y), X)
    i, j = np.unravel_index(int(np.argmax(Z)), Z.shape)
    best = float(Z[i, j])
    if not np.isfinite(best):
        return best
    x, y = xs[i], ys[j]
    dx = (box1[1] - box1[0]) / (n - 1)
    dy = (box2[1] - box2[0]) / (n - 1)

    def fx(z):
        return float(_values(lambda zz: f(zz, np.array([y])), np.array([z]))[0])

    def fy(z):
        return float(_values(lambda zz: f(np.array([x]), zz), np.array([z]))[0])

    for _ in range(rounds):
        prev = best
        a, b = max(box1[0], x - dx), min(box1[1], x + dx)
        z, fz = golden_max(fx, a, b, tol)
        if fz > best:
            best, x = fz, z
        a, b = max(box2[0], y - dy), min(box2[1], y + dy)
        z, fz = golden_max(fy, a, b, tol)
        if fz > best:
            best, y = fz, z
        if best - prev < 1e-14:
            break
    return best
