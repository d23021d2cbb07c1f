"""Information-spectrum exponents of i.i.d. sources and their comparison."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .dist import as_probs
from .measures import INF, TIE_TOL, entropy_curve, mode_entropy, renyi_divergence, tilted, tilted_cross_entropy
from .optimize import clamp, maximize_halfline, minimize, minimize_halfline

J_STEP = 1e-4
MARGIN = 1e-9
BISECT_STEPS = 24
NEWTON_STEPS = 6
U_MAX = 1 - 1e-12


class Side(Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class SpectrumPoint:
    j: float
    side: Side
    exponent: float
    boundary: bool = False


def _lp(p):
    probs = as_probs(p)
    return np.log(probs[probs > 0])


def _uniform(lp):
    return lp.max() - lp.min() <= TIE_TOL


def _edge(lp, top):
    """Exponent at j = H_inf (top) or j = H_-inf: -log(k * extreme mass)."""
    ext = lp.max() if top else lp.min()
    k = np.count_nonzero(np.abs(lp - ext) <= TIE_TOL)
    return float(-ext - math.log(k))


def _log_mgf(lp, t):
    """log sum p^(1-t), i.e. t * H_{1-t}(p), for an array of t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return logsumexp((1 - t)[:, None] * lp[None, :], axis=1)


def exponent_lower(p, j):
    """Lower-tail exponent E_P(j) = sup_t {t H_{1+t}(P) - t j}."""
    lp = _lp(p)
    h = float(entropy_curve(lp, 1.0))
    if _uniform(lp):
        return 0.0 if abs(j - h) <= TIE_TOL else INF
    if j >= h:
        return 0.0
    h_top = -lp.max()
    if j < h_top - TIE_TOL:
        return INF
    if j <= h_top + TIE_TOL:
        return _edge(lp, True)
    val = maximize_halfline(lambda t: -_log_mgf(lp, -t) - t * j, at_infinity=-INF)
    return clamp(max(0.0, val))


def exponent_upper(p, j):
    """Upper-tail exponent E^_P(j) = sup_t {t j - t H_{1-t}(P)}."""
    lp = _lp(p)
    h = float(entropy_curve(lp, 1.0))
    if _uniform(lp):
        return 0.0 if abs(j - h) <= TIE_TOL else INF
    if j <= h:
        return 0.0
    h_bottom = -lp.min()
    if j > h_bottom + TIE_TOL:
        return INF
    if j >= h_bottom - TIE_TOL:
        return _edge(lp, False)
    val = maximize_halfline(lambda t: t * j - _log_mgf(lp, t), at_infinity=-INF)
    return clamp(max(0.0, val))


def exponent_inverse_lower(p, omega):
    """max_t {H_{1+t}(P) - omega/t}: the j at which E_P reaches omega."""
    lp = _lp(p)
    h = float(entropy_curve(lp, 1.0))
    if omega <= 0 or _uniform(lp):
        return h

    def f(t):
        with np.errstate(divide="ignore"):
            return entropy_curve(lp, 1 + t) - omega / t

    return maximize_halfline(f, at_infinity=-lp.max())


def exponent_inverse_upper(p, omega):
    """min_t {H_{1-t}(P) + omega/t}: the j at which E^_P reaches omega."""
    lp = _lp(p)
    h = float(entropy_curve(lp, 1.0))
    if omega <= 0 or _uniform(lp):
        return h

    def f(t):
        with np.errstate(divide="ignore"):
            return entropy_curve(lp, 1 - t) + omega / t

    return minimize_halfline(f, at_infinity=-lp.min())


def _tilt_stats(lp, alphas):
    """(tilted cross entropy, D(tilt || p)) for an array of finite orders."""
    j, d, _ = _tilt_moments(lp, alphas)
    return j, d


def _tilt_moments(lp, alphas):
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    z = alphas[:, None] * lp[None, :]
    z -= z.max(axis=1)[:, None]
    e = np.exp(z)
    logw = z - np.log(e.sum(axis=1))[:, None]
    w = np.exp(logw)
    j = -(w @ lp)
    var = w @ (lp * lp) - j * j
    d = (w * (logw - lp[None, :])).sum(axis=1)
    return j, np.maximum(d, 0.0), np.maximum(var, 0.0)


def parametric_spectrum(p, alphas):
    """Points (H^u_alpha(P), D(P^(alpha) || P)) of the spectrum curve."""
    out = []
    for a in alphas:
        out.append((tilted_cross_entropy(p, a), renyi_divergence(tilted(p, a), p, 1.0)))
    return out


def _curve(lp, js, lower):
    """Vectorized exponent curve through the tilt parametrization."""
    js = np.atleast_1d(np.asarray(js, dtype=float))
    out = np.zeros(js.shape)
    h = float(entropy_curve(lp, 1.0))
    if _uniform(lp):
        out[np.abs(js - h) > TIE_TOL] = INF
        return out
    if lower:
        edge = -lp.max()
        live = js < h
        dead = js < edge - TIE_TOL
        at_edge = (js >= edge - TIE_TOL) & (js <= edge + TIE_TOL)
        sign = 1.0
    else:
        edge = -lp.min()
        live = js > h
        dead = js > edge + TIE_TOL
        at_edge = (js >= edge - TIE_TOL) & (js <= edge + TIE_TOL)
        sign = -1.0
    inner = live & ~dead & ~at_edge
    out[dead] = INF
    out[at_edge & live] = _edge(lp, lower)
    if inner.any():
        target = js[inner]
        lo = np.zeros(target.shape)
        hi = np.full(target.shape, U_MAX)
        for _ in range(BISECT_STEPS):
            mid = (lo + hi) / 2
            jm, _ = _tilt_stats(lp, 1 + sign * mid / (1 - mid))
            # moving u away from 0 pushes j towards the edge
            past = (jm < target) if lower else (jm > target)
            hi = np.where(past, mid, hi)
            lo = np.where(past, lo, mid)
        a_lo = 1 + sign * lo / (1 - lo)
        a_hi = 1 + sign * hi / (1 - hi)
        a = (a_lo + a_hi) / 2
        lo_a, hi_a = np.minimum(a_lo, a_hi), np.maximum(a_lo, a_hi)
        for _ in range(NEWTON_STEPS):
            jm, _, var = _tilt_moments(lp, a)
            # dj/dalpha = -Var, kept inside the bisection bracket
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(var > 0, (jm - target) / var, 0.0)
            a = np.clip(a + step, lo_a, hi_a)
        _, d, _ = _tilt_moments(lp, a)
        out[inner] = d
    return out


def lower_curve(p, js):
    return _curve(_lp(p), js, True)


def upper_curve(p, js):
    return _curve(_lp(p), js, False)


def spectrum_point(p, j):
    lp = _lp(p)
    h = float(entropy_curve(lp, 1.0))
    boundary = abs(j + lp.max()) <= TIE_TOL or abs(j + lp.min()) <= TIE_TOL
    if j <= h:
        return SpectrumPoint(j, Side.LOWER, exponent_lower(p, j), boundary)
    return SpectrumPoint(j, Side.UPPER, exponent_upper(p, j), boundary)


def interval_exponent(p, j1, j2):
    """Exponent of P^n(j1 <= -(1/n) log P^n < j2)."""
    if j1 >= j2:
        raise ValueError("interval needs j1 < j2")
    h = float(entropy_curve(_lp(p), 1.0))
    if j2 <= h:
        return exponent_lower(p, j2)
    if j1 >= h:
        return exponent_upper(p, j1)
    return 0.0


def _order_map(kind):
    def ratio_orders(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            far = u / (1 - u)
        if kind == "above1":
            return np.where(u >= 1, INF, 1 + far)
        if kind == "below1":
            return np.where(u >= 1, -INF, 1 - far)
        if kind == "unit":
            return u
        return np.where(u >= 1, -INF, -far)

    return ratio_orders


ORDER_RANGES = ("above1", "below1", "unit", "below0")


def entropy_ratio_min(p, q, kind):
    """min of H_t(p)/H_t(q) over one of the four order ranges."""
    lp, lq = _lp(p), _lp(q)
    to_order = _order_map(kind)

    def ratio(u):
        b = to_order(u)
        return entropy_curve(lp, b) / entropy_curve(lq, b)

    val, _ = minimize(ratio, 0.0, 1.0)
    return val


@dataclass(frozen=True)
class DominanceReport:
    R: float
    thresholds: tuple
    dominance: tuple
    min_gaps: tuple

    def agrees(self):
        return tuple(d == (self.R < t) for d, t in zip(self.dominance, self.thresholds))


def compare_exponents(p, q, R, j_step=J_STEP, margin=MARGIN):
    """Grid test of the four exponent dominance relations plus thresholds.

    Each relation compares (1/R) E_P(R j) with E_Q(j) on a j-grid of spacing
    at most ``j_step``. Strict dominance needs every gap above ``-margin`` and
    every gap, relative to the larger exponent, above ``margin`` wherever that
    exponent is positive.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    lp, lq = _lp(p), _lp(q)
    h = float(entropy_curve(lp, 1.0))
    h_top, h_bottom = -lp.max(), -lp.min()
    hu = mode_entropy(p)
    h0_ok = R < math.log(lp.size) / math.log(lq.size) if lq.size > 1 else False

    def grid(a, b):
        return np.linspace(a, b, max(2, int(math.ceil((b - a) / (R * j_step))) + 1)) / R

    def gap_stats(big, small):
        with np.errstate(invalid="ignore"):
            gap = np.where(np.isinf(big) & np.isinf(small), 0.0, big - small)
            scale = np.maximum(big, small)
            live = np.isfinite(scale) & (scale > margin)
            rel = np.where(live, gap / np.where(live, scale, 1.0), 1.0)
        return gap, np.where(np.isinf(gap), 1.0, rel)

    def strict(gap, rel):
        # strict: no violation, and no touching where the exponents are positive
        return float(np.min(gap)) > -margin and float(np.min(rel)) > margin

    js = grid(h_top, h)
    low_gap, low_rel = gap_stats(_curve(lp, R * js, True) / R, _curve(lq, js, True))

    js = np.union1d(grid(h, h_bottom), [hu / R])
    up_gap, up_rel = gap_stats(_curve(lq, js, False), _curve(lp, R * js, False) / R)

    def upper(a, b):
        sel = (js >= a / R) & (js <= b / R)
        return up_gap[sel], up_rel[sel]

    parts = ((low_gap, low_rel), upper(h, h_bottom), upper(h, hu), upper(hu, h_bottom))
    gaps = tuple(float(np.min(g)) for g, _ in parts)
    dominance = (
        strict(*parts[0]),
        strict(*parts[1]),
        strict(*parts[2]) and h0_ok,
        strict(*parts[3]) and h0_ok,
    )
    thresholds = tuple(entropy_ratio_min(p, q, k) for k in ORDER_RANGES)
    return DominanceReport(R, thresholds, dominance, gaps)
