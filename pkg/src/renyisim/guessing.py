"""Guessing exponents for a cipher whose key comes from a memoryless source."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .dist import as_probs
from .measures import INF, TIE_TOL, entropy_curve
from .optimize import golden_max, maximize_halfline

R_GRID = 4096
T_GRID = 2048
BISECT_STEPS = 80


@dataclass(frozen=True)
class GuessQuery:
    p_source: object
    p_key: object
    rho: float
    R: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.R >= 0:
            raise ValueError("R must be nonnegative")


def _lp(p):
    probs = as_probs(p)
    return np.log(probs[probs > 0])


def _tilt_entropy(lp, betas):
    """(H(tilt), D(tilt || p)) of p^beta / sum p^beta for an array of betas."""
    z = np.asarray(betas, dtype=float)[:, None] * (lp - lp.max())[None, :]
    logw = z - logsumexp(z, axis=1)[:, None]
    w = np.exp(logw)
    ent = -(w * logw).sum(axis=1)
    div = (w * (logw - lp[None, :])).sum(axis=1)
    return ent, np.maximum(div, 0.0)


def _exponent_curve(lp, rho, Rs):
    Rs = np.atleast_1d(np.asarray(Rs, dtype=float))
    h = float(entropy_curve(lp, 1.0))
    b0 = 1.0 / (1.0 + rho)
    top = rho * float(entropy_curve(lp, b0))
    h_star = float(_tilt_entropy(lp, [b0])[0][0])
    out = np.where(Rs <= h, rho * Rs, top)
    mid = (Rs > h) & (Rs < h_star)
    if mid.any():
        target = Rs[mid]
        lo = np.full(target.shape, b0)
        hi = np.ones(target.shape)
        for _ in range(BISECT_STEPS):
            beta = (lo + hi) / 2
            ent, _ = _tilt_entropy(lp, beta)
            # entropy of the tilt falls as beta grows
            above = ent > target
            lo = np.where(above, beta, lo)
            hi = np.where(above, hi, beta)
        _, div = _tilt_entropy(lp, (lo + hi) / 2)
        # the constrained max never exceeds the unconstrained one
        out[mid] = np.minimum(rho * target - div, top)
    return out


def guessing_exponent(p, rho, R):
    """E(R, rho) = max_Q {rho min(H(Q), R) - D(Q || p)}."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not R >= 0:
        raise ValueError("R must be nonnegative")
    return float(_exponent_curve(_lp(p), rho, [R])[0])


def key_penalty(p_key, R):
    """sup_{t >= 0} {t R - t H_{1/(1+t)}(p_key)}."""
    lk = _lp(p_key)
    h = float(entropy_curve(lk, 1.0))
    h0 = math.log(lk.size)
    if R <= h:
        return 0.0
    if R > h0 + TIE_TOL:
        return INF
    tail = -lk.mean() - h0 if R >= h0 - TIE_TOL else -INF

    def f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return t * R - t * entropy_curve(lk, 1.0 / (1.0 + t))

    return max(0.0, maximize_halfline(f, at_infinity=tail))


def _penalty_curve(lk, Rs):
    h = float(entropy_curve(lk, 1.0))
    h0 = math.log(lk.size)
    u = np.linspace(0.0, 1.0, T_GRID, endpoint=False)
    t = u / (1 - u)
    ht = entropy_curve(lk, 1.0 / (1.0 + t))
    vals = (t[None, :] * (Rs[:, None] - ht[None, :])).max(axis=1)
    out = np.maximum(vals, 0.0)
    out[Rs <= h] = 0.0
    out[Rs >= h0 - TIE_TOL] = -lk.mean() - h0
    return out


def guessing_bounds(query):
    """(lower, upper) bounds on the guessing exponent with a memoryless key."""
    lp, lk = _lp(query.p_source), _lp(query.p_key)
    rho = query.rho
    h0 = math.log(lk.size)
    upper = float(_exponent_curve(lp, rho, [h0])[0])
    if h0 == 0:
        return upper, upper
    Rs = np.linspace(0.0, h0, R_GRID)
    obj = _exponent_curve(lp, rho, Rs) - _penalty_curve(lk, Rs)
    i = int(np.argmax(obj))
    a, b = Rs[max(i - 1, 0)], Rs[min(i + 1, R_GRID - 1)]

    def g(r):
        return guessing_exponent(query.p_source, rho, r) - key_penalty(query.p_key, r)

    _, refined = golden_max(g, a, b, 1e-10)
    # the grid penalty is only a lower estimate, so values come from the exact form
    return max(refined, g(float(Rs[i]))), upper
