"""Renyi entropies and divergences of all orders, in nats."""

import math

import numpy as np
from scipy.special import logsumexp

from .dist import Pmf, as_probs

INF = math.inf

# below this distance from order 1 a cumulant expansion replaces the direct formula
NEAR_ONE = 1e-5
TIE_TOL = 1e-12


def parse_order(token):
    """Order from a CLI-style token; ``0``, ``1`` and ``inf`` are exact."""
    if isinstance(token, (int, float)):
        value = float(token)
    else:
        text = str(token).strip().lower().replace("∞", "inf")
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        if text in ("-inf", "-infinity"):
            return -INF
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"unknown order token {token!r}")
    if math.isnan(value):
        raise ValueError("order cannot be NaN")
    return value


def format_order(alpha):
    if alpha == INF:
        return "inf"
    if alpha == -INF:
        return "-inf"
    return repr(float(alpha))


def _support_logp(p):
    probs = as_probs(p)
    return np.log(probs[probs > 0])


def _cumulants(x, w):
    """First three cumulants of ``x`` under weights ``w``."""
    mu = np.dot(w, x)
    d = x - mu
    return mu, np.dot(w, d * d), np.dot(w, d * d * d)


def entropy_curve(lp, orders):
    """Renyi entropies of the pmf with support log-probs ``lp`` at many orders."""
    lp = np.asarray(lp, dtype=float)
    a = np.asarray(orders, dtype=float)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    out = np.empty(a.shape)
    if lp.max() - lp.min() <= TIE_TOL:
        out[:] = math.log(lp.size)
        return out[0] if scalar else out
    w = np.exp(lp)
    pinf, ninf = a == INF, a == -INF
    zero = a == 0
    near = np.abs(a - 1) < NEAR_ONE
    rest = ~(pinf | ninf | zero | near)
    out[pinf] = -lp.max()
    out[ninf] = -lp.min()
    out[zero] = math.log(lp.size)
    if near.any():
        mu, var, k3 = _cumulants(lp, w)
        s = a[near] - 1
        out[near] = -mu - s * var / 2 - s * s * k3 / 6
    if rest.any():
        ar = a[rest]
        out[rest] = logsumexp(ar[:, None] * lp[None, :], axis=1) / (1 - ar)
    return out[0] if scalar else out


def renyi_entropy(p, alpha):
    return float(entropy_curve(_support_logp(p), alpha))


def shannon_entropy(p):
    return renyi_entropy(p, 1.0)


def mode_entropy(p):
    return float(-_support_logp(p).mean())


def _tilt_weights(lp, alpha):
    if alpha == INF:
        w = (lp >= lp.max() - TIE_TOL).astype(float)
    elif alpha == -INF:
        w = (lp <= lp.min() + TIE_TOL).astype(float)
    else:
        z = alpha * lp
        w = np.exp(z - z.max())
    return w / w.sum()


def tilted(p, alpha):
    """The alpha-tilted pmf p^alpha / sum p^alpha on supp(p)."""
    probs = as_probs(p)
    keep = probs > 0
    out = np.zeros(probs.size)
    out[keep] = _tilt_weights(np.log(probs[keep]), alpha)
    labels = p.labels if isinstance(p, Pmf) else None
    return Pmf.from_probs(out, labels)


def tilted_cross_entropy(p, alpha):
    lp = _support_logp(p)
    return float(-np.dot(_tilt_weights(lp, alpha), lp))


def renyi_divergence(p, q, alpha):
    """D_alpha(p||q) for alpha in [0, inf]; +inf on support mismatch."""
    if alpha < 0 or math.isnan(alpha):
        raise ValueError("divergence order must be nonnegative")
    pp, qq = as_probs(p), as_probs(q)
    if pp.shape != qq.shape:
        raise ValueError("p and q live on different alphabets")
    keep = pp > 0
    ps, qs = pp[keep], qq[keep]
    if alpha == 0:
        mass = qs.sum()
        return INF if mass <= 0 else max(0.0, -math.log(mass))
    lp = np.log(ps)
    hole = qs <= 0
    if alpha >= 1 and hole.any():
        return INF
    if alpha < 1:
        if hole.all():
            return INF
        lp, ps, qs = lp[~hole], ps[~hole], qs[~hole]
    llr = lp - np.log(qs)
    if alpha == INF:
        val = llr.max()
    elif alpha == 1:
        val = np.dot(ps, llr)
    elif abs(alpha - 1) < NEAR_ONE and not hole.any():
        mu, var, k3 = _cumulants(llr, ps)
        s = alpha - 1
        val = mu + s * var / 2 + s * s * k3 / 6
    else:
        val = logsumexp(alpha * lp + (1 - alpha) * np.log(qs)) / (alpha - 1)
    return max(0.0, float(val))


def max_renyi(p, q, alpha):
    return max(renyi_divergence(p, q, alpha), renyi_divergence(q, p, alpha))


def sum_renyi(p, q, alpha):
    return renyi_divergence(p, q, alpha) + renyi_divergence(q, p, alpha)


def log_variation_distance(p, q):
    """sup_x |log p(x) - log q(x)| over the union of supports."""
    pp, qq = as_probs(p), as_probs(q)
    keep = (pp > 0) | (qq > 0)
    if np.any((pp[keep] <= 0) | (qq[keep] <= 0)):
        return INF
    return float(np.abs(np.log(pp[keep]) - np.log(qq[keep])).max())
