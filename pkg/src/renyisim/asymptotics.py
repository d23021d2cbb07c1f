"""Limits of normalized Renyi divergences for i.i.d. simulation.

Covers the three measure choices (forward, reverse and max divergence),
the resulting conversion rates, and their resolvability and
intrinsic-randomness specializations. All values are in nats, rates are
output symbols per input symbol.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dist import as_probs
from .measures import INF, entropy_curve
from .optimize import clamp, maximize, maximize_2d, maximize_halfline, minimize

KNIFE_TOL = 1e-12
LN2 = math.log(2)


class Direction(Enum):
    PQ = "pq"
    QP = "qp"
    MAX = "max"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown direction {value!r}; use pq, qp or max")


class KnifeEdgeError(ValueError):
    """The rate sits exactly on the support-size boundary, where no limit is defined."""


@dataclass(frozen=True)
class RateQuery:
    p: object
    q: object
    R: float
    alpha: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")


def _lp(p):
    probs = as_probs(p)
    return np.log(probs[probs > 0])


def _inv(x, sign=1.0):
    """1/x elementwise with 1/0 read as a signed infinity."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x == 0, sign * INF, 1.0 / np.where(x == 0, 1.0, x))


def _c(alpha):
    """(alpha-1)/alpha with exact values at 1 and infinity."""
    if alpha == INF:
        return 1.0
    if alpha == 1:
        return 0.0
    return (alpha - 1) / alpha


def _h(lp, orders):
    return entropy_curve(lp, orders)


def _support_ratio(lp, lq):
    if lq.size == 1:
        return INF
    return math.log(lp.size) / math.log(lq.size)


def _check_knife(R, edge):
    if edge < INF and abs(R - edge) <= KNIFE_TOL * max(1.0, edge):
        raise KnifeEdgeError(f"R = {R} equals the support ratio {edge}; the limit is undefined there")


def _pq_objective(lp, lq, R, alpha):
    c = _c(alpha) if alpha != 0 else None

    def f(t):
        t = np.asarray(t, dtype=float)
        oq = _inv(1 - t)
        op = np.zeros_like(t) if c is None else _inv(1 - c * t)
        return t * _h(lq, oq) - (t / R) * _h(lp, op)

    return f


def _pq_tail_objective(lp, lq, R, alpha):
    """PQ objective on t = alpha/(alpha-1) + w, w >= 0 (negative orders)."""
    c = _c(alpha)
    shift = -1.0 / (alpha - 1) if alpha != INF else 0.0

    def f(w):
        w = np.asarray(w, dtype=float)
        t = (1.0 / c) + w
        oq = _inv(shift - w, -1.0)
        op = _inv(-c * w, -1.0)
        return t * _h(lq, oq) - (t / R) * _h(lp, op)

    return f


def _pq(lp, lq, R, alpha):
    val, _ = maximize(_pq_objective(lp, lq, R, alpha), 0.0, 1.0)
    return max(0.0, val)


def _qp_small(lp, lq, R, alpha):
    r = alpha / (1 - alpha)

    def f(t):
        t = np.asarray(t, dtype=float)
        return t * _h(lq, _inv(1 - t)) - (t / R) * _h(lp, _inv(1 + r * t))

    val, _ = maximize(f, 0.0, 1.0)
    return max(0.0, r * val)


def _qp_large(lp, lq, R, alpha):
    c = _c(alpha)

    def f(t):
        t = np.asarray(t, dtype=float)
        return t * _h(lq, _inv(1 + c * t)) - (t / R) * _h(lp, _inv(1 + t))

    return max(0.0, maximize_halfline(f, at_infinity=-INF))


def _max_small(lp, lq, R, alpha):
    r = alpha / (1 - alpha)

    def f(t, s):
        a = (r - 1) * s + 1
        b = (1 - r) * s + r
        return t * b * _h(lq, _inv(1 - t)) - (t * b / R) * _h(lp, _inv(1 + (b / a) * t))

    return max(0.0, maximize_2d(f, (0.0, 1.0), (0.0, 1.0)))


def asymptotic_divergence(query, direction):
    """lim (1/n) inf_f of the chosen divergence at rate R = n/k."""
    d = Direction.parse(direction)
    lp, lq = _lp(query.p), _lp(query.q)
    R, alpha = float(query.R), float(query.alpha)
    if d is Direction.PQ:
        return clamp(_pq(lp, lq, R, alpha))
    if alpha == 0:
        return 0.0 if d is Direction.QP else clamp(_pq(lp, lq, R, 0.0))
    if alpha < 1:
        if d is Direction.QP:
            return clamp(_qp_small(lp, lq, R, alpha))
        return clamp(_max_small(lp, lq, R, alpha))
    edge = _support_ratio(lp, lq)
    _check_knife(R, edge)
    if R > edge:
        return INF
    qp = _qp_large(lp, lq, R, alpha)
    if d is Direction.QP:
        return clamp(qp)
    val = max(qp, _pq(lp, lq, R, alpha))
    if alpha > 1:
        val = max(val, maximize_halfline(_pq_tail_objective(lp, lq, R, alpha), at_infinity=-INF))
    return clamp(val)


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), INF)


def _pq_rate_inf(lp, lq, alpha):
    c = _c(alpha)

    def f(t):
        t = np.asarray(t, dtype=float)
        return _ratio(_h(lp, _inv(1 - c * t)), _h(lq, _inv(1 - t)))

    val, _ = minimize(f, 0.0, 1.0)
    return val


def _pq_tail_rate_inf(lp, lq, alpha):
    c = _c(alpha)
    shift = -1.0 / (alpha - 1) if alpha != INF else 0.0

    def f(w):
        w = np.asarray(w, dtype=float)
        return _ratio(_h(lp, _inv(-c * w, -1.0)), _h(lq, _inv(shift - w, -1.0)))

    return -maximize_halfline(lambda w: -f(w), at_infinity=-_support_ratio(lp, lq))


def _qp_rate_inf(lp, lq, alpha):
    c = _c(alpha)

    def f(t):
        t = np.asarray(t, dtype=float)
        return _ratio(_h(lp, _inv(1 + t)), _h(lq, _inv(1 + c * t)))

    return -maximize_halfline(lambda t: -f(t), at_infinity=-_support_ratio(lp, lq))


def conversion_rate(p, q, alpha, direction):
    """Supremum of R = n/k at which the normalized divergence vanishes."""
    if not alpha >= 0:
        raise ValueError("alpha must be nonnegative")
    d = Direction.parse(direction)
    lp, lq = _lp(p), _lp(q)
    h_p, h_q = float(_h(lp, 1.0)), float(_h(lq, 1.0))
    shannon = h_p / h_q if h_q > 0 else INF
    if alpha == 0:
        if d is Direction.QP:
            return INF
        return math.log(lp.size) / h_q if h_q > 0 else INF
    if alpha < 1:
        return shannon
    if d is Direction.PQ:
        return float(_pq_rate_inf(lp, lq, alpha))
    if alpha == 1:
        return min(shannon, _support_ratio(lp, lq))
    qp = float(_qp_rate_inf(lp, lq, alpha))
    if d is Direction.QP:
        return qp
    return min(qp, float(_pq_rate_inf(lp, lq, alpha)), float(_pq_tail_rate_inf(lp, lq, alpha)))


def conversion_rate_unnormalized_lb(p, q, alpha):
    """Lower bound on the rate for the unnormalized forward divergence, alpha in (1, inf)."""
    if not 1 < alpha < INF:
        raise ValueError("alpha must lie in (1, inf)")
    lp, lq = _lp(p), _lp(q)
    s = alpha - 1

    def f(t):
        t = np.asarray(t, dtype=float)
        order = (s + t) / (s + t - s * t)
        return _ratio(_h(lp, order), _h(lq, _inv(1 - t)))

    val, _ = minimize(f, 0.0, 1.0)
    return val


def resolvability(q, alpha, direction):
    """Minimum uniform-randomness rate (nats per output symbol)."""
    if not alpha >= 0:
        raise ValueError("alpha must be nonnegative")
    d = Direction.parse(direction)
    lq = _lp(q)
    if d is Direction.PQ:
        return float(_h(lq, 1.0))
    if d is Direction.QP:
        if alpha == 0:
            return 0.0
        return float(_h(lq, 0.0 if alpha >= 1 else 1.0))
    if alpha >= 1:
        return float(_h(lq, 1 - alpha))
    return float(_h(lq, 1.0))


def _res_sup(lq, rate):
    """sup_{t in [0,1]} {t H_{1/(1-t)}(q) - t rate}."""

    def f(t):
        t = np.asarray(t, dtype=float)
        return t * _h(lq, _inv(1 - t)) - t * rate

    val, _ = maximize(f, 0.0, 1.0)
    return max(0.0, val)


def resolvability_asymptotics(q, rate, alpha, direction):
    """Limit of the normalized divergence when simulating q from e^{n rate} uniform values."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    d = Direction.parse(direction)
    lq = _lp(q)
    if d is Direction.PQ:
        return clamp(_res_sup(lq, rate))
    if alpha == 0:
        return 0.0 if d is Direction.QP else clamp(_res_sup(lq, rate))
    if alpha < 1:
        weight = alpha / (1 - alpha)
        if d is Direction.MAX:
            weight = max(weight, 1.0)
        return clamp(weight * _res_sup(lq, rate))
    h0 = math.log(lq.size)
    _check_knife(rate, h0)
    if rate < h0:
        return INF
    if d is Direction.QP or alpha == 1:
        return 0.0
    start = -1.0 / (alpha - 1) if alpha != INF else 0.0
    lead = alpha / (alpha - 1) if alpha != INF else 1.0

    def f(w):
        w = np.asarray(w, dtype=float)
        t = lead + w
        return t * _h(lq, _inv(start - w, -1.0)) - t * rate

    return clamp(max(0.0, maximize_halfline(f, at_infinity=-INF)))


def intrinsic_randomness(p, alpha, direction):
    """Maximum extractable uniform-randomness rate (nats per source symbol)."""
    if not alpha >= 0:
        raise ValueError("alpha must be nonnegative")
    d = Direction.parse(direction)
    lp = _lp(p)
    if d is Direction.QP:
        return INF if alpha == 0 else float(_h(lp, 1.0))
    if 0 < alpha < 1:
        return float(_h(lp, 1.0))
    return float(_h(lp, alpha))


def _ir_qp_sup(lp, rate):
    """sup_{t >= 0} {t rate - t H_{1/(1+t)}(p)}."""
    h0 = math.log(lp.size)
    if rate > h0 + KNIFE_TOL:
        return INF

    def f(t):
        t = np.asarray(t, dtype=float)
        return t * rate - t * _h(lp, _inv(1 + t))

    return clamp(max(0.0, maximize_halfline(f)))


def intrinsic_asymptotics(p, rate, alpha, direction):
    """Limit of the normalized divergence when extracting e^{n rate} uniform values from p^n."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    d = Direction.parse(direction)
    lp = _lp(p)
    if d is Direction.QP:
        if alpha == 0:
            return 0.0
        if alpha >= 1:
            return _ir_qp_sup(lp, rate)
        r = alpha / (1 - alpha)

        def f(t):
            t = np.asarray(t, dtype=float)
            return t * rate - t * _h(lp, _inv(1 + r * t))

        val, _ = maximize(f, 0.0, 1.0)
        return clamp(max(0.0, r * val))
    if alpha == 0 or alpha >= 1:
        plus = max(0.0, rate - float(_h(lp, alpha)))
        if d is Direction.PQ or alpha == 0:
            return plus
        return max(plus, _ir_qp_sup(lp, rate))
    c = (alpha - 1) / alpha
    if d is Direction.PQ:

        def f(t):
            t = np.asarray(t, dtype=float)
            return t * rate - t * _h(lp, _inv(1 - c * t))

        val, _ = maximize(f, 0.0, 1.0)
        return max(0.0, val)
    r = alpha / (1 - alpha)

    def g(t, s):
        a = (r - 1) * s + 1
        b = (1 - r) * s + r
        return t * b * rate - t * b * _h(lp, a / (a + t * b))

    return max(0.0, maximize_2d(g, (0.0, 1.0), (0.0, 1.0)))


def best_set_mass_exponents(q, rate):
    """Exponents of the best e^{n rate}-set mass and of its complement."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    lq = _lp(q)
    first = clamp(_res_sup(lq, rate))
    if rate > math.log(lq.size) + KNIFE_TOL:
        return first, INF

    def f(t):
        t = np.asarray(t, dtype=float)
        return t * rate - t * _h(lq, _inv(1 + t))

    second = clamp(max(0.0, maximize_halfline(f)))
    return first, second
