"""Shared strategies and dense-grid references.

The references below are written straight from the closed-form sups and
share no code with the library optimizers.
"""

import math
import warnings

import numpy as np
from hypothesis import strategies as st

from renyisim import (
    Pmf,
    intrinsic_code,
    inverse_transform_code,
    max_renyi,
    partition_code,
    renyi_divergence,
    renyi_entropy,
    resolvability_quantizer,
    sum_renyi,
    three_region_code,
    type_spreading_code,
)
from renyisim.codes import DeltaWarning, InfeasibleCode

INF = math.inf
T_POINTS = 20001

# pass/fail lines from the acceptance suite, printed in the terminal summary
ACCEPTANCE = []


def pmfs(min_size=2, max_size=4, floor=1e-3):
    weights = st.lists(st.floats(floor, 1.0), min_size=min_size, max_size=max_size)
    return weights.map(lambda w: np.asarray(w) / np.sum(w))


def random_pmf(rng, size, floor=0.02):
    """Dirichlet draw kept away from the simplex boundary and from uniform."""
    while True:
        p = rng.dirichlet(np.ones(size))
        if p.min() >= floor and p.max() - p.min() > 0.05:
            return p


def renyi(p, orders):
    """H_b(p) for an array of orders, vectorized and written from the definition."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0] / p.sum()
    lp = np.log(p)
    b = np.atleast_1d(np.asarray(orders, dtype=float))
    out = np.empty(b.shape)
    shannon = -(p * lp).sum()
    pos_inf, neg_inf = b == INF, b == -INF
    one = np.abs(b - 1) < 1e-9
    rest = ~(pos_inf | neg_inf | one)
    z = b[rest, None] * lp[None, :]
    top = z.max(axis=1)
    lse = top + np.log(np.exp(z - top[:, None]).sum(axis=1))
    out[rest] = lse / (1 - b[rest])
    out[one] = shannon
    out[pos_inf] = -lp.max()
    out[neg_inf] = -lp.min()
    return out


def _order(x):
    with np.errstate(divide="ignore"):
        return 1.0 / x


def unit_grid(n=T_POINTS, closed=True):
    return np.linspace(0.0, 1.0, n) if closed else np.linspace(0.0, 1.0, n)[:-1]


def half_line(n=T_POINTS, top=1 - 1e-7):
    u = np.linspace(0.0, top, n)
    return u / (1 - u)


def signed_c(alpha):
    return 1.0 if alpha == INF else (alpha - 1) / alpha


def pq_asym(p, q, R, alpha):
    """sup over closed [0, 1] of t H_{1/(1-t)}(q) - (t/R) H_{1/(1-ct)}(p)."""
    t = unit_grid()
    if alpha == 0:
        hp = np.full(t.shape, math.log(np.count_nonzero(p)))
    else:
        hp = renyi(p, _order(1 - signed_c(alpha) * t))
    return float(np.max(t * renyi(q, _order(1 - t)) - t / R * hp))


def qp_asym(p, q, R, alpha):
    if alpha == 0:
        return 0.0
    if alpha < 1:
        g = alpha / (1 - alpha)
        t = unit_grid()
        f = t * renyi(q, _order(1 - t)) - t / R * renyi(p, _order(1 + g * t))
        return float(g * np.max(f))
    if R > math.log(np.count_nonzero(p)) / math.log(np.count_nonzero(q)):
        return INF
    c = signed_c(alpha)
    t = half_line()
    f = t * renyi(q, _order(1 + c * t)) - t / R * renyi(p, _order(1 + t))
    return float(max(0.0, np.max(f)))


def max_asym(p, q, R, alpha):
    """The Max row for alpha in {0} and [1, inf]."""
    if alpha == 0:
        t = unit_grid()
        f = t * renyi(q, _order(1 - t)) - t / R * math.log(np.count_nonzero(p))
        return float(np.max(f))
    if R > math.log(np.count_nonzero(p)) / math.log(np.count_nonzero(q)):
        return INF
    if alpha == 1:
        t = unit_grid()
        a = np.max(t * renyi(q, _order(1 - t)) - t / R * renyi(p, 1.0))
        t = half_line()
        b = np.max(t * renyi(q, 1.0) - t / R * renyi(p, _order(1 + t)))
        return float(max(a, b))
    c = signed_c(alpha)
    t = 1 / c + half_line()[1:]
    tail = np.max(t * renyi(q, _order(1 - t)) - t / R * renyi(p, _order(1 - c * t)))
    return float(max(pq_asym(p, q, R, alpha), qp_asym(p, q, R, alpha), tail))


def max_asym_2d(p, q, R, alpha, n=401):
    """The alpha in (0, 1) Max row on an n x n grid."""
    g = alpha / (1 - alpha)
    best = 0.0
    for s in np.linspace(0, 1, n):
        a = (g - 1) * s + 1
        b = (1 - g) * s + g
        t = unit_grid(n)
        f = t * b * renyi(q, _order(1 - t)) - t * b / R * renyi(p, _order(1 + b / a * t))
        best = max(best, float(np.max(f)))
    return best


def binary_grid_exponent(p, rho, R, n=100001):
    a = np.linspace(0.0, 1.0, n)
    w = np.stack([1 - a, a], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), 0.0)
    ent = -(w * logw).sum(axis=1)
    kl = (w * (logw - np.log(p))).sum(axis=1)
    return float(np.max(rho * np.minimum(ent, R) - kl))


def pq_rate(p, q, alpha):
    if alpha == 0:
        return math.log(np.count_nonzero(p)) / renyi(q, 1.0)[0]
    if alpha < 1:
        return renyi(p, 1.0)[0] / renyi(q, 1.0)[0]
    c = signed_c(alpha)
    t = unit_grid()[1:]
    return float(np.min(renyi(p, _order(1 - c * t)) / renyi(q, _order(1 - t))))


def qp_rate(p, q, alpha):
    if alpha == 0:
        return INF
    h = renyi(p, 1.0)[0] / renyi(q, 1.0)[0]
    if alpha < 1:
        return h
    h0 = math.log(np.count_nonzero(p)) / math.log(np.count_nonzero(q))
    if alpha == 1:
        return min(h, h0)
    c = signed_c(alpha)
    t = half_line()[1:]
    return float(np.min(renyi(p, _order(1 + t)) / renyi(q, _order(1 + c * t))))


def max_rate(p, q, alpha):
    if alpha <= 1:
        return pq_rate(p, q, alpha) if alpha < 1 else qp_rate(p, q, 1)
    c = signed_c(alpha)
    t = 1 / c + half_line()[1:]
    tail = np.min(renyi(p, _order(1 - c * t)) / renyi(q, _order(1 - t)))
    return float(min(pq_rate(p, q, alpha), qp_rate(p, q, alpha), tail))


def lower_exponent(p, j):
    t = half_line()
    return float(max(0.0, np.max(t * renyi(p, 1 + t) - t * j)))


def upper_exponent(p, j):
    t = half_line()
    return float(max(0.0, np.max(t * j - t * renyi(p, 1 - t))))


def inverse_lower(p, w):
    t = half_line()[1:]
    return float(np.max(renyi(p, 1 + t) - w / t))


def inverse_upper(p, w):
    t = half_line()[1:]
    return float(np.min(renyi(p, 1 - t) + w / t))


def expand(induced):
    """Per-atom (target mass, induced mass) arrays in target rank order."""
    return np.repeat(np.exp(induced.log_q), induced.count), np.repeat(np.exp(induced.log_p), induced.count)


ORDER_GRID = [-INF] + [x / 4 for x in range(-20, 21)] + [INF]
POSITIVE_GRID = [0.0] + [x / 4 for x in range(1, 21)] + [10.0, 100.0, INF]


def check_entropy_monotone(p):
    h = [renyi_entropy(p, a) for a in ORDER_GRID]
    return all(a >= b - 1e-10 for a, b in zip(h, h[1:]))


def check_scaled_entropy_monotone(p):
    """((a-1)/a) H_a is nondecreasing on (0, inf] and on [-inf, 0) separately."""
    def scaled(a):
        return renyi_entropy(p, a) if a in (INF, -INF) else (a - 1) / a * renyi_entropy(p, a)

    pos = [scaled(a) for a in ORDER_GRID if a > 0]
    neg = [scaled(a) for a in ORDER_GRID if a < 0]
    return all(a <= b + 1e-10 for a, b in zip(pos, pos[1:])) and all(a <= b + 1e-10 for a, b in zip(neg, neg[1:]))


def check_divergence_monotone(p, q):
    d = [renyi_divergence(p, q, a) for a in POSITIVE_GRID]
    return all(a <= b + 1e-10 for a, b in zip(d, d[1:]))


def check_skew_symmetry(p, q, alpha):
    lhs = renyi_divergence(p, q, alpha)
    rhs = alpha / (1 - alpha) * renyi_divergence(q, p, 1 - alpha)
    return abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def check_sandwich(p, q, alpha):
    m, s = max_renyi(p, q, alpha), sum_renyi(p, q, alpha)
    return m - 1e-12 <= s <= 2 * m + 1e-12


def check_max_divergence_properties(rng, p, q, r):
    """Triangle inequality, ratio bounds, expectation bounds and channel identity."""
    d = lambda a, b: max_renyi(a, b, INF)
    if d(p, r) > d(p, q) + d(q, r) + 1e-12:
        return False
    eps = d(p, q)
    ratio = p / q
    if ratio.min() < math.exp(-eps) * (1 - 1e-12) or ratio.max() > math.exp(eps) * (1 + 1e-12):
        return False
    f = rng.exponential(size=p.size) * (rng.random(p.size) < 0.7)
    if f.sum() == 0:
        f[0] = 1.0
    lr = math.log(np.dot(p, f) / np.dot(q, f))
    if lr > renyi_divergence(p, q, INF) + 1e-12 or lr < -renyi_divergence(q, p, INF) - 1e-12:
        return False
    w = rng.dirichlet(np.ones(3), size=p.size)
    joint = abs(d((p[:, None] * w).ravel(), (q[:, None] * w).ravel()) - eps) <= 1e-12
    marginal = d(p @ w, q @ w) <= eps + 1e-12
    return joint and marginal


def check_limits(p, q):
    pairs = [
        (renyi_entropy(p, 1 + 1e-6), renyi_entropy(p, 1.0)),
        (renyi_entropy(p, 1 - 1e-6), renyi_entropy(p, 1.0)),
        (renyi_entropy(p, 1e-6), renyi_entropy(p, 0.0)),
        (renyi_entropy(p, -1e-6), renyi_entropy(p, 0.0)),
        (renyi_entropy(p, 1e6), renyi_entropy(p, INF)),
        (renyi_divergence(p, q, 1 + 1e-6), renyi_divergence(p, q, 1.0)),
        (renyi_divergence(p, q, 1 - 1e-6), renyi_divergence(p, q, 1.0)),
        (renyi_divergence(p, q, 1e-6), renyi_divergence(p, q, 0.0)),
        (renyi_divergence(p, q, 1e6), renyi_divergence(p, q, INF)),
    ]
    return all(abs(a - b) <= 1e-4 for a, b in pairs)


def measure_suite(rng):
    """All measure invariants on one random instance; returns the failed names."""
    size = int(rng.integers(2, 6))
    p, q, r = (rng.dirichlet(np.ones(size)) + 1e-4 for _ in range(3))
    p, q, r = p / p.sum(), q / q.sum(), r / r.sum()
    alpha = float(rng.uniform(0.01, 0.99))
    checks = {
        "entropy monotone": check_entropy_monotone(p),
        "scaled entropy monotone": check_scaled_entropy_monotone(p),
        "divergence monotone": check_divergence_monotone(p, q),
        "skew symmetry": check_skew_symmetry(p, q, alpha),
        "sandwich": check_sandwich(p, q, float(rng.choice([0.5, 1.0, 2.0, INF]))),
        "max-divergence properties": check_max_divergence_properties(rng, p, q, r),
        "limits": check_limits(p, q),
    }
    return [k for k, ok in checks.items() if not ok]


def sorted_pair(rng, max_size=8):
    """Random descending pmfs, mixing flat and peaked draws."""
    a, b = rng.integers(1, max_size + 1, size=2)
    p = -np.sort(-rng.dirichlet(np.ones(a) * rng.choice([0.3, 1.0, 3.0])))
    q = -np.sort(-rng.dirichlet(np.ones(b) * rng.choice([0.3, 1.0, 3.0])))
    p = p[p > 1e-9]
    return p / p.sum(), q


def mapping1_clauses(p, q, py):
    """Atom-wise check of the inverse-transform properties.

    Returns counts of checked targets and of failures for: the map itself,
    the first clause, the lower and upper bounds of the second clause as
    stated, and the upper bound with the heaviest atom mapped to y_j.
    """
    gx, gy = np.cumsum(p), np.cumsum(q)
    gx[-1] = gy[-1] = 1.0
    tol = 1e-12 * min(p.min(), q[q > 0].min())
    jmap = np.array([np.flatnonzero(gy >= g - tol)[0] for g in gx])
    direct = np.bincount(jmap, weights=p, minlength=q.size)
    out = {"checked": 0, "map": int(not np.allclose(direct, py, atol=1e-12)),
           "clause1": 0, "lower": 0, "upper": 0, "upper_first": 0}
    for j in range(q.size):
        below = np.flatnonzero(gx <= gy[j] + tol)
        if below.size == 0:
            continue
        i = below[-1]
        out["checked"] += 1
        if p[i] >= q[j]:
            out["clause1"] += int(py[j] > p[i] + 1e-12 or np.count_nonzero(jmap == j) > 1)
        else:
            out["lower"] += int(py[j] < max(q[j] / 2, q[j] - p[i]) - 1e-12)
            out["upper"] += int(py[j] > q[j] + p[i] + 1e-12)
        mapped = np.flatnonzero(jmap == j)
        if mapped.size:
            out["upper_first"] += int(py[j] > q[j] + p[mapped[0]] + 1e-12)
    return out


def mapping2_reference(p, q):
    """Greedy map by explicit loops: (induced masses, last source index per run, L)."""
    py = np.zeros(q.size)
    last = []
    i = 0
    for m in range(q.size):
        if i >= p.size:
            break
        acc = 0.0
        while i < p.size and (acc < q[m] * (1 - 1e-12) or m == q.size - 1):
            acc += p[i]
            i += 1
        py[m] = acc
        last.append(i - 1)
    if i < p.size:
        py[len(last) - 1] += p[i:].sum()
    return py, last, len(last)


def mapping2_sandwich(p, q, py):
    _, last, L = mapping2_reference(p, q)
    ok = True
    for m in range(L):
        top = py[m] < q[m] + p[last[m]] + 1e-12
        ok &= bool(top and (m == L - 1 or py[m] >= q[m] * (1 - 1e-12)))
    return ok and bool(np.all(py[L:] == 0))


def all_codes(rng):
    """One code of every kind on a small random instance."""
    p = Pmf.from_probs(random_pmf(rng, 2))
    q = Pmf.from_probs(random_pmf(rng, 3))
    k, n = int(rng.integers(3, 9)), int(rng.integers(2, 6))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeltaWarning)
        yield inverse_transform_code(p, q, k, n)
        yield inverse_transform_code(p, q, k, n, delta=0.1)
        yield three_region_code(p, q, k, n)
        yield type_spreading_code(p, q, k, n, 2.0)
        yield partition_code(p, q, k, n, 0.05)
        yield resolvability_quantizer(q, n, int(rng.integers(2, 300)), 0.1, str(rng.choice(["pq", "qp", "max"])))
        M = int(rng.integers(2, 6))
        yield intrinsic_code(p, k, M, 0.01, "pq")
        try:
            yield intrinsic_code(p, k, M, 0.01, "qp")
        except InfeasibleCode:
            pass
