"""Brute-force references for the closed forms and the code constructions.

Everything here works on explicitly enumerated atoms or grids and shares
no numerical path with the library routines it is used to check.
"""

import functools
import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import xlogy

from .asymptotics import Direction
from .codes import CodeKind, UniformSpace
from .dist import GuardExceeded, ProductView, as_pmf, check_guard, log_class_sizes
from .measures import INF

MAP_GUARD = 10**7
SIMPLEX_GUARD = 5 * 10**7
CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    oracle_value: float
    library_value: float
    gap: float
    tolerance: float
    passed: bool
    witness: str = ""

    @classmethod
    def compare(cls, quantity, oracle_value, library_value, tolerance, witness=""):
        a, b = float(oracle_value), float(library_value)
        if a == b:
            gap = 0.0
        elif math.isinf(a) or math.isinf(b):
            gap = INF
        else:
            gap = abs(a - b)
        return cls(quantity, a, b, gap, float(tolerance), gap <= tolerance, witness)

    def to_json(self):
        data = asdict(self)
        for key in ("oracle_value", "library_value", "gap"):
            if math.isinf(data[key]):
                data[key] = "inf" if data[key] > 0 else "-inf"
        return json.dumps(data)


def _rowwise_divergence(a, b, alpha):
    """D_alpha(a_r || b_r) for every row r of two nonnegative matrices."""
    a = np.atleast_2d(a)
    b = np.broadcast_to(np.atleast_2d(b), a.shape)
    pos = a > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        if alpha == 0:
            mass = np.where(pos, b, 0.0).sum(axis=1)
            return np.where(mass > 0, -np.log(mass), INF)
        hole = (pos & (b <= 0)).any(axis=1)
        if alpha == INF:
            r = np.where(pos & (b > 0), a / np.where(b > 0, b, 1.0), 0.0)
            out = np.log(r.max(axis=1))
            return np.where(hole, INF, out)
        if alpha == 1:
            t = np.where(pos & (b > 0), a * np.log(np.where(pos, a, 1.0) / np.where(b > 0, b, 1.0)), 0.0)
            return np.where(hole, INF, t.sum(axis=1))
        ok = pos & (b > 0)
        s = np.where(ok, a**alpha * np.where(b > 0, b, 1.0) ** (1 - alpha), 0.0).sum(axis=1)
        out = np.log(s) / (alpha - 1)
        if alpha > 1:
            out = np.where(hole, INF, out)
        return np.where(np.isnan(out), INF, out)


def divergence_by_direction(py, q, alpha, direction):
    d = Direction.parse(direction)
    if d is Direction.PQ:
        v = _rowwise_divergence(py, q, alpha)
    elif d is Direction.QP:
        v = _rowwise_divergence(np.broadcast_to(q, np.shape(py)), py, alpha)
    else:
        v = np.maximum(
            _rowwise_divergence(py, q, alpha),
            _rowwise_divergence(np.broadcast_to(q, np.shape(py)), py, alpha),
        )
    return np.maximum(v, 0.0)


def brute_force_optimal_map(p, q, alpha, direction):
    """Exhaustive minimum of the divergence over all maps supp(p) -> supp(q).

    Returns (map, value) where map[i] is the target symbol index of the
    i-th source symbol. Ties go to the lexicographically first map.
    """
    pp, qq = as_pmf(p).probs, as_pmf(q).probs
    src = np.flatnonzero(pp > 0)
    tgt = np.flatnonzero(qq > 0)
    a, b = src.size, tgt.size
    total = b**a
    if total > MAP_GUARD:
        raise GuardExceeded(f"{total} candidate maps exceed the search guard {MAP_GUARD}")
    weights = b ** np.arange(a - 1, -1, -1)
    best_val, best_code = INF, 0
    found = False
    for lo in range(0, total, CHUNK):
        codes = np.arange(lo, min(total, lo + CHUNK))
        digits = (codes[:, None] // weights[None, :]) % b
        py = np.zeros((codes.size, qq.size))
        for i, s in enumerate(src):
            py[np.arange(codes.size), tgt[digits[:, i]]] += pp[s]
        vals = divergence_by_direction(py, qq, alpha, direction)
        i = int(np.argmin(vals))
        if not found or vals[i] < best_val:
            best_val, best_code, found = float(vals[i]), int(codes[i]), True
    digits = (best_code // weights) % b
    mapping = np.zeros(pp.size, dtype=int)
    mapping[src] = tgt[digits]
    return mapping.tolist(), best_val


def simplex_points(d, resolution):
    """All points of the simplex in d symbols with coordinates in multiples of 1/resolution."""
    count = math.comb(resolution + d - 1, d - 1)
    if count > SIMPLEX_GUARD:
        raise GuardExceeded(f"simplex grid with {count} points exceeds {SIMPLEX_GUARD}")
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        x = np.arange(resolution + 1) / resolution
        return np.stack([x, 1 - x], axis=1)
    rows = []
    for i in range(resolution + 1):
        sub = simplex_points(d - 1, resolution - i) * (resolution - i) if resolution > i else np.zeros((1, d - 1))
        rows.append(np.concatenate([np.full((sub.shape[0], 1), i), sub], axis=1))
    return np.concatenate(rows) / resolution


@functools.lru_cache(maxsize=4)
def _simplex_grid(d, resolution):
    w = simplex_points(d, resolution)
    ent = -xlogy(w, w).sum(axis=1)
    w.flags.writeable = False
    ent.flags.writeable = False
    return w, ent


OBJECTIVES = (
    "lower_exponent",
    "upper_exponent",
    "inverse_lower",
    "inverse_upper",
    "min_divergence",
    "entropy_tilt",
    "guessing",
    "entropy_ball",
)


def simplex_grid_opt(objective, p, constraint=None, resolution=1000, **kw):
    """Grid optimum of a simplex problem over pmfs on supp(p).

    objective:
      ``lower_exponent``  min D(w||p) s.t. -sum w log p <= constraint
      ``upper_exponent``  min D(w||p) s.t. -sum w log p >= constraint
      ``inverse_lower``   min -sum w log p s.t. D(w||p) <= constraint
      ``inverse_upper``   max -sum w log p s.t. D(w||p) <= constraint
      ``min_divergence``  min D(w||p), optionally s.t. H(w) <= constraint
      ``entropy_ball``    min D(w||p) s.t. H(w) >= constraint
      ``entropy_tilt``    sup (inf when a <= 0) of a H(w) + b sum w log p
      ``guessing``        max rho min(H(w), R) - D(w||p)
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if resolution > 2000:
        raise ValueError("resolution is capped at 2000 per dimension")
    probs = as_pmf(p).probs
    lp = np.log(probs[probs > 0])
    d = lp.size
    if d > 4:
        raise GuardExceeded("simplex oracle supports at most 4 symbols")
    w, ent = _simplex_grid(d, resolution)
    cross = -(w @ lp)
    kl = cross - ent
    tol = 1e-12
    if objective == "lower_exponent":
        val = np.where(cross <= constraint + tol, kl, INF).min()
    elif objective == "upper_exponent":
        val = np.where(cross >= constraint - tol, kl, INF).min()
    elif objective == "inverse_lower":
        val = np.where(kl <= constraint + tol, cross, INF).min()
    elif objective == "inverse_upper":
        val = np.where(kl <= constraint + tol, cross, -INF).max()
    elif objective == "min_divergence":
        val = kl.min() if constraint is None else np.where(ent <= constraint + tol, kl, INF).min()
    elif objective == "entropy_ball":
        val = np.where(ent >= constraint - tol, kl, INF).min()
    elif objective == "entropy_tilt":
        a, b = kw["a"], kw["b"]
        f = a * ent - b * cross
        val = f.max() if a >= 0 else f.min()
    else:
        rho, R = kw["rho"], kw["R"]
        val = (rho * np.minimum(ent, R) - kl).max()
    return float(val)


def empirical_spectrum(p, n, j):
    """Exact P^n(-(1/n) log P^n(x) < j) by type sums, and -(1/n) log of it."""
    view = ProductView(as_pmf(p), n)
    counts = view.types()
    probs = view.base.probs
    with np.errstate(divide="ignore"):
        lp = np.log(probs)
    lm = np.where((counts[:, probs <= 0] > 0).any(axis=1), -INF, counts @ np.where(probs > 0, lp, 0.0))
    info = -lm / n
    keep = np.isfinite(lm) & (info < j - 1e-12 * max(1.0, abs(j)))
    if not keep.any():
        return 0.0, INF
    if keep.all():
        return 1.0, 0.0
    logs = lm[keep] + log_class_sizes(counts[keep])
    top = logs.max()
    log_f = top + math.log(np.exp(logs - top).sum())
    return float(min(1.0, math.exp(log_f))), float(max(0.0, -log_f / n))


def _enumerate_masses(space):
    """Masses of every atom of a space, sorted in descending order."""
    if isinstance(space, UniformSpace):
        check_guard(space.M, "enumerated atom")
        return np.full(space.M, 1.0 / space.M)
    probs = space.base.probs
    check_guard(probs.size**space.n, "enumerated atom")
    masses = np.array([math.prod(t) for t in itertools.product(probs.tolist(), repeat=space.n)])
    return -np.sort(-masses, kind="stable")


def _naive_inverse(xs, ys):
    xs = xs[xs > 0]
    sx, sy = xs.sum(), ys.sum()
    xn, yn = xs / sx, ys / sy
    pos_y = yn[yn > 0]
    tol = 1e-12 * min(xn.min(), pos_y.min())
    tail_x = np.concatenate([np.cumsum(xn[::-1])[::-1][1:], [0.0]])
    tail_y = np.concatenate([np.cumsum(yn[::-1])[::-1][1:], [0.0]])
    # tail_x is nonincreasing, so the atoms with tail >= level form a prefix
    hi = np.searchsorted(-tail_x, -(tail_y - tol), side="right")
    out = np.zeros(ys.size)
    prev = 0
    for jdx in range(ys.size):
        out[jdx] = xn[prev : hi[jdx]].sum() * sx
        prev = max(prev, int(hi[jdx]))
    return out


def _naive_greedy(xs, ys, stop_mass=None, absorb=False):
    xs = xs[xs > 0]
    out = np.zeros(ys.size)
    i = filled = 0
    for jdx in range(ys.size):
        if ys[jdx] <= 0 or i >= xs.size:
            break
        need = ys[jdx] * (1 - 1e-12)
        acc, k = 0.0, i
        while k < xs.size and acc < need:
            acc += xs[k]
            k += 1
        done = acc >= need
        if stop_mass is not None and (not done or xs[k - 1] < stop_mass):
            break
        out[jdx] = acc
        i = k
        filled += int(done)
        if not done:
            break
    if absorb and i < xs.size:
        last = np.flatnonzero(out > 0)
        if last.size:
            out[last[-1]] += xs[i:].sum()
            i = xs.size
    return out, i, filled


def naive_stage_output(xs, ys, stages):
    """Induced pmf of a stage list, by direct loops over explicit atoms."""
    out = np.zeros(ys.size)
    rest_src = rest_tgt = None
    for st in stages:
        src_ranges = [tuple(r) for r in st["src"]] if st["src"] != "rest" else [rest_src]
        t_lo, t_hi = tuple(st["tgt"]) if st["tgt"] != "rest" else rest_tgt
        if st["rule"] == "top":
            out[t_lo] += sum(xs[a:b].sum() for a, b in src_ranges)
            continue
        s_lo, s_hi = src_ranges[0]
        sub_x, sub_y = xs[s_lo:s_hi], ys[t_lo:t_hi]
        if not (sub_x > 0).any():
            rest_src, rest_tgt = (s_lo, s_lo), (t_lo, t_hi)
            continue
        if not (sub_y > 0).any():
            out[t_lo if t_hi > t_lo else 0] += sub_x.sum()
            rest_src, rest_tgt = (s_hi, s_hi), (t_hi, t_hi)
            continue
        if st["rule"] == "inverse":
            out[t_lo:t_hi] += _naive_inverse(sub_x, sub_y)
            rest_src, rest_tgt = (s_hi, s_hi), (t_hi, t_hi)
        elif st.get("normalize", True):
            total = sub_x.sum()
            got, used, done = _naive_greedy(sub_x / total, sub_y / sub_y.sum(), absorb=True)
            out[t_lo:t_hi] += got * total
            rest_src, rest_tgt = (s_lo + used, s_hi), (t_lo + done, t_hi)
        else:
            stop = st.get("stop_log_mass")
            got, used, done = _naive_greedy(sub_x, sub_y, None if stop is None else math.exp(stop))
            out[t_lo:t_hi] += got
            rest_src, rest_tgt = (s_lo + used, s_hi), (t_lo + done, t_hi)
    return out


def _sequences_by_type(pmf, n):
    """Sequence masses in lexicographic order, with their type and in-type rank."""
    probs = pmf.probs.tolist()
    types, ranks, masses = [], [], []
    seen = {}
    for seq in itertools.product(range(len(probs)), repeat=n):
        t = tuple(seq.count(s) for s in range(len(probs)))
        r = seen.get(t, 0)
        seen[t] = r + 1
        types.append(t)
        ranks.append(r)
        masses.append(math.prod(probs[s] for s in seq))
    return types, ranks, np.array(masses)


def _naive_type_code(code):
    p, k = code.source.base, code.source.n
    q, n = code.target.base, code.target.n
    check_guard(p.size**k, "enumerated atom")
    check_guard(q.size**n, "enumerated atom")
    s_types, s_ranks, s_mass = _sequences_by_type(p, k)
    t_types, t_ranks, t_mass = _sequences_by_type(q, n)
    members = {}
    for idx, t in enumerate(t_types):
        members.setdefault(t, []).append(idx)
    sizes = {}
    for t in s_types:
        sizes[t] = sizes.get(t, 0) + 1
    plan = {}
    for entry in code.assignment:
        src = tuple(entry["source_type"])
        plan[src] = [tuple(entry["target_type"])] if "target_type" in entry else [tuple(t) for t in entry["targets"]]
    out = np.zeros(t_mass.size)
    for t, r, m in zip(s_types, s_ranks, s_mass):
        targets = plan[t]
        a = len(targets)
        base, extra = divmod(sizes[t], a)
        # ranks fill the larger parts first
        big = extra * (base + 1)
        if r < big:
            part, off = divmod(r, base + 1)
        else:
            part, off = extra + (r - big) // base, (r - big) % base
        seqs = members[targets[part]]
        out[seqs[off % len(seqs)]] += m
    return out, t_mass


def naive_induced(code):
    """(induced masses, target masses) of a code by full atom enumeration."""
    if code.kind in (CodeKind.TYPE_SPREADING, CodeKind.PARTITION):
        return _naive_type_code(code)
    xs = _enumerate_masses(code.source)
    ys = _enumerate_masses(code.target)
    return naive_stage_output(xs, ys, code.stages), ys


def naive_evaluate(code, alpha, direction):
    py, q = naive_induced(code)
    return float(divergence_by_direction(py[None, :], q, alpha, direction)[0])


def check_norm_inequality(rng, trials=200):
    """sum a^p <= (sum a)^p for p >= 1 and the reverse for p in (0, 1]."""
    for _ in range(trials):
        a = rng.exponential(size=rng.integers(1, 8)) * rng.choice([1e-3, 1.0, 1e3])
        pw = rng.uniform(1, 6)
        if not (a**pw).sum() <= a.sum() ** pw * (1 + 1e-12):
            return False, ("p>=1", a.tolist(), pw)
        pw = rng.uniform(1e-3, 1)
        if not (a**pw).sum() >= a.sum() ** pw * (1 - 1e-12):
            return False, ("p<=1", a.tolist(), pw)
    return True, None


def check_one_plus_x(rng, trials=500):
    """The three (1+x)^s upper bounds."""
    for _ in range(trials):
        x = rng.exponential() * rng.choice([0.01, 1.0, 100.0])
        s = rng.uniform(0, 1)
        if (1 + x) ** s > (1 + x**s) * (1 + 1e-12):
            return False, ("s<=1", x, s)
        s = rng.uniform(1, 2)
        if (1 + x) ** s > (1 + s * x + x**s) * (1 + 1e-12):
            return False, ("1<=s<=2", x, s)
        x = rng.uniform(0, 1)
        s = rng.uniform(2, 8)
        if (1 + x) ** s > (1 + s * (2 ** (s - 1) - 1) * x + x**s) * (1 + 1e-12):
            return False, ("s>=2", x, s)
    return True, None


def check_power_mean(rng, trials=500):
    """Power-mean bounds for real and for integer vectors with small sum."""
    with np.errstate(divide="ignore"):
        for _ in range(trials):
            n = int(rng.integers(1, 10))
            b = rng.exponential(size=n) + 1e-9
            m = b.sum()
            beta = rng.choice([rng.uniform(-4, 0), rng.uniform(1, 5), rng.uniform(0, 1)])
            lhs = np.mean(b**beta)
            rhs = (m / n) ** beta
            if (beta <= 0 or beta >= 1) and lhs < rhs * (1 - 1e-12):
                return False, ("real", b.tolist(), beta)
            if 0 < beta < 1 and lhs > rhs * (1 + 1e-12):
                return False, ("real", b.tolist(), beta)
            n = int(rng.integers(2, 10))
            bi = rng.multinomial(int(rng.integers(0, n)), np.ones(n) / n).astype(float)
            m = bi.sum()
            lhs = np.mean(bi**beta)
            if (beta <= 0 or beta >= 1) and lhs < m / n - 1e-12:
                return False, ("integer", bi.tolist(), beta)
            if 0 < beta < 1 and lhs > m / n + 1e-12:
                return False, ("integer", bi.tolist(), beta)
    return True, None
