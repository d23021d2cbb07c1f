"""Deterministic simulation maps between product sources, evaluated exactly.

Every code is kept at block granularity: atoms of equal mass (or whole
type classes) are handled together, so spaces with millions of atoms are
cheap as long as they have few distinct masses. A code is a list of
stages; each stage moves a range of source atoms onto a range of target
atoms with one rule:

``inverse``
    cumulative inversion, target j takes the source atoms whose
    cumulative mass falls in (G_Y(j-1), G_Y(j)].
``greedy``
    each target atom takes the next source atoms until its own mass is
    reached.
``top``
    all listed source mass goes to one target atom.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .asymptotics import Direction
from .dist import (
    MassBlocks,
    Pmf,
    ProductView,
    as_pmf,
    check_guard,
    class_sizes,
    log_class_sizes,
    sorted_mass_blocks,
    type_log_masses,
)
from .measures import INF, mode_entropy, shannon_entropy
from .spectrum import exponent_inverse_upper, exponent_upper

# relative slack for "mass reached" and cumulative-tie decisions
TIE = 1e-12
SET_TOL = 1e-9
MAX_NUMBERS = 2**53
DEFAULT_DELTA = 0.05


class CodeKind(Enum):
    INVERSE_TRANSFORM = "inverse_transform"
    GREEDY = "greedy"
    THREE_REGION = "three_region"
    TYPE_SPREADING = "type_spreading"
    PARTITION = "partition"
    MTYPE_QUANTIZER = "mtype_quantizer"
    NUMBER_GREEDY = "number_greedy"


class InfeasibleCode(ValueError):
    pass


class DeltaWarning(UserWarning):
    pass


@dataclass(frozen=True)
class UniformSpace:
    """The set [1:M] with uniform mass."""

    M: int

    def __post_init__(self):
        if int(self.M) < 1:
            raise ValueError("M must be at least 1")
        if int(self.M) > MAX_NUMBERS:
            raise OverflowError(f"M = {self.M} exceeds 2^53")
        object.__setattr__(self, "M", int(self.M))

    @property
    def num_atoms(self):
        return self.M


def space_blocks(space):
    if isinstance(space, UniformSpace):
        return MassBlocks.uniform(space.M)
    return sorted_mass_blocks(space)


def space_to_dict(space):
    if isinstance(space, UniformSpace):
        return {"uniform": space.M}
    return {"pmf": space.base.to_dict(), "n": space.n}


def space_from_dict(data):
    if "uniform" in data:
        return UniformSpace(int(data["uniform"]))
    return ProductView(Pmf.from_dict(data["pmf"]), int(data["n"]))


def as_blocks(obj):
    """MassBlocks from blocks, a Pmf, a product view, or (log_mass, mult) pairs."""
    if isinstance(obj, MassBlocks):
        return obj
    if isinstance(obj, (Pmf, ProductView)):
        return sorted_mass_blocks(obj)
    if isinstance(obj, UniformSpace):
        return MassBlocks.uniform(obj.M)
    pairs = list(obj)
    if pairs and isinstance(pairs[0], (tuple, list)):
        lm, mult = zip(*pairs)
        return MassBlocks(np.asarray(lm, dtype=float), np.asarray(mult, dtype=np.int64))
    return MassBlocks.from_masses(pairs)


@dataclass(frozen=True, eq=False)
class InducedPmf:
    """Output distribution of a code as groups of equal atoms.

    Group ``i`` holds ``count[i]`` target atoms, each of target mass
    ``exp(log_q[i])`` and induced mass ``exp(log_p[i])``.
    """

    ids: tuple
    log_q: np.ndarray
    log_p: np.ndarray
    count: np.ndarray
    granularity: str = "per-rank-block"

    def __post_init__(self):
        for name, dtype in (("log_q", float), ("log_p", float), ("count", np.int64)):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=dtype))
        object.__setattr__(self, "ids", tuple(self.ids))
        if not (len(self.ids) == self.log_q.size == self.log_p.size == self.count.size):
            raise ValueError("group fields differ in length")
        if np.any(self.count < 0):
            raise ValueError("group counts must be nonnegative")

    def __len__(self):
        return self.count.size

    @property
    def mass(self):
        return np.exp(self.log_p)

    def total(self):
        return float((self.count * self.mass).sum())

    def num_atoms(self):
        return int(self.count.sum())

    def divergence(self, alpha, direction):
        d = Direction.parse(direction)
        if d is Direction.PQ:
            return group_divergence(self.log_p, self.log_q, self.count, alpha)
        if d is Direction.QP:
            return group_divergence(self.log_q, self.log_p, self.count, alpha)
        return max(
            group_divergence(self.log_p, self.log_q, self.count, alpha),
            group_divergence(self.log_q, self.log_p, self.count, alpha),
        )

    def to_dict(self):
        return {
            "granularity": self.granularity,
            "groups": [
                {"id": i, "count": int(c), "log_q": _num(q), "log_p": _num(p)}
                for i, c, q, p in zip(self.ids, self.count, self.log_q, self.log_p)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        groups = data["groups"]
        return cls(
            tuple(_tuple(g["id"]) for g in groups),
            [_unnum(g["log_q"]) for g in groups],
            [_unnum(g["log_p"]) for g in groups],
            [int(g["count"]) for g in groups],
            data.get("granularity", "per-rank-block"),
        )


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def _unnum(x):
    return float(x)


def _tuple(x):
    return tuple(x) if isinstance(x, list) else x


def group_divergence(log_a, log_b, count, alpha):
    """D_alpha(A || B) for pmfs given as groups of equal atoms."""
    if alpha < 0 or math.isnan(alpha):
        raise ValueError("divergence order must be nonnegative")
    la = np.asarray(log_a, dtype=float)
    lb = np.asarray(log_b, dtype=float)
    cnt = np.asarray(count)
    live = (la > -INF) & (cnt > 0)
    if not live.any():
        return INF
    la, lb, cnt = la[live], lb[live], cnt[live]
    lc = np.log(cnt.astype(float))
    if alpha == 0:
        ok = lb > -INF
        if not ok.any():
            return INF
        return max(0.0, -float(logsumexp(lc[ok] + lb[ok])))
    hole = lb == -INF
    if alpha >= 1 and hole.any():
        return INF
    if hole.any():
        la, lb, lc = la[~hole], lb[~hole], lc[~hole]
        if la.size == 0:
            return INF
    if alpha == INF:
        return max(0.0, float(np.max(la - lb)))
    if alpha == 1:
        w = np.exp(lc + la)
        return max(0.0, float(np.dot(w, la - lb)))
    val = logsumexp(lc + alpha * la + (1 - alpha) * lb) / (alpha - 1)
    return max(0.0, float(val))


def _starts(blocks):
    return np.concatenate([[0], np.cumsum(blocks.mult)]).astype(np.int64)


def slice_blocks(blocks, lo, hi):
    """Blocks of the atoms with rank in [lo, hi)."""
    st = _starts(blocks)
    a = np.maximum(st[:-1], lo)
    b = np.minimum(st[1:], hi)
    cnt = b - a
    keep = cnt > 0
    return MassBlocks(blocks.log_mass[keep], cnt[keep])


def _normalized(blocks):
    total = blocks.total()
    if total <= 0:
        raise ValueError("blocks carry no mass")
    return MassBlocks(blocks.log_mass - math.log(total), blocks.mult), total


def _inverse_masses(src, tgt):
    """Per-target-atom mass of the cumulative-inversion map on normalized blocks."""
    src = src.positive()
    n_tgt = tgt.num_atoms
    check_guard(n_tgt, "target atom")
    pm = src.mass
    m = src.mult
    st = _starts(src)
    n_src = int(st[-1])
    after = np.concatenate([np.cumsum((m * pm)[::-1])[::-1][1:], [0.0]])
    positive_q = tgt.mass[tgt.mass > 0]
    tol = TIE * min(pm.min(), positive_q.min() if positive_q.size else 1.0)

    qm = tgt.mass
    tafter = np.concatenate([np.cumsum((tgt.mult * qm)[::-1])[::-1][1:], [0.0]])
    blk = np.repeat(np.arange(len(tgt)), tgt.mult)
    first = np.repeat(_starts(tgt)[:-1], tgt.mult)
    rank = np.arange(n_tgt) - first
    rest = tgt.mult[blk] - 1 - rank
    sy = tafter[blk] + rest * qm[blk]
    x = sy - tol

    # source atoms with suffix mass >= x: all blocks whose tail is >= x, plus part of the next
    bstar = np.searchsorted(-after, -x, side="right")
    inside = bstar < len(src)
    b = np.minimum(bstar, len(src) - 1)
    need = np.ceil((x - after[b]) / pm[b])
    part = np.clip(m[b] - need, 0, m[b]).astype(np.int64)
    i_hi = np.where(inside, st[b] + part, n_src)
    i_lo = np.concatenate([[0], i_hi[:-1]])

    out = np.zeros(n_tgt)
    live = i_hi > i_lo
    if not live.any():
        return out
    a_idx, b_idx = i_lo[live], i_hi[live]
    ba = np.searchsorted(st, a_idx, side="right") - 1
    bb = np.searchsorted(st, b_idx - 1, side="right") - 1
    same = ba == bb
    mass = np.where(same, (b_idx - a_idx) * pm[ba], (st[ba + 1] - a_idx) * pm[ba] + (b_idx - st[bb]) * pm[bb])
    for i in np.flatnonzero(bb - ba >= 2):
        mass[i] += float(np.dot(m[ba[i] + 1 : bb[i]], pm[ba[i] + 1 : bb[i]]))
    out[live] = mass
    return out


def _compress(masses, tgt, offset=0):
    """Runs (start, count, mass) of equal consecutive masses inside target blocks."""
    n = masses.size
    if n == 0:
        return []
    blk = np.repeat(np.arange(len(tgt)), tgt.mult)
    change = np.concatenate([[True], (masses[1:] != masses[:-1]) | (blk[1:] != blk[:-1])])
    starts = np.flatnonzero(change)
    counts = np.diff(np.concatenate([starts, [n]]))
    return list(zip((starts + offset).tolist(), counts.tolist(), masses[starts].tolist()))


def _greedy_runs(src, tgt, stop_log_mass=None, absorb=False):
    """Greedy fill of target atoms in order, each up to its own mass.

    Returns (runs, consumed source atoms, completed targets). With a stop
    threshold, a target whose last atom falls below it is not filled and
    the scan ends there. With ``absorb``, source atoms left after the last
    target are added to it.
    """
    src = src.positive()
    tgt = tgt.positive()
    pm, pc = src.mass.tolist(), src.mult.tolist()
    plm = src.log_mass.tolist()
    qm, qc = tgt.mass.tolist(), tgt.mult.tolist()
    stop = -INF if stop_log_mass is None else stop_log_mass
    nb, nc = len(pc), len(qc)
    runs = []
    b, c = 0, 0
    rb = pc[0] if nb else 0
    rc = qc[0] if nc else 0
    t_index = consumed = filled = 0
    while b < nb and c < nc:
        need = qm[c] * (1 - TIE)
        if plm[b] < stop:
            break
        cnt = max(1, math.ceil(need / pm[b]))
        reps = min(rc, rb // cnt)
        if reps > 0:
            runs.append((t_index, reps, cnt * pm[b]))
            t_index += reps
            consumed += reps * cnt
            filled += reps
            rb -= reps * cnt
            rc -= reps
        else:
            acc, used, done = 0.0, 0, False
            bb, rbb, last = b, rb, plm[b]
            while bb < nb:
                take = min(rbb, max(1, math.ceil((need - acc) / pm[bb])))
                acc += take * pm[bb]
                used += take
                rbb -= take
                last = plm[bb]
                if rbb == 0:
                    bb += 1
                    rbb = pc[bb] if bb < nb else 0
                if acc >= need:
                    done = True
                    break
            if stop_log_mass is not None and (not done or last < stop):
                break
            runs.append((t_index, 1, acc))
            t_index += 1
            consumed += used
            filled += int(done)
            b, rb = bb, rbb
            rc -= 1
            if not done:
                break
        if rb == 0:
            b += 1
            rb = pc[b] if b < nb else 0
        if rc == 0:
            c += 1
            rc = qc[c] if c < nc else 0
    if absorb and b < nb and runs:
        left = rb * pm[b] + sum(pc[i] * pm[i] for i in range(b + 1, nb))
        if left > 0:
            s, k, mass = runs[-1]
            if k > 1:
                runs[-1] = (s, k - 1, mass)
                runs.append((s + k - 1, 1, mass + left))
            else:
                runs[-1] = (s, 1, mass + left)
        consumed = src.num_atoms
    return runs, consumed, filled


def _runs_to_induced(tgt, runs, granularity="per-rank-block"):
    st = _starts(tgt)
    n = int(st[-1])
    if runs:
        rs = np.array([r[0] for r in runs], dtype=np.int64)
        rk = np.array([r[1] for r in runs], dtype=np.int64)
        rm = np.array([r[2] for r in runs], dtype=float)
    else:
        rs = rk = np.zeros(0, dtype=np.int64)
        rm = np.zeros(0)
    coords = np.unique(np.concatenate([st, rs, rs + rk]))
    coords = coords[(coords >= 0) & (coords <= n)]
    seg = np.zeros(coords.size - 1)
    if rs.size:
        i0 = np.searchsorted(coords, rs)
        i1 = np.searchsorted(coords, rs + rk)
        span = i1 - i0
        idx = np.repeat(i0, span) + (np.arange(span.sum()) - np.repeat(np.cumsum(span) - span, span))
        np.add.at(seg, idx, np.repeat(rm, span))
    blk = np.searchsorted(st, coords[:-1], side="right") - 1
    with np.errstate(divide="ignore"):
        log_p = np.log(seg)
    return InducedPmf(
        tuple(int(c) for c in coords[:-1]),
        tgt.log_mass[blk],
        log_p,
        np.diff(coords),
        granularity,
    )


def mapping1(p_blocks, q_blocks):
    """Inverse-transform map between two sorted mass-block lists."""
    src, _ = _normalized(as_blocks(p_blocks).positive())
    tgt, _ = _normalized(as_blocks(q_blocks))
    return _runs_to_induced(tgt, _compress(_inverse_masses(src, tgt), tgt))


def mapping2(p_blocks, q_blocks):
    """Greedy map: each target atom collects source atoms until its mass is reached."""
    src, _ = _normalized(as_blocks(p_blocks).positive())
    tgt, _ = _normalized(as_blocks(q_blocks))
    runs, _, _ = _greedy_runs(src, tgt, absorb=True)
    return _runs_to_induced(tgt, runs)


def _range_mass(blocks, ranges):
    return sum(slice_blocks(blocks, lo, hi).total() for lo, hi in ranges)


def run_stages(src_blocks, tgt_blocks, stages):
    """Runs of induced mass produced by a stage list over the target ranks."""
    runs = []
    rest_src = rest_tgt = None
    n_tgt = tgt_blocks.num_atoms
    for st in stages:
        src_ranges = [tuple(r) for r in st["src"]] if st["src"] != "rest" else [rest_src]
        tgt_range = tuple(st["tgt"]) if st["tgt"] != "rest" else rest_tgt
        rule = st["rule"]
        if rule == "top":
            mass = _range_mass(src_blocks, src_ranges)
            if mass > 0:
                runs.append((tgt_range[0], 1, mass))
            continue
        (s_lo, s_hi), (t_lo, t_hi) = src_ranges[0], tgt_range
        src = slice_blocks(src_blocks, s_lo, s_hi).positive()
        tgt = slice_blocks(tgt_blocks, t_lo, t_hi)
        if src.num_atoms == 0:
            rest_src, rest_tgt = (s_lo, s_lo), (t_lo, t_hi)
            continue
        if tgt.positive().num_atoms == 0:
            # nowhere to go: the whole range lands on the first atom available
            runs.append((t_lo if t_hi > t_lo else 0, 1, src.total()))
            rest_src, rest_tgt = (s_hi, s_hi), (t_hi, t_hi)
            continue
        if rule == "inverse":
            ns, total = _normalized(src)
            nt, _ = _normalized(tgt)
            masses = _inverse_masses(ns, nt) * total
            runs.extend(_compress(masses, nt, t_lo))
            rest_src, rest_tgt = (s_hi, s_hi), (t_hi, t_hi)
        elif rule == "greedy":
            if st.get("normalize", True):
                ns, total = _normalized(src)
                nt, _ = _normalized(tgt)
                sub, used, done = _greedy_runs(ns, nt, absorb=True)
                sub = [(s, k, mass * total) for s, k, mass in sub]
            else:
                sub, used, done = _greedy_runs(src, tgt, st.get("stop_log_mass"))
            runs.extend((s + t_lo, k, mass) for s, k, mass in sub)
            rest_src, rest_tgt = (s_lo + used, s_hi), (t_lo + done, t_hi)
        else:
            raise ValueError(f"unknown stage rule {rule!r}")
    if rest_tgt is not None and rest_tgt[0] > n_tgt:
        raise ValueError("stage ranges exceed the target space")
    return runs


@dataclass(frozen=True, eq=False)
class SimCode:
    """A deterministic map from a source space onto a target space."""

    kind: CodeKind
    source: object
    target: object
    params: dict
    induced: InducedPmf
    stages: list = field(default_factory=list)
    assignment: list = field(default_factory=list)

    def evaluate(self, alpha, direction):
        return self.induced.divergence(alpha, direction)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "source": space_to_dict(self.source),
            "target": space_to_dict(self.target),
            "params": self.params,
            "stages": self.stages,
            "assignment": self.assignment,
            "induced": self.induced.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), allow_nan=False)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                CodeKind(data["kind"]),
                space_from_dict(data["source"]),
                space_from_dict(data["target"]),
                dict(data.get("params", {})),
                InducedPmf.from_dict(data["induced"]),
                list(data.get("stages", [])),
                list(data.get("assignment", [])),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed code JSON: {exc}")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def evaluate_code(code, alpha, direction):
    """Exact finite-n divergence between the induced and the target distribution."""
    if code.induced.granularity not in ("per-rank-block", "per-type-class", "per-atom"):
        raise ValueError(f"cannot evaluate granularity {code.induced.granularity!r}")
    return code.evaluate(alpha, direction)


def _stage_code(kind, source, target, params, stages):
    sb, tb = space_blocks(source), space_blocks(target)
    runs = run_stages(sb, tb, stages)
    return SimCode(kind, source, target, params, _runs_to_induced(tb, runs), stages)


def _count_at_least(blocks, threshold):
    """Atoms whose log mass is at least ``threshold`` (a prefix of the ranks)."""
    keep = blocks.log_mass >= threshold - SET_TOL
    return int(blocks.mult[keep].sum())


def _count_above(blocks, threshold):
    keep = blocks.log_mass > threshold + SET_TOL
    return int(blocks.mult[keep].sum())


def inverse_transform_code(p, q, k, n, delta=None):
    """Inverse transform from p^k onto q^n, optionally truncated to the typical top.

    With ``delta`` the target is cut to {q^n >= e^{-n(H(q)+delta)}}.
    """
    source, target = ProductView(as_pmf(p), k), ProductView(as_pmf(q), n)
    tb = space_blocks(target)
    n_tgt = tb.num_atoms
    params = {"k": int(k), "n": int(n), "delta": delta}
    if delta is None:
        top = n_tgt
    else:
        threshold = -n * (shannon_entropy(q) + delta)
        top = max(1, _count_at_least(tb, threshold))
        params["log_threshold"] = threshold
    stages = [{"rule": "inverse", "src": [[0, space_blocks(source).num_atoms]], "tgt": [0, top]}]
    return _stage_code(CodeKind.INVERSE_TRANSFORM, source, target, params, stages)


def three_region_code(p, q, k, n, delta=DEFAULT_DELTA):
    """Code splitting the source at the typical and mode entropies.

    Atoms between e^{-k(Hu-delta)} and e^{-k(H-delta)} go by inverse
    transform to the heavy target set, atoms between e^{-k Hu} and
    e^{-k(Hu-delta)} greedily to the light set, and the rest to the
    heaviest target atom.
    """
    p, q = as_pmf(p), as_pmf(q)
    source, target = ProductView(p, k), ProductView(q, n)
    sb, tb = space_blocks(source), space_blocks(target)
    R = n / k
    h, hu = shannon_entropy(p), mode_entropy(p)
    cut1 = _count_above(sb, -k * (h - delta))
    cut2 = _count_above(sb, -k * (hu - delta))
    cut3 = _count_at_least(sb, -k * hu)
    cut2 = max(cut2, cut1)
    cut3 = max(cut3, cut2)
    e_star = exponent_inverse_upper(q, exponent_upper(p, hu) / R)
    split = _count_at_least(tb, -n * e_star)
    n_src, n_tgt = sb.num_atoms, tb.num_atoms
    stages = [
        {"rule": "top", "src": [[0, cut1], [cut3, n_src]], "tgt": [0, 1]},
        {"rule": "inverse", "src": [[cut1, cut2]], "tgt": [0, split]},
        {"rule": "greedy", "src": [[cut2, cut3]], "tgt": [split, n_tgt], "normalize": True},
    ]
    params = {"k": int(k), "n": int(n), "delta": delta, "e_star": e_star}
    return _stage_code(CodeKind.THREE_REGION, source, target, params, stages)


def resolvability_quantizer(q, n, M, delta=DEFAULT_DELTA, variant="pq"):
    """Map [1:M] onto q^n so the output is an M-type pmf near q^n.

    ``pq`` inverts onto the set A = {q^n >= e^{-n(H+delta)}}. ``qp`` first
    gives every atom outside A its ceil(M q^n) numbers (heaviest first,
    while numbers last) and inverts the rest onto A. ``max`` does the same
    with A = {q^n >= e^{-n(log(M)/n - delta)}}.
    """
    d = Direction.parse(variant)
    q = as_pmf(q)
    source, target = UniformSpace(M), ProductView(q, n)
    tb = space_blocks(target)
    n_tgt = tb.num_atoms
    rate = math.log(M) / n
    h = shannon_entropy(q)
    if d is Direction.MAX:
        threshold = -n * (rate - delta)
    else:
        threshold = -n * (h + delta)
    top = max(1, _count_at_least(tb, threshold))
    params = {"n": int(n), "M": int(M), "delta": delta, "variant": d.value, "log_threshold": threshold}
    if d is Direction.PQ:
        stages = [{"rule": "inverse", "src": [[0, M]], "tgt": [0, top]}]
    else:
        stages = [
            {"rule": "greedy", "src": [[0, M]], "tgt": [top, n_tgt], "normalize": False},
            {"rule": "inverse", "src": "rest", "tgt": [0, top]},
        ]
    return _stage_code(CodeKind.MTYPE_QUANTIZER, source, target, params, stages)


def intrinsic_code(p, n, M, delta=DEFAULT_DELTA, variant="pq"):
    """Map p^n onto [1:M] to extract nearly uniform numbers.

    ``pq`` fills the M numbers greedily. ``qp`` and ``max`` fill numbers
    greedily only while the last atom used has mass at least
    e^{-n delta}/M, then spread the remaining atoms over the unfilled
    numbers by inverse transform.
    """
    d = Direction.parse(variant)
    p = as_pmf(p)
    source, target = ProductView(p, n), UniformSpace(M)
    rate = math.log(M) / n
    params = {"n": int(n), "M": int(M), "delta": delta, "variant": d.value}
    n_src = space_blocks(source).num_atoms
    if d is Direction.PQ:
        stages = [{"rule": "greedy", "src": [[0, n_src]], "tgt": [0, M], "normalize": True}]
        return _stage_code(CodeKind.NUMBER_GREEDY, source, target, params, stages)
    if rate + delta >= shannon_entropy(p):
        raise InfeasibleCode(f"log(M)/n + delta = {rate + delta:.6g} is not below H(p) = {shannon_entropy(p):.6g}")
    stop = -n * delta - math.log(M)
    params["stop_log_mass"] = stop
    sb, tb = space_blocks(source), space_blocks(target)
    _, used, filled = _greedy_runs(sb, tb, stop)
    rest_tgt = [filled, M] if filled < M else [M - 1, M]
    params.update({"L": int(filled), "M0": int(M - filled)})
    stages = [
        {"rule": "greedy", "src": [[0, n_src]], "tgt": [0, M], "normalize": False, "stop_log_mass": stop},
        {"rule": "inverse", "src": [[used, n_src]], "tgt": rest_tgt},
    ]
    return _stage_code(CodeKind.NUMBER_GREEDY, source, target, params, stages)


def _type_table(pmf, n):
    view = ProductView(pmf, n)
    counts = view.types()
    return counts, type_log_masses(counts, pmf.log_probs()), class_sizes(counts)


def _spread_groups(contrib, t_counts, t_lm, t_sizes):
    """Groups from chunks (target type, chunk size, source log mass).

    A chunk of size z spread over a class of size N gives z // N to every
    sequence and one more to the first z % N.
    """
    by_target = {}
    for ty, z, lm in contrib:
        by_target.setdefault(ty, []).append((z, lm))
    ids, lq, lp, cnt = [], [], [], []
    for ty in range(len(t_sizes)):
        size = t_sizes[ty]
        label = tuple(int(c) for c in t_counts[ty])
        chunks = by_target.get(ty, [])
        if not chunks:
            ids.append(label)
            lq.append(t_lm[ty])
            lp.append(-INF)
            cnt.append(size)
            continue
        cuts = sorted({0, size} | {z % size for z, _ in chunks})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi <= lo:
                continue
            mass = 0.0
            for z, lm in chunks:
                share = z // size + (1 if lo < z % size else 0)
                if share and lm > -INF:
                    mass += share * math.exp(lm)
            ids.append(label + (lo,))
            lq.append(t_lm[ty])
            lp.append(math.log(mass) if mass > 0 else -INF)
            cnt.append(hi - lo)
    return InducedPmf(tuple(ids), lq, lp, cnt, "per-type-class")


def spreading_cost(log_q_class, log_size_y, log_size_x):
    """Finite-length cost of sending a source class onto a target class."""
    return -log_q_class + max(0.0, log_size_y - log_size_x)


def type_spreading_code(p, q, k, n, alpha):
    """Map each source type class as evenly as possible onto one target type class.

    The image of T_X minimizes -log q^n(T_Y) + [log|T_Y| - log|T_X|]^+.
    """
    p, q = as_pmf(p), as_pmf(q)
    s_counts, s_lm, s_sizes = _type_table(p, k)
    t_counts, t_lm, t_sizes = _type_table(q, n)
    log_sx = log_class_sizes(s_counts)
    log_sy = log_class_sizes(t_counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_qclass = np.where(np.isfinite(t_lm), t_lm + log_sy, -INF)
    alive = np.isfinite(log_qclass)
    contrib, assignment = [], []
    for i in range(len(s_sizes)):
        cost = np.where(alive, -log_qclass + np.maximum(0.0, log_sy - log_sx[i]), INF)
        j = int(np.argmin(cost))
        contrib.append((j, s_sizes[i], float(s_lm[i])))
        assignment.append({"source_type": s_counts[i].tolist(), "target_type": t_counts[j].tolist()})
    induced = _spread_groups(contrib, t_counts, t_lm, t_sizes)
    params = {"k": int(k), "n": int(n), "alpha": alpha}
    return SimCode(CodeKind.TYPE_SPREADING, ProductView(p, k), ProductView(q, n), params, induced, [], assignment)


def partition_code(p, q, k, n, delta=DEFAULT_DELTA):
    """Split every source type class evenly over all target classes of lower entropy.

    T_X is cut into a = #{T_Y : k H(T_X) >= n (H(T_Y) + delta)} parts of
    floor or ceil size (ceil first), part i spread over the i-th admissible
    T_Y. Classes with no admissible target go to the heaviest target class.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    p, q = as_pmf(p), as_pmf(q)
    s_counts, s_lm, s_sizes = _type_table(p, k)
    t_counts, t_lm, t_sizes = _type_table(q, n)
    h_src = np.array([_type_entropy(c) for c in s_counts]) * k
    h_tgt = (np.array([_type_entropy(c) for c in t_counts]) + delta) * n
    t_alive = np.isfinite(t_lm)
    fallback = int(np.argmax(np.where(t_alive, t_lm, -INF)))
    contrib, assignment, starved = [], [], 0
    for i in range(len(s_sizes)):
        targets = np.flatnonzero((h_src[i] >= h_tgt - SET_TOL) & t_alive)
        size = s_sizes[i]
        if targets.size == 0:
            starved += 1
            contrib.append((fallback, size, float(s_lm[i])))
            assignment.append({"source_type": s_counts[i].tolist(), "targets": [t_counts[fallback].tolist()]})
            continue
        a = targets.size
        base, extra = divmod(size, a)
        for r, j in enumerate(targets):
            z = base + (1 if r < extra else 0)
            if z:
                contrib.append((int(j), z, float(s_lm[i])))
        assignment.append({"source_type": s_counts[i].tolist(), "targets": [t_counts[j].tolist() for j in targets]})
    if starved:
        warnings.warn(
            f"{starved} source type(s) have no target type with entropy margin delta={delta}; "
            "they were sent to the heaviest target type",
            DeltaWarning,
            stacklevel=2,
        )
    induced = _spread_groups(contrib, t_counts, t_lm, t_sizes)
    params = {"k": int(k), "n": int(n), "delta": delta, "starved_types": starved}
    return SimCode(CodeKind.PARTITION, ProductView(p, k), ProductView(q, n), params, induced, [], assignment)


def _type_entropy(counts):
    counts = np.asarray(counts, dtype=float)
    f = counts[counts > 0] / counts.sum()
    return float(-(f * np.log(f)).sum())
