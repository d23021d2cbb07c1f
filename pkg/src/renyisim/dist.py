"""Finite distributions, sequence types and product views."""

import json
import math
import os
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import gammaln

DEFAULT_GUARD = 10**7
MERGE_TOL = 1e-12


class GuardExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured size cap."""


def atom_guard():
    """Current enumeration cap, overridable through RENYI_GUARD_ATOMS."""
    raw = os.environ.get("RENYI_GUARD_ATOMS")
    if raw is None:
        return DEFAULT_GUARD
    try:
        value = int(float(raw))
    except ValueError:
        raise ValueError(f"RENYI_GUARD_ATOMS must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError("RENYI_GUARD_ATOMS must be positive")
    return value


def check_guard(count, what="atoms"):
    limit = atom_guard()
    if count > limit:
        raise GuardExceeded(f"{what} count {count} exceeds guard {limit}")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function on a labeled finite alphabet.

    Probabilities are normalized at construction, so unnormalized weights
    are accepted.
    """

    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        if probs.size == 0:
            raise ValueError("a pmf needs at least one symbol")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        total = probs.sum()
        if total <= 0:
            raise ValueError("probabilities must have positive total mass")
        probs = probs / total
        probs.setflags(write=False)
        labels = tuple(self.labels)
        if len(labels) != probs.size:
            raise ValueError("labels and probs differ in length")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_probs(cls, probs, labels=None):
        probs = np.asarray(probs, dtype=float).ravel()
        if labels is None:
            labels = tuple(str(i) for i in range(probs.size))
        return cls(tuple(labels), probs)

    @classmethod
    def uniform(cls, m):
        return cls.from_probs(np.ones(m))

    @classmethod
    def bernoulli(cls, p):
        """Two-symbol pmf with mass ``p`` on the second symbol."""
        return cls.from_probs([1.0 - p, p])

    @property
    def size(self):
        return self.probs.size

    def support(self):
        return np.flatnonzero(self.probs > 0)

    def log_probs(self):
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    def support_log_probs(self):
        return np.log(self.probs[self.probs > 0])

    def is_uniform(self, tol=1e-12):
        lp = self.support_log_probs()
        return bool(lp.max() - lp.min() <= tol)

    def to_dict(self):
        return {"labels": list(self.labels), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "probs" not in data:
            raise ValueError("pmf JSON needs a 'probs' field")
        probs = data["probs"]
        labels = data.get("labels")
        return cls.from_probs(probs, labels)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self):
        body = ", ".join(f"{l}: {p:.6g}" for l, p in zip(self.labels, self.probs))
        return f"Pmf({body})"


def as_probs(p):
    """Normalized probability vector from a Pmf or array-like."""
    if isinstance(p, Pmf):
        return p.probs
    return Pmf.from_probs(p).probs


def as_pmf(p):
    return p if isinstance(p, Pmf) else Pmf.from_probs(p)


@dataclass(frozen=True)
class SeqType:
    """Type (composition) of a length-n sequence."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("type counts must be nonnegative")
        if sum(counts) < 1:
            raise ValueError("type must describe a sequence of positive length")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return sum(self.counts)

    def class_size(self):
        size, left = 1, self.n
        for c in self.counts:
            size *= math.comb(left, c)
            left -= c
        return size

    def log_class_size(self):
        return math.lgamma(self.n + 1) - sum(math.lgamma(c + 1) for c in self.counts)

    def empirical(self):
        return np.asarray(self.counts, dtype=float) / self.n

    def entropy(self):
        f = self.empirical()
        f = f[f > 0]
        return float(-(f * np.log(f)).sum())

    def log_mass(self, p):
        """Log-probability of one sequence of this type under ``p``."""
        lp = as_pmf(p).log_probs()
        total = 0.0
        for c, l in zip(self.counts, lp):
            if c:
                total += c * l
        return total


def count_types(alphabet_size, n):
    return math.comb(n + alphabet_size - 1, alphabet_size - 1)


def type_counts(alphabet_size, n):
    """All compositions of ``n`` into ``alphabet_size`` parts as an array.

    Rows are in lexicographic order of the counts.
    """
    if alphabet_size < 1 or n < 1:
        raise ValueError("alphabet size and length must be positive")
    check_guard(count_types(alphabet_size, n), "type")
    if alphabet_size == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    total = n + alphabet_size - 1
    for bars in combinations(range(total), alphabet_size - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total - prev - 1)
        rows.append(row)
    return np.asarray(rows, dtype=np.int64)


def enumerate_types(alphabet_size, n):
    return [SeqType(tuple(row)) for row in type_counts(alphabet_size, n)]


def log_class_sizes(counts):
    counts = np.asarray(counts)
    n = counts.sum(axis=1)
    return gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)


def class_sizes(counts):
    """Exact multinomial coefficients as Python integers."""
    return [SeqType(tuple(row)).class_size() for row in np.asarray(counts)]


def type_log_masses(counts, log_probs):
    counts = np.asarray(counts)
    lp = np.where(np.isfinite(log_probs), log_probs, 0.0)
    out = counts @ lp
    dead = (counts[:, ~np.isfinite(log_probs)] > 0).any(axis=1)
    out = np.where(dead, -np.inf, out)
    return out


@dataclass(frozen=True, eq=False)
class ProductView:
    """The i.i.d. product ``base^n``, handled through sequence types."""

    base: Pmf
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("product power must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "base", as_pmf(self.base))

    @property
    def num_atoms(self):
        return self.base.size ** self.n

    def types(self):
        return type_counts(self.base.size, self.n)

    def type_table(self):
        """Counts, log-mass per sequence and exact class sizes of every type."""
        counts = self.types()
        return counts, type_log_masses(counts, self.base.log_probs()), class_sizes(counts)


@dataclass(frozen=True, eq=False)
class MassBlocks:
    """Groups of equal-mass atoms sorted by descending mass."""

    log_mass: np.ndarray
    mult: np.ndarray

    def __post_init__(self):
        lm = np.asarray(self.log_mass, dtype=float)
        mult = np.asarray(self.mult, dtype=np.int64)
        if lm.shape != mult.shape:
            raise ValueError("log_mass and mult differ in shape")
        if np.any(mult < 0):
            raise ValueError("multiplicities must be nonnegative")
        if np.any(np.diff(lm) > 0):
            raise ValueError("blocks must be sorted by descending mass")
        object.__setattr__(self, "log_mass", lm)
        object.__setattr__(self, "mult", mult)

    def __len__(self):
        return self.log_mass.size

    def __iter__(self):
        return iter(zip(self.log_mass.tolist(), self.mult.tolist()))

    @property
    def mass(self):
        return np.exp(self.log_mass)

    @property
    def num_atoms(self):
        return int(self.mult.sum())

    def total(self):
        return float((self.mult * self.mass).sum())

    def positive(self):
        keep = np.isfinite(self.log_mass) & (self.mult > 0)
        return MassBlocks(self.log_mass[keep], self.mult[keep])

    def select(self, keep):
        keep = np.asarray(keep, dtype=bool)
        return MassBlocks(self.log_mass[keep], self.mult[keep])

    @classmethod
    def from_masses(cls, masses):
        """Blocks of a plain vector of masses (zeros kept as a -inf block)."""
        masses = np.asarray(masses, dtype=float)
        with np.errstate(divide="ignore"):
            lm = np.log(masses)
        return merge_blocks(lm, np.ones(masses.size, dtype=np.int64))

    @classmethod
    def uniform(cls, m):
        return cls(np.array([-math.log(m)]), np.array([m], dtype=np.int64))


def merge_blocks(log_mass, mult, tol=MERGE_TOL):
    log_mass = np.asarray(log_mass, dtype=float)
    mult = np.asarray(mult, dtype=np.int64)
    order = np.argsort(-log_mass, kind="stable")
    lm, mu = log_mass[order], mult[order]
    if lm.size == 0:
        return MassBlocks(lm, mu)
    with np.errstate(invalid="ignore"):
        same = (lm[1:] == lm[:-1]) | (np.abs(np.diff(lm)) <= tol)
    starts = np.flatnonzero(np.r_[True, ~same])
    return MassBlocks(lm[starts], np.add.reduceat(mu, starts))


def sorted_mass_blocks(view):
    """Equal-mass blocks of a product view (or a plain pmf), largest first."""
    if isinstance(view, Pmf):
        view = ProductView(view, 1)
    if view.base.size ** view.n >= 2**62:
        raise GuardExceeded("product space too large for integer multiplicities")
    counts, lm, sizes = view.type_table()
    return merge_blocks(lm, np.asarray(sizes, dtype=np.int64))
