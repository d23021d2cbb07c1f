import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import helpers
from renyisim import (
    Direction,
    KnifeEdgeError,
    Pmf,
    RateQuery,
    asymptotic_divergence,
    best_set_mass_exponents,
    conversion_rate,
    conversion_rate_unnormalized_lb,
    intrinsic_asymptotics,
    intrinsic_randomness,
    renyi_entropy,
    resolvability,
    resolvability_asymptotics,
    shannon_entropy,
)

INF = math.inf
PQ, QP, MAX = Direction.PQ, Direction.QP, Direction.MAX
B01, B03, HALF = Pmf.bernoulli(0.1), Pmf.bernoulli(0.3), Pmf.bernoulli(0.5)
H_RATIO = 1.879102727780584215
H_B01 = 0.325082973391448240
LN2 = 0.693147180559945309
LN10 = 2.302585092994045684


def asym(p, q, R, alpha, d):
    return asymptotic_divergence(RateQuery(p, q, R, alpha), d)


def test_direction_parse():
    assert Direction.parse("Max") is MAX
    assert Direction.parse(PQ) is PQ
    with pytest.raises(ValueError):
        Direction.parse("sideways")


def test_query_validation():
    with pytest.raises(ValueError):
        RateQuery(B01, B03, 0.0, 1.0)
    with pytest.raises(ValueError):
        RateQuery(B01, B03, 1.0, -1.0)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, INF])
def test_identical_sources_at_unit_rate(alpha):
    p = Pmf.from_probs([0.5, 0.3, 0.2])
    assert asym(p, p, 1.0, alpha, PQ) == pytest.approx(0.0, abs=1e-12)


def test_reverse_divergence_blows_up_beyond_support_ratio():
    p, q = Pmf.from_probs([0.5, 0.5]), Pmf.from_probs([0.5, 0.3, 0.2])
    assert asym(p, q, 0.7, 1.0, QP) == INF
    assert asym(p, q, 0.7, 1.0, MAX) == INF


def test_knife_edge_rejected():
    p, q = Pmf.from_probs([0.6, 0.4]), Pmf.from_probs([0.5, 0.3, 0.2])
    edge = math.log(2) / math.log(3)
    for d in (QP, MAX):
        with pytest.raises(KnifeEdgeError):
            asym(p, q, edge, 2.0, d)
    assert asym(p, q, edge, 0.5, QP) >= 0.0


def test_forward_value_matches_t_grid():
    value = asym(B03, B01, 2.5, INF, PQ)
    assert value == pytest.approx(helpers.pq_asym(B03.probs, B01.probs, 2.5, INF), abs=1e-6)
    assert value > 0


@pytest.mark.parametrize("alpha", [0.0, 0.4, 1.0, 3.0, INF])
@pytest.mark.parametrize("d", [PQ, QP, MAX])
def test_table_rows_match_grid(alpha, d):
    p, q = Pmf.from_probs([0.7, 0.2, 0.1]), Pmf.from_probs([0.6, 0.4])
    R = 1.3
    if d is PQ:
        ref = helpers.pq_asym(p.probs, q.probs, R, alpha)
    elif d is QP:
        ref = helpers.qp_asym(p.probs, q.probs, R, alpha)
    elif 0 < alpha < 1:
        ref = helpers.max_asym_2d(p.probs, q.probs, R, alpha)
    else:
        ref = helpers.max_asym(p.probs, q.probs, R, alpha)
    assert asym(p, q, R, alpha, d) == pytest.approx(ref, abs=2e-3)


def test_rate_examples():
    for d in (PQ, QP, MAX):
        assert conversion_rate(B03, B01, 0.5, d) == pytest.approx(H_RATIO, abs=1e-12)
    assert conversion_rate(B03, B01, 1.0, MAX) == pytest.approx(1.0, abs=1e-12)
    assert conversion_rate(B01, B03, 1.0, MAX) == pytest.approx(1 / H_RATIO, abs=1e-12)
    assert conversion_rate(B03, B01, 0.0, QP) == INF
    assert conversion_rate(B03, B01, 0.0, PQ) == pytest.approx(LN2 / H_B01, abs=1e-12)


def test_infinite_order_max_rate_is_min_entropy_ratio():
    p, q = Pmf.from_probs([0.5, 0.3, 0.2]), Pmf.from_probs([0.8, 0.2])
    u = np.linspace(-1 + 1e-9, 1 - 1e-9, 40001)
    orders = np.concatenate([[-INF, INF], u / (1 - np.abs(u))])
    grid = float(np.min(helpers.renyi(p.probs, orders) / helpers.renyi(q.probs, orders)))
    rate = conversion_rate(p, q, INF, MAX)
    assert rate == pytest.approx(grid, abs=1e-5)
    assert rate <= grid + 1e-12


def test_unnormalized_bound():
    assert conversion_rate_unnormalized_lb(B03, B01, 1.001) == pytest.approx(H_RATIO, abs=1e-3)
    s, t = 1.0, np.concatenate([np.logspace(-10, -5, 50), np.linspace(0, 1, 100001)[1:-1]])
    ref = np.min(helpers.renyi(B03.probs, (s + t) / (s + t - s * t)) / helpers.renyi(B01.probs, 1 / (1 - t)))
    assert conversion_rate_unnormalized_lb(B03, B01, 2.0) == pytest.approx(ref, abs=1e-6)
    p = Pmf.from_probs([0.5, 0.3, 0.2])
    lb = conversion_rate_unnormalized_lb(p, p, 3.0)
    assert 1 - 1e-9 <= lb <= conversion_rate(p, p, 3.0, PQ) + 1e-9
    with pytest.raises(ValueError):
        conversion_rate_unnormalized_lb(p, p, INF)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 2.0, 5.0, INF]))
def test_unnormalized_bound_below_rate(seed, alpha):
    rng = np.random.default_rng(seed)
    p, q = helpers.random_pmf(rng, 3), helpers.random_pmf(rng, 2)
    if alpha < INF:
        assert conversion_rate_unnormalized_lb(p, q, alpha) <= conversion_rate(p, q, alpha, PQ) + 1e-9


def test_rate_limits_are_continuous():
    p, q = Pmf.from_probs([0.6, 0.3, 0.1]), Pmf.from_probs([0.7, 0.3])
    for d in (PQ, QP, MAX):
        assert conversion_rate(p, q, 1e4, d) == pytest.approx(conversion_rate(p, q, INF, d), abs=1e-3)
    assert conversion_rate(p, q, 1.0001, PQ) == pytest.approx(conversion_rate(p, q, 1.0, PQ), abs=1e-3)


@pytest.mark.parametrize("seed", range(6))
def test_max_rate_never_exceeds_single_directions(seed):
    rng = np.random.default_rng(seed)
    p, q = helpers.random_pmf(rng, 3), helpers.random_pmf(rng, 3)
    for alpha in (1.0, 2.0, INF):
        m = conversion_rate(p, q, alpha, MAX)
        assert m <= min(conversion_rate(p, q, alpha, PQ), conversion_rate(p, q, alpha, QP)) + 1e-9


def test_max_rate_strictly_smaller_somewhere():
    rng = np.random.default_rng(11)
    gaps = []
    for _ in range(20):
        p, q = helpers.random_pmf(rng, 3), helpers.random_pmf(rng, 3)
        pair = min(conversion_rate(p, q, INF, PQ), conversion_rate(p, q, INF, QP))
        gaps.append(pair - conversion_rate(p, q, INF, MAX))
    assert max(gaps) > 1e-4


@given(st.integers(0, 2**32 - 1))
def test_forward_rate_nonincreasing_in_order(seed):
    rng = np.random.default_rng(seed)
    p, q = helpers.random_pmf(rng, 3), helpers.random_pmf(rng, 2)
    rates = [conversion_rate(p, q, a, PQ) for a in (1.0, 1.5, 2.0, 4.0, 10.0, 100.0, INF)]
    assert all(a >= b - 1e-9 for a, b in zip(rates, rates[1:]))


def test_resolvability_examples():
    assert resolvability(B01, 1.0, MAX) == pytest.approx(LN2, abs=1e-12)
    assert resolvability(B01, INF, MAX) == pytest.approx(LN10, abs=1e-12)
    for a in (0.0, 0.5, 1.0, INF):
        assert resolvability(B01, a, PQ) == pytest.approx(H_B01, abs=1e-12)
    assert resolvability(Pmf.uniform(3), 5.0, MAX) == pytest.approx(math.log(3), abs=1e-12)
    assert resolvability(B01, 2.0, QP) == pytest.approx(LN2, abs=1e-12)
    assert resolvability(B01, 0.0, QP) == 0.0


def test_resolvability_asymptotics_examples():
    assert resolvability_asymptotics(B01, LN10, 0.0, PQ) == 0.0
    t = helpers.unit_grid()
    ref = float(np.max(t * helpers.renyi(B01.probs, helpers._order(1 - t)) - 0.2 * t))
    assert resolvability_asymptotics(B01, 0.2, 0.0, PQ) == pytest.approx(ref, abs=1e-6)
    assert resolvability_asymptotics(B01, 0.5, 1.0, QP) == INF
    assert resolvability_asymptotics(B01, 0.8, 1.0, QP) == 0.0
    with pytest.raises(KnifeEdgeError):
        resolvability_asymptotics(B01, LN2, 2.0, MAX)


def test_intrinsic_examples():
    assert intrinsic_randomness(B01, INF, PQ) == pytest.approx(0.105360515657826301, abs=1e-12)
    assert intrinsic_randomness(B01, 0.0, QP) == INF
    for d in (PQ, QP, MAX):
        for a in (0.5, 1.0, 2.0, INF):
            assert intrinsic_randomness(HALF, a, d) == pytest.approx(LN2, abs=1e-12)
    assert intrinsic_asymptotics(B01, 0.1, INF, PQ) == 0.0
    assert intrinsic_asymptotics(B01, 0.5, 2.0, PQ) == pytest.approx(0.301549061276161745, abs=1e-12)
    t = helpers.half_line()
    ref = float(np.max(0.5 * t - t * helpers.renyi(B01.probs, 1 / (1 + t))))
    assert intrinsic_asymptotics(B01, 0.5, 1.0, QP) == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, INF])
@pytest.mark.parametrize("d", [PQ, QP, MAX])
def test_resolvability_specialization(alpha, d):
    q = Pmf.from_probs([0.6, 0.3, 0.1])
    for rt in (0.5, 0.9, 1.3):
        lhs = asym(HALF, q, LN2 / rt, alpha, d)
        assert lhs == pytest.approx(resolvability_asymptotics(q, rt, alpha, d), abs=1e-6)
    assert resolvability(q, alpha, d) == pytest.approx(LN2 / conversion_rate(HALF, q, alpha, d), abs=1e-6)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, INF])
@pytest.mark.parametrize("d", [PQ, QP, MAX])
def test_intrinsic_specialization(alpha, d):
    p = Pmf.from_probs([0.6, 0.3, 0.1])
    for R in (0.5, 0.9, 1.3):
        lhs = R * asym(p, HALF, R, alpha, d)
        assert lhs == pytest.approx(intrinsic_asymptotics(p, R * LN2, alpha, d), abs=1e-6)
    if not (alpha == 0 and d is QP):
        assert intrinsic_randomness(p, alpha, d) == pytest.approx(LN2 * conversion_rate(p, HALF, alpha, d), abs=1e-6)


def test_best_set_exponents():
    q = Pmf.from_probs([0.6, 0.3, 0.1])
    h = shannon_entropy(q)
    assert best_set_mass_exponents(q, h) == (pytest.approx(0.0, abs=1e-9), pytest.approx(0.0, abs=1e-9))
    first, second = best_set_mass_exponents(q, h + 0.2)
    assert first == 0.0 and second > 0
    first, second = best_set_mass_exponents(q, h - 0.2)
    assert first > 0 and second == 0.0
    assert best_set_mass_exponents(B01, 0.2)[0] == resolvability_asymptotics(B01, 0.2, 0.0, PQ)
    assert best_set_mass_exponents(B01, 0.8)[1] == INF
    assert renyi_entropy(q, 0.0) == pytest.approx(math.log(3))
