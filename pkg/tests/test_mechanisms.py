import math

import numpy as np
import pytest
from scipy.integrate import quad

from priopricing import (AuctionHetero, AuctionHomogeneous, DiscreteOptimal,
                         Flat, HeteroSchedule, PricePoint, QueueParams,
                         RandomOptimal, Uniform, auction_cdf_homogeneous,
                         auction_mean_hetero, auction_mean_homogeneous,
                         auction_payment_hetero, auction_support_homogeneous,
                         discrete_grid, discrete_mean, hetero_price,
                         hetero_profit, hetero_profit_bounds, integrate,
                         mechanism_spec, parse_mechanism, priority_value,
                         random_price_cdf, random_price_mean,
                         random_price_quantile, sample_price, value_bounds)

P05 = QueueParams(0.5, 1.0)
RHOS = [0.1, 0.3, 0.5, 0.7, 0.9]

# mean of the optimal random fee at rho=0.5: -log(0.5)/0.5 = 2 log 2,
# cross-checked against f(0) + integral of (1 - F) below
MEAN_05 = 1.3862943611198906
# hetero schedule profit for C ~ Uniform(0, 2) at rho=0.5: 8 log 2 - 4 by
# hand integration, matched by a fine trapezoid grid below
PROFIT_U02 = 1.5451774444795623


# ---------------------------------------------------------------------------
# optimal random fee
# ---------------------------------------------------------------------------

def test_random_price_cdf_examples():
    assert random_price_cdf(P05, 1.0) == 0.0
    assert random_price_cdf(P05, 2.0) == 1.0
    assert random_price_cdf(P05, 1.5) == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert random_price_cdf(P05, 0.2) == 0.0
    assert random_price_cdf(P05, 5.0) == 1.0


@pytest.mark.parametrize("rho", RHOS)
def test_random_price_cdf_sanity(rho):
    p = QueueParams(rho, 1.0)
    f0, f1 = value_bounds(p)
    grid = np.linspace(f0 - 0.5, f1 + 0.5, 2001)
    vals = random_price_cdf(p, grid)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.all(np.diff(vals) >= -1e-14)
    assert random_price_cdf(p, f0) == 0.0
    assert random_price_cdf(p, f1) == 1.0


def test_random_price_quantile_examples():
    assert random_price_quantile(P05, 0.0) == pytest.approx(1.0, rel=1e-12)
    assert random_price_quantile(P05, 1.0) == pytest.approx(2.0, rel=1e-12)
    assert random_price_quantile(P05, 2.0 / 3.0) == pytest.approx(1.5, rel=1e-12)
    with pytest.raises(ValueError):
        random_price_quantile(P05, -0.1)
    with pytest.raises(ValueError):
        random_price_quantile(P05, 1.1)


@pytest.mark.parametrize("rho", RHOS)
def test_quantile_cdf_round_trip(rho):
    p = QueueParams(rho, 1.0)
    us = np.linspace(0.0, 1.0, 501)
    np.testing.assert_allclose(
        random_price_cdf(p, random_price_quantile(p, us)), us, atol=1e-10)


@pytest.mark.parametrize("rho", RHOS)
def test_fixed_point_identity(rho):
    # every supported price equals the worst-case priority value of the
    # customer asked to pay it
    p = QueueParams(rho, 1.0)
    f0, f1 = value_bounds(p)
    prices = np.linspace(f0, f1, 10_000)
    resid = prices * (1.0 - random_price_cdf(p, prices) * rho) \
        * p.mu * (1.0 - rho) - rho
    assert np.max(np.abs(resid)) <= 1e-10


def test_random_price_mean_examples():
    assert random_price_mean(P05) == pytest.approx(MEAN_05, abs=1e-12)
    assert random_price_mean(QueueParams(0.9, 1.0)) == pytest.approx(
        23.025850929940457, rel=1e-12)


@pytest.mark.parametrize("rho", RHOS)
def test_random_price_mean_vs_tail_quadrature(rho):
    p = QueueParams(rho, 1.0)
    f0, f1 = value_bounds(p)
    tail = integrate(lambda x: 1.0 - random_price_cdf(p, x), f0, f1,
                     abs_tol=1e-12, rel_tol=1e-12)
    assert random_price_mean(p) == pytest.approx(f0 + tail.value, abs=1e-8)
    assert f0 < random_price_mean(p) < f1


# ---------------------------------------------------------------------------
# discrete approximation
# ---------------------------------------------------------------------------

def test_discrete_grid_examples():
    pts = discrete_grid(P05, 1)
    assert len(pts) == 1
    assert pts[0] == PricePoint(1.0, 1.0)
    pts = discrete_grid(P05, 2)
    assert pts[0].price == pytest.approx(1.0, rel=1e-12)
    assert pts[1].price == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert [p.probability for p in pts] == [0.5, 0.5]
    with pytest.raises(ValueError):
        discrete_grid(P05, 0)


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_discrete_grid_structure(n):
    pts = discrete_grid(P05, n)
    prices = [p.price for p in pts]
    assert prices[0] == pytest.approx(value_bounds(P05)[0], rel=1e-12)
    assert all(b > a for a, b in zip(prices, prices[1:]))
    assert sum(p.probability for p in pts) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 10, 50])
def test_discrete_step_cdf_dominates_continuous(n):
    # each atom sits at the bottom of its quantile interval, so the step
    # CDF stays on or above the continuous one
    pts = discrete_grid(P05, n)
    prices = np.array([p.price for p in pts])
    cum = np.cumsum([p.probability for p in pts])
    grid = np.linspace(1.0, 2.0, 4001)
    step = np.where(grid[:, None] >= prices[None, :], 1.0, 0.0) @ \
        np.array([p.probability for p in pts])
    assert np.all(step >= random_price_cdf(P05, grid) - 1e-12)
    assert cum[-1] == pytest.approx(1.0, abs=1e-12)


def test_discrete_mean_examples():
    assert discrete_mean(P05, 1) == pytest.approx(1.0, rel=1e-12)
    assert discrete_mean(P05, 2) == pytest.approx(7.0 / 6.0, rel=1e-12)
    assert discrete_mean(P05, 10 ** 6) == pytest.approx(MEAN_05, abs=1e-5)
    with pytest.raises(ValueError):
        discrete_mean(P05, 0)


def test_discrete_mean_matches_grid_expectation():
    for n in (1, 2, 9, 33):
        pts = discrete_grid(P05, n)
        expect = math.fsum(p.price * p.probability for p in pts)
        assert discrete_mean(P05, n) == pytest.approx(expect, abs=1e-12)


def test_discrete_mean_monotone_and_bounded():
    mean = random_price_mean(P05)
    vals = [discrete_mean(P05, n) for n in range(1, 120)]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))
    assert all(v <= mean + 1e-14 for v in vals)
    # error decays like 1/n; constant fitted on the n-range below
    for n in (10, 100, 1000, 10_000):
        assert abs(discrete_mean(P05, n) - mean) <= 0.6 / n


# ---------------------------------------------------------------------------
# bid-for-priority baseline, homogeneous
# ---------------------------------------------------------------------------

def test_auction_cdf_examples():
    assert auction_cdf_homogeneous(P05, 0.0) == 0.0
    assert auction_cdf_homogeneous(P05, 3.0) == pytest.approx(1.0, abs=1e-12)
    assert auction_cdf_homogeneous(P05, 2.0) == pytest.approx(
        math.sqrt(2.0) - 1.0, rel=1e-12)
    assert auction_cdf_homogeneous(P05, -1.0) == 0.0
    assert auction_cdf_homogeneous(P05, 10.0) == 1.0


@pytest.mark.parametrize("rho", RHOS)
def test_auction_cdf_sanity(rho):
    p = QueueParams(rho, 1.0)
    lo, hi = auction_support_homogeneous(p)
    grid = np.linspace(lo, hi, 2001)
    vals = auction_cdf_homogeneous(p, grid)
    assert np.all((vals >= -1e-12) & (vals <= 1.0 + 1e-12))
    assert np.all(np.diff(vals) >= -1e-12)
    assert auction_cdf_homogeneous(p, lo) == pytest.approx(0.0, abs=1e-12)
    assert auction_cdf_homogeneous(p, hi) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rho", RHOS)
def test_auction_mean(rho):
    p = QueueParams(rho, 1.0)
    f1 = value_bounds(p)[1]
    assert auction_mean_homogeneous(p) == f1
    lo, hi = auction_support_homogeneous(p)
    tail = integrate(lambda y: 1.0 - auction_cdf_homogeneous(p, y), lo, hi,
                     abs_tol=1e-12, rel_tol=1e-12)
    assert tail.value == pytest.approx(f1, abs=1e-8)
    assert hi / auction_mean_homogeneous(p) == pytest.approx(2.0 - rho, abs=1e-10)


def test_auction_mean_examples():
    assert auction_mean_homogeneous(P05) == pytest.approx(2.0, rel=1e-12)
    assert auction_mean_homogeneous(QueueParams(0.9, 1.0)) == pytest.approx(
        90.0, rel=1e-12)


@pytest.mark.parametrize("rho", RHOS)
def test_auction_density_monotone(rho):
    # finite differences of B increase along the support: the mass piles
    # up toward the top payment
    p = QueueParams(rho, 1.0)
    lo, hi = auction_support_homogeneous(p)
    grid = np.linspace(lo, hi, 1000)
    dens = np.diff(auction_cdf_homogeneous(p, grid)) / np.diff(grid)
    assert np.all(np.diff(dens) > 0.0)


# ---------------------------------------------------------------------------
# heterogeneous customers
# ---------------------------------------------------------------------------

def test_hetero_price_examples():
    dist = Uniform(0.0, 2.0)
    assert hetero_price(P05, dist, 0.0) == 0.0
    assert hetero_price(P05, dist, 2.0) == pytest.approx(4.0, rel=1e-12)
    assert hetero_price(P05, dist, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-12)
    with pytest.raises(ValueError):
        hetero_price(P05, dist, -0.5)


@pytest.mark.parametrize("rho", RHOS)
def test_hetero_price_is_cost_times_value(rho):
    p = QueueParams(rho, 1.0)
    dist = Uniform(0.0, 2.0)
    for c in np.linspace(0.0, 2.0, 41):
        expected = c * priority_value(p, float(dist.cdf(c)))
        assert hetero_price(p, dist, float(c)) == pytest.approx(
            expected, rel=1e-12, abs=1e-15)


def test_hetero_price_monotone():
    dist = Uniform(0.0, 2.0)
    cs = np.linspace(0.0, 2.5, 200)
    prices = hetero_price(P05, dist, cs)
    assert np.all(np.diff(prices) >= 0.0)


def test_hetero_profit_value():
    dist = Uniform(0.0, 2.0)
    profit = hetero_profit(P05, dist)
    assert profit == pytest.approx(PROFIT_U02, abs=1e-8)
    # independent oracle: fine-grid trapezoid of the same integrand
    c = np.linspace(0.0, 2.0, 2 ** 21 + 1)
    trap = np.trapezoid(0.5 * c / (1.0 - 0.25 * c), c)
    assert profit == pytest.approx(trap, abs=1e-7)


def test_hetero_profit_vanishes_without_congestion():
    tiny = QueueParams(1e-9, 1.0)
    assert hetero_profit(tiny, Uniform(0.0, 2.0)) == pytest.approx(0.0, abs=1e-8)


def test_hetero_profit_monte_carlo():
    rng = np.random.default_rng(20240817)
    dist = Uniform(0.0, 2.0)
    cs = dist.sample(rng.random(10 ** 6))
    prices = hetero_price(P05, dist, cs)
    se = prices.std(ddof=1) / math.sqrt(prices.size)
    assert abs(prices.mean() - PROFIT_U02) <= 3.0 * se


def test_hetero_profit_bounds():
    dist = Uniform(0.0, 2.0)
    lo, hi = hetero_profit_bounds(P05, dist)
    assert (lo, hi) == pytest.approx((1.0, 2.0), rel=1e-12)
    assert lo < hetero_profit(P05, dist) < hi
    assert hi / lo == pytest.approx(1.0 / (1.0 - P05.rho), rel=1e-12)
    for rho in RHOS:
        p = QueueParams(rho, 1.0)
        lo, hi = hetero_profit_bounds(p, dist)
        assert lo < hetero_profit(p, dist) < hi


def test_auction_payment_hetero_examples():
    dist = Uniform(0.0, 2.0)
    assert auction_payment_hetero(P05, dist, 0.0) == 0.0
    # closed form via the substitution u = G(y):
    # (1/mu)((1 - G(c) rho)^-2 - 1); equals 3 at c = 2
    assert auction_payment_hetero(P05, dist, 2.0) == pytest.approx(3.0, abs=1e-9)
    for c in (0.3, 1.0, 1.7):
        closed = (1.0 / P05.mu) * ((1.0 - dist.cdf(c) * P05.rho) ** -2 - 1.0)
        assert auction_payment_hetero(P05, dist, c) == pytest.approx(
            closed, abs=1e-9)


def test_auction_payment_hetero_monotone():
    dist = Uniform(0.0, 2.0)
    cs = np.linspace(0.0, 2.0, 21)
    pays = [auction_payment_hetero(P05, dist, float(c)) for c in cs]
    assert all(b >= a for a, b in zip(pays, pays[1:]))


def test_auction_mean_hetero_dual_quadrature():
    dist = Uniform(0.0, 2.0)
    mine = auction_mean_hetero(P05, dist)
    # independent route: scipy nested quadrature of the same double integral
    other, _ = quad(
        lambda c: quad(lambda y: dist.pdf(y) / (1.0 - dist.cdf(y) * P05.rho) ** 3,
                       0.0, c, epsabs=1e-12)[0]
        * 2.0 * P05.rho / P05.mu * dist.pdf(c),
        0.0, 2.0, epsabs=1e-10)
    assert mine == pytest.approx(other, abs=1e-6)
    # substitution u = G(y) collapses the double integral to
    # rho/(mu (1 - rho)) for any continuous cost distribution
    assert mine == pytest.approx(P05.rho / (P05.mu * (1.0 - P05.rho)), abs=1e-7)


def test_auction_mean_hetero_properties():
    dist = Uniform(0.0, 2.0)
    tiny = QueueParams(1e-9, 1.0)
    assert auction_mean_hetero(tiny, dist) == pytest.approx(0.0, abs=1e-8)
    mean = auction_mean_hetero(P05, dist)
    assert mean <= auction_payment_hetero(P05, dist, 2.0) + 1e-9
    # Monte Carlo over the cost draw
    rng = np.random.default_rng(99)
    cs = dist.sample(rng.random(40_000))
    pays = (1.0 / P05.mu) * ((1.0 - dist.cdf(cs) * P05.rho) ** -2 - 1.0)
    se = pays.std(ddof=1) / math.sqrt(pays.size)
    assert abs(pays.mean() - mean) <= 3.0 * se


# ---------------------------------------------------------------------------
# sampling and specs
# ---------------------------------------------------------------------------

def test_sample_price_dispatch():
    assert sample_price(Flat(1.0), u=0.7) == 1.0
    assert sample_price(RandomOptimal(P05), u=2.0 / 3.0) == pytest.approx(
        1.5, rel=1e-12)
    assert sample_price(DiscreteOptimal(P05, 2), u=0.6) == pytest.approx(
        4.0 / 3.0, rel=1e-12)
    assert sample_price(DiscreteOptimal(P05, 2), u=0.5) == pytest.approx(
        1.0, rel=1e-12)
    assert sample_price(DiscreteOptimal(P05, 2), u=0.0) == pytest.approx(
        1.0, rel=1e-12)
    dist = Uniform(0.0, 2.0)
    assert sample_price(HeteroSchedule(P05, dist), c=1.0) == pytest.approx(
        4.0 / 3.0, rel=1e-12)


def test_sample_price_wrong_index_kind():
    with pytest.raises(TypeError):
        sample_price(RandomOptimal(P05), c=1.0)
    with pytest.raises(TypeError):
        sample_price(HeteroSchedule(P05, Uniform(0.0, 2.0)), u=0.5)
    with pytest.raises(TypeError):
        sample_price(AuctionHomogeneous(P05), u=0.5)
    with pytest.raises(TypeError):
        sample_price(AuctionHetero(P05, Uniform(0.0, 2.0)), c=0.5)


def test_sample_price_discrete_matches_grid():
    n = 7
    pts = discrete_grid(P05, n)
    us = np.linspace(0.0, 1.0, 1001)
    prices = sample_price(DiscreteOptimal(P05, n), u=us)
    grid_prices = {round(p.price, 12) for p in pts}
    assert {round(float(x), 12) for x in prices} <= grid_prices
    # empirical masses converge to 1/n each
    rng = np.random.default_rng(5)
    draws = sample_price(DiscreteOptimal(P05, n), u=rng.random(70_000))
    _, counts = np.unique(np.round(draws, 12), return_counts=True)
    assert counts.size == n
    np.testing.assert_allclose(counts / draws.size, 1.0 / n, atol=0.01)


def test_mechanism_validation():
    with pytest.raises(ValueError):
        Flat(-1.0)
    with pytest.raises(ValueError):
        DiscreteOptimal(P05, 0)


def test_mechanism_spec_round_trip():
    dist = Uniform(0.0, 2.0)
    for mech in (Flat(1.0), RandomOptimal(P05), DiscreteOptimal(P05, 8),
                 HeteroSchedule(P05, dist), AuctionHomogeneous(P05),
                 AuctionHetero(P05, dist)):
        text = mechanism_spec(mech)
        again = parse_mechanism(text, P05)
        assert mechanism_spec(again) == text
    assert parse_mechanism("hetero", P05, dist) == HeteroSchedule(P05, dist)
    with pytest.raises(ValueError):
        parse_mechanism("hetero", P05)
    with pytest.raises(ValueError):
        parse_mechanism("bogus 3", P05)
    with pytest.raises(ValueError):
        parse_mechanism("flat", P05)
