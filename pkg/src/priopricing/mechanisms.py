"""Priority-pricing schemes for the two-class preemptive M/M/1 queue.

Covers the flat fee, the revenue-maximizing random fee (continuous and
discretized), the cost-indexed schedule for heterogeneous customers, and
the bid-for-priority payment rules used as comparison baselines. All
formula-level functions accept scalars or numpy arrays where a grid makes
sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import QueueParams, value_bounds
from .costs import CostDistribution, integrate


# ---------------------------------------------------------------------------
# mechanism descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Flat:
    """One posted price for priority."""

    tau: float

    def __post_init__(self):
        if not (self.tau >= 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"flat price must be >= 0, got {self.tau!r}")


@dataclass(frozen=True)
class RandomOptimal:
    """Random fee drawn from the revenue-maximizing continuous CDF."""

    params: QueueParams


@dataclass(frozen=True)
class DiscreteOptimal:
    """n-point discretization of the optimal random fee."""

    params: QueueParams
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"grid size n must be a positive integer, got {self.n!r}")


@dataclass(frozen=True)
class HeteroSchedule:
    """Cost-indexed price schedule for heterogeneous customers."""

    params: QueueParams
    cost_dist: CostDistribution


@dataclass(frozen=True)
class AuctionHomogeneous:
    """Bid-for-priority baseline, identical cost parameters."""

    params: QueueParams


@dataclass(frozen=True)
class AuctionHetero:
    """Bid-for-priority baseline with a cost distribution."""

    params: QueueParams
    cost_dist: CostDistribution


PriceMechanism = (
    Flat | RandomOptimal | DiscreteOptimal | HeteroSchedule
    | AuctionHomogeneous | AuctionHetero
)


@dataclass(frozen=True)
class PricePoint:
    """One atom of a discrete price distribution."""

    price: float
    probability: float

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"probability must lie in [0, 1], got {self.probability!r}")


# ---------------------------------------------------------------------------
# optimal random fee
# ---------------------------------------------------------------------------

def random_price_cdf(params: QueueParams, p):
    """CDF of the revenue-maximizing random fee.

    Zero below the solo-priority value, one above the standby-escape value,
    and 1/rho - 1/(mu (1 - rho) p) in between; every price on the support is
    then exactly the worst-case value of priority for the customer asked to
    pay it.
    """
    f0, f1 = value_bounds(params)
    rho, mu = params.rho, params.mu
    arr = np.asarray(p, dtype=float)
    safe = np.where((arr > f0) & (arr < f1), arr, f1)
    inner = 1.0 / rho - 1.0 / (mu * (1.0 - rho) * safe)
    out = np.where(arr <= f0, 0.0, np.where(arr >= f1, 1.0, inner))
    return float(out) if arr.ndim == 0 else out


def random_price_quantile(params: QueueParams, u):
    """Inverse of random_price_cdf: rho / (mu (1 - rho)(1 - rho u))."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("quantile argument must lie in [0, 1]")
    rho, mu = params.rho, params.mu
    out = rho / (mu * (1.0 - rho) * (1.0 - rho * arr))
    return float(out) if arr.ndim == 0 else out


def random_price_mean(params: QueueParams) -> float:
    """Mean of the optimal random fee: -log(1 - rho) / (mu (1 - rho))."""
    rho, mu = params.rho, params.mu
    return -math.log1p(-rho) / (mu * (1.0 - rho))


def discrete_grid(params: QueueParams, n: int) -> list[PricePoint]:
    """n equi-probable price atoms p_i at the i/n quantiles, i = 0..n-1.

    Each atom carries the mass of the quantile interval above it, so the
    resulting step CDF lies on or above the continuous one and the discrete
    fee slightly undercuts it.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"grid size n must be a positive integer, got {n!r}")
    eps = 1.0 / n
    return [PricePoint(float(random_price_quantile(params, i * eps)), eps)
            for i in range(n)]


def discrete_mean(params: QueueParams, n: int) -> float:
    """Mean of the n-point discrete fee:
    (1/n)(rho / (mu (1 - rho))) sum_i 1 / (1 - rho i / n)."""
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"grid size n must be a positive integer, got {n!r}")
    rho, mu = params.rho, params.mu
    eps = 1.0 / n
    i = np.arange(n, dtype=float)
    return float(eps * (rho / (mu * (1.0 - rho))) * np.sum(1.0 / (1.0 - rho * i * eps)))


# ---------------------------------------------------------------------------
# bid-for-priority baseline, homogeneous customers
# ---------------------------------------------------------------------------

def auction_support_homogeneous(params: QueueParams) -> tuple[float, float]:
    """Payment support [0, 1/(mu (1 - rho)^2) - 1/mu] of the bidding game."""
    rho, mu = params.rho, params.mu
    return 0.0, 1.0 / (mu * (1.0 - rho) ** 2) - 1.0 / mu


def auction_cdf_homogeneous(params: QueueParams, y):
    """Equilibrium payment CDF of the bidding game:
    1 - 1/rho + (1/rho)(1/(1 - rho)^2 - mu y)^(-1/2) on its support."""
    rho, mu = params.rho, params.mu
    lo, hi = auction_support_homogeneous(params)
    arr = np.asarray(y, dtype=float)
    safe = np.where((arr > lo) & (arr < hi), arr, lo)
    inner = 1.0 - 1.0 / rho + (1.0 / rho) / np.sqrt(1.0 / (1.0 - rho) ** 2 - mu * safe)
    out = np.where(arr <= lo, 0.0, np.where(arr >= hi, 1.0, inner))
    return float(out) if arr.ndim == 0 else out


def auction_mean_homogeneous(params: QueueParams) -> float:
    """Mean equilibrium payment, rho / (mu (1 - rho)^2).

    Equals the upper end of the priority-value range: the whole surplus of
    escaping the standby position is bid away on average.
    """
    rho, mu = params.rho, params.mu
    return rho / (mu * (1.0 - rho) ** 2)


# ---------------------------------------------------------------------------
# heterogeneous customers
# ---------------------------------------------------------------------------

def hetero_price(params: QueueParams, cost_dist: CostDistribution, c):
    """Price charged to a customer with waiting-cost rate c:
    rho c / (mu (1 - rho)(1 - G(c) rho)) with G the cost CDF.

    This is c times the priority value at premium fraction G(c): cheaper
    types are recruited first, which makes the expensive types willing to
    pay more.
    """
    arr = np.asarray(c, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("cost rate must be >= 0")
    rho, mu = params.rho, params.mu
    out = rho * arr / (mu * (1.0 - rho) * (1.0 - np.asarray(cost_dist.cdf(arr)) * rho))
    return float(out) if arr.ndim == 0 else out


def hetero_profit(params: QueueParams, cost_dist: CostDistribution,
                  abs_tol: float = 1e-10, rel_tol: float = 1e-9) -> float:
    """Mean revenue per customer of the cost-indexed schedule:
    (rho / (mu (1 - rho))) * integral of c g(c) / (1 - G(c) rho) dc.

    Raises QuadratureError (with the partial result attached) if the
    adaptive rule cannot reach tolerance.
    """
    rho, mu = params.rho, params.mu
    lo, hi = cost_dist.truncated_support()

    def kernel(c):
        return c * cost_dist.pdf(c) / (1.0 - cost_dist.cdf(c) * rho)

    quad = integrate(kernel, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol)
    return rho / (mu * (1.0 - rho)) * quad.value


def hetero_profit_bounds(params: QueueParams,
                         cost_dist: CostDistribution) -> tuple[float, float]:
    """Bounds rho E(C) / (mu (1 - rho)) and rho E(C) / (mu (1 - rho)^2)
    on the cost-indexed schedule's revenue."""
    rho, mu = params.rho, params.mu
    ec = cost_dist.mean()
    return rho * ec / (mu * (1.0 - rho)), rho * ec / (mu * (1.0 - rho) ** 2)


def auction_payment_hetero(params: QueueParams, cost_dist: CostDistribution,
                           c: float, abs_tol: float = 1e-10,
                           rel_tol: float = 1e-9) -> float:
    """Equilibrium payment of a cost-rate-c customer in the bidding game:
    (2 rho / mu) * integral over y in [0, c] of g(y) / (1 - G(y) rho)^3 dy."""
    if c < 0.0:
        raise ValueError("cost rate must be >= 0")
    rho, mu = params.rho, params.mu
    lo, hi = cost_dist.truncated_support()
    upper = min(c, hi)
    if upper <= lo:
        return 0.0

    def kernel(y):
        return cost_dist.pdf(y) / (1.0 - cost_dist.cdf(y) * rho) ** 3

    quad = integrate(kernel, lo, upper, abs_tol=abs_tol, rel_tol=rel_tol)
    return 2.0 * rho / mu * quad.value


def auction_mean_hetero(params: QueueParams, cost_dist: CostDistribution,
                        abs_tol: float = 1e-8, rel_tol: float = 1e-8) -> float:
    """Mean equilibrium payment in the heterogeneous bidding game, by
    nested quadrature (inner integral evaluated 10x tighter)."""
    lo, hi = cost_dist.truncated_support()

    def outer(c):
        pay = auction_payment_hetero(params, cost_dist, c,
                                     abs_tol=0.1 * abs_tol, rel_tol=0.1 * rel_tol)
        return pay * cost_dist.pdf(c)

    quad = integrate(outer, lo, hi, abs_tol=abs_tol, rel_tol=rel_tol)
    return quad.value


# ---------------------------------------------------------------------------
# sampling and text specs
# ---------------------------------------------------------------------------

def sample_price(mechanism: PriceMechanism, u=None, c=None):
    """Price charged under ``mechanism`` at uniform draw ``u`` (random
    mechanisms) or cost rate ``c`` (cost-indexed ones). Vectorized over
    whichever index the mechanism uses."""
    if isinstance(mechanism, Flat):
        if u is not None and np.asarray(u).ndim > 0:
            return np.full(np.asarray(u).shape, mechanism.tau)
        return mechanism.tau
    if isinstance(mechanism, RandomOptimal):
        if u is None:
            raise TypeError("RandomOptimal mechanism is sampled by u, not c")
        return random_price_quantile(mechanism.params, u)
    if isinstance(mechanism, DiscreteOptimal):
        if u is None:
            raise TypeError("DiscreteOptimal mechanism is sampled by u, not c")
        arr = np.asarray(u, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("quantile argument must lie in [0, 1]")
        n = mechanism.n
        # atom i covers cumulative mass ((i)/n, (i+1)/n]; u = 0 maps to atom 0
        idx = np.clip(np.ceil(arr * n).astype(np.int64) - 1, 0, n - 1)
        prices = np.asarray(random_price_quantile(
            mechanism.params, idx / float(n)))
        return float(prices) if arr.ndim == 0 else prices
    if isinstance(mechanism, HeteroSchedule):
        if c is None:
            raise TypeError("HeteroSchedule mechanism is indexed by c, not u")
        return hetero_price(mechanism.params, mechanism.cost_dist, c)
    raise TypeError(f"no sampling rule for mechanism {type(mechanism).__name__}")


def mechanism_spec(mechanism: PriceMechanism) -> str:
    """Round-trippable text form of a mechanism (see parse_mechanism)."""
    if isinstance(mechanism, Flat):
        return f"flat {mechanism.tau:g}"
    if isinstance(mechanism, RandomOptimal):
        return "random-optimal"
    if isinstance(mechanism, DiscreteOptimal):
        return f"discrete {mechanism.n}"
    if isinstance(mechanism, HeteroSchedule):
        return f"hetero {mechanism.cost_dist.spec()}"
    if isinstance(mechanism, AuctionHomogeneous):
        return "auction"
    if isinstance(mechanism, AuctionHetero):
        return f"auction-hetero {mechanism.cost_dist.spec()}"
    raise TypeError(f"unknown mechanism {type(mechanism).__name__}")


def parse_mechanism(text: str, params: QueueParams,
                    cost_dist: CostDistribution | None = None) -> PriceMechanism:
    """Parse a mechanism spec: ``flat <tau>``, ``random-optimal``,
    ``discrete <n>``, ``hetero [dist spec]``, ``auction``, or
    ``auction-hetero [dist spec]``.

    Cost-indexed kinds take an inline distribution spec or fall back to the
    separately supplied ``cost_dist``.
    """
    from .costs import parse_distribution

    tokens = text.split()
    if not tokens:
        raise ValueError("empty mechanism spec")
    kind = tokens[0].lower()
    rest = tokens[1:]

    def need_dist():
        if rest:
            return parse_distribution(" ".join(rest))
        if cost_dist is None:
            raise ValueError(f"mechanism {kind!r} needs a cost distribution")
        return cost_dist

    if kind == "flat":
        if len(rest) != 1:
            raise ValueError("flat mechanism takes exactly one price")
        return Flat(float(rest[0]))
    if kind == "random-optimal":
        if rest:
            raise ValueError("random-optimal takes no parameters")
        return RandomOptimal(params)
    if kind == "discrete":
        if len(rest) != 1:
            raise ValueError("discrete mechanism takes exactly one grid size")
        return DiscreteOptimal(params, int(rest[0]))
    if kind == "hetero":
        return HeteroSchedule(params, need_dist())
    if kind == "auction":
        if rest:
            raise ValueError("auction takes no parameters")
        return AuctionHomogeneous(params)
    if kind == "auction-hetero":
        return AuctionHetero(params, need_dist())
    raise ValueError(f"unknown mechanism kind {kind!r}")
