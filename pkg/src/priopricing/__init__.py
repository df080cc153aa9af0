"""Priority pricing for the two-class preemptive M/M/1 queue.

Closed-form sojourn and priority-value formulas, the revenue-maximizing
random fee and its discretization, cost-indexed pricing for heterogeneous
customers, bid-for-priority baselines, equilibrium analysis of the
customers' game, and a seeded discrete-event simulator that validates the
analytics.
"""

from .core import (MAX_RHO, QueueParams, check_fraction, mean_wait_ordinary,
                   mean_wait_premium, priority_value, value_bounds)
from .costs import (CostDistribution, Exponential, LogNormal, QuadratureError,
                    QuadratureResult, TruncatedNormal, Uniform, integrate,
                    parse_distribution)
from .game import (Action, AllPay, EliminationResult, EquilibriumReport, Mixed,
                   NonePay, Threshold, UniquenessReport, best_response,
                   classify_stability, find_threshold_equilibria,
                   flat_price_equilibria, indifference_fraction,
                   iterated_elimination, step_cdf, verify_unique_all_pay)
from .mechanisms import (AuctionHetero, AuctionHomogeneous, DiscreteOptimal,
                         Flat, HeteroSchedule, PriceMechanism, PricePoint,
                         RandomOptimal, auction_cdf_homogeneous,
                         auction_mean_hetero, auction_mean_homogeneous,
                         auction_payment_hetero, auction_support_homogeneous,
                         discrete_grid, discrete_mean, hetero_price,
                         hetero_profit, hetero_profit_bounds, mechanism_spec,
                         parse_mechanism, random_price_cdf, random_price_mean,
                         random_price_quantile, sample_price)
from .sim import (SimConfig, SimResult, available_backends, default_backend,
                  simulate_hetero_revenue, simulate_priority_queue,
                  simulate_revenue)

__version__ = "0.1.0"

__all__ = [
    "MAX_RHO", "QueueParams", "check_fraction", "mean_wait_ordinary",
    "mean_wait_premium", "priority_value", "value_bounds",
    "CostDistribution", "Exponential", "LogNormal", "QuadratureError",
    "QuadratureResult", "TruncatedNormal", "Uniform", "integrate",
    "parse_distribution",
    "Action", "AllPay", "EliminationResult", "EquilibriumReport", "Mixed",
    "NonePay", "Threshold", "UniquenessReport", "best_response",
    "classify_stability", "find_threshold_equilibria", "flat_price_equilibria",
    "indifference_fraction", "iterated_elimination", "step_cdf",
    "verify_unique_all_pay",
    "AuctionHetero", "AuctionHomogeneous", "DiscreteOptimal", "Flat",
    "HeteroSchedule", "PriceMechanism", "PricePoint", "RandomOptimal",
    "auction_cdf_homogeneous", "auction_mean_hetero",
    "auction_mean_homogeneous", "auction_payment_hetero",
    "auction_support_homogeneous", "discrete_grid", "discrete_mean",
    "hetero_price", "hetero_profit", "hetero_profit_bounds", "mechanism_spec",
    "parse_mechanism", "random_price_cdf", "random_price_mean",
    "random_price_quantile", "sample_price",
    "SimConfig", "SimResult", "available_backends", "default_backend",
    "simulate_hetero_revenue", "simulate_priority_queue", "simulate_revenue",
]
