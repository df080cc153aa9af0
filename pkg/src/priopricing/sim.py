"""Discrete-event validation of the queue formulas and Monte-Carlo revenue
estimation for the pricing mechanisms.

Backend selection happens at import: the compiled kernel is used when the
extension built, otherwise the pure-Python event loop. Both consume the
same random streams and produce bit-identical sample paths. Set
PRIOPRICING_PURE_PYTHON=1 to force the fallback.

Randomness is driven by numpy's PCG64 seeded through SeedSequence: every
replication spawns four child streams (arrivals, services, class
assignment, price draws), so switching pricing on never perturbs the
queue path.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernel as _kernel_py
from .core import QueueParams, check_fraction
from .costs import CostDistribution
from .mechanisms import (DiscreteOptimal, Flat, HeteroSchedule, PriceMechanism,
                         RandomOptimal, sample_price)

try:
    from . import _kernel_c
except ImportError:  # extension not built
    _kernel_c = None

_BATCHES = 30


def available_backends() -> list[str]:
    return ["python"] if _kernel_c is None else ["cython", "python"]


def default_backend() -> str:
    if os.environ.get("PRIOPRICING_PURE_PYTHON") == "1" or _kernel_c is None:
        return "python"
    return "cython"


def _kernel_for(backend: str | None):
    name = backend or default_backend()
    if name == "python":
        return _kernel_py, "python"
    if name == "cython":
        if _kernel_c is None:
            raise RuntimeError("compiled kernel not available; build the extension "
                               "or use backend='python'")
        return _kernel_c, "cython"
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class SimConfig:
    """One simulation request: queue parameters, class-assignment
    probability, run length, warmup, seed and replication count."""

    params: QueueParams
    q: float
    num_customers: int
    warmup_customers: int | None = None  # None -> 1% of num_customers
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        check_fraction(self.q)
        warm = self.resolved_warmup
        if not (self.num_customers > warm >= 0):
            raise ValueError(
                f"need num_customers > warmup >= 0, got "
                f"{self.num_customers}, {warm}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def resolved_warmup(self) -> int:
        if self.warmup_customers is None:
            return self.num_customers // 100
        return self.warmup_customers


@dataclass(frozen=True)
class SimResult:
    """Empirical per-class sojourn means, revenue estimate, and run
    bookkeeping. Fields are None where a run produces no such statistic
    (e.g. no premium customers, or a pure pricing run with no queue)."""

    mean_sojourn_premium: float | None
    se_sojourn_premium: float | None
    mean_sojourn_ordinary: float | None
    se_sojourn_ordinary: float | None
    mean_revenue_per_customer: float | None
    se_revenue_per_customer: float | None
    count_premium: int
    count_ordinary: int
    seed: int
    replications: int
    admitted: int
    departed: int
    in_system_at_end: int
    backend: str

    CSV_COLUMNS = ("mean_sojourn_premium", "se_sojourn_premium",
                   "mean_sojourn_ordinary", "se_sojourn_ordinary",
                   "mean_revenue_per_customer", "se_revenue_per_customer",
                   "count_premium", "count_ordinary", "seed", "replications",
                   "admitted", "departed", "in_system_at_end", "backend")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.CSV_COLUMNS}

    def csv_row(self) -> list:
        return [getattr(self, name) for name in self.CSV_COLUMNS]


def _batch_se(series: np.ndarray, batches: int = _BATCHES) -> float | None:
    """Standard error by batch means; sojourn series are autocorrelated so
    a plain std/sqrt(n) would be optimistic."""
    n = series.size
    if n < 2:
        return None
    b = min(batches, n)
    means = np.array([chunk.mean() for chunk in np.array_split(series, b)])
    return float(means.std(ddof=1) / math.sqrt(b))


def _combine(rep_means: list[float | None],
             rep_ses: list[float | None]) -> tuple[float | None, float | None]:
    vals = [m for m in rep_means if m is not None]
    if not vals:
        return None, None
    if len(rep_means) == 1:
        return vals[0], rep_ses[0]
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return mean, se


def simulate_priority_queue(cfg: SimConfig,
                            backend: str | None = None) -> SimResult:
    """Event-driven run of the two-class preemptive-resume queue.

    Poisson arrivals at rate lam, exponential services at rate mu, each
    arrival premium with probability q; FCFS within class. Deterministic
    given the seed. Statistics cover customers arriving after the warmup;
    each replication contributes its own mean and, across replications,
    the spread of those means gives the standard error (batch means within
    the single replication otherwise).
    """
    kernel, backend_name = _kernel_for(backend)
    warm = cfg.resolved_warmup
    rep_prem_mean, rep_prem_se = [], []
    rep_ord_mean, rep_ord_se = [], []
    count_premium = count_ordinary = 0
    admitted = departed = in_system = 0

    for rep_ss in np.random.SeedSequence(cfg.seed).spawn(cfg.replications):
        streams = rep_ss.spawn(4)
        bitgens = [np.random.PCG64(s) for s in streams[:3]]
        prem, soj, rep_admitted, rep_departed, rep_in_system = kernel.run_queue(
            cfg.params.lam, cfg.params.mu, cfg.q,
            cfg.num_customers, warm, bitgens)
        mask = prem.astype(bool)
        prem_soj = soj[mask]
        ord_soj = soj[~mask]
        count_premium += int(prem_soj.size)
        count_ordinary += int(ord_soj.size)
        admitted += rep_admitted
        departed += rep_departed
        in_system += rep_in_system
        rep_prem_mean.append(float(prem_soj.mean()) if prem_soj.size else None)
        rep_prem_se.append(_batch_se(prem_soj))
        rep_ord_mean.append(float(ord_soj.mean()) if ord_soj.size else None)
        rep_ord_se.append(_batch_se(ord_soj))

    prem_mean, prem_se = _combine(rep_prem_mean, rep_prem_se)
    ord_mean, ord_se = _combine(rep_ord_mean, rep_ord_se)
    return SimResult(
        mean_sojourn_premium=prem_mean,
        se_sojourn_premium=prem_se,
        mean_sojourn_ordinary=ord_mean,
        se_sojourn_ordinary=ord_se,
        mean_revenue_per_customer=None,
        se_revenue_per_customer=None,
        count_premium=count_premium,
        count_ordinary=count_ordinary,
        seed=cfg.seed,
        replications=cfg.replications,
        admitted=admitted,
        departed=departed,
        in_system_at_end=in_system,
        backend=backend_name,
    )


def _price_stream(seed: int, n: int) -> np.ndarray:
    # stream 3 of the spawn is reserved for price draws
    streams = np.random.SeedSequence(seed).spawn(4)
    return np.random.Generator(np.random.PCG64(streams[3])).random(n)


def simulate_revenue(params: QueueParams, mechanism: PriceMechanism,
                     num_customers: int, seed: int = 0) -> SimResult:
    """Monte-Carlo mean payment under a homogeneous-customer mechanism.

    One price draw per customer; everyone accepts (the equilibrium outcome
    the random mechanisms are built to induce). Pure pricing run: no queue
    dynamics are simulated.
    """
    if not isinstance(mechanism, (Flat, RandomOptimal, DiscreteOptimal)):
        raise ValueError(
            f"mechanism {type(mechanism).__name__} is not priced by a uniform "
            "draw; use simulate_hetero_revenue for cost-indexed schemes")
    mech_params = getattr(mechanism, "params", None)
    if mech_params is not None and mech_params != params:
        raise ValueError("mechanism was built for different queue parameters")
    if num_customers < 1:
        raise ValueError("num_customers must be >= 1")
    u = _price_stream(seed, num_customers)
    prices = np.asarray(sample_price(mechanism, u=u), dtype=float)
    se = 0.0 if isinstance(mechanism, Flat) else \
        float(prices.std(ddof=1) / math.sqrt(num_customers))
    return SimResult(
        mean_sojourn_premium=None, se_sojourn_premium=None,
        mean_sojourn_ordinary=None, se_sojourn_ordinary=None,
        mean_revenue_per_customer=float(prices.mean()),
        se_revenue_per_customer=se,
        count_premium=num_customers, count_ordinary=0,
        seed=seed, replications=1,
        admitted=num_customers, departed=num_customers, in_system_at_end=0,
        backend="numpy",
    )


def simulate_hetero_revenue(params: QueueParams, cost_dist: CostDistribution,
                            num_customers: int, seed: int = 0) -> SimResult:
    """Monte-Carlo mean payment under the cost-indexed schedule: each
    customer draws a cost rate from cost_dist and pays its scheduled
    price."""
    if num_customers < 1:
        raise ValueError("num_customers must be >= 1")
    u = _price_stream(seed, num_customers)
    costs = np.asarray(cost_dist.sample(u), dtype=float)
    prices = np.asarray(
        sample_price(HeteroSchedule(params, cost_dist), c=costs), dtype=float)
    return SimResult(
        mean_sojourn_premium=None, se_sojourn_premium=None,
        mean_sojourn_ordinary=None, se_sojourn_ordinary=None,
        mean_revenue_per_customer=float(prices.mean()),
        se_revenue_per_customer=float(prices.std(ddof=1) / math.sqrt(num_customers)),
        count_premium=num_customers, count_ordinary=0,
        seed=seed, replications=1,
        admitted=num_customers, departed=num_customers, in_system_at_end=0,
        backend="numpy",
    )
