"""Closed-form sojourn times and the value of priority in a two-class
preemptive M/M/1 queue.

All quantities are per-customer means in steady state, service time
included. A fraction ``q`` of customers holds preemptive priority
("premium"); the rest ("ordinary") are served only when no premium work is
present. Within a class the order is first-come first-served.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Constructors reject utilizations this close to saturation: the closed
# forms blow up like 1/(1-rho) and lose all meaning past this point.
MAX_RHO = 1.0 - 1e-12


@dataclass(frozen=True)
class QueueParams:
    """Arrival rate, service rate, and the derived utilization rho."""

    lam: float
    mu: float
    rho: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"arrival rate must be positive, got {self.lam!r}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"service rate must be positive, got {self.mu!r}")
        rho = self.lam / self.mu
        if rho >= MAX_RHO:
            raise ValueError(
                f"utilization rho={rho:.6g} at or beyond the stability limit"
            )
        object.__setattr__(self, "rho", rho)


def check_fraction(q: float) -> float:
    """Validate a premium-class fraction, returning it unchanged."""
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"premium fraction must lie in [0, 1], got {q!r}")
    return q


def mean_wait_premium(params: QueueParams, q: float) -> float:
    """Mean sojourn of a premium customer: 1 / (mu (1 - q rho)).

    Premium customers preempt ordinary ones, so only the premium share q of
    the load is visible to them.
    """
    check_fraction(q)
    return 1.0 / (params.mu * (1.0 - q * params.rho))


def mean_wait_ordinary(params: QueueParams, q: float) -> float:
    """Mean sojourn of an ordinary customer: 1 / (mu (1 - rho)(1 - q rho))."""
    check_fraction(q)
    return 1.0 / (params.mu * (1.0 - params.rho) * (1.0 - q * params.rho))


def priority_value(params: QueueParams, q: float) -> float:
    """Sojourn saved by switching ordinary -> premium when a fraction q
    is premium: rho / (mu (1 - rho)(1 - q rho)).

    Increasing in q: the bigger the premium crowd, the more it is worth
    joining it (a follow-the-crowd effect).
    """
    check_fraction(q)
    return params.rho / (params.mu * (1.0 - params.rho) * (1.0 - q * params.rho))


def value_bounds(params: QueueParams) -> tuple[float, float]:
    """Range of the priority value over q in [0, 1].

    The lower end is the gain of a lone premium customer over the plain
    FCFS queue; the upper end is the gain of escaping the standby position
    (served only when the server would otherwise idle) when everyone else
    is premium.
    """
    return priority_value(params, 0.0), priority_value(params, 1.0)
