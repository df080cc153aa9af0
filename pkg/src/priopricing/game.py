"""The customers' buy-priority game.

Best responses and equilibria under a flat fee, a perturbation-based
stability check, and grid audits of the random mechanisms: does "everyone
accepts the drawn price" survive as the only equilibrium, and which
threshold profiles (pay iff the drawn price is at most a cutoff) are
equilibria?

Ties are resolved in favor of paying: a customer exactly indifferent
between buying priority and staying ordinary buys. Indifference is
detected with the absolute tolerance EPS_INDIFFERENCE.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import QueueParams, check_fraction, priority_value, value_bounds
from .mechanisms import PricePoint

# Absolute price/value tolerance below which a customer counts as indifferent.
EPS_INDIFFERENCE = 1e-9

# Perturbation applied to the premium fraction when classifying stability.
STABILITY_DELTA = 1e-4

# Probability mass treated as "nobody" when probing a CDF's support, and the
# price gap below which support separated by a flat CDF stretch is treated
# as contiguous.
_MASS_TOL = 1e-9
_GAP_TOL = 1e-6

# Point masses below this size are treated as continuous when the audit
# splits a price's own group from the mass strictly below it.
_ATOM_TOL = 1e-6


class Action(enum.Enum):
    PAY = "pay"
    NOT_PAY = "not_pay"
    INDIFFERENT = "indifferent"

    @property
    def pays(self) -> bool:
        """Whether the action results in a purchase (ties resolve to pay)."""
        return self is not Action.NOT_PAY


@dataclass(frozen=True)
class AllPay:
    pass


@dataclass(frozen=True)
class NonePay:
    pass


@dataclass(frozen=True)
class Mixed:
    q: float

    def __post_init__(self):
        check_fraction(self.q)


@dataclass(frozen=True)
class Threshold:
    """Pay iff the offered price is at most p_cut."""

    p_cut: float

    def __post_init__(self):
        if not (self.p_cut >= 0.0):
            raise ValueError(f"threshold must be >= 0, got {self.p_cut!r}")


StrategyProfile = AllPay | NonePay | Mixed | Threshold

STABLE = "stable"
UNSTABLE = "unstable"


@dataclass(frozen=True)
class EquilibriumReport:
    """Equilibria of the flat-price game with stability labels."""

    equilibria: tuple[tuple[StrategyProfile, str], ...]
    unique: bool
    revenue_worst_case: float


@dataclass(frozen=True)
class UniquenessReport:
    """Grid audit of "everyone pays the drawn price" under a price CDF.

    ``worst_gap`` is the largest excess of a support price over the
    worst-case value of priority for the customer drawing it (positive gap
    = a customer who would rather keep the money). ``equality_residual`` is
    the largest absolute such difference; for the revenue-optimal CDF it
    vanishes, since there every support price exactly matches the value.
    """

    holds: bool
    counterexamples: tuple[Threshold, ...]
    worst_gap: float
    equality_residual: float
    grid_size: int


@dataclass(frozen=True)
class EliminationResult:
    """Outcome of round-by-round elimination on a discrete price grid."""

    actions: tuple[str, ...]
    rounds: int
    all_pay: bool


# ---------------------------------------------------------------------------
# flat-price game
# ---------------------------------------------------------------------------

def best_response(params: QueueParams, tau: float, q: float) -> Action:
    """Best response to fee tau when a fraction q of the others buys."""
    if not (tau >= 0.0):
        raise ValueError(f"fee must be >= 0, got {tau!r}")
    value = priority_value(params, q)
    if tau < value - EPS_INDIFFERENCE:
        return Action.PAY
    if tau > value + EPS_INDIFFERENCE:
        return Action.NOT_PAY
    return Action.INDIFFERENT


def indifference_fraction(params: QueueParams, tau: float) -> float:
    """The premium fraction q_e at which a customer is indifferent to
    buying at fee tau: (1/rho)(1 - rho / (mu (1 - rho) tau)).

    Only defined for tau strictly inside the priority-value range.
    """
    f0, f1 = value_bounds(params)
    if not (f0 < tau < f1):
        raise ValueError(
            f"no interior indifference point: tau={tau!r} outside ({f0:.6g}, {f1:.6g})")
    rho, mu = params.rho, params.mu
    return (1.0 / rho) * (1.0 - rho / (mu * (1.0 - rho) * tau))


def _is_equilibrium(params: QueueParams, tau: float,
                    profile: StrategyProfile) -> bool:
    if isinstance(profile, AllPay):
        return best_response(params, tau, 1.0).pays
    if isinstance(profile, NonePay):
        return best_response(params, tau, 0.0) is Action.NOT_PAY
    if isinstance(profile, Mixed):
        return best_response(params, tau, profile.q) is Action.INDIFFERENT
    return False


def flat_price_equilibria(params: QueueParams, tau: float) -> EquilibriumReport:
    """All symmetric equilibria of the flat-fee game.

    Below the value range buying is dominant (unique all-pay); above it
    refusing is dominant (unique none-pay); strictly inside there are three
    equilibria: both pure profiles plus the indifference mixture, so the
    guaranteed revenue collapses to zero.
    """
    if not (tau >= 0.0):
        raise ValueError(f"fee must be >= 0, got {tau!r}")
    f0, f1 = value_bounds(params)
    if tau <= f0:
        profiles = [AllPay()]
    elif tau >= f1:
        profiles = [NonePay()]
    else:
        profiles = [AllPay(), NonePay(), Mixed(indifference_fraction(params, tau))]
    labeled = tuple(
        (p, classify_stability(params, tau, p)) for p in profiles)
    revenues = [_profile_revenue(tau, p) for p in profiles]
    return EquilibriumReport(
        equilibria=labeled,
        unique=len(profiles) == 1,
        revenue_worst_case=min(revenues),
    )


def _profile_revenue(tau: float, profile: StrategyProfile) -> float:
    if isinstance(profile, AllPay):
        return tau
    if isinstance(profile, NonePay):
        return 0.0
    if isinstance(profile, Mixed):
        return profile.q * tau
    raise TypeError(f"no flat-price revenue for {type(profile).__name__}")


def classify_stability(params: QueueParams, tau: float,
                       profile: StrategyProfile) -> str:
    """Label an equilibrium stable/unstable by perturbing the premium
    fraction by STABILITY_DELTA and checking whether best responses push
    back toward the profile or away from it."""
    if not _is_equilibrium(params, tau, profile):
        raise ValueError(f"profile {profile!r} is not an equilibrium at tau={tau!r}")
    d = STABILITY_DELTA
    if isinstance(profile, AllPay):
        return STABLE if best_response(params, tau, 1.0 - d).pays else UNSTABLE
    if isinstance(profile, NonePay):
        return STABLE if best_response(params, tau, d) is Action.NOT_PAY else UNSTABLE
    # Mixed: stable only if a nudge in either direction is self-correcting.
    q = profile.q
    up = best_response(params, tau, min(q + d, 1.0))
    down = best_response(params, tau, max(q - d, 0.0))
    restoring = (up is Action.NOT_PAY) and down.pays
    return STABLE if restoring else UNSTABLE


# ---------------------------------------------------------------------------
# CDF probing helpers
# ---------------------------------------------------------------------------

def _cdf_caller(price_cdf, hi: float):
    """Return a callable mapping ndarray -> ndarray, probing whether the
    user's CDF is already vectorized."""
    try:
        probe = np.asarray(price_cdf(np.array([0.0, hi])), dtype=float)
        if probe.shape == (2,):
            return lambda arr: np.asarray(price_cdf(arr), dtype=float)
    except Exception:
        pass
    return lambda arr: np.array([price_cdf(float(x)) for x in arr], dtype=float)


def _support_hi(price_cdf) -> float:
    """Bracket the essential supremum of the CDF's support by doubling."""
    hi = 1.0
    for _ in range(200):
        v = price_cdf(hi)
        if v >= 1.0 - 1e-12:
            return hi
        if not (0.0 <= v <= 1.0 + 1e-12):
            raise ValueError(f"CDF returned {v!r}, outside [0, 1]")
        hi *= 2.0
    raise ValueError("CDF does not reach 1 on [0, 2^200]; invalid or unbounded")


def _quantiles(cdf_vec, us: np.ndarray, hi: float) -> np.ndarray:
    """Generalized quantiles inf{p : CDF(p) >= u} by batched bisection."""
    lo = np.zeros_like(us)
    up = np.full_like(us, hi)
    for _ in range(80):
        mid = 0.5 * (lo + up)
        ge = cdf_vec(mid) >= us
        up = np.where(ge, mid, up)
        lo = np.where(ge, lo, mid)
    return up


def _check_valid_cdf(cdf_vec, hi: float, grid_size: int) -> None:
    probe = cdf_vec(np.linspace(0.0, hi, min(grid_size, 4096)))
    if np.any(probe < -1e-12) or np.any(probe > 1.0 + 1e-12):
        raise ValueError("price CDF leaves [0, 1] on the audit grid")
    if np.any(np.diff(probe) < -1e-12):
        raise ValueError("price CDF is not non-decreasing on the audit grid")


# ---------------------------------------------------------------------------
# audits of random mechanisms
# ---------------------------------------------------------------------------

def verify_unique_all_pay(params: QueueParams, price_cdf,
                          grid_size: int = 10_000) -> UniquenessReport:
    """Audit whether paying any drawn price is at worst a tie.

    On a grid uniform in probability space, each support price p is
    compared with the worst-case value of priority for the customer who
    draws it, assuming everyone drawing strictly below p pays and — worst
    case — nobody else does: rho / (mu (1 - rho)(1 - rho CDF(p-))). For a
    continuous CDF the left limit is CDF(p) itself; at an atom (detected
    above mass 1e-6) the atom's own mass is excluded, which is what the
    cheapest-up induction on a discrete grid commits. The audit holds if
    no grid price exceeds its value by more than EPS_INDIFFERENCE; each
    violating price is returned as a threshold profile at which acceptance
    would stall.
    """
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    rho, mu = params.rho, params.mu
    hi = _support_hi(price_cdf)
    cdf_vec = _cdf_caller(price_cdf, hi)
    _check_valid_cdf(cdf_vec, hi, grid_size)
    us = (np.arange(grid_size, dtype=float) + 1.0) / (grid_size + 1.0)
    prices = _quantiles(cdf_vec, us, hi)
    masses = cdf_vec(prices)
    step = np.maximum(1e-9, 1e-9 * np.abs(prices))
    atoms = masses - cdf_vec(prices - step)
    paying = np.where(atoms > _ATOM_TOL, masses - atoms, masses)
    values = rho / (mu * (1.0 - rho) * (1.0 - rho * paying))
    gaps = prices - values
    bad = gaps > EPS_INDIFFERENCE
    return UniquenessReport(
        holds=not bool(np.any(bad)),
        counterexamples=tuple(Threshold(float(p)) for p in prices[bad]),
        worst_gap=float(np.max(gaps)),
        equality_residual=float(np.max(np.abs(gaps))),
        grid_size=grid_size,
    )


def find_threshold_equilibria(params: QueueParams, price_cdf,
                              grid_size: int = 10_000) -> list[Threshold]:
    """All cutoffs p' for which "pay iff the drawn price is <= p'" is an
    equilibrium of the mechanism with the given price CDF.

    A cutoff qualifies when (a) every drawn price up to p' is at most the
    value of priority at the induced paying fraction CDF(p') (weak - ties
    buy), and (b) every drawn price above p' strictly exceeds that value
    (anyone merely indifferent would buy, breaking the profile). Candidates
    come from a probability-space grid plus midpoints of support gaps and a
    below-support cutoff standing for "nobody pays". One threshold per
    distinct paying fraction is returned, anchored at the largest support
    price it covers.
    """
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    rho, mu = params.rho, params.mu
    hi = _support_hi(price_cdf)
    cdf_vec = _cdf_caller(price_cdf, hi)
    _check_valid_cdf(cdf_vec, hi, grid_size)
    us = (np.arange(grid_size, dtype=float) + 1.0) / (grid_size + 1.0)
    grid_prices = _quantiles(cdf_vec, us, hi)

    candidates = [0.0, hi]
    candidates.extend(float(p) for p in grid_prices)
    # Midpoints of jumps in the quantile sequence land inside support gaps,
    # where a cutoff separates payers from refusers cleanly.
    jumps = np.nonzero(np.diff(grid_prices) > _GAP_TOL)[0]
    candidates.extend(float(0.5 * (grid_prices[j] + grid_prices[j + 1]))
                      for j in jumps)
    if grid_prices[0] > _GAP_TOL:
        candidates.append(float(0.5 * grid_prices[0]))

    cand = np.asarray(candidates, dtype=float)
    masses = cdf_vec(cand)
    values = rho / (mu * (1.0 - rho) * (1.0 - rho * masses))
    # highest price actually covered by each cutoff, and cheapest price above
    covered = _quantiles(cdf_vec, masses, hi)
    above = _quantiles(cdf_vec, np.minimum(masses + _MASS_TOL, 1.0), hi)
    nobody_below = masses <= _MASS_TOL
    nobody_above = masses >= 1.0 - _MASS_TOL
    # (a) every covered price is worth paying (ties buy)
    ok_a = nobody_below | (covered <= values + EPS_INDIFFERENCE)
    # (b) every price above is strictly too dear (mere indifference would buy)
    ok_b = nobody_above | (above > values + _GAP_TOL)
    accept = ok_a & ok_b

    found: dict[float, Threshold] = {}
    for i in np.nonzero(accept)[0]:
        key = round(float(masses[i]), 9)
        if key not in found:
            anchor = 0.0 if nobody_below[i] else float(covered[i])
            found[key] = Threshold(anchor)
    return [found[k] for k in sorted(found)]


def iterated_elimination(params: QueueParams,
                         grid: list[PricePoint]) -> EliminationResult:
    """Resolve a discrete price grid round by round, cheapest price first.

    Each round fixes "pay" at the lowest unresolved price if paying it is
    worth the priority value under the mass already committed to paying;
    once a price is not covered even by that worst case, elimination
    stalls and the remaining prices stay unresolved.
    """
    rho, mu = params.rho, params.mu
    order = sorted(range(len(grid)), key=lambda i: grid[i].price)
    actions = ["unresolved"] * len(grid)
    committed = 0.0
    rounds = 0
    for i in order:
        value = rho / (mu * (1.0 - rho) * (1.0 - rho * min(committed, 1.0)))
        if grid[i].price <= value + EPS_INDIFFERENCE:
            actions[i] = "pay"
            committed += grid[i].probability
            rounds += 1
        else:
            break
    return EliminationResult(
        actions=tuple(actions),
        rounds=rounds,
        all_pay=all(a == "pay" for a in actions),
    )


def step_cdf(grid: list[PricePoint]):
    """Step CDF of a discrete price grid, usable with the audit functions."""
    prices = np.array([p.price for p in grid], dtype=float)
    order = np.argsort(prices)
    prices = prices[order]
    cum = np.cumsum(np.array([grid[i].probability for i in order], dtype=float))

    def cdf(p):
        arr = np.asarray(p, dtype=float)
        idx = np.searchsorted(prices, arr, side="right")
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if arr.ndim == 0 else out

    return cdf
